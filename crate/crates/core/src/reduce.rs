//! Deterministic reductions over index ranges.
//!
//! Work is split into fixed-length chunks whose boundaries do not depend on
//! the number of worker threads. Each chunk is folded sequentially and the
//! chunk results are merged in index order, so the result is bit-identical
//! for any thread count. Floating-point sums use Neumaier compensation.

use rayon::prelude::*;

use crate::error::Result;

/// Number of indices folded sequentially per task.
pub const CHUNK_LEN: usize = 2048;

/// Neumaier's variant of Kahan summation.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub const fn new() -> Self {
        Self {
            sum: 0.0,
            comp: 0.0,
        }
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.comp += other.comp;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        // an infinite term leaves NaN in the compensation
        if !self.sum.is_finite() {
            return self.sum;
        }
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Folds `0..len` chunk by chunk (possibly in parallel) and merges the chunk
/// accumulators in order.
pub fn chunked_reduce<A, I, F, M>(len: usize, init: I, fold: F, merge: M) -> A
where
    A: Send,
    I: Fn() -> A + Sync,
    F: Fn(&mut A, usize) + Sync,
    M: Fn(&mut A, A),
{
    let chunks = len.div_ceil(CHUNK_LEN);
    let partials: Vec<A> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = init();
            for i in c * CHUNK_LEN..len.min((c + 1) * CHUNK_LEN) {
                fold(&mut acc, i);
            }
            acc
        })
        .collect();
    let mut total = init();
    for p in partials {
        merge(&mut total, p);
    }
    total
}

/// Compensated, thread-count independent sum of `term(i)` over `0..len`.
pub fn sum_by<F>(len: usize, term: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    chunked_reduce(
        len,
        CompensatedSum::new,
        |acc, i| acc.add(term(i)),
        |acc, part| acc.merge(&part),
    )
    .value()
}

/// Runs `f` on a dedicated pool with `threads` workers, or on the global pool
/// when no hint is given.
pub fn with_threads<R, F>(threads: Option<usize>, f: F) -> Result<R>
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build()?;
            Ok(pool.install(f))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_cancelled_small_terms() {
        let xs = [1.0, 1e100, 1.0, -1e100];
        let naive: f64 = xs.iter().sum();
        let comp: CompensatedSum = xs.iter().copied().collect();
        assert_eq!(naive, 0.0);
        assert_eq!(comp.value(), 2.0);
    }

    #[test]
    fn chunked_sum_matches_across_thread_counts() {
        let n = 10 * CHUNK_LEN + 17;
        let term = |i: usize| ((i as f64) * 0.37).sin() / (1.0 + i as f64);
        let one = with_threads(Some(1), || sum_by(n, term)).unwrap();
        let four = with_threads(Some(4), || sum_by(n, term)).unwrap();
        assert_eq!(one.to_bits(), four.to_bits());
    }

    #[test]
    fn empty_range_sums_to_zero() {
        assert_eq!(sum_by(0, |_| 1.0), 0.0);
    }
}
