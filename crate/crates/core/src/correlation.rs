//! Bond-bond correlations between z-bonds and their decay.
//!
//! For two z-bonds in cells separated by `d = r1 - r2 ≠ 0`:
//!
//! ```text
//! <σσ>        = (1/N) Σ_q ε_q/E_q
//! <σσ σσ>     = (1/N²) Σ_{q≠q'} {cos[(q - q')·d] - 1} (Δ_q Δ_q' - ε_q ε_q')/(E_q E_q')
//! C(d)        = <σσ σσ> - <σσ>²
//! ```
//!
//! with `N = 2L²`. The double sum is evaluated literally by
//! [`four_point_naive`]. Because the bracket vanishes at `q = q'` and `Δ/E` is
//! odd in `q`, the double sum collapses to
//! `C(d) = (|S_Δ(d)|² - |S_ε(d)|²)/N²` with `S_X(d) = Σ_q e^{iq·d} X_q/E_q`,
//! which [`correlation_profile_fast`] evaluates for every `d` at once with two
//! 2D FFTs.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fit::linear_fit;
use crate::model::{check_no_zero_mode, phase_of, Couplings, MomentumGrid, Phase};
use crate::reduce::{chunked_reduce, sum_by, CompensatedSum};

/// Magnitudes below this are treated as round-off and left out of decay fits.
pub const DEFAULT_NOISE_FLOOR: f64 = 1e-28;

/// A point is dropped from a fit when it is smaller than this fraction of
/// both neighbours (the log-scale dip next to a sign change).
pub const DEFAULT_DIP_FACTOR: f64 = 0.1;

/// `<σ^z σ^z>` on one z-bond, `(1/N) Σ_q ε_q/E_q`.
pub fn bond_expectation(c: &Couplings, grid: &MomentumGrid) -> Result<f64> {
    check_no_zero_mode(c, grid)?;
    let nodes = grid.nodes();
    let s = sum_by(nodes.len(), |i| {
        let (e, d) = nodes[i].eps_delta(c);
        e / e.hypot(d)
    });
    Ok(s / grid.sites() as f64)
}

/// Maps a cell displacement onto the representative in `[-h, h]²`.
fn reduce_separation(grid: &MomentumGrid, d: (i64, i64)) -> Result<(i64, i64)> {
    let l = grid.size() as i64;
    let h = grid.half();
    let wrap = |x: i64| {
        let m = x.rem_euclid(l);
        if m > h {
            m - l
        } else {
            m
        }
    };
    let r = (wrap(d.0), wrap(d.1));
    if r == (0, 0) {
        return Err(Error::invalid(
            "d",
            format!(
                "separation ({}, {}) is the same cell modulo L = {l}",
                d.0, d.1
            ),
        ));
    }
    Ok(r)
}

/// `ε_q/E_q` and `Δ_q/E_q` on the grid.
fn normalized_components(c: &Couplings, grid: &MomentumGrid) -> Result<(Vec<f64>, Vec<f64>)> {
    check_no_zero_mode(c, grid)?;
    Ok(grid
        .nodes()
        .iter()
        .map(|n| {
            let (e, d) = n.eps_delta(c);
            let en = e.hypot(d);
            (e / en, d / en)
        })
        .unzip())
}

/// The four-spin expectation by the literal double sum over `q ≠ q'`.
/// `O(L⁴)`; the reference definition the fast path is checked against.
pub fn four_point_naive(c: &Couplings, grid: &MomentumGrid, d: (i64, i64)) -> Result<f64> {
    let (dx, dy) = reduce_separation(grid, d)?;
    let (a, b) = normalized_components(c, grid)?;
    let l = grid.size();
    let li = l as i64;
    let cos_table: Vec<f64> = (0..l)
        .map(|k| (2.0 * PI * k as f64 / l as f64).cos())
        .collect();
    // q·d = 2π p/L with p = nx dx + ny dy
    let phase: Vec<i64> = grid
        .nodes()
        .iter()
        .map(|n| (n.nx * dx + n.ny * dy).rem_euclid(li))
        .collect();
    let m = a.len();
    let total = chunked_reduce(
        m,
        CompensatedSum::new,
        |acc, i| {
            for j in 0..m {
                if j == i {
                    continue;
                }
                let k = (phase[i] - phase[j]).rem_euclid(li) as usize;
                acc.add((cos_table[k] - 1.0) * (b[i] * b[j] - a[i] * a[j]));
            }
        },
        |acc, part| acc.merge(&part),
    );
    let n = grid.sites() as f64;
    Ok(total.value() / (n * n))
}

/// `C(d)` from the literal double sum.
pub fn connected_correlation(c: &Couplings, grid: &MomentumGrid, d: (i64, i64)) -> Result<f64> {
    let four = four_point_naive(c, grid, d)?;
    let bond = bond_expectation(c, grid)?;
    Ok(four - bond * bond)
}

/// How the scalar distance `r` of a decay curve relates to the displacement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DistanceConvention {
    /// `d = (r, r)`, `r` counted in cells.
    DiagonalCells,
}

/// `C(d)` for every displacement of an `L x L` torus.
#[derive(Clone, Debug, Serialize)]
pub struct CorrelationProfile {
    size: usize,
    couplings: Couplings,
    convention: DistanceConvention,
    /// Row-major over `(dx, dy) ∈ [-h, h]²`; the origin is NaN.
    values: Vec<f64>,
}

impl CorrelationProfile {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn couplings(&self) -> &Couplings {
        &self.couplings
    }

    pub fn convention(&self) -> DistanceConvention {
        self.convention
    }

    fn half(&self) -> i64 {
        (self.size as i64 - 1) / 2
    }

    /// `C(dx, dy)` with the displacement taken modulo `L`; `None` at the origin.
    pub fn get(&self, dx: i64, dy: i64) -> Option<f64> {
        let l = self.size as i64;
        let h = self.half();
        let wrap = |x: i64| {
            let m = x.rem_euclid(l);
            if m > h {
                m - l
            } else {
                m
            }
        };
        let (x, y) = (wrap(dx), wrap(dy));
        if (x, y) == (0, 0) {
            return None;
        }
        Some(self.values[((x + h) as usize) * self.size + (y + h) as usize])
    }

    /// Every nonzero displacement with its value.
    pub fn entries(&self) -> impl Iterator<Item = (i64, i64, f64)> + '_ {
        let h = self.half();
        (-h..=h)
            .flat_map(move |x| (-h..=h).map(move |y| (x, y)))
            .filter(|&d| d != (0, 0))
            .map(move |(x, y)| (x, y, self.get(x, y).unwrap_or(f64::NAN)))
    }

    /// `(r, C(r, r))` for `r = 1..=(L-1)/2`.
    pub fn diagonal(&self) -> Vec<(f64, f64)> {
        (1..=self.half())
            .map(|r| (r as f64, self.get(r, r).unwrap_or(f64::NAN)))
            .collect()
    }
}

/// In-place unnormalized inverse 2D DFT of a row-major `l x l` array.
fn inverse_fft2(buf: &mut [Complex64], l: usize, planner: &mut FftPlanner<f64>) {
    let fft = planner.plan_fft_inverse(l);
    fft.process(buf);
    let mut t = vec![Complex64::default(); buf.len()];
    for i in 0..l {
        for j in 0..l {
            t[j * l + i] = buf[i * l + j];
        }
    }
    fft.process(&mut t);
    for i in 0..l {
        for j in 0..l {
            buf[i * l + j] = t[j * l + i];
        }
    }
}

/// `C(d)` for all `d` via `S_ε` and `S_Δ` computed by FFT.
pub fn correlation_profile_fast(c: &Couplings, grid: &MomentumGrid) -> Result<CorrelationProfile> {
    let (a, b) = normalized_components(c, grid)?;
    let l = grid.size();
    let li = l as i64;
    let mut s_eps = vec![Complex64::default(); l * l];
    let mut s_delta = vec![Complex64::default(); l * l];
    for (k, n) in grid.nodes().iter().enumerate() {
        let idx = (n.nx.rem_euclid(li) as usize) * l + n.ny.rem_euclid(li) as usize;
        s_eps[idx] = Complex64::new(a[k], 0.0);
        s_delta[idx] = Complex64::new(b[k], 0.0);
    }
    let mut planner = FftPlanner::new();
    inverse_fft2(&mut s_eps, l, &mut planner);
    inverse_fft2(&mut s_delta, l, &mut planner);

    let n2 = (grid.sites() as f64).powi(2);
    let h = grid.half();
    let mut values = Vec::with_capacity(l * l);
    for x in -h..=h {
        for y in -h..=h {
            if (x, y) == (0, 0) {
                values.push(f64::NAN);
                continue;
            }
            let idx = (x.rem_euclid(li) as usize) * l + y.rem_euclid(li) as usize;
            values.push((s_delta[idx].norm_sqr() - s_eps[idx].norm_sqr()) / n2);
        }
    }
    Ok(CorrelationProfile {
        size: l,
        couplings: *c,
        convention: DistanceConvention::DiagonalCells,
        values,
    })
}

/// `ξ` from `1/ξ = 2 asinh(sqrt(2Jz - 1)/(1 - Jz))`, for `1/2 < Jz < 1`.
pub fn correlation_length_theory(jz: f64) -> Result<f64> {
    if !(jz > 0.5 && jz < 1.0) {
        return Err(Error::Domain(format!("jz = {jz} is outside (1/2, 1)")));
    }
    Ok(1.0 / (2.0 * ((2.0 * jz - 1.0).sqrt() / (1.0 - jz)).asinh()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DecayKind {
    /// `|C| ∝ r^(-p)`.
    PowerLaw,
    /// `|C| ∝ exp(-r/ξ)`.
    Exponential,
}

/// Inclusive range of distances used by a fit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FitWindow {
    pub r_min: f64,
    pub r_max: f64,
}

impl FitWindow {
    pub fn new(r_min: f64, r_max: f64) -> Result<Self> {
        if !(r_min > 0.0 && r_max > r_min && r_max.is_finite()) {
            return Err(Error::invalid(
                "window",
                format!("need 0 < r_min < r_max, got [{r_min}, {r_max}]"),
            ));
        }
        Ok(Self { r_min, r_max })
    }

    fn contains(&self, r: f64) -> bool {
        r >= self.r_min && r <= self.r_max
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FitOptions {
    pub dip_factor: f64,
    pub noise_floor: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            dip_factor: DEFAULT_DIP_FACTOR,
            noise_floor: DEFAULT_NOISE_FLOOR,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayFit {
    pub kind: DecayKind,
    /// The exponent `p` for a power law, `1/ξ` for an exponential.
    pub rate: f64,
    pub rate_stderr: f64,
    pub window: FitWindow,
    pub points_used: usize,
    /// RMS residual of `ln|C|` about the fitted line.
    pub rms_residual: f64,
    /// Distances inside the window left out (sign changes, dips, round-off).
    pub excluded: Vec<f64>,
}

impl DecayFit {
    /// `ξ` and its standard error, for exponential fits.
    pub fn correlation_length(&self) -> Option<(f64, f64)> {
        match self.kind {
            DecayKind::Exponential => {
                Some((1.0 / self.rate, self.rate_stderr / (self.rate * self.rate)))
            }
            DecayKind::PowerLaw => None,
        }
    }
}

/// Splits the window's points into usable `(r, |C|)` pairs and excluded distances.
fn usable_points(
    series: &[(f64, f64)],
    window: &FitWindow,
    opts: &FitOptions,
) -> (Vec<(f64, f64)>, Vec<f64>) {
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for (i, &(r, v)) in series.iter().enumerate() {
        if !window.contains(r) {
            continue;
        }
        let prev = i.checked_sub(1).map(|k| series[k].1);
        let next = series.get(i + 1).map(|p| p.1);
        let crosses = |n: Option<f64>| n.is_some_and(|n| n.signum() != v.signum());
        let dip = match (prev, next) {
            (Some(p), Some(n)) => v.abs() < opts.dip_factor * p.abs().min(n.abs()),
            _ => false,
        };
        let bad = !v.is_finite()
            || v == 0.0
            || v.abs() < opts.noise_floor
            || crosses(prev)
            || crosses(next)
            || dip;
        if bad {
            dropped.push(r);
        } else {
            kept.push((r, v.abs()));
        }
    }
    (kept, dropped)
}

fn fit_series(
    kind: DecayKind,
    series: &[(f64, f64)],
    window: FitWindow,
    opts: &FitOptions,
) -> Result<DecayFit> {
    let (kept, excluded) = usable_points(series, &window, opts);
    if kept.len() < 3 {
        return Err(Error::fit(format!(
            "only {} usable points in [{}, {}]",
            kept.len(),
            window.r_min,
            window.r_max
        )));
    }
    let xs: Vec<f64> = kept
        .iter()
        .map(|&(r, _)| match kind {
            DecayKind::Exponential => r,
            DecayKind::PowerLaw => r.ln(),
        })
        .collect();
    let ys: Vec<f64> = kept.iter().map(|&(_, v)| v.ln()).collect();
    let line = linear_fit(&xs, &ys)?;
    Ok(DecayFit {
        kind,
        rate: -line.slope,
        rate_stderr: line.slope_stderr,
        window,
        points_used: line.points,
        rms_residual: line.rms_residual,
        excluded,
    })
}

/// Least-squares fit of `ln|C|` against `r`. Phase-agnostic.
pub fn fit_exponential_series(
    series: &[(f64, f64)],
    window: FitWindow,
    opts: &FitOptions,
) -> Result<DecayFit> {
    fit_series(DecayKind::Exponential, series, window, opts)
}

/// Least-squares fit of `ln|C|` against `ln r`. Phase-agnostic.
pub fn fit_power_law_series(
    series: &[(f64, f64)],
    window: FitWindow,
    opts: &FitOptions,
) -> Result<DecayFit> {
    fit_series(DecayKind::PowerLaw, series, window, opts)
}

fn require_phase(profile: &CorrelationProfile, want: Phase, what: &str) -> Result<()> {
    let got = phase_of(profile.couplings())?;
    if got != want {
        return Err(Error::invalid(
            "profile",
            format!("{what} fits apply to the {want} phase, couplings are in phase {got}"),
        ));
    }
    Ok(())
}

/// Exponential fit along the diagonal cut; gapped (A) phase only.
pub fn fit_exponential(
    profile: &CorrelationProfile,
    window: FitWindow,
    opts: &FitOptions,
) -> Result<DecayFit> {
    require_phase(profile, Phase::A, "exponential")?;
    fit_exponential_series(&profile.diagonal(), window, opts)
}

/// Power-law fit along the diagonal cut; gapless (B) phase only.
pub fn fit_power_law(
    profile: &CorrelationProfile,
    window: FitWindow,
    opts: &FitOptions,
) -> Result<DecayFit> {
    require_phase(profile, Phase::B, "power-law")?;
    fit_power_law_series(&profile.diagonal(), window, opts)
}
