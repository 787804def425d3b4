//! Susceptibility sweeps along a line, peak detection and finite-size scaling.
//!
//! Near the critical point the peak height grows as `χ_max/N ∝ L^μ` and the
//! curves of different sizes collapse onto one master function
//! `(χ_max - χ)/χ = f[L^ν (λ - λ_max)]`; `α = μ/ν`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fidelity::line_point;
use crate::fit::linear_fit;
use crate::model::{lowest_excitations, EvolutionLine, LineKind, MomentumGrid};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepSample {
    pub lambda: f64,
    pub chi_f: f64,
    /// `χ_F/N` with `N = 2L²`.
    pub chi_per_site: f64,
    pub gap: f64,
}

/// A λ value the sweep could not evaluate, e.g. a grid zero mode.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SkippedSample {
    pub lambda: f64,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRecord {
    pub line: LineKind,
    pub size: usize,
    /// Strictly increasing in λ.
    pub samples: Vec<SweepSample>,
    pub skipped: Vec<SkippedSample>,
}

impl SweepRecord {
    pub fn lambdas(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.lambda).collect()
    }

    pub fn chis(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.chi_f).collect()
    }
}

/// `steps` equally spaced values from `lo` to `hi` inclusive.
pub fn lambda_grid(lo: f64, hi: f64, steps: usize) -> Result<Vec<f64>> {
    if steps < 2 {
        return Err(Error::invalid(
            "steps",
            format!("need at least 2, got {steps}"),
        ));
    }
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(Error::invalid(
            "window",
            format!("need lo < hi, got [{lo}, {hi}]"),
        ));
    }
    let span = hi - lo;
    let last = (steps - 1) as f64;
    Ok((0..steps)
        .map(|k| {
            if k == steps - 1 {
                hi
            } else {
                lo + span * (k as f64 / last)
            }
        })
        .collect())
}

fn check_window(line: &EvolutionLine, lo: f64, hi: f64) -> Result<()> {
    for v in [lo, hi] {
        if !line.contains(v) {
            let (a, b, _) = line.domain();
            return Err(Error::invalid(
                "window",
                format!(
                    "[{lo}, {hi}] leaves the domain ({a}, {b}) of the {} line",
                    line.kind()
                ),
            ));
        }
    }
    Ok(())
}

/// Closed-form χ_F and the gap on a uniform λ grid. Samples hitting a zero
/// mode are recorded in `skipped` instead of aborting.
pub fn sweep(
    kind: LineKind,
    lo: f64,
    hi: f64,
    steps: usize,
    grid: &MomentumGrid,
) -> Result<SweepRecord> {
    let line: Option<EvolutionLine> = kind.into();
    let line = line
        .ok_or_else(|| Error::invalid("line", "sweeps run on the jx-eq-jy and jz-third lines"))?;
    check_window(&line, lo, hi)?;
    let lambdas = lambda_grid(lo, hi, steps)?;
    let n = grid.sites() as f64;
    let mut samples = Vec::with_capacity(steps);
    let mut skipped = Vec::new();
    for lambda in lambdas {
        match line_point(kind, lambda, grid) {
            Ok(p) => samples.push(SweepSample {
                lambda,
                chi_f: p.chi,
                chi_per_site: p.chi / n,
                gap: 2.0 * p.min_energy,
            }),
            Err(e @ Error::Degenerate { .. }) => skipped.push(SkippedSample {
                lambda,
                reason: e.to_string(),
            }),
            Err(e) => return Err(e),
        }
    }
    Ok(SweepRecord {
        line: kind,
        size: grid.size(),
        samples,
        skipped,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Peak {
    pub lambda: f64,
    pub chi: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GlobalPeak {
    /// Vertex of the parabola through the largest sample and its neighbours.
    pub lambda: f64,
    pub chi: f64,
    /// Position of the largest sample in the record.
    pub index: usize,
    /// False when the largest sample sits on the window edge; then no
    /// refinement is done and the sample itself is reported.
    pub interior: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PeakSet {
    pub window: (f64, f64),
    /// Strict local maxima, in λ order.
    pub peaks: Vec<Peak>,
    pub global: GlobalPeak,
}

impl PeakSet {
    pub fn count(&self) -> usize {
        self.peaks.len()
    }
}

/// Vertex of the parabola through three points with distinct abscissae.
pub fn parabola_vertex(p0: (f64, f64), p1: (f64, f64), p2: (f64, f64)) -> Option<(f64, f64)> {
    let f01 = (p1.1 - p0.1) / (p1.0 - p0.0);
    let f12 = (p2.1 - p1.1) / (p2.0 - p1.0);
    let a = (f12 - f01) / (p2.0 - p0.0);
    if a.is_nan() || a >= 0.0 {
        return None;
    }
    let x = 0.5 * (p0.0 + p1.0) - f01 / (2.0 * a);
    let y = p0.1 + f01 * (x - p0.0) + a * (x - p0.0) * (x - p1.0);
    Some((x, y))
}

/// Strict local maxima of χ_F within `window`, plus the refined global maximum.
pub fn find_peaks(record: &SweepRecord, window: (f64, f64)) -> Result<PeakSet> {
    let (lo, hi) = window;
    let first = record.samples.partition_point(|s| s.lambda < lo);
    let last = record.samples.partition_point(|s| s.lambda <= hi);
    if first >= last {
        return Err(Error::invalid(
            "window",
            format!(
                "no samples of the L = {} record fall in [{lo}, {hi}]",
                record.size
            ),
        ));
    }
    let s = &record.samples[first..last];
    let peaks = (1..s.len().saturating_sub(1))
        .filter(|&i| s[i].chi_f > s[i - 1].chi_f && s[i].chi_f > s[i + 1].chi_f)
        .map(|i| Peak {
            lambda: s[i].lambda,
            chi: s[i].chi_f,
        })
        .collect();

    let imax = (0..s.len())
        .reduce(|a, b| if s[b].chi_f > s[a].chi_f { b } else { a })
        .unwrap_or(0);
    let interior = imax > 0 && imax + 1 < s.len();
    let pt = |i: usize| (s[i].lambda, s[i].chi_f);
    let (lambda, chi) = if interior {
        parabola_vertex(pt(imax - 1), pt(imax), pt(imax + 1)).unwrap_or(pt(imax))
    } else {
        pt(imax)
    };
    Ok(PeakSet {
        window,
        peaks,
        global: GlobalPeak {
            lambda,
            chi,
            index: first + imax,
            interior,
        },
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

/// `μ` from the least-squares slope of `ln(χ_max/N)` against `ln L`.
pub fn fit_mu(sizes: &[usize], per_site_max: &[f64]) -> Result<Estimate> {
    if sizes.len() != per_site_max.len() {
        return Err(Error::invalid(
            "sizes",
            "one peak value per size is required",
        ));
    }
    if sizes.len() < 3 {
        return Err(Error::invalid(
            "sizes",
            format!("need at least 3 sizes, got {}", sizes.len()),
        ));
    }
    if let Some(v) = per_site_max.iter().find(|v| v.is_nan() || **v <= 0.0) {
        return Err(Error::Domain(format!(
            "peak values must be positive, got {v}"
        )));
    }
    if sizes.contains(&0) {
        return Err(Error::Domain("sizes must be positive".into()));
    }
    let xs: Vec<f64> = sizes.iter().map(|&l| (l as f64).ln()).collect();
    let ys: Vec<f64> = per_site_max.iter().map(|v| v.ln()).collect();
    let line = linear_fit(&xs, &ys)?;
    Ok(Estimate {
        value: line.slope,
        stderr: line.slope_stderr,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CollapseOptions {
    pub nu_range: (f64, f64),
    /// Only points with `|L^ν (λ - λ_max)| ≤ x_max` enter the residual.
    pub x_max: f64,
    /// Uniform ν values scanned to bracket the minimum.
    pub scan_points: usize,
    /// Bracket width at which golden-section search stops.
    pub tol: f64,
}

impl Default for CollapseOptions {
    fn default() -> Self {
        Self {
            nu_range: (0.7, 1.3),
            x_max: 1.0,
            scan_points: 41,
            tol: 1e-6,
        }
    }
}

/// One size's rescaled curve.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CollapseCurve {
    pub size: usize,
    pub lambda_max: f64,
    pub chi_max: f64,
    /// `(λ, x, y)` with `x = L^ν (λ - λ_max)` and `y = (χ_max - χ)/χ`.
    pub points: Vec<(f64, f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CollapseResult {
    pub nu: Estimate,
    pub mu: Estimate,
    pub alpha: f64,
    pub residual: f64,
    pub options: CollapseOptions,
    pub curves: Vec<CollapseCurve>,
    /// `(ν, residual)` for every ν evaluated, sorted by ν.
    pub residual_curve: Vec<(f64, f64)>,
}

struct Prepared {
    size: usize,
    lambda_max: f64,
    chi_max: f64,
    lambdas: Vec<f64>,
    ys: Vec<f64>,
}

fn prepare(records: &[SweepRecord]) -> Result<Vec<Prepared>> {
    if records.len() < 3 {
        return Err(Error::invalid(
            "records",
            format!("a collapse needs at least 3 sizes, got {}", records.len()),
        ));
    }
    records
        .iter()
        .map(|r| {
            let (lo, hi) = match (r.samples.first(), r.samples.last()) {
                (Some(a), Some(b)) => (a.lambda, b.lambda),
                _ => {
                    return Err(Error::invalid(
                        "records",
                        format!("L = {} is empty", r.size),
                    ))
                }
            };
            let pk = find_peaks(r, (lo, hi))?;
            if !pk.global.interior {
                return Err(Error::fit(format!(
                    "the global maximum of L = {} lies on the edge of its window",
                    r.size
                )));
            }
            Ok(Prepared {
                size: r.size,
                lambda_max: pk.global.lambda,
                chi_max: pk.global.chi,
                lambdas: r.lambdas(),
                ys: r
                    .samples
                    .iter()
                    .map(|s| (pk.global.chi - s.chi_f) / s.chi_f)
                    .collect(),
            })
        })
        .collect()
}

fn rescaled(p: &Prepared, nu: f64, x_max: f64) -> Vec<(f64, f64)> {
    let scale = (p.size as f64).powf(nu);
    p.lambdas
        .iter()
        .zip(&p.ys)
        .map(|(&l, &y)| (scale * (l - p.lambda_max), y))
        .filter(|(x, _)| x.abs() <= x_max)
        .collect()
}

fn interpolate(sorted: &[(f64, f64)], x: f64) -> Option<f64> {
    let first = sorted.first()?;
    let last = sorted.last()?;
    if x < first.0 || x > last.0 {
        return None;
    }
    let k = sorted.partition_point(|p| p.0 < x);
    if k == 0 {
        return Some(first.1);
    }
    let (a, b) = (sorted[k - 1], sorted[k.min(sorted.len() - 1)]);
    if b.0 == a.0 {
        return Some(b.1);
    }
    Some(a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0))
}

/// Leave-one-size-out residual `Σ(y - ŷ)²/Σ y²`, with `ŷ` the piecewise-linear
/// interpolant of the pooled other sizes.
fn collapse_residual(data: &[Prepared], nu: f64, x_max: f64) -> f64 {
    let curves: Vec<Vec<(f64, f64)>> = data.iter().map(|p| rescaled(p, nu, x_max)).collect();
    let (mut num, mut den) = (0.0, 0.0);
    for (i, own) in curves.iter().enumerate() {
        let mut pooled: Vec<(f64, f64)> = curves
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .flat_map(|(_, c)| c.iter().copied())
            .collect();
        pooled.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        for &(x, y) in own {
            if let Some(yi) = interpolate(&pooled, x) {
                num += (y - yi) * (y - yi);
                den += y * y;
            }
        }
    }
    if den > 0.0 {
        num / den
    } else {
        f64::INFINITY
    }
}

/// Half-width of the region around `best` where the residual stays below twice its minimum.
fn nu_uncertainty(curve: &[(f64, f64)], best: f64, r_min: f64) -> f64 {
    let limit = 2.0 * r_min;
    let k = curve.partition_point(|p| p.0 < best);
    let crossing = |a: (f64, f64), b: (f64, f64)| a.0 + (b.0 - a.0) * (limit - a.1) / (b.1 - a.1);
    let mut left = curve.first().map_or(best, |p| p.0);
    for i in (1..k.min(curve.len())).rev() {
        if curve[i - 1].1 > limit {
            left = crossing(curve[i - 1], curve[i]);
            break;
        }
    }
    let mut right = curve.last().map_or(best, |p| p.0);
    for i in k..curve.len().saturating_sub(1) {
        if curve[i + 1].1 > limit {
            right = crossing(curve[i], curve[i + 1]);
            break;
        }
    }
    0.5 * (right - left)
}

/// Fits ν by minimizing the collapse residual: a uniform scan brackets the
/// minimum, golden-section search refines it.
pub fn collapse(records: &[SweepRecord], opts: CollapseOptions) -> Result<CollapseResult> {
    let (lo, hi) = opts.nu_range;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::invalid(
            "nu_range",
            format!("need 0 < lo < hi, got [{lo}, {hi}]"),
        ));
    }
    if opts.scan_points < 3 {
        return Err(Error::invalid("scan_points", "need at least 3"));
    }
    if opts.x_max.is_nan() || opts.x_max <= 0.0 {
        return Err(Error::invalid(
            "x_max",
            format!("must be positive, got {}", opts.x_max),
        ));
    }
    let data = prepare(records)?;
    let residual = |nu: f64| collapse_residual(&data, nu, opts.x_max);

    let step = (hi - lo) / (opts.scan_points - 1) as f64;
    let scan: Vec<f64> = (0..opts.scan_points)
        .map(|k| {
            if k == opts.scan_points - 1 {
                hi
            } else {
                lo + step * k as f64
            }
        })
        .collect();
    let mut curve: Vec<(f64, f64)> = scan.par_iter().map(|&nu| (nu, residual(nu))).collect();
    let ibest = (0..curve.len())
        .reduce(|a, b| if curve[b].1 < curve[a].1 { b } else { a })
        .unwrap_or(0);
    if ibest == 0 || ibest == curve.len() - 1 || !curve[ibest].1.is_finite() {
        return Err(Error::Fit {
            reason: format!("no interior minimum of the collapse residual in [{lo}, {hi}]"),
            residual_curve: curve,
        });
    }

    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (curve[ibest - 1].0, curve[ibest + 1].0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (residual(c), residual(d));
    curve.push((c, fc));
    curve.push((d, fd));
    while b - a > opts.tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = residual(c);
            curve.push((c, fc));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = residual(d);
            curve.push((d, fd));
        }
    }
    let (nu, r_nu) = if fc <= fd { (c, fc) } else { (d, fd) };
    let (nu, r_nu) = if curve[ibest].1 < r_nu {
        curve[ibest]
    } else {
        (nu, r_nu)
    };
    curve.sort_by(|p, q| p.0.total_cmp(&q.0));

    let sizes: Vec<usize> = data.iter().map(|p| p.size).collect();
    let per_site: Vec<f64> = data
        .iter()
        .map(|p| p.chi_max / (2.0 * (p.size as f64).powi(2)))
        .collect();
    let mu = fit_mu(&sizes, &per_site)?;

    let curves = data
        .iter()
        .map(|p| {
            let scale = (p.size as f64).powf(nu);
            CollapseCurve {
                size: p.size,
                lambda_max: p.lambda_max,
                chi_max: p.chi_max,
                points: p
                    .lambdas
                    .iter()
                    .zip(&p.ys)
                    .map(|(&l, &y)| (l, scale * (l - p.lambda_max), y))
                    .filter(|(_, x, _)| x.abs() <= opts.x_max)
                    .collect(),
            }
        })
        .collect();

    Ok(CollapseResult {
        nu: Estimate {
            value: nu,
            stderr: nu_uncertainty(&curve, nu, r_nu),
        },
        mu,
        alpha: mu.value / nu,
        residual: r_nu,
        options: opts,
        curves,
        residual_curve: curve,
    })
}

/// The `k` lowest excitation energies at each λ of a uniform grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelSweep {
    pub lambdas: Vec<f64>,
    /// `levels[i][l]` is the `l`-th lowest level at `lambdas[i]`.
    pub levels: Vec<Vec<f64>>,
}

pub fn level_sweep(
    line: &EvolutionLine,
    lo: f64,
    hi: f64,
    steps: usize,
    grid: &MomentumGrid,
    k: usize,
) -> Result<LevelSweep> {
    check_window(line, lo, hi)?;
    if k == 0 {
        return Err(Error::invalid("k", "need at least one level"));
    }
    let lambdas = lambda_grid(lo, hi, steps)?;
    let levels = lambdas
        .iter()
        .map(|&l| lowest_excitations(&line.point(l)?, grid, k))
        .collect::<Result<_>>()?;
    Ok(LevelSweep { lambdas, levels })
}

fn strict_minima(v: &[f64]) -> Vec<usize> {
    (1..v.len().saturating_sub(1))
        .filter(|&i| v[i] < v[i - 1] && v[i] < v[i + 1])
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairingReport {
    pub peaks: Vec<f64>,
    /// Peaks within one grid step of a local minimum of any tracked level.
    pub paired: usize,
    /// Peaks within one grid step of a local minimum of the lowest level alone.
    pub paired_lowest: usize,
    pub levels: usize,
}

impl PairingReport {
    pub fn rate(&self) -> f64 {
        self.paired as f64 / self.peaks.len().max(1) as f64
    }

    pub fn rate_lowest(&self) -> f64 {
        self.paired_lowest as f64 / self.peaks.len().max(1) as f64
    }
}

/// Matches χ_F peaks against local minima of the low-lying levels on the same λ grid.
pub fn peak_gap_pairing(record: &SweepRecord, levels: &LevelSweep) -> Result<PairingReport> {
    if !record.skipped.is_empty() || record.lambdas() != levels.lambdas {
        return Err(Error::invalid(
            "levels",
            "the sweep and the level sweep must share a complete λ grid",
        ));
    }
    let chis = record.chis();
    let peaks: Vec<usize> = (1..chis.len().saturating_sub(1))
        .filter(|&i| chis[i] > chis[i - 1] && chis[i] > chis[i + 1])
        .collect();
    let k = levels.levels.first().map_or(0, Vec::len);
    let minima: Vec<Vec<usize>> = (0..k)
        .map(|l| strict_minima(&levels.levels.iter().map(|v| v[l]).collect::<Vec<_>>()))
        .collect();
    let near = |i: usize, ms: &[usize]| ms.iter().any(|&m| m.abs_diff(i) <= 1);
    let paired = peaks
        .iter()
        .filter(|&&i| minima.iter().any(|ms| near(i, ms)))
        .count();
    let paired_lowest = peaks
        .iter()
        .filter(|&&i| minima.first().is_some_and(|ms| near(i, ms)))
        .count();
    Ok(PairingReport {
        peaks: peaks.iter().map(|&i| record.samples[i].lambda).collect(),
        paired,
        paired_lowest,
        levels: k,
    })
}
