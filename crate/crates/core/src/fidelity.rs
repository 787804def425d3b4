//! Ground-state fidelity, the coupling-space metric and the fidelity
//! susceptibility.
//!
//! Writing `cos 2θ_q = ε_q/E_q`, `sin 2θ_q = Δ_q/E_q`, the overlap of the
//! ground states at two coupling points factorizes over momenta,
//! `F = Π_q |cos(θ_q - θ'_q)|`, and the metric is
//! `g_ab = Σ_q ∂_a θ_q ∂_b θ_q = ¼ Σ_q ∂_a(2θ_q) ∂_b(2θ_q)`. The susceptibility
//! along a line with tangent `n` is `χ_F = Σ_ab g_ab n^a n^b`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{
    check_no_zero_mode, degenerate_at, spectral, spectral_at, Couplings, EvolutionLine, GridNode,
    LineKind, Momentum, MomentumGrid,
};
use crate::reduce::{chunked_reduce, sum_by, CompensatedSum};

/// Overlap `F = |<Ψ0(a)|Ψ0(b)>|` together with its logarithm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Fidelity {
    pub value: f64,
    /// `ln F`, accumulated term by term; stays finite when `value` underflows.
    pub ln_value: f64,
    /// `value` underflowed to zero (or the states are exactly orthogonal).
    pub underflow: bool,
}

/// `ln |cos x|` without losing the small-angle part to rounding.
#[inline]
fn ln_abs_cos(x: f64) -> f64 {
    let s = x.sin();
    0.5 * (-s * s).ln_1p()
}

/// Half the phase of `f_a f_b*`, i.e. `θ_a - θ_b` modulo π.
#[inline]
fn angle_difference(a: (f64, f64), b: (f64, f64)) -> f64 {
    let (ea, da) = a;
    let (eb, db) = b;
    0.5 * (da * eb - ea * db).atan2(ea * eb + da * db)
}

pub fn fidelity(a: &Couplings, b: &Couplings, grid: &MomentumGrid) -> Result<Fidelity> {
    check_no_zero_mode(a, grid)?;
    check_no_zero_mode(b, grid)?;
    let nodes = grid.nodes();
    let ln_value = sum_by(nodes.len(), |i| {
        let n = &nodes[i];
        ln_abs_cos(angle_difference(n.eps_delta(a), n.eps_delta(b)))
    });
    let value = ln_value.exp();
    Ok(Fidelity {
        value,
        ln_value,
        underflow: value == 0.0,
    })
}

/// `∂(2θ_q)/∂J_a` for `a = x, y, z` at one momentum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThetaGradient {
    pub d2theta: [f64; 3],
}

impl ThetaGradient {
    pub fn dot(&self, n: &[f64; 3]) -> f64 {
        self.d2theta[0] * n[0] + self.d2theta[1] * n[1] + self.d2theta[2] * n[2]
    }
}

/// The three derivative formulas, each multiplied by `sgn Δ_q` with
/// `sgn 0 = +1`. The sign squares out of every bilinear quantity built here.
#[inline]
fn gradient_parts(c: &Couplings, sx: f64, sy: f64, s_diff: f64, e2: f64, delta: f64) -> [f64; 3] {
    let (jx, jy, jz) = (c.jx(), c.jy(), c.jz());
    let scale = if delta >= 0.0 { 1.0 / e2 } else { -1.0 / e2 };
    [
        (jz * sx + jy * s_diff) * scale,
        -(jx * s_diff - jz * sy) * scale,
        -(jx * sx + jy * sy) * scale,
    ]
}

#[inline]
fn gradient_at(c: &Couplings, node: &GridNode) -> [f64; 3] {
    let (eps, delta) = node.eps_delta(c);
    let e2 = eps * eps + delta * delta;
    gradient_parts(c, node.sin_x, node.sin_y, node.sin_diff(), e2, delta)
}

pub fn theta_gradient(c: &Couplings, q: Momentum) -> Result<ThetaGradient> {
    let p = spectral(c, q);
    if p.degenerate {
        return Err(Error::Degenerate {
            couplings: *c,
            qx: q.qx,
            qy: q.qy,
        });
    }
    let e2 = p.eps * p.eps + p.delta * p.delta;
    let d2theta = gradient_parts(c, q.qx.sin(), q.qy.sin(), (q.qx - q.qy).sin(), e2, p.delta);
    Ok(ThetaGradient { d2theta })
}

/// Symmetric 3x3 metric over `(Jx, Jy, Jz)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MetricTensor {
    g: [[f64; 3]; 3],
}

impl MetricTensor {
    pub fn components(&self) -> [[f64; 3]; 3] {
        self.g
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.g[a][b]
    }

    /// `Σ_ab g_ab n^a n^b`.
    pub fn contract(&self, n: &[f64; 3]) -> f64 {
        let mut acc = CompensatedSum::new();
        for a in 0..3 {
            for b in 0..3 {
                acc.add(self.g[a][b] * n[a] * n[b]);
            }
        }
        acc.value()
    }
}

const UPPER: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

pub fn metric_tensor(c: &Couplings, grid: &MomentumGrid) -> Result<MetricTensor> {
    check_no_zero_mode(c, grid)?;
    let nodes = grid.nodes();
    let sums = chunked_reduce(
        nodes.len(),
        || [CompensatedSum::new(); 6],
        |acc, i| {
            let v = gradient_at(c, &nodes[i]);
            for (slot, &(a, b)) in acc.iter_mut().zip(UPPER.iter()) {
                slot.add(v[a] * v[b]);
            }
        },
        |acc, part| {
            for (slot, p) in acc.iter_mut().zip(part.iter()) {
                slot.merge(p);
            }
        },
    );
    let mut g = [[0.0; 3]; 3];
    for (s, &(a, b)) in sums.iter().zip(UPPER.iter()) {
        let v = 0.25 * s.value();
        g[a][b] = v;
        g[b][a] = v;
    }
    Ok(MetricTensor { g })
}

/// Fidelity susceptibility along the direction `n`. Summed as
/// `¼ Σ_q (n · ∂(2θ_q))²`, which is the metric contraction term by term.
pub fn chi_f(c: &Couplings, n: [f64; 3], grid: &MomentumGrid) -> Result<f64> {
    check_no_zero_mode(c, grid)?;
    let nodes = grid.nodes();
    let s = sum_by(nodes.len(), |i| {
        let v = gradient_at(c, &nodes[i]);
        let d = v[0] * n[0] + v[1] * n[1] + v[2] * n[2];
        d * d
    });
    Ok(0.25 * s)
}

/// χ_F and the smallest `E_q` from one pass over the grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct LinePoint {
    pub chi: f64,
    pub min_energy: f64,
}

struct LinePass {
    sum: CompensatedSum,
    min_e2: f64,
    argmin: usize,
}

/// Both special lines through one fused reduction:
/// `χ_F = (1/16) Σ_q [(sin qx + sin qy)/E²]²` on `Jx = Jy` and
/// `χ_F = (1/36) Σ_q [(sin qx - sin qy + 2 sin(qx - qy))/E²]²` on `Jz = 1/3`.
pub(crate) fn line_point(kind: LineKind, lambda: f64, grid: &MomentumGrid) -> Result<LinePoint> {
    let line: Option<EvolutionLine> = kind.into();
    let line = line.ok_or_else(|| {
        Error::invalid(
            "line",
            "closed forms exist only for the jx-eq-jy and jz-third lines",
        )
    })?;
    let c = line.point(lambda)?;
    let (prefactor, third) = match kind {
        LineKind::JxEqJy => (1.0 / 16.0, false),
        _ => (1.0 / 36.0, true),
    };
    let nodes = grid.nodes();
    let pass = chunked_reduce(
        nodes.len(),
        || LinePass {
            sum: CompensatedSum::new(),
            min_e2: f64::INFINITY,
            argmin: 0,
        },
        |acc, i| {
            let n = &nodes[i];
            let (eps, delta) = n.eps_delta(&c);
            let e2 = eps * eps + delta * delta;
            let num = if third {
                (n.sin_x - n.sin_y) + 2.0 * n.sin_diff()
            } else {
                n.sin_x + n.sin_y
            };
            let r = num / e2;
            acc.sum.add(r * r);
            if e2 < acc.min_e2 {
                acc.min_e2 = e2;
                acc.argmin = i;
            }
        },
        |acc, part| {
            acc.sum.merge(&part.sum);
            if part.min_e2 < acc.min_e2 {
                acc.min_e2 = part.min_e2;
                acc.argmin = part.argmin;
            }
        },
    );
    let min_energy = pass.min_e2.sqrt();
    if !nodes.is_empty() && spectral_at(&c, &nodes[pass.argmin]).degenerate {
        return Err(degenerate_at(&c, &nodes[pass.argmin]));
    }
    Ok(LinePoint {
        chi: prefactor * pass.sum.value(),
        min_energy,
    })
}

pub fn chi_line_closed_form(kind: LineKind, lambda: f64, grid: &MomentumGrid) -> Result<f64> {
    line_point(kind, lambda, grid).map(|p| p.chi)
}

/// Oracle for χ_F: `-2 ln F / δλ²`, averaged over the forward and backward
/// displacements so the cubic term cancels.
pub fn chi_finite_difference(
    line: &EvolutionLine,
    lambda: f64,
    dlambda: f64,
    grid: &MomentumGrid,
) -> Result<f64> {
    if !(dlambda > 0.0 && dlambda.is_finite()) {
        return Err(Error::invalid(
            "dlambda",
            format!("must be positive, got {dlambda}"),
        ));
    }
    let centre = line.point(lambda)?;
    let forward = fidelity(&centre, &line.point(lambda + dlambda)?, grid)?;
    let backward = fidelity(&centre, &line.point(lambda - dlambda)?, grid)?;
    if forward.underflow || backward.underflow {
        return Err(Error::OracleFailure(format!(
            "fidelity underflow at lambda = {lambda} with step {dlambda}"
        )));
    }
    Ok(-(forward.ln_value + backward.ln_value) / (dlambda * dlambda))
}

#[cfg(test)]
#[allow(clippy::excessive_precision, clippy::needless_range_loop)]
mod tests {
    use super::*;
    use crate::model::momentum_grid;
    use std::f64::consts::PI;

    fn c(jx: f64, jy: f64, jz: f64) -> Couplings {
        Couplings::new(jx, jy, jz).unwrap()
    }

    /// 2θ_q(J) by direct evaluation, for finite differences.
    fn two_theta(j: [f64; 3], q: Momentum) -> f64 {
        let eps = j[0] * q.qx.cos() + j[1] * q.qy.cos() + j[2];
        let delta = j[0] * q.qx.sin() + j[1] * q.qy.sin();
        delta.atan2(eps)
    }

    #[test]
    fn identical_states_have_unit_fidelity() {
        let g = momentum_grid(11).unwrap();
        let a = c(0.25, 0.25, 0.5);
        let f = fidelity(&a, &a, &g).unwrap();
        assert_eq!(f.value, 1.0);
        assert!(!f.underflow);
    }

    #[test]
    fn fidelity_matches_direct_product() {
        // F² = Π_q ½ (1 + (ΔΔ' + εε')/(EE')), a different algebraic route.
        let g = momentum_grid(11).unwrap();
        let a = c(0.2, 0.2, 0.6);
        let b = c(0.21, 0.21, 0.58);
        let mut f2 = 1.0;
        for q in g.momenta() {
            let p = spectral(&a, q);
            let r = spectral(&b, q);
            f2 *= 0.5 * (1.0 + (p.delta * r.delta + p.eps * r.eps) / (p.energy * r.energy));
        }
        let f = fidelity(&a, &b, &g).unwrap();
        assert!((f.value - f2.sqrt()).abs() < 1e-13);
        // 40-digit reference
        assert!(
            (f.value - 0.980_024_029_895_928_2).abs() < 1e-13,
            "{}",
            f.value
        );
    }

    #[test]
    fn fidelity_is_symmetric() {
        let g = momentum_grid(9).unwrap();
        let a = c(0.3, 0.45, 0.25);
        let b = c(0.1, 0.2, 0.7);
        assert_eq!(fidelity(&a, &b, &g).unwrap(), fidelity(&b, &a, &g).unwrap());
    }

    #[test]
    fn fidelity_rejects_zero_modes() {
        let g = momentum_grid(3).unwrap();
        let t = 1.0 / 3.0;
        assert!(matches!(
            fidelity(&c(t, t, t), &c(0.2, 0.2, 0.6), &g),
            Err(Error::Degenerate { .. })
        ));
    }

    #[test]
    fn orthogonal_states_flag_underflow() {
        // At q = (2π/3, -2π/3) f = 1 for the dimer point and f = -1/2 for
        // (1/2, 1/2, 0): antiparallel Bloch vectors, so that factor is zero.
        let g = momentum_grid(3).unwrap();
        let f = fidelity(&c(0.0, 0.0, 1.0), &c(0.5, 0.5, 0.0), &g).unwrap();
        assert_eq!(f.value, 0.0);
        assert!(f.underflow);
        assert_eq!(f.ln_value, f64::NEG_INFINITY);
    }

    #[test]
    fn gradient_vanishes_at_origin_of_dimer() {
        let v = theta_gradient(&c(0.0, 0.0, 1.0), Momentum::new(0.0, 0.0)).unwrap();
        assert_eq!(v.d2theta, [0.0, 0.0, 0.0]);
    }

    #[test]
    fn gradient_with_vanishing_delta_uses_positive_sign() {
        let cc = c(0.3, 0.3, 0.4);
        let q = Momentum::new(1.1, -1.1);
        let p = spectral(&cc, q);
        assert!(p.delta.abs() < 1e-16 && p.eps > 0.0);
        let v = theta_gradient(&cc, q).unwrap().d2theta;
        let e2 = p.eps * p.eps;
        let (sx, sy, sd) = (q.qx.sin(), q.qy.sin(), (q.qx - q.qy).sin());
        let expect = [
            (0.4 * sx + 0.3 * sd) / e2,
            -(0.3 * sd - 0.4 * sy) / e2,
            -(0.3 * sx + 0.3 * sy) / e2,
        ];
        for k in 0..3 {
            assert!((v[k] - expect[k]).abs() < 1e-14);
        }
    }

    #[test]
    fn gradient_matches_central_differences() {
        let j = [0.25, 0.25, 0.5];
        let q = Momentum::new(2.0 * PI / 5.0, -2.0 * PI / 5.0);
        let v = theta_gradient(&c(j[0], j[1], j[2]), q).unwrap().d2theta;
        let h = 1e-6;
        for a in 0..3 {
            let mut up = j;
            let mut dn = j;
            up[a] += h;
            dn[a] -= h;
            let fd = (two_theta(up, q) - two_theta(dn, q)) / (2.0 * h);
            assert!((fd - v[a]).abs() < 1e-8, "component {a}: {fd} vs {}", v[a]);
        }
    }

    #[test]
    fn gradient_is_sign_corrected_derivative_elsewhere() {
        // With Δ < 0 the formulas carry an extra minus sign relative to d(atan2).
        let j = [0.3, 0.2, 0.5];
        let q = Momentum::new(-1.3, -0.4);
        let p = spectral(&c(j[0], j[1], j[2]), q);
        assert!(p.delta < 0.0);
        let v = theta_gradient(&c(j[0], j[1], j[2]), q).unwrap().d2theta;
        let h = 1e-6;
        for a in 0..3 {
            let mut up = j;
            let mut dn = j;
            up[a] += h;
            dn[a] -= h;
            let fd = (two_theta(up, q) - two_theta(dn, q)) / (2.0 * h);
            assert!((-fd - v[a]).abs() < 1e-8);
        }
    }

    #[test]
    fn gradient_contraction_on_symmetric_line() {
        let cc = EvolutionLine::JxEqJy.point(0.37).unwrap();
        let n = EvolutionLine::JxEqJy.tangent();
        for q in momentum_grid(7).unwrap().momenta() {
            let p = spectral(&cc, q);
            let sgn = if p.delta >= 0.0 { 1.0 } else { -1.0 };
            let expect = -(q.qx.sin() + q.qy.sin()) / (2.0 * p.energy * p.energy) * sgn;
            let got = theta_gradient(&cc, q).unwrap().dot(&n);
            assert!((got - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_gradient_is_an_error() {
        let t = 1.0 / 3.0;
        let r = theta_gradient(&c(t, t, t), Momentum::new(2.0 * PI / 3.0, -2.0 * PI / 3.0));
        assert!(matches!(r, Err(Error::Degenerate { .. })));
    }

    #[test]
    fn metric_at_dimer_point() {
        // ∂(2θ)/∂J = (sin qx, sin qy, 0) at (0,0,1), so g = diag(L²/8, L²/8, 0).
        for l in [3usize, 5, 11] {
            let g = metric_tensor(&c(0.0, 0.0, 1.0), &momentum_grid(l).unwrap()).unwrap();
            let d = (l * l) as f64 / 8.0;
            let expect = [[d, 0.0, 0.0], [0.0, d, 0.0], [0.0, 0.0, 0.0]];
            for a in 0..3 {
                for b in 0..3 {
                    assert!(
                        (g.get(a, b) - expect[a][b]).abs() < 1e-12,
                        "L={l} ({a},{b})"
                    );
                }
            }
        }
    }

    #[test]
    fn metric_vanishes_for_single_momentum() {
        let g = metric_tensor(&c(0.3, 0.5, 0.2), &momentum_grid(1).unwrap()).unwrap();
        assert_eq!(g.components(), [[0.0; 3]; 3]);
    }

    #[test]
    fn metric_matches_double_loop_and_reference() {
        let cc = c(0.3, 0.3, 0.4);
        let grid = momentum_grid(7).unwrap();
        let g = metric_tensor(&cc, &grid).unwrap();
        let mut brute = [[0.0; 3]; 3];
        for q in grid.momenta() {
            let v = theta_gradient(&cc, q).unwrap().d2theta;
            for a in 0..3 {
                for b in 0..3 {
                    brute[a][b] += 0.25 * v[a] * v[b];
                }
            }
        }
        // 40-digit reference for the three distinct entries
        let reference = [
            (0, 0, 40.124_537_760_965_104),
            (0, 1, -0.325_996_199_052_252_64),
            (0, 2, -29.848_906_171_434_639),
            (2, 2, 44.773_359_257_151_958),
        ];
        for a in 0..3 {
            for b in 0..3 {
                assert!((g.get(a, b) - brute[a][b]).abs() < 1e-12);
                assert_eq!(g.get(a, b), g.get(b, a));
            }
        }
        for (a, b, v) in reference {
            assert!((g.get(a, b) - v).abs() < 1e-12, "({a},{b})");
        }
    }

    #[test]
    fn chi_f_null_direction_is_zero() {
        let grid = momentum_grid(9).unwrap();
        assert_eq!(chi_f(&c(0.3, 0.3, 0.4), [0.0; 3], &grid).unwrap(), 0.0);
    }

    #[test]
    fn chi_f_equals_closed_forms() {
        let grid = momentum_grid(11).unwrap();
        let cc = EvolutionLine::JxEqJy.point(0.62).unwrap();
        let a = chi_f(&cc, EvolutionLine::JxEqJy.tangent(), &grid).unwrap();
        let b = chi_line_closed_form(LineKind::JxEqJy, 0.62, &grid).unwrap();
        assert!((a - b).abs() <= 1e-12 * a.max(1.0));

        let t = 1.0 / 3.0;
        let sym = c(t, t, t);
        let a = chi_f(&sym, [1.0, -1.0, 0.0], &grid).unwrap();
        let b = chi_line_closed_form(LineKind::JzThird, t, &grid).unwrap();
        assert!((a - b).abs() <= 1e-12 * a.max(1.0));
    }

    #[test]
    fn chi_f_agrees_with_metric_contraction() {
        let grid = momentum_grid(9).unwrap();
        let cc = c(0.2, 0.45, 0.35);
        let n = [0.3, -0.8, 0.5];
        let direct = chi_f(&cc, n, &grid).unwrap();
        let via_metric = metric_tensor(&cc, &grid).unwrap().contract(&n);
        assert!((direct - via_metric).abs() <= 1e-10 * direct);
    }

    #[test]
    fn closed_form_vanishes_for_single_momentum() {
        let grid = momentum_grid(1).unwrap();
        for lam in [0.1, 0.5, 0.9] {
            assert_eq!(
                chi_line_closed_form(LineKind::JxEqJy, lam, &grid).unwrap(),
                0.0
            );
        }
    }

    #[test]
    fn closed_form_reports_zero_mode() {
        let grid = momentum_grid(9).unwrap();
        let r = chi_line_closed_form(LineKind::JzThird, 1.0 / 3.0, &grid);
        assert!(matches!(r, Err(Error::Degenerate { .. })));
        assert!(chi_line_closed_form(LineKind::Segment, 0.5, &grid).is_err());
    }

    #[test]
    fn a_phase_susceptibility_is_intensive() {
        let small = momentum_grid(51).unwrap();
        let large = momentum_grid(101).unwrap();
        let per_site = |g: &MomentumGrid| {
            chi_line_closed_form(LineKind::JxEqJy, 0.9, g).unwrap() / g.sites() as f64
        };
        let (a, b) = (per_site(&small), per_site(&large));
        assert!(((a - b) / a).abs() < 1e-3, "{a} {b}");
        assert!(
            chi_line_closed_form(LineKind::JxEqJy, 0.9, &momentum_grid(3).unwrap()).unwrap() > 0.0
        );
    }

    #[test]
    fn finite_difference_oracle_near_dimer_point() {
        // Not zero: the dimer-point metric is diag(L²/8, L²/8, 0), giving χ → L²/16.
        let grid = momentum_grid(11).unwrap();
        let lam = 0.998;
        let fd = chi_finite_difference(&EvolutionLine::JxEqJy, lam, 1e-3, &grid).unwrap();
        let exact = chi_line_closed_form(LineKind::JxEqJy, lam, &grid).unwrap();
        assert!(((fd - exact) / exact).abs() < 1e-5);
        assert!((exact - 121.0 / 16.0).abs() < 0.1, "{exact}");
    }

    #[test]
    fn finite_difference_oracle_gapped_and_gapless() {
        let grid = momentum_grid(51).unwrap();
        let line = EvolutionLine::JxEqJy;
        let exact = chi_line_closed_form(LineKind::JxEqJy, 0.7, &grid).unwrap();
        let fd = chi_finite_difference(&line, 0.7, 1e-4, &grid).unwrap();
        assert!(((fd - exact) / exact).abs() < 1e-6);

        let exact = chi_line_closed_form(LineKind::JxEqJy, 0.45, &grid).unwrap();
        let fd = chi_finite_difference(&line, 0.45, 1e-5, &grid).unwrap();
        assert!(((fd - exact) / exact).abs() < 1e-4);
    }

    #[test]
    fn finite_difference_rejects_bad_step() {
        let grid = momentum_grid(5).unwrap();
        assert!(chi_finite_difference(&EvolutionLine::JxEqJy, 0.7, 0.0, &grid).is_err());
        assert!(chi_finite_difference(&EvolutionLine::JxEqJy, 0.9995, 1e-3, &grid).is_err());
    }
}
