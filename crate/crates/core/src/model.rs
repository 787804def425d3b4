//! Couplings, the momentum grid, the single-particle spectrum and the phase
//! structure of the vortex-free sector.
//!
//! With all link variables fixed to +1 the model is a free Majorana problem.
//! For a cell momentum `q` the Bloch function is `f(q) = ε_q + iΔ_q` with
//!
//! ```text
//! ε_q = Jx cos qx + Jy cos qy + Jz
//! Δ_q = Jx sin qx + Jy sin qy
//! ```
//!
//! and the quasiparticle energy is `E_q = |f(q)|`. The ground state fills the
//! lower band of every momentum, so `E0 = -Σ_q E_q` and exciting one mode
//! costs `2 E_q`.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reduce::{chunked_reduce, sum_by};

/// Tolerance on `jx + jy + jz = 1` for plane-constrained constructors.
pub const PLANE_TOL: f64 = 1e-12;

/// A mode with `E_q <= ZERO_MODE_TOL * (jx + jy + jz)` is treated as a zero mode.
pub const ZERO_MODE_TOL: f64 = 1e-12;

/// A point `(Jx, Jy, Jz)` in the positive octant of coupling space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Couplings {
    jx: f64,
    jy: f64,
    jz: f64,
}

impl Couplings {
    /// Finite, nonnegative couplings; no plane constraint.
    pub fn new(jx: f64, jy: f64, jz: f64) -> Result<Self> {
        for (name, v) in [("jx", jx), ("jy", jy), ("jz", jz)] {
            if !v.is_finite() {
                return Err(Error::invalid(name, format!("must be finite, got {v}")));
            }
            if v < 0.0 {
                return Err(Error::invalid(
                    name,
                    format!("must be nonnegative, got {v}"),
                ));
            }
        }
        Ok(Self { jx, jy, jz })
    }

    /// Couplings on the plane `jx + jy + jz = 1`.
    pub fn on_plane(jx: f64, jy: f64, jz: f64) -> Result<Self> {
        let c = Self::new(jx, jy, jz)?;
        if !c.is_on_plane() {
            return Err(Error::invalid(
                "couplings",
                format!(
                    "jx + jy + jz = {} is not 1 (tolerance {PLANE_TOL:e})",
                    c.sum()
                ),
            ));
        }
        Ok(c)
    }

    pub fn from_array(j: [f64; 3]) -> Result<Self> {
        Self::new(j[0], j[1], j[2])
    }

    pub fn jx(&self) -> f64 {
        self.jx
    }

    pub fn jy(&self) -> f64 {
        self.jy
    }

    pub fn jz(&self) -> f64 {
        self.jz
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.jx, self.jy, self.jz]
    }

    pub fn sum(&self) -> f64 {
        self.jx + self.jy + self.jz
    }

    pub fn is_on_plane(&self) -> bool {
        (self.sum() - 1.0).abs() <= PLANE_TOL
    }

    /// Exchanges the roles of the x and y bonds.
    pub fn swap_xy(&self) -> Self {
        Self {
            jx: self.jy,
            jy: self.jx,
            jz: self.jz,
        }
    }

    fn zero_mode_threshold(&self) -> f64 {
        ZERO_MODE_TOL * self.sum()
    }
}

impl fmt::Display for Couplings {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(jx={}, jy={}, jz={})", self.jx, self.jy, self.jz)
    }
}

/// A cell momentum `(qx, qy)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Momentum {
    pub qx: f64,
    pub qy: f64,
}

impl Momentum {
    pub fn new(qx: f64, qy: f64) -> Self {
        Self { qx, qy }
    }
}

impl std::ops::Neg for Momentum {
    type Output = Momentum;

    fn neg(self) -> Momentum {
        Momentum {
            qx: -self.qx,
            qy: -self.qy,
        }
    }
}

/// One momentum of the grid with its integer labels and cached trigonometry.
#[derive(Clone, Copy, Debug)]
pub struct GridNode {
    pub nx: i64,
    pub ny: i64,
    pub q: Momentum,
    pub cos_x: f64,
    pub cos_y: f64,
    pub sin_x: f64,
    pub sin_y: f64,
}

impl GridNode {
    #[inline]
    pub(crate) fn eps_delta(&self, c: &Couplings) -> (f64, f64) {
        (
            c.jx * self.cos_x + c.jy * self.cos_y + c.jz,
            c.jx * self.sin_x + c.jy * self.sin_y,
        )
    }

    /// `sin(qx - qy)` from the cached values.
    #[inline]
    pub(crate) fn sin_diff(&self) -> f64 {
        self.sin_x * self.cos_y - self.cos_x * self.sin_y
    }
}

/// The `L x L` allowed momenta `q = 2πn/L`, `n ∈ {-(L-1)/2, ..., (L-1)/2}`,
/// for odd `L`. Ordered row-major in `(nx, ny)`.
#[derive(Clone, Debug)]
pub struct MomentumGrid {
    size: usize,
    nodes: Vec<GridNode>,
}

impl MomentumGrid {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 || size.is_multiple_of(2) {
            return Err(Error::invalid(
                "L",
                format!("L must be odd and positive, got {size}"),
            ));
        }
        let half = (size as i64 - 1) / 2;
        let l = size as f64;
        // (q, sin q) of the 1D momenta, indexed by n + half
        let trig: Vec<(f64, f64)> = (-half..=half)
            .map(|n| {
                let q = 2.0 * PI * n as f64 / l;
                (q, q.sin())
            })
            .collect();
        let mut nodes = Vec::with_capacity(size * size);
        for nx in -half..=half {
            let (qx, sx) = trig[(nx + half) as usize];
            for ny in -half..=half {
                let (qy, sy) = trig[(ny + half) as usize];
                nodes.push(GridNode {
                    nx,
                    ny,
                    q: Momentum { qx, qy },
                    cos_x: qx.cos(),
                    cos_y: qy.cos(),
                    sin_x: sx,
                    sin_y: sy,
                });
            }
        }
        Ok(Self { size, nodes })
    }

    /// Linear size `L`.
    pub fn size(&self) -> usize {
        self.size
    }

    /// `(L - 1) / 2`, the largest momentum label.
    pub fn half(&self) -> i64 {
        (self.size as i64 - 1) / 2
    }

    /// Number of momenta, `L²`.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Number of sites `N = 2 L²`.
    pub fn sites(&self) -> usize {
        2 * self.nodes.len()
    }

    pub fn nodes(&self) -> &[GridNode] {
        &self.nodes
    }

    pub fn momenta(&self) -> impl Iterator<Item = Momentum> + '_ {
        self.nodes.iter().map(|n| n.q)
    }

    /// Position of the momentum with labels `(nx, ny)` in the row-major order.
    pub fn index_of(&self, nx: i64, ny: i64) -> Option<usize> {
        let h = self.half();
        if nx.abs() > h || ny.abs() > h {
            return None;
        }
        Some(((nx + h) as usize) * self.size + (ny + h) as usize)
    }
}

/// Builds the momentum grid for linear size `L`.
pub fn momentum_grid(size: usize) -> Result<MomentumGrid> {
    MomentumGrid::new(size)
}

/// Per-momentum spectral data.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpectralPoint {
    pub eps: f64,
    pub delta: f64,
    /// `E_q = sqrt(ε² + Δ²)`.
    pub energy: f64,
    /// Half of `atan2(Δ, ε)`, in `(-π/2, π/2]`; zero for a zero mode.
    pub theta: f64,
    /// Set when `E_q` is a zero mode and `theta` carries no information.
    pub degenerate: bool,
}

impl SpectralPoint {
    fn from_parts(eps: f64, delta: f64, threshold: f64) -> Self {
        let energy = eps.hypot(delta);
        let degenerate = energy <= threshold;
        let theta = if degenerate {
            0.0
        } else {
            0.5 * delta.atan2(eps)
        };
        Self {
            eps,
            delta,
            energy,
            theta,
            degenerate,
        }
    }
}

pub fn spectral(c: &Couplings, q: Momentum) -> SpectralPoint {
    let eps = c.jx * q.qx.cos() + c.jy * q.qy.cos() + c.jz;
    let delta = c.jx * q.qx.sin() + c.jy * q.qy.sin();
    SpectralPoint::from_parts(eps, delta, c.zero_mode_threshold())
}

pub(crate) fn spectral_at(c: &Couplings, node: &GridNode) -> SpectralPoint {
    let (eps, delta) = node.eps_delta(c);
    SpectralPoint::from_parts(eps, delta, c.zero_mode_threshold())
}

/// Fails with [`Error::Degenerate`] if any grid momentum is a zero mode.
pub fn check_no_zero_mode(c: &Couplings, grid: &MomentumGrid) -> Result<()> {
    let threshold = c.zero_mode_threshold();
    let first = chunked_reduce(
        grid.len(),
        || None,
        |acc: &mut Option<usize>, i| {
            if acc.is_none() {
                let (e, d) = grid.nodes[i].eps_delta(c);
                if e.hypot(d) <= threshold {
                    *acc = Some(i);
                }
            }
        },
        |acc, part| {
            if acc.is_none() {
                *acc = part;
            }
        },
    );
    match first {
        Some(i) => Err(degenerate_at(c, &grid.nodes[i])),
        None => Ok(()),
    }
}

pub(crate) fn degenerate_at(c: &Couplings, node: &GridNode) -> Error {
    Error::Degenerate {
        couplings: *c,
        qx: node.q.qx,
        qy: node.q.qy,
    }
}

/// `E0 = -Σ_q E_q`.
pub fn ground_energy(c: &Couplings, grid: &MomentumGrid) -> f64 {
    -sum_by(grid.len(), |i| {
        let (e, d) = grid.nodes[i].eps_delta(c);
        e.hypot(d)
    })
}

/// Smallest single-fermion energy `min_q E_q`.
pub(crate) fn min_energy(c: &Couplings, grid: &MomentumGrid) -> f64 {
    chunked_reduce(
        grid.len(),
        || f64::INFINITY,
        |acc, i| {
            let (e, d) = grid.nodes[i].eps_delta(c);
            *acc = acc.min(e.hypot(d));
        },
        |acc, part| *acc = acc.min(part),
    )
}

/// Excitation gap `2 min_q E_q`.
pub fn gap(c: &Couplings, grid: &MomentumGrid) -> f64 {
    2.0 * min_energy(c, grid)
}

/// The `k` smallest single-fermion excitation energies `2 E_q`, ascending.
/// Degenerate momenta (`±q`, and `x↔y` on symmetric couplings) appear once each.
pub fn lowest_excitations(c: &Couplings, grid: &MomentumGrid, k: usize) -> Result<Vec<f64>> {
    if k > grid.len() {
        return Err(Error::invalid(
            "k",
            format!(
                "asked for {k} excitations but the grid has only {} momenta",
                grid.len()
            ),
        ));
    }
    let mut energies: Vec<f64> = grid
        .nodes
        .iter()
        .map(|n| {
            let (e, d) = n.eps_delta(c);
            2.0 * e.hypot(d)
        })
        .collect();
    if k < energies.len() && k > 0 {
        energies.select_nth_unstable_by(k - 1, f64::total_cmp);
    }
    energies.truncate(k);
    energies.sort_by(f64::total_cmp);
    Ok(energies)
}

/// The family of an evolution line, without its parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LineKind {
    /// `Jx = Jy = (1 - λ)/2`, `Jz = λ`.
    JxEqJy,
    /// `Jx = λ`, `Jy = 2/3 - λ`, `Jz = 1/3`.
    JzThird,
    Segment,
}

impl fmt::Display for LineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LineKind::JxEqJy => "jx-eq-jy",
            LineKind::JzThird => "jz-third",
            LineKind::Segment => "segment",
        })
    }
}

impl std::str::FromStr for LineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jx-eq-jy" => Ok(LineKind::JxEqJy),
            "jz-third" => Ok(LineKind::JzThird),
            "segment" => Ok(LineKind::Segment),
            other => Err(Error::invalid(
                "line",
                format!("unknown line `{other}` (expected jx-eq-jy, jz-third or segment)"),
            )),
        }
    }
}

/// A parametrized path `J(λ)` through coupling space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum EvolutionLine {
    JxEqJy,
    JzThird,
    /// Affine interpolation `start + λ (end - start)` for `λ ∈ [0, 1]`.
    Segment {
        start: Couplings,
        end: Couplings,
    },
}

impl EvolutionLine {
    pub fn kind(&self) -> LineKind {
        match self {
            EvolutionLine::JxEqJy => LineKind::JxEqJy,
            EvolutionLine::JzThird => LineKind::JzThird,
            EvolutionLine::Segment { .. } => LineKind::Segment,
        }
    }

    /// Admissible parameter range and whether its endpoints are included.
    pub fn domain(&self) -> (f64, f64, bool) {
        match self {
            EvolutionLine::JxEqJy => (0.0, 1.0, false),
            EvolutionLine::JzThird => (0.0, 2.0 / 3.0, false),
            EvolutionLine::Segment { .. } => (0.0, 1.0, true),
        }
    }

    pub fn contains(&self, lambda: f64) -> bool {
        let (lo, hi, closed) = self.domain();
        if closed {
            (lo..=hi).contains(&lambda)
        } else {
            lambda > lo && lambda < hi
        }
    }

    pub fn point(&self, lambda: f64) -> Result<Couplings> {
        if !self.contains(lambda) {
            let (lo, hi, closed) = self.domain();
            let (open, close) = if closed { ('[', ']') } else { ('(', ')') };
            return Err(Error::invalid(
                "lambda",
                format!(
                    "{lambda} is outside {open}{lo}, {hi}{close} for the {} line",
                    self.kind()
                ),
            ));
        }
        match self {
            EvolutionLine::JxEqJy => {
                let j = 0.5 * (1.0 - lambda);
                Couplings::new(j, j, lambda)
            }
            EvolutionLine::JzThird => Couplings::new(lambda, 2.0 / 3.0 - lambda, 1.0 / 3.0),
            EvolutionLine::Segment { start, end } => {
                let a = start.as_array();
                let b = end.as_array();
                Couplings::from_array([
                    a[0] + lambda * (b[0] - a[0]),
                    a[1] + lambda * (b[1] - a[1]),
                    a[2] + lambda * (b[2] - a[2]),
                ])
            }
        }
    }

    /// `n^a = ∂J_a/∂λ`.
    pub fn tangent(&self) -> [f64; 3] {
        match self {
            EvolutionLine::JxEqJy => [-0.5, -0.5, 1.0],
            EvolutionLine::JzThird => [1.0, -1.0, 0.0],
            EvolutionLine::Segment { start, end } => {
                let a = start.as_array();
                let b = end.as_array();
                [b[0] - a[0], b[1] - a[1], b[2] - a[2]]
            }
        }
    }
}

impl From<LineKind> for Option<EvolutionLine> {
    fn from(kind: LineKind) -> Self {
        match kind {
            LineKind::JxEqJy => Some(EvolutionLine::JxEqJy),
            LineKind::JzThird => Some(EvolutionLine::JzThird),
            LineKind::Segment => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    /// Gapped, Abelian: one coupling exceeds 1/2.
    A,
    /// Gapless, non-Abelian: all couplings below 1/2.
    B,
    Boundary,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::A => "A",
            Phase::B => "B",
            Phase::Boundary => "Boundary",
        })
    }
}

pub fn phase_of(c: &Couplings) -> Result<Phase> {
    if !c.is_on_plane() {
        return Err(Error::invalid(
            "couplings",
            format!(
                "phase classification needs jx + jy + jz = 1, got {}",
                c.sum()
            ),
        ));
    }
    let max = c.jx.max(c.jy).max(c.jz);
    Ok(if (max - 0.5).abs() <= PLANE_TOL {
        Phase::Boundary
    } else if max > 0.5 {
        Phase::A
    } else {
        Phase::B
    })
}

#[cfg(test)]
#[allow(clippy::excessive_precision, clippy::needless_range_loop)]
mod tests {
    use super::*;

    fn c(jx: f64, jy: f64, jz: f64) -> Couplings {
        Couplings::new(jx, jy, jz).unwrap()
    }

    #[test]
    fn grid_of_size_one_is_origin() {
        let g = momentum_grid(1).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g.nodes()[0].q, Momentum::new(0.0, 0.0));
        assert_eq!(g.sites(), 2);
    }

    #[test]
    fn grid_of_size_three_enumerates_thirds() {
        let g = momentum_grid(3).unwrap();
        assert_eq!(g.len(), 9);
        let allowed = [-2.0 * PI / 3.0, 0.0, 2.0 * PI / 3.0];
        for q in g.momenta() {
            assert!(allowed.iter().any(|a| (a - q.qx).abs() < 1e-15));
            assert!(allowed.iter().any(|a| (a - q.qy).abs() < 1e-15));
        }
        // row-major in n
        assert_eq!(g.nodes()[1].nx, -1);
        assert_eq!(g.nodes()[1].ny, 0);
    }

    #[test]
    fn grid_of_size_101_endpoint() {
        let g = momentum_grid(101).unwrap();
        assert_eq!(g.len(), 10201);
        let min = g.momenta().map(|q| q.qx).fold(f64::INFINITY, f64::min);
        assert!((min + 100.0 * PI / 101.0).abs() < 1e-14);
    }

    #[test]
    fn even_or_zero_size_rejected() {
        assert!(matches!(
            momentum_grid(0),
            Err(Error::InvalidArgument { .. })
        ));
        let err = momentum_grid(100).unwrap_err();
        assert!(err.to_string().contains("L must be odd"));
    }

    #[test]
    fn grid_is_closed_under_negation() {
        let g = momentum_grid(7).unwrap();
        for n in g.nodes() {
            let i = g.index_of(-n.nx, -n.ny).unwrap();
            assert_eq!(g.nodes()[i].q, -n.q);
        }
    }

    #[test]
    fn spectral_examples() {
        let p = spectral(&c(0.25, 0.25, 0.5), Momentum::new(0.0, 0.0));
        assert_eq!((p.eps, p.delta, p.energy), (1.0, 0.0, 1.0));

        let p = spectral(&c(0.0, 0.0, 1.0), Momentum::new(1.3, -0.4));
        assert_eq!((p.eps, p.delta, p.energy), (1.0, 0.0, 1.0));

        let t = 1.0 / 3.0;
        let p = spectral(&c(t, t, t), Momentum::new(2.0 * PI / 3.0, -2.0 * PI / 3.0));
        assert!(p.energy < 1e-15);
        assert!(p.degenerate);
        assert_eq!(p.theta, 0.0);
    }

    #[test]
    fn spectral_angle_reproduces_eps_and_delta() {
        let p = spectral(&c(0.3, 0.5, 0.2), Momentum::new(2.1, -0.7));
        assert!(((2.0 * p.theta).cos() * p.energy - p.eps).abs() < 1e-12);
        assert!(((2.0 * p.theta).sin() * p.energy - p.delta).abs() < 1e-12);
        assert!(p.theta > -PI / 2.0 && p.theta <= PI / 2.0);
    }

    #[test]
    fn ground_energy_dimer_point() {
        let dimer = c(0.0, 0.0, 1.0);
        assert_eq!(ground_energy(&dimer, &momentum_grid(3).unwrap()), -9.0);
        assert_eq!(
            ground_energy(&dimer, &momentum_grid(101).unwrap()),
            -10201.0
        );
    }

    #[test]
    fn ground_energy_symmetric_point_l3() {
        // Exact value -(1 + 2√3): one momentum with E = 1, six with E = 1/√3, two zero modes.
        let t = 1.0 / 3.0;
        let e0 = ground_energy(&c(t, t, t), &momentum_grid(3).unwrap());
        assert!((e0 - -4.464_101_615_137_754_6).abs() < 1e-14, "{e0}");
    }

    #[test]
    fn gap_examples() {
        let dimer = c(0.0, 0.0, 1.0);
        for l in [1, 3, 11] {
            assert_eq!(gap(&dimer, &momentum_grid(l).unwrap()), 2.0);
        }
        let t = 1.0 / 3.0;
        assert!(gap(&c(t, t, t), &momentum_grid(3).unwrap()) < 1e-15);
        let a_phase = gap(&c(0.2, 0.2, 0.6), &momentum_grid(51).unwrap());
        assert!(a_phase > 0.1, "{a_phase}");
    }

    #[test]
    fn zero_mode_detection() {
        let t = 1.0 / 3.0;
        let sym = c(t, t, t);
        assert!(matches!(
            check_no_zero_mode(&sym, &momentum_grid(9).unwrap()),
            Err(Error::Degenerate { .. })
        ));
        assert!(check_no_zero_mode(&sym, &momentum_grid(7).unwrap()).is_ok());
    }

    #[test]
    fn lowest_excitations_sorted_and_bounded() {
        let g = momentum_grid(5).unwrap();
        let cc = c(0.4, 0.35, 0.25);
        let ex = lowest_excitations(&cc, &g, 6).unwrap();
        assert_eq!(ex.len(), 6);
        assert!(ex.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(ex[0], gap(&cc, &g));
        assert!(lowest_excitations(&cc, &g, 26).is_err());
        assert_eq!(lowest_excitations(&cc, &g, 25).unwrap().len(), 25);
    }

    #[test]
    fn line_points_and_tangents() {
        let p = EvolutionLine::JxEqJy.point(0.5).unwrap();
        assert_eq!(p.as_array(), [0.25, 0.25, 0.5]);
        let p = EvolutionLine::JzThird.point(1.0 / 3.0).unwrap();
        for v in p.as_array() {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
        assert_eq!(EvolutionLine::JxEqJy.tangent(), [-0.5, -0.5, 1.0]);
        assert_eq!(EvolutionLine::JzThird.tangent(), [1.0, -1.0, 0.0]);
        assert!(EvolutionLine::JxEqJy.point(1.0).is_err());
        assert!(EvolutionLine::JzThird.point(0.7).is_err());
    }

    #[test]
    fn segment_line_is_affine() {
        let a = Couplings::on_plane(0.2, 0.2, 0.6).unwrap();
        let b = Couplings::on_plane(0.5, 0.1, 0.4).unwrap();
        let line = EvolutionLine::Segment { start: a, end: b };
        let mid = line.point(0.5).unwrap();
        assert!((mid.jx() - 0.35).abs() < 1e-15);
        assert!(mid.is_on_plane());
        let t = line.tangent();
        assert!((t.iter().sum::<f64>()).abs() < 1e-15);
        assert!(line.point(1.0).is_ok());
        assert!(line.point(1.01).is_err());
    }

    #[test]
    fn phase_examples() {
        assert_eq!(phase_of(&c(0.4, 0.4, 0.2)).unwrap(), Phase::B);
        assert_eq!(phase_of(&c(0.2, 0.2, 0.6)).unwrap(), Phase::A);
        assert_eq!(phase_of(&c(0.25, 0.25, 0.5)).unwrap(), Phase::Boundary);
        assert!(phase_of(&c(0.5, 0.5, 0.5)).is_err());
    }

    #[test]
    fn constructors_validate() {
        assert!(Couplings::new(-0.1, 0.5, 0.6).is_err());
        assert!(Couplings::new(f64::NAN, 0.5, 0.5).is_err());
        assert!(Couplings::on_plane(0.3, 0.3, 0.3).is_err());
        assert!(Couplings::on_plane(0.3, 0.3, 0.4).is_ok());
    }
}
