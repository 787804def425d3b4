//! Values pinned by an independent 40-digit evaluation of the defining sums.

#![allow(clippy::excessive_precision, clippy::needless_range_loop)]

use kitaev_core::correlation::{
    bond_expectation, correlation_length_theory, correlation_profile_fast, fit_exponential,
    fit_power_law, FitOptions, FitWindow,
};
use kitaev_core::fidelity::{chi_finite_difference, chi_line_closed_form, fidelity, metric_tensor};
use kitaev_core::model::{ground_energy, momentum_grid, Couplings, EvolutionLine, LineKind};

fn c(jx: f64, jy: f64, jz: f64) -> Couplings {
    Couplings::new(jx, jy, jz).unwrap()
}

#[test]
fn symmetric_point_ground_energy() {
    let t = 1.0 / 3.0;
    let e = ground_energy(&c(t, t, t), &momentum_grid(3).unwrap());
    assert!((e + 4.464_101_615_137_754_6).abs() < 1e-14);
}

#[test]
fn fidelity_between_nearby_gapped_points() {
    let f = fidelity(
        &c(0.2, 0.2, 0.6),
        &c(0.21, 0.21, 0.58),
        &momentum_grid(11).unwrap(),
    )
    .unwrap();
    assert!((f.value - 0.980_024_029_895_928_2).abs() < 1e-14);
}

#[test]
fn metric_components() {
    let g = metric_tensor(&c(0.3, 0.3, 0.4), &momentum_grid(7).unwrap()).unwrap();
    let want = [
        [
            40.124_537_760_965_104,
            -0.325_996_199_052_252_64,
            -29.848_906_171_434_639,
        ],
        [
            -0.325_996_199_052_252_64,
            40.124_537_760_965_104,
            -29.848_906_171_434_639,
        ],
        [
            -29.848_906_171_434_639,
            -29.848_906_171_434_639,
            44.773_359_257_151_958,
        ],
    ];
    for a in 0..3 {
        for b in 0..3 {
            assert!(
                (g.get(a, b) - want[a][b]).abs() < 1e-12 * want[a][b].abs(),
                "g[{a}][{b}]"
            );
        }
    }
}

#[test]
fn bond_expectation_and_length() {
    let t = 1.0 / 3.0;
    let b = bond_expectation(&c(t, t, t), &momentum_grid(7).unwrap()).unwrap();
    assert!((b - 0.262_830_249_922_614_18).abs() < 1e-15);
    let xi = correlation_length_theory(0.75).unwrap();
    assert!((xi - 0.283_648_164_276_627_75).abs() < 1e-15);
}

#[test]
fn dimer_point_energy_derivative_counts_each_bond_twice() {
    // -∂E0/∂Jz per z-bond is (1/L²) Σ ε/E = 1 at the dimer point, while the
    // 1/N-normalized bond expectation is 1/2.
    let grid = momentum_grid(21).unwrap();
    let h = 1e-6;
    let de = (ground_energy(&c(0.0, 0.0, 1.0 + h), &grid)
        - ground_energy(&c(0.0, 0.0, 1.0 - h), &grid))
        / (2.0 * h);
    assert!((-de / grid.len() as f64 - 1.0).abs() < 1e-9);
    assert_eq!(bond_expectation(&c(0.0, 0.0, 1.0), &grid).unwrap(), 0.5);
}

#[test]
fn gapped_susceptibility_matches_fidelity_oracle() {
    let grid = momentum_grid(31).unwrap();
    for lambda in [0.6, 0.75, 0.9] {
        let exact = chi_line_closed_form(LineKind::JxEqJy, lambda, &grid).unwrap();
        let fd = chi_finite_difference(&EvolutionLine::JxEqJy, lambda, 1e-4, &grid).unwrap();
        assert!((fd / exact - 1.0).abs() < 1e-6, "{lambda}: {fd} vs {exact}");
    }
}

#[test]
fn decay_shape_separates_the_phases() {
    let grid = momentum_grid(101).unwrap();
    let window = FitWindow::new(5.0, 20.0).unwrap();
    let opts = FitOptions::default();
    let fits = |jz: f64| {
        let p = correlation_profile_fast(&EvolutionLine::JxEqJy.point(jz).unwrap(), &grid).unwrap();
        let series = p.diagonal();
        (
            kitaev_core::correlation::fit_exponential_series(&series, window, &opts).unwrap(),
            kitaev_core::correlation::fit_power_law_series(&series, window, &opts).unwrap(),
            p,
        )
    };
    let (exp, pow, p) = fits(0.7);
    assert!(exp.rms_residual < pow.rms_residual);
    assert!(fit_exponential(&p, window, &opts).is_ok());
    let (exp, pow, p) = fits(0.3);
    assert!(exp.rms_residual > pow.rms_residual);
    assert!(fit_power_law(&p, window, &opts).is_ok());
}

#[test]
fn long_range_correlation_only_in_gapless_phase() {
    let grid = momentum_grid(99).unwrap();
    let at = |jz: f64| {
        correlation_profile_fast(&EvolutionLine::JxEqJy.point(jz).unwrap(), &grid)
            .unwrap()
            .get(49, 49)
            .unwrap()
            .abs()
    };
    assert!(at(0.4) > 1e-10);
    assert!(at(0.6) < 1e-10);
}
