use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use fracwave::dispersion::{
    bbm_symbol, capillary_symbol, gaussian_symbol, power_symbol, whitham_symbol, zaitsev_symbol,
};
use fracwave::evolution::{
    bbm_rhs, nonlinear_term, run, EquationFamily, EvolutionProblem, Stepper, StepControls,
};
use fracwave::invariants::{cubic_moment, fractional_energy, hamiltonian, mass};
use fracwave::solitary::weinstein_functional;
use fracwave::spectral::{
    apply_multiplier, derivative, free_group, hilbert_transform, make_grid, riesz_potential, sobolev_norm,
};
use fracwave::{Field, GridSpec, SobolevIndex};

const N: usize = 128;

/// Band-limited field with modes `1..=coeffs.len()` (plus an optional mean),
/// resolved under the two-thirds rule.
fn field(grid: GridSpec, mean: f64, coeffs: &[(f64, f64)]) -> Field {
    let k0 = grid.fundamental();
    Field::from_fn(grid, |x| {
        mean + coeffs
            .iter()
            .enumerate()
            .map(|(k, &(a, b))| {
                let xi = (k + 1) as f64 * k0;
                let decay = 1.0 / (1.0 + k as f64);
                decay * (a * (xi * x).cos() + b * (xi * x).sin())
            })
            .sum::<f64>()
    })
}

fn coeffs() -> impl Strategy<Value = Vec<(f64, f64)>> {
    low_coeffs(N / 3)
}

fn low_coeffs(kmax: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..kmax)
}

fn grid_for(l: f64) -> GridSpec {
    make_grid(N, l).unwrap()
}

fn rel(a: &Field, b: &Field) -> f64 {
    a.max_diff(b) / b.max_abs().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn transform_round_trip(samples in prop::collection::vec(-10.0..10.0f64, N), l in 0.5..50.0f64) {
        let f = Field::from_samples(grid_for(l), samples).unwrap();
        let back = Field::from_spectrum(*f.grid(), f.spectrum().to_vec()).unwrap();
        prop_assert!(rel(&back, &f) <= 1e-13);
    }

    #[test]
    fn multipliers_are_linear(c1 in coeffs(), c2 in coeffs(), a in -5.0..5.0f64, b in -5.0..5.0f64) {
        let g = grid_for(PI);
        let (f, h) = (field(g, 0.3, &c1), field(g, -0.1, &c2));
        let combo = f.axpby(a, &h, b).unwrap();
        let m = |xi: f64| Complex64::new((-0.01 * xi * xi).exp(), 0.0);
        let lhs = apply_multiplier(&combo, m).unwrap();
        let rhs = apply_multiplier(&f, m).unwrap().axpby(a, &apply_multiplier(&h, m).unwrap(), b).unwrap();
        prop_assert!(lhs.max_diff(&rhs) <= 1e-12 * (1.0 + rhs.max_abs()));
        let lhs = derivative(&combo);
        let rhs = derivative(&f).axpby(a, &derivative(&h), b).unwrap();
        prop_assert!(lhs.max_diff(&rhs) <= 1e-12 * (1.0 + rhs.max_abs()));
    }

    #[test]
    fn riesz_potentials_compose(c in coeffs(), a in -0.9..2.0f64, b in -0.9..2.0f64, l in 1.0..20.0f64) {
        let f = field(grid_for(l), 0.0, &c);
        let twice = riesz_potential(&riesz_potential(&f, a).unwrap(), b).unwrap();
        let once = riesz_potential(&f, a + b).unwrap();
        prop_assert!(rel(&twice, &once) <= 1e-11);
    }

    #[test]
    fn first_order_riesz_is_hilbert_of_derivative(c in coeffs(), l in 1.0..20.0f64) {
        let f = field(grid_for(l), 0.0, &c);
        let d1 = riesz_potential(&f, 1.0).unwrap();
        prop_assert!(rel(&hilbert_transform(&derivative(&f)), &d1) <= 1e-11);
        prop_assert!(rel(&hilbert_transform(&hilbert_transform(&f)), &f.scale(-1.0)) <= 1e-12);
    }

    #[test]
    fn free_group_is_unitary(c in coeffs(), alpha in -0.9..2.0f64, t in -10.0..10.0f64) {
        let f = field(grid_for(PI), 0.5, &c);
        let u = free_group(&f, alpha, t);
        let peak = f.spectrum().iter().map(|z| z.norm()).fold(0.0, f64::max);
        for (z0, z1) in f.spectrum().iter().zip(u.spectrum()) {
            prop_assert!((z0.norm() - z1.norm()).abs() <= 1e-14 * peak);
        }
        prop_assert!((mass(&u).value - mass(&f).value).abs() <= 1e-13 * mass(&f).value);
    }

    #[test]
    fn free_group_composes(c in low_coeffs(11), alpha in -0.9..2.0f64, t in -2.0..2.0f64, s in -2.0..2.0f64) {
        // phases t |xi|^alpha xi stay below ~2e3, so rounding in them is far below 1e-12
        let f = field(grid_for(PI), 0.5, &c);
        let two = free_group(&free_group(&f, alpha, t), alpha, s);
        prop_assert!(rel(&two, &free_group(&f, alpha, t + s)) <= 1e-12);
    }

    #[test]
    fn parseval(c in coeffs(), mean in -2.0..2.0f64, l in 0.5..50.0f64) {
        let f = field(grid_for(l), mean, &c);
        let quad = (f.grid().dx() * f.samples().iter().map(|v| v * v).sum::<f64>()).sqrt();
        let norm = sobolev_norm(&f, SobolevIndex::inhomogeneous(0.0)).unwrap();
        prop_assert!((norm - quad).abs() <= 1e-12 * quad);
        prop_assert!((mass(&f).value - quad * quad).abs() <= 1e-12 * quad * quad);
    }

    #[test]
    fn sobolev_norms_increase_with_s(c in coeffs(), s1 in -2.0..3.0f64, ds in 0.0..2.0f64) {
        // spectrum on |xi| >= 1 when L = pi and the mean is zero
        let f = field(grid_for(PI), 0.0, &c);
        let lo = sobolev_norm(&f, SobolevIndex::homogeneous(s1)).unwrap();
        let hi = sobolev_norm(&f, SobolevIndex::homogeneous(s1 + ds)).unwrap();
        prop_assert!(hi >= lo * (1.0 - 1e-14));
    }

    #[test]
    fn quadratic_terms_have_zero_mean(c in coeffs(), mean in -1.0..1.0f64, alpha in 0.0..2.0f64) {
        let f = field(grid_for(PI), mean, &c);
        prop_assert!(nonlinear_term(&f, true).mean().abs() <= 1e-13);
        prop_assert!(nonlinear_term(&f, false).mean().abs() <= 1e-13);
        prop_assert!(bbm_rhs(&f, alpha, 0.7).mean().abs() <= 1e-13);
    }

    #[test]
    fn symbols_are_even(xi in -1e4..1e4f64, alpha in -0.99..2.0f64) {
        let symbols = [
            power_symbol(alpha).unwrap(),
            whitham_symbol(),
            capillary_symbol(1.3, 0.4).unwrap(),
            zaitsev_symbol(0.5).unwrap(),
            bbm_symbol(alpha.abs().max(0.01)).unwrap(),
            gaussian_symbol(2.0).unwrap(),
        ];
        for p in &symbols {
            prop_assert_eq!(p.evaluate(xi), p.evaluate(-xi));
        }
    }

    #[test]
    fn cubic_term_flips_with_sign(c in coeffs(), mean in -1.0..1.0f64, alpha in 0.34..2.0f64) {
        let f = field(grid_for(PI), mean, &c);
        let d = hamiltonian(&f.scale(-1.0), alpha).value - hamiltonian(&f, alpha).value;
        prop_assert!((d - cubic_moment(&f) / 3.0).abs() <= 1e-12 * (1.0 + cubic_moment(&f).abs()));
    }

    #[test]
    fn weinstein_is_scale_free(c in coeffs(), mu in 0.1..10.0f64, alpha in 0.34..2.0f64) {
        let f = field(grid_for(PI), 1.5, &c);
        let j = weinstein_functional(&f, alpha, 1).unwrap().value;
        let jm = weinstein_functional(&f.scale(mu), alpha, 1).unwrap().value;
        prop_assert!((j - jm).abs() <= 1e-10 * j.abs());
    }

    #[test]
    fn dilation_scales_the_energy(c in coeffs(), alpha in 0.1..2.0f64, lambda in 2u32..5) {
        // lambda^alpha u(lambda x) on [-L/lambda, L/lambda) has the same samples up to lambda^alpha
        let lam = lambda as f64;
        let f = field(grid_for(PI), 0.0, &c);
        let g = make_grid(N, PI / lam).unwrap();
        let ul = Field::from_samples(g, f.samples().iter().map(|v| lam.powf(alpha) * v).collect()).unwrap();
        let ratio = fractional_energy(&ul, alpha) / fractional_energy(&f, alpha);
        let expected = lam.powf(3.0 * alpha - 1.0);
        prop_assert!((ratio - expected).abs() <= 1e-12 * expected);
    }

    #[test]
    fn steps_reverse(c in low_coeffs(5), alpha in 0.0..2.0f64, dt in 1e-4..1e-3f64) {
        let f = field(grid_for(PI), 0.0, &c).scale(0.3);
        let p = EvolutionProblem::new(
            EquationFamily::DispersiveBurgers,
            power_symbol(alpha).unwrap(),
            1.0,
            f.clone(),
            StepControls::default(),
        )
        .unwrap();
        let s = Stepper::new(&p);
        let back = s.step(&s.step(&f, dt), -dt);
        prop_assert!(back.max_diff(&f) <= 1e-10);
    }
}

#[test]
fn linear_runs_are_the_free_group() {
    let g = make_grid(256, PI).unwrap();
    let u0 = field(g, 0.2, &[(0.4, -0.3), (0.1, 0.2), (0.0, 0.3)]);
    for alpha in [-0.5, 0.6, 2.0] {
        let mut p = EvolutionProblem::new(
            EquationFamily::DispersiveBurgers,
            power_symbol(alpha).unwrap(),
            1.0,
            u0.clone(),
            StepControls::default(),
        )
        .unwrap();
        p.nonlinear = false;
        let r = run(&p, 3.0).unwrap();
        let undone = free_group(&r.final_field, alpha, -r.final_time);
        assert!(undone.max_diff(&u0) < 1e-12, "alpha {alpha}: {}", undone.max_diff(&u0));
    }
}

#[test]
fn rk4_is_fourth_order() {
    let g = make_grid(128, PI).unwrap();
    let u0 = Field::from_fn(g, |x| 0.2 * x.sin());
    let p = EvolutionProblem::new(
        EquationFamily::DispersiveBurgers,
        power_symbol(0.6).unwrap(),
        1.0,
        u0.clone(),
        StepControls::default(),
    )
    .unwrap();
    let s = Stepper::new(&p);
    let t = 0.8;
    let advance = |steps: usize| (0..steps).fold(u0.clone(), |u, _| s.step(&u, t / steps as f64));
    let reference = advance(64);
    let e1 = advance(8).max_diff(&reference);
    let e2 = advance(16).max_diff(&reference);
    let q = e1 / e2;
    assert!((12.0..=20.0).contains(&q), "ratio {q} ({e1:e}, {e2:e})");
}
