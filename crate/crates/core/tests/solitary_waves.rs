use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fracwave::solitary::{
    decay_check, petviashvili_solve, rescale_wave, rescale_wave_on, solitary_residual, weinstein_functional,
    DecayStatus, PetviashviliOptions,
};
use fracwave::spectral::make_grid;
use fracwave::{Field, SolitaryWave};

fn solve(alpha: f64, n: usize, l: f64) -> SolitaryWave {
    petviashvili_solve(alpha, 1.0, make_grid(n, l).unwrap(), None, &PetviashviliOptions::default()).unwrap()
}

#[test]
fn tail_decays_like_the_expected_power() {
    let w = solve(0.7, 8192, 400.0);
    let r = decay_check(&w);
    match r.status {
        DecayStatus::Fitted {
            exponent,
            within_tolerance,
        } => {
            assert!((-1.85..=-1.55).contains(&exponent), "exponent {exponent}");
            assert!(within_tolerance);
        }
        s => panic!("{s:?}"),
    }
    assert!(r.empirical_constant.is_finite() && r.empirical_constant > 0.0);
}

#[test]
fn profile_is_even_positive_and_decreasing() {
    let w = solve(0.7, 4096, 200.0);
    assert!(w.residual <= 1e-8 && w.evenness_defect <= 1e-8);
    assert!(w.monotone);
    assert!(w.profile.samples().iter().all(|&v| v > 0.0));
}

#[test]
fn ground_state_is_a_local_minimum_of_weinstein() {
    let w = solve(0.7, 4096, 200.0);
    let q = &w.profile;
    let j0 = weinstein_functional(q, 0.7, 1).unwrap().value;
    let scale = q.max_abs();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let (a, k) = (rng.gen_range(-1.0..1.0), rng.gen_range(0.05..1.0));
        let bump = Field::from_fn(*q.grid(), |x| x * (-(k * x) * (k * x)).exp());
        let p = bump.scale(1e-2 * a * scale / bump.max_abs());
        let j = weinstein_functional(&q.axpby(1.0, &p, 1.0).unwrap(), 0.7, 1).unwrap().value;
        assert!(j >= j0 * (1.0 - 1e-12), "J decreased: {j} < {j0}");
    }
}

// Every term of the profile equation carries a factor c^2 after rescaling.
fn closes(w: &SolitaryWave, q: &Field, c: f64) {
    let r = solitary_residual(q, w.alpha, c).unwrap() / (c * c).max(1.0);
    assert!(r <= 10.0 * w.residual.max(1e-13), "c = {c}: residual {r:e} vs {:e}", w.residual);
}

#[test]
fn speed_family_closes() {
    let w = solve(2.0, 2048, 50.0);
    for c in [0.5, 2.0, 4.0] {
        closes(&w, &rescale_wave(&w, c).unwrap(), c);
    }
    // algebraic tails: resample onto the box that matches the dilation
    let w = solve(1.5, 16384, 400.0);
    for c in [0.5f64, 2.0, 4.0] {
        let target = make_grid(16384, 400.0 / c.powf(1.0 / 1.5)).unwrap();
        closes(&w, &rescale_wave_on(&w, c, target).unwrap(), c);
    }
}

#[test]
fn kdv_rescales_to_the_analytic_family() {
    let w = solve(2.0, 2048, 50.0);
    let q = rescale_wave(&w, 4.0).unwrap();
    let exact = Field::from_fn(*q.grid(), |x| 12.0 / x.cosh().powi(2));
    assert!(q.max_diff(&exact) <= 1e-6, "{}", q.max_diff(&exact));
}
