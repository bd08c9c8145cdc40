//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Criteria run concurrently and are reported in order.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fracwave::config::parse_config;
use fracwave::dispersion::{bbm_symbol, power_symbol};
use fracwave::evolution::{run, EquationFamily, EvolutionProblem, RunOutcome, StepControls};
use fracwave::experiments::{
    breaking_experiment, scaling_experiment, traveling_wave_experiment, ExperimentReport, TravelingTolerances,
};
use fracwave::invariants::{cubic_moment, fractional_energy, mass};
use fracwave::io::{emit_outputs, report_outputs, run_outputs};
use fracwave::solitary::{petviashvili_solve, solitary_residual, PetviashviliOptions, SolitaryError};
use fracwave::spectral::{
    apply_multiplier, derivative, free_group, hilbert_transform, make_grid, riesz_potential, sobolev_norm,
};
use fracwave::{Field, GridSpec, SobolevIndex};

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn config(name: &str) -> fracwave::config::RunConfig {
    let path = format!("{}/../../configs/{name}", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"));
    parse_config(&text).unwrap_or_else(|e| panic!("{path}: {e}"))
}

fn verdict_line(rep: &ExperimentReport) -> String {
    rep.verdicts
        .iter()
        .map(|v| format!("{} {:.3e}/{:.0e}", v.name, v.measured, v.tolerance))
        .collect::<Vec<_>>()
        .join(", ")
}

fn random_field(grid: GridSpec, kmax: i64, rng: &mut ChaCha8Rng, mean_free: bool) -> Field {
    let k0 = grid.fundamental();
    let mut coeffs = Vec::new();
    for k in 0..=kmax {
        if k == 0 && mean_free {
            continue;
        }
        coeffs.push((k as f64 * k0, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    }
    Field::from_fn(grid, |x| coeffs.iter().map(|&(xi, a, b)| a * (xi * x).cos() + b * (xi * x).sin()).sum())
}

fn rel(a: &Field, b: &Field) -> f64 {
    a.max_diff(b) / b.max_abs().max(f64::MIN_POSITIVE)
}

fn spectral_identities() -> Outcome {
    let g = make_grid(1024, PI).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut round, mut lin, mut comp, mut d1, mut modal, mut l2, mut pars) = (0f64, 0f64, 0f64, 0f64, 0f64, 0f64, 0f64);
    for _ in 0..20 {
        let f = random_field(g, 300, &mut rng, false);
        let h = random_field(g, 300, &mut rng, false);
        let m = random_field(g, 300, &mut rng, true);

        let back = Field::from_spectrum(g, f.spectrum().to_vec()).unwrap();
        round = round.max(rel(&back, &f));

        let (a, b) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let mult = |xi: f64| Complex64::new(1.0 / (1.0 + xi * xi), 0.0);
        let lhs = apply_multiplier(&f.axpby(a, &h, b).unwrap(), mult).unwrap();
        let rhs = apply_multiplier(&f, mult).unwrap().axpby(a, &apply_multiplier(&h, mult).unwrap(), b).unwrap();
        lin = lin.max(rel(&lhs, &rhs));

        let (p, q) = (rng.gen_range(-0.9..1.5), rng.gen_range(-0.9..1.5));
        let twice = riesz_potential(&riesz_potential(&m, p).unwrap(), q).unwrap();
        comp = comp.max(rel(&twice, &riesz_potential(&m, p + q).unwrap()));

        d1 = d1.max(rel(&hilbert_transform(&derivative(&m)), &riesz_potential(&m, 1.0).unwrap()));

        let alpha = rng.gen_range(-0.9..2.0);
        let t = rng.gen_range(-5.0..5.0);
        let u = free_group(&f, alpha, t);
        let peak = f.spectrum().iter().map(|c| c.norm()).fold(0.0, f64::max);
        for (c0, c1) in f.spectrum().iter().zip(u.spectrum()) {
            modal = modal.max((c0.norm() - c1.norm()).abs() / peak);
        }
        l2 = l2.max((u.inner(&u).sqrt() - f.inner(&f).sqrt()).abs() / f.inner(&f).sqrt());

        let quad = (g.dx() * f.samples().iter().map(|v| v * v).sum::<f64>()).sqrt();
        pars = pars.max((sobolev_norm(&f, SobolevIndex::inhomogeneous(0.0)).unwrap() - quad).abs() / quad);
    }
    let ok = round <= 1e-13 && lin <= 1e-12 && comp <= 1e-11 && d1 <= 1e-11 && modal <= 1e-14 && l2 <= 1e-14 && pars <= 1e-12;
    outcome(
        ok,
        format!(
            "round trip {round:.1e}, linearity {lin:.1e}, composition {comp:.1e}, D1=H dx {d1:.1e}, \
             modal {modal:.1e}, L2 {l2:.1e}, Parseval {pars:.1e}"
        ),
    )
}

fn kdv_oracle() -> Outcome {
    let g = make_grid(2048, 50.0).unwrap();
    let w = petviashvili_solve(2.0, 1.0, g, None, &PetviashviliOptions::default()).unwrap();
    let exact = Field::from_fn(g, |x| 3.0 / (x / 2.0).cosh().powi(2));
    let dist = w.profile.max_diff(&exact);
    let m = (mass(&w.profile).value - 24.0).abs() / 24.0;
    let c3 = (cubic_moment(&w.profile) - 57.6).abs() / 57.6;
    let a = (fractional_energy(&w.profile, 2.0) - 4.8).abs() / 4.8;
    outcome(
        dist <= 1e-8 && m <= 1e-6 && c3 <= 1e-6 && a <= 1e-6,
        format!("distance to 3 sech^2(x/2) {dist:.1e}, mass {m:.1e}, cubic {c3:.1e}, gradient {a:.1e}"),
    )
}

fn pohozaev() -> Outcome {
    let cases: [(f64, usize, f64); 5] =
        [(0.5, 1 << 20, 6400.0), (0.8, 65536, 3200.0), (1.0, 65536, 1600.0), (1.5, 16384, 400.0), (2.0, 2048, 50.0)];
    let mut ok = true;
    let mut parts = Vec::new();
    for (alpha, n, l) in cases {
        match petviashvili_solve(alpha, 1.0, make_grid(n, l).unwrap(), None, &PetviashviliOptions::default()) {
            Ok(w) => {
                let (r1, r2) = w.pohozaev;
                ok &= r1 <= 1e-6 && r2 <= 1e-6 && w.is_converged();
                parts.push(format!("a={alpha}: r1 {r1:.1e} r2 {r2:.1e}"));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("a={alpha}: {e}"));
            }
        }
    }
    outcome(ok, parts.join(", "))
}

fn benjamin_ono() -> Outcome {
    let g = make_grid(8192, 200.0).unwrap();
    let exact = Field::from_fn(g, |x| 4.0 / (1.0 + x * x));
    let substituted = solitary_residual(&exact, 1.0, 1.0).unwrap();
    let flipped = solitary_residual(&exact.scale(-1.0), 1.0, 1.0).unwrap();
    let w = petviashvili_solve(1.0, 1.0, g, None, &PetviashviliOptions::default()).unwrap();
    let dist = w.profile.max_diff(&exact) / 4.0;
    outcome(
        substituted < 1e-2 && flipped > 1.0 && dist <= 1e-3,
        format!("analytic residual {substituted:.1e} (negated {flipped:.1e}), relative distance {dist:.1e}"),
    )
}

fn conservation() -> Outcome {
    let cfg = config("evolve_conservation.toml");
    let r = run(&cfg.problem().unwrap(), cfg.t_end).unwrap();
    let m = r.diagnostics.relative_drift(|d| d.mass);
    let h = r.diagnostics.relative_drift(|d| d.hamiltonian);
    outcome(
        r.outcome == RunOutcome::Completed && m <= 1e-8 && h <= 1e-7,
        format!("{}, mass drift {m:.1e}, Hamiltonian drift {h:.1e}", r.outcome.tag()),
    )
}

fn bbm_conservation() -> Outcome {
    let g = make_grid(1024, PI).unwrap();
    let u0 = Field::from_fn(g, |x| 0.5 * x.sin() + 0.3 * (2.0 * x).cos() + 0.2);
    let controls = StepControls {
        store_snapshots: true,
        ..Default::default()
    };
    let p = EvolutionProblem::new(EquationFamily::FractionalBbm, bbm_symbol(0.5).unwrap(), 1.0, u0, controls).unwrap();
    let r = run(&p, 10.0).unwrap();
    let e = r.diagnostics.relative_drift(|d| d.hamiltonian);
    let h0 = p.bbm_hamiltonian(&p.initial);
    let h = r
        .snapshots
        .iter()
        .map(|(_, f)| f)
        .chain([&r.final_field])
        .map(|f| (p.bbm_hamiltonian(f) - h0).abs() / h0.abs())
        .fold(0.0, f64::max);
    outcome(
        r.outcome == RunOutcome::Completed && e <= 1e-8 && h <= 1e-7,
        format!("{}, E drift {e:.1e}, Hamiltonian drift {h:.1e}", r.outcome.tag()),
    )
}

fn scaling() -> Outcome {
    let g = make_grid(1024, 40.0).unwrap();
    let u0 = Field::from_fn(g, |x| (-x * x / 4.0).exp());
    let mut ok = true;
    let mut parts = Vec::new();
    // (0.3, 0.2) and (0.5, 0) sit at the critical index, where the ratio is 1
    for (alpha, s) in [(0.5, 1.0), (0.3, 0.2), (0.5, 0.0)] {
        let rep = scaling_experiment(alpha, s, 2.0, &u0, None).unwrap();
        let v = rep.verdict("norm_ratio").unwrap();
        ok &= v.passed;
        parts.push(format!("(a={alpha}, s={s}) {:.1e}", v.measured));
    }
    let cfg = config("scaling.toml");
    let rep = cfg.run_experiment().unwrap();
    ok &= rep.passed();
    parts.push(format!("evolved: {}", verdict_line(&rep)));
    outcome(ok, parts.join(", "))
}

fn traveling() -> Outcome {
    let controls = StepControls {
        cfl_factor: 0.1,
        dealias: true,
        ..Default::default()
    };
    let tol = TravelingTolerances {
        shape: 1e-4,
        speed: 1e-3,
    };
    let rep = traveling_wave_experiment(0.7, 1.0, make_grid(2048, 200.0).unwrap(), 10.0, &controls, tol).unwrap();
    outcome(rep.passed(), verdict_line(&rep))
}

fn breaking() -> Outcome {
    let g = make_grid(512, PI).unwrap();
    let controls = StepControls {
        cfl_factor: 0.25,
        ..Default::default()
    };
    let alphas = [-0.5, 0.0, 0.25, 0.5, 1.0, 2.0];
    let rep = breaking_experiment(&alphas, &Field::from_fn(g, f64::sin), 5.0, &controls).unwrap();
    let t0 = rep.value("breaking_time[0]").unwrap_or(f64::NAN);
    let tneg = rep.value("breaking_time[-0.5]").unwrap_or(f64::NAN);
    let kdv_done = rep.value("completed[2]") == Some(1.0);
    let kdv_growth = rep.value("growth[2]").unwrap_or(f64::INFINITY);
    let ok = (0.9..=1.2).contains(&t0) && tneg < 5.0 && kdv_done && kdv_growth <= 2.0 && rep.passed();
    let times: Vec<String> = alphas
        .iter()
        .map(|a| match rep.value(&format!("breaking_time[{a}]")) {
            Some(t) if t.is_finite() => format!("a={a}: breaks {t:.3}"),
            _ => format!("a={a}: growth {:.2}", rep.value(&format!("growth[{a}]")).unwrap_or(f64::NAN)),
        })
        .collect();
    outcome(ok, format!("{}; {}", times.join(", "), verdict_line(&rep)))
}

fn illposedness() -> Outcome {
    let rep = config("illposedness.toml").run_experiment().unwrap();
    outcome(rep.passed(), verdict_line(&rep))
}

fn nonexistence() -> Outcome {
    let g = make_grid(4096, 100.0).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for alpha in [0.2, 0.3] {
        assert!(matches!(
            petviashvili_solve(alpha, 1.0, g, None, &PetviashviliOptions::default()),
            Err(SolitaryError::AlphaOutOfRange(_))
        ));
        let opts = PetviashviliOptions {
            force: true,
            ..Default::default()
        };
        match petviashvili_solve(alpha, 1.0, g, None, &opts) {
            Ok(w) => {
                ok &= !w.certificate().passed();
                parts.push(format!("a={alpha}: r1 {:.1e} r2 {:.1e} residual {:.1e}", w.pohozaev.0, w.pohozaev.1, w.residual));
            }
            Err(e) => parts.push(format!("a={alpha}: {e}")),
        }
    }
    outcome(ok, parts.join(", "))
}

fn lifespan() -> Outcome {
    let rep = config("lifespan.toml").run_experiment().unwrap();
    let q = rep.value("exponent_q").unwrap_or(f64::NAN);
    outcome(rep.passed(), format!("q = {q:.6}; {}", verdict_line(&rep)))
}

fn determinism() -> Outcome {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut listings = Vec::new();
    for dir in &dirs {
        let cfg = config("evolve_conservation.toml");
        let r = run(&cfg.problem().unwrap(), cfg.t_end).unwrap();
        let alpha = power_symbol(0.6).unwrap().power_alpha();
        let mut files = emit_outputs(&run_outputs(&r, alpha), &dir.path().join("evolve"), &cfg.resolved).unwrap();
        let cfg = config("breaking.toml");
        let rep = cfg.run_experiment().unwrap();
        files.extend(emit_outputs(&report_outputs(&rep), &dir.path().join("breaking"), &cfg.resolved).unwrap());
        let mut contents: Vec<(String, Vec<u8>)> = files
            .iter()
            .map(|p| (p.strip_prefix(dir.path()).unwrap().display().to_string(), std::fs::read(p).unwrap()))
            .collect();
        contents.sort();
        listings.push(contents);
    }
    let same = listings[0] == listings[1];
    outcome(same && !listings[0].is_empty(), format!("{} files compared, identical: {same}", listings[0].len()))
}

fn main() -> ExitCode {
    let criteria: Vec<Criterion> = vec![
        ("spectral identities", spectral_identities),
        ("KdV soliton oracle", kdv_oracle),
        ("Pohozaev certificate", pohozaev),
        ("Benjamin-Ono oracle", benjamin_ono),
        ("dispersive Burgers conservation", conservation),
        ("BBM conservation", bbm_conservation),
        ("scaling law", scaling),
        ("traveling-wave fidelity", traveling),
        ("breaking dichotomy", breaking),
        ("ill-posedness decoherence", illposedness),
        ("non-existence below alpha = 1/3", nonexistence),
        ("lifespan scaling", lifespan),
        ("determinism", determinism),
    ];
    let results: Vec<(Outcome, f64)> = std::thread::scope(|s| {
        let handles: Vec<_> = criteria
            .iter()
            .map(|&(_, f)| {
                s.spawn(move || {
                    let t = Instant::now();
                    let o = std::panic::catch_unwind(f).unwrap_or_else(|e| {
                        let msg = e
                            .downcast_ref::<String>()
                            .cloned()
                            .or_else(|| e.downcast_ref::<&str>().map(|m| m.to_string()))
                            .unwrap_or_default();
                        outcome(false, format!("panicked: {msg}"))
                    });
                    (o, t.elapsed().as_secs_f64())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut failed = 0;
    for (k, ((name, _), (o, secs))) in criteria.iter().zip(&results).enumerate() {
        println!(
            "{} {:>2} {name}: {} [{secs:.1}s]",
            if o.passed { "PASS" } else { "FAIL" },
            k + 1,
            o.detail
        );
        failed += usize::from(!o.passed);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
