//! Acceptance suite: one pass/fail line per criterion, nonzero exit if any
//! criterion fails. Runs without the libtest harness so the lines always show.

mod common;

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use csswaves::analysis::{omega0_threshold, tm_probe, MoserFamily, TrendVerdict};
use csswaves::chern_simons::{cs_derivative, cs_energy_c, fubini_identity_check};
use csswaves::cli::{parse_config, run};
use csswaves::functional::{derivative, energy, probe_geometry};
use csswaves::grid::h1_norm_sq;
use csswaves::nonlinearity::{compute_Sp, validate_model, validate_model_with};
use csswaves::solvers::{mountain_pass_solve, two_solution_experiment};
use csswaves::NonlinearityModel;

use common::{default_grid, default_spec, ground_energy_oracle, random_profile, rng, sp_oracle};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

fn gradient_consistency() -> Outcome {
    let start = Instant::now();
    let spec = default_spec(1024, 1e-2, 1e-2);
    let mut g = rng(1);
    let t = 1e-5;
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let u = random_profile(&spec.grid, &mut g, 0.8);
        let phi = random_profile(&spec.grid, &mut g, 1.0);
        let d = derivative(&spec, &u, &phi).unwrap();
        let jp = energy(&spec, &u.axpy(t, &phi).unwrap()).unwrap();
        let jm = energy(&spec, &u.axpy(-t, &phi).unwrap()).unwrap();
        let fd = (jp - jm) / (2.0 * t);
        worst = worst.max((d - fd).abs() / d.abs().max(1.0));
    }
    let el = start.elapsed();
    outcome(worst <= 1e-5 && within(el, 10.0), format!("worst scaled gap {worst:.2e}, {el:.2?}"))
}

fn homogeneity_suite() -> Outcome {
    let start = Instant::now();
    let grid = default_grid(2048);
    let mut g = rng(2);
    let (mut hom, mut euler, mut fub) = (0.0_f64, 0.0_f64, 0.0_f64);
    for _ in 0..100 {
        let u = random_profile(&grid, &mut g, 1.0);
        let t = 0.5 + 1.5 * rand::Rng::gen::<f64>(&mut g);
        let c = cs_energy_c(&u);
        let ct = cs_energy_c(&u.scaled(t));
        hom = hom.max((ct - t.powi(6) * c).abs() / (t.powi(6) * c));
        euler = euler.max((cs_derivative(&u, &u).unwrap() - 6.0 * c).abs() / (6.0 * c));
        fub = fub.max(fubini_identity_check(&u));
    }
    let el = start.elapsed();
    outcome(
        hom <= 1e-10 && euler <= 1e-8 && fub <= 1e-5 && within(el, 5.0),
        format!("homogeneity {hom:.1e}, euler {euler:.1e}, fubini {fub:.1e}, {el:.2?}"),
    )
}

fn six_j_identity() -> Outcome {
    let spec = default_spec(2048, 1e-2, 0.0);
    let sp = compute_Sp(8.0, &spec.grid).unwrap();
    let exp_model = NonlinearityModel::exp_critical(8.0, spec.model.c_p, 0.0, 1e-2).unwrap();
    let models = [spec.model, exp_model];
    let mut g = rng(3);
    let (mut worst_rel, mut min_margin, mut all_valid) = (0.0_f64, f64::INFINITY, true);
    for model in models {
        all_valid &= validate_model(&model, &sp).passed;
        let s = csswaves::ProblemSpec { model, ..spec.clone() };
        for _ in 0..25 {
            let u = random_profile(&s.grid, &mut g, 0.5);
            let lhs = 6.0 * energy(&s, &u).unwrap() - derivative(&s, &u, &u).unwrap();
            let norm = h1_norm_sq(&u);
            let extra: Vec<f64> = u
                .values()
                .iter()
                .map(|&v| v * model.f(v).unwrap() - 6.0 * model.big_f(v).unwrap())
                .collect();
            let rhs = 2.0 * norm + s.grid.integrate(&extra);
            worst_rel = worst_rel.max((lhs - rhs).abs() / rhs.abs());
            min_margin = min_margin.min(lhs / ((2.0 - model.sigma) * norm));
        }
    }
    outcome(
        all_valid && worst_rel <= 1e-8 && min_margin >= 1.0,
        format!("identity gap {worst_rel:.1e}, min (6J−J′u)/((2−σ)‖u‖²) = {min_margin:.4}"),
    )
}

fn mountain_pass_run() -> Outcome {
    let start = Instant::now();
    let spec = default_spec(2048, 1e-2, 0.0);
    match mountain_pass_solve(&spec) {
        Ok(s) => {
            let el = start.elapsed();
            let tol = 1e-4 * (1.0 + s.u.max_value());
            let ok = s.grad_norm <= 1e-8
                && s.residual <= tol
                && s.u.min_value() >= -1e-8
                && s.energy > 0.0
                && s.energy < 1.0 / 3.0
                && within(el, 300.0);
            outcome(
                ok,
                format!(
                    "energy {:.8}, grad {:.1e}, residual {:.1e} (tol {tol:.1e}), min u {:.1e}, {el:.2?}",
                    s.energy,
                    s.grad_norm,
                    s.residual,
                    s.u.min_value()
                ),
            )
        }
        Err(e) => outcome(false, format!("solver error: {e}")),
    }
}

fn small_lambda_oracle() -> Outcome {
    let start = Instant::now();
    let spec = default_spec(2048, 1e-6, 0.0);
    let oracle = ground_energy_oracle(8.0, spec.model.c_p);
    match mountain_pass_solve(&spec) {
        Ok(s) => {
            let el = start.elapsed();
            let rel = (s.energy - oracle).abs() / oracle;
            outcome(
                rel <= 1e-3 && within(el, 120.0),
                format!("energy {:.8} vs shooting {oracle:.8}, rel {rel:.1e}, {el:.2?}", s.energy),
            )
        }
        Err(e) => outcome(false, format!("solver error: {e}")),
    }
}

fn two_solution_run() -> Outcome {
    let start = Instant::now();
    let spec = default_spec(2048, 1e-2, 1e-2);
    let rep = match two_solution_experiment(&spec) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("experiment error: {e}")),
    };
    let el = start.elapsed();
    let (Some(mp), Some(lm), Some(sep)) = (&rep.mp, &rep.lm, rep.separation) else {
        return outcome(false, format!("missing solution; notes {:?}", rep.notes));
    };
    let ok = mp.energy > 0.0
        && mp.energy < 1.0 / 3.0
        && lm.energy < 0.0
        && mp.u.min_value() >= -1e-8
        && lm.u.min_value() >= -1e-8
        && sep > 1e-2
        && within(el, 600.0);
    outcome(
        ok,
        format!("c_eps {:.6}, c1 {:.3e}, separation {sep:.3}, {el:.2?}", mp.energy, lm.energy),
    )
}

fn geometry_probe() -> Outcome {
    let mut rows = Vec::new();
    for eps in [1e-3, 1e-2, 3e-2] {
        let rep = probe_geometry(&default_spec(2048, 1e-2, eps), 16).unwrap();
        rows.push((eps, rep.rho, rep.d, rep.geometry_holds));
    }
    // The quadratic well is the ε-independent leading term of the scan.
    let exponent = probe_geometry(&default_spec(2048, 1e-2, 0.0), 16)
        .unwrap()
        .leading_exponent(0.05)
        .unwrap_or(f64::NAN);
    let d_positive = rows.iter().all(|r| r.2 > 0.0 && r.3);
    let monotone = rows.windows(2).all(|w| w[1].1 >= w[0].1);
    let ok = d_positive && monotone && (1.9..=2.1).contains(&exponent);
    let table: Vec<String> = rows
        .iter()
        .map(|(e, rho, d, _)| format!("ε={e:.0e}: ρ={rho:.4}, d={d:.2e}"))
        .collect();
    outcome(ok, format!("{}; exponent {exponent:.4}", table.join("; ")))
}

fn tm_probe_criterion() -> Outcome {
    let start = Instant::now();
    let family = MoserFamily::standard(&[4.0, 16.0, 64.0, 256.0]).unwrap();
    let low = tm_probe(2.0 * PI, &family).unwrap();
    let high = tm_probe(8.0 * PI, &family).unwrap();
    let el = start.elapsed();
    let grows = high.ratios.iter().all(|&q| q >= 4.0);
    let plateau_match = high
        .values
        .iter()
        .zip(&high.plateau)
        .all(|(v, p)| (0.5..=2.0).contains(&(v / p)));
    let ok = low.verdict == TrendVerdict::Bounded && grows && plateau_match && within(el, 60.0);
    outcome(
        ok,
        format!(
            "I(2π) = {:.3?} ({:?}); I(8π) ratios {:.2?}; I/plateau {:.2?}; {el:.2?}",
            low.values,
            low.verdict,
            high.ratios,
            high.values.iter().zip(&high.plateau).map(|(v, p)| v / p).collect::<Vec<_>>()
        ),
    )
}

fn sp_criterion() -> Outcome {
    let start = Instant::now();
    let grid = default_grid(2048);
    let sp = compute_Sp(8.0, &grid).unwrap();
    let oracle = sp_oracle(8.0);
    let rel = (sp.value - oracle).abs() / oracle;
    let s8 = sp.value.powi(8);
    let reject = !validate_model_with(&NonlinearityModel::power(8.0, s8, 0.0).unwrap(), sp.value, 4.0).passed;
    let accept = validate_model_with(
        &NonlinearityModel::power(8.0, 1.5 * 11.390625 * s8, 0.0).unwrap(),
        sp.value,
        4.0,
    )
    .passed;
    let el = start.elapsed();
    outcome(
        rel <= 1e-4 && reject && accept && within(el, 120.0),
        format!("S8 {:.10} vs shooting {oracle:.10}, rel {rel:.1e}; rejects {reject}, accepts {accept}; {el:.2?}", sp.value),
    )
}

fn omega0_criterion() -> Outcome {
    let start = Instant::now();
    let rep = match omega0_threshold(2.0, 10.0) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("error: {e}")),
    };
    let el = start.elapsed();
    let windows: Vec<f64> = rep.windows.iter().map(|w| w.window).collect();
    let ok = rep.rule_gap <= 1e-8
        && rep.rules_agree
        && rep.divergent
        && windows == [10.0, 20.0, 40.0]
        && within(el, 10.0);
    outcome(
        ok,
        format!("rule gap {:.1e}, increments {:.3?}, divergent {}; {el:.2?}", rep.rule_gap, rep.increments, rep.divergent),
    )
}

fn determinism_and_refinement() -> Outcome {
    let config = parse_config("{}").unwrap();
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let codes: Vec<i32> = dirs.iter().map(|d| run(&config, d.path()).exit_code).collect();
    let mut identical = codes == [0, 0];
    let mut names: Vec<_> = std::fs::read_dir(dirs[0].path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    for name in &names {
        let a = std::fs::read(dirs[0].path().join(name)).unwrap();
        let b = std::fs::read(dirs[1].path().join(name)).ok();
        identical &= Some(a) == b;
    }
    let coarse = mountain_pass_solve(&default_spec(1024, 1e-2, 0.0)).map(|s| s.energy);
    let fine = mountain_pass_solve(&default_spec(2048, 1e-2, 0.0)).map(|s| s.energy);
    match (coarse, fine) {
        (Ok(c), Ok(f)) => {
            let rel = (c - f).abs() / f;
            outcome(
                identical && rel <= 1e-3,
                format!("{} artifacts identical: {identical}; N=1024 vs 2048 rel {rel:.1e}", names.len()),
            )
        }
        _ => outcome(false, "mountain pass failed on a refinement level"),
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("gradient consistency", gradient_consistency),
        ("homogeneity / euler / fubini", homogeneity_suite),
        ("6J − J′u identity", six_j_identity),
        ("mountain-pass run", mountain_pass_run),
        ("small-λ oracle", small_lambda_oracle),
        ("two-solution run", two_solution_run),
        ("geometry probe", geometry_probe),
        ("trudinger-moser probe", tm_probe_criterion),
        ("sobolev constant", sp_criterion),
        ("ω0 diagnostic", omega0_criterion),
        ("determinism and refinement", determinism_and_refinement),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let result = check();
        let tag = if result.passed { "PASS" } else { "FAIL" };
        println!("[{tag}] {:>2}. {name}: {}", i + 1, result.detail);
        if !result.passed {
            failures += 1;
        }
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
