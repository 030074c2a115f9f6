//! Critical-point finders.
//!
//! * [`mountain_pass_solve`]: path-deformation mountain-pass iteration for the
//!   positive-energy solution.
//! * [`constrained_min_solve`]: projected Sobolev-gradient descent in the
//!   ball `‖u‖ ≤ ρ_ε` for the negative-energy local minimizer (ε > 0).
//! * [`two_solution_experiment`] and [`parameter_sweep`] orchestrate both.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::functional::{
    dual_slice, energy_parts, energy_slice, gradient_slice, pde_residual, probe_geometry,
    riesz_direction, GeometryReport, ProblemSpec, SpecSummary, DEFAULT_N_DIRS,
};
use crate::grid::{h1_norm, inner_h1, RadialFunction, RadialGrid};

/// Armijo sufficient-decrease constant.
pub const ARMIJO_C1: f64 = 1e-4;
/// Lower bound accepted for `min u` on returned solutions.
pub const NONNEG_TOL: f64 = -1e-8;
const MIN_STEP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolutionKind {
    MountainPass,
    LocalMin,
}

#[derive(Debug, Clone, Default)]
pub struct SolveDiagnostics {
    /// Largest energy on the initial segment path (mountain pass only).
    pub initial_path_max: Option<f64>,
    /// Energy at the working iterate after every accepted step.
    pub energy_trace: Vec<f64>,
    /// `J(before) − J(after)` for every accepted step. Negative entries are
    /// the rounding steps below.
    pub step_drops: Vec<f64>,
    /// Sobolev-gradient norm at every iteration.
    pub grad_trace: Vec<f64>,
    /// Accepted steps whose energy rose, all within the rounding allowance.
    pub rounding_steps: usize,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub u: RadialFunction,
    pub energy: f64,
    pub grad_norm: f64,
    pub residual: f64,
    pub kind: SolutionKind,
    pub iterations: usize,
    pub spec_hash: String,
    pub diagnostics: SolveDiagnostics,
}

/// JSON sidecar written next to the `r,u` CSV of a solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub energy: f64,
    pub grad_norm: f64,
    pub residual: f64,
    pub kind: SolutionKind,
    pub iterations: usize,
    pub h1_norm: f64,
    pub min_u: f64,
    pub max_u: f64,
    pub spec_hash: String,
    pub spec: SpecSummary,
}

impl Solution {
    pub fn record(&self, spec: &ProblemSpec) -> SolutionRecord {
        SolutionRecord {
            energy: self.energy,
            grad_norm: self.grad_norm,
            residual: self.residual,
            kind: self.kind,
            iterations: self.iterations,
            h1_norm: h1_norm(&self.u),
            min_u: self.u.min_value(),
            max_u: self.u.max_value(),
            spec_hash: self.spec_hash.clone(),
            spec: spec.summary(),
        }
    }

    pub fn to_csv(&self) -> String {
        crate::grid::samples_to_csv("r,u", self.u.grid().nodes(), &[self.u.values()])
    }
}

/// Outcome of re-certifying a stored solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub spec_hash_matches: bool,
    pub grad_norm: f64,
    pub residual: f64,
    pub energy: f64,
    pub grad_tol: f64,
    pub residual_tol: f64,
    pub min_u: f64,
}

/// Recomputes gradient norm and residual of `u` and checks them against the
/// tolerances carried by `spec`.
pub fn verify_solution(spec: &ProblemSpec, u: &RadialFunction, record: &SolutionRecord) -> Result<VerifyReport> {
    let (_, grad_norm) = gradient_slice(spec, u.values())?;
    let residual = pde_residual(spec, u)?;
    let energy = energy_slice(spec, u.values())?;
    let residual_tol = spec.tol_residual(u);
    let spec_hash_matches = spec.hash() == record.spec_hash;
    let min_u = u.min_value();
    Ok(VerifyReport {
        passed: spec_hash_matches
            && grad_norm <= spec.tol.grad_tol
            && residual <= residual_tol
            && min_u >= NONNEG_TOL,
        spec_hash_matches,
        grad_norm,
        residual,
        energy,
        grad_tol: spec.tol.grad_tol,
        residual_tol,
        min_u,
    })
}

fn h1_norm_slice(grid: &RadialGrid, v: &[f64]) -> f64 {
    grid.h1_form(v, v).sqrt()
}

fn scaled(v: &[f64], t: f64) -> Vec<f64> {
    v.iter().map(|x| t * x).collect()
}

/// Certifies a converged iterate and packages it.
fn finish(
    spec: &ProblemSpec,
    values: Vec<f64>,
    grad_norm: f64,
    kind: SolutionKind,
    iterations: usize,
    diagnostics: SolveDiagnostics,
) -> Result<Solution> {
    let u = RadialFunction::with_dirichlet(spec.grid.clone(), values)?;
    let energy = energy_slice(spec, u.values())?;
    let residual = pde_residual(spec, &u)?;
    let tol_res = spec.tol_residual(&u);
    if residual > tol_res {
        return Err(Error::Inconclusive(format!(
            "strong residual {residual:.3e} exceeds {tol_res:.3e} although the gradient converged"
        )));
    }
    if kind == SolutionKind::MountainPass && !(energy > 0.0) {
        return Err(Error::Inconclusive(format!(
            "mountain-pass critical point has nonpositive energy {energy:.3e}"
        )));
    }
    let min_u = u.min_value();
    if min_u < NONNEG_TOL {
        return Err(Error::Inconclusive(format!("converged iterate is negative: min u = {min_u:.3e}")));
    }
    Ok(Solution {
        u,
        energy,
        grad_norm,
        residual,
        kind,
        iterations,
        spec_hash: spec.hash(),
        diagnostics,
    })
}

/// Root of `f` bracketed in `[a, b]` (`f(a)`, `f(b)` of opposite sign) by the
/// Illinois variant of regula falsi.
fn bracketed_root(
    mut f: impl FnMut(f64) -> Result<f64>,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
    mut fb: f64,
) -> Result<f64> {
    let mut side = 0i8;
    for _ in 0..200 {
        if fa == 0.0 {
            return Ok(a);
        }
        if fb == 0.0 {
            return Ok(b);
        }
        let c = (fa * b - fb * a) / (fa - fb);
        let c = if c.is_finite() && c > a.min(b) && c < a.max(b) { c } else { 0.5 * (a + b) };
        let fc = f(c)?;
        if (b - a).abs() <= 4.0 * f64::EPSILON * c.abs() {
            return Ok(c);
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
        if fc == 0.0 {
            return Ok(c);
        }
    }
    Ok(0.5 * (a + b))
}

/// Maximizes `t ↦ J(t·dir)` near the path node `t_mid` using the sign of the
/// directional derivative.
fn ray_maximum(spec: &ProblemSpec, dir: &[f64], t_lo: f64, t_mid: f64, t_hi: f64) -> Result<f64> {
    let slope = |t: f64| -> Result<f64> {
        let dual = dual_slice(spec, &scaled(dir, t))?;
        Ok(dual.iter().zip(dir).map(|(a, b)| a * b).sum())
    };
    let s_mid = slope(t_mid)?;
    if s_mid == 0.0 {
        return Ok(t_mid);
    }
    let (mut a, mut b, mut sa, mut sb) = if s_mid > 0.0 {
        (t_mid, t_hi, s_mid, slope(t_hi)?)
    } else {
        (t_lo, t_mid, slope(t_lo)?, s_mid)
    };
    // Widen the bracket if the sampled neighbour does not change sign.
    let mut widen = 0;
    while sa <= 0.0 || sb >= 0.0 {
        widen += 1;
        if widen > 60 {
            return Err(Error::Geometry("no interior maximum along the path".into()));
        }
        let width = b - a;
        if sa <= 0.0 {
            a = (a - width).max(0.0);
            sa = slope(a)?;
            if a == 0.0 && sa <= 0.0 {
                return Err(Error::Geometry("path maximum collapsed to the origin".into()));
            }
        }
        if sb >= 0.0 {
            b += width;
            sb = slope(b)?;
        }
    }
    bracketed_root(slope, a, b, sa, sb)
}

/// Numerical mountain-pass solution of `J_ε′(u) = 0`.
pub fn mountain_pass_solve(spec: &ProblemSpec) -> Result<Solution> {
    let probe = probe_geometry(spec, DEFAULT_N_DIRS)?;
    mountain_pass_from(spec, &probe)
}

/// Mountain-pass iteration started from the segment `0 → u₀` of a probe.
///
/// The path is a segment from the origin discretized into `path_points`
/// nodes. Each iteration takes the largest node, sharpens it to the exact
/// maximum along the segment, and displaces that point by an Armijo step
/// along the negative Sobolev gradient. The path is then re-interpolated as
/// the segment from the origin through the displaced point, extended until
/// the energy at its end is negative again.
pub fn mountain_pass_from(spec: &ProblemSpec, probe: &GeometryReport) -> Result<Solution> {
    if !probe.geometry_holds {
        return Err(Error::Geometry(
            probe.failure.clone().unwrap_or_else(|| "geometry probe failed".into()),
        ));
    }
    let grid = &spec.grid;
    let m = spec.tol.path_points - 1;
    let mut span = h1_norm(&probe.u0);
    let mut dir: Vec<f64> = scaled(probe.u0.values(), 1.0 / span);
    let mut diag = SolveDiagnostics::default();

    for iter in 0..spec.tol.max_iter {
        let ts: Vec<f64> = (0..=m).map(|j| span * j as f64 / m as f64).collect();
        let mut energies = Vec::with_capacity(ts.len());
        for &t in &ts {
            energies.push(energy_slice(spec, &scaled(&dir, t))?);
        }
        if diag.initial_path_max.is_none() {
            diag.initial_path_max = Some(energies.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        }
        let jmax = energies
            .iter()
            .enumerate()
            .fold(0, |best, (j, &e)| if e > energies[best] { j } else { best });
        if jmax == 0 || jmax == m {
            return Err(Error::Geometry(format!(
                "path collapse: maximum at endpoint {jmax} of {m}"
            )));
        }
        let t_star = ray_maximum(spec, &dir, ts[jmax - 1], ts[jmax], ts[jmax + 1])?;
        let w = scaled(&dir, t_star);
        let (g, gn) = gradient_slice(spec, &w)?;
        diag.grad_trace.push(gn);
        if gn <= spec.tol.grad_tol {
            return finish(spec, w, gn, SolutionKind::MountainPass, iter, diag);
        }

        let parts = energy_parts(spec, &w)?;
        let slack = 16.0 * f64::EPSILON * parts.scale;
        let mut tau = 1.0;
        let next = loop {
            let trial: Vec<f64> = w.iter().zip(&g).map(|(a, b)| a - tau * b).collect();
            let e_trial = energy_slice(spec, &trial)?;
            if e_trial <= parts.total - ARMIJO_C1 * tau * gn * gn + slack {
                if e_trial > parts.total {
                    diag.rounding_steps += 1;
                }
                diag.energy_trace.push(e_trial);
                diag.step_drops.push(parts.total - e_trial);
                break trial;
            }
            tau *= 0.5;
            if tau < MIN_STEP {
                return Err(Error::NonConvergence {
                    iterations: iter,
                    last: gn,
                    trace: diag.grad_trace,
                });
            }
        };

        let norm = h1_norm_slice(grid, &next);
        dir = scaled(&next, 1.0 / norm);
        // Keep the far end of the path below zero energy.
        span = span.max(1.5 * norm);
        let mut guard = 0;
        while energy_slice(spec, &scaled(&dir, span))? >= 0.0 {
            span *= 2.0;
            guard += 1;
            if guard > 60 {
                return Err(Error::Geometry("path end cannot reach negative energy".into()));
            }
        }
    }
    Err(Error::NonConvergence {
        iterations: spec.tol.max_iter,
        last: diag.grad_trace.last().copied().unwrap_or(f64::INFINITY),
        trace: diag.grad_trace,
    })
}

/// Projection onto the closed H¹ ball of radius `rho`.
fn project_ball(grid: &RadialGrid, v: Vec<f64>, rho: f64) -> (Vec<f64>, bool) {
    let n = h1_norm_slice(grid, &v);
    if n > rho {
        (scaled(&v, rho / n), true)
    } else {
        (v, false)
    }
}

/// Negative-energy local minimizer of `J_ε` in the ball `‖u‖ ≤ ρ_ε`.
///
/// Starts at `t·v`, `v` the unit Riesz direction of `k`, and runs projected
/// Sobolev-gradient descent with Armijo backtracking. A minimizer pinned to
/// the sphere is reported as inconclusive.
pub fn constrained_min_solve(spec: &ProblemSpec, rho_eps: f64) -> Result<Solution> {
    if !(spec.epsilon > 0.0) {
        return Err(Error::Precondition("constrained minimization needs epsilon > 0".into()));
    }
    if !(rho_eps > 0.0) || !rho_eps.is_finite() {
        return Err(invalid("rho_eps", format!("ball radius must be positive, got {rho_eps}")));
    }
    let grid = &spec.grid;
    let margin = 1e-3 * rho_eps;
    let v = riesz_direction(&spec.k);
    let nv = h1_norm(&v);
    if nv == 0.0 {
        return Err(Error::Precondition("perturbation k vanishes on the grid".into()));
    }
    let vhat = scaled(v.values(), 1.0 / nv);
    // ⟨k, v̂⟩ = ‖v‖, so the quadratic model t²/2 − εt‖v‖ is lowest at t = ε‖v‖.
    let mut t = (spec.epsilon * nv).min(0.5 * rho_eps);
    let mut u = scaled(&vhat, t);
    while energy_slice(spec, &u)? >= 0.0 {
        t *= 0.5;
        if t < 1e-300 {
            return Err(Error::Inconclusive("no negative energy along the Riesz direction".into()));
        }
        u = scaled(&vhat, t);
    }

    let mut diag = SolveDiagnostics::default();
    for iter in 0..spec.tol.max_iter {
        let (g, gn) = gradient_slice(spec, &u)?;
        diag.grad_trace.push(gn);
        let norm = h1_norm_slice(grid, &u);
        if gn <= spec.tol.grad_tol {
            if norm >= rho_eps - margin {
                return Err(Error::Inconclusive(format!(
                    "critical point on the constraint sphere (‖u‖ = {norm:.6e}, ρ = {rho_eps:.6e})"
                )));
            }
            let sol = finish(spec, u, gn, SolutionKind::LocalMin, iter, diag)?;
            if sol.energy >= 0.0 {
                return Err(Error::Inconclusive(format!(
                    "local minimizer has nonnegative energy {:.3e}",
                    sol.energy
                )));
            }
            return Ok(sol);
        }

        let parts = energy_parts(spec, &u)?;
        let slack = 16.0 * f64::EPSILON * parts.scale;
        let mut tau = 1.0;
        let (next, pinned) = loop {
            let raw: Vec<f64> = u.iter().zip(&g).map(|(a, b)| a - tau * b).collect();
            let (trial, projected) = project_ball(grid, raw, rho_eps);
            let step: Vec<f64> = u.iter().zip(&trial).map(|(a, b)| a - b).collect();
            let step_sq = grid.h1_form(&step, &step);
            let e_trial = energy_slice(spec, &trial)?;
            if e_trial <= parts.total - ARMIJO_C1 / tau * step_sq + slack {
                if e_trial > parts.total {
                    diag.rounding_steps += 1;
                }
                diag.energy_trace.push(e_trial);
                diag.step_drops.push(parts.total - e_trial);
                break (trial, projected && step_sq.sqrt() <= spec.tol.grad_tol);
            }
            tau *= 0.5;
            if tau < MIN_STEP {
                return Err(Error::NonConvergence {
                    iterations: iter,
                    last: gn,
                    trace: diag.grad_trace,
                });
            }
        };
        if pinned {
            return Err(Error::Inconclusive(
                "projected descent stalled on the constraint sphere".into(),
            ));
        }
        u = next;
    }
    Err(Error::NonConvergence {
        iterations: spec.tol.max_iter,
        last: diag.grad_trace.last().copied().unwrap_or(f64::INFINITY),
        trace: diag.grad_trace,
    })
}

#[derive(Debug, Clone)]
pub struct TwoSolutionReport {
    pub geometry: GeometryReport,
    pub mp: Option<Solution>,
    pub lm: Option<Solution>,
    /// `‖u_mp − u_lm‖_{H¹}`.
    pub separation: Option<f64>,
    pub distinct: Option<bool>,
    /// `(2 − σ)/6`.
    pub threshold: f64,
    pub below_threshold: Option<bool>,
    /// `c_ε > 0 > c₁` (or `c > 0` when ε = 0).
    pub sign_pattern: Option<bool>,
    pub nonnegative: bool,
    pub notes: Vec<String>,
}

#[derive(Serialize)]
struct SolutionSummary {
    energy: f64,
    grad_norm: f64,
    residual: f64,
    iterations: usize,
    h1_norm: f64,
    min_u: f64,
    max_u: f64,
}

impl SolutionSummary {
    fn of(s: &Solution) -> Self {
        Self {
            energy: s.energy,
            grad_norm: s.grad_norm,
            residual: s.residual,
            iterations: s.iterations,
            h1_norm: h1_norm(&s.u),
            min_u: s.u.min_value(),
            max_u: s.u.max_value(),
        }
    }
}

impl TwoSolutionReport {
    pub fn c_eps(&self) -> Option<f64> {
        self.mp.as_ref().map(|s| s.energy)
    }

    pub fn c1(&self) -> Option<f64> {
        self.lm.as_ref().map(|s| s.energy)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "geometry": self.geometry.to_json(),
            "mp": self.mp.as_ref().map(SolutionSummary::of),
            "lm": self.lm.as_ref().map(SolutionSummary::of),
            "c_eps": self.c_eps(),
            "c1": self.c1(),
            "separation": self.separation,
            "distinct": self.distinct,
            "threshold": self.threshold,
            "below_threshold": self.below_threshold,
            "sign_pattern": self.sign_pattern,
            "nonnegative": self.nonnegative,
            "notes": self.notes,
        })
    }
}

/// Probe, mountain pass, and (for ε > 0) constrained minimization, with the
/// multiplicity checks on the results.
pub fn two_solution_experiment(spec: &ProblemSpec) -> Result<TwoSolutionReport> {
    let geometry = probe_geometry(spec, DEFAULT_N_DIRS)?;
    let threshold = spec.model.energy_threshold();
    let mut report = TwoSolutionReport {
        geometry,
        mp: None,
        lm: None,
        separation: None,
        distinct: None,
        threshold,
        below_threshold: None,
        sign_pattern: None,
        nonnegative: true,
        notes: Vec::new(),
    };
    if !report.geometry.geometry_holds {
        report.notes.push(format!(
            "geometry_failed: {}",
            report.geometry.failure.clone().unwrap_or_default()
        ));
        return Ok(report);
    }
    let mp = mountain_pass_from(spec, &report.geometry)?;
    report.below_threshold = Some(mp.energy < threshold);
    report.nonnegative &= mp.u.min_value() >= NONNEG_TOL;

    if spec.epsilon > 0.0 {
        let lm = constrained_min_solve(spec, report.geometry.rho)?;
        let diff = mp.u.axpy(-1.0, &lm.u)?;
        let sep = h1_norm(&diff);
        report.separation = Some(sep);
        report.distinct = Some(sep > 10.0 * spec.tol.grad_tol);
        report.sign_pattern = Some(mp.energy > 0.0 && lm.energy < 0.0);
        report.nonnegative &= lm.u.min_value() >= NONNEG_TOL;
        if report.distinct == Some(false) {
            report.notes.push("solutions are not distinct; both iterates kept for inspection".into());
        }
        report.lm = Some(lm);
    } else {
        report.sign_pattern = Some(mp.energy > 0.0);
        report
            .notes
            .push("epsilon = 0: single mountain-pass solution, local-min stage skipped".into());
    }
    if report.below_threshold == Some(false) {
        report.notes.push(format!(
            "mountain-pass level {:.6e} is not below (2-sigma)/6 = {threshold:.6e}",
            mp.energy
        ));
    }
    report.mp = Some(mp);
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub epsilon: f64,
    pub c_eps: Option<f64>,
    pub c1: Option<f64>,
    pub geometry_holds: bool,
    pub mp_converged: bool,
    pub lm_converged: bool,
    /// `(2 − σ)/6 − c_ε`.
    pub threshold_margin: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        fn opt(v: Option<f64>) -> String {
            v.map(|x| format!("{x:.17e}")).unwrap_or_default()
        }
        let mut out = String::from(
            "lambda,epsilon,c_eps,c1,geometry_holds,mp_converged,lm_converged,threshold_margin,error\n",
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{:.17e},{:.17e},{},{},{},{},{},{},{}\n",
                r.lambda,
                r.epsilon,
                opt(r.c_eps),
                opt(r.c1),
                r.geometry_holds,
                r.mp_converged,
                r.lm_converged,
                opt(r.threshold_margin),
                r.error.as_deref().unwrap_or("").replace([',', '\n'], ";"),
            ));
        }
        out
    }
}

fn sweep_cell(base: &ProblemSpec, lambda: f64, epsilon: f64) -> SweepRow {
    let mut row = SweepRow {
        lambda,
        epsilon,
        c_eps: None,
        c1: None,
        geometry_holds: false,
        mp_converged: false,
        lm_converged: false,
        threshold_margin: None,
        error: None,
    };
    let result = base
        .with_lambda_epsilon(lambda, epsilon)
        .and_then(|spec| two_solution_experiment(&spec));
    match result {
        Ok(rep) => {
            row.geometry_holds = rep.geometry.geometry_holds;
            row.c_eps = rep.c_eps();
            row.c1 = rep.c1();
            row.mp_converged = rep.mp.is_some();
            row.lm_converged = rep.lm.is_some();
            row.threshold_margin = rep.c_eps().map(|c| rep.threshold - c);
            if !rep.geometry.geometry_holds {
                row.error = rep.geometry.failure.clone();
            }
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// Runs [`two_solution_experiment`] on every `(λ, ε)` pair. Rows come back in
/// `λ`-major order regardless of scheduling; failures are recorded per row.
pub fn parameter_sweep(
    base: &ProblemSpec,
    lambdas: &[f64],
    epsilons: &[f64],
    workers: Option<usize>,
) -> Result<SweepTable> {
    if lambdas.is_empty() || epsilons.is_empty() {
        return Err(invalid("sweep", "lambda and epsilon lists must be nonempty"));
    }
    let cells: Vec<(f64, f64)> = lambdas
        .iter()
        .flat_map(|&l| epsilons.iter().map(move |&e| (l, e)))
        .collect();
    let run = || -> Vec<SweepRow> {
        cells
            .par_iter()
            .map(|&(l, e)| sweep_cell(base, l, e))
            .collect()
    };
    let rows = match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| invalid("workers", e.to_string()))?
            .install(run),
        None => run(),
    };
    Ok(SweepTable { rows })
}

/// `‖u − v‖_{H¹}` for two profiles on one grid.
pub fn h1_distance(u: &RadialFunction, v: &RadialFunction) -> Result<f64> {
    let d = u.axpy(-1.0, v)?;
    Ok(inner_h1(&d, &d)?.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn illinois_finds_simple_root() {
        let r = bracketed_root(|x| Ok(x * x - 2.0), 0.0, 2.0, -2.0, 2.0).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn sweep_rejects_empty_lists() {
        let grid = crate::grid::make_grid(20.0, 64, 0.01).unwrap();
        let model = crate::nonlinearity::NonlinearityModel::power(8.0, 100.0, 0.0).unwrap();
        let spec = ProblemSpec::new(
            0.01,
            0.0,
            ProblemSpec::default_k(&grid),
            model,
            Default::default(),
        )
        .unwrap();
        assert!(parameter_sweep(&spec, &[], &[0.0], None).is_err());
    }

    #[test]
    fn local_min_needs_perturbation() {
        let grid = crate::grid::make_grid(20.0, 64, 0.01).unwrap();
        let model = crate::nonlinearity::NonlinearityModel::power(8.0, 100.0, 0.0).unwrap();
        let spec = ProblemSpec::new(
            0.01,
            0.0,
            ProblemSpec::default_k(&grid),
            model,
            Default::default(),
        )
        .unwrap();
        assert!(matches!(
            constrained_min_solve(&spec, 0.1),
            Err(Error::Precondition(_))
        ));
    }
}
