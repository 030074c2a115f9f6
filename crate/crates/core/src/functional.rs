//! The energy functional
//!
//! `J_ε(u) = ½‖u‖²_{H¹} + (λ/2) c(u) − ∫ F(u) dx − ε ∫ k u dx`
//!
//! on a radial grid, its derivative, H¹-Sobolev gradient, the strong-form
//! residual of the Euler–Lagrange equation, and numerical probes of the
//! mountain-pass geometry. `ε = 0` gives the unperturbed functional.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::chern_simons::gauge_parts;
use crate::error::{invalid, Result};
use crate::grid::{check_same, h1_norm, GridParams, RadialFunction, RadialGrid};
use crate::nonlinearity::NonlinearityModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub grad_tol: f64,
    pub max_iter: usize,
    pub path_points: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            grad_tol: 1e-8,
            max_iter: 100_000,
            path_points: 40,
        }
    }
}

/// A full problem instance on a fixed grid.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub lambda: f64,
    pub epsilon: f64,
    pub k: RadialFunction,
    pub model: NonlinearityModel,
    pub grid: Arc<RadialGrid>,
    pub tol: Tolerances,
}

/// Parameters that identify a [`ProblemSpec`], used for provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecSummary {
    pub lambda: f64,
    pub epsilon: f64,
    pub model: NonlinearityModel,
    pub grid: GridParams,
    pub tol: Tolerances,
    pub k_sha256: String,
}

impl ProblemSpec {
    /// `λ = 0` is accepted here as the decoupled limit; front ends that
    /// model the physical problem require `λ > 0`.
    pub fn new(
        lambda: f64,
        epsilon: f64,
        k: RadialFunction,
        model: NonlinearityModel,
        tol: Tolerances,
    ) -> Result<Self> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(invalid("lambda", format!("must be nonnegative, got {lambda}")));
        }
        if !(epsilon >= 0.0) || !epsilon.is_finite() {
            return Err(invalid("epsilon", format!("must be nonnegative, got {epsilon}")));
        }
        if let Some(i) = k.values().iter().position(|&v| v < 0.0) {
            return Err(invalid("k", format!("perturbation negative at node {i}")));
        }
        if !(tol.grad_tol > 0.0) {
            return Err(invalid("grad_tol", "must be positive"));
        }
        if tol.path_points < 3 {
            return Err(invalid("path_points", "need at least 3 path nodes"));
        }
        model.check()?;
        let grid = k.grid().clone();
        Ok(Self {
            lambda,
            epsilon,
            k,
            model,
            grid,
            tol,
        })
    }

    /// Default perturbation `k(r) = e^{-r²}`.
    pub fn default_k(grid: &Arc<RadialGrid>) -> RadialFunction {
        RadialFunction::from_fn(grid.clone(), |r| (-r * r).exp()).expect("finite profile")
    }

    pub fn with_lambda_epsilon(&self, lambda: f64, epsilon: f64) -> Result<Self> {
        Self::new(lambda, epsilon, self.k.clone(), self.model, self.tol)
    }

    pub fn summary(&self) -> SpecSummary {
        let mut hasher = Sha256::new();
        for v in self.k.values() {
            hasher.update(v.to_le_bytes());
        }
        SpecSummary {
            lambda: self.lambda,
            epsilon: self.epsilon,
            model: self.model,
            grid: self.grid.params(),
            tol: self.tol,
            k_sha256: hex::encode(hasher.finalize()),
        }
    }

    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(&self.summary()).expect("summary serializes");
        hex::encode(Sha256::digest(&json))
    }

    /// Strong-form residual tolerance at this resolution.
    pub fn tol_residual(&self, u: &RadialFunction) -> f64 {
        1e-4 * (1.0 + u.max_abs())
    }

    fn check_grid(&self, u: &RadialFunction) -> Result<()> {
        check_same(u, &self.k)
    }
}

/// Magnitudes of the individual energy terms, for rounding estimates.
pub(crate) struct EnergyParts {
    pub total: f64,
    pub scale: f64,
}

pub(crate) fn energy_parts(spec: &ProblemSpec, u: &[f64]) -> Result<EnergyParts> {
    let grid = &spec.grid;
    let quad = 0.5 * grid.h1_form(u, u);
    let cs = if spec.lambda != 0.0 {
        0.5 * spec.lambda * 2.0 * PI * gauge_parts(grid, u).c_sum
    } else {
        0.0
    };
    let mut prim = 0.0;
    let mut lin = 0.0;
    for ((w, &v), kv) in grid.weights().iter().zip(u).zip(spec.k.values()) {
        prim += w * spec.model.big_f(v)?;
        lin += w * kv * v;
    }
    prim *= 2.0 * PI;
    lin *= 2.0 * PI * spec.epsilon;
    Ok(EnergyParts {
        total: quad + cs - prim - lin,
        scale: quad.abs() + cs.abs() + prim.abs() + lin.abs(),
    })
}

pub(crate) fn energy_slice(spec: &ProblemSpec, u: &[f64]) -> Result<f64> {
    energy_parts(spec, u).map(|p| p.total)
}

/// Partial derivatives `∂J/∂u_i` of the discrete energy.
pub(crate) fn dual_slice(spec: &ProblemSpec, u: &[f64]) -> Result<Vec<f64>> {
    let grid = &spec.grid;
    let mut dual = grid.apply_gram(u);
    let r = grid.nodes();
    let w = grid.weights();
    let gauge = (spec.lambda != 0.0).then(|| gauge_parts(grid, u));
    for i in 0..grid.len() {
        let mut nl = spec.model.f(u[i])? + spec.epsilon * spec.k.values()[i];
        if let Some(g) = &gauge {
            let hr = g.h[i] / r[i];
            nl -= spec.lambda * (g.b[i] + hr * hr) * u[i];
        }
        dual[i] -= 2.0 * PI * w[i] * nl;
    }
    Ok(dual)
}

pub fn energy(spec: &ProblemSpec, u: &RadialFunction) -> Result<f64> {
    spec.check_grid(u)?;
    energy_slice(spec, u.values())
}

/// `J′(u)φ`.
pub fn derivative(spec: &ProblemSpec, u: &RadialFunction, phi: &RadialFunction) -> Result<f64> {
    spec.check_grid(u)?;
    spec.check_grid(phi)?;
    let dual = dual_slice(spec, u.values())?;
    Ok(dual.iter().zip(phi.values()).map(|(a, b)| a * b).sum())
}

/// H¹ Riesz representative `g` of `J′(u)`: `⟨g, φ⟩_{H¹} = J′(u)φ` for all
/// grid functions vanishing at `R`.
pub fn sobolev_gradient(spec: &ProblemSpec, u: &RadialFunction) -> Result<RadialFunction> {
    spec.check_grid(u)?;
    let dual = dual_slice(spec, u.values())?;
    let g = spec.grid.solve_gram(&dual);
    RadialFunction::new(spec.grid.clone(), g)
}

/// Sobolev gradient and its H¹ norm from raw samples.
pub(crate) fn gradient_slice(spec: &ProblemSpec, u: &[f64]) -> Result<(Vec<f64>, f64)> {
    let mut dual = dual_slice(spec, u)?;
    *dual.last_mut().expect("nonempty") = 0.0;
    let g = spec.grid.solve_gram(&dual);
    let norm_sq: f64 = dual.iter().zip(&g).map(|(a, b)| a * b).sum();
    Ok((g, norm_sq.max(0.0).sqrt()))
}

/// Largest interior violation of
/// `−u″ − u′/r + u + λ(B + h²/r²)u − f(u) − εk = 0`, with nodal centered
/// differences for the radial Laplacian.
pub fn pde_residual(spec: &ProblemSpec, u: &RadialFunction) -> Result<f64> {
    spec.check_grid(u)?;
    let grid = &spec.grid;
    let v = u.values();
    let r = grid.nodes();
    let d = grid.spacing();
    let gauge = gauge_parts(grid, v);
    let mut worst = 0.0_f64;
    for i in 1..grid.len() - 1 {
        let upp = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (d * d);
        let up = (v[i + 1] - v[i - 1]) / (2.0 * d);
        let hr = gauge.h[i] / r[i];
        let res = -upp - up / r[i] + v[i] + spec.lambda * (gauge.b[i] + hr * hr) * v[i]
            - spec.model.f(v[i])?
            - spec.epsilon * spec.k.values()[i];
        worst = worst.max(res.abs());
    }
    Ok(worst)
}

/// Weak solution of `−Δv + v = k` on the grid (the Riesz representative of
/// `φ ↦ ∫ k φ dx`).
pub fn riesz_direction(k: &RadialFunction) -> RadialFunction {
    let grid = k.grid();
    let dual: Vec<f64> = grid
        .weights()
        .iter()
        .zip(k.values())
        .map(|(w, kv)| 2.0 * PI * w * kv)
        .collect();
    RadialFunction::with_dirichlet(grid.clone(), grid.solve_gram(&dual)).expect("finite")
}

pub const DEFAULT_N_DIRS: usize = 16;
const RHO_SCAN_POINTS: usize = 60;
const RHO_SCAN_MIN: f64 = 1e-3;
const RHO_SCAN_MAX: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub rho: f64,
    #[serde(rename = "infJ")]
    pub inf_j: f64,
}

#[derive(Debug, Clone)]
pub struct GeometryReport {
    pub geometry_holds: bool,
    pub failure: Option<String>,
    /// Smallest scanned radius with a positive sphere infimum.
    pub rho: f64,
    /// Sphere infimum estimate at `rho`.
    pub d: f64,
    /// Largest sphere infimum over the scan, and where it occurs.
    pub d_max: f64,
    pub rho_at_d_max: f64,
    pub t0: f64,
    pub u0: RadialFunction,
    pub energy_u0: f64,
    /// Along the Riesz direction of `k`: `J(tv) < 0` for `0 < t < θ`.
    pub theta: Option<f64>,
    pub sampled_directions: usize,
    pub scan: Vec<ScanPoint>,
}

#[derive(Serialize)]
struct GeometryJson<'a> {
    geometry_holds: bool,
    failure: &'a Option<String>,
    rho: f64,
    d: f64,
    d_max: f64,
    rho_at_d_max: f64,
    t0: f64,
    u0_norm: f64,
    energy_u0: f64,
    theta: Option<f64>,
    sampled_directions: usize,
}

impl GeometryReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(GeometryJson {
            geometry_holds: self.geometry_holds,
            failure: &self.failure,
            rho: self.rho,
            d: self.d,
            d_max: self.d_max,
            rho_at_d_max: self.rho_at_d_max,
            t0: self.t0,
            u0_norm: h1_norm(&self.u0),
            energy_u0: self.energy_u0,
            theta: self.theta,
            sampled_directions: self.sampled_directions,
        })
        .expect("report serializes")
    }

    pub fn scan_csv(&self) -> String {
        let mut out = String::from("rho,infJ\n");
        for p in &self.scan {
            out.push_str(&format!("{:.17e},{:.17e}\n", p.rho, p.inf_j));
        }
        out
    }

    /// Least-squares slope of `log d(ρ)` against `log ρ` over `ρ ≤ rho_max`.
    pub fn leading_exponent(&self, rho_max: f64) -> Option<f64> {
        leading_exponent(&self.scan, rho_max)
    }
}

pub fn leading_exponent(scan: &[ScanPoint], rho_max: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = scan
        .iter()
        .filter(|p| p.rho <= rho_max && p.inf_j > 0.0)
        .map(|p| (p.rho.ln(), p.inf_j.ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Some(sxy / sxx)
}

/// Unit-H¹ Gaussian `e^{−r²/(2w²)}`.
pub fn unit_gaussian(grid: &Arc<RadialGrid>, width: f64) -> RadialFunction {
    let g = RadialFunction::from_fn(grid.clone(), |r| (-0.5 * r * r / (width * width)).exp())
        .expect("finite");
    let n = h1_norm(&g);
    g.scaled(1.0 / n)
}

/// Probe directions: Gaussians with log-spaced widths in `[1/4, 4]` plus the
/// unit Riesz direction of `k`.
pub fn probe_directions(spec: &ProblemSpec, n_dirs: usize) -> Vec<RadialFunction> {
    let n_gauss = n_dirs - 1;
    let mut dirs: Vec<RadialFunction> = (0..n_gauss)
        .map(|i| {
            let t = i as f64 / (n_gauss - 1) as f64;
            let width = 0.25 * 16f64.powf(t);
            unit_gaussian(&spec.grid, width)
        })
        .collect();
    let v = riesz_direction(&spec.k);
    let nv = h1_norm(&v);
    if nv > 0.0 {
        dirs.push(v.scaled(1.0 / nv));
    } else {
        dirs.push(unit_gaussian(&spec.grid, 1.0));
    }
    dirs
}

/// Numerical check of the mountain-pass geometry.
///
/// Scans `ρ` on a log grid over `[1e-3, 1]`, taking the minimum of
/// `J(ρ·e)` over the probe directions. The reported `ρ` is the smallest
/// scanned radius where that minimum is positive. The negative endpoint is
/// `u₀ = t₀·e₀` with `e₀` the unit Gaussian of width 1 and `t₀` found by
/// doubling; `t₀ e₀` must stay within the validated amplitude range.
pub fn probe_geometry(spec: &ProblemSpec, n_dirs: usize) -> Result<GeometryReport> {
    probe_geometry_seeded(spec, n_dirs, 0, 0)
}

/// Smooth nonnegative unit directions: sums of three Gaussian bumps with
/// centres, widths and amplitudes drawn from a seeded generator.
pub fn random_directions(grid: &Arc<RadialGrid>, count: usize, seed: u64) -> Vec<RadialFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let bumps: Vec<(f64, f64, f64)> = (0..3)
                .map(|_| (rng.gen_range(0.1..1.0), rng.gen_range(0.0..3.0), rng.gen_range(0.25..4.0)))
                .collect();
            let u = RadialFunction::from_fn(grid.clone(), |r| {
                bumps.iter().map(|(a, c, w)| a * (-((r - c) / w).powi(2)).exp()).sum()
            })
            .expect("finite");
            let n = h1_norm(&u);
            u.scaled(1.0 / n)
        })
        .collect()
}

/// [`probe_geometry`] with `random_dirs` extra directions from
/// [`random_directions`] seeded by `seed`.
pub fn probe_geometry_seeded(
    spec: &ProblemSpec,
    n_dirs: usize,
    random_dirs: usize,
    seed: u64,
) -> Result<GeometryReport> {
    if n_dirs < 8 {
        return Err(invalid("n_dirs", format!("need at least 8 directions, got {n_dirs}")));
    }
    let mut dirs = random_directions(&spec.grid, random_dirs, seed);
    // The Riesz direction stays last; it seeds the negative window below.
    dirs.extend(probe_directions(spec, n_dirs));
    let mut scan = Vec::with_capacity(RHO_SCAN_POINTS);
    let (lo, hi) = (RHO_SCAN_MIN.ln(), RHO_SCAN_MAX.ln());
    for j in 0..RHO_SCAN_POINTS {
        let rho = (lo + (hi - lo) * j as f64 / (RHO_SCAN_POINTS - 1) as f64).exp();
        let mut inf_j = f64::INFINITY;
        for e in &dirs {
            let val = energy(spec, &e.scaled(rho))?;
            inf_j = inf_j.min(val);
        }
        scan.push(ScanPoint { rho, inf_j });
    }

    let first_positive = scan.iter().find(|p| p.inf_j > 0.0).copied();
    let best = scan
        .iter()
        .copied()
        .fold(ScanPoint { rho: 0.0, inf_j: f64::NEG_INFINITY }, |a, b| {
            if b.inf_j > a.inf_j {
                b
            } else {
                a
            }
        });

    let riesz = dirs.last().expect("at least one direction").clone();
    let theta = if spec.epsilon > 0.0 {
        negative_window(spec, &riesz)?
    } else {
        None
    };

    let e0 = unit_gaussian(&spec.grid, 1.0);
    let mut failure = None;
    let (rho, d) = match first_positive {
        Some(p) => (p.rho, p.inf_j),
        None => {
            failure = Some("no scanned radius has a positive sphere infimum".to_string());
            (f64::NAN, best.inf_j)
        }
    };

    // Negative endpoint: double t until J(t e₀) < 0.
    let amp_limit = crate::nonlinearity::DEFAULT_S_MAX;
    let e0_max = e0.max_abs();
    let mut t = rho.max(1e-3).max(0.5);
    let mut u0 = e0.scaled(t);
    let mut energy_u0 = energy(spec, &u0)?;
    while energy_u0 >= 0.0 || (rho.is_finite() && t <= rho) {
        t *= 2.0;
        if t * e0_max > amp_limit {
            failure.get_or_insert_with(|| {
                format!("no negative-energy endpoint with amplitude below {amp_limit}")
            });
            break;
        }
        u0 = e0.scaled(t);
        energy_u0 = energy(spec, &u0)?;
    }

    Ok(GeometryReport {
        geometry_holds: failure.is_none(),
        failure,
        rho,
        d,
        d_max: best.inf_j,
        rho_at_d_max: best.rho,
        t0: t,
        u0,
        energy_u0,
        theta,
        sampled_directions: dirs.len(),
        scan,
    })
}

/// First positive root `θ` of `t ↦ J(t v)` for a unit direction `v` along
/// which the energy initially decreases.
fn negative_window(spec: &ProblemSpec, v: &RadialFunction) -> Result<Option<f64>> {
    let phi = |t: f64| energy(spec, &v.scaled(t));
    let mut a = 1e-8;
    if phi(a)? >= 0.0 {
        return Ok(None);
    }
    let mut b = a;
    loop {
        b *= 1.25;
        if b > 10.0 {
            return Ok(None);
        }
        if phi(b)? >= 0.0 {
            break;
        }
        a = b;
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if phi(m)? < 0.0 {
            a = m;
        } else {
            b = m;
        }
        if b - a <= 1e-14 * b {
            break;
        }
    }
    Ok(Some(a))
}
