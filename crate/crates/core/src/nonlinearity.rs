//! Nonlinearities `f(s)` with critical exponential growth, their primitives,
//! the admissibility checks (f₁)–(f₄), and the embedding constant `S_p`.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{h1_norm_sq, RadialFunction, RadialGrid};

/// Critical Trudinger–Moser exponent in the plane.
pub const ALPHA0: f64 = 4.0 * PI;

/// Largest admissible `4π s²` for the exponential kind.
pub const EXP_ARG_LIMIT: f64 = 700.0;

/// Default upper end of the validation sample.
pub const DEFAULT_S_MAX: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NonlinearityKind {
    /// `f(s) = C_p s^{p-1}`.
    Power,
    /// `f(s) = C_p s^{p-1} + κ s^{p-1} (e^{4πs²} − 1)`.
    ExpCritical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonlinearityModel {
    pub kind: NonlinearityKind,
    pub p: f64,
    #[serde(rename = "C_p")]
    pub c_p: f64,
    pub sigma: f64,
    pub kappa: f64,
}

impl NonlinearityModel {
    /// Checks the structural constraints. `C_p = 0` is accepted as the
    /// "nonlinearity off" sentinel; the quantitative (f₄) bound is checked by
    /// [`validate_model`].
    pub fn new(kind: NonlinearityKind, p: f64, c_p: f64, sigma: f64, kappa: f64) -> Result<Self> {
        let model = Self {
            kind,
            p,
            c_p,
            sigma,
            kappa,
        };
        model.check()?;
        Ok(model)
    }

    pub fn power(p: f64, c_p: f64, sigma: f64) -> Result<Self> {
        Self::new(NonlinearityKind::Power, p, c_p, sigma, 0.0)
    }

    pub fn exp_critical(p: f64, c_p: f64, sigma: f64, kappa: f64) -> Result<Self> {
        Self::new(NonlinearityKind::ExpCritical, p, c_p, sigma, kappa)
    }

    pub fn check(&self) -> Result<()> {
        if !(self.p > 6.0) || !self.p.is_finite() {
            return Err(invalid("p", format!("p must exceed 6, got {}", self.p)));
        }
        if !(self.c_p >= 0.0) || !self.c_p.is_finite() {
            return Err(invalid("C_p", format!("C_p must be nonnegative, got {}", self.c_p)));
        }
        if !(0.0..2.0).contains(&self.sigma) {
            return Err(invalid("sigma", format!("sigma must lie in [0, 2), got {}", self.sigma)));
        }
        if !(self.kappa >= 0.0) || !self.kappa.is_finite() {
            return Err(invalid("kappa", format!("kappa must be nonnegative, got {}", self.kappa)));
        }
        Ok(())
    }

    fn guard(&self, s: f64) -> Result<()> {
        if self.kind == NonlinearityKind::ExpCritical && ALPHA0 * s * s > EXP_ARG_LIMIT {
            return Err(Error::Range {
                value: s,
                reason: format!("4πs² exceeds {EXP_ARG_LIMIT}"),
            });
        }
        Ok(())
    }

    /// `f(s)`; zero for `s ≤ 0`.
    pub fn f(&self, s: f64) -> Result<f64> {
        if s <= 0.0 {
            return Ok(0.0);
        }
        self.guard(s)?;
        let base = s.powf(self.p - 1.0);
        let v = match self.kind {
            NonlinearityKind::Power => self.c_p * base,
            NonlinearityKind::ExpCritical => {
                self.c_p * base + self.kappa * base * (ALPHA0 * s * s).exp_m1()
            }
        };
        finite_or_range(v, s)
    }

    /// Primitive `F(s) = ∫₀^s f`. The exponential part is summed from its
    /// everywhere-convergent series `Σ_{n≥1} (4π)^n s^{p+2n} / (n! (p+2n))`,
    /// whose terms are all positive.
    pub fn big_f(&self, s: f64) -> Result<f64> {
        if s <= 0.0 {
            return Ok(0.0);
        }
        self.guard(s)?;
        let sp = s.powf(self.p);
        let mut v = self.c_p * sp / self.p;
        if self.kind == NonlinearityKind::ExpCritical && self.kappa > 0.0 {
            let x = ALPHA0 * s * s;
            let mut a = 1.0;
            let mut sum = 0.0;
            let mut n = 1.0_f64;
            loop {
                a *= x / n;
                let term = a / (self.p + 2.0 * n);
                sum += term;
                if n > x && term <= 1e-17 * sum {
                    break;
                }
                n += 1.0;
            }
            v += self.kappa * sp * sum;
        }
        finite_or_range(v, s)
    }

    /// `[6(p−2)/(p(2−σ))]^{(p−2)/2} S_p^p`, the lower bound on `C_p` in (f₄).
    pub fn required_cp(&self, sp: f64) -> f64 {
        cp_bound(self.p, self.sigma, sp)
    }

    /// Energy ceiling `(2 − σ)/6` for the mountain-pass level.
    pub fn energy_threshold(&self) -> f64 {
        (2.0 - self.sigma) / 6.0
    }
}

fn finite_or_range(v: f64, s: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Range {
            value: s,
            reason: "nonlinearity overflows f64".into(),
        })
    }
}

/// Lower bound on `C_p` from (f₄).
pub fn cp_bound(p: f64, sigma: f64, sp: f64) -> f64 {
    (6.0 * (p - 2.0) / (p * (2.0 - sigma))).powf(0.5 * (p - 2.0)) * sp.powf(p)
}

pub fn f_eval(model: &NonlinearityModel, s: f64) -> Result<f64> {
    model.f(s)
}

#[allow(non_snake_case)]
pub fn F_eval(model: &NonlinearityModel, s: f64) -> Result<f64> {
    model.big_f(s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisCheck {
    pub name: String,
    pub passed: bool,
    /// Sample point where the check was tightest.
    pub witness_s: f64,
    /// Quantity measured at the witness (meaning depends on the check).
    pub value: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub s_max: f64,
    pub sp: f64,
    pub required_cp: f64,
    pub inferred_c_f1: f64,
    pub hypotheses: Vec<HypothesisCheck>,
}

impl ValidationReport {
    pub fn get(&self, name: &str) -> Option<&HypothesisCheck> {
        self.hypotheses.iter().find(|h| h.name == name)
    }
}

/// Log-spaced validation sample on `[1e-6, s_max]`.
pub fn validation_samples(s_max: f64, count: usize) -> Vec<f64> {
    let (lo, hi) = (1e-6_f64.ln(), s_max.ln());
    (0..count)
        .map(|i| (lo + (hi - lo) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

pub fn validate_model(model: &NonlinearityModel, sp: &SpResult) -> ValidationReport {
    validate_model_with(model, sp.value, DEFAULT_S_MAX)
}

/// Checks (f₁)–(f₄) on a log-spaced sample of `[1e-6, s_max]`. Failures are
/// report entries; nothing here returns an error.
pub fn validate_model_with(model: &NonlinearityModel, sp: f64, s_max: f64) -> ValidationReport {
    let samples = validation_samples(s_max, 601);
    let eval: Vec<Option<(f64, f64)>> = samples
        .iter()
        .map(|&s| match (model.f(s), model.big_f(s)) {
            (Ok(f), Ok(big)) => Some((f, big)),
            _ => None,
        })
        .collect();
    let in_range = eval.iter().all(Option::is_some);
    let mut hyps = Vec::with_capacity(4);

    // (f1): f(s) ≤ C e^{4πs²}; C is inferred as the sup of the ratio.
    let (mut c1, mut c1_at) = (0.0_f64, samples[0]);
    for (s, e) in samples.iter().zip(&eval) {
        if let Some((f, _)) = e {
            let ratio = f * (-ALPHA0 * s * s).exp();
            if ratio > c1 {
                c1 = ratio;
                c1_at = *s;
            }
        }
    }
    hyps.push(HypothesisCheck {
        name: "f1".into(),
        passed: in_range && c1.is_finite(),
        witness_s: c1_at,
        value: c1,
        detail: format!("sup f(s) e^(-4πs²) = {c1:.6e} on [1e-6, {s_max}]"),
    });

    // (f2): f(s)/s → 0. Ratio must shrink toward the origin and be negligible
    // at the smallest sample.
    let decade: Vec<(f64, f64)> = samples
        .iter()
        .zip(&eval)
        .take_while(|(s, _)| **s <= 1e-5)
        .filter_map(|(s, e)| e.map(|(f, _)| (*s, f / s)))
        .collect();
    let monotone = decade.windows(2).all(|w| w[0].1 <= w[1].1);
    let scale = model.f(1.0).unwrap_or(1.0).max(1.0);
    let smallest = decade.first().map(|x| x.1).unwrap_or(f64::INFINITY);
    hyps.push(HypothesisCheck {
        name: "f2".into(),
        passed: monotone && smallest <= 1e-8 * scale,
        witness_s: samples[0],
        value: smallest,
        detail: format!("f(s)/s = {smallest:.3e} at s = 1e-6"),
    });

    // (f3): s f − 6F ≥ −σ s².
    let (mut worst, mut worst_at, mut ok3) = (f64::INFINITY, samples[0], in_range);
    for (s, e) in samples.iter().zip(&eval) {
        if let Some((f, big)) = e {
            let margin = s * f - 6.0 * big + model.sigma * s * s;
            let slack = 1e-12 * (s * f + 6.0 * big);
            if margin < -slack {
                ok3 = false;
            }
            let rel = margin / (s * s);
            if rel < worst {
                worst = rel;
                worst_at = *s;
            }
        }
    }
    hyps.push(HypothesisCheck {
        name: "f3".into(),
        passed: ok3,
        witness_s: worst_at,
        value: worst,
        detail: format!("min (s f − 6F + σ s²)/s² = {worst:.6e}"),
    });

    // (f4): f ≥ C_p s^{p−1} and C_p above the S_p bound.
    let required = model.required_cp(sp);
    let mut ok4 = in_range && model.c_p > required;
    let mut pw_at = samples[0];
    for (s, e) in samples.iter().zip(&eval) {
        if let Some((f, _)) = e {
            let lower = model.c_p * s.powf(model.p - 1.0);
            if *f < lower * (1.0 - 1e-14) {
                ok4 = false;
                pw_at = *s;
            }
        }
    }
    hyps.push(HypothesisCheck {
        name: "f4".into(),
        passed: ok4,
        witness_s: pw_at,
        value: model.c_p / required,
        detail: format!("C_p = {:.6e}, required > {required:.6e}", model.c_p),
    });

    ValidationReport {
        passed: hyps.iter().all(|h| h.passed),
        s_max,
        sp,
        required_cp: required,
        inferred_c_f1: c1,
        hypotheses: hyps,
    }
}

/// Best constant of the radial embedding `H¹ ↪ L^p` on a grid, with the
/// minimizer normalized to unit H¹ norm.
#[derive(Debug, Clone)]
pub struct SpResult {
    pub value: f64,
    pub minimizer: RadialFunction,
    pub rayleigh_history: Vec<f64>,
    pub grad_norm: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct SpOptions {
    pub max_iter: usize,
    pub window: usize,
    pub rel_change: f64,
    pub grad_tol: f64,
}

impl Default for SpOptions {
    fn default() -> Self {
        Self {
            max_iter: 50_000,
            window: 50,
            rel_change: 1e-10,
            grad_tol: 1e-9,
        }
    }
}

#[allow(non_snake_case)]
pub fn compute_Sp(p: f64, grid: &Arc<RadialGrid>) -> Result<SpResult> {
    compute_sp_with(p, grid, SpOptions::default())
}

/// Minimizes `‖u‖_{H¹} / ‖u‖_{L^p}` by normalized Sobolev-gradient descent.
///
/// On the unit sphere the negative Sobolev gradient of `log Q` is
/// `z/P − u`, with `P = ∫|u|^p` and `z` the H¹ Riesz representative of
/// `|u|^{p−2}u`. Steps `u + τ(z/P − u)` are accepted when the quotient
/// decreases, halving `τ` from 1 otherwise.
pub fn compute_sp_with(p: f64, grid: &Arc<RadialGrid>, opts: SpOptions) -> Result<SpResult> {
    if !(p > 2.0) {
        return Err(invalid("p", format!("S_p needs p > 2, got {p}")));
    }
    let seed = RadialFunction::from_fn(grid.clone(), |r| (-0.5 * r * r).exp())?;
    let mut u = normalize(seed.values().to_vec(), grid);
    let mut q = quotient(&u, grid, p);
    let mut history = vec![q];
    let mut grad_norm = f64::INFINITY;

    for _ in 0..opts.max_iter {
        let (dir, gn) = descent_direction(&u, grid, p);
        grad_norm = gn;
        let window_ok = history.len() > opts.window && {
            let old = history[history.len() - 1 - opts.window];
            (old - q).abs() <= opts.rel_change * q
        };
        if gn <= opts.grad_tol || (window_ok && gn <= 1e3 * opts.grad_tol) {
            let minimizer = RadialFunction::with_dirichlet(grid.clone(), u)?;
            return Ok(SpResult {
                value: q,
                minimizer,
                rayleigh_history: history,
                grad_norm,
            });
        }
        let mut tau = 1.0;
        let mut accepted = false;
        while tau > 1e-12 {
            let trial: Vec<f64> = u.iter().zip(&dir).map(|(a, d)| a + tau * d).collect();
            let trial = normalize(trial, grid);
            let qt = quotient(&trial, grid, p);
            if qt <= q * (1.0 + 4.0 * f64::EPSILON) {
                u = trial;
                q = qt;
                accepted = true;
                break;
            }
            tau *= 0.5;
        }
        history.push(q);
        if !accepted {
            break;
        }
    }
    Err(Error::NonConvergence {
        iterations: history.len() - 1,
        last: grad_norm,
        trace: history,
    })
}

fn normalize(mut v: Vec<f64>, grid: &RadialGrid) -> Vec<f64> {
    let n = grid.h1_form(&v, &v).sqrt();
    for x in v.iter_mut() {
        *x /= n;
    }
    v
}

fn power_integral(u: &[f64], grid: &RadialGrid, p: f64) -> f64 {
    let s: Vec<f64> = u.iter().map(|v| v.abs().powf(p)).collect();
    grid.integrate(&s)
}

fn quotient(u: &[f64], grid: &RadialGrid, p: f64) -> f64 {
    grid.h1_form(u, u).sqrt() / power_integral(u, grid, p).powf(1.0 / p)
}

/// Returns `z/P − u` and its H¹ norm, for `u` on the unit sphere.
fn descent_direction(u: &[f64], grid: &RadialGrid, p: f64) -> (Vec<f64>, f64) {
    let w = grid.weights();
    let pint = power_integral(u, grid, p);
    let dual: Vec<f64> = u
        .iter()
        .zip(w)
        .map(|(v, wi)| 2.0 * PI * wi * v.abs().powf(p - 2.0) * v)
        .collect();
    let z = grid.solve_gram(&dual);
    let dir: Vec<f64> = z.iter().zip(u).map(|(zi, ui)| zi / pint - ui).collect();
    let norm = grid.h1_form(&dir, &dir).sqrt();
    (dir, norm)
}

/// Rayleigh quotient of an arbitrary profile.
pub fn rayleigh_quotient(u: &RadialFunction, p: f64) -> f64 {
    h1_norm_sq(u).sqrt() / power_integral(u.values(), u.grid(), p).powf(1.0 / p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_values() {
        let m = NonlinearityModel::power(8.0, 12.0, 0.0).unwrap();
        assert_eq!(m.f(0.0).unwrap(), 0.0);
        assert_eq!(m.f(-3.0).unwrap(), 0.0);
        assert_eq!(m.f(1.0).unwrap(), 12.0);
        assert_eq!(m.big_f(0.0).unwrap(), 0.0);
        assert!((m.big_f(1.0).unwrap() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn exp_with_zero_kappa_is_power() {
        let e = NonlinearityModel::exp_critical(8.0, 12.0, 0.0, 0.0).unwrap();
        let p = NonlinearityModel::power(8.0, 12.0, 0.0).unwrap();
        for i in 0..1000 {
            let s = -1.0 + 5.0 * i as f64 / 999.0;
            assert_eq!(e.f(s).unwrap(), p.f(s).unwrap());
            assert_eq!(e.big_f(s).unwrap(), p.big_f(s).unwrap());
        }
    }

    #[test]
    fn overflow_guard() {
        let e = NonlinearityModel::exp_critical(8.0, 1.0, 0.0, 0.01).unwrap();
        let s = (701.0 / ALPHA0).sqrt();
        assert!(matches!(e.f(s), Err(Error::Range { .. })));
        assert!(matches!(e.big_f(s), Err(Error::Range { .. })));
        // power kind has no guard
        let p = NonlinearityModel::power(8.0, 1.0, 0.0).unwrap();
        assert!(p.f(s).is_ok());
    }

    #[test]
    fn structural_checks() {
        assert!(NonlinearityModel::power(5.0, 1.0, 0.0).is_err());
        assert!(NonlinearityModel::power(8.0, 1.0, 2.0).is_err());
        assert!(NonlinearityModel::power(8.0, -1.0, 0.0).is_err());
        assert!(NonlinearityModel::exp_critical(8.0, 1.0, 0.0, -0.1).is_err());
    }

    #[test]
    fn required_bound_arithmetic() {
        // p = 8, σ = 0: (36/16)^3 = 11.390625
        assert!((cp_bound(8.0, 0.0, 1.0) - 11.390625).abs() < 1e-12);
        assert!((cp_bound(8.0, 0.0, 2.0) - 11.390625 * 256.0).abs() < 1e-9);
    }

    #[test]
    fn f3_margin_power() {
        let m = NonlinearityModel::power(8.0, 12.0, 0.0).unwrap();
        let r = validate_model_with(&m, 0.1, 4.0);
        assert!(r.get("f3").unwrap().passed);
        assert!(r.get("f1").unwrap().passed);
        assert!(r.get("f2").unwrap().passed);
    }

    #[test]
    fn f4_rejects_small_cp() {
        let sp: f64 = 1.3;
        let m = NonlinearityModel::power(8.0, sp.powf(8.0), 0.0).unwrap();
        let r = validate_model_with(&m, sp, 4.0);
        let f4 = r.get("f4").unwrap();
        assert!(!f4.passed);
        assert!(f4.value < 1.0);
        assert!(!r.passed);
    }

    #[test]
    fn model_json_schema() {
        let m = NonlinearityModel::exp_critical(8.0, 3.0, 0.5, 0.01).unwrap();
        let v: serde_json::Value = serde_json::to_value(m).unwrap();
        assert_eq!(v["kind"], "exp_critical");
        assert_eq!(v["C_p"], 3.0);
        assert_eq!(v["sigma"], 0.5);
        assert_eq!(v["kappa"], 0.01);
    }
}
