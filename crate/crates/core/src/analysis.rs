//! Numerical checks of the analytic inputs: Trudinger–Moser probes on the
//! Moser concentration family, the elementary exponential inequalities, and
//! the closed-form ω₀ threshold.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{h1_norm, make_grid, RadialFunction, RadialGrid};

/// Growth ratio below which a sequence counts as flat.
const FLAT_RATIO: f64 = 1.05;
/// Per-step growth ratio that counts as growth without saturation.
const GROWTH_RATIO: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrendVerdict {
    Bounded,
    UnboundedTrend,
    Inconclusive,
}

/// Classifies a positive sequence by its successive ratios: unbounded when
/// every step at least doubles, bounded when the last step is flat.
pub fn classify_trend(values: &[f64]) -> TrendVerdict {
    let ratios = ratios(values);
    let Some(&last) = ratios.last() else {
        return TrendVerdict::Inconclusive;
    };
    if ratios.iter().all(|&q| q >= GROWTH_RATIO) {
        TrendVerdict::UnboundedTrend
    } else if last <= FLAT_RATIO {
        TrendVerdict::Bounded
    } else {
        TrendVerdict::Inconclusive
    }
}

fn ratios(values: &[f64]) -> Vec<f64> {
    values.windows(2).map(|w| w[1] / w[0]).collect()
}

/// Moser functions on the unit disc: `√(log k / 2π)` for `r ≤ 1/k`, then
/// `log(1/r) / √(2π log k)` down to 0 at `r = 1`. Each has unit Dirichlet
/// energy.
#[derive(Debug, Clone)]
pub struct MoserFamily {
    pub k_list: Vec<f64>,
    pub grid: Arc<RadialGrid>,
    pub profiles: Vec<RadialFunction>,
}

pub fn moser_function(k: f64, r: f64) -> f64 {
    let lk = k.ln();
    if r <= 1.0 / k {
        (lk / (2.0 * PI)).sqrt()
    } else if r < 1.0 {
        (1.0 / r).ln() / (2.0 * PI * lk).sqrt()
    } else {
        0.0
    }
}

/// `2π ∫ |w′|² r dr` with the grid's stiffness form.
pub fn dirichlet_energy(u: &RadialFunction) -> f64 {
    let grid = u.grid();
    let v = u.values();
    let d = grid.spacing();
    2.0 * PI
        * grid
            .midpoints()
            .iter()
            .enumerate()
            .map(|(j, m)| m * (v[j + 1] - v[j]).powi(2))
            .sum::<f64>()
        / d
}

impl MoserFamily {
    /// Family on a unit-disc grid with `n` nodes. Rejects grids whose plateau
    /// `[0, 1/k]` spans fewer than three cells, and profiles whose discrete
    /// Dirichlet energy misses 1 by more than `10⁻³`.
    pub fn new(k_list: &[f64], n: usize) -> Result<Self> {
        if k_list.is_empty() {
            return Err(invalid("k_list", "need at least one Moser index"));
        }
        if let Some(&k) = k_list.iter().find(|&&k| !(k > 1.0) || !k.is_finite()) {
            return Err(invalid("k_list", format!("Moser index must exceed 1, got {k}")));
        }
        let grid = make_grid(1.0, n, 1.0 / (10.0 * n as f64))?;
        let k_max = k_list.iter().copied().fold(0.0, f64::max);
        if 1.0 / k_max < 3.0 * grid.spacing() {
            return Err(Error::InvalidGrid(format!(
                "plateau 1/{k_max} is narrower than 3 cells of width {:.3e}",
                grid.spacing()
            )));
        }
        let mut profiles = Vec::with_capacity(k_list.len());
        for &k in k_list {
            let w = RadialFunction::from_fn(grid.clone(), |r| moser_function(k, r))?;
            let e = dirichlet_energy(&w);
            if (e - 1.0).abs() > 1e-3 {
                return Err(Error::InvalidGrid(format!(
                    "Moser profile k={k} has discrete Dirichlet energy {e:.6}"
                )));
            }
            profiles.push(w);
        }
        Ok(Self { k_list: k_list.to_vec(), grid, profiles })
    }

    /// Node count giving at least 64 cells across the narrowest plateau.
    pub fn standard(k_list: &[f64]) -> Result<Self> {
        let k_max = k_list.iter().copied().fold(1.0, f64::max);
        let n = ((64.0 * k_max).ceil() as usize).max(4096);
        Self::new(k_list, n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub alpha: f64,
    pub k_list: Vec<f64>,
    /// `I_k(α) = ∫ (e^{α w_k²} − 1) dx`.
    pub values: Vec<f64>,
    /// Plateau contribution `π k⁻² (k^{α/2π} − 1)`.
    pub plateau: Vec<f64>,
    pub ratios: Vec<f64>,
    pub verdict: TrendVerdict,
}

impl ProbeReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,I\n");
        for (k, v) in self.k_list.iter().zip(&self.values) {
            out.push_str(&format!("{k:.17e},{v:.17e}\n"));
        }
        out
    }
}

pub fn plateau_term(alpha: f64, k: f64) -> f64 {
    PI * k.powi(-2) * (k.powf(alpha / (2.0 * PI)) - 1.0)
}

/// Integral `∫ (e^{α u²} − 1) dx` on the grid of `u`.
pub fn exp_integral(alpha: f64, u: &RadialFunction) -> Result<f64> {
    let vals: Vec<f64> = u.values().iter().map(|v| alpha * v * v).collect();
    if let Some(&a) = vals.iter().find(|&&a| a > crate::nonlinearity::EXP_ARG_LIMIT) {
        return Err(Error::Range { value: a, reason: "exponent exceeds the overflow guard".into() });
    }
    let integrand: Vec<f64> = vals.iter().map(|a| a.exp_m1()).collect();
    Ok(u.grid().integrate(&integrand))
}

/// Trudinger–Moser probe `I_k(α)` over the family.
pub fn tm_probe(alpha: f64, family: &MoserFamily) -> Result<ProbeReport> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(invalid("alpha", format!("exponent must be positive, got {alpha}")));
    }
    let values = family
        .profiles
        .iter()
        .map(|w| exp_integral(alpha, w))
        .collect::<Result<Vec<_>>>()?;
    let plateau = family.k_list.iter().map(|&k| plateau_term(alpha, k)).collect();
    Ok(ProbeReport {
        alpha,
        k_list: family.k_list.clone(),
        ratios: ratios(&values),
        verdict: classify_trend(&values),
        values,
        plateau,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupPoint {
    pub s_max: f64,
    pub c: f64,
    pub witness_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementaryReport {
    pub beta: f64,
    pub r: f64,
    pub alpha_factor: f64,
    pub samples: usize,
    /// `sup (e^{βs²} − 1)^r / (e^{αβs²} − 1)` over `(0, s_max]`, per `s_max`.
    pub sup_table: Vec<SupPoint>,
    pub c_empirical: f64,
    pub witness_s: f64,
    /// Ratio limit at `s → 0⁺` (0 for `r > 1`).
    pub zero_limit: f64,
    pub finite: bool,
    /// The two largest windows give the same constant to `10⁻⁶`.
    pub stable: bool,
}

/// `log((e^{βs²} − 1)^r / (e^{αβs²} − 1))`, evaluated without overflow.
fn log_ratio(beta: f64, r: f64, alpha: f64, s: f64) -> f64 {
    let x = beta * s * s;
    let log_expm1 = |y: f64| if y > 30.0 { y + (-(-y).exp()).ln_1p() } else { y.exp_m1().ln() };
    r * log_expm1(x) - log_expm1(alpha * x)
}

/// Empirical constant of `(e^{βs²} − 1)^r ≤ C (e^{αβs²} − 1)` for
/// `s_max ∈ {0.5, 1, 1.5, 2}`, each window sampled at `sample_count` points.
pub fn elementary_inequality_check(
    beta: f64,
    r: f64,
    alpha_factor: f64,
    sample_count: usize,
) -> Result<ElementaryReport> {
    if !(beta > 0.0) {
        return Err(invalid("beta", "must be positive"));
    }
    if !(r > 1.0) {
        return Err(invalid("r", "must exceed 1"));
    }
    if !(alpha_factor > r) {
        return Err(invalid("alpha_factor", "must exceed r"));
    }
    if sample_count < 2 {
        return Err(invalid("sample_count", "need at least 2 samples"));
    }
    let mut sup_table = Vec::new();
    for s_max in [0.5, 1.0, 1.5, 2.0] {
        let mut best = (f64::NEG_INFINITY, 0.0);
        for i in 1..=sample_count {
            let s = s_max * i as f64 / sample_count as f64;
            let lr = log_ratio(beta, r, alpha_factor, s);
            if lr > best.0 {
                best = (lr, s);
            }
        }
        sup_table.push(SupPoint { s_max, c: best.0.exp(), witness_s: best.1 });
    }
    let last = sup_table[sup_table.len() - 1].clone();
    let prev = &sup_table[sup_table.len() - 2];
    Ok(ElementaryReport {
        beta,
        r,
        alpha_factor,
        samples: sample_count,
        c_empirical: last.c,
        witness_s: last.witness_s,
        zero_limit: 0.0,
        finite: last.c.is_finite(),
        stable: (last.c - prev.c).abs() <= 1e-6 * last.c,
        sup_table,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub beta: f64,
    pub m_norm: f64,
    pub q: f64,
    /// `βM² / 4π`; the hypothesis needs this below 1.
    pub beta_m2_over_4pi: f64,
    pub hypothesis_holds: bool,
    /// `∫ (e^{βv²} − 1)|v|^q` for a Gaussian with `‖v‖_{H¹} = M`.
    pub gaussian_value: f64,
    pub k_list: Vec<f64>,
    /// Same integral along Moser profiles rescaled to `‖v‖_{H¹} = M`.
    pub concentration_values: Vec<f64>,
    pub verdict: TrendVerdict,
    /// Hypothesis violated and the concentrating family grows.
    pub flagged: bool,
}

fn moment_integral(beta: f64, q: f64, v: &RadialFunction) -> Result<f64> {
    let mut integrand = Vec::with_capacity(v.values().len());
    for &x in v.values() {
        let a = beta * x * x;
        if a > crate::nonlinearity::EXP_ARG_LIMIT {
            return Err(Error::Range { value: a, reason: "exponent exceeds the overflow guard".into() });
        }
        integrand.push(a.exp_m1() * x.abs().powf(q));
    }
    Ok(v.grid().integrate(&integrand))
}

/// Moment bound `∫ (e^{βv²} − 1)|v|^q ≤ C‖v‖^q` for `‖v‖ = M`. A Gaussian
/// profile stays finite for any `β`; growth only shows along a concentrating
/// sequence, so the trend is taken over Moser profiles rescaled to H¹ norm
/// `M` on successively finer plateaus.
pub fn moment_bound_check(beta: f64, m_norm: f64, q: f64, family: &MoserFamily) -> Result<MomentReport> {
    if !(beta > 0.0) || !(m_norm > 0.0) || !(q > 0.0) {
        return Err(invalid("moment", "beta, M and q must be positive"));
    }
    let gauss_grid = make_grid(20.0, 2048, 20.0 / (10.0 * 2048.0))?;
    let g = RadialFunction::from_fn(gauss_grid, |r| (-r * r).exp())?;
    let g = g.scaled(m_norm / h1_norm(&g));
    let gaussian_value = moment_integral(beta, q, &g)?;
    let concentration_values = family
        .profiles
        .iter()
        .map(|w| moment_integral(beta, q, &w.scaled(m_norm / h1_norm(w))))
        .collect::<Result<Vec<_>>>()?;
    let verdict = classify_trend(&concentration_values);
    let ratio = beta * m_norm * m_norm / (4.0 * PI);
    Ok(MomentReport {
        beta,
        m_norm,
        q,
        beta_m2_over_4pi: ratio,
        hypothesis_holds: ratio < 1.0,
        gaussian_value,
        k_list: family.k_list.clone(),
        concentration_values,
        verdict,
        flagged: ratio >= 1.0 && verdict == TrendVerdict::UnboundedTrend,
    })
}

/// Integrand of `m`, evaluated literally:
/// `((2/(p+1)) coth²((p−1)r/2))^{2/(1−p)}`, written through `tanh` so that
/// the `r → 0` limit 0 is reached without overflow.
pub fn omega0_integrand(p: f64, r: f64) -> f64 {
    let e = 2.0 / (1.0 - p);
    let t = (0.5 * (p - 1.0) * r).abs().tanh();
    (2.0 / (p + 1.0)).powf(e) * t.powf(-2.0 * e)
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    // Unit panels keep the recursion shallow on long windows.
    let panels = ((b - a).ceil() as usize).max(1);
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let lo = a + i as f64 * h;
            let hi = lo + h;
            let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
            let whole = h / 6.0 * (fa + 4.0 * fm + fb);
            rec(f, lo, hi, fa, fm, fb, whole, tol / panels as f64, 40)
        })
        .sum()
}

fn gauss_legendre(f: &dyn Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    // Five-point rule.
    const X: [f64; 5] = [
        0.0,
        0.538_469_310_105_683_1,
        -0.538_469_310_105_683_1,
        0.906_179_845_938_664,
        -0.906_179_845_938_664,
    ];
    const W: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
        0.236_926_885_056_189_1,
    ];
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let mid = a + (i as f64 + 0.5) * h;
            0.5 * h * X.iter().zip(&W).map(|(x, w)| w * f(mid + 0.5 * h * x)).sum::<f64>()
        })
        .sum()
}

/// `ω₀` from its closed form given `m`.
pub fn omega0_formula(p: f64, m: f64) -> f64 {
    let e = (p - 1.0) / (2.0 * (3.0 - p));
    (3.0 - p) / (3.0 + p)
        * 3f64.powf(e)
        * 2f64.powf(2.0 / (3.0 - p))
        * (m * m * (3.0 + p) / (p - 1.0)).powf(-e)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowValue {
    pub window: f64,
    pub m_simpson: f64,
    pub m_gauss: f64,
    pub omega0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub p: f64,
    pub windows: Vec<WindowValue>,
    /// Largest `|m_simpson − m_gauss|` over the windows.
    pub rule_gap: f64,
    pub rules_agree: bool,
    /// `m(2W) − m(W)`, `m(4W) − m(2W)`.
    pub increments: Vec<f64>,
    /// Integrand limit at `|r| → ∞`, `(2/(p+1))^{2/(1−p)}`.
    pub tail_limit: f64,
    pub divergent: bool,
}

/// Windowed `m(W) = ∫_{−W}^{W}` for `W, 2W, 4W`, each by adaptive Simpson and
/// composite Gauss–Legendre, with `ω₀` from its closed form.
pub fn omega0_threshold(p: f64, window: f64) -> Result<ThresholdReport> {
    if !(p > 1.0 && p < 3.0) {
        return Err(invalid("p", format!("must lie in (1, 3), got {p}")));
    }
    if !(window > 0.0) || !window.is_finite() {
        return Err(invalid("window", format!("must be positive, got {window}")));
    }
    let f = |r: f64| omega0_integrand(p, r);
    let mut windows = Vec::new();
    for scale in [1.0, 2.0, 4.0] {
        let w = scale * window;
        let m_simpson = 2.0 * adaptive_simpson(&f, 0.0, w, 1e-12);
        let panels = (64.0 * w).ceil() as usize;
        let m_gauss = 2.0 * gauss_legendre(&f, 0.0, w, panels);
        windows.push(WindowValue { window: w, m_simpson, m_gauss, omega0: omega0_formula(p, m_simpson) });
    }
    let rule_gap = windows
        .iter()
        .map(|v| (v.m_simpson - v.m_gauss).abs())
        .fold(0.0, f64::max);
    let increments: Vec<f64> = windows.windows(2).map(|w| w[1].m_simpson - w[0].m_simpson).collect();
    Ok(ThresholdReport {
        p,
        rule_gap,
        rules_agree: rule_gap <= 1e-8,
        divergent: increments[1] >= increments[0],
        increments,
        tail_limit: (2.0 / (p + 1.0)).powf(2.0 / (1.0 - p)),
        windows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moser_profile_shape() {
        let k = 16.0;
        assert!((moser_function(k, 0.01) - (k.ln() / (2.0 * PI)).sqrt()).abs() < 1e-15);
        assert_eq!(moser_function(k, 1.0), 0.0);
        // Continuous at the plateau edge.
        let a = moser_function(k, 1.0 / k);
        let b = moser_function(k, 1.0 / k + 1e-12);
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn underresolved_plateau_rejected() {
        assert!(matches!(MoserFamily::new(&[256.0], 512), Err(Error::InvalidGrid(_))));
        assert!(MoserFamily::new(&[1.0], 4096).is_err());
    }

    #[test]
    fn omega0_integrand_limits() {
        assert_eq!(omega0_integrand(2.0, 0.0), 0.0);
        assert!((omega0_integrand(2.0, 60.0) - 2.25).abs() < 1e-12);
        let r: f64 = 1.3;
        let expected = 2.25 * (0.5 * r).tanh().powi(4);
        assert!((omega0_integrand(2.0, r) - expected).abs() < 1e-14);
    }

    #[test]
    fn omega0_rejects_bad_exponent() {
        assert!(omega0_threshold(3.0, 10.0).is_err());
        assert!(omega0_threshold(1.0, 10.0).is_err());
        assert!(omega0_threshold(2.0, 0.0).is_err());
    }

    #[test]
    fn trend_classifier() {
        assert_eq!(classify_trend(&[1.0, 16.0, 256.0]), TrendVerdict::UnboundedTrend);
        assert_eq!(classify_trend(&[1.0, 0.5, 0.3]), TrendVerdict::Bounded);
        assert_eq!(classify_trend(&[1.0, 3.0, 3.1]), TrendVerdict::Bounded);
        assert_eq!(classify_trend(&[1.0, 1.5, 2.0]), TrendVerdict::Inconclusive);
        assert_eq!(classify_trend(&[1.0]), TrendVerdict::Inconclusive);
    }

    #[test]
    fn elementary_preconditions() {
        assert!(elementary_inequality_check(1.0, 1.0, 2.0, 10).is_err());
        assert!(elementary_inequality_check(1.0, 2.0, 2.0, 10).is_err());
        assert!(elementary_inequality_check(0.0, 2.0, 3.0, 10).is_err());
    }
}
