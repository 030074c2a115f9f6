//! The nonlocal gauge term.
//!
//! For a radial profile `u` the gauge field is encoded by the cumulative
//! charge `h(r) = ∫₀^r (l/2) u(l)² dl` and the outer potential
//! `B(r) = ∫_r^R (h(s)/s) u(s)² ds`. The Chern–Simons energy is
//! `c(u) = ∫_{ℝ²} u² h² / |x|² dx` and its derivative is
//! `c′(u)φ = 2 ∫ (B + h²/|x|²) u φ dx`.
//!
//! `h` is accumulated with the running form of the grid's quadrature rule,
//! and the discrete `B` is the exact adjoint of that running sum. With that pairing the closed-form `c′` is the exact gradient of the
//! discrete `c`, `c′(u)u = 6c(u)` and `∫ B u² = 2c(u)` hold to rounding.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::Result;
use crate::grid::{check_same, samples_to_csv, GridField, RadialFunction, RadialGrid};

/// `h` and `B` sampled on the grid of the profile they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeProfile {
    pub h: GridField,
    pub b: GridField,
}

impl GaugeProfile {
    pub fn to_csv(&self) -> String {
        samples_to_csv(
            "r,h,B",
            self.h.grid().nodes(),
            &[self.h.values(), self.b.values()],
        )
    }
}

/// Raw gauge quantities, shared by the functional assembly.
#[derive(Debug, Clone)]
pub(crate) struct GaugeParts {
    pub h: Vec<f64>,
    pub b: Vec<f64>,
    /// `Σ_i w_i u_i² h_i² / r_i²` (without the 2π).
    pub c_sum: f64,
}

/// `2h`, i.e. `H_j = ∫₀^{r_j} l u² dl`: the `[0, r_min]` head, a running
/// trapezoid on `g = l u²`, and the Euler–Maclaurin end terms. The inner
/// term is the one built into the node-0 weight; the moving end uses a
/// centered difference of `g`.
fn running_moment(grid: &RadialGrid, u: &[f64]) -> Vec<f64> {
    let r = grid.nodes();
    let d = grid.spacing();
    let n = grid.len();
    let c = d / 24.0;
    let g: Vec<f64> = (0..n).map(|i| r[i] * u[i] * u[i]).collect();
    let head = head_coefficient(grid) * u[0] * u[0];
    let left = (d * d / 12.0) * u[0] * u[0] - 0.5 * d * g[0];
    let mut out = vec![0.0; n];
    out[0] = head;
    let mut sum = 0.0;
    for j in 1..n {
        sum += d * g[j - 1];
        let right = if j + 1 < n {
            c * (g[j + 1] - g[j - 1])
        } else {
            c * (3.0 * g[j] - 4.0 * g[j - 1] + g[j - 2])
        };
        out[j] = head + sum + 0.5 * d * g[j] + left - right;
    }
    out
}

/// `∫₀^{r_min} l dl`, the head weight of `u(r_min)²`.
fn head_coefficient(grid: &RadialGrid) -> f64 {
    0.5 * grid.r_min() * grid.r_min()
}

pub(crate) fn running_charge(grid: &RadialGrid, u: &[f64]) -> Vec<f64> {
    let mut h = running_moment(grid, u);
    for v in h.iter_mut() {
        *v *= 0.5;
    }
    h
}

pub(crate) fn gauge_parts(grid: &RadialGrid, u: &[f64]) -> GaugeParts {
    let r = grid.nodes();
    let w = grid.weights();
    let d = grid.spacing();
    let n = grid.len();
    let c = d / 24.0;
    let h = running_charge(grid, u);

    // s_i = w_i u_i² h_i / r_i²
    let s: Vec<f64> = (0..n).map(|i| w[i] * u[i] * u[i] * h[i] / (r[i] * r[i])).collect();
    let c_sum: f64 = s.iter().zip(&h).map(|(si, hi)| si * hi).sum();

    // y = Lᵀs for the linear map L: u² ↦ 2h of `running_moment`; then
    // B = y / w makes 2∫(B + h²/r²)uφ the exact derivative of c.
    let total: f64 = s[1..].iter().sum();
    let mut y = vec![0.0; n];
    y[0] += head_coefficient(grid) * (s[0] + total) + (d * d / 12.0 + 0.5 * d * r[0]) * total;
    let mut tail = 0.0;
    for k in (1..n).rev() {
        // Trapezoid: node k carries d·r_k for every later prefix, half its
        // own weight for the prefix ending at k.
        y[k] += d * r[k] * tail + 0.5 * d * r[k] * s[k];
        tail += s[k];
    }
    for k in 1..n - 1 {
        y[k + 1] -= c * r[k + 1] * s[k];
        y[k - 1] += c * r[k - 1] * s[k];
    }
    y[n - 1] -= 3.0 * c * r[n - 1] * s[n - 1];
    y[n - 2] += 4.0 * c * r[n - 2] * s[n - 1];
    y[n - 3] -= c * r[n - 3] * s[n - 1];

    let mut b: Vec<f64> = y.iter().zip(w).map(|(yi, wi)| yi / wi).collect();
    // The outer node is a Dirichlet node, so its entry never enters a
    // derivative; pin it to the boundary value.
    b[n - 1] = 0.0;
    GaugeParts { h, b, c_sum }
}

/// `h(r_i) = ∫₀^{r_i} (l/2) u² dl`, including the `[0, r_min]` head.
pub fn cumulative_h(u: &RadialFunction) -> GridField {
    let h = running_charge(u.grid(), u.values());
    GridField::new(u.grid().clone(), h).expect("finite input gives finite charge")
}

/// Pointwise samples of `B` from the variational ones.
///
/// Inside the gradient, `B_0` and `B_1` are the adjoint of the running sum,
/// i.e. `u²`-weighted averages over their quadrature cells, which sit an
/// `O(d²)` distance from `B(r_0)`, `B(r_1)`. For reporting we integrate back
/// from node 2 with the local quadratic rule on `G = (h/s) u²`.
///
/// The end corrections have small negative stencil entries, so far out in a
/// decaying tail the samples can carry sign noise hundreds of orders below
/// `B(r_0)`. A backward running max restores `B ≥ 0` and monotonicity
/// without touching any resolved value.
fn pointwise_b(grid: &RadialGrid, u: &[f64], parts: &GaugeParts) -> Vec<f64> {
    let r = grid.nodes();
    let d = grid.spacing();
    let g: Vec<f64> = (0..3).map(|i| parts.h[i] * u[i] * u[i] / r[i]).collect();
    let mut b = parts.b.clone();
    b[1] = b[2] + d / 12.0 * (-g[0] + 8.0 * g[1] + 5.0 * g[2]);
    b[0] = b[2] + d / 3.0 * (g[0] + 4.0 * g[1] + g[2]);
    for i in (0..b.len() - 1).rev() {
        b[i] = b[i].max(b[i + 1]);
    }
    b
}

/// Outer potential `B(r_i) = ∫_{r_i}^R (h/s) u² ds` for the given profile.
pub fn outer_potential_b(u: &RadialFunction) -> GridField {
    let parts = gauge_parts(u.grid(), u.values());
    let b = pointwise_b(u.grid(), u.values(), &parts);
    GridField::new(u.grid().clone(), b).expect("finite input gives finite potential")
}

pub fn gauge_profile(u: &RadialFunction) -> GaugeProfile {
    let grid: Arc<RadialGrid> = u.grid().clone();
    let parts = gauge_parts(&grid, u.values());
    let b = pointwise_b(&grid, u.values(), &parts);
    GaugeProfile {
        h: GridField::new(grid.clone(), parts.h).expect("finite"),
        b: GridField::new(grid, b).expect("finite"),
    }
}

/// `c(u) = 2π ∫₀^R u² h² / r dr`.
pub fn cs_energy_c(u: &RadialFunction) -> f64 {
    2.0 * PI * gauge_parts(u.grid(), u.values()).c_sum
}

/// `c′(u)φ = 2 ∫ (B + h²/r²) u φ dx`.
pub fn cs_derivative(u: &RadialFunction, phi: &RadialFunction) -> Result<f64> {
    check_same(u, phi)?;
    let grid = u.grid();
    let parts = gauge_parts(grid, u.values());
    let r = grid.nodes();
    let integrand: Vec<f64> = (0..grid.len())
        .map(|i| {
            let hr = parts.h[i] / r[i];
            (parts.b[i] + hr * hr) * u.values()[i] * phi.values()[i]
        })
        .collect();
    Ok(2.0 * grid.integrate(&integrand))
}

/// Relative discrepancy `|∫ B u² dx − 2c(u)| / max(c(u), floor)`.
pub fn fubini_identity_check(u: &RadialFunction) -> f64 {
    const FLOOR: f64 = 1e-300;
    let grid = u.grid();
    let parts = gauge_parts(grid, u.values());
    let c = 2.0 * PI * parts.c_sum;
    let bu2: Vec<f64> = parts
        .b
        .iter()
        .zip(u.values())
        .map(|(b, v)| b * v * v)
        .collect();
    let lhs = grid.integrate(&bu2);
    (lhs - 2.0 * c).abs() / c.max(FLOOR)
}

/// Curl constraint of the gauge field under `A_i = ε_ij x_j h(r)/r²`, which
/// reduces to `h′(r) = (r/2) u(r)²`. Returns the largest nodal violation with
/// `h′` taken by finite differences.
pub fn gauge_constraint_residual(u: &RadialFunction) -> f64 {
    let grid = u.grid();
    let h = running_charge(grid, u.values());
    let dh = grid.derivative(&h);
    grid.nodes()
        .iter()
        .zip(dh.iter().zip(u.values()))
        .map(|(r, (dh, v))| (dh - 0.5 * r * v * v).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    fn gaussian(n: usize) -> RadialFunction {
        let g = make_grid(20.0, n, 20.0 / (10.0 * n as f64)).unwrap();
        RadialFunction::from_fn(g, |r| (-0.5 * r * r).exp()).unwrap()
    }

    #[test]
    fn zero_profile() {
        let g = make_grid(20.0, 64, 1e-3).unwrap();
        let z = RadialFunction::zeros(g);
        assert!(cumulative_h(&z).values().iter().all(|&v| v == 0.0));
        assert!(outer_potential_b(&z).values().iter().all(|&v| v == 0.0));
        assert_eq!(cs_energy_c(&z), 0.0);
        assert_eq!(cs_derivative(&z, &z).unwrap(), 0.0);
        assert_eq!(fubini_identity_check(&z), 0.0);
        assert_eq!(gauge_constraint_residual(&z), 0.0);
    }

    #[test]
    fn constant_profile_charge_is_quadratic() {
        let g = make_grid(3.0, 64, 1e-3).unwrap();
        let mut v = vec![1.5; 64];
        v[63] = 1.5;
        let f = GridField::new(g.clone(), v).unwrap();
        let h = running_charge(&g, f.values());
        for (r, hv) in g.nodes().iter().zip(&h) {
            let exact = 1.5 * 1.5 * r * r / 4.0;
            assert!((hv - exact).abs() < 1e-12 * (1.0 + exact));
        }
    }

    #[test]
    fn gaussian_charge_closed_form() {
        let u = gaussian(2048);
        let h = cumulative_h(&u);
        for (r, hv) in u.grid().nodes().iter().zip(h.values()) {
            let exact = (1.0 - (-r * r).exp()) / 4.0;
            assert!((hv - exact).abs() < 1e-6, "r={r}: {hv} vs {exact}");
        }
    }

    #[test]
    fn potential_is_monotone_and_vanishes_at_radius() {
        let u = gaussian(512);
        let b = outer_potential_b(&u);
        let v = b.values();
        assert_eq!(*v.last().unwrap(), 0.0);
        assert!(v.windows(2).all(|w| w[0] >= w[1]));
        assert!(v.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn scaling_laws() {
        let u = gaussian(256);
        let u2 = u.scaled(2.0);
        let c1 = cs_energy_c(&u);
        let c2 = cs_energy_c(&u2);
        assert!((c2 - 64.0 * c1).abs() / (64.0 * c1) < 1e-12);
        let b1 = outer_potential_b(&u);
        let b2 = outer_potential_b(&u2);
        for (a, b) in b1.values().iter().zip(b2.values()) {
            assert!((b - 16.0 * a).abs() <= 1e-12 * (16.0 * a).abs() + 1e-300);
        }
    }

    #[test]
    fn euler_identity() {
        let u = gaussian(512);
        let c = cs_energy_c(&u);
        let dc = cs_derivative(&u, &u).unwrap();
        assert!((dc - 6.0 * c).abs() / (6.0 * c) < 1e-12);
    }

    #[test]
    fn gauge_residual_is_second_order() {
        let r1 = gauge_constraint_residual(&gaussian(512));
        let r2 = gauge_constraint_residual(&gaussian(1024));
        assert!(r1 / r2 > 3.5, "ratio {}", r1 / r2);
    }

    #[test]
    fn derivative_matches_central_difference() {
        let g = make_grid(20.0, 256, 0.01).unwrap();
        let u = RadialFunction::from_fn(g.clone(), |r| (1.0 + r) * (-0.3 * r * r).exp()).unwrap();
        let phi = RadialFunction::from_fn(g, |r| (2.0 * r).sin() * (-0.2 * r * r).exp()).unwrap();
        let t = 1e-5;
        let fd = (cs_energy_c(&u.axpy(t, &phi).unwrap()) - cs_energy_c(&u.axpy(-t, &phi).unwrap()))
            / (2.0 * t);
        let an = cs_derivative(&u, &phi).unwrap();
        assert!((fd - an).abs() <= 1e-7 * an.abs().max(1.0), "{fd} vs {an}");
    }
}
