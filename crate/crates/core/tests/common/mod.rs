//! Independent oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::Arc;

use csswaves::nonlinearity::{compute_Sp, cp_bound};
use csswaves::{make_grid, NonlinearityModel, ProblemSpec, RadialFunction, RadialGrid, Tolerances};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn default_grid(n: usize) -> Arc<RadialGrid> {
    make_grid(20.0, n, 20.0 / (10.0 * n as f64)).unwrap()
}

/// Default power model: `p = 8`, `σ = 0`, `C_p` at 1.5 times the bound on `grid`.
pub fn default_model(grid: &Arc<RadialGrid>) -> NonlinearityModel {
    let sp = compute_Sp(8.0, grid).unwrap().value;
    NonlinearityModel::power(8.0, 1.5 * cp_bound(8.0, 0.0, sp), 0.0).unwrap()
}

pub fn default_spec(n: usize, lambda: f64, epsilon: f64) -> ProblemSpec {
    let grid = default_grid(n);
    let model = default_model(&grid);
    ProblemSpec::new(lambda, epsilon, ProblemSpec::default_k(&grid), model, Tolerances::default())
        .unwrap()
}

/// Smooth, positive, decaying random profile: a few Gaussian bumps.
pub fn random_profile(grid: &Arc<RadialGrid>, rng: &mut ChaCha8Rng, amplitude: f64) -> RadialFunction {
    let bumps: Vec<(f64, f64, f64)> = (0..3)
        .map(|_| {
            (
                rng.gen_range(0.1..1.0) * amplitude,
                rng.gen_range(0.0..3.0),
                rng.gen_range(0.5..2.0),
            )
        })
        .collect();
    RadialFunction::from_fn(grid.clone(), move |r| {
        bumps
            .iter()
            .map(|(a, c, w)| a * (-((r - c) / w).powi(2)).exp())
            .sum()
    })
    .unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Composite Simpson rule on `[a, b]` with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let x = a + i as f64 * h;
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
    }
    s * h / 3.0
}

/// Ground state of `−Q″ − Q′/r + Q = Q^{p−1}` found by shooting on `Q(0)`.
#[derive(Debug, Clone, Copy)]
pub struct GroundState {
    pub q0: f64,
    /// `2π ∫ Q^p r dr`, which equals `‖Q‖²_{H¹}` by the equation.
    pub lp_mass: f64,
    pub h1_sq: f64,
}

/// Outcome of one shot: +1 if `Q` crosses zero, −1 if it turns back up.
fn shoot(p: f64, a: f64, dr: f64, r_end: f64) -> (i8, f64, f64) {
    // State (Q, Q′, ∫Q^p r, ∫(Q′² + Q²) r). Series start away from r = 0.
    let r0 = 1e-6;
    let c = (a - a.powf(p - 1.0)) / 4.0;
    let mut y = [a + c * r0 * r0, 2.0 * c * r0, 0.0, 0.0];
    let mut r = r0;
    let rhs = |r: f64, y: &[f64; 4]| -> [f64; 4] {
        let q = y[0];
        let qp = y[1];
        let nl = q.abs().powf(p - 2.0) * q;
        [qp, -qp / r + q - nl, q.abs().powf(p) * r, (qp * qp + q * q) * r]
    };
    while r < r_end {
        let k1 = rhs(r, &y);
        let mid = |k: &[f64; 4], s: f64| -> [f64; 4] {
            [y[0] + s * k[0], y[1] + s * k[1], y[2] + s * k[2], y[3] + s * k[3]]
        };
        let k2 = rhs(r + 0.5 * dr, &mid(&k1, 0.5 * dr));
        let k3 = rhs(r + 0.5 * dr, &mid(&k2, 0.5 * dr));
        let k4 = rhs(r + dr, &mid(&k3, dr));
        for i in 0..4 {
            y[i] += dr / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        r += dr;
        if y[0] < 0.0 {
            return (1, y[2], y[3]);
        }
        if y[1] > 0.0 {
            return (-1, y[2], y[3]);
        }
    }
    (0, y[2], y[3])
}

pub fn ground_state(p: f64) -> GroundState {
    let dr = 2e-4;
    let (mut lo, mut hi) = (1.0 + 1e-9, 4.0);
    // Too small a start never crosses; too large overshoots through zero.
    assert_eq!(shoot(p, hi, dr, 40.0).0, 1);
    let mut last = (0, 0.0, 0.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let s = shoot(p, mid, dr, 40.0);
        if s.0 == 1 {
            hi = mid;
        } else {
            lo = mid;
            last = s;
        }
    }
    GroundState { q0: lo, lp_mass: 2.0 * PI * last.1, h1_sq: 2.0 * PI * last.2 }
}

/// `S_p = (∫Q^p)^{1/2 − 1/p}` from the shooting ground state.
pub fn sp_oracle(p: f64) -> f64 {
    ground_state(p).lp_mass.powf(0.5 - 1.0 / p)
}

/// Ground-state energy of `−Δu + u = C u^{p−1}`: `u = C^{−1/(p−2)} Q`, so
/// the energy is `(1/2 − 1/p) C^{−2/(p−2)} ‖Q‖²`.
pub fn ground_energy_oracle(p: f64, c: f64) -> f64 {
    (0.5 - 1.0 / p) * c.powf(-2.0 / (p - 2.0)) * ground_state(p).lp_mass
}
