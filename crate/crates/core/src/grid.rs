//! Radial discretization of the plane.
//!
//! A radially symmetric function on ℝ² is sampled on uniform nodes
//! `r_0 = r_min < r_1 < … < r_{N-1} = R`. Integrals `∫_{ℝ²} g dx` become
//! `2π Σ w_i g(r_i)` where `w_i` integrates the piecewise-linear interpolant
//! of `g` exactly against the measure `r dr` on `[r_min, R]`; the disc
//! `[0, r_min]` is folded into `w_0` with `g ≈ g(r_min)`.
//!
//! The H¹ form uses the P1 stiffness on each cell,
//! `∫ u′v′ r dr ≈ Σ_j r_{j+1/2} (u_{j+1}-u_j)(v_{j+1}-v_j)/Δr`, together with
//! the lumped mass `Σ w_i u_i v_i`. Both pieces are second order and the
//! resulting Gram matrix is tridiagonal.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest admissible node count.
pub const MIN_NODES: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    radius: f64,
    n: usize,
    r_min: f64,
    spacing: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// Cell midpoints `r_{j+1/2}`, one per cell.
    midpoints: Vec<f64>,
}

/// Serialized form of a grid: only the defining parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridParams {
    #[serde(rename = "R")]
    pub radius: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub r_min: f64,
}

/// Build a uniform grid on `[r_min, R]` with `n` nodes.
pub fn make_grid(radius: f64, n: usize, r_min: f64) -> Result<Arc<RadialGrid>> {
    RadialGrid::new(radius, n, r_min).map(Arc::new)
}

/// Weights for `∫₀^R φ(r) r dr`.
///
/// Interior nodes carry the trapezoid weight `r_i d`, so the discrete
/// Euler–Lagrange equation coincides with the nodal finite-difference
/// operator there. The inner node adds the head `r_min²/2` and the
/// Euler–Maclaurin term `d²/12`, which is the leading trapezoid error for a
/// smooth radial `φ` (where `(rφ)′(0) = φ(0)`). The outer two weights are then
/// fixed so that `φ = 1` and `φ = r` integrate exactly.
fn radial_weights(nodes: &[f64], d: f64) -> Vec<f64> {
    let n = nodes.len();
    let radius = nodes[n - 1];
    let r0 = nodes[0];
    let mut w: Vec<f64> = nodes.iter().map(|&r| r * d).collect();
    w[0] = 0.5 * r0 * r0 + 0.5 * r0 * d + d * d / 12.0;
    // Closed-form solution of the two exactness conditions; the trapezoid
    // error on `g = r²` is `d²(R − r_min)/6` and the head misses `r_min³/6`.
    let shift = d * (radius - r0) / 12.0 + r0 * r0 * r0 / (6.0 * d);
    w[n - 2] += shift;
    w[n - 1] = 0.5 * radius * d - d * d / 12.0 - shift;
    w
}

impl RadialGrid {
    pub fn new(radius: f64, n: usize, r_min: f64) -> Result<Self> {
        if n < MIN_NODES {
            return Err(Error::InvalidGrid(format!(
                "need at least {MIN_NODES} nodes, got {n}"
            )));
        }
        if !(r_min > 0.0) || !r_min.is_finite() {
            return Err(Error::InvalidGrid(format!("r_min must be positive, got {r_min}")));
        }
        if !(radius > r_min) || !radius.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "radius {radius} must exceed r_min {r_min}"
            )));
        }
        let d = (radius - r_min) / (n - 1) as f64;
        let mut nodes: Vec<f64> = (0..n).map(|i| r_min + i as f64 * d).collect();
        nodes[n - 1] = radius;

        let weights = radial_weights(&nodes, d);
        if weights.iter().any(|&w| !(w > 0.0)) {
            return Err(Error::InvalidGrid("quadrature weights must be positive".into()));
        }

        let midpoints = nodes.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();

        Ok(Self {
            radius,
            n,
            r_min,
            spacing: d,
            nodes,
            weights,
            midpoints,
        })
    }

    /// Grid with the default inner cutoff `R / (10 N)`.
    pub fn with_default_cutoff(radius: f64, n: usize) -> Result<Self> {
        Self::new(radius, n, radius / (10.0 * n as f64))
    }

    pub fn from_params(params: GridParams) -> Result<Self> {
        Self::new(params.radius, params.n, params.r_min)
    }

    pub fn params(&self) -> GridParams {
        GridParams {
            radius: self.radius,
            n: self.n,
            r_min: self.r_min,
        }
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Quadrature weights for `∫₀^R g(r) r dr`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn midpoints(&self) -> &[f64] {
        &self.midpoints
    }

    /// `2π Σ w_i g_i`.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.n);
        2.0 * PI
            * self
                .weights
                .iter()
                .zip(values)
                .map(|(w, g)| w * g)
                .sum::<f64>()
    }

    /// Discrete H¹ pairing of two sample vectors on this grid.
    pub fn h1_form(&self, u: &[f64], v: &[f64]) -> f64 {
        let d = self.spacing;
        let stiff: f64 = self
            .midpoints
            .iter()
            .enumerate()
            .map(|(j, m)| m * (u[j + 1] - u[j]) * (v[j + 1] - v[j]))
            .sum::<f64>()
            / d;
        let mass: f64 = self
            .weights
            .iter()
            .zip(u.iter().zip(v))
            .map(|(w, (a, b))| w * a * b)
            .sum();
        2.0 * PI * (stiff + mass)
    }

    /// Applies the H¹ Gram matrix: `(K u)_i = ∂/∂u_i ½ h1_form(u, u)`.
    pub fn apply_gram(&self, u: &[f64]) -> Vec<f64> {
        let n = self.n;
        let d = self.spacing;
        let mut out: Vec<f64> = self.weights.iter().zip(u).map(|(w, a)| w * a).collect();
        for (j, m) in self.midpoints.iter().enumerate() {
            let flux = m * (u[j + 1] - u[j]) / d;
            out[j] -= flux;
            out[j + 1] += flux;
        }
        for x in out.iter_mut().take(n) {
            *x *= 2.0 * PI;
        }
        out
    }

    /// Solves `K g = dual` on the Dirichlet subspace (`g_{N-1} = 0`), where `K`
    /// is the tridiagonal H¹ Gram matrix. The last entry of `dual` is ignored.
    pub fn solve_gram(&self, dual: &[f64]) -> Vec<f64> {
        let n = self.n;
        let m = n - 1;
        let d = self.spacing;
        let scale = 2.0 * PI;
        let mut diag = vec![0.0; m];
        let mut off = vec![0.0; m.saturating_sub(1)];
        for i in 0..m {
            let left = if i > 0 { self.midpoints[i - 1] } else { 0.0 };
            diag[i] = scale * ((left + self.midpoints[i]) / d + self.weights[i]);
            if i + 1 < m {
                off[i] = -scale * self.midpoints[i] / d;
            }
        }
        // Thomas algorithm; the matrix is symmetric positive definite.
        let mut c = vec![0.0; m];
        let mut y = vec![0.0; m];
        let mut denom = diag[0];
        assert!(denom > 0.0, "H1 Gram matrix must be positive definite");
        c[0] = if m > 1 { off[0] / denom } else { 0.0 };
        y[0] = dual[0] / denom;
        for i in 1..m {
            denom = diag[i] - off[i - 1] * c[i - 1];
            assert!(denom > 0.0, "H1 Gram matrix must be positive definite");
            c[i] = if i + 1 < m { off[i] / denom } else { 0.0 };
            y[i] = (dual[i] - off[i - 1] * y[i - 1]) / denom;
        }
        let mut g = vec![0.0; n];
        g[m - 1] = y[m - 1];
        for i in (0..m - 1).rev() {
            g[i] = y[i] - c[i] * g[i + 1];
        }
        g
    }

    /// Nodal first derivative: centered in the interior, one-sided second
    /// order at both ends.
    pub fn derivative(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n;
        let d = self.spacing;
        let mut out = vec![0.0; n];
        out[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * d);
        for i in 1..n - 1 {
            out[i] = (v[i + 1] - v[i - 1]) / (2.0 * d);
        }
        out[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * d);
        out
    }

    pub fn same_as(&self, other: &RadialGrid) -> bool {
        std::ptr::eq(self, other) || self.params() == other.params()
    }
}

/// Samples of a radial quantity on a grid, without boundary conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
}

impl GridField {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidFunction(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidFunction(format!("non-finite sample at node {i}")));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn to_csv(&self) -> String {
        samples_to_csv("r,value", self.grid.nodes(), &[&self.values])
    }
}

/// A sampled radial profile `u(r_i)` with the Dirichlet condition
/// `u(R) = 0`. Dereferences to the underlying [`GridField`].
#[derive(Debug, Clone, PartialEq)]
pub struct RadialFunction(GridField);

impl RadialFunction {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        let field = GridField::new(grid, values)?;
        let last = *field.values.last().expect("grid has nodes");
        if last != 0.0 {
            return Err(Error::InvalidFunction(format!(
                "Dirichlet condition violated: u(R) = {last}"
            )));
        }
        Ok(Self(field))
    }

    /// Samples `f` at the nodes and pins the last node to zero.
    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let mut values: Vec<f64> = grid.nodes().iter().map(|&r| f(r)).collect();
        *values.last_mut().expect("grid has nodes") = 0.0;
        Self::new(grid, values)
    }

    /// Overwrites the last node with zero before validating.
    pub fn with_dirichlet(grid: Arc<RadialGrid>, mut values: Vec<f64>) -> Result<Self> {
        if let Some(last) = values.last_mut() {
            *last = 0.0;
        }
        Self::new(grid, values)
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let n = grid.len();
        Self(GridField {
            grid,
            values: vec![0.0; n],
        })
    }

    pub fn field(&self) -> &GridField {
        &self.0
    }

    pub fn scaled(&self, t: f64) -> Self {
        self.map_values(|v| t * v)
    }

    /// `self + t·other`; both must share the grid.
    pub fn axpy(&self, t: f64, other: &RadialFunction) -> Result<Self> {
        check_same(self, other)?;
        let values = self
            .values()
            .iter()
            .zip(other.values())
            .map(|(a, b)| a + t * b)
            .collect();
        RadialFunction::new(self.grid().clone(), values)
    }

    pub fn max_value(&self) -> f64 {
        self.values().iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.values().iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.values().iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        let mut values: Vec<f64> = self.values().iter().map(|&v| f(v)).collect();
        *values.last_mut().expect("grid has nodes") = 0.0;
        Self(GridField {
            grid: self.grid().clone(),
            values,
        })
    }

    /// Parses the `r,value` CSV written by [`GridField::to_csv`].
    pub fn from_csv(grid: Arc<RadialGrid>, text: &str) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len());
        for (lineno, line) in text.lines().enumerate().skip(1) {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut cols = line.split(',');
            let _r = cols.next();
            let v: f64 = cols
                .next()
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::InvalidFunction(format!("bad CSV row {}", lineno + 1)))?;
            values.push(v);
        }
        Self::new(grid, values)
    }
}

impl std::ops::Deref for RadialFunction {
    type Target = GridField;

    fn deref(&self) -> &GridField {
        &self.0
    }
}

pub(crate) fn check_same(a: &GridField, b: &GridField) -> Result<()> {
    if a.grid().same_as(b.grid()) {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

pub(crate) fn samples_to_csv(header: &str, r: &[f64], columns: &[&[f64]]) -> String {
    let mut out = String::with_capacity(r.len() * 24 * (columns.len() + 1));
    out.push_str(header);
    out.push('\n');
    for (i, ri) in r.iter().enumerate() {
        write!(out, "{ri:.17e}").unwrap();
        for col in columns {
            write!(out, ",{:.17e}", col[i]).unwrap();
        }
        out.push('\n');
    }
    out
}

/// `2π ∫₀^R g(r) r dr`.
pub fn integrate_radial(g: &GridField) -> f64 {
    g.grid().integrate(g.values())
}

/// `‖u‖²_{H¹} = 2π ∫ (u′² + u²) r dr`.
pub fn h1_norm_sq(u: &RadialFunction) -> f64 {
    u.grid().h1_form(u.values(), u.values())
}

pub fn h1_norm(u: &RadialFunction) -> f64 {
    h1_norm_sq(u).sqrt()
}

/// `(2π ∫ |u|^p r dr)^{1/p}`.
pub fn lp_norm(u: &GridField, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidParameter {
            name: "p",
            reason: format!("L^p exponent must be at least 1, got {p}"),
        });
    }
    let s: Vec<f64> = u.values().iter().map(|v| v.abs().powf(p)).collect();
    Ok(u.grid().integrate(&s).powf(1.0 / p))
}

pub fn inner_h1(u: &RadialFunction, v: &RadialFunction) -> Result<f64> {
    check_same(u, v)?;
    Ok(u.grid().h1_form(u.values(), v.values()))
}

/// `2π ∫ u v r dr`.
pub fn inner_l2(u: &GridField, v: &GridField) -> Result<f64> {
    check_same(u, v)?;
    let prod: Vec<f64> = u.values().iter().zip(v.values()).map(|(a, b)| a * b).collect();
    Ok(u.grid().integrate(&prod))
}
