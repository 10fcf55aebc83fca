//! Adaptive quadrature built from a paired low/high order Gauss-Legendre
//! rule: each interval is integrated with 7 and 15 nodes and subdivided
//! until the two estimates agree to the requested tolerance.

use crate::error::{Error, Result};
use std::sync::OnceLock;

/// Gauss-Legendre nodes and weights on [-1, 1].
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// Nodes via Newton iteration on the Legendre polynomial, seeded with
    /// the Chebyshev estimate.
    pub fn new(n: usize) -> GaussRule {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let (_, dp) = legendre(n, x);
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        GaussRule { nodes, weights }
    }

    pub fn integrate(&self, f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut sum = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            sum += w * f(mid + half * x);
        }
        sum * half
    }
}

/// Value and derivative of P_n at x.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn rules() -> &'static (GaussRule, GaussRule) {
    static RULES: OnceLock<(GaussRule, GaussRule)> = OnceLock::new();
    RULES.get_or_init(|| (GaussRule::new(7), GaussRule::new(15)))
}

const MAX_DEPTH: usize = 48;

fn adapt(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
    depth: usize,
) -> Result<f64> {
    let (lo, hi) = rules();
    let coarse = lo.integrate(f, a, b);
    let fine = hi.integrate(f, a, b);
    let err = (fine - coarse).abs();
    if err <= tol || (b - a).abs() < 1e-15 * (a.abs() + b.abs() + 1.0) {
        return Ok(fine);
    }
    if depth >= MAX_DEPTH {
        return Err(Error::Numeric(format!(
            "quadrature failed to converge on [{a}, {b}]: residual {err:.3e} > {tol:.3e} at depth {depth}"
        )));
    }
    let mid = 0.5 * (a + b);
    Ok(adapt(f, a, mid, 0.5 * tol, depth + 1)? + adapt(f, mid, b, 0.5 * tol, depth + 1)?)
}

/// Integrate `f` over [a, b] to relative tolerance `rel_tol` with absolute
/// floor `abs_floor`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64, abs_floor: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (_, hi) = rules();
    let scale = hi.integrate(f, a, b).abs();
    let tol = (rel_tol * scale).max(abs_floor);
    adapt(f, a, b, tol, 0)
}

/// Default tolerances used for model-space volumes.
pub fn integrate_default(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> Result<f64> {
    integrate(f, a, b, 1e-12, 1e-14)
}
