//! The ambient model space realized on a single global chart: points are
//! coordinate n-tuples, the distance to the pole (the origin) is the
//! Euclidean norm of the tuple, and the metric is
//!
//! `g(V,W) = <V,xh><W,xh> + (w(r)^2/r^2) (<V,W> - <V,xh><W,xh>)`
//!
//! with `xh = X/|X|`. Radial geodesics are coordinate rays, so the chart
//! is exponential-normal at the pole.

use crate::error::{Error, Result};
use crate::model::{ModelSpace, POLE_RADIUS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChristoffelMode {
    /// Closed-form metric derivatives (uses `w` and `w'`).
    Analytic,
    /// Central differences of the metric matrix.
    FiniteDifference,
}

#[derive(Debug, Clone)]
pub struct AmbientChart {
    pub model: ModelSpace,
    pub christoffel_mode: ChristoffelMode,
}

/// See [`AmbientChart::scaled_metric`]. `g = scale * h` for the pairing
/// `h` computed by [`ScaledMetric::dot`].
pub struct ScaledMetric {
    xhat: Vec<f64>,
    sigma: f64,
    pub scale: f64,
}

impl ScaledMetric {
    pub fn dot(&self, v: &[f64], w: &[f64]) -> f64 {
        let dot: f64 = v.iter().zip(w).map(|(a, b)| a * b).sum();
        if self.xhat.is_empty() {
            return dot;
        }
        let vr: f64 = v.iter().zip(&self.xhat).map(|(a, b)| a * b).sum();
        let wr: f64 = w.iter().zip(&self.xhat).map(|(a, b)| a * b).sum();
        (self.sigma / self.scale) * (dot - vr * wr) + vr * wr / self.scale
    }

    pub fn norm(&self, v: &[f64]) -> f64 {
        self.dot(v, v).max(0.0).sqrt()
    }
}

impl AmbientChart {
    pub fn new(model: ModelSpace) -> AmbientChart {
        AmbientChart {
            model,
            christoffel_mode: ChristoffelMode::Analytic,
        }
    }

    pub fn dim(&self) -> usize {
        self.model.dim
    }

    pub fn radius(&self, x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Metric pairing of two tangent vectors at `x`.
    pub fn metric_at(&self, x: &[f64], v: &[f64], w: &[f64]) -> f64 {
        let r = self.radius(x);
        let dot: f64 = v.iter().zip(w).map(|(a, b)| a * b).sum();
        if r < 1e-12 {
            // smooth extension at the pole: coordinate dot product
            return dot;
        }
        let vr: f64 = v.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() / r;
        let wr: f64 = w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() / r;
        let wf = self.model.warping.eval(r, 0);
        let scale = (wf / r) * (wf / r);
        vr * wr + scale * (dot - vr * wr)
    }

    pub fn metric_norm(&self, x: &[f64], v: &[f64]) -> f64 {
        self.metric_at(x, v, v).max(0.0).sqrt()
    }

    /// The metric at `x` divided by `max(sigma, 1)` where `sigma` is the
    /// tangential weight `w^2/r^2`. Orthogonalizing in this uniformly
    /// rescaled metric keeps every pairing O(1) even where `w` grows
    /// exponentially, which the raw metric cannot offer; the orthogonal
    /// complement is unchanged.
    pub fn scaled_metric(&self, x: &[f64]) -> ScaledMetric {
        let r = self.radius(x);
        if r < 1e-12 {
            return ScaledMetric {
                xhat: Vec::new(),
                sigma: 1.0,
                scale: 1.0,
            };
        }
        let wf = self.model.warping.eval(r, 0);
        let sigma = (wf / r) * (wf / r);
        ScaledMetric {
            xhat: x.iter().map(|v| v / r).collect(),
            sigma,
            scale: sigma.max(1.0),
        }
    }

    /// Full metric matrix at `x`.
    pub fn metric_matrix(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let r = self.radius(x);
        let mut g = vec![0.0; n * n];
        if r < 1e-12 {
            for a in 0..n {
                g[a * n + a] = 1.0;
            }
            return g;
        }
        let wf = self.model.warping.eval(r, 0);
        let s = (wf / r) * (wf / r);
        let c = (1.0 - s) / (r * r);
        for a in 0..n {
            for b in 0..n {
                let mut v = c * x[a] * x[b];
                if a == b {
                    v += s;
                }
                g[a * n + b] = v;
            }
        }
        g
    }

    /// Unit radial gradient of the distance function at `x`.
    pub fn grad_r(&self, x: &[f64]) -> Result<Vec<f64>> {
        let r = self.radius(x);
        if r < POLE_RADIUS {
            return Err(Error::Domain(
                "grad_r undefined at the pole of the chart".into(),
            ));
        }
        Ok(x.iter().map(|v| v / r).collect())
    }

    fn check_away_from_pole(&self, x: &[f64]) -> Result<f64> {
        let r = self.radius(x);
        if r < POLE_RADIUS {
            return Err(Error::Domain(format!(
                "point at radius {r:.3e} is too close to the pole"
            )));
        }
        if r >= self.model.warping.domain_end() {
            return Err(Error::Domain(format!(
                "point at radius {r} is outside the chart domain"
            )));
        }
        Ok(r)
    }

    /// Christoffel symbols at `x`, flattened as `gamma[k*n*n + i*n + j]`.
    pub fn christoffels(&self, x: &[f64]) -> Vec<f64> {
        match self.christoffel_mode {
            ChristoffelMode::Analytic => self.christoffels_analytic(x),
            ChristoffelMode::FiniteDifference => self.christoffels_fd(x),
        }
    }

    fn christoffels_analytic(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let r = self.radius(x);
        if r < POLE_RADIUS {
            // normal coordinates at the pole: symbols vanish in the limit
            return vec![0.0; n * n * n];
        }
        let w = self.model.warping.eval(r, 0);
        let w1 = self.model.warping.eval(r, 1);
        let eta = w1 / w;
        let xh: Vec<f64> = x.iter().map(|v| v / r).collect();

        // By rotational symmetry the symbols have the isotropic form
        //   Gamma^k_ab = alpha (xh_a d_kb + xh_b d_ka)
        //              + beta d_ab xh_k + gamma xh_a xh_b xh_k.
        // alpha follows from nabla_V grad r = eta V on tangential V,
        // beta from Hess r(V,V) = eta g(V,V), gamma from the radial
        // geodesic condition 2 alpha + beta + gamma = 0. This avoids the
        // catastrophic cancellation of the generic assembly when w grows
        // exponentially.
        let alpha = eta - 1.0 / r;
        let beta = 1.0 / r - w * w1 / (r * r);
        let gam = -2.0 * alpha - beta;

        let mut gamma = vec![0.0; n * n * n];
        for k in 0..n {
            for i in 0..n {
                for j in i..n {
                    let mut v = beta * delta(i, j) * xh[k] + gam * xh[i] * xh[j] * xh[k];
                    if k == j {
                        v += alpha * xh[i];
                    }
                    if k == i {
                        v += alpha * xh[j];
                    }
                    gamma[k * n * n + i * n + j] = v;
                    gamma[k * n * n + j * n + i] = v;
                }
            }
        }
        gamma
    }

    fn christoffels_fd(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let r = self.radius(x);
        if r < POLE_RADIUS {
            return vec![0.0; n * n * n];
        }
        let h = 1e-4 * r.max(1.0);
        // dg[d] = finite-difference derivative of the metric matrix
        let mut dg = Vec::with_capacity(n);
        for d in 0..n {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[d] += h;
            xm[d] -= h;
            let gp = self.metric_matrix(&xp);
            let gm = self.metric_matrix(&xm);
            let col: Vec<f64> = gp
                .iter()
                .zip(&gm)
                .map(|(p, m)| (p - m) / (2.0 * h))
                .collect();
            dg.push(col);
        }
        let g = self.metric_matrix(x);
        let gm = nalgebra::DMatrix::from_row_slice(n, n, &g);
        let ginv = gm
            .try_inverse()
            .expect("warped metric is positive definite away from the pole");

        let mut gamma = vec![0.0; n * n * n];
        for k in 0..n {
            for i in 0..n {
                for j in i..n {
                    let mut sum = 0.0;
                    for l in 0..n {
                        sum += ginv[(k, l)]
                            * (dg[i][j * n + l] + dg[j][i * n + l] - dg[l][i * n + j]);
                    }
                    let v = 0.5 * sum;
                    gamma[k * n * n + i * n + j] = v;
                    gamma[k * n * n + j * n + i] = v;
                }
            }
        }
        gamma
    }

    /// Covariant derivative of a locally-defined vector field along `dir`
    /// at `x`. The field's coordinate Jacobian is obtained by central
    /// differences.
    pub fn covariant_derivative(
        &self,
        x: &[f64],
        dir: &[f64],
        field: &dyn Fn(&[f64]) -> Vec<f64>,
    ) -> Result<Vec<f64>> {
        let n = self.dim();
        let r = self.check_away_from_pole(x)?;
        let h = 1e-4 * r.max(1.0);
        let fx = field(x);
        let gamma = self.christoffels(x);
        let mut out = vec![0.0; n];
        for d in 0..n {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[d] += h;
            xm[d] -= h;
            let fp = field(&xp);
            let fm = field(&xm);
            for k in 0..n {
                out[k] += dir[d] * (fp[k] - fm[k]) / (2.0 * h);
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    out[k] += gamma[k * n * n + i * n + j] * dir[i] * fx[j];
                }
            }
        }
        Ok(out)
    }

    /// Covariant Hessian of the coordinate chart of an immersion:
    /// `d2phi + Gamma(dphi_i, dphi_j)` with everything supplied by the
    /// caller. `gamma` must come from `christoffels` at the same point.
    pub fn chart_second_covariant(
        &self,
        gamma: &[f64],
        d2phi: &[f64],
        dphi_i: &[f64],
        dphi_j: &[f64],
    ) -> Vec<f64> {
        let n = self.dim();
        let mut out = d2phi.to_vec();
        for k in 0..n {
            let mut acc = 0.0;
            for a in 0..n {
                for b in 0..n {
                    acc += gamma[k * n * n + a * n + b] * dphi_i[a] * dphi_j[b];
                }
            }
            out[k] += acc;
        }
        out
    }

    /// `Hess r (V, V)` by finite differences of `r` with Christoffel
    /// correction. Cross-check oracle for the closed-form model Hessian;
    /// the symbols are always taken from the finite-difference route so
    /// the two sides stay independent.
    pub fn hessian_r_fd(&self, x: &[f64], v: &[f64]) -> Result<f64> {
        let n = self.dim();
        let r = self.check_away_from_pole(x)?;
        let h = 1e-4 * r.max(1.0);
        if h < 1e-13 {
            return Err(Error::Numeric("finite-difference step underflow".into()));
        }
        let rad = |p: &[f64]| self.radius(p);
        // second coordinate derivatives of r along v: r(x + t v)'' at t=0
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        for k in 0..n {
            xp[k] = x[k] + h * v[k];
            xm[k] = x[k] - h * v[k];
        }
        let d2 = (rad(&xp) - 2.0 * rad(x) + rad(&xm)) / (h * h);
        let gamma = self.christoffels_fd(x);
        let xh: Vec<f64> = x.iter().map(|a| a / r).collect();
        let mut corr = 0.0;
        for k in 0..n {
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    acc += gamma[k * n * n + i * n + j] * v[i] * v[j];
                }
            }
            corr += acc * xh[k];
        }
        Ok(d2 - corr)
    }
}

fn delta(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{comparison_hessian_radial, WarpingFunction};
    use approx::assert_relative_eq;

    fn chart(b: f64, n: usize) -> AmbientChart {
        AmbientChart::new(ModelSpace::new(n, WarpingFunction::space_form(b)).unwrap())
    }

    #[test]
    fn euclidean_metric_is_dot_product() {
        let a = chart(0.0, 3);
        let x = [0.3, -1.2, 2.0];
        assert_relative_eq!(a.metric_at(&x, &[1.0, 0.0, 0.0], &[1.0, 0.0, 0.0]), 1.0);
        assert_relative_eq!(
            a.metric_at(&x, &[1.0, 2.0, 3.0], &[-1.0, 0.5, 2.0]),
            -1.0 + 1.0 + 6.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn hyperbolic_tangential_scaling() {
        let a = chart(-1.0, 3);
        let x = [1.0, 0.0, 0.0];
        let e2 = [0.0, 1.0, 0.0];
        assert_relative_eq!(
            a.metric_at(&x, &e2, &e2),
            1.0f64.sinh().powi(2),
            max_relative = 1e-14
        );
        // radial/tangential orthogonality
        let x2 = [2.0, 0.0, 0.0];
        assert_relative_eq!(a.metric_at(&x2, &[1.0, 0.0, 0.0], &e2), 0.0);
    }

    #[test]
    fn grad_r_is_unit_radial() {
        let a = chart(-1.0, 3);
        assert_eq!(a.grad_r(&[3.0, 0.0, 0.0]).unwrap(), vec![1.0, 0.0, 0.0]);
        let x = [1.2, -0.7, 2.2];
        let g = a.grad_r(&x).unwrap();
        assert_relative_eq!(a.metric_norm(&x, &g), 1.0, epsilon = 1e-13);
        assert!(a.grad_r(&[0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn flat_christoffels_vanish() {
        let a = chart(0.0, 3);
        for mode in [ChristoffelMode::Analytic, ChristoffelMode::FiniteDifference] {
            let mut a = a.clone();
            a.christoffel_mode = mode;
            let g = a.christoffels(&[0.7, -0.3, 1.9]);
            for v in g {
                assert!(v.abs() < 1e-10, "{v}");
            }
        }
    }

    #[test]
    fn analytic_and_fd_christoffels_agree() {
        let a = chart(-1.0, 3);
        let x = [0.8, -0.5, 1.1];
        let ga = a.christoffels_analytic(&x);
        let gf = a.christoffels_fd(&x);
        for (p, q) in ga.iter().zip(&gf) {
            assert_relative_eq!(p, q, epsilon = 1e-6);
        }
    }

    #[test]
    fn constant_field_flat_derivative() {
        let a = chart(0.0, 3);
        let d = a
            .covariant_derivative(&[1.0, 2.0, 0.5], &[0.3, 0.2, 0.1], &|_| {
                vec![1.0, -2.0, 0.7]
            })
            .unwrap();
        for v in d {
            assert!(v.abs() < 1e-10);
        }
    }

    #[test]
    fn radial_field_is_geodesic() {
        let a = chart(-1.0, 3);
        let x = [0.9, 0.4, -0.6];
        let gr = a.grad_r(&x).unwrap();
        let d = a
            .covariant_derivative(&x, &gr, &|p| {
                let r = a.radius(p);
                p.iter().map(|v| v / r).collect()
            })
            .unwrap();
        for v in d {
            assert!(v.abs() < 1e-6, "{v}");
        }
    }

    #[test]
    fn tangential_field_radial_component() {
        // for the constant coordinate field e2 at x = (1,0,0):
        // <nabla_{e2} e2, grad r> = dd_22 r - Hess r(e2, e2)
        //                        = 1 - eta(1) g(e2, e2) = 1 - sinh(1) cosh(1)
        let a = chart(-1.0, 3);
        let x = [1.0, 0.0, 0.0];
        let d = a
            .covariant_derivative(&x, &[0.0, 1.0, 0.0], &|_| vec![0.0, 1.0, 0.0])
            .unwrap();
        let gr = a.grad_r(&x).unwrap();
        let radial = a.metric_at(&x, &d, &gr);
        assert_relative_eq!(radial, 1.0 - 1.0f64.sinh() * 1.0f64.cosh(), epsilon = 1e-5);
    }

    #[test]
    fn metric_compatibility_and_torsion() {
        let a = chart(-0.5, 3);
        let x = [0.7, 1.1, -0.4];
        let fy = |p: &[f64]| vec![p[1], p[2] * p[0], 1.0 + p[0]];
        let fz = |p: &[f64]| vec![0.3, p[0] * p[0], -p[1]];
        let dir = [0.2, -0.5, 0.8];
        // compatibility: D(g(Y,Z)) = g(DY,Z) + g(Y,DZ)
        let h = 1e-5;
        let mut num = 0.0;
        for d in 0..3 {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[d] += h;
            xm[d] -= h;
            let gp = a.metric_at(&xp, &fy(&xp), &fz(&xp));
            let gm = a.metric_at(&xm, &fy(&xm), &fz(&xm));
            num += dir[d] * (gp - gm) / (2.0 * h);
        }
        let dy = a.covariant_derivative(&x, &dir, &fy).unwrap();
        let dz = a.covariant_derivative(&x, &dir, &fz).unwrap();
        let rhs = a.metric_at(&x, &dy, &fz(&x)) + a.metric_at(&x, &fy(&x), &dz);
        assert_relative_eq!(num, rhs, epsilon = 1e-4);

        // torsion-freeness on coordinate-expressed fields:
        // nabla_Y Z - nabla_Z Y = [Y, Z]
        let dzy = a.covariant_derivative(&x, &fy(&x), &fz).unwrap();
        let dyz = a.covariant_derivative(&x, &fz(&x), &fy).unwrap();
        let mut bracket = vec![0.0; 3];
        for k in 0..3 {
            for d in 0..3 {
                let mut xp = x.to_vec();
                let mut xm = x.to_vec();
                xp[d] += h;
                xm[d] -= h;
                bracket[k] += fy(&x)[d] * (fz(&xp)[k] - fz(&xm)[k]) / (2.0 * h)
                    - fz(&x)[d] * (fy(&xp)[k] - fy(&xm)[k]) / (2.0 * h);
            }
        }
        for k in 0..3 {
            assert_relative_eq!(dzy[k] - dyz[k], bracket[k], epsilon = 1e-4);
        }
    }

    #[test]
    fn hessian_fd_matches_model_formula() {
        let flat = chart(0.0, 3);
        let x = [2.0, 0.0, 0.0];
        let v = [0.0, 1.0, 0.0];
        assert_relative_eq!(flat.hessian_r_fd(&x, &v).unwrap(), 0.5, epsilon = 1e-4);
        // radial direction is annihilated
        assert_relative_eq!(
            flat.hessian_r_fd(&x, &[1.0, 0.0, 0.0]).unwrap(),
            0.0,
            epsilon = 1e-6
        );
        let hyp = chart(-1.0, 3);
        let x = [1.0, 0.0, 0.0];
        // Hess r(v, v) = eta(1) |v|_g^2 with |e2|_g^2 = sinh^2(1)
        let got = hyp.hessian_r_fd(&x, &v).unwrap();
        assert_relative_eq!(got, 1.0f64.sinh() * 1.0f64.cosh(), epsilon = 1e-4);
        // general direction against the comparison formula
        let x = [0.9, -0.3, 0.8];
        let v = [0.4, 1.0, -0.2];
        let r = hyp.radius(&x);
        let norm = hyp.metric_norm(&x, &v);
        let radial = hyp.metric_at(&x, &v, &hyp.grad_r(&x).unwrap());
        let expect =
            comparison_hessian_radial(&hyp.model.warping, r, norm, radial).unwrap();
        assert_relative_eq!(hyp.hessian_r_fd(&x, &v).unwrap(), expect, epsilon = 1e-4);
    }
}
