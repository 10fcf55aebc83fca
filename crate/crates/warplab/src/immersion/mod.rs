//! Parametric immersions into an ambient chart: induced metric, orthonormal
//! tangent frames, second fundamental form, extrinsic distance data and the
//! restricted Hessian of radial functions.

mod builtins;
mod profile;
mod spherical;

pub use builtins::Builtin;
pub use profile::ProfileSolution;

use crate::ambient::AmbientChart;
use crate::error::{Error, Result};
use crate::model::POLE_RADIUS;
use nalgebra::DMatrix;

/// One parameter axis of the chart domain. Wrap axes are periodic with
/// period `hi - lo`.
#[derive(Debug, Clone)]
pub struct ParamAxis {
    pub lo: f64,
    pub hi: f64,
    pub wrap: bool,
}

/// Coordinate chart of an immersion. Analytic derivatives are optional;
/// central differences are used where they are absent.
pub trait Chart: Send + Sync {
    fn param_dim(&self) -> usize;
    fn ambient_dim(&self) -> usize;
    fn point(&self, u: &[f64]) -> Vec<f64>;
    fn jacobian(&self, _u: &[f64]) -> Option<Vec<Vec<f64>>> {
        None
    }
    fn second(&self, _u: &[f64], _i: usize, _j: usize) -> Option<Vec<f64>> {
        None
    }
}

/// A scalar function of the extrinsic distance with two derivatives,
/// used for restricted-Hessian scans.
pub trait RadialFunction: Sync {
    fn d1(&self, r: f64) -> f64;
    fn d2(&self, r: f64) -> f64;
}

/// `F(r) = r^2 / 2`.
pub struct HalfSquare;

impl RadialFunction for HalfSquare {
    fn d1(&self, r: f64) -> f64 {
        r
    }
    fn d2(&self, _r: f64) -> f64 {
        1.0
    }
}

/// `F(r) = integral_0^r w`, the convexity potential of the warping
/// function: `F' = w`, `F'' = w'`.
pub struct WarpIntegral<'a>(pub &'a crate::model::WarpingFunction);

impl RadialFunction for WarpIntegral<'_> {
    fn d1(&self, r: f64) -> f64 {
        self.0.eval(r, 0)
    }
    fn d2(&self, r: f64) -> f64 {
        self.0.eval(r, 1)
    }
}

/// Per-point geometric data cached on mesh vertices.
#[derive(Debug, Clone)]
pub struct VertexGeometry {
    pub point: Vec<f64>,
    pub r: f64,
    /// m x m induced metric, row-major.
    pub induced_metric: Vec<f64>,
    pub sff_norm: f64,
    pub mean_curvature_norm: f64,
    pub grad_r_tangent_norm: f64,
}

pub struct ParametricImmersion {
    pub name: String,
    pub ambient: AmbientChart,
    pub domain: Vec<ParamAxis>,
    chart: Box<dyn Chart>,
    fd_step: f64,
}

/// Tangent and normal frames orthonormal in the rescaled pairing
/// `h = g / scale`; the g-orthonormal versions are the vectors divided by
/// `sqrt(scale)`. Working in `h` keeps the orthogonalization stable where
/// the warping is large.
struct Frame {
    /// Jacobian columns, one ambient vector per parameter direction.
    jac: Vec<Vec<f64>>,
    /// h-orthonormal tangent frame vectors in ambient components.
    vectors: Vec<Vec<f64>>,
    /// Coefficients of the frame over the Jacobian columns:
    /// `vectors[a] = sum_i coeffs[a][i] * jac[i]`.
    coeffs: Vec<Vec<f64>>,
    /// h-orthonormal basis of the normal space (n - m vectors).
    normals: Vec<Vec<f64>>,
    h: crate::ambient::ScaledMetric,
}

impl ParametricImmersion {
    pub fn new(
        name: impl Into<String>,
        ambient: AmbientChart,
        chart: Box<dyn Chart>,
        domain: Vec<ParamAxis>,
    ) -> Result<ParametricImmersion> {
        let name = name.into();
        if chart.param_dim() != domain.len() {
            return Err(Error::InvalidArgument(format!(
                "chart of `{name}` has {} parameters but the domain lists {} axes",
                chart.param_dim(),
                domain.len()
            )));
        }
        if chart.ambient_dim() != ambient.dim() {
            return Err(Error::InvalidArgument(format!(
                "chart of `{name}` maps into dimension {} but the ambient space has dimension {}",
                chart.ambient_dim(),
                ambient.dim()
            )));
        }
        if chart.param_dim() >= ambient.dim() {
            return Err(Error::InvalidArgument(format!(
                "immersion `{name}` requires n > m, got m={} n={}",
                chart.param_dim(),
                ambient.dim()
            )));
        }
        Ok(ParametricImmersion {
            name,
            ambient,
            domain,
            chart,
            fd_step: 1e-4,
        })
    }

    /// Immersion whose chart components are expressions over `u1..um`.
    pub fn from_expressions(
        name: impl Into<String>,
        ambient: AmbientChart,
        sources: &[String],
        param_dim: usize,
        domain: Vec<ParamAxis>,
    ) -> Result<ParametricImmersion> {
        let vars: Vec<String> = (1..=param_dim).map(|i| format!("u{i}")).collect();
        let var_refs: Vec<&str> = vars.iter().map(|s| s.as_str()).collect();
        let mut exprs = Vec::with_capacity(sources.len());
        for s in sources {
            exprs.push(crate::expr::parse(s, &var_refs)?);
        }
        let chart = ExprChart {
            exprs,
            param_dim,
        };
        ParametricImmersion::new(name, ambient, Box::new(chart), domain)
    }

    pub fn param_dim(&self) -> usize {
        self.chart.param_dim()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient.dim()
    }

    pub fn point(&self, u: &[f64]) -> Vec<f64> {
        self.chart.point(u)
    }

    pub fn jacobian(&self, u: &[f64]) -> Vec<Vec<f64>> {
        if let Some(j) = self.chart.jacobian(u) {
            return j;
        }
        let m = self.param_dim();
        let mut out = Vec::with_capacity(m);
        for i in 0..m {
            let h = self.fd_step * (1.0 + u[i].abs());
            let mut up = u.to_vec();
            let mut um = u.to_vec();
            up[i] += h;
            um[i] -= h;
            let pp = self.chart.point(&up);
            let pm = self.chart.point(&um);
            out.push(
                pp.iter()
                    .zip(&pm)
                    .map(|(a, b)| (a - b) / (2.0 * h))
                    .collect(),
            );
        }
        out
    }

    fn second(&self, u: &[f64], i: usize, j: usize) -> Vec<f64> {
        if let Some(s) = self.chart.second(u, i, j) {
            return s;
        }
        let hi = self.fd_step * (1.0 + u[i].abs());
        if i == j {
            let mut up = u.to_vec();
            let mut um = u.to_vec();
            up[i] += hi;
            um[i] -= hi;
            let pp = self.chart.point(&up);
            let p0 = self.chart.point(u);
            let pm = self.chart.point(&um);
            return pp
                .iter()
                .zip(&p0)
                .zip(&pm)
                .map(|((a, b), c)| (a - 2.0 * b + c) / (hi * hi))
                .collect();
        }
        let hj = self.fd_step * (1.0 + u[j].abs());
        let mut upp = u.to_vec();
        let mut upm = u.to_vec();
        let mut ump = u.to_vec();
        let mut umm = u.to_vec();
        upp[i] += hi;
        upp[j] += hj;
        upm[i] += hi;
        upm[j] -= hj;
        ump[i] -= hi;
        ump[j] += hj;
        umm[i] -= hi;
        umm[j] -= hj;
        let (a, b, c, d) = (
            self.chart.point(&upp),
            self.chart.point(&upm),
            self.chart.point(&ump),
            self.chart.point(&umm),
        );
        (0..self.ambient_dim())
            .map(|k| (a[k] - b[k] - c[k] + d[k]) / (4.0 * hi * hj))
            .collect()
    }

    /// Pullback metric `g_ij = g(dphi_i, dphi_j)` at `u`.
    pub fn induced_metric(&self, u: &[f64]) -> Result<Vec<f64>> {
        let p = self.point(u);
        let jac = self.jacobian(u);
        self.induced_metric_from(&p, &jac)
    }

    fn induced_metric_from(&self, p: &[f64], jac: &[Vec<f64>]) -> Result<Vec<f64>> {
        let m = self.param_dim();
        let mut g = vec![0.0; m * m];
        for i in 0..m {
            for j in i..m {
                let v = self.ambient.metric_at(p, &jac[i], &jac[j]);
                g[i * m + j] = v;
                g[j * m + i] = v;
            }
        }
        let det = DMatrix::from_row_slice(m, m, &g).determinant();
        if det <= 1e-12 {
            return Err(Error::Degenerate(format!(
                "induced metric determinant {det:.3e} at parameter {p:?}"
            )));
        }
        Ok(g)
    }

    fn frame_at(&self, p: &[f64], jac: &[Vec<f64>]) -> Result<Frame> {
        let m = self.param_dim();
        let n = self.ambient_dim();
        let h = self.ambient.scaled_metric(p);
        let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut coeffs: Vec<Vec<f64>> = Vec::with_capacity(m);
        for a in 0..m {
            let mut v = jac[a].clone();
            let mut c = vec![0.0; m];
            c[a] = 1.0;
            // two rounds of Gram-Schmidt for orthogonality to roundoff
            for _ in 0..2 {
                for b in 0..a {
                    let proj = h.dot(&v, &vectors[b]);
                    for k in 0..n {
                        v[k] -= proj * vectors[b][k];
                    }
                    for i in 0..m {
                        c[i] -= proj * coeffs[b][i];
                    }
                }
            }
            let norm = h.norm(&v);
            if norm < 1e-9 {
                return Err(Error::Degenerate(format!(
                    "tangent vectors are linearly dependent (norm {norm:.3e})"
                )));
            }
            for k in 0..n {
                v[k] /= norm;
            }
            for i in 0..m {
                c[i] /= norm;
            }
            vectors.push(v);
            coeffs.push(c);
        }
        // normal basis from coordinate seeds, greedily in index order
        let mut normals: Vec<Vec<f64>> = Vec::with_capacity(n - m);
        for k in 0..n {
            if normals.len() == n - m {
                break;
            }
            let mut v = vec![0.0; n];
            v[k] = 1.0;
            for _ in 0..2 {
                for e in vectors.iter().chain(normals.iter()) {
                    let proj = h.dot(&v, e);
                    for (vk, ek) in v.iter_mut().zip(e) {
                        *vk -= proj * ek;
                    }
                }
            }
            let norm = h.norm(&v);
            if norm > 1e-3 {
                for vk in &mut v {
                    *vk /= norm;
                }
                normals.push(v);
            }
        }
        if normals.len() != n - m {
            return Err(Error::Degenerate(format!(
                "could not complete a normal basis ({} of {} directions)",
                normals.len(),
                n - m
            )));
        }
        Ok(Frame {
            jac: jac.to_vec(),
            vectors,
            coeffs,
            normals,
            h,
        })
    }

    /// Extrinsic distance and the norm of the tangential part of the
    /// ambient radial gradient.
    pub fn extrinsic_quantities(&self, u: &[f64]) -> Result<(f64, f64)> {
        let p = self.point(u);
        let r = self.ambient.radius(&p);
        if r < POLE_RADIUS {
            return Err(Error::Domain(
                "extrinsic quantities undefined at the pole".into(),
            ));
        }
        let jac = self.jacobian(u);
        let frame = self.frame_at(&p, &jac)?;
        Ok((r, self.grad_r_tangent_norm(&p, r, &frame)))
    }

    fn grad_r_tangent_norm(&self, p: &[f64], r: f64, frame: &Frame) -> f64 {
        let gr: Vec<f64> = p.iter().map(|v| v / r).collect();
        let mut sq = 0.0;
        for e in &frame.vectors {
            // g-orthonormal component: sqrt(scale) * h(grad r, e_h)
            let c = frame.h.scale.sqrt() * frame.h.dot(&gr, e);
            sq += c * c;
        }
        sq.sqrt().min(1.0)
    }

    /// Second fundamental form over coordinate direction pairs, expanded
    /// in the g-orthonormal normal basis: `b[i*m+j][nu]` is the component
    /// of `B(dphi_i, dphi_j)` along the nu-th normal. Pairing against the
    /// normal basis (instead of subtracting the huge tangential part and
    /// keeping a residual vector) is what stays accurate where the
    /// warping, and with it the covariant derivative, grows large.
    fn sff_coordinate(&self, u: &[f64], p: &[f64], frame: &Frame) -> Vec<Vec<f64>> {
        let m = self.param_dim();
        let gamma = self.ambient.christoffels(p);
        let root_scale = frame.h.scale.sqrt();
        let codim = frame.normals.len();
        let mut out = vec![vec![0.0; codim]; m * m];
        for i in 0..m {
            for j in i..m {
                let d2 = self.second(u, i, j);
                let cov =
                    self.ambient
                        .chart_second_covariant(&gamma, &d2, &frame.jac[i], &frame.jac[j]);
                // g(cov, n^g) = sqrt(scale) h(cov, n^h)
                let b: Vec<f64> = frame
                    .normals
                    .iter()
                    .map(|nh| root_scale * frame.h.dot(&cov, nh))
                    .collect();
                out[i * m + j] = b.clone();
                out[j * m + i] = b;
            }
        }
        out
    }

    /// Hilbert-Schmidt norm of the second fundamental form at `u`.
    pub fn sff_norm(&self, u: &[f64]) -> Result<f64> {
        Ok(self.vertex_geometry(u)?.sff_norm)
    }

    /// All per-point quantities needed by the mesher in one pass.
    pub fn vertex_geometry(&self, u: &[f64]) -> Result<VertexGeometry> {
        let m = self.param_dim();
        let p = self.point(u);
        let r = self.ambient.radius(&p);
        let jac = self.jacobian(u);
        let induced_metric = self.induced_metric_from(&p, &jac)?;
        let frame = self.frame_at(&p, &jac)?;
        let b = self.sff_coordinate(u, &p, &frame);
        let codim = frame.normals.len();
        let ginv = DMatrix::from_row_slice(m, m, &induced_metric)
            .try_inverse()
            .ok_or_else(|| {
                Error::Degenerate("induced metric is numerically singular".into())
            })?;
        // |B|^2 = g^{ik} g^{jl} <B_ij, B_kl>,  H = g^{ij} B_ij
        let mut sff_sq = 0.0;
        let mut mean = vec![0.0; codim];
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    for l in 0..m {
                        let pair: f64 = b[i * m + j]
                            .iter()
                            .zip(&b[k * m + l])
                            .map(|(x, y)| x * y)
                            .sum();
                        sff_sq += ginv[(i, k)] * ginv[(j, l)] * pair;
                    }
                }
                for nu in 0..codim {
                    mean[nu] += ginv[(i, j)] * b[i * m + j][nu];
                }
            }
        }
        // the pole sits in the image only for charts tangent to radial rays,
        // where the tangential gradient norm tends to 1
        let grad_r_tangent_norm = if r < POLE_RADIUS {
            1.0
        } else {
            self.grad_r_tangent_norm(&p, r, &frame)
        };
        Ok(VertexGeometry {
            point: p.clone(),
            r,
            induced_metric,
            sff_norm: sff_sq.max(0.0).sqrt(),
            mean_curvature_norm: mean.iter().map(|x| x * x).sum::<f64>().sqrt(),
            grad_r_tangent_norm,
        })
    }

    /// Hessian of `F(r)` restricted to the submanifold, assembled from the
    /// model-space Hessian of `r` and the second fundamental form, in an
    /// orthonormal tangent frame.
    pub fn restricted_hessian(&self, u: &[f64], f: &dyn RadialFunction) -> Result<DMatrix<f64>> {
        let m = self.param_dim();
        let p = self.point(u);
        let r = self.ambient.radius(&p);
        if r < POLE_RADIUS {
            return Err(Error::Domain(
                "restricted Hessian undefined at the pole".into(),
            ));
        }
        let jac = self.jacobian(u);
        let frame = self.frame_at(&p, &jac)?;
        let b = self.sff_coordinate(u, &p, &frame);
        let gr: Vec<f64> = p.iter().map(|v| v / r).collect();
        // components over the g-orthonormal frame
        let x: Vec<f64> = frame
            .vectors
            .iter()
            .map(|e| frame.h.scale.sqrt() * frame.h.dot(&gr, e))
            .collect();
        // radial pairing with B, pre-contracted on coordinate pairs:
        // g(grad r, B_ij) = sum_nu b_ij^nu g(grad r, n_nu^g)
        let grn: Vec<f64> = frame
            .normals
            .iter()
            .map(|nh| frame.h.scale.sqrt() * frame.h.dot(&gr, nh))
            .collect();
        let br: Vec<f64> = (0..m * m)
            .map(|ij| b[ij].iter().zip(&grn).map(|(x, y)| x * y).sum())
            .collect();
        let eta = self.ambient.model.warping.eta(r)?;
        let f1 = f.d1(r);
        let f2 = f.d2(r);
        let mut out = DMatrix::zeros(m, m);
        for a in 0..m {
            for c in a..m {
                let hess_n = eta * (if a == c { 1.0 } else { 0.0 } - x[a] * x[c]);
                // g(grad r, B(e_a^g, e_c^g)) over h-frame coefficients
                let mut bterm = 0.0;
                for i in 0..m {
                    for j in 0..m {
                        bterm += frame.coeffs[a][i] * frame.coeffs[c][j] * br[i * m + j];
                    }
                }
                let v = f2 * x[a] * x[c] + f1 * (hess_n + bterm);
                out[(a, c)] = v;
                out[(c, a)] = v;
            }
        }
        Ok(out)
    }
}

struct ExprChart {
    exprs: Vec<crate::expr::Expr>,
    param_dim: usize,
}

impl Chart for ExprChart {
    fn param_dim(&self) -> usize {
        self.param_dim
    }
    fn ambient_dim(&self) -> usize {
        self.exprs.len()
    }
    fn point(&self, u: &[f64]) -> Vec<f64> {
        self.exprs.iter().map(|e| e.eval(u)).collect()
    }
}
