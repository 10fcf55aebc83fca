//! Built-in example immersions with analytic chart derivatives.

use super::profile::ProfileSolution;
use super::spherical::SphericalChart;
use super::{Chart, ParamAxis, ParametricImmersion};
use crate::ambient::AmbientChart;
use crate::error::{Error, Result};
use crate::model::{ModelSpace, WarpingFunction};
use std::f64::consts::PI;

/// Polar-angle clip keeping grid vertices away from coordinate
/// degeneracies of spherical charts.
const ANGLE_CLIP: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub enum Builtin {
    EuclideanPlane { m: usize, n: usize },
    Catenoid { scale: f64 },
    HigherCatenoid { m: usize },
    HyperbolicHyperplane { m: usize, n: usize, b: f64 },
    RoundSphere { radius: f64 },
}

impl Builtin {
    /// Parse `name(args)` forms: `euclidean_plane(2,3)`, `catenoid`,
    /// `higher_catenoid(3)`, `hyperbolic_hyperplane(2,3,-1)`,
    /// `round_sphere(1.0)`.
    pub fn parse(src: &str) -> Result<Builtin> {
        let src = src.trim();
        let (name, args) = match src.find('(') {
            Some(i) => {
                let rest = src[i..].trim();
                if !rest.ends_with(')') {
                    return Err(Error::Config(format!("malformed immersion spec `{src}`")));
                }
                let inner = &rest[1..rest.len() - 1];
                let args: Result<Vec<f64>> = inner
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| {
                        s.trim().parse::<f64>().map_err(|_| {
                            Error::Config(format!("bad numeric argument `{s}` in `{src}`"))
                        })
                    })
                    .collect();
                (src[..i].trim(), args?)
            }
            None => (src, Vec::new()),
        };
        let want = |k: usize| -> Result<()> {
            if args.len() == k {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "`{name}` takes {k} argument(s), got {}",
                    args.len()
                )))
            }
        };
        let as_dim = |v: f64, what: &str| -> Result<usize> {
            if v.fract() == 0.0 && v >= 2.0 && v < 32.0 {
                Ok(v as usize)
            } else {
                Err(Error::Config(format!("{what} must be an integer >= 2, got {v}")))
            }
        };
        match name {
            "euclidean_plane" => {
                want(2)?;
                Ok(Builtin::EuclideanPlane {
                    m: as_dim(args[0], "m")?,
                    n: as_dim(args[1], "n")?,
                })
            }
            "catenoid" => {
                if args.is_empty() {
                    Ok(Builtin::Catenoid { scale: 1.0 })
                } else {
                    want(1)?;
                    Ok(Builtin::Catenoid { scale: args[0] })
                }
            }
            "higher_catenoid" => {
                want(1)?;
                Ok(Builtin::HigherCatenoid {
                    m: as_dim(args[0], "m")?,
                })
            }
            "hyperbolic_hyperplane" => {
                want(3)?;
                Ok(Builtin::HyperbolicHyperplane {
                    m: as_dim(args[0], "m")?,
                    n: as_dim(args[1], "n")?,
                    b: args[2],
                })
            }
            "round_sphere" => {
                want(1)?;
                Ok(Builtin::RoundSphere { radius: args[0] })
            }
            other => Err(Error::Config(format!("unknown builtin immersion `{other}`"))),
        }
    }

    pub fn build(&self) -> Result<ParametricImmersion> {
        match *self {
            Builtin::EuclideanPlane { m, n } => {
                let ambient = AmbientChart::new(ModelSpace::new(
                    n,
                    WarpingFunction::space_form(0.0),
                )?);
                let domain = (0..m)
                    .map(|_| ParamAxis {
                        lo: -10.5,
                        hi: 10.5,
                        wrap: false,
                    })
                    .collect();
                ParametricImmersion::new(
                    format!("euclidean_plane({m},{n})"),
                    ambient,
                    Box::new(PlaneChart { m, n }),
                    domain,
                )
            }
            Builtin::Catenoid { scale } => {
                if !(scale > 0.0) {
                    return Err(Error::Config(format!(
                        "catenoid scale must be positive, got {scale}"
                    )));
                }
                let ambient = AmbientChart::new(ModelSpace::new(
                    3,
                    WarpingFunction::space_form(0.0),
                )?);
                let domain = vec![
                    ParamAxis {
                        lo: -4.0,
                        hi: 4.0,
                        wrap: false,
                    },
                    ParamAxis {
                        lo: 0.0,
                        hi: 2.0 * PI,
                        wrap: true,
                    },
                ];
                ParametricImmersion::new(
                    "catenoid",
                    ambient,
                    Box::new(CatenoidChart { scale }),
                    domain,
                )
            }
            Builtin::HigherCatenoid { m } => {
                let profile = ProfileSolution::solve(m, 22.0)?;
                let ambient = AmbientChart::new(ModelSpace::new(
                    m + 1,
                    WarpingFunction::space_form(0.0),
                )?);
                let mut domain = vec![ParamAxis {
                    lo: -10.0,
                    hi: 10.0,
                    wrap: false,
                }];
                // polar angles of S^{m-1}, last axis azimuthal and periodic
                for _ in 0..m.saturating_sub(2) {
                    domain.push(ParamAxis {
                        lo: ANGLE_CLIP,
                        hi: PI - ANGLE_CLIP,
                        wrap: false,
                    });
                }
                domain.push(ParamAxis {
                    lo: 0.0,
                    hi: 2.0 * PI,
                    wrap: true,
                });
                ParametricImmersion::new(
                    format!("higher_catenoid({m})"),
                    ambient,
                    Box::new(HigherCatenoidChart {
                        profile,
                        sphere: SphericalChart { dim: m },
                    }),
                    domain,
                )
            }
            Builtin::HyperbolicHyperplane { m, n, b } => {
                if !(b < 0.0) {
                    return Err(Error::Config(format!(
                        "hyperbolic_hyperplane needs b < 0, got {b}"
                    )));
                }
                let ambient =
                    AmbientChart::new(ModelSpace::new(n, WarpingFunction::space_form(b))?);
                let domain = (0..m)
                    .map(|_| ParamAxis {
                        lo: -10.5,
                        hi: 10.5,
                        wrap: false,
                    })
                    .collect();
                ParametricImmersion::new(
                    format!("hyperbolic_hyperplane({m},{n},{b})"),
                    ambient,
                    Box::new(PlaneChart { m, n }),
                    domain,
                )
            }
            Builtin::RoundSphere { radius } => {
                if !(radius > 0.0) {
                    return Err(Error::Config(format!(
                        "sphere radius must be positive, got {radius}"
                    )));
                }
                let ambient = AmbientChart::new(ModelSpace::new(
                    3,
                    WarpingFunction::space_form(0.0),
                )?);
                let domain = vec![
                    ParamAxis {
                        lo: ANGLE_CLIP,
                        hi: PI - ANGLE_CLIP,
                        wrap: false,
                    },
                    ParamAxis {
                        lo: 0.0,
                        hi: 2.0 * PI,
                        wrap: true,
                    },
                ];
                ParametricImmersion::new(
                    format!("round_sphere({radius})"),
                    ambient,
                    Box::new(SphereChart {
                        radius,
                        sphere: SphericalChart { dim: 3 },
                    }),
                    domain,
                )
            }
        }
    }
}

/// Totally geodesic coordinate m-plane u -> (u, 0, ..., 0) in dimension n.
struct PlaneChart {
    m: usize,
    n: usize,
}

impl Chart for PlaneChart {
    fn param_dim(&self) -> usize {
        self.m
    }
    fn ambient_dim(&self) -> usize {
        self.n
    }
    fn point(&self, u: &[f64]) -> Vec<f64> {
        let mut p = vec![0.0; self.n];
        p[..self.m].copy_from_slice(u);
        p
    }
    fn jacobian(&self, _u: &[f64]) -> Option<Vec<Vec<f64>>> {
        Some(
            (0..self.m)
                .map(|i| {
                    let mut v = vec![0.0; self.n];
                    v[i] = 1.0;
                    v
                })
                .collect(),
        )
    }
    fn second(&self, _u: &[f64], _i: usize, _j: usize) -> Option<Vec<f64>> {
        Some(vec![0.0; self.n])
    }
}

/// (v, theta) -> a (cosh v cos theta, cosh v sin theta, v)
struct CatenoidChart {
    scale: f64,
}

impl Chart for CatenoidChart {
    fn param_dim(&self) -> usize {
        2
    }
    fn ambient_dim(&self) -> usize {
        3
    }
    fn point(&self, u: &[f64]) -> Vec<f64> {
        let (v, th) = (u[0], u[1]);
        let a = self.scale;
        vec![a * v.cosh() * th.cos(), a * v.cosh() * th.sin(), a * v]
    }
    fn jacobian(&self, u: &[f64]) -> Option<Vec<Vec<f64>>> {
        let (v, th) = (u[0], u[1]);
        let a = self.scale;
        Some(vec![
            vec![a * v.sinh() * th.cos(), a * v.sinh() * th.sin(), a],
            vec![-a * v.cosh() * th.sin(), a * v.cosh() * th.cos(), 0.0],
        ])
    }
    fn second(&self, u: &[f64], i: usize, j: usize) -> Option<Vec<f64>> {
        let (v, th) = (u[0], u[1]);
        let a = self.scale;
        Some(match (i.min(j), i.max(j)) {
            (0, 0) => vec![a * v.cosh() * th.cos(), a * v.cosh() * th.sin(), 0.0],
            (0, 1) => vec![-a * v.sinh() * th.sin(), a * v.sinh() * th.cos(), 0.0],
            _ => vec![-a * v.cosh() * th.cos(), -a * v.cosh() * th.sin(), 0.0],
        })
    }
}

/// Sphere of radius R about the chart origin; the extrinsic distance is
/// identically R and the radial gradient is everywhere normal.
struct SphereChart {
    radius: f64,
    sphere: SphericalChart,
}

impl Chart for SphereChart {
    fn param_dim(&self) -> usize {
        2
    }
    fn ambient_dim(&self) -> usize {
        3
    }
    fn point(&self, u: &[f64]) -> Vec<f64> {
        self.sphere
            .value(u)
            .into_iter()
            .map(|x| self.radius * x)
            .collect()
    }
    fn jacobian(&self, u: &[f64]) -> Option<Vec<Vec<f64>>> {
        Some(
            (0..2)
                .map(|a| {
                    self.sphere
                        .d1(u, a)
                        .into_iter()
                        .map(|x| self.radius * x)
                        .collect()
                })
                .collect(),
        )
    }
    fn second(&self, u: &[f64], i: usize, j: usize) -> Option<Vec<f64>> {
        Some(
            self.sphere
                .d2(u, i, j)
                .into_iter()
                .map(|x| self.radius * x)
                .collect(),
        )
    }
}

/// (s, angles) -> (t(s), y(s) n(angles)) in R^{m+1}, rotationally
/// symmetric minimal hypersurface over the arclength profile.
struct HigherCatenoidChart {
    profile: ProfileSolution,
    sphere: SphericalChart,
}

impl HigherCatenoidChart {
    fn m(&self) -> usize {
        self.profile.dim()
    }
}

impl Chart for HigherCatenoidChart {
    fn param_dim(&self) -> usize {
        self.m()
    }
    fn ambient_dim(&self) -> usize {
        self.m() + 1
    }
    fn point(&self, u: &[f64]) -> Vec<f64> {
        let st = self.profile.state(u[0]).expect("arclength within profile");
        let n = self.sphere.value(&u[1..]);
        let mut p = Vec::with_capacity(self.m() + 1);
        p.push(st.t);
        p.extend(n.into_iter().map(|x| st.y * x));
        p
    }
    fn jacobian(&self, u: &[f64]) -> Option<Vec<Vec<f64>>> {
        let st = self.profile.state(u[0]).expect("arclength within profile");
        let n = self.sphere.value(&u[1..]);
        let (ca, sa) = (st.alpha.cos(), st.alpha.sin());
        let mut cols = Vec::with_capacity(self.m());
        let mut ds = Vec::with_capacity(self.m() + 1);
        ds.push(ca);
        ds.extend(n.iter().map(|x| sa * x));
        cols.push(ds);
        for a in 0..self.sphere.angle_count() {
            let dn = self.sphere.d1(&u[1..], a);
            let mut col = Vec::with_capacity(self.m() + 1);
            col.push(0.0);
            col.extend(dn.into_iter().map(|x| st.y * x));
            cols.push(col);
        }
        Some(cols)
    }
    fn second(&self, u: &[f64], i: usize, j: usize) -> Option<Vec<f64>> {
        let st = self.profile.state(u[0]).expect("arclength within profile");
        let (ca, sa) = (st.alpha.cos(), st.alpha.sin());
        let (i, j) = (i.min(j), i.max(j));
        let dim = self.m() + 1;
        if i == 0 && j == 0 {
            let ap = self.profile.alpha_prime(u[0]).expect("within profile");
            let n = self.sphere.value(&u[1..]);
            let mut out = Vec::with_capacity(dim);
            out.push(-sa * ap);
            out.extend(n.into_iter().map(|x| ca * ap * x));
            return Some(out);
        }
        if i == 0 {
            let dn = self.sphere.d1(&u[1..], j - 1);
            let mut out = Vec::with_capacity(dim);
            out.push(0.0);
            out.extend(dn.into_iter().map(|x| sa * x));
            return Some(out);
        }
        let d2n = self.sphere.d2(&u[1..], i - 1, j - 1);
        let mut out = Vec::with_capacity(dim);
        out.push(0.0);
        out.extend(d2n.into_iter().map(|x| st.y * x));
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn parse_forms() {
        assert_eq!(
            Builtin::parse("euclidean_plane(2,3)").unwrap(),
            Builtin::EuclideanPlane { m: 2, n: 3 }
        );
        assert_eq!(
            Builtin::parse("catenoid").unwrap(),
            Builtin::Catenoid { scale: 1.0 }
        );
        assert_eq!(
            Builtin::parse("hyperbolic_hyperplane(2, 3, -1.0)").unwrap(),
            Builtin::HyperbolicHyperplane {
                m: 2,
                n: 3,
                b: -1.0
            }
        );
        assert!(Builtin::parse("euclidean_plane(3,3)").is_ok());
        assert!(Builtin::parse("euclidean_plane(3,3)").unwrap().build().is_err());
        assert!(Builtin::parse("mystery(1)").is_err());
        assert!(Builtin::parse("round_sphere(-2)").unwrap().build().is_err());
    }

    #[test]
    fn plane_chart_points() {
        let p = Builtin::EuclideanPlane { m: 2, n: 3 }.build().unwrap();
        assert_eq!(p.point(&[1.0, -2.0]), vec![1.0, -2.0, 0.0]);
    }

    #[test]
    fn catenoid_radius_formula() {
        let c = Builtin::Catenoid { scale: 1.0 }.build().unwrap();
        for (v, th) in [(0.0, 0.0), (1.5, 2.0), (-3.0, 4.5)] {
            let p = c.point(&[v, th]);
            let r: f64 = p.iter().map(|x| x * x).sum::<f64>().sqrt();
            let expect = (v.cosh() * v.cosh() + v * v).sqrt();
            assert_relative_eq!(r, expect, max_relative = 1e-13);
        }
    }

    #[test]
    fn higher_catenoid_m2_matches_catenoid_geometry() {
        // the m = 2 profile chart is the classical catenoid up to
        // reparametrization: check |B| at matching heights
        let hc = Builtin::HigherCatenoid { m: 2 }.build().unwrap();
        let s = 2.0;
        // at arclength s, y = sqrt(1+s^2) = cosh v => v = acosh(y)
        let y = (1.0f64 + s * s).sqrt();
        let v = y.acosh();
        let expect = 2.0f64.sqrt() / (v.cosh() * v.cosh());
        assert_relative_eq!(
            hc.sff_norm(&[s, 1.0]).unwrap(),
            expect,
            max_relative = 1e-6
        );
    }

    #[test]
    fn higher_catenoid_jacobian_matches_fd() {
        let hc = Builtin::HigherCatenoid { m: 3 }.build().unwrap();
        let u = [1.3, 1.1, 0.7];
        let jac = hc.jacobian(&u);
        let h = 1e-6;
        for i in 0..3 {
            let mut up = u;
            let mut um = u;
            up[i] += h;
            um[i] -= h;
            let (pp, pm) = (hc.point(&up), hc.point(&um));
            for k in 0..4 {
                assert_relative_eq!(
                    jac[i][k],
                    (pp[k] - pm[k]) / (2.0 * h),
                    epsilon = 1e-6
                );
            }
        }
    }

    #[test]
    fn sphere_has_constant_radius() {
        let s = Builtin::RoundSphere { radius: 2.5 }.build().unwrap();
        for u in [[0.1, 0.0], [1.0, 3.0], [3.0, 6.0]] {
            let (r, t) = s.extrinsic_quantities(&u).unwrap();
            assert_relative_eq!(r, 2.5, epsilon = 1e-12);
            assert!(t < 1e-10);
        }
    }
}
