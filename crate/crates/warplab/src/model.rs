//! Intrinsic quantities of a rotationally symmetric model space: warping
//! function, mean curvature of distance spheres, radial and fiber
//! curvatures, fiber/ball volumes, isoperimetric quotient and the balance
//! conditions.

use crate::error::{Error, Result};
use crate::expr::{self, Expr};
use crate::quadrature;

/// Radius below which evaluations are treated as sitting at the center.
pub const POLE_RADIUS: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub enum WarpKind {
    SpaceForm { b: f64 },
    Custom,
}

/// Radial warping profile `w` on `[0, domain_end)` with `w(0) = 0`,
/// `w'(0) = 1` and `w > 0` inside the domain. Space forms carry analytic
/// derivatives; custom profiles fall back to central differences.
#[derive(Debug, Clone)]
pub struct WarpingFunction {
    kind: WarpKind,
    domain_end: f64,
    expr: Option<Expr>,
    spec: String,
}

impl WarpingFunction {
    /// Closed-form warping function of the simply connected space form of
    /// constant curvature `b`.
    pub fn space_form(b: f64) -> WarpingFunction {
        let domain_end = if b > 0.0 {
            std::f64::consts::PI / b.sqrt() - 1e-9
        } else {
            f64::INFINITY
        };
        WarpingFunction {
            kind: WarpKind::SpaceForm { b },
            domain_end,
            expr: None,
            spec: format!("space_form:{b}"),
        }
    }

    /// Custom profile from an expression in `r`. Checks the center
    /// conditions `w(0)=0`, `w'(0)=1` numerically.
    pub fn custom(source: &str) -> Result<WarpingFunction> {
        let e = expr::parse(source, &["r"])?;
        let w = WarpingFunction {
            kind: WarpKind::Custom,
            domain_end: f64::INFINITY,
            expr: Some(e),
            spec: format!("custom:{source}"),
        };
        let at0 = w.eval(0.0, 0);
        if at0.abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "warping function must satisfy w(0)=0, got {at0:.3e}"
            )));
        }
        let d0 = w.eval(1e-6, 0) / 1e-6;
        if (d0 - 1.0).abs() > 1e-4 {
            return Err(Error::InvalidArgument(format!(
                "warping function must satisfy w'(0)=1, got {d0:.6}"
            )));
        }
        Ok(w)
    }

    /// Parse a config-level spec: `space_form:<b>` or `custom:<expression>`.
    pub fn parse_spec(spec: &str) -> Result<WarpingFunction> {
        if let Some(b) = spec.strip_prefix("space_form:") {
            let b: f64 = b
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad curvature in `{spec}`")))?;
            return Ok(WarpingFunction::space_form(b));
        }
        if let Some(src) = spec.strip_prefix("custom:") {
            return WarpingFunction::custom(src.trim());
        }
        Err(Error::Config(format!(
            "warping spec `{spec}` is neither `space_form:<b>` nor `custom:<expr>`"
        )))
    }

    pub fn kind(&self) -> &WarpKind {
        &self.kind
    }

    pub fn spec(&self) -> &str {
        &self.spec
    }

    pub fn domain_end(&self) -> f64 {
        self.domain_end
    }

    /// Curvature parameter for space forms, if this is one.
    pub fn space_form_curvature(&self) -> Option<f64> {
        match self.kind {
            WarpKind::SpaceForm { b } => Some(b),
            WarpKind::Custom => None,
        }
    }

    /// Evaluate `w`, `w'` or `w''` at `r >= 0`.
    pub fn eval(&self, r: f64, order: u8) -> f64 {
        match self.kind {
            WarpKind::SpaceForm { b } => space_form_eval(b, r, order),
            WarpKind::Custom => {
                let e = self.expr.as_ref().expect("custom warping has expression");
                match order {
                    0 => e.eval(&[r]),
                    // central differences, step from the module design note
                    1 => {
                        let h = 1e-5_f64.max(1e-5 * r);
                        (e.eval(&[r + h]) - e.eval(&[(r - h).max(0.0).min(r + h)])) / (2.0 * h)
                    }
                    2 => {
                        let h = 1e-4_f64.max(1e-4 * r);
                        (e.eval(&[r + h]) - 2.0 * e.eval(&[r]) + e.eval(&[(r - h).max(0.0)]))
                            / (h * h)
                    }
                    _ => panic!("derivative order {order} not supported"),
                }
            }
        }
    }

    fn check_radius(&self, r: f64) -> Result<()> {
        if r <= 0.0 {
            return Err(Error::Domain(format!("radius {r} must be positive")));
        }
        if r >= self.domain_end {
            return Err(Error::Domain(format!(
                "radius {r} outside warping domain [0, {})",
                self.domain_end
            )));
        }
        Ok(())
    }

    /// Mean curvature of the distance sphere: `w'(r)/w(r)`.
    pub fn eta(&self, r: f64) -> Result<f64> {
        self.check_radius(r)?;
        Ok(self.eval(r, 1) / self.eval(r, 0))
    }

    /// Radial sectional curvature: `-w''(r)/w(r)`.
    pub fn radial_curvature(&self, r: f64) -> Result<f64> {
        self.check_radius(r)?;
        Ok(-self.eval(r, 2) / self.eval(r, 0))
    }

    /// Sectional curvature of planes tangent to the fiber:
    /// `(1 - w'(r)^2)/w(r)^2`.
    pub fn fiber_curvature(&self, r: f64) -> Result<f64> {
        self.check_radius(r)?;
        let w = self.eval(r, 0);
        let w1 = self.eval(r, 1);
        Ok((1.0 - w1 * w1) / (w * w))
    }
}

fn space_form_eval(b: f64, r: f64, order: u8) -> f64 {
    if b == 0.0 {
        match order {
            0 => r,
            1 => 1.0,
            _ => 0.0,
        }
    } else if b < 0.0 {
        let s = (-b).sqrt();
        match order {
            0 => (s * r).sinh() / s,
            1 => (s * r).cosh(),
            _ => s * (s * r).sinh(),
        }
    } else {
        let s = b.sqrt();
        match order {
            0 => (s * r).sin() / s,
            1 => (s * r).cos(),
            _ => -s * (s * r).sin(),
        }
    }
}

/// Volume of the unit sphere of dimension `dim` (so `dim = m-1` for the
/// fiber of an m-dimensional model): `2 pi^((dim+1)/2) / Gamma((dim+1)/2)`.
pub fn unit_sphere_volume(dim: usize) -> f64 {
    let half = (dim + 1) as f64 / 2.0;
    2.0 * std::f64::consts::PI.powf(half) / gamma_half_integer((dim + 1) as u32)
}

/// Gamma(k/2) for integer k >= 1, by the recurrence from Gamma(1/2) and
/// Gamma(1).
fn gamma_half_integer(k: u32) -> f64 {
    let mut val = if k % 2 == 1 {
        std::f64::consts::PI.sqrt()
    } else {
        1.0
    };
    let mut arg = if k % 2 == 1 { 1 } else { 2 }; // argument in half-units
    while arg < k {
        val *= arg as f64 / 2.0;
        arg += 2;
    }
    val
}

/// A rotationally symmetric model space of dimension `dim` with the given
/// warping profile.
#[derive(Debug, Clone)]
pub struct ModelSpace {
    pub dim: usize,
    pub warping: WarpingFunction,
    pub unit_sphere_volume: f64,
}

impl ModelSpace {
    pub fn new(dim: usize, warping: WarpingFunction) -> Result<ModelSpace> {
        if dim < 2 {
            return Err(Error::InvalidArgument(format!(
                "model dimension must be at least 2, got {dim}"
            )));
        }
        Ok(ModelSpace {
            dim,
            unit_sphere_volume: unit_sphere_volume(dim - 1),
            warping,
        })
    }

    /// Volume of the distance sphere of radius `r`: `V0 * w(r)^(m-1)`.
    pub fn vol_fiber(&self, r: f64) -> Result<f64> {
        self.warping.check_radius(r)?;
        Ok(self.unit_sphere_volume * self.warping.eval(r, 0).powi(self.dim as i32 - 1))
    }

    /// Volume of the metric ball of radius `r`:
    /// `V0 * integral_0^r w^(m-1)`.
    pub fn vol_ball(&self, r: f64) -> Result<f64> {
        self.warping.check_radius(r)?;
        let m = self.dim as i32;
        let w = &self.warping;
        let v = quadrature::integrate(&|t| w.eval(t, 0).powi(m - 1), 0.0, r, 1e-12, 1e-14)?;
        Ok(self.unit_sphere_volume * v)
    }

    /// Isoperimetric quotient `q_w(r) = Vol(B_r)/Vol(S_r)`.
    pub fn isoperimetric_quotient(&self, r: f64) -> Result<f64> {
        Ok(self.vol_ball(r)? / self.vol_fiber(r)?)
    }

    /// Evaluate the weighted isoperimetric (balance) conditions on a grid,
    /// reporting the analytic sufficient condition that holds, if any.
    pub fn balance_report(&self, grid: &[f64], tolerance: f64) -> Result<BalanceVerdict> {
        if grid.is_empty() {
            return Err(Error::InvalidArgument("balance grid is empty".into()));
        }
        for pair in grid.windows(2) {
            if pair[1] <= pair[0] {
                return Err(Error::InvalidArgument(
                    "balance grid must be strictly increasing".into(),
                ));
            }
        }
        let m = self.dim as f64;
        let mut min_margin_below = f64::INFINITY;
        let mut max_margin_above = f64::NEG_INFINITY;
        let mut all_k_nonpos = true;
        let mut all_k_ge_minus_eta_sq = true;
        for &r in grid {
            self.warping.check_radius(r)?;
            let q = self.isoperimetric_quotient(r)?;
            let eta = self.warping.eta(r)?;
            let kw = self.warping.radial_curvature(r)?;
            min_margin_below = min_margin_below.min(q * eta - 1.0 / m);
            max_margin_above = max_margin_above.max(q * eta - 1.0 / (m - 1.0));
            if kw > 1e-12 {
                all_k_nonpos = false;
            }
            if kw < -eta * eta - 1e-12 {
                all_k_ge_minus_eta_sq = false;
            }
        }
        let below_ok = min_margin_below >= -tolerance;
        let above_ok = max_margin_above <= tolerance;
        let sufficient_condition_used = if all_k_nonpos {
            SufficientCondition::KLeZero
        } else if all_k_ge_minus_eta_sq {
            SufficientCondition::KGeMinusEtaSq
        } else {
            SufficientCondition::None
        };
        Ok(BalanceVerdict {
            grid: grid.to_vec(),
            below_ok,
            above_ok,
            totally_balanced: below_ok && above_ok,
            min_margin_below,
            max_margin_above,
            sufficient_condition_used,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SufficientCondition {
    None,
    /// Radial curvature nonpositive on the grid (certifies balance from below).
    KLeZero,
    /// Radial curvature >= -eta^2 on the grid (certifies balance from above).
    KGeMinusEtaSq,
}

#[derive(Debug, Clone)]
pub struct BalanceVerdict {
    pub grid: Vec<f64>,
    pub below_ok: bool,
    pub above_ok: bool,
    pub totally_balanced: bool,
    /// min over grid of `q_w * eta_w - 1/m`
    pub min_margin_below: f64,
    /// max over grid of `q_w * eta_w - 1/(m-1)`
    pub max_margin_above: f64,
    pub sufficient_condition_used: SufficientCondition,
}

/// Model-space value of the Hessian of the distance function on a vector
/// with the given norm and radial component:
/// `eta_w(r) * (|X|^2 - <X, grad r>^2)`. This is also the comparison lower
/// bound for ambient spaces with radial curvature below the model's.
pub fn comparison_hessian_radial(
    w: &WarpingFunction,
    r: f64,
    norm_x: f64,
    radial_comp: f64,
) -> Result<f64> {
    if radial_comp.abs() > norm_x + 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "radial component {radial_comp} exceeds vector norm {norm_x}"
        )));
    }
    let eta = w.eta(r)?;
    Ok(eta * (norm_x * norm_x - radial_comp * radial_comp))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn space_form_closed_forms() {
        let w0 = WarpingFunction::space_form(0.0);
        assert_eq!(w0.eval(2.0, 0), 2.0);
        let wm1 = WarpingFunction::space_form(-1.0);
        assert_relative_eq!(wm1.eval(0.0, 1), 1.0);
        assert_relative_eq!(wm1.eval(1.0, 0), 1.0f64.sinh(), max_relative = 1e-15);
        let wp1 = WarpingFunction::space_form(1.0);
        assert_relative_eq!(wp1.eval(1.0, 0), 1.0f64.sin(), max_relative = 1e-15);
        assert!(wp1.domain_end() < std::f64::consts::PI);
    }

    #[test]
    fn eta_values() {
        let w0 = WarpingFunction::space_form(0.0);
        assert_relative_eq!(w0.eta(2.0).unwrap(), 0.5);
        let wm1 = WarpingFunction::space_form(-1.0);
        assert_relative_eq!(wm1.eta(1.0).unwrap(), 1.0 / 1.0f64.tanh(), max_relative = 1e-14);
        assert_relative_eq!(wm1.eta(20.0).unwrap(), 1.0, epsilon = 1e-8);
        assert!(w0.eta(0.0).is_err());
        let wp1 = WarpingFunction::space_form(1.0);
        assert!(wp1.eta(3.15).is_err());
    }

    #[test]
    fn curvatures() {
        let wp1 = WarpingFunction::space_form(1.0);
        assert_relative_eq!(wp1.radial_curvature(1.3).unwrap(), 1.0, max_relative = 1e-12);
        assert_relative_eq!(
            wp1.fiber_curvature(std::f64::consts::FRAC_PI_2).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        let w0 = WarpingFunction::space_form(0.0);
        assert_relative_eq!(w0.radial_curvature(5.0).unwrap(), 0.0);
        assert_relative_eq!(w0.fiber_curvature(5.0).unwrap(), 0.0);
        let wm1 = WarpingFunction::space_form(-1.0);
        assert_relative_eq!(wm1.radial_curvature(3.0).unwrap(), -1.0, max_relative = 1e-12);
        assert_relative_eq!(wm1.fiber_curvature(2.0).unwrap(), -1.0, max_relative = 1e-12);
    }

    #[test]
    fn constant_curvature_on_grid() {
        for &b in &[-1.0, -0.3] {
            let w = WarpingFunction::space_form(b);
            for i in 1..40 {
                let r = 0.25 * i as f64;
                assert_relative_eq!(w.radial_curvature(r).unwrap(), b, max_relative = 1e-10);
                assert_relative_eq!(w.fiber_curvature(r).unwrap(), b, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn finite_difference_consistency() {
        // order-0 differences converge to order-1/2 evaluations at O(h^2)
        let w = WarpingFunction::space_form(-1.0);
        let r = 1.5;
        for (order, exact) in [(1u8, w.eval(r, 1)), (2, w.eval(r, 2))] {
            let fd = |h: f64| match order {
                1 => (w.eval(r + h, 0) - w.eval(r - h, 0)) / (2.0 * h),
                _ => (w.eval(r + h, 0) - 2.0 * w.eval(r, 0) + w.eval(r - h, 0)) / (h * h),
            };
            let e1 = (fd(1e-3) - exact).abs();
            let e2 = (fd(5e-4) - exact).abs();
            assert!(e2 < e1 / 3.0, "order {order}: {e1:.3e} -> {e2:.3e}");
        }
    }

    #[test]
    fn sphere_volumes() {
        assert_relative_eq!(unit_sphere_volume(1), 2.0 * std::f64::consts::PI);
        assert_relative_eq!(unit_sphere_volume(2), 4.0 * std::f64::consts::PI);
        assert_relative_eq!(unit_sphere_volume(3), 2.0 * std::f64::consts::PI.powi(2));
    }

    #[test]
    fn fiber_and_ball_volumes() {
        let m3 = ModelSpace::new(3, WarpingFunction::space_form(0.0)).unwrap();
        assert_relative_eq!(
            m3.vol_fiber(2.0).unwrap(),
            16.0 * std::f64::consts::PI,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            m3.vol_ball(2.0).unwrap(),
            32.0 * std::f64::consts::PI / 3.0,
            max_relative = 1e-12
        );
        let m2 = ModelSpace::new(2, WarpingFunction::space_form(0.0)).unwrap();
        assert_relative_eq!(
            m2.vol_fiber(1.0).unwrap(),
            2.0 * std::f64::consts::PI,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            m2.vol_ball(3.0).unwrap(),
            9.0 * std::f64::consts::PI,
            max_relative = 1e-12
        );
        let h3 = ModelSpace::new(3, WarpingFunction::space_form(-1.0)).unwrap();
        assert_relative_eq!(
            h3.vol_fiber(1.0).unwrap(),
            4.0 * std::f64::consts::PI * 1.0f64.sinh().powi(2),
            max_relative = 1e-12
        );
        // closed-form hyperbolic ball volume: pi (sinh 2r - 2r)
        assert_relative_eq!(
            h3.vol_ball(1.0).unwrap(),
            std::f64::consts::PI * (2.0f64.sinh() - 2.0),
            max_relative = 1e-10
        );
    }

    #[test]
    fn isoperimetric_quotient_values() {
        let m3 = ModelSpace::new(3, WarpingFunction::space_form(0.0)).unwrap();
        assert_relative_eq!(m3.isoperimetric_quotient(2.0).unwrap(), 2.0 / 3.0, max_relative = 1e-12);
        let m4 = ModelSpace::new(4, WarpingFunction::space_form(0.0)).unwrap();
        assert_relative_eq!(m4.isoperimetric_quotient(1.0).unwrap(), 0.25, max_relative = 1e-12);
        let h3 = ModelSpace::new(3, WarpingFunction::space_form(-1.0)).unwrap();
        let expect = std::f64::consts::PI * (2.0f64.sinh() - 2.0)
            / (4.0 * std::f64::consts::PI * 1.0f64.sinh().powi(2));
        assert_relative_eq!(h3.isoperimetric_quotient(1.0).unwrap(), expect, max_relative = 1e-9);
    }

    #[test]
    fn euclidean_balance_is_exact() {
        let m3 = ModelSpace::new(3, WarpingFunction::space_form(0.0)).unwrap();
        let grid: Vec<f64> = (1..=100).map(|i| 0.1 * i as f64).collect();
        let v = m3.balance_report(&grid, 1e-12).unwrap();
        assert!(v.below_ok);
        assert!(v.min_margin_below.abs() <= 1e-12);
    }

    #[test]
    fn hyperbolic_balance() {
        let h3 = ModelSpace::new(3, WarpingFunction::space_form(-1.0)).unwrap();
        let grid: Vec<f64> = (1..=100).map(|i| 0.1 * i as f64).collect();
        let v = h3.balance_report(&grid, 1e-9).unwrap();
        assert!(v.below_ok);
        assert!(v.above_ok);
        assert!(v.totally_balanced);
        assert_eq!(v.sufficient_condition_used, SufficientCondition::KLeZero);
    }

    #[test]
    fn vol_ball_monotone_and_consistent_with_fiber() {
        let h3 = ModelSpace::new(3, WarpingFunction::space_form(-1.0)).unwrap();
        let mut prev = 0.0;
        for i in 1..=20 {
            let r = 0.3 * i as f64;
            let v = h3.vol_ball(r).unwrap();
            assert!(v > prev);
            prev = v;
            // fundamental theorem check: d/dr vol_ball = vol_fiber
            let h = 1e-5;
            let dv = (h3.vol_ball(r + h).unwrap() - h3.vol_ball(r - h).unwrap()) / (2.0 * h);
            assert_relative_eq!(dv, h3.vol_fiber(r).unwrap(), max_relative = 1e-7);
        }
    }

    #[test]
    fn hessian_comparison_values() {
        let w0 = WarpingFunction::space_form(0.0);
        assert_relative_eq!(comparison_hessian_radial(&w0, 2.0, 1.0, 0.0).unwrap(), 0.5);
        assert_relative_eq!(comparison_hessian_radial(&w0, 2.0, 1.0, 1.0).unwrap(), 0.0);
        let wm1 = WarpingFunction::space_form(-1.0);
        assert_relative_eq!(
            comparison_hessian_radial(&wm1, 1.0, 1.0, 0.0).unwrap(),
            1.0 / 1.0f64.tanh(),
            max_relative = 1e-14
        );
        // sign-flip invariance
        assert_eq!(
            comparison_hessian_radial(&wm1, 1.0, 1.0, 0.4).unwrap(),
            comparison_hessian_radial(&wm1, 1.0, 1.0, -0.4).unwrap()
        );
        assert!(comparison_hessian_radial(&w0, 2.0, 1.0, 1.5).is_err());
    }

    #[test]
    fn custom_warping_parses_and_balances() {
        let w = WarpingFunction::parse_spec("custom:r + 0.1*r^3").unwrap();
        assert_relative_eq!(w.eval(2.0, 0), 2.8);
        assert_relative_eq!(w.eval(2.0, 1), 1.0 + 0.3 * 4.0, epsilon = 1e-6);
        assert_relative_eq!(w.eval(2.0, 2), 1.2, epsilon = 1e-4);
        let m = ModelSpace::new(3, w).unwrap();
        let grid: Vec<f64> = (1..=20).map(|i| 0.25 * i as f64).collect();
        let v = m.balance_report(&grid, 1e-9).unwrap();
        assert!(v.below_ok);
    }

    #[test]
    fn custom_warping_rejects_bad_center() {
        assert!(WarpingFunction::custom("r + 1").is_err());
        assert!(WarpingFunction::custom("2*r").is_err());
    }
}
