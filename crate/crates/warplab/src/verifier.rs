//! Growth curves, hypothesis fits, and inequality verdicts comparing a
//! meshed submanifold against its rotationally symmetric model space.

use crate::error::{Error, Result};
use crate::mesh::MeshedSubmanifold;
use crate::model::{unit_sphere_volume, ModelSpace, WarpingFunction, POLE_RADIUS};
use crate::topology::{extrinsic_ball, EndsScan};
use rayon::prelude::*;
use serde::Serialize;

/// Relative slack when classifying a fitted curve as non-increasing.
const TREND_SLACK: f64 = 1e-3;

#[derive(Debug, Clone, Serialize)]
pub struct GrowthReport {
    pub radii: Vec<f64>,
    pub vol_dt: Vec<f64>,
    pub area_bdry: Vec<f64>,
    /// Vol(D_t) / Vol(B_t^w)
    pub f: Vec<f64>,
    /// Vol(dD_t) / Vol(S_t^w)
    pub g: Vec<f64>,
    /// Vol(dD_t) / Vol(D_t)
    pub isop_lhs: Vec<f64>,
    /// Vol(S_t^w) / Vol(B_t^w)
    pub isop_rhs: Vec<f64>,
    pub monotone_f: bool,
    pub max_monotonicity_violation: f64,
    /// radii at which the extrinsic ball was empty and no curve entry exists
    pub skipped_radii: Vec<f64>,
}

impl GrowthReport {
    pub fn sup_f(&self) -> f64 {
        self.f.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Volume and area growth quotients against the model, plus both sides of
/// the isoperimetric comparison. Empty balls are skipped and recorded.
pub fn growth_curves(
    mesh: &MeshedSubmanifold,
    model: &ModelSpace,
    radii: &[f64],
    mono_tol: f64,
) -> Result<GrowthReport> {
    if model.dim != mesh.param_dim {
        return Err(Error::InvalidArgument(format!(
            "model dimension {} must equal submanifold dimension {}",
            model.dim, mesh.param_dim
        )));
    }
    let rows: Result<Vec<(f64, Option<(f64, f64, f64, f64)>)>> = radii
        .par_iter()
        .map(|&t| {
            let ball = extrinsic_ball(mesh, t)?;
            if ball.is_empty() {
                return Ok((t, None));
            }
            let vol_b = model.vol_ball(t)?;
            let vol_s = model.vol_fiber(t)?;
            Ok((t, Some((ball.volume(), ball.area(), vol_b, vol_s))))
        })
        .collect();
    let mut report = GrowthReport {
        radii: Vec::new(),
        vol_dt: Vec::new(),
        area_bdry: Vec::new(),
        f: Vec::new(),
        g: Vec::new(),
        isop_lhs: Vec::new(),
        isop_rhs: Vec::new(),
        monotone_f: true,
        max_monotonicity_violation: 0.0,
        skipped_radii: Vec::new(),
    };
    for (t, row) in rows? {
        let Some((vol, area, vol_b, vol_s)) = row else {
            report.skipped_radii.push(t);
            continue;
        };
        report.radii.push(t);
        report.vol_dt.push(vol);
        report.area_bdry.push(area);
        report.f.push(vol / vol_b);
        report.g.push(area / vol_s);
        report.isop_lhs.push(area / vol);
        report.isop_rhs.push(vol_s / vol_b);
    }
    for w in report.f.windows(2) {
        let viol = (w[0] - w[1]) / w[0].abs().max(f64::MIN_POSITIVE);
        report.max_monotonicity_violation = report.max_monotonicity_violation.max(viol);
    }
    report.monotone_f = report.max_monotonicity_violation <= mono_tol;
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum HypothesisForm {
    #[serde(rename = "T1_c_eta_rho")]
    T1CEtaRho,
    #[serde(rename = "T2_eps_over_wprime_sq")]
    T2EpsOverWprimeSq,
    #[serde(rename = "cor1_delta_exp")]
    Cor1DeltaExp,
    #[serde(rename = "cor3_eps_over_r")]
    Cor3EpsOverR,
    #[serde(rename = "cor5_c_hb")]
    Cor5CHb,
    #[serde(rename = "cor6_c_over_rho")]
    Cor6COverRho,
}

impl HypothesisForm {
    pub const ALL: [HypothesisForm; 6] = [
        HypothesisForm::T1CEtaRho,
        HypothesisForm::T2EpsOverWprimeSq,
        HypothesisForm::Cor1DeltaExp,
        HypothesisForm::Cor3EpsOverR,
        HypothesisForm::Cor5CHb,
        HypothesisForm::Cor6COverRho,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            HypothesisForm::T1CEtaRho => "T1_c_eta_rho",
            HypothesisForm::T2EpsOverWprimeSq => "T2_eps_over_wprime_sq",
            HypothesisForm::Cor1DeltaExp => "cor1_delta_exp",
            HypothesisForm::Cor3EpsOverR => "cor3_eps_over_r",
            HypothesisForm::Cor5CHb => "cor5_c_hb",
            HypothesisForm::Cor6COverRho => "cor6_c_over_rho",
        }
    }

    pub fn parse(s: &str) -> Result<HypothesisForm> {
        HypothesisForm::ALL
            .into_iter()
            .find(|f| f.tag() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown hypothesis form `{s}`")))
    }

    /// Forms bounded by a constant c, as opposed to forms that must decay.
    pub fn is_constant_bound(&self) -> bool {
        matches!(
            self,
            HypothesisForm::T1CEtaRho | HypothesisForm::Cor5CHb | HypothesisForm::Cor6COverRho
        )
    }
}

#[derive(Debug, Clone)]
pub struct HypothesisParams {
    /// bound constant for the constant-bound forms (must lie in (0,1))
    pub c: Option<f64>,
    /// number of radial bins when explicit edges are not given
    pub bins: usize,
    /// explicit bin edges (left edge of each bin; last bin is half-open to
    /// the top of the range)
    pub bin_edges: Option<Vec<f64>>,
    /// radial range to verify over; defaults to the mesh extent
    pub range: Option<(f64, f64)>,
    /// compact submanifold: the asymptotic hypotheses do not apply
    pub compact: bool,
}

impl Default for HypothesisParams {
    fn default() -> HypothesisParams {
        HypothesisParams {
            c: None,
            bins: 20,
            bin_edges: None,
            range: None,
            compact: false,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FitPoint {
    pub t: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct HypothesisFit {
    pub form: HypothesisForm,
    /// per-bin supremum of the normalized curvature quantity, indexed by
    /// the left edge of each bin
    pub fitted_curve: Vec<FitPoint>,
    /// None when the check does not apply (compact submanifold)
    pub passes: Option<bool>,
    pub verified_range: (f64, f64),
    pub trend_decreasing: bool,
    pub c: Option<f64>,
    /// sup of (w/w')(rho) * ||B|| over the range (tamedness quantity)
    pub a_r: Option<f64>,
    pub notes: String,
}

impl HypothesisFit {
    /// Fitted value for the bin whose left edge is the largest edge <= t.
    pub fn value_at(&self, t: f64) -> Option<f64> {
        let mut out = None;
        for p in &self.fitted_curve {
            if p.t <= t + 1e-12 {
                out = Some(p.value);
            }
        }
        out
    }
}

/// Per-radius-bin supremum of the curvature quantity normalized by the
/// bound shape of the requested hypothesis form.
pub fn check_hypothesis(
    mesh: &MeshedSubmanifold,
    model: &ModelSpace,
    form: HypothesisForm,
    params: &HypothesisParams,
) -> Result<HypothesisFit> {
    let w = &model.warping;
    if form == HypothesisForm::Cor1DeltaExp {
        match w.space_form_curvature() {
            Some(b) if b < 0.0 => {}
            _ => {
                return Err(Error::InvalidArgument(
                    "cor1_delta_exp requires a hyperbolic space form warping".into(),
                ))
            }
        }
    }
    if form.is_constant_bound() {
        if let Some(c) = params.c {
            if !(c > 0.0 && c < 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "hypothesis constant c must lie in (0,1), got {c}"
                )));
            }
        } else {
            return Err(Error::InvalidArgument(format!(
                "hypothesis form {} needs a bound constant c",
                form.tag()
            )));
        }
    }
    let (r_lo, r_hi) = params
        .range
        .unwrap_or((mesh.min_r().max(POLE_RADIUS), mesh.max_r()));
    if !(r_hi > r_lo) {
        return Err(Error::InvalidArgument(format!(
            "empty verification range [{r_lo}, {r_hi}]"
        )));
    }
    let edges: Vec<f64> = match &params.bin_edges {
        Some(e) => {
            if e.len() < 2 || e.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::InvalidArgument(
                    "bin edges must be strictly increasing with at least two entries".into(),
                ));
            }
            e.clone()
        }
        None => {
            if params.bins == 0 {
                return Err(Error::InvalidArgument("need at least one bin".into()));
            }
            let h = (r_hi - r_lo) / params.bins as f64;
            (0..=params.bins).map(|k| r_lo + k as f64 * h).collect()
        }
    };

    // abscissa the bound is expressed in (extrinsic r or intrinsic rho)
    let uses_rho = matches!(
        form,
        HypothesisForm::T1CEtaRho | HypothesisForm::Cor6COverRho
    );
    let mut sup = vec![f64::NEG_INFINITY; edges.len() - 1];
    let mut a_r: f64 = 0.0;
    for v in &mesh.vertices {
        if v.r < POLE_RADIUS {
            continue;
        }
        let s = if uses_rho { v.rho } else { v.r };
        if s < edges[0] || s > *edges.last().unwrap() {
            continue;
        }
        let value = match form {
            HypothesisForm::T1CEtaRho => v.sff_norm / w.eta(v.rho)?,
            HypothesisForm::T2EpsOverWprimeSq => {
                v.sff_norm * w.eval(v.r, 1).powi(2) / w.eta(v.r)?
            }
            HypothesisForm::Cor1DeltaExp => {
                let b = w.space_form_curvature().unwrap();
                v.sff_norm * (2.0 * (-b).sqrt() * v.r).exp()
            }
            HypothesisForm::Cor3EpsOverR => v.sff_norm * v.r,
            HypothesisForm::Cor5CHb => v.sff_norm / w.eta(v.r)?,
            HypothesisForm::Cor6COverRho => v.sff_norm * v.rho,
        };
        if form == HypothesisForm::T1CEtaRho {
            a_r = a_r.max(v.sff_norm * w.eval(v.rho, 0) / w.eval(v.rho, 1));
        }
        let k = edges[..edges.len() - 1]
            .partition_point(|&e| e <= s)
            .saturating_sub(1);
        sup[k] = sup[k].max(value);
    }
    let fitted_curve: Vec<FitPoint> = edges[..edges.len() - 1]
        .iter()
        .zip(&sup)
        .filter(|(_, &v)| v > f64::NEG_INFINITY)
        .map(|(&t, &value)| FitPoint { t, value })
        .collect();
    if fitted_curve.is_empty() {
        return Err(Error::Domain(format!(
            "no mesh vertices in the verification range [{r_lo}, {r_hi}]"
        )));
    }

    // a majorant at numerical zero everywhere carries no trend information
    let at_floor = fitted_curve.iter().all(|p| p.value <= 1e-8);
    let trend_decreasing = at_floor
        || fitted_curve.windows(2).all(|w| {
            w[1].value <= w[0].value + TREND_SLACK * w[0].value.abs().max(1e-12)
        });
    let (passes, notes) = if params.compact {
        (
            None,
            "not applicable — compact submanifold: asymptotic hypothesis not testable".to_string(),
        )
    } else if form.is_constant_bound() {
        let c = params.c.unwrap();
        let ok = fitted_curve.iter().all(|p| p.value <= c);
        (
            Some(ok),
            if ok {
                format!("sup ratio within the bound c = {c}")
            } else {
                format!("fitted ratio exceeds the bound c = {c}")
            },
        )
    } else {
        let toward_zero =
            fitted_curve.last().unwrap().value <= fitted_curve[0].value + TREND_SLACK;
        let ok = at_floor || (trend_decreasing && toward_zero);
        (
            Some(ok),
            if at_floor {
                "fitted majorant is at numerical zero everywhere".to_string()
            } else if ok {
                "fitted majorant is non-increasing over the range".to_string()
            } else {
                "fitted majorant fails to decrease over the range".to_string()
            },
        )
    };
    Ok(HypothesisFit {
        form,
        fitted_curve,
        passes,
        verified_range: (r_lo, r_hi),
        trend_decreasing,
        c: params.c,
        a_r: (form == HypothesisForm::T1CEtaRho).then_some(a_r),
        notes,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationVerdict {
    pub inequality: String,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub margin: f64,
    /// None when the check is recorded but neither passed nor failed
    pub passed: Option<bool>,
    pub notes: String,
    pub tolerance: f64,
}

/// Side conditions of the theorems the demonstration is exercising; a
/// violated condition downgrades verdicts to demonstrations.
#[derive(Debug, Clone, Copy)]
pub struct SideConditions {
    pub m: usize,
    pub minimal: bool,
    pub pole_in_image: bool,
}

impl SideConditions {
    fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.m <= 2 {
            v.push(format!("m = {} violates the m > 2 hypothesis", self.m));
        }
        if !self.minimal {
            v.push("immersion is not minimal".to_string());
        }
        if !self.pole_in_image {
            v.push("pole is not in the image of the immersion".to_string());
        }
        v
    }
}

fn downgrade(notes: String, side: &SideConditions) -> String {
    let viols = side.violations();
    if viols.is_empty() {
        notes
    } else if notes.is_empty() {
        format!("demonstration only: {}", viols.join("; "))
    } else {
        format!("{notes}; demonstration only: {}", viols.join("; "))
    }
}

/// The three end-count inequalities: sup f <= E, the area growth bound
/// g <= E/(1-4eps)^((m-1)/2) where eps < 1/4, and the liminf-style check
/// on the trailing window of g.
pub fn ends_inequalities(
    growth: &GrowthReport,
    ends: &EndsScan,
    eps_fit: &HypothesisFit,
    m: usize,
    tolerance: f64,
    side: &SideConditions,
) -> Result<Vec<VerificationVerdict>> {
    let Some(count) = ends.stabilized_count else {
        return Ok(vec![VerificationVerdict {
            inequality: "ends_inequalities".to_string(),
            lhs: Vec::new(),
            rhs: Vec::new(),
            margin: f64::NAN,
            passed: None,
            notes: "end count did not stabilize over the scanned radii".to_string(),
            tolerance,
        }]);
    };
    if count == 0 {
        return Ok(vec![VerificationVerdict {
            inequality: "ends_inequalities".to_string(),
            lhs: Vec::new(),
            rhs: Vec::new(),
            margin: f64::NAN,
            passed: None,
            notes: downgrade(
                "hypotheses violated (compact): zero ends — recorded, not passed/failed"
                    .to_string(),
                side,
            ),
            tolerance,
        }]);
    }
    let e = count as f64;
    if growth.f.is_empty() {
        return Err(Error::Domain("growth report has no sampled radii".into()));
    }

    let mut verdicts = Vec::new();

    let sup_f = growth.sup_f();
    verdicts.push(VerificationVerdict {
        inequality: "sup_f_le_ends".to_string(),
        lhs: vec![sup_f],
        rhs: vec![e],
        margin: e - sup_f,
        passed: Some(e - sup_f >= -tolerance),
        notes: downgrade(String::new(), side),
        tolerance,
    });

    let mut lhs = Vec::new();
    let mut rhs = Vec::new();
    let mut vacuous = 0usize;
    let exponent = (m as f64 - 1.0) / 2.0;
    for (k, &t) in growth.radii.iter().enumerate() {
        let Some(eps) = eps_fit.value_at(t) else {
            vacuous += 1;
            continue;
        };
        if eps >= 0.25 {
            vacuous += 1;
            continue;
        }
        lhs.push(growth.g[k] * (1.0 - 4.0 * eps).powf(exponent));
        rhs.push(e);
    }
    let (margin, passed, mut notes) = if lhs.is_empty() {
        (
            f64::NAN,
            None,
            "vacuous: fitted eps >= 1/4 at every sampled radius".to_string(),
        )
    } else {
        let margin = lhs
            .iter()
            .zip(&rhs)
            .map(|(l, r)| r - l)
            .fold(f64::INFINITY, f64::min);
        (margin, Some(margin >= -tolerance), String::new())
    };
    if vacuous > 0 && !lhs.is_empty() {
        notes = format!("{vacuous} radii vacuous (fitted eps >= 1/4), skipped");
    }
    verdicts.push(VerificationVerdict {
        inequality: "area_growth_le_ends".to_string(),
        lhs,
        rhs,
        margin,
        passed,
        notes: downgrade(notes, side),
        tolerance,
    });

    // liminf surrogate: minimum of g over the trailing 30% of the radii
    let n = growth.radii.len();
    let start = (n as f64 * 0.7).floor() as usize;
    let tail_min = growth.g[start.min(n - 1)..]
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    verdicts.push(VerificationVerdict {
        inequality: "liminf_g_le_ends".to_string(),
        lhs: vec![tail_min],
        rhs: vec![e],
        margin: e - tail_min,
        passed: Some(e - tail_min >= -tolerance),
        notes: downgrade(
            format!(
                "minimum of g over trailing radii t >= {}",
                growth.radii[start.min(n - 1)]
            ),
            side,
        ),
        tolerance,
    });
    Ok(verdicts)
}

/// Boundary curvature chain: delta = (1 - 4 eps)/w(t)^2, Myers diameter
/// bound pi/sqrt(delta), Bishop area bound Vol(S^(m-1)(1))/delta^((m-1)/2).
/// Returns None when eps >= 1/4 (the bound is vacuous).
pub fn bishop_myers_bound(
    t: f64,
    eps_hat: f64,
    m: usize,
    w: &WarpingFunction,
) -> Result<Option<(f64, f64, f64)>> {
    if !(eps_hat >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "eps must be non-negative, got {eps_hat}"
        )));
    }
    if eps_hat >= 0.25 {
        return Ok(None);
    }
    let wt = w.eval(t, 0);
    if wt <= 0.0 {
        return Err(Error::Domain(format!("warping vanishes at t = {t}")));
    }
    let delta = (1.0 - 4.0 * eps_hat) / (wt * wt);
    let diameter_bound = std::f64::consts::PI / delta.sqrt();
    let area_bound = unit_sphere_volume(m - 1) / delta.powf((m as f64 - 1.0) / 2.0);
    Ok(Some((delta, diameter_bound, area_bound)))
}

#[derive(Debug, Clone, Serialize)]
pub struct GapDiagnostic {
    pub verdict: Option<String>,
    pub anomaly: bool,
    pub notes: String,
}

/// Equality-case advisory: a minimal immersion with a single end and
/// f identically 1 should be totally geodesic; a large second fundamental
/// form in that situation is an anomaly.
pub fn gap_diagnostic(
    growth: &GrowthReport,
    ends: &EndsScan,
    minimal: bool,
    sup_sff: f64,
    f_tolerance: f64,
) -> GapDiagnostic {
    let single_end = ends.stabilized_count == Some(1);
    let f_is_one = !growth.f.is_empty()
        && growth.f.iter().all(|&v| (v - 1.0).abs() <= f_tolerance);
    if minimal && single_end && f_is_one {
        if sup_sff <= 1e-6 {
            GapDiagnostic {
                verdict: Some("consistent with totally geodesic".to_string()),
                anomaly: false,
                notes: format!("sup ||B|| = {sup_sff:.3e}"),
            }
        } else {
            GapDiagnostic {
                verdict: None,
                anomaly: true,
                notes: format!(
                    "f is identically 1 with a single end, but sup ||B|| = {sup_sff:.3e} is not small"
                ),
            }
        }
    } else {
        GapDiagnostic {
            verdict: None,
            anomaly: false,
            notes: "equality-case predicate not triggered".to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::immersion::Builtin;
    use crate::mesh::MeshedSubmanifold;
    use crate::topology::count_ends;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn euclidean_model(m: usize) -> ModelSpace {
        ModelSpace::new(m, WarpingFunction::space_form(0.0)).unwrap()
    }

    fn scan_radii(lo: usize, hi: usize) -> Vec<f64> {
        (lo..=hi).map(|k| k as f64).collect()
    }

    #[test]
    fn plane_growth_is_flat() {
        let im = Builtin::EuclideanPlane { m: 2, n: 3 }.build().unwrap();
        let mesh = MeshedSubmanifold::build(&im, &[141, 141]).unwrap();
        let g = growth_curves(&mesh, &euclidean_model(2), &scan_radii(1, 9), 1e-3).unwrap();
        assert!(g.skipped_radii.is_empty());
        for k in 0..g.radii.len() {
            assert_relative_eq!(g.f[k], 1.0, epsilon = 5e-3);
            assert_relative_eq!(g.g[k], 1.0, epsilon = 5e-3);
            assert_relative_eq!(g.isop_lhs[k], g.isop_rhs[k], max_relative = 1e-2);
        }
        assert!(g.monotone_f);
    }

    #[test]
    fn hyperbolic_plane_growth_is_flat() {
        let im = Builtin::HyperbolicHyperplane { m: 2, n: 3, b: -1.0 }
            .build()
            .unwrap();
        let mesh = MeshedSubmanifold::build(&im, &[161, 161]).unwrap();
        let model = ModelSpace::new(2, WarpingFunction::space_form(-1.0)).unwrap();
        let g = growth_curves(&mesh, &model, &scan_radii(1, 6), 1e-3).unwrap();
        for k in 0..g.radii.len() {
            assert_relative_eq!(g.f[k], 1.0, epsilon = 1e-2);
        }
    }

    #[test]
    fn catenoid_growth_oracle() {
        let im = Builtin::Catenoid { scale: 1.0 }.build().unwrap();
        let mesh = MeshedSubmanifold::build(&im, &[241, 120]).unwrap();
        let g = growth_curves(&mesh, &euclidean_model(2), &scan_radii(2, 20), 1e-3).unwrap();
        assert!(g.monotone_f, "violation {}", g.max_monotonicity_violation);
        let f20 = *g.f.last().unwrap();
        assert!((1.85..=2.0).contains(&f20), "f(20) = {f20}");
        assert!(g.sup_f() <= 2.0 + 1e-2);
    }

    #[test]
    fn model_dimension_mismatch_rejected() {
        let im = Builtin::EuclideanPlane { m: 2, n: 3 }.build().unwrap();
        let mesh = MeshedSubmanifold::build(&im, &[21, 21]).unwrap();
        assert!(growth_curves(&mesh, &euclidean_model(3), &[1.0], 1e-3).is_err());
    }

    #[test]
    fn plane_hypotheses_all_vanish() {
        let im = Builtin::EuclideanPlane { m: 2, n: 3 }.build().unwrap();
        let mesh = MeshedSubmanifold::build(&im, &[61, 61]).unwrap();
        let model = euclidean_model(2);
        for form in HypothesisForm::ALL {
            if form == HypothesisForm::Cor1DeltaExp {
                // needs a hyperbolic warping
                assert!(check_hypothesis(
                    &mesh,
                    &model,
                    form,
                    &HypothesisParams::default()
                )
                .is_err());
                continue;
            }
            let params = HypothesisParams {
                c: Some(0.5),
                ..Default::default()
            };
            let fit = check_hypothesis(&mesh, &model, form, &params).unwrap();
            assert_eq!(fit.passes, Some(true), "form {}", form.tag());
            assert!(fit.fitted_curve.iter().all(|p| p.value <= 1e-8));
        }
    }

    #[test]
    fn catenoid_cor3_eps_oracle() {
        let im = Builtin::Catenoid { scale: 1.0 }.build().unwrap();
        let mesh = MeshedSubmanifold::build(&im, &[241, 120]).unwrap();
        let params = HypothesisParams {
            bin_edges: Some(scan_radii(2, 20)),
            ..Default::default()
        };
        let fit = check_hypothesis(
            &mesh,
            &euclidean_model(2),
            HypothesisForm::Cor3EpsOverR,
            &params,
        )
        .unwrap();
        assert!(fit.trend_decreasing);
        assert_eq!(fit.passes, Some(true));
        let e10 = fit.value_at(10.0).unwrap();
        assert!((0.12..=0.16).contains(&e10), "eps(10) = {e10}");
    }

    #[test]
    fn compact_hypothesis_recorded_not_judged() {
        let im = Builtin::RoundSphere { radius: 1.0 }.build().unwrap();
        let mesh = MeshedSubmanifold::build(&im, &[33, 48]).unwrap();
        let params = HypothesisParams {
            c: Some(0.9),
            compact: true,
            ..Default::default()
        };
        let fit = check_hypothesis(
            &mesh,
            &euclidean_model(2),
            HypothesisForm::T1CEtaRho,
            &params,
        )
        .unwrap();
        assert_eq!(fit.passes, None);
        assert!(fit.notes.contains("compact"));
    }

    #[test]
    fn plane_ends_inequalities_near_equality() {
        let im = Builtin::EuclideanPlane { m: 2, n: 3 }.build().unwrap();
        let mesh = MeshedSubmanifold::build(&im, &[141, 141]).unwrap();
        let radii = scan_radii(1, 9);
        let growth = growth_curves(&mesh, &euclidean_model(2), &radii, 1e-3).unwrap();
        let ends = count_ends(&mesh, &radii).unwrap();
        let params = HypothesisParams {
            bin_edges: Some(radii.clone()),
            ..Default::default()
        };
        let fit = check_hypothesis(
            &mesh,
            &euclidean_model(2),
            HypothesisForm::Cor3EpsOverR,
            &params,
        )
        .unwrap();
        let side = SideConditions {
            m: 2,
            minimal: true,
            pole_in_image: true,
        };
        let verdicts = ends_inequalities(&growth, &ends, &fit, 2, 1e-2, &side).unwrap();
        assert_eq!(verdicts.len(), 3);
        for v in &verdicts {
            assert_eq!(v.passed, Some(true), "{}: {}", v.inequality, v.notes);
            assert!(v.margin.abs() <= 2e-2, "{}: margin {}", v.inequality, v.margin);
            assert!(v.notes.contains("demonstration"), "m=2 must downgrade");
        }
    }

    #[test]
    fn compact_ends_verdict_is_recorded_only() {
        let im = Builtin::RoundSphere { radius: 1.0 }.build().unwrap();
        let mesh = MeshedSubmanifold::build(&im, &[33, 48]).unwrap();
        let radii = vec![1.5, 2.0, 2.5];
        let growth = growth_curves(&mesh, &euclidean_model(2), &radii, 1e-3).unwrap();
        let ends = count_ends(&mesh, &radii).unwrap();
        let params = HypothesisParams {
            range: Some((0.5, 1.5)),
            compact: true,
            ..Default::default()
        };
        let fit = check_hypothesis(
            &mesh,
            &euclidean_model(2),
            HypothesisForm::Cor3EpsOverR,
            &params,
        )
        .unwrap();
        let side = SideConditions {
            m: 2,
            minimal: false,
            pole_in_image: false,
        };
        let verdicts = ends_inequalities(&growth, &ends, &fit, 2, 1e-2, &side).unwrap();
        assert_eq!(verdicts.len(), 1);
        assert_eq!(verdicts[0].passed, None);
        assert!(verdicts[0].notes.contains("compact"));
    }

    #[test]
    fn bishop_myers_formula_arithmetic() {
        let w = WarpingFunction::space_form(0.0);
        let (delta, diam, area) = bishop_myers_bound(10.0, 0.0, 2, &w).unwrap().unwrap();
        assert_relative_eq!(delta, 0.01);
        assert_relative_eq!(diam, 10.0 * PI);
        assert_relative_eq!(area, 20.0 * PI, max_relative = 1e-12);
        assert!(bishop_myers_bound(10.0, 0.3, 2, &w).unwrap().is_none());
        assert!(bishop_myers_bound(10.0, -0.1, 2, &w).is_err());
    }

    #[test]
    fn gap_diagnostic_on_plane_and_catenoid() {
        let im = Builtin::EuclideanPlane { m: 2, n: 3 }.build().unwrap();
        let mesh = MeshedSubmanifold::build(&im, &[141, 141]).unwrap();
        let radii = scan_radii(1, 9);
        let growth = growth_curves(&mesh, &euclidean_model(2), &radii, 1e-3).unwrap();
        let ends = count_ends(&mesh, &radii).unwrap();
        let sup_sff = mesh
            .vertices
            .iter()
            .map(|v| v.sff_norm)
            .fold(0.0f64, f64::max);
        let diag = gap_diagnostic(&growth, &ends, true, sup_sff, 1e-2);
        assert_eq!(
            diag.verdict.as_deref(),
            Some("consistent with totally geodesic")
        );
        assert!(!diag.anomaly);

        let cat = Builtin::Catenoid { scale: 1.0 }.build().unwrap();
        let cmesh = MeshedSubmanifold::build(&cat, &[121, 64]).unwrap();
        let radii = scan_radii(2, 20);
        let cgrowth = growth_curves(&cmesh, &euclidean_model(2), &radii, 1e-3).unwrap();
        let cends = count_ends(&cmesh, &radii).unwrap();
        let diag = gap_diagnostic(&cgrowth, &cends, true, 1.5, 1e-2);
        assert!(diag.verdict.is_none());
        assert!(!diag.anomaly);
    }
}
