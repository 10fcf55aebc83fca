//! Scenario runner: model -> mesh -> topology -> verifier, emitting
//! curves.csv, verdicts.json, mesh.txt, and manifest.json.

use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::mesh::MeshedSubmanifold;
use crate::model::{ModelSpace, WarpingFunction};
use crate::topology::count_ends;
use crate::verifier::{
    bishop_myers_bound, check_hypothesis, ends_inequalities, gap_diagnostic, growth_curves,
    GrowthReport, HypothesisFit, HypothesisForm, HypothesisParams, SideConditions,
    VerificationVerdict,
};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

#[derive(Debug, Serialize)]
pub struct OutputDigest {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub scenario: String,
    pub version: String,
    pub created_unix_ms: u128,
    pub timings_seconds: Vec<(String, f64)>,
    pub outputs: Vec<OutputDigest>,
    /// lossless echo of the configuration that produced the run
    pub config: String,
}

#[derive(Debug, Serialize)]
struct VerdictDocument<'a> {
    scenario: &'a str,
    model: ModelSummary<'a>,
    curves: &'a GrowthReport,
    hypotheses: &'a [HypothesisFit],
    verdicts: &'a [VerificationVerdict],
    tolerances: &'a crate::config::Tolerances,
}

#[derive(Debug, Serialize)]
struct ModelSummary<'a> {
    dim: usize,
    warping: &'a str,
    ambient_dim: usize,
}

pub struct RunOutcome {
    pub manifest: RunManifest,
    /// number of hypothesis fits and verdicts that evaluated to a failure
    pub failures: usize,
    pub out_dir: PathBuf,
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<OutputDigest> {
    let path = dir.join(name);
    std::fs::write(&path, contents)
        .map_err(|e| Error::Io(std::io::Error::other(format!("writing {}: {e}", path.display()))))?;
    let mut hasher = Sha256::new();
    hasher.update(contents.as_bytes());
    Ok(OutputDigest {
        file: name.to_string(),
        sha256: format!("{:x}", hasher.finalize()),
    })
}

/// Execute a scenario and write its artifacts into `out_dir`.
pub fn run(cfg: &ScenarioConfig, out_dir: &Path) -> Result<RunOutcome> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| Error::Io(std::io::Error::other(format!("creating {}: {e}", out_dir.display()))))?;
    let mut timings: Vec<(String, f64)> = Vec::new();
    let stage = |name: &str, t0: Instant, timings: &mut Vec<(String, f64)>| {
        timings.push((name.to_string(), t0.elapsed().as_secs_f64()));
    };

    let t0 = Instant::now();
    let warping = WarpingFunction::parse_spec(&cfg.warping_spec)?;
    let model = ModelSpace::new(cfg.model_dim, warping.clone())?;
    stage("model", t0, &mut timings);

    let t0 = Instant::now();
    let im = cfg.build_immersion()?;
    let mesh = MeshedSubmanifold::build(&im, &cfg.resolution)?;
    if !cfg.compact && cfg.radii_hi > mesh.max_r() {
        return Err(Error::Config(format!(
            "radii reach {} but the mesh horizon is r = {:.3}",
            cfg.radii_hi,
            mesh.max_r()
        )));
    }
    stage("mesh", t0, &mut timings);

    let radii = cfg.radii();
    let t0 = Instant::now();
    let ends = count_ends(&mesh, &radii)?;
    stage("topology", t0, &mut timings);

    let t0 = Instant::now();
    let growth = growth_curves(&mesh, &model, &radii, cfg.tolerances.monotone_f)?;

    // the decay majorant entering the (1 - 4 eps) factors, binned so each
    // scan radius indexes the bin starting at it
    let eps_params = HypothesisParams {
        bin_edges: Some(radii.clone()),
        compact: cfg.compact,
        ..Default::default()
    };
    let eps_fit = check_hypothesis(&mesh, &model, HypothesisForm::T2EpsOverWprimeSq, &eps_params)?;

    let mut hypotheses = Vec::new();
    for &form in &cfg.forms {
        let params = HypothesisParams {
            c: cfg.c.or(Some(0.9)).filter(|_| form.is_constant_bound()),
            compact: cfg.compact,
            ..Default::default()
        };
        hypotheses.push(check_hypothesis(&mesh, &model, form, &params)?);
    }

    let side = SideConditions {
        m: cfg.model_dim,
        minimal: cfg.minimal,
        pole_in_image: cfg.pole_in_image,
    };
    let mut verdicts = ends_inequalities(
        &growth,
        &ends,
        &eps_fit,
        cfg.model_dim,
        cfg.tolerances.verdict,
        &side,
    )?;

    // boundary area against the Myers/Bishop estimate, per end
    if let Some(count) = ends.stabilized_count.filter(|&c| c > 0) {
        let mut lhs = Vec::new();
        let mut rhs = Vec::new();
        let mut vacuous = 0usize;
        for (k, &t) in growth.radii.iter().enumerate() {
            let eps = eps_fit.value_at(t).unwrap_or(f64::INFINITY);
            match bishop_myers_bound(t, eps.max(0.0), cfg.model_dim, &warping)? {
                Some((_, _, area_bound)) => {
                    lhs.push(growth.area_bdry[k] / count as f64);
                    rhs.push(area_bound);
                }
                None => vacuous += 1,
            }
        }
        let (margin, passed, notes) = if lhs.is_empty() {
            (
                f64::NAN,
                None,
                "vacuous: fitted eps >= 1/4 at every sampled radius".to_string(),
            )
        } else {
            // the compared areas grow without bound, so the margin is
            // relative to the bound at each radius
            let margin = lhs
                .iter()
                .zip(&rhs)
                .map(|(l, r)| (r - l) / r.abs().max(1.0))
                .fold(f64::INFINITY, f64::min);
            let mut notes = String::from("margin is relative to the bound");
            if vacuous > 0 {
                write!(notes, "; {vacuous} radii vacuous (fitted eps >= 1/4), skipped").unwrap();
            }
            (margin, Some(margin >= -cfg.tolerances.verdict), notes)
        };
        verdicts.push(VerificationVerdict {
            inequality: "boundary_area_le_bishop_bound".to_string(),
            lhs,
            rhs,
            margin,
            passed,
            notes,
            tolerance: cfg.tolerances.verdict,
        });
    }

    let sup_sff = mesh
        .vertices
        .iter()
        .map(|v| v.sff_norm)
        .fold(0.0f64, f64::max);
    let diag = gap_diagnostic(&growth, &ends, cfg.minimal, sup_sff, cfg.tolerances.gap_f);
    verdicts.push(VerificationVerdict {
        inequality: "gap_diagnostic".to_string(),
        lhs: vec![sup_sff],
        rhs: Vec::new(),
        margin: f64::NAN,
        passed: if diag.anomaly { Some(false) } else { None },
        notes: match &diag.verdict {
            Some(v) => format!("{v}; {}", diag.notes),
            None => diag.notes.clone(),
        },
        tolerance: cfg.tolerances.gap_f,
    });
    stage("verifier", t0, &mut timings);

    let t0 = Instant::now();
    let mut csv = String::from("t,vol_Dt,area_bdry,ends,f,g,isop_lhs,isop_rhs\n");
    let mut row = 0usize;
    for (k, &t) in radii.iter().enumerate() {
        if row >= growth.radii.len() || growth.radii[row] != t {
            continue; // empty ball at this radius, no curve entry
        }
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            t,
            growth.vol_dt[row],
            growth.area_bdry[row],
            ends.counts[k],
            growth.f[row],
            growth.g[row],
            growth.isop_lhs[row],
            growth.isop_rhs[row]
        )
        .unwrap();
        row += 1;
    }

    let mut all_fits = vec![eps_fit];
    all_fits.extend(hypotheses);
    let document = VerdictDocument {
        scenario: &cfg.name,
        model: ModelSummary {
            dim: cfg.model_dim,
            warping: cfg.warping_spec.as_str(),
            ambient_dim: cfg.ambient_dim,
        },
        curves: &growth,
        hypotheses: &all_fits,
        verdicts: &verdicts,
        tolerances: &cfg.tolerances,
    };
    let json = serde_json::to_string_pretty(&document)
        .map_err(|e| Error::Io(std::io::Error::other(format!("serializing verdicts: {e}"))))?;

    let outputs = vec![
        write_file(out_dir, "curves.csv", &csv)?,
        write_file(out_dir, "verdicts.json", &(json + "\n"))?,
        write_file(out_dir, "mesh.txt", &mesh.export_text())?,
    ];
    stage("write", t0, &mut timings);

    let failures = verdicts
        .iter()
        .filter(|v| v.passed == Some(false))
        .count()
        + all_fits.iter().filter(|f| f.passes == Some(false)).count();

    let manifest = RunManifest {
        scenario: cfg.name.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        created_unix_ms: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .unwrap_or_default()
            .as_millis(),
        timings_seconds: timings,
        outputs,
        config: cfg.source.clone(),
    };
    let manifest_json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::Io(std::io::Error::other(format!("serializing manifest: {e}"))))?;
    std::fs::write(out_dir.join("manifest.json"), manifest_json + "\n")
        .map_err(|e| Error::Io(std::io::Error::other(format!("writing manifest.json: {e}"))))?;

    Ok(RunOutcome {
        manifest,
        failures,
        out_dir: out_dir.to_path_buf(),
    })
}

/// Model-space table over a radius grid, one CSV row per radius, plus
/// balance flags as trailing comment lines.
pub fn model_tables(spec: &str, m: usize, grid: &[f64]) -> Result<String> {
    let warping = WarpingFunction::parse_spec(spec)?;
    let model = ModelSpace::new(m, warping)?;
    let mut out = String::from("r,w,w1,w2,eta,Kw,Kfiber,volS,volB,q,q_eta\n");
    for &r in grid {
        let w = &model.warping;
        let eta = w.eta(r)?;
        let q = model.isoperimetric_quotient(r)?;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r,
            w.eval(r, 0),
            w.eval(r, 1),
            w.eval(r, 2),
            eta,
            w.radial_curvature(r)?,
            w.fiber_curvature(r)?,
            model.vol_fiber(r)?,
            model.vol_ball(r)?,
            q,
            q * eta
        )
        .unwrap();
    }
    let balance = model.balance_report(grid, 1e-9)?;
    writeln!(
        out,
        "# balance: below_ok={} above_ok={} min_margin_below={} max_margin_above={}",
        balance.below_ok, balance.above_ok, balance.min_margin_below, balance.max_margin_above
    )
    .unwrap();
    Ok(out)
}
