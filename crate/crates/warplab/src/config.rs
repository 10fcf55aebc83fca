//! INI-style scenario configuration: flat `key = value` pairs under
//! `[section]` headers, with `#`/`;` comments. Exact grammar:
//!
//! ```text
//! [scenario]   name
//! [ambient]    dim, warping
//! [model]      dim
//! [immersion]  builtin | chart + u1..um axis specs; minimal/compact/pole flags
//! [mesh]       resolution (comma list), optional axisK = lo:hi[:wrap]
//! [radii]      lo, hi, count
//! [hypotheses] forms (comma list), c
//! [tolerances] name = value overrides
//! [output]     directory
//! ```

use crate::error::{Error, Result};
use crate::immersion::{Builtin, ParamAxis, ParametricImmersion};
use crate::verifier::HypothesisForm;
use serde::Serialize;
use std::collections::BTreeMap;

pub const BUNDLED: [(&str, &str); 5] = [
    ("plane", include_str!("../configs/plane.cfg")),
    ("catenoid", include_str!("../configs/catenoid.cfg")),
    ("higher_catenoid", include_str!("../configs/higher_catenoid.cfg")),
    (
        "hyperbolic_hyperplane",
        include_str!("../configs/hyperbolic_hyperplane.cfg"),
    ),
    ("sphere", include_str!("../configs/sphere.cfg")),
];

pub fn bundled(name: &str) -> Result<&'static str> {
    BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
        .ok_or_else(|| Error::Config(format!("unknown bundled scenario `{name}`")))
}

/// Verification tolerances, all overridable from config or command line.
#[derive(Debug, Clone, Serialize)]
pub struct Tolerances {
    /// relative slack on monotonicity of the volume growth quotient
    pub monotone_f: f64,
    /// additive slack on inequality margins
    pub verdict: f64,
    /// |f - 1| threshold triggering the equality-case diagnostic
    pub gap_f: f64,
}

impl Default for Tolerances {
    fn default() -> Tolerances {
        Tolerances {
            monotone_f: 1e-3,
            verdict: 1e-2,
            gap_f: 1e-2,
        }
    }
}

impl Tolerances {
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::Config(format!(
                "tolerance {name} must be a non-negative number, got {value}"
            )));
        }
        match name {
            "monotone_f" => self.monotone_f = value,
            "verdict" => self.verdict = value,
            "gap_f" => self.gap_f = value,
            _ => {
                return Err(Error::Config(format!(
                    "unknown tolerance `{name}` (expected monotone_f, verdict, gap_f)"
                )))
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub enum ImmersionSpec {
    Builtin(Builtin),
    Custom {
        exprs: Vec<String>,
        axes: Vec<ParamAxis>,
    },
}

#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub name: String,
    pub ambient_dim: usize,
    pub warping_spec: String,
    pub model_dim: usize,
    pub immersion: ImmersionSpec,
    pub resolution: Vec<usize>,
    /// per-axis domain override, `axisK = lo:hi[:wrap]`
    pub axis_overrides: Vec<Option<ParamAxis>>,
    pub radii_lo: f64,
    pub radii_hi: f64,
    pub radii_count: usize,
    pub forms: Vec<HypothesisForm>,
    pub c: Option<f64>,
    pub tolerances: Tolerances,
    pub minimal: bool,
    pub compact: bool,
    pub pole_in_image: bool,
    pub output_dir: Option<String>,
    /// original config text, echoed losslessly into the manifest
    pub source: String,
}

impl ScenarioConfig {
    pub fn radii(&self) -> Vec<f64> {
        if self.radii_count == 1 {
            return vec![self.radii_lo];
        }
        let h = (self.radii_hi - self.radii_lo) / (self.radii_count - 1) as f64;
        (0..self.radii_count)
            .map(|k| self.radii_lo + k as f64 * h)
            .collect()
    }

    /// Build the immersion, applying any per-axis domain overrides.
    pub fn build_immersion(&self) -> Result<ParametricImmersion> {
        let mut im = match &self.immersion {
            ImmersionSpec::Builtin(b) => b.build()?,
            ImmersionSpec::Custom { exprs, axes } => {
                let warping = crate::model::WarpingFunction::parse_spec(&self.warping_spec)?;
                let model = crate::model::ModelSpace::new(self.ambient_dim, warping)?;
                ParametricImmersion::from_expressions(
                    format!("custom({})", self.name),
                    crate::ambient::AmbientChart::new(model),
                    exprs,
                    axes.len(),
                    axes.clone(),
                )?
            }
        };
        if self.axis_overrides.len() > im.domain.len() {
            return Err(Error::Config(format!(
                "axis override index exceeds parameter dimension {}",
                im.domain.len()
            )));
        }
        for (axis, over) in im.domain.iter_mut().zip(&self.axis_overrides) {
            if let Some(a) = over {
                *axis = a.clone();
            }
        }
        Ok(im)
    }
}

fn parse_axis(value: &str, key: &str) -> Result<ParamAxis> {
    let parts: Vec<&str> = value.split(':').map(str::trim).collect();
    if parts.len() < 2 || parts.len() > 3 {
        return Err(Error::Config(format!(
            "{key}: expected lo:hi[:wrap], got `{value}`"
        )));
    }
    let lo: f64 = parts[0]
        .parse()
        .map_err(|_| Error::Config(format!("{key}: bad number `{}`", parts[0])))?;
    let hi: f64 = parts[1]
        .parse()
        .map_err(|_| Error::Config(format!("{key}: bad number `{}`", parts[1])))?;
    let wrap = match parts.get(2) {
        None => false,
        Some(&"wrap") => true,
        Some(other) => {
            return Err(Error::Config(format!(
                "{key}: expected `wrap` as third field, got `{other}`"
            )))
        }
    };
    if !(hi > lo) {
        return Err(Error::Config(format!("{key}: need lo < hi in `{value}`")));
    }
    Ok(ParamAxis { lo, hi, wrap })
}

/// Raw section -> key -> (line number, value) map.
fn parse_sections(text: &str) -> Result<BTreeMap<String, BTreeMap<String, (usize, String)>>> {
    let mut sections: BTreeMap<String, BTreeMap<String, (usize, String)>> = BTreeMap::new();
    let mut current = String::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            current = name.trim().to_string();
            sections.entry(current.clone()).or_default();
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config(format!(
                "line {}: expected `key = value` or `[section]`, got `{line}`",
                lineno + 1
            )));
        };
        if current.is_empty() {
            return Err(Error::Config(format!(
                "line {}: `{key}` appears before any [section] header",
                lineno + 1
            )));
        }
        let prev = sections.get_mut(&current).unwrap().insert(
            key.trim().to_string(),
            (lineno + 1, value.trim().to_string()),
        );
        if prev.is_some() {
            return Err(Error::Config(format!(
                "line {}: duplicate key `{}` in [{current}]",
                lineno + 1,
                key.trim()
            )));
        }
    }
    Ok(sections)
}

struct SectionReader<'a> {
    name: &'a str,
    map: Option<&'a BTreeMap<String, (usize, String)>>,
}

impl<'a> SectionReader<'a> {
    fn get(&self, key: &str) -> Option<&'a str> {
        self.map
            .and_then(|m| m.get(key))
            .map(|(_, v)| v.as_str())
    }

    fn require(&self, key: &str) -> Result<&'a str> {
        self.get(key).ok_or_else(|| {
            Error::Config(format!("missing `{key}` in section [{}]", self.name))
        })
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v.parse::<T>().map(Some).map_err(|_| {
                let line = self.map.unwrap().get(key).unwrap().0;
                Error::Config(format!(
                    "line {line}: field `{key}` in [{}] has invalid value `{v}`",
                    self.name
                ))
            }),
        }
    }

    fn parse_required<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        self.require(key)?;
        Ok(self.parse(key)?.unwrap())
    }
}

/// Parse and validate a scenario configuration.
pub fn parse_scenario(text: &str) -> Result<ScenarioConfig> {
    let sections = parse_sections(text)?;
    let sec = |name: &'static str| SectionReader {
        name,
        map: sections.get(name),
    };

    let scenario = sec("scenario");
    let name = scenario.require("name")?.to_string();

    let immersion_sec = sec("immersion");
    let immersion = if let Some(b) = immersion_sec.get("builtin") {
        ImmersionSpec::Builtin(Builtin::parse(b)?)
    } else if let Some(chart) = immersion_sec.get("chart") {
        let exprs: Vec<String> = chart.split('|').map(|s| s.trim().to_string()).collect();
        let mut axes = Vec::new();
        for k in 1.. {
            let key = format!("u{k}");
            match immersion_sec.get(&key) {
                Some(v) => axes.push(parse_axis(v, &key)?),
                None => break,
            }
        }
        if axes.is_empty() {
            return Err(Error::Config(
                "custom chart needs axis specs u1 = lo:hi[:wrap], ...".into(),
            ));
        }
        ImmersionSpec::Custom { exprs, axes }
    } else {
        return Err(Error::Config(
            "section [immersion] needs either `builtin` or `chart`".into(),
        ));
    };

    // defaults per immersion kind, overridable by explicit flags
    let (def_minimal, def_compact, def_pole) = match &immersion {
        ImmersionSpec::Builtin(Builtin::EuclideanPlane { .. })
        | ImmersionSpec::Builtin(Builtin::HyperbolicHyperplane { .. }) => (true, false, true),
        ImmersionSpec::Builtin(Builtin::Catenoid { .. })
        | ImmersionSpec::Builtin(Builtin::HigherCatenoid { .. }) => (true, false, false),
        ImmersionSpec::Builtin(Builtin::RoundSphere { .. }) => (false, true, false),
        ImmersionSpec::Custom { .. } => (false, false, false),
    };
    let minimal = immersion_sec.parse::<bool>("minimal")?.unwrap_or(def_minimal);
    let compact = immersion_sec.parse::<bool>("compact")?.unwrap_or(def_compact);
    let pole_in_image = immersion_sec
        .parse::<bool>("pole_in_image")?
        .unwrap_or(def_pole);

    let ambient = sec("ambient");
    let model = sec("model");
    let model_dim: usize = model.parse_required("dim")?;

    // for builtins the ambient is determined by the immersion; an explicit
    // [ambient] section must agree
    let (builtin_dim, builtin_warping): (Option<usize>, Option<String>) = match &immersion {
        ImmersionSpec::Builtin(b) => {
            let im = b.build()?;
            (
                Some(im.ambient_dim()),
                Some(im.ambient.model.warping.spec().to_string()),
            )
        }
        ImmersionSpec::Custom { .. } => (None, None),
    };
    let ambient_dim: usize = match (ambient.parse::<usize>("dim")?, builtin_dim) {
        (Some(d), Some(bd)) if d != bd => {
            return Err(Error::Config(format!(
                "[ambient] dim = {d} disagrees with the builtin immersion (dim {bd})"
            )))
        }
        (Some(d), _) => d,
        (None, Some(bd)) => bd,
        (None, None) => return Err(Error::Config("missing `dim` in section [ambient]".into())),
    };
    let warping_spec = match (ambient.get("warping"), builtin_warping) {
        (Some(w), Some(bw)) if w != bw => {
            return Err(Error::Config(format!(
                "[ambient] warping `{w}` disagrees with the builtin immersion (`{bw}`)"
            )))
        }
        (Some(w), _) => w.to_string(),
        (None, Some(bw)) => bw,
        (None, None) => {
            return Err(Error::Config("missing `warping` in section [ambient]".into()))
        }
    };

    if model_dim < 2 || ambient_dim <= model_dim {
        return Err(Error::Config(format!(
            "need ambient dim n > model dim m >= 2, got n = {ambient_dim}, m = {model_dim}"
        )));
    }

    let mesh = sec("mesh");
    let resolution: Vec<usize> = mesh
        .require("resolution")?
        .split(',')
        .map(|s| {
            s.trim().parse::<usize>().map_err(|_| {
                Error::Config(format!("[mesh] resolution: bad entry `{}`", s.trim()))
            })
        })
        .collect::<Result<_>>()?;
    if resolution.iter().any(|&c| c < 2) {
        return Err(Error::Config(
            "[mesh] resolution entries must be at least 2".into(),
        ));
    }
    let mut axis_overrides = Vec::new();
    for k in 1..=resolution.len() {
        let key = format!("axis{k}");
        axis_overrides.push(match mesh.get(&key) {
            Some(v) => Some(parse_axis(v, &key)?),
            None => None,
        });
    }

    let radii = sec("radii");
    let radii_lo: f64 = radii.parse_required("lo")?;
    let radii_hi: f64 = radii.parse_required("hi")?;
    let radii_count: usize = radii.parse_required("count")?;
    if !(radii_lo > 0.0) || !(radii_hi >= radii_lo) || radii_count == 0 {
        return Err(Error::Config(format!(
            "[radii] needs 0 < lo <= hi and count >= 1, got lo = {radii_lo}, hi = {radii_hi}, count = {radii_count}"
        )));
    }

    let hyp = sec("hypotheses");
    let forms = match hyp.get("forms") {
        None => Vec::new(),
        Some(list) => list
            .split(',')
            .map(|s| HypothesisForm::parse(s.trim()))
            .collect::<Result<Vec<_>>>()?,
    };
    let c: Option<f64> = hyp.parse("c")?;

    let mut tolerances = Tolerances::default();
    if let Some(tmap) = sections.get("tolerances") {
        for (key, (line, value)) in tmap {
            let v: f64 = value.parse().map_err(|_| {
                Error::Config(format!("line {line}: tolerance `{key}` has bad value `{value}`"))
            })?;
            tolerances
                .set(key, v)
                .map_err(|e| Error::Config(format!("line {line}: {e}")))?;
        }
    }

    let output_dir = sec("output").get("directory").map(str::to_string);

    let cfg = ScenarioConfig {
        name,
        ambient_dim,
        warping_spec,
        model_dim,
        immersion,
        resolution,
        axis_overrides,
        radii_lo,
        radii_hi,
        radii_count,
        forms,
        c,
        tolerances,
        minimal,
        compact,
        pole_in_image,
        output_dir,
        source: text.to_string(),
    };

    // cross-checks that need the immersion built
    let im = cfg.build_immersion()?;
    if im.param_dim() != cfg.model_dim {
        return Err(Error::Config(format!(
            "model dim {} must equal the immersion parameter dimension {}",
            cfg.model_dim,
            im.param_dim()
        )));
    }
    if cfg.resolution.len() != im.param_dim() {
        return Err(Error::Config(format!(
            "[mesh] resolution has {} entries but the immersion has {} parameters",
            cfg.resolution.len(),
            im.param_dim()
        )));
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_configs_parse_and_validate() {
        for (name, text) in BUNDLED {
            let cfg = parse_scenario(text)
                .unwrap_or_else(|e| panic!("bundled config {name}: {e}"));
            assert!(!cfg.radii().is_empty());
            cfg.build_immersion().unwrap();
        }
    }

    #[test]
    fn dimension_invariant_enforced() {
        let text = "\
[scenario]
name = bad
[immersion]
builtin = euclidean_plane(2,3)
[model]
dim = 3
[mesh]
resolution = 5, 5
[radii]
lo = 1
hi = 2
count = 2
";
        let err = parse_scenario(text).unwrap_err();
        assert!(err.to_string().contains("n > model dim"), "{err}");
    }

    #[test]
    fn custom_chart_config() {
        let text = "\
[scenario]
name = graph
[ambient]
dim = 3
warping = space_form:0
[model]
dim = 2
[immersion]
chart = u1 | u2 | 0.1*(u1^2 - u2^2)
u1 = -3:3
u2 = -3:3
[mesh]
resolution = 11, 11
[radii]
lo = 0.5
hi = 2.5
count = 3
";
        let cfg = parse_scenario(text).unwrap();
        let im = cfg.build_immersion().unwrap();
        assert_eq!(im.param_dim(), 2);
        assert_eq!(im.ambient_dim(), 3);
        assert!(!cfg.minimal);
    }

    #[test]
    fn axis_override_applies() {
        let text = "\
[scenario]
name = cat
[immersion]
builtin = catenoid
[model]
dim = 2
[mesh]
resolution = 21, 16
axis1 = -2:2
[radii]
lo = 1.5
hi = 3
count = 2
";
        let cfg = parse_scenario(text).unwrap();
        let im = cfg.build_immersion().unwrap();
        assert_eq!(im.domain[0].lo, -2.0);
        assert_eq!(im.domain[0].hi, 2.0);
        assert!(im.domain[1].wrap);
    }

    #[test]
    fn diagnostics_name_line_and_field() {
        let text = "[scenario]\nname = x\n[immersion]\nbuiltin = catenoid\n[model]\ndim = 2\n[mesh]\nresolution = 5, 5\n[radii]\nlo = what\nhi = 2\ncount = 2\n";
        let err = parse_scenario(text).unwrap_err().to_string();
        assert!(err.contains("lo") && err.contains("line"), "{err}");
        let err = parse_scenario("stray = 1\n").unwrap_err().to_string();
        assert!(err.contains("before any"), "{err}");
    }

    #[test]
    fn tolerance_overrides() {
        let mut t = Tolerances::default();
        t.set("verdict", 0.05).unwrap();
        assert_eq!(t.verdict, 0.05);
        assert!(t.set("bogus", 0.1).is_err());
        assert!(t.set("verdict", -1.0).is_err());
    }
}
