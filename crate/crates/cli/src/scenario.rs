//! Scenario files: TOML with a mandatory `units = "natural"` field.
//!
//! Loading happens in two passes. The text is parsed into raw sections with
//! unknown keys rejected, then every section is validated and all problems
//! are reported together with their field paths.

use std::fmt;
use std::path::{Path, PathBuf};

use matterwave::labframe::{GravityModel, SpeciesForce};
use matterwave::visibility::{MassSpectrum, SpectrumKind, DEFAULT_NODES};
use matterwave::wavepacket::{AxisLabel, GridAxis, InitialState, Profile};
use matterwave::worldline::ScreenWorldline;
use serde::{Deserialize, Serialize};

pub const DEFAULT_POINTS: usize = 16384;
pub const DEFAULT_SPACING: f64 = 0.005;
pub const DEFAULT_WIDTH_X: f64 = 1.0;
pub const DEFAULT_WIDTH_Y: f64 = 1.0;
pub const DEFAULT_CURVE_POINTS: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Issue {
    pub path: String,
    pub reason: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.reason)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid override `{0}`: expected key=value")]
    Override(String),
    #[error("invalid scenario:\n{}", .0.iter().map(|i| format!("  {i}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<Issue>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Pattern,
    VisibilityCurve,
    Revival,
    TauDec,
    FrameEquivalence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Shifted,
    Full,
    Lab,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct Raw {
    units: Option<String>,
    #[serde(default = "default_experiment")]
    experiment: Experiment,
    k0: Option<f64>,
    distance: Option<f64>,
    #[serde(default = "default_method")]
    method: Method,
    source: Option<RawSource>,
    #[serde(default)]
    grid: RawGrid,
    spectrum: Option<RawSpectrum>,
    #[serde(default)]
    screen: RawScreen,
    gravity: Option<RawGravity>,
    sweep: Option<RawSweep>,
    #[serde(default)]
    output: RawOutput,
}

fn default_experiment() -> Experiment {
    Experiment::Pattern
}

fn default_method() -> Method {
    Method::Shifted
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum RawSource {
    DoubleSlit {
        z1: f64,
        z2: f64,
        slit_width: f64,
        width_x: Option<f64>,
        width_y: Option<f64>,
    },
    Gaussian {
        center: Option<f64>,
        width: f64,
        width_x: Option<f64>,
        width_y: Option<f64>,
    },
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    points: Option<usize>,
    spacing: Option<f64>,
    extent: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum RawSpectrum {
    Discrete {
        masses: Vec<f64>,
        weights: Vec<f64>,
    },
    Gaussian {
        mean: f64,
        std: f64,
        nodes: Option<usize>,
    },
    Thermal {
        m0: f64,
        n: f64,
        kt: f64,
        nodes: Option<usize>,
    },
}

/// Screen motion, independent of its distance.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RawScreen {
    #[default]
    Rest,
    UniformVelocity {
        beta: f64,
    },
    UniformAcceleration {
        g: f64,
        /// End of validity; defaults to `0.5 / |g|`.
        end: Option<f64>,
    },
    Tabulated {
        t: Vec<f64>,
        z: Vec<f64>,
    },
}

pub type ScreenSpec = RawScreen;

impl ScreenSpec {
    pub fn worldline(&self, distance: f64) -> matterwave::Result<ScreenWorldline> {
        match self {
            RawScreen::Rest => ScreenWorldline::rest(distance),
            RawScreen::UniformVelocity { beta } => ScreenWorldline::uniform_velocity(*beta, distance),
            RawScreen::UniformAcceleration { g, end } => {
                if *g == 0.0 {
                    ScreenWorldline::rest(distance)
                } else {
                    ScreenWorldline::uniform_acceleration(*g, distance, end.unwrap_or(0.5 / g.abs()))
                }
            }
            RawScreen::Tabulated { t, z } => ScreenWorldline::tabulated(t.clone(), z.clone(), distance),
        }
    }

    pub fn acceleration(&self) -> Option<f64> {
        match self {
            RawScreen::UniformAcceleration { g, .. } => Some(*g),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum RawGravity {
    Eep { g: [f64; 3] },
    Violating { forces: Vec<RawForce> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawForce {
    mass: f64,
    force: [f64; 3],
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    t_start: f64,
    t_end: f64,
    points: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
}

/// Mean arrival times to visit.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub t_start: f64,
    pub t_end: f64,
    pub points: usize,
}

impl Sweep {
    pub fn times(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.t_start];
        }
        (0..self.points)
            .map(|i| self.t_start + (self.t_end - self.t_start) * i as f64 / (self.points - 1) as f64)
            .collect()
    }
}

/// A validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub experiment: Experiment,
    pub k0: f64,
    pub distance: Option<f64>,
    pub method: Method,
    pub initial: InitialState,
    pub axis: GridAxis,
    pub spectrum: MassSpectrum,
    pub screen: ScreenSpec,
    pub gravity: Option<GravityModel>,
    pub sweep: Option<Sweep>,
    pub output_dir: PathBuf,
}

pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    load_scenario_with(path, &[])
}

/// Loads a scenario and applies `key=value` overrides (dotted keys) before
/// validation.
pub fn load_scenario_with(path: &Path, overrides: &[String]) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_scenario(&text, overrides)
}

pub fn parse_scenario(text: &str, overrides: &[String]) -> Result<Scenario, ScenarioError> {
    let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| ScenarioError::Parse(e.to_string()))?;
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    let raw: Raw = toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| ScenarioError::Parse(e.to_string()))?;
    validate(raw)
}

fn apply_override(table: &mut toml::Table, text: &str) -> Result<(), ScenarioError> {
    let (key, value) = text
        .split_once('=')
        .ok_or_else(|| ScenarioError::Override(text.to_string()))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(ScenarioError::Override(text.to_string()));
    }
    let value = parse_value(value.trim());
    let parts: Vec<&str> = key.split('.').collect();
    let mut current = table;
    for part in &parts[..parts.len() - 1] {
        let entry = current
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        current = entry
            .as_table_mut()
            .ok_or_else(|| ScenarioError::Override(format!("{text} ({part} is not a section)")))?;
    }
    current.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// TOML literal if it parses as one, otherwise a bare string.
fn parse_value(text: &str) -> toml::Value {
    format!("v = {text}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(text.to_string()))
}

struct Issues(Vec<Issue>);

impl Issues {
    fn push(&mut self, path: impl Into<String>, reason: impl Into<String>) {
        self.0.push(Issue {
            path: path.into(),
            reason: reason.into(),
        });
    }

    fn positive(&mut self, path: &str, v: f64) -> bool {
        let ok = v > 0.0 && v.is_finite();
        if !ok {
            self.push(path, format!("{v} must be positive"));
        }
        ok
    }
}

fn validate(raw: Raw) -> Result<Scenario, ScenarioError> {
    let mut issues = Issues(Vec::new());
    match raw.units.as_deref() {
        Some("natural") => {}
        Some(u) => issues.push("units", format!("`{u}` is not supported; only \"natural\"")),
        None => issues.push("units", "missing; must be \"natural\""),
    }
    let k0 = match raw.k0 {
        Some(k) if issues.positive("k0", k) => Some(k),
        Some(_) => None,
        None => {
            issues.push("k0", "missing");
            None
        }
    };
    if let Some(l) = raw.distance {
        issues.positive("distance", l);
    }

    let initial = match (&raw.source, k0) {
        (None, _) => {
            issues.push("source", "missing section");
            None
        }
        (Some(src), Some(k0)) => build_source(src, k0, &mut issues),
        (Some(_), None) => None,
    };
    let axis = build_grid(&raw.grid, &mut issues);
    let spectrum = match &raw.spectrum {
        None => {
            issues.push("spectrum", "missing section");
            None
        }
        Some(s) => build_spectrum(s, &mut issues),
    };
    check_screen(&raw.screen, &mut issues);
    let gravity = raw.gravity.as_ref().and_then(|g| build_gravity(g, &mut issues));
    let sweep = raw.sweep.as_ref().and_then(|s| {
        let before = issues.0.len();
        issues.positive("sweep.t_start", s.t_start);
        issues.positive("sweep.t_end", s.t_end);
        if s.t_end < s.t_start {
            issues.push("sweep.t_end", "must not precede sweep.t_start");
        }
        let points = s.points.unwrap_or(DEFAULT_CURVE_POINTS);
        if points == 0 {
            issues.push("sweep.points", "must be at least 1");
        }
        (issues.0.len() == before).then(|| Sweep {
            t_start: s.t_start,
            t_end: s.t_end,
            points,
        })
    });

    // experiment-specific requirements
    let needs_distance = matches!(raw.experiment, Experiment::Pattern | Experiment::FrameEquivalence);
    if needs_distance && raw.distance.is_none() {
        issues.push("distance", "required for this experiment");
    }
    let double_slit = matches!(raw.source, Some(RawSource::DoubleSlit { .. }));
    if raw.method == Method::Lab && raw.gravity.is_none() {
        issues.push("gravity", "required when method = \"lab\"");
    }
    match raw.experiment {
        Experiment::Pattern => {}
        Experiment::VisibilityCurve => {
            if raw.sweep.is_none() {
                issues.push("sweep", "required for a visibility curve");
            }
            if !double_slit {
                issues.push("source.kind", "visibility curves need a double slit");
            }
        }
        Experiment::Revival => {
            if !matches!(raw.spectrum, Some(RawSpectrum::Discrete { .. })) {
                issues.push("spectrum.kind", "revival needs a discrete spectrum");
            }
            if raw.screen.acceleration().is_none() {
                issues.push("screen.kind", "revival needs a uniformly accelerating screen");
            }
            if !double_slit {
                issues.push("source.kind", "revival needs a double slit");
            }
        }
        Experiment::TauDec => {
            if !matches!(raw.spectrum, Some(RawSpectrum::Thermal { .. })) {
                issues.push("spectrum.kind", "tau-dec needs a thermal spectrum");
            }
            if !matches!(raw.screen.acceleration(), Some(g) if g > 0.0) {
                issues.push("screen.kind", "tau-dec needs a screen accelerating with g > 0");
            }
            if !double_slit {
                issues.push("source.kind", "tau-dec needs a double slit");
            }
        }
        Experiment::FrameEquivalence => match &raw.gravity {
            _ if !double_slit => issues.push("source.kind", "frame equivalence needs a double slit"),
            None => issues.push("gravity", "required for frame equivalence"),
            Some(RawGravity::Violating { .. }) => {
                issues.push("gravity.kind", "frame equivalence needs kind = \"eep\"")
            }
            Some(RawGravity::Eep { .. }) => {}
        },
    }
    if let (Some(ini), Some(s)) = (&initial, &spectrum) {
        if let Err(e) = ini.check_nonrelativistic(s.masses()) {
            issues.push("k0", e.to_string());
        }
    }

    if !issues.0.is_empty() {
        return Err(ScenarioError::Invalid(issues.0));
    }
    Ok(Scenario {
        experiment: raw.experiment,
        k0: k0.expect("validated"),
        distance: raw.distance,
        method: raw.method,
        initial: initial.expect("validated"),
        axis: axis.expect("validated"),
        spectrum: spectrum.expect("validated"),
        screen: raw.screen,
        gravity,
        sweep,
        output_dir: raw.output.dir.unwrap_or_else(|| PathBuf::from("output")),
    })
}

fn build_source(src: &RawSource, k0: f64, issues: &mut Issues) -> Option<InitialState> {
    let before = issues.0.len();
    let (profile, wx, wy) = match src {
        RawSource::DoubleSlit {
            z1,
            z2,
            slit_width,
            width_x,
            width_y,
        } => {
            issues.positive("source.slit_width", *slit_width);
            if z1 == z2 {
                issues.push("source.z2", "slits must be separated");
            }
            (
                Profile::DoubleSlit {
                    z1: *z1,
                    z2: *z2,
                    epsilon: *slit_width,
                },
                width_x,
                width_y,
            )
        }
        RawSource::Gaussian {
            center,
            width,
            width_x,
            width_y,
        } => {
            issues.positive("source.width", *width);
            (
                Profile::Gaussian {
                    center: center.unwrap_or(0.0),
                    width: *width,
                },
                width_x,
                width_y,
            )
        }
    };
    let wx = width_x_or_default(*wx, "source.width_x", issues);
    let wy = width_x_or_default(wy.or(Some(DEFAULT_WIDTH_Y)), "source.width_y", issues);
    if issues.0.len() != before {
        return None;
    }
    InitialState::new(profile, wx, wy, k0)
        .map_err(|e| issues.push("source", e.to_string()))
        .ok()
}

fn width_x_or_default(v: Option<f64>, path: &str, issues: &mut Issues) -> f64 {
    let v = v.unwrap_or(DEFAULT_WIDTH_X);
    issues.positive(path, v);
    v
}

fn build_grid(g: &RawGrid, issues: &mut Issues) -> Option<GridAxis> {
    let points = g.points.unwrap_or(DEFAULT_POINTS);
    if points < 2 || !points.is_power_of_two() {
        issues.push("grid.points", format!("{points} must be a power of two ≥ 2"));
        return None;
    }
    let spacing = match (g.spacing, g.extent) {
        (Some(_), Some(_)) => {
            issues.push("grid.extent", "give either spacing or extent, not both");
            return None;
        }
        (Some(h), None) => h,
        (None, Some(e)) => e / points as f64,
        (None, None) => DEFAULT_SPACING,
    };
    if !issues.positive(if g.extent.is_some() { "grid.extent" } else { "grid.spacing" }, spacing) {
        return None;
    }
    GridAxis::centered(AxisLabel::Z, points, spacing)
        .map_err(|e| issues.push("grid", e.to_string()))
        .ok()
}

fn build_spectrum(s: &RawSpectrum, issues: &mut Issues) -> Option<MassSpectrum> {
    let before = issues.0.len();
    let (kind, nodes) = match s {
        RawSpectrum::Discrete { masses, weights } => {
            for (i, m) in masses.iter().enumerate() {
                issues.positive(&format!("spectrum.masses[{i}]"), *m);
            }
            for (i, p) in weights.iter().enumerate() {
                if !(0.0..=1.0).contains(p) {
                    issues.push(format!("spectrum.weights[{i}]"), format!("{p} not in [0, 1]"));
                }
            }
            if masses.len() != weights.len() {
                issues.push(
                    "spectrum.weights",
                    format!("{} weights for {} masses", weights.len(), masses.len()),
                );
            }
            (
                SpectrumKind::Discrete {
                    masses: masses.clone(),
                    weights: weights.clone(),
                },
                DEFAULT_NODES,
            )
        }
        RawSpectrum::Gaussian { mean, std, nodes } => {
            issues.positive("spectrum.mean", *mean);
            if !(*std >= 0.0) {
                issues.push("spectrum.std", format!("{std} must be non-negative"));
            }
            (
                SpectrumKind::Gaussian { mean: *mean, std: *std },
                nodes.unwrap_or(DEFAULT_NODES),
            )
        }
        RawSpectrum::Thermal { m0, n, kt, nodes } => {
            issues.positive("spectrum.m0", *m0);
            issues.positive("spectrum.n", *n);
            issues.positive("spectrum.kt", *kt);
            (
                SpectrumKind::Thermal {
                    m0: *m0,
                    n: *n,
                    kt: *kt,
                },
                nodes.unwrap_or(DEFAULT_NODES),
            )
        }
    };
    if nodes == 0 {
        issues.push("spectrum.nodes", "must be at least 1");
    }
    if issues.0.len() != before {
        return None;
    }
    match MassSpectrum::new(kind, nodes) {
        Ok(s) => Some(s),
        Err(e) => {
            let path = if e.to_string().contains("weights") {
                "spectrum.weights"
            } else {
                "spectrum"
            };
            issues.push(path, e.to_string());
            None
        }
    }
}

fn check_screen(s: &RawScreen, issues: &mut Issues) {
    match s {
        RawScreen::Rest => {}
        RawScreen::UniformVelocity { beta } => {
            if !(beta.abs() < 1.0) {
                issues.push("screen.beta", format!("|{beta}| must be below 1"));
            }
        }
        RawScreen::UniformAcceleration { g, end } => {
            if !g.is_finite() {
                issues.push("screen.g", "must be finite");
            }
            if let Some(e) = end {
                if !(*e > 0.0 && g.abs() * e < 1.0) {
                    issues.push("screen.end", format!("{e} must be positive with |g| end < 1"));
                }
            }
        }
        RawScreen::Tabulated { t, z } => {
            if let Err(e) = ScreenWorldline::tabulated(t.clone(), z.clone(), 1.0) {
                issues.push("screen", e.to_string());
            }
        }
    }
}

fn build_gravity(g: &RawGravity, issues: &mut Issues) -> Option<GravityModel> {
    match g {
        RawGravity::Eep { g } => {
            if g.iter().any(|c| !c.is_finite()) {
                issues.push("gravity.g", "components must be finite");
                return None;
            }
            Some(GravityModel::Eep { g: *g })
        }
        RawGravity::Violating { forces } => {
            let before = issues.0.len();
            for (i, f) in forces.iter().enumerate() {
                issues.positive(&format!("gravity.forces[{i}].mass"), f.mass);
            }
            (issues.0.len() == before).then(|| GravityModel::Violating {
                forces: forces
                    .iter()
                    .map(|f| SpeciesForce {
                        mass: f.mass,
                        force: f.force,
                    })
                    .collect(),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
units = "natural"
k0 = 200.0
distance = 100.0

[source]
kind = "double-slit"
z1 = 0.5
z2 = -0.5
slit_width = 0.02

[spectrum]
kind = "discrete"
masses = [10000.0]
weights = [1.0]
"#;

    #[test]
    fn minimal_scenario_gets_defaults() {
        let s = parse_scenario(MINIMAL, &[]).unwrap();
        assert_eq!(s.experiment, Experiment::Pattern);
        assert_eq!(s.method, Method::Shifted);
        assert_eq!(s.axis.points, DEFAULT_POINTS);
        assert_eq!(s.axis.spacing, DEFAULT_SPACING);
        assert_eq!(s.screen, RawScreen::Rest);
        assert_eq!(s.output_dir, PathBuf::from("output"));
        assert_eq!(s.initial.x_factor().width, DEFAULT_WIDTH_X);
    }

    #[test]
    fn units_are_mandatory() {
        let text = MINIMAL.replace("units = \"natural\"", "");
        let Err(ScenarioError::Invalid(issues)) = parse_scenario(&text, &[]) else {
            panic!("expected validation error");
        };
        assert!(issues.iter().any(|i| i.path == "units"));
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = format!("{MINIMAL}\n[grid]\npoints = 1024\nspcing = 0.01\n");
        assert!(matches!(parse_scenario(&text, &[]), Err(ScenarioError::Parse(_))));
    }

    #[test]
    fn errors_are_aggregated() {
        let text = MINIMAL
            .replace("masses = [10000.0]", "masses = [-1.0]")
            .replace("slit_width = 0.02", "slit_width = -0.02");
        let Err(ScenarioError::Invalid(issues)) = parse_scenario(&text, &[]) else {
            panic!("expected validation error");
        };
        let paths: Vec<&str> = issues.iter().map(|i| i.path.as_str()).collect();
        assert!(paths.contains(&"spectrum.masses[0]"), "{paths:?}");
        assert!(paths.contains(&"source.slit_width"), "{paths:?}");
    }

    #[test]
    fn overrides_apply_dotted_keys() {
        let s = parse_scenario(
            MINIMAL,
            &["grid.points=2048".into(), "distance=150".into(), "output.dir=runs/a".into()],
        )
        .unwrap();
        assert_eq!(s.axis.points, 2048);
        assert_eq!(s.distance, Some(150.0));
        assert_eq!(s.output_dir, PathBuf::from("runs/a"));
        assert!(matches!(
            parse_scenario(MINIMAL, &["novalue".into()]),
            Err(ScenarioError::Override(_))
        ));
    }

    #[test]
    fn experiment_requirements() {
        let text = MINIMAL.replace("k0 = 200.0", "k0 = 200.0\nexperiment = \"tau-dec\"");
        let Err(ScenarioError::Invalid(issues)) = parse_scenario(&text, &[]) else {
            panic!("expected validation error");
        };
        let paths: Vec<&str> = issues.iter().map(|i| i.path.as_str()).collect();
        assert!(paths.contains(&"spectrum.kind") && paths.contains(&"screen.kind"), "{paths:?}");
    }

    #[test]
    fn sweep_times() {
        let s = Sweep {
            t_start: 1.0,
            t_end: 3.0,
            points: 3,
        };
        assert_eq!(s.times(), vec![1.0, 2.0, 3.0]);
    }
}
