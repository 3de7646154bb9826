//! Run configuration: defaults, JSON file, then `--set` overrides, resolved
//! through a single JSON document so every layer goes through the same
//! strict deserializer.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use spdc_core::{DesignSpec, DispersionModel, InstrumentResponse, PeakThresholds, UniformGrid};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SignalGrid {
    pub min_um: f64,
    pub max_um: f64,
    pub step_um: f64,
}

impl Default for SignalGrid {
    fn default() -> Self {
        Self {
            min_um: 0.60,
            max_um: 0.70,
            step_um: 2e-5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AngleGrid {
    pub min_deg: f64,
    pub max_deg: f64,
    pub step_deg: f64,
}

impl Default for AngleGrid {
    fn default() -> Self {
        Self {
            min_deg: -2.2,
            max_deg: 2.2,
            step_deg: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Peak inclusion, as fractions of the spectrum maximum.
    pub min_height: f64,
    pub min_prominence: f64,
    /// Multiply remapped idler intensities by the (λ_s/λ_i)² density factor.
    pub apply_jacobian: bool,
    /// Optional two-column reference spectrum for the SPCC.
    pub reference_csv: Option<PathBuf>,
    pub reference_column: Option<String>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        let t = PeakThresholds::default();
        Self {
            min_height: t.min_height,
            min_prominence: t.min_prominence,
            apply_jacobian: false,
            reference_csv: None,
            reference_column: None,
        }
    }
}

impl AnalysisConfig {
    pub fn thresholds(&self) -> PeakThresholds {
        PeakThresholds {
            min_height: self.min_height,
            min_prominence: self.min_prominence,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub design: DesignSpec,
    pub pump_wavelength_um: f64,
    pub temperature_c: f64,
    pub signal_grid: SignalGrid,
    pub angle_grid: AngleGrid,
    pub instrument: InstrumentResponse,
    pub analysis: AnalysisConfig,
    pub dispersion: DispersionModel,
    /// Fixed signal wavelength of the angular cross-section.
    pub cross_section_wavelength_um: f64,
    pub sweep_temperatures_c: Vec<f64>,
    /// Where artifacts go. Not recorded in the manifest, so runs into
    /// different directories produce identical manifests.
    #[serde(skip_serializing)]
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            design: DesignSpec::design_1(),
            pump_wavelength_um: 0.532,
            temperature_c: 22.0,
            signal_grid: SignalGrid::default(),
            angle_grid: AngleGrid::default(),
            instrument: InstrumentResponse::default(),
            analysis: AnalysisConfig::default(),
            dispersion: DispersionModel::default(),
            cross_section_wavelength_um: 0.645,
            sweep_temperatures_c: vec![22.0, 100.0],
            output_dir: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn signal_points(&self) -> Result<Vec<f64>, CliError> {
        let g = &self.signal_grid;
        Ok(UniformGrid::new(g.min_um, g.max_um, g.step_um)?.points())
    }

    pub fn angle_points(&self) -> Result<Vec<f64>, CliError> {
        let g = &self.angle_grid;
        Ok(UniformGrid::new(g.min_deg, g.max_deg, g.step_deg)?.points())
    }

    /// Semantic checks that the type system does not cover.
    pub fn check(&self) -> Result<(), CliError> {
        let report = spdc_core::validate(&self.design);
        if !report.is_valid() {
            return Err(CliError::Config(format!("invalid design: {}", report.messages().join("; "))));
        }
        self.dispersion.check()?;
        self.instrument.check()?;
        self.analysis.thresholds().check()?;
        if !(self.pump_wavelength_um > 0.0) {
            return Err(CliError::Config("pump_wavelength_um must be positive".into()));
        }
        if !self.temperature_c.is_finite() {
            return Err(CliError::Config("temperature_c must be finite".into()));
        }
        self.signal_points()?;
        self.angle_points()?;
        Ok(())
    }
}

/// Everything needed to reproduce a run.
#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub artifact_version: String,
    pub command: String,
    pub config: RunConfig,
}

impl Manifest {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        Self {
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config: config.clone(),
        }
    }
}

fn parse_json(text: &str, origin: &str) -> Result<Value, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Parse(format!("{origin}: {e}")))
}

/// Reads a JSON file; parse failures are reported as parse errors.
pub fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_json(&text, &path.display().to_string())
}

/// Recursively overlays `top` onto `base`; objects merge, everything else replaces.
fn merge(base: &mut Value, top: Value) {
    match (base, top) {
        (Value::Object(b), Value::Object(t)) => {
            for (k, v) in t {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Applies one `dotted.path=value` override. The value is read as JSON when
/// it parses, otherwise as a plain string.
fn apply_set(doc: &mut Value, assignment: &str) -> Result<(), CliError> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Parse(format!("--set expects key=value, got '{assignment}'")))?;
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(CliError::Parse(format!("--set: malformed key '{path}'")));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = doc;
    for key in &keys[..keys.len() - 1] {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| CliError::Parse(format!("--set: '{path}' descends into a non-object")))?;
        node = obj.entry(key.to_string()).or_insert_with(|| Value::Object(Map::new()));
    }
    let obj = node
        .as_object_mut()
        .ok_or_else(|| CliError::Parse(format!("--set: '{path}' descends into a non-object")))?;
    obj.insert(keys[keys.len() - 1].to_string(), value);
    Ok(())
}

/// Deserializes with the failing key path in the message.
pub fn from_value<T: serde::de::DeserializeOwned>(value: Value, what: &str) -> Result<T, CliError> {
    from_value_at(value, what, None)
}

/// Like [`from_value`] for a value nested under `prefix` in its document.
pub fn from_value_at<T: serde::de::DeserializeOwned>(
    value: Value,
    what: &str,
    prefix: Option<&str>,
) -> Result<T, CliError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let path = match (prefix, path.as_str()) {
            (None, ".") => None,
            (Some(p), ".") => Some(p.to_string()),
            (None, _) => Some(path),
            (Some(p), _) => Some(format!("{p}.{path}")),
        };
        match path {
            None => CliError::Parse(format!("{what}: {}", e.inner())),
            Some(path) => CliError::Parse(format!("{what}: key '{path}': {}", e.inner())),
        }
    })
}

/// A config file may be a bare run configuration or a run manifest.
fn unwrap_manifest(doc: Value) -> Value {
    match doc {
        Value::Object(mut m) if m.contains_key("artifact_version") && m.contains_key("config") => {
            m.remove("config").unwrap_or(Value::Null)
        }
        other => other,
    }
}

/// Defaults ← config file ← `--set` overrides ← `--out`.
pub fn resolve(config: Option<&Path>, sets: &[String], out: Option<&Path>) -> Result<RunConfig, CliError> {
    let mut doc = serde_json::to_value(RunConfig::default()).map_err(|e| CliError::Runtime(e.to_string()))?;
    if let Some(path) = config {
        let file = unwrap_manifest(read_json(path)?);
        if !file.is_object() {
            return Err(CliError::Parse(format!("{}: top level must be a JSON object", path.display())));
        }
        merge(&mut doc, file);
    }
    for s in sets {
        apply_set(&mut doc, s)?;
    }
    let mut cfg: RunConfig = from_value(doc, "config")?;
    if let Some(out) = out {
        cfg.output_dir = out.to_path_buf();
    }
    Ok(cfg)
}
