use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use spdc_core::analysis::{comb_stats, predict_comb, to_idler, CombPrediction, CombStats};
use spdc_core::instrument::{convolve_angular, convolve_map, convolve_spectrum, normalize_max};
use spdc_core::io::{create, read_spectrum_file, write_columns, write_json, write_map_file, write_table};
use spdc_core::{design_length, validate, DesignSpec, Simulation, Spectrum};

use crate::config::{from_value, from_value_at, read_json, Manifest, RunConfig};
use crate::error::CliError;

/// Signal and idler statistics of one spectrum.
#[derive(Debug, Serialize)]
pub struct ChannelStats {
    pub signal: CombStats,
    pub idler: CombStats,
}

/// A simulated collinear spectrum before and after instrument smoothing.
pub struct SimulatedSpectrum {
    pub raw: Spectrum,
    pub convolved: Spectrum,
}

fn write_manifest(cfg: &RunConfig, command: &str) -> Result<(), CliError> {
    write_json(&cfg.output_dir.join("run_manifest.json"), &Manifest::new(command, cfg))?;
    Ok(())
}

fn reference(cfg: &RunConfig) -> Result<Option<Spectrum>, CliError> {
    match &cfg.analysis.reference_csv {
        None => Ok(None),
        Some(path) => Ok(Some(read_spectrum_file(path, cfg.analysis.reference_column.as_deref())?)),
    }
}

/// Collinear spectrum at `temperature_c`, smoothed with the configured response.
pub fn simulate_spectrum(cfg: &RunConfig, temperature_c: f64) -> Result<SimulatedSpectrum, CliError> {
    let grid = cfg.signal_points()?;
    let sim = Simulation::new(&cfg.dispersion, &cfg.design, cfg.pump_wavelength_um, temperature_c);
    let raw = sim.spectrum(&grid, 0.0)?;
    let convolved = convolve_spectrum(&raw, &cfg.instrument)?;
    Ok(SimulatedSpectrum { raw, convolved })
}

/// Statistics of the peak-normalized smoothed spectrum in both channels.
pub fn analyze(cfg: &RunConfig, s: &SimulatedSpectrum, reference: Option<&Spectrum>) -> Result<ChannelStats, CliError> {
    let thresholds = cfg.analysis.thresholds();
    let signal = normalize_max(&s.convolved)?;
    let idler = to_idler(&signal, cfg.pump_wavelength_um, cfg.analysis.apply_jacobian)?;
    let idler_reference = reference
        .map(|r| to_idler(r, cfg.pump_wavelength_um, cfg.analysis.apply_jacobian))
        .transpose()?;
    Ok(ChannelStats {
        signal: comb_stats(&signal, &thresholds, reference)?,
        idler: comb_stats(&idler, &thresholds, idler_reference.as_ref())?,
    })
}

fn write_spectrum(path: &Path, s: &SimulatedSpectrum) -> Result<(), CliError> {
    write_columns(
        create(path)?,
        s.raw.axis(),
        &[("intensity", s.raw.intensity()), ("intensity_convolved", s.convolved.intensity())],
    )?;
    Ok(())
}

fn summary(stats: &CombStats) -> String {
    let fmt = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.6}"));
    format!(
        "{:?}: {} peaks, mean spacing {} um, envelope FWHM {} um",
        stats.channel,
        stats.peaks.len(),
        fmt(stats.mean_spacing),
        fmt(stats.envelope.as_ref().map(|e| e.fwhm))
    )
}

pub fn simulate(cfg: &RunConfig) -> Result<(), CliError> {
    cfg.check()?;
    let reference = reference(cfg)?;
    let s = simulate_spectrum(cfg, cfg.temperature_c)?;
    let stats = analyze(cfg, &s, reference.as_ref())?;
    write_spectrum(&cfg.output_dir.join("spectrum.csv"), &s)?;
    write_json(&cfg.output_dir.join("stats.json"), &stats)?;
    write_manifest(cfg, "simulate")?;
    log::info!("{}", summary(&stats.signal));
    log::info!("{}", summary(&stats.idler));
    Ok(())
}

#[derive(Serialize)]
struct AxisInfo {
    min: f64,
    max: f64,
    step: f64,
    count: usize,
}

#[derive(Serialize)]
struct MapSidecar<'a> {
    layout: &'static str,
    wavelength_um: AxisInfo,
    theta_deg: AxisInfo,
    design: &'a DesignSpec,
    pump_wavelength_um: f64,
    temperature_c: f64,
    files: Value,
    spectral_fwhm_um: f64,
    angular_fwhm_deg: f64,
    cross_section_wavelength_um: f64,
}

pub fn map2d(cfg: &RunConfig) -> Result<(), CliError> {
    cfg.check()?;
    let lambdas = cfg.signal_points()?;
    let thetas = cfg.angle_points()?;
    let sim = Simulation::new(&cfg.dispersion, &cfg.design, cfg.pump_wavelength_um, cfg.temperature_c);
    let map = sim.angular_map(&lambdas, &thetas)?;
    let smoothed = convolve_map(&map, &cfg.instrument)?;
    let section = sim.angular_cross_section(cfg.cross_section_wavelength_um, &thetas)?;
    let section_smoothed = convolve_angular(&section, &thetas, cfg.instrument.angular_fwhm_deg)?;

    let dir = &cfg.output_dir;
    write_map_file(&dir.join("map.csv"), &map)?;
    write_map_file(&dir.join("map_convolved.csv"), &smoothed)?;
    write_table(
        create(&dir.join("cross_section.csv"))?,
        "theta_deg",
        &thetas,
        &[("intensity", &section), ("intensity_convolved", &section_smoothed)],
    )?;
    let axis = |v: &[f64], step: f64| AxisInfo {
        min: v[0],
        max: v[v.len() - 1],
        step,
        count: v.len(),
    };
    let sidecar = MapSidecar {
        layout: "rows are signal wavelengths, columns are external angles",
        wavelength_um: axis(&lambdas, cfg.signal_grid.step_um),
        theta_deg: axis(&thetas, cfg.angle_grid.step_deg),
        design: &cfg.design,
        pump_wavelength_um: cfg.pump_wavelength_um,
        temperature_c: cfg.temperature_c,
        files: serde_json::json!({
            "map": "map.csv",
            "map_convolved": "map_convolved.csv",
            "cross_section": "cross_section.csv",
        }),
        spectral_fwhm_um: cfg.instrument.spectral_fwhm_um,
        angular_fwhm_deg: cfg.instrument.angular_fwhm_deg,
        cross_section_wavelength_um: cfg.cross_section_wavelength_um,
    };
    write_json(&dir.join("map.json"), &sidecar)?;
    write_manifest(cfg, "map2d")?;
    log::info!("map {} x {} written to {}", lambdas.len(), thetas.len(), dir.display());
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct SweepPoint {
    pub temperature_c: f64,
    pub file: String,
    pub signal_center_um: Option<f64>,
    pub idler_center_um: Option<f64>,
    pub signal_fwhm_um: Option<f64>,
    pub idler_fwhm_um: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct SweepShift {
    pub from_c: f64,
    pub to_c: f64,
    pub signal_shift_um: Option<f64>,
    pub idler_shift_um: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct SweepSummary {
    pub points: Vec<SweepPoint>,
    /// Envelope-center motion between consecutive temperatures.
    pub shifts: Vec<SweepShift>,
    /// First to last temperature.
    pub total: SweepShift,
}

fn shift(a: &SweepPoint, b: &SweepPoint) -> SweepShift {
    let diff = |x: Option<f64>, y: Option<f64>| x.zip(y).map(|(x, y)| y - x);
    SweepShift {
        from_c: a.temperature_c,
        to_c: b.temperature_c,
        signal_shift_um: diff(a.signal_center_um, b.signal_center_um),
        idler_shift_um: diff(a.idler_center_um, b.idler_center_um),
    }
}

/// Runs the collinear spectrum at every temperature and summarizes envelope motion.
pub fn sweep_summary(cfg: &RunConfig, temperatures: &[f64], write: bool) -> Result<SweepSummary, CliError> {
    if temperatures.len() < 2 {
        return Err(CliError::Config("a temperature sweep needs at least 2 temperatures".into()));
    }
    if let Some(t) = temperatures.iter().find(|t| !t.is_finite()) {
        return Err(CliError::Config(format!("temperature {t} is not finite")));
    }
    let mut points = Vec::with_capacity(temperatures.len());
    for &t in temperatures {
        let s = simulate_spectrum(cfg, t)?;
        let stats = analyze(cfg, &s, None)?;
        let file = format!("spectrum_T{t}.csv");
        if write {
            write_spectrum(&cfg.output_dir.join(&file), &s)?;
        }
        points.push(SweepPoint {
            temperature_c: t,
            file,
            signal_center_um: stats.signal.envelope.as_ref().map(|e| e.center),
            idler_center_um: stats.idler.envelope.as_ref().map(|e| e.center),
            signal_fwhm_um: stats.signal.envelope.as_ref().map(|e| e.fwhm),
            idler_fwhm_um: stats.idler.envelope.as_ref().map(|e| e.fwhm),
        });
    }
    let shifts = points.windows(2).map(|w| shift(&w[0], &w[1])).collect();
    let total = shift(&points[0], &points[points.len() - 1]);
    Ok(SweepSummary { points, shifts, total })
}

pub fn sweep_temperature(cfg: &RunConfig, temperatures: Option<Vec<f64>>) -> Result<(), CliError> {
    let mut cfg = cfg.clone();
    if let Some(t) = temperatures {
        cfg.sweep_temperatures_c = t;
    }
    cfg.check()?;
    let summary = sweep_summary(&cfg, &cfg.sweep_temperatures_c, true)?;
    write_json(&cfg.output_dir.join("sweep.json"), &summary)?;
    write_manifest(&cfg, "sweep-temperature")?;
    let fmt = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |v| format!("{v:+.6}"));
    log::info!(
        "{} -> {} C: signal shift {} um, idler shift {} um",
        summary.total.from_c,
        summary.total.to_c,
        fmt(summary.total.signal_shift_um),
        fmt(summary.total.idler_shift_um)
    );
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct ValidationOutput {
    pub design: DesignSpec,
    pub valid: bool,
    pub violations: Vec<String>,
    pub l_stack_um: f64,
    pub l_gap_um: f64,
    pub l_design_um: Option<f64>,
    pub element_count: usize,
    pub domain_count: usize,
    pub gap_count: u32,
    pub prediction: Option<CombPrediction>,
}

/// Reads a design from a bare design object or from a config that holds one under `design`.
pub fn read_design(path: &Path) -> Result<DesignSpec, CliError> {
    let doc = read_json(path)?;
    match doc {
        Value::Object(mut m) if m.contains_key("design") => {
            let inner = m.remove("design").unwrap_or(Value::Null);
            from_value_at(inner, &path.display().to_string(), Some("design"))
        }
        other => from_value(other, &path.display().to_string()),
    }
}

pub fn validation_output(cfg: &RunConfig, spec: &DesignSpec) -> ValidationOutput {
    let report = validate(spec);
    let bracket = (cfg.signal_grid.min_um, cfg.signal_grid.max_um);
    let prediction = if report.is_valid() {
        predict_comb(&cfg.dispersion, spec, cfg.pump_wavelength_um, cfg.temperature_c, bracket)
            .map_err(|e| log::warn!("no analytic prediction: {e}"))
            .ok()
    } else {
        None
    };
    ValidationOutput {
        design: spec.clone(),
        valid: report.is_valid(),
        violations: report.messages(),
        l_stack_um: spec.l_stack(),
        l_gap_um: spec.l_gap(),
        l_design_um: design_length(spec).ok(),
        element_count: spec.element_count(),
        domain_count: spec.domain_count(),
        gap_count: spec.n_gap,
        prediction,
    }
}

pub fn validate_design(cfg: &RunConfig, design: &Path) -> Result<(), CliError> {
    let spec = read_design(design)?;
    let out = validation_output(cfg, &spec);
    let text = serde_json::to_string_pretty(&out).map_err(|e| CliError::Runtime(e.to_string()))?;
    println!("{text}");
    if out.valid {
        Ok(())
    } else {
        Err(CliError::Config(format!("invalid design: {}", out.violations.join("; "))))
    }
}

/// Default image path next to the input.
pub fn png_path(input: &Path, output: Option<&PathBuf>) -> PathBuf {
    output.cloned().unwrap_or_else(|| input.with_extension("png"))
}
