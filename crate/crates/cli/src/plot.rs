//! PNG rendering of spectra, cross-sections and maps. Presentation only: the
//! sole transformation is peak normalization.

use std::fs::File;
use std::path::Path;
use std::sync::OnceLock;

use plotters::prelude::*;
use plotters::style::colors::colormaps::{ColorMap, ViridisRGB};
use plotters::style::{register_font, FontStyle};
use spdc_core::io::{read_map_csv, read_spectrum_file, MAP_CORNER_LABEL};

use crate::error::CliError;

const FONT_CANDIDATES: &[&str] = &[
    "/usr/share/fonts/truetype/dejavu/DejaVuSans.ttf",
    "/usr/share/fonts/TTF/DejaVuSans.ttf",
    "/usr/share/fonts/dejavu/DejaVuSans.ttf",
    "/Library/Fonts/Arial.ttf",
    "C:\\Windows\\Fonts\\arial.ttf",
];
/// Overrides the font search.
const FONT_ENV: &str = "SPDC_COMB_FONT";

// simulated curves in cool colours, reference in orange
const SIMULATED: [RGBColor; 3] = [RGBColor(31, 119, 180), RGBColor(44, 160, 44), RGBColor(148, 103, 189)];
const REFERENCE: RGBColor = RGBColor(255, 127, 14);
/// Heatmaps are decimated to at most this many cells per axis.
const MAX_CELLS: usize = 600;

fn draw_err<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Runtime(format!("plotting failed: {e}"))
}

/// Registers a TrueType font once; without one, plots are drawn unlabeled.
fn labels_available() -> bool {
    static FONT: OnceLock<bool> = OnceLock::new();
    *FONT.get_or_init(|| {
        let from_env = std::env::var(FONT_ENV).ok();
        for path in from_env.iter().map(String::as_str).chain(FONT_CANDIDATES.iter().copied()) {
            if let Ok(bytes) = std::fs::read(path) {
                let bytes: &'static [u8] = Box::leak(bytes.into_boxed_slice());
                if register_font("sans-serif", FontStyle::Normal, bytes).is_ok() {
                    return true;
                }
            }
        }
        log::warn!("no usable TrueType font found (set {FONT_ENV}); drawing plots without labels");
        false
    })
}

struct Table {
    axis_name: String,
    axis: Vec<f64>,
    columns: Vec<(String, Vec<f64>)>,
}

fn read_table(path: &Path) -> Result<Table, CliError> {
    let mut r = csv::Reader::from_reader(File::open(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?);
    let header: Vec<String> = r
        .headers()
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.len() < 2 {
        return Err(CliError::Config(format!("{}: expected an axis and at least one column", path.display())));
    }
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); header.len()];
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        for (i, field) in rec.iter().enumerate().take(header.len()) {
            let v = field.trim().parse::<f64>().map_err(|_| {
                CliError::Config(format!("{}: line {}: '{field}' is not a number", path.display(), line + 2))
            })?;
            cols[i].push(v);
        }
    }
    if cols[0].len() < 2 {
        return Err(CliError::Config(format!("{}: too few rows to plot", path.display())));
    }
    let axis = cols.remove(0);
    let mut names = header.into_iter();
    let axis_name = names.next().unwrap_or_default();
    Ok(Table {
        axis_name,
        axis,
        columns: names.zip(cols).collect(),
    })
}

fn normalized(v: &[f64]) -> Vec<f64> {
    let max = v.iter().cloned().fold(0.0f64, f64::max);
    if max > 0.0 {
        v.iter().map(|x| x / max).collect()
    } else {
        v.to_vec()
    }
}

fn span(v: &[f64]) -> (f64, f64) {
    let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

/// Whether a CSV is a wavelength–angle map.
pub fn is_map(path: &Path) -> Result<bool, CliError> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(File::open(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?);
    let first = r.records().next();
    Ok(matches!(first, Some(Ok(rec)) if rec.get(0) == Some(MAP_CORNER_LABEL)))
}

/// Line plot of every data column (or just `column`), each peak-normalized,
/// with an optional reference spectrum overlaid.
pub fn line_plot(
    input: &Path,
    output: &Path,
    column: Option<&str>,
    reference: Option<&Path>,
    title: Option<&str>,
) -> Result<(), CliError> {
    let table = read_table(input)?;
    let series: Vec<&(String, Vec<f64>)> = match column {
        Some(name) => vec![table
            .columns
            .iter()
            .find(|(n, _)| n == name)
            .ok_or_else(|| CliError::Config(format!("{}: no column '{name}'", input.display())))?],
        None => table.columns.iter().collect(),
    };
    let reference = reference.map(|p| read_spectrum_file(p, None)).transpose()?;
    let (x0, x1) = span(&table.axis);
    let labels = labels_available();

    let root = BitMapBackend::new(output, (1200, 700)).into_drawing_area();
    root.fill(&WHITE).map_err(draw_err)?;
    let mut builder = ChartBuilder::on(&root);
    builder.margin(20);
    if labels {
        let default_title = input.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
        builder
            .caption(title.unwrap_or(&default_title), ("sans-serif", 26))
            .x_label_area_size(50)
            .y_label_area_size(70);
    }
    let mut chart = builder.build_cartesian_2d(x0..x1, 0.0..1.05).map_err(draw_err)?;
    if labels {
        chart
            .configure_mesh()
            .x_desc(table.axis_name.as_str())
            .y_desc("normalized intensity")
            .label_style(("sans-serif", 16))
            .draw()
            .map_err(draw_err)?;
    }
    for (i, (name, values)) in series.iter().enumerate() {
        let color = SIMULATED[i % SIMULATED.len()];
        let points: Vec<(f64, f64)> = table.axis.iter().cloned().zip(normalized(values)).collect();
        let drawn = chart.draw_series(LineSeries::new(points, color.stroke_width(2))).map_err(draw_err)?;
        if labels {
            drawn
                .label(name.as_str())
                .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 24, y)], color.stroke_width(2)));
        }
    }
    if let Some(r) = &reference {
        let points: Vec<(f64, f64)> = r
            .axis()
            .iter()
            .cloned()
            .zip(normalized(r.intensity()))
            .filter(|(x, _)| (x0..=x1).contains(x))
            .collect();
        let drawn = chart.draw_series(LineSeries::new(points, REFERENCE.stroke_width(2))).map_err(draw_err)?;
        if labels {
            drawn
                .label("reference")
                .legend(|(x, y)| PathElement::new(vec![(x, y), (x + 24, y)], REFERENCE.stroke_width(2)));
        }
    }
    if labels {
        chart
            .configure_series_labels()
            .label_font(("sans-serif", 16))
            .background_style(WHITE.mix(0.85))
            .border_style(BLACK)
            .draw()
            .map_err(draw_err)?;
    }
    root.present().map_err(draw_err)?;
    Ok(())
}

/// Heatmap with wavelength vertical and external angle horizontal.
pub fn heatmap(input: &Path, output: &Path, title: Option<&str>) -> Result<(), CliError> {
    let file = File::open(input).map_err(|e| CliError::Io(format!("{}: {e}", input.display())))?;
    let (lambdas, thetas, data) = read_map_csv(file)?;
    if lambdas.is_empty() || thetas.is_empty() {
        return Err(CliError::Config(format!("{}: empty map", input.display())));
    }
    let n_t = thetas.len();
    let max = data.iter().cloned().fold(0.0f64, f64::max);
    let scale = if max > 0.0 { 1.0 / max } else { 1.0 };
    let stride_l = lambdas.len().div_ceil(MAX_CELLS);
    let stride_t = n_t.div_ceil(MAX_CELLS);
    let half = |axis: &[f64], stride: usize| {
        if axis.len() > 1 {
            0.5 * stride as f64 * (axis[axis.len() - 1] - axis[0]) / (axis.len() - 1) as f64
        } else {
            0.5
        }
    };
    let (dl, dt) = (half(&lambdas, stride_l), half(&thetas, stride_t));
    let (l0, l1) = span(&lambdas);
    let (t0, t1) = span(&thetas);
    let labels = labels_available();

    let root = BitMapBackend::new(output, (900, 1100)).into_drawing_area();
    root.fill(&WHITE).map_err(draw_err)?;
    let mut builder = ChartBuilder::on(&root);
    builder.margin(20);
    if labels {
        let default_title = input.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
        builder
            .caption(title.unwrap_or(&default_title), ("sans-serif", 26))
            .x_label_area_size(50)
            .y_label_area_size(80);
    }
    let mut chart = builder
        .build_cartesian_2d((t0 - dt)..(t1 + dt), (l0 - dl)..(l1 + dl))
        .map_err(draw_err)?;
    if labels {
        chart
            .configure_mesh()
            .disable_mesh()
            .x_desc("external angle (deg)")
            .y_desc("signal wavelength (um)")
            .label_style(("sans-serif", 16))
            .draw()
            .map_err(draw_err)?;
    }
    let cells = (0..lambdas.len()).step_by(stride_l).flat_map(|i| {
        let data = &data;
        let lambdas = &lambdas;
        let thetas = &thetas;
        (0..n_t).step_by(stride_t).map(move |j| {
            let v = (data[i * n_t + j] * scale).clamp(0.0, 1.0);
            let color = ViridisRGB.get_color(v);
            Rectangle::new(
                [(thetas[j] - dt, lambdas[i] - dl), (thetas[j] + dt, lambdas[i] + dl)],
                color.filled(),
            )
        })
    });
    chart.draw_series(cells).map_err(draw_err)?;
    root.present().map_err(draw_err)?;
    Ok(())
}
