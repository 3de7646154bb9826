use crate::error::{Error, Result};
use crate::spectrum::Spectrum;

pub const MIN_OVERLAP_SAMPLES: usize = 10;

/// Linear interpolation of `(xs, ys)` at `x`; `xs` strictly increasing and `x` inside its range.
pub(crate) fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let hi = xs.partition_point(|&v| v < x);
    if hi == 0 {
        return ys[0];
    }
    if hi == xs.len() {
        return ys[xs.len() - 1];
    }
    let lo = hi - 1;
    let t = (x - xs[lo]) / (xs[hi] - xs[lo]);
    ys[lo] + t * (ys[hi] - ys[lo])
}

/// Sample Pearson correlation of two equally long series.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::invalid("Pearson correlation needs two non-empty series of equal length"));
    }
    let n = a.len() as f64;
    let mean_a = a.iter().sum::<f64>() / n;
    let mean_b = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let dx = x - mean_a;
        let dy = y - mean_b;
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::UndefinedCorrelation("a series has zero variance".into()));
    }
    Ok((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

/// Pearson correlation of two spectra after linearly resampling `b` onto the
/// part of `a`'s axis that `b` covers.
pub fn spcc(a: &Spectrum, b: &Spectrum) -> Result<f64> {
    let (lo, hi) = (b.axis()[0], b.axis()[b.len() - 1]);
    let (xs, ya): (Vec<f64>, Vec<f64>) = a
        .axis()
        .iter()
        .zip(a.intensity())
        .filter(|(x, _)| **x >= lo && **x <= hi)
        .map(|(x, y)| (*x, *y))
        .unzip();
    if xs.len() < MIN_OVERLAP_SAMPLES {
        return Err(Error::InsufficientData(format!(
            "spectra overlap on {} samples, need {MIN_OVERLAP_SAMPLES}",
            xs.len()
        )));
    }
    let yb: Vec<f64> = xs.iter().map(|&x| interpolate(b.axis(), b.intensity(), x)).collect();
    pearson(&ya, &yb)
}
