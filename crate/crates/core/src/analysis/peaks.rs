use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::Spectrum;

/// A comb tooth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    #[serde(rename = "wavelength_um")]
    pub wavelength: f64,
    pub height: f64,
    pub prominence: f64,
}

/// Vertex of the parabola through three points.
fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> Option<(f64, f64)> {
    // local coordinates about the middle sample keep the vertex offset exact
    // for symmetric neighbours
    let (u0, u2) = (x[0] - x[1], x[2] - x[1]);
    let (y0, y1, y2) = (y[0], y[1], y[2]);
    // divided differences
    let d01 = (y1 - y0) / -u0;
    let d12 = (y2 - y1) / u2;
    let a = (d12 - d01) / (u2 - u0);
    if !(a < 0.0) {
        return None;
    }
    let delta = 0.5 * u0 - d01 / (2.0 * a);
    if !(delta > u0 && delta < u2) {
        return None;
    }
    let yv = y1 + d01 * delta + a * (delta - u0) * delta;
    Some((x[1] + delta, yv))
}

/// Height above the higher of the two lowest points separating a peak from
/// taller terrain (or the ends of the data).
fn prominence(values: &[f64], i: usize) -> f64 {
    let h = values[i];
    let mut left_min = h;
    for &v in values[..i].iter().rev() {
        if v > h {
            break;
        }
        left_min = left_min.min(v);
    }
    let mut right_min = h;
    for &v in &values[i + 1..] {
        if v > h {
            break;
        }
        right_min = right_min.min(v);
    }
    h - left_min.max(right_min)
}

/// Strict local maxima whose height and prominence exceed the given fractions
/// of the spectrum maximum, sorted by wavelength. Positions are refined with a
/// three-point parabola.
pub fn find_peaks(s: &Spectrum, min_prominence: f64, min_height: f64) -> Result<Vec<Peak>> {
    if s.len() < 3 {
        return Err(Error::invalid("peak search needs at least 3 samples"));
    }
    let y = s.intensity();
    let x = s.axis();
    let max = s.max_intensity();
    if !(max > 0.0) {
        return Ok(Vec::new());
    }
    let mut peaks = Vec::new();
    for i in 1..y.len() - 1 {
        if !(y[i] > y[i - 1] && y[i] > y[i + 1]) || y[i] < min_height * max {
            continue;
        }
        let prom = prominence(y, i);
        if prom < min_prominence * max {
            continue;
        }
        let (wavelength, height) =
            parabola_vertex([x[i - 1], x[i], x[i + 1]], [y[i - 1], y[i], y[i + 1]]).unwrap_or((x[i], y[i]));
        peaks.push(Peak {
            wavelength,
            height: height.max(y[i]),
            prominence: prom,
        });
    }
    Ok(peaks)
}

fn spacings(peaks: &[Peak]) -> Result<Vec<f64>> {
    if peaks.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "peak spacing needs at least 2 peaks, found {}",
            peaks.len()
        )));
    }
    Ok(peaks.windows(2).map(|w| (w[1].wavelength - w[0].wavelength).abs()).collect())
}

/// Mean distance between consecutive peaks.
pub fn mean_peak_spacing(peaks: &[Peak]) -> Result<f64> {
    let d = spacings(peaks)?;
    Ok(d.iter().sum::<f64>() / d.len() as f64)
}

pub fn median_peak_spacing(peaks: &[Peak]) -> Result<f64> {
    let mut d = spacings(peaks)?;
    d.sort_by(f64::total_cmp);
    let mid = d.len() / 2;
    Ok(if d.len() % 2 == 0 { 0.5 * (d[mid - 1] + d[mid]) } else { d[mid] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::SpectrumMeta;
    use approx::assert_relative_eq;

    fn spectrum(axis: Vec<f64>, values: Vec<f64>) -> Spectrum {
        Spectrum::new(axis, values, SpectrumMeta::signal(0.0, 0.532, 22.0)).unwrap()
    }

    #[test]
    fn cos_squared_comb() {
        let n = 500;
        let axis: Vec<f64> = (0..n).map(|i| i as f64).collect();
        // period 50 samples, maxima at 25, 75, ...
        let values: Vec<f64> = axis
            .iter()
            .map(|x| (std::f64::consts::PI * (x - 25.0) / 50.0).cos().powi(2))
            .collect();
        let peaks = find_peaks(&spectrum(axis, values), 0.05, 0.1).unwrap();
        assert_eq!(peaks.len(), 10);
        for (k, p) in peaks.iter().enumerate() {
            assert_relative_eq!(p.wavelength, 25.0 + 50.0 * k as f64, epsilon = 1e-9);
        }
        assert_relative_eq!(mean_peak_spacing(&peaks).unwrap(), 50.0, epsilon = 1e-9);
    }

    #[test]
    fn parabolic_refinement_exact_for_quadratic() {
        let axis: Vec<f64> = (0..21).map(|i| 0.6 + 0.001 * i as f64).collect();
        let vertex = 0.6093;
        let values: Vec<f64> = axis.iter().map(|x| 1.0 - 400.0 * (x - vertex).powi(2)).collect();
        let peaks = find_peaks(&spectrum(axis, values), 0.0, 0.0).unwrap();
        assert_eq!(peaks.len(), 1);
        assert!((peaks[0].wavelength - vertex).abs() < 1e-12);
        assert_relative_eq!(peaks[0].height, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn thresholds_filter_small_peaks() {
        let axis: Vec<f64> = (0..9).map(|i| i as f64).collect();
        let values = vec![0.0, 1.0, 0.0, 0.05, 0.0, 0.5, 0.45, 0.48, 0.0];
        let peaks = find_peaks(&spectrum(axis, values), 0.1, 0.1).unwrap();
        let xs: Vec<f64> = peaks.iter().map(|p| p.wavelength.round()).collect();
        // 0.05 fails height; the twin peaks at 5 and 7 have prominence 0.5 and 0.03
        assert_eq!(xs, vec![1.0, 5.0]);
        assert!(peaks.iter().all(|p| p.prominence <= p.height));
    }

    #[test]
    fn too_short_spectrum() {
        let s = spectrum(vec![0.0, 1.0], vec![1.0, 2.0]);
        assert!(find_peaks(&s, 0.0, 0.0).is_err());
    }

    #[test]
    fn spacing_statistics() {
        let peaks: Vec<Peak> = [0.0, 1.0, 2.0, 3.5]
            .iter()
            .map(|&w| Peak {
                wavelength: w,
                height: 1.0,
                prominence: 1.0,
            })
            .collect();
        assert_relative_eq!(mean_peak_spacing(&peaks).unwrap(), 3.5 / 3.0);
        assert_eq!(median_peak_spacing(&peaks).unwrap(), 1.0);
        assert!(matches!(mean_peak_spacing(&peaks[..1]), Err(Error::InsufficientData(_))));
    }
}
