//! Comb statistics of simulated or imported spectra.

mod correlation;
mod fit;
mod peaks;
mod predict;

pub use correlation::{pearson, spcc, MIN_OVERLAP_SAMPLES};
pub use fit::{fit_envelope, fit_gaussian, EnvelopeFit};
pub use peaks::{find_peaks, mean_peak_spacing, median_peak_spacing, Peak};
pub use predict::{predict_comb, qpm_signal_wavelength, CombPrediction, SINC_SQUARED_FWHM_FACTOR};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::{Channel, Spectrum};

/// Peak inclusion thresholds as fractions of the spectrum maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PeakThresholds {
    pub min_height: f64,
    pub min_prominence: f64,
}

impl Default for PeakThresholds {
    fn default() -> Self {
        Self {
            min_height: 0.10,
            min_prominence: 0.05,
        }
    }
}

impl PeakThresholds {
    pub fn check(&self) -> Result<()> {
        for (name, v) in [("min_height", self.min_height), ("min_prominence", self.min_prominence)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(format!("{name} must be a fraction in [0, 1], got {v}")));
            }
        }
        Ok(())
    }
}

/// How the envelope was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvelopeSource {
    /// Gaussian through the comb maxima.
    Peaks,
    /// Fewer than four teeth: Gaussian through the samples above the height threshold.
    Samples,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombStats {
    pub channel: Channel,
    pub peaks: Vec<Peak>,
    #[serde(rename = "mean_spacing_um", skip_serializing_if = "Option::is_none", default)]
    pub mean_spacing: Option<f64>,
    #[serde(rename = "median_spacing_um", skip_serializing_if = "Option::is_none", default)]
    pub median_spacing: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub envelope: Option<EnvelopeFit>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub envelope_source: Option<EnvelopeSource>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub spcc: Option<f64>,
}

/// Peaks, spacing and envelope of one channel; `reference` adds the SPCC.
///
/// Missing statistics (a single lobe has no spacing) are left empty rather
/// than failing the whole analysis.
pub fn comb_stats(s: &Spectrum, thresholds: &PeakThresholds, reference: Option<&Spectrum>) -> Result<CombStats> {
    thresholds.check()?;
    let peaks = find_peaks(s, thresholds.min_prominence, thresholds.min_height)?;
    let mean_spacing = optional(mean_peak_spacing(&peaks))?;
    let median_spacing = optional(median_peak_spacing(&peaks))?;
    let (envelope, envelope_source) = if peaks.len() >= 4 {
        (Some(fit_envelope(&peaks)?), Some(EnvelopeSource::Peaks))
    } else {
        let cut = thresholds.min_height * s.max_intensity();
        let (xs, ys): (Vec<f64>, Vec<f64>) = s
            .axis()
            .iter()
            .zip(s.intensity())
            .filter(|(_, y)| **y >= cut && **y > 0.0)
            .map(|(x, y)| (*x, *y))
            .unzip();
        match optional(fit_gaussian(&xs, &ys))? {
            Some(fit) => (Some(fit), Some(EnvelopeSource::Samples)),
            None => (None, None),
        }
    };
    let spcc = reference.map(|r| spcc(s, r)).transpose()?;
    Ok(CombStats {
        channel: s.meta.channel,
        peaks,
        mean_spacing,
        median_spacing,
        envelope,
        envelope_source,
        spcc,
    })
}

fn optional<T>(r: Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::InsufficientData(msg)) => {
            log::info!("{msg}");
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

/// Remaps a spectrum to the partner channel through energy conservation,
/// λ' = 1/(1/λ_p − 1/λ). Intensities are copied pointwise unless
/// `apply_jacobian` is set, which multiplies by the density factor (λ/λ')².
pub fn to_idler(s: &Spectrum, lambda_p_um: f64, apply_jacobian: bool) -> Result<Spectrum> {
    let (lo, hi) = (lambda_p_um, 2.0 * lambda_p_um);
    let mut pairs = Vec::with_capacity(s.len());
    for (&l, &v) in s.axis().iter().zip(s.intensity()) {
        // the idler side of the degenerate point is (2λ_p, ∞)
        let valid = match s.meta.channel {
            Channel::Signal => l > lo && l < hi,
            Channel::Idler => l > hi,
        };
        if !valid {
            return Err(Error::invalid(format!(
                "{l} um has no partner wavelength for a {lambda_p_um} um pump"
            )));
        }
        let partner = 1.0 / (1.0 / lambda_p_um - 1.0 / l);
        let value = if apply_jacobian { v * (l / partner).powi(2) } else { v };
        pairs.push((partner, value));
    }
    pairs.reverse();
    let (axis, intensity): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let mut meta = s.meta.clone();
    meta.channel = s.meta.channel.other();
    meta.lambda_p_um = lambda_p_um;
    Spectrum::new(axis, intensity, meta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::SpectrumMeta;
    use approx::assert_relative_eq;

    fn signal(axis: Vec<f64>, values: Vec<f64>) -> Spectrum {
        Spectrum::new(axis, values, SpectrumMeta::signal(0.0, 0.532, 22.0)).unwrap()
    }

    #[test]
    fn idler_remap_is_involution() {
        let axis: Vec<f64> = (0..101).map(|i| 0.6 + i as f64 * 1e-3).collect();
        let values: Vec<f64> = (0..101).map(|i| (i as f64 * 0.1).sin().abs()).collect();
        let s = signal(axis.clone(), values.clone());
        let idler = to_idler(&s, 0.532, false).unwrap();
        assert_eq!(idler.meta.channel, Channel::Idler);
        assert!(idler.axis().windows(2).all(|w| w[1] > w[0]));
        assert_relative_eq!(idler.axis()[100], 1.0 / (1.0 / 0.532 - 1.0 / 0.6), max_relative = 1e-14);
        let back = to_idler(&idler, 0.532, false).unwrap();
        assert_eq!(back.meta.channel, Channel::Signal);
        for (a, b) in back.axis().iter().zip(&axis) {
            assert_relative_eq!(*a, *b, max_relative = 1e-12);
        }
        assert_eq!(back.intensity(), values.as_slice());
    }

    #[test]
    fn jacobian_scales_density() {
        let s = signal(vec![0.6, 0.647, 0.7], vec![1.0, 1.0, 1.0]);
        let idler = to_idler(&s, 0.532, true).unwrap();
        let li: f64 = 1.0 / (1.0 / 0.532 - 1.0 / 0.647);
        assert_relative_eq!(idler.intensity()[1], (0.647_f64 / li).powi(2), max_relative = 1e-14);
    }

    #[test]
    fn idler_remap_rejects_out_of_band() {
        let s = signal(vec![0.6, 1.1], vec![1.0, 1.0]);
        assert!(to_idler(&s, 0.532, false).is_err());
    }

    #[test]
    fn single_lobe_falls_back_to_sample_envelope() {
        let axis: Vec<f64> = (0..401).map(|i| 0.62 + i as f64 * 1e-4).collect();
        let values: Vec<f64> = axis.iter().map(|x| (-(x - 0.64f64).powi(2) / (2.0 * 0.004f64.powi(2))).exp()).collect();
        let stats = comb_stats(&signal(axis, values), &PeakThresholds::default(), None).unwrap();
        assert_eq!(stats.peaks.len(), 1);
        assert!(stats.mean_spacing.is_none());
        assert_eq!(stats.envelope_source, Some(EnvelopeSource::Samples));
        assert_relative_eq!(stats.envelope.unwrap().sigma, 0.004, max_relative = 1e-6);
        let json = serde_json::to_value(&stats).unwrap();
        assert!(json.get("mean_spacing_um").is_none());
        assert!(json["envelope"]["fwhm_um"].is_number());
    }

    #[test]
    fn stats_invariant_under_scaling() {
        let axis: Vec<f64> = (0..2000).map(|i| 0.62 + i as f64 * 2e-5).collect();
        let values: Vec<f64> = axis
            .iter()
            .map(|x| (-(x - 0.64f64).powi(2) / (2.0 * 0.008f64.powi(2))).exp() * (std::f64::consts::PI * x / 0.002).cos().powi(2))
            .collect();
        let s = signal(axis, values);
        let scaled = s.with_intensity(s.intensity().iter().map(|v| 7.0 * v).collect()).unwrap();
        let a = comb_stats(&s, &PeakThresholds::default(), None).unwrap();
        let b = comb_stats(&scaled, &PeakThresholds::default(), None).unwrap();
        assert_eq!(a.peaks.len(), b.peaks.len());
        assert_relative_eq!(a.mean_spacing.unwrap(), b.mean_spacing.unwrap(), max_relative = 1e-12);
        assert_relative_eq!(a.envelope.unwrap().fwhm, b.envelope.unwrap().fwhm, max_relative = 1e-9);
        assert_relative_eq!(a.envelope.unwrap().center, b.envelope.unwrap().center, max_relative = 1e-9);
    }
}
