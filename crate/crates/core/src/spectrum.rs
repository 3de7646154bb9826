use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::check_increasing;

/// Which daughter photon an axis describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Signal,
    Idler,
}

impl Channel {
    pub fn other(self) -> Self {
        match self {
            Channel::Signal => Channel::Idler,
            Channel::Idler => Channel::Signal,
        }
    }
}

/// Gaussian smoothing applied to a spectrum or map, if any.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ConvolutionState {
    pub spectral_fwhm_um: Option<f64>,
    pub angular_fwhm_deg: Option<f64>,
}

impl ConvolutionState {
    pub fn is_raw(&self) -> bool {
        self.spectral_fwhm_um.is_none() && self.angular_fwhm_deg.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumMeta {
    pub channel: Channel,
    pub theta_ext_deg: f64,
    pub temperature_c: f64,
    pub lambda_p_um: f64,
    pub convolution: ConvolutionState,
}

impl SpectrumMeta {
    pub fn signal(theta_ext_deg: f64, lambda_p_um: f64, temperature_c: f64) -> Self {
        Self {
            channel: Channel::Signal,
            theta_ext_deg,
            temperature_c,
            lambda_p_um,
            convolution: ConvolutionState::default(),
        }
    }
}

/// Intensities sampled on a strictly increasing wavelength axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    axis: Vec<f64>,
    intensity: Vec<f64>,
    pub meta: SpectrumMeta,
}

impl Spectrum {
    pub fn new(axis: Vec<f64>, intensity: Vec<f64>, meta: SpectrumMeta) -> Result<Self> {
        if axis.len() != intensity.len() {
            return Err(Error::invalid(format!(
                "axis has {} samples but intensity has {}",
                axis.len(),
                intensity.len()
            )));
        }
        check_increasing(&axis, "wavelength axis")?;
        if intensity.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::invalid("intensities must be finite and non-negative"));
        }
        Ok(Self { axis, intensity, meta })
    }

    /// Unchecked constructor for values the caller produced under the same invariants.
    pub(crate) fn from_parts(axis: Vec<f64>, intensity: Vec<f64>, meta: SpectrumMeta) -> Self {
        debug_assert_eq!(axis.len(), intensity.len());
        Self { axis, intensity, meta }
    }

    pub fn axis(&self) -> &[f64] {
        &self.axis
    }

    pub fn intensity(&self) -> &[f64] {
        &self.intensity
    }

    pub fn len(&self) -> usize {
        self.axis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axis.is_empty()
    }

    pub fn max_intensity(&self) -> f64 {
        self.intensity.iter().copied().fold(0.0, f64::max)
    }

    /// Index of the first maximum.
    pub fn argmax(&self) -> Option<usize> {
        let max = self.max_intensity();
        self.intensity.iter().position(|&v| v == max)
    }

    pub fn with_intensity(&self, intensity: Vec<f64>) -> Result<Self> {
        Spectrum::new(self.axis.clone(), intensity, self.meta.clone())
    }
}

/// Intensity over (signal wavelength, external angle), stored row-major with
/// one row per wavelength.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularMap {
    lambda_axis: Vec<f64>,
    theta_axis: Vec<f64>,
    intensity: Vec<f64>,
    pub meta: SpectrumMeta,
}

impl AngularMap {
    pub fn new(lambda_axis: Vec<f64>, theta_axis: Vec<f64>, intensity: Vec<f64>, meta: SpectrumMeta) -> Result<Self> {
        check_increasing(&lambda_axis, "wavelength axis")?;
        check_increasing(&theta_axis, "angle axis")?;
        if intensity.len() != lambda_axis.len() * theta_axis.len() {
            return Err(Error::invalid("map body does not match its axes"));
        }
        if intensity.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::invalid("intensities must be finite and non-negative"));
        }
        Ok(Self {
            lambda_axis,
            theta_axis,
            intensity,
            meta,
        })
    }

    pub(crate) fn from_parts(lambda_axis: Vec<f64>, theta_axis: Vec<f64>, intensity: Vec<f64>, meta: SpectrumMeta) -> Self {
        debug_assert_eq!(intensity.len(), lambda_axis.len() * theta_axis.len());
        Self {
            lambda_axis,
            theta_axis,
            intensity,
            meta,
        }
    }

    pub fn lambda_axis(&self) -> &[f64] {
        &self.lambda_axis
    }

    pub fn theta_axis(&self) -> &[f64] {
        &self.theta_axis
    }

    pub fn data(&self) -> &[f64] {
        &self.intensity
    }

    pub fn get(&self, lambda_index: usize, theta_index: usize) -> f64 {
        self.intensity[lambda_index * self.theta_axis.len() + theta_index]
    }

    pub fn row(&self, lambda_index: usize) -> &[f64] {
        let n = self.theta_axis.len();
        &self.intensity[lambda_index * n..(lambda_index + 1) * n]
    }

    pub fn column(&self, theta_index: usize) -> Vec<f64> {
        (0..self.lambda_axis.len()).map(|i| self.get(i, theta_index)).collect()
    }

    /// Wavelength spectrum at one angle sample.
    pub fn spectrum_at(&self, theta_index: usize) -> Spectrum {
        let mut meta = self.meta.clone();
        meta.theta_ext_deg = self.theta_axis[theta_index];
        Spectrum::from_parts(self.lambda_axis.clone(), self.column(theta_index), meta)
    }
}
