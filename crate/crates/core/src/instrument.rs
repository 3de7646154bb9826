//! Finite detector resolution modelled as Gaussian smoothing along the
//! wavelength and angle axes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::uniform_step;
use crate::spectrum::{AngularMap, Spectrum};

/// FWHM / σ of a Gaussian.
pub const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949_3;
/// Kernels are truncated at ±this many σ.
pub const KERNEL_HALF_WIDTH_SIGMAS: f64 = 4.0;

pub const DEFAULT_SPECTRAL_FWHM_UM: f64 = 3e-4;
pub const DEFAULT_ANGULAR_FWHM_DEG: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InstrumentResponse {
    pub spectral_fwhm_um: f64,
    pub angular_fwhm_deg: f64,
}

impl Default for InstrumentResponse {
    fn default() -> Self {
        Self {
            spectral_fwhm_um: DEFAULT_SPECTRAL_FWHM_UM,
            angular_fwhm_deg: DEFAULT_ANGULAR_FWHM_DEG,
        }
    }
}

impl InstrumentResponse {
    pub const IDENTITY: Self = Self {
        spectral_fwhm_um: 0.0,
        angular_fwhm_deg: 0.0,
    };

    pub fn check(&self) -> Result<()> {
        for (name, v) in [("spectral_fwhm_um", self.spectral_fwhm_um), ("angular_fwhm_deg", self.angular_fwhm_deg)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be a non-negative number, got {v}")));
            }
        }
        Ok(())
    }
}

/// Unnormalized Gaussian weights for a FWHM given in samples, truncated at ±4σ.
pub fn gaussian_kernel(fwhm_samples: f64) -> Vec<f64> {
    let sigma = fwhm_samples / FWHM_PER_SIGMA;
    let half = (KERNEL_HALF_WIDTH_SIGMAS * sigma).floor() as i64;
    if half < 1 {
        return vec![1.0];
    }
    (-half..=half)
        .map(|j| {
            let x = j as f64 / sigma;
            (-0.5 * x * x).exp()
        })
        .collect()
}

/// Discrete convolution with edge renormalization over the valid overlap.
pub fn convolve_1d(values: &[f64], kernel: &[f64]) -> Vec<f64> {
    let half = (kernel.len() / 2) as isize;
    let n = values.len() as isize;
    (0..n)
        .map(|i| {
            let lo = (-half).max(-i);
            let hi = half.min(n - 1 - i);
            let mut acc = 0.0;
            let mut norm = 0.0;
            for j in lo..=hi {
                let w = kernel[(j + half) as usize];
                acc += w * values[(i + j) as usize];
                norm += w;
            }
            acc / norm
        })
        .collect()
}

fn smooth(values: &[f64], step: f64, fwhm: f64) -> Vec<f64> {
    convolve_1d(values, &gaussian_kernel(fwhm / step.abs()))
}

/// Gaussian smoothing of a spectrum along wavelength.
pub fn convolve_spectrum(s: &Spectrum, response: &InstrumentResponse) -> Result<Spectrum> {
    response.check()?;
    let fwhm = response.spectral_fwhm_um;
    if fwhm == 0.0 {
        return Ok(s.clone());
    }
    let step = uniform_step(s.axis(), "spectrum axis")?;
    let mut out = s.with_intensity(smooth(s.intensity(), step, fwhm))?;
    out.meta.convolution.spectral_fwhm_um = Some(fwhm);
    Ok(out)
}

/// Separable smoothing of a map: wavelength axis first, then angle.
pub fn convolve_map(m: &AngularMap, response: &InstrumentResponse) -> Result<AngularMap> {
    response.check()?;
    let n_l = m.lambda_axis().len();
    let n_t = m.theta_axis().len();
    let mut data = m.data().to_vec();
    let mut meta = m.meta.clone();

    if response.spectral_fwhm_um > 0.0 {
        let step = uniform_step(m.lambda_axis(), "map wavelength axis")?;
        let kernel = gaussian_kernel(response.spectral_fwhm_um / step);
        let columns: Vec<Vec<f64>> = (0..n_t)
            .into_par_iter()
            .map(|j| {
                let column: Vec<f64> = (0..n_l).map(|i| data[i * n_t + j]).collect();
                convolve_1d(&column, &kernel)
            })
            .collect();
        for (j, column) in columns.iter().enumerate() {
            for (i, v) in column.iter().enumerate() {
                data[i * n_t + j] = *v;
            }
        }
        meta.convolution.spectral_fwhm_um = Some(response.spectral_fwhm_um);
    }

    if response.angular_fwhm_deg > 0.0 {
        let step = uniform_step(m.theta_axis(), "map angle axis")?;
        let kernel = gaussian_kernel(response.angular_fwhm_deg / step);
        data = data
            .par_chunks(n_t)
            .flat_map_iter(|row| convolve_1d(row, &kernel))
            .collect();
        meta.convolution.angular_fwhm_deg = Some(response.angular_fwhm_deg);
    }

    AngularMap::new(m.lambda_axis().to_vec(), m.theta_axis().to_vec(), data, meta)
}

/// Angle-axis smoothing of a single cross-section sampled on `theta_axis`.
pub fn convolve_angular(values: &[f64], theta_axis: &[f64], fwhm_deg: f64) -> Result<Vec<f64>> {
    if fwhm_deg == 0.0 {
        return Ok(values.to_vec());
    }
    if !(fwhm_deg > 0.0) {
        return Err(Error::invalid("angular fwhm must be non-negative"));
    }
    let step = uniform_step(theta_axis, "angle axis")?;
    Ok(smooth(values, step, fwhm_deg))
}

/// Scales a spectrum so its maximum is 1.
pub fn normalize_max(s: &Spectrum) -> Result<Spectrum> {
    let max = s.max_intensity();
    if !(max > 0.0) {
        return Err(Error::invalid("cannot normalize an all-zero spectrum"));
    }
    s.with_intensity(s.intensity().iter().map(|v| v / max).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::SpectrumMeta;
    use approx::assert_relative_eq;

    fn spectrum(values: Vec<f64>) -> Spectrum {
        let axis = (0..values.len()).map(|i| 0.6 + i as f64 * 1e-4).collect();
        Spectrum::new(axis, values, SpectrumMeta::signal(0.0, 0.532, 22.0)).unwrap()
    }

    #[test]
    fn zero_width_is_identity() {
        let s = spectrum((0..50).map(|i| ((i * 7) % 11) as f64).collect());
        let out = convolve_spectrum(&s, &InstrumentResponse::IDENTITY).unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn delta_spike_becomes_discrete_gaussian() {
        let mut v = vec![0.0; 101];
        v[50] = 1.0;
        let s = spectrum(v);
        let response = InstrumentResponse {
            spectral_fwhm_um: 10.0 * 1e-4,
            angular_fwhm_deg: 0.0,
        };
        let out = convolve_spectrum(&s, &response).unwrap();
        // 1 / Σ exp(−j²/2σ²), j = −16..16, σ = 10 / 2.35482
        assert_relative_eq!(out.intensity()[50], 0.093_952_976_381_621_09, max_relative = 1e-12);
        assert_relative_eq!(out.intensity().iter().sum::<f64>(), 1.0, max_relative = 1e-12);
        assert_eq!(out.intensity()[50 - 17], 0.0);
        assert!(out.intensity()[50 - 16] > 0.0);
        assert_eq!(out.meta.convolution.spectral_fwhm_um, Some(1e-3));
    }

    #[test]
    fn interior_mass_is_conserved() {
        let v: Vec<f64> = (0..400).map(|i| 1.0 + (i as f64 * 0.37).sin().powi(2)).collect();
        let mut padded = vec![0.0; 50];
        padded.extend(&v);
        padded.extend(vec![0.0; 50]);
        let s = spectrum(padded);
        let out = convolve_spectrum(
            &s,
            &InstrumentResponse {
                spectral_fwhm_um: 5e-4,
                angular_fwhm_deg: 0.0,
            },
        )
        .unwrap();
        let before: f64 = s.intensity().iter().sum();
        let after: f64 = out.intensity().iter().sum();
        assert_relative_eq!(before, after, max_relative = 1e-9);
    }

    #[test]
    fn non_uniform_axis_rejected() {
        let s = Spectrum::new(vec![0.6, 0.61, 0.63], vec![1.0, 2.0, 1.0], SpectrumMeta::signal(0.0, 0.532, 22.0)).unwrap();
        assert!(convolve_spectrum(&s, &InstrumentResponse::default()).is_err());
        assert!(convolve_spectrum(&s, &InstrumentResponse::IDENTITY).is_ok());
    }

    #[test]
    fn edges_keep_constant_level() {
        let s = spectrum(vec![2.0; 60]);
        let out = convolve_spectrum(
            &s,
            &InstrumentResponse {
                spectral_fwhm_um: 8e-4,
                angular_fwhm_deg: 0.0,
            },
        )
        .unwrap();
        for v in out.intensity() {
            assert_relative_eq!(*v, 2.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn normalization() {
        let s = spectrum(vec![0.5; 10]);
        assert!(normalize_max(&s).unwrap().intensity().iter().all(|&v| v == 1.0));
        let base = spectrum(vec![0.1, 0.4, 0.2, 0.3]);
        let scaled = spectrum(vec![0.7, 2.8, 1.4, 2.1]);
        let a = normalize_max(&base).unwrap();
        let b = normalize_max(&scaled).unwrap();
        for (x, y) in a.intensity().iter().zip(b.intensity()) {
            assert_relative_eq!(*x, *y, max_relative = 1e-15);
        }
        assert_eq!(a.argmax(), base.argmax());
        assert!(normalize_max(&spectrum(vec![0.0; 5])).is_err());
    }

    #[test]
    fn map_identity_and_symmetry() {
        let lambdas: Vec<f64> = (0..20).map(|i| 0.64 + i as f64 * 1e-4).collect();
        let thetas = crate::grid::UniformGrid::new(-1.0, 1.0, 0.05).unwrap().points();
        let data: Vec<f64> = lambdas
            .iter()
            .flat_map(|l| thetas.iter().map(move |t| (1.0 + (40.0 * t * t).cos()) * (1000.0 * l).sin().abs()))
            .collect();
        let map = AngularMap::new(lambdas, thetas.clone(), data, SpectrumMeta::signal(0.0, 0.532, 22.0)).unwrap();
        assert_eq!(convolve_map(&map, &InstrumentResponse::IDENTITY).unwrap(), map);
        let out = convolve_map(
            &map,
            &InstrumentResponse {
                spectral_fwhm_um: 3e-4,
                angular_fwhm_deg: 0.2,
            },
        )
        .unwrap();
        let n = thetas.len();
        for i in 0..20 {
            for j in 0..n {
                let a = out.get(i, j);
                let b = out.get(i, n - 1 - j);
                assert!((a - b).abs() <= 1e-12 * a.abs().max(b.abs()));
            }
        }
    }
}
