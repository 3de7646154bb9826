//! First-order analytic estimates of comb spacing and envelope width.
//!
//! Around the operating point dΔk/dλ_s = −2π(n_g,s − n_g,i)/λ_s². The comb
//! repeats when the super-period accumulates 2π of extra phase; the single-stack
//! sinc² envelope halves at |x| = 1.39156 with x = Δk·l_stack/2.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dispersion::{idler_wavelength, DispersionModel};
use crate::error::{Error, Result};
use crate::interference::phase_mismatch;
use crate::superlattice::DesignSpec;

/// FWHM of sinc²(Δk·l/2) in units of λ²/(l·Δn_g).
pub const SINC_SQUARED_FWHM_FACTOR: f64 = 0.885_892_941_378_904_6;

/// Signal wavelength in `(lo, hi)` where one domain accumulates π of mismatch.
pub fn qpm_signal_wavelength(
    model: &DispersionModel,
    lambda_p_um: f64,
    temperature_c: f64,
    l_domain_um: f64,
    bracket: (f64, f64),
) -> Result<f64> {
    let residual = |l: f64| -> Result<f64> {
        let pm = phase_mismatch(model, l, 0.0, lambda_p_um, temperature_c)?;
        Ok(pm.delta_k.abs() * l_domain_um - PI)
    };
    let (mut lo, mut hi) = bracket;
    let mut f_lo = residual(lo)?;
    let f_hi = residual(hi)?;
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::invalid(format!(
            "no first-order phase matching for l_domain = {l_domain_um} um in [{lo}, {hi}] um"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f_mid = residual(mid)?;
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CombPrediction {
    pub signal_center_um: f64,
    pub idler_center_um: f64,
    pub group_index_signal: f64,
    pub group_index_idler: f64,
    /// Absent for a single stack.
    pub signal_spacing_um: Option<f64>,
    pub idler_spacing_um: Option<f64>,
    pub signal_envelope_fwhm_um: f64,
    pub idler_envelope_fwhm_um: f64,
}

/// Analytic spacing λ²/(L_sp·Δn_g) and envelope FWHM around the QPM wavelength.
pub fn predict_comb(
    model: &DispersionModel,
    spec: &DesignSpec,
    lambda_p_um: f64,
    temperature_c: f64,
    bracket: (f64, f64),
) -> Result<CombPrediction> {
    let center = qpm_signal_wavelength(model, lambda_p_um, temperature_c, spec.l_domain_um, bracket)?;
    let idler = idler_wavelength(lambda_p_um, center)?;
    let ng_s = model.group_index(center, temperature_c)?;
    let ng_i = model.group_index(idler, temperature_c)?;
    let dng = ng_s - ng_i;
    let to_idler = (idler / center).powi(2);
    let signal_spacing = (spec.n_gap > 0).then(|| center * center / (spec.super_period() * dng));
    let signal_fwhm = SINC_SQUARED_FWHM_FACTOR * center * center / (spec.l_stack() * dng);
    Ok(CombPrediction {
        signal_center_um: center,
        idler_center_um: idler,
        group_index_signal: ng_s,
        group_index_idler: ng_i,
        signal_spacing_um: signal_spacing,
        idler_spacing_um: signal_spacing.map(|d| d * to_idler),
        signal_envelope_fwhm_um: signal_fwhm,
        idler_envelope_fwhm_um: signal_fwhm * to_idler,
    })
}
