//! Extraordinary-ray dispersion of MgO-doped congruent lithium niobate.
//!
//! The index follows a temperature-dependent Sellmeier form
//!
//! ```text
//! n^2 = a1 + b1 f + (a2 + b2 f) / (λ^2 - (a3 + b3 f)^2) + (a4 + b4 f) / (λ^2 - a5^2) - a6 λ^2
//! f   = (T - 24.5)(T + 570.82)
//! ```
//!
//! with λ in micrometres and T in degrees Celsius. Coefficients are data, so an
//! alternative model can be loaded from configuration.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reference temperature of the Sellmeier temperature term, °C.
pub const REFERENCE_TEMPERATURE_C: f64 = 24.5;
const TEMPERATURE_OFFSET_C: f64 = 570.82;

/// Sellmeier coefficients for the extraordinary index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DispersionModel {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    pub a5: f64,
    pub a6: f64,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub b4: f64,
    pub valid_min_um: f64,
    pub valid_max_um: f64,
    pub reference: String,
}

impl Default for DispersionModel {
    fn default() -> Self {
        Self::mgo_cln_extraordinary()
    }
}

/// Whether a wavelength lies inside the model's fitted range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Validity {
    Inside,
    Outside,
}

impl DispersionModel {
    /// 5 mol% MgO-doped congruent LiNbO3, extraordinary ray (Gayer et al., Appl. Phys. B 91, 343 (2008)).
    pub fn mgo_cln_extraordinary() -> Self {
        Self {
            a1: 5.756,
            a2: 0.0983,
            a3: 0.2020,
            a4: 189.32,
            a5: 12.52,
            a6: 1.32e-2,
            b1: 2.860e-6,
            b2: 4.700e-8,
            b3: 6.113e-8,
            b4: 1.516e-4,
            valid_min_um: 0.5,
            valid_max_um: 4.0,
            reference: "Gayer et al., Appl. Phys. B 91, 343 (2008); 5% MgO:CLN, extraordinary".into(),
        }
    }

    /// Checks the structural invariants of the coefficient set.
    pub fn check(&self) -> Result<()> {
        let coeffs = [
            self.a1, self.a2, self.a3, self.a4, self.a5, self.a6, self.b1, self.b2, self.b3, self.b4,
        ];
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("Sellmeier coefficients must be finite"));
        }
        if !(self.valid_min_um > 0.0 && self.valid_max_um > self.valid_min_um) {
            return Err(Error::invalid(format!(
                "validity range [{}, {}] um must satisfy 0 < min < max",
                self.valid_min_um, self.valid_max_um
            )));
        }
        Ok(())
    }

    pub fn validity(&self, lambda_um: f64) -> Validity {
        if lambda_um >= self.valid_min_um && lambda_um <= self.valid_max_um {
            Validity::Inside
        } else {
            Validity::Outside
        }
    }

    /// Squared index n²(λ, T).
    pub fn index_squared(&self, lambda_um: f64, temperature_c: f64) -> f64 {
        let f = temperature_term(temperature_c);
        let l2 = lambda_um * lambda_um;
        let uv_pole = self.a3 + self.b3 * f;
        self.a1 + self.b1 * f + (self.a2 + self.b2 * f) / (l2 - uv_pole * uv_pole)
            + (self.a4 + self.b4 * f) / (l2 - self.a5 * self.a5)
            - self.a6 * l2
    }

    /// Extraordinary refractive index.
    ///
    /// Wavelengths outside the validity range are evaluated anyway; callers that
    /// care use [`DispersionModel::validity`] to report them.
    pub fn refractive_index(&self, lambda_um: f64, temperature_c: f64) -> Result<f64> {
        if !(lambda_um > 0.0) || !lambda_um.is_finite() {
            return Err(Error::invalid(format!("wavelength must be positive, got {lambda_um} um")));
        }
        if !temperature_c.is_finite() {
            return Err(Error::invalid("temperature must be finite"));
        }
        let n_squared = self.index_squared(lambda_um, temperature_c);
        if !(n_squared > 1.0) || !n_squared.is_finite() {
            return Err(Error::NonPhysicalIndex {
                lambda_um,
                temperature_c,
                n_squared,
            });
        }
        Ok(n_squared.sqrt())
    }

    /// Like [`refractive_index`](Self::refractive_index) but logs a warning
    /// outside the validity range.
    pub fn refractive_index_warn(&self, lambda_um: f64, temperature_c: f64) -> Result<f64> {
        if lambda_um > 0.0 && self.validity(lambda_um) == Validity::Outside {
            log::warn!(
                "{lambda_um} um is outside the dispersion validity range [{}, {}] um",
                self.valid_min_um,
                self.valid_max_um
            );
        }
        self.refractive_index(lambda_um, temperature_c)
    }

    /// Wavevector magnitude k = 2πn/λ in rad/μm.
    pub fn wavevector(&self, lambda_um: f64, temperature_c: f64) -> Result<f64> {
        Ok(2.0 * PI * self.refractive_index(lambda_um, temperature_c)? / lambda_um)
    }

    /// Group index n − λ dn/dλ from the analytic derivative of n².
    pub fn group_index(&self, lambda_um: f64, temperature_c: f64) -> Result<f64> {
        let n = self.refractive_index(lambda_um, temperature_c)?;
        let f = temperature_term(temperature_c);
        let l2 = lambda_um * lambda_um;
        let uv_pole = self.a3 + self.b3 * f;
        let d1 = l2 - uv_pole * uv_pole;
        let d2 = l2 - self.a5 * self.a5;
        let dn2_dl = -2.0 * lambda_um * (self.a2 + self.b2 * f) / (d1 * d1)
            - 2.0 * lambda_um * (self.a4 + self.b4 * f) / (d2 * d2)
            - 2.0 * self.a6 * lambda_um;
        let dn_dl = dn2_dl / (2.0 * n);
        Ok(n - lambda_um * dn_dl)
    }

    /// Snell refraction at the exit facet: external (air) angle to internal angle, degrees.
    pub fn internal_angle(&self, theta_ext_deg: f64, lambda_um: f64, temperature_c: f64) -> Result<f64> {
        if !(theta_ext_deg.abs() < 90.0) {
            return Err(Error::invalid(format!("external angle {theta_ext_deg} deg must satisfy |theta| < 90")));
        }
        let n = self.refractive_index(lambda_um, temperature_c)?;
        Ok((theta_ext_deg.to_radians().sin() / n).asin().to_degrees())
    }

    /// Inverse of [`internal_angle`](Self::internal_angle).
    pub fn external_angle(&self, theta_int_deg: f64, lambda_um: f64, temperature_c: f64) -> Result<f64> {
        let n = self.refractive_index(lambda_um, temperature_c)?;
        let s = n * theta_int_deg.to_radians().sin();
        if s.abs() >= 1.0 {
            return Err(Error::invalid(format!(
                "internal angle {theta_int_deg} deg is beyond total internal reflection"
            )));
        }
        Ok(s.asin().to_degrees())
    }

    /// Collinear coherence length π/|k_p − k_s − k_i| in μm; `f64::INFINITY` at exact phase matching.
    pub fn coherence_length(&self, lambda_p_um: f64, lambda_s_um: f64, temperature_c: f64) -> Result<f64> {
        let triplet = PhotonTriplet::new(lambda_p_um, lambda_s_um, temperature_c)?;
        let dk = self.wavevector(triplet.lambda_p, temperature_c)?
            - self.wavevector(triplet.lambda_s, temperature_c)?
            - self.wavevector(triplet.lambda_i, temperature_c)?;
        if dk == 0.0 {
            Ok(f64::INFINITY)
        } else {
            Ok(PI / dk.abs())
        }
    }
}

/// f(T) = (T − 24.5)(T + 570.82); vanishes exactly at the reference temperature.
pub fn temperature_term(temperature_c: f64) -> f64 {
    (temperature_c - REFERENCE_TEMPERATURE_C) * (temperature_c + TEMPERATURE_OFFSET_C)
}

/// Energy conservation: 1/λ_i = 1/λ_p − 1/λ_s.
pub fn idler_wavelength(lambda_p_um: f64, lambda_s_um: f64) -> Result<f64> {
    if !(lambda_p_um > 0.0) {
        return Err(Error::invalid(format!("pump wavelength must be positive, got {lambda_p_um} um")));
    }
    if !(lambda_s_um > lambda_p_um) || !lambda_s_um.is_finite() {
        return Err(Error::invalid(format!(
            "no real idler: signal {lambda_s_um} um must be longer than pump {lambda_p_um} um"
        )));
    }
    Ok(1.0 / (1.0 / lambda_p_um - 1.0 / lambda_s_um))
}

/// Pump, signal and idler wavelengths tied by energy conservation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotonTriplet {
    pub lambda_p: f64,
    pub lambda_s: f64,
    pub lambda_i: f64,
    pub temperature_c: f64,
}

impl PhotonTriplet {
    /// Builds the triplet from pump and signal; the signal must be the shorter daughter photon.
    pub fn new(lambda_p_um: f64, lambda_s_um: f64, temperature_c: f64) -> Result<Self> {
        if lambda_s_um > 2.0 * lambda_p_um {
            return Err(Error::invalid(format!(
                "signal {lambda_s_um} um exceeds the degenerate point {} um",
                2.0 * lambda_p_um
            )));
        }
        let lambda_i = idler_wavelength(lambda_p_um, lambda_s_um)?;
        Ok(Self {
            lambda_p: lambda_p_um,
            lambda_s: lambda_s_um,
            lambda_i,
            temperature_c,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn model() -> DispersionModel {
        DispersionModel::default()
    }

    // 40-digit reference values of the same Sellmeier expression.
    const N_532_REF: f64 = 2.224_438_986_598_338_4;
    const N_647_REF: f64 = 2.190_809_762_419_086_2;

    #[test]
    fn index_matches_high_precision_reference() {
        let m = model();
        assert_relative_eq!(m.refractive_index(0.532, 24.5).unwrap(), N_532_REF, max_relative = 1e-14);
        assert_relative_eq!(m.refractive_index(0.647, 24.5).unwrap(), N_647_REF, max_relative = 1e-14);
        assert!((m.refractive_index(0.532, 24.5).unwrap() - 2.2244).abs() < 5e-5);
    }

    #[test]
    fn reference_temperature_drops_b_terms_bitwise() {
        let m = model();
        let stripped = DispersionModel {
            b1: 0.0,
            b2: 0.0,
            b3: 0.0,
            b4: 0.0,
            ..m.clone()
        };
        assert_eq!(temperature_term(24.5), 0.0);
        for lambda in [0.55, 0.647, 1.2, 2.9931, 3.8] {
            assert_eq!(
                m.refractive_index(lambda, 24.5).unwrap().to_bits(),
                stripped.refractive_index(lambda, 24.5).unwrap().to_bits()
            );
        }
    }

    #[test]
    fn non_positive_wavelength_is_rejected() {
        assert!(matches!(model().refractive_index(0.0, 22.0), Err(Error::InvalidInput(_))));
        assert!(matches!(model().refractive_index(-1.0, 22.0), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn outside_validity_still_evaluates() {
        let m = model();
        assert_eq!(m.validity(4.2), Validity::Outside);
        assert!(m.refractive_index_warn(4.2, 22.0).unwrap() > 1.0);
    }

    #[test]
    fn index_near_infrared_pole_is_non_physical() {
        // just short of the a5 = 12.52 um pole n^2 turns negative
        assert!(matches!(
            model().refractive_index(12.4, 22.0),
            Err(Error::NonPhysicalIndex { .. })
        ));
    }

    #[test]
    fn wavevectors() {
        let m = model();
        assert_relative_eq!(m.wavevector(0.532, 24.5).unwrap(), 26.271_733_754_346_106, max_relative = 1e-13);
        assert_relative_eq!(m.wavevector(2.9931, 24.5).unwrap(), 4.387_214_540_258_121, max_relative = 1e-13);
        let ks: Vec<f64> = (0..=100).map(|i| m.wavevector(0.6 + 0.001 * i as f64, 22.0).unwrap()).collect();
        assert!(ks.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn idler_examples() {
        assert_relative_eq!(idler_wavelength(0.532, 0.647).unwrap(), 2.993_078_260_869_565, max_relative = 1e-14);
        assert_relative_eq!(idler_wavelength(0.532, 1.064).unwrap(), 1.064, max_relative = 1e-14);
        assert_relative_eq!(idler_wavelength(0.532, 0.620).unwrap(), 3.748_181_818_181_818, max_relative = 1e-14);
        assert!(idler_wavelength(0.532, 0.532).is_err());
        assert!(idler_wavelength(0.532, 0.5).is_err());
    }

    #[test]
    fn triplet_rejects_signal_beyond_degeneracy() {
        assert!(PhotonTriplet::new(0.532, 1.1, 22.0).is_err());
        let t = PhotonTriplet::new(0.532, 0.647, 22.0).unwrap();
        assert_relative_eq!(1.0 / t.lambda_p, 1.0 / t.lambda_s + 1.0 / t.lambda_i, max_relative = 1e-12);
    }

    #[test]
    fn snell_angles() {
        let m = model();
        assert_eq!(m.internal_angle(0.0, 0.647, 22.0).unwrap(), 0.0);
        assert_relative_eq!(m.internal_angle(2.0, 0.647, 22.0).unwrap(), 0.913_044_150_555_721_3, max_relative = 1e-12);
        let neg = m.internal_angle(-2.0, 0.647, 22.0).unwrap();
        assert!(neg < 0.0 && neg.abs() < 2.0);
        assert!(m.internal_angle(90.0, 0.647, 22.0).is_err());
    }

    #[test]
    fn coherence_length_near_fabricated_domain() {
        let m = model();
        let lc = m.coherence_length(0.532, 0.647, 24.5).unwrap();
        assert_relative_eq!(lc, 5.158_927_729_706_004, max_relative = 1e-11);
        assert!((5.11..=5.22).contains(&lc));
        let lc22 = m.coherence_length(0.532, 0.647, 22.0).unwrap();
        assert_relative_eq!(lc22, 5.161_672_282_210_202, max_relative = 1e-11);
        assert!((lc22 - 5.16).abs() / 5.16 < 0.02);
    }

    #[test]
    fn coherence_length_decreases_with_temperature() {
        let m = model();
        // reference values at 22, 40, 60, 80, 100 C
        let reference = [5.161_672_282_210_202, 5.141_444_741_570_409, 5.117_712_988_466_383, 5.092_684_427_185_221, 5.066_386_873_064_876];
        let got: Vec<f64> = [22.0, 40.0, 60.0, 80.0, 100.0]
            .iter()
            .map(|&t| m.coherence_length(0.532, 0.647, t).unwrap())
            .collect();
        for (g, r) in got.iter().zip(reference) {
            assert_relative_eq!(*g, r, max_relative = 1e-11);
        }
        assert!(got.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn coherence_length_infinite_at_exact_matching() {
        // a constant index makes k_p = k_s + k_i exactly
        let flat = DispersionModel {
            a1: 4.0,
            a2: 0.0,
            a4: 0.0,
            a6: 0.0,
            b1: 0.0,
            b2: 0.0,
            b4: 0.0,
            ..DispersionModel::default()
        };
        let lc = flat.coherence_length(0.5, 0.8, 24.5).unwrap();
        assert!(lc.is_infinite() || lc > 1e10);
    }

    fn central_difference_group_index(m: &DispersionModel, lambda: f64, t: f64, h: f64) -> f64 {
        let n = m.refractive_index(lambda, t).unwrap();
        let dn = (m.refractive_index(lambda + h, t).unwrap() - m.refractive_index(lambda - h, t).unwrap()) / (2.0 * h);
        n - lambda * dn
    }

    #[test]
    fn group_index_analytic_matches_finite_difference() {
        let m = model();
        for (lambda, reference) in [(0.647, 2.326_401_836_804_667), (2.9931, 2.188_958_412_581_725)] {
            let analytic = m.group_index(lambda, 24.5).unwrap();
            assert_relative_eq!(analytic, reference, max_relative = 1e-12);
            let fd_h = central_difference_group_index(&m, lambda, 24.5, 1e-4);
            let fd_h2 = central_difference_group_index(&m, lambda, 24.5, 5e-5);
            assert!((fd_h - fd_h2).abs() < 1e-6);
            assert!((analytic - fd_h).abs() < 1e-6);
            assert!(analytic > m.refractive_index(lambda, 24.5).unwrap());
        }
        let spread = m.group_index(0.647, 24.5).unwrap() - m.group_index(2.9931, 24.5).unwrap();
        assert!((0.12..=0.16).contains(&spread));
    }

    #[test]
    fn coefficient_check() {
        assert!(model().check().is_ok());
        let bad = DispersionModel {
            valid_min_um: 2.0,
            valid_max_um: 1.0,
            ..model()
        };
        assert!(bad.check().is_err());
    }

    #[test]
    fn config_override_parses_partial_object() {
        let m: DispersionModel = serde_json::from_str(r#"{"a1": 5.5, "valid_max_um": 5.0}"#).unwrap();
        assert_eq!(m.a1, 5.5);
        assert_eq!(m.a4, 189.32);
        assert_eq!(m.valid_max_um, 5.0);
        assert!(serde_json::from_str::<DispersionModel>(r#"{"c1": 1.0}"#).is_err());
    }
}
