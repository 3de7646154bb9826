//! Nonlinear interference of down-converted amplitudes from every poled element.
//!
//! The amplitude of a sequence of uniform elements is
//!
//! ```text
//! A(Δk) = Σ_n χ_n l_n sinc(Δ_n / 2) exp(-iΔ_n/2 + i Σ_{n'≤n} Δ_{n'}),   Δ_n = l_n Δk
//! ```
//!
//! and the normalized intensity is |A|² / l², with l the total length. Three
//! evaluators are provided: a literal element-by-element sum, a stack-collapsed
//! closed form used for grids, and a midpoint-rule integral of χ(z) e^{iΔk z}
//! that serves as an independent check of both.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dispersion::{DispersionModel, PhotonTriplet, Validity};
use crate::error::{Error, Result};
use crate::grid::check_increasing;
use crate::spectrum::{AngularMap, Spectrum, SpectrumMeta};
use crate::superlattice::{design_length, DesignSpec, DomainSequence};

/// Largest external angle accepted by the mismatch calculation, degrees.
pub const MAX_THETA_DEG: f64 = 10.0;
/// Angular-map grids must stay inside ±this many degrees.
pub const MAX_MAP_THETA_DEG: f64 = 2.5;
/// Below this |1 − r| a stack is summed term by term.
pub const GEOMETRIC_FALLBACK: f64 = 1e-6;

/// sin(x)/x with the removable singularity at zero.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Longitudinal mismatch density −k_p,z + k_s,z + k_i,z at one (λ_s, θ) point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseMismatch {
    /// rad/μm
    pub delta_k: f64,
    /// The idler cannot close the transverse momentum; no propagating mode.
    pub evanescent: bool,
}

/// Wavevectors of one signal wavelength, reused across angles.
#[derive(Debug, Clone, Copy)]
pub struct MismatchContext {
    k_p: f64,
    k_s: f64,
    k_i: f64,
    n_s: f64,
}

impl MismatchContext {
    pub fn new(model: &DispersionModel, lambda_s_um: f64, lambda_p_um: f64, temperature_c: f64) -> Result<Self> {
        let t = PhotonTriplet::new(lambda_p_um, lambda_s_um, temperature_c)?;
        let n_s = model.refractive_index(t.lambda_s, temperature_c)?;
        Ok(Self {
            k_p: model.wavevector(t.lambda_p, temperature_c)?,
            k_s: 2.0 * PI * n_s / t.lambda_s,
            k_i: model.wavevector(t.lambda_i, temperature_c)?,
            n_s,
        })
    }

    /// Mismatch at an external signal angle. The signal refracts at the exit
    /// facet, and the idler carries the opposite transverse momentum.
    pub fn at(&self, theta_ext_deg: f64) -> PhaseMismatch {
        let theta_int = (theta_ext_deg.to_radians().sin() / self.n_s).asin();
        let q = self.k_s * theta_int.sin();
        let q2 = q * q;
        if q.abs() > self.k_i {
            return PhaseMismatch {
                delta_k: f64::NAN,
                evanescent: true,
            };
        }
        let k_sz = (self.k_s * self.k_s - q2).sqrt();
        let k_iz = (self.k_i * self.k_i - q2).sqrt();
        PhaseMismatch {
            delta_k: -self.k_p + k_sz + k_iz,
            evanescent: false,
        }
    }
}

pub fn phase_mismatch(
    model: &DispersionModel,
    lambda_s_um: f64,
    theta_ext_deg: f64,
    lambda_p_um: f64,
    temperature_c: f64,
) -> Result<PhaseMismatch> {
    check_theta(theta_ext_deg, MAX_THETA_DEG)?;
    Ok(MismatchContext::new(model, lambda_s_um, lambda_p_um, temperature_c)?.at(theta_ext_deg))
}

fn check_theta(theta: f64, limit: f64) -> Result<()> {
    if !(theta.abs() <= limit) {
        return Err(Error::invalid(format!("external angle {theta} deg exceeds ±{limit} deg")));
    }
    Ok(())
}

/// 2π − TAU, the part of 2π lost to rounding.
const TAU_LO: f64 = 2.449_293_598_294_706_4e-16;

/// step·count reduced into about (−π, π]. The product is split exactly with an
/// fma and reduced against a two-part 2π, so phases of 10⁵ rad keep ~1e-15 rad
/// absolute accuracy instead of one ulp of the unreduced value.
fn reduced_phase(step: f64, count: f64) -> f64 {
    let p = step * count;
    let e = step.mul_add(count, -p);
    let n = (p / TAU).round();
    (-n).mul_add(TAU, p) - n * TAU_LO + e
}

/// χ-free contribution l·sinc(Δ/2)·e^{i Δk z_mid} of an element spanning
/// `units` lattice steps from `front`, with `step` = Δk × unit.
fn lattice_element(step: f64, front: f64, units: f64, length: f64) -> Complex64 {
    let x = 0.5 * units * step;
    let magnitude = if x.abs() < 1e-4 {
        length * sinc(x)
    } else {
        length * reduced_phase(step, 0.5 * units).sin() / x
    };
    Complex64::cis(reduced_phase(step, front + 0.5 * units)) * magnitude
}

/// Literal element-by-element sum. The accumulated phase Σ_{n'≤n} Δ_{n'} − Δ_n/2
/// equals Δk at the element midpoint; for sequences on a lattice it is evaluated
/// as an exact integer multiple of Δk·unit so rounding does not build up along
/// the crystal.
pub fn amplitude_naive(seq: &DomainSequence, delta_k: f64) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    if let Some(lattice) = seq.lattice() {
        let step = delta_k * lattice.unit_um;
        for (e, &(front, units)) in seq.elements().iter().zip(&lattice.spans) {
            sum += lattice_element(step, front as f64, units as f64, e.length_um) * e.sign.value();
        }
        return sum;
    }
    // unit lattice of 1 μm: front and length are given directly in μm
    for (e, &z) in seq.elements().iter().zip(seq.cumulative_offsets()) {
        sum += lattice_element(delta_k, z, e.length_um, e.length_um) * e.sign.value();
    }
    sum
}

/// Stack-collapsed evaluator for one design.
///
/// Each stack's alternating sum is the geometric series Σ_j r^j with
/// r = −e^{iΔ_domain}; gaps are single closed-form elements. Cost per point is
/// one complex exponential per stack.
#[derive(Debug, Clone)]
pub struct FastEvaluator {
    l_domain: f64,
    n_nl: u32,
    n_stack: u32,
    l_gap: f64,
    /// Gap and super-period lengths in domains.
    gap_units: f64,
    period_units: f64,
    total_length: f64,
}

impl FastEvaluator {
    pub fn new(spec: &DesignSpec) -> Result<Self> {
        let total_length = design_length(spec)?;
        let gap_units = spec.n_nl as u64 * spec.m_gap as u64;
        Ok(Self {
            l_domain: spec.l_domain_um,
            n_nl: spec.n_nl,
            n_stack: spec.n_stack(),
            l_gap: spec.l_gap(),
            gap_units: gap_units as f64,
            period_units: (gap_units + spec.n_nl as u64) as f64,
            total_length,
        })
    }

    pub fn total_length(&self) -> f64 {
        self.total_length
    }

    /// Σ χ_n l_n, the amplitude at perfect phase matching.
    fn signed_length(&self) -> f64 {
        let stack = if self.n_nl % 2 == 1 { self.l_domain } else { 0.0 };
        let odd = self.n_nl % 2 == 1;
        let mut first = 1.0;
        let mut sum = 0.0;
        for s in 0..self.n_stack {
            let gap_sign = if odd { -first } else { first };
            sum += first * stack;
            if s + 1 < self.n_stack {
                sum += gap_sign * self.l_gap;
            }
            first = -gap_sign;
        }
        sum
    }

    /// Σ_{j<N} r^j for r = −e^{iΔ_domain}.
    fn stack_series(&self, delta_domain: f64) -> Complex64 {
        let n = self.n_nl as f64;
        // r = e^{iφ} with φ = Δ − π, wrapped into (−π, π]
        let mut phi = delta_domain - PI;
        phi -= 2.0 * PI * (phi / (2.0 * PI)).round();
        let half_sin = (0.5 * phi).sin();
        if 2.0 * half_sin.abs() < GEOMETRIC_FALLBACK {
            let r = -Complex64::cis(delta_domain);
            let mut term = Complex64::new(1.0, 0.0);
            let mut sum = Complex64::new(0.0, 0.0);
            for _ in 0..self.n_nl {
                sum += term;
                term *= r;
            }
            return sum;
        }
        // (1 − r^N)/(1 − r) = sin(Nφ/2)/sin(φ/2) · e^{i(N−1)φ/2}
        Complex64::cis(0.5 * (n - 1.0) * phi) * ((0.5 * n * phi).sin() / half_sin)
    }

    pub fn amplitude(&self, delta_k: f64) -> Complex64 {
        if delta_k == 0.0 {
            return Complex64::new(self.signed_length(), 0.0);
        }
        let step = delta_k * self.l_domain;
        let stack = lattice_element(step, 0.0, 1.0, self.l_domain) * self.stack_series(step);
        let gap = lattice_element(step, self.n_nl as f64, self.gap_units, self.l_gap);
        let odd = self.n_nl % 2 == 1;
        let mut sum = Complex64::new(0.0, 0.0);
        let mut first = 1.0;
        for s in 0..self.n_stack {
            // gap orientation is the first domain's times (−1)^N
            let gap_sign = if odd { -first } else { first };
            let front = Complex64::cis(reduced_phase(step, s as f64 * self.period_units));
            let local = if s + 1 < self.n_stack {
                stack * first + gap * gap_sign
            } else {
                stack * first
            };
            sum += front * local;
            first = -gap_sign;
        }
        sum
    }
}

pub fn amplitude_fast(spec: &DesignSpec, delta_k: f64) -> Result<Complex64> {
    Ok(FastEvaluator::new(spec)?.amplitude(delta_k))
}

/// Midpoint-rule integral of χ(z)·e^{iΔk z} over the sequence.
///
/// Every element gets `steps_per_domain` subintervals per shortest-element length.
pub fn quadrature_oracle(seq: &DomainSequence, delta_k: f64, steps_per_domain: usize) -> Result<Complex64> {
    if steps_per_domain < 4 {
        return Err(Error::invalid("quadrature needs at least 4 steps per domain"));
    }
    let shortest = seq
        .elements()
        .iter()
        .map(|e| e.length_um)
        .fold(f64::INFINITY, f64::min);
    let mut sum = Complex64::new(0.0, 0.0);
    for (e, &z0) in seq.elements().iter().zip(seq.cumulative_offsets()) {
        let steps = steps_per_domain * ((e.length_um / shortest).round().max(1.0) as usize);
        let h = e.length_um / steps as f64;
        let mut partial = Complex64::new(0.0, 0.0);
        for j in 0..steps {
            let z = z0 + (j as f64 + 0.5) * h;
            partial += Complex64::cis(delta_k * z);
        }
        sum += partial * (e.sign.value() * h);
    }
    Ok(sum)
}

/// |A|² normalized to the squared total length.
pub fn intensity(amplitude: Complex64, total_length: f64) -> f64 {
    amplitude.norm_sqr() / (total_length * total_length)
}

/// Setup shared by the grid evaluators.
#[derive(Debug, Clone)]
pub struct Simulation<'a> {
    pub model: &'a DispersionModel,
    pub spec: &'a DesignSpec,
    pub lambda_p_um: f64,
    pub temperature_c: f64,
}

impl<'a> Simulation<'a> {
    pub fn new(model: &'a DispersionModel, spec: &'a DesignSpec, lambda_p_um: f64, temperature_c: f64) -> Self {
        Self {
            model,
            spec,
            lambda_p_um,
            temperature_c,
        }
    }

    fn check_signal_axis(&self, axis: &[f64]) -> Result<()> {
        if axis.is_empty() {
            return Err(Error::invalid("wavelength grid is empty"));
        }
        check_increasing(axis, "wavelength grid")?;
        let (lo, hi) = (self.lambda_p_um, 2.0 * self.lambda_p_um);
        if axis[0] <= lo || axis[axis.len() - 1] >= hi {
            return Err(Error::invalid(format!(
                "signal grid [{}, {}] um must lie inside ({lo}, {hi}) um",
                axis[0],
                axis[axis.len() - 1]
            )));
        }
        Ok(())
    }

    fn warn_validity(&self, axis: &[f64]) {
        let mut outside = 0usize;
        for &l in axis {
            let idler = 1.0 / (1.0 / self.lambda_p_um - 1.0 / l);
            if self.model.validity(l) == Validity::Outside || self.model.validity(idler) == Validity::Outside {
                outside += 1;
            }
        }
        if outside > 0 {
            log::warn!(
                "{outside} of {} grid points put the signal or idler outside the dispersion validity range [{}, {}] um",
                axis.len(),
                self.model.valid_min_um,
                self.model.valid_max_um
            );
        }
    }

    fn point(&self, evaluator: &FastEvaluator, mismatch: PhaseMismatch) -> f64 {
        if mismatch.evanescent {
            0.0
        } else {
            intensity(evaluator.amplitude(mismatch.delta_k), evaluator.total_length())
        }
    }

    /// Normalized signal spectrum at one external angle. Points are evaluated
    /// independently in parallel and written to fixed slots.
    pub fn spectrum(&self, lambda_grid: &[f64], theta_ext_deg: f64) -> Result<Spectrum> {
        check_theta(theta_ext_deg, MAX_THETA_DEG)?;
        self.check_signal_axis(lambda_grid)?;
        self.warn_validity(lambda_grid);
        let evaluator = FastEvaluator::new(self.spec)?;
        let intensity = lambda_grid
            .par_iter()
            .map(|&l| {
                let ctx = MismatchContext::new(self.model, l, self.lambda_p_um, self.temperature_c)?;
                Ok(self.point(&evaluator, ctx.at(theta_ext_deg)))
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(Spectrum::from_parts(
            lambda_grid.to_vec(),
            intensity,
            SpectrumMeta::signal(theta_ext_deg, self.lambda_p_um, self.temperature_c),
        ))
    }

    /// Wavelength–angle map; one parallel task per wavelength row.
    pub fn angular_map(&self, lambda_grid: &[f64], theta_grid: &[f64]) -> Result<AngularMap> {
        self.check_signal_axis(lambda_grid)?;
        check_increasing(theta_grid, "angle grid")?;
        for &t in theta_grid {
            check_theta(t, MAX_MAP_THETA_DEG)?;
        }
        self.warn_validity(lambda_grid);
        let evaluator = FastEvaluator::new(self.spec)?;
        let rows = lambda_grid
            .par_iter()
            .map(|&l| {
                let ctx = MismatchContext::new(self.model, l, self.lambda_p_um, self.temperature_c)?;
                Ok(theta_grid.iter().map(|&t| self.point(&evaluator, ctx.at(t))).collect::<Vec<f64>>())
            })
            .collect::<Result<Vec<Vec<f64>>>>()?;
        Ok(AngularMap::from_parts(
            lambda_grid.to_vec(),
            theta_grid.to_vec(),
            rows.concat(),
            SpectrumMeta::signal(0.0, self.lambda_p_um, self.temperature_c),
        ))
    }

    /// Intensity versus external angle at one fixed signal wavelength.
    pub fn angular_cross_section(&self, lambda_s_um: f64, theta_grid: &[f64]) -> Result<Vec<f64>> {
        self.check_signal_axis(&[lambda_s_um])?;
        check_increasing(theta_grid, "angle grid")?;
        for &t in theta_grid {
            check_theta(t, MAX_MAP_THETA_DEG)?;
        }
        let evaluator = FastEvaluator::new(self.spec)?;
        let ctx = MismatchContext::new(self.model, lambda_s_um, self.lambda_p_um, self.temperature_c)?;
        Ok(theta_grid.par_iter().map(|&t| self.point(&evaluator, ctx.at(t))).collect())
    }
}
