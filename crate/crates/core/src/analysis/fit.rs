//! Gaussian envelope through comb maxima, fitted by Levenberg–Marquardt.

use serde::{Deserialize, Serialize};

use super::peaks::Peak;
use crate::error::{Error, Result};
use crate::instrument::FWHM_PER_SIGMA;

const MAX_ITERATIONS: usize = 200;
const GRADIENT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeFit {
    pub amplitude: f64,
    #[serde(rename = "center_um")]
    pub center: f64,
    #[serde(rename = "sigma_um")]
    pub sigma: f64,
    #[serde(rename = "fwhm_um")]
    pub fwhm: f64,
    pub residual_rms: f64,
}

impl EnvelopeFit {
    pub fn eval(&self, x: f64) -> f64 {
        gaussian([self.amplitude, self.center, self.sigma], x)
    }
}

fn gaussian(p: [f64; 3], x: f64) -> f64 {
    let u = (x - p[1]) / p[2];
    p[0] * (-0.5 * u * u).exp()
}

fn cost(p: [f64; 3], xs: &[f64], ys: &[f64]) -> f64 {
    xs.iter().zip(ys).map(|(&x, &y)| (gaussian(p, x) - y).powi(2)).sum()
}

/// Normal equations JᵀJ and gradient Jᵀr at `p`.
fn normal_equations(p: [f64; 3], xs: &[f64], ys: &[f64]) -> ([[f64; 3]; 3], [f64; 3]) {
    let mut jtj = [[0.0; 3]; 3];
    let mut jtr = [0.0; 3];
    for (&x, &y) in xs.iter().zip(ys) {
        let u = (x - p[1]) / p[2];
        let e = (-0.5 * u * u).exp();
        let j = [e, p[0] * e * u / p[2], p[0] * e * u * u / p[2]];
        let r = p[0] * e - y;
        for a in 0..3 {
            jtr[a] += j[a] * r;
            for b in 0..3 {
                jtj[a][b] += j[a] * j[b];
            }
        }
    }
    (jtj, jtr)
}

/// Solves a 3×3 system by Gaussian elimination with partial pivoting.
fn solve3(mut m: [[f64; 3]; 3], mut v: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[pivot][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        v.swap(col, pivot);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for k in col..3 {
                m[row][k] -= f * m[col][k];
            }
            v[row] -= f * v[col];
        }
    }
    let mut out = [0.0; 3];
    for row in (0..3).rev() {
        let tail: f64 = (row + 1..3).map(|k| m[row][k] * out[k]).sum();
        out[row] = (v[row] - tail) / m[row][row];
    }
    Some(out)
}

fn norm3(v: [f64; 3]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Least-squares Gaussian A·exp(−(x−μ)²/2σ²) through `(x, y)` points, zero baseline.
pub fn fit_gaussian(xs: &[f64], ys: &[f64]) -> Result<EnvelopeFit> {
    if xs.len() != ys.len() {
        return Err(Error::invalid("x and y lengths differ"));
    }
    if xs.len() < 3 {
        return Err(Error::InsufficientData(format!("Gaussian fit needs at least 3 points, got {}", xs.len())));
    }
    let weight: f64 = ys.iter().sum();
    if !(weight > 0.0) {
        return Err(Error::invalid("fit data must have positive total weight"));
    }
    let mu0 = xs.iter().zip(ys).map(|(x, y)| x * y).sum::<f64>() / weight;
    let var0 = xs.iter().zip(ys).map(|(x, y)| y * (x - mu0).powi(2)).sum::<f64>() / weight;
    let a0 = ys.iter().copied().fold(f64::MIN, f64::max);
    let span = xs.iter().copied().fold(f64::MIN, f64::max) - xs.iter().copied().fold(f64::MAX, f64::min);
    let sigma0 = if var0 > 0.0 { var0.sqrt() } else { 0.25 * span.max(f64::MIN_POSITIVE) };
    let mut p = [a0, mu0, sigma0];

    let mut current = cost(p, xs, ys);
    let mut damping = 1e-3;
    let mut gradient_norm = f64::INFINITY;
    for iteration in 0..MAX_ITERATIONS {
        let (jtj, jtr) = normal_equations(p, xs, ys);
        gradient_norm = norm3(jtr);
        if gradient_norm < GRADIENT_TOLERANCE {
            return Ok(finish(p, current, xs.len()));
        }
        let mut improved = false;
        while damping < 1e16 {
            let mut a = jtj;
            for k in 0..3 {
                a[k][k] += damping * jtj[k][k].max(1e-300);
            }
            let Some(delta) = solve3(a, [-jtr[0], -jtr[1], -jtr[2]]) else {
                damping *= 10.0;
                continue;
            };
            let trial = [p[0] + delta[0], p[1] + delta[1], p[2] + delta[2]];
            let trial_cost = if trial[2] > 0.0 { cost(trial, xs, ys) } else { f64::INFINITY };
            if trial_cost < current {
                let step = (0..3).map(|k| (delta[k] / p[k].abs().max(1e-300)).abs()).fold(0.0, f64::max);
                p = trial;
                current = trial_cost;
                damping = (damping / 10.0).max(1e-12);
                improved = true;
                // parameters frozen at machine precision
                if step < 1e-14 {
                    return Ok(finish(p, current, xs.len()));
                }
                break;
            }
            damping *= 10.0;
        }
        if !improved {
            // no descent direction left: stationary to working precision
            let scale = norm3([jtj[0][0], jtj[1][1], jtj[2][2]]).sqrt() * (current.sqrt() + a0);
            if gradient_norm <= 1e-8 * scale.max(1e-300) {
                return Ok(finish(p, current, xs.len()));
            }
            return Err(Error::FitFailure {
                iterations: iteration + 1,
                residual_rms: (current / xs.len() as f64).sqrt(),
                gradient_norm,
            });
        }
    }
    Err(Error::FitFailure {
        iterations: MAX_ITERATIONS,
        residual_rms: (current / xs.len() as f64).sqrt(),
        gradient_norm,
    })
}

fn finish(p: [f64; 3], cost: f64, n: usize) -> EnvelopeFit {
    let sigma = p[2].abs();
    EnvelopeFit {
        amplitude: p[0],
        center: p[1],
        sigma,
        fwhm: FWHM_PER_SIGMA * sigma,
        residual_rms: (cost / n as f64).sqrt(),
    }
}

/// Gaussian envelope through the comb maxima.
pub fn fit_envelope(peaks: &[Peak]) -> Result<EnvelopeFit> {
    if peaks.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "envelope fit needs at least 4 peaks, found {}",
            peaks.len()
        )));
    }
    let xs: Vec<f64> = peaks.iter().map(|p| p.wavelength).collect();
    let ys: Vec<f64> = peaks.iter().map(|p| p.height).collect();
    fit_gaussian(&xs, &ys)
}
