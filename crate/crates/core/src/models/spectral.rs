use serde::{Deserialize, Serialize};

use super::BathMode;
use crate::error::{ensure_positive, Error, Result};

/// `J(ω) = α ω^s ω_c^{1−s} e^{−ω/ω_c}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralDensity {
    pub alpha: f64,
    pub s: f64,
    pub omega_c: f64,
}

impl SpectralDensity {
    pub fn new(alpha: f64, s: f64, omega_c: f64) -> Result<Self> {
        ensure_positive("alpha", alpha)?;
        ensure_positive("omega_c", omega_c)?;
        if !(s >= 0.0 && s.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "s",
                value: s,
                reason: "Ohmicity must be non-negative",
            });
        }
        Ok(Self { alpha, s, omega_c })
    }

    pub fn ohmic(alpha: f64, omega_c: f64) -> Result<Self> {
        Self::new(alpha, 1.0, omega_c)
    }

    pub fn eval(&self, omega: f64) -> f64 {
        if omega < 0.0 {
            return 0.0;
        }
        self.alpha * omega.powf(self.s) * self.omega_c.powf(1.0 - self.s) * (-omega / self.omega_c).exp()
    }

    /// `∫_0^x J(ω) dω = α ω_c² γ(s+1, x/ω_c)`.
    pub fn integral_to(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        self.alpha * self.omega_c * self.omega_c * lower_incomplete_gamma(self.s + 1.0, x / self.omega_c)
    }
}

/// Lower incomplete gamma `γ(a, z)` by its power series,
/// `z^a e^{−z} Σ_n z^n / (a (a+1) ⋯ (a+n))`.
fn lower_incomplete_gamma(a: f64, z: f64) -> f64 {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut n = 1.0;
    while n < 100_000.0 {
        term *= z / (a + n);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
        n += 1.0;
    }
    sum * (a * z.ln() - z).exp()
}

/// Midpoint discretization: `ω_k = (k − ½)Δω`, `g_k = √(J(ω_k) Δω)`,
/// `Δω = omega_max / k_modes`.
pub fn discretize_spectral_density(j: &SpectralDensity, k_modes: usize, omega_max: f64) -> Result<Vec<BathMode>> {
    if k_modes == 0 {
        return Err(Error::InvalidParameter {
            name: "k_modes",
            value: 0.0,
            reason: "must be at least 1",
        });
    }
    ensure_positive("omega_max", omega_max)?;
    let dw = omega_max / k_modes as f64;
    Ok((0..k_modes)
        .map(|k| {
            let omega = (k as f64 + 0.5) * dw;
            BathMode {
                omega,
                coupling: (j.eval(omega) * dw).sqrt(),
            }
        })
        .collect())
}
