use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::bose_occupation;
use crate::error::{ensure_positive, Error, Result};

/// Two oscillators `ω_a a†a + ω_0 b†b + g(a†b + ab†)`; the probe starts in
/// vacuum and the sample mode is thermal at `β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HEParams {
    pub omega_a: f64,
    pub omega_0: f64,
    pub g: f64,
    pub beta: f64,
    pub t: f64,
}

impl HEParams {
    pub fn new(omega_a: f64, omega_0: f64, g: f64, beta: f64, t: f64) -> Result<Self> {
        let p = Self { omega_a, omega_0, g, beta, t };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("omega_a", self.omega_a)?;
        ensure_positive("omega_0", self.omega_0)?;
        ensure_positive("beta", self.beta)?;
        if !self.g.is_finite() {
            return Err(Error::InvalidParameter { name: "g", value: self.g, reason: "must be finite" });
        }
        if !(self.t >= 0.0 && self.t.is_finite()) {
            return Err(Error::InvalidParameter { name: "t", value: self.t, reason: "must be finite and non-negative" });
        }
        Ok(())
    }

    pub fn detuning(&self) -> f64 {
        (self.omega_a - self.omega_0) / 2.0
    }

    /// `E = √(Δ² + g²)`.
    pub fn rabi(&self) -> f64 {
        self.detuning().hypot(self.g)
    }

    pub fn sample_occupation(&self) -> f64 {
        bose_occupation(self.beta * self.omega_0)
    }

    /// Swap amplitude `|β_t|² = (g/E)² sin²(Et)` of the sample mode into the probe.
    pub fn swap_probability(&self) -> f64 {
        let e = self.rabi();
        if e == 0.0 {
            return 0.0;
        }
        (self.g / e).powi(2) * (e * self.t).sin().powi(2)
    }

    pub fn with_time(self, t: f64) -> Self {
        Self { t, ..self }
    }
}

/// Instants `(i + ½)π/E` of maximal swap.
pub fn he_optimal_time(p: &HEParams, i: u32) -> f64 {
    (i as f64 + 0.5) * PI / p.rabi()
}

/// `n̄(t) = n̄_b (g²/E²) sin²(Et)`.
pub fn he_mean_excitation(p: &HEParams) -> f64 {
    p.sample_occupation() * p.swap_probability()
}

/// Geometric law `n̄^l / (1 + n̄)^{l+1}`.
pub fn he_outcome_probability(p: &HEParams, l: u32) -> f64 {
    geometric(he_mean_excitation(p), l)
}

pub(crate) fn geometric(n: f64, l: u32) -> f64 {
    if n == 0.0 {
        return if l == 0 { 1.0 } else { 0.0 };
    }
    let r = n / (1.0 + n);
    (l as f64 * r.ln()).exp() / (1.0 + n)
}

/// `(H_tra, H_cor)` for outcome `l`: `H_tra = l ω_0`,
/// `H_cor = (n̄_b − n̄)/(1 + n̄) (l − n̄) ω_0`.
pub fn he_heat_terms(p: &HEParams, l: u32) -> (f64, f64) {
    let nb = p.sample_occupation();
    let n = he_mean_excitation(p);
    let l = l as f64;
    (l * p.omega_0, (nb - n) / (1.0 + n) * (l - n) * p.omega_0)
}

/// Score `(1 + n̄_b)/(1 + n̄) (l − n̄) ω_0`.
pub fn he_score(p: &HEParams, l: u32) -> f64 {
    let nb = p.sample_occupation();
    let n = he_mean_excitation(p);
    (1.0 + nb) / (1.0 + n) * (l as f64 - n) * p.omega_0
}

/// `ω_0² (1 + n̄_b)² n̄/(1 + n̄)`.
pub fn he_fisher(p: &HEParams) -> f64 {
    let nb = p.sample_occupation();
    let n = he_mean_excitation(p);
    p.omega_0.powi(2) * (1.0 + nb).powi(2) * n / (1.0 + n)
}

/// Relative bound `Δβ/β ≥ √((1 + n̄)/n̄) / (βω_0 (1 + n̄_b))`; infinite when
/// nothing has been swapped.
pub fn he_precision_bound(p: &HEParams) -> f64 {
    let n = he_mean_excitation(p);
    if n <= 0.0 {
        return f64::INFINITY;
    }
    ((1.0 + n) / n).sqrt() / (p.beta * p.omega_0 * (1.0 + p.sample_occupation()))
}
