use serde::{Deserialize, Serialize};

use super::{bose_occupation, bose_variance};
use crate::error::{ensure_positive, Error, Result};
use crate::models::BathMode;

/// Qubit prepared in `|+⟩`, coupled by `σ_z Σ_k g_k(b_k† + b_k)` to thermal
/// modes, measured in the `σ_x` basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DephParams {
    pub modes: Vec<BathMode>,
    pub beta: f64,
    pub t: f64,
}

impl DephParams {
    pub fn new(modes: Vec<BathMode>, beta: f64, t: f64) -> Result<Self> {
        let p = Self { modes, beta, t };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.modes.is_empty() {
            return Err(Error::InvalidFactors("at least one bath mode required".into()));
        }
        for m in &self.modes {
            BathMode::new(m.omega, m.coupling)?;
        }
        ensure_positive("beta", self.beta)?;
        if !(self.t >= 0.0 && self.t.is_finite()) {
            return Err(Error::InvalidParameter { name: "t", value: self.t, reason: "must be finite and non-negative" });
        }
        Ok(())
    }

    pub fn occupations(&self) -> Vec<f64> {
        self.modes.iter().map(|m| bose_occupation(self.beta * m.omega)).collect()
    }

    fn mode_sum(&self, f: impl Fn(&BathMode) -> f64) -> f64 {
        self.modes
            .iter()
            .map(|m| m.coupling.powi(2) / m.omega * (1.0 - (m.omega * self.t).cos()) * f(m))
            .sum()
    }
}

/// `Γ = 4 Σ_k (g_k²/ω_k²)(2n̄_k + 1)(1 − cos ω_k t)`.
pub fn deph_gamma(p: &DephParams) -> f64 {
    // 2n̄ + 1 = coth(βω/2)
    4.0 * p.mode_sum(|m| (2.0 * bose_occupation(p.beta * m.omega) + 1.0) / m.omega)
}

/// `Q = −2 Σ_k (g_k²/ω_k)(1 − cos ω_k t)`.
pub fn deph_q(p: &DephParams) -> f64 {
    -2.0 * p.mode_sum(|_| 1.0)
}

/// `C = −4 Σ_k (g_k²/ω_k) n̄_k(1 + n̄_k)(1 − cos ω_k t)`.
pub fn deph_c(p: &DephParams) -> f64 {
    -4.0 * p.mode_sum(|m| bose_variance(p.beta * m.omega))
}

/// `P_± = (1 ± e^{−Γ})/2`.
pub fn deph_outcome_probability(p: &DephParams, l: i8) -> f64 {
    (1.0 + sign(l) * (-deph_gamma(p)).exp()) / 2.0
}

fn sign(l: i8) -> f64 {
    if l >= 0 {
        1.0
    } else {
        -1.0
    }
}

/// `(H_tra, H_cor)` for `l = ±1`: `H_tra = Q − (l e^{−Γ}/P_l) Q`,
/// `H_cor = (l e^{−Γ}/P_l)(Q + C)`.
pub fn deph_heat_terms(p: &DephParams, l: i8, floor: f64) -> Result<(f64, f64)> {
    let prob = deph_outcome_probability(p, l);
    if prob < floor {
        return Err(Error::SuppressedOutcome { label: sign(l), probability: prob });
    }
    let k = sign(l) * (-deph_gamma(p)).exp() / prob;
    let (q, c) = (deph_q(p), deph_c(p));
    Ok((q - k * q, k * (q + c)))
}

/// Score `(l e^{−Γ}/P_l) C`.
pub fn deph_score(p: &DephParams, l: i8) -> f64 {
    sign(l) * (-deph_gamma(p)).exp() / deph_outcome_probability(p, l) * deph_c(p)
}

/// `F = 4C²/(e^{2Γ} − 1)`.
pub fn deph_fisher(p: &DephParams) -> f64 {
    let g = deph_gamma(p);
    if g == 0.0 {
        return 0.0;
    }
    4.0 * deph_c(p).powi(2) / (2.0 * g).exp_m1()
}

/// Relative bound `Δβ/β ≥ √(e^{2Γ} − 1)/(2β|C|)`; infinite when `C = 0`.
pub fn deph_precision_bound(p: &DephParams) -> f64 {
    let c = deph_c(p);
    if c == 0.0 {
        return f64::INFINITY;
    }
    (2.0 * deph_gamma(p)).exp_m1().sqrt() / (2.0 * p.beta * c.abs())
}
