//! Low-temperature scaling of the precision bounds.

use serde::{Deserialize, Serialize};

use super::{deph_precision_bound, he_optimal_time, he_precision_bound, DephParams, HEParams};
use crate::error::{Error, Result};
use crate::models::{discretize_spectral_density, SpectralDensity};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Least-squares line through `(ln β, ln bound)`.
pub fn scaling_fit(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if points.len() < 4 {
        return Err(Error::InvalidParameter {
            name: "points",
            value: points.len() as f64,
            reason: "need at least 4 points",
        });
    }
    if let Some(&(b, y)) = points.iter().find(|(b, y)| !(*b > 0.0 && *y > 0.0 && b.is_finite() && y.is_finite())) {
        return Err(Error::InvalidParameter {
            name: "points",
            value: if b > 0.0 { y } else { b },
            reason: "β and bound must be positive and finite",
        });
    }
    let n = points.len() as f64;
    let (xs, ys): (Vec<f64>, Vec<f64>) = points.iter().map(|(b, y)| (b.ln(), y.ln())).unzip();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Degenerate("all β values coincide".into()));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(ScalingFit { slope, intercept: my - slope * mx, r_squared })
}

/// `n` geometrically spaced values from `lo` to `hi` inclusive.
pub fn geomspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n)
            .map(|i| (lo.ln() + (hi / lo).ln() * i as f64 / (n - 1) as f64).exp())
            .collect(),
    }
}

/// Probe–sample detuning `Δ = (ω_a − ω_0)/2` in the single-mode reduction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Detuning {
    /// Same Δ at every temperature.
    Fixed(f64),
    /// Δ = fraction · g(β).
    CouplingFraction(f64),
}

impl Default for Detuning {
    fn default() -> Self {
        Detuning::Fixed(0.5)
    }
}

/// One point of a scaling curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingPoint {
    pub beta: f64,
    pub bound: f64,
    /// Effective coupling (HE) or decoherence factor Γ (dephasing).
    pub aux: f64,
    pub t: f64,
}

/// Single-mode reduction of a structured sample: `ω_0 = 1/β`,
/// `g² = ∫_0^{1/β} J(ω)dω`, evaluated at the first maximal-swap time.
pub fn he_scaling_points(j: &SpectralDensity, betas: &[f64], detuning: Detuning) -> Result<Vec<ScalingPoint>> {
    betas
        .iter()
        .map(|&beta| {
            let omega_0 = 1.0 / beta;
            let g = j.integral_to(omega_0).sqrt();
            let delta = match detuning {
                Detuning::Fixed(d) => d,
                Detuning::CouplingFraction(f) => f * g,
            };
            let mut p = HEParams::new(omega_0 + 2.0 * delta, omega_0, g, beta, 0.0)?;
            p.t = he_optimal_time(&p, 0);
            Ok(ScalingPoint { beta, bound: he_precision_bound(&p), aux: g, t: p.t })
        })
        .collect()
}

/// Dephasing bound over a midpoint discretisation of `J` at fixed `t`.
pub fn deph_scaling_points(
    j: &SpectralDensity,
    betas: &[f64],
    t: f64,
    k_modes: usize,
    omega_max: f64,
) -> Result<Vec<ScalingPoint>> {
    let modes = discretize_spectral_density(j, k_modes, omega_max)?;
    betas
        .iter()
        .map(|&beta| {
            let p = DephParams::new(modes.clone(), beta, t)?;
            Ok(ScalingPoint { beta, bound: deph_precision_bound(&p), aux: super::deph_gamma(&p), t })
        })
        .collect()
}

pub fn fit_points(points: &[ScalingPoint]) -> Result<ScalingFit> {
    scaling_fit(&points.iter().map(|p| (p.beta, p.bound)).collect::<Vec<_>>())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let pts: Vec<_> = geomspace(1.0, 10.0, 6).into_iter().map(|b| (b, 3.0 * b * b)).collect();
        let fit = scaling_fit(&pts).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-10);
        assert!((fit.intercept - 3f64.ln()).abs() < 1e-10);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fit_rejects_bad_input() {
        assert!(scaling_fit(&[(1.0, 1.0), (2.0, 2.0), (3.0, 3.0)]).is_err());
        assert!(scaling_fit(&[(1.0, 1.0), (2.0, -2.0), (3.0, 3.0), (4.0, 4.0)]).is_err());
        assert!(scaling_fit(&[(0.0, 1.0), (2.0, 2.0), (3.0, 3.0), (4.0, 4.0)]).is_err());
        assert!(scaling_fit(&[(2.0, 1.0); 4]).is_err());
    }

    #[test]
    fn geomspace_endpoints() {
        let v = geomspace(5.0, 50.0, 8);
        assert_eq!(v.len(), 8);
        assert!((v[0] - 5.0).abs() < 1e-12 && (v[7] - 50.0).abs() < 1e-12);
        assert!((v[1] / v[0] - v[7] / v[6]).abs() < 1e-12);
    }

    #[test]
    fn heat_exchange_slope_is_half_of_one_plus_s() {
        let j = SpectralDensity::ohmic(0.01, 10.0).unwrap();
        let pts = he_scaling_points(&j, &geomspace(5.0, 50.0, 8), Detuning::default()).unwrap();
        let fit = fit_points(&pts).unwrap();
        assert!((fit.slope - 1.0).abs() < 0.1, "slope {}", fit.slope);
    }

    #[test]
    fn fixed_coupling_fraction_freezes_the_bound() {
        // With Δ ∝ g the swap fraction is β-independent and so is the bound.
        let j = SpectralDensity::ohmic(0.01, 10.0).unwrap();
        let pts = he_scaling_points(&j, &geomspace(5.0, 50.0, 8), Detuning::CouplingFraction(0.1)).unwrap();
        assert!(fit_points(&pts).unwrap().slope.abs() < 1e-6);
    }

    #[test]
    fn dephasing_slope_is_one_plus_s() {
        let j = SpectralDensity::ohmic(0.01, 10.0).unwrap();
        let pts = deph_scaling_points(&j, &geomspace(5.0, 50.0, 8), 1.0, 5000, 100.0).unwrap();
        let fit = fit_points(&pts).unwrap();
        assert!((fit.slope - 2.0).abs() < 0.1, "slope {}", fit.slope);
    }
}
