//! Analytic results for the heat-exchange and dephasing thermometers.

mod dephasing;
mod heat_exchange;
mod scaling;

pub use dephasing::*;
pub use heat_exchange::*;
pub use scaling::*;

/// Bose occupation `1/(e^x − 1)`.
pub fn bose_occupation(x: f64) -> f64 {
    1.0 / x.exp_m1()
}

/// `n̄(1 + n̄)` at `x = βω`, without cancellation at large `x`.
pub fn bose_variance(x: f64) -> f64 {
    let q = (-x).exp();
    q / (1.0 - q).powi(2)
}
