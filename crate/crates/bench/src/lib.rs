//! Fixtures shared by the benchmarks.

use thermoq::models::{build_coupled_oscillators, build_dephasing_model, fock_measurement, pauli_x_measurement};
use thermoq::{c64, BathMode, DensityMatrix, HilbertSpace, ThermometryScheme};

/// Resonant heat-exchange thermometer with both modes cut at `n_max`.
pub fn heat_exchange(n_max: usize) -> ThermometryScheme {
    let model = build_coupled_oscillators(1.0, 1.0, 0.1, n_max).expect("valid parameters");
    let mut psi = vec![c64::new(0.0, 0.0); n_max + 1];
    psi[0] = c64::new(1.0, 0.0);
    let probe = DensityMatrix::pure(HilbertSpace::new(vec![n_max + 1]).unwrap(), &psi).unwrap();
    ThermometryScheme::new(model, probe, fock_measurement(n_max)).expect("consistent scheme")
}

/// Qubit in `|+⟩` dephasing against `k` modes cut at `n_max`.
pub fn dephasing(k: usize, n_max: usize) -> ThermometryScheme {
    let modes: Vec<BathMode> = (0..k).map(|i| BathMode::new(1.0 + 0.3 * i as f64, 0.1).unwrap()).collect();
    let model = build_dephasing_model(&modes, n_max).expect("valid parameters");
    let a = c64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let probe = DensityMatrix::pure(HilbertSpace::new(vec![2]).unwrap(), &[a, a]).unwrap();
    ThermometryScheme::new(model, probe, pauli_x_measurement()).expect("consistent scheme")
}
