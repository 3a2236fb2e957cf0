//! Thermometer models: system–sample Hamiltonians, baths and measurement bases.

mod measurement;
mod spectral;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Error, Result};
use crate::tensor::linalg::{self, CMatrix};
use crate::tensor::{embed_operator, truncation_level, HermitianOperator, HilbertSpace};

pub use measurement::{eigenbasis_measurement, fock_measurement, pauli_x_measurement, ProjectiveMeasurement};
pub use spectral::{discretize_spectral_density, SpectralDensity};

/// `Ĥ = Ĥ_S + Ĥ_B + Ĥ_I` on a space whose factor 0 is the thermometer.
#[derive(Debug, Clone)]
pub struct CompositeModel {
    space: HilbertSpace,
    h_s: HermitianOperator,
    h_b: HermitianOperator,
    h_i: HermitianOperator,
    system_hamiltonian: CMatrix,
    sample_hamiltonian: CMatrix,
}

impl CompositeModel {
    /// `system_hamiltonian` acts on factor 0, `sample_hamiltonian` on the
    /// product of factors `1..`, and `interaction` on the full space.
    pub fn new(
        space: HilbertSpace,
        system_hamiltonian: CMatrix,
        sample_hamiltonian: CMatrix,
        interaction: CMatrix,
    ) -> Result<Self> {
        let sample_space = space
            .sample_space()
            .ok_or_else(|| Error::InvalidFactors("model needs at least one sample factor".into()))?;
        let d_s = space.system_dim();
        let d_b = sample_space.total_dim();
        let h_s_local = HermitianOperator::new(HilbertSpace::new(vec![d_s])?, system_hamiltonian)?;
        let h_b_local = HermitianOperator::new(sample_space, sample_hamiltonian)?;
        let h_s = HermitianOperator::new(
            space.clone(),
            linalg::kron(h_s_local.matrix(), &linalg::identity(d_b)),
        )?;
        let h_b = HermitianOperator::new(
            space.clone(),
            linalg::kron(&linalg::identity(d_s), h_b_local.matrix()),
        )?;
        let h_i = HermitianOperator::new(space.clone(), interaction)?;
        Ok(Self {
            space,
            h_s,
            h_b,
            h_i,
            system_hamiltonian: h_s_local.matrix().clone(),
            sample_hamiltonian: h_b_local.matrix().clone(),
        })
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn h_s(&self) -> &HermitianOperator {
        &self.h_s
    }

    pub fn h_b(&self) -> &HermitianOperator {
        &self.h_b
    }

    pub fn h_i(&self) -> &HermitianOperator {
        &self.h_i
    }

    /// `Ĥ_S` restricted to the thermometer factor.
    pub fn system_hamiltonian(&self) -> &CMatrix {
        &self.system_hamiltonian
    }

    /// `Ĥ_B` restricted to the sample factors.
    pub fn sample_hamiltonian(&self) -> &CMatrix {
        &self.sample_hamiltonian
    }

    pub fn system_dim(&self) -> usize {
        self.space.system_dim()
    }

    pub fn sample_dim(&self) -> usize {
        self.space.sample_dim()
    }

    pub fn total_hamiltonian(&self) -> HermitianOperator {
        let m = &(self.h_s.matrix() + self.h_b.matrix()) + self.h_i.matrix();
        HermitianOperator::from_hermitian_part(self.space.clone(), &m)
            .expect("sum of Hermitian operators on one space")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathMode {
    pub omega: f64,
    pub coupling: f64,
}

impl BathMode {
    pub fn new(omega: f64, coupling: f64) -> Result<Self> {
        ensure_positive("omega_k", omega)?;
        if !coupling.is_finite() {
            return Err(Error::InvalidParameter {
                name: "g_k",
                value: coupling,
                reason: "must be finite",
            });
        }
        Ok(Self { omega, coupling })
    }
}

/// Truncated annihilation operator on `n_max + 1` Fock levels.
pub fn annihilation(n_max: usize) -> CMatrix {
    let n = n_max + 1;
    CMatrix::from_fn(n, n, |i, j| {
        if j == i + 1 {
            linalg::re((j as f64).sqrt())
        } else {
            linalg::ZERO
        }
    })
}

/// Truncated number operator `diag(0, 1, …, n_max)`.
pub fn number_operator(n_max: usize) -> CMatrix {
    let diag: Vec<f64> = (0..=n_max).map(|n| n as f64).collect();
    linalg::real_diagonal(&diag)
}

pub fn pauli_x() -> CMatrix {
    linalg::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
}

/// `σ_z = diag(1, −1)`; basis index 0 is `|+_z⟩`.
pub fn pauli_z() -> CMatrix {
    linalg::real_diagonal(&[1.0, -1.0])
}

/// Two oscillators, `Ĥ_S = ω_a a†a`, `Ĥ_B = ω_0 b†b`, `Ĥ_I = g(a†b + b†a)`,
/// each truncated to `n_max + 1` levels.
pub fn build_coupled_oscillators(omega_a: f64, omega_0: f64, g: f64, n_max: usize) -> Result<CompositeModel> {
    if n_max < 1 {
        return Err(Error::InvalidParameter {
            name: "n_max",
            value: n_max as f64,
            reason: "must be at least 1",
        });
    }
    ensure_positive("omega_a", omega_a)?;
    ensure_positive("omega_0", omega_0)?;
    let d = n_max + 1;
    let space = HilbertSpace::new(vec![d, d])?;
    let a = annihilation(n_max);
    let n = number_operator(n_max);
    let a_dag = linalg::adjoint(&a);
    let hop = &linalg::kron(&a_dag, &a) + &linalg::kron(&a, &a_dag);
    let h_i = linalg::scaled(&hop, linalg::re(g));
    CompositeModel::new(
        space,
        linalg::scaled(&n, linalg::re(omega_a)),
        linalg::scaled(&n, linalg::re(omega_0)),
        h_i,
    )
}

/// Qubit thermometer linearly coupled to independent modes:
/// `Ĥ_I = coupling ⊗ Σ_k g_k (b_k† + b_k)`, `Ĥ_B = Σ_k ω_k b_k† b_k`.
/// `cutoffs[k]` is the Fock cutoff of mode `k`.
pub fn build_qubit_bath(
    system_hamiltonian: CMatrix,
    coupling: &CMatrix,
    modes: &[BathMode],
    cutoffs: &[usize],
) -> Result<CompositeModel> {
    if modes.is_empty() {
        return Err(Error::InvalidFactors("at least one bath mode required".into()));
    }
    if cutoffs.len() != modes.len() {
        return Err(Error::DimensionMismatch {
            expected: modes.len(),
            found: cutoffs.len(),
        });
    }
    if let Some(&c) = cutoffs.iter().find(|&&c| c < 1) {
        return Err(Error::InvalidParameter {
            name: "n_max",
            value: c as f64,
            reason: "must be at least 1",
        });
    }
    for m in modes {
        BathMode::new(m.omega, m.coupling)?;
    }
    let sample_dims: Vec<usize> = cutoffs.iter().map(|c| c + 1).collect();
    let sample_space = HilbertSpace::new(sample_dims.clone())?;
    let d_b = sample_space.total_dim();
    let mut h_b = linalg::zeros(d_b, d_b);
    let mut field = linalg::zeros(d_b, d_b);
    for (k, (mode, &cut)) in modes.iter().zip(cutoffs).enumerate() {
        let b = annihilation(cut);
        let x = &b + &linalg::adjoint(&b);
        let n = number_operator(cut);
        h_b = &h_b + &linalg::scaled(&embed_operator(&n, &sample_space, k)?, linalg::re(mode.omega));
        field = &field + &linalg::scaled(&embed_operator(&x, &sample_space, k)?, linalg::re(mode.coupling));
    }
    let mut dims = vec![2];
    dims.extend(sample_dims);
    let space = HilbertSpace::new(dims)?;
    let h_i = linalg::kron(coupling, &field);
    CompositeModel::new(space, system_hamiltonian, h_b, h_i)
}

/// Pure-dephasing thermometer: `Ĥ_S = 0`, `Ĥ_I = σ_z Σ_k g_k (b_k† + b_k)`.
pub fn build_dephasing_model(modes: &[BathMode], n_max: usize) -> Result<CompositeModel> {
    let cutoffs = vec![n_max; modes.len()];
    build_dephasing_model_with_cutoffs(modes, &cutoffs)
}

pub fn build_dephasing_model_with_cutoffs(modes: &[BathMode], cutoffs: &[usize]) -> Result<CompositeModel> {
    build_qubit_bath(linalg::zeros(2, 2), &pauli_z(), modes, cutoffs)
}

/// Spin-boson thermometer with a non-commuting coupling:
/// `Ĥ_S = diag(0, ω_q)`, `Ĥ_I = σ_x Σ_k g_k (b_k† + b_k)`.
pub fn build_spin_boson(omega_q: f64, modes: &[BathMode], cutoffs: &[usize]) -> Result<CompositeModel> {
    build_qubit_bath(linalg::real_diagonal(&[0.0, omega_q]), &pauli_x(), modes, cutoffs)
}

/// Per-mode Fock cutoffs from the thermal tail, at least `min_cutoff`.
pub fn thermal_cutoffs(modes: &[BathMode], beta: f64, tail: f64, min_cutoff: usize) -> Result<Vec<usize>> {
    modes
        .iter()
        .map(|m| truncation_level(beta, m.omega, tail).map(|n| n.max(min_cutoff)))
        .collect()
}

#[cfg(test)]
mod tests;
