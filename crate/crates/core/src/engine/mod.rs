//! Evolve–measure–decompose pipeline for a probe thermometer.
//!
//! The sample starts in `ρ_B = e^{−βĤ_B}/Z_B`, the thermometer in `ρ(0)`;
//! the pair evolves under `Û_t = e^{−iĤt}` and the thermometer is measured
//! projectively. The score `d ln P_l / d(−β)` of every outcome is split into
//! trajectory heat, correlation heat and average heat, and the Fisher
//! information is obtained from the heats, from the direct score and from
//! finite differences of `ln P_l(β)`.

pub mod blocks;
mod ensemble;
#[cfg(test)]
mod tests;

use faer::complex_native::c64;
use serde::Serialize;

use crate::error::{ensure_positive, Error, Result};
use crate::models::{CompositeModel, ProjectiveMeasurement};
use crate::tensor::linalg::{self, CMatrix};
use crate::tensor::{DensityMatrix, Eigen, HilbertSpace};

pub use ensemble::EvolvedEnsemble;

/// Outcomes with `P_l` below this are excluded from score and Fisher sums.
pub const PROB_FLOOR: f64 = 1e-12;

/// Deliberate faults for mutation testing of the heat bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum Tamper {
    #[default]
    None,
    /// Negates the correlation heat.
    FlipCorrelationSign,
    /// Uses `Π_l Û_t` instead of `Π_l Û_t / √P_l` as the measurement map.
    DropInverseProbability,
}

/// Cached spectral decomposition of `Ĥ` for repeated evolutions.
#[derive(Debug, Clone)]
pub struct Propagator {
    space: HilbertSpace,
    eigen: Eigen,
}

impl Propagator {
    pub fn new(model: &CompositeModel) -> Self {
        Self {
            space: model.space().clone(),
            eigen: model.total_hamiltonian().eig(),
        }
    }

    fn phases(&self, t: f64) -> Vec<c64> {
        self.eigen
            .values
            .iter()
            .map(|&e| c64::new((e * t).cos(), -(e * t).sin()))
            .collect()
    }

    /// `Û_t = V e^{−iΛt} V^H`.
    pub fn unitary(&self, t: f64) -> CMatrix {
        self.eigen.compose(&self.phases(t))
    }

    /// `Û_t X` without forming `Û_t`.
    pub fn apply(&self, x: &CMatrix, t: f64) -> CMatrix {
        let phases = self.phases(t);
        let mut y = self.eigen.vectors.adjoint() * x;
        for j in 0..y.ncols() {
            for (i, p) in phases.iter().enumerate() {
                let v = y.read(i, j) * *p;
                y.write(i, j, v);
            }
        }
        &self.eigen.vectors * &y
    }

    pub fn evolve(&self, chi0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
        self.space.check_matrix(chi0.matrix())?;
        let u = self.unitary(t);
        Ok(DensityMatrix::new_unchecked(
            self.space.clone(),
            linalg::sandwich(&u, chi0.matrix()),
        ))
    }
}

/// `χ(t) = Û_t χ(0) Û_t^†`.
pub fn evolve_total(model: &CompositeModel, chi0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    model.space().check_matrix(chi0.matrix())?;
    Propagator::new(model).evolve(chi0, t)
}

fn check_measurement(space: &HilbertSpace, meas: &ProjectiveMeasurement) -> Result<()> {
    if meas.dim() != space.system_dim() {
        return Err(Error::DimensionMismatch {
            expected: space.system_dim(),
            found: meas.dim(),
        });
    }
    Ok(())
}

/// `(label, P_l)` with `P_l = Tr[Π_l χ]`, clipped to `[0, 1]`.
pub fn outcome_probabilities(chi_t: &DensityMatrix, meas: &ProjectiveMeasurement) -> Result<Vec<(f64, f64)>> {
    let space = chi_t.space();
    check_measurement(space, meas)?;
    let rho_s = blocks::trace_sample(chi_t.matrix(), space.system_dim(), space.sample_dim());
    Ok(meas
        .projectors()
        .iter()
        .zip(meas.labels())
        .map(|(p, &l)| (l, linalg::trace_product(p, &rho_s).re.clamp(0.0, 1.0)))
        .collect())
}

/// `(P_l, ρ_{B,l}(t))` with `ρ_{B,l}(t) = Tr_S[Π_l χ(t) Π_l] / P_l`.
pub fn conditional_bath_state(
    model: &CompositeModel,
    chi0: &DensityMatrix,
    t: f64,
    outcome: usize,
    meas: &ProjectiveMeasurement,
) -> Result<(f64, DensityMatrix)> {
    check_measurement(model.space(), meas)?;
    let chi_t = evolve_total(model, chi0, t)?;
    conditional_from_evolved(&chi_t, outcome, meas)
}

pub(crate) fn conditional_from_evolved(
    chi_t: &DensityMatrix,
    outcome: usize,
    meas: &ProjectiveMeasurement,
) -> Result<(f64, DensityMatrix)> {
    let space = chi_t.space();
    let (d_s, d_b) = (space.system_dim(), space.sample_dim());
    let sigma = blocks::conditional_sample(chi_t.matrix(), meas.projector(outcome), d_s, d_b);
    let p = linalg::trace(&sigma).re;
    if p < PROB_FLOOR {
        return Err(Error::SuppressedOutcome {
            label: meas.label(outcome),
            probability: p,
        });
    }
    let sample_space = space.sample_space().expect("composite space");
    Ok((
        p,
        DensityMatrix::new_unchecked(sample_space, linalg::scaled(&sigma, linalg::re(1.0 / p))),
    ))
}

/// Heat bookkeeping of one measurement outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutcomeHeat {
    pub index: usize,
    pub label: f64,
    pub probability: f64,
    pub trajectory_heat: f64,
    pub correlation_heat: f64,
    /// `δH_tra + H_cor`.
    pub score: f64,
}

/// Per-outcome heats and the Fisher information they imply.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeatRecord {
    /// Outcomes with `P_l ≥ PROB_FLOOR`.
    pub outcomes: Vec<OutcomeHeat>,
    pub average_heat: f64,
    /// `Σ_l P_l (δH_tra + H_cor)²`.
    pub fisher_heat: f64,
    /// Total probability of outcomes below the floor.
    pub excluded_probability: f64,
}

impl HeatRecord {
    pub fn total_probability(&self) -> f64 {
        self.outcomes.iter().map(|o| o.probability).sum()
    }

    /// `⟨H_tra⟩`, which should equal `average_heat`.
    pub fn mean_trajectory_heat(&self) -> f64 {
        self.outcomes.iter().map(|o| o.probability * o.trajectory_heat).sum()
    }

    pub fn mean_score(&self) -> f64 {
        self.outcomes.iter().map(|o| o.probability * o.score).sum()
    }

    pub fn outcome(&self, index: usize) -> Option<&OutcomeHeat> {
        self.outcomes.iter().find(|o| o.index == index)
    }
}

/// A fixed thermometer: model, initial probe state and measurement.
///
/// Caches `eig(Ĥ)` and `eig(Ĥ_B)` so that sweeps over β and t reuse them.
#[derive(Debug, Clone)]
pub struct ThermometryScheme {
    model: CompositeModel,
    propagator: Propagator,
    sample_eigen: Eigen,
    rho0: DensityMatrix,
    meas: ProjectiveMeasurement,
    prob_floor: f64,
    tamper: Tamper,
}

impl ThermometryScheme {
    pub fn new(model: CompositeModel, rho0: DensityMatrix, meas: ProjectiveMeasurement) -> Result<Self> {
        let d_s = model.system_dim();
        if rho0.space().total_dim() != d_s {
            return Err(Error::DimensionMismatch {
                expected: d_s,
                found: rho0.space().total_dim(),
            });
        }
        check_measurement(model.space(), &meas)?;
        let propagator = Propagator::new(&model);
        let sample_eigen = Eigen::of_hermitian(model.sample_hamiltonian());
        Ok(Self {
            model,
            propagator,
            sample_eigen,
            rho0,
            meas,
            prob_floor: PROB_FLOOR,
            tamper: Tamper::None,
        })
    }

    pub fn with_prob_floor(mut self, floor: f64) -> Self {
        self.prob_floor = floor;
        self
    }

    pub fn with_tamper(mut self, tamper: Tamper) -> Self {
        self.tamper = tamper;
        self
    }

    pub fn model(&self) -> &CompositeModel {
        &self.model
    }

    pub fn measurement(&self) -> &ProjectiveMeasurement {
        &self.meas
    }

    pub fn propagator(&self) -> &Propagator {
        &self.propagator
    }

    pub fn prob_floor(&self) -> f64 {
        self.prob_floor
    }

    fn dims(&self) -> (usize, usize) {
        (self.model.system_dim(), self.model.sample_dim())
    }

    /// Thermal sample state `e^{−βĤ_B}/Z_B` on the sample factors.
    pub fn sample_thermal(&self, beta: f64) -> Result<CMatrix> {
        ensure_positive("beta", beta)?;
        let (w, _) = crate::tensor::gibbs_weights(&self.sample_eigen.values, beta);
        Ok(self.sample_eigen.compose_real(&w))
    }

    /// `χ(0) = ρ(0) ⊗ ρ_B`.
    pub fn initial_state(&self, beta: f64) -> Result<DensityMatrix> {
        let rho_b = self.sample_thermal(beta)?;
        Ok(DensityMatrix::new_unchecked(
            self.model.space().clone(),
            linalg::kron(self.rho0.matrix(), &rho_b),
        ))
    }

    /// Heat decomposition of the score for every outcome: trajectory heat
    /// `Tr[M Ĥ_B χ(0) M† − Ĥ_B M χ(0) M†]`, correlation heat
    /// `Tr[Ĥ_B ρ_{B,l}(t)] − Tr[Ĥ_B ρ_B(t)]` and average heat
    /// `Tr[Ĥ_B χ(0)] − Tr[Ĥ_B χ(t)]`, with `M = Π_l Û_t/√P_l`.
    ///
    /// Traces are taken over the evolved eigen-decomposition of `χ(0)`, so
    /// the cost scales with `rank ρ(0) · d_B` rather than the full dimension.
    pub fn heat_record(&self, beta: f64, t: f64) -> Result<HeatRecord> {
        ensure_positive("beta", beta)?;
        Ok(self.evolved_ensemble(t)?.heat_record(beta, self.prob_floor, self.tamper))
    }

    /// Scores `Tr[M_l Ĥ_B χ(0) M_l†] − Tr[Ĥ_B χ(0)]` for every outcome, from
    /// the dense evolution `Û_t (Ĥ_B χ(0)) Û_t^†`; `None` where the outcome is
    /// below the probability floor.
    pub fn scores_direct(&self, beta: f64, t: f64) -> Result<Vec<Option<f64>>> {
        let (d_s, d_b) = self.dims();
        let h_b = self.model.sample_hamiltonian();
        let rho_b = self.sample_thermal(beta)?;
        let chi0 = linalg::kron(self.rho0.matrix(), &rho_b);
        let hb_chi0 = linalg::kron(self.rho0.matrix(), &(h_b * &rho_b));
        let mean_energy = linalg::trace_product(h_b, &rho_b).re;
        let u = self.propagator.unitary(t);
        let rho_s = blocks::trace_sample(&linalg::sandwich(&u, &chi0), d_s, d_b);
        let y_s = blocks::trace_sample(&linalg::sandwich(&u, &hb_chi0), d_s, d_b);
        Ok(self
            .meas
            .projectors()
            .iter()
            .map(|proj| {
                let p = linalg::trace_product(proj, &rho_s).re;
                (p >= self.prob_floor).then(|| linalg::trace_product(proj, &y_s).re / p - mean_energy)
            })
            .collect())
    }

    pub fn score_direct(&self, beta: f64, t: f64, outcome: usize) -> Result<f64> {
        let scores = self.scores_direct(beta, t)?;
        scores
            .get(outcome)
            .copied()
            .ok_or(Error::DimensionMismatch {
                expected: self.meas.len(),
                found: outcome,
            })?
            .ok_or(Error::SuppressedOutcome {
                label: self.meas.label(outcome),
                probability: 0.0,
            })
    }

    /// Evolved thermal ensemble; `P_l(β')` is then available for any β'.
    pub fn evolved_ensemble(&self, t: f64) -> Result<EvolvedEnsemble> {
        EvolvedEnsemble::thermal(self, t)
    }

    /// `Σ_l P_l (d ln P_l / d(−β))²` with the derivative from central
    /// differences at steps `h` and `h/2`, Richardson-extrapolated.
    pub fn fisher_finite_difference(&self, beta: f64, t: f64, h: f64) -> Result<f64> {
        ensure_positive("beta", beta)?;
        if !(h > 0.0 && h <= beta / 10.0) {
            return Err(Error::InvalidParameter {
                name: "h",
                value: h,
                reason: "finite-difference step must lie in (0, β/10]",
            });
        }
        let ens = self.evolved_ensemble(t)?;
        Ok(ens.fisher_finite_difference(beta, h, self.prob_floor))
    }

    /// Trajectory heat of every outcome from the two-point double sum
    /// `Σ_{m,n} P_{l;n,m} (ε_m − ε_n)` over eigenprojectors of `Ĥ_B`.
    /// Requires `χ(0)` to be block-diagonal in the `Ĥ_B` eigenbasis.
    pub fn two_point_trajectory_heats(&self, chi0: &DensityMatrix, t: f64) -> Result<Vec<Option<f64>>> {
        ensemble::two_point_heats(self, chi0, t)
    }

    pub(crate) fn parts(&self) -> (&CompositeModel, &Propagator, &Eigen, &DensityMatrix, &ProjectiveMeasurement) {
        (&self.model, &self.propagator, &self.sample_eigen, &self.rho0, &self.meas)
    }
}

fn single_outcome<T: Copy>(values: Vec<Option<T>>, outcome: usize, meas: &ProjectiveMeasurement) -> Result<T> {
    match values.get(outcome) {
        None => Err(Error::DimensionMismatch {
            expected: meas.len(),
            found: outcome,
        }),
        Some(None) => Err(Error::SuppressedOutcome {
            label: meas.label(outcome),
            probability: 0.0,
        }),
        Some(Some(v)) => Ok(*v),
    }
}

/// One-shot [`ThermometryScheme::heat_record`].
pub fn heat_decomposition(
    model: &CompositeModel,
    rho0: &DensityMatrix,
    beta: f64,
    t: f64,
    meas: &ProjectiveMeasurement,
) -> Result<HeatRecord> {
    ThermometryScheme::new(model.clone(), rho0.clone(), meas.clone())?.heat_record(beta, t)
}

/// One-shot two-point trajectory heat of a single outcome.
pub fn two_point_trajectory_heat(
    model: &CompositeModel,
    chi0: &DensityMatrix,
    t: f64,
    outcome: usize,
    meas: &ProjectiveMeasurement,
) -> Result<f64> {
    let d_s = model.system_dim();
    let placeholder = DensityMatrix::maximally_mixed(HilbertSpace::new(vec![d_s])?);
    let scheme = ThermometryScheme::new(model.clone(), placeholder, meas.clone())?;
    single_outcome(scheme.two_point_trajectory_heats(chi0, t)?, outcome, meas)
}

/// One-shot direct score of a single outcome.
pub fn score_direct(
    model: &CompositeModel,
    rho0: &DensityMatrix,
    beta: f64,
    t: f64,
    meas: &ProjectiveMeasurement,
    outcome: usize,
) -> Result<f64> {
    let scheme = ThermometryScheme::new(model.clone(), rho0.clone(), meas.clone())?;
    single_outcome(scheme.scores_direct(beta, t)?, outcome, meas)
}

/// One-shot finite-difference Fisher information.
pub fn fisher_finite_difference(
    model: &CompositeModel,
    rho0: &DensityMatrix,
    beta: f64,
    t: f64,
    meas: &ProjectiveMeasurement,
    h: f64,
) -> Result<f64> {
    ThermometryScheme::new(model.clone(), rho0.clone(), meas.clone())?.fisher_finite_difference(beta, t, h)
}

/// Default finite-difference step `10⁻⁴ β`.
pub fn default_fd_step(beta: f64) -> f64 {
    1e-4 * beta
}

/// Cramér–Rao bound `Δβ ≥ 1/√(N F)`; infinite when `F ≤ 0`.
pub fn precision_bound(fisher: f64, n_measurements: usize) -> Result<f64> {
    if n_measurements == 0 {
        return Err(Error::InvalidParameter {
            name: "n_measurements",
            value: 0.0,
            reason: "must be at least 1",
        });
    }
    if !(fisher > 0.0) {
        return Ok(f64::INFINITY);
    }
    Ok(1.0 / (n_measurements as f64 * fisher).sqrt())
}
