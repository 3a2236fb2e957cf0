//! Pure-state decompositions of `χ(0)` propagated column by column.

use faer::complex_native::c64;

use super::blocks::{self, apply_sample_left};
use super::{HeatRecord, OutcomeHeat, Tamper, ThermometryScheme};
use crate::error::{Error, Result};
use crate::tensor::linalg::{self, CMatrix};
use crate::tensor::{gibbs_weights, DensityMatrix, Eigen};

/// Off-cluster weight above which `χ(0)` is rejected by the two-point route.
pub const COHERENCE_TOL: f64 = 1e-10;
const DEGENERACY_TOL: f64 = 1e-9;

/// `Û_t |a,k⟩` for eigenvectors `|a⟩` of `ρ(0)` (weight `r_a > 0`) and `|k⟩`
/// of `Ĥ_B` (energy `ε_k`), reduced to
/// `q_{l,ak} = ‖(Π_l⊗I) Û_t|a,k⟩‖²` and `h_{l,ak} = ⟨·|Π_l⊗Ĥ_B|·⟩`.
///
/// A thermal sample weights component `ak` by `r_a p_k(β)`, so outcome
/// probabilities and all heat terms are available at any β without
/// re-evolving.
#[derive(Debug, Clone)]
pub struct EvolvedEnsemble {
    probe_weight: Vec<f64>,
    sample_level: Vec<usize>,
    sample_energies: Vec<f64>,
    weights: Vec<Vec<f64>>,
    energies: Vec<Vec<f64>>,
    labels: Vec<f64>,
}

/// Probe eigenvalues below this are dropped from the decomposition.
const RANK_TOL: f64 = 1e-15;

impl EvolvedEnsemble {
    pub(crate) fn thermal(scheme: &ThermometryScheme, t: f64) -> Result<Self> {
        let (model, prop, sample, rho0, meas) = scheme.parts();
        let (d_s, d_b) = (model.system_dim(), model.sample_dim());
        let probe = Eigen::of_hermitian(rho0.matrix());
        let active: Vec<usize> = (0..d_s).filter(|&a| probe.values[a] > RANK_TOL).collect();
        let mut probe_weight = Vec::with_capacity(active.len() * d_b);
        let mut sample_level = Vec::with_capacity(active.len() * d_b);
        for &a in &active {
            for k in 0..d_b {
                probe_weight.push(probe.values[a]);
                sample_level.push(k);
            }
        }
        let x = CMatrix::from_fn(d_s * d_b, probe_weight.len(), |row, col| {
            let (a, k) = (active[col / d_b], col % d_b);
            probe.vectors.read(row / d_b, a) * sample.vectors.read(row % d_b, k)
        });
        let w = prop.apply(&x, t);
        let hw = apply_sample_left(model.sample_hamiltonian(), &w, d_s, d_b);
        let weights = meas
            .projectors()
            .iter()
            .map(|p| blocks::projected_norms(&w, p, d_s, d_b))
            .collect();
        let energies = meas
            .projectors()
            .iter()
            .map(|p| blocks::projected_inner(&w, &hw, p, d_s, d_b))
            .collect();
        Ok(Self {
            probe_weight,
            sample_level,
            sample_energies: sample.values.clone(),
            weights,
            energies,
            labels: meas.labels().to_vec(),
        })
    }

    pub fn num_outcomes(&self) -> usize {
        self.weights.len()
    }

    /// Component weights `r_a p_k(β)` and `⟨Ĥ_B⟩` of the thermal sample.
    fn components(&self, beta: f64) -> (Vec<f64>, f64) {
        let (p, _) = gibbs_weights(&self.sample_energies, beta);
        let c = self
            .probe_weight
            .iter()
            .zip(&self.sample_level)
            .map(|(r, &k)| r * p[k])
            .collect();
        let mean = p.iter().zip(&self.sample_energies).map(|(p, e)| p * e).sum();
        (c, mean)
    }

    fn contract(c: &[f64], v: &[f64]) -> f64 {
        c.iter().zip(v).map(|(c, v)| c * v).sum()
    }

    /// `P_l(β)` for every outcome.
    pub fn probabilities(&self, beta: f64) -> Vec<f64> {
        let (c, _) = self.components(beta);
        self.weights
            .iter()
            .map(|q| Self::contract(&c, q).clamp(0.0, 1.0))
            .collect()
    }

    /// Heat decomposition at `β`. With `H_B χ(0) = Σ c_j ε_j |x_j⟩⟨x_j|`:
    /// `P_l H_tra = Σ_j c_j (ε_j q_{l,j} − h_{l,j})`,
    /// `P_l ε_{B,l}(t) = Σ_j c_j h_{l,j}`, `ε_B(t) = Σ_l P_l ε_{B,l}(t)`.
    pub fn heat_record(&self, beta: f64, floor: f64, tamper: Tamper) -> HeatRecord {
        let (c, energy_0) = self.components(beta);
        let eps: Vec<f64> = self.sample_level.iter().map(|&k| self.sample_energies[k]).collect();
        let ce: Vec<f64> = c.iter().zip(&eps).map(|(c, e)| c * e).collect();
        let cond: Vec<f64> = self.energies.iter().map(|h| Self::contract(&c, h)).collect();
        let energy_t: f64 = cond.iter().sum();
        let average_heat = energy_0 - energy_t;
        let mut outcomes = Vec::with_capacity(self.num_outcomes());
        let mut excluded = 0.0;
        for (index, q) in self.weights.iter().enumerate() {
            let p = Self::contract(&c, q).clamp(0.0, 1.0);
            if p < floor {
                excluded += p;
                continue;
            }
            let first = Self::contract(&ce, q);
            let (first, conditional) = match tamper {
                Tamper::DropInverseProbability => (first, cond[index]),
                _ => (first / p, cond[index] / p),
            };
            let trajectory_heat = first - conditional;
            let mut correlation_heat = conditional - energy_t;
            if tamper == Tamper::FlipCorrelationSign {
                correlation_heat = -correlation_heat;
            }
            outcomes.push(OutcomeHeat {
                index,
                label: self.labels[index],
                probability: p,
                trajectory_heat,
                correlation_heat,
                score: trajectory_heat - average_heat + correlation_heat,
            });
        }
        let fisher_heat = outcomes.iter().map(|o| o.probability * o.score * o.score).sum();
        HeatRecord {
            outcomes,
            average_heat,
            fisher_heat,
            excluded_probability: excluded,
        }
    }

    /// Richardson-extrapolated central-difference scores `d ln P_l/d(−β)`;
    /// `None` for outcomes below `floor` at β.
    pub fn scores_finite_difference(&self, beta: f64, h: f64, floor: f64) -> Vec<Option<f64>> {
        let p0 = self.probabilities(beta);
        let pm = self.probabilities(beta - h);
        let pp = self.probabilities(beta + h);
        let pm2 = self.probabilities(beta - h / 2.0);
        let pp2 = self.probabilities(beta + h / 2.0);
        (0..p0.len())
            .map(|l| {
                if p0[l] < floor || [pm[l], pp[l], pm2[l], pp2[l]].iter().any(|&p| p <= 0.0) {
                    return None;
                }
                let coarse = (pm[l].ln() - pp[l].ln()) / (2.0 * h);
                let fine = (pm2[l].ln() - pp2[l].ln()) / h;
                Some((4.0 * fine - coarse) / 3.0)
            })
            .collect()
    }

    pub fn fisher_finite_difference(&self, beta: f64, h: f64, floor: f64) -> f64 {
        let p = self.probabilities(beta);
        self.scores_finite_difference(beta, h, floor)
            .iter()
            .zip(&p)
            .filter_map(|(s, p)| s.map(|s| p * s * s))
            .sum()
    }
}

/// Groups sorted eigenvalues into degenerate clusters (index ranges).
fn clusters(values: &[f64]) -> Vec<std::ops::Range<usize>> {
    let scale = 1.0 + values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[i - 1] > DEGENERACY_TOL * scale {
            out.push(start..i);
            start = i;
        }
    }
    out
}

pub(crate) fn two_point_heats(scheme: &ThermometryScheme, chi0: &DensityMatrix, t: f64) -> Result<Vec<Option<f64>>> {
    let (model, prop, sample, _, meas) = scheme.parts();
    model.space().check_matrix(chi0.matrix())?;
    let (d_s, d_b) = (model.system_dim(), model.sample_dim());
    let groups = clusters(&sample.values);
    let mut cluster_of = vec![0; d_b];
    for (c, g) in groups.iter().enumerate() {
        for k in g.clone() {
            cluster_of[k] = c;
        }
    }
    let energy: Vec<f64> = groups
        .iter()
        .map(|g| g.clone().map(|k| sample.values[k]).sum::<f64>() / g.len() as f64)
        .collect();

    // χ(0) in the product basis |s⟩⊗|k_B⟩.
    let chi = blocks::sample_basis_change(&sample.vectors, chi0.matrix(), d_s, d_b);
    let mut offdiag = 0.0_f64;
    for i in 0..d_s * d_b {
        for j in 0..d_s * d_b {
            if cluster_of[i % d_b] != cluster_of[j % d_b] {
                offdiag = offdiag.max(chi.read(i, j).abs());
            }
        }
    }
    if offdiag > COHERENCE_TOL {
        return Err(Error::NonThermalSample { offdiag });
    }

    // Decompose each initial-energy block Π^B_m χ(0) Π^B_m into pure components.
    let mut columns: Vec<(usize, f64, Vec<c64>)> = Vec::new();
    for (m, g) in groups.iter().enumerate() {
        let idx: Vec<usize> = (0..d_s).flat_map(|s| g.clone().map(move |k| s * d_b + k)).collect();
        let block = CMatrix::from_fn(idx.len(), idx.len(), |i, j| chi.read(idx[i], idx[j]));
        let eig = Eigen::of_hermitian(&linalg::hermitian_part(&block));
        for (c, &lambda) in eig.values.iter().enumerate() {
            if lambda <= 0.0 {
                continue;
            }
            let mut v = vec![linalg::ZERO; d_s * d_b];
            for (i, &row) in idx.iter().enumerate() {
                v[row] = eig.vectors.read(i, c);
            }
            columns.push((m, lambda, v));
        }
    }
    if columns.is_empty() {
        return Ok(vec![None; meas.len()]);
    }
    let x_tilde = CMatrix::from_fn(d_s * d_b, columns.len(), |i, j| columns[j].2[i]);
    let x = apply_sample_left(&sample.vectors, &x_tilde, d_s, d_b);
    let w = prop.apply(&x, t);
    let w_tilde = apply_sample_left(&linalg::adjoint(&sample.vectors), &w, d_s, d_b);

    let n_clusters = groups.len();
    Ok(meas
        .projectors()
        .iter()
        .map(|proj| {
            // joint[m][n]: initial cluster m, final cluster n.
            let mut joint = vec![vec![0.0; n_clusters]; n_clusters];
            for (j, (m, lambda, _)) in columns.iter().enumerate() {
                for k in 0..d_b {
                    let mut acc = linalg::ZERO;
                    for a in 0..d_s {
                        for b in 0..d_s {
                            let pab = proj.read(a, b);
                            if pab != linalg::ZERO {
                                acc += w_tilde.read(a * d_b + k, j).conj() * pab * w_tilde.read(b * d_b + k, j);
                            }
                        }
                    }
                    joint[*m][cluster_of[k]] += lambda * acc.re;
                }
            }
            let p: f64 = joint.iter().flatten().sum();
            if p < scheme.prob_floor() {
                return None;
            }
            let mut heat = 0.0;
            for (m, row) in joint.iter().enumerate() {
                for (n, pmn) in row.iter().enumerate() {
                    heat += pmn * (energy[m] - energy[n]);
                }
            }
            Some(heat / p)
        })
        .collect())
}
