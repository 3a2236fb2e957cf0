//! Strong-coupling thermometry at global equilibrium `χ_s = e^{−βĤ}/Z`.
//!
//! The reduced state `ρ_s = Tr_B χ_s` is written as `e^{−βĤ*}/Z*` with the
//! Hamiltonian of mean force `Ĥ* = −β⁻¹ ln[Tr_B e^{−βĤ}/Z_B]`. The energy
//! operator `Ê*` is defined through
//! `d/d(−β) e^{−βĤ*} = ½(Ê* e^{−βĤ*} + e^{−βĤ*} Ê*)`; measuring in its
//! eigenbasis gives internal-energy outcomes whose deviation from
//! `U_S = −∂_β ln Z*` equals the conditional total-energy shift, and the
//! Fisher information of that measurement equals `ΔU_S²`.

use serde::Serialize;

use crate::error::{ensure_positive, Error, Result};
use crate::models::{eigenbasis_measurement, CompositeModel, ProjectiveMeasurement};
use crate::tensor::linalg::{self, CMatrix};
use crate::tensor::{gibbs_weights, DensityMatrix, Eigen, HermitianOperator, HilbertSpace};

/// Relative residual allowed in the Sylvester solve.
pub const SYLVESTER_TOL: f64 = 1e-8;
/// Agreement required between the spectral and trace forms of `δU_S`.
pub const DEVIATION_TOL: f64 = 1e-6;
const SINGULAR_FLOOR: f64 = 1e-300;

/// `Tr_B e^{−βĤ} / Z_B` with `Z* = tr` of it.
#[derive(Debug, Clone)]
pub struct ReducedGibbs {
    pub operator: CMatrix,
    pub ln_z_star: f64,
}

impl ReducedGibbs {
    pub fn state(&self) -> CMatrix {
        linalg::scaled(&self.operator, linalg::re((-self.ln_z_star).exp()))
    }
}

/// One outcome of the energy-operator measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyDeviation {
    /// Eigenvalue `ε_{S,l}` of `Ê*` (cluster mean).
    pub energy: f64,
    pub probability: f64,
    /// `ε_{S,l} − U_S`.
    pub spectral: f64,
    /// `Tr[Π_l Ĥ χ_s]/P_l − Tr[Ĥ χ_s]`.
    pub trace: f64,
}

#[derive(Debug, Clone)]
pub struct MeanForceResult {
    pub h_star: HermitianOperator,
    pub e_star: HermitianOperator,
    pub u_s: f64,
    pub delta_u: Vec<EnergyDeviation>,
    pub delta_u_sq: f64,
    pub z_star: f64,
    /// `‖½(ÊA + AÊ) − D‖_max / ‖D‖_max`.
    pub sylvester_residual: f64,
    pub measurement: ProjectiveMeasurement,
}

impl MeanForceResult {
    /// Largest `|spectral − trace|` over outcomes.
    pub fn max_route_gap(&self) -> f64 {
        self.delta_u.iter().map(|d| (d.spectral - d.trace).abs()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UrCheck {
    pub delta_u: f64,
    pub fisher: f64,
    /// `ΔU_S / √F`, i.e. `Δβ ΔU_S` at the Cramér–Rao point.
    pub product: f64,
}

impl UrCheck {
    pub fn relative_gap(&self) -> f64 {
        (self.fisher - self.delta_u.powi(2)).abs() / self.delta_u.powi(2)
    }
}

/// Energy operator together with its Sylvester residual.
#[derive(Debug, Clone)]
pub struct EnergyOperator {
    pub operator: HermitianOperator,
    pub residual: f64,
}

/// Caches `eig(Ĥ)`, `eig(Ĥ_B)` and `R_i = Tr_B|v_i⟩⟨v_i|` so that the reduced
/// Gibbs operator is cheap at any β.
#[derive(Debug, Clone)]
pub struct MeanForceSolver {
    system_space: HilbertSpace,
    h_s: CMatrix,
    energies: Vec<f64>,
    reduced: Vec<CMatrix>,
    sample_energies: Vec<f64>,
}

impl MeanForceSolver {
    pub fn new(model: &CompositeModel) -> Self {
        let (d_s, d_b) = (model.system_dim(), model.sample_dim());
        let eig = model.total_hamiltonian().eig();
        let v = &eig.vectors;
        let reduced = (0..eig.dim())
            .map(|i| {
                CMatrix::from_fn(d_s, d_s, |s, t| {
                    (0..d_b).fold(linalg::ZERO, |acc, b| acc + v.read(s * d_b + b, i) * v.read(t * d_b + b, i).conj())
                })
            })
            .collect();
        Self {
            system_space: HilbertSpace::new(vec![d_s]).expect("system dimension is positive"),
            h_s: model.system_hamiltonian().clone(),
            energies: eig.values,
            reduced,
            sample_energies: Eigen::of_hermitian(model.sample_hamiltonian()).values,
        }
    }

    fn combine(&self, weights: &[f64]) -> CMatrix {
        let d = self.h_s.nrows();
        let mut out = linalg::zeros(d, d);
        for (w, r) in weights.iter().zip(&self.reduced) {
            if *w != 0.0 {
                out = &out + &linalg::scaled(r, linalg::re(*w));
            }
        }
        out
    }

    pub fn reduced_gibbs(&self, beta: f64) -> Result<ReducedGibbs> {
        ensure_positive("beta", beta)?;
        let (w, ln_z) = gibbs_weights(&self.energies, beta);
        let (_, ln_zb) = gibbs_weights(&self.sample_energies, beta);
        let ln_z_star = ln_z - ln_zb;
        let operator = linalg::scaled(&linalg::hermitian_part(&self.combine(&w)), linalg::re(ln_z_star.exp()));
        Ok(ReducedGibbs { operator, ln_z_star })
    }

    /// `ρ_s = Tr_B χ_s`.
    pub fn reduced_state(&self, beta: f64) -> Result<DensityMatrix> {
        let g = self.reduced_gibbs(beta)?;
        Ok(DensityMatrix::new_unchecked(self.system_space.clone(), g.state()))
    }

    pub fn mean_force_hamiltonian(&self, beta: f64) -> Result<HermitianOperator> {
        let g = self.reduced_gibbs(beta)?;
        let eig = Eigen::of_hermitian(&g.operator);
        let min = eig.values.first().copied().unwrap_or(0.0);
        if !(min > 0.0) {
            return Err(Error::NotPositive { min_eigenvalue: min });
        }
        let h = eig.apply_real(|a| -a.ln() / beta)?;
        HermitianOperator::from_hermitian_part(self.system_space.clone(), &h)
    }

    fn richardson<T>(beta: f64, h: f64, f: impl Fn(f64) -> Result<T>, diff: impl Fn(&T, &T, f64) -> T, combine: impl Fn(&T, &T) -> T) -> Result<T> {
        check_step(beta, h)?;
        let coarse = diff(&f(beta - h)?, &f(beta + h)?, 2.0 * h);
        let fine = diff(&f(beta - h / 2.0)?, &f(beta + h / 2.0)?, h);
        Ok(combine(&fine, &coarse))
    }

    /// `d/d(−β)` of the reduced Gibbs operator by Richardson-extrapolated
    /// central differences.
    pub fn gibbs_derivative(&self, beta: f64, h: f64) -> Result<CMatrix> {
        Self::richardson(
            beta,
            h,
            |b| self.reduced_gibbs(b).map(|g| g.operator),
            |lo, hi, w| linalg::scaled(&linalg::sub(lo, hi), linalg::re(1.0 / w)),
            |fine, coarse| linalg::sub(&linalg::scaled(fine, linalg::re(4.0 / 3.0)), &linalg::scaled(coarse, linalg::re(1.0 / 3.0))),
        )
    }

    /// Solves `½(Ê A + A Ê) = D` in the eigenbasis of `A = e^{−βĤ*}`.
    pub fn energy_operator(&self, beta: f64, h: f64) -> Result<EnergyOperator> {
        let a = self.reduced_gibbs(beta)?.operator;
        let d = self.gibbs_derivative(beta, h)?;
        let eig = Eigen::of_hermitian(&a);
        let v = &eig.vectors;
        let dt = &(v.adjoint() * &d) * v;
        let n = eig.dim();
        let mut et = linalg::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let s = eig.values[i] + eig.values[j];
                if s.abs() < SINGULAR_FLOOR {
                    return Err(Error::SingularSylvester { value: s });
                }
                et.write(i, j, dt.read(i, j) * linalg::re(2.0 / s));
            }
        }
        let e = linalg::hermitian_part(&(&(v * &et) * v.adjoint()));
        let lhs = linalg::scaled(&linalg::add(&(&e * &a), &(&a * &e)), linalg::re(0.5));
        let scale = linalg::max_abs(&d);
        let residual = if scale == 0.0 { linalg::max_abs(&lhs) } else { linalg::max_abs_diff(&lhs, &d) / scale };
        if residual > SYLVESTER_TOL {
            return Err(Error::IdentityViolation { identity: "symmetric Sylvester residual", deviation: residual, tolerance: SYLVESTER_TOL });
        }
        Ok(EnergyOperator { operator: HermitianOperator::from_hermitian_part(self.system_space.clone(), &e)?, residual })
    }

    /// `∂_β(βĤ*)`: the alternative energy operator with the same mean.
    pub fn energy_operator_alt(&self, beta: f64, h: f64) -> Result<HermitianOperator> {
        let m = Self::richardson(
            beta,
            h,
            |b| self.mean_force_hamiltonian(b).map(|hs| linalg::scaled(hs.matrix(), linalg::re(b))),
            |lo, hi, w| linalg::scaled(&linalg::sub(hi, lo), linalg::re(1.0 / w)),
            |fine, coarse| linalg::sub(&linalg::scaled(fine, linalg::re(4.0 / 3.0)), &linalg::scaled(coarse, linalg::re(1.0 / 3.0))),
        )?;
        HermitianOperator::from_hermitian_part(self.system_space.clone(), &m)
    }

    /// `U_S = −∂_β ln Z*` by Richardson-extrapolated central differences.
    pub fn internal_energy(&self, beta: f64, h: f64) -> Result<f64> {
        Self::richardson(
            beta,
            h,
            |b| self.reduced_gibbs(b).map(|g| g.ln_z_star),
            |lo, hi, w| (lo - hi) / w,
            |fine, coarse| (4.0 * fine - coarse) / 3.0,
        )
    }

    /// `tr(Π R_i)` for every eigenvector of `Ĥ`.
    fn overlaps(&self, proj: &CMatrix) -> Vec<f64> {
        self.reduced.iter().map(|r| linalg::trace_product(proj, r).re).collect()
    }

    pub fn internal_energy_deviation(&self, beta: f64, h: f64, degeneracy_tol: f64) -> Result<MeanForceResult> {
        let gibbs = self.reduced_gibbs(beta)?;
        let h_star = self.mean_force_hamiltonian(beta)?;
        let e_op = self.energy_operator(beta, h)?;
        let u_s = self.internal_energy(beta, h)?;
        let meas = eigenbasis_measurement(&e_op.operator, degeneracy_tol)?;

        let (w, _) = gibbs_weights(&self.energies, beta);
        let mean_h: f64 = w.iter().zip(&self.energies).map(|(w, e)| w * e).sum();
        let rho_s = gibbs.state();
        let mut delta_u = Vec::with_capacity(meas.len());
        for (proj, &energy) in meas.projectors().iter().zip(meas.labels()) {
            let p = linalg::trace_product(proj, &rho_s).re;
            let ov = self.overlaps(proj);
            let cond: f64 = w.iter().zip(&self.energies).zip(&ov).map(|((w, e), o)| w * e * o).sum();
            let trace = if p > 0.0 { cond / p - mean_h } else { 0.0 };
            delta_u.push(EnergyDeviation { energy, probability: p, spectral: energy - u_s, trace });
        }
        let result = MeanForceResult {
            delta_u_sq: delta_u.iter().map(|d| d.probability * d.spectral.powi(2)).sum(),
            h_star,
            e_star: e_op.operator,
            u_s,
            delta_u,
            z_star: gibbs.ln_z_star.exp(),
            sylvester_residual: e_op.residual,
            measurement: meas,
        };
        let gap = result.max_route_gap();
        if gap > DEVIATION_TOL {
            return Err(Error::IdentityViolation { identity: "internal-energy deviation routes", deviation: gap, tolerance: DEVIATION_TOL });
        }
        Ok(result)
    }

    /// Classical Fisher information of the `Ê*` measurement on `ρ_s(β')`,
    /// projectors held fixed, compared with `ΔU_S²`.
    pub fn temperature_energy_ur_check(&self, beta: f64, h: f64, degeneracy_tol: f64) -> Result<UrCheck> {
        let res = self.internal_energy_deviation(beta, h, degeneracy_tol)?;
        let delta_u = res.delta_u_sq.sqrt();
        let scale = res.delta_u.iter().map(|d| d.energy.abs()).fold(1.0, f64::max);
        if res.measurement.len() < 2 || !(delta_u > 1e-12 * scale) {
            return Err(Error::Degenerate("energy fluctuation ΔU_S vanishes".into()));
        }
        let overlaps: Vec<Vec<f64>> = res.measurement.projectors().iter().map(|p| self.overlaps(p)).collect();
        let probs = |b: f64| -> Vec<f64> {
            let (w, _) = gibbs_weights(&self.energies, b);
            overlaps.iter().map(|ov| w.iter().zip(ov).map(|(w, o)| w * o).sum()).collect()
        };
        check_step(beta, h)?;
        let p0 = probs(beta);
        let (pm, pp, pm2, pp2) = (probs(beta - h), probs(beta + h), probs(beta - h / 2.0), probs(beta + h / 2.0));
        let mut fisher = 0.0;
        for l in 0..p0.len() {
            if p0[l] < crate::engine::PROB_FLOOR {
                continue;
            }
            let coarse = (pm[l].ln() - pp[l].ln()) / (2.0 * h);
            let fine = (pm2[l].ln() - pp2[l].ln()) / h;
            let score = (4.0 * fine - coarse) / 3.0;
            fisher += p0[l] * score * score;
        }
        Ok(UrCheck { delta_u, fisher, product: delta_u / fisher.sqrt() })
    }
}

fn check_step(beta: f64, h: f64) -> Result<()> {
    if !(h > 0.0 && h <= beta / 10.0) {
        return Err(Error::InvalidParameter { name: "h_step", value: h, reason: "must lie in (0, β/10]" });
    }
    Ok(())
}

/// Default derivative step `10⁻⁴ β`.
pub fn default_step(beta: f64) -> f64 {
    1e-4 * beta
}

/// Default clustering tolerance: `10⁻⁸` of the spectral range of `op`.
pub fn default_degeneracy_tol(op: &HermitianOperator) -> f64 {
    let v = op.eig().values;
    1e-8 * (v.last().unwrap_or(&0.0) - v.first().unwrap_or(&0.0)).max(1.0)
}

pub fn mean_force_hamiltonian(model: &CompositeModel, beta: f64) -> Result<HermitianOperator> {
    MeanForceSolver::new(model).mean_force_hamiltonian(beta)
}

pub fn energy_operator(model: &CompositeModel, beta: f64, h_step: f64) -> Result<HermitianOperator> {
    MeanForceSolver::new(model).energy_operator(beta, h_step).map(|e| e.operator)
}

pub fn internal_energy(model: &CompositeModel, beta: f64, h_step: f64) -> Result<f64> {
    MeanForceSolver::new(model).internal_energy(beta, h_step)
}

pub fn internal_energy_deviation(model: &CompositeModel, beta: f64, degeneracy_tol: f64) -> Result<MeanForceResult> {
    MeanForceSolver::new(model).internal_energy_deviation(beta, default_step(beta), degeneracy_tol)
}

pub fn temperature_energy_ur_check(model: &CompositeModel, beta: f64) -> Result<UrCheck> {
    let solver = MeanForceSolver::new(model);
    let h = default_step(beta);
    let tol = default_degeneracy_tol(&solver.energy_operator(beta, h)?.operator);
    solver.temperature_energy_ur_check(beta, h, tol)
}
