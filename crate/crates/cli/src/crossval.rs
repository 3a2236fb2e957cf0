//! Randomised cross-validation of every identity the engine relies on.
//!
//! Each draw builds one small instance of each model family from a seeded
//! generator; instances are evaluated concurrently but reported in draw order.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use thermoq::closed_form::{self, DephParams, HEParams};
use thermoq::models::{
    build_coupled_oscillators, build_dephasing_model_with_cutoffs, fock_measurement, pauli_x_measurement, thermal_cutoffs,
};
use thermoq::tensor::truncation_level;
use thermoq::{c64, BathMode, Tamper, ThermometryScheme};

use crate::config::{MeanForceParams, ModeSpec, Numerics};
use crate::experiments::{deph_fisher_retained, FISHER_FLOOR, evaluate_scheme, he_fisher_retained, finish_rows, mean_force, probe_plus, probe_state, tol, PointResult};
use crate::output::Row;
use crate::report::{CheckSample, Verification};

const TAIL: f64 = 1e-12;
/// Relative closed-form checks reach down to P ~ 1e-6, so the heat-exchange
/// thermal tail must sit well below 1e-12.
const HE_TAIL: f64 = 1e-14;
const MEAN_FORCE_TAIL: f64 = 1e-10;
/// Per-mode cutoff caps for 1, 2 and 3 dephasing modes.
const DEPH_CAPS: [usize; 3] = [15, 12, 6];
const MIN_CUTOFF: usize = 8;
/// Levels above the thermal cutoff reserved for the coupling-displaced bath.
const DISPLACEMENT_MARGIN: usize = 4;

#[derive(Debug, Clone)]
enum Instance {
    HeatExchange { omega_a: f64, omega_0: f64, g: f64, beta: f64, t: f64, theta: f64, phase: f64 },
    Dephasing { modes: Vec<BathMode>, beta: f64, t: f64 },
    MeanForce { omega_q: f64, modes: Vec<BathMode>, beta: f64 },
}

fn draw_instances(seed: u64, draws: usize) -> Vec<(usize, Instance)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(3 * draws);
    for d in 0..draws {
        // Even draws keep the probe in vacuum so the closed forms apply.
        let (theta, phase) = if d % 2 == 0 { (0.0, 0.0) } else { (rng.gen_range(0.0..PI / 2.0), rng.gen_range(0.0..2.0 * PI)) };
        out.push((
            d,
            Instance::HeatExchange {
                omega_a: rng.gen_range(1.0..2.0),
                omega_0: rng.gen_range(1.0..2.0),
                g: rng.gen_range(0.05..0.5),
                beta: rng.gen_range(1.5..3.0),
                t: rng.gen_range(0.5..10.0),
                theta,
                phase,
            },
        ));
        let k = 1 + d % 3;
        let modes = (0..k).map(|_| BathMode::new(rng.gen_range(1.0..2.0), rng.gen_range(0.05..0.2)).unwrap()).collect();
        out.push((d, Instance::Dephasing { modes, beta: rng.gen_range(2.0..3.0), t: rng.gen_range(0.5..10.0) }));
        let modes = (0..2).map(|_| BathMode::new(rng.gen_range(1.0..2.0), rng.gen_range(0.05..0.2)).unwrap()).collect();
        out.push((d, Instance::MeanForce { omega_q: rng.gen_range(0.8..1.5), modes, beta: rng.gen_range(1.5..3.0) }));
    }
    out
}

fn fmt_modes(modes: &[BathMode]) -> String {
    modes.iter().map(|m| format!("({:.4},{:.4})", m.omega, m.coupling)).collect::<Vec<_>>().join(" ")
}

impl Instance {
    fn model(&self) -> &'static str {
        match self {
            Instance::HeatExchange { .. } => "heat-exchange",
            Instance::Dephasing { .. } => "dephasing",
            Instance::MeanForce { .. } => "mean-force",
        }
    }

    fn label(&self, draw: usize) -> String {
        match self {
            Instance::HeatExchange { omega_a, omega_0, g, beta, t, theta, .. } => format!(
                "draw {draw} heat-exchange(omega_a={omega_a:.6}, omega_0={omega_0:.6}, g={g:.6}, beta={beta:.6}, t={t:.6}, theta={theta:.4})"
            ),
            Instance::Dephasing { modes, beta, t } => {
                format!("draw {draw} dephasing(modes={}, beta={beta:.6}, t={t:.6})", fmt_modes(modes))
            }
            Instance::MeanForce { omega_q, modes, beta } => {
                format!("draw {draw} mean-force(omega_q={omega_q:.6}, modes={}, beta={beta:.6})", fmt_modes(modes))
            }
        }
    }

    fn evaluate(&self, tamper: Tamper) -> Result<(Row, Vec<CheckSample>), String> {
        let err = |e: thermoq::Error| e.to_string();
        let mut row = Row::new();
        match self {
            &Instance::HeatExchange { omega_a, omega_0, g, beta, t, theta, phase } => {
                let n_max = truncation_level(beta, omega_0.min(omega_a), HE_TAIL).map_err(err)?.clamp(MIN_CUTOFF, 30);
                let model = build_coupled_oscillators(omega_a, omega_0, g, n_max).map_err(err)?;
                let amps = [c64::new(theta.cos(), 0.0), c64::new(theta.sin() * phase.cos(), theta.sin() * phase.sin())];
                let rho0 = probe_state(n_max + 1, &amps).map_err(err)?;
                let scheme = ThermometryScheme::new(model, rho0, fock_measurement(n_max)).map_err(err)?.with_tamper(tamper);
                let ev = evaluate_scheme(&scheme, beta, t, thermoq::engine::default_fd_step(beta)).map_err(err)?;
                let mut checks = ev.identity_checks(beta);
                if theta == 0.0 {
                    let cf = HEParams::new(omega_a, omega_0, g, beta, t).map_err(err)?;
                    let fisher = he_fisher_retained(&cf, &ev.record);
                    let mut gap = (ev.record.fisher_heat - fisher).abs() / fisher.max(FISHER_FLOOR);
                    for o in &ev.record.outcomes {
                        let pc = closed_form::he_outcome_probability(&cf, o.index as u32);
                        if pc >= 1e-6 {
                            gap = gap.max((o.probability - pc).abs() / pc);
                        }
                    }
                    checks.push(CheckSample::new("closed_form", gap, tol::CLOSED_FORM));
                }
                row.push("beta", beta).push("t", t).push("n_max", n_max).push("dim", (n_max + 1).pow(2));
                Ok((row, checks))
            }
            Instance::Dephasing { modes, beta, t } => {
                let (beta, t) = (*beta, *t);
                let cap = DEPH_CAPS[modes.len() - 1];
                let wanted: Vec<usize> = thermal_cutoffs(modes, beta, TAIL, MIN_CUTOFF)
                    .map_err(err)?
                    .into_iter()
                    .map(|n| n + DISPLACEMENT_MARGIN)
                    .collect();
                let converged = wanted.iter().all(|&n| n <= cap);
                let cutoffs: Vec<usize> = wanted.iter().map(|&n| n.min(cap)).collect();
                let model = build_dephasing_model_with_cutoffs(modes, &cutoffs).map_err(err)?;
                let dim = model.space().total_dim();
                let scheme = ThermometryScheme::new(model, probe_plus().map_err(err)?, pauli_x_measurement())
                    .map_err(err)?
                    .with_tamper(tamper);
                let ev = evaluate_scheme(&scheme, beta, t, thermoq::engine::default_fd_step(beta)).map_err(err)?;
                let mut checks = ev.identity_checks(beta);
                // Closed forms assume an untruncated bath.
                if converged {
                    let cf = DephParams::new(modes.clone(), beta, t).map_err(err)?;
                    let q = closed_form::deph_q(&cf);
                    let fisher = deph_fisher_retained(&cf, &ev.record);
                    let scale = modes.iter().map(|m| m.omega).fold(0.0, f64::max);
                    let gap = ((ev.record.fisher_heat - fisher).abs() / fisher.max(FISHER_FLOOR))
                        .max((ev.record.mean_trajectory_heat() - q).abs() / scale);
                    checks.push(CheckSample::new("closed_form", gap, tol::CLOSED_FORM));
                }
                row.push("beta", beta).push("t", t).push("n_modes", modes.len()).push("dim", dim);
                Ok((row, checks))
            }
            Instance::MeanForce { omega_q, modes, beta } => {
                let params = MeanForceParams {
                    omega_q: *omega_q,
                    modes: modes.iter().map(|m| ModeSpec { omega: m.omega, coupling: m.coupling }).collect(),
                    beta: Some(*beta),
                };
                let numerics = Numerics { truncation_tail: MEAN_FORCE_TAIL, ..Numerics::default() };
                let (rows, checks) = mean_force(&params, &Vec::new(), &numerics)?;
                let src = &rows[0];
                row.push("beta", *beta);
                for col in ["n_modes", "dim"] {
                    if let Some(c) = src.get(col) {
                        row.push(col, c.clone());
                    }
                }
                Ok((row, checks))
            }
        }
    }
}

/// Evaluates `draws` random instances of each model family; violations are
/// recorded in `verification`. Output is a pure function of the arguments.
pub fn cross_validate(seed: u64, draws: usize, tamper: Tamper, verification: &mut Verification) -> Vec<Row> {
    let instances = draw_instances(seed, draws);
    let results: Vec<PointResult> = instances
        .par_iter()
        .map(|(draw, inst)| {
            let at = inst.label(*draw);
            let mut head = Row::new();
            head.push("draw", *draw).push("model", inst.model()).push("instance", at.clone());
            match inst.evaluate(tamper) {
                Ok((row, checks)) => {
                    head.0.extend(row.0);
                    for c in &checks {
                        head.push(c.check, c.deviation);
                    }
                    PointResult { at, rows: vec![head], checks, ..Default::default() }
                }
                Err(e) => PointResult { at, rows: vec![head], error: Some(e), ..Default::default() },
            }
        })
        .collect();
    finish_rows(results, verification)
}
