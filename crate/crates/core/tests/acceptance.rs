//! Acceptance criteria, one PASS/FAIL line each. Runs as a plain binary so
//! the report is always printed; exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use thermoq::closed_form::{self, DephParams, HEParams};
use thermoq::engine::{default_fd_step, HeatRecord};
use thermoq::mean_force::{default_degeneracy_tol, default_step, MeanForceSolver, DEVIATION_TOL, SYLVESTER_TOL};
use thermoq::models::{
    build_coupled_oscillators, build_dephasing_model, build_dephasing_model_with_cutoffs, build_spin_boson,
    fock_measurement, pauli_x_measurement, thermal_cutoffs,
};
use thermoq::tensor::linalg::{self, max_abs_diff};
use thermoq::tensor::{partial_trace, thermal_state, truncation_level};
use thermoq::{c64, BathMode, DensityMatrix, HilbertSpace, Tamper, ThermometryScheme, PROB_FLOOR};

const SEED: u64 = 20_240_917;
const INSTANCES: usize = 20;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn probe(space_dim: usize, amps: &[c64]) -> DensityMatrix {
    let mut psi = vec![c64::new(0.0, 0.0); space_dim];
    psi[..amps.len()].copy_from_slice(amps);
    DensityMatrix::pure(HilbertSpace::new(vec![space_dim]).unwrap(), &psi).unwrap()
}

fn plus() -> DensityMatrix {
    let a = c64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    probe(2, &[a, a])
}

/// A random model instance with everything needed by criteria 1–3 and 11.
struct Instance {
    label: String,
    scheme: ThermometryScheme,
    beta: f64,
    t: f64,
}

fn heat_exchange_instances(rng: &mut ChaCha8Rng) -> Vec<Instance> {
    (0..INSTANCES)
        .map(|_| {
            let omega_0: f64 = rng.gen_range(0.5..1.5);
            let omega_a = rng.gen_range(0.5..1.5);
            let g = rng.gen_range(0.05..0.5);
            let beta = rng.gen_range(0.5..2.0);
            let t = rng.gen_range(0.5..10.0);
            let n_max = truncation_level(beta, omega_0.min(omega_a), 1e-10).unwrap().clamp(8, 30);
            let model = build_coupled_oscillators(omega_a, omega_0, g, n_max).unwrap();
            let theta: f64 = rng.gen_range(0.0..PI / 2.0);
            let phase: f64 = rng.gen_range(0.0..2.0 * PI);
            let rho0 = probe(
                n_max + 1,
                &[c64::new(theta.cos(), 0.0), c64::new(theta.sin() * phase.cos(), theta.sin() * phase.sin())],
            );
            Instance {
                label: format!("HE(ωa={omega_a:.3}, ω0={omega_0:.3}, g={g:.3}, β={beta:.3}, t={t:.3}, N={n_max})"),
                scheme: ThermometryScheme::new(model, rho0, fock_measurement(n_max)).unwrap(),
                beta,
                t,
            }
        })
        .collect()
}

fn dephasing_instances(rng: &mut ChaCha8Rng) -> Vec<Instance> {
    (0..INSTANCES)
        .map(|i| {
            let k = 1 + i % 3;
            let n_max = [15, 12, 6][k - 1];
            let modes: Vec<BathMode> = (0..k)
                .map(|_| BathMode::new(rng.gen_range(0.5..2.0), rng.gen_range(0.05..0.4)).unwrap())
                .collect();
            let beta = rng.gen_range(0.5..2.0);
            let t = rng.gen_range(0.5..10.0);
            let model = build_dephasing_model(&modes, n_max).unwrap();
            Instance {
                label: format!("deph({k} modes, β={beta:.3}, t={t:.3}, N={n_max})"),
                scheme: ThermometryScheme::new(model, plus(), pauli_x_measurement()).unwrap(),
                beta,
                t,
            }
        })
        .collect()
}

/// Per-instance quantities shared by criteria 1–3.
struct Evaluated {
    record: HeatRecord,
    score_gap: f64,
    fisher_fd: f64,
    two_point_gap: f64,
}

fn evaluate(inst: &Instance) -> Evaluated {
    let s = &inst.scheme;
    let record = s.heat_record(inst.beta, inst.t).unwrap();
    let direct = s.scores_direct(inst.beta, inst.t).unwrap();
    let chi0 = s.initial_state(inst.beta).unwrap();
    let two_point = s.two_point_trajectory_heats(&chi0, inst.t).unwrap();
    let mut score_gap = 0.0_f64;
    let mut two_point_gap = 0.0_f64;
    for o in record.outcomes.iter().filter(|o| o.probability > PROB_FLOOR) {
        score_gap = score_gap.max((direct[o.index].unwrap() - o.score).abs());
        two_point_gap = two_point_gap.max((two_point[o.index].unwrap() - o.trajectory_heat).abs());
    }
    let fisher_fd = s.fisher_finite_difference(inst.beta, inst.t, default_fd_step(inst.beta)).unwrap();
    Evaluated { record, score_gap, fisher_fd, two_point_gap }
}

fn fisher_rel_gap(fd: f64, heat: f64) -> f64 {
    (fd - heat).abs() / heat.max(1e-12)
}

fn criterion_1_to_3(instances: &[Instance], evals: &[Evaluated], elapsed: f64) -> [Verdict; 3] {
    let worst = |f: &dyn Fn(&Evaluated) -> f64| {
        evals
            .iter()
            .zip(instances)
            .map(|(e, i)| (f(e), i.label.as_str()))
            .fold((0.0, ""), |acc, x| if x.0 > acc.0 { x } else { acc })
    };
    let (s, s_at) = worst(&|e| e.score_gap);
    let (f, f_at) = worst(&|e| fisher_rel_gap(e.fisher_fd, e.record.fisher_heat));
    let (p, p_at) = worst(&|e| e.two_point_gap);
    let n = instances.len();
    [
        verdict(
            s <= 1e-8 && elapsed < 120.0,
            format!("{n} instances, max |score − (δH_tra + H_cor)| = {s:.2e} at {s_at} (tol 1e-8); runtime {elapsed:.1}s (< 120s)"),
        ),
        verdict(f <= 1e-5, format!("{n} instances, max relative Fisher gap = {f:.2e} at {f_at} (tol 1e-5)")),
        verdict(p <= 1e-8, format!("{n} instances, max |H_tra two-point − operator| = {p:.2e} at {p_at} (tol 1e-8)")),
    ]
}

fn criterion_4() -> Verdict {
    let (omega_0, g) = (2.0, 0.2);
    let mut worst = (0.0_f64, String::new());
    let mut bump = |err: f64, what: String| {
        if err > worst.0 {
            worst = (err, what);
        }
    };
    for &beta in &[0.5, 1.0, 2.0] {
        let n_max = truncation_level(beta, omega_0, 1e-14).unwrap();
        for &ratio in &[0.0, 0.5, 2.0] {
            let omega_a = omega_0 + 2.0 * ratio * g;
            let model = build_coupled_oscillators(omega_a, omega_0, g, n_max).unwrap();
            let scheme = ThermometryScheme::new(model, probe(n_max + 1, &[c64::new(1.0, 0.0)]), fock_measurement(n_max)).unwrap();
            let base = HEParams::new(omega_a, omega_0, g, beta, 0.0).unwrap();
            let t_opt = closed_form::he_optimal_time(&base, 0);
            for &t in &[t_opt, t_opt / 3.0] {
                let p = base.with_time(t);
                let rec = scheme.heat_record(beta, t).unwrap();
                let tag = format!("β={beta}, Δ/g={ratio}, t={t:.4}");
                for o in &rec.outcomes {
                    let l = o.index as u32;
                    let pc = closed_form::he_outcome_probability(&p, l);
                    if pc < 1e-6 {
                        continue;
                    }
                    let (tra, cor) = closed_form::he_heat_terms(&p, l);
                    bump((o.probability - pc).abs() / pc, format!("P_{l} {tag}"));
                    bump((o.trajectory_heat - tra).abs() / tra.abs().max(omega_0), format!("H_tra({l}) {tag}"));
                    bump((o.correlation_heat - cor).abs() / cor.abs().max(omega_0), format!("H_cor({l}) {tag}"));
                }
                let bound_bf = 1.0 / (beta * rec.fisher_heat.sqrt());
                let bound = closed_form::he_precision_bound(&p);
                bump((bound_bf - bound).abs() / bound, format!("bound {tag}"));
            }
        }
    }
    verdict(worst.0 <= 1e-6, format!("18 configurations, worst relative error {:.2e} ({}) (tol 1e-6)", worst.0, worst.1))
}

fn criterion_5() -> Verdict {
    let (beta, omega, g) = (1.0, 1.0, 0.1);
    let t = PI / (2.0 * g);
    let closed = closed_form::he_precision_bound(&HEParams::new(omega, omega, g, beta, t).unwrap());
    let n_max = truncation_level(beta, omega, 1e-14).unwrap();
    let model = build_coupled_oscillators(omega, omega, g, n_max).unwrap();
    let scheme = ThermometryScheme::new(model, probe(n_max + 1, &[c64::new(1.0, 0.0)]), fock_measurement(n_max)).unwrap();
    let numeric = 1.0 / (beta * scheme.heat_record(beta, t).unwrap().fisher_heat.sqrt());
    let target = 1.042190;
    let pass = (closed - target).abs() <= 1e-5 && (numeric - target).abs() <= 1e-5;
    verdict(pass, format!("closed form {closed:.7}, brute force {numeric:.7}, target {target} ± 1e-5"))
}

fn criterion_6() -> Verdict {
    let (beta, t) = (1.0, PI);
    let mode = BathMode::new(1.0, 0.1).unwrap();
    let p = DephParams::new(vec![mode], beta, t).unwrap();
    let (gamma, q, c, bound) = (
        closed_form::deph_gamma(&p),
        closed_form::deph_q(&p),
        closed_form::deph_c(&p),
        closed_form::deph_precision_bound(&p),
    );
    let n_max = truncation_level(beta, mode.omega, 1e-14).unwrap();
    let model = build_dephasing_model(&[mode], n_max).unwrap();
    let scheme = ThermometryScheme::new(model, plus(), pauli_x_measurement()).unwrap();
    let chi_t = scheme.propagator().evolve(&scheme.initial_state(beta).unwrap(), t).unwrap();
    let rho_s = partial_trace(&chi_t, &[0]).unwrap();
    let gamma_bf = -(2.0 * rho_s.matrix().read(0, 1).abs()).ln();
    let rec = scheme.heat_record(beta, t).unwrap();
    let plus_out = rec.outcome(0).unwrap();
    let c_bf = plus_out.score * plus_out.probability / (-gamma_bf).exp();
    let bound_bf = 1.0 / (beta * rec.fisher_heat.sqrt());
    let checks = [
        ((gamma - 0.173116).abs() <= 1e-6, (gamma_bf - gamma).abs() <= 1e-6),
        ((q + 0.04).abs() <= 1e-10, (rec.average_heat - q).abs() <= 1e-10),
        ((c + 0.073654).abs() <= 1e-6, (c_bf - c).abs() <= 1e-6),
        ((bound - 4.3665).abs() <= 1e-3, (bound_bf - bound).abs() <= 1e-3),
    ];
    let pass = checks.iter().all(|(a, b)| *a && *b);
    verdict(
        pass,
        format!(
            "Γ = {gamma:.7} (bf {gamma_bf:.7}), Q = {q:.10} (bf {:.10}), C = {c:.7} (bf {c_bf:.7}), bound = {bound:.5} (bf {bound_bf:.5})",
            rec.average_heat
        ),
    )
}

fn criterion_7() -> Verdict {
    let cases: [(Vec<BathMode>, f64, f64); 3] = [
        (vec![BathMode::new(1.0, 0.1).unwrap()], 1.0, PI),
        (vec![BathMode::new(1.0, 0.2).unwrap(), BathMode::new(1.8, 0.15).unwrap()], 2.0, 2.4),
        (
            vec![BathMode::new(1.2, 0.1).unwrap(), BathMode::new(1.6, 0.2).unwrap(), BathMode::new(2.2, 0.1).unwrap()],
            3.0,
            5.0,
        ),
    ];
    let mut worst = 0.0_f64;
    for (modes, beta, t) in cases {
        // Cutoffs resolve both the thermal tail and the displaced ground state.
        let cutoffs = thermal_cutoffs(&modes, beta, 1e-12, 8).unwrap();
        let q = closed_form::deph_q(&DephParams::new(modes.clone(), beta, t).unwrap());
        let model = build_dephasing_model_with_cutoffs(&modes, &cutoffs).unwrap();
        let scheme = ThermometryScheme::new(model, plus(), pauli_x_measurement()).unwrap();
        let rec = scheme.heat_record(beta, t).unwrap();
        let tp = scheme.two_point_trajectory_heats(&scheme.initial_state(beta).unwrap(), t).unwrap();
        let tp_mean: f64 = rec.outcomes.iter().map(|o| o.probability * tp[o.index].unwrap()).sum();
        worst = worst.max((rec.mean_trajectory_heat() - q).abs()).max((tp_mean - q).abs());
    }
    verdict(worst <= 1e-8, format!("1–3 mode models, max |Σ P_l H_tra − Q| = {worst:.2e} (tol 1e-8)"))
}

fn criterion_8() -> Verdict {
    let start = Instant::now();
    let j = thermoq::SpectralDensity::ohmic(0.01, 10.0).unwrap();
    let betas = closed_form::geomspace(5.0, 50.0, 8);
    let he = closed_form::fit_points(&closed_form::he_scaling_points(&j, &betas, closed_form::Detuning::default()).unwrap()).unwrap();
    let de = closed_form::fit_points(&closed_form::deph_scaling_points(&j, &betas, 1.0, 5000, 100.0).unwrap()).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let pass = (he.slope - 1.0).abs() <= 0.1 && (de.slope - 2.0).abs() <= 0.1 && elapsed < 60.0;
    verdict(
        pass,
        format!(
            "HE slope {:.4} (target 1 ± 0.1), dephasing slope {:.4} (target 2 ± 0.1), runtime {elapsed:.2}s",
            he.slope, de.slope
        ),
    )
}

fn criterion_9() -> Verdict {
    let beta = 1.0;
    let modes = [BathMode::new(0.8, 0.15).unwrap(), BathMode::new(1.3, 0.15).unwrap()];
    let cutoffs = thermal_cutoffs(&modes, beta, 1e-10, 2).unwrap();
    let model = build_spin_boson(1.0, &modes, &cutoffs).unwrap();
    let solver = MeanForceSolver::new(&model);
    let h = default_step(beta);

    let h_star = solver.mean_force_hamiltonian(beta).unwrap();
    let a = h_star.eig().apply_real(|e| (-beta * e).exp()).unwrap();
    let rebuilt = linalg::scaled(&a, linalg::re(1.0 / linalg::trace(&a).re));
    let exact = partial_trace(&thermal_state(&model.total_hamiltonian(), beta).unwrap(), &[0]).unwrap();
    let recon = max_abs_diff(&rebuilt, exact.matrix());

    let e = solver.energy_operator(beta, h).unwrap();
    let tol = default_degeneracy_tol(&e.operator);
    let dev = solver.internal_energy_deviation(beta, h, tol).unwrap();
    let ur = solver.temperature_energy_ur_check(beta, h, tol).unwrap();
    let pass = recon <= 1e-10
        && e.residual <= SYLVESTER_TOL
        && dev.max_route_gap() <= DEVIATION_TOL
        && ur.relative_gap() <= 1e-5
        && (ur.product - 1.0).abs() <= 1e-5;
    verdict(
        pass,
        format!(
            "cutoffs {cutoffs:?}: (a) reconstruction {recon:.2e} (b) Sylvester residual {:.2e} (c) δU route gap {:.2e} (d) |F − ΔU²|/ΔU² = {:.2e}, Δβ·ΔU = {:.8}",
            e.residual,
            dev.max_route_gap(),
            ur.relative_gap(),
            ur.product
        ),
    )
}

fn criterion_10() -> Verdict {
    let beta = 1.0;
    let dist = |g: f64| {
        let modes = [BathMode::new(0.8, g).unwrap(), BathMode::new(1.3, g).unwrap()];
        let model = build_spin_boson(1.0, &modes, &[10, 7]).unwrap();
        let e = MeanForceSolver::new(&model).energy_operator(beta, default_step(beta)).unwrap();
        max_abs_diff(e.operator.matrix(), model.system_hamiltonian())
    };
    let d: Vec<f64> = [0.1, 0.05, 0.025, 0.0].iter().map(|&g| dist(g)).collect();
    let pass = d[0] > d[1] && d[1] > d[2] && d[3] <= 1e-6;
    verdict(
        pass,
        format!("‖Ê* − Ĥ_S‖_max at g = 0.1, 0.05, 0.025: {:.3e}, {:.3e}, {:.3e}; at g = 0: {:.1e}", d[0], d[1], d[2], d[3]),
    )
}

fn criterion_11(instances: &[Instance], evals: &[Evaluated]) -> Verdict {
    let mut lines = Vec::new();
    let mut pass = true;
    for tamper in [Tamper::FlipCorrelationSign, Tamper::DropInverseProbability] {
        let worst = instances
            .iter()
            .zip(evals)
            .map(|(inst, e)| {
                let rec = inst.scheme.clone().with_tamper(tamper).heat_record(inst.beta, inst.t).unwrap();
                fisher_rel_gap(e.fisher_fd, rec.fisher_heat)
            })
            .fold(0.0_f64, f64::max);
        pass &= worst > 1e-5;
        lines.push(format!("{tamper:?}: criterion-2 gap {worst:.2e}"));
    }
    verdict(pass, format!("{} (each must exceed 1e-5)", lines.join(", ")))
}

fn main() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut instances = heat_exchange_instances(&mut rng);
    instances.extend(dephasing_instances(&mut rng));
    let evals: Vec<Evaluated> = instances.iter().map(evaluate).collect();
    let shared = start.elapsed().as_secs_f64();

    let [c1, c2, c3] = criterion_1_to_3(&instances, &evals, shared);
    let results = [
        ("score-heat identity", c1),
        ("temperature-heat uncertainty relation", c2),
        ("two-point trajectory heat", c3),
        ("heat-exchange closed forms", criterion_4()),
        ("heat-exchange worked bound", criterion_5()),
        ("dephasing closed forms", criterion_6()),
        ("dephasing average heat", criterion_7()),
        ("low-temperature scaling exponents", criterion_8()),
        ("mean-force identities", criterion_9()),
        ("weak-coupling collapse", criterion_10()),
        ("mutation sensitivity", criterion_11(&instances, &evals)),
    ];
    let mut failed = 0;
    for (i, (name, v)) in results.iter().enumerate() {
        println!("[{}] criterion {:>2} {name}: {}", if v.pass { "PASS" } else { "FAIL" }, i + 1, v.detail);
        failed += usize::from(!v.pass);
    }
    println!(
        "acceptance: {}/{} passed in {:.1}s",
        results.len() - failed,
        results.len(),
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
