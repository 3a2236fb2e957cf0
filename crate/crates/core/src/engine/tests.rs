use std::f64::consts::PI;

use proptest::prelude::*;

use super::*;
use crate::models::{build_coupled_oscillators, build_dephasing_model, fock_measurement, pauli_x_measurement, BathMode};
use crate::tensor::linalg::{kron, max_abs_diff, trace_distance};

fn fock_state(n_max: usize, n: usize) -> DensityMatrix {
    let mut psi = vec![linalg::ZERO; n_max + 1];
    psi[n] = linalg::ONE;
    DensityMatrix::pure(HilbertSpace::new(vec![n_max + 1]).unwrap(), &psi).unwrap()
}

fn plus_state() -> DensityMatrix {
    let a = linalg::re(std::f64::consts::FRAC_1_SQRT_2);
    DensityMatrix::pure(HilbertSpace::new(vec![2]).unwrap(), &[a, a]).unwrap()
}

fn he_scheme(omega_a: f64, omega_0: f64, g: f64, n_max: usize) -> ThermometryScheme {
    let model = build_coupled_oscillators(omega_a, omega_0, g, n_max).unwrap();
    ThermometryScheme::new(model, fock_state(n_max, 0), fock_measurement(n_max)).unwrap()
}

fn deph_scheme(modes: &[BathMode], n_max: usize) -> ThermometryScheme {
    let model = build_dephasing_model(modes, n_max).unwrap();
    ThermometryScheme::new(model, plus_state(), pauli_x_measurement()).unwrap()
}

/// Independent route: forms `M_l = Π_l Û_t / √P_l` on the full space and
/// evaluates every trace literally.
fn brute_force_heats(s: &ThermometryScheme, beta: f64, t: f64) -> Vec<Option<(f64, f64, f64)>> {
    let model = s.model();
    let d_b = model.sample_dim();
    let id_b = linalg::identity(d_b);
    let h_b_full = kron(&linalg::identity(model.system_dim()), model.sample_hamiltonian());
    let chi0 = s.initial_state(beta).unwrap().into_matrix();
    let u = s.propagator().unitary(t);
    let chi_t = linalg::sandwich(&u, &chi0);
    let e_t = linalg::trace_product(&h_b_full, &chi_t).re;
    s.measurement()
        .projectors()
        .iter()
        .map(|proj| {
            let pi = kron(proj, &id_b);
            let pu = &pi * &u;
            let p = linalg::trace(&linalg::sandwich(&pu, &chi0)).re;
            if p < 1e-9 {
                return None;
            }
            let m = linalg::scaled(&pu, linalg::re(1.0 / p.sqrt()));
            let after = linalg::sandwich(&m, &chi0);
            let first = linalg::trace(&linalg::sandwich(&m, &(&h_b_full * &chi0))).re;
            let cond = linalg::trace_product(&h_b_full, &after).re;
            Some((p, first - cond, cond - e_t))
        })
        .collect()
}

fn bose(beta_omega: f64) -> f64 {
    1.0 / beta_omega.exp_m1()
}

#[test]
fn evolution_at_zero_time_is_identity() {
    let s = he_scheme(1.1, 1.0, 0.2, 4);
    let chi0 = s.initial_state(0.7).unwrap();
    let chi_t = s.propagator().evolve(&chi0, 0.0).unwrap();
    assert!(max_abs_diff(chi0.matrix(), chi_t.matrix()) < 1e-14);
}

#[test]
fn uncoupled_diagonal_state_is_stationary() {
    let s = he_scheme(1.3, 1.0, 0.0, 4);
    let chi0 = s.initial_state(1.0).unwrap();
    let chi_t = evolve_total(s.model(), &chi0, 3.7).unwrap();
    assert!(max_abs_diff(chi0.matrix(), chi_t.matrix()) < 1e-12);
}

#[test]
fn evolution_rejects_wrong_dimension() {
    let s = he_scheme(1.0, 1.0, 0.1, 3);
    let wrong = DensityMatrix::maximally_mixed(HilbertSpace::new(vec![3, 3]).unwrap());
    assert!(matches!(evolve_total(s.model(), &wrong, 1.0), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn apply_matches_unitary_product() {
    let s = he_scheme(1.2, 1.0, 0.3, 3);
    let x = s.initial_state(0.5).unwrap().into_matrix();
    let direct = &s.propagator().unitary(2.1) * &x;
    assert!(max_abs_diff(&direct, &s.propagator().apply(&x, 2.1)) < 1e-12);
}

#[test]
fn probabilities_of_eigenstate_and_mixed_probe() {
    let s = he_scheme(1.0, 1.0, 0.0, 3);
    let chi0 = s.initial_state(1.0).unwrap();
    let p = outcome_probabilities(&chi0, s.measurement()).unwrap();
    assert!((p[0].1 - 1.0).abs() < 1e-14);
    assert!(p[1..].iter().all(|x| x.1.abs() < 1e-14));

    let model = build_dephasing_model(&[BathMode::new(1.0, 0.2).unwrap()], 4).unwrap();
    let mixed = DensityMatrix::maximally_mixed(HilbertSpace::new(vec![2]).unwrap());
    let scheme = ThermometryScheme::new(model, mixed, pauli_x_measurement()).unwrap();
    let chi_t = scheme.propagator().evolve(&scheme.initial_state(1.0).unwrap(), 2.0).unwrap();
    for (_, p) in outcome_probabilities(&chi_t, scheme.measurement()).unwrap() {
        assert!((p - 0.5).abs() < 1e-12);
    }
}

#[test]
fn resonant_swap_gives_geometric_law() {
    // Full swap at g t = π/2: the probe inherits the sample's thermal law.
    let beta = 1.0;
    let s = he_scheme(1.0, 1.0, 0.1, 30);
    let rec = s.heat_record(beta, 5.0 * PI).unwrap();
    let nbar = bose(beta);
    for o in &rec.outcomes {
        let l = o.index as i32;
        let expected = nbar.powi(l) / (1.0 + nbar).powi(l + 1);
        assert!((o.probability - expected).abs() < 1e-8, "l={l}");
    }
}

#[test]
fn conditional_states_without_coupling_equal_marginal() {
    let s = he_scheme(1.2, 1.0, 0.0, 3);
    let chi0 = s.initial_state(0.8).unwrap();
    let (p, rho) = conditional_bath_state(s.model(), &chi0, 1.3, 0, s.measurement()).unwrap();
    assert!((p - 1.0).abs() < 1e-12);
    assert!(max_abs_diff(rho.matrix(), &s.sample_thermal(0.8).unwrap()) < 1e-12);
    assert!(matches!(
        conditional_bath_state(s.model(), &chi0, 1.3, 2, s.measurement()),
        Err(Error::SuppressedOutcome { .. })
    ));
}

#[test]
fn mixture_identity_reconstructs_marginal() {
    let s = he_scheme(1.3, 1.0, 0.25, 6);
    let mut probe = vec![linalg::ZERO; 7];
    probe[0] = linalg::re(0.6_f64.sqrt());
    probe[1] = linalg::re(0.4_f64.sqrt());
    let rho0 = DensityMatrix::pure(HilbertSpace::new(vec![7]).unwrap(), &probe).unwrap();
    let s = ThermometryScheme::new(s.model().clone(), rho0, fock_measurement(6)).unwrap();
    let chi_t = s.propagator().evolve(&s.initial_state(1.5).unwrap(), 2.2).unwrap();
    let marginal = blocks::trace_system(chi_t.matrix(), 7, 7);
    let mut mix = linalg::zeros(7, 7);
    for l in 0..7 {
        if let Ok((p, rho)) = conditional_from_evolved(&chi_t, l, s.measurement()) {
            rho.validate().unwrap();
            mix = &mix + &linalg::scaled(rho.matrix(), linalg::re(p));
        }
    }
    assert!(trace_distance(&mix, &marginal) < 1e-10);
}

#[test]
fn heats_vanish_at_zero_time() {
    let rec = he_scheme(1.1, 1.0, 0.2, 8).heat_record(1.0, 0.0).unwrap();
    assert_eq!(rec.outcomes.len(), 1);
    let o = rec.outcomes[0];
    assert!(o.trajectory_heat.abs() < 1e-12 && o.correlation_heat.abs() < 1e-12);
    assert!(rec.average_heat.abs() < 1e-12 && rec.fisher_heat.abs() < 1e-20);
}

#[test]
fn correlation_heat_vanishes_without_coupling() {
    let s = deph_scheme(&[BathMode::new(1.0, 0.0).unwrap()], 6);
    let rec = s.heat_record(1.0, 2.0).unwrap();
    assert!(rec.outcomes.iter().all(|o| o.correlation_heat.abs() < 1e-12));
}

#[test]
fn trajectory_heat_is_quantised_at_full_swap() {
    let s = he_scheme(1.0, 1.0, 0.1, 30);
    let rec = s.heat_record(1.0, 5.0 * PI).unwrap();
    for o in rec.outcomes.iter().filter(|o| o.probability > 1e-10) {
        assert!((o.trajectory_heat - o.index as f64).abs() < 1e-8, "l={}", o.index);
    }
}

#[test]
fn heats_match_brute_force() {
    for (s, beta, t) in [
        (he_scheme(1.3, 1.0, 0.3, 6), 0.9, 1.7),
        (deph_scheme(&[BathMode::new(1.0, 0.3).unwrap(), BathMode::new(2.0, 0.2).unwrap()], 5), 1.2, 0.8),
    ] {
        let rec = s.heat_record(beta, t).unwrap();
        for (l, bf) in brute_force_heats(&s, beta, t).into_iter().enumerate() {
            let Some((p, tra, cor)) = bf else { continue };
            let o = rec.outcome(l).unwrap();
            assert!((o.probability - p).abs() < 1e-12);
            assert!((o.trajectory_heat - tra).abs() < 1e-9);
            assert!((o.correlation_heat - cor).abs() < 1e-9);
        }
    }
}

#[test]
fn score_routes_agree() {
    let s = he_scheme(1.2, 1.0, 0.3, 12);
    let (beta, t) = (1.1, 2.3);
    let rec = s.heat_record(beta, t).unwrap();
    let direct = s.scores_direct(beta, t).unwrap();
    let fd = s.evolved_ensemble(t).unwrap().scores_finite_difference(beta, default_fd_step(beta), PROB_FLOOR);
    for o in rec.outcomes.iter().filter(|o| o.probability > 1e-8) {
        assert!((direct[o.index].unwrap() - o.score).abs() < 1e-8);
        assert!((fd[o.index].unwrap() - o.score).abs() < 1e-6, "l={}", o.index);
    }
    assert!(s.score_direct(0.5, 0.0, 0).unwrap().abs() < 1e-12);
}

#[test]
fn score_direct_reports_suppressed_outcome() {
    let s = he_scheme(1.2, 1.0, 0.3, 4);
    let err = score_direct(s.model(), &fock_state(4, 0), 1.0, 0.0, s.measurement(), 3);
    assert!(matches!(err, Err(Error::SuppressedOutcome { .. })));
}

#[test]
fn fisher_routes_agree_with_closed_form_at_resonance() {
    let (beta, omega) = (1.0, 1.0);
    let s = he_scheme(omega, omega, 0.1, 30);
    let t = 2.5 * PI;
    let rec = s.heat_record(beta, t).unwrap();
    let fd = s.fisher_finite_difference(beta, t, default_fd_step(beta)).unwrap();
    let nb = bose(beta * omega);
    let n = nb * (0.1_f64 * t).sin().powi(2);
    let closed = omega * omega * (1.0 + nb).powi(2) * n / (1.0 + n);
    assert!((rec.fisher_heat - closed).abs() < 1e-8 * closed);
    assert!((fd - rec.fisher_heat).abs() < 1e-6);
}

#[test]
fn fisher_is_zero_at_zero_time_and_step_is_validated() {
    let s = he_scheme(1.0, 1.0, 0.1, 5);
    assert!(s.fisher_finite_difference(1.0, 0.0, 1e-4).unwrap().abs() < 1e-12);
    assert!(s.fisher_finite_difference(1.0, 1.0, 0.2).is_err());
    assert!(s.fisher_finite_difference(1.0, 1.0, 0.0).is_err());
}

#[test]
fn two_point_heat_matches_operator_form() {
    let s = he_scheme(1.4, 1.0, 0.35, 7);
    let chi0 = s.initial_state(0.8).unwrap();
    assert!(two_point_trajectory_heat(s.model(), &chi0, 0.0, 0, s.measurement()).unwrap().abs() < 1e-12);
    let rec = s.heat_record(0.8, 1.9).unwrap();
    let tp = s.two_point_trajectory_heats(&chi0, 1.9).unwrap();
    for o in rec.outcomes.iter().filter(|o| o.probability > 1e-9) {
        assert!((tp[o.index].unwrap() - o.trajectory_heat).abs() < 1e-8);
    }
}

#[test]
fn two_point_heat_rejects_coherent_sample() {
    let s = he_scheme(1.0, 1.0, 0.2, 2);
    let mut psi = vec![linalg::ZERO; 9];
    psi[0] = linalg::re(0.6);
    psi[1] = linalg::re(0.8);
    let chi0 = DensityMatrix::pure(s.model().space().clone(), &psi).unwrap();
    assert!(matches!(
        s.two_point_trajectory_heats(&chi0, 1.0),
        Err(Error::NonThermalSample { .. })
    ));
}

#[test]
fn two_point_heat_mean_is_average_heat_on_dephasing_mode() {
    let mode = BathMode::new(1.0, 0.2).unwrap();
    let s = deph_scheme(&[mode], 25);
    let (beta, t) = (1.0, 2.0);
    let chi0 = s.initial_state(beta).unwrap();
    let tp = s.two_point_trajectory_heats(&chi0, t).unwrap();
    let rec = s.heat_record(beta, t).unwrap();
    let mean: f64 = rec.outcomes.iter().map(|o| o.probability * tp[o.index].unwrap()).sum();
    // Q = −2 g²/ω (1 − cos ωt) for a single mode.
    let q = -2.0 * 0.04 * (1.0 - t.cos());
    assert!((mean - q).abs() < 1e-8, "{mean} vs {q}");
}

#[test]
fn precision_bound_examples() {
    assert_eq!(precision_bound(1.0, 1).unwrap(), 1.0);
    assert_eq!(precision_bound(4.0, 1).unwrap(), 0.5);
    assert!((precision_bound(3.0, 100).unwrap() - precision_bound(3.0, 1).unwrap() / 10.0).abs() < 1e-15);
    assert!(precision_bound(0.0, 1).unwrap().is_infinite());
    assert!(precision_bound(1.0, 0).is_err());
}

#[test]
fn tampering_breaks_identities() {
    let base = he_scheme(1.2, 1.0, 0.3, 10);
    let (beta, t) = (1.0, 2.0);
    let fd = base.fisher_finite_difference(beta, t, default_fd_step(beta)).unwrap();
    for tamper in [Tamper::FlipCorrelationSign, Tamper::DropInverseProbability] {
        let rec = base.clone().with_tamper(tamper).heat_record(beta, t).unwrap();
        assert!((rec.fisher_heat - fd).abs() > 1e-3, "{tamper:?}");
    }
}

fn arb_he() -> impl Strategy<Value = (f64, f64, f64, f64)> {
    (0.5..1.5f64, 0.05..0.5f64, 0.5..2.0f64, 0.0..10.0f64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn heat_record_invariants((omega_a, g, beta, t) in arb_he()) {
        let s = he_scheme(omega_a, 1.0, g, 10);
        let rec = s.heat_record(beta, t).unwrap();
        prop_assert!((rec.total_probability() + rec.excluded_probability - 1.0).abs() < 1e-10);
        prop_assert!((rec.mean_trajectory_heat() - rec.average_heat).abs() < 1e-8);
        prop_assert!(rec.mean_score().abs() < 1e-8);
        prop_assert!(rec.fisher_heat >= 0.0);
        let fd = s.fisher_finite_difference(beta, t, default_fd_step(beta)).unwrap();
        prop_assert!((fd - rec.fisher_heat).abs() < 1e-6 * (1.0 + rec.fisher_heat));
    }

    #[test]
    fn purity_is_conserved((omega_a, g, beta, t) in arb_he()) {
        let s = he_scheme(omega_a, 1.0, g, 5);
        let chi0 = s.initial_state(beta).unwrap();
        let chi_t = s.propagator().evolve(&chi0, t).unwrap();
        prop_assert!((chi0.purity() - chi_t.purity()).abs() < 1e-10);
        prop_assert!((chi_t.trace() - 1.0).abs() < 1e-10);
    }
}
