use super::*;
use crate::tensor::linalg::{max_abs, max_abs_diff};
use crate::tensor::HermitianOperator;

fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    &(a * b) - &(b * a)
}

#[test]
fn coupled_oscillators_zero_coupling_has_no_interaction() {
    let m = build_coupled_oscillators(1.2, 1.0, 0.0, 4).unwrap();
    assert_eq!(max_abs(m.h_i().matrix()), 0.0);
    assert_eq!(m.space().factor_dims(), &[5, 5]);
}

#[test]
fn coupled_oscillators_conserve_total_excitations() {
    let n_max = 20;
    let m = build_coupled_oscillators(1.2, 1.0, 0.1, n_max).unwrap();
    let n = number_operator(n_max);
    let id = linalg::identity(n_max + 1);
    let total = &linalg::kron(&n, &id) + &linalg::kron(&id, &n);
    let h = m.total_hamiltonian();
    assert!(max_abs(&commutator(h.matrix(), &total)) < 1e-10);
}

#[test]
fn single_excitation_block() {
    let m = build_coupled_oscillators(1.2, 1.0, 0.1, 3).unwrap();
    let h = m.total_hamiltonian();
    // |1_a 0_b⟩ = index 1·4 + 0, |0_a 1_b⟩ = index 1
    let (ia, ib) = (4usize, 1usize);
    let block = [
        [h.matrix().read(ia, ia).re, h.matrix().read(ia, ib).re],
        [h.matrix().read(ib, ia).re, h.matrix().read(ib, ib).re],
    ];
    assert!((block[0][0] - 1.2).abs() < 1e-15);
    assert!((block[1][1] - 1.0).abs() < 1e-15);
    assert!((block[0][1] - 0.1).abs() < 1e-15);
    assert!((block[1][0] - 0.1).abs() < 1e-15);
}

#[test]
fn coupled_oscillators_reject_trivial_cutoff() {
    assert!(build_coupled_oscillators(1.0, 1.0, 0.1, 0).is_err());
}

#[test]
fn dephasing_model_commutes_with_sigma_z() {
    let modes = [BathMode::new(1.0, 0.1).unwrap(), BathMode::new(1.7, 0.05).unwrap()];
    let m = build_dephasing_model(&modes, 3).unwrap();
    assert_eq!(m.space().total_dim(), 32);
    assert_eq!(max_abs(m.h_s().matrix()), 0.0);
    let sz = embed_operator(&pauli_z(), m.space(), 0).unwrap();
    let h = m.total_hamiltonian();
    assert!(max_abs(&commutator(h.matrix(), &sz)) < 1e-10);
    assert!(max_abs(&commutator(m.h_i().matrix(), &sz)) < 1e-10);
}

#[test]
fn dephasing_zero_coupling_is_bare_bath() {
    let m = build_dephasing_model(&[BathMode::new(1.0, 0.0).unwrap()], 5).unwrap();
    let h = m.total_hamiltonian();
    assert_eq!(max_abs_diff(h.matrix(), m.h_b().matrix()), 0.0);
}

#[test]
fn dephasing_rejects_empty_bath() {
    assert!(build_dephasing_model(&[], 3).is_err());
}

#[test]
fn spin_boson_coupling_does_not_commute_with_system() {
    let m = build_spin_boson(1.0, &[BathMode::new(0.8, 0.15).unwrap()], &[4]).unwrap();
    assert!(max_abs(&commutator(m.h_s().matrix(), m.h_i().matrix())) > 1e-3);
}

#[test]
fn fock_measurement_is_complete_and_orthogonal() {
    let meas = fock_measurement(6);
    let (orth, compl) = meas.defects();
    assert!(orth < 1e-15 && compl < 1e-15);
    assert!((0..meas.len()).all(|l| meas.rank(l) == 1));
    assert_eq!(meas.labels()[3], 3.0);
}

#[test]
fn pauli_x_measurement_is_complete_and_orthogonal() {
    let meas = pauli_x_measurement();
    let (orth, compl) = meas.defects();
    assert!(orth < 1e-15 && compl < 1e-15);
    assert_eq!(meas.labels(), &[1.0, -1.0]);
    assert_eq!(meas.rank(0), 1);
}

#[test]
fn eigenbasis_groups_degenerate_levels() {
    let op = HermitianOperator::new(
        HilbertSpace::new(vec![3]).unwrap(),
        linalg::real_diagonal(&[1.0, 1.0, 2.0]),
    )
    .unwrap();
    let meas = eigenbasis_measurement(&op, 1e-8).unwrap();
    assert_eq!(meas.len(), 2);
    assert_eq!(meas.rank(0), 2);
    assert_eq!(meas.rank(1), 1);
    assert_eq!(meas.labels(), &[1.0, 2.0]);
}

#[test]
fn eigenbasis_nondegenerate_qubit() {
    let op = HermitianOperator::new(HilbertSpace::new(vec![2]).unwrap(), pauli_x()).unwrap();
    let meas = eigenbasis_measurement(&op, 1e-8).unwrap();
    assert_eq!(meas.len(), 2);
    assert!((meas.label(0) + 1.0).abs() < 1e-14 && (meas.label(1) - 1.0).abs() < 1e-14);
}

#[test]
fn eigenbasis_completeness_on_random_hermitian() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let n = 5;
    let a = CMatrix::from_fn(n, n, |_, _| faer::complex_native::c64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let h = linalg::hermitian_part(&a);
    let op = HermitianOperator::new(HilbertSpace::new(vec![n]).unwrap(), h).unwrap();
    let meas = eigenbasis_measurement(&op, 1e-8).unwrap();
    let (orth, compl) = meas.defects();
    assert!(orth < 1e-10 && compl < 1e-10);
}

#[test]
fn measurement_constructor_rejects_incomplete_sets() {
    let p = linalg::real_diagonal(&[1.0, 0.0]);
    assert!(ProjectiveMeasurement::new(vec![p], vec![0.0]).is_err());
}

#[test]
fn thermal_cutoffs_follow_truncation_level() {
    let modes = [BathMode::new(1.0, 0.1).unwrap(), BathMode::new(20.0, 0.1).unwrap()];
    let c = thermal_cutoffs(&modes, 1.0, 1e-10, 1).unwrap();
    assert_eq!(c, vec![23, 1]);
}
