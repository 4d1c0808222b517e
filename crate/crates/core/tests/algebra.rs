// Copyright 2026 The gateforge Authors
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;

use gateforge::gates::{self, unitary_spectrum};
use gateforge::linalg::{self, expi_hermitian, max_abs};
use gateforge::pauli::{
    self, all_strings, standard_bases, to_pauli_sum, BasisFamily, OperatorBasis, Pauli, PauliString, PauliSum,
};
use gateforge::spectral::{
    commutant_coefficients, commutant_restrict, principal_generator, principal_generator_of, toffoli_family,
    verify_solution, NuAssignment,
};
use gateforge::{CMatrix, C64};
use proptest::prelude::*;

fn pauli_strategy() -> impl Strategy<Value = Pauli> {
    prop_oneof![Just(Pauli::I), Just(Pauli::X), Just(Pauli::Y), Just(Pauli::Z)]
}

fn string_strategy(n: usize) -> impl Strategy<Value = PauliString> {
    (prop::collection::vec(pauli_strategy(), n), -3.0..3.0f64).prop_map(|(f, c)| PauliString::new(f, c).unwrap())
}

fn hermitian_strategy(n: usize) -> impl Strategy<Value = CMatrix> {
    let d = 1usize << n;
    prop::collection::vec(-2.0..2.0f64, 2 * d * d).prop_map(move |v| {
        let a = CMatrix::from_fn(d, d, |r, c| C64::new(v[2 * (r * d + c)], v[2 * (r * d + c) + 1]));
        (&a + a.adjoint()).scale(0.5)
    })
}

fn unitary_strategy(n: usize) -> impl Strategy<Value = CMatrix> {
    hermitian_strategy(n).prop_map(|h| expi_hermitian(&h, 2.0))
}

#[test]
fn toffoli_reduction_counts() {
    let g = gates::toffoli();
    let full = standard_bases(3, BasisFamily::FullTwoLocal).unwrap();
    assert_eq!(full.len(), 37);
    let reduced = commutant_restrict(&full, &principal_generator(&g)).unwrap();
    assert_eq!(reduced.len(), 25);
}

#[test]
fn cnot_one_local_span() {
    let g = gates::cnot();
    let full = standard_bases(2, BasisFamily::OneLocal).unwrap();
    assert_eq!(full.len(), 7);
    let reduced = commutant_restrict(&full, &principal_generator(&g)).unwrap();
    assert_eq!(reduced.len(), 3);
    let target = OperatorBasis::new(
        2,
        ["II", "ZI", "IX"]
            .iter()
            .map(|l| PauliSum::from_string(PauliString::from_label(l, 1.0).unwrap()))
            .collect(),
    )
    .unwrap();
    for m in reduced.matrices() {
        let (_, residual) = target.project(m).unwrap();
        assert!(residual < 1e-10, "{residual}");
    }
}

#[test]
fn basis_sizes() {
    let counts = [
        (BasisFamily::FullTwoLocal, 37),
        (BasisFamily::DiagonalPairwise, 19),
        (BasisFamily::OneLocal, 10),
    ];
    for (family, n) in counts {
        assert_eq!(standard_bases(3, family).unwrap().len(), n, "{family}");
    }
}

#[test]
fn fredkin_principal_generator_is_swap_projector() {
    // Fredkin has eigenvalue -1 exactly on the antisymmetric part of the
    // controlled swap, so H_G = π |1⟩⟨1| ⊗ (1 - SWAP)/2.
    let h = principal_generator(&gates::fredkin());
    let mut swap = CMatrix::zeros(4, 4);
    for (a, b) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
        swap[(a, b)] = C64::new(1.0, 0.0);
    }
    let mut p1 = CMatrix::zeros(2, 2);
    p1[(1, 1)] = C64::new(1.0, 0.0);
    let expected = linalg::kron(&p1, &(CMatrix::identity(4, 4) - swap)).scale(PI / 2.0);
    assert!(max_abs(&(h - expected)) < 1e-12);
}

#[test]
fn family_rejects_bad_labels() {
    assert!(toffoli_family(NuAssignment([0, 0, 0, 0])).is_err());
    assert!(toffoli_family(NuAssignment([1, 0, 0, 1])).is_err());
    assert!(toffoli_family(NuAssignment([0, 0, 0, 1])).is_ok());
}

#[test]
fn zero_hamiltonian_fails_toffoli() {
    let r = verify_solution(&CMatrix::zeros(8, 8), &gates::toffoli(), 1e-8).unwrap();
    assert!(!r.passed());
    assert!(r.verdicts.commutes);
    assert!(!r.verdicts.eigenphases_on_lattice);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn string_commutator_matches_dense(a in string_strategy(3), b in string_strategy(3)) {
        let (ma, mb) = (a.dense(), b.dense());
        let dense = pauli::commutator(&ma, &mb).unwrap();
        let anti = a.factors().iter().zip(b.factors())
            .filter(|(x, y)| **x != Pauli::I && **y != Pauli::I && x != y)
            .count();
        if anti % 2 == 0 {
            prop_assert!(max_abs(&dense) < 1e-12);
        } else {
            let expected = (&ma * &mb).scale(2.0);
            prop_assert!(max_abs(&(dense - expected)) < 1e-10);
        }
    }

    #[test]
    fn decomposition_round_trip(h in hermitian_strategy(2)) {
        let sum = to_pauli_sum(&h).unwrap();
        prop_assert!(max_abs(&(sum.dense() - &h)) < 1e-12);
        let text = sum.to_strings();
        let parsed = PauliSum::parse_terms(&text).unwrap();
        prop_assert!(max_abs(&(parsed.dense() - &h)) < 1e-12);
    }

    #[test]
    fn strings_are_orthogonal(i in 0usize..64, j in 0usize..64) {
        let all = all_strings(3);
        let ip = linalg::hs_inner(&all[i].dense(), &all[j].dense());
        let expected = if i == j { 8.0 } else { 0.0 };
        prop_assert!((ip - C64::new(expected, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn commutant_is_monotone(mask in prop::collection::vec(any::<bool>(), 37), gate in 0usize..3) {
        let g = [gates::toffoli(), gates::fredkin(), gates::ccy()][gate].clone();
        let h_g = principal_generator(&g);
        let full = standard_bases(3, BasisFamily::FullTwoLocal).unwrap();
        let subset: Vec<CMatrix> = full.matrices().iter().zip(&mask)
            .filter(|(_, keep)| **keep)
            .map(|(m, _)| m.clone())
            .collect();
        prop_assume!(!subset.is_empty());
        let small = commutant_coefficients(&subset, &h_g).unwrap().nrows();
        let big = commutant_coefficients(full.matrices(), &h_g).unwrap().nrows();
        prop_assert!(small <= big);
        prop_assert!(small <= subset.len());
    }

    #[test]
    fn commutant_elements_commute(family in 0usize..6, gate in 0usize..3) {
        let g = [gates::toffoli(), gates::fredkin(), gates::ccy()][gate].clone();
        let h_g = principal_generator(&g);
        let full = standard_bases(3, BasisFamily::ALL[family]).unwrap();
        let reduced = commutant_restrict(&full, &h_g).unwrap();
        for m in reduced.matrices() {
            prop_assert!(max_abs(&linalg::commutator(m, &h_g).unwrap()) < 1e-10);
        }
    }

    #[test]
    fn principal_generator_is_idempotent(u in unitary_strategy(2)) {
        let h = principal_generator_of(&u);
        prop_assert!(linalg::hermitian_deviation(&h) < 1e-10);
        prop_assert!(max_abs(&(expi_hermitian(&h, 1.0) - &u)) < 1e-9);
        for e in linalg::eigvalsh(&h) {
            prop_assert!(e > -PI - 1e-9 && e <= PI + 1e-9);
        }
        let again = principal_generator_of(&expi_hermitian(&h, 1.0));
        prop_assert!(max_abs(&(again - &h)) < 1e-8);
    }

    #[test]
    fn spectral_projectors(u in unitary_strategy(2)) {
        let s = unitary_spectrum(&u);
        let d = u.nrows();
        let mut sum = CMatrix::zeros(d, d);
        for (k, p) in s.projectors.iter().enumerate() {
            prop_assert!(max_abs(&(p * p - p)) < 1e-9);
            prop_assert!(linalg::hermitian_deviation(p) < 1e-9);
            let trace = p.trace().re;
            prop_assert!((trace - s.multiplicities[k] as f64).abs() < 1e-9);
            for q in &s.projectors[k + 1..] {
                prop_assert!(max_abs(&(p * q)) < 1e-9);
            }
            sum += p;
        }
        prop_assert!(max_abs(&(sum - CMatrix::identity(d, d))) < 1e-9);
        prop_assert!(max_abs(&(s.reconstruct() - &u)) < 1e-9);
    }

    #[test]
    fn toffoli_family_is_two_local(nu in prop::array::uniform4(-3i64..=3)) {
        if let Ok(h) = toffoli_family(NuAssignment(nu)) {
            prop_assert!(h.terms().iter().all(|t| t.weight() <= 2));
            let r = verify_solution(&h.dense(), &gates::toffoli(), 1e-8).unwrap();
            prop_assert!(r.passed(), "{:?}: {:?}", nu, r.verdicts);
        }
    }
}
