// Copyright 2026 The gateforge Authors
// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite. Every criterion prints one line:
//! `criterion N: PASS|FAIL <measurements>`.
//!
//! Run with `cargo test --release --test acceptance -- --nocapture --test-threads 1`
//! to see the lines in order.

use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Instant;

use gateforge::diffexp::{
    average_gate_fidelity_of, evolve, fidelity, fidelity_gradient, haar_state, real_embed_matrix, real_embed_vector,
    HamiltonianModel, Propagator, StateVector,
};
use gateforge::gates::{self, GateTarget};
use gateforge::linalg::{self, commutator, expi_hermitian, max_abs};
use gateforge::pauli::{all_strings, standard_bases, BasisFamily, OperatorBasis, PauliString, PauliSum};
use gateforge::pst::{pst_check, WalkChain};
use gateforge::spectral::{
    builtin_solution, commutant_restrict, integer_infeasibility_scan, principal_generator, toffoli_family, NuAssignment,
};
use gateforge::trainer::{multi_start, search_basis, sgd_step, Init, TrainConfig, TrainingRun};
use gateforge::{CMatrix, CVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(id: &str, pass: bool, detail: String) {
    println!("criterion {id}: {} {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {id} failed: {detail}");
}

#[test]
fn criterion_01_toffoli_closed_form() {
    let start = Instant::now();
    let g = gates::toffoli();
    let mut worst: f64 = 0.0;
    // ν = 1, -1, 2, 3 on the coupling label; the others stay at zero.
    for nu in [1, -1, 2, 3] {
        let h = toffoli_family(NuAssignment([0, 0, 0, nu])).unwrap();
        worst = worst.max(max_abs(&(expi_hermitian(&h.dense(), 1.0) - g.matrix())));
    }
    let secs = start.elapsed().as_secs_f64();
    report(
        "1",
        worst <= 1e-9 && secs < 1.0,
        format!("max |exp(iH) - Toffoli| = {worst:.2e}, {secs:.3} s"),
    );
}

#[test]
fn criterion_02_fredkin_closed_form() {
    let g = gates::fredkin();
    let (h, _) = builtin_solution("fredkin_two_local").unwrap();
    let h = h.dense();
    let err = max_abs(&(expi_hermitian(&h, 1.0) - g.matrix()));
    let eig = linalg::eigvalsh(&(&h - principal_generator(&g)));
    let expected = [-4.0, -2.0, 0.0, 0.0, 0.0, 2.0, 2.0, 4.0].map(|k| k * PI);
    let spec_err = eig.iter().zip(expected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let in_units: Vec<String> = eig.iter().map(|e| format!("{:.0}", e / PI)).collect();
    report(
        "2",
        err <= 1e-9 && spec_err <= 1e-8,
        format!(
            "max |exp(iH) - Fredkin| = {err:.2e}, spectrum/π = [{}], max dev {spec_err:.2e}",
            in_units.join(", ")
        ),
    );
}

#[test]
fn criterion_03_commutant_dimensions() {
    let toffoli_full = standard_bases(3, BasisFamily::FullTwoLocal).unwrap();
    let toffoli = commutant_restrict(&toffoli_full, &principal_generator(&gates::toffoli())).unwrap();
    let cnot_full = standard_bases(2, BasisFamily::OneLocal).unwrap();
    let cnot = commutant_restrict(&cnot_full, &principal_generator(&gates::cnot())).unwrap();
    let span = OperatorBasis::new(
        2,
        ["II", "ZI", "IX"]
            .iter()
            .map(|l| PauliSum::from_string(PauliString::from_label(l, 1.0).unwrap()))
            .collect(),
    )
    .unwrap();
    let in_span = cnot.matrices().iter().all(|m| span.project(m).unwrap().1 < 1e-10);
    let pass = toffoli_full.len() == 37 && toffoli.len() == 25 && cnot_full.len() == 7 && cnot.len() == 3 && in_span;
    report(
        "3",
        pass,
        format!(
            "Toffoli full two-local {} -> {}, CNOT one-local {} -> {}, span {{II, ZI, IX}}: {in_span}",
            toffoli_full.len(),
            toffoli.len(),
            cnot_full.len(),
            cnot.len()
        ),
    );
}

#[test]
fn criterion_04_cnot_infeasible() {
    let g = gates::cnot();
    let basis = search_basis(&g, BasisFamily::OneLocal, true).unwrap();
    let r = integer_infeasibility_scan(&basis, &g, 5).unwrap();
    let obstruction = r.obstruction.as_ref().map(ToString::to_string).unwrap_or_default();
    let pass = !r.feasible && obstruction == "ν1 - ν2 - ν3 + ν4 = -1/2";
    report(
        "4",
        pass,
        format!(
            "{:?} scan over {} assignments, feasible = {}, obstruction: {obstruction}",
            r.mode, r.assignments_scanned, r.feasible
        ),
    );
}

fn random_instance(rng: &mut ChaCha8Rng) -> (HamiltonianModel, GateTarget, StateVector) {
    let n = rng.random_range(1..=3usize);
    let d = 1usize << n;
    let all = all_strings(n);
    let k = rng.random_range(1..=6usize.min(all.len()));
    // At least one non-identity string, so the gradient is not identically zero.
    let mut picked: Vec<usize> = vec![rng.random_range(1..all.len())];
    while picked.len() < k {
        let i = rng.random_range(0..all.len());
        if !picked.contains(&i) {
            picked.push(i);
        }
    }
    let basis = OperatorBasis::new(
        n,
        picked.iter().map(|&i| PauliSum::from_string(all[i].clone())).collect(),
    )
    .unwrap();
    let lambda = (0..k).map(|_| rng.random_range(-2.0..2.0)).collect();
    let mut h = CMatrix::zeros(d, d);
    for s in &all {
        h += s.dense().scale(rng.random_range(-1.5..1.5));
    }
    let gate = GateTarget::new("random", expi_hermitian(&h, 1.0)).unwrap();
    let psi = haar_state(n, rng);
    (HamiltonianModel::new(basis, lambda).unwrap(), gate, psi)
}

#[test]
fn criterion_05_gradient_correctness() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let (m, g, psi) = random_instance(&mut rng);
        let analytic = fidelity_gradient(&m, &g, &psi).unwrap();
        let numeric: Vec<f64> = (0..analytic.len())
            .map(|i| {
                let at = |delta: f64| {
                    let mut l = m.lambda().to_vec();
                    l[i] += delta;
                    fidelity(&HamiltonianModel::new(m.basis().clone(), l).unwrap(), &g, &psi).unwrap()
                };
                (at(h) - at(-h)) / (2.0 * h)
            })
            .collect();
        let diff = analytic
            .iter()
            .zip(&numeric)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let scale = analytic.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        worst = worst.max(diff / scale.max(f64::MIN_POSITIVE));
    }
    let secs = start.elapsed().as_secs_f64();
    report(
        "5",
        worst <= 1e-6 && secs < 10.0,
        format!("max relative error {worst:.2e} over 100 instances, {secs:.2} s"),
    );
}

fn train_restarts(
    gate: GateTarget,
    family: BasisFamily,
    reduce: bool,
    init: Init,
    epochs: usize,
    target: f64,
    restarts: usize,
) -> (usize, Vec<TrainingRun>) {
    let mut cfg = TrainConfig::new(gate, family);
    cfg.reduce_by_commutant = reduce;
    cfg.init = init;
    cfg.max_epochs = epochs;
    cfg.target_fidelity = target;
    let runs = multi_start(&cfg, restarts).unwrap();
    let params = runs[0].basis.len();
    (params, runs)
}

fn summarize(runs: &[TrainingRun], target: f64) -> (usize, f64) {
    let hits = runs.iter().filter(|r| r.best_fidelity >= target).count();
    let best = runs.iter().map(|r| r.best_fidelity).fold(0.0, f64::max);
    (hits, best)
}

#[test]
fn criterion_06_toffoli_training() {
    let start = Instant::now();
    let target = 1.0 - 1e-6;
    let (params, runs) = train_restarts(
        gates::toffoli(),
        BasisFamily::DiagonalPairwise,
        true,
        Init::Constant(2.0),
        2000,
        target,
        8,
    );
    let (hits, best) = summarize(&runs, target);
    let secs = start.elapsed().as_secs_f64();
    report(
        "6",
        hits >= 1 && secs < 300.0,
        format!(
            "{hits}/8 restarts reach 1 - 1e-6 ({params} parameters), best 1 - F = {:.2e}, {secs:.1} s",
            1.0 - best
        ),
    );
}

#[test]
fn criterion_07a_fredkin_training() {
    let target = 1.0 - 1e-5;
    let (params, runs) = train_restarts(
        gates::fredkin(),
        BasisFamily::DiagonalPairwise,
        true,
        Init::Constant(2.0),
        4000,
        target,
        8,
    );
    let (hits, best) = summarize(&runs, target);
    report(
        "7a",
        hits >= 1,
        format!(
            "Fredkin: {hits}/8 restarts reach 1 - 1e-5 ({params} parameters), best 1 - F = {:.2e}",
            1.0 - best
        ),
    );
}

#[test]
fn criterion_07b_double_fredkin_training() {
    let target = 1.0 - 1e-5;
    let (params, runs) = train_restarts(
        gates::double_fredkin(),
        BasisFamily::DiagonalPairwise,
        true,
        Init::Constant(4.0),
        4000,
        target,
        8,
    );
    let (hits, best) = summarize(&runs, target);
    report(
        "7b",
        hits >= 1 && params == 18,
        format!(
            "double Fredkin: {hits}/8 restarts reach 1 - 1e-5, {params} parameters (expected 18), best 1 - F = {:.2e}",
            1.0 - best
        ),
    );
}

#[test]
fn criterion_08_restricted_ceilings() {
    let cases = [
        (
            "Toffoli xx_yy_coupled",
            gates::toffoli(),
            BasisFamily::XxYyCoupled,
            3.0,
            0.90,
        ),
        ("Toffoli xx_and_yy", gates::toffoli(), BasisFamily::XxAndYy, 5.0, 0.95),
        ("Fredkin xx_and_yy", gates::fredkin(), BasisFamily::XxAndYy, 3.0, 0.99),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, gate, family, c, floor) in cases {
        let (params, runs) = train_restarts(gate, family, false, Init::Constant(c), 2000, 1.0 - 1e-6, 10);
        let (_, best) = summarize(&runs, 1.0);
        pass &= best >= floor;
        parts.push(format!(
            "{name} best of 10 = {best:.4} (>= {floor}, {params} parameters)"
        ));
    }
    report("8", pass, parts.join("; "));
}

#[test]
fn criterion_09_perfect_state_transfer() {
    let mut worst: f64 = 0.0;
    let mut engineered = true;
    for n in 2..=6 {
        let r = pst_check(&WalkChain::engineered(n).unwrap(), FRAC_PI_2).unwrap();
        engineered &= r.transfers;
        worst = worst.max(r.unitary_error);
    }
    let uniform = WalkChain::uniform(4, 1.0).unwrap();
    let grid = 10_000;
    let mut closest = f64::INFINITY;
    let mut uniform_fails = true;
    for k in 1..=grid {
        let r = pst_check(&uniform, 20.0 * k as f64 / grid as f64).unwrap();
        uniform_fails &= !r.transfers;
        closest = closest.min(r.unitary_error);
    }
    report(
        "9",
        engineered && uniform_fails,
        format!("engineered N = 2..6 max error {worst:.2e}; uniform N = 4 never transfers on (0, 20] (closest {closest:.3e})"),
    );
}

#[test]
fn criterion_10_property_suites() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut checks = Vec::new();

    let mut unitary = 0.0f64;
    let mut bounds = true;
    let mut embed = 0.0f64;
    for _ in 0..200 {
        let (m, g, psi) = random_instance(&mut rng);
        let out = evolve(&m, &psi).unwrap();
        unitary = unitary.max((out.amplitudes().norm() - 1.0).abs());
        let f = fidelity(&m, &g, &psi).unwrap();
        bounds &= (0.0..=1.0 + 1e-12).contains(&f);
        let a = g.matrix();
        let b = m.hamiltonian();
        let (ra, rb) = (real_embed_matrix(a), real_embed_matrix(&b));
        embed = embed.max((real_embed_matrix(&(a * &b)) - &ra * &rb).abs().max());
        let v: CVector = psi.amplitudes().clone();
        embed = embed.max((&ra * real_embed_vector(&v) - real_embed_vector(&(a * &v))).abs().max());
    }
    checks.push((unitary < 1e-12, format!("evolve norm drift {unitary:.1e}")));
    checks.push((bounds, "fidelity in [0, 1]".to_string()));
    checks.push((embed < 1e-12, format!("real embedding defect {embed:.1e}")));

    // Closure: every reduced update stays in the commutant of H_G.
    let mut closure = 0.0f64;
    for gate in [gates::toffoli(), gates::fredkin(), gates::double_fredkin()] {
        let h_g = principal_generator(&gate);
        let basis = search_basis(&gate, BasisFamily::DiagonalPairwise, true).unwrap();
        let mut lambda: Vec<f64> = (0..basis.len()).map(|_| rng.random_range(-3.0..3.0)).collect();
        let mut v = vec![0.0; basis.len()];
        for _ in 0..20 {
            let batch: Vec<StateVector> = (0..2).map(|_| haar_state(gate.n_qubits(), &mut rng)).collect();
            let out = sgd_step(&basis, gate.matrix(), &lambda, &v, &batch, 1.0, 0.5).unwrap();
            lambda = out.lambda;
            v = out.velocity;
            let h = basis.combine(&lambda).unwrap();
            closure = closure.max(max_abs(&commutator(&h, &h_g).unwrap()) / max_abs(&h).max(1.0));
        }
    }
    checks.push((closure < 1e-10, format!("commutant closure defect {closure:.1e}")));

    // Haar moment: sample mean of |⟨ψ|G†U|ψ⟩|² against the closed form.
    let g = gates::toffoli();
    let u = expi_hermitian(&(g.matrix() + gates::fredkin().matrix()).scale(0.6), 1.0);
    let prop = Propagator::new(&gateforge::spectral::principal_generator_of(&u));
    let samples = 100_000;
    let values: Vec<f64> = (0..samples)
        .map(|_| prop.fidelity(g.matrix(), haar_state(3, &mut rng).amplitudes()))
        .collect();
    let mean = values.iter().sum::<f64>() / samples as f64;
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (samples - 1) as f64;
    let se = (var / samples as f64).sqrt();
    let exact = average_gate_fidelity_of(prop.unitary(), g.matrix());
    let z = (mean - exact).abs() / se;
    checks.push((
        z <= 3.0,
        format!("Haar mean {mean:.5} vs closed form {exact:.5} ({z:.2} SE)"),
    ));

    let pass = checks.iter().all(|c| c.0);
    let detail: Vec<String> = checks.into_iter().map(|c| c.1).collect();
    report("10", pass, detail.join("; "));
}
