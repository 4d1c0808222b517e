// Copyright 2026 The gateforge Authors
// SPDX-License-Identifier: Apache-2.0

//! Evolution under `exp(iH(λ))`, per-state fidelity and its exact gradient.
//!
//! With `H = V diag(μ) V†`, the derivative of `exp(iH)` along `O` is
//! `V (L ∘ V†OV) V†` where `L_ab = (e^{iμ_a} - e^{iμ_b}) / (μ_a - μ_b)` and
//! `L_aa = i e^{iμ_a}`. Everything below reduces to that one identity.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::gates::GateTarget;
use crate::linalg::{self, HermitianEigen};
use crate::pauli::OperatorBasis;
use crate::{CMatrix, CVector, Error, RMatrix, Result, C64};

/// Eigenvalue gap below which the divided difference uses its limit.
pub const DEGENERATE_GAP: f64 = 1e-9;

/// `H(λ) = Σᵢ λᵢ Oᵢ`.
#[derive(Debug, Clone)]
pub struct HamiltonianModel {
    basis: OperatorBasis,
    lambda: Vec<f64>,
}

impl HamiltonianModel {
    pub fn new(basis: OperatorBasis, lambda: Vec<f64>) -> Result<Self> {
        if lambda.len() != basis.len() {
            return Err(Error::DimensionMismatch {
                expected: basis.len(),
                found: lambda.len(),
            });
        }
        if lambda.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("lambda"));
        }
        Ok(Self { basis, lambda })
    }

    pub fn basis(&self) -> &OperatorBasis {
        &self.basis
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn set_lambda(&mut self, lambda: Vec<f64>) -> Result<()> {
        *self = Self::new(self.basis.clone(), lambda)?;
        Ok(())
    }

    pub fn hamiltonian(&self) -> CMatrix {
        self.basis
            .combine(&self.lambda)
            .expect("length checked at construction")
    }

    pub fn propagator(&self) -> Propagator {
        Propagator::new(&self.hamiltonian())
    }
}

/// A unit-norm state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(CVector);

impl StateVector {
    /// Normalizes `amplitudes`; fails on the zero vector.
    pub fn new(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NonFinite("state norm"));
        }
        Ok(Self(amplitudes.unscale(norm)))
    }

    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, len: dim });
        }
        Ok(Self(linalg::basis_vector(dim, index)))
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

/// Haar-random state on `n` qubits: i.i.d. complex Gaussian amplitudes, normalized.
pub fn haar_state<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> StateVector {
    let d = 1usize << n_qubits;
    loop {
        let v = CVector::from_fn(d, |_, _| {
            C64::new(
                rng.sample::<f64, _>(StandardNormal),
                rng.sample::<f64, _>(StandardNormal),
            )
        });
        if let Ok(s) = StateVector::new(v) {
            return s;
        }
    }
}

/// `count` Haar-random states drawn from a stream seeded with `seed`.
pub fn seeded_states(n_qubits: usize, count: usize, seed: u64) -> Vec<StateVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| haar_state(n_qubits, &mut rng)).collect()
}

/// Cached eigendecomposition of `H` with everything needed to evolve states
/// and differentiate through `exp(iH)`.
#[derive(Debug, Clone)]
pub struct Propagator {
    eigen: HermitianEigen,
    phases: Vec<C64>,
    unitary: CMatrix,
    divided: CMatrix,
}

impl Propagator {
    pub fn new(h: &CMatrix) -> Self {
        let eigen = HermitianEigen::new(h);
        let phases: Vec<C64> = eigen.values.iter().map(|&m| C64::from_polar(1.0, m)).collect();
        let n = phases.len();
        let divided = CMatrix::from_fn(n, n, |a, b| {
            let gap = eigen.values[a] - eigen.values[b];
            if gap.abs() <= DEGENERATE_GAP {
                C64::new(0.0, 1.0) * phases[a]
            } else {
                (phases[a] - phases[b]) / gap
            }
        });
        let mut scaled = eigen.vectors.clone();
        for (c, p) in phases.iter().enumerate() {
            for r in 0..n {
                scaled[(r, c)] *= p;
            }
        }
        let unitary = scaled * eigen.vectors.adjoint();
        Self {
            eigen,
            phases,
            unitary,
            divided,
        }
    }

    /// `exp(iH)`.
    pub fn unitary(&self) -> &CMatrix {
        &self.unitary
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigen.values
    }

    /// `V e^{iμ} V† ψ`.
    pub fn apply(&self, psi: &CVector) -> CVector {
        let v = &self.eigen.vectors;
        let mut t = v.adjoint() * psi;
        for (x, p) in t.iter_mut().zip(&self.phases) {
            *x *= p;
        }
        v * t
    }

    /// `f = ⟨Gψ| exp(iH) |ψ⟩` together with the kernel `K` such that
    /// `∂f/∂λᵢ = Σ_kl (Oᵢ)_kl K_kl`.
    pub fn amplitude_and_kernel(&self, g: &CMatrix, psi: &CVector) -> (C64, CMatrix) {
        let v = &self.eigen.vectors;
        let phi_t = v.adjoint() * (g * psi);
        let psi_t = v.adjoint() * psi;
        let f: C64 = phi_t
            .iter()
            .zip(psi_t.iter())
            .zip(&self.phases)
            .map(|((a, b), p)| a.conj() * p * b)
            .sum();
        let n = psi_t.len();
        let w = CMatrix::from_fn(n, n, |a, b| phi_t[a].conj() * self.divided[(a, b)] * psi_t[b]);
        let kernel = v.conjugate() * w * v.transpose();
        (f, kernel)
    }

    /// `|⟨ψ|G† exp(iH)|ψ⟩|²`.
    pub fn fidelity(&self, g: &CMatrix, psi: &CVector) -> f64 {
        let out = self.apply(psi);
        let f = (g * psi).dotc(&out);
        f.norm_sqr().min(1.0)
    }

    /// Mean fidelity and mean gradient over a batch of states.
    pub fn batch_gradient(&self, mats: &[CMatrix], g: &CMatrix, states: &[StateVector]) -> (f64, Vec<f64>) {
        let d = g.nrows();
        let mut weighted = CMatrix::zeros(d, d);
        let mut fid = 0.0;
        for s in states {
            let (f, k) = self.amplitude_and_kernel(g, s.amplitudes());
            fid += f.norm_sqr();
            weighted += k * f.conj();
        }
        let n = states.len().max(1) as f64;
        let grad = mats.iter().map(|o| 2.0 * contract_re(o, &weighted) / n).collect();
        ((fid / n).min(1.0), grad)
    }
}

/// `Re Σ_kl A_kl B_kl`.
fn contract_re(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.re * y.re - x.im * y.im).sum()
}

fn check_dims(m: &HamiltonianModel, g: &GateTarget, psi: &StateVector) -> Result<()> {
    let d = m.basis().dim();
    if g.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: g.dim(),
        });
    }
    if psi.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: psi.dim(),
        });
    }
    Ok(())
}

/// `exp(iH(λ)) ψ`.
pub fn evolve(m: &HamiltonianModel, psi: &StateVector) -> Result<StateVector> {
    if psi.dim() != m.basis().dim() {
        return Err(Error::DimensionMismatch {
            expected: m.basis().dim(),
            found: psi.dim(),
        });
    }
    Ok(StateVector(m.propagator().apply(psi.amplitudes())))
}

/// `|⟨ψ|G† exp(iH(λ))|ψ⟩|²`.
pub fn fidelity(m: &HamiltonianModel, g: &GateTarget, psi: &StateVector) -> Result<f64> {
    check_dims(m, g, psi)?;
    Ok(m.propagator().fidelity(g.matrix(), psi.amplitudes()))
}

/// `∂F/∂λᵢ` for the per-state fidelity.
pub fn fidelity_gradient(m: &HamiltonianModel, g: &GateTarget, psi: &StateVector) -> Result<Vec<f64>> {
    check_dims(m, g, psi)?;
    let (_, grad) = m
        .propagator()
        .batch_gradient(m.basis().matrices(), g.matrix(), std::slice::from_ref(psi));
    Ok(grad)
}

/// `(d + |Tr(G†U)|²) / (d(d+1))`.
pub fn average_gate_fidelity_of(u: &CMatrix, g: &CMatrix) -> f64 {
    let d = u.nrows() as f64;
    let t = linalg::hs_inner(g, u).norm_sqr();
    ((d + t) / (d * (d + 1.0))).min(1.0)
}

pub fn average_gate_fidelity(m: &HamiltonianModel, g: &GateTarget) -> Result<f64> {
    if g.dim() != m.basis().dim() {
        return Err(Error::DimensionMismatch {
            expected: m.basis().dim(),
            found: g.dim(),
        });
    }
    Ok(average_gate_fidelity_of(m.propagator().unitary(), g.matrix()))
}

/// `A ↦ [[A_R, -A_I], [A_I, A_R]]`, i.e. `𝟙⊗A_R - iσ_y⊗A_I`.
pub fn real_embed_matrix(a: &CMatrix) -> RMatrix {
    let (r, c) = a.shape();
    RMatrix::from_fn(2 * r, 2 * c, |i, j| {
        let z = a[(i % r, j % c)];
        match (i < r, j < c) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// `ψ ↦ (ψ_R, ψ_I)`.
pub fn real_embed_vector(psi: &CVector) -> nalgebra::DVector<f64> {
    let n = psi.len();
    nalgebra::DVector::from_fn(2 * n, |i, _| if i < n { psi[i].re } else { psi[i - n].im })
}
