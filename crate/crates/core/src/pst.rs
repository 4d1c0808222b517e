// Copyright 2026 The gateforge Authors
// SPDX-License-Identifier: Apache-2.0

//! Perfect state transfer on a nearest-neighbour chain, seen as designing a
//! Hamiltonian for the reflection `Ξ: |k⟩ ↦ |N-k+1⟩`.
//!
//! The chain lives in the `N`-dimensional single-excitation space. Transfer
//! is `exp(-itH_W) = e^{iφ} Ξ` for some global phase `φ`.

use serde::{Deserialize, Serialize};

use crate::linalg::{self, HermitianEigen};
use crate::spectral::{self, SpectralReport};
use crate::{CMatrix, Error, Result, C64};

/// Tolerance for `‖exp(-itH_W) - e^{iφ}Ξ‖_max`.
pub const PST_TOL: f64 = 1e-8;
/// Tolerance for `‖[H_W, Ξ]‖_max`.
pub const MIRROR_TOL: f64 = 1e-10;

/// `H_W = Σ_k J_k (|k⟩⟨k-1| + h.c.) + Σ_k B_k |k⟩⟨k|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkChain {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "J")]
    pub j: Vec<f64>,
    #[serde(rename = "B")]
    pub b: Vec<f64>,
}

impl WalkChain {
    pub fn new(j: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        let c = Self { n: b.len(), j, b };
        c.validate()?;
        Ok(c)
    }

    /// Zero fields and `J_k = √(k(N-k))`, which transfers perfectly at `t = π/2`.
    pub fn engineered(n: usize) -> Result<Self> {
        Self::new((1..n).map(|k| ((k * (n - k)) as f64).sqrt()).collect(), vec![0.0; n])
    }

    pub fn uniform(n: usize, coupling: f64) -> Result<Self> {
        Self::new(vec![coupling; n.saturating_sub(1)], vec![0.0; n])
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidConfig(format!(
                "chain length must be at least 2, got {}",
                self.n
            )));
        }
        if self.j.len() + 1 != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n - 1,
                found: self.j.len(),
            });
        }
        if self.b.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: self.b.len(),
            });
        }
        if self.j.iter().chain(&self.b).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("chain parameters"));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn hamiltonian(&self) -> CMatrix {
        let n = self.n;
        let mut h = CMatrix::zeros(n, n);
        for (k, &bk) in self.b.iter().enumerate() {
            h[(k, k)] = C64::new(bk, 0.0);
        }
        for (k, &jk) in self.j.iter().enumerate() {
            h[(k + 1, k)] = C64::new(jk, 0.0);
            h[(k, k + 1)] = C64::new(jk, 0.0);
        }
        h
    }
}

/// Anti-diagonal `N × N` reflection.
pub fn reflection_matrix(n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |r, c| {
        if r + c + 1 == n {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

pub fn mirror_deviation(c: &WalkChain) -> f64 {
    let h = c.hamiltonian();
    let xi = reflection_matrix(c.n);
    linalg::max_abs(&(&h * &xi - &xi * &h))
}

/// `[H_W, Ξ] = 0`, i.e. palindromic couplings and fields.
pub fn mirror_symmetric(c: &WalkChain) -> bool {
    mirror_deviation(c) <= MIRROR_TOL
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PstReport {
    pub time: f64,
    pub transfers: bool,
    /// Fitted `φ` in `exp(-itH_W) ≈ e^{iφ} Ξ`.
    pub phase: f64,
    pub unitary_error: f64,
    pub eigenvalues: Vec<f64>,
    /// `⟨v_k|Ξ|v_k⟩` of each eigenvector; `±1` for a simple spectrum.
    pub parities: Vec<f64>,
    /// `|e^{-iE_k t} - e^{iφ} parity_k|`.
    pub residuals: Vec<f64>,
}

/// Checks `exp(-itH_W) = e^{iφ} Ξ` within `1e-8`.
pub fn pst_check(c: &WalkChain, t: f64) -> Result<PstReport> {
    c.validate()?;
    let deviation = mirror_deviation(c);
    if deviation > MIRROR_TOL {
        return Err(Error::NotMirrorSymmetric { deviation });
    }
    let xi = reflection_matrix(c.n);
    let eig = HermitianEigen::new(&c.hamiltonian());
    let u = eig.apply_fn(|e| C64::from_polar(1.0, -t * e));
    let phase = linalg::hs_inner(&xi, &u).arg();
    let unitary_error = linalg::max_abs(&(&u - &xi * C64::from_polar(1.0, phase)));
    let parities: Vec<f64> = (0..c.n)
        .map(|k| {
            let v = eig.vectors.column(k);
            (v.adjoint() * &xi * v)[(0, 0)].re
        })
        .collect();
    let residuals = eig
        .values
        .iter()
        .zip(&parities)
        .map(|(&e, &p)| (C64::from_polar(1.0, -t * e) - C64::from_polar(p, phase)).norm())
        .collect();
    Ok(PstReport {
        time: t,
        transfers: unitary_error <= PST_TOL,
        phase,
        unitary_error,
        eigenvalues: eig.values,
        parities,
        residuals,
    })
}

/// The transfer problem in gate-design form: `H̃ = -tH_W` against the gate
/// `Ξ` with principal generator `H_Ξ = π(𝟙 - Ξ)/2`, up to a global phase.
/// The commutant fields describe which chain parameters survive the
/// commutation condition.
pub fn pst_as_gate_design(c: &WalkChain, t: f64) -> Result<SpectralReport> {
    c.validate()?;
    let n = c.n;
    let xi = reflection_matrix(n);
    let h_xi = spectral::principal_generator_of(&xi);
    let h_tilde = c.hamiltonian().scale(-t);
    let mut report = spectral::assess(&h_tilde, &xi, &h_xi, PST_TOL, true)?;

    let mut names = Vec::with_capacity(2 * n - 1);
    let mut mats = Vec::with_capacity(2 * n - 1);
    for k in 0..n {
        let mut m = CMatrix::zeros(n, n);
        m[(k, k)] = C64::new(1.0, 0.0);
        names.push(format!("B{}", k + 1));
        mats.push(m);
    }
    for k in 1..n {
        let mut m = CMatrix::zeros(n, n);
        m[(k, k - 1)] = C64::new(1.0, 0.0);
        m[(k - 1, k)] = C64::new(1.0, 0.0);
        names.push(format!("J{k}"));
        mats.push(m);
    }
    let rows = spectral::commutant_coefficients(&mats, &h_xi)?;
    report.commutant_dimension = Some(rows.nrows());
    report.reduced_basis = (0..rows.nrows())
        .map(|r| {
            names
                .iter()
                .enumerate()
                .filter(|(i, _)| rows[(r, *i)] != 0.0)
                .map(|(i, name)| format!("{} * {name}", rows[(r, i)]))
                .collect()
        })
        .collect();
    Ok(report)
}
