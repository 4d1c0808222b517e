// Copyright 2026 The gateforge Authors
// SPDX-License-Identifier: Apache-2.0

//! The spectral route to gate design.
//!
//! A Hermitian `H̃` satisfies `exp(iH̃) = G` when it commutes with the principal
//! generator `H_G` and every eigenvalue of `H̃ - H_G` is a multiple of `2π`.

use std::f64::consts::PI;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::gates::GateTarget;
use crate::linalg::{self, cluster_sorted, null_space, realify, rref, HermitianEigen};
use crate::pauli::{to_pauli_sum, OperatorBasis, PauliString, PauliSum};
use crate::{CMatrix, Error, RMatrix, Result, C64};

/// Default tolerance for the distance of eigenvalues to `2πℤ`.
pub const DEFAULT_LATTICE_TOL: f64 = 1e-8;
/// Relative singular-value cut defining the commutant.
pub const NULL_SPACE_TOL: f64 = 1e-10;
/// Commutator bound, relative to `max(1, ‖H̃‖_max)`.
pub const COMMUTATOR_TOL: f64 = 1e-10;
/// Largest box the exact integer scan will enumerate.
pub const MAX_SCAN_ASSIGNMENTS: u128 = 50_000_000;

const TWO_PI: f64 = 2.0 * PI;

/// `H_G = Σ_k θ_k I_k` with `θ_k ∈ (-π, π]`.
pub fn principal_generator(g: &GateTarget) -> CMatrix {
    principal_log(g.spectrum())
}

fn principal_log(s: &crate::gates::Spectrum) -> CMatrix {
    let h = s.apply_fn(|t| C64::new(t, 0.0));
    (&h + h.adjoint()).scale(0.5)
}

/// Principal generator of an arbitrary unitary matrix.
pub fn principal_generator_of(u: &CMatrix) -> CMatrix {
    principal_log(&crate::gates::unitary_spectrum(u))
}

/// Rows are coefficient vectors `λ` (in reduced row-echelon form) spanning
/// `{λ : [Σ λᵢ Oᵢ, H_G] = 0}`.
pub fn commutant_coefficients(matrices: &[CMatrix], h_g: &CMatrix) -> Result<RMatrix> {
    if matrices.is_empty() {
        return Err(Error::EmptyBasis);
    }
    let d = linalg::ensure_square(h_g)?;
    let cols = matrices
        .iter()
        .map(|o| {
            if o.nrows() != d || o.ncols() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: o.nrows(),
                });
            }
            Ok(realify(&(o * h_g - h_g * o)))
        })
        .collect::<Result<Vec<_>>>()?;
    let a = RMatrix::from_fn(2 * d * d, matrices.len(), |r, c| cols[c][r]);
    let null = null_space(&a, NULL_SPACE_TOL);
    Ok(rref(&null.transpose()))
}

/// Basis of the part of `span(basis)` commuting with `h_g`.
///
/// Each element is a row of the reduced row-echelon form of the null space,
/// in the coordinates of `basis`: unit pivots, independent of the SVD's
/// choice of null vectors, and built from as few parent elements as
/// possible. Call [`OperatorBasis::orthonormalized`] for an orthonormal basis
/// of the same span.
pub fn commutant_restrict(basis: &OperatorBasis, h_g: &CMatrix) -> Result<OperatorBasis> {
    if basis.is_empty() {
        return Err(Error::EmptyBasis);
    }
    if h_g.nrows() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            found: h_g.nrows(),
        });
    }
    let rows = commutant_coefficients(basis.matrices(), h_g)?;
    let elements = (0..rows.nrows())
        .map(|r| {
            let terms = basis
                .elements()
                .iter()
                .enumerate()
                .filter(|(i, _)| rows[(r, *i)] != 0.0)
                .flat_map(|(i, e)| e.scaled(rows[(r, i)]).terms().to_vec())
                .collect();
            Ok(PauliSum::new(basis.n_qubits(), terms)?.simplified(1e-12))
        })
        .collect::<Result<Vec<_>>>()?;
    OperatorBasis::new(basis.n_qubits(), elements)
}

/// Nearest lattice index `n` and the distance `|x - 2πn|`.
pub fn lattice_residual(x: f64) -> (i64, f64) {
    let n = (x / TWO_PI).round();
    (n as i64, (x - TWO_PI * n).abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdicts {
    /// `[H̃, H_G] = 0`.
    pub commutes: bool,
    /// Every eigenvalue of `H̃ - H_G` lies on `2πℤ`.
    pub eigenphases_on_lattice: bool,
    /// `exp(iH̃)` equals the gate entrywise.
    pub reproduces_gate: bool,
}

impl Verdicts {
    pub fn all(&self) -> bool {
        self.commutes && self.eigenphases_on_lattice && self.reproduces_gate
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralReport {
    /// `H_G` as Pauli terms, or as matrix entries when the dimension is not a power of two.
    pub principal_generator: Vec<String>,
    /// Dimension of the commutant of the ansatz spanned by the terms of `H̃`.
    pub commutant_dimension: Option<usize>,
    pub reduced_basis: Vec<Vec<String>>,
    /// Largest number of non-identity factors among the terms of `H̃`.
    pub max_interaction_weight: Option<usize>,
    /// Eigenvalues of `H̃ - H_G` (shifted by `-global_phase`), ascending.
    pub eigenvalues: Vec<f64>,
    pub lattice_indices: Vec<i64>,
    pub residuals: Vec<f64>,
    pub commutator_norm: f64,
    pub unitary_error: f64,
    /// Zero unless a global phase is allowed.
    pub global_phase: f64,
    pub tolerance: f64,
    pub verdicts: Verdicts,
}

impl SpectralReport {
    pub fn passed(&self) -> bool {
        self.verdicts.all()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().cloned().fold(0.0, f64::max)
    }
}

fn describe_operator(h: &CMatrix) -> Vec<String> {
    let d = h.nrows();
    if d.is_power_of_two() {
        if let Ok(sum) = to_pauli_sum(h) {
            return sum.to_strings();
        }
    }
    let mut out = Vec::new();
    for r in 0..d {
        for c in 0..d {
            let z = h[(r, c)];
            if z.norm() > 1e-13 {
                out.push(format!("[{},{}] = {}{:+}j", r + 1, c + 1, z.re, z.im));
            }
        }
    }
    out
}

/// Checks the conditions for `exp(iH̃) = e^{iφ} U`; `φ = 0` unless
/// `allow_global_phase` is set, in which case it is fitted.
pub fn assess(
    h_tilde: &CMatrix,
    u: &CMatrix,
    h_g: &CMatrix,
    tol: f64,
    allow_global_phase: bool,
) -> Result<SpectralReport> {
    let d = linalg::ensure_square(u)?;
    linalg::ensure_hermitian(h_tilde, 1e-10)?;
    if h_tilde.nrows() != d || h_g.nrows() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: h_tilde.nrows(),
        });
    }
    if !tol.is_finite() || tol <= 0.0 {
        return Err(Error::InvalidConfig(format!("tolerance must be positive, got {tol}")));
    }
    let scale = linalg::max_abs(h_tilde).max(1.0);
    let commutator_norm = linalg::max_abs(&linalg::commutator(h_tilde, h_g)?);

    let mut eigenvalues = linalg::eigvalsh(&(h_tilde - h_g));
    let global_phase = if allow_global_phase {
        let mean: C64 = eigenvalues.iter().map(|&e| C64::from_polar(1.0, e)).sum();
        if mean.norm() > 1e-12 {
            mean.arg()
        } else {
            0.0
        }
    } else {
        0.0
    };
    eigenvalues.iter_mut().for_each(|e| *e -= global_phase);
    let (lattice_indices, residuals): (Vec<i64>, Vec<f64>) = eigenvalues.iter().map(|&e| lattice_residual(e)).unzip();

    let evolved = linalg::expi_hermitian(h_tilde, 1.0);
    let unitary_error = linalg::max_abs(&(evolved - u * C64::from_polar(1.0, global_phase)));

    let verdicts = Verdicts {
        commutes: commutator_norm <= COMMUTATOR_TOL * scale,
        eigenphases_on_lattice: residuals.iter().all(|&r| r <= tol),
        reproduces_gate: unitary_error <= tol.max(1e-9),
    };
    Ok(SpectralReport {
        principal_generator: describe_operator(h_g),
        commutant_dimension: None,
        reduced_basis: Vec::new(),
        max_interaction_weight: None,
        eigenvalues,
        lattice_indices,
        residuals,
        commutator_norm,
        unitary_error,
        global_phase,
        tolerance: tol,
        verdicts,
    })
}

/// Checks `exp(iH̃) = G` exactly (no global phase) through the two spectral
/// conditions, and reports the commutant of the ansatz spanned by the Pauli
/// strings present in `H̃`.
pub fn verify_solution(h_tilde: &CMatrix, g: &GateTarget, tol: f64) -> Result<SpectralReport> {
    if h_tilde.nrows() != g.dim() || h_tilde.ncols() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: g.dim(),
            found: h_tilde.nrows(),
        });
    }
    let h_g = principal_generator(g);
    let mut report = assess(h_tilde, g.matrix(), &h_g, tol, false)?;

    let terms = to_pauli_sum(h_tilde)?;
    let n = g.n_qubits();
    let mut strings: Vec<PauliString> = terms.terms().iter().map(|t| t.with_coefficient(1.0)).collect();
    if !strings.iter().any(|s| s.weight() == 0) {
        strings.insert(0, PauliString::identity(n));
    }
    let ansatz = OperatorBasis::new(n, strings.into_iter().map(PauliSum::from_string).collect())?;
    let reduced = commutant_restrict(&ansatz, &h_g)?;
    report.commutant_dimension = Some(reduced.len());
    report.reduced_basis = reduced.elements().iter().map(PauliSum::to_strings).collect();
    report.max_interaction_weight = terms.terms().iter().map(PauliString::weight).max();
    Ok(report)
}

/// Integer labels `(ν₁, ν₂, ν₃, ν₄)` of the two-local Toffoli solution family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NuAssignment(pub [i64; 4]);

impl NuAssignment {
    /// `c = -[(1 + 4(ν₁-ν₂))² - (4(ν₃-ν₄))²]`.
    pub fn c(&self) -> i64 {
        let [n1, n2, n3, n4] = self.0;
        let a = 1 + 4 * (n1 - n2);
        let b = 4 * (n3 - n4);
        b * b - a * a
    }
}

fn pauli_terms(n: usize, terms: &[(f64, &str)]) -> PauliSum {
    let strings = terms
        .iter()
        .map(|&(c, l)| PauliString::from_label(l, c).expect("static labels"))
        .collect();
    PauliSum::new(n, strings).expect("static terms").simplified(0.0)
}

/// Two-local Hamiltonian generating the Toffoli gate for each valid `ν`.
pub fn toffoli_family(nu: NuAssignment) -> Result<PauliSum> {
    let [n1, n2, n3, n4] = nu.0;
    if n3 == n4 {
        return Err(Error::InvalidAssignment {
            nu: nu.0,
            reason: "c(ν) ≥ 0 cannot be satisfied unless ν₃ ≠ ν₄".into(),
        });
    }
    let c = nu.c();
    if c < 0 {
        return Err(Error::InvalidAssignment {
            nu: nu.0,
            reason: format!("c(ν) = {c} < 0"),
        });
    }
    let (n1, n2, n3) = (n1 as f64, n2 as f64, n3 as f64);
    let s = (nu.0[2] - nu.0[3]).abs() as f64;
    let k = PI / 8.0;
    let rc = (c as f64).sqrt();
    Ok(pauli_terms(
        3,
        &[
            (k * (1.0 + 4.0 * (n1 + n2 + 2.0 * n3 + s)), "III"),
            (-k, "ZII"),
            (-k, "IZI"),
            (k * (-2.0 - 8.0 * n1 + 8.0 * n2), "IIX"),
            (k * (1.0 + 4.0 * n1 + 4.0 * n2 - 8.0 * n3 - 4.0 * s), "ZZI"),
            (k, "ZIX"),
            (k, "IZX"),
            (-k * rc, "ZIZ"),
            (k * rc, "IZZ"),
        ],
    ))
}

/// Names accepted by [`builtin_solution`].
pub const BUILTIN_SOLUTIONS: [&str; 3] = ["fredkin_two_local", "toffoli_alt", "toffoli_zplus"];

/// Closed-form solutions by name, with the gate each one generates.
pub fn builtin_solution(name: &str) -> Result<(PauliSum, &'static str)> {
    let k = PI / 8.0;
    match name.trim().to_ascii_lowercase().as_str() {
        "fredkin_two_local" => {
            let a = k * (143.0_f64 / 5.0).sqrt();
            let b = k * 5.0 * 3.0_f64.sqrt();
            let z = 0.75 * PI * (7.0_f64 / 5.0).sqrt();
            Ok((
                pauli_terms(
                    3,
                    &[
                        (3.0 * k, "III"),
                        (4.0 * k, "ZII"),
                        (a, "IXI"),
                        (a, "IIX"),
                        (b, "XXI"),
                        (b, "XIX"),
                        (z, "ZZI"),
                        (z, "ZIZ"),
                        (-3.0 * k, "IXX"),
                        (-3.0 * k, "IYY"),
                        (-3.0 * k, "IZZ"),
                    ],
                ),
                "fredkin",
            ))
        }
        "toffoli_alt" => {
            let r7 = k * 7.0_f64.sqrt();
            Ok((
                pauli_terms(
                    3,
                    &[
                        (9.0 * k, "III"),
                        (6.0 * k, "IIX"),
                        (-k, "ZII"),
                        (-k, "IZI"),
                        (k, "ZZI"),
                        (k, "ZIX"),
                        (k, "IZX"),
                        (-r7, "ZIZ"),
                        (r7, "IZZ"),
                    ],
                ),
                "toffoli",
            ))
        }
        "toffoli_zplus" => {
            let r15 = k * 15.0_f64.sqrt();
            Ok((
                pauli_terms(
                    3,
                    &[
                        (9.0 * k, "III"),
                        (-7.0 * k, "IIX"),
                        (r15, "IIZ"),
                        (k, "ZZI"),
                        (-k, "ZII"),
                        (-k, "IZI"),
                        (2.5 * k, "ZIX"),
                        (2.5 * k, "IZX"),
                        (0.5 * r15, "ZIZ"),
                        (0.5 * r15, "IZZ"),
                    ],
                ),
                "toffoli",
            ))
        }
        _ => Err(Error::UnknownSolution(name.to_string())),
    }
}

/// How an integer scan reached its verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanMode {
    /// Basis and `H_G` commute pairwise: the eigenvalue map is linear and the
    /// scan is a complete certificate over the box.
    Exact,
    /// Non-commuting basis: a numerical search for a witness per target
    /// spectrum. An infeasible verdict only means no witness was found.
    Heuristic,
}

/// `Σ_j a_j ν_j = p/q` over the slot labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeConstraint {
    pub coefficients: Vec<f64>,
    /// Present when every coefficient is an integer after scaling.
    pub integer_coefficients: Option<Vec<i64>>,
    pub rhs: f64,
    /// `(p, q)` with `q > 0` when the right-hand side is a small rational.
    pub rhs_rational: Option<(i64, i64)>,
}

impl LatticeConstraint {
    /// True when no integer assignment can satisfy the constraint.
    pub fn is_obstruction(&self) -> bool {
        match (&self.integer_coefficients, self.rhs_rational) {
            (Some(_), Some((_, q))) => q != 1,
            (Some(_), None) => (self.rhs - self.rhs.round()).abs() > 1e-8,
            _ => false,
        }
    }
}

impl fmt::Display for LatticeConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut lhs = String::new();
        let coeffs: Vec<f64> = match &self.integer_coefficients {
            Some(v) => v.iter().map(|&c| c as f64).collect(),
            None => self.coefficients.clone(),
        };
        for (j, &c) in coeffs.iter().enumerate().filter(|(_, c)| **c != 0.0) {
            let sign = if c < 0.0 { "-" } else { "+" };
            if lhs.is_empty() {
                if c < 0.0 {
                    lhs.push('-');
                }
            } else {
                lhs.push_str(&format!(" {sign} "));
            }
            if c.abs() != 1.0 {
                lhs.push_str(&format!("{}", c.abs()));
            }
            lhs.push_str(&format!("ν{}", j + 1));
        }
        match self.rhs_rational {
            Some((p, 1)) => write!(f, "{lhs} = {p}"),
            Some((p, q)) => write!(f, "{lhs} = {p}/{q}"),
            None => write!(f, "{lhs} = {}", self.rhs),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanReport {
    pub mode: ScanMode,
    pub feasible: bool,
    pub nu_max: i64,
    /// Number of eigenvalue slots carrying an integer label.
    pub slots: usize,
    pub assignments_scanned: u128,
    /// Linear relations every solution must satisfy (exact mode).
    pub constraints: Vec<LatticeConstraint>,
    /// A constraint with integer coefficients and a non-integer right-hand side.
    pub obstruction: Option<LatticeConstraint>,
    pub witness_nu: Option<Vec<i64>>,
    pub witness_coefficients: Option<Vec<f64>>,
    pub witness_residual: Option<f64>,
}

const MAX_DENOMINATOR: i64 = 64;

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Smallest `q ≤ 64` making every entry of `q·v` an integer within `1e-8`.
fn integer_scaling(v: &[f64]) -> Option<(Vec<i64>, i64)> {
    (1..=MAX_DENOMINATOR).find_map(|q| {
        let scaled: Vec<f64> = v.iter().map(|x| x * q as f64).collect();
        scaled
            .iter()
            .all(|x| (x - x.round()).abs() <= 1e-8)
            .then(|| (scaled.iter().map(|x| x.round() as i64).collect(), q))
    })
}

fn rationalize(x: f64) -> Option<(i64, i64)> {
    integer_scaling(&[x]).map(|(p, q)| {
        let g = gcd(p[0], q).max(1);
        (p[0] / g, q / g)
    })
}

fn make_constraint(w: &[f64], theta: &[f64]) -> LatticeConstraint {
    let rhs0 = -w.iter().zip(theta).map(|(a, t)| a * t).sum::<f64>() / TWO_PI;
    let (coefficients, rhs, integer_coefficients) = match integer_scaling(w) {
        Some((ints, q)) => {
            let g = ints.iter().fold(0, |g, &x| gcd(g, x)).max(1);
            let sign = if ints.iter().find(|&&x| x != 0).is_some_and(|&x| x < 0) {
                -1
            } else {
                1
            };
            let ints: Vec<i64> = ints.iter().map(|x| sign * x / g).collect();
            let factor = (sign * q) as f64 / g as f64;
            let coeffs = ints.iter().map(|&x| x as f64).collect();
            (coeffs, rhs0 * factor, Some(ints))
        }
        None => (w.to_vec(), rhs0, None),
    };
    LatticeConstraint {
        coefficients,
        integer_coefficients,
        rhs,
        rhs_rational: rationalize(rhs),
    }
}

/// Joint eigenspaces of commuting Hermitian matrices, as
/// `(eigenvalue per matrix, projector)`.
fn joint_eigenspaces(mats: &[CMatrix]) -> Option<Vec<(Vec<f64>, CMatrix)>> {
    let d = mats[0].nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(0x005e_ed0f_5ca1);
    'attempt: for _ in 0..8 {
        let weights: Vec<f64> = mats.iter().map(|_| rng.random_range(0.5..1.5)).collect();
        let combo = mats
            .iter()
            .zip(&weights)
            .fold(CMatrix::zeros(d, d), |acc, (m, &w)| acc + m.scale(w));
        let eig = HermitianEigen::new(&combo);
        let scale = eig.values.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
        let mut out = Vec::new();
        for g in cluster_sorted(&eig.values, 1e-8 * scale) {
            let v = eig.vectors.columns(g.start, g.len());
            let p = v * v.adjoint();
            let mut values = Vec::with_capacity(mats.len());
            for m in mats {
                let val = (v.adjoint() * m * v).trace().re / g.len() as f64;
                if linalg::max_abs(&(m * &p - p.scale(val))) > 1e-9 * scale {
                    continue 'attempt;
                }
                values.push(val);
            }
            out.push((values, p));
        }
        return Some(out);
    }
    None
}

fn fuzzy_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        if (x - y).abs() > 1e-9 {
            return x.total_cmp(y);
        }
    }
    std::cmp::Ordering::Equal
}

fn pseudo_inverse(a: &RMatrix) -> RMatrix {
    a.clone()
        .pseudo_inverse(1e-10 * a.amax().max(1.0))
        .expect("non-negative epsilon")
}

fn decode(mut index: u128, k: usize, nu_max: i64) -> Vec<i64> {
    let base = (2 * nu_max + 1) as u128;
    let mut nu = vec![0; k];
    for slot in (0..k).rev() {
        nu[slot] = (index % base) as i64 - nu_max;
        index /= base;
    }
    nu
}

fn witness_key(nu: &[i64]) -> (i64, Vec<i64>) {
    (nu.iter().map(|x| x.abs()).sum(), nu.to_vec())
}

/// Searches integer labels `ν ∈ [-ν_max, ν_max]` for an `H̃ ∈ span(basis)`
/// with `Eig(H̃ - H_G) = 2πν`.
///
/// When the basis and `H_G` commute pairwise the problem is linear in the
/// joint eigenbasis and the box is scanned exhaustively; the linear relations
/// forced on `ν` are reported, including any rational obstruction. Otherwise
/// target spectra are tried in order of `Σ|ν|` with an alternating-projection
/// search.
pub fn integer_infeasibility_scan(basis: &OperatorBasis, g: &GateTarget, nu_max: i64) -> Result<ScanReport> {
    if basis.is_empty() {
        return Err(Error::EmptyBasis);
    }
    if nu_max < 1 {
        return Err(Error::InvalidConfig(format!("nu_max must be at least 1, got {nu_max}")));
    }
    if basis.dim() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: g.dim(),
            found: basis.dim(),
        });
    }
    let h_g = principal_generator(g);
    let deviation = basis
        .matrices()
        .iter()
        .map(|o| linalg::max_abs(&(o * &h_g - &h_g * o)))
        .fold(0.0, f64::max);
    if deviation > 1e-10 {
        return Err(Error::NonCommuting { deviation });
    }
    let abelian = basis.matrices().iter().enumerate().all(|(i, a)| {
        basis.matrices()[i + 1..]
            .iter()
            .all(|b| linalg::max_abs(&(a * b - b * a)) <= 1e-10)
    });
    if abelian {
        let mut mats = basis.matrices().to_vec();
        mats.push(h_g.clone());
        if let Some(spaces) = joint_eigenspaces(&mats) {
            return exact_scan(basis, &h_g, spaces, nu_max);
        }
    }
    heuristic_scan(basis, &h_g, nu_max)
}

fn exact_scan(
    basis: &OperatorBasis,
    h_g: &CMatrix,
    mut spaces: Vec<(Vec<f64>, CMatrix)>,
    nu_max: i64,
) -> Result<ScanReport> {
    spaces.sort_by(|a, b| fuzzy_cmp(&b.0, &a.0));
    let m = basis.len();
    let k = spaces.len();
    let s = RMatrix::from_fn(k, m, |j, i| spaces[j].0[i]);
    let theta: Vec<f64> = spaces.iter().map(|sp| sp.0[m]).collect();

    let left_null = null_space(&s.transpose(), NULL_SPACE_TOL);
    let constraints: Vec<LatticeConstraint> = if left_null.ncols() == 0 {
        Vec::new()
    } else {
        let w = rref(&left_null.transpose());
        (0..w.nrows())
            .map(|r| make_constraint(&w.row(r).iter().cloned().collect::<Vec<_>>(), &theta))
            .collect()
    };
    let obstruction = constraints.iter().find(|c| c.is_obstruction()).cloned();

    let base = (2 * nu_max + 1) as u128;
    let total = base
        .checked_pow(k as u32)
        .filter(|&t| t <= MAX_SCAN_ASSIGNMENTS)
        .ok_or_else(|| Error::ScanTooLarge(base.checked_pow(k as u32).unwrap_or(u128::MAX)))?;
    let s_pinv = pseudo_inverse(&s);
    let complement = RMatrix::identity(k, k) - &s * &s_pinv;
    let rhs = |nu: &[i64]| nalgebra::DVector::from_fn(k, |j, _| TWO_PI * nu[j] as f64 + theta[j]);

    let best = (0..total)
        .into_par_iter()
        .filter_map(|idx| {
            let nu = decode(idx, k, nu_max);
            ((&complement * rhs(&nu)).norm() <= 1e-8).then_some(nu)
        })
        .min_by(|a, b| witness_key(a).cmp(&witness_key(b)));

    let (witness_coefficients, witness_residual) = match &best {
        Some(nu) => {
            let h: Vec<f64> = (&s_pinv * rhs(nu)).iter().cloned().collect();
            let h_tilde = basis.combine(&h)?;
            let report = assess(
                &h_tilde,
                &linalg::expi_hermitian(h_g, 1.0),
                h_g,
                DEFAULT_LATTICE_TOL,
                false,
            )?;
            (Some(h), Some(report.max_residual()))
        }
        None => (None, None),
    };
    Ok(ScanReport {
        mode: ScanMode::Exact,
        feasible: best.is_some(),
        nu_max,
        slots: k,
        assignments_scanned: total,
        constraints,
        obstruction,
        witness_nu: best,
        witness_coefficients,
        witness_residual,
    })
}

/// All sorted multisets of size `k` over `[-ν_max, ν_max]`, by `(Σ|ν|, lexicographic)`.
fn sorted_multisets(k: usize, nu_max: i64) -> Vec<Vec<i64>> {
    fn rec(k: usize, lo: i64, hi: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for v in lo..=hi {
            cur.push(v);
            rec(k, v, hi, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(k, -nu_max, nu_max, &mut Vec::with_capacity(k), &mut out);
    out.sort_by_key(|v| witness_key(v));
    out
}

fn binomial(n: u128, k: u128) -> u128 {
    (0..k).fold(1u128, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

const PROJECTION_ITERS: usize = 400;
const PROJECTION_STARTS: usize = 3;

/// Alternating projections between `{A : Eig(A) = 2π·target}` and
/// `span(basis) - H_G`.
fn lift_and_project(
    basis: &OperatorBasis,
    gram_inv: &RMatrix,
    h_g: &CMatrix,
    target: &[f64],
    start: Vec<f64>,
) -> Option<(Vec<f64>, f64)> {
    let d = basis.dim() as f64;
    let project = |t: &CMatrix| -> Vec<f64> {
        let b = nalgebra::DVector::from_iterator(
            basis.len(),
            basis.matrices().iter().map(|o| linalg::hs_inner(o, t).re / d),
        );
        (gram_inv * b).iter().cloned().collect()
    };
    let mut h = start;
    for _ in 0..PROJECTION_ITERS {
        let a = basis.combine(&h).ok()? - h_g;
        let eig = HermitianEigen::new(&a);
        let residual = eig
            .values
            .iter()
            .zip(target)
            .map(|(m, t)| (m - TWO_PI * t).abs())
            .fold(0.0, f64::max);
        if !residual.is_finite() {
            return None;
        }
        if residual < 1e-9 {
            return Some((h, residual));
        }
        let lifted: Vec<f64> = target.iter().map(|t| TWO_PI * t).collect();
        let z = eig.with_values(&lifted);
        h = project(&(h_g + z));
    }
    None
}

fn heuristic_scan(basis: &OperatorBasis, h_g: &CMatrix, nu_max: i64) -> Result<ScanReport> {
    let k = basis.dim();
    let count = binomial((2 * nu_max + k as i64) as u128, k as u128);
    if count > 200_000 {
        return Err(Error::ScanTooLarge(count));
    }
    let targets = sorted_multisets(k, nu_max);
    let gram_inv = pseudo_inverse(&basis.gram());
    let (projected, _) = basis.project(h_g)?;

    let found = targets.par_iter().enumerate().find_map_first(|(t_idx, target)| {
        let tf: Vec<f64> = target.iter().map(|&x| x as f64).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(t_idx as u64);
        (0..PROJECTION_STARTS).find_map(|s| {
            let start = if s == 0 {
                projected.clone()
            } else {
                (0..basis.len()).map(|_| rng.random_range(-2.0..2.0)).collect()
            };
            lift_and_project(basis, &gram_inv, h_g, &tf, start).map(|(h, r)| (target.clone(), h, r))
        })
    });

    let mut report = ScanReport {
        mode: ScanMode::Heuristic,
        feasible: false,
        nu_max,
        slots: k,
        assignments_scanned: targets.len() as u128,
        constraints: Vec::new(),
        obstruction: None,
        witness_nu: None,
        witness_coefficients: None,
        witness_residual: None,
    };
    if let Some((nu, h, _)) = found {
        let h_tilde = basis.combine(&h)?;
        let check = assess(
            &h_tilde,
            &linalg::expi_hermitian(h_g, 1.0),
            h_g,
            DEFAULT_LATTICE_TOL,
            false,
        )?;
        report.feasible = check.passed();
        report.witness_residual = Some(check.max_residual());
        report.witness_nu = Some(nu);
        report.witness_coefficients = Some(h);
    }
    Ok(report)
}
