// Copyright 2026 The gateforge Authors
// SPDX-License-Identifier: Apache-2.0

//! Pauli strings, sums of Pauli strings, and operator bases built from them.
//!
//! Qubit 1 is the leftmost tensor factor, i.e. the most significant bit of a
//! computational-basis index. Labels are written left to right in that order,
//! so `"ZZX"` is `σᶻ₁ σᶻ₂ σˣ₃`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::linalg::{self, hs_inner};
use crate::{CMatrix, Error, RMatrix, Result, C64};

/// Coefficients with modulus at or below this are dropped by [`pauli_decompose`].
pub const DECOMPOSE_DROP_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const AXES: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    pub fn matrix(self) -> CMatrix {
        let o = C64::new(0.0, 0.0);
        let l = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        let entries = match self {
            Pauli::I => [l, o, o, l],
            Pauli::X => [o, l, l, o],
            Pauli::Y => [o, -i, i, o],
            Pauli::Z => [l, o, o, -l],
        };
        CMatrix::from_row_slice(2, 2, &entries)
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

/// Tensor product of single-qubit Pauli factors with a real coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliString {
    factors: Vec<Pauli>,
    coefficient: f64,
}

impl PauliString {
    pub fn new(factors: Vec<Pauli>, coefficient: f64) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidLabel(String::new()));
        }
        if !coefficient.is_finite() {
            return Err(Error::NonFiniteCoefficient(coefficient));
        }
        Ok(Self { factors, coefficient })
    }

    pub fn from_label(label: &str, coefficient: f64) -> Result<Self> {
        let factors = label
            .chars()
            .map(|c| Pauli::from_char(c).ok_or_else(|| Error::InvalidLabel(label.to_string())))
            .collect::<Result<Vec<_>>>()?;
        Self::new(factors, coefficient)
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self {
            factors: vec![Pauli::I; n_qubits.max(1)],
            coefficient: 1.0,
        }
    }

    /// Single-qubit factor `p` on `qubit` (0-based), identity elsewhere.
    pub fn single(n_qubits: usize, qubit: usize, p: Pauli) -> Self {
        let mut factors = vec![Pauli::I; n_qubits];
        factors[qubit] = p;
        Self {
            factors,
            coefficient: 1.0,
        }
    }

    /// Two-qubit factor `a ⊗ b` on qubits `i < j` (0-based).
    pub fn pair(n_qubits: usize, i: usize, a: Pauli, j: usize, b: Pauli) -> Self {
        let mut factors = vec![Pauli::I; n_qubits];
        factors[i] = a;
        factors[j] = b;
        Self {
            factors,
            coefficient: 1.0,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[Pauli] {
        &self.factors
    }

    pub fn coefficient(&self) -> f64 {
        self.coefficient
    }

    pub fn with_coefficient(&self, coefficient: f64) -> Self {
        Self {
            factors: self.factors.clone(),
            coefficient,
        }
    }

    pub fn label(&self) -> String {
        self.factors.iter().map(|p| p.as_char()).collect()
    }

    /// Number of non-identity factors.
    pub fn weight(&self) -> usize {
        self.factors.iter().filter(|&&p| p != Pauli::I).count()
    }

    /// Bit mask of the factors that flip the computational basis (X or Y).
    fn flip_mask(&self) -> usize {
        let n = self.n_qubits();
        self.factors
            .iter()
            .enumerate()
            .filter(|(_, p)| matches!(p, Pauli::X | Pauli::Y))
            .fold(0, |m, (q, _)| m | (1 << (n - 1 - q)))
    }

    /// Phase `c` with `σ|k⟩ = c |k ⊕ flip_mask⟩` (unit coefficient).
    fn column_phase(&self, k: usize) -> C64 {
        let n = self.n_qubits();
        let mut phase = C64::new(1.0, 0.0);
        for (q, p) in self.factors.iter().enumerate() {
            let bit = (k >> (n - 1 - q)) & 1;
            match (p, bit) {
                (Pauli::Y, 0) => phase *= C64::new(0.0, 1.0),
                (Pauli::Y, _) => phase *= C64::new(0.0, -1.0),
                (Pauli::Z, 1) => phase = -phase,
                _ => {}
            }
        }
        phase
    }

    /// Dense `2ⁿ × 2ⁿ` matrix, scaled by the coefficient.
    pub fn dense(&self) -> CMatrix {
        let d = 1usize << self.n_qubits();
        let mask = self.flip_mask();
        let mut m = CMatrix::zeros(d, d);
        for k in 0..d {
            m[(k ^ mask, k)] = self.column_phase(k) * self.coefficient;
        }
        m
    }

    /// `Tr(σ A) / 2ⁿ` for the unit-coefficient string.
    pub fn projection(&self, a: &CMatrix) -> C64 {
        let d = 1usize << self.n_qubits();
        let mask = self.flip_mask();
        let sum: C64 = (0..d).map(|k| self.column_phase(k) * a[(k, k ^ mask)]).sum();
        sum / d as f64
    }

    /// Ordering key: weight, then qubit positions, then axis labels.
    fn canonical_key(&self) -> (usize, Vec<usize>, Vec<Pauli>) {
        let (qubits, axes) = self
            .factors
            .iter()
            .enumerate()
            .filter(|(_, p)| **p != Pauli::I)
            .map(|(q, p)| (q, *p))
            .unzip();
        (self.weight(), qubits, axes)
    }

    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.canonical_key().cmp(&other.canonical_key())
    }
}

/// Formats a coefficient with at least 15 significant digits.
pub(crate) fn format_coefficient(c: f64) -> String {
    if c == 0.0 {
        return "0".to_string();
    }
    let mag = c.abs();
    if !(1e-4..1e15).contains(&mag) {
        return format!("{c:.15e}");
    }
    let decimals = (15 - mag.log10().floor() as i32).max(0) as usize;
    format!("{c:.decimals$}")
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} * {}", format_coefficient(self.coefficient), self.label())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Parses `"<coefficient> * <LABEL>"` or a bare label (coefficient 1).
    fn from_str(s: &str) -> Result<Self> {
        match s.split_once('*') {
            Some((coef, label)) => {
                let c: f64 = coef
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad coefficient in {s:?}")))?;
                Self::from_label(label.trim(), c)
            }
            None => Self::from_label(s.trim(), 1.0),
        }
    }
}

/// `dense_matrix(p)`: Kronecker product of the factors, scaled by the coefficient.
pub fn dense_matrix(p: &PauliString) -> CMatrix {
    p.dense()
}

/// `AB - BA` for equal-sized operators.
pub fn commutator(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    linalg::commutator(a, b)
}

/// A real linear combination of Pauli strings on a fixed number of qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    terms: Vec<PauliString>,
}

impl PauliSum {
    pub fn new(n_qubits: usize, terms: Vec<PauliString>) -> Result<Self> {
        if let Some(t) = terms.iter().find(|t| t.n_qubits() != n_qubits) {
            return Err(Error::DimensionMismatch {
                expected: n_qubits,
                found: t.n_qubits(),
            });
        }
        Ok(Self { n_qubits, terms })
    }

    pub fn from_string(p: PauliString) -> Self {
        Self {
            n_qubits: p.n_qubits(),
            terms: vec![p],
        }
    }

    /// Parses whitespace-free labels with coefficients, e.g. `["1 * XI", "0.5 * ZZ"]`.
    pub fn parse_terms<S: AsRef<str>>(terms: &[S]) -> Result<Self> {
        let parsed = terms
            .iter()
            .map(|t| t.as_ref().parse())
            .collect::<Result<Vec<PauliString>>>()?;
        let n = parsed.first().map(PauliString::n_qubits).ok_or(Error::EmptyBasis)?;
        Self::new(n, parsed)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[PauliString] {
        &self.terms
    }

    pub fn dense(&self) -> CMatrix {
        let d = 1usize << self.n_qubits;
        self.terms.iter().fold(CMatrix::zeros(d, d), |acc, t| acc + t.dense())
    }

    /// Merges repeated labels, drops terms with `|c| <= tol`, sorts canonically.
    pub fn simplified(&self, tol: f64) -> Self {
        let mut merged: BTreeMap<String, f64> = BTreeMap::new();
        for t in &self.terms {
            *merged.entry(t.label()).or_insert(0.0) += t.coefficient();
        }
        let mut terms: Vec<PauliString> = merged
            .into_iter()
            .filter(|(_, c)| c.abs() > tol)
            .map(|(l, c)| PauliString::from_label(&l, c).expect("labels come from valid strings"))
            .collect();
        terms.sort_by(|a, b| a.canonical_cmp(b));
        Self {
            n_qubits: self.n_qubits,
            terms,
        }
    }

    /// Coefficient of the string with the given label, zero if absent.
    pub fn coefficient_of(&self, label: &str) -> f64 {
        self.terms
            .iter()
            .filter(|t| t.label() == label)
            .map(|t| t.coefficient())
            .sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| t.with_coefficient(t.coefficient() * s))
            .collect();
        Self {
            n_qubits: self.n_qubits,
            terms,
        }
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.terms.iter().map(|t| t.to_string()).collect()
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(|t| t.to_string()).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// All `4ⁿ` unit-coefficient strings in canonical order.
pub fn all_strings(n_qubits: usize) -> Vec<PauliString> {
    let all = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    let mut out: Vec<PauliString> = (0..1usize << (2 * n_qubits))
        .map(|code| {
            let factors = (0..n_qubits)
                .map(|q| all[(code >> (2 * (n_qubits - 1 - q))) & 3])
                .collect();
            PauliString {
                factors,
                coefficient: 1.0,
            }
        })
        .collect();
    out.sort_by(|a, b| a.canonical_cmp(b));
    out
}

fn qubits_of_dim(d: usize) -> Result<usize> {
    if d == 0 || !d.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(d));
    }
    Ok(d.trailing_zeros() as usize)
}

/// Every Pauli coefficient `Tr(σ_s A)/2ⁿ` of a Hermitian matrix, in canonical order.
pub fn pauli_decompose_full(a: &CMatrix) -> Result<Vec<PauliString>> {
    let d = linalg::ensure_square(a)?;
    let n = qubits_of_dim(d)?;
    linalg::ensure_hermitian(a, 1e-10)?;
    Ok(all_strings(n)
        .into_iter()
        .map(|s| {
            let c = s.projection(a).re;
            s.with_coefficient(c)
        })
        .collect())
}

/// Pauli expansion of a Hermitian matrix; terms with `|c| <= 1e-13` are omitted.
pub fn pauli_decompose(a: &CMatrix) -> Result<Vec<PauliString>> {
    Ok(pauli_decompose_full(a)?
        .into_iter()
        .filter(|t| t.coefficient().abs() > DECOMPOSE_DROP_TOL)
        .collect())
}

/// [`pauli_decompose`] wrapped as a sum.
pub fn to_pauli_sum(a: &CMatrix) -> Result<PauliSum> {
    let d = linalg::ensure_square(a)?;
    PauliSum::new(qubits_of_dim(d)?, pauli_decompose(a)?)
}

/// Ordered family of linearly independent Hermitian operators `{O_i}`.
#[derive(Debug, Clone)]
pub struct OperatorBasis {
    n_qubits: usize,
    elements: Vec<PauliSum>,
    matrices: Vec<CMatrix>,
}

impl OperatorBasis {
    pub fn new(n_qubits: usize, elements: Vec<PauliSum>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidConfig("n_qubits must be positive".into()));
        }
        if let Some(e) = elements.iter().find(|e| e.n_qubits() != n_qubits) {
            return Err(Error::DimensionMismatch {
                expected: n_qubits,
                found: e.n_qubits(),
            });
        }
        let matrices: Vec<CMatrix> = elements.iter().map(PauliSum::dense).collect();
        for m in &matrices {
            linalg::ensure_hermitian(m, 1e-12)?;
        }
        let basis = Self {
            n_qubits,
            elements,
            matrices,
        };
        let len = basis.len();
        if len > 0 {
            let rank = linalg::rank(&basis.gram(), 1e-10);
            if rank < len {
                return Err(Error::LinearlyDependent { rank, len });
            }
        }
        Ok(basis)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[PauliSum] {
        &self.elements
    }

    pub fn matrices(&self) -> &[CMatrix] {
        &self.matrices
    }

    /// `Σᵢ λᵢ Oᵢ`.
    pub fn combine(&self, lambda: &[f64]) -> Result<CMatrix> {
        if lambda.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: lambda.len(),
            });
        }
        let d = self.dim();
        Ok(self
            .matrices
            .iter()
            .zip(lambda)
            .fold(CMatrix::zeros(d, d), |acc, (m, &l)| acc + m.scale(l)))
    }

    /// Real Gram matrix `Re Tr(Oᵢ Oⱼ) / d`.
    pub fn gram(&self) -> RMatrix {
        let d = self.dim() as f64;
        let n = self.len();
        RMatrix::from_fn(n, n, |i, j| hs_inner(&self.matrices[i], &self.matrices[j]).re / d)
    }

    /// Least-squares coordinates of `a` in the span, and the max-abs residual.
    pub fn project(&self, a: &CMatrix) -> Result<(Vec<f64>, f64)> {
        if a.nrows() != self.dim() || a.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: a.nrows(),
            });
        }
        if self.is_empty() {
            return Ok((Vec::new(), linalg::max_abs(a)));
        }
        let d = self.dim() as f64;
        let rhs = nalgebra::DVector::from_iterator(self.len(), self.matrices.iter().map(|m| hs_inner(m, a).re / d));
        let coords = self.gram().lu().solve(&rhs).ok_or(Error::LinearlyDependent {
            rank: 0,
            len: self.len(),
        })?;
        let coords: Vec<f64> = coords.iter().cloned().collect();
        let residual = linalg::max_abs(&(self.combine(&coords)? - a));
        Ok((coords, residual))
    }

    /// Coordinates of the identity, when it lies in the span.
    pub fn identity_coordinates(&self) -> Option<Vec<f64>> {
        let d = self.dim();
        let (coords, residual) = self.project(&CMatrix::identity(d, d)).ok()?;
        (residual <= 1e-9).then_some(coords)
    }

    /// Same span, Gram–Schmidt orthonormalized in `Tr(A†B)/d`.
    pub fn orthonormalized(&self) -> Result<Self> {
        let d = self.dim() as f64;
        let mut done: Vec<CMatrix> = Vec::new();
        for m in &self.matrices {
            let mut v = m.clone();
            for u in &done {
                let c = hs_inner(u, &v).re / d;
                v -= u.scale(c);
            }
            let norm = (hs_inner(&v, &v).re / d).sqrt();
            done.push(v.unscale(norm));
        }
        let elements = done.iter().map(to_pauli_sum).collect::<Result<Vec<_>>>()?;
        Self::new(self.n_qubits, elements)
    }
}

/// Families of standard interaction sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisFamily {
    /// Identity, all single-qubit terms, all `σᵢ^α σⱼ^β`.
    FullTwoLocal,
    /// As [`BasisFamily::FullTwoLocal`] without any `Y` factor.
    TwoLocalNoY,
    /// Identity, all single-qubit terms, `σᵢ^α σⱼ^α` only.
    DiagonalPairwise,
    /// Identity, all single-qubit terms, `XᵢXⱼ + YᵢYⱼ` as one element per pair.
    XxYyCoupled,
    /// Identity, all single-qubit terms, `XᵢXⱼ` and `YᵢYⱼ` separately.
    XxAndYy,
    /// Identity and all single-qubit terms.
    OneLocal,
}

impl BasisFamily {
    pub const ALL: [BasisFamily; 6] = [
        BasisFamily::FullTwoLocal,
        BasisFamily::TwoLocalNoY,
        BasisFamily::DiagonalPairwise,
        BasisFamily::XxYyCoupled,
        BasisFamily::XxAndYy,
        BasisFamily::OneLocal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BasisFamily::FullTwoLocal => "full_two_local",
            BasisFamily::TwoLocalNoY => "two_local_no_y",
            BasisFamily::DiagonalPairwise => "diagonal_pairwise",
            BasisFamily::XxYyCoupled => "xx_yy_coupled",
            BasisFamily::XxAndYy => "xx_and_yy",
            BasisFamily::OneLocal => "one_local",
        }
    }
}

impl fmt::Display for BasisFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BasisFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        BasisFamily::ALL
            .into_iter()
            .find(|f| f.name() == key)
            .ok_or_else(|| Error::UnknownFamily(s.to_string()))
    }
}

/// Builds the ordered basis of a standard family; identity first, then
/// single-qubit terms by (qubit, axis), then pair terms by (qubits, axes).
pub fn standard_bases(n_qubits: usize, family: BasisFamily) -> Result<OperatorBasis> {
    if n_qubits == 0 {
        return Err(Error::InvalidConfig("n_qubits must be positive".into()));
    }
    let n = n_qubits;
    let mut elements = vec![PauliSum::from_string(PauliString::identity(n))];
    for q in 0..n {
        for a in Pauli::AXES {
            elements.push(PauliSum::from_string(PauliString::single(n, q, a)));
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let pair = |a, b| PauliString::pair(n, i, a, j, b);
            match family {
                BasisFamily::OneLocal => {}
                BasisFamily::FullTwoLocal | BasisFamily::TwoLocalNoY => {
                    for a in Pauli::AXES {
                        for b in Pauli::AXES {
                            if family == BasisFamily::TwoLocalNoY && (a == Pauli::Y || b == Pauli::Y) {
                                continue;
                            }
                            elements.push(PauliSum::from_string(pair(a, b)));
                        }
                    }
                }
                BasisFamily::DiagonalPairwise => {
                    for a in Pauli::AXES {
                        elements.push(PauliSum::from_string(pair(a, a)));
                    }
                }
                BasisFamily::XxYyCoupled => {
                    let xx = pair(Pauli::X, Pauli::X);
                    let yy = pair(Pauli::Y, Pauli::Y);
                    elements.push(PauliSum::new(n, vec![xx, yy])?);
                }
                BasisFamily::XxAndYy => {
                    elements.push(PauliSum::from_string(pair(Pauli::X, Pauli::X)));
                    elements.push(PauliSum::from_string(pair(Pauli::Y, Pauli::Y)));
                }
            }
        }
    }
    if family == BasisFamily::TwoLocalNoY {
        elements.retain(|e| e.terms().iter().all(|t| !t.factors().contains(&Pauli::Y)));
    }
    OperatorBasis::new(n, elements)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn kron_oracle(label: &str, coefficient: f64) -> CMatrix {
        label
            .chars()
            .map(|c| Pauli::from_char(c).unwrap().matrix())
            .reduce(|acc, m| linalg::kron(&acc, &m))
            .unwrap()
            .scale(coefficient)
    }

    #[test]
    fn dense_matches_explicit_kronecker() {
        for label in ["I", "Y", "XZ", "YY", "ZYX", "XYZI", "YIYZ"] {
            let p = PauliString::from_label(label, -0.75).unwrap();
            assert_eq!(p.dense(), kron_oracle(label, -0.75), "label {label}");
        }
    }

    #[test]
    fn identity_string_is_identity() {
        let p = PauliString::from_label("III", 1.0).unwrap();
        assert_eq!(p.dense(), CMatrix::identity(8, 8));
    }

    #[test]
    fn zzx_on_110() {
        let m = PauliString::from_label("ZZX", 1.0).unwrap().dense();
        let out = &m * linalg::basis_vector(8, 0b110);
        let expected = linalg::basis_vector(8, 0b111);
        assert!(linalg::max_abs(&CMatrix::from_column_slice(8, 1, (out - expected).as_slice())) < 1e-15);
    }

    #[test]
    fn scaled_single_x() {
        let m = PauliString::from_label("X", PI).unwrap().dense();
        assert_eq!(m[(0, 1)], C64::new(PI, 0.0));
        assert_eq!(m[(1, 0)], C64::new(PI, 0.0));
        assert_eq!(m[(0, 0)], C64::new(0.0, 0.0));
    }

    #[test]
    fn commutators() {
        let xx = PauliString::from_label("XX", 1.0).unwrap().dense();
        let zz = PauliString::from_label("ZZ", 1.0).unwrap().dense();
        assert!(linalg::max_abs(&commutator(&xx, &zz).unwrap()) < 1e-15);

        let x = Pauli::X.matrix();
        let z = Pauli::Z.matrix();
        let expected = Pauli::Y.matrix().scale(-2.0) * C64::new(0.0, 1.0);
        assert!(linalg::max_abs(&(commutator(&x, &z).unwrap() - expected)) < 1e-15);
        assert!(linalg::max_abs(&commutator(&xx, &xx).unwrap()) == 0.0);
    }

    #[test]
    fn family_sizes() {
        let n3 = |f| standard_bases(3, f).unwrap().len();
        assert_eq!(n3(BasisFamily::FullTwoLocal), 37);
        assert_eq!(n3(BasisFamily::DiagonalPairwise), 19);
        assert_eq!(n3(BasisFamily::TwoLocalNoY), 19);
        assert_eq!(n3(BasisFamily::XxYyCoupled), 13);
        assert_eq!(n3(BasisFamily::XxAndYy), 16);
        assert_eq!(standard_bases(2, BasisFamily::OneLocal).unwrap().len(), 7);
    }

    #[test]
    fn family_ordering_is_canonical() {
        let b = standard_bases(2, BasisFamily::FullTwoLocal).unwrap();
        let labels: Vec<String> = b.elements().iter().map(|e| e.terms()[0].label()).collect();
        assert_eq!(labels[..8], ["II", "XI", "YI", "ZI", "IX", "IY", "IZ", "XX"]);
        assert_eq!(labels.last().unwrap(), "ZZ");
    }

    #[test]
    fn family_names_round_trip() {
        for f in BasisFamily::ALL {
            assert_eq!(f.name().parse::<BasisFamily>().unwrap(), f);
        }
        assert!(matches!(
            "three_local".parse::<BasisFamily>(),
            Err(Error::UnknownFamily(_))
        ));
    }

    #[test]
    fn decompose_identity_and_xx() {
        let terms = pauli_decompose(&CMatrix::identity(8, 8)).unwrap();
        assert_eq!(terms.len(), 1);
        assert_eq!(terms[0].label(), "III");
        assert!((terms[0].coefficient() - 1.0).abs() < 1e-15);

        let xx = PauliString::from_label("XX", 1.0).unwrap().dense();
        let terms = pauli_decompose(&xx).unwrap();
        assert_eq!(terms.len(), 1);
        assert_eq!(terms[0].label(), "XX");
    }

    #[test]
    fn decompose_projector_product() {
        // π Z₁⁻ Z₂⁻ X₃⁻ has its only weight-3 term at -π/8 ZZX.
        let id = CMatrix::identity(2, 2);
        let minus = |p: Pauli| (&id - p.matrix()).scale(0.5);
        let a = linalg::kron(&linalg::kron(&minus(Pauli::Z), &minus(Pauli::Z)), &minus(Pauli::X)).scale(PI);
        let sum = to_pauli_sum(&a).unwrap();
        assert!((sum.coefficient_of("ZZX") + PI / 8.0).abs() < 1e-14);
        assert!(sum.terms().iter().filter(|t| t.weight() == 3).count() == 1);
    }

    #[test]
    fn decompose_rejects_non_hermitian() {
        let mut a = CMatrix::identity(2, 2);
        a[(0, 1)] = C64::new(1.0, 0.0);
        assert!(matches!(pauli_decompose(&a), Err(Error::NotHermitian { .. })));
        assert!(matches!(
            pauli_decompose(&CMatrix::identity(3, 3)),
            Err(Error::NotPowerOfTwo(3))
        ));
    }

    #[test]
    fn display_and_parse() {
        let p = PauliString::from_label("ZZX", -PI / 8.0).unwrap();
        let s = p.to_string();
        assert!(s.starts_with("-0.392699081698724"), "{s}");
        assert!(s.ends_with(" * ZZX"));
        let back: PauliString = s.parse().unwrap();
        assert!((back.coefficient() - p.coefficient()).abs() < 1e-15);
        assert_eq!(back.label(), "ZZX");
        assert_eq!("XY".parse::<PauliString>().unwrap().coefficient(), 1.0);
        assert!("2 * XQ".parse::<PauliString>().is_err());
    }

    #[test]
    fn dependent_basis_rejected() {
        let x = PauliSum::from_string(PauliString::from_label("X", 1.0).unwrap());
        let x2 = PauliSum::from_string(PauliString::from_label("X", 2.0).unwrap());
        assert!(matches!(
            OperatorBasis::new(1, vec![x, x2]),
            Err(Error::LinearlyDependent { .. })
        ));
    }

    #[test]
    fn projection_recovers_coordinates() {
        let b = standard_bases(2, BasisFamily::XxYyCoupled).unwrap();
        let lambda: Vec<f64> = (0..b.len()).map(|i| 0.1 * i as f64 - 0.3).collect();
        let (coords, residual) = b.project(&b.combine(&lambda).unwrap()).unwrap();
        assert!(residual < 1e-13);
        for (c, l) in coords.iter().zip(&lambda) {
            assert!((c - l).abs() < 1e-13);
        }
        assert_eq!(b.identity_coordinates().unwrap()[0], 1.0);
    }

    #[test]
    fn orthonormalized_has_unit_gram() {
        let b = standard_bases(2, BasisFamily::XxYyCoupled)
            .unwrap()
            .orthonormalized()
            .unwrap();
        let g = b.gram();
        assert!((g - RMatrix::identity(b.len(), b.len())).amax() < 1e-12);
    }
}
