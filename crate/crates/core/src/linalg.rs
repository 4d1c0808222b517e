// Copyright 2026 The gateforge Authors
// SPDX-License-Identifier: Apache-2.0

//! Small dense linear-algebra helpers shared by the other modules.
//!
//! Everything here works on matrices of side at most a few dozen, so clarity
//! wins over blocking or reuse of workspaces.

use nalgebra::linalg::{SymmetricEigen, SVD};

use crate::{CMatrix, CVector, Error, RMatrix, Result, C64};

/// Largest entry modulus, `‖A‖_max`.
pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// `‖A - A†‖_max`.
pub fn hermitian_deviation(a: &CMatrix) -> f64 {
    max_abs(&(a - a.adjoint()))
}

/// `‖U†U - 1‖_max`.
pub fn unitary_deviation(u: &CMatrix) -> f64 {
    let n = u.nrows();
    max_abs(&(u.adjoint() * u - CMatrix::identity(n, n)))
}

pub fn ensure_square(a: &CMatrix) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    Ok(a.nrows())
}

pub fn ensure_hermitian(a: &CMatrix, tol: f64) -> Result<()> {
    ensure_square(a)?;
    let deviation = hermitian_deviation(a);
    if deviation > tol || !deviation.is_finite() {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(())
}

/// Returns `AB - BA`.
pub fn commutator(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: b.nrows(),
        });
    }
    ensure_square(a)?;
    Ok(a * b - b * a)
}

/// Kronecker product with the left factor as the most significant index.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors, one per column, in the order of `values`.
    pub vectors: CMatrix,
}

impl HermitianEigen {
    /// Decomposes `a`, which is symmetrized first so that rounding noise in the
    /// anti-Hermitian part never reaches the solver.
    pub fn new(a: &CMatrix) -> Self {
        let sym = (a + a.adjoint()).scale(0.5);
        let eig = SymmetricEigen::new(sym);
        let n = eig.eigenvalues.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        Self { values, vectors }
    }

    /// `V diag(values) V†` with the eigenvectors kept.
    pub fn with_values(&self, values: &[f64]) -> CMatrix {
        let mut scaled = self.vectors.clone();
        for (c, &v) in values.iter().enumerate() {
            scaled.column_mut(c).scale_mut(v);
        }
        scaled * self.vectors.adjoint()
    }

    /// `V f(μ) V†`.
    pub fn apply_fn(&self, f: impl Fn(f64) -> C64) -> CMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (c, &mu) in self.values.iter().enumerate() {
            let fc = f(mu);
            for r in 0..n {
                scaled[(r, c)] *= fc;
            }
        }
        scaled * self.vectors.adjoint()
    }
}

/// `exp(i t H)` for Hermitian `H`.
pub fn expi_hermitian(h: &CMatrix, t: f64) -> CMatrix {
    HermitianEigen::new(h).apply_fn(|mu| C64::from_polar(1.0, t * mu))
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn eigvalsh(a: &CMatrix) -> Vec<f64> {
    HermitianEigen::new(a).values
}

/// Groups a sorted slice into runs whose consecutive gaps are at most `tol`.
pub fn cluster_sorted(values: &[f64], tol: f64) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[i - 1] > tol {
            if i > start {
                out.push(start..i);
            }
            start = i;
        }
    }
    out
}

/// Orthonormal basis (as columns) of the null space of `a`; singular values
/// at or below `rel_tol * σ_max` count as zero.
pub fn null_space(a: &RMatrix, rel_tol: f64) -> RMatrix {
    let (rows, cols) = a.shape();
    if cols == 0 {
        return RMatrix::zeros(0, 0);
    }
    // Pad to at least square so that the thin SVD yields all right singular vectors.
    let padded = if rows < cols {
        let mut p = RMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = SVD::new(padded, false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| sigma_max == 0.0 || svd.singular_values[k] <= rel_tol * sigma_max)
        .collect();
    RMatrix::from_fn(cols, keep.len(), |r, c| v_t[(keep[c], r)])
}

/// Numerical rank with relative threshold.
pub fn rank(a: &RMatrix, rel_tol: f64) -> usize {
    if a.is_empty() {
        return 0;
    }
    let svd = SVD::new(a.clone(), false, false);
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    if sigma_max == 0.0 {
        return 0;
    }
    svd.singular_values.iter().filter(|&&s| s > rel_tol * sigma_max).count()
}

/// Reduced row-echelon form of the rows of `a` with partial pivoting; rows
/// that vanish are dropped. Entries below `1e-12` are flushed to zero.
pub fn rref(a: &RMatrix) -> RMatrix {
    let mut m = a.clone();
    let (rows, cols) = m.shape();
    let scale = m.amax().max(1.0);
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let (p, best) = (r..rows)
            .map(|k| (k, m[(k, c)].abs()))
            .fold((r, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best <= 1e-9 * scale {
            continue;
        }
        m.swap_rows(r, p);
        let pivot = m[(r, c)];
        for j in 0..cols {
            m[(r, j)] /= pivot;
        }
        for k in 0..rows {
            if k != r {
                let f = m[(k, c)];
                if f != 0.0 {
                    for j in 0..cols {
                        m[(k, j)] -= f * m[(r, j)];
                    }
                }
            }
        }
        r += 1;
    }
    let mut out = m.rows(0, r).into_owned();
    out.iter_mut().for_each(|x| {
        if x.abs() < 1e-12 {
            *x = 0.0;
        }
    });
    out
}

/// Hilbert–Schmidt inner product `Tr(A†B)`.
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Stacks the real and imaginary parts of a matrix into one real vector.
pub fn realify(a: &CMatrix) -> Vec<f64> {
    a.iter().map(|z| z.re).chain(a.iter().map(|z| z.im)).collect()
}

pub fn basis_vector(dim: usize, index: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    v[index] = C64::new(1.0, 0.0);
    v
}
