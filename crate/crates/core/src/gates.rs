// Copyright 2026 The gateforge Authors
// SPDX-License-Identifier: Apache-2.0

//! Target gates and their spectral decomposition.
//!
//! Computational-basis index `k` has qubit 1 as its most significant bit.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::OnceLock;

use crate::linalg::{self, cluster_sorted, HermitianEigen};
use crate::{CMatrix, Error, Result, C64};

/// Unitarity tolerance for matrices read from disk.
pub const FILE_UNITARY_TOL: f64 = 1e-8;
/// Phases closer than this are treated as one degenerate eigenvalue.
pub const PHASE_CLUSTER_TOL: f64 = 1e-8;

/// Distinct eigenphases of a unitary with the projectors onto their eigenspaces.
#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Ascending, each in `(-π, π]`.
    pub phases: Vec<f64>,
    pub projectors: Vec<CMatrix>,
    pub multiplicities: Vec<usize>,
}

impl Spectrum {
    /// `Σ_k e^{iθ_k} I_k`.
    pub fn reconstruct(&self) -> CMatrix {
        let d = self.projectors.first().map_or(0, |p| p.nrows());
        self.phases
            .iter()
            .zip(&self.projectors)
            .fold(CMatrix::zeros(d, d), |acc, (&t, p)| acc + p * C64::from_polar(1.0, t))
    }

    /// `Σ_k f(θ_k) I_k`.
    pub fn apply_fn(&self, f: impl Fn(f64) -> C64) -> CMatrix {
        let d = self.projectors.first().map_or(0, |p| p.nrows());
        self.phases
            .iter()
            .zip(&self.projectors)
            .fold(CMatrix::zeros(d, d), |acc, (&t, p)| acc + p * f(t))
    }
}

/// A named unitary on `n` qubits.
#[derive(Debug, Clone)]
pub struct GateTarget {
    name: String,
    n_qubits: usize,
    matrix: CMatrix,
    eigen_cache: OnceLock<Spectrum>,
}

impl GateTarget {
    /// Validates that `matrix` is a unitary of power-of-two side within `1e-8`.
    pub fn new(name: impl Into<String>, matrix: CMatrix) -> Result<Self> {
        let d = linalg::ensure_square(&matrix)?;
        if d == 0 || !d.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(d));
        }
        let deviation = linalg::unitary_deviation(&matrix);
        if deviation > FILE_UNITARY_TOL || !deviation.is_finite() {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self {
            name: name.into(),
            n_qubits: d.trailing_zeros() as usize,
            matrix,
            eigen_cache: OnceLock::new(),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Eigenphases and projectors, computed once.
    pub fn spectrum(&self) -> &Spectrum {
        self.eigen_cache.get_or_init(|| unitary_spectrum(&self.matrix))
    }
}

/// See [`GateTarget::spectrum`].
pub fn spectral_decomposition(g: &GateTarget) -> Spectrum {
    g.spectrum().clone()
}

fn wrap_phase(t: f64) -> f64 {
    if t <= -std::f64::consts::PI + PHASE_CLUSTER_TOL {
        std::f64::consts::PI
    } else {
        t
    }
}

/// Returns the clustered spectrum and the worst `‖U I_k - e^{iθ_k} I_k‖_max`.
fn try_spectrum(u: &CMatrix, mix: f64) -> (Spectrum, f64) {
    let d = u.nrows();
    let ud = u.adjoint();
    // Hermitian with the same eigenvectors as the normal matrix U.
    let m = (u + &ud).scale(0.5) + (u - &ud) * (C64::new(mix, 0.0) / C64::new(0.0, 2.0));
    let eig = HermitianEigen::new(&m);

    let mut tagged: Vec<(f64, usize)> = (0..d)
        .map(|c| {
            let v = eig.vectors.column(c);
            let z = (v.adjoint() * u * v)[(0, 0)];
            (wrap_phase(z.arg()), c)
        })
        .collect();
    tagged.sort_by(|a, b| a.0.total_cmp(&b.0));
    let sorted: Vec<f64> = tagged.iter().map(|t| t.0).collect();

    let mut spectrum = Spectrum {
        phases: Vec::new(),
        projectors: Vec::new(),
        multiplicities: Vec::new(),
    };
    for g in cluster_sorted(&sorted, PHASE_CLUSTER_TOL) {
        let mut p = CMatrix::zeros(d, d);
        let mut mean = C64::new(0.0, 0.0);
        for &(t, c) in &tagged[g.clone()] {
            let v = eig.vectors.column(c);
            p += v * v.adjoint();
            mean += C64::from_polar(1.0, t);
        }
        spectrum.phases.push(wrap_phase(mean.arg()));
        spectrum.projectors.push(p);
        spectrum.multiplicities.push(g.len());
    }
    let error = spectrum
        .phases
        .iter()
        .zip(&spectrum.projectors)
        .map(|(&t, p)| linalg::max_abs(&(u * p - p * C64::from_polar(1.0, t))))
        .fold(0.0, f64::max);
    (spectrum, error)
}

/// Eigenphases in `(-π, π]` with clustered degenerate projectors.
pub fn unitary_spectrum(u: &CMatrix) -> Spectrum {
    // Irrational mixing weights; a second one is only needed when two distinct
    // phases land on the same eigenvalue of the Hermitian surrogate.
    const MIXES: [f64; 4] = [
        0.577_215_664_901_532_9,
        std::f64::consts::SQRT_2,
        0.302_775_637_731_995,
        std::f64::consts::E,
    ];
    let mut best: Option<(Spectrum, f64)> = None;
    for mix in MIXES {
        let (s, err) = try_spectrum(u, mix);
        if err <= 1e-9 {
            return s;
        }
        if best.as_ref().is_none_or(|b| err < b.1) {
            best = Some((s, err));
        }
    }
    best.expect("at least one attempt").0
}

fn permutation_gate(name: &str, n: usize, map: impl Fn(usize) -> usize) -> GateTarget {
    let d = 1 << n;
    let mut m = CMatrix::zeros(d, d);
    for k in 0..d {
        m[(map(k), k)] = C64::new(1.0, 0.0);
    }
    GateTarget::new(name, m).expect("permutation matrices are unitary")
}

fn bit(k: usize, n: usize, qubit: usize) -> usize {
    (k >> (n - qubit)) & 1
}

fn swap_bits(k: usize, n: usize, a: usize, b: usize) -> usize {
    if bit(k, n, a) == bit(k, n, b) {
        k
    } else {
        k ^ (1 << (n - a)) ^ (1 << (n - b))
    }
}

pub fn cnot() -> GateTarget {
    permutation_gate("cnot", 2, |k| if bit(k, 2, 1) == 1 { k ^ 1 } else { k })
}

pub fn toffoli() -> GateTarget {
    permutation_gate(
        "toffoli",
        3,
        |k| if bit(k, 3, 1) & bit(k, 3, 2) == 1 { k ^ 1 } else { k },
    )
}

/// Controlled swap of qubits 2 and 3, controlled by qubit 1.
pub fn fredkin() -> GateTarget {
    permutation_gate(
        "fredkin",
        3,
        |k| if bit(k, 3, 1) == 1 { swap_bits(k, 3, 2, 3) } else { k },
    )
}

/// `Y` on qubit 3 when qubits 1 and 2 are both set.
pub fn ccy() -> GateTarget {
    let mut m = CMatrix::identity(8, 8);
    m[(6, 6)] = C64::new(0.0, 0.0);
    m[(7, 7)] = C64::new(0.0, 0.0);
    m[(7, 6)] = C64::new(0.0, 1.0);
    m[(6, 7)] = C64::new(0.0, -1.0);
    GateTarget::new("ccy", m).expect("ccy is unitary")
}

/// Qubit 1 selects the block: when 0, qubit 2 controls a swap of qubits 3 and 4;
/// when 1, qubit 4 controls a swap of qubits 2 and 3.
pub fn double_fredkin() -> GateTarget {
    permutation_gate("double_fredkin", 4, |k| {
        match (bit(k, 4, 1), bit(k, 4, 2), bit(k, 4, 4)) {
            (0, 1, _) => swap_bits(k, 4, 3, 4),
            (1, _, 1) => swap_bits(k, 4, 2, 3),
            _ => k,
        }
    })
}

pub fn identity(n_qubits: usize) -> GateTarget {
    permutation_gate(&format!("identity({n_qubits})"), n_qubits, |k| k)
}

/// Anti-diagonal permutation `|j⟩ ↦ |d-1-j⟩` on `d = 2ⁿ` states.
pub fn reflection(n_qubits: usize) -> GateTarget {
    let d = 1usize << n_qubits;
    permutation_gate(&format!("reflection({n_qubits})"), n_qubits, |k| d - 1 - k)
}

const MAX_BUILTIN_QUBITS: usize = 10;

fn parametrized(name: &str, prefix: &str) -> Option<Result<usize>> {
    let rest = name.strip_prefix(prefix)?;
    let arg = rest
        .strip_prefix('(')
        .and_then(|r| r.strip_suffix(')'))
        .or_else(|| rest.strip_prefix(':'))?;
    Some(match arg.trim().parse::<usize>() {
        Ok(n) if (1..=MAX_BUILTIN_QUBITS).contains(&n) => Ok(n),
        _ => Err(Error::UnknownGate(name.to_string())),
    })
}

/// Gate by name: `cnot`, `toffoli`, `fredkin`, `ccy`, `double_fredkin`,
/// `identity(n)` and `reflection(n)` (`identity:n` is accepted too).
pub fn builtin_gate(name: &str) -> Result<GateTarget> {
    let key = name.trim().to_ascii_lowercase();
    match key.as_str() {
        "cnot" => Ok(cnot()),
        "toffoli" => Ok(toffoli()),
        "fredkin" => Ok(fredkin()),
        "ccy" => Ok(ccy()),
        "double_fredkin" => Ok(double_fredkin()),
        _ => {
            if let Some(n) = parametrized(&key, "identity") {
                return Ok(identity(n?));
            }
            if let Some(n) = parametrized(&key, "reflection") {
                return Ok(reflection(n?));
            }
            Err(Error::UnknownGate(name.to_string()))
        }
    }
}

/// Parses `re+imj`, `re`, `imj`, with optional surrounding parentheses.
pub fn parse_complex(token: &str) -> Result<C64> {
    let bad = || Error::Parse(format!("bad complex entry {token:?}"));
    let t = token.trim().trim_start_matches('(').trim_end_matches(')');
    let Some(body) = t.strip_suffix('j').or_else(|| t.strip_suffix('i')) else {
        return t.parse::<f64>().map(|re| C64::new(re, 0.0)).map_err(|_| bad());
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let parse_im = |s: &str| match s {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        _ => s.parse::<f64>().map_err(|_| bad()),
    };
    match split {
        Some(k) => {
            let re = body[..k].parse::<f64>().map_err(|_| bad())?;
            Ok(C64::new(re, parse_im(&body[k..])?))
        }
        None => Ok(C64::new(0.0, parse_im(body)?)),
    }
}

/// Reads a matrix in the text format: first line `d`, then `d` rows of `d` entries.
pub fn parse_matrix(text: &str) -> Result<CMatrix> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let d: usize = lines
        .next()
        .ok_or_else(|| Error::Parse("empty matrix file".into()))?
        .parse()
        .map_err(|_| Error::Parse("first line must be the dimension".into()))?;
    let mut entries = Vec::with_capacity(d * d);
    for r in 0..d {
        let line = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("missing row {}", r + 1)))?;
        let row = line.split_whitespace().map(parse_complex).collect::<Result<Vec<_>>>()?;
        if row.len() != d {
            return Err(Error::Parse(format!(
                "row {} has {} entries, expected {d}",
                r + 1,
                row.len()
            )));
        }
        entries.extend(row);
    }
    if lines.next().is_some() {
        return Err(Error::Parse("trailing data after matrix".into()));
    }
    Ok(CMatrix::from_row_slice(d, d, &entries))
}

/// Formats a matrix in the text format read by [`parse_matrix`].
pub fn format_matrix(m: &CMatrix) -> String {
    let mut out = format!("{}\n", m.nrows());
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .map(|c| format!("{}{:+}j", m[(r, c)].re, m[(r, c)].im))
            .collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

/// Loads and validates a gate from a matrix file; the gate is named after the file stem.
pub fn gate_from_file(path: impl AsRef<Path>) -> Result<GateTarget> {
    let path = path.as_ref();
    let matrix = parse_matrix(&std::fs::read_to_string(path)?)?;
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("custom");
    GateTarget::new(name, matrix)
}
