// Copyright 2026 The gateforge Authors
// SPDX-License-Identifier: Apache-2.0

//! Time-independent Hamiltonian design for quantum gates.
//!
//! Given a target unitary `G` and a restricted set of interactions, find a
//! Hermitian `H` in the span of those interactions with `exp(iH) = G`. Two
//! routes are provided:
//!
//! * the spectral route ([`spectral`]): compute the principal generator
//!   `H_G`, restrict the ansatz to operators commuting with it, and check that
//!   every eigenvalue of `H - H_G` lies on the lattice `2πℤ`;
//! * the learning route ([`trainer`]): mini-batch stochastic gradient ascent
//!   with momentum on the per-state fidelity over Haar-random inputs, with
//!   exact gradients through the Hermitian eigendecomposition ([`diffexp`]).
//!
//! [`pst`] treats perfect state transfer on a quantum-walk chain as a special
//! case of the same design problem.

pub mod diffexp;
pub mod error;
pub mod gates;
pub mod linalg;
pub mod pauli;
pub mod pst;
pub mod spectral;
pub mod trainer;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<C64>;
/// Dense real matrix.
pub type RMatrix = nalgebra::DMatrix<f64>;
