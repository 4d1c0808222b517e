// Copyright 2026 The gateforge Authors
// SPDX-License-Identifier: Apache-2.0

//! Mini-batch stochastic gradient ascent with momentum on the per-state
//! fidelity, over Haar-random input states.

use std::fmt::Write as _;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diffexp::{average_gate_fidelity_of, haar_state, HamiltonianModel, Propagator, StateVector};
use crate::gates::GateTarget;
use crate::pauli::{standard_bases, BasisFamily, OperatorBasis, PauliSum};
use crate::spectral::{commutant_restrict, principal_generator};
use crate::{CMatrix, Error, Result};

/// Starting point for `λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    Zeros,
    Constant(f64),
    Gaussian(f64),
}

impl FromStr for Init {
    type Err = Error;

    /// `zeros`, `constant:c` or `gaussian:σ`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidConfig(format!("bad init {s:?}; expected zeros, constant:c or gaussian:s"));
        let (kind, arg) = s.trim().split_once(':').map_or((s.trim(), None), |(k, a)| (k, Some(a)));
        let value = || arg.ok_or_else(bad)?.trim().parse::<f64>().map_err(|_| bad());
        let init = match kind.to_ascii_lowercase().as_str() {
            "zeros" | "zero" if arg.is_none() => Init::Zeros,
            "constant" => Init::Constant(value()?),
            "gaussian" => Init::Gaussian(value()?),
            _ => return Err(bad()),
        };
        match init {
            Init::Constant(c) if !c.is_finite() => Err(bad()),
            Init::Gaussian(s) if !(s.is_finite() && s >= 0.0) => Err(bad()),
            other => Ok(other),
        }
    }
}

impl std::fmt::Display for Init {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Init::Zeros => write!(f, "zeros"),
            Init::Constant(c) => write!(f, "constant:{c}"),
            Init::Gaussian(s) => write!(f, "gaussian:{s}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub gate: GateTarget,
    pub basis_family: BasisFamily,
    pub reduce_by_commutant: bool,
    pub eta0: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub batch_size: usize,
    pub states_per_epoch: usize,
    pub max_epochs: usize,
    pub target_fidelity: f64,
    pub seed: u64,
    pub init: Init,
    /// Epochs over which the average gate fidelity must improve.
    pub stagnation_window: usize,
    /// Minimum improvement over the window before the run is abandoned.
    pub stagnation_tol: f64,
}

impl TrainConfig {
    /// Defaults: `η₀ = 1`, `γ = 0.5`, `α = 0.005`, `N_b = 2`, `N_tr = 200`,
    /// 2000 epochs, target `1 - 1e-6`, every `λᵢ` starting at 2.
    pub fn new(gate: GateTarget, basis_family: BasisFamily) -> Self {
        Self {
            gate,
            basis_family,
            reduce_by_commutant: true,
            eta0: 1.0,
            gamma: 0.5,
            alpha: 0.005,
            batch_size: 2,
            states_per_epoch: 200,
            max_epochs: 2000,
            target_fidelity: 1.0 - 1e-6,
            seed: 0,
            init: Init::Constant(2.0),
            stagnation_window: 50,
            stagnation_tol: 1e-12,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.eta0.is_finite() && self.eta0 > 0.0) {
            return bad(format!("eta0 must be positive, got {}", self.eta0));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return bad(format!("gamma must lie in [0, 1), got {}", self.gamma));
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return bad(format!("alpha must be non-negative, got {}", self.alpha));
        }
        if self.batch_size == 0 || self.states_per_epoch == 0 || self.max_epochs == 0 {
            return bad("batch size, states per epoch and epochs must be positive".into());
        }
        if !self.states_per_epoch.is_multiple_of(self.batch_size) {
            return bad(format!(
                "states per epoch ({}) must be a multiple of the batch size ({})",
                self.states_per_epoch, self.batch_size
            ));
        }
        if !(self.target_fidelity > 0.0 && self.target_fidelity <= 1.0) {
            return bad(format!(
                "target fidelity must lie in (0, 1], got {}",
                self.target_fidelity
            ));
        }
        if self.stagnation_window == 0 {
            return bad("stagnation window must be positive".into());
        }
        Ok(())
    }

    /// `η_k = η₀ / (1 + kα)` for epoch `k`.
    pub fn learning_rate(&self, epoch: usize) -> f64 {
        self.eta0 / (1.0 + epoch as f64 * self.alpha)
    }
}

/// The ansatz basis for a configuration, reduced to the commutant of the
/// principal generator when requested.
pub fn search_basis(gate: &GateTarget, family: BasisFamily, reduce: bool) -> Result<OperatorBasis> {
    let basis = standard_bases(gate.n_qubits(), family)?;
    if !reduce {
        return Ok(basis);
    }
    let reduced = commutant_restrict(&basis, &principal_generator(gate))?;
    if reduced.is_empty() {
        return Err(Error::EmptyBasis);
    }
    Ok(reduced)
}

fn initial_lambda(init: Init, len: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    match init {
        Init::Zeros => vec![0.0; len],
        Init::Constant(c) => vec![c; len],
        Init::Gaussian(s) => {
            let normal = Normal::new(0.0, s).expect("σ validated");
            (0..len).map(|_| normal.sample(rng)).collect()
        }
    }
}

/// Basis and initial `λ`; the RNG is advanced by the initialization.
fn search_space_with_rng(cfg: &TrainConfig, rng: &mut ChaCha8Rng) -> Result<HamiltonianModel> {
    cfg.validate()?;
    let basis = search_basis(&cfg.gate, cfg.basis_family, cfg.reduce_by_commutant)?;
    let lambda = initial_lambda(cfg.init, basis.len(), rng);
    HamiltonianModel::new(basis, lambda)
}

/// Basis and initial `λ` for `cfg`, drawn from the run's seed.
pub fn build_search_space(cfg: &TrainConfig) -> Result<HamiltonianModel> {
    search_space_with_rng(cfg, &mut ChaCha8Rng::seed_from_u64(cfg.seed))
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub lambda: Vec<f64>,
    pub velocity: Vec<f64>,
    pub mean_fidelity: f64,
    pub mean_gradient: Vec<f64>,
}

/// One momentum update: `v ← γv + η ḡ`, `λ ← λ + v`, with `ḡ` the gradient
/// averaged over `batch`.
pub fn sgd_step(
    basis: &OperatorBasis,
    gate: &CMatrix,
    lambda: &[f64],
    velocity: &[f64],
    batch: &[StateVector],
    eta: f64,
    gamma: f64,
) -> Result<StepOutcome> {
    if batch.is_empty() {
        return Err(Error::InvalidConfig("empty batch".into()));
    }
    if eta.is_nan() || eta <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "learning rate must be positive, got {eta}"
        )));
    }
    if velocity.len() != lambda.len() {
        return Err(Error::DimensionMismatch {
            expected: lambda.len(),
            found: velocity.len(),
        });
    }
    let prop = Propagator::new(&basis.combine(lambda)?);
    let (mean_fidelity, mean_gradient) = prop.batch_gradient(basis.matrices(), gate, batch);
    if mean_gradient.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFinite("gradient"));
    }
    let velocity: Vec<f64> = velocity
        .iter()
        .zip(&mean_gradient)
        .map(|(v, g)| gamma * v + eta * g)
        .collect();
    let lambda: Vec<f64> = lambda.iter().zip(&velocity).map(|(l, v)| l + v).collect();
    if lambda.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("lambda"));
    }
    Ok(StepOutcome {
        lambda,
        velocity,
        mean_fidelity,
        mean_gradient,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub mean_batch_fidelity: f64,
    pub avg_gate_fidelity: f64,
}

#[derive(Debug, Clone)]
pub struct TrainingRun {
    pub config: TrainConfig,
    pub basis: OperatorBasis,
    pub lambda_initial: Vec<f64>,
    pub lambda_final: Vec<f64>,
    pub velocity_final: Vec<f64>,
    pub history: Vec<EpochRecord>,
    pub epochs_used: usize,
    pub converged: bool,
    /// Average gate fidelity of `lambda_final`.
    pub final_fidelity: f64,
    /// Parameters with the highest average gate fidelity seen at an epoch boundary.
    pub lambda_best: Vec<f64>,
    pub best_fidelity: f64,
}

impl TrainingRun {
    /// History as `epoch,mean_batch_fidelity,avg_gate_fidelity` CSV.
    pub fn history_csv(&self) -> String {
        let mut out = String::from("epoch,mean_batch_fidelity,avg_gate_fidelity\n");
        for r in &self.history {
            let _ = writeln!(
                out,
                "{},{:.17e},{:.17e}",
                r.epoch, r.mean_batch_fidelity, r.avg_gate_fidelity
            );
        }
        out
    }
}

fn gate_fidelity(basis: &OperatorBasis, lambda: &[f64], gate: &CMatrix) -> Result<f64> {
    Ok(average_gate_fidelity_of(
        Propagator::new(&basis.combine(lambda)?).unitary(),
        gate,
    ))
}

/// Runs the training loop; bit-for-bit reproducible from `cfg.seed`.
pub fn train(cfg: &TrainConfig) -> Result<TrainingRun> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let model = search_space_with_rng(cfg, &mut rng)?;
    let basis = model.basis().clone();
    let gate = cfg.gate.matrix();
    let n = cfg.gate.n_qubits();
    let lambda_initial = model.lambda().to_vec();
    let mut lambda = lambda_initial.clone();
    let mut velocity = vec![0.0; lambda.len()];
    let mut history: Vec<EpochRecord> = Vec::new();
    let mut fid = gate_fidelity(&basis, &lambda, gate)?;
    let mut converged = fid >= cfg.target_fidelity;
    let mut lambda_best = lambda.clone();
    let mut best_fidelity = fid;
    let steps = cfg.states_per_epoch / cfg.batch_size;
    // Running best average gate fidelity, one entry per epoch.
    let mut best: Vec<f64> = Vec::new();

    let mut epoch = 0;
    while !converged && epoch < cfg.max_epochs {
        let eta = cfg.learning_rate(epoch);
        let mut batch_sum = 0.0;
        for _ in 0..steps {
            let batch: Vec<StateVector> = (0..cfg.batch_size).map(|_| haar_state(n, &mut rng)).collect();
            let out = sgd_step(&basis, gate, &lambda, &velocity, &batch, eta, cfg.gamma)?;
            batch_sum += out.mean_fidelity;
            lambda = out.lambda;
            velocity = out.velocity;
        }
        fid = gate_fidelity(&basis, &lambda, gate)?;
        history.push(EpochRecord {
            epoch: epoch + 1,
            mean_batch_fidelity: batch_sum / steps as f64,
            avg_gate_fidelity: fid,
        });
        epoch += 1;
        converged = fid >= cfg.target_fidelity;
        if fid > best_fidelity {
            best_fidelity = fid;
            lambda_best.clone_from(&lambda);
        }
        best.push(best.last().map_or(fid, |b: &f64| b.max(fid)));
        if !converged
            && epoch > cfg.stagnation_window
            && best[epoch - 1] - best[epoch - 1 - cfg.stagnation_window] < cfg.stagnation_tol
        {
            break;
        }
    }
    Ok(TrainingRun {
        config: cfg.clone(),
        basis,
        lambda_initial,
        lambda_final: lambda,
        velocity_final: velocity,
        epochs_used: history.len(),
        history,
        converged,
        final_fidelity: fid,
        lambda_best,
        best_fidelity,
    })
}

/// Seed of restart `index` derived from a master seed (SplitMix64 step).
pub fn restart_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(0x9e37_79b9_7f4a_7c15_u64.wrapping_mul(index + 1));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent runs with seeds derived from `cfg.seed`, executed in parallel
/// on the current rayon pool. Results are in restart order.
pub fn multi_start(cfg: &TrainConfig, restarts: usize) -> Result<Vec<TrainingRun>> {
    cfg.validate()?;
    (0..restarts as u64)
        .into_par_iter()
        .map(|r| {
            let mut c = cfg.clone();
            c.seed = restart_seed(cfg.seed, r);
            train(&c)
        })
        .collect()
}

/// Shifts `λ` along the identity so that `exp(iH(λ))` matches `G` including
/// its global phase, which the fidelity cannot see. Returns `λ` unchanged when
/// the identity is not in the span.
pub fn align_global_phase(basis: &OperatorBasis, lambda: &[f64], gate: &CMatrix) -> Result<Vec<f64>> {
    let Some(id) = basis.identity_coordinates() else {
        return Ok(lambda.to_vec());
    };
    let u = Propagator::new(&basis.combine(lambda)?).unitary().clone();
    let overlap = crate::linalg::hs_inner(gate, &u);
    if overlap.norm() < 1e-12 {
        return Ok(lambda.to_vec());
    }
    let phase = overlap.arg();
    Ok(lambda.iter().zip(&id).map(|(l, c)| l - phase * c).collect())
}

/// Parameter variation for [`sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMode {
    /// `λ ↦ αλ`.
    GlobalScale,
    /// `λᵢ ↦ x`, other entries fixed.
    SingleParam(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub grid_value: f64,
    pub state_index: usize,
    pub fidelity: f64,
}

/// Evenly spaced grid including both ends.
pub fn grid(lo: f64, hi: f64, n_points: usize) -> Vec<f64> {
    match n_points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n_points)
            .map(|k| lo + (hi - lo) * k as f64 / (n_points - 1) as f64)
            .collect(),
    }
}

/// Fidelity of every test state at every grid point.
pub fn sweep(
    basis: &OperatorBasis,
    lambda: &[f64],
    gate: &GateTarget,
    mode: SweepMode,
    range: (f64, f64),
    n_points: usize,
    test_states: &[StateVector],
) -> Result<Vec<SweepRow>> {
    if lambda.len() != basis.len() {
        return Err(Error::DimensionMismatch {
            expected: basis.len(),
            found: lambda.len(),
        });
    }
    if let SweepMode::SingleParam(i) = mode {
        if i >= lambda.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: lambda.len(),
            });
        }
    }
    if let Some(s) = test_states.iter().find(|s| s.dim() != gate.dim()) {
        return Err(Error::DimensionMismatch {
            expected: gate.dim(),
            found: s.dim(),
        });
    }
    let rows = grid(range.0, range.1, n_points)
        .into_par_iter()
        .map(|x| {
            let params: Vec<f64> = match mode {
                SweepMode::GlobalScale => lambda.iter().map(|l| l * x).collect(),
                SweepMode::SingleParam(i) => {
                    let mut p = lambda.to_vec();
                    p[i] = x;
                    p
                }
            };
            let prop = Propagator::new(&basis.combine(&params)?);
            Ok(test_states
                .iter()
                .enumerate()
                .map(|(state_index, s)| SweepRow {
                    grid_value: x,
                    state_index,
                    fidelity: prop.fidelity(gate.matrix(), s.amplitudes()),
                })
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(rows.into_iter().flatten().collect())
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("grid_value,state_index,fidelity\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{:.17e}", r.grid_value, r.state_index, r.fidelity);
    }
    out
}

/// Serialized Hamiltonian `Σ λᵢ Oᵢ` with training metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub gate: String,
    pub basis_family: String,
    pub reduced: bool,
    /// Each element as a list of `"c * LABEL"` terms.
    pub basis: Vec<Vec<String>>,
    pub lambda: Vec<f64>,
    pub avg_fidelity: f64,
    pub seed: Option<u64>,
    pub epochs: usize,
}

impl Solution {
    /// Best parameters of a finished run, with the global phase aligned to the gate.
    pub fn from_run(run: &TrainingRun) -> Result<Self> {
        let gate = run.config.gate.matrix();
        let lambda = align_global_phase(&run.basis, &run.lambda_best, gate)?;
        Ok(Self {
            gate: run.config.gate.name().to_string(),
            basis_family: run.config.basis_family.to_string(),
            reduced: run.config.reduce_by_commutant,
            basis: run.basis.elements().iter().map(PauliSum::to_strings).collect(),
            avg_fidelity: gate_fidelity(&run.basis, &lambda, gate)?,
            lambda,
            seed: Some(run.config.seed),
            epochs: run.epochs_used,
        })
    }

    /// One basis element per Pauli term, `λ` holding the coefficients.
    pub fn from_pauli_sum(gate: &GateTarget, basis_family: &str, h: &PauliSum) -> Result<Self> {
        let basis = h
            .terms()
            .iter()
            .map(|t| vec![t.with_coefficient(1.0).to_string()])
            .collect();
        let lambda = h.terms().iter().map(|t| t.coefficient()).collect();
        Ok(Self {
            gate: gate.name().to_string(),
            basis_family: basis_family.to_string(),
            reduced: false,
            basis,
            avg_fidelity: average_gate_fidelity_of(&crate::linalg::expi_hermitian(&h.dense(), 1.0), gate.matrix()),
            lambda,
            seed: None,
            epochs: 0,
        })
    }

    pub fn operator_basis(&self) -> Result<OperatorBasis> {
        let elements = self
            .basis
            .iter()
            .map(|e| PauliSum::parse_terms(e))
            .collect::<Result<Vec<_>>>()?;
        let n = elements.first().map(PauliSum::n_qubits).ok_or(Error::EmptyBasis)?;
        OperatorBasis::new(n, elements)
    }

    pub fn hamiltonian(&self) -> Result<CMatrix> {
        self.operator_basis()?.combine(&self.lambda)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates;

    #[test]
    fn init_parsing() {
        assert_eq!("zeros".parse::<Init>().unwrap(), Init::Zeros);
        assert_eq!("constant:4".parse::<Init>().unwrap(), Init::Constant(4.0));
        assert_eq!("gaussian:0.5".parse::<Init>().unwrap(), Init::Gaussian(0.5));
        assert!("gaussian:-1".parse::<Init>().is_err());
        assert!("uniform:1".parse::<Init>().is_err());
        assert!("constant".parse::<Init>().is_err());
    }

    #[test]
    fn config_validation() {
        let mut cfg = TrainConfig::new(gates::toffoli(), BasisFamily::DiagonalPairwise);
        assert!(cfg.validate().is_ok());
        cfg.batch_size = 3;
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))));
        cfg.batch_size = 2;
        cfg.gamma = 1.0;
        assert!(cfg.validate().is_err());
        cfg.gamma = 0.5;
        cfg.eta0 = 0.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn schedule_decreases() {
        let cfg = TrainConfig::new(gates::cnot(), BasisFamily::OneLocal);
        assert_eq!(cfg.learning_rate(0), 1.0);
        assert!((cfg.learning_rate(200) - 0.5).abs() < 1e-15);
        assert!(cfg.learning_rate(11) < cfg.learning_rate(10));
    }

    #[test]
    fn constant_init() {
        let mut cfg = TrainConfig::new(gates::toffoli(), BasisFamily::DiagonalPairwise);
        cfg.init = Init::Constant(4.0);
        assert!(build_search_space(&cfg).unwrap().lambda().iter().all(|&l| l == 4.0));
        cfg.init = Init::Zeros;
        assert!(build_search_space(&cfg).unwrap().lambda().iter().all(|&l| l == 0.0));
    }

    #[test]
    fn grid_endpoints() {
        assert_eq!(grid(0.9, 1.1, 3), vec![0.9, 1.0, 1.1]);
        assert_eq!(grid(2.0, 5.0, 1), vec![2.0]);
    }

    #[test]
    fn restart_seeds_differ() {
        let s: std::collections::HashSet<u64> = (0..100).map(|i| restart_seed(7, i)).collect();
        assert_eq!(s.len(), 100);
    }
}
