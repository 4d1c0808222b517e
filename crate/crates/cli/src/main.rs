// Copyright 2026 The gateforge Authors
// SPDX-License-Identifier: Apache-2.0

//! `gateforge`: verify, train, sweep and scan gate-generating Hamiltonians.
//!
//! Exit status: 0 on success, 1 when a check fails or training does not
//! converge, 2 on usage or input errors.

mod output;

use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use gateforge::diffexp::seeded_states;
use gateforge::gates::{self, GateTarget};
use gateforge::pauli::{standard_bases, BasisFamily};
use gateforge::pst::{self, WalkChain};
use gateforge::spectral::{self, commutant_restrict, principal_generator};
use gateforge::trainer::{self, Init, Solution, SweepMode, TrainConfig};

use output::OutputDir;

/// Bad invocation or unusable input; exits with status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Parser)]
#[command(
    name = "gateforge",
    version,
    about = "Design Hamiltonians that generate quantum gates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check that exp(iH) reproduces a gate exactly.
    Verify(VerifyArgs),
    /// Learn interaction parameters by stochastic gradient ascent.
    Train(TrainArgs),
    /// Fidelity of a solution under parameter variations, as CSV.
    Sweep(SweepArgs),
    /// Perfect state transfer check for a chain.
    Pst(PstArgs),
    /// Commutant reduction of an ansatz basis.
    Reduce(ReduceArgs),
    /// Search the integer eigenphase labels of a reduced ansatz.
    Scan(ScanArgs),
}

#[derive(Args, Clone)]
struct GateArgs {
    /// Builtin gate: cnot, toffoli, fredkin, ccy, double_fredkin, identity(n), reflection(n).
    #[arg(long, conflicts_with = "gate_file")]
    gate: Option<String>,
    /// Whitespace-separated complex matrix, one row per line.
    #[arg(long, value_name = "PATH")]
    gate_file: Option<PathBuf>,
}

impl GateArgs {
    fn resolve(&self, fallback: Option<&str>) -> Result<GateTarget> {
        if let Some(path) = &self.gate_file {
            return Ok(gates::gate_from_file(path)?);
        }
        match self.gate.as_deref().or(fallback) {
            Some(name) => Ok(gates::builtin_gate(name)?),
            None => Err(UsageError("one of --gate or --gate-file is required".into()).into()),
        }
    }
}

#[derive(Args)]
struct OutArgs {
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Allow writing into a non-empty output directory.
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// Solution JSON.
    solution: PathBuf,
    #[command(flatten)]
    gate: GateArgs,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    gate: GateArgs,
    #[arg(long, default_value = "diagonal_pairwise")]
    basis: String,
    /// Restrict the ansatz to the commutant of the principal generator (default).
    #[arg(long, overrides_with = "no_reduce")]
    reduce: bool,
    #[arg(long, overrides_with = "reduce")]
    no_reduce: bool,
    /// zeros, constant:c or gaussian:s.
    #[arg(long)]
    init: Option<String>,
    #[arg(long)]
    eta0: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    states_per_epoch: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    target_fidelity: Option<f64>,
    #[arg(long, env = "GATEFORGE_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    restarts: usize,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long)]
    jobs: Option<usize>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SweepKind {
    /// Both global grids and every single-parameter grid.
    All,
    /// λ ↦ αλ.
    Global,
    /// One λᵢ varied, the rest fixed.
    Single,
}

#[derive(Args)]
struct SweepArgs {
    /// Solution JSON.
    solution: PathBuf,
    #[command(flatten)]
    gate: GateArgs,
    #[arg(long, value_enum, default_value_t = SweepKind::All)]
    mode: SweepKind,
    /// Grid as lo:hi, replacing the default ranges of the chosen mode.
    #[arg(long, value_parser = parse_range)]
    range: Option<(f64, f64)>,
    #[arg(long, default_value_t = 201)]
    points: usize,
    /// Parameter index for --mode single; all parameters when omitted.
    #[arg(long)]
    param: Option<usize>,
    #[arg(long, default_value_t = 5)]
    states: usize,
    #[arg(long, env = "GATEFORGE_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    jobs: Option<usize>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct PstArgs {
    /// Chain JSON with fields N, J and B.
    #[arg(conflicts_with_all = ["engineered", "uniform"])]
    chain: Option<PathBuf>,
    /// Chain with J_k = sqrt(k(N-k)) and no fields.
    #[arg(long, value_name = "N", conflicts_with = "uniform")]
    engineered: Option<usize>,
    /// Chain with unit couplings and no fields.
    #[arg(long, value_name = "N")]
    uniform: Option<usize>,
    #[arg(long, default_value_t = FRAC_PI_2)]
    time: f64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct ReduceArgs {
    #[command(flatten)]
    gate: GateArgs,
    #[arg(long)]
    basis: String,
}

#[derive(Args)]
struct ScanArgs {
    #[command(flatten)]
    gate: GateArgs,
    #[arg(long)]
    basis: String,
    #[arg(long, default_value_t = 5)]
    nu_max: i64,
    /// Scan the full basis instead of its commutant.
    #[arg(long)]
    no_reduce: bool,
    #[command(flatten)]
    out: OutArgs,
}

fn parse_range(s: &str) -> std::result::Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| format!("expected lo:hi, got {s:?}"))?;
    let lo: f64 = lo.trim().parse().map_err(|_| format!("bad lower bound {lo:?}"))?;
    let hi: f64 = hi.trim().parse().map_err(|_| format!("bad upper bound {hi:?}"))?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(format!("need finite lo < hi, got {s:?}"));
    }
    Ok((lo, hi))
}

fn parse_family(s: &str) -> Result<BasisFamily> {
    Ok(s.parse::<BasisFamily>()?)
}

fn read_solution(path: &Path) -> Result<Solution> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Solution::from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

fn init_pool(jobs: Option<usize>) -> Result<()> {
    if let Some(j) = jobs {
        if j == 0 {
            return Err(UsageError("--jobs must be positive".into()).into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(j).build_global()?;
    }
    Ok(())
}

fn verify(args: VerifyArgs) -> Result<bool> {
    let sol = read_solution(&args.solution)?;
    let gate = args.gate.resolve(Some(&sol.gate))?;
    let h = sol.hamiltonian()?;
    let report = spectral::verify_solution(&h, &gate, args.tol)?;
    println!("gate: {}", gate.name());
    println!(
        "commutes: {} (max |[H, H_G]| = {:.3e})",
        report.verdicts.commutes, report.commutator_norm
    );
    println!(
        "eigenphases on 2πZ: {} (max residual {:.3e})",
        report.verdicts.eigenphases_on_lattice,
        report.max_residual()
    );
    println!(
        "reproduces gate: {} (max error {:.3e})",
        report.verdicts.reproduces_gate, report.unitary_error
    );
    let labels: Vec<String> = report.lattice_indices.iter().map(|n| n.to_string()).collect();
    println!("lattice labels: [{}]", labels.join(", "));
    if let Some(w) = report.max_interaction_weight {
        println!("max interaction weight: {w}");
    }
    println!("verified: {}", report.passed());
    if let Some(dir) = &args.out.out {
        let out = OutputDir::prepare(dir, args.out.force)?;
        out.write("report.json", &serde_json::to_string_pretty(&report)?)?;
        out.commit()?;
    }
    Ok(report.passed())
}

fn train_config(args: &TrainArgs) -> Result<TrainConfig> {
    let gate = args.gate.resolve(None)?;
    let mut cfg = TrainConfig::new(gate, parse_family(&args.basis)?);
    cfg.reduce_by_commutant = !args.no_reduce;
    if let Some(init) = &args.init {
        cfg.init = init.parse::<Init>()?;
    }
    macro_rules! set {
        ($($field:ident <- $arg:ident),*) => { $(if let Some(v) = args.$arg { cfg.$field = v; })* };
    }
    set!(eta0 <- eta0, gamma <- gamma, alpha <- alpha, batch_size <- batch_size,
         states_per_epoch <- states_per_epoch, max_epochs <- epochs, target_fidelity <- target_fidelity);
    cfg.seed = args.seed;
    cfg.validate()?;
    if args.restarts == 0 {
        return Err(UsageError("--restarts must be positive".into()).into());
    }
    Ok(cfg)
}

fn train(args: TrainArgs) -> Result<bool> {
    let cfg = train_config(&args)?;
    let out = match &args.out.out {
        Some(dir) => Some(OutputDir::prepare(dir, args.out.force)?),
        None => None,
    };
    init_pool(args.jobs)?;
    let basis = trainer::search_basis(&cfg.gate, cfg.basis_family, cfg.reduce_by_commutant)?;
    println!(
        "gate {} / basis {}{}: {} parameters, init {}",
        cfg.gate.name(),
        cfg.basis_family,
        if cfg.reduce_by_commutant { " (reduced)" } else { "" },
        basis.len(),
        cfg.init
    );
    let runs = trainer::multi_start(&cfg, args.restarts)?;

    let width = (args.restarts - 1).to_string().len().max(2);
    let mut summary = String::from("restart,seed,epochs,converged,final_fidelity,best_fidelity\n");
    let mut any_converged = false;
    for (r, run) in runs.iter().enumerate() {
        let converged = run.best_fidelity >= cfg.target_fidelity;
        any_converged |= converged;
        println!(
            "restart {r:>w$}: epochs {:>5}  best 1-F = {:.3e}{}",
            run.epochs_used,
            1.0 - run.best_fidelity,
            if converged { "  converged" } else { "" },
            w = width
        );
        let _ = writeln!(
            summary,
            "{r},{},{},{converged},{:.17e},{:.17e}",
            run.config.seed, run.epochs_used, run.final_fidelity, run.best_fidelity
        );
        if let Some(out) = &out {
            out.write(
                &format!("solution_{r:0width$}.json"),
                &Solution::from_run(run)?.to_json()?,
            )?;
            out.write(&format!("history_{r:0width$}.csv"), &run.history_csv())?;
        }
    }
    let best = runs.iter().map(|r| r.best_fidelity).fold(f64::NEG_INFINITY, f64::max);
    println!("best average gate fidelity: {best:.15}");
    if let Some(out) = out {
        out.write("summary.csv", &summary)?;
        let manifest = json!({
            "subcommand": "train",
            "gate": cfg.gate.name(),
            "gate_file": args.gate.gate_file,
            "basis": cfg.basis_family.to_string(),
            "reduce": cfg.reduce_by_commutant,
            "parameters": basis.len(),
            "init": cfg.init.to_string(),
            "eta0": cfg.eta0,
            "gamma": cfg.gamma,
            "alpha": cfg.alpha,
            "batch_size": cfg.batch_size,
            "states_per_epoch": cfg.states_per_epoch,
            "epochs": cfg.max_epochs,
            "target_fidelity": cfg.target_fidelity,
            "seed": cfg.seed,
            "restarts": args.restarts,
        });
        out.write("manifest.json", &serde_json::to_string_pretty(&manifest)?)?;
        let dir = out.commit()?;
        println!("wrote {}", dir.display());
    }
    Ok(any_converged)
}

fn sweep(args: SweepArgs) -> Result<bool> {
    let sol = read_solution(&args.solution)?;
    let gate = args.gate.resolve(Some(&sol.gate))?;
    let basis = sol.operator_basis()?;
    if basis.dim() != gate.dim() {
        return Err(UsageError(format!(
            "solution acts on dimension {}, gate on {}",
            basis.dim(),
            gate.dim()
        ))
        .into());
    }
    if args.points < 2 {
        return Err(UsageError("--points must be at least 2".into()).into());
    }
    if let Some(i) = args.param {
        if i >= sol.lambda.len() {
            return Err(UsageError(format!("--param {i} out of range for {} parameters", sol.lambda.len())).into());
        }
    }
    let dir = args
        .out
        .out
        .as_ref()
        .ok_or_else(|| UsageError("sweep requires --out".into()))?;
    let out = OutputDir::prepare(dir, args.out.force)?;
    init_pool(args.jobs)?;
    let states = seeded_states(gate.n_qubits(), args.states, args.seed);

    let mut grids: Vec<(String, SweepMode, (f64, f64))> = Vec::new();
    let singles = |grids: &mut Vec<_>, range| {
        let params: Vec<usize> = args.param.map_or_else(|| (0..sol.lambda.len()).collect(), |i| vec![i]);
        for i in params {
            grids.push((format!("param_{i}.csv"), SweepMode::SingleParam(i), range));
        }
    };
    match (args.mode, args.range) {
        (SweepKind::Global, Some(r)) => grids.push(("global.csv".into(), SweepMode::GlobalScale, r)),
        (SweepKind::Single, Some(r)) => singles(&mut grids, r),
        (SweepKind::Single, None) => singles(&mut grids, (-10.0, 10.0)),
        (SweepKind::All, Some(_)) => return Err(UsageError("--range needs --mode global or single".into()).into()),
        (kind, None) => {
            grids.push(("global_0.9_1.1.csv".into(), SweepMode::GlobalScale, (0.9, 1.1)));
            grids.push(("global_0_1.2.csv".into(), SweepMode::GlobalScale, (0.0, 1.2)));
            if kind == SweepKind::All {
                singles(&mut grids, (-10.0, 10.0));
            }
        }
    }
    for (name, mode, range) in &grids {
        let rows = trainer::sweep(&basis, &sol.lambda, &gate, *mode, *range, args.points, &states)?;
        out.write(name, &trainer::sweep_csv(&rows))?;
        println!("{name}: {} rows", rows.len());
    }
    let manifest = json!({
        "subcommand": "sweep",
        "solution": args.solution,
        "gate": gate.name(),
        "points": args.points,
        "states": args.states,
        "seed": args.seed,
        "files": grids.iter().map(|g| g.0.clone()).collect::<Vec<_>>(),
    });
    out.write("manifest.json", &serde_json::to_string_pretty(&manifest)?)?;
    let dir = out.commit()?;
    println!("wrote {}", dir.display());
    Ok(true)
}

fn pst_cmd(args: PstArgs) -> Result<bool> {
    let chain = match (&args.chain, args.engineered, args.uniform) {
        (Some(path), _, _) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            WalkChain::from_json(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        (None, Some(n), _) => WalkChain::engineered(n)?,
        (None, None, Some(n)) => WalkChain::uniform(n, 1.0)?,
        _ => return Err(UsageError("give a chain file, --engineered N or --uniform N".into()).into()),
    };
    if !args.time.is_finite() {
        return Err(UsageError("--time must be finite".into()).into());
    }
    if !pst::mirror_symmetric(&chain) {
        println!(
            "mirror symmetric: false (max |[H_W, Ξ]| = {:.3e})",
            pst::mirror_deviation(&chain)
        );
        println!("transfers: false");
        return Ok(false);
    }
    let report = pst::pst_check(&chain, args.time)?;
    let design = pst::pst_as_gate_design(&chain, args.time)?;
    println!("N = {}, t = {}", chain.n, args.time);
    println!(
        "max |exp(-itH) - e^(iφ)Ξ| = {:.3e}, φ = {:.6}",
        report.unitary_error, report.phase
    );
    if let Some(d) = design.commutant_dimension {
        println!("mirror-symmetric parameters: {d}");
    }
    println!("transfers: {}", report.transfers);
    if let Some(dir) = &args.out.out {
        let out = OutputDir::prepare(dir, args.out.force)?;
        out.write("pst_report.json", &serde_json::to_string_pretty(&report)?)?;
        out.write("gate_design_report.json", &serde_json::to_string_pretty(&design)?)?;
        out.commit()?;
    }
    Ok(report.transfers)
}

fn reduce(args: ReduceArgs) -> Result<bool> {
    let gate = args.gate.resolve(None)?;
    let family = parse_family(&args.basis)?;
    let full = standard_bases(gate.n_qubits(), family)?;
    let reduced = commutant_restrict(&full, &principal_generator(&gate))?;
    println!(
        "gate {} / basis {}: {} -> {}",
        gate.name(),
        family,
        full.len(),
        reduced.len()
    );
    println!("dimension: {}", reduced.len());
    for e in reduced.elements() {
        println!("{e}");
    }
    Ok(true)
}

fn scan(args: ScanArgs) -> Result<bool> {
    let gate = args.gate.resolve(None)?;
    let family = parse_family(&args.basis)?;
    if args.nu_max < 0 {
        return Err(UsageError("--nu-max must be non-negative".into()).into());
    }
    let basis = trainer::search_basis(&gate, family, !args.no_reduce)?;
    let report = spectral::integer_infeasibility_scan(&basis, &gate, args.nu_max)?;
    println!(
        "gate {} / basis {}: {} parameters, ν_max = {}",
        gate.name(),
        family,
        basis.len(),
        args.nu_max
    );
    println!("mode: {:?}", report.mode);
    println!("assignments scanned: {}", report.assignments_scanned);
    for c in &report.constraints {
        println!("constraint: {c}");
    }
    if let Some(c) = &report.obstruction {
        println!("obstruction: {c}");
    }
    if let (Some(nu), Some(r)) = (&report.witness_nu, report.witness_residual) {
        let nu: Vec<String> = nu.iter().map(|v| v.to_string()).collect();
        println!("witness: [{}] (residual {r:.3e})", nu.join(", "));
    }
    println!("feasible: {}", report.feasible);
    if let Some(dir) = &args.out.out {
        let out = OutputDir::prepare(dir, args.out.force)?;
        out.write("scan_report.json", &serde_json::to_string_pretty(&report)?)?;
        out.commit()?;
    }
    Ok(report.feasible)
}

fn exit_status(err: &anyhow::Error) -> u8 {
    use gateforge::Error as E;
    for cause in err.chain() {
        if cause.is::<UsageError>() || cause.is::<std::io::Error>() || cause.is::<serde_json::Error>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::NotMirrorSymmetric { .. }
                | E::ScanTooLarge(_)
                | E::NonFinite(_)
                | E::NonCommuting { .. }
                | E::InvalidAssignment { .. } => 1,
                _ => 2,
            };
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify(a) => verify(a),
        Command::Train(a) => train(a),
        Command::Sweep(a) => sweep(a),
        Command::Pst(a) => pst_cmd(a),
        Command::Reduce(a) => reduce(a),
        Command::Scan(a) => scan(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_status(&e))
        }
    }
}
