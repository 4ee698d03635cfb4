//! `spinbound`: figure data as CSV, bound reports and verification suites as
//! JSON.
//!
//! Exit codes: 0 success, 1 a verification suite had failures, 2 usage or
//! validation error, 3 a required oracle did not converge.

mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use spinbound::bounds::{bound_report, chain_sandwich_point, collective_qfi_point, kprod_bounds, pfeuty_constrained_energy};
use spinbound::models::ModelSpec;
use spinbound::oracles::OptimizerConfig;
use spinbound::qcore::{pauli, spin_half, DensityMatrix};
use spinbound::verify::{run_suite, Suite};

use config::{pick, pick_list, FileConfig};

const THREADS_ENV: &str = "SPINBOUND_THREADS";
const MAX_CHAIN_N: usize = 12;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] spinbound::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(spinbound::Error::NonConvergence(_)) => 3,
            _ => 2,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "spinbound", version, about = "Energy bounds for spin models over separable and k-producible states")]
struct Cli {
    /// JSON file with values for any of the flags; command-line flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (overrides SPINBOUND_THREADS; default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file (default: stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomized oracles and suites.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Ground energy of the periodic Ising ring next to its separable upper
    /// bound and skew-information lower bound, over a B_x sweep.
    SweepChain(SweepArgs),
    /// Quantum Fisher information of the collective Ising model's marginal
    /// against its lower bound from the ground energy.
    QfiBound(QfiArgs),
    /// k-producible energy bounds for the Ising ring at fixed ⟨σ_x⟩.
    Kprod(KprodArgs),
    /// Runs a randomized verification suite and prints a JSON report.
    Verify(VerifyArgs),
    /// All bounds that apply to a model given as JSON.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    j: Option<f64>,
    #[arg(long)]
    bx_min: Option<f64>,
    #[arg(long)]
    bx_max: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
}

#[derive(Args, Debug)]
struct QfiArgs {
    /// Particle numbers, comma separated.
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    #[arg(long)]
    j: Option<f64>,
    /// With --bx-max, an absolute field grid shared by all N. Without both,
    /// each N gets B_x = i/steps · J(N−1)/2 for i = 1..=steps.
    #[arg(long)]
    bx_min: Option<f64>,
    #[arg(long)]
    bx_max: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
}

#[derive(Args, Debug)]
struct KprodArgs {
    #[arg(long)]
    n: Option<usize>,
    /// Block sizes, comma separated; each must divide n.
    #[arg(long, value_delimiter = ',')]
    k: Vec<usize>,
    /// Single-site ⟨σ_x⟩ of the marginal (1 + ⟨σ_x⟩σ_x)/2.
    #[arg(long, allow_hyphen_values = true)]
    jx0: Option<f64>,
    #[arg(long)]
    j: Option<f64>,
    /// Marginal as a JSON matrix {dim, re, im}; replaces --jx0.
    #[arg(long)]
    state_file: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// One of tables, roofs, fidelity, saturation, witnesses.
    suite: String,
    #[arg(long)]
    trials: Option<usize>,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// Model JSON {n, d, terms: [{j, h}], b, edges, generators?}.
    #[arg(long)]
    model: PathBuf,
    /// Marginal as a JSON matrix; without it the ground state's averaged
    /// marginal is used.
    #[arg(long)]
    state_file: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn thread_count(flag: Option<usize>, file: Option<usize>) -> Result<Option<usize>, CliError> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| CliError::Usage(format!("{THREADS_ENV}={v:?} is not a thread count"))),
        Err(_) => Ok(file),
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    if let Some(t) = thread_count(cli.threads, file.threads)? {
        if t == 0 {
            return Err(CliError::Usage("thread count must be positive".into()));
        }
        // fails only if a pool already exists, which cannot happen here
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let out = cli.out.clone().or(file.out.clone());
    let seed = pick(cli.seed, file.seed, 0);
    match cli.command {
        Command::SweepChain(a) => sweep_chain(a, &file, out.as_deref()),
        Command::QfiBound(a) => qfi_bound(a, &file, out.as_deref()),
        Command::Kprod(a) => kprod(a, &file, seed, out.as_deref()),
        Command::Verify(a) => verify(a, &file, seed, out.as_deref()),
        Command::Report(a) => report(a, &file, seed, out.as_deref()),
    }
}

/// `steps` points from `lo` to `hi` inclusive.
fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => vec![],
        1 => vec![lo],
        _ => (0..steps).map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64).collect(),
    }
}

fn require_steps(steps: usize) -> Result<(), CliError> {
    if steps == 0 {
        return Err(CliError::Usage("--steps must be positive".into()));
    }
    Ok(())
}

fn read_state(path: &Path) -> Result<DensityMatrix, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("state file {}: {e}", path.display())))
}

fn sweep_chain(a: SweepArgs, file: &FileConfig, out: Option<&Path>) -> Result<ExitCode, CliError> {
    let n = pick(a.n, file.single_n()?, 10);
    let j = pick(a.j, file.j, 1.0);
    let steps = pick(a.steps, file.steps, 50);
    require_steps(steps)?;
    if n % 2 == 1 {
        return Err(CliError::Usage(format!("n must be even for the saturating two-colouring, got {n}")));
    }
    if !(2..=MAX_CHAIN_N).contains(&n) {
        return Err(CliError::Usage(format!("n must lie in 2..={MAX_CHAIN_N} for exact diagonalization, got {n}")));
    }
    let grid = linspace(pick(a.bx_min, file.bx_min, 0.0), pick(a.bx_max, file.bx_max, 2.0), steps);
    let rows = grid
        .par_iter()
        .map(|&bx| {
            let p = chain_sandwich_point(n, j, bx)?;
            Ok(vec![p.bx, p.jx_expect, p.e_ground, p.e_sep_qfi, p.e_lower_wy, p.corr_ground, p.corr_sep, p.corr_wy])
        })
        .collect::<Result<Vec<_>, spinbound::Error>>()?;
    let header = ["bx", "jx_expect", "e_ground", "e_sep_qfi", "e_lower_wy", "corr_ground", "corr_sep", "corr_wy"];
    output::write_csv(out, &header, &rows)?;
    Ok(ExitCode::SUCCESS)
}

fn qfi_bound(a: QfiArgs, file: &FileConfig, out: Option<&Path>) -> Result<ExitCode, CliError> {
    let ns = pick_list(a.n, file.n.clone(), &[4, 10, 60]);
    let j = pick(a.j, file.j, 1.0);
    let steps = pick(a.steps, file.steps, 30);
    require_steps(steps)?;
    if let Some(&bad) = ns.iter().find(|&&n| n < 2) {
        return Err(CliError::Usage(format!("n must be at least 2, got {bad}")));
    }
    let absolute = match (a.bx_min.or(file.bx_min), a.bx_max.or(file.bx_max)) {
        (None, None) => None,
        (lo, Some(hi)) => Some(linspace(lo.unwrap_or(0.0), hi, steps)),
        (Some(_), None) => return Err(CliError::Usage("--bx-min needs --bx-max".into())),
    };
    let points: Vec<(usize, f64)> = ns
        .iter()
        .flat_map(|&n| {
            let grid = absolute
                .clone()
                .unwrap_or_else(|| (1..=steps).map(|i| i as f64 / steps as f64 * j * (n as f64 - 1.0) / 2.0).collect());
            grid.into_iter().map(move |bx| (n, bx))
        })
        .collect();
    let rows = points
        .par_iter()
        .map(|&(n, bx)| {
            let p = collective_qfi_point(n, j, bx)?;
            let nf = n as f64;
            Ok(vec![nf, p.bx, p.sx_expect, p.fq_true, p.fq_bound, p.delta, p.delta_cap, 0.6 / nf])
        })
        .collect::<Result<Vec<_>, spinbound::Error>>()?;
    let header = ["n", "bx", "sx_expect", "fq_true", "fq_bound", "delta", "cap_8_over_n", "cap_0p6_over_n"];
    output::write_csv(out, &header, &rows)?;
    Ok(ExitCode::SUCCESS)
}

fn kprod(a: KprodArgs, file: &FileConfig, seed: u64, out: Option<&Path>) -> Result<ExitCode, CliError> {
    let n = pick(a.n, file.single_n()?, 10);
    let ks = pick_list(a.k, file.k.clone(), &[1, 2, 5]);
    let j = pick(a.j, file.j, 1.0);
    if let Some(&bad) = ks.iter().find(|&&k| k == 0 || n % k != 0) {
        return Err(CliError::Usage(format!("block size {bad} does not divide n = {n}")));
    }
    let rho = match a.state_file.as_deref().or(file.state_file.as_deref()) {
        Some(p) => read_state(p)?,
        None => {
            let sx = pick(a.jx0, file.jx0, 0.1);
            if sx.is_nan() || sx.abs() >= 1.0 {
                return Err(CliError::Usage(format!("--jx0 must lie in (−1, 1), got {sx}")));
            }
            DensityMatrix::from_bloch([sx, 0.0, 0.0])?
        }
    };
    if rho.dim() != 2 {
        return Err(CliError::Usage(format!("the k-producible bounds need a qubit marginal, got dim {}", rho.dim())));
    }
    let sx = rho.bloch_vector()?[0].abs();
    let reference = pfeuty_constrained_energy(j, sx)?;
    let cfg = OptimizerConfig::with_seed(seed);
    let h = spin_half()[2].clone();
    let nf = n as f64;
    let mut rows = Vec::with_capacity(ks.len());
    for &k in &ks {
        let b = kprod_bounds(&rho, k, n, j, &[0.0; 3], &h, &pauli(), &cfg)?;
        let wy = b.wy.map_or(f64::NAN, |w| w / nf);
        rows.push(vec![k as f64, b.qfi, b.product, wy, reference]);
    }
    let header = ["k", "bound_qfi", "bound_product", "bound_wy_per_particle", "pfeuty_reference"];
    output::write_csv(out, &header, &rows)?;
    Ok(ExitCode::SUCCESS)
}

fn default_trials(suite: Suite) -> usize {
    match suite {
        Suite::Tables => 120,
        Suite::Roofs => 40,
        Suite::Fidelity => 50,
        Suite::Saturation => 60,
        Suite::Witnesses => 1000,
    }
}

fn verify(a: VerifyArgs, file: &FileConfig, seed: u64, out: Option<&Path>) -> Result<ExitCode, CliError> {
    let suite: Suite = a.suite.parse().map_err(|e: spinbound::Error| CliError::Usage(e.to_string()))?;
    let trials = pick(a.trials, file.trials, default_trials(suite));
    let report = run_suite(suite, seed, trials);
    output::write_text(out, &report.to_json_string()?)?;
    Ok(if report.failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn report(a: ReportArgs, file: &FileConfig, seed: u64, out: Option<&Path>) -> Result<ExitCode, CliError> {
    let text = std::fs::read_to_string(&a.model).map_err(|e| CliError::io(&a.model, e))?;
    let spec = ModelSpec::from_json_str(&text)?;
    let rho = match a.state_file.as_deref().or(file.state_file.as_deref()) {
        Some(p) => Some(read_state(p)?),
        None => None,
    };
    let cfg = OptimizerConfig::with_seed(seed);
    let r = bound_report(&spec, rho.as_ref(), Some(&cfg))?;
    output::write_text(out, &r.to_json_string()?)?;
    Ok(ExitCode::SUCCESS)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linspace_endpoints() {
        assert_eq!(linspace(0.0, 2.0, 3), vec![0.0, 1.0, 2.0]);
        assert_eq!(linspace(0.5, 2.0, 1), vec![0.5]);
        assert!(linspace(0.0, 1.0, 0).is_empty());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Core(spinbound::Error::NonConvergence("x".into())).exit_code(), 3);
        assert_eq!(CliError::Core(spinbound::Error::Validation("x".into())).exit_code(), 2);
        assert_eq!(CliError::Usage("x".into()).exit_code(), 2);
    }
}
