//! Command-line front end.
//!
//! Exit codes: 0 success, 1 input or configuration error, 2 when every
//! branch ends up observer-free.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde::Serialize;

use crate::channel::ObserverRegister;
use crate::cnf::parse_dimacs;
use crate::pipeline::{
    default_max_runs, monte_carlo, run_doomsday, slice_states, Mode, MonteCarloReport,
    PipelineError, RunConfig, Slices, SolutionReport,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Postselect,
    Montecarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SliceArg {
    #[value(name = "A", alias = "a")]
    A,
    #[value(name = "B", alias = "b")]
    B,
    #[value(name = "C", alias = "c")]
    C,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Human,
    Structured,
}

/// Solve a CNF instance by post-selecting on surviving observers.
#[derive(Debug, Clone, Parser)]
#[command(name = "doomsday", version)]
pub struct CliInvocation {
    /// DIMACS CNF instance
    #[arg(long = "input", value_name = "PATH")]
    pub input_path: PathBuf,
    /// Observer spec (TOML, or JSON if the extension is .json)
    #[arg(long = "observer", value_name = "PATH")]
    pub observer_path: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "postselect")]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Monte Carlo trials
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    /// Per-trial run cap [default: 10 * 2^n]
    #[arg(long = "max-runs", value_name = "N")]
    pub max_runs: Option<u64>,
    /// Dump amplitudes at a circuit slice (postselect only)
    #[arg(long = "dump-slice", value_enum)]
    pub dump_slice: Option<SliceArg>,
    #[arg(long, value_enum, default_value = "human")]
    pub format: FormatArg,
}

#[derive(Debug)]
pub enum CliError {
    /// Bad input, observer spec or flags.
    Usage(String),
    /// No branch kept its observers.
    AllObserversDead,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::AllObserversDead => 2,
        }
    }

    pub fn message(&self) -> String {
        match self {
            CliError::Usage(msg) => msg.clone(),
            CliError::AllObserversDead => {
                "all branches observer-free: instance unsatisfiable".to_string()
            }
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(err: PipelineError) -> Self {
        if err.is_all_observers_dead() {
            CliError::AllObserversDead
        } else {
            CliError::Usage(err.to_string())
        }
    }
}

#[derive(Serialize)]
struct PostselectOutput<'a> {
    solution: String,
    p_alive: f64,
    verified: bool,
    gate_total: usize,
    slice_norms: [f64; 3],
    #[serde(skip_serializing_if = "Option::is_none")]
    slice_dump: Option<&'a [String]>,
}

#[derive(Serialize)]
struct MonteCarloOutput {
    trials: usize,
    mean_runs_to_survival: Option<f64>,
    dead_branch_total: u64,
    expected_runs: Option<f64>,
    survived_trials: usize,
    censored_trials: usize,
    p_alive: f64,
}

/// Run one invocation and return what goes to standard output.
pub fn run(inv: &CliInvocation) -> Result<String, CliError> {
    let text = std::fs::read_to_string(&inv.input_path).map_err(|e| {
        CliError::Usage(format!("cannot read {}: {e}", inv.input_path.display()))
    })?;
    let formula = parse_dimacs(&text)
        .map_err(|e| CliError::Usage(format!("{}: {e}", inv.input_path.display())))?;

    let observer = match &inv.observer_path {
        None => ObserverRegister::default(),
        Some(path) => {
            let spec = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            let json = path.extension().is_some_and(|ext| ext == "json");
            ObserverRegister::from_spec_str(&spec, json)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?
        }
    };

    let mode = match inv.mode {
        ModeArg::Postselect => Mode::Postselect,
        ModeArg::Montecarlo => Mode::MonteCarlo,
    };
    if inv.dump_slice.is_some() && mode != Mode::Postselect {
        return Err(CliError::Usage("--dump-slice is only valid in postselect mode".into()));
    }
    let max_runs_per_trial = inv
        .max_runs
        .unwrap_or_else(|| default_max_runs(formula.num_vars()));
    let config = RunConfig {
        formula,
        observer,
        seed: inv.seed,
        mode,
        trials: inv.trials,
        max_runs_per_trial,
    };

    match mode {
        Mode::Postselect => {
            let dump = match inv.dump_slice {
                Some(which) => Some(slice_dump(&slice_states(&config)?, which)),
                None => None,
            };
            let report = run_doomsday(&config)?;
            Ok(render_postselect(&report, dump.as_deref(), inv.format))
        }
        Mode::MonteCarlo => {
            let report = monte_carlo(&config)?;
            Ok(render_monte_carlo(&report, inv.format))
        }
    }
}

fn slice_dump(slices: &Slices, which: SliceArg) -> Vec<String> {
    match which {
        SliceArg::A => slices.sigma_a.state.dump_rows(),
        SliceArg::B => slices.sigma_b.state.dump_rows(),
        SliceArg::C => {
            let mut rows = Vec::new();
            for branch in &slices.sigma_c.branches {
                let label = match branch.label {
                    crate::state::Vitality::Alive => "alive",
                    crate::state::Vitality::Dead => "dead",
                };
                rows.push(format!("# {label} weight {:.16e}", branch.weight()));
                rows.extend(branch.sa_state.dump_rows());
            }
            rows
        }
    }
}

fn render_postselect(report: &SolutionReport, dump: Option<&[String]>, format: FormatArg) -> String {
    match format {
        FormatArg::Structured => {
            let out = PostselectOutput {
                solution: report.solution.to_string(),
                p_alive: report.p_alive,
                verified: report.verified,
                gate_total: report.gate_total,
                slice_norms: report.slice_norms,
                slice_dump: dump,
            };
            let mut s = serde_json::to_string_pretty(&out).expect("report serializes");
            s.push('\n');
            s
        }
        FormatArg::Human => {
            let mut s = String::new();
            let [a, b, c] = report.slice_norms;
            let _ = writeln!(s, "solution: {}", report.solution);
            let _ = writeln!(s, "p_alive: {}", report.p_alive);
            let _ = writeln!(s, "verified: {}", report.verified);
            let _ = writeln!(s, "gate_total: {}", report.gate_total);
            let _ = writeln!(s, "slice_norms: {a} {b} {c}");
            for row in dump.unwrap_or_default() {
                let _ = writeln!(s, "{row}");
            }
            s
        }
    }
}

fn render_monte_carlo(report: &MonteCarloReport, format: FormatArg) -> String {
    match format {
        FormatArg::Structured => {
            let out = MonteCarloOutput {
                trials: report.trials,
                mean_runs_to_survival: report.mean_runs_to_survival,
                dead_branch_total: report.dead_branch_total,
                expected_runs: report.expected_runs,
                survived_trials: report.survived_trials,
                censored_trials: report.censored_trials,
                p_alive: report.p_alive,
            };
            let mut s = serde_json::to_string_pretty(&out).expect("report serializes");
            s.push('\n');
            s
        }
        FormatArg::Human => {
            let opt = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |x| x.to_string());
            let mut s = String::new();
            let _ = writeln!(s, "trials: {}", report.trials);
            let _ = writeln!(s, "survived_trials: {}", report.survived_trials);
            let _ = writeln!(s, "censored_trials: {}", report.censored_trials);
            let _ = writeln!(s, "mean_runs_to_survival: {}", opt(report.mean_runs_to_survival));
            let _ = writeln!(s, "expected_runs: {}", opt(report.expected_runs));
            let _ = writeln!(s, "dead_branch_total: {}", report.dead_branch_total);
            let _ = writeln!(s, "p_alive: {}", report.p_alive);
            s
        }
    }
}

/// Parse `args`, run, print, and return the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let inv = match CliInvocation::try_parse_from(args) {
        Ok(inv) => inv,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return 0;
        }
        Err(e) => {
            let msg = e.to_string();
            eprintln!("error: {}", msg.trim_start_matches("error: ").trim_end());
            return 1;
        }
    };
    match run(&inv) {
        Ok(out) => {
            print!("{out}");
            0
        }
        Err(err) => {
            eprintln!("error: {}", err.message());
            err.exit_code()
        }
    }
}
