//! End-to-end runs: Hadamard layer, oracle, anti-controlled doomsday
//! channel, post-selection and measurement, plus the Monte Carlo mode that
//! counts dead branches when nothing is post-selected.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::channel::{anti_controlled_doomsday, postselect_alive, ChannelError, ObserverRegister};
use crate::cnf::{Assignment, CnfError, CnfFormula};
use crate::oracle::{compile, ReversibleCircuit};
use crate::state::{
    apply_oracle_clean_scratch, label_to_bits, uniform_superposition, BranchedState,
    DensityMatrix, PureState, StateError, C64,
};

/// Largest solution register the pipeline will simulate.
pub const MAX_SOLUTION_QUBITS: usize = 24;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Cnf(#[from] CnfError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("measured assignment {0} does not satisfy the formula")]
    Unverified(Assignment),
}

impl PipelineError {
    /// True when the run failed only because no branch kept its observers.
    pub fn is_all_observers_dead(&self) -> bool {
        matches!(self, PipelineError::Channel(ChannelError::AllObserversDead))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Postselect,
    MonteCarlo,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub formula: CnfFormula,
    pub observer: ObserverRegister,
    pub seed: u64,
    pub mode: Mode,
    pub trials: usize,
    pub max_runs_per_trial: u64,
}

impl RunConfig {
    /// Post-selection run with the default observer and seed 0.
    pub fn new(formula: CnfFormula) -> Self {
        let max_runs = default_max_runs(formula.num_vars());
        RunConfig {
            formula,
            observer: ObserverRegister::default(),
            seed: 0,
            mode: Mode::Postselect,
            trials: 1000,
            max_runs_per_trial: max_runs,
        }
    }

    fn validate(&self) -> Result<(), PipelineError> {
        let n = self.formula.num_vars();
        if n == 0 {
            return Err(PipelineError::Config("formula has no variables".into()));
        }
        if n > MAX_SOLUTION_QUBITS {
            return Err(PipelineError::Config(format!(
                "{n} variables exceeds the simulator limit of {MAX_SOLUTION_QUBITS}"
            )));
        }
        if self.mode == Mode::MonteCarlo && self.trials == 0 {
            return Err(PipelineError::Config("trials must be at least 1".into()));
        }
        if self.max_runs_per_trial == 0 {
            return Err(PipelineError::Config("max runs per trial must be at least 1".into()));
        }
        Ok(())
    }
}

/// `10 * 2^n`, saturating.
pub fn default_max_runs(num_vars: usize) -> u64 {
    1u64.checked_shl(num_vars as u32)
        .and_then(|p| p.checked_mul(10))
        .unwrap_or(u64::MAX)
}

/// Slice A: Hadamards applied, ancilla `|0>`, observers untouched.
#[derive(Debug, Clone)]
pub struct SliceA {
    pub state: PureState,
    pub observer: DensityMatrix,
}

/// Slice B: oracle applied, scratch restored and dropped.
#[derive(Debug, Clone)]
pub struct SliceB {
    pub state: PureState,
    pub observer: DensityMatrix,
}

#[derive(Debug, Clone)]
pub struct Slices {
    pub circuit: ReversibleCircuit,
    pub sigma_a: SliceA,
    pub sigma_b: SliceB,
    pub sigma_c: BranchedState,
}

impl Slices {
    /// Trace of each slice: `Tr sigma_A`, `Tr sigma_B`, total branch weight of `sigma_C`.
    pub fn norms(&self) -> [f64; 3] {
        [
            self.sigma_a.state.norm_sqr() * self.sigma_a.observer.trace(),
            self.sigma_b.state.norm_sqr() * self.sigma_b.observer.trace(),
            self.sigma_c
                .branches
                .iter()
                .map(|b| b.weight() * b.observer.trace())
                .sum(),
        ]
    }
}

/// Build the three circuit slices for `config`.
pub fn slice_states(config: &RunConfig) -> Result<Slices, PipelineError> {
    config.validate()?;
    let n = config.formula.num_vars();
    let circuit = compile(&config.formula);
    let ancilla_zero = PureState::new(1, vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)])?;
    let psi_a = uniform_superposition(n)?.tensor(&ancilla_zero)?;
    let psi_b = apply_oracle_clean_scratch(&circuit, &psi_a)?;
    let sigma_c = anti_controlled_doomsday(&psi_b, &config.observer)?;
    let rho = config.observer.initial().clone();
    Ok(Slices {
        circuit,
        sigma_a: SliceA { state: psi_a, observer: rho.clone() },
        sigma_b: SliceB { state: psi_b, observer: rho },
        sigma_c,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionReport {
    pub solution: Assignment,
    pub p_alive: f64,
    pub verified: bool,
    pub gate_total: usize,
    pub slice_norms: [f64; 3],
}

/// Sample a computational-basis outcome of `alive_state` and return the
/// solution register, i.e. every qubit except the trailing ancilla.
pub fn measure_solution<R: Rng + ?Sized>(
    alive_state: &PureState,
    rng: &mut R,
) -> Result<Assignment, PipelineError> {
    let total = alive_state.norm_sqr();
    if total <= 0.0 {
        return Err(StateError::ZeroNorm.into());
    }
    let k = alive_state.num_qubits();
    let mut target = rng.gen::<f64>() * total;
    let mut chosen = None;
    for (i, a) in alive_state.amplitudes().iter().enumerate() {
        let p = a.norm_sqr();
        if p == 0.0 {
            continue;
        }
        chosen = Some(i);
        if target < p {
            break;
        }
        target -= p;
    }
    // rounding can leave `target` just past the last populated label
    let index = chosen.expect("nonzero state has a populated label");
    let mut bits = label_to_bits(index, k);
    bits.pop();
    Ok(Assignment::new(bits))
}

/// Post-select on surviving observers and measure the solution register.
pub fn run_doomsday(config: &RunConfig) -> Result<SolutionReport, PipelineError> {
    if config.mode != Mode::Postselect {
        return Err(PipelineError::Config("run_doomsday requires postselect mode".into()));
    }
    let slices = slice_states(config)?;
    let (alive, p_alive) = postselect_alive(&slices.sigma_c)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let solution = measure_solution(&alive, &mut rng)?;
    if !config.formula.evaluate(&solution)? {
        return Err(PipelineError::Unverified(solution));
    }
    Ok(SolutionReport {
        solution,
        p_alive,
        verified: true,
        gate_total: slices.circuit.gate_report().total,
        slice_norms: slices.norms(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloReport {
    pub trials: usize,
    /// Mean over surviving trials; `None` if none survived.
    pub mean_runs_to_survival: Option<f64>,
    pub dead_branch_total: u64,
    /// `2^n / m`; `None` when there are no solutions.
    pub expected_runs: Option<f64>,
    pub survived_trials: usize,
    pub censored_trials: usize,
    pub p_alive: f64,
}

/// Outcome of one trial: runs used, and whether the last one survived.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct TrialOutcome {
    runs: u64,
    survived: bool,
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

fn run_trial(p_alive: f64, cap: u64, rng: &mut ChaCha8Rng) -> TrialOutcome {
    for run in 1..=cap {
        if rng.gen::<f64>() < p_alive {
            return TrialOutcome { runs: run, survived: true };
        }
    }
    TrialOutcome { runs: cap, survived: false }
}

/// Repeat single unpost-selected runs until one survives, for each trial.
///
/// The per-run survival probability is the alive mass of the slice-B state.
/// Each trial has its own RNG stream derived from `(seed, trial)`, so the
/// report does not depend on how trials are scheduled.
pub fn monte_carlo(config: &RunConfig) -> Result<MonteCarloReport, PipelineError> {
    if config.mode != Mode::MonteCarlo {
        return Err(PipelineError::Config("monte_carlo requires montecarlo mode".into()));
    }
    let slices = slice_states(config)?;
    let ancilla = slices.sigma_b.state.num_qubits() - 1;
    let (_, p_alive) = slices.sigma_b.state.project(ancilla, true)?;

    let cap = config.max_runs_per_trial;
    let outcomes: Vec<TrialOutcome> = (0..config.trials)
        .into_par_iter()
        .map(|t| run_trial(p_alive, cap, &mut trial_rng(config.seed, t)))
        .collect();

    let mut survived = 0usize;
    let mut survived_runs = 0u64;
    let mut dead = 0u64;
    for o in &outcomes {
        if o.survived {
            survived += 1;
            survived_runs += o.runs;
            dead += o.runs - 1;
        } else {
            dead += o.runs;
        }
    }

    let n = config.formula.num_vars();
    let space = (1u64 << n) as f64;
    let m = (p_alive * space).round();
    Ok(MonteCarloReport {
        trials: config.trials,
        mean_runs_to_survival: (survived > 0).then(|| survived_runs as f64 / survived as f64),
        dead_branch_total: dead,
        expected_runs: (m > 0.0).then(|| space / m),
        survived_trials: survived,
        censored_trials: config.trials - survived,
        p_alive,
    })
}
