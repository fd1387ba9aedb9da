//! Simulator for solving NP instances by post-selecting on the branches of a
//! quantum circuit in which observers survive.
//!
//! A CNF formula is compiled into a reversible verification oracle, applied
//! to a uniform superposition of candidate assignments, and the ancilla that
//! flags solutions anti-controls a channel that replaces every observer with
//! a thermal state. Conditioning on surviving observers leaves exactly the
//! satisfying assignments. [`pipeline::monte_carlo`] tallies how many
//! observer-free branches pile up when nothing is post-selected.
//!
//! Basis labels are big-endian: qubit 0 is the most significant bit.

pub mod channel;
pub mod cli;
pub mod cnf;
pub mod oracle;
pub mod pipeline;
pub mod state;

pub use channel::{
    anti_controlled_doomsday, apply_dense, demo_cat, gibbs_state, postselect_alive,
    replacer_kraus, ChannelError, KrausSet, ObserverRegister,
};
pub use cnf::{brute_force_solutions, parse_dimacs, Assignment, CnfFormula};
pub use oracle::{compile, ReversibleCircuit, ReversibleGate};
pub use pipeline::{monte_carlo, run_doomsday, slice_states, Mode, RunConfig};
pub use state::{dense_sigma, fidelity, uniform_superposition, BranchedState, DensityMatrix, PureState};
