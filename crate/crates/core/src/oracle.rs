//! Reversible compilation of a CNF formula into the verification oracle
//! `|s, 0, y> -> |s, 0, y xor f(s)>`.
//!
//! Qubit layout: `[0, n)` solution register, `[n, n + m)` one scratch qubit
//! per clause, `n + m` the result qubit `y`.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::cnf::CnfFormula;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CircuitError {
    #[error("gate target {0} is also a control")]
    TargetIsControl(usize),
    #[error("qubit {0} appears twice among the controls")]
    DuplicateControl(usize),
    #[error("qubit index {index} out of range for {total} qubits")]
    QubitOutOfRange { index: usize, total: usize },
    #[error("basis has {found} bits, circuit has {expected} qubits")]
    LengthMismatch { expected: usize, found: usize },
}

/// One control line: the gate fires only if `qubit` holds `polarity`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Control {
    pub qubit: usize,
    pub polarity: bool,
}

impl Control {
    pub fn on(qubit: usize) -> Self {
        Control { qubit, polarity: true }
    }

    pub fn off(qubit: usize) -> Self {
        Control { qubit, polarity: false }
    }
}

/// Multi-controlled X. No controls means an unconditional X.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReversibleGate {
    controls: Vec<Control>,
    target: usize,
}

impl ReversibleGate {
    pub fn new(controls: Vec<Control>, target: usize) -> Result<Self, CircuitError> {
        for (i, c) in controls.iter().enumerate() {
            if c.qubit == target {
                return Err(CircuitError::TargetIsControl(target));
            }
            if controls[..i].iter().any(|o| o.qubit == c.qubit) {
                return Err(CircuitError::DuplicateControl(c.qubit));
            }
        }
        Ok(ReversibleGate { controls, target })
    }

    pub fn x(target: usize) -> Self {
        ReversibleGate { controls: Vec::new(), target }
    }

    pub fn controls(&self) -> &[Control] {
        &self.controls
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn arity(&self) -> usize {
        self.controls.len()
    }

    #[inline]
    fn apply(&self, bits: &mut [bool]) {
        if self.controls.iter().all(|c| bits[c.qubit] == c.polarity) {
            bits[self.target] ^= true;
        }
    }

    fn max_qubit(&self) -> usize {
        self.controls
            .iter()
            .map(|c| c.qubit)
            .fold(self.target, usize::max)
    }
}

impl fmt::Display for ReversibleGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("MCX [")?;
        for (i, c) in self.controls.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}:{}", c.qubit, u8::from(c.polarity))?;
        }
        write!(f, "] -> {}", self.target)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReversibleCircuit {
    n_solution: usize,
    n_scratch: usize,
    gates: Vec<ReversibleGate>,
}

impl ReversibleCircuit {
    pub fn new(
        n_solution: usize,
        n_scratch: usize,
        gates: Vec<ReversibleGate>,
    ) -> Result<Self, CircuitError> {
        let total = n_solution + n_scratch + 1;
        for g in &gates {
            let index = g.max_qubit();
            if index >= total {
                return Err(CircuitError::QubitOutOfRange { index, total });
            }
        }
        Ok(ReversibleCircuit { n_solution, n_scratch, gates })
    }

    pub fn n_solution(&self) -> usize {
        self.n_solution
    }

    pub fn n_scratch(&self) -> usize {
        self.n_scratch
    }

    pub fn result_index(&self) -> usize {
        self.n_solution + self.n_scratch
    }

    pub fn num_qubits(&self) -> usize {
        self.n_solution + self.n_scratch + 1
    }

    pub fn gates(&self) -> &[ReversibleGate] {
        &self.gates
    }

    /// Classical action on one basis state; bit `q` is qubit `q`.
    pub fn apply_basis(&self, basis: &[bool]) -> Result<Vec<bool>, CircuitError> {
        let mut bits = basis.to_vec();
        self.apply_basis_in_place(&mut bits)?;
        Ok(bits)
    }

    pub fn apply_basis_in_place(&self, bits: &mut [bool]) -> Result<(), CircuitError> {
        if bits.len() != self.num_qubits() {
            return Err(CircuitError::LengthMismatch {
                expected: self.num_qubits(),
                found: bits.len(),
            });
        }
        for g in &self.gates {
            g.apply(bits);
        }
        Ok(())
    }

    /// Classical action on a packed basis label, qubit 0 in the most
    /// significant of `num_qubits()` bits. Requires `num_qubits() <= 64`.
    pub fn apply_index(&self, index: u64) -> u64 {
        let k = self.num_qubits();
        debug_assert!(k <= 64);
        let bit = |q: usize| 1u64 << (k - 1 - q);
        let mut idx = index;
        for g in &self.gates {
            let fires = g
                .controls
                .iter()
                .all(|c| (idx & bit(c.qubit) != 0) == c.polarity);
            if fires {
                idx ^= bit(g.target);
            }
        }
        idx
    }

    pub fn gate_report(&self) -> GateReport {
        let mut by_arity = BTreeMap::new();
        for g in &self.gates {
            *by_arity.entry(g.arity()).or_insert(0) += 1;
        }
        GateReport { by_arity, total: self.gates.len() }
    }

    /// Text dump: a `qubits` header line, then one `MCX [q:pol ...] -> t` per gate.
    pub fn dump(&self) -> String {
        let mut out = format!(
            "qubits {} {} {}\n",
            self.n_solution,
            self.n_scratch,
            self.result_index()
        );
        for g in &self.gates {
            out.push_str(&g.to_string());
            out.push('\n');
        }
        out
    }
}

/// Gate histogram keyed by number of controls.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GateReport {
    pub by_arity: BTreeMap<usize, usize>,
    pub total: usize,
}

/// Compile `formula` into its verification oracle.
///
/// Clause `j` is computed into scratch qubit `n + j`:
/// * a tautological clause (contains `x` and `-x`) is a bare X;
/// * a unit clause is one gate controlled on the satisfying value;
/// * otherwise an MCX anti-controlled on every literal's satisfying value
///   computes the negated clause, followed by an X;
/// * an empty clause leaves its scratch qubit at 0 and emits nothing.
///
/// The AND of all scratch qubits is copied into `y`, then the clause gates
/// are replayed in reverse. At most `4m + 1` gates are emitted.
pub fn compile(formula: &CnfFormula) -> ReversibleCircuit {
    let n = formula.num_vars();
    let m = formula.num_clauses();
    let mut compute = Vec::with_capacity(2 * m);

    for (j, clause) in formula.clauses().iter().enumerate() {
        let scratch = n + j;
        // variable index -> polarity that satisfies the literal, first occurrence order
        let mut lits: Vec<(usize, bool)> = Vec::with_capacity(clause.len());
        let mut tautology = false;
        for &lit in clause {
            let var = lit.unsigned_abs() as usize - 1;
            let sat = lit > 0;
            match lits.iter().find(|(v, _)| *v == var) {
                Some(&(_, p)) if p != sat => tautology = true,
                Some(_) => {}
                None => lits.push((var, sat)),
            }
        }
        if tautology {
            compute.push(ReversibleGate::x(scratch));
        } else if let [(var, sat)] = lits[..] {
            compute.push(ReversibleGate {
                controls: vec![Control { qubit: var, polarity: sat }],
                target: scratch,
            });
        } else if !lits.is_empty() {
            let controls = lits
                .iter()
                .map(|&(var, sat)| Control { qubit: var, polarity: !sat })
                .collect();
            compute.push(ReversibleGate { controls, target: scratch });
            compute.push(ReversibleGate::x(scratch));
        }
    }

    let y = n + m;
    let mut gates = compute.clone();
    gates.push(ReversibleGate {
        controls: (n..n + m).map(Control::on).collect(),
        target: y,
    });
    gates.extend(compute.into_iter().rev());

    ReversibleCircuit { n_solution: n, n_scratch: m, gates }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::{Assignment, CnfFormula};

    fn bits(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == '1').collect()
    }

    fn one_qubit_pair() -> ReversibleCircuit {
        ReversibleCircuit { n_solution: 1, n_scratch: 0, gates: vec![] }
    }

    #[test]
    fn primitive_gates() {
        let mut c = one_qubit_pair();
        c.gates = vec![ReversibleGate::x(0)];
        assert_eq!(c.apply_basis(&bits("00")).unwrap(), bits("10"));

        c.gates = vec![ReversibleGate::new(vec![Control::on(0)], 1).unwrap()];
        assert_eq!(c.apply_basis(&bits("10")).unwrap(), bits("11"));
        assert_eq!(c.apply_basis(&bits("00")).unwrap(), bits("00"));

        c.gates = vec![ReversibleGate::new(vec![Control::off(0)], 1).unwrap()];
        assert_eq!(c.apply_basis(&bits("00")).unwrap(), bits("01"));
        assert_eq!(c.apply_basis(&bits("10")).unwrap(), bits("10"));

        assert!(c.apply_basis(&bits("1")).is_err());
    }

    #[test]
    fn gate_invariants() {
        assert_eq!(
            ReversibleGate::new(vec![Control::on(1)], 1),
            Err(CircuitError::TargetIsControl(1))
        );
        assert_eq!(
            ReversibleGate::new(vec![Control::on(0), Control::off(0)], 1),
            Err(CircuitError::DuplicateControl(0))
        );
        assert!(matches!(
            ReversibleCircuit::new(1, 0, vec![ReversibleGate::x(2)]),
            Err(CircuitError::QubitOutOfRange { index: 2, total: 2 })
        ));
    }

    #[test]
    fn unit_clause_circuit() {
        let f = CnfFormula::new(1, vec![vec![1]]).unwrap();
        let c = compile(&f);
        assert_eq!(c.num_qubits(), 3);
        assert_eq!(c.apply_basis(&bits("100")).unwrap(), bits("101"));
        assert_eq!(c.apply_basis(&bits("000")).unwrap(), bits("000"));
        // compute, copy, uncompute
        let report = c.gate_report();
        assert_eq!(report.total, 3);
        assert_eq!(report.by_arity, BTreeMap::from([(1, 3)]));
    }

    #[test]
    fn zero_clause_circuit_is_single_x() {
        let f = CnfFormula::new(2, vec![]).unwrap();
        let c = compile(&f);
        assert_eq!(c.gates(), &[ReversibleGate::x(2)]);
        let report = c.gate_report();
        assert_eq!(report.total, 1);
        assert_eq!(report.by_arity, BTreeMap::from([(0, 1)]));
        for v in 0..8u64 {
            let input = Assignment::from_index(v, 3);
            let mut expected = input.bits().to_vec();
            expected[2] ^= true;
            assert_eq!(c.apply_basis(input.bits()).unwrap(), expected);
        }
    }

    #[test]
    fn xnor_circuit() {
        let f = CnfFormula::new(2, vec![vec![1, -2], vec![-1, 2]]).unwrap();
        let c = compile(&f);
        assert_eq!(c.apply_basis(&bits("11000")).unwrap(), bits("11001"));
        assert_eq!(c.apply_basis(&bits("10000")).unwrap(), bits("10000"));
        assert_eq!(c.gate_report().total, 9);
    }

    #[test]
    fn tautology_and_duplicate_literals() {
        let f = CnfFormula::new(2, vec![vec![1, -1, 2], vec![2, 2]]).unwrap();
        let c = compile(&f);
        // tautology: X; duplicate unit: one control
        assert_eq!(c.gates()[0], ReversibleGate::x(2));
        assert_eq!(c.gates()[1].controls(), &[Control::on(1)]);
        assert_eq!(c.gate_report().total, 5);
        for v in 0..4u64 {
            let s = Assignment::from_index(v, 2);
            let mut input = s.bits().to_vec();
            input.extend([false, false, false]);
            let out = c.apply_basis(&input).unwrap();
            assert_eq!(out[4], s.bit(1));
            assert_eq!(&out[..4], &input[..4]);
        }
    }

    #[test]
    fn empty_clause_never_satisfied() {
        let f = CnfFormula::new(1, vec![vec![], vec![1]]).unwrap();
        let c = compile(&f);
        for s in ["0", "1"] {
            let mut input = bits(s);
            input.extend([false, false, false]);
            assert_eq!(c.apply_basis(&input).unwrap(), input);
        }
    }

    #[test]
    fn dump_format() {
        let f = CnfFormula::new(2, vec![vec![1, -2]]).unwrap();
        let dump = compile(&f).dump();
        assert_eq!(
            dump,
            "qubits 2 1 3\nMCX [0:0 1:1] -> 2\nMCX [] -> 2\nMCX [2:1] -> 3\nMCX [] -> 2\nMCX [0:0 1:1] -> 2\n"
        );
    }
}
