//! CNF instances in DIMACS form, the verification predicate, and the
//! brute-force solution enumerator used as the correctness oracle.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Default upper bound on `num_vars` for [`brute_force_solutions`].
pub const DEFAULT_ENUMERATION_LIMIT: usize = 24;

/// A signed DIMACS literal: `v` asserts variable `v`, `-v` negates it.
pub type Literal = i32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: missing `p cnf` header")]
    MissingHeader { line: usize },
    #[error("line {line}: duplicate `p cnf` header")]
    DuplicateHeader { line: usize },
    #[error("line {line}: malformed header: {reason}")]
    BadHeader { line: usize, reason: String },
    #[error("line {line}: literal {literal} out of range for {num_vars} variables")]
    LiteralOutOfRange {
        line: usize,
        literal: i64,
        num_vars: usize,
    },
    #[error("line {line}: non-integer token `{token}`")]
    NotAnInteger { line: usize, token: String },
    #[error("line {line}: header declares {expected} clauses, found {found}")]
    ClauseCountMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },
}

impl ParseError {
    /// 1-based line number the error refers to.
    pub fn line(&self) -> usize {
        match *self {
            ParseError::MissingHeader { line }
            | ParseError::DuplicateHeader { line }
            | ParseError::BadHeader { line, .. }
            | ParseError::LiteralOutOfRange { line, .. }
            | ParseError::NotAnInteger { line, .. }
            | ParseError::ClauseCountMismatch { line, .. } => line,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CnfError {
    #[error("assignment has {found} bits, formula has {expected} variables")]
    LengthMismatch { expected: usize, found: usize },
    #[error("{num_vars} variables exceeds the enumeration limit of {limit}")]
    TooManyVariables { num_vars: usize, limit: usize },
    #[error("literal {literal} invalid for {num_vars} variables")]
    InvalidLiteral { literal: Literal, num_vars: usize },
}

/// A CNF formula over variables `1..=num_vars`.
///
/// Clause and literal order are kept exactly as given; empty clauses and
/// repeated literals are stored verbatim.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfFormula {
    num_vars: usize,
    clauses: Vec<Vec<Literal>>,
}

impl CnfFormula {
    pub fn new(num_vars: usize, clauses: Vec<Vec<Literal>>) -> Result<Self, CnfError> {
        for &literal in clauses.iter().flatten() {
            if literal == 0 || literal.unsigned_abs() as usize > num_vars {
                return Err(CnfError::InvalidLiteral { literal, num_vars });
            }
        }
        Ok(CnfFormula { num_vars, clauses })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Vec<Literal>] {
        &self.clauses
    }

    /// Total number of literal occurrences across all clauses.
    pub fn size(&self) -> usize {
        self.clauses.iter().map(Vec::len).sum()
    }

    /// The verification predicate: `true` iff every clause has a satisfied literal.
    pub fn evaluate(&self, s: &Assignment) -> Result<bool, CnfError> {
        if s.len() != self.num_vars {
            return Err(CnfError::LengthMismatch {
                expected: self.num_vars,
                found: s.len(),
            });
        }
        Ok(self.clauses.iter().all(|clause| {
            clause
                .iter()
                .any(|&lit| s.bit(lit.unsigned_abs() as usize - 1) == (lit > 0))
        }))
    }

    /// Serialize as DIMACS: header, then one zero-terminated clause per line.
    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.num_vars, self.clauses.len());
        for clause in &self.clauses {
            for lit in clause {
                out.push_str(&lit.to_string());
                out.push(' ');
            }
            out.push_str("0\n");
        }
        out
    }
}

impl FromStr for CnfFormula {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_dimacs(s)
    }
}

/// Parse DIMACS CNF text.
///
/// Clauses are zero-terminated and may span lines. A trailing clause without
/// its terminating `0` is accepted at end of input.
pub fn parse_dimacs(text: &str) -> Result<CnfFormula, ParseError> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses: Vec<Vec<Literal>> = Vec::new();
    let mut current: Vec<Literal> = Vec::new();
    let mut current_open = false;
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') || trimmed.starts_with('%') {
            continue;
        }
        if trimmed.starts_with('p') {
            if header.is_some() {
                return Err(ParseError::DuplicateHeader { line });
            }
            header = Some(parse_header(trimmed, line)?);
            continue;
        }
        let (num_vars, expected) = header.ok_or(ParseError::MissingHeader { line })?;
        for token in trimmed.split_whitespace() {
            let value: i64 = token.parse().map_err(|_| ParseError::NotAnInteger {
                line,
                token: token.to_string(),
            })?;
            if value == 0 {
                clauses.push(std::mem::take(&mut current));
                current_open = false;
                continue;
            }
            if value.unsigned_abs() > num_vars as u64 {
                return Err(ParseError::LiteralOutOfRange {
                    line,
                    literal: value,
                    num_vars,
                });
            }
            if clauses.len() >= expected {
                return Err(ParseError::ClauseCountMismatch {
                    line,
                    expected,
                    found: clauses.len() + 1,
                });
            }
            current.push(value as Literal);
            current_open = true;
        }
    }

    let (num_vars, expected) = header.ok_or(ParseError::MissingHeader {
        line: last_line.max(1),
    })?;
    if current_open {
        clauses.push(current);
    }
    if clauses.len() != expected {
        return Err(ParseError::ClauseCountMismatch {
            line: last_line.max(1),
            expected,
            found: clauses.len(),
        });
    }
    Ok(CnfFormula { num_vars, clauses })
}

fn parse_header(trimmed: &str, line: usize) -> Result<(usize, usize), ParseError> {
    let parts: Vec<&str> = trimmed.split_whitespace().collect();
    let bad = |reason: &str| ParseError::BadHeader {
        line,
        reason: reason.to_string(),
    };
    if parts.len() != 4 || parts[0] != "p" || parts[1] != "cnf" {
        return Err(bad("expected `p cnf <vars> <clauses>`"));
    }
    let num = |tok: &str| {
        tok.parse::<usize>().map_err(|_| ParseError::NotAnInteger {
            line,
            token: tok.to_string(),
        })
    };
    let num_vars = num(parts[2])?;
    let num_clauses = num(parts[3])?;
    if num_vars > i32::MAX as usize {
        return Err(bad("variable count too large"));
    }
    Ok((num_vars, num_clauses))
}

/// A candidate bit string; bit `i` is the value of variable `i + 1`.
///
/// As a number, bit 0 is the most significant, so `"10"` is 2.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment {
    bits: Vec<bool>,
}

impl Assignment {
    pub fn new(bits: Vec<bool>) -> Self {
        Assignment { bits }
    }

    /// Build the `len`-bit assignment whose numeric value is `value`.
    pub fn from_index(value: u64, len: usize) -> Self {
        let bits = (0..len)
            .map(|i| (value >> (len - 1 - i)) & 1 == 1)
            .collect();
        Assignment { bits }
    }

    /// Numeric value, bit 0 most significant. Only meaningful for `len() <= 64`.
    pub fn to_index(&self) -> u64 {
        self.bits
            .iter()
            .fold(0u64, |acc, &b| (acc << 1) | u64::from(b))
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bit(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Assignment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(format!("invalid bit `{other}`")),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Assignment::new)
    }
}

/// Every satisfying assignment, in ascending numeric order.
pub fn brute_force_solutions(formula: &CnfFormula) -> Result<Vec<Assignment>, CnfError> {
    brute_force_solutions_with_limit(formula, DEFAULT_ENUMERATION_LIMIT)
}

pub fn brute_force_solutions_with_limit(
    formula: &CnfFormula,
    limit: usize,
) -> Result<Vec<Assignment>, CnfError> {
    let n = formula.num_vars();
    if n > limit || n >= 64 {
        return Err(CnfError::TooManyVariables { num_vars: n, limit });
    }
    let mut out = Vec::new();
    for value in 0..(1u64 << n) {
        let s = Assignment::from_index(value, n);
        if formula.evaluate(&s)? {
            out.push(s);
        }
    }
    Ok(out)
}
