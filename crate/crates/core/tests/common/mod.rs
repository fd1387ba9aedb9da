#![allow(dead_code)]

use doomsday::state::{CMatrix, DensityMatrix, C64};
use doomsday::{brute_force_solutions, Assignment, CnfFormula};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random CNF with clause widths 1..=3; repeated and complementary literals allowed.
pub fn random_cnf(rng: &mut impl Rng, n: usize, m: usize) -> CnfFormula {
    let clauses = (0..m)
        .map(|_| {
            let width = rng.gen_range(1..=3);
            (0..width)
                .map(|_| {
                    let v = rng.gen_range(1..=n as i32);
                    if rng.gen_bool(0.5) {
                        v
                    } else {
                        -v
                    }
                })
                .collect()
        })
        .collect();
    CnfFormula::new(n, clauses).unwrap()
}

/// Random 3-SAT with three distinct variables per clause.
pub fn random_3sat(rng: &mut impl Rng, n: usize, m: usize) -> CnfFormula {
    let vars: Vec<i32> = (1..=n as i32).collect();
    let clauses = (0..m)
        .map(|_| {
            vars.choose_multiple(rng, 3)
                .map(|&v| if rng.gen_bool(0.5) { v } else { -v })
                .collect()
        })
        .collect();
    CnfFormula::new(n, clauses).unwrap()
}

/// The 50-formula corpus shared by the oracle and post-selection criteria.
pub fn corpus() -> Vec<CnfFormula> {
    let mut r = rng(2026);
    (0..50)
        .map(|_| {
            let n = r.gen_range(1..=8);
            let m = r.gen_range(0..=20);
            random_cnf(&mut r, n, m)
        })
        .collect()
}

/// A formula whose only solution is `target`: random clauses satisfied by
/// `target` are added until brute force finds exactly one solution.
pub fn planted_unique(rng: &mut impl Rng, target: &Assignment) -> CnfFormula {
    let n = target.len();
    let mut clauses: Vec<Vec<i32>> = Vec::new();
    loop {
        let formula = CnfFormula::new(n, clauses.clone()).unwrap();
        if brute_force_solutions(&formula).unwrap().len() == 1 {
            return formula;
        }
        let width = rng.gen_range(1..=3.min(n));
        let vars: Vec<usize> = (0..n).collect();
        let chosen: Vec<usize> = vars.choose_multiple(rng, width).copied().collect();
        let mut clause: Vec<i32> = chosen
            .iter()
            .map(|&v| {
                let lit = v as i32 + 1;
                if rng.gen_bool(0.5) {
                    lit
                } else {
                    -lit
                }
            })
            .collect();
        // force at least one literal true under the target
        let fix = rng.gen_range(0..clause.len());
        let v = chosen[fix];
        clause[fix] = if target.bit(v) { v as i32 + 1 } else { -(v as i32 + 1) };
        clauses.push(clause);
    }
}

/// Haar-ish random unitary from the QR factor of a complex Gaussian-like matrix.
pub fn random_unitary(rng: &mut impl Rng, d: usize) -> CMatrix {
    let m = CMatrix::from_fn(d, d, |_, _| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    m.qr().q()
}

/// Random full-rank density matrix `A A^dagger / Tr`.
pub fn random_density(rng: &mut impl Rng, d: usize) -> DensityMatrix {
    let a = CMatrix::from_fn(d, d, |_, _| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let m = &a * a.adjoint();
    let tr = m.trace();
    let m = m / tr;
    // exact Hermitian symmetrization
    let h = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    DensityMatrix::new(h).unwrap()
}
