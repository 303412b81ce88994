//! Oracles and generators shared by the integration tests. Everything here
//! recomputes from first principles instead of calling the library's own
//! incremental machinery.
#![allow(dead_code)]

use std::path::PathBuf;

use rand::Rng;
use xnfsat_core::{Assignment, Clause, ClauseKind, Formula, Literal};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

/// Random hybrid formula: every clause is CNF or XOR with probability 1/2,
/// arity uniform in `1..=max_arity`. Constant clauses are skipped.
pub fn random_formula<R: Rng>(rng: &mut R, n: usize, m: usize, max_arity: usize) -> Formula {
    let mut clauses = Vec::with_capacity(m);
    while clauses.len() < m {
        let kind = if rng.random() {
            ClauseKind::Xor
        } else {
            ClauseKind::Cnf
        };
        let k = rng.random_range(1..=max_arity.min(n));
        let lits: Vec<Literal> = (0..k)
            .map(|_| Literal::new(rng.random_range(0..n), rng.random()))
            .collect();
        if let Ok(Some(c)) = Clause::new(kind, lits) {
            clauses.push(c);
        }
    }
    Formula::new(n, clauses).unwrap()
}

fn clause_holds(c: &Clause, values: &[bool]) -> bool {
    let t = c
        .literals()
        .iter()
        .filter(|l| values[l.var()] != l.is_negated())
        .count();
    match c.kind() {
        ClauseKind::Cnf => t > 0,
        ClauseKind::Xor => t % 2 == 1,
    }
}

pub fn holds(f: &Formula, values: &[bool]) -> bool {
    f.clauses().iter().all(|c| clause_holds(c, values))
}

/// Flip-and-recount: (clauses repaired, clauses broken) by flipping `v`.
pub fn gain_oracle(f: &Formula, a: &Assignment, v: usize) -> (u32, u32) {
    let before = a.as_slice().to_vec();
    let mut after = before.clone();
    after[v] = !after[v];
    let mut make = 0;
    let mut brk = 0;
    for c in f.clauses() {
        match (clause_holds(c, &before), clause_holds(c, &after)) {
            (false, true) => make += 1,
            (true, false) => brk += 1,
            _ => {}
        }
    }
    (make, brk)
}

pub fn count_models(f: &Formula) -> usize {
    let n = f.num_vars();
    assert!(n <= 20, "brute force limited to 20 variables");
    (0..1u64 << n)
        .filter(|&w| {
            let values: Vec<bool> = (0..n).map(|i| w >> i & 1 == 1).collect();
            holds(f, &values)
        })
        .count()
}

/// Models of `f` projected onto its first `vars` variables; the remaining
/// variables are treated as existentially quantified auxiliaries.
pub fn count_projected_models(f: &Formula, vars: usize) -> usize {
    let extra = f.num_vars() - vars;
    assert!(vars + extra <= 22);
    (0..1u64 << vars)
        .filter(|&w| {
            (0..1u64 << extra).any(|aux| {
                let values: Vec<bool> = (0..vars)
                    .map(|i| w >> i & 1 == 1)
                    .chain((0..extra).map(|i| aux >> i & 1 == 1))
                    .collect();
                holds(f, &values)
            })
        })
        .count()
}

/// Gaussian elimination over GF(2) for a formula made of XOR clauses only.
/// Returns whether the parity system is consistent.
pub fn gf2_consistent(f: &Formula) -> bool {
    let n = f.num_vars();
    let mut rows: Vec<(Vec<bool>, bool)> = f
        .clauses()
        .iter()
        .map(|c| {
            assert!(c.is_xor());
            let mut coef = vec![false; n];
            let mut rhs = true;
            for l in c.literals() {
                coef[l.var()] ^= true;
                rhs ^= l.is_negated();
            }
            (coef, rhs)
        })
        .collect();
    let mut pivot_row = 0;
    for col in 0..n {
        let Some(p) = (pivot_row..rows.len()).find(|&r| rows[r].0[col]) else {
            continue;
        };
        rows.swap(pivot_row, p);
        let pivot = rows[pivot_row].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != pivot_row && row.0[col] {
                for (x, y) in row.0.iter_mut().zip(&pivot.0) {
                    *x ^= *y;
                }
                row.1 ^= pivot.1;
            }
        }
        pivot_row += 1;
    }
    rows.iter()
        .all(|(coef, rhs)| coef.iter().any(|&c| c) || !rhs)
}

/// Number of samples on which parity vector `a` disagrees with its label.
pub fn disagreements(x: &[Vec<bool>], y: &[bool], a: &[bool]) -> usize {
    x.iter()
        .zip(y)
        .filter(|(row, &label)| {
            let p = row.iter().zip(a).fold(false, |p, (&xi, &ai)| p ^ (xi & ai));
            p != label
        })
        .count()
}

/// Smallest disagreement count over every parity vector of length `n`.
pub fn min_disagreements(x: &[Vec<bool>], y: &[bool], n: usize) -> usize {
    (0..1u64 << n)
        .map(|w| {
            let a: Vec<bool> = (0..n).map(|i| w >> i & 1 == 1).collect();
            disagreements(x, y, &a)
        })
        .min()
        .unwrap()
}
