//! Solvable benchmark instances with planted witnesses.
//!
//! Minimal disagreement parity: given samples `(X_i, y_i)`, find `a` with
//! `#{i : parity(X_i . a) != y_i} <= k`. The encoding introduces one
//! disagreement indicator per sample, defined by the XOR clause
//! `a_{j1} ^ ... ^ a_{jr} ^ d_i = y_i`, and bounds `sum d_i <= k` with a
//! sequential counter.

use rand::seq::index::sample;
use rand::Rng;
use thiserror::Error;

use crate::formula::{Assignment, Clause, ClauseKind, Formula, FormulaError, Literal};
use crate::walksat::solver_rng;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("n and m must both be at least 1")]
    ZeroSize,
    #[error("disagreement bound k = {k} exceeds m = {m}")]
    BoundTooLarge { k: usize, m: usize },
    #[error("flip_count = {flips} exceeds k = {k}")]
    TooManyFlips { flips: usize, k: usize },
    #[error("clause arity {arity} invalid for {n} variables")]
    Arity { arity: usize, n: usize },
    #[error(transparent)]
    Formula(#[from] FormulaError),
}

/// A formula together with an assignment known to satisfy it.
#[derive(Debug, Clone)]
pub struct Planted {
    pub formula: Formula,
    pub witness: Assignment,
}

impl Planted {
    fn checked(formula: Formula, witness: Assignment) -> Self {
        assert!(
            formula.is_satisfied(&witness),
            "generator produced a witness that does not satisfy its formula"
        );
        Planted { formula, witness }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MdpSpec {
    /// Number of samples.
    pub m: usize,
    /// Length of the hidden parity vector.
    pub n: usize,
    /// Disagreement bound.
    pub k: usize,
    /// Samples whose label is flipped.
    pub flip_count: usize,
    pub seed: u64,
}

impl MdpSpec {
    pub fn validate(&self) -> Result<(), GenError> {
        if self.n == 0 || self.m == 0 {
            return Err(GenError::ZeroSize);
        }
        if self.k > self.m {
            return Err(GenError::BoundTooLarge {
                k: self.k,
                m: self.m,
            });
        }
        if self.flip_count > self.k {
            return Err(GenError::TooManyFlips {
                flips: self.flip_count,
                k: self.k,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct MdpInstance {
    pub planted: Planted,
    pub x: Vec<Vec<bool>>,
    pub y: Vec<bool>,
    pub hidden: Vec<bool>,
    pub k: usize,
}

/// Variables `0..n` hold `a`, `n..n+m` hold `d`, the rest are counter
/// registers.
pub fn mdp_a_var(j: usize) -> usize {
    j
}

pub fn mdp_d_var(n: usize, i: usize) -> usize {
    n + i
}

/// Draws `X`, a hidden `a*` and labels with exactly `flip_count` flips, and
/// encodes the instance.
pub fn gen_mdp(spec: &MdpSpec) -> Result<MdpInstance, GenError> {
    spec.validate()?;
    let (x, y, hidden) = draw_mdp(spec.m, spec.n, spec.flip_count, spec.seed);
    let planted = Planted::checked(
        encode_mdp(&x, &y, spec.k)?,
        mdp_witness(&x, &y, &hidden, spec.k),
    );
    Ok(MdpInstance {
        planted,
        x,
        y,
        hidden,
        k: spec.k,
    })
}

/// Sample matrix, labels and hidden vector; labels of `flips` distinct rows
/// disagree with the hidden parity.
pub fn draw_mdp(
    m: usize,
    n: usize,
    flips: usize,
    seed: u64,
) -> (Vec<Vec<bool>>, Vec<bool>, Vec<bool>) {
    let mut rng = solver_rng(seed);
    let hidden: Vec<bool> = (0..n).map(|_| rng.random()).collect();
    let x: Vec<Vec<bool>> = (0..m)
        .map(|_| (0..n).map(|_| rng.random()).collect())
        .collect();
    let mut y: Vec<bool> = x.iter().map(|row| dot(row, &hidden)).collect();
    for i in sample(&mut rng, m, flips.min(m)) {
        y[i] = !y[i];
    }
    (x, y, hidden)
}

fn dot(row: &[bool], a: &[bool]) -> bool {
    row.iter().zip(a).fold(false, |p, (&r, &v)| p ^ (r & v))
}

pub fn encode_mdp(x: &[Vec<bool>], y: &[bool], k: usize) -> Result<Formula, GenError> {
    let m = x.len();
    let n = x.first().map_or(0, Vec::len);
    let mut clauses = Vec::new();
    for (i, row) in x.iter().enumerate() {
        let vars = row
            .iter()
            .enumerate()
            .filter_map(|(j, &b)| b.then_some(mdp_a_var(j)))
            .chain(std::iter::once(mdp_d_var(n, i)));
        clauses.extend(Clause::from_xor_parts(vars, y[i])?);
    }
    let d: Vec<usize> = (0..m).map(|i| mdp_d_var(n, i)).collect();
    let (counter, aux) = at_most_k(&d, k, n + m);
    for lits in counter {
        clauses.extend(Clause::cnf(lits)?);
    }
    Ok(Formula::new(n + m + aux, clauses)?)
}

/// Extends `a` with the implied disagreement indicators and counter values.
pub fn mdp_witness(x: &[Vec<bool>], y: &[bool], a: &[bool], k: usize) -> Assignment {
    let m = x.len();
    let d: Vec<bool> = x.iter().zip(y).map(|(row, &yi)| dot(row, a) ^ yi).collect();
    let mut values: Vec<bool> = a.to_vec();
    values.extend(&d);
    values.extend(counter_values(&d, k, m));
    Assignment::from_bools(values)
}

/// Sequential-counter encoding of `sum xs <= k`; register `s_{i,j}` means
/// "at least `j + 1` of `xs[0..=i]` are true". Returns the clauses and the
/// number of registers allocated from `first_aux`.
pub fn at_most_k(xs: &[usize], k: usize, first_aux: usize) -> (Vec<Vec<Literal>>, usize) {
    let m = xs.len();
    if k >= m {
        return (Vec::new(), 0);
    }
    if k == 0 {
        return (xs.iter().map(|&v| vec![Literal::neg(v)]).collect(), 0);
    }
    let s = |i: usize, j: usize| first_aux + i * k + j;
    let x = |i: usize| Literal::pos(xs[i]);
    let mut out = Vec::new();
    out.push(vec![!x(0), Literal::pos(s(0, 0))]);
    for j in 1..k {
        out.push(vec![Literal::neg(s(0, j))]);
    }
    for i in 1..m - 1 {
        out.push(vec![!x(i), Literal::pos(s(i, 0))]);
        out.push(vec![Literal::neg(s(i - 1, 0)), Literal::pos(s(i, 0))]);
        for j in 1..k {
            out.push(vec![
                !x(i),
                Literal::neg(s(i - 1, j - 1)),
                Literal::pos(s(i, j)),
            ]);
            out.push(vec![Literal::neg(s(i - 1, j)), Literal::pos(s(i, j))]);
        }
        out.push(vec![!x(i), Literal::neg(s(i - 1, k - 1))]);
    }
    out.push(vec![!x(m - 1), Literal::neg(s(m - 2, k - 1))]);
    (out, (m - 1) * k)
}

fn counter_values(d: &[bool], k: usize, m: usize) -> Vec<bool> {
    if k == 0 || k >= m {
        return Vec::new();
    }
    let mut out = Vec::with_capacity((m - 1) * k);
    let mut seen = 0;
    for &di in &d[..m - 1] {
        seen += usize::from(di);
        out.extend((0..k).map(|j| seen > j));
    }
    out
}

/// `m` random XOR clauses over `arity` distinct variables each, with
/// parities chosen so a random hidden assignment satisfies all of them.
pub fn gen_planted_xorsat(
    n: usize,
    m: usize,
    arity: usize,
    seed: u64,
) -> Result<Planted, GenError> {
    gen_planted_mixed(
        &MixedSpec {
            num_vars: n,
            cnf_clauses: 0,
            cnf_arity: 1,
            xor_clauses: m,
            xor_arity: arity,
        },
        seed,
    )
}

/// Shape of a random hybrid formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MixedSpec {
    pub num_vars: usize,
    pub cnf_clauses: usize,
    pub cnf_arity: usize,
    pub xor_clauses: usize,
    pub xor_arity: usize,
}

/// Random CNF and XOR clauses over distinct variables, all satisfied by a
/// hidden assignment. A CNF clause drawn false under the hidden assignment
/// gets one random literal negated. CNF clauses come first.
pub fn gen_planted_mixed(spec: &MixedSpec, seed: u64) -> Result<Planted, GenError> {
    let n = spec.num_vars;
    for (count, arity) in [
        (spec.cnf_clauses, spec.cnf_arity),
        (spec.xor_clauses, spec.xor_arity),
    ] {
        if count > 0 && (arity == 0 || arity > n) {
            return Err(GenError::Arity { arity, n });
        }
    }
    let mut rng = solver_rng(seed);
    let hidden = Assignment::random(n, &mut rng);
    let mut clauses = Vec::with_capacity(spec.cnf_clauses + spec.xor_clauses);
    for _ in 0..spec.cnf_clauses {
        let mut lits: Vec<Literal> = sample(&mut rng, n, spec.cnf_arity)
            .into_iter()
            .map(|v| Literal::new(v, rng.random()))
            .collect();
        if !lits.iter().any(|l| l.eval(hidden.get(l.var()))) {
            let i = rng.random_range(0..lits.len());
            lits[i] = !lits[i];
        }
        clauses.extend(Clause::new(ClauseKind::Cnf, lits)?);
    }
    for _ in 0..spec.xor_clauses {
        let vars: Vec<usize> = sample(&mut rng, n, spec.xor_arity).into_vec();
        let odd = vars.iter().fold(false, |p, &v| p ^ hidden.get(v));
        clauses.extend(Clause::from_xor_parts(vars, odd)?);
    }
    Ok(Planted::checked(Formula::new(n, clauses)?, hidden))
}

/// Random hybrid formula without a planted solution (may be unsatisfiable).
pub fn gen_random_mixed(spec: &MixedSpec, seed: u64) -> Result<Formula, GenError> {
    let n = spec.num_vars;
    let mut rng = solver_rng(seed);
    let mut clauses = Vec::new();
    for _ in 0..spec.cnf_clauses {
        if spec.cnf_arity == 0 || spec.cnf_arity > n {
            return Err(GenError::Arity {
                arity: spec.cnf_arity,
                n,
            });
        }
        let lits: Vec<Literal> = sample(&mut rng, n, spec.cnf_arity)
            .into_iter()
            .map(|v| Literal::new(v, rng.random()))
            .collect();
        clauses.extend(Clause::cnf(lits)?);
    }
    for _ in 0..spec.xor_clauses {
        if spec.xor_arity == 0 || spec.xor_arity > n {
            return Err(GenError::Arity {
                arity: spec.xor_arity,
                n,
            });
        }
        let vars = sample(&mut rng, n, spec.xor_arity).into_vec();
        clauses.extend(Clause::from_xor_parts(vars, rng.random())?);
    }
    Ok(Formula::new(n, clauses)?)
}

/// Witness sidecar: one DIMACS model line set, readable by
/// [`crate::dimacs::parse_model`].
pub fn witness_sidecar(w: &Assignment) -> String {
    crate::dimacs::format_model(w.as_slice())
}
