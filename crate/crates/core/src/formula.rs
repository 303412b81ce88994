//! Hybrid XOR-CNF formulas, assignments and clause evaluation.
//!
//! Clauses are canonicalized at construction:
//!
//! * CNF clauses drop repeated identical literals. A clause containing both
//!   `x` and `!x` is a tautology and is not constructed at all.
//! * XOR clauses cancel repeated variables (`x ^ x = 0`), fold every negation
//!   into a single parity bit and store their variables in ascending order.
//!   The parity bit is carried by negating the first literal, so a canonical
//!   XOR clause has at most one negated literal.
//!
//! A clause is satisfied when at least one literal is true (CNF) or when an
//! odd number of literals is true (XOR).

use std::fmt;

use rand::Rng;
use thiserror::Error;

/// Errors raised by formula construction and evaluation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("variable {var} out of range for a formula with {num_vars} variables")]
    VariableOutOfRange { var: usize, num_vars: usize },
    #[error("empty {kind} clause is unsatisfiable")]
    EmptyClause { kind: ClauseKind },
    #[error("assignment has {found} values but the formula has {expected} variables")]
    AssignmentLength { expected: usize, found: usize },
}

/// A possibly negated variable. Variables are 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    var: u32,
    negated: bool,
}

impl Literal {
    #[inline]
    pub fn new(var: usize, negated: bool) -> Self {
        let var = u32::try_from(var).expect("variable index exceeds u32");
        Literal { var, negated }
    }

    #[inline]
    pub fn pos(var: usize) -> Self {
        Self::new(var, false)
    }

    #[inline]
    pub fn neg(var: usize) -> Self {
        Self::new(var, true)
    }

    /// Converts a signed 1-based DIMACS literal. Returns `None` for 0.
    pub fn from_dimacs(value: i64) -> Option<Self> {
        if value == 0 {
            return None;
        }
        Some(Self::new((value.unsigned_abs() - 1) as usize, value < 0))
    }

    pub fn to_dimacs(self) -> i64 {
        let v = i64::from(self.var) + 1;
        if self.negated {
            -v
        } else {
            v
        }
    }

    #[inline]
    pub fn var(self) -> usize {
        self.var as usize
    }

    #[inline]
    pub fn is_negated(self) -> bool {
        self.negated
    }

    /// Truth value of the literal given the value of its variable.
    #[inline]
    pub fn eval(self, value: bool) -> bool {
        value != self.negated
    }
}

impl std::ops::Not for Literal {
    type Output = Literal;
    fn not(self) -> Literal {
        Literal {
            var: self.var,
            negated: !self.negated,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClauseKind {
    Cnf,
    Xor,
}

impl fmt::Display for ClauseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClauseKind::Cnf => "CNF",
            ClauseKind::Xor => "XOR",
        })
    }
}

/// A canonical CNF or XOR clause with at least one literal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Clause {
    kind: ClauseKind,
    lits: Vec<Literal>,
}

impl Clause {
    /// Builds a canonical clause. Returns `Ok(None)` when the literals
    /// normalize to a constant-true constraint (CNF tautology, or an XOR
    /// clause whose variables all cancel with even required parity).
    pub fn new(
        kind: ClauseKind,
        lits: impl IntoIterator<Item = Literal>,
    ) -> Result<Option<Clause>, FormulaError> {
        match kind {
            ClauseKind::Cnf => Self::new_cnf(lits),
            ClauseKind::Xor => {
                let mut parity = true;
                let mut vars: Vec<usize> = Vec::new();
                for lit in lits {
                    parity ^= lit.is_negated();
                    vars.push(lit.var());
                }
                Self::from_xor_parts(vars, parity)
            }
        }
    }

    pub fn cnf(lits: impl IntoIterator<Item = Literal>) -> Result<Option<Clause>, FormulaError> {
        Self::new(ClauseKind::Cnf, lits)
    }

    pub fn xor(lits: impl IntoIterator<Item = Literal>) -> Result<Option<Clause>, FormulaError> {
        Self::new(ClauseKind::Xor, lits)
    }

    fn new_cnf(lits: impl IntoIterator<Item = Literal>) -> Result<Option<Clause>, FormulaError> {
        let mut out: Vec<Literal> = Vec::new();
        let mut any = false;
        for lit in lits {
            any = true;
            if out.contains(&!lit) {
                return Ok(None);
            }
            if !out.contains(&lit) {
                out.push(lit);
            }
        }
        if !any {
            return Err(FormulaError::EmptyClause {
                kind: ClauseKind::Cnf,
            });
        }
        Ok(Some(Clause {
            kind: ClauseKind::Cnf,
            lits: out,
        }))
    }

    /// Builds the canonical XOR clause `XOR(vars) == odd`. Repeated variables
    /// cancel in pairs.
    pub fn from_xor_parts(
        vars: impl IntoIterator<Item = usize>,
        odd: bool,
    ) -> Result<Option<Clause>, FormulaError> {
        let mut vars: Vec<usize> = vars.into_iter().collect();
        vars.sort_unstable();
        let mut kept: Vec<usize> = Vec::with_capacity(vars.len());
        for v in vars {
            if kept.last() == Some(&v) {
                kept.pop();
            } else {
                kept.push(v);
            }
        }
        if kept.is_empty() {
            return if odd {
                Err(FormulaError::EmptyClause {
                    kind: ClauseKind::Xor,
                })
            } else {
                Ok(None)
            };
        }
        let lits = kept
            .iter()
            .enumerate()
            .map(|(i, &v)| Literal::new(v, i == 0 && !odd))
            .collect();
        Ok(Some(Clause {
            kind: ClauseKind::Xor,
            lits,
        }))
    }

    #[inline]
    pub fn kind(&self) -> ClauseKind {
        self.kind
    }

    #[inline]
    pub fn is_xor(&self) -> bool {
        self.kind == ClauseKind::Xor
    }

    #[inline]
    pub fn literals(&self) -> &[Literal] {
        &self.lits
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.lits.len()
    }

    /// Always false: clauses are never empty.
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn variables(&self) -> impl Iterator<Item = usize> + '_ {
        self.lits.iter().map(|l| l.var())
    }

    /// For XOR clauses, the parity the variables must XOR to.
    pub fn xor_parity(&self) -> bool {
        self.lits.iter().fold(true, |p, l| p ^ l.is_negated())
    }

    pub fn max_var(&self) -> usize {
        self.variables().max().unwrap_or(0)
    }

    /// Number of literals that are true under `a`.
    pub fn true_literal_count(&self, a: &Assignment) -> Result<usize, FormulaError> {
        let values = a.as_slice();
        let mut n = 0;
        for lit in &self.lits {
            let value = values
                .get(lit.var())
                .ok_or(FormulaError::VariableOutOfRange {
                    var: lit.var(),
                    num_vars: values.len(),
                })?;
            n += usize::from(lit.eval(*value));
        }
        Ok(n)
    }

    pub fn is_satisfied(&self, a: &Assignment) -> Result<bool, FormulaError> {
        let n = self.true_literal_count(a)?;
        Ok(self.satisfied_by_count(n))
    }

    /// Unchecked count over a value slice; panics if a variable is out of range.
    #[inline]
    pub(crate) fn count_true(&self, values: &[bool]) -> usize {
        self.lits.iter().filter(|l| l.eval(values[l.var()])).count()
    }

    #[inline]
    pub fn satisfied_by_count(&self, true_count: usize) -> bool {
        match self.kind {
            ClauseKind::Cnf => true_count >= 1,
            ClauseKind::Xor => true_count % 2 == 1,
        }
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sep = match self.kind {
            ClauseKind::Cnf => " | ",
            ClauseKind::Xor => " ^ ",
        };
        for (i, lit) in self.lits.iter().enumerate() {
            if i > 0 {
                f.write_str(sep)?;
            }
            if lit.is_negated() {
                write!(f, "!x{}", lit.var())?;
            } else {
                write!(f, "x{}", lit.var())?;
            }
        }
        Ok(())
    }
}

/// Position of a variable inside a clause.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Occurrence {
    pub clause: u32,
    pub position: u32,
}

/// An immutable conjunction of CNF and XOR clauses over `num_vars` variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Formula {
    num_vars: usize,
    clauses: Vec<Clause>,
    incidence: Vec<Vec<Occurrence>>,
}

impl Formula {
    pub fn new(num_vars: usize, clauses: Vec<Clause>) -> Result<Self, FormulaError> {
        for clause in &clauses {
            for v in clause.variables() {
                if v >= num_vars {
                    return Err(FormulaError::VariableOutOfRange { var: v, num_vars });
                }
            }
        }
        let incidence = build_incidence(num_vars, &clauses);
        Ok(Formula {
            num_vars,
            clauses,
            incidence,
        })
    }

    /// Builds a formula from raw literal lists, canonicalizing each clause and
    /// dropping the constant-true ones.
    pub fn from_raw(
        num_vars: usize,
        raw: impl IntoIterator<Item = (ClauseKind, Vec<Literal>)>,
    ) -> Result<Self, FormulaError> {
        let mut clauses = Vec::new();
        for (kind, lits) in raw {
            if let Some(c) = Clause::new(kind, lits)? {
                clauses.push(c);
            }
        }
        Self::new(num_vars, clauses)
    }

    pub fn empty(num_vars: usize) -> Self {
        Formula {
            num_vars,
            clauses: Vec::new(),
            incidence: vec![Vec::new(); num_vars],
        }
    }

    #[inline]
    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    #[inline]
    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn num_xor_clauses(&self) -> usize {
        self.clauses.iter().filter(|c| c.is_xor()).count()
    }

    pub fn num_cnf_clauses(&self) -> usize {
        self.num_clauses() - self.num_xor_clauses()
    }

    #[inline]
    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    #[inline]
    pub fn clause(&self, index: usize) -> &Clause {
        &self.clauses[index]
    }

    /// Clauses containing `var`, with the literal position inside each.
    #[inline]
    pub fn occurrences(&self, var: usize) -> &[Occurrence] {
        &self.incidence[var]
    }

    pub fn incidence(&self) -> &[Vec<Occurrence>] {
        &self.incidence
    }

    /// Recomputes the incidence map from the clause list.
    pub fn rebuild_incidence(&self) -> Vec<Vec<Occurrence>> {
        build_incidence(self.num_vars, &self.clauses)
    }

    pub fn max_clause_len(&self) -> usize {
        self.clauses.iter().map(Clause::len).max().unwrap_or(0)
    }

    fn check_len(&self, a: &Assignment) {
        assert_eq!(
            a.len(),
            self.num_vars,
            "assignment length does not match the formula"
        );
    }

    pub fn validate_assignment(&self, a: &Assignment) -> Result<(), FormulaError> {
        if a.len() != self.num_vars {
            return Err(FormulaError::AssignmentLength {
                expected: self.num_vars,
                found: a.len(),
            });
        }
        Ok(())
    }

    /// True when every clause is satisfied. Panics on a length mismatch.
    pub fn is_satisfied(&self, a: &Assignment) -> bool {
        self.check_len(a);
        let values = a.as_slice();
        self.clauses
            .iter()
            .all(|c| c.satisfied_by_count(c.count_true(values)))
    }

    pub fn violated_count(&self, a: &Assignment) -> usize {
        self.check_len(a);
        let values = a.as_slice();
        self.clauses
            .iter()
            .filter(|c| !c.satisfied_by_count(c.count_true(values)))
            .count()
    }

    /// Sorted, deduplicated variables occurring in at least one violated clause.
    pub fn unsat_variables(&self, a: &Assignment) -> Vec<usize> {
        self.check_len(a);
        let values = a.as_slice();
        let mut mark = vec![false; self.num_vars];
        for c in &self.clauses {
            if !c.satisfied_by_count(c.count_true(values)) {
                for v in c.variables() {
                    mark[v] = true;
                }
            }
        }
        mark.iter()
            .enumerate()
            .filter_map(|(v, &m)| m.then_some(v))
            .collect()
    }
}

fn build_incidence(num_vars: usize, clauses: &[Clause]) -> Vec<Vec<Occurrence>> {
    let mut incidence = vec![Vec::new(); num_vars];
    for (ci, clause) in clauses.iter().enumerate() {
        for (pos, lit) in clause.literals().iter().enumerate() {
            incidence[lit.var()].push(Occurrence {
                clause: ci as u32,
                position: pos as u32,
            });
        }
    }
    incidence
}

/// Truth values for every variable of a formula.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment {
    values: Vec<bool>,
}

impl Assignment {
    pub fn all_true(num_vars: usize) -> Self {
        Assignment {
            values: vec![true; num_vars],
        }
    }

    pub fn all_false(num_vars: usize) -> Self {
        Assignment {
            values: vec![false; num_vars],
        }
    }

    pub fn random<R: Rng + ?Sized>(num_vars: usize, rng: &mut R) -> Self {
        Assignment {
            values: (0..num_vars).map(|_| rng.random()).collect(),
        }
    }

    pub fn from_bools(values: Vec<bool>) -> Self {
        Assignment { values }
    }

    /// Bits of `word`, least significant bit is variable 0.
    pub fn from_bits(word: u64, num_vars: usize) -> Self {
        assert!(num_vars <= 64);
        Assignment {
            values: (0..num_vars).map(|i| word >> i & 1 == 1).collect(),
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn get(&self, var: usize) -> bool {
        self.values[var]
    }

    #[inline]
    pub fn set(&mut self, var: usize, value: bool) {
        self.values[var] = value;
    }

    #[inline]
    pub fn flip(&mut self, var: usize) {
        self.values[var] = !self.values[var];
    }

    #[inline]
    pub fn as_slice(&self) -> &[bool] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<bool> {
        self.values
    }

    /// Truth value of a literal.
    #[inline]
    pub fn lit(&self, lit: Literal) -> bool {
        lit.eval(self.values[lit.var()])
    }

    /// DIMACS model literals, one per variable.
    pub fn to_dimacs_literals(&self) -> Vec<i64> {
        self.values
            .iter()
            .enumerate()
            .map(|(v, &b)| Literal::new(v, !b).to_dimacs())
            .collect()
    }
}
