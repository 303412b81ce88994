//! Conversions between CNF and XNF.
//!
//! * [`expand_xor`] writes a `k`-ary XOR clause as its `2^(k-1)` blocking CNF
//!   clauses.
//! * [`extract_xors`] runs that expansion backwards: every group of CNF
//!   clauses over one variable set that contains a complete parity class of
//!   sign patterns is replaced by a single XOR clause.
//! * [`tseitin_cut`] splits a wide XOR clause into a chain of narrower ones
//!   linked by fresh variables.

use std::collections::HashMap;

use thiserror::Error;

use crate::formula::{Clause, ClauseKind, Formula, FormulaError, Literal};

pub const DEFAULT_EXPANSION_CAP: usize = 20;
pub const DEFAULT_EXTRACTION_K_MAX: usize = 6;
pub const DEFAULT_TSEITIN_WIDTH: usize = 5;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TransformError {
    #[error("expected an XOR clause")]
    NotXor,
    #[error("XOR clause of arity {arity} exceeds the expansion cap of {cap}")]
    ExpansionCap { arity: usize, cap: usize },
    #[error("Tseitin chunk width must be at least 2, got {0}")]
    Width(usize),
    #[error(transparent)]
    Formula(#[from] FormulaError),
}

/// Size changes caused by a transformation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompressionStats {
    pub vars_before: usize,
    pub vars_after: usize,
    pub clauses_before: usize,
    pub clauses_after: usize,
    pub xor_fraction_after: f64,
}

impl CompressionStats {
    /// `vars_before / vars_after`.
    pub fn var_ratio(&self) -> f64 {
        ratio(self.vars_before, self.vars_after)
    }

    /// `clauses_before / clauses_after`.
    pub fn clause_ratio(&self) -> f64 {
        ratio(self.clauses_before, self.clauses_after)
    }
}

impl std::fmt::Display for CompressionStats {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "vars {} -> {} (x{:.2}), clauses {} -> {} (x{:.2}), xor fraction {:.3}",
            self.vars_before,
            self.vars_after,
            self.var_ratio(),
            self.clauses_before,
            self.clauses_after,
            self.clause_ratio(),
            self.xor_fraction_after
        )
    }
}

fn ratio(before: usize, after: usize) -> f64 {
    match (before, after) {
        (0, 0) => 1.0,
        (_, 0) => f64::INFINITY,
        (b, a) => b as f64 / a as f64,
    }
}

pub fn compression_stats(before: &Formula, after: &Formula) -> CompressionStats {
    let xor_fraction_after = if after.num_clauses() == 0 {
        0.0
    } else {
        after.num_xor_clauses() as f64 / after.num_clauses() as f64
    };
    CompressionStats {
        vars_before: before.num_vars(),
        vars_after: after.num_vars(),
        clauses_before: before.num_clauses(),
        clauses_after: after.num_clauses(),
        xor_fraction_after,
    }
}

/// Expands an XOR clause into the CNF clauses whose sign patterns carry an even
/// number of extra negations relative to the clause's own literals.
pub fn expand_xor(clause: &Clause, cap: usize) -> Result<Vec<Clause>, TransformError> {
    if !clause.is_xor() {
        return Err(TransformError::NotXor);
    }
    let lits = clause.literals();
    let k = lits.len();
    if k > cap || k >= 64 {
        return Err(TransformError::ExpansionCap { arity: k, cap });
    }
    let mut out = Vec::with_capacity(1 << (k - 1));
    for mask in 0u64..(1u64 << k) {
        if mask.count_ones() % 2 != 0 {
            continue;
        }
        let cnf = lits
            .iter()
            .enumerate()
            .map(|(i, &l)| if mask >> i & 1 == 1 { !l } else { l });
        let c = Clause::cnf(cnf)?.expect("distinct variables cannot form a tautology");
        out.push(c);
    }
    Ok(out)
}

/// Replaces every XOR clause wider than `width` by a Tseitin chain, then
/// expands all XOR clauses into CNF.
pub fn xnf_to_cnf(
    f: &Formula,
    width: Option<usize>,
    cap: usize,
) -> Result<Formula, TransformError> {
    let cut = match width {
        Some(w) => tseitin_formula(f, w)?,
        None => f.clone(),
    };
    let mut clauses = Vec::with_capacity(cut.num_clauses());
    for c in cut.clauses() {
        if c.is_xor() {
            clauses.extend(expand_xor(c, cap)?);
        } else {
            clauses.push(c.clone());
        }
    }
    Ok(Formula::new(cut.num_vars(), clauses)?)
}

/// Replaces complete parity pattern groups of CNF clauses by XOR clauses.
///
/// Only groups of arity `k <= k_max` are considered. A group is converted only
/// when all `2^(k-1)` patterns of one parity class are present; partial
/// groups stay as CNF. Existing XOR clauses pass through. No variables are
/// introduced, so the model set is unchanged.
pub fn extract_xors(f: &Formula, k_max: usize) -> (Formula, CompressionStats) {
    // variable set -> (negation mask -> first clause index)
    let mut groups: HashMap<Vec<usize>, HashMap<u64, usize>> = HashMap::new();
    for (ci, c) in f.clauses().iter().enumerate() {
        if c.is_xor() || c.len() > k_max || c.len() >= 64 {
            continue;
        }
        let mut lits: Vec<Literal> = c.literals().to_vec();
        lits.sort_unstable_by_key(|l| l.var());
        let vars: Vec<usize> = lits.iter().map(|l| l.var()).collect();
        let mask = lits
            .iter()
            .enumerate()
            .fold(0u64, |m, (i, l)| m | (u64::from(l.is_negated()) << i));
        groups.entry(vars).or_default().entry(mask).or_insert(ci);
    }

    // clause index -> replacement (Some(xor) at the group's first clause, None to delete)
    let mut replace: HashMap<usize, Option<Clause>> = HashMap::new();
    for (vars, patterns) in &groups {
        let k = vars.len();
        for class in [0u32, 1] {
            let members: Vec<usize> = (0u64..(1 << k))
                .filter(|m| m.count_ones() % 2 == class)
                .filter_map(|m| patterns.get(&m).copied())
                .collect();
            if members.len() != 1 << (k - 1) {
                continue;
            }
            // A CNF clause with negation mask m rejects exactly the assignment
            // whose bits equal m, so the complete class rejects every
            // assignment of popcount parity `class`.
            let odd = class == 0;
            let xor = Clause::from_xor_parts(vars.iter().copied(), odd)
                .expect("non-empty variable set")
                .expect("non-empty variable set");
            let anchor = *members.iter().min().unwrap();
            for &ci in &members {
                replace.entry(ci).or_insert(None);
            }
            replace.insert(anchor, Some(xor));
        }
    }

    if replace.is_empty() {
        let stats = compression_stats(f, f);
        return (f.clone(), stats);
    }
    let mut clauses = Vec::with_capacity(f.num_clauses());
    for (ci, c) in f.clauses().iter().enumerate() {
        match replace.get(&ci) {
            None => clauses.push(c.clone()),
            Some(Some(x)) => clauses.push(x.clone()),
            Some(None) => {}
        }
    }
    let out = Formula::new(f.num_vars(), clauses).expect("variables unchanged");
    let stats = compression_stats(f, &out);
    (out, stats)
}

/// Splits an XOR clause into a chain of clauses of arity at most `width + 1`.
///
/// Fresh variables are numbered from `first_aux`. Returns the chain and the
/// number of auxiliary variables used. Clauses of arity `<= width` are
/// returned unchanged.
pub fn tseitin_cut(
    clause: &Clause,
    width: usize,
    first_aux: usize,
) -> Result<(Vec<Clause>, usize), TransformError> {
    if width < 2 {
        return Err(TransformError::Width(width));
    }
    if !clause.is_xor() {
        return Err(TransformError::NotXor);
    }
    if clause.len() <= width {
        return Ok((vec![clause.clone()], 0));
    }
    let mut pending: &[Literal] = clause.literals();
    let mut carry: Option<Literal> = None;
    let mut out = Vec::new();
    let mut aux = 0usize;
    loop {
        if let Some(c) = carry {
            if pending.len() <= width {
                // last link: carry ^ rest must equal the original requirement
                let lits = std::iter::once(c).chain(pending.iter().copied());
                out.push(Clause::xor(lits)?.expect("fresh variable prevents cancellation"));
                break;
            }
        }
        let take = if carry.is_some() { width - 1 } else { width };
        let (head, tail) = pending.split_at(take);
        pending = tail;
        let fresh = Literal::pos(first_aux + aux);
        aux += 1;
        // carry ^ head ^ fresh == 0, written as carry ^ head ^ !fresh == 1
        let lits = carry
            .into_iter()
            .chain(head.iter().copied())
            .chain(std::iter::once(!fresh));
        out.push(Clause::xor(lits)?.expect("fresh variable prevents cancellation"));
        carry = Some(fresh);
    }
    Ok((out, aux))
}

/// Applies [`tseitin_cut`] to every XOR clause wider than `width`.
pub fn tseitin_formula(f: &Formula, width: usize) -> Result<Formula, TransformError> {
    if width < 2 {
        return Err(TransformError::Width(width));
    }
    let mut next_var = f.num_vars();
    let mut clauses = Vec::with_capacity(f.num_clauses());
    for c in f.clauses() {
        if c.kind() == ClauseKind::Xor && c.len() > width {
            let (chain, used) = tseitin_cut(c, width, next_var)?;
            next_var += used;
            clauses.extend(chain);
        } else {
            clauses.push(c.clone());
        }
    }
    Ok(Formula::new(next_var, clauses)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Assignment;

    fn x(v: usize) -> Literal {
        Literal::pos(v)
    }
    fn nx(v: usize) -> Literal {
        Literal::neg(v)
    }

    #[test]
    fn three_way_xor_expansion() {
        let c = Clause::xor([x(0), x(1), x(2)]).unwrap().unwrap();
        let mut got: Vec<Vec<Literal>> = expand_xor(&c, DEFAULT_EXPANSION_CAP)
            .unwrap()
            .iter()
            .map(|c| c.literals().to_vec())
            .collect();
        let mut want = vec![
            vec![nx(0), nx(1), x(2)],
            vec![nx(0), x(1), nx(2)],
            vec![x(0), nx(1), nx(2)],
            vec![x(0), x(1), x(2)],
        ];
        got.sort();
        want.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn unit_xor_expands_to_unit() {
        let c = Clause::xor([nx(3)]).unwrap().unwrap();
        let out = expand_xor(&c, 20).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].literals(), &[nx(3)]);
        assert_eq!(out[0].kind(), ClauseKind::Cnf);
    }

    #[test]
    fn expansion_guard() {
        let c = Clause::xor((0..8).map(x)).unwrap().unwrap();
        assert_eq!(
            expand_xor(&c, 7),
            Err(TransformError::ExpansionCap { arity: 8, cap: 7 })
        );
        let cnf = Clause::cnf([x(0)]).unwrap().unwrap();
        assert_eq!(expand_xor(&cnf, 7), Err(TransformError::NotXor));
    }

    #[test]
    fn extract_recovers_paper_example() {
        let c = Clause::xor([x(0), x(1), x(2)]).unwrap().unwrap();
        let f = Formula::new(3, expand_xor(&c, 20).unwrap()).unwrap();
        let (g, stats) = extract_xors(&f, DEFAULT_EXTRACTION_K_MAX);
        assert_eq!(g.clauses(), &[c]);
        assert_eq!(stats.clauses_before, 4);
        assert_eq!(stats.clauses_after, 1);
        assert_eq!(stats.xor_fraction_after, 1.0);
    }

    #[test]
    fn extract_leaves_plain_cnf_alone() {
        let f = Formula::from_raw(
            3,
            vec![
                (ClauseKind::Cnf, vec![x(0), x(1)]),
                (ClauseKind::Cnf, vec![nx(1), x(2)]),
                (ClauseKind::Cnf, vec![x(0), nx(1), x(2)]),
            ],
        )
        .unwrap();
        let (g, stats) = extract_xors(&f, 6);
        assert_eq!(g, f);
        assert_eq!(stats.clause_ratio(), 1.0);
        assert_eq!(stats.var_ratio(), 1.0);
    }

    #[test]
    fn partial_groups_are_not_merged() {
        let c = Clause::xor([x(0), x(1), x(2)]).unwrap().unwrap();
        let mut parts = expand_xor(&c, 20).unwrap();
        parts.pop();
        let f = Formula::new(3, parts).unwrap();
        let (g, _) = extract_xors(&f, 6);
        assert_eq!(g, f);
    }

    #[test]
    fn compression_of_reported_instance_sizes() {
        let before = Formula::empty(174);
        let after = Formula::empty(32);
        let mut s = compression_stats(&before, &after);
        s.clauses_before = 623;
        s.clauses_after = 96;
        assert!((s.var_ratio() - 5.44).abs() < 0.005);
        assert!((s.clause_ratio() - 6.49).abs() < 0.005);
        let same = compression_stats(&before, &before);
        assert_eq!(same.var_ratio(), 1.0);
        assert_eq!(same.clause_ratio(), 1.0);
    }

    #[test]
    fn tseitin_arity5_width3() {
        let c = Clause::xor([x(0), nx(1), x(2), x(3), x(4)])
            .unwrap()
            .unwrap();
        let (chain, aux) = tseitin_cut(&c, 3, 5).unwrap();
        assert_eq!(chain.len(), 2);
        assert_eq!(aux, 1);
        assert!(chain.iter().all(|c| c.len() <= 4));
        // projection onto the original variables
        for w in 0..32u64 {
            let orig = Assignment::from_bits(w, 5);
            let want = c.is_satisfied(&orig).unwrap();
            let extended = (0..2u64).any(|a| {
                let ext = Assignment::from_bits(w | a << 5, 6);
                chain.iter().all(|k| k.is_satisfied(&ext).unwrap())
            });
            assert_eq!(want, extended);
        }
    }

    #[test]
    fn tseitin_identity_and_errors() {
        let c = Clause::xor([x(0), x(1), x(2)]).unwrap().unwrap();
        assert_eq!(tseitin_cut(&c, 3, 3).unwrap(), (vec![c.clone()], 0));
        assert_eq!(tseitin_cut(&c, 1, 3), Err(TransformError::Width(1)));
    }

    #[test]
    fn xnf_to_cnf_counts() {
        let f = Formula::from_raw(
            4,
            vec![
                (ClauseKind::Xor, vec![x(0), x(1), x(2), x(3)]),
                (ClauseKind::Cnf, vec![x(0), nx(3)]),
            ],
        )
        .unwrap();
        let g = xnf_to_cnf(&f, None, 20).unwrap();
        assert_eq!(g.num_clauses(), 9);
        assert_eq!(g.num_xor_clauses(), 0);
        let h = xnf_to_cnf(&f, Some(2), 20).unwrap();
        assert_eq!(h.num_xor_clauses(), 0);
        assert!(h.num_vars() > 4);
    }
}
