//! DIMACS CNF reader and writer with XOR-clause extension.
//!
//! Grammar accepted by [`parse_dimacs`]:
//!
//! ```text
//! file    := { comment | blank } header { body }
//! comment := 'c' ...                    (skipped anywhere)
//! header  := 'p' ('cnf' | 'xnf') VARS CLAUSES
//! body    := clause | xclause | comment | blank | '%'
//! clause  := { LIT } '0' { { LIT } '0' }   (every line ends with '0')
//! xclause := 'x' [ws] LIT { LIT } '0'
//! ```
//!
//! `LIT` is a non-zero signed integer whose magnitude does not exceed `VARS`.
//! A line consisting of `%` ends the body (SATLIB trailer). XOR lines are
//! accepted under both headers; a negated literal on an XOR line flips the
//! parity the clause requires. Clauses whose literals normalize to a constant
//! true constraint are dropped with a warning. Count mismatches between the
//! header and the body are warnings, not errors.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read};

use thiserror::Error;

use crate::formula::{Clause, ClauseKind, Formula, FormulaError, Literal};

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {source}")]
    Clause {
        line: usize,
        #[source]
        source: FormulaError,
    },
    #[error("missing 'p cnf' header")]
    MissingHeader,
    #[error("i/o error")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum WriteError {
    #[error("clause {index} is an XOR clause; pure CNF output cannot represent it")]
    UnsupportedXor { index: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeaderFormat {
    Cnf,
    Xnf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProblemHeader {
    pub format: HeaderFormat,
    pub declared_vars: usize,
    pub declared_clauses: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseWarning {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseReport {
    pub header: ProblemHeader,
    pub warnings: Vec<ParseWarning>,
    pub num_vars: usize,
    /// Clauses in the returned formula.
    pub num_clauses: usize,
    pub num_xor_clauses: usize,
    /// Clause records read from the body, including dropped tautologies.
    pub clause_records: usize,
    pub dropped_clauses: usize,
}

/// Output dialect for [`write_dimacs`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DimacsStyle {
    /// Plain DIMACS; refuses formulas containing XOR clauses.
    PureCnf,
    /// XOR clauses written as `x`-prefixed lines.
    XPrefixed,
}

pub fn parse_dimacs_str(text: &str) -> Result<(Formula, ParseReport), ParseError> {
    parse_dimacs(text.as_bytes())
}

pub fn parse_dimacs_file(
    path: impl AsRef<std::path::Path>,
) -> Result<(Formula, ParseReport), ParseError> {
    let file = std::fs::File::open(path)?;
    parse_dimacs(file)
}

fn syntax(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        message: message.into(),
    }
}

/// Parses a DIMACS CNF/XNF stream.
pub fn parse_dimacs<R: Read>(reader: R) -> Result<(Formula, ParseReport), ParseError> {
    let reader = BufReader::new(reader);
    let mut header: Option<(ProblemHeader, usize)> = None;
    let mut clauses: Vec<Clause> = Vec::new();
    let mut warnings = Vec::new();
    let mut records = 0usize;
    let mut dropped = 0usize;
    let mut buf = Vec::new();

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('c') {
            continue;
        }
        if text.starts_with('p') {
            if header.is_some() {
                return Err(syntax(line_no, "duplicate problem header"));
            }
            header = Some((parse_header(text, line_no)?, line_no));
            continue;
        }
        let Some((hdr, _)) = header.as_ref() else {
            return Err(syntax(line_no, "clause before 'p' header"));
        };
        if text == "%" {
            break;
        }
        let (kind, body) = match text.strip_prefix('x') {
            Some(rest) => (ClauseKind::Xor, rest),
            None => (ClauseKind::Cnf, text),
        };
        buf.clear();
        let mut terminated_any = false;
        let mut pending = false;
        for token in body.split_whitespace() {
            if kind == ClauseKind::Xor && terminated_any {
                return Err(syntax(line_no, "an XOR line holds exactly one clause"));
            }
            let value: i64 = token
                .parse()
                .map_err(|_| syntax(line_no, format!("invalid literal token '{token}'")))?;
            let Some(lit) = Literal::from_dimacs(value) else {
                if buf.is_empty() {
                    return Err(ParseError::Clause {
                        line: line_no,
                        source: FormulaError::EmptyClause { kind },
                    });
                }
                records += 1;
                match Clause::new(kind, buf.drain(..)) {
                    Ok(Some(c)) => clauses.push(c),
                    Ok(None) => {
                        dropped += 1;
                        warnings.push(ParseWarning {
                            line: line_no,
                            message: format!("{kind} clause is always satisfied; dropped"),
                        });
                    }
                    Err(source) => {
                        return Err(ParseError::Clause {
                            line: line_no,
                            source,
                        })
                    }
                }
                terminated_any = true;
                pending = false;
                continue;
            };
            if lit.var() >= hdr.declared_vars {
                return Err(syntax(
                    line_no,
                    format!(
                        "literal {value} exceeds declared variable count {}",
                        hdr.declared_vars
                    ),
                ));
            }
            buf.push(lit);
            pending = true;
        }
        if pending || !terminated_any {
            return Err(syntax(line_no, "clause is missing its terminating 0"));
        }
    }

    let (hdr, header_line) = header.ok_or(ParseError::MissingHeader)?;
    if records != hdr.declared_clauses {
        warnings.push(ParseWarning {
            line: header_line,
            message: format!(
                "header declares {} clauses but the body has {}",
                hdr.declared_clauses, records
            ),
        });
    }
    let formula =
        Formula::new(hdr.declared_vars, clauses).map_err(|source| ParseError::Clause {
            line: header_line,
            source,
        })?;
    let report = ParseReport {
        header: hdr,
        warnings,
        num_vars: formula.num_vars(),
        num_clauses: formula.num_clauses(),
        num_xor_clauses: formula.num_xor_clauses(),
        clause_records: records,
        dropped_clauses: dropped,
    };
    Ok((formula, report))
}

fn parse_header(text: &str, line: usize) -> Result<ProblemHeader, ParseError> {
    let fields: Vec<&str> = text.split_whitespace().collect();
    if fields.len() != 4 || fields[0] != "p" {
        return Err(syntax(
            line,
            "malformed header, expected 'p cnf VARS CLAUSES'",
        ));
    }
    let format = match fields[1] {
        "cnf" => HeaderFormat::Cnf,
        "xnf" => HeaderFormat::Xnf,
        other => return Err(syntax(line, format!("unknown problem format '{other}'"))),
    };
    let count = |s: &str, what: &str| {
        s.parse::<usize>()
            .map_err(|_| syntax(line, format!("invalid {what} count '{s}'")))
    };
    Ok(ProblemHeader {
        format,
        declared_vars: count(fields[2], "variable")?,
        declared_clauses: count(fields[3], "clause")?,
    })
}

/// Serializes a formula. The header is always `p cnf`, as read by
/// CryptoMiniSat-style tools.
pub fn write_dimacs(f: &Formula, style: DimacsStyle) -> Result<String, WriteError> {
    if style == DimacsStyle::PureCnf {
        if let Some(index) = f.clauses().iter().position(Clause::is_xor) {
            return Err(WriteError::UnsupportedXor { index });
        }
    }
    let mut out = String::new();
    writeln!(out, "p cnf {} {}", f.num_vars(), f.num_clauses()).unwrap();
    for clause in f.clauses() {
        if clause.is_xor() {
            out.push('x');
        }
        for lit in clause.literals() {
            write!(out, "{} ", lit.to_dimacs()).unwrap();
        }
        out.push_str("0\n");
    }
    Ok(out)
}

/// Reads a `v`-line model (as printed by `xnfsat solve` or SAT solvers).
pub fn parse_model(text: &str, num_vars: usize) -> Result<Vec<bool>, ParseError> {
    let mut values = vec![false; num_vars];
    let mut seen = vec![false; num_vars];
    for (idx, line) in text.lines().enumerate() {
        let Some(rest) = line.trim().strip_prefix('v') else {
            continue;
        };
        for token in rest.split_whitespace() {
            let value: i64 = token
                .parse()
                .map_err(|_| syntax(idx + 1, format!("invalid model token '{token}'")))?;
            if let Some(lit) = Literal::from_dimacs(value) {
                if lit.var() >= num_vars {
                    return Err(syntax(
                        idx + 1,
                        format!("model literal {value} out of range"),
                    ));
                }
                values[lit.var()] = !lit.is_negated();
                seen[lit.var()] = true;
            }
        }
    }
    if let Some(v) = seen.iter().position(|s| !s) {
        return Err(syntax(
            0,
            format!("model has no value for variable {}", v + 1),
        ));
    }
    Ok(values)
}

/// Formats a model as `v` lines, at most 20 literals per line, ending in `0`.
pub fn format_model(values: &[bool]) -> String {
    let mut out = String::new();
    let lits: Vec<i64> = values
        .iter()
        .enumerate()
        .map(|(v, &b)| Literal::new(v, !b).to_dimacs())
        .collect();
    for chunk in lits.chunks(20) {
        out.push('v');
        for l in chunk {
            write!(out, " {l}").unwrap();
        }
        out.push('\n');
    }
    out.push_str("v 0\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_plain_cnf() {
        let (f, report) = parse_dimacs_str("p cnf 2 1\n1 -2 0\n").unwrap();
        assert_eq!(f.num_vars(), 2);
        assert_eq!(f.num_clauses(), 1);
        let c = f.clause(0);
        assert_eq!(c.kind(), ClauseKind::Cnf);
        assert_eq!(c.literals(), &[Literal::pos(0), Literal::neg(1)]);
        assert!(report.warnings.is_empty());
    }

    #[test]
    fn parses_x_lines() {
        for text in ["p cnf 3 1\nx1 2 3 0\n", "p xnf 3 1\nx 1 2 3 0\n"] {
            let (f, report) = parse_dimacs_str(text).unwrap();
            assert_eq!(f.num_xor_clauses(), 1);
            assert!(f.clause(0).xor_parity());
            assert_eq!(report.num_xor_clauses, 1);
        }
        let (f, _) = parse_dimacs_str("p cnf 3 1\nx-1 2 3 0\n").unwrap();
        assert!(!f.clause(0).xor_parity());
    }

    #[test]
    fn comments_and_trailer() {
        let text = "c hello\np cnf 3 2\nc mid\n1 2 0\n\n-3 0\n%\n0\n";
        let (f, report) = parse_dimacs_str(text).unwrap();
        assert_eq!(f.num_clauses(), 2);
        assert!(report.warnings.is_empty());
    }

    #[test]
    fn several_clauses_on_one_line() {
        let (f, _) = parse_dimacs_str("p cnf 3 2\n1 2 0 -3 0\n").unwrap();
        assert_eq!(f.num_clauses(), 2);
    }

    #[test]
    fn header_mismatch_is_a_warning() {
        let (f, report) = parse_dimacs_str("p cnf 3 5\n1 2 0\n").unwrap();
        assert_eq!(f.num_clauses(), 1);
        assert_eq!(report.warnings.len(), 1);
        assert_eq!(report.warnings[0].line, 1);
    }

    #[test]
    fn tautology_is_dropped_with_warning() {
        let (f, report) = parse_dimacs_str("p cnf 2 2\n1 -1 2 0\n2 0\n").unwrap();
        assert_eq!(f.num_clauses(), 1);
        assert_eq!(report.dropped_clauses, 1);
        assert_eq!(report.warnings[0].line, 2);
        assert_eq!(
            report.num_clauses + report.dropped_clauses,
            report.clause_records
        );
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let cases = [
            ("p cnf x 1\n1 0\n", 1),
            ("p dnf 1 1\n1 0\n", 1),
            ("p cnf 2 1\n1 3 0\n", 2),
            ("p cnf 2 1\n1 2\n", 2),
            ("p cnf 2 1\n1 a 0\n", 2),
            ("c\np cnf 2 2\n1 0\n0\n", 4),
            ("1 2 0\n", 1),
        ];
        for (text, line) in cases {
            match parse_dimacs_str(text) {
                Err(ParseError::Syntax { line: l, .. })
                | Err(ParseError::Clause { line: l, .. }) => {
                    assert_eq!(l, line, "{text:?}")
                }
                other => panic!("{text:?}: {other:?}"),
            }
        }
        assert!(matches!(
            parse_dimacs_str("c only\n"),
            Err(ParseError::MissingHeader)
        ));
    }

    #[test]
    fn contradictory_xor_is_rejected() {
        // x1 ^ x1 == 1 cannot hold
        assert!(matches!(
            parse_dimacs_str("p cnf 1 1\nx1 1 0\n"),
            Err(ParseError::Clause { line: 2, .. })
        ));
    }

    #[test]
    fn write_styles() {
        let (f, _) = parse_dimacs_str("p cnf 3 2\n1 -2 0\nx-1 2 3 0\n").unwrap();
        let text = write_dimacs(&f, DimacsStyle::XPrefixed).unwrap();
        assert_eq!(text, "p cnf 3 2\n1 -2 0\nx-1 2 3 0\n");
        assert!(matches!(
            write_dimacs(&f, DimacsStyle::PureCnf),
            Err(WriteError::UnsupportedXor { index: 1 })
        ));
        assert_eq!(
            write_dimacs(&Formula::empty(0), DimacsStyle::PureCnf).unwrap(),
            "p cnf 0 0\n"
        );
    }

    #[test]
    fn model_round_trip() {
        let values: Vec<bool> = (0..45).map(|i| i % 3 == 0).collect();
        let text = format_model(&values);
        assert!(text.ends_with("v 0\n"));
        assert_eq!(parse_model(&text, 45).unwrap(), values);
        assert!(parse_model("v 1 0\n", 2).is_err());
    }
}
