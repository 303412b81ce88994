use std::fmt::Write as _;

use crate::formula::{Assignment, ClauseKind, Formula, Literal};

/// Binary image of a formula: one row per clause, columns `2j` / `2j + 1` for
/// the positive / negative literal of variable `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossbarProgram {
    rows: usize,
    cols: usize,
    cells: Vec<bool>,
    kinds: Vec<ClauseKind>,
    row_cols: Vec<Vec<u32>>,
    col_rows: Vec<Vec<u32>>,
}

#[inline]
pub fn literal_column(lit: Literal) -> usize {
    2 * lit.var() + usize::from(lit.is_negated())
}

pub fn program_crossbar(f: &Formula) -> CrossbarProgram {
    let rows = f.num_clauses();
    let cols = 2 * f.num_vars();
    let mut cells = vec![false; rows * cols];
    let mut row_cols = Vec::with_capacity(rows);
    let mut col_rows = vec![Vec::new(); cols];
    for (r, clause) in f.clauses().iter().enumerate() {
        let mut these: Vec<u32> = clause
            .literals()
            .iter()
            .map(|&l| literal_column(l) as u32)
            .collect();
        these.sort_unstable();
        for &c in &these {
            cells[r * cols + c as usize] = true;
            col_rows[c as usize].push(r as u32);
        }
        row_cols.push(these);
    }
    CrossbarProgram {
        rows,
        cols,
        cells,
        kinds: f.clauses().iter().map(|c| c.kind()).collect(),
        row_cols,
        col_rows,
    }
}

impl CrossbarProgram {
    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn num_vars(&self) -> usize {
        self.cols / 2
    }

    #[inline]
    pub fn cell(&self, row: usize, col: usize) -> bool {
        self.cells[row * self.cols + col]
    }

    #[inline]
    pub fn kind(&self, row: usize) -> ClauseKind {
        self.kinds[row]
    }

    pub fn kinds(&self) -> &[ClauseKind] {
        &self.kinds
    }

    /// Columns holding a 1 in `row`, ascending.
    #[inline]
    pub fn row_columns(&self, row: usize) -> &[u32] {
        &self.row_cols[row]
    }

    /// Rows holding a 1 in `col`, ascending.
    #[inline]
    pub fn column_rows(&self, col: usize) -> &[u32] {
        &self.col_rows[col]
    }

    /// Number of literals of the clause in `row`.
    #[inline]
    pub fn arity(&self, row: usize) -> usize {
        self.row_cols[row].len()
    }

    pub fn row_popcount(&self, row: usize) -> usize {
        self.cells[row * self.cols..(row + 1) * self.cols]
            .iter()
            .filter(|&&b| b)
            .count()
    }

    pub fn count_kind(&self, kind: ClauseKind) -> usize {
        self.kinds.iter().filter(|&&k| k == kind).count()
    }

    /// Plain portable bitmap (`P1`), one pixel per cell.
    pub fn to_pbm(&self) -> String {
        let mut out = String::new();
        writeln!(out, "P1\n# crossbar {}x{}", self.rows, self.cols).unwrap();
        writeln!(out, "{} {}", self.cols, self.rows).unwrap();
        for r in 0..self.rows {
            let line: Vec<&str> = (0..self.cols)
                .map(|c| if self.cell(r, c) { "1" } else { "0" })
                .collect();
            writeln!(out, "{}", line.join(" ")).unwrap();
        }
        out
    }
}

/// Column drive pattern: column `2j` is driven iff `x_j` is true, `2j + 1`
/// iff it is false.
pub fn input_vector(a: &Assignment) -> Vec<bool> {
    a.as_slice().iter().flat_map(|&v| [v, !v]).collect()
}
