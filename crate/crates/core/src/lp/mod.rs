//! Bounded-variable linear programs, a revised simplex solver and Gomory
//! fractional cuts.
//!
//! Problems are maximisations over columns with finite bounds. Rows are sparse
//! and carry a sense; internally each row receives a slack so that
//! `a·x + s = rhs`, which keeps the slack basis available for warm starts after
//! new rows are appended.

mod gomory;
mod simplex;

pub use gomory::gomory_cuts;
pub use simplex::{solve_lp, solve_lp_with};

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RowSense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub sense: RowSense,
    pub rhs: f64,
}

impl Row {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Amount by which `x` violates the row (zero or negative when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.activity(x);
        match self.sense {
            RowSense::Le => lhs - self.rhs,
            RowSense::Ge => self.rhs - lhs,
            RowSense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// A maximisation LP with bounded columns and optional integrality flags.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LpProblem {
    pub num_cols: usize,
    pub objective: Vec<f64>,
    pub col_bounds: Vec<(f64, f64)>,
    pub rows: Vec<Row>,
    pub integrality: Vec<bool>,
}

impl LpProblem {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a column and returns its index.
    pub fn add_col(&mut self, objective: f64, lo: f64, hi: f64, integer: bool) -> usize {
        self.objective.push(objective);
        self.col_bounds.push((lo, hi));
        self.integrality.push(integer);
        self.num_cols += 1;
        self.num_cols - 1
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, sense: RowSense, rhs: f64) -> usize {
        self.rows.push(Row { coeffs, sense, rhs });
        self.rows.len() - 1
    }

    /// Appends one row per cut. A basis of the old problem stays usable as a warm
    /// start: the new rows enter with their slacks basic.
    pub fn add_rows<'a>(&mut self, cuts: impl IntoIterator<Item = &'a Cut>) {
        for cut in cuts {
            self.rows.push(cut.to_row());
        }
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest bound or row violation of `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let bounds = self
            .col_bounds
            .iter()
            .zip(x)
            .map(|(&(lo, hi), &v)| (lo - v).max(v - hi));
        let rows = self.rows.iter().map(|r| r.violation(x));
        bounds.chain(rows).fold(0.0, f64::max)
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.num_cols;
        if self.objective.len() != n || self.col_bounds.len() != n || self.integrality.len() != n {
            return Err(LpError::InvalidProblem(
                "column vectors disagree with num_cols".into(),
            ));
        }
        for (j, &(lo, hi)) in self.col_bounds.iter().enumerate() {
            if !lo.is_finite() || !hi.is_finite() || lo > hi {
                return Err(LpError::InvalidProblem(format!(
                    "column {j} has invalid bounds [{lo}, {hi}]"
                )));
            }
        }
        for (i, row) in self.rows.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(LpError::InvalidProblem(format!("row {i} has non-finite rhs")));
            }
            let mut seen = std::collections::HashSet::new();
            for &(j, a) in &row.coeffs {
                if j >= n {
                    return Err(LpError::InvalidProblem(format!(
                        "row {i} references column {j} of {n}"
                    )));
                }
                if !a.is_finite() {
                    return Err(LpError::InvalidProblem(format!("row {i} has a non-finite coefficient")));
                }
                if !seen.insert(j) {
                    return Err(LpError::InvalidProblem(format!(
                        "row {i} lists column {j} twice"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Clones `problem` and appends `cuts` as rows.
pub fn add_rows(problem: &LpProblem, cuts: &[Cut]) -> LpProblem {
    let mut out = problem.clone();
    out.add_rows(cuts);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CutSense {
    Le,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CutOrigin {
    Gomory,
    Cluster,
    Cycle,
}

impl fmt::Display for CutOrigin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CutOrigin::Gomory => "gomory",
            CutOrigin::Cluster => "cluster",
            CutOrigin::Cycle => "cycle",
        })
    }
}

/// A sparse inequality over structural columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Cut {
    pub coeffs: Vec<(usize, f64)>,
    pub sense: CutSense,
    pub rhs: f64,
    pub origin: CutOrigin,
}

impl Cut {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Positive when `x` violates the cut.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.activity(x);
        match self.sense {
            CutSense::Le => lhs - self.rhs,
            CutSense::Ge => self.rhs - lhs,
        }
    }

    pub fn to_row(&self) -> Row {
        Row {
            coeffs: self.coeffs.clone(),
            sense: match self.sense {
                CutSense::Le => RowSense::Le,
                CutSense::Ge => RowSense::Ge,
            },
            rhs: self.rhs,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarStatus {
    Basic,
    AtLower,
    AtUpper,
}

/// Status of every structural column and every row slack.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Basis {
    pub cols: Vec<VarStatus>,
    pub rows: Vec<VarStatus>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpResult {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    pub basis: Basis,
    /// Simplex pivots and bound flips performed.
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexOptions {
    /// Defaults to `50 * (rows + cols)` when unset.
    pub max_iterations: Option<usize>,
    pub feas_tol: f64,
    pub opt_tol: f64,
    pub pivot_tol: f64,
    /// Degenerate pivots tolerated before switching to Bland's rule.
    pub bland_after: usize,
    pub refactor_every: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            max_iterations: None,
            feas_tol: 1e-7,
            opt_tol: 1e-9,
            pivot_tol: 1e-9,
            bland_after: 200,
            refactor_every: 64,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LpError {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("relaxation is unbounded")]
    Unbounded,
    #[error("basis matrix became singular")]
    SingularBasis,
}

/// Integrality tolerance used across the crate.
pub const INT_TOL: f64 = 1e-6;

/// Distance of `v` to the nearest integer.
pub fn frac_distance(v: f64) -> f64 {
    (v - v.round()).abs()
}
