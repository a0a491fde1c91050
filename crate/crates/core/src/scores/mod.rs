//! Categorical data ingestion, BDeu/K2 local scores, parent-set pruning and
//! score files.

mod counts;
mod data;
mod file;
mod metric;
mod table;

pub use counts::{count_configurations, ContingencyCounts};
pub use data::{load_csv, Dataset, VariableMeta};
pub use file::{parse_score_file, write_score_file};
pub use metric::{bdeu_local, k2_local, Metric};
pub use table::{build_score_table, prune_dominated, ParentSetEntry, ScoreTable};

pub(crate) use table::combinations;

#[derive(Debug, thiserror::Error)]
pub enum ScoreError {
    #[error("dataset has no instances")]
    EmptyDataset,
    #[error("line {line}: expected {expected} fields, found {found}")]
    RaggedRow {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: missing value for {column}")]
    MissingValue { line: usize, column: String },
    #[error("variable {0} takes a single value (arity < 2)")]
    SingleValuedColumn(String),
    #[error("duplicate variable name {0}")]
    DuplicateVariable(String),
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("parent limit {limit} must be below the variable count {variables}")]
    ParentLimitTooLarge { limit: usize, variables: usize },
    #[error("equivalent sample size must be positive and finite, got {0}")]
    InvalidEss(f64),
    #[error("invalid score table: {0}")]
    InvalidTable(String),
    #[error("node {0} lists itself as a parent")]
    SelfParent(String),
    #[error("duplicate parent set {parents:?} for node {node}")]
    DuplicateParentSet { node: String, parents: Vec<String> },
    #[error("line {line}: unknown variable {name}")]
    UnknownVariable { line: usize, name: String },
    #[error("declared {declared} {what} but found {found}")]
    CountMismatch {
        what: String,
        declared: usize,
        found: usize,
    },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
