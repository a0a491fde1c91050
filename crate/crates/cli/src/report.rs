//! JSON run reports and their conversion from solver output.

use std::path::Path;

use bnlearn_core::scores::ScoreTable;
use bnlearn_core::solver::{LearnResult, SolveConfig, SolveMode};
use serde::{Deserialize, Serialize};

/// One solve, as written by `learn --stats-json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub file: String,
    pub n: usize,
    /// Parsed from file names shaped `title_instances_limit.scores`.
    pub instances: Option<u64>,
    pub ilp_variables: usize,
    pub score: f64,
    pub elapsed_sec: f64,
    pub cluster_cut_iterations: usize,
    pub cycle_cut_iterations: usize,
    pub cycle_cut_count: usize,
    pub optimal: bool,
    pub trace: Vec<TracePoint>,
    pub dag: DagReport,
    pub config: ConfigReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub iter: usize,
    pub relax_obj: f64,
    /// Best heuristic score so far; null when the heuristic has not produced one.
    pub heur_obj: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DagReport {
    pub names: Vec<String>,
    /// Parent ids per node.
    pub parents: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigReport {
    pub mode: String,
    pub use_cycle_cuts: bool,
    pub use_gomory: bool,
    pub use_heuristic: bool,
    pub time_limit: f64,
    pub node_limit: Option<u64>,
}

impl From<&SolveConfig> for ConfigReport {
    fn from(c: &SolveConfig) -> Self {
        ConfigReport {
            mode: c.mode.to_string(),
            use_cycle_cuts: c.use_cycle_cuts,
            use_gomory: c.use_gomory,
            use_heuristic: c.use_heuristic,
            time_limit: c.time_limit,
            node_limit: c.node_limit,
        }
    }
}

impl ConfigReport {
    pub fn to_config(&self) -> anyhow::Result<SolveConfig> {
        Ok(SolveConfig {
            mode: self.mode.parse::<SolveMode>().map_err(anyhow::Error::msg)?,
            use_cycle_cuts: self.use_cycle_cuts,
            use_gomory: self.use_gomory,
            use_heuristic: self.use_heuristic,
            time_limit: self.time_limit,
            node_limit: self.node_limit,
            ..SolveConfig::default()
        })
    }
}

/// `asia_100_2.scores` has 100 instances.
pub fn instances_from_name(path: &Path) -> Option<u64> {
    let stem = path.file_stem()?.to_str()?;
    let parts: Vec<&str> = stem.rsplitn(3, '_').collect();
    if parts.len() == 3 && parts[0].parse::<u64>().is_ok() {
        parts[1].parse().ok()
    } else {
        None
    }
}

pub fn trace_points(result: &LearnResult) -> Vec<TracePoint> {
    let heur = &result.stats.heuristic_score_trace;
    result
        .stats
        .objective_trace
        .iter()
        .map(|&(iter, relax_obj)| TracePoint {
            iter,
            relax_obj,
            heur_obj: heur.iter().rev().find(|&&(i, _)| i <= iter).map(|&(_, s)| s),
        })
        .collect()
}

impl RunReport {
    pub fn new(path: &Path, table: &ScoreTable, config: &SolveConfig, result: &LearnResult) -> Self {
        let s = &result.stats;
        RunReport {
            file: path.display().to_string(),
            n: table.num_nodes(),
            instances: instances_from_name(path),
            ilp_variables: s.ilp_variable_count,
            score: result.dag.total_score,
            elapsed_sec: s.elapsed_seconds,
            cluster_cut_iterations: s.cluster_cut_iterations,
            cycle_cut_iterations: s.cycle_cut_iterations,
            cycle_cut_count: s.cycle_cut_count,
            optimal: s.optimal,
            trace: trace_points(result),
            dag: DagReport {
                names: table.names().to_vec(),
                parents: result.dag.parent_choice.clone(),
            },
            config: config.into(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }
}
