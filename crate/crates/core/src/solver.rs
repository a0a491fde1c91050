//! Branch-and-bound over the LP relaxation and the cutting-plane controller
//! that learns an optimal structure.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::heuristic::sink_heuristic;
use crate::lp::{
    frac_distance, gomory_cuts, solve_lp, solve_lp_with, Basis, Cut, CutOrigin, LpError, LpProblem, LpResult,
    LpStatus, Row, SimplexOptions, VarStatus, INT_TOL,
};
use crate::model::{
    build_model, cluster_cut, cluster_cut_with_origin, extract_dag, induced_digraph, topological_order, BnIlpModel,
    DagSolution, FractionalSolution, ModelError,
};
use crate::scores::ScoreTable;
use crate::separation::{
    cycle_clusters, enumerate_elementary_cycles, find_violated_cluster, Cluster, SeparationOptions, SEP_TOL,
    SUPPORT_EPS,
};

#[derive(Debug, thiserror::Error)]
pub enum SolveError {
    #[error("no DAG can be assembled from the candidate parent sets")]
    NoFeasibleDag,
    #[error("no structure was found before the limit was reached")]
    NoSolutionWithinLimits,
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("simplex iteration limit reached")]
    LpIterationLimit,
    #[error("cluster sub-program hit a limit before proving optimality")]
    SubIpLimit,
    #[error("more than {cap} elementary cycles; the solution graph is too dense")]
    CycleCapExceeded { cap: usize },
    #[error("exhaustive search supports at most {max} nodes, got {n}")]
    TooManyNodes { n: usize, max: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("integer callback returned cuts that the candidate satisfies")]
    UnresolvedCallback,
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum SolveMode {
    /// Integer candidates are separated inside one search tree.
    #[default]
    InTree,
    /// The tree is rebuilt from scratch after each round of cuts.
    Restart,
}

impl fmt::Display for SolveMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveMode::InTree => "in-tree",
            SolveMode::Restart => "restart",
        })
    }
}

impl FromStr for SolveMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "in-tree" | "in_tree" | "intree" => Ok(SolveMode::InTree),
            "restart" => Ok(SolveMode::Restart),
            other => Err(format!("unknown mode {other:?} (expected in-tree or restart)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    pub mode: SolveMode,
    pub use_cycle_cuts: bool,
    pub use_gomory: bool,
    pub use_heuristic: bool,
    /// Seconds.
    pub time_limit: f64,
    pub node_limit: Option<u64>,
    pub int_tol: f64,
    pub sep_tol: f64,
    pub support_eps: f64,
    /// Gomory rounds at the root of each tree.
    pub gomory_rounds: usize,
    pub gomory_max_cuts: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            mode: SolveMode::InTree,
            use_cycle_cuts: true,
            use_gomory: true,
            use_heuristic: true,
            time_limit: 3600.0,
            node_limit: None,
            int_tol: INT_TOL,
            sep_tol: SEP_TOL,
            support_eps: SUPPORT_EPS,
            gomory_rounds: 3,
            gomory_max_cuts: 10,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<(), SolveError> {
        if !(self.time_limit > 0.0) {
            return Err(SolveError::InvalidConfig("time limit must be positive".into()));
        }
        for (name, v) in [("int_tol", self.int_tol), ("sep_tol", self.sep_tol), ("support_eps", self.support_eps)] {
            if !(v > 0.0 && v < 0.5) {
                return Err(SolveError::InvalidConfig(format!("{name} must lie in (0, 0.5)")));
            }
        }
        Ok(())
    }

    fn deadline(&self, start: Instant) -> Option<Instant> {
        Duration::try_from_secs_f64(self.time_limit)
            .ok()
            .and_then(|d| start.checked_add(d))
    }
}

/// Limits and tolerances of one branch-and-bound run.
#[derive(Debug, Clone, PartialEq)]
pub struct BnbParams {
    pub deadline: Option<Instant>,
    pub node_limit: Option<u64>,
    pub int_tol: f64,
    /// Nodes whose bound does not beat the incumbent by more than this are pruned.
    pub prune_tol: f64,
    pub gomory_rounds: usize,
    pub gomory_max_cuts: usize,
    /// When set, rows from this index on that are slack at the root optimum
    /// leave the node LPs and return only once a node solution violates them.
    pub lazy_rows_from: Option<usize>,
    /// Warm start for the root LP.
    pub root_basis: Option<Basis>,
}

impl Default for BnbParams {
    fn default() -> Self {
        BnbParams {
            deadline: None,
            node_limit: None,
            int_tol: INT_TOL,
            prune_tol: 1e-9,
            gomory_rounds: 0,
            gomory_max_cuts: 10,
            lazy_rows_from: None,
            root_basis: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BnbStatus {
    Optimal,
    Infeasible,
    TimeLimit,
    NodeLimit,
}

#[derive(Debug, Clone)]
pub struct BnbResult {
    pub status: BnbStatus,
    /// Best integer point, with integer columns rounded.
    pub x: Option<Vec<f64>>,
    /// Objective of `x`, or `-inf` without one.
    pub objective: f64,
    pub nodes: u64,
    pub lp_iterations: usize,
    /// Cuts returned by the integer callback, in the order they were added.
    pub callback_cuts: Vec<Cut>,
    pub gomory_cuts: usize,
}

/// Rejects an integer candidate by returning cuts it violates, or accepts it
/// by returning none.
pub type IntegerCallback<'a> = &'a mut dyn FnMut(&[f64]) -> Result<Vec<Cut>, SolveError>;

/// A node of the search tree: bound changes relative to the root.
#[derive(Debug, Clone)]
pub struct BnbNode {
    pub fixed: Vec<(usize, f64, f64)>,
    pub lp_bound: f64,
    pub depth: usize,
    basis: Option<Basis>,
    seq: u64,
}

impl PartialEq for BnbNode {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for BnbNode {}

impl PartialOrd for BnbNode {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for BnbNode {
    // best bound first, then deeper, then newer
    fn cmp(&self, other: &Self) -> Ordering {
        self.lp_bound
            .total_cmp(&other.lp_bound)
            .then(self.depth.cmp(&other.depth))
            .then(self.seq.cmp(&other.seq))
    }
}

/// Branch-and-bound with the limits taken from `config`.
pub fn solve_bnb(
    problem: &LpProblem,
    config: &SolveConfig,
    incumbent_hint: Option<(&[f64], f64)>,
    callback: Option<IntegerCallback<'_>>,
) -> Result<BnbResult, SolveError> {
    config.validate()?;
    let params = BnbParams {
        deadline: config.deadline(Instant::now()),
        node_limit: config.node_limit,
        int_tol: config.int_tol,
        gomory_rounds: if config.use_gomory { config.gomory_rounds } else { 0 },
        gomory_max_cuts: config.gomory_max_cuts,
        ..BnbParams::default()
    };
    solve_bnb_until(problem, &params, incumbent_hint, callback)
}

/// Best-first branch-and-bound maximising `problem` over its integer columns.
///
/// Branches on the most fractional column (lowest index on ties). Gomory rounds,
/// if requested, run at the root only and the cuts stay local to this call.
pub fn solve_bnb_until(
    problem: &LpProblem,
    params: &BnbParams,
    incumbent_hint: Option<(&[f64], f64)>,
    mut callback: Option<IntegerCallback<'_>>,
) -> Result<BnbResult, SolveError> {
    let mut prob = problem.clone();
    let root_bounds = prob.col_bounds.clone();
    let opts = SimplexOptions::default();
    let mut incumbent: Option<(Vec<f64>, f64)> = incumbent_hint.map(|(x, v)| (x.to_vec(), v));
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    heap.push(BnbNode {
        fixed: Vec::new(),
        lp_bound: f64::INFINITY,
        depth: 0,
        basis: params.root_basis.clone(),
        seq,
    });
    let mut out = BnbResult {
        status: BnbStatus::Optimal,
        x: None,
        objective: f64::NEG_INFINITY,
        nodes: 0,
        lp_iterations: 0,
        callback_cuts: Vec::new(),
        gomory_cuts: 0,
    };
    let beats = |inc: &Option<(Vec<f64>, f64)>, bound: f64| inc.as_ref().is_none_or(|(_, v)| bound > v + params.prune_tol);

    let mut lazy: Vec<Row> = Vec::new();
    let mut limit = None;
    while let Some(node) = heap.pop() {
        if !beats(&incumbent, node.lp_bound) {
            // every remaining node has a bound no better than this one
            break;
        }
        if params.deadline.is_some_and(|d| Instant::now() >= d) {
            limit = Some(BnbStatus::TimeLimit);
            break;
        }
        if params.node_limit.is_some_and(|l| out.nodes >= l) {
            limit = Some(BnbStatus::NodeLimit);
            break;
        }
        out.nodes += 1;

        let mut bounds = root_bounds.clone();
        for &(j, lo, hi) in &node.fixed {
            bounds[j] = (lo, hi);
        }
        let mut basis = node.basis;
        let mut rounds_left = if node.depth == 0 { params.gomory_rounds } else { 0 };
        loop {
            let r = solve_node_lp(&prob, &bounds, basis.as_ref(), &opts)?;
            out.lp_iterations += r.iterations;
            if r.status == LpStatus::Infeasible || !beats(&incumbent, r.objective) {
                break;
            }
            let before = lazy.len();
            lazy.retain(|row| {
                if row.violation(&r.x) > params.prune_tol {
                    prob.rows.push(row.clone());
                    false
                } else {
                    true
                }
            });
            if lazy.len() != before {
                basis = Some(r.basis);
                continue;
            }
            let branch_col = (0..prob.num_cols)
                .filter(|&j| prob.integrality[j] && frac_distance(r.x[j]) > params.int_tol)
                .min_by(|&a, &b| {
                    let fa = (r.x[a] - r.x[a].floor() - 0.5).abs();
                    let fb = (r.x[b] - r.x[b].floor() - 0.5).abs();
                    fa.total_cmp(&fb).then(a.cmp(&b))
                });
            if let Some(j) = branch_col {
                if rounds_left > 0 {
                    rounds_left -= 1;
                    let cuts = gomory_cuts(&prob, &r, params.gomory_max_cuts);
                    if !cuts.is_empty() {
                        out.gomory_cuts += cuts.len();
                        prob.add_rows(&cuts);
                        basis = Some(r.basis);
                        continue;
                    }
                }
                let mut r = r;
                if node.depth == 0 {
                    if let Some(from) = params.lazy_rows_from {
                        move_slack_rows(&mut prob, &mut r, from, &mut lazy);
                    }
                }
                let v = r.x[j];
                let (lo, hi) = bounds[j];
                for (clo, chi) in [(lo, v.floor()), (v.ceil(), hi)] {
                    let mut fixed = node.fixed.clone();
                    fixed.push((j, clo, chi));
                    seq += 1;
                    heap.push(BnbNode {
                        fixed,
                        lp_bound: r.objective,
                        depth: node.depth + 1,
                        basis: Some(r.basis.clone()),
                        seq,
                    });
                }
                break;
            }
            let mut xi = r.x.clone();
            for (j, v) in xi.iter_mut().enumerate() {
                if prob.integrality[j] {
                    *v = v.round();
                }
            }
            if let Some(cb) = callback.as_mut() {
                let cuts = cb(&xi)?;
                if !cuts.is_empty() {
                    if cuts.iter().all(|c| c.violation(&xi) <= params.prune_tol) {
                        return Err(SolveError::UnresolvedCallback);
                    }
                    prob.add_rows(&cuts);
                    out.callback_cuts.extend(cuts);
                    basis = Some(r.basis);
                    continue;
                }
            }
            let obj = prob.objective_value(&xi);
            if incumbent.as_ref().is_none_or(|(_, v)| obj > *v) {
                incumbent = Some((xi, obj));
            }
            break;
        }
    }

    out.status = match (limit, &incumbent) {
        (Some(l), _) => l,
        (None, Some(_)) => BnbStatus::Optimal,
        (None, None) => BnbStatus::Infeasible,
    };
    if let Some((x, v)) = incumbent {
        out.x = Some(x);
        out.objective = v;
    }
    Ok(out)
}

/// Moves rows at or after `from` whose slack is basic and strictly positive at
/// `r` into `lazy`, keeping `r.basis` consistent with the remaining rows.
fn move_slack_rows(prob: &mut LpProblem, r: &mut LpResult, from: usize, lazy: &mut Vec<Row>) {
    let rows = std::mem::take(&mut prob.rows);
    let statuses = std::mem::take(&mut r.basis.rows);
    for (i, (row, status)) in rows.into_iter().zip(statuses).enumerate() {
        if i >= from && status == VarStatus::Basic && row.violation(&r.x) < -1e-6 {
            lazy.push(row);
        } else {
            prob.rows.push(row);
            r.basis.rows.push(status);
        }
    }
}

fn solve_node_lp(
    prob: &LpProblem,
    bounds: &[(f64, f64)],
    basis: Option<&Basis>,
    opts: &SimplexOptions,
) -> Result<LpResult, SolveError> {
    let r = solve_lp_with(prob, bounds, basis, opts)?;
    if r.status != LpStatus::IterationLimit {
        return Ok(r);
    }
    let r = solve_lp_with(prob, bounds, None, opts)?;
    if r.status == LpStatus::IterationLimit {
        return Err(SolveError::LpIterationLimit);
    }
    Ok(r)
}

/// Counters and traces of one structure-learning run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SolveStats {
    pub ilp_variable_count: usize,
    pub best_score: f64,
    pub elapsed_seconds: f64,
    /// Separation rounds that added a cluster cut found by the sub-program.
    pub cluster_cut_iterations: usize,
    /// Separation rounds that added at least one cycle cut.
    pub cycle_cut_iterations: usize,
    /// Distinct cycle-cut rows added.
    pub cycle_cut_count: usize,
    /// Best heuristic score so far, recorded at each outer iteration.
    pub heuristic_score_trace: Vec<(usize, f64)>,
    /// Root relaxation objective at each outer iteration.
    pub objective_trace: Vec<(usize, f64)>,
    pub optimal: bool,
    pub outer_iterations: usize,
    pub bnb_nodes: u64,
    pub gomory_cut_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnResult {
    pub dag: DagSolution,
    pub stats: SolveStats,
}

/// Learns a highest-scoring DAG over `table`.
///
/// Each outer iteration solves the root relaxation, runs the heuristic and
/// separates cluster and cycle cuts. Once the relaxation admits no more cuts a
/// branch-and-bound run finishes the job; in-tree mode rejects cyclic integer
/// candidates inside that tree, restart mode cuts the cyclic optimum and starts
/// over. On a limit the best DAG seen so far is returned with `optimal` unset.
pub fn learn_structure(table: &ScoreTable, config: &SolveConfig) -> Result<LearnResult, SolveError> {
    config.validate()?;
    let start = Instant::now();
    let deadline = config.deadline(start);
    let mut ctl = Controller {
        model: build_model(table),
        config,
        sep: SeparationOptions {
            sep_tol: config.sep_tol,
            support_eps: config.support_eps,
            deadline,
        },
        stats: SolveStats::default(),
        best: None,
        best_heuristic: f64::NEG_INFINITY,
    };
    ctl.stats.ilp_variable_count = ctl.model.num_columns();
    let finished = match ctl.run(deadline) {
        Ok(f) => f,
        // the sub-program only stops early on the shared deadline
        Err(SolveError::SubIpLimit) => false,
        Err(e) => return Err(e),
    };

    let dag = match ctl.best.take() {
        Some(d) => d,
        None => {
            let zero = FractionalSolution::new(&ctl.model, vec![0.0; ctl.model.num_columns()]);
            sink_heuristic(&ctl.model, &zero).map_err(|_| SolveError::NoSolutionWithinLimits)?
        }
    };
    let mut stats = ctl.stats;
    stats.best_score = dag.total_score;
    stats.optimal = finished;
    stats.elapsed_seconds = start.elapsed().as_secs_f64();
    Ok(LearnResult { dag, stats })
}

struct Controller<'a> {
    model: BnIlpModel,
    config: &'a SolveConfig,
    sep: SeparationOptions,
    stats: SolveStats,
    best: Option<DagSolution>,
    best_heuristic: f64,
}

impl Controller<'_> {
    /// Returns whether optimality was proven.
    fn run(&mut self, deadline: Option<Instant>) -> Result<bool, SolveError> {
        let mut basis: Option<Basis> = None;
        let mut iter = 0;
        loop {
            if deadline.is_some_and(|d| Instant::now() >= d) {
                return Ok(false);
            }
            iter += 1;
            self.stats.outer_iterations = iter;
            let lp = solve_lp(self.model.problem(), basis.as_ref())?;
            let lp = if lp.status == LpStatus::IterationLimit {
                solve_lp(self.model.problem(), None)?
            } else {
                lp
            };
            match lp.status {
                LpStatus::Optimal => {}
                LpStatus::Infeasible => return Err(SolveError::NoFeasibleDag),
                LpStatus::IterationLimit => return Err(SolveError::LpIterationLimit),
            }
            basis = Some(lp.basis);
            self.stats.objective_trace.push((iter, lp.objective));
            let x = FractionalSolution {
                x: lp.x,
                objective: lp.objective,
            };

            if self.config.use_heuristic {
                if let Ok(dag) = sink_heuristic(&self.model, &x) {
                    self.best_heuristic = self.best_heuristic.max(dag.total_score);
                    self.offer(dag);
                }
                if self.best_heuristic.is_finite() {
                    self.stats.heuristic_score_trace.push((iter, self.best_heuristic));
                }
            }

            if self.separate(&x)? > 0 {
                continue;
            }

            let done = match self.config.mode {
                SolveMode::InTree => self.tree_in_place(deadline, basis.as_ref())?,
                SolveMode::Restart => self.tree_restart(deadline, basis.as_ref())?,
            };
            match done {
                TreeOutcome::Proven => return Ok(true),
                TreeOutcome::Limit => return Ok(false),
                TreeOutcome::CutsAdded => continue,
            }
        }
    }

    fn offer(&mut self, dag: DagSolution) {
        if self.best.as_ref().is_none_or(|b| dag.total_score > b.total_score) {
            self.best = Some(dag);
        }
    }

    fn bnb_params(&self, deadline: Option<Instant>, root_basis: Option<&Basis>) -> BnbParams {
        BnbParams {
            deadline,
            node_limit: self.config.node_limit,
            int_tol: self.config.int_tol,
            gomory_rounds: if self.config.use_gomory { self.config.gomory_rounds } else { 0 },
            gomory_max_cuts: self.config.gomory_max_cuts,
            lazy_rows_from: Some(self.model.num_nodes()),
            root_basis: root_basis.cloned(),
            ..BnbParams::default()
        }
    }

    fn hint(&self) -> Option<(Vec<f64>, f64)> {
        let b = self.best.as_ref()?;
        Some((self.model.indicator(b)?, b.total_score))
    }

    /// One cluster cut from the sub-program plus, if enabled, every violated
    /// cycle cut. Returns the number of rows added.
    fn separate(&mut self, x: &FractionalSolution) -> Result<usize, SolveError> {
        let mut added = 0;
        let found = find_violated_cluster(&self.model, x, &self.sep)?;
        if let Some(c) = found.cluster {
            if let Some(cut) = cluster_cut(&self.model, &c) {
                if self.model.add_cluster_cut(&c, cut) {
                    added += 1;
                    self.stats.cluster_cut_iterations += 1;
                }
            }
        }
        if self.config.use_cycle_cuts {
            let cuts = violated_cycle_cuts(&self.model, x, &self.sep)?;
            let mut n = 0;
            for (c, cut) in cuts {
                if self.model.add_cluster_cut(&c, cut) {
                    n += 1;
                }
            }
            if n > 0 {
                self.stats.cycle_cut_iterations += 1;
                self.stats.cycle_cut_count += n;
                added += n;
            }
        }
        Ok(added)
    }

    /// Sub-program check that an integer optimum satisfies every cluster row.
    fn certify(&mut self, x: &FractionalSolution) -> Result<bool, SolveError> {
        let found = find_violated_cluster(&self.model, x, &self.sep)?;
        if let Some(c) = found.cluster {
            if let Some(cut) = cluster_cut(&self.model, &c) {
                if self.model.add_cluster_cut(&c, cut) {
                    self.stats.cluster_cut_iterations += 1;
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    fn tree_in_place(&mut self, deadline: Option<Instant>, root_basis: Option<&Basis>) -> Result<TreeOutcome, SolveError> {
        let params = self.bnb_params(deadline, root_basis);
        let hint = self.hint();
        let mut pending: Vec<(Cluster, CutOrigin)> = Vec::new();
        let mut rounds = (0usize, 0usize, 0usize);
        let mut res = {
            let model = &self.model;
            let sep = &self.sep;
            let use_cycles = self.config.use_cycle_cuts;
            let mut cb = |xi: &[f64]| -> Result<Vec<Cut>, SolveError> {
                let sol = FractionalSolution::new(model, xi.to_vec());
                let choice = chosen_parents(model, xi);
                if topological_order(&choice).is_some() {
                    return Ok(Vec::new());
                }
                let cuts = if use_cycles {
                    let cuts = violated_cycle_cuts(model, &sol, sep)?;
                    rounds.1 += 1;
                    rounds.2 += cuts.len();
                    cuts.into_iter().map(|(c, cut)| (c, cut, CutOrigin::Cycle)).collect::<Vec<_>>()
                } else {
                    let found = find_violated_cluster(model, &sol, sep)?;
                    let c = found.cluster.ok_or(SolveError::UnresolvedCallback)?;
                    let cut = cluster_cut(model, &c).ok_or(SolveError::UnresolvedCallback)?;
                    rounds.0 += 1;
                    vec![(c, cut, CutOrigin::Cluster)]
                };
                Ok(cuts
                    .into_iter()
                    .map(|(c, cut, origin)| {
                        pending.push((c, origin));
                        cut
                    })
                    .collect())
            };
            solve_bnb_until(
                model.problem(),
                &params,
                hint.as_ref().map(|(x, v)| (x.as_slice(), *v)),
                Some(&mut cb),
            )?
        };
        self.stats.cluster_cut_iterations += rounds.0;
        self.stats.cycle_cut_iterations += rounds.1;
        self.stats.cycle_cut_count += rounds.2;
        self.stats.bnb_nodes += res.nodes;
        self.stats.gomory_cut_count += res.gomory_cuts;
        for ((c, origin), cut) in pending.into_iter().zip(std::mem::take(&mut res.callback_cuts)) {
            debug_assert_eq!(cut.origin, origin);
            self.model.add_cluster_cut(&c, cut);
        }
        self.finish_tree(res)
    }

    fn tree_restart(&mut self, deadline: Option<Instant>, root_basis: Option<&Basis>) -> Result<TreeOutcome, SolveError> {
        let params = self.bnb_params(deadline, root_basis);
        let hint = self.hint();
        let res = solve_bnb_until(
            self.model.problem(),
            &params,
            hint.as_ref().map(|(x, v)| (x.as_slice(), *v)),
            None,
        )?;
        self.stats.bnb_nodes += res.nodes;
        self.stats.gomory_cut_count += res.gomory_cuts;
        if res.status == BnbStatus::Optimal {
            let x = FractionalSolution::new(&self.model, res.x.clone().expect("optimal run has a point"));
            if topological_order(&chosen_parents(&self.model, &x.x)).is_none() {
                // a cyclic optimum violates some cluster row
                if self.separate(&x)? == 0 {
                    return Err(SolveError::UnresolvedCallback);
                }
                return Ok(TreeOutcome::CutsAdded);
            }
        }
        self.finish_tree(res)
    }

    fn finish_tree(&mut self, res: BnbResult) -> Result<TreeOutcome, SolveError> {
        match res.status {
            BnbStatus::Infeasible => Err(SolveError::NoFeasibleDag),
            BnbStatus::TimeLimit | BnbStatus::NodeLimit => {
                if let Some(x) = res.x {
                    if let Ok(dag) = extract_dag(&self.model, &FractionalSolution::new(&self.model, x)) {
                        self.offer(dag);
                    }
                }
                Ok(TreeOutcome::Limit)
            }
            BnbStatus::Optimal => {
                let x = FractionalSolution::new(&self.model, res.x.expect("optimal run has a point"));
                let dag = extract_dag(&self.model, &x)?;
                self.offer(dag);
                if self.certify(&x)? {
                    Ok(TreeOutcome::Proven)
                } else {
                    Ok(TreeOutcome::CutsAdded)
                }
            }
        }
    }
}

enum TreeOutcome {
    Proven,
    Limit,
    CutsAdded,
}

fn chosen_parents(model: &BnIlpModel, x: &[f64]) -> Vec<Vec<usize>> {
    let mut choice = vec![Vec::new(); model.num_nodes()];
    for (c, &v) in x.iter().enumerate() {
        if v > 0.5 {
            choice[model.child(c)] = model.parents(c).to_vec();
        }
    }
    choice
}

/// Cycle cuts over the distinct node sets of elementary cycles in the support
/// graph of `x`, keeping those violated by more than the separation tolerance.
/// A graph with too many cycles yields no cuts.
fn violated_cycle_cuts(
    model: &BnIlpModel,
    x: &FractionalSolution,
    sep: &SeparationOptions,
) -> Result<Vec<(Cluster, Cut)>, SolveError> {
    let g = induced_digraph(model, x, sep.support_eps);
    let report = match enumerate_elementary_cycles(&g) {
        Ok(r) => r,
        Err(SolveError::CycleCapExceeded { .. }) => return Ok(Vec::new()),
        Err(e) => return Err(e),
    };
    Ok(cycle_clusters(&report)
        .into_iter()
        .filter(|c| !model.has_cluster_cut(c))
        .filter_map(|c| {
            let cut = cluster_cut_with_origin(model, &c, CutOrigin::Cycle)?;
            (cut.violation(&x.x) > sep.sep_tol).then_some((c, cut))
        })
        .collect())
}

pub const EXHAUSTIVE_MAX_NODES: usize = 8;

/// Optimum over all DAGs by dynamic programming over node subsets: the last
/// node of an ordering takes its best parent set among the nodes before it.
pub fn exhaustive_optimum(table: &ScoreTable) -> Result<(DagSolution, f64), SolveError> {
    let n = table.num_nodes();
    if n > EXHAUSTIVE_MAX_NODES {
        return Err(SolveError::TooManyNodes {
            n,
            max: EXHAUSTIVE_MAX_NODES,
        });
    }
    let full = (1usize << n) - 1;
    let best_within = |v: usize, allowed: usize| {
        table
            .entries(v)
            .iter()
            .find(|e| e.parents.iter().all(|&p| allowed >> p & 1 == 1))
    };
    let mut value = vec![f64::NEG_INFINITY; full + 1];
    let mut last = vec![usize::MAX; full + 1];
    value[0] = 0.0;
    for s in 1..=full {
        for v in (0..n).filter(|&v| s >> v & 1 == 1) {
            let rest = s & !(1 << v);
            if value[rest] == f64::NEG_INFINITY {
                continue;
            }
            if let Some(e) = best_within(v, rest) {
                let cand = value[rest] + e.score;
                if cand > value[s] {
                    value[s] = cand;
                    last[s] = v;
                }
            }
        }
    }
    if value[full] == f64::NEG_INFINITY {
        return Err(SolveError::NoFeasibleDag);
    }
    let mut choice = vec![Vec::new(); n];
    let mut s = full;
    while s != 0 {
        let v = last[s];
        let rest = s & !(1 << v);
        choice[v] = best_within(v, rest).expect("recorded choice").parents.clone();
        s = rest;
    }
    let dag = DagSolution::from_choice(table, choice).expect("entries come from the table");
    let score = dag.total_score;
    Ok((dag, score))
}
