//! Cluster-cut separation through a small 0/1 program, and cycle cuts from
//! elementary cycles of the solution digraph.

use std::collections::BTreeSet;
use std::time::Instant;

use crate::lp::{Cut, CutOrigin, LpProblem, RowSense};
use crate::model::{cluster_cut_with_origin, BnIlpModel, FractionalSolution, WeightedDigraph};
use crate::solver::{solve_bnb_until, BnbParams, BnbStatus, SolveError};

pub const SEP_TOL: f64 = 1e-6;
pub const SUPPORT_EPS: f64 = 1e-6;
pub const DEFAULT_CYCLE_CAP: usize = 1_000_000;

/// A sorted set of node ids.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cluster {
    members: Vec<usize>,
}

impl Cluster {
    pub fn new(mut members: Vec<usize>) -> Self {
        members.sort_unstable();
        members.dedup();
        Cluster { members }
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.members.binary_search(&v).is_ok()
    }

    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        for &v in &self.members {
            m[v] = true;
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparationResult {
    pub cluster: Option<Cluster>,
    pub sub_ip_objective: f64,
}

/// Maps sub-program columns back to the model.
#[derive(Debug, Clone, PartialEq)]
pub struct SubIpLegend {
    /// Model column behind each `J` column; `J` columns come first.
    pub j_columns: Vec<usize>,
    /// Index of `M(0)`; `M(v)` sits at `m_offset + v`.
    pub m_offset: usize,
}

#[derive(Debug, Clone)]
pub struct ClusterSubIp {
    pub problem: LpProblem,
    pub legend: SubIpLegend,
}

/// Builds `max Σ x(W→v)·J(W→v) − Σ M(v)` over binary `J` and `M` with
/// `J(W→v) ≤ M(v)`, `J(W→v) ≤ Σ_{w∈W} M(w)` and `Σ M ≥ 2`.
///
/// `J` columns exist only for entries with `x > support_eps` and a non-empty
/// parent set. The optimum is `max_C (rewritten lhs(C) − |C|)` over clusters
/// with at least two nodes.
pub fn build_cluster_subip(model: &BnIlpModel, x: &FractionalSolution, support_eps: f64) -> ClusterSubIp {
    let n = model.num_nodes();
    let j_columns: Vec<usize> = (0..model.num_columns())
        .filter(|&c| x.x[c] > support_eps && !model.parents(c).is_empty())
        .collect();
    let mut problem = LpProblem::new();
    for &c in &j_columns {
        problem.add_col(x.x[c], 0.0, 1.0, true);
    }
    let m_offset = j_columns.len();
    for _ in 0..n {
        problem.add_col(-1.0, 0.0, 1.0, true);
    }
    for (k, &c) in j_columns.iter().enumerate() {
        problem.add_row(vec![(k, 1.0), (m_offset + model.child(c), -1.0)], RowSense::Le, 0.0);
    }
    for (k, &c) in j_columns.iter().enumerate() {
        let mut coeffs = vec![(k, 1.0)];
        coeffs.extend(model.parents(c).iter().map(|&w| (m_offset + w, -1.0)));
        problem.add_row(coeffs, RowSense::Le, 0.0);
    }
    problem.add_row((0..n).map(|v| (m_offset + v, 1.0)).collect(), RowSense::Ge, 2.0);
    ClusterSubIp {
        problem,
        legend: SubIpLegend { j_columns, m_offset },
    }
}

#[derive(Debug, Clone)]
pub struct SeparationOptions {
    pub sep_tol: f64,
    pub support_eps: f64,
    pub deadline: Option<Instant>,
}

impl Default for SeparationOptions {
    fn default() -> Self {
        SeparationOptions {
            sep_tol: SEP_TOL,
            support_eps: SUPPORT_EPS,
            deadline: None,
        }
    }
}

/// Solves the cluster sub-program exactly and returns its most violated cluster,
/// if the violation exceeds `sep_tol`.
pub fn find_violated_cluster(
    model: &BnIlpModel,
    x: &FractionalSolution,
    opts: &SeparationOptions,
) -> Result<SeparationResult, SolveError> {
    let n = model.num_nodes();
    if n < 2 {
        return Ok(SeparationResult {
            cluster: None,
            sub_ip_objective: -1.0,
        });
    }
    let sub = build_cluster_subip(model, x, opts.support_eps);
    if sub.legend.j_columns.is_empty() {
        // the best is any pair of nodes with nothing selected
        return Ok(SeparationResult {
            cluster: None,
            sub_ip_objective: -2.0,
        });
    }
    let params = BnbParams {
        deadline: opts.deadline,
        ..BnbParams::default()
    };
    let res = solve_bnb_until(&sub.problem, &params, None, None)?;
    let best = match res.status {
        BnbStatus::Optimal => res.x.expect("optimal sub-program has a point"),
        BnbStatus::TimeLimit | BnbStatus::NodeLimit => return Err(SolveError::SubIpLimit),
        BnbStatus::Infeasible => unreachable!("cluster sub-program is always feasible"),
    };
    let objective = res.objective;
    if objective > -1.0 + opts.sep_tol {
        let members = (0..n).filter(|&v| best[sub.legend.m_offset + v] > 0.5).collect();
        Ok(SeparationResult {
            cluster: Some(Cluster::new(members)),
            sub_ip_objective: objective,
        })
    } else {
        Ok(SeparationResult {
            cluster: None,
            sub_ip_objective: objective,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CyclesReport {
    pub cycles: Vec<Vec<usize>>,
    pub count: usize,
}

pub fn enumerate_elementary_cycles(g: &WeightedDigraph) -> Result<CyclesReport, SolveError> {
    enumerate_elementary_cycles_capped(g, DEFAULT_CYCLE_CAP)
}

/// Johnson's circuit enumeration. Each cycle starts at its smallest node.
pub fn enumerate_elementary_cycles_capped(g: &WeightedDigraph, cap: usize) -> Result<CyclesReport, SolveError> {
    let n = g.n;
    let adj = g.successors();
    let mut j = Johnson {
        adj: &adj,
        blocked: vec![false; n],
        b: vec![BTreeSet::new(); n],
        stack: Vec::new(),
        in_scc: vec![false; n],
        cycles: Vec::new(),
        cap,
    };
    for s in 0..n {
        let scc = scc_of(&adj, s);
        if scc.len() < 2 {
            continue;
        }
        for v in 0..n {
            j.in_scc[v] = false;
        }
        for &v in &scc {
            j.in_scc[v] = true;
            j.blocked[v] = false;
            j.b[v].clear();
        }
        j.circuit(s, s)?;
    }
    let count = j.cycles.len();
    Ok(CyclesReport {
        cycles: j.cycles,
        count,
    })
}

struct Johnson<'a> {
    adj: &'a [Vec<usize>],
    blocked: Vec<bool>,
    b: Vec<BTreeSet<usize>>,
    stack: Vec<usize>,
    in_scc: Vec<bool>,
    cycles: Vec<Vec<usize>>,
    cap: usize,
}

impl Johnson<'_> {
    fn circuit(&mut self, v: usize, s: usize) -> Result<bool, SolveError> {
        let mut found = false;
        self.stack.push(v);
        self.blocked[v] = true;
        for &w in &self.adj[v] {
            if !self.in_scc[w] {
                continue;
            }
            if w == s {
                if self.cycles.len() >= self.cap {
                    return Err(SolveError::CycleCapExceeded { cap: self.cap });
                }
                self.cycles.push(self.stack.clone());
                found = true;
            } else if !self.blocked[w] && self.circuit(w, s)? {
                found = true;
            }
        }
        if found {
            self.unblock(v);
        } else {
            for &w in &self.adj[v] {
                if self.in_scc[w] {
                    self.b[w].insert(v);
                }
            }
        }
        self.stack.pop();
        Ok(found)
    }

    fn unblock(&mut self, u: usize) {
        let mut work = vec![u];
        while let Some(u) = work.pop() {
            if !self.blocked[u] {
                continue;
            }
            self.blocked[u] = false;
            work.extend(std::mem::take(&mut self.b[u]));
        }
    }
}

/// Nodes of the strongly connected component of `s` in the subgraph induced by `{s, s+1, ..}`.
fn scc_of(adj: &[Vec<usize>], s: usize) -> Vec<usize> {
    let n = adj.len();
    let reach = |forward: bool| {
        let mut seen = vec![false; n];
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            if forward {
                for &w in &adj[u] {
                    if w > s && !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            } else {
                for (w, succ) in adj.iter().enumerate() {
                    if w > s && !seen[w] && succ.contains(&u) {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        seen
    };
    let fwd = reach(true);
    let bwd = reach(false);
    (s..n).filter(|&v| fwd[v] && bwd[v]).collect()
}

/// Distinct node sets of the reported cycles, in first-seen order.
pub fn cycle_clusters(report: &CyclesReport) -> Vec<Cluster> {
    let mut seen = BTreeSet::new();
    report
        .cycles
        .iter()
        .map(|c| Cluster::new(c.clone()))
        .filter(|c| seen.insert(c.clone()))
        .collect()
}

/// One cycle-origin cluster cut per distinct cycle node set.
pub fn cycle_cuts_for(model: &BnIlpModel, report: &CyclesReport) -> Vec<Cut> {
    cycle_clusters(report)
        .iter()
        .filter_map(|c| cluster_cut_with_origin(model, c, CutOrigin::Cycle))
        .collect()
}
