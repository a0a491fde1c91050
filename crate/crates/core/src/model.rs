//! The 0/1 program over parent-set columns and projections of its solutions
//! back to graphs.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::ops::Range;

use crate::lp::{Cut, CutOrigin, CutSense, LpProblem, RowSense, INT_TOL};
use crate::scores::{ParentSetEntry, ScoreTable};
use crate::separation::Cluster;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ModelError {
    #[error("column {column} has non-integral value {value}")]
    NonIntegral { column: usize, value: f64 },
    #[error("node {node} selects {selected} parent sets")]
    ConvexityViolated { node: usize, selected: usize },
    #[error("selected parent sets form a cycle through {cycle:?}")]
    CyclicSolution { cycle: Vec<usize> },
}

/// Column-indexed 0/1 program: column `(v, W)` selects `W` as the parents of `v`.
///
/// Columns of one node are contiguous and follow the table's canonical entry
/// order. The base problem has one convexity row per node; acyclicity rows are
/// appended as cuts.
#[derive(Debug, Clone)]
pub struct BnIlpModel {
    table: ScoreTable,
    columns: Vec<(usize, usize)>,
    node_start: Vec<usize>,
    problem: LpProblem,
    cut_pool: Vec<Cut>,
    cluster_keys: HashSet<Vec<usize>>,
}

pub fn build_model(table: &ScoreTable) -> BnIlpModel {
    BnIlpModel::new(table.clone())
}

impl BnIlpModel {
    pub fn new(table: ScoreTable) -> Self {
        let n = table.num_nodes();
        let mut problem = LpProblem::new();
        let mut columns = Vec::with_capacity(table.total_entries());
        let mut node_start = Vec::with_capacity(n + 1);
        for v in 0..n {
            node_start.push(columns.len());
            for (k, e) in table.entries(v).iter().enumerate() {
                problem.add_col(e.score, 0.0, 1.0, true);
                columns.push((v, k));
            }
        }
        node_start.push(columns.len());
        for v in 0..n {
            let coeffs = (node_start[v]..node_start[v + 1]).map(|c| (c, 1.0)).collect();
            problem.add_row(coeffs, RowSense::Eq, 1.0);
        }
        BnIlpModel {
            table,
            columns,
            node_start,
            problem,
            cut_pool: Vec::new(),
            cluster_keys: HashSet::new(),
        }
    }

    pub fn table(&self) -> &ScoreTable {
        &self.table
    }

    pub fn num_nodes(&self) -> usize {
        self.table.num_nodes()
    }

    pub fn num_columns(&self) -> usize {
        self.columns.len()
    }

    /// Base problem plus every cut added so far.
    pub fn problem(&self) -> &LpProblem {
        &self.problem
    }

    pub fn cut_pool(&self) -> &[Cut] {
        &self.cut_pool
    }

    pub fn node_columns(&self, node: usize) -> Range<usize> {
        self.node_start[node]..self.node_start[node + 1]
    }

    /// Child node of column `c`.
    pub fn child(&self, c: usize) -> usize {
        self.columns[c].0
    }

    pub fn entry(&self, c: usize) -> &ParentSetEntry {
        let (v, k) = self.columns[c];
        &self.table.entries(v)[k]
    }

    pub fn parents(&self, c: usize) -> &[usize] {
        &self.entry(c).parents
    }

    /// Column of `node` with exactly `parents`, if present.
    pub fn column_of(&self, node: usize, parents: &[usize]) -> Option<usize> {
        self.node_columns(node).find(|&c| self.parents(c) == parents)
    }

    pub fn has_cluster_cut(&self, cluster: &Cluster) -> bool {
        self.cluster_keys.contains(cluster.members())
    }

    /// Adds a cluster-form cut unless one with the same node set is already pooled.
    pub fn add_cluster_cut(&mut self, cluster: &Cluster, cut: Cut) -> bool {
        if !self.cluster_keys.insert(cluster.members().to_vec()) {
            return false;
        }
        self.problem.add_rows([&cut]);
        self.cut_pool.push(cut);
        true
    }

    /// Adds a cut without duplicate detection.
    pub fn add_cut(&mut self, cut: Cut) {
        self.problem.add_rows([&cut]);
        self.cut_pool.push(cut);
    }

    /// 0/1 column vector selecting the parent sets of `dag`.
    pub fn indicator(&self, dag: &DagSolution) -> Option<Vec<f64>> {
        let mut x = vec![0.0; self.num_columns()];
        for (v, parents) in dag.parent_choice.iter().enumerate() {
            x[self.column_of(v, parents)?] = 1.0;
        }
        Some(x)
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.problem.objective_value(x)
    }
}

/// Possibly fractional values for every column.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

impl FractionalSolution {
    pub fn new(model: &BnIlpModel, x: Vec<f64>) -> Self {
        let objective = model.objective(&x);
        FractionalSolution { x, objective }
    }
}

/// Arc weights aggregated over parent-set columns.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDigraph {
    pub n: usize,
    /// `(parent, child, weight)` sorted by `(parent, child)`.
    pub arcs: Vec<(usize, usize, f64)>,
}

impl WeightedDigraph {
    pub fn from_arcs(n: usize, mut arcs: Vec<(usize, usize, f64)>) -> Self {
        arcs.sort_by_key(|a| (a.0, a.1));
        WeightedDigraph { n, arcs }
    }

    pub fn successors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v, _) in &self.arcs {
            adj[u].push(v);
        }
        adj
    }

    pub fn weight(&self, u: usize, v: usize) -> Option<f64> {
        self.arcs
            .binary_search_by(|a| (a.0, a.1).cmp(&(u, v)))
            .ok()
            .map(|i| self.arcs[i].2)
    }
}

/// Weight of `u -> v` is the total value of columns of `v` whose parent set holds `u`;
/// arcs at or below `eps` are dropped.
pub fn induced_digraph(model: &BnIlpModel, x: &FractionalSolution, eps: f64) -> WeightedDigraph {
    let n = model.num_nodes();
    let mut weight = vec![0.0; n * n];
    for (c, &val) in x.x.iter().enumerate() {
        if val == 0.0 {
            continue;
        }
        let v = model.child(c);
        for &u in model.parents(c) {
            weight[u * n + v] += val;
        }
    }
    let arcs = (0..n)
        .flat_map(|u| (0..n).map(move |v| (u, v)))
        .filter(|&(u, v)| u != v && weight[u * n + v] > eps)
        .map(|(u, v)| (u, v, weight[u * n + v]))
        .collect();
    WeightedDigraph { n, arcs }
}

/// A learned structure: one parent set per node.
#[derive(Debug, Clone, PartialEq)]
pub struct DagSolution {
    pub parent_choice: Vec<Vec<usize>>,
    pub total_score: f64,
}

impl DagSolution {
    /// Builds a solution and sums its local scores from `table`.
    pub fn from_choice(table: &ScoreTable, parent_choice: Vec<Vec<usize>>) -> Option<Self> {
        let total_score = parent_choice
            .iter()
            .enumerate()
            .map(|(v, w)| table.score_of(v, w))
            .sum::<Option<f64>>()?;
        Some(DagSolution {
            parent_choice,
            total_score,
        })
    }

    /// `(parent, child)` pairs ordered by child, then parent.
    pub fn arcs(&self) -> Vec<(usize, usize)> {
        self.parent_choice
            .iter()
            .enumerate()
            .flat_map(|(v, ps)| ps.iter().map(move |&u| (u, v)))
            .collect()
    }

    pub fn topological_order(&self) -> Option<Vec<usize>> {
        topological_order(&self.parent_choice)
    }

    pub fn is_acyclic(&self) -> bool {
        self.topological_order().is_some()
    }

    /// Graphviz rendering with nodes declared in id order and arcs ordered by
    /// parent id, then child id.
    pub fn to_dot(&self, names: &[String]) -> String {
        let mut out = String::from("digraph BN {\n");
        for name in names {
            let _ = writeln!(out, "  {};", dot_id(name));
        }
        let mut arcs = self.arcs();
        arcs.sort_unstable();
        for (u, v) in arcs {
            let _ = writeln!(out, "  {} -> {};", dot_id(&names[u]), dot_id(&names[v]));
        }
        out.push_str("}\n");
        out
    }
}

fn dot_id(name: &str) -> String {
    let plain = !name.is_empty()
        && !name.starts_with(|c: char| c.is_ascii_digit())
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if plain {
        name.to_owned()
    } else {
        format!("\"{}\"", name.replace('\\', "\\\\").replace('"', "\\\""))
    }
}

/// Kahn's algorithm over parent lists; `None` if the graph has a cycle.
pub(crate) fn topological_order(parents: &[Vec<usize>]) -> Option<Vec<usize>> {
    let n = parents.len();
    let mut indeg: Vec<usize> = parents.iter().map(Vec::len).collect();
    let mut children = vec![Vec::new(); n];
    for (v, ps) in parents.iter().enumerate() {
        for &u in ps {
            children[u].push(v);
        }
    }
    let mut ready: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).rev().collect();
    let mut order = Vec::with_capacity(n);
    while let Some(u) = ready.pop() {
        order.push(u);
        for &v in &children[u] {
            indeg[v] -= 1;
            if indeg[v] == 0 {
                ready.push(v);
            }
        }
    }
    (order.len() == n).then_some(order)
}

/// Some directed cycle among `parents`, found by following parent links from a
/// node left over by Kahn's algorithm.
fn find_cycle(parents: &[Vec<usize>]) -> Vec<usize> {
    let n = parents.len();
    let mut indeg: Vec<usize> = parents.iter().map(Vec::len).collect();
    let mut children = vec![Vec::new(); n];
    for (v, ps) in parents.iter().enumerate() {
        for &u in ps {
            children[u].push(v);
        }
    }
    let mut stack: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut removed = vec![false; n];
    while let Some(u) = stack.pop() {
        removed[u] = true;
        for &v in &children[u] {
            indeg[v] -= 1;
            if indeg[v] == 0 {
                stack.push(v);
            }
        }
    }
    // every remaining node keeps a remaining parent, so walking parents must repeat
    let Some(start) = (0..n).find(|&v| !removed[v]) else {
        return Vec::new();
    };
    let mut pos = vec![usize::MAX; n];
    let mut walk = Vec::new();
    let mut v = start;
    while pos[v] == usize::MAX {
        pos[v] = walk.len();
        walk.push(v);
        v = *parents[v].iter().find(|&&u| !removed[u]).expect("remaining parent");
    }
    let mut cycle = walk[pos[v]..].to_vec();
    cycle.reverse();
    cycle
}

/// Reads the selected parent set of every node from an integral solution.
pub fn extract_dag(model: &BnIlpModel, x: &FractionalSolution) -> Result<DagSolution, ModelError> {
    for (c, &v) in x.x.iter().enumerate() {
        if (v - v.round()).abs() > INT_TOL {
            return Err(ModelError::NonIntegral { column: c, value: v });
        }
    }
    let n = model.num_nodes();
    let mut choice = Vec::with_capacity(n);
    let mut total = 0.0;
    for v in 0..n {
        let selected: Vec<usize> = model.node_columns(v).filter(|&c| x.x[c] > 0.5).collect();
        if selected.len() != 1 {
            return Err(ModelError::ConvexityViolated {
                node: v,
                selected: selected.len(),
            });
        }
        let e = model.entry(selected[0]);
        total += e.score;
        choice.push(e.parents.clone());
    }
    if topological_order(&choice).is_none() {
        return Err(ModelError::CyclicSolution {
            cycle: find_cycle(&choice),
        });
    }
    Ok(DagSolution {
        parent_choice: choice,
        total_score: total,
    })
}

/// `Σ_{v∈C} Σ_{W∩C=∅} x(W→v)`: the cluster constraint holds when this is at least 1.
pub fn cluster_lhs(model: &BnIlpModel, x: &FractionalSolution, cluster: &Cluster) -> f64 {
    let inside = cluster.mask(model.num_nodes());
    cluster
        .members()
        .iter()
        .flat_map(|&v| model.node_columns(v))
        .filter(|&c| !model.parents(c).iter().any(|&p| inside[p]))
        .map(|c| x.x[c])
        .sum()
}

/// `Σ_{v∈C} Σ_{|W∩C|≥1} x(W→v)`: the rewritten constraint holds when this is at most `|C| - 1`.
pub fn rewritten_cluster_lhs(model: &BnIlpModel, x: &FractionalSolution, cluster: &Cluster) -> f64 {
    let inside = cluster.mask(model.num_nodes());
    cluster
        .members()
        .iter()
        .flat_map(|&v| model.node_columns(v))
        .filter(|&c| model.parents(c).iter().any(|&p| inside[p]))
        .map(|c| x.x[c])
        .sum()
}

/// Cut `Σ_{v∈C} Σ_{|W∩C|≥1} I(W→v) ≤ |C| - 1` with origin [`CutOrigin::Cluster`].
///
/// Returns `None` when no column of the cluster has a parent inside it, in which
/// case the inequality is vacuous.
pub fn cluster_cut(model: &BnIlpModel, cluster: &Cluster) -> Option<Cut> {
    cluster_cut_with_origin(model, cluster, CutOrigin::Cluster)
}

pub fn cluster_cut_with_origin(model: &BnIlpModel, cluster: &Cluster, origin: CutOrigin) -> Option<Cut> {
    assert!(cluster.len() >= 2, "cluster cuts need at least two nodes");
    let inside = cluster.mask(model.num_nodes());
    let coeffs: Vec<(usize, f64)> = cluster
        .members()
        .iter()
        .flat_map(|&v| model.node_columns(v))
        .filter(|&c| model.parents(c).iter().any(|&p| inside[p]))
        .map(|c| (c, 1.0))
        .collect();
    if coeffs.is_empty() {
        return None;
    }
    Some(Cut {
        coeffs,
        sense: CutSense::Le,
        rhs: (cluster.len() - 1) as f64,
        origin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scores::{ParentSetEntry, ScoreTable};

    fn table(names: &[&str], entries: Vec<Vec<(&[usize], f64)>>) -> ScoreTable {
        ScoreTable::new(
            names.iter().map(|s| s.to_string()).collect(),
            entries
                .into_iter()
                .map(|l| l.into_iter().map(|(p, s)| ParentSetEntry::new(p.to_vec(), s)).collect())
                .collect(),
        )
        .unwrap()
    }

    /// A:{∅, {B}}, B:{∅, {A}}
    fn mutual() -> BnIlpModel {
        build_model(&table(
            &["A", "B"],
            vec![vec![(&[], -1.0), (&[1], 0.0)], vec![(&[], -1.0), (&[0], 0.0)]],
        ))
    }

    fn sol(model: &BnIlpModel, picks: &[(usize, &[usize], f64)]) -> FractionalSolution {
        let mut x = vec![0.0; model.num_columns()];
        for &(v, w, val) in picks {
            x[model.column_of(v, w).unwrap()] = val;
        }
        FractionalSolution::new(model, x)
    }

    #[test]
    fn build_counts() {
        let names = ["A", "B", "C"];
        let full = |v: usize| {
            let o: Vec<usize> = (0..3).filter(|&u| u != v).collect();
            vec![
                (vec![], -1.0),
                (vec![o[0]], -2.0),
                (vec![o[1]], -3.0),
                (o.clone(), -4.0),
            ]
        };
        let t = ScoreTable::new(
            names.iter().map(|s| s.to_string()).collect(),
            (0..3)
                .map(|v| full(v).into_iter().map(|(p, s)| ParentSetEntry::new(p, s)).collect())
                .collect(),
        )
        .unwrap();
        let m = build_model(&t);
        assert_eq!(m.num_columns(), 12);
        assert_eq!(m.problem().num_rows(), 3);
        for c in 0..12 {
            assert_eq!(m.problem().objective[c], m.entry(c).score);
            assert_eq!(m.problem().col_bounds[c], (0.0, 1.0));
            assert!(m.problem().integrality[c]);
        }
        for row in &m.problem().rows {
            assert_eq!(row.sense, RowSense::Eq);
            assert_eq!(row.rhs, 1.0);
        }
    }

    #[test]
    fn single_node_forced() {
        let m = build_model(&table(&["A"], vec![vec![(&[], -3.0)]]));
        assert_eq!(m.num_columns(), 1);
        let r = crate::lp::solve_lp(m.problem(), None).unwrap();
        assert_eq!(r.x, vec![1.0]);
    }

    #[test]
    fn digraph_examples() {
        let m = mutual();
        let g = induced_digraph(&m, &sol(&m, &[(0, &[1], 1.0), (1, &[], 1.0)]), 1e-6);
        assert_eq!(g.arcs, vec![(1, 0, 1.0)]);
        let g = induced_digraph(&m, &sol(&m, &[(0, &[], 1.0), (1, &[], 1.0)]), 1e-6);
        assert!(g.arcs.is_empty());

        let t = table(
            &["A", "B", "C"],
            vec![
                vec![(&[], -1.0), (&[1], -1.0), (&[1, 2], -1.0)],
                vec![(&[], -1.0)],
                vec![(&[], -1.0)],
            ],
        );
        let m = build_model(&t);
        let x = sol(&m, &[(0, &[1], 0.5), (0, &[1, 2], 0.25), (0, &[], 0.25), (1, &[], 1.0), (2, &[], 1.0)]);
        let g = induced_digraph(&m, &x, 1e-6);
        assert_eq!(g.weight(1, 0), Some(0.75));
        assert_eq!(g.weight(2, 0), Some(0.25));
        assert_eq!(g.arcs.len(), 2);
    }

    #[test]
    fn extract_examples() {
        let m = mutual();
        let dag = extract_dag(&m, &sol(&m, &[(0, &[1], 1.0), (1, &[], 1.0)])).unwrap();
        assert_eq!(dag.arcs(), vec![(1, 0)]);
        assert_eq!(dag.total_score, 0.0 + -1.0);

        let err = extract_dag(&m, &sol(&m, &[(0, &[1], 1.0), (1, &[0], 1.0)])).unwrap_err();
        match err {
            ModelError::CyclicSolution { mut cycle } => {
                cycle.sort();
                assert_eq!(cycle, vec![0, 1]);
            }
            e => panic!("{e:?}"),
        }

        let err = extract_dag(&m, &sol(&m, &[(0, &[1], 0.5), (0, &[], 0.5), (1, &[], 1.0)])).unwrap_err();
        assert!(matches!(err, ModelError::NonIntegral { .. }));
    }

    #[test]
    fn cluster_lhs_examples() {
        let m = mutual();
        let x = sol(&m, &[(0, &[1], 1.0), (1, &[0], 1.0)]);
        assert_eq!(cluster_lhs(&m, &x, &Cluster::new(vec![0])), 1.0);
        assert_eq!(cluster_lhs(&m, &x, &Cluster::new(vec![0, 1])), 0.0);
        assert_eq!(rewritten_cluster_lhs(&m, &x, &Cluster::new(vec![0, 1])), 2.0);
    }

    #[test]
    fn fractional_full_parent_point() {
        // each node: 0.5 on ∅ and 0.5 on the two other nodes as parents
        let t = table(
            &["A", "B", "C"],
            vec![
                vec![(&[], -1.0), (&[1, 2], -1.0)],
                vec![(&[], -1.0), (&[0, 2], -1.0)],
                vec![(&[], -1.0), (&[0, 1], -1.0)],
            ],
        );
        let m = build_model(&t);
        let x = sol(
            &m,
            &[(0, &[], 0.5), (0, &[1, 2], 0.5), (1, &[], 0.5), (1, &[0, 2], 0.5), (2, &[], 0.5), (2, &[0, 1], 0.5)],
        );
        let all = Cluster::new(vec![0, 1, 2]);
        assert!((cluster_lhs(&m, &x, &all) - 1.5).abs() < 1e-12);
        assert!(rewritten_cluster_lhs(&m, &x, &all) <= 2.0);
    }

    #[test]
    fn cluster_cut_examples() {
        let m = mutual();
        let cut = cluster_cut(&m, &Cluster::new(vec![0, 1])).unwrap();
        let cols: Vec<usize> = cut.coeffs.iter().map(|c| c.0).collect();
        assert_eq!(cols, vec![m.column_of(0, &[1]).unwrap(), m.column_of(1, &[0]).unwrap()]);
        assert_eq!(cut.rhs, 1.0);
        assert_eq!(cut.sense, CutSense::Le);

        let empty_only = build_model(&table(
            &["A", "B", "C"],
            vec![vec![(&[], -1.0)], vec![(&[], -1.0)], vec![(&[], -1.0)]],
        ));
        assert!(cluster_cut(&empty_only, &Cluster::new(vec![0, 1, 2])).is_none());

        let t = table(
            &["A", "B", "C"],
            vec![
                vec![(&[], -1.0), (&[2], -1.0)],
                vec![(&[], -1.0), (&[0], -1.0)],
                vec![(&[], -1.0), (&[1], -1.0)],
            ],
        );
        let m = build_model(&t);
        let cut = cluster_cut(&m, &Cluster::new(vec![0, 1, 2])).unwrap();
        assert_eq!(cut.rhs, 2.0);
        let x = sol(&m, &[(0, &[2], 1.0), (1, &[0], 1.0), (2, &[1], 1.0)]);
        assert_eq!(cut.activity(&x.x), 3.0);
        assert!(cut.violation(&x.x) > 0.0);
    }

    #[test]
    fn pool_dedup() {
        let mut m = mutual();
        let c = Cluster::new(vec![1, 0]);
        let cut = cluster_cut(&m, &c).unwrap();
        assert!(m.add_cluster_cut(&c, cut.clone()));
        assert!(!m.add_cluster_cut(&Cluster::new(vec![0, 1]), cut));
        assert_eq!(m.problem().num_rows(), 3);
        assert_eq!(m.cut_pool().len(), 1);
    }

    #[test]
    fn dot_is_deterministic() {
        let dag = DagSolution {
            parent_choice: vec![vec![1, 2], vec![], vec![1]],
            total_score: 0.0,
        };
        let names = vec!["A".to_string(), "B".into(), "my var".into()];
        let expected = "digraph BN {\n  A;\n  B;\n  \"my var\";\n  B -> A;\n  B -> \"my var\";\n  \"my var\" -> A;\n}\n";
        assert_eq!(dag.to_dot(&names), expected);
        assert_eq!(dag.to_dot(&names), dag.to_dot(&names));
    }
}
