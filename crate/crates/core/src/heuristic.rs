//! Sink-finding heuristic: turns a relaxation solution into a DAG.

use crate::model::{BnIlpModel, DagSolution, FractionalSolution};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum HeuristicError {
    #[error("node {node} has no parent set avoiding the nodes already placed")]
    NoAdmissibleParentSet { node: usize },
}

/// Working sets of the heuristic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeuristicState {
    pub forbidden: Vec<bool>,
    /// Chosen column per decided node.
    pub decided: Vec<Option<usize>>,
}

impl HeuristicState {
    pub fn new(n: usize) -> Self {
        HeuristicState {
            forbidden: vec![false; n],
            decided: vec![None; n],
        }
    }

    /// Best-scoring column of `v` whose parents avoid every forbidden node.
    /// Columns follow the table's canonical order, so the first hit wins.
    fn best_admissible(&self, model: &BnIlpModel, v: usize) -> Option<usize> {
        model
            .node_columns(v)
            .find(|&c| model.parents(c).iter().all(|&p| !self.forbidden[p]))
    }
}

/// Picks sinks one at a time: every undecided node proposes its best admissible
/// parent set and the proposal with the largest `x` value is fixed; ties go to
/// the lower node id. Decisions form a reverse topological order, so the result
/// is acyclic.
pub fn sink_heuristic(model: &BnIlpModel, x: &FractionalSolution) -> Result<DagSolution, HeuristicError> {
    let n = model.num_nodes();
    let mut state = HeuristicState::new(n);
    for _ in 0..n {
        let mut pick: Option<(usize, usize, f64)> = None;
        for v in (0..n).filter(|&v| state.decided[v].is_none()) {
            let c = state
                .best_admissible(model, v)
                .ok_or(HeuristicError::NoAdmissibleParentSet { node: v })?;
            let closeness = x.x[c];
            if pick.is_none_or(|(_, _, best)| closeness > best) {
                pick = Some((v, c, closeness));
            }
        }
        let (v, c, _) = pick.expect("an undecided node remains");
        state.decided[v] = Some(c);
        state.forbidden[v] = true;
    }
    let mut parent_choice = Vec::with_capacity(n);
    let mut total_score = 0.0;
    for v in 0..n {
        let e = model.entry(state.decided[v].expect("all nodes decided"));
        parent_choice.push(e.parents.clone());
        total_score += e.score;
    }
    Ok(DagSolution {
        parent_choice,
        total_score,
    })
}
