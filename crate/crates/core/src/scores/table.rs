use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};

use super::{count_configurations, Dataset, Metric, ScoreError};

/// One candidate parent set of a node and its local score.
#[derive(Debug, Clone, PartialEq)]
pub struct ParentSetEntry {
    /// Strictly ascending node ids.
    pub parents: Vec<usize>,
    pub score: f64,
}

impl ParentSetEntry {
    pub fn new(mut parents: Vec<usize>, score: f64) -> Self {
        parents.sort_unstable();
        ParentSetEntry { parents, score }
    }

    pub fn contains(&self, node: usize) -> bool {
        self.parents.binary_search(&node).is_ok()
    }
}

/// Canonical entry order: descending score, then lexicographically smaller parent set.
fn entry_order(a: &ParentSetEntry, b: &ParentSetEntry) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then_with(|| a.parents.cmp(&b.parents))
}

/// Candidate parent sets with local scores for every node.
///
/// Entries of each node are kept in canonical order (descending score, ties broken
/// by the lexicographically smaller parent set), so two tables with the same
/// content compare equal.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    names: Vec<String>,
    entries: Vec<Vec<ParentSetEntry>>,
}

impl ScoreTable {
    pub fn new(names: Vec<String>, entries: Vec<Vec<ParentSetEntry>>) -> Result<Self, ScoreError> {
        let n = names.len();
        if entries.len() != n {
            return Err(ScoreError::InvalidTable(format!(
                "{} names but {} entry lists",
                n,
                entries.len()
            )));
        }
        let mut seen_names = HashSet::new();
        for name in &names {
            if !seen_names.insert(name.as_str()) {
                return Err(ScoreError::DuplicateVariable(name.clone()));
            }
        }
        let mut entries = entries;
        for (child, list) in entries.iter_mut().enumerate() {
            if list.is_empty() {
                return Err(ScoreError::InvalidTable(format!(
                    "node {} has no candidate parent sets",
                    names[child]
                )));
            }
            let mut sets = HashSet::new();
            for e in list.iter() {
                if !e.score.is_finite() {
                    return Err(ScoreError::InvalidTable(format!(
                        "non-finite score for node {}",
                        names[child]
                    )));
                }
                if e.parents.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(ScoreError::InvalidTable(format!(
                        "parent set {:?} of {} is not strictly ascending",
                        e.parents, names[child]
                    )));
                }
                if e.parents.iter().any(|&p| p >= n) {
                    return Err(ScoreError::InvalidTable(format!(
                        "parent id out of range for node {}",
                        names[child]
                    )));
                }
                if e.contains(child) {
                    return Err(ScoreError::SelfParent(names[child].clone()));
                }
                if !sets.insert(e.parents.clone()) {
                    return Err(ScoreError::DuplicateParentSet {
                        node: names[child].clone(),
                        parents: e.parents.iter().map(|&p| names[p].clone()).collect(),
                    });
                }
            }
            list.sort_by(entry_order);
        }
        Ok(ScoreTable { names, entries })
    }

    pub fn num_nodes(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, node: usize) -> &str {
        &self.names[node]
    }

    pub fn node_id(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Entries of `node` in canonical order.
    pub fn entries(&self, node: usize) -> &[ParentSetEntry] {
        &self.entries[node]
    }

    pub fn all_entries(&self) -> &[Vec<ParentSetEntry>] {
        &self.entries
    }

    /// Total number of (node, parent set) pairs, i.e. the number of ILP columns.
    pub fn total_entries(&self) -> usize {
        self.entries.iter().map(Vec::len).sum()
    }

    /// Local score of `node` with exactly `parents`, if that set is a candidate.
    pub fn score_of(&self, node: usize, parents: &[usize]) -> Option<f64> {
        self.entries[node]
            .iter()
            .find(|e| e.parents == parents)
            .map(|e| e.score)
    }

    /// Applies subset-dominance pruning to every node.
    pub fn pruned(&self) -> ScoreTable {
        let entries = self
            .entries
            .iter()
            .map(|list| prune_dominated(list))
            .collect();
        ScoreTable {
            names: self.names.clone(),
            entries,
        }
    }
}

/// Scores every parent set of size at most `parent_limit` for every node.
pub fn build_score_table(
    data: &Dataset,
    parent_limit: usize,
    metric: Metric,
    prune: bool,
) -> Result<ScoreTable, ScoreError> {
    let n = data.num_variables();
    if parent_limit >= n {
        return Err(ScoreError::ParentLimitTooLarge {
            limit: parent_limit,
            variables: n,
        });
    }
    if let Metric::Bdeu { ess } = metric {
        if !(ess > 0.0 && ess.is_finite()) {
            return Err(ScoreError::InvalidEss(ess));
        }
    }
    let mut entries = Vec::with_capacity(n);
    for child in 0..n {
        let others: Vec<usize> = (0..n).filter(|&v| v != child).collect();
        let mut list = Vec::new();
        for size in 0..=parent_limit {
            for parents in combinations(&others, size) {
                let counts = count_configurations(data, child, &parents);
                list.push(ParentSetEntry::new(parents, metric.local(&counts)));
            }
        }
        entries.push(list);
    }
    let table = ScoreTable::new(data.names(), entries)?;
    Ok(if prune { table.pruned() } else { table })
}

/// All `k`-subsets of `items`, each in the order of `items`.
pub(crate) fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    fn rec(items: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            if items.len() - i < k - cur.len() {
                break;
            }
            cur.push(items[i]);
            rec(items, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(items, k, 0, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Removes every parent set that has a retained strict subset scoring at least as well.
///
/// The empty set is never removed. Output keeps the input order of survivors.
pub fn prune_dominated(entries: &[ParentSetEntry]) -> Vec<ParentSetEntry> {
    let mut order: Vec<usize> = (0..entries.len()).collect();
    order.sort_by(|&a, &b| {
        entries[a]
            .parents
            .len()
            .cmp(&entries[b].parents.len())
            .then_with(|| entry_order(&entries[a], &entries[b]))
    });

    let mut retained: HashMap<&[usize], f64> = HashMap::new();
    let mut keep = vec![false; entries.len()];
    for idx in order {
        let e = &entries[idx];
        let dominated = !e.parents.is_empty()
            && strict_subsets(&e.parents).any(|sub| {
                retained
                    .get(sub.as_slice())
                    .is_some_and(|&s| s >= e.score)
            });
        if !dominated {
            retained.insert(&e.parents, e.score);
            keep[idx] = true;
        }
    }
    entries
        .iter()
        .zip(keep)
        .filter(|&(_e, k)| k).map(|(e, _k)| e.clone())
        .collect()
}

fn strict_subsets(set: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    let full = (1u64 << set.len()) - 1;
    (0..full).map(move |mask| {
        set.iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &v)| v)
            .collect()
    })
}
