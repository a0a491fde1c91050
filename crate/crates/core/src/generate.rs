//! Seeded test-instance generation: random score tables and data sampled from
//! random discrete networks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scores::{combinations, Dataset, ParentSetEntry, ScoreTable, VariableMeta};

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Every parent set of size at most `limit` for each of `n` nodes, scored
/// uniformly in `[-10, 0)`.
pub fn random_score_table<R: Rng>(n: usize, limit: usize, rng: &mut R) -> ScoreTable {
    let names = (0..n).map(|i| format!("X{i}")).collect();
    let entries = (0..n)
        .map(|v| {
            let others: Vec<usize> = (0..n).filter(|&u| u != v).collect();
            (0..=limit.min(others.len()))
                .flat_map(|k| combinations(&others, k))
                .map(|w| ParentSetEntry::new(w, rng.gen_range(-10.0..0.0)))
                .collect()
        })
        .collect();
    ScoreTable::new(names, entries).expect("generated table is valid")
}

/// A discrete network with conditional probability tables.
#[derive(Debug, Clone)]
pub struct RandomNetwork {
    pub names: Vec<String>,
    pub arities: Vec<usize>,
    pub parents: Vec<Vec<usize>>,
    /// Per node, one distribution over the node's values per parent
    /// configuration, with the first parent most significant.
    pub cpts: Vec<Vec<Vec<f64>>>,
}

impl RandomNetwork {
    /// Random DAG over `n` nodes with at most `max_parents` parents per node and
    /// arities drawn from `arity`. Distributions are skewed so dependencies show
    /// up in modest samples.
    pub fn generate<R: Rng>(
        n: usize,
        max_parents: usize,
        arity: std::ops::RangeInclusive<usize>,
        rng: &mut R,
    ) -> Self {
        assert!(*arity.start() >= 2, "variables need at least two values");
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        let arities: Vec<usize> = (0..n).map(|_| rng.gen_range(arity.clone())).collect();
        let mut parents = vec![Vec::new(); n];
        for (pos, &v) in order.iter().enumerate() {
            let k = rng.gen_range(0..=max_parents.min(pos));
            let mut ps: Vec<usize> = order[..pos].choose_multiple(rng, k).copied().collect();
            ps.sort_unstable();
            parents[v] = ps;
        }
        let cpts = (0..n)
            .map(|v| {
                let q: usize = parents[v].iter().map(|&p| arities[p]).product();
                (0..q)
                    .map(|_| {
                        let w: Vec<f64> = (0..arities[v]).map(|_| rng.gen::<f64>().powi(3) + 0.05).collect();
                        let total: f64 = w.iter().sum();
                        w.into_iter().map(|p| p / total).collect()
                    })
                    .collect()
            })
            .collect();
        RandomNetwork {
            names: (0..n).map(|i| format!("X{i}")).collect(),
            arities,
            parents,
            cpts,
        }
    }

    fn topological_order(&self) -> Vec<usize> {
        crate::model::topological_order(&self.parents).expect("network is acyclic")
    }

    /// Forward-samples `m` instances.
    pub fn sample<R: Rng>(&self, m: usize, rng: &mut R) -> Dataset {
        let n = self.names.len();
        let order = self.topological_order();
        let mut rows = Vec::with_capacity(m);
        for _ in 0..m {
            let mut row = vec![0u32; n];
            for &v in &order {
                let j = self.parents[v]
                    .iter()
                    .fold(0, |acc, &p| acc * self.arities[p] + row[p] as usize);
                let dist = &self.cpts[v][j];
                let mut u: f64 = rng.gen();
                let mut k = dist.len() - 1;
                for (i, &p) in dist.iter().enumerate() {
                    if u < p {
                        k = i;
                        break;
                    }
                    u -= p;
                }
                row[v] = k as u32;
            }
            rows.push(row);
        }
        let vars = (0..n)
            .map(|v| VariableMeta {
                id: v,
                name: self.names[v].clone(),
                arity: self.arities[v],
                labels: (0..self.arities[v]).map(|k| k.to_string()).collect(),
            })
            .collect();
        Dataset::from_rows(vars, rows).expect("sampled rows are in range")
    }
}
