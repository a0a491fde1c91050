use super::Dataset;

/// Contingency table of a child against every configuration of its parents.
///
/// Configuration `j` is the mixed-radix encoding of the parent values, with the
/// first (smallest id) parent as the most significant digit. Unobserved
/// configurations are kept with zero counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyCounts {
    pub child: usize,
    pub parents: Vec<usize>,
    pub child_arity: usize,
    /// Number of parent configurations (product of parent arities).
    pub q: usize,
    /// Row-major `q x child_arity` table of `N_ijk`.
    pub n_ijk: Vec<u64>,
    /// `N_ij`, the row sums of `n_ijk`.
    pub n_ij: Vec<u64>,
}

impl ContingencyCounts {
    /// Builds a table from explicit per-configuration counts.
    pub fn from_table(child_arity: usize, table: &[Vec<u64>]) -> Self {
        assert!(table.iter().all(|r| r.len() == child_arity));
        let n_ijk: Vec<u64> = table.iter().flatten().copied().collect();
        let n_ij = table.iter().map(|r| r.iter().sum()).collect();
        ContingencyCounts {
            child: 0,
            parents: Vec::new(),
            child_arity,
            q: table.len(),
            n_ijk,
            n_ij,
        }
    }

    pub fn row(&self, j: usize) -> &[u64] {
        &self.n_ijk[j * self.child_arity..(j + 1) * self.child_arity]
    }

    pub fn total(&self) -> u64 {
        self.n_ij.iter().sum()
    }
}

/// Tallies `N_ijk` for `child` given `parents` over all instances.
///
/// Panics if `child` appears among `parents` or an id is out of range.
pub fn count_configurations(data: &Dataset, child: usize, parents: &[usize]) -> ContingencyCounts {
    assert!(child < data.num_variables(), "child id out of range");
    assert!(!parents.contains(&child), "child cannot be its own parent");
    let mut sorted = parents.to_vec();
    sorted.sort_unstable();
    sorted.dedup();

    let radices: Vec<usize> = sorted.iter().map(|&p| data.arity(p)).collect();
    let q: usize = radices.iter().product();
    let r = data.arity(child);
    let mut n_ijk = vec![0u64; q * r];
    for row in data.iter_rows() {
        let j = sorted
            .iter()
            .zip(&radices)
            .fold(0usize, |acc, (&p, &radix)| acc * radix + row[p] as usize);
        n_ijk[j * r + row[child] as usize] += 1;
    }
    let n_ij = n_ijk.chunks_exact(r).map(|c| c.iter().sum()).collect();
    ContingencyCounts {
        child,
        parents: sorted,
        child_arity: r,
        q,
        n_ijk,
        n_ij,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scores::{Dataset, VariableMeta};

    fn meta(id: usize, name: &str, arity: usize) -> VariableMeta {
        VariableMeta {
            id,
            name: name.into(),
            arity,
            labels: (0..arity).map(|i| i.to_string()).collect(),
        }
    }

    #[test]
    fn diagonal_pair() {
        let data = Dataset::from_rows(
            vec![meta(0, "A", 2), meta(1, "B", 2)],
            vec![vec![0, 0], vec![1, 1]],
        )
        .unwrap();
        let c = count_configurations(&data, 0, &[1]);
        assert_eq!(c.q, 2);
        assert_eq!(c.row(0), &[1, 0]);
        assert_eq!(c.row(1), &[0, 1]);
    }

    #[test]
    fn no_parents_gives_marginals() {
        let data = Dataset::from_rows(
            vec![meta(0, "A", 3), meta(1, "B", 2)],
            vec![vec![0, 0], vec![2, 1], vec![2, 0], vec![1, 1]],
        )
        .unwrap();
        let c = count_configurations(&data, 0, &[]);
        assert_eq!(c.q, 1);
        assert_eq!(c.row(0), &[1, 1, 2]);
        assert_eq!(c.n_ij, vec![4]);
    }

    #[test]
    fn ternary_parent_uniform() {
        // parent P takes 0,1,2 twice each; child alternates
        let rows = (0..6).map(|i| vec![(i % 2) as u32, (i % 3) as u32]).collect();
        let data = Dataset::from_rows(vec![meta(0, "C", 2), meta(1, "P", 3)], rows).unwrap();
        let c = count_configurations(&data, 0, &[1]);
        assert_eq!(c.q, 3);
        assert_eq!(c.n_ij, vec![2, 2, 2]);
        assert_eq!(c.total(), 6);
    }

    #[test]
    fn mixed_radix_first_parent_most_significant() {
        let data = Dataset::from_rows(
            vec![meta(0, "A", 2), meta(1, "B", 3), meta(2, "C", 2)],
            vec![vec![1, 2, 1]],
        )
        .unwrap();
        // parents order given unsorted on purpose
        let c = count_configurations(&data, 2, &[1, 0]);
        assert_eq!(c.parents, vec![0, 1]);
        assert_eq!(c.q, 6);
        // j = a * 3 + b = 1 * 3 + 2
        assert_eq!(c.n_ij[5], 1);
    }
}
