use statrs::function::gamma::ln_gamma;

use super::ContingencyCounts;

/// Local scoring metric for a child given its parents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Metric {
    /// BDeu with the given equivalent sample size.
    Bdeu { ess: f64 },
    K2,
}

impl Default for Metric {
    fn default() -> Self {
        Metric::Bdeu { ess: 1.0 }
    }
}

impl Metric {
    pub fn local(&self, counts: &ContingencyCounts) -> f64 {
        match *self {
            Metric::Bdeu { ess } => bdeu_local(counts, counts.child_arity, ess),
            Metric::K2 => k2_local(counts, counts.child_arity),
        }
    }
}

/// Log BDeu marginal likelihood of one family, without the structure prior.
///
/// Hyperparameters are `ess / q` per configuration and `ess / (r q)` per cell.
/// Configurations with no observations contribute exactly zero.
pub fn bdeu_local(counts: &ContingencyCounts, child_arity: usize, ess: f64) -> f64 {
    assert!(ess > 0.0, "equivalent sample size must be positive");
    let q = counts.q as f64;
    let alpha_ij = ess / q;
    let alpha_ijk = ess / (child_arity as f64 * q);
    let lg_alpha_ij = ln_gamma(alpha_ij);
    let lg_alpha_ijk = ln_gamma(alpha_ijk);

    let mut score = 0.0;
    for j in 0..counts.q {
        let n_ij = counts.n_ij[j];
        if n_ij == 0 {
            continue;
        }
        score += lg_alpha_ij - ln_gamma(alpha_ij + n_ij as f64);
        for &n in counts.row(j) {
            if n > 0 {
                score += ln_gamma(alpha_ijk + n as f64) - lg_alpha_ijk;
            }
        }
    }
    score
}

/// Log K2 score of one family (all Dirichlet hyperparameters equal to one).
pub fn k2_local(counts: &ContingencyCounts, child_arity: usize) -> f64 {
    let r = child_arity as f64;
    // ln((r-1)!) = lnΓ(r)
    let lg_r = ln_gamma(r);
    let mut score = 0.0;
    for j in 0..counts.q {
        let n_ij = counts.n_ij[j];
        if n_ij == 0 {
            continue;
        }
        score += lg_r - ln_gamma(n_ij as f64 + r);
        for &n in counts.row(j) {
            if n > 1 {
                score += ln_gamma(n as f64 + 1.0);
            }
        }
    }
    score
}
