use super::simplex::Simplex;
use super::{Cut, CutOrigin, CutSense, LpProblem, LpResult, LpStatus, RowSense, SimplexOptions, VarStatus, INT_TOL};

fn is_integral(v: f64) -> bool {
    v.is_finite() && (v - v.round()).abs() < 1e-12
}

/// Gomory fractional cuts read off the optimal tableau of `result`.
///
/// A row qualifies when its basic variable is an integer column with fractional
/// part in `[INT_TOL, 1 - INT_TOL]` and every nonbasic variable with a nonzero
/// entry is integral: an integer column with integer bounds, or the slack of a
/// row whose coefficients, columns and rhs are all integral. Rows are taken most
/// fractional first. Slacks are substituted out, so cuts only reference
/// structural columns, and each returned cut is violated by `result.x`.
pub fn gomory_cuts(problem: &LpProblem, result: &LpResult, max_cuts: usize) -> Vec<Cut> {
    if result.status != LpStatus::Optimal || max_cuts == 0 {
        return Vec::new();
    }
    let opts = SimplexOptions::default();
    let Some(s) = Simplex::from_basis(problem, &problem.col_bounds, &result.basis, &opts) else {
        return Vec::new();
    };
    let n = s.n;

    let integral_col = |j: usize| {
        problem.integrality[j] && is_integral(problem.col_bounds[j].0) && is_integral(problem.col_bounds[j].1)
    };
    let integral_slack: Vec<bool> = problem
        .rows
        .iter()
        .map(|r| is_integral(r.rhs) && r.coeffs.iter().all(|&(j, a)| is_integral(a) && integral_col(j)))
        .collect();

    let mut candidates: Vec<(usize, usize, f64)> = s
        .head
        .iter()
        .enumerate()
        .filter(|&(_, &h)| h < n && problem.integrality[h])
        .filter_map(|(p, &h)| {
            let f = s.x[h] - s.x[h].floor();
            (INT_TOL..=1.0 - INT_TOL).contains(&f).then_some((p, h, f))
        })
        .collect();
    candidates.sort_by(|a, b| {
        (a.2 - 0.5)
            .abs()
            .total_cmp(&(b.2 - 0.5).abs())
            .then(a.1.cmp(&b.1))
    });

    let mut cuts = Vec::new();
    'rows: for (p, _, f0) in candidates {
        if cuts.len() >= max_cuts {
            break;
        }
        let rho = s.binv_row(p);
        let mut coef = vec![0.0; n];
        let mut constant = 0.0;
        for j in 0..n + s.m {
            if s.status[j] == VarStatus::Basic || s.lb[j] == s.ub[j] {
                continue;
            }
            let a = s.col_dot(j, rho);
            if a.abs() < 1e-12 {
                continue;
            }
            let integral = if j < n { integral_col(j) } else { integral_slack[j - n] };
            if !integral {
                continue 'rows;
            }
            let at_lower = s.status[j] == VarStatus::AtLower;
            // shifted variable x' >= 0 with coefficient a' in the row
            let shifted = if at_lower { a } else { -a };
            let mut fj = shifted - shifted.floor();
            if fj < 1e-11 {
                continue;
            }
            if fj > 1.0 {
                fj = 1.0;
            }
            if j < n {
                if at_lower {
                    coef[j] += fj;
                    constant -= fj * s.lb[j];
                } else {
                    coef[j] -= fj;
                    constant += fj * s.ub[j];
                }
            } else {
                let row = &problem.rows[j - n];
                // Le slack sits at its lower bound 0: x' = rhs - a.x
                // Ge slack sits at its upper bound 0: x' = a.x - rhs
                let sign = match (row.sense, at_lower) {
                    (RowSense::Le, true) | (RowSense::Ge, true) => 1.0,
                    _ => -1.0,
                };
                constant += sign * fj * row.rhs;
                for &(c, v) in &row.coeffs {
                    coef[c] -= sign * fj * v;
                }
            }
        }
        let coeffs: Vec<(usize, f64)> = coef
            .into_iter()
            .enumerate()
            .filter(|&(_, c)| c.abs() > 1e-12)
            .collect();
        if coeffs.is_empty() || coeffs.iter().any(|&(_, c)| c.abs() > 1e9) {
            continue;
        }
        let cut = Cut {
            coeffs,
            sense: CutSense::Ge,
            rhs: f0 - constant,
            origin: CutOrigin::Gomory,
        };
        if cut.violation(&result.x) > 1e-9 {
            cuts.push(cut);
        }
    }
    cuts
}
