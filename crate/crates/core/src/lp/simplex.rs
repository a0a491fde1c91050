use super::{Basis, LpError, LpProblem, LpResult, LpStatus, RowSense, SimplexOptions, VarStatus};

/// Solves the LP relaxation of `problem` (integrality ignored).
///
/// With `warm` the solve starts from that basis. A basis from a problem with fewer
/// rows is accepted; the missing rows start with their slack basic.
pub fn solve_lp(problem: &LpProblem, warm: Option<&Basis>) -> Result<LpResult, LpError> {
    solve_lp_with(problem, &problem.col_bounds, warm, &SimplexOptions::default())
}

/// Like [`solve_lp`] but with explicit column bounds (used for branching).
pub fn solve_lp_with(
    problem: &LpProblem,
    bounds: &[(f64, f64)],
    warm: Option<&Basis>,
    opts: &SimplexOptions,
) -> Result<LpResult, LpError> {
    problem.validate()?;
    if bounds.len() != problem.num_cols {
        return Err(LpError::InvalidProblem("bounds length mismatch".into()));
    }
    if let Some(&(lo, hi)) = bounds.iter().find(|(lo, hi)| !(lo <= hi) || !lo.is_finite() || !hi.is_finite()) {
        // Conflicting branching bounds make the node infeasible rather than invalid.
        if lo.is_finite() && hi.is_finite() && lo > hi {
            let cold = Simplex::cold(problem, bounds, opts);
            return Ok(cold.result(LpStatus::Infeasible));
        }
        return Err(LpError::InvalidProblem(format!("invalid bounds [{lo}, {hi}]")));
    }

    let mut iterations = 0;
    if let Some(basis) = warm {
        if let Some(mut s) = Simplex::from_basis(problem, bounds, basis, opts) {
            match s.run_warm()? {
                Some(status) => return Ok(s.result(status)),
                None => iterations = s.iterations,
            }
        }
    }
    let mut s = Simplex::cold(problem, bounds, opts);
    s.iterations = iterations;
    let status = s.run_cold()?;
    Ok(s.result(status))
}

enum Phase {
    Done,
    Infeasible,
    IterationLimit,
}

/// Dense-inverse revised simplex over structurals `0..n` and slacks `n..n+m`.
pub(super) struct Simplex<'a> {
    problem: &'a LpProblem,
    pub(super) n: usize,
    pub(super) m: usize,
    /// Sparse structural columns as (row, value).
    cols: Vec<Vec<(usize, f64)>>,
    pub(super) lb: Vec<f64>,
    pub(super) ub: Vec<f64>,
    /// Minimisation costs (negated objective).
    cost: Vec<f64>,
    b: Vec<f64>,
    pub(super) status: Vec<VarStatus>,
    pub(super) head: Vec<usize>,
    /// Row-major `m x m` basis inverse.
    pub(super) binv: Vec<f64>,
    /// Columns of `binv` that may differ from a unit vector. Every other column
    /// `i` equals `e_p` where `p` is the basis position of slack `i`.
    active: Vec<usize>,
    is_active: Vec<bool>,
    /// Basis position of every variable, `usize::MAX` when nonbasic.
    position: Vec<usize>,
    pub(super) x: Vec<f64>,
    opts: SimplexOptions,
    opt_tol: f64,
    max_iter: usize,
    iterations: usize,
    degenerate: usize,
    bland: bool,
    since_refactor: usize,
}

impl<'a> Simplex<'a> {
    fn base(problem: &'a LpProblem, bounds: &[(f64, f64)], opts: &SimplexOptions) -> Self {
        let n = problem.num_cols;
        let m = problem.rows.len();
        let mut cols = vec![Vec::new(); n];
        for (i, row) in problem.rows.iter().enumerate() {
            for &(j, a) in &row.coeffs {
                if a != 0.0 {
                    cols[j].push((i, a));
                }
            }
        }
        let mut lb = Vec::with_capacity(n + m);
        let mut ub = Vec::with_capacity(n + m);
        for &(lo, hi) in bounds {
            lb.push(lo);
            ub.push(hi);
        }
        for row in &problem.rows {
            let (lo, hi) = match row.sense {
                RowSense::Le => (0.0, f64::INFINITY),
                RowSense::Ge => (f64::NEG_INFINITY, 0.0),
                RowSense::Eq => (0.0, 0.0),
            };
            lb.push(lo);
            ub.push(hi);
        }
        let mut cost: Vec<f64> = problem.objective.iter().map(|c| -c).collect();
        cost.resize(n + m, 0.0);
        let scale = cost.iter().fold(1.0f64, |a, c| a.max(c.abs()));
        Simplex {
            problem,
            n,
            m,
            cols,
            lb,
            ub,
            cost,
            b: problem.rows.iter().map(|r| r.rhs).collect(),
            status: vec![VarStatus::AtLower; n + m],
            head: Vec::with_capacity(m),
            binv: Vec::new(),
            active: Vec::new(),
            is_active: vec![false; m],
            position: vec![usize::MAX; n + m],
            x: vec![0.0; n + m],
            opt_tol: opts.opt_tol * scale,
            max_iter: opts.max_iterations.unwrap_or(50 * (n + m)).max(1),
            opts: opts.clone(),
            iterations: 0,
            degenerate: 0,
            bland: false,
            since_refactor: 0,
        }
    }

    /// Slack basis with every structural at its cost-favourable bound, which is
    /// dual feasible by construction.
    pub(super) fn cold(problem: &'a LpProblem, bounds: &[(f64, f64)], opts: &SimplexOptions) -> Self {
        let mut s = Self::base(problem, bounds, opts);
        let (n, m) = (s.n, s.m);
        for j in 0..n {
            s.status[j] = if s.cost[j] < 0.0 {
                VarStatus::AtUpper
            } else {
                VarStatus::AtLower
            };
        }
        for i in 0..m {
            s.status[n + i] = VarStatus::Basic;
            s.head.push(n + i);
            s.position[n + i] = i;
        }
        s.binv = vec![0.0; m * m];
        for i in 0..m {
            s.binv[i * m + i] = 1.0;
        }
        s.compute_primal();
        s
    }

    pub(super) fn from_basis(
        problem: &'a LpProblem,
        bounds: &[(f64, f64)],
        basis: &Basis,
        opts: &SimplexOptions,
    ) -> Option<Self> {
        let mut s = Self::base(problem, bounds, opts);
        let (n, m) = (s.n, s.m);
        if basis.cols.len() != n || basis.rows.len() > m {
            return None;
        }
        s.status[..n].copy_from_slice(&basis.cols);
        s.status[n..n + basis.rows.len()].copy_from_slice(&basis.rows);
        for i in basis.rows.len()..m {
            s.status[n + i] = VarStatus::Basic;
        }
        for j in 0..n + m {
            match s.status[j] {
                VarStatus::Basic => s.head.push(j),
                VarStatus::AtLower if !s.lb[j].is_finite() => s.status[j] = VarStatus::AtUpper,
                VarStatus::AtUpper if !s.ub[j].is_finite() => s.status[j] = VarStatus::AtLower,
                _ => {}
            }
        }
        if s.head.len() != m || s.refactor().is_err() {
            return None;
        }
        s.compute_primal();
        Some(s)
    }

    fn result(&self, status: LpStatus) -> LpResult {
        let x = self.x[..self.n].to_vec();
        LpResult {
            status,
            objective: self.problem.objective_value(&x),
            x,
            basis: Basis {
                cols: self.status[..self.n].to_vec(),
                rows: self.status[self.n..].to_vec(),
            },
            iterations: self.iterations,
        }
    }

    fn run_cold(&mut self) -> Result<LpStatus, LpError> {
        if !self.primal_feasible() {
            match self.dual_phase()? {
                Phase::Done => {}
                Phase::Infeasible => return Ok(LpStatus::Infeasible),
                Phase::IterationLimit => return Ok(LpStatus::IterationLimit),
            }
        }
        self.finish_primal()
    }

    /// `None` means the warm basis could not be repaired and a cold start is needed.
    fn run_warm(&mut self) -> Result<Option<LpStatus>, LpError> {
        if !self.primal_feasible() {
            if !self.make_dual_feasible() {
                return Ok(None);
            }
            match self.dual_phase()? {
                Phase::Done => {}
                Phase::Infeasible => return Ok(Some(LpStatus::Infeasible)),
                Phase::IterationLimit => return Ok(Some(LpStatus::IterationLimit)),
            }
        }
        self.finish_primal().map(Some)
    }

    fn finish_primal(&mut self) -> Result<LpStatus, LpError> {
        match self.primal_phase()? {
            Phase::Done => Ok(LpStatus::Optimal),
            Phase::Infeasible => Ok(LpStatus::Infeasible),
            Phase::IterationLimit => Ok(LpStatus::IterationLimit),
        }
    }

    fn is_fixed(&self, j: usize) -> bool {
        self.lb[j] == self.ub[j]
    }

    fn nonbasic_value(&self, j: usize) -> f64 {
        match self.status[j] {
            VarStatus::AtLower if self.lb[j].is_finite() => self.lb[j],
            VarStatus::AtUpper if self.ub[j].is_finite() => self.ub[j],
            VarStatus::AtLower => self.ub[j],
            _ => self.lb[j],
        }
    }

    /// `v · a_j` for the column of variable `j`.
    pub(super) fn col_dot(&self, j: usize, v: &[f64]) -> f64 {
        if j < self.n {
            self.cols[j].iter().map(|&(i, a)| a * v[i]).sum()
        } else {
            v[j - self.n]
        }
    }

    /// `B^{-1} a_j`.
    pub(super) fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.m;
        let mut out = vec![0.0; m];
        let mut add = |r: usize, a: f64| {
            if self.is_active[r] {
                for (i, o) in out.iter_mut().enumerate() {
                    *o += a * self.binv[i * m + r];
                }
            } else {
                out[self.position[self.n + r]] += a;
            }
        };
        if j < self.n {
            for &(r, a) in &self.cols[j] {
                add(r, a);
            }
        } else {
            add(j - self.n, 1.0);
        }
        out
    }

    pub(super) fn binv_row(&self, p: usize) -> &[f64] {
        &self.binv[p * self.m..(p + 1) * self.m]
    }

    fn duals(&self) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for (i, &h) in self.head.iter().enumerate() {
            let c = self.cost[h];
            if c != 0.0 {
                let row = &self.binv[i * m..(i + 1) * m];
                for &r in &self.active {
                    y[r] += c * row[r];
                }
            }
        }
        y
    }

    fn compute_primal(&mut self) {
        let (n, m) = (self.n, self.m);
        let mut r = self.b.clone();
        for j in 0..n + m {
            if self.status[j] == VarStatus::Basic {
                continue;
            }
            let v = self.nonbasic_value(j);
            self.x[j] = v;
            if v != 0.0 {
                if j < n {
                    for &(i, a) in &self.cols[j] {
                        r[i] -= a * v;
                    }
                } else {
                    r[j - n] -= v;
                }
            }
        }
        for (i, &h) in self.head.iter().enumerate() {
            let row = &self.binv[i * m..(i + 1) * m];
            let mut v: f64 = self.active.iter().map(|&k| row[k] * r[k]).sum();
            if h >= n && !self.is_active[h - n] {
                v += r[h - n];
            }
            self.x[h] = v;
        }
    }

    /// Rebuilds `B^-1` from scratch.
    ///
    /// With `R` the rows whose slack is nonbasic and `K` the basic structural
    /// columns, `B` is block triangular: `A[R,K]` must be square and
    /// `B^-1 = [[A[R,K]^-1, 0], [-A[S,K] A[R,K]^-1, I]]`, so only a `|K| x |K|`
    /// dense inverse is needed.
    pub(super) fn refactor(&mut self) -> Result<(), LpError> {
        let (n, m) = (self.n, self.m);
        let mut slack_pos = vec![usize::MAX; m];
        let mut structural: Vec<(usize, usize)> = Vec::new();
        for (p, &h) in self.head.iter().enumerate() {
            if h < n {
                structural.push((p, h));
            } else {
                slack_pos[h - n] = p;
            }
        }
        let rows_r: Vec<usize> = (0..m).filter(|&i| slack_pos[i] == usize::MAX).collect();
        let k = structural.len();
        if rows_r.len() != k {
            return Err(LpError::SingularBasis);
        }
        let mut r_index = vec![usize::MAX; m];
        for (r, &i) in rows_r.iter().enumerate() {
            r_index[i] = r;
        }
        let mut a = vec![0.0; k * k];
        for (c, &(_, h)) in structural.iter().enumerate() {
            for &(i, v) in &self.cols[h] {
                if r_index[i] != usize::MAX {
                    a[r_index[i] * k + c] = v;
                }
            }
        }
        let inv = dense_inverse(a, k)?;

        let mut binv = vec![0.0; m * m];
        for i in 0..m {
            if slack_pos[i] != usize::MAX {
                binv[slack_pos[i] * m + i] = 1.0;
            }
        }
        for (c, &(p, h)) in structural.iter().enumerate() {
            for (r, &i) in rows_r.iter().enumerate() {
                binv[p * m + i] = inv[c * k + r];
            }
            for &(i, v) in &self.cols[h] {
                let q = slack_pos[i];
                if q == usize::MAX {
                    continue;
                }
                for (r, &ri) in rows_r.iter().enumerate() {
                    binv[q * m + ri] -= v * inv[c * k + r];
                }
            }
        }
        self.binv = binv;
        self.is_active = vec![false; m];
        for &i in &rows_r {
            self.is_active[i] = true;
        }
        self.active = rows_r;
        self.position = vec![usize::MAX; n + m];
        for (p, &h) in self.head.iter().enumerate() {
            self.position[h] = p;
        }
        self.since_refactor = 0;
        Ok(())
    }

    /// Replaces the basic variable at position `p` by `entering` with column `alpha`.
    fn pivot(&mut self, p: usize, entering: usize, alpha: &[f64]) -> Result<(), LpError> {
        let (n, m) = (self.n, self.m);
        let leaving = self.head[p];
        if leaving >= n && !self.is_active[leaving - n] {
            self.is_active[leaving - n] = true;
            self.active.push(leaving - n);
        }
        let ap = alpha[p];
        let pivot_row: Vec<f64> = self
            .active
            .iter()
            .map(|&k| {
                self.binv[p * m + k] /= ap;
                self.binv[p * m + k]
            })
            .collect();
        for i in 0..m {
            if i == p || alpha[i] == 0.0 {
                continue;
            }
            let f = alpha[i];
            let row = &mut self.binv[i * m..(i + 1) * m];
            for (&k, &v) in self.active.iter().zip(&pivot_row) {
                row[k] -= f * v;
            }
        }
        self.position[leaving] = usize::MAX;
        self.position[entering] = p;
        self.head[p] = entering;
        self.status[entering] = VarStatus::Basic;
        debug_assert!(self.status[leaving] != VarStatus::Basic);
        self.since_refactor += 1;
        if self.since_refactor >= self.opts.refactor_every {
            self.refactor()?;
            self.compute_primal();
        }
        Ok(())
    }

    fn primal_feasible(&self) -> bool {
        let tol = self.opts.feas_tol;
        self.head
            .iter()
            .all(|&h| self.x[h] >= self.lb[h] - tol && self.x[h] <= self.ub[h] + tol)
    }

    /// Moves boxed nonbasic variables to the bound their reduced cost prefers.
    /// Fails when a one-sided variable has the wrong sign.
    fn make_dual_feasible(&mut self) -> bool {
        let y = self.duals();
        let mut changed = false;
        for j in 0..self.n + self.m {
            if self.status[j] == VarStatus::Basic || self.is_fixed(j) {
                continue;
            }
            let d = self.cost[j] - self.col_dot(j, &y);
            match self.status[j] {
                VarStatus::AtLower if d < -self.opt_tol => {
                    if !self.ub[j].is_finite() {
                        return false;
                    }
                    self.status[j] = VarStatus::AtUpper;
                    changed = true;
                }
                VarStatus::AtUpper if d > self.opt_tol => {
                    if !self.lb[j].is_finite() {
                        return false;
                    }
                    self.status[j] = VarStatus::AtLower;
                    changed = true;
                }
                _ => {}
            }
        }
        if changed {
            self.compute_primal();
        }
        true
    }

    fn note_step(&mut self, step: f64) {
        if step.abs() <= 1e-12 {
            self.degenerate += 1;
            if self.degenerate >= self.opts.bland_after {
                self.bland = true;
            }
        }
    }

    fn primal_phase(&mut self) -> Result<Phase, LpError> {
        let tol = self.pivot_tol();
        loop {
            if self.iterations >= self.max_iter {
                return Ok(Phase::IterationLimit);
            }
            let y = self.duals();
            let mut entering: Option<(usize, f64)> = None;
            for j in 0..self.n + self.m {
                if self.status[j] == VarStatus::Basic || self.is_fixed(j) {
                    continue;
                }
                let d = self.cost[j] - self.col_dot(j, &y);
                let eligible = match self.status[j] {
                    VarStatus::AtLower => d < -self.opt_tol,
                    VarStatus::AtUpper => d > self.opt_tol,
                    VarStatus::Basic => false,
                };
                if !eligible {
                    continue;
                }
                if self.bland {
                    entering = Some((j, d));
                    break;
                }
                if entering.is_none_or(|(_, best)| d.abs() > best.abs()) {
                    entering = Some((j, d));
                }
            }
            let Some((q, _)) = entering else {
                return Ok(Phase::Done);
            };
            let dir = if self.status[q] == VarStatus::AtLower { 1.0 } else { -1.0 };
            let alpha = self.ftran(q);

            // Ratio test: basic i moves by -dir * alpha_i per unit step.
            let mut t_max = self.ub[q] - self.lb[q];
            let mut ratios = Vec::new();
            for (i, &h) in self.head.iter().enumerate() {
                let delta = -dir * alpha[i];
                let r = if delta < -tol && self.lb[h].is_finite() {
                    (self.x[h] - self.lb[h]) / -delta
                } else if delta > tol && self.ub[h].is_finite() {
                    (self.ub[h] - self.x[h]) / delta
                } else {
                    continue;
                };
                let r = r.max(0.0);
                ratios.push((i, r));
                t_max = t_max.min(r);
            }
            if !t_max.is_finite() {
                return Err(LpError::Unbounded);
            }
            let flip_ok = self.ub[q] - self.lb[q] <= t_max + 1e-12;
            let leave = if flip_ok {
                None
            } else {
                let near = ratios.iter().filter(|&&(_, r)| r <= t_max + 1e-12);
                if self.bland {
                    near.min_by_key(|&&(i, _)| self.head[i]).map(|&(i, _)| i)
                } else {
                    near.max_by(|a, b| alpha[a.0].abs().total_cmp(&alpha[b.0].abs()))
                        .map(|&(i, _)| i)
                }
            };

            self.iterations += 1;
            let step = t_max;
            self.note_step(step);
            for (i, &h) in self.head.iter().enumerate() {
                self.x[h] -= dir * alpha[i] * step;
            }
            self.x[q] += dir * step;
            match leave {
                None => {
                    self.status[q] = if dir > 0.0 { VarStatus::AtUpper } else { VarStatus::AtLower };
                    self.x[q] = self.nonbasic_value(q);
                }
                Some(p) => {
                    let h = self.head[p];
                    let to_lower = -dir * alpha[p] < 0.0;
                    self.status[h] = if to_lower { VarStatus::AtLower } else { VarStatus::AtUpper };
                    self.x[h] = self.nonbasic_value(h);
                    self.pivot(p, q, &alpha)?;
                }
            }
        }
    }

    fn pivot_tol(&self) -> f64 {
        self.opts.pivot_tol
    }

    fn dual_phase(&mut self) -> Result<Phase, LpError> {
        let tol = self.pivot_tol();
        let feas = self.opts.feas_tol;
        loop {
            if self.iterations >= self.max_iter {
                return Ok(Phase::IterationLimit);
            }
            // Leaving row: largest bound violation.
            let mut leave: Option<(usize, f64)> = None;
            for (i, &h) in self.head.iter().enumerate() {
                let v = self.x[h];
                let viol = if v < self.lb[h] - feas {
                    self.lb[h] - v
                } else if v > self.ub[h] + feas {
                    v - self.ub[h]
                } else {
                    continue;
                };
                let better = match leave {
                    None => true,
                    Some((bi, bv)) => {
                        if self.bland {
                            h < self.head[bi]
                        } else {
                            viol > bv
                        }
                    }
                };
                if better {
                    leave = Some((i, viol));
                }
            }
            let Some((p, _)) = leave else {
                return Ok(Phase::Done);
            };
            let h = self.head[p];
            let below = self.x[h] < self.lb[h];
            let target = if below { self.lb[h] } else { self.ub[h] };

            let y = self.duals();
            let rho = self.binv_row(p).to_vec();
            let mut entering: Option<(usize, f64, f64)> = None;
            for j in 0..self.n + self.m {
                if self.status[j] == VarStatus::Basic || self.is_fixed(j) {
                    continue;
                }
                let a = self.col_dot(j, &rho);
                let at_lower = self.status[j] == VarStatus::AtLower;
                let eligible = if below {
                    (at_lower && a < -tol) || (!at_lower && a > tol)
                } else {
                    (at_lower && a > tol) || (!at_lower && a < -tol)
                };
                if !eligible {
                    continue;
                }
                let d = self.cost[j] - self.col_dot(j, &y);
                let ratio = d.abs() / a.abs();
                let better = match entering {
                    None => true,
                    Some((_, br, ba)) => {
                        if self.bland {
                            ratio < br - 1e-12
                        } else {
                            ratio < br - 1e-12 || (ratio <= br + 1e-12 && a.abs() > ba.abs())
                        }
                    }
                };
                if better {
                    entering = Some((j, ratio, a));
                }
            }
            let Some((q, ratio, _)) = entering else {
                return Ok(Phase::Infeasible);
            };
            let alpha = self.ftran(q);
            if alpha[p].abs() < tol {
                // Row and column computations disagree; refactor and retry.
                self.refactor()?;
                self.compute_primal();
                self.iterations += 1;
                continue;
            }
            self.iterations += 1;
            self.note_step(ratio);
            let delta = (self.x[h] - target) / alpha[p];
            for (i, &b) in self.head.iter().enumerate() {
                self.x[b] -= alpha[i] * delta;
            }
            self.x[q] += delta;
            self.status[h] = if below { VarStatus::AtLower } else { VarStatus::AtUpper };
            self.x[h] = target;
            self.pivot(p, q, &alpha)?;
        }
    }
}

/// Gauss-Jordan inverse of a row-major `k x k` matrix with partial pivoting.
fn dense_inverse(mut a: Vec<f64>, k: usize) -> Result<Vec<f64>, LpError> {
    let mut inv = vec![0.0; k * k];
    for i in 0..k {
        inv[i * k + i] = 1.0;
    }
    for c in 0..k {
        let piv = (c..k)
            .max_by(|&i, &j| a[i * k + c].abs().total_cmp(&a[j * k + c].abs()))
            .expect("non-empty pivot range");
        if a[piv * k + c].abs() < 1e-11 {
            return Err(LpError::SingularBasis);
        }
        if piv != c {
            for j in 0..k {
                a.swap(piv * k + j, c * k + j);
                inv.swap(piv * k + j, c * k + j);
            }
        }
        let d = a[c * k + c];
        for j in 0..k {
            a[c * k + j] /= d;
            inv[c * k + j] /= d;
        }
        for i in 0..k {
            let f = a[i * k + c];
            if i == c || f == 0.0 {
                continue;
            }
            for j in 0..k {
                a[i * k + j] -= f * a[c * k + j];
                inv[i * k + j] -= f * inv[c * k + j];
            }
        }
    }
    Ok(inv)
}
