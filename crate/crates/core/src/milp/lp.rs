//! Bounded-variable dual simplex.
//!
//! Every row `r` owns a logical column `n + r` with coefficient `+1`, so row
//! `a·x (sense) b` becomes `a·x + s_r = b` with `s_r >= 0` for `<=`,
//! `s_r <= 0` for `>=` and `s_r = 0` for `=`. The slack basis is therefore the
//! identity, and because nonbasic variables sit at the bound matching the sign
//! of their reduced cost, the basis stays dual feasible through bound changes
//! and added rows. Re-optimisation after branching or cutting is a dual
//! simplex warm start.
//!
//! The basis is factored through the square block spanned by its structural
//! columns and the rows whose logical is nonbasic, so the dense part of the
//! factor never exceeds the number of structural columns. Pivots between
//! refactors are kept in product form.

use super::model::{MilpModel, Row, Sense};

pub const PRIMAL_TOL: f64 = 1e-7;
pub const DUAL_TOL: f64 = 1e-7;
const PIVOT_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 64;
const STALL_LIMIT: usize = 40;
/// Stand-in bound for infinite bounds that would break dual feasibility.
const ARTIFICIAL_BOUND: f64 = 1e7;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
    /// The dual objective proved the optimum exceeds the supplied cutoff.
    Cutoff,
}

#[derive(Clone, Debug)]
pub struct LpResult {
    pub status: LpStatus,
    pub objective: f64,
    pub values: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum State {
    Basic(usize),
    Lower,
    Upper,
}

#[derive(Clone, Debug)]
pub struct DualSimplex {
    n: usize,
    m: usize,
    cols: Vec<Vec<(usize, f64)>>,
    rows: Vec<Vec<(usize, f64)>>,
    rhs: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    artificial: Vec<bool>,
    cost: Vec<f64>,
    head: Vec<usize>,
    state: Vec<State>,
    x: Vec<f64>,
    d: Vec<f64>,
    /// Structural basic columns of the factored basis and their positions.
    sb: Vec<usize>,
    spos: Vec<usize>,
    /// Rows whose logical is nonbasic, and the position of each row in it.
    prows: Vec<usize>,
    p_index: Vec<usize>,
    /// `(row, position)` of basic logicals.
    lrows: Vec<(usize, usize)>,
    /// Inverse of the block `A[prows, sb]`, indexed `[t * k + s]`.
    minv: Vec<f64>,
    /// Pivot position and entering column since the last refactor.
    etas: Vec<(usize, Vec<f64>)>,
    since_refactor: usize,
    iterations: usize,
    iteration_limit: usize,
}

fn logical_bounds(sense: Sense) -> (f64, f64) {
    match sense {
        Sense::Le => (0.0, f64::INFINITY),
        Sense::Ge => (f64::NEG_INFINITY, 0.0),
        Sense::Eq => (0.0, 0.0),
    }
}

impl DualSimplex {
    /// LP relaxation of `model` (integrality dropped).
    pub fn new(model: &MilpModel) -> Self {
        let n = model.num_vars();
        let mut lp = DualSimplex {
            n,
            m: 0,
            cols: vec![Vec::new(); n],
            rows: Vec::new(),
            rhs: Vec::new(),
            lo: model.vars().iter().map(|v| v.lower).collect(),
            hi: model.vars().iter().map(|v| v.upper).collect(),
            artificial: vec![false; n],
            cost: model.vars().iter().map(|v| v.objective).collect(),
            head: Vec::new(),
            state: vec![State::Lower; n],
            x: vec![0.0; n],
            d: Vec::new(),
            sb: Vec::new(),
            spos: Vec::new(),
            prows: Vec::new(),
            p_index: Vec::new(),
            lrows: Vec::new(),
            minv: Vec::new(),
            etas: Vec::new(),
            since_refactor: 0,
            iterations: 0,
            iteration_limit: 0,
        };
        for j in 0..n {
            lp.place_at_dual_feasible_bound(j, lp.cost[j]);
        }
        lp.d = lp.cost.clone();
        for row in model.rows() {
            lp.push_row(row);
        }
        lp.refactor();
        lp
    }

    pub fn num_rows(&self) -> usize {
        self.m
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn bounds(&self, j: usize) -> (f64, f64) {
        (self.lo[j], self.hi[j])
    }

    fn place_at_dual_feasible_bound(&mut self, j: usize, dj: f64) {
        let (lo, hi) = (self.lo[j], self.hi[j]);
        let st = if dj >= 0.0 {
            if lo.is_finite() {
                State::Lower
            } else if hi.is_finite() && dj <= DUAL_TOL {
                State::Upper
            } else {
                self.lo[j] = -ARTIFICIAL_BOUND;
                self.artificial[j] = true;
                State::Lower
            }
        } else if hi.is_finite() {
            State::Upper
        } else {
            self.hi[j] = ARTIFICIAL_BOUND;
            self.artificial[j] = true;
            State::Upper
        };
        self.state[j] = st;
        self.x[j] = match st {
            State::Lower => self.lo[j],
            State::Upper => self.hi[j],
            _ => 0.0,
        };
    }

    /// Appends a row; its logical becomes basic so the basis stays dual
    /// feasible.
    pub fn add_row(&mut self, row: &Row) {
        self.push_row(row);
        self.refactor();
    }

    fn push_row(&mut self, row: &Row) {
        let r = self.m;
        self.m += 1;
        let mut entries: Vec<(usize, f64)> = Vec::with_capacity(row.coefs.len());
        for &(j, a) in &row.coefs {
            if a != 0.0 {
                entries.push((j, a));
            }
        }
        for &(j, a) in &entries {
            self.cols[j].push((r, a));
        }
        self.rows.push(entries);
        self.rhs.push(row.rhs);
        let (lo, hi) = logical_bounds(row.sense);
        self.lo.push(lo);
        self.hi.push(hi);
        self.artificial.push(false);
        self.cost.push(0.0);
        self.d.push(0.0);
        self.x.push(0.0);
        self.state.push(State::Basic(r));
        self.head.push(self.n + r);
    }

    /// Changes bounds of structural column `j`; call [`Self::resolve_primal`]
    /// (or solve) afterwards.
    pub fn set_bounds_lazy(&mut self, j: usize, lo: f64, hi: f64) {
        self.lo[j] = lo;
        self.hi[j] = hi;
        self.artificial[j] = false;
        match self.state[j] {
            State::Basic(_) => {}
            State::Lower | State::Upper => {
                let dj = self.d[j];
                self.place_at_dual_feasible_bound(j, dj);
            }
        }
    }

    pub fn resolve_primal(&mut self) {
        self.recompute_primal();
    }

    fn column_iter(&self, j: usize) -> ColIter<'_> {
        if j < self.n {
            ColIter::Structural(self.cols[j].iter())
        } else {
            ColIter::Logical(Some(j - self.n))
        }
    }

    /// Factors the basis from scratch with partial pivoting, repairing a
    /// singular basis with logicals.
    fn refactor(&mut self) {
        let (n, m) = (self.n, self.m);
        self.since_refactor = 0;
        self.etas.clear();
        loop {
            self.sb.clear();
            self.spos.clear();
            self.lrows.clear();
            let mut logical_basic = vec![false; m];
            for (pos, &j) in self.head.iter().enumerate() {
                if j < n {
                    self.sb.push(j);
                    self.spos.push(pos);
                } else {
                    logical_basic[j - n] = true;
                    self.lrows.push((j - n, pos));
                }
            }
            self.prows = (0..m).filter(|&r| !logical_basic[r]).collect();
            self.p_index = vec![usize::MAX; m];
            for (s, &r) in self.prows.iter().enumerate() {
                self.p_index[r] = s;
            }
            let k = self.sb.len();
            debug_assert_eq!(k, self.prows.len());
            let mut a = vec![0.0; k * k];
            for (t, &j) in self.sb.iter().enumerate() {
                for &(r, v) in &self.cols[j] {
                    let s = self.p_index[r];
                    if s != usize::MAX {
                        a[s * k + t] = v;
                    }
                }
            }
            let mut inv = vec![0.0; k * k];
            for i in 0..k {
                inv[i * k + i] = 1.0;
            }
            // Gauss-Jordan over columns; row_of_col[t] = pivot row used by column t.
            let mut row_used = vec![false; k];
            let mut row_of_col = vec![usize::MAX; k];
            let mut bad_cols = Vec::new();
            for c in 0..k {
                let mut best = None;
                let mut best_abs = 1e-11;
                for r in 0..k {
                    if !row_used[r] && a[r * k + c].abs() > best_abs {
                        best_abs = a[r * k + c].abs();
                        best = Some(r);
                    }
                }
                let Some(p) = best else {
                    bad_cols.push(c);
                    continue;
                };
                row_used[p] = true;
                row_of_col[c] = p;
                let piv = a[p * k + c];
                for q in 0..k {
                    a[p * k + q] /= piv;
                    inv[p * k + q] /= piv;
                }
                for r in 0..k {
                    if r == p {
                        continue;
                    }
                    let f = a[r * k + c];
                    if f != 0.0 {
                        for q in 0..k {
                            a[r * k + q] -= f * a[p * k + q];
                            inv[r * k + q] -= f * inv[p * k + q];
                        }
                    }
                }
            }
            if bad_cols.is_empty() {
                let mut minv = vec![0.0; k * k];
                for t in 0..k {
                    let p = row_of_col[t];
                    minv[t * k..(t + 1) * k].copy_from_slice(&inv[p * k..(p + 1) * k]);
                }
                self.minv = minv;
                break;
            }
            let free_rows: Vec<usize> = (0..k).filter(|&r| !row_used[r]).map(|s| self.prows[s]).collect();
            for (t, r) in bad_cols.into_iter().zip(free_rows) {
                let pos = self.spos[t];
                let j = self.head[pos];
                let dj = self.d.get(j).copied().unwrap_or(0.0);
                self.state[j] = State::Lower;
                self.place_at_dual_feasible_bound(j, dj);
                self.head[pos] = n + r;
            }
        }
        for (pos, &j) in self.head.iter().enumerate() {
            self.state[j] = State::Basic(pos);
        }
        self.recompute_primal();
        self.recompute_duals();
    }

    /// Solves `B0 u = b` for the factored basis; `u` is indexed by position.
    fn base_solve(&self, b: &[f64]) -> Vec<f64> {
        let k = self.sb.len();
        let mut u = vec![0.0; self.m];
        let mut acc = b.to_vec();
        for t in 0..k {
            let row = &self.minv[t * k..(t + 1) * k];
            let ut: f64 = row.iter().zip(&self.prows).map(|(v, &r)| v * b[r]).sum();
            if ut != 0.0 {
                for &(r, a) in &self.cols[self.sb[t]] {
                    acc[r] -= a * ut;
                }
            }
            u[self.spos[t]] = ut;
        }
        for &(r, pos) in &self.lrows {
            u[pos] = acc[r];
        }
        u
    }

    /// `B^-1 b` for a dense row-space vector `b`.
    fn ftran_dense(&self, b: &[f64]) -> Vec<f64> {
        let mut u = self.base_solve(b);
        for (r, col) in &self.etas {
            let ur = u[*r] / col[*r];
            if ur != 0.0 {
                for (ui, ci) in u.iter_mut().zip(col) {
                    *ui -= ci * ur;
                }
            }
            u[*r] = ur;
        }
        u
    }

    /// `v^T B^-1` for `v` indexed by position; the result is over rows.
    fn btran(&self, mut v: Vec<f64>) -> Vec<f64> {
        for (r, col) in self.etas.iter().rev() {
            let r = *r;
            let dot: f64 = v.iter().zip(col).map(|(a, b)| a * b).sum();
            v[r] = (v[r] - (dot - v[r] * col[r])) / col[r];
        }
        let k = self.sb.len();
        let mut w = vec![0.0; self.m];
        for &(r, pos) in &self.lrows {
            w[r] = v[pos];
        }
        for t in 0..k {
            let mut z = v[self.spos[t]];
            for &(r, a) in &self.cols[self.sb[t]] {
                if self.p_index[r] == usize::MAX {
                    z -= w[r] * a;
                }
            }
            if z != 0.0 {
                for s in 0..k {
                    w[self.prows[s]] += z * self.minv[t * k + s];
                }
            }
        }
        w
    }

    fn recompute_primal(&mut self) {
        let m = self.m;
        let mut r_eff = self.rhs.clone();
        for j in 0..self.n + m {
            if matches!(self.state[j], State::Basic(_)) {
                continue;
            }
            let v = self.x[j];
            if v != 0.0 {
                for (r, a) in self.column_iter(j) {
                    r_eff[r] -= a * v;
                }
            }
        }
        let u = self.ftran_dense(&r_eff);
        for (pos, v) in u.into_iter().enumerate() {
            self.x[self.head[pos]] = v;
        }
    }

    fn recompute_duals(&mut self) {
        let m = self.m;
        let y = self.btran(self.head.iter().map(|&j| self.cost[j]).collect());
        for j in 0..self.n + m {
            if matches!(self.state[j], State::Basic(_)) {
                self.d[j] = 0.0;
                continue;
            }
            let mut dj = self.cost[j];
            for (r, a) in self.column_iter(j) {
                dj -= y[r] * a;
            }
            self.d[j] = dj;
        }
    }

    /// Moves nonbasic variables whose reduced cost has the wrong sign to the
    /// opposite bound. Returns whether anything moved.
    fn restore_dual_feasibility(&mut self) -> bool {
        let mut moved = false;
        for j in 0..self.n + self.m {
            let dj = self.d[j];
            let wrong = match self.state[j] {
                State::Lower => dj < -DUAL_TOL,
                State::Upper => dj > DUAL_TOL,
                State::Basic(_) => false,
            };
            if wrong {
                self.place_at_dual_feasible_bound(j, dj);
                moved = true;
            }
        }
        if moved {
            self.recompute_primal();
        }
        moved
    }

    fn objective(&self) -> f64 {
        (0..self.n).map(|j| self.cost[j] * self.x[j]).sum()
    }

    fn leaving_row(&self, bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        let mut best_key = 0.0;
        for i in 0..self.m {
            let j = self.head[i];
            let v = self.x[j];
            let viol = if v < self.lo[j] - PRIMAL_TOL {
                v - self.lo[j]
            } else if v > self.hi[j] + PRIMAL_TOL {
                v - self.hi[j]
            } else {
                continue;
            };
            if bland {
                if best.is_none_or(|(bi, _)| self.head[bi] > j) {
                    best = Some((i, viol));
                }
            } else if viol.abs() > best_key {
                best_key = viol.abs();
                best = Some((i, viol));
            }
        }
        best
    }

    /// Row `r` of `B^-1 [A | I]` over all columns.
    fn pivot_row(&self, r: usize) -> Vec<f64> {
        let mut e = vec![0.0; self.m];
        e[r] = 1.0;
        let rho = self.btran(e);
        let mut alpha = vec![0.0; self.n + self.m];
        for (k, &rk) in rho.iter().enumerate() {
            if rk.abs() > 1e-14 {
                for &(j, a) in &self.rows[k] {
                    alpha[j] += rk * a;
                }
                alpha[self.n + k] = rk;
            }
        }
        alpha
    }

    fn ftran(&self, q: usize) -> Vec<f64> {
        let mut b = vec![0.0; self.m];
        for (r, a) in self.column_iter(q) {
            b[r] += a;
        }
        self.ftran_dense(&b)
    }

    /// Runs the dual simplex to optimality. With `cutoff`, stops as soon as
    /// the (always valid) dual objective exceeds it.
    pub fn solve(&mut self, cutoff: Option<f64>) -> LpResult {
        self.iteration_limit = self.iterations + 20_000 + 50 * (self.n + self.m);
        let mut stall = 0usize;
        let mut last_obj = f64::NEG_INFINITY;
        let mut fresh = false;
        let status = loop {
            if self.since_refactor >= REFACTOR_EVERY {
                self.refactor();
                self.restore_dual_feasibility();
                fresh = true;
            }
            if let Some(c) = cutoff {
                let obj = self.objective();
                if obj > c + 1e-9 * c.abs().max(1.0) && !self.has_artificial_at_bound() {
                    break LpStatus::Cutoff;
                }
            }
            let bland = stall > STALL_LIMIT;
            let Some((r, viol)) = self.leaving_row(bland) else {
                if !fresh {
                    self.refactor();
                    self.restore_dual_feasibility();
                    fresh = true;
                    continue;
                }
                if self.restore_dual_feasibility() {
                    continue;
                }
                break if self.has_artificial_at_bound() { LpStatus::Unbounded } else { LpStatus::Optimal };
            };
            if self.iterations >= self.iteration_limit {
                break LpStatus::IterationLimit;
            }
            let alpha = self.pivot_row(r);
            let Some(q) = self.ratio_test(&alpha, viol < 0.0, bland) else {
                if !fresh {
                    self.refactor();
                    self.restore_dual_feasibility();
                    fresh = true;
                    continue;
                }
                break LpStatus::Infeasible;
            };
            self.pivot(r, q, &alpha, viol < 0.0);
            fresh = false;
            self.iterations += 1;
            self.since_refactor += 1;
            let obj = self.objective();
            if obj > last_obj + 1e-9 * obj.abs().max(1.0) {
                stall = 0;
                last_obj = obj;
            } else {
                stall += 1;
            }
        };
        if status == LpStatus::Optimal {
            debug_assert!(self.certified(), "LP optimality certificate failed");
        }
        LpResult { status, objective: self.objective(), values: self.x[..self.n].to_vec() }
    }

    fn has_artificial_at_bound(&self) -> bool {
        (0..self.n + self.m).any(|j| self.artificial[j] && self.x[j].abs() >= 0.5 * ARTIFICIAL_BOUND)
    }

    /// Primal feasibility plus sign-correct reduced costs.
    fn certified(&self) -> bool {
        let tol = 1e-5;
        for j in 0..self.n + self.m {
            let v = self.x[j];
            if v < self.lo[j] - tol || v > self.hi[j] + tol {
                return false;
            }
            let ok = match self.state[j] {
                State::Basic(_) => true,
                State::Lower => self.d[j] >= -tol || self.lo[j] == self.hi[j],
                State::Upper => self.d[j] <= tol || self.lo[j] == self.hi[j],
            };
            if !ok {
                return false;
            }
        }
        true
    }

    /// Harris two-pass ratio test. `increase` means the leaving basic
    /// variable is below its lower bound and must grow.
    fn ratio_test(&self, alpha: &[f64], increase: bool, bland: bool) -> Option<usize> {
        let eligible = |j: usize| -> Option<(f64, f64)> {
            let a = alpha[j];
            if a.abs() <= PIVOT_TOL {
                return None;
            }
            // Sign of the change of the leaving variable per unit increase of x_j is -a.
            let ok = match self.state[j] {
                State::Basic(_) => false,
                State::Lower => (increase && a < 0.0) || (!increase && a > 0.0),
                State::Upper => (increase && a > 0.0) || (!increase && a < 0.0),
            };
            if !ok || self.lo[j] == self.hi[j] {
                return None;
            }
            Some((self.d[j].abs(), a.abs()))
        };
        if bland {
            let mut best: Option<(usize, f64)> = None;
            for j in 0..self.n + self.m {
                if let Some((dj, a)) = eligible(j) {
                    let t = dj / a;
                    if best.is_none_or(|(_, bt)| t < bt - 1e-12) {
                        best = Some((j, t));
                    }
                }
            }
            return best.map(|b| b.0);
        }
        let mut bound = f64::INFINITY;
        for j in 0..self.n + self.m {
            if let Some((dj, a)) = eligible(j) {
                bound = bound.min((dj + DUAL_TOL) / a);
            }
        }
        if !bound.is_finite() {
            return None;
        }
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.n + self.m {
            if let Some((dj, a)) = eligible(j) {
                if dj / a <= bound && best.is_none_or(|(_, ba)| a > ba) {
                    best = Some((j, a));
                }
            }
        }
        best.map(|b| b.0)
    }

    fn pivot(&mut self, r: usize, q: usize, alpha: &[f64], to_lower: bool) {
        let m = self.m;
        let p = self.head[r];
        let arq = alpha[q];
        // Dual update.
        let theta = self.d[q] / arq;
        if theta != 0.0 {
            for j in 0..self.n + m {
                if !matches!(self.state[j], State::Basic(_)) && alpha[j] != 0.0 {
                    self.d[j] -= theta * alpha[j];
                }
            }
        }
        self.d[q] = 0.0;
        self.d[p] = -theta;
        // Primal update.
        let col = self.ftran(q);
        let target = if to_lower { self.lo[p] } else { self.hi[p] };
        let step = (self.x[p] - target) / col[r];
        self.x[q] += step;
        for i in 0..m {
            if i != r {
                let j = self.head[i];
                self.x[j] -= step * col[i];
            }
        }
        self.x[p] = target;
        self.state[p] = if to_lower { State::Lower } else { State::Upper };
        // Clamp tiny sign drift of the leaving reduced cost.
        if to_lower && self.d[p] < 0.0 && self.d[p] > -DUAL_TOL {
            self.d[p] = 0.0;
        }
        if !to_lower && self.d[p] > 0.0 && self.d[p] < DUAL_TOL {
            self.d[p] = 0.0;
        }
        self.etas.push((r, col));
        self.head[r] = q;
        self.state[q] = State::Basic(r);
    }
}

enum ColIter<'a> {
    Structural(std::slice::Iter<'a, (usize, f64)>),
    Logical(Option<usize>),
}

impl Iterator for ColIter<'_> {
    type Item = (usize, f64);

    fn next(&mut self) -> Option<(usize, f64)> {
        match self {
            ColIter::Structural(it) => it.next().copied(),
            ColIter::Logical(r) => r.take().map(|r| (r, 1.0)),
        }
    }
}

/// One-shot LP solve of the relaxation of `model`.
pub fn solve_lp(model: &MilpModel) -> LpResult {
    DualSimplex::new(model).solve(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::model::{MilpModel, Row, Sense};
    use rand::{Rng, SeedableRng};

    #[test]
    fn empty_objective() {
        let mut m = MilpModel::new();
        let x = m.add_continuous("x", 0.0, f64::INFINITY, 0.0);
        m.add_row(Row::new(vec![(x, 1.0)], Sense::Ge, 0.0)).unwrap();
        let r = solve_lp(&m);
        assert_eq!(r.status, LpStatus::Optimal);
        assert_eq!(r.objective, 0.0);
    }

    #[test]
    fn infeasible_box() {
        let mut m = MilpModel::new();
        let x = m.add_continuous("x", 0.0, 1.0, 1.0);
        let y = m.add_continuous("y", 0.0, 1.0, 1.0);
        m.add_row(Row::new(vec![(x, 1.0), (y, 1.0)], Sense::Ge, 3.0)).unwrap();
        assert_eq!(solve_lp(&m).status, LpStatus::Infeasible);
    }

    #[test]
    fn two_variable_vertex() {
        // Vertices of {x + y >= 4, x, y >= 0}: (4, 0) costs 8, (0, 4) costs 12.
        let mut m = MilpModel::new();
        let x = m.add_continuous("x", 0.0, f64::INFINITY, 2.0);
        let y = m.add_continuous("y", 0.0, f64::INFINITY, 3.0);
        m.add_row(Row::new(vec![(x, 1.0), (y, 1.0)], Sense::Ge, 4.0)).unwrap();
        let r = solve_lp(&m);
        assert_eq!(r.status, LpStatus::Optimal);
        assert!((r.objective - 8.0).abs() < 1e-9);
        assert!((r.values[0] - 4.0).abs() < 1e-9 && r.values[1].abs() < 1e-9);
    }

    #[test]
    fn unbounded_ray() {
        let mut m = MilpModel::new();
        let x = m.add_continuous("x", 0.0, f64::INFINITY, -1.0);
        let y = m.add_continuous("y", 0.0, f64::INFINITY, 0.0);
        m.add_row(Row::new(vec![(x, 1.0), (y, -1.0)], Sense::Le, 1.0)).unwrap();
        assert_eq!(solve_lp(&m).status, LpStatus::Unbounded);
    }

    #[test]
    fn equality_rows_and_warm_start() {
        let mut m = MilpModel::new();
        let a = m.add_continuous("a", 0.0, 10.0, 1.0);
        let b = m.add_continuous("b", 0.0, 10.0, 2.0);
        let c = m.add_continuous("c", 0.0, 10.0, 3.0);
        m.add_row(Row::new(vec![(a, 1.0), (b, 1.0), (c, 1.0)], Sense::Eq, 6.0)).unwrap();
        m.add_row(Row::new(vec![(a, 1.0), (b, -1.0)], Sense::Le, 1.0)).unwrap();
        let mut lp = DualSimplex::new(&m);
        let r = lp.solve(None);
        // a - b <= 1, a <= 10: a = 3.5, b = 2.5 costs 8.5.
        assert!((r.objective - 8.5).abs() < 1e-9, "{r:?}");
        lp.add_row(&Row::new(vec![(c, 1.0)], Sense::Ge, 2.0));
        let r = lp.solve(None);
        // a + b = 4, a - b <= 1: a = 2.5, b = 1.5, c = 2 costs 11.5.
        assert!((r.objective - 11.5).abs() < 1e-9, "{r:?}");
        lp.set_bounds_lazy(a, 0.0, 1.0);
        lp.resolve_primal();
        let r = lp.solve(None);
        // a = 1, b = 3, c = 2.
        assert!((r.objective - 13.0).abs() < 1e-9, "{r:?}");
        let r = lp.solve(Some(5.0));
        assert_eq!(r.status, LpStatus::Cutoff);
    }

    /// Brute-force LP oracle for tiny boxed problems: enumerate every basis
    /// of the standard form and keep the best feasible vertex.
    fn vertex_oracle(costs: &[f64], rows: &[(Vec<f64>, f64)], ub: f64) -> Option<f64> {
        let n = costs.len();
        // All constraints as a.x <= b including bounds x >= 0, x <= ub.
        let mut cons: Vec<(Vec<f64>, f64)> = rows.to_vec();
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = -1.0;
            cons.push((e.clone(), 0.0));
            e[j] = 1.0;
            cons.push((e, ub));
        }
        let k = cons.len();
        let mut best: Option<f64> = None;
        let mut pick = vec![0usize; n];
        fn rec(
            start: usize,
            depth: usize,
            pick: &mut Vec<usize>,
            k: usize,
            f: &mut dyn FnMut(&[usize]),
        ) {
            if depth == pick.len() {
                f(pick);
                return;
            }
            for c in start..k {
                pick[depth] = c;
                rec(c + 1, depth + 1, pick, k, f);
            }
        }
        rec(0, 0, &mut pick, k, &mut |sel: &[usize]| {
            // Solve the n x n system by Gaussian elimination.
            let mut a: Vec<Vec<f64>> = sel.iter().map(|&c| {
                let mut r = cons[c].0.clone();
                r.push(cons[c].1);
                r
            }).collect();
            for col in 0..n {
                let Some(p) = (col..n).max_by(|&x, &y| a[x][col].abs().partial_cmp(&a[y][col].abs()).unwrap()) else { return };
                if a[p][col].abs() < 1e-9 {
                    return;
                }
                a.swap(col, p);
                let pv = a[col][col];
                for v in a[col].iter_mut() {
                    *v /= pv;
                }
                for r in 0..n {
                    if r != col {
                        let f = a[r][col];
                        for c2 in 0..=n {
                            a[r][c2] -= f * a[col][c2];
                        }
                    }
                }
            }
            let x: Vec<f64> = (0..n).map(|i| a[i][n]).collect();
            if cons.iter().all(|(r, b)| r.iter().zip(&x).map(|(p, q)| p * q).sum::<f64>() <= b + 1e-7) {
                let obj: f64 = costs.iter().zip(&x).map(|(c, v)| c * v).sum();
                if best.is_none_or(|b| obj < b) {
                    best = Some(obj);
                }
            }
        });
        best
    }

    #[test]
    fn random_lps_match_vertex_enumeration() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..300 {
            let n = rng.gen_range(1..=4);
            let k = rng.gen_range(1..=4);
            let costs: Vec<f64> = (0..n).map(|_| rng.gen_range(-5..=5) as f64).collect();
            let mut model = MilpModel::new();
            for (j, &c) in costs.iter().enumerate() {
                model.add_continuous(&format!("x{j}"), 0.0, 3.0, c);
            }
            let mut rows = Vec::new();
            for _ in 0..k {
                let coefs: Vec<f64> = (0..n).map(|_| rng.gen_range(-3..=3) as f64).collect();
                let rhs = rng.gen_range(-4..=6) as f64;
                let sense = [Sense::Le, Sense::Ge, Sense::Eq][rng.gen_range(0..3)];
                let pairs: Vec<(usize, f64)> = coefs.iter().copied().enumerate().filter(|p| p.1 != 0.0).collect();
                if pairs.is_empty() {
                    continue;
                }
                model.add_row(Row::new(pairs, sense, rhs)).unwrap();
                match sense {
                    Sense::Le => rows.push((coefs, rhs)),
                    Sense::Ge => rows.push((coefs.iter().map(|v| -v).collect(), -rhs)),
                    Sense::Eq => {
                        rows.push((coefs.clone(), rhs));
                        rows.push((coefs.iter().map(|v| -v).collect(), -rhs));
                    }
                }
            }
            let expected = vertex_oracle(&costs, &rows, 3.0);
            let got = solve_lp(&model);
            match expected {
                None => assert_eq!(got.status, LpStatus::Infeasible, "{model:?}"),
                Some(v) => {
                    assert_eq!(got.status, LpStatus::Optimal, "{model:?}");
                    assert!((got.objective - v).abs() < 1e-6, "{} vs {v} in {model:?}", got.objective);
                }
            }
        }
    }
}
