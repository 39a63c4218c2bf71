//! Best-bound branch-and-cut on top of the warm-started dual simplex.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::lp::{DualSimplex, LpStatus};
use super::model::{MilpModel, ModelError, Row};

pub const INTEGRALITY_TOL: f64 = 1e-6;
pub const CUT_VIOLATION: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutKind {
    Cycle,
    Icc,
    IccPlus,
    Licc,
    LiccPlus,
    Cf,
}

impl CutKind {
    pub const ALL: [CutKind; 6] =
        [CutKind::Cycle, CutKind::Icc, CutKind::IccPlus, CutKind::Licc, CutKind::LiccPlus, CutKind::Cf];

    pub fn name(self) -> &'static str {
        match self {
            CutKind::Cycle => "cycle",
            CutKind::Icc => "icc",
            CutKind::IccPlus => "icc_plus",
            CutKind::Licc => "licc",
            CutKind::LiccPlus => "licc_plus",
            CutKind::Cf => "cf",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CutRow {
    pub row: Row,
    pub kind: CutKind,
}

#[derive(Debug, Error)]
pub enum MilpError {
    #[error("callback produced an invalid row: {0}")]
    BadRow(#[from] ModelError),
    #[error("callback failed: {0}")]
    Callback(String),
    #[error("LP hit its iteration limit at node {0}")]
    LpIterationLimit(usize),
}

/// What a callback sees about the search when it is invoked.
#[derive(Clone, Copy, Debug)]
pub struct NodeContext {
    pub node: usize,
    pub depth: usize,
    /// Cut rounds already performed at this node.
    pub round: usize,
    pub incumbent: Option<f64>,
    /// Best bound over all open nodes including the current one.
    pub lower_bound: f64,
    pub elapsed: Duration,
}

impl NodeContext {
    pub fn is_root(&self) -> bool {
        self.node == 0
    }

    /// `100 (UB - LB) / UB`, or 100 without an incumbent.
    pub fn gap_percent(&self) -> f64 {
        match self.incumbent {
            None => 100.0,
            Some(ub) => gap_percent(ub, self.lower_bound),
        }
    }
}

pub fn gap_percent(ub: f64, lb: f64) -> f64 {
    if ub <= 0.0 {
        0.0
    } else {
        (100.0 * (ub - lb) / ub).max(0.0)
    }
}

pub trait Callbacks {
    /// Called at every integral LP optimum; returning violated rows rejects the point.
    fn lazy(&mut self, _ctx: &NodeContext, _x: &[f64]) -> Result<Vec<CutRow>, MilpError> {
        Ok(Vec::new())
    }

    /// Called at fractional LP optima until it returns no violated rows.
    fn user_cuts(&mut self, _ctx: &NodeContext, _x: &[f64]) -> Result<Vec<CutRow>, MilpError> {
        Ok(Vec::new())
    }

    /// Optional primal heuristic from a fractional point.
    fn heuristic(&mut self, _ctx: &NodeContext, _x: &[f64]) -> Option<Vec<f64>> {
        None
    }
}

/// No callbacks: plain branch-and-bound.
pub struct NoCallbacks;

impl Callbacks for NoCallbacks {}

#[derive(Clone, Debug)]
pub struct MipOptions {
    pub time_limit: Option<Duration>,
    pub node_limit: Option<usize>,
    /// Only solutions strictly below this value are of interest.
    pub cutoff: Option<f64>,
    /// Round bounds up, valid when every feasible objective is an integer.
    pub integral_objective: bool,
    pub root_cut_rounds: usize,
    pub node_cut_rounds: usize,
    /// Known feasible point used as the starting incumbent.
    pub initial_solution: Option<Vec<f64>>,
}

impl Default for MipOptions {
    fn default() -> Self {
        MipOptions {
            time_limit: None,
            node_limit: None,
            cutoff: None,
            integral_objective: false,
            root_cut_rounds: 200,
            node_cut_rounds: 20,
            initial_solution: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MipStatus {
    Optimal,
    Infeasible,
    Unbounded,
    TimeLimit,
    NodeLimit,
}

#[derive(Clone, Debug)]
pub struct MipOutcome {
    pub status: MipStatus,
    pub objective: Option<f64>,
    pub solution: Option<Vec<f64>>,
    /// Proven lower bound; equals the objective at optimality.
    pub best_bound: f64,
    pub nodes: usize,
    pub cuts: BTreeMap<CutKind, usize>,
    /// LP bound at the end of the root cutting loop.
    pub root_bound: f64,
    pub lp_iterations: usize,
    pub elapsed: Duration,
}

impl MipOutcome {
    pub fn total_cuts(&self) -> usize {
        self.cuts.values().sum()
    }

    pub fn gap_percent(&self) -> f64 {
        match self.objective {
            Some(ub) => gap_percent(ub, self.best_bound),
            None => 100.0,
        }
    }
}

#[derive(Clone, Debug)]
struct Node {
    id: usize,
    depth: usize,
    bound: f64,
    changes: Vec<(usize, f64, f64)>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // Max-heap order: smallest bound first, then deeper, then older.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(self.depth.cmp(&other.depth))
            .then(other.id.cmp(&self.id))
    }
}

struct Search<'a, C: Callbacks> {
    model: &'a MilpModel,
    opts: &'a MipOptions,
    cb: &'a mut C,
    lp: DualSimplex,
    pool: Vec<Row>,
    cuts: BTreeMap<CutKind, usize>,
    incumbent: Option<(f64, Vec<f64>)>,
    start: Instant,
}

impl<C: Callbacks> Search<'_, C> {
    fn upper(&self) -> f64 {
        let inc = self.incumbent.as_ref().map_or(f64::INFINITY, |i| i.0);
        inc.min(self.opts.cutoff.unwrap_or(f64::INFINITY))
    }

    fn prunable(&self, bound: f64) -> bool {
        let ub = self.upper();
        if !ub.is_finite() {
            return false;
        }
        if self.opts.integral_objective {
            (bound - INTEGRALITY_TOL).ceil() >= ub - 1e-9
        } else {
            bound >= ub - 1e-9 * ub.abs().max(1.0)
        }
    }

    fn lp_cutoff(&self) -> Option<f64> {
        let ub = self.upper();
        if !ub.is_finite() {
            None
        } else if self.opts.integral_objective {
            Some(ub - 1.0 + INTEGRALITY_TOL)
        } else {
            Some(ub)
        }
    }

    fn round_bound(&self, b: f64) -> f64 {
        if self.opts.integral_objective && b.is_finite() {
            (b - INTEGRALITY_TOL).ceil()
        } else {
            b
        }
    }

    fn time_up(&self) -> bool {
        self.opts.time_limit.is_some_and(|t| self.start.elapsed() >= t)
    }

    /// Validates and filters callback rows; returns how many were added.
    fn add_cuts(&mut self, rows: Vec<CutRow>, x: &[f64]) -> Result<usize, MilpError> {
        let mut added = 0;
        for c in rows {
            self.model.check_row(&c.row)?;
            let row = c.row.normalized();
            if row.violation(x) < CUT_VIOLATION {
                continue;
            }
            self.lp.add_row(&row);
            self.pool.push(row);
            *self.cuts.entry(c.kind).or_default() += 1;
            added += 1;
        }
        Ok(added)
    }

    fn satisfies_pool(&self, x: &[f64]) -> bool {
        self.model.is_feasible(x, INTEGRALITY_TOL) && self.pool.iter().all(|r| r.violation(x) <= INTEGRALITY_TOL)
    }

    fn try_incumbent(&mut self, ctx: &NodeContext, mut x: Vec<f64>) -> Result<bool, MilpError> {
        for (v, var) in x.iter_mut().zip(self.model.vars()) {
            if var.integer {
                *v = v.round();
            }
        }
        if !self.satisfies_pool(&x) {
            return Ok(false);
        }
        let lazy = self.cb.lazy(ctx, &x)?;
        if lazy.iter().any(|c| c.row.violation(&x) >= CUT_VIOLATION) {
            return Ok(false);
        }
        let obj = self.model.objective_value(&x);
        let obj = if self.opts.integral_objective { obj.round() } else { obj };
        if obj < self.upper() - 1e-9 {
            self.incumbent = Some((obj, x));
            return Ok(true);
        }
        Ok(false)
    }
}

fn most_fractional(model: &MilpModel, x: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (j, var) in model.vars().iter().enumerate() {
        if !var.integer {
            continue;
        }
        let f = x[j] - x[j].floor();
        let score = f.min(1.0 - f);
        if score > INTEGRALITY_TOL && best.is_none_or(|(_, s)| score > s + 1e-12) {
            best = Some((j, score));
        }
    }
    best.map(|b| b.0)
}

/// Solves `model` (minimisation) by branch-and-cut.
pub fn solve_mip<C: Callbacks>(model: &MilpModel, cb: &mut C, opts: &MipOptions) -> Result<MipOutcome, MilpError> {
    let start = Instant::now();
    let mut s = Search {
        model,
        opts,
        cb,
        lp: DualSimplex::new(model),
        pool: Vec::new(),
        cuts: BTreeMap::new(),
        incumbent: None,
        start,
    };
    let root_lo: Vec<f64> = model.vars().iter().map(|v| v.lower).collect();
    let root_hi: Vec<f64> = model.vars().iter().map(|v| v.upper).collect();

    if let Some(x0) = &opts.initial_solution {
        let ctx = NodeContext { node: 0, depth: 0, round: 0, incumbent: None, lower_bound: f64::NEG_INFINITY, elapsed: Duration::ZERO };
        s.try_incumbent(&ctx, x0.clone())?;
    }

    let mut heap = BinaryHeap::new();
    heap.push(Node { id: 0, depth: 0, bound: f64::NEG_INFINITY, changes: Vec::new() });
    let mut next_id = 1;
    let mut nodes = 0usize;
    let mut root_bound = f64::NEG_INFINITY;
    let mut limit_status = None;
    let mut unbounded = false;

    while let Some(node) = heap.pop() {
        if s.prunable(node.bound) {
            continue;
        }
        if s.time_up() {
            limit_status = Some(MipStatus::TimeLimit);
            heap.push(node);
            break;
        }
        if opts.node_limit.is_some_and(|l| nodes >= l) {
            limit_status = Some(MipStatus::NodeLimit);
            heap.push(node);
            break;
        }
        nodes += 1;
        for j in 0..model.num_vars() {
            s.lp.set_bounds_lazy(j, root_lo[j], root_hi[j]);
        }
        for &(j, lo, hi) in &node.changes {
            s.lp.set_bounds_lazy(j, lo, hi);
        }
        s.lp.resolve_primal();

        let mut round = 0usize;
        let max_rounds = if node.id == 0 { opts.root_cut_rounds } else { opts.node_cut_rounds };
        loop {
            let res = s.lp.solve(s.lp_cutoff());
            match res.status {
                LpStatus::Optimal => {}
                LpStatus::Infeasible | LpStatus::Cutoff => {
                    if node.id == 0 {
                        root_bound = if res.status == LpStatus::Cutoff { res.objective } else { f64::INFINITY };
                    }
                    break;
                }
                LpStatus::Unbounded => {
                    unbounded = true;
                    break;
                }
                LpStatus::IterationLimit => return Err(MilpError::LpIterationLimit(node.id)),
            }
            let obj = res.objective;
            if node.id == 0 {
                root_bound = obj;
            }
            if s.prunable(obj) {
                break;
            }
            let lower = heap.peek().map_or(obj, |n| n.bound.min(obj));
            let ctx = NodeContext {
                node: node.id,
                depth: node.depth,
                round,
                incumbent: s.incumbent.as_ref().map(|i| i.0),
                lower_bound: s.round_bound(lower),
                elapsed: start.elapsed(),
            };
            let x = res.values;
            match most_fractional(model, &x) {
                None => {
                    let rows = s.cb.lazy(&ctx, &x)?;
                    if s.add_cuts(rows, &x)? > 0 {
                        continue;
                    }
                    let mut xi = x;
                    for (v, var) in xi.iter_mut().zip(model.vars()) {
                        if var.integer {
                            *v = v.round();
                        }
                    }
                    let val = model.objective_value(&xi);
                    let val = if opts.integral_objective { val.round() } else { val };
                    if val < s.upper() - 1e-9 {
                        s.incumbent = Some((val, xi));
                    }
                    break;
                }
                Some(j) => {
                    if let Some(cand) = s.cb.heuristic(&ctx, &x) {
                        s.try_incumbent(&ctx, cand)?;
                        if s.prunable(obj) {
                            break;
                        }
                    }
                    if round < max_rounds && !s.time_up() {
                        let ctx = NodeContext { incumbent: s.incumbent.as_ref().map(|i| i.0), ..ctx };
                        let rows = s.cb.user_cuts(&ctx, &x)?;
                        if s.add_cuts(rows, &x)? > 0 {
                            round += 1;
                            continue;
                        }
                    }
                    let v = x[j];
                    let (lo, hi) = s.lp.bounds(j);
                    let mut down = node.changes.clone();
                    down.push((j, lo, v.floor()));
                    let mut up = node.changes.clone();
                    up.push((j, v.ceil(), hi));
                    for changes in [down, up] {
                        heap.push(Node { id: next_id, depth: node.depth + 1, bound: obj, changes });
                        next_id += 1;
                    }
                    break;
                }
            }
        }
        if unbounded {
            break;
        }
    }

    let elapsed = start.elapsed();
    let (objective, solution) = match s.incumbent.take() {
        Some((v, x)) => (Some(v), Some(x)),
        None => (None, None),
    };
    let status = if unbounded {
        MipStatus::Unbounded
    } else if let Some(st) = limit_status {
        st
    } else if objective.is_some() {
        MipStatus::Optimal
    } else {
        MipStatus::Infeasible
    };
    let best_bound = match status {
        MipStatus::Optimal => objective.unwrap_or(f64::INFINITY),
        MipStatus::Infeasible => opts.cutoff.unwrap_or(f64::INFINITY),
        MipStatus::Unbounded => f64::NEG_INFINITY,
        MipStatus::TimeLimit | MipStatus::NodeLimit => {
            let open = heap.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min);
            let ub = objective.unwrap_or(f64::INFINITY);
            let rounded = if opts.integral_objective && open.is_finite() { (open - INTEGRALITY_TOL).ceil() } else { open };
            rounded.min(ub)
        }
    };
    Ok(MipOutcome {
        status,
        objective,
        solution,
        best_bound,
        nodes,
        cuts: s.cuts,
        root_bound,
        lp_iterations: s.lp.iterations(),
        elapsed,
    })
}
