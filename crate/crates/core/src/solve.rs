//! Formulation dispatcher: model building, separation policies and reports.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arc_model::{separate_cycles, ArcModel};
use crate::cf_model::{integral_choice, separate_cf_fractional, separate_cf_integral, CfModel};
use crate::cover_cuts::{separate_icc, separate_licc, Target, DEFAULT_BUDGET};
use crate::cuts::{Cut, Point};
use crate::instance::Instance;
use crate::milp::{solve_mip, Callbacks, CutRow, MilpError, MipOptions, NodeContext, CUT_VIOLATION};
use crate::propagation::{IncentiveSolution, Propagator};
use crate::report::{cut_counts, gap_pct, SolveReport, Termination, REPORT_SCHEMA_VERSION};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Formulation {
    #[serde(rename = "arc")]
    Arc,
    #[serde(rename = "icc")]
    Icc,
    #[serde(rename = "icc+")]
    IccPlus,
    #[serde(rename = "licc+")]
    LiccPlus,
    #[serde(rename = "cf")]
    Cf,
}

impl Formulation {
    pub const ALL: [Formulation; 5] =
        [Formulation::Arc, Formulation::Icc, Formulation::IccPlus, Formulation::LiccPlus, Formulation::Cf];

    pub fn name(self) -> &'static str {
        match self {
            Formulation::Arc => "arc",
            Formulation::Icc => "icc",
            Formulation::IccPlus => "icc+",
            Formulation::LiccPlus => "licc+",
            Formulation::Cf => "cf",
        }
    }
}

impl fmt::Display for Formulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown formulation `{0}` (expected arc, icc, icc+, licc+ or cf)")]
pub struct UnknownFormulation(pub String);

impl FromStr for Formulation {
    type Err = UnknownFormulation;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Formulation::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| UnknownFormulation(s.to_string()))
    }
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub formulation: Formulation,
    pub time_limit: Option<Duration>,
    pub node_limit: Option<usize>,
    /// Only solutions cheaper than this are sought.
    pub cutoff: Option<u64>,
    /// Per separation MIP.
    pub separation_budget: Duration,
    /// Anchored cover cut rounds at the root.
    pub cover_rounds: usize,
    /// Total time for anchored cover separation at the root.
    pub cover_time: Duration,
    /// Rhs-1 lifted cuts are separated while the gap is at least this.
    pub lifted_rhs_one_gap: f64,
    /// Fractional compact cuts are separated while the gap is at least this.
    pub compact_fractional_gap: f64,
    /// Also separate root cover cuts over `z` in the lifted formulation.
    pub combine_cover_and_lifted: bool,
    pub heuristic: bool,
    /// Keep every separated cut in the outcome for auditing.
    pub collect_cuts: bool,
    /// Leave wall time out of the report.
    pub reproducible: bool,
}

impl SolveOptions {
    pub fn new(formulation: Formulation) -> Self {
        SolveOptions {
            formulation,
            time_limit: Some(Duration::from_secs(60)),
            node_limit: None,
            cutoff: None,
            separation_budget: DEFAULT_BUDGET,
            cover_rounds: 200,
            cover_time: Duration::from_secs(300),
            lifted_rhs_one_gap: 40.0,
            compact_fractional_gap: 10.0,
            combine_cover_and_lifted: false,
            heuristic: true,
            collect_cuts: false,
            reproducible: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub report: SolveReport,
    pub cuts: Vec<Cut>,
    /// Separation MIPs stopped by their budget.
    pub budget_hits: usize,
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Milp(#[from] MilpError),
}

/// Rounds a relaxation to incentive indices, repairs coverage greedily and
/// then drops incentives that are not needed.
pub fn repair(prop: &Propagator<'_>, mut idx: Vec<usize>) -> Option<Vec<usize>> {
    let inst = prop.instance();
    let lifted = prop.lifted();
    let target = inst.coverage_target();
    loop {
        let cascade = prop.cascade(&idx);
        if cascade.activated.len() >= target {
            break;
        }
        let mut best: Option<(u64, usize, usize)> = None;
        for &i in &cascade.non_activated {
            let received = lifted.requirement(i, idx[i]) as i64 - cascade.residuals[i];
            let base = inst.costs(i)[idx[i]];
            for p in idx[i] + 1..inst.incentives(i).len() {
                if lifted.requirement(i, p) as i64 <= received {
                    let extra = inst.costs(i)[p].saturating_sub(base);
                    if best.is_none_or(|b| (extra, i, p) < b) {
                        best = Some((extra, i, p));
                    }
                    break;
                }
            }
        }
        match best {
            Some((_, i, p)) => idx[i] = p,
            None => {
                let i = *cascade
                    .non_activated
                    .iter()
                    .find(|&&i| idx[i] + 1 < inst.incentives(i).len())?;
                idx[i] = inst.incentives(i).len() - 1;
            }
        }
    }
    let mut order: Vec<usize> = inst.nodes().collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(inst.costs(i)[idx[i]]), i));
    for i in order {
        let keep = idx[i];
        for p in 0..keep {
            idx[i] = p;
            if prop.cascade(&idx).activated.len() >= target {
                break;
            }
            idx[i] = keep;
        }
    }
    Some(idx)
}

fn rounded(point: &Point) -> Vec<usize> {
    point
        .y
        .iter()
        .map(|row| row.iter().rposition(|&v| v >= 0.5).unwrap_or(0))
        .collect()
}

/// Per-call separation budget, shrunk to what is left of the time limit.
fn call_budget(opts: &SolveOptions, deadline: Option<Instant>) -> Option<Duration> {
    let left = deadline.map_or(opts.separation_budget, |d| d.saturating_duration_since(Instant::now()));
    let budget = left.min(opts.separation_budget);
    (!budget.is_zero()).then_some(budget)
}

fn rows_for(model: &ArcModel, cuts: &[Cut]) -> Vec<CutRow> {
    cuts.iter().map(|c| CutRow { row: model.row(c), kind: c.kind }).collect()
}

struct ArcFamily<'a> {
    prop: &'a Propagator<'a>,
    model: &'a ArcModel,
    opts: &'a SolveOptions,
    deadline: Option<Instant>,
    cover_rounds: usize,
    cover_time: Duration,
    log: Vec<Cut>,
    budget_hits: usize,
}

impl ArcFamily<'_> {
    fn record(&mut self, cuts: &[Cut]) {
        if self.opts.collect_cuts {
            self.log.extend_from_slice(cuts);
        }
    }

    fn anchored(&mut self, point: &Point, lifted_form: bool) -> Vec<Cut> {
        let inst = self.prop.instance();
        let mut anchors: Vec<usize> = inst.nodes().filter(|&k| point.x[k] > CUT_VIOLATION).collect();
        anchors.sort_by(|&a, &b| point.x[b].total_cmp(&point.x[a]).then(a.cmp(&b)));
        let mut cuts = Vec::new();
        for k in anchors {
            let Some(budget) = call_budget(self.opts, self.deadline) else { break };
            let sep = if lifted_form {
                separate_licc(inst, self.prop.lifted(), point, Target::Anchor(k), Some(budget))
            } else {
                separate_icc(inst, self.prop.lifted(), point, Target::Anchor(k), Some(budget))
            };
            self.budget_hits += sep.budget_exhausted as usize;
            cuts.extend(sep.cut);
        }
        cuts
    }

    fn rhs_one(&mut self, point: &Point, lifted_form: bool) -> Vec<Cut> {
        let inst = self.prop.instance();
        let Some(budget) = call_budget(self.opts, self.deadline) else { return Vec::new() };
        let budget = Some(budget);
        let sep = if lifted_form {
            separate_licc(inst, self.prop.lifted(), point, Target::Large, budget)
        } else {
            separate_icc(inst, self.prop.lifted(), point, Target::Large, budget)
        };
        self.budget_hits += sep.budget_exhausted as usize;
        sep.cut.into_iter().collect()
    }

    fn root_cover(&mut self, ctx: &NodeContext, point: &Point) -> Vec<Cut> {
        if !ctx.is_root() || self.cover_rounds >= self.opts.cover_rounds || self.cover_time >= self.opts.cover_time {
            return Vec::new();
        }
        let start = Instant::now();
        let cuts = self.anchored(point, false);
        self.cover_rounds += 1;
        self.cover_time += start.elapsed();
        cuts
    }
}

impl Callbacks for ArcFamily<'_> {
    fn lazy(&mut self, _ctx: &NodeContext, x: &[f64]) -> Result<Vec<CutRow>, MilpError> {
        let point = self.model.point(x);
        let cuts = separate_cycles(self.prop.instance(), &point);
        if cuts.is_empty() {
            let idx = self.model.incentives(x);
            let reached = self.prop.cascade(&idx).activated.len();
            if reached < self.prop.instance().coverage_target() {
                return Err(MilpError::Callback(format!(
                    "accepted point activates {reached} nodes, below the target"
                )));
            }
        }
        self.record(&cuts);
        Ok(rows_for(self.model, &cuts))
    }

    fn user_cuts(&mut self, ctx: &NodeContext, x: &[f64]) -> Result<Vec<CutRow>, MilpError> {
        let point = self.model.point(x);
        let mut cuts = separate_cycles(self.prop.instance(), &point);
        if cuts.is_empty() {
            match self.opts.formulation {
                Formulation::Arc | Formulation::Cf => {}
                Formulation::Icc => cuts = self.root_cover(ctx, &point),
                Formulation::IccPlus => {
                    cuts = self.root_cover(ctx, &point);
                    cuts.extend(self.rhs_one(&point, false));
                }
                Formulation::LiccPlus => {
                    if self.opts.combine_cover_and_lifted {
                        cuts = self.root_cover(ctx, &point);
                    }
                    cuts.extend(self.anchored(&point, true));
                    if ctx.gap_percent() >= self.opts.lifted_rhs_one_gap {
                        cuts.extend(self.rhs_one(&point, true));
                    }
                }
            }
        }
        self.record(&cuts);
        Ok(rows_for(self.model, &cuts))
    }

    fn heuristic(&mut self, ctx: &NodeContext, x: &[f64]) -> Option<Vec<f64>> {
        if !self.opts.heuristic || ctx.round != 0 {
            return None;
        }
        let idx = repair(self.prop, rounded(&self.model.point(x)))?;
        Some(self.model.vector(self.prop, &idx))
    }
}

struct Compact<'a> {
    prop: &'a Propagator<'a>,
    model: &'a CfModel,
    opts: &'a SolveOptions,
    deadline: Option<Instant>,
    log: Vec<Cut>,
    budget_hits: usize,
}

impl Callbacks for Compact<'_> {
    fn lazy(&mut self, _ctx: &NodeContext, x: &[f64]) -> Result<Vec<CutRow>, MilpError> {
        let idx = integral_choice(&self.model.point(x));
        let cuts: Vec<Cut> = separate_cf_integral(self.prop, &idx).into_iter().collect();
        if self.opts.collect_cuts {
            self.log.extend_from_slice(&cuts);
        }
        Ok(cuts.iter().map(|c| CutRow { row: self.model.row(c), kind: c.kind }).collect())
    }

    fn user_cuts(&mut self, ctx: &NodeContext, x: &[f64]) -> Result<Vec<CutRow>, MilpError> {
        if ctx.gap_percent() < self.opts.compact_fractional_gap {
            return Ok(Vec::new());
        }
        let Some(budget) = call_budget(self.opts, self.deadline) else { return Ok(Vec::new()) };
        let inst = self.prop.instance();
        let sep = separate_cf_fractional(inst, self.prop.lifted(), &self.model.point(x), Some(budget));
        self.budget_hits += sep.budget_exhausted as usize;
        let cuts: Vec<Cut> = sep.cut.into_iter().collect();
        if self.opts.collect_cuts {
            self.log.extend_from_slice(&cuts);
        }
        Ok(cuts.iter().map(|c| CutRow { row: self.model.row(c), kind: c.kind }).collect())
    }

    fn heuristic(&mut self, ctx: &NodeContext, x: &[f64]) -> Option<Vec<f64>> {
        if !self.opts.heuristic || ctx.round != 0 {
            return None;
        }
        let idx = repair(self.prop, rounded(&self.model.point(x)))?;
        Some(self.model.vector(&idx))
    }
}

/// Solves `inst` exactly with the chosen formulation.
pub fn solve(inst: &Instance, opts: &SolveOptions) -> Result<SolveOutcome, SolveError> {
    let start = Instant::now();
    let deadline = opts.time_limit.map(|t| start + t);
    let prop = Propagator::new(inst);
    let full: Vec<usize> = inst.nodes().map(|i| inst.incentives(i).len() - 1).collect();
    let start_point = (prop.cascade(&full).activated.len() >= inst.coverage_target()).then_some(full);
    let mip_opts = |initial: Option<Vec<f64>>| MipOptions {
        time_limit: opts.time_limit,
        node_limit: opts.node_limit,
        cutoff: opts.cutoff.map(|c| c as f64),
        integral_objective: true,
        root_cut_rounds: 1000,
        node_cut_rounds: 50,
        initial_solution: initial,
    };
    let (out, cuts, budget_hits, incentives) = match opts.formulation {
        Formulation::Cf => {
            let model = CfModel::build(inst);
            let mut cb = Compact { prop: &prop, model: &model, opts, deadline, log: Vec::new(), budget_hits: 0 };
            let initial = start_point.as_ref().map(|idx| model.vector(idx));
            let out = solve_mip(&model.model, &mut cb, &mip_opts(initial))?;
            let idx = out.solution.as_ref().map(|x| model.incentives(x));
            (out, cb.log, cb.budget_hits, idx)
        }
        _ => {
            let model = ArcModel::build(inst, prop.lifted());
            let mut cb = ArcFamily {
                prop: &prop,
                model: &model,
                opts,
                deadline,
                cover_rounds: 0,
                cover_time: Duration::ZERO,
                log: Vec::new(),
                budget_hits: 0,
            };
            let initial = start_point.as_ref().map(|idx| model.vector(&prop, idx));
            let out = solve_mip(&model.model, &mut cb, &mip_opts(initial))?;
            let idx = out.solution.as_ref().map(|x| model.incentives(x));
            (out, cb.log, cb.budget_hits, idx)
        }
    };
    let incumbent = incentives.map(|idx| IncentiveSolution::from_indices(inst, &idx));
    let z_ub = out.objective.map(|v| v.round() as u64);
    let z_lb = if out.best_bound.is_finite() {
        Some((out.best_bound.max(0.0).round() as u64).min(z_ub.unwrap_or(u64::MAX)))
    } else {
        None
    };
    let z_lb = match out.status {
        crate::milp::MipStatus::Infeasible => None,
        _ => z_lb,
    };
    let report = SolveReport {
        schema_version: REPORT_SCHEMA_VERSION,
        formulation: opts.formulation.name().to_string(),
        termination: Termination::from(out.status),
        z_ub,
        z_lb,
        gap_pct: gap_pct(z_ub, z_lb),
        incumbent,
        nodes: out.nodes,
        cuts: cut_counts(&out.cuts),
        root_bound: out.root_bound.is_finite().then_some(out.root_bound),
        lp_iterations: out.lp_iterations,
        wall_time_s: (!opts.reproducible).then(|| start.elapsed().as_secs_f64()),
    };
    Ok(SolveOutcome { report, cuts, budget_hits })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::tests::spec;
    use crate::instance::Arc;

    fn mutual_pair() -> Instance {
        let nodes = vec![spec(5, &[(0, 0), (5, 4)]), spec(5, &[(0, 0), (5, 3)])];
        let arcs = vec![Arc { source: 0, target: 1, influence: 5 }, Arc { source: 1, target: 0, influence: 5 }];
        Instance::new(nodes, arcs, "1".parse().unwrap(), "1".parse().unwrap()).unwrap()
    }

    #[test]
    fn formulation_names_round_trip() {
        for f in Formulation::ALL {
            assert_eq!(f.name().parse::<Formulation>().unwrap(), f);
        }
        assert!("cov".parse::<Formulation>().is_err());
    }

    #[test]
    fn mutual_pair_buys_the_cheaper_node() {
        let inst = mutual_pair();
        for f in Formulation::ALL {
            let mut opts = SolveOptions::new(f);
            opts.heuristic = false;
            let out = solve(&inst, &opts).unwrap();
            assert_eq!(out.report.termination, Termination::Optimal, "{f}");
            assert_eq!(out.report.z_ub, Some(3), "{f}");
            assert_eq!(out.report.incumbent.as_ref().unwrap().incentives, vec![0, 5], "{f}");
            assert!(out.report.is_consistent());
        }
    }

    #[test]
    fn single_node() {
        let inst = Instance::new(vec![spec(5, &[(0, 0), (5, 4)])], vec![], "1".parse().unwrap(), "1".parse().unwrap()).unwrap();
        for f in Formulation::ALL {
            let out = solve(&inst, &SolveOptions::new(f)).unwrap();
            assert_eq!(out.report.z_ub, Some(4));
            assert_eq!(out.report.gap_pct, 0.0);
        }
    }

    #[test]
    fn cutoff_below_optimum_is_infeasible() {
        let inst = mutual_pair();
        let mut opts = SolveOptions::new(Formulation::Arc);
        opts.cutoff = Some(3);
        let out = solve(&inst, &opts).unwrap();
        assert_eq!(out.report.termination, Termination::Infeasible);
        opts.cutoff = Some(4);
        assert_eq!(solve(&inst, &opts).unwrap().report.z_ub, Some(3));
    }

    #[test]
    fn repair_reaches_coverage() {
        let inst = mutual_pair();
        let prop = Propagator::new(&inst);
        let idx = repair(&prop, vec![0, 0]).unwrap();
        assert_eq!(idx, vec![0, 1]);
    }
}
