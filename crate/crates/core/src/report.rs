use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::milp::{CutKind, MipStatus};
use crate::propagation::IncentiveSolution;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Optimal,
    Infeasible,
    TimeLimit,
    NodeLimit,
}

impl From<MipStatus> for Termination {
    fn from(s: MipStatus) -> Self {
        match s {
            MipStatus::Optimal => Termination::Optimal,
            // Every variable is bounded, so an unbounded relaxation cannot occur.
            MipStatus::Infeasible | MipStatus::Unbounded => Termination::Infeasible,
            MipStatus::TimeLimit => Termination::TimeLimit,
            MipStatus::NodeLimit => Termination::NodeLimit,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub schema_version: u32,
    pub formulation: String,
    pub termination: Termination,
    pub z_ub: Option<u64>,
    pub z_lb: Option<u64>,
    pub gap_pct: f64,
    pub incumbent: Option<IncentiveSolution>,
    pub nodes: usize,
    pub cuts: BTreeMap<String, usize>,
    /// LP bound after root separation; absent when the root is infeasible.
    pub root_bound: Option<f64>,
    pub lp_iterations: usize,
    /// Omitted when a reproducible report is requested.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wall_time_s: Option<f64>,
}

/// `100 (UB - LB) / UB`; zero when `UB = 0`, 100 without an upper bound.
pub fn gap_pct(z_ub: Option<u64>, z_lb: Option<u64>) -> f64 {
    match (z_ub, z_lb) {
        (Some(0), _) => 0.0,
        (Some(ub), Some(lb)) => 100.0 * (ub as f64 - lb.min(ub) as f64) / ub as f64,
        (Some(_), None) => 100.0,
        (None, _) => 100.0,
    }
}

pub fn cut_counts(counts: &BTreeMap<CutKind, usize>) -> BTreeMap<String, usize> {
    CutKind::ALL.iter().map(|k| (k.name().to_string(), counts.get(k).copied().unwrap_or(0))).collect()
}

impl SolveReport {
    pub fn is_optimal(&self) -> bool {
        self.termination == Termination::Optimal
    }

    /// Checks the bound ordering and gap formula.
    pub fn is_consistent(&self) -> bool {
        let ordered = match (self.z_ub, self.z_lb) {
            (Some(ub), Some(lb)) => lb <= ub,
            _ => true,
        };
        ordered && (self.gap_pct - gap_pct(self.z_ub, self.z_lb)).abs() < 1e-9
    }
}
