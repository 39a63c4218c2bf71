//! LP/MILP substrate: model, dual simplex and branch-and-cut.

pub mod bnc;
pub mod lp;
pub mod model;

pub use bnc::{
    gap_percent, solve_mip, Callbacks, CutKind, CutRow, MilpError, MipOptions, MipOutcome, MipStatus, NoCallbacks,
    NodeContext, CUT_VIOLATION, INTEGRALITY_TOL,
};
pub use lp::{solve_lp, DualSimplex, LpResult, LpStatus};
pub use model::{MilpModel, ModelError, Row, Sense, Variable};
