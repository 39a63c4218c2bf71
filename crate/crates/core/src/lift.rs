//! Linearisation of the activation rule for arbitrary `Γ`.
//!
//! A node `i` with incentive `p` activates when `(Σ d_ji)^Γ + p >= h_i`.
//! Because influences are integers this is the same as
//! `Σ d_ji >= ceil(max(0, h_i - p)^(1/Γ))`, which turns every `Γ` into a
//! linear model with modified incentive coefficients:
//!
//! ```text
//! Σ_p (R_i - r_ip) y_ip + Σ_j d_ji z_ji >= R_i x_i
//! R_i  = ceil(h_i^(1/Γ))
//! r_ip = ceil(max(0, h_i - p)^(1/Γ))
//! ```

use crate::instance::{Instance, NodeId};
use crate::power::ceil_pow;
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftedPropagation {
    rhs: Vec<u64>,
    requirement: Vec<Vec<u64>>,
}

/// `ceil(max(0, h - p)^(1/Γ))`.
pub fn influence_needed(h: u64, p: u64, gamma: Rational) -> u64 {
    ceil_pow(h.saturating_sub(p), gamma.recip())
}

impl LiftedPropagation {
    pub fn new(inst: &Instance) -> Self {
        let gamma = inst.gamma();
        let mut rhs = Vec::with_capacity(inst.node_count());
        let mut requirement = Vec::with_capacity(inst.node_count());
        for i in inst.nodes() {
            let h = inst.threshold(i);
            rhs.push(influence_needed(h, 0, gamma));
            requirement.push(inst.incentives(i).iter().map(|&p| influence_needed(h, p, gamma)).collect());
        }
        LiftedPropagation { rhs, requirement }
    }

    /// `ceil(h_i^(1/Γ))`, the right-hand side coefficient of `x_i`.
    pub fn rhs(&self, i: NodeId) -> u64 {
        self.rhs[i]
    }

    /// Incoming influence needed to activate `i` under the incentive with
    /// menu index `p_idx`; zero when the incentive alone suffices.
    pub fn requirement(&self, i: NodeId, p_idx: usize) -> u64 {
        self.requirement[i][p_idx]
    }

    pub fn requirements(&self, i: NodeId) -> &[u64] {
        &self.requirement[i]
    }

    /// Lifted coefficient of `y_ip`: `R_i - r_ip`.
    pub fn coefficient(&self, i: NodeId, p_idx: usize) -> u64 {
        self.rhs[i] - self.requirement[i][p_idx]
    }

    /// Whether `influence` together with incentive index `p_idx` activates `i`.
    pub fn activates(&self, i: NodeId, p_idx: usize, influence: u64) -> bool {
        influence >= self.requirement[i][p_idx]
    }

    /// Cover test: `influence` with incentive `p_idx` is strictly insufficient.
    pub fn insufficient(&self, i: NodeId, p_idx: usize, influence: u64) -> bool {
        !self.activates(i, p_idx, influence)
    }
}
