//! Model-independent cut representation shared by the formulations and the
//! audit oracle.

use serde::{Deserialize, Serialize};

use crate::instance::{Instance, NodeId};
use crate::lift::LiftedPropagation;
use crate::milp::CutKind;
use crate::propagation::Propagator;

/// A formulation variable addressed by meaning rather than column.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum VarRef {
    /// Node activation.
    X(NodeId),
    /// Incentive choice: node and menu index.
    Y(NodeId, usize),
    /// Arc influence, by index into `Instance::arcs`.
    Z(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Provenance {
    Cycle {
        arcs: Vec<usize>,
        anchor: NodeId,
    },
    /// Per-node cover: incentive index and external influencers of each member.
    Icc {
        set: Vec<NodeId>,
        anchor: Option<NodeId>,
        incentive: Vec<usize>,
        external: Vec<Vec<NodeId>>,
    },
    /// Shared external set for all members.
    Licc {
        set: Vec<NodeId>,
        anchor: Option<NodeId>,
        incentive: Vec<usize>,
        external: Vec<NodeId>,
    },
    /// Smallest activating incentive index per member, `None` if none exists.
    Cf {
        set: Vec<NodeId>,
        threshold: Vec<Option<usize>>,
    },
}

/// `Σ coef · var >= rhs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cut {
    pub kind: CutKind,
    pub terms: Vec<(VarRef, f64)>,
    pub rhs: f64,
    pub provenance: Provenance,
}

/// Values of `x`, `y`, `z` at some point; empty vectors stand for absent families.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Point {
    pub x: Vec<f64>,
    pub y: Vec<Vec<f64>>,
    pub z: Vec<f64>,
}

/// How an incentive vector maps onto `y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Semantics {
    /// Only active nodes carry an incentive (`Σ_p y_ip = x_i`).
    Arc,
    /// Every node carries its incentive (`Σ_p y_ip = 1`).
    Compact,
}

impl Point {
    pub fn value(&self, v: VarRef) -> f64 {
        match v {
            VarRef::X(i) => self.x[i],
            VarRef::Y(i, p) => self.y[i][p],
            VarRef::Z(e) => self.z[e],
        }
    }

    /// Integral point induced by incentive indices `idx`. `z` marks, for each
    /// node activated after round 0, the arcs from earlier-activated
    /// in-neighbours in ascending id until its requirement is met.
    pub fn induced(prop: &Propagator<'_>, idx: &[usize], semantics: Semantics) -> Point {
        let inst = prop.instance();
        let lifted = prop.lifted();
        let n = inst.node_count();
        let cascade = prop.cascade(idx);
        let rounds = cascade.rounds(n);
        let mut x = vec![0.0; n];
        let mut y: Vec<Vec<f64>> = inst.nodes().map(|i| vec![0.0; inst.incentives(i).len()]).collect();
        let mut z = vec![0.0; inst.arcs().len()];
        for i in inst.nodes() {
            let active = rounds[i].is_some();
            if active {
                x[i] = 1.0;
            }
            if active || semantics == Semantics::Compact {
                y[i][idx[i]] = 1.0;
            }
            let Some(t) = rounds[i] else { continue };
            let need = lifted.requirement(i, idx[i]);
            let mut got = 0;
            for &e in inst.in_arcs(i) {
                if got >= need {
                    break;
                }
                let a = inst.arc(e);
                if rounds[a.source].is_some_and(|r| r < t) {
                    z[e] = 1.0;
                    got += a.influence;
                }
            }
            debug_assert!(got >= need);
        }
        Point { x, y, z }
    }
}

impl Cut {
    pub fn lhs(&self, point: &Point) -> f64 {
        self.terms.iter().map(|&(v, c)| c * point.value(v)).sum()
    }

    /// Positive when `point` violates the cut.
    pub fn violation(&self, point: &Point) -> f64 {
        self.rhs - self.lhs(point)
    }

    pub fn anchor(&self) -> Option<NodeId> {
        match &self.provenance {
            Provenance::Cycle { anchor, .. } => Some(*anchor),
            Provenance::Icc { anchor, .. } | Provenance::Licc { anchor, .. } => *anchor,
            Provenance::Cf { .. } => None,
        }
    }

    /// `Σ_{C} z_ij <= Σ_{V(C) \ {anchor}} x_i`.
    pub fn cycle(inst: &Instance, arcs: Vec<usize>, anchor: NodeId) -> Cut {
        let mut terms = Vec::with_capacity(2 * arcs.len());
        for &e in &arcs {
            terms.push((VarRef::Z(e), -1.0));
            let i = inst.arc(e).source;
            if i != anchor {
                terms.push((VarRef::X(i), 1.0));
            }
        }
        Cut { kind: CutKind::Cycle, terms, rhs: 0.0, provenance: Provenance::Cycle { arcs, anchor } }
    }

    /// Influence cover cut over `z`; right-hand side `x_anchor`, or 1 without anchor.
    pub fn icc(inst: &Instance, set: Vec<NodeId>, anchor: Option<NodeId>, incentive: Vec<usize>, external: Vec<Vec<NodeId>>) -> Cut {
        let mut terms = Vec::new();
        for (pos, &i) in set.iter().enumerate() {
            for p in incentive[pos] + 1..inst.incentives(i).len() {
                terms.push((VarRef::Y(i, p), 1.0));
            }
            for &e in inst.in_arcs(i) {
                let j = inst.arc(e).source;
                if set.binary_search(&j).is_err() && !external[pos].contains(&j) {
                    terms.push((VarRef::Z(e), 1.0));
                }
            }
        }
        let (kind, rhs) = match anchor {
            Some(k) => {
                terms.push((VarRef::X(k), -1.0));
                (CutKind::Icc, 0.0)
            }
            None => (CutKind::IccPlus, 1.0),
        };
        Cut { kind, terms, rhs, provenance: Provenance::Icc { set, anchor, incentive, external } }
    }

    /// Lifted cover cut over `x`; right-hand side `x_anchor`, or 1 without anchor.
    pub fn licc(inst: &Instance, set: Vec<NodeId>, anchor: Option<NodeId>, incentive: Vec<usize>, external: Vec<NodeId>) -> Cut {
        let mut terms = Vec::new();
        for (pos, &i) in set.iter().enumerate() {
            for p in incentive[pos] + 1..inst.incentives(i).len() {
                terms.push((VarRef::Y(i, p), 1.0));
            }
        }
        for j in inst.nodes() {
            if set.binary_search(&j).is_err() && external.binary_search(&j).is_err() {
                terms.push((VarRef::X(j), 1.0));
            }
        }
        let (kind, rhs) = match anchor {
            Some(k) => {
                terms.push((VarRef::X(k), -1.0));
                (CutKind::Licc, 0.0)
            }
            None => (CutKind::LiccPlus, 1.0),
        };
        Cut { kind, terms, rhs, provenance: Provenance::Licc { set, anchor, incentive, external } }
    }

    /// Compact-formulation covering cut for `set`, thresholds computed from
    /// the influence available outside it.
    pub fn cf(inst: &Instance, lifted: &LiftedPropagation, set: Vec<NodeId>) -> Cut {
        let threshold: Vec<Option<usize>> = set.iter().map(|&i| cf_threshold(inst, lifted, &set, i)).collect();
        let mut terms = Vec::new();
        for (pos, &i) in set.iter().enumerate() {
            if let Some(t) = threshold[pos] {
                for p in t..inst.incentives(i).len() {
                    terms.push((VarRef::Y(i, p), 1.0));
                }
            }
        }
        Cut { kind: CutKind::Cf, terms, rhs: 1.0, provenance: Provenance::Cf { set, threshold } }
    }

    /// Checks the structural invariants of the cut family: simple cycle,
    /// strict cover conditions and the size bound of rhs-1 variants.
    pub fn is_well_formed(&self, inst: &Instance, lifted: &LiftedPropagation) -> bool {
        let big_enough = |set: &[NodeId]| set.len() > inst.max_inactive();
        match &self.provenance {
            Provenance::Cycle { arcs, anchor } => {
                let nodes: Vec<NodeId> = arcs.iter().map(|&e| inst.arc(e).source).collect();
                let mut sorted = nodes.clone();
                sorted.sort_unstable();
                sorted.dedup();
                sorted.len() == nodes.len()
                    && nodes.contains(anchor)
                    && (0..arcs.len()).all(|t| inst.arc(arcs[t]).target == inst.arc(arcs[(t + 1) % arcs.len()]).source)
            }
            Provenance::Icc { set, anchor, incentive, external } => {
                anchor.map_or(big_enough(set), |k| set.binary_search(&k).is_ok())
                    && set.iter().enumerate().all(|(pos, &i)| {
                        let got = external_influence(inst, i, |j| external[pos].contains(&j) && set.binary_search(&j).is_err());
                        lifted.insufficient(i, incentive[pos], got)
                    })
            }
            Provenance::Licc { set, anchor, incentive, external } => {
                anchor.map_or(big_enough(set), |k| set.binary_search(&k).is_ok())
                    && external.iter().all(|j| set.binary_search(j).is_err())
                    && set.iter().enumerate().all(|(pos, &i)| {
                        let got = external_influence(inst, i, |j| external.binary_search(&j).is_ok());
                        lifted.insufficient(i, incentive[pos], got)
                    })
            }
            Provenance::Cf { set, threshold } => {
                big_enough(set)
                    && set.iter().zip(threshold).all(|(&i, &t)| t == cf_threshold(inst, lifted, set, i))
            }
        }
    }
}

/// Influence into `i` from in-neighbours selected by `pick`.
pub fn external_influence(inst: &Instance, i: NodeId, pick: impl Fn(NodeId) -> bool) -> u64 {
    inst.in_arcs(i).iter().map(|&e| inst.arc(e)).filter(|a| pick(a.source)).map(|a| a.influence).sum()
}

/// Smallest incentive index activating `i` with all influence from outside
/// the sorted `set`; `None` if even the largest incentive falls short.
pub fn cf_threshold(inst: &Instance, lifted: &LiftedPropagation, set: &[NodeId], i: NodeId) -> Option<usize> {
    let outside = external_influence(inst, i, |j| set.binary_search(&j).is_err());
    (0..inst.incentives(i).len()).find(|&p| lifted.activates(i, p, outside))
}
