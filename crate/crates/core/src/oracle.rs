//! Enumeration-based ground truth for small instances.

use std::collections::HashSet;

use thiserror::Error;

use crate::cuts::{Cut, Point, Semantics};
use crate::instance::{Instance, NodeId};
use crate::milp::CutKind;
use crate::propagation::{IncentiveSolution, Propagator};

pub const ENUMERATION_LIMIT: u64 = 10_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("{count} incentive vectors exceed the enumeration limit of {limit}")]
    TooLarge { count: u128, limit: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Optimum {
    pub cost: u64,
    pub indices: Vec<usize>,
    pub solution: IncentiveSolution,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    /// Incentive indices of the feasible solution.
    pub indices: Vec<usize>,
    /// Position of the cut in the audited slice.
    pub cut: usize,
    pub lhs: f64,
    pub rhs: f64,
}

/// Number of incentive vectors, refusing anything above the limit.
pub fn search_space(inst: &Instance) -> Result<u64, OracleError> {
    let count: u128 = inst.nodes().map(|i| inst.incentives(i).len() as u128).product();
    if count > ENUMERATION_LIMIT as u128 {
        return Err(OracleError::TooLarge { count, limit: ENUMERATION_LIMIT });
    }
    Ok(count as u64)
}

/// Visits every incentive vector in lexicographic order.
fn for_each_vector(inst: &Instance, mut visit: impl FnMut(&[usize])) {
    let sizes: Vec<usize> = inst.nodes().map(|i| inst.incentives(i).len()).collect();
    let mut idx = vec![0; sizes.len()];
    loop {
        visit(&idx);
        let mut pos = sizes.len();
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < sizes[pos] {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// Visits every feasible incentive vector in lexicographic order.
pub fn for_each_feasible(inst: &Instance, prop: &Propagator<'_>, mut visit: impl FnMut(&[usize])) -> Result<(), OracleError> {
    search_space(inst)?;
    let target = inst.coverage_target();
    let (mut residual, mut queue) = (Vec::new(), Vec::new());
    for_each_vector(inst, |idx| {
        if prop.activated_count(idx, &mut residual, &mut queue) >= target {
            visit(idx);
        }
    });
    Ok(())
}

/// Cheapest feasible incentive vector, ties broken by the lexicographically
/// smallest index vector. `None` when even the full menu fails.
pub fn brute_force_optimum(inst: &Instance) -> Result<Option<Optimum>, OracleError> {
    search_space(inst)?;
    let prop = Propagator::new(inst);
    let target = inst.coverage_target();
    let (mut residual, mut queue) = (Vec::new(), Vec::new());
    let mut best: Option<(u64, Vec<usize>)> = None;
    for_each_vector(inst, |idx| {
        let cost: u64 = idx.iter().enumerate().map(|(i, &p)| inst.costs(i)[p]).sum();
        if best.as_ref().is_some_and(|(b, _)| cost >= *b) {
            return;
        }
        if prop.activated_count(idx, &mut residual, &mut queue) >= target {
            best = Some((cost, idx.to_vec()));
        }
    });
    Ok(best.map(|(cost, indices)| Optimum {
        cost,
        solution: IncentiveSolution::from_indices(inst, &indices),
        indices,
    }))
}

/// Evaluates every cut at the integral point induced by every feasible
/// solution. Compact cuts are read on incentive variables of all nodes, the
/// others on the arc-flow point.
pub fn audit_cuts(inst: &Instance, cuts: &[Cut]) -> Result<Vec<Violation>, OracleError> {
    let prop = Propagator::new(inst);
    let mut seen_arc: HashSet<Vec<u64>> = HashSet::new();
    let arc_cuts: Vec<usize> = (0..cuts.len()).filter(|&c| cuts[c].kind != CutKind::Cf).collect();
    let compact_cuts: Vec<usize> = (0..cuts.len()).filter(|&c| cuts[c].kind == CutKind::Cf).collect();
    let mut out = Vec::new();
    let mut check = |idx: &[usize], point: &Point, which: &[usize]| {
        for &c in which {
            let lhs = cuts[c].lhs(point);
            if lhs < cuts[c].rhs - 1e-9 {
                out.push(Violation { indices: idx.to_vec(), cut: c, lhs, rhs: cuts[c].rhs });
            }
        }
    };
    for_each_feasible(inst, &prop, |idx| {
        if !arc_cuts.is_empty() {
            let point = Point::induced(&prop, idx, Semantics::Arc);
            let key: Vec<u64> = point.x.iter().chain(point.y.iter().flatten()).chain(&point.z).map(|v| v.to_bits()).collect();
            if seen_arc.insert(key) {
                check(idx, &point, &arc_cuts);
            }
        }
        if !compact_cuts.is_empty() {
            check(idx, &Point::induced(&prop, idx, Semantics::Compact), &compact_cuts);
        }
    })?;
    Ok(out)
}

/// Simple directed cycles with at most `max_len` arcs, each listed once
/// starting from its smallest node. Arcs are given by index.
pub fn simple_cycles(inst: &Instance, max_len: usize) -> Vec<Vec<usize>> {
    fn extend(
        inst: &Instance,
        start: NodeId,
        u: NodeId,
        max_len: usize,
        path: &mut Vec<usize>,
        on_path: &mut [bool],
        out: &mut Vec<Vec<usize>>,
    ) {
        for &e in inst.out_arcs(u) {
            let v = inst.arc(e).target;
            if v == start {
                path.push(e);
                out.push(path.clone());
                path.pop();
            } else if v > start && !on_path[v] && path.len() + 1 < max_len {
                on_path[v] = true;
                path.push(e);
                extend(inst, start, v, max_len, path, on_path, out);
                path.pop();
                on_path[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    let mut on_path = vec![false; inst.node_count()];
    for s in inst.nodes() {
        on_path[s] = true;
        extend(inst, s, s, max_len, &mut Vec::new(), &mut on_path, &mut out);
        on_path[s] = false;
    }
    out
}

/// Cycle cuts over all short cycles and anchors that `point` violates.
pub fn violated_short_cycles(inst: &Instance, point: &Point, max_len: usize, tol: f64) -> Vec<Cut> {
    simple_cycles(inst, max_len)
        .into_iter()
        .flat_map(|arcs| {
            let nodes: Vec<NodeId> = arcs.iter().map(|&e| inst.arc(e).source).collect();
            nodes.into_iter().map(move |k| Cut::cycle(inst, arcs.clone(), k))
        })
        .filter(|c| c.violation(point) > tol)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::tests::spec;
    use crate::instance::Arc;
    use crate::rational::Rational;

    fn pair(w0: u64, w1: u64) -> Instance {
        let nodes = vec![spec(5, &[(0, 0), (5, w0)]), spec(5, &[(0, 0), (5, w1)])];
        let arcs = vec![Arc { source: 0, target: 1, influence: 5 }, Arc { source: 1, target: 0, influence: 5 }];
        Instance::new(nodes, arcs, "1".parse().unwrap(), "1".parse().unwrap()).unwrap()
    }

    #[test]
    fn single_node_pays_full_incentive() {
        let inst = Instance::new(vec![spec(5, &[(0, 0), (5, 4)])], vec![], "1".parse().unwrap(), "1".parse().unwrap()).unwrap();
        let opt = brute_force_optimum(&inst).unwrap().unwrap();
        assert_eq!(opt.cost, 4);
        assert_eq!(opt.solution.incentives, vec![5]);
    }

    #[test]
    fn mutual_pair_and_ties() {
        assert_eq!(brute_force_optimum(&pair(4, 3)).unwrap().unwrap().indices, vec![0, 1]);
        // Equal costs: the lexicographically smaller vector wins.
        assert_eq!(brute_force_optimum(&pair(3, 3)).unwrap().unwrap().indices, vec![0, 1]);
    }

    #[test]
    fn tiny_alpha_needs_one_node() {
        let nodes = vec![spec(5, &[(0, 0), (5, 4)]), spec(3, &[(0, 0), (3, 2)]), spec(9, &[(0, 0), (9, 6)])];
        let inst = Instance::new(nodes, vec![], Rational::new(1, 100), "1".parse().unwrap()).unwrap();
        assert_eq!(brute_force_optimum(&inst).unwrap().unwrap().cost, 2);
    }

    #[test]
    fn guard_refuses_large_spaces() {
        let nodes = (0..12).map(|_| spec(10, &[(0, 0), (2, 1), (4, 2), (6, 3), (8, 4)])).collect();
        let inst = Instance::new(nodes, vec![], "1".parse().unwrap(), "1".parse().unwrap()).unwrap();
        assert!(matches!(brute_force_optimum(&inst), Err(OracleError::TooLarge { .. })));
        assert!(audit_cuts(&inst, &[]).is_err());
    }

    #[test]
    fn planted_invalid_cut_is_flagged() {
        let inst = pair(4, 3);
        let good = Cut::cycle(&inst, vec![0, 1], 0);
        assert!(audit_cuts(&inst, std::slice::from_ref(&good)).unwrap().is_empty());
        let mut bad = good.clone();
        bad.rhs += 1.0;
        assert!(!audit_cuts(&inst, &[bad]).unwrap().is_empty());
    }

    #[test]
    fn cycles_are_listed_once() {
        let nodes = (0..3).map(|_| spec(1, &[(0, 0), (1, 1)])).collect();
        let mut arcs = Vec::new();
        for s in 0..3 {
            for t in 0..3 {
                if s != t {
                    arcs.push(Arc { source: s, target: t, influence: 1 });
                }
            }
        }
        let inst = Instance::new(nodes, arcs, "1".parse().unwrap(), "1".parse().unwrap()).unwrap();
        // Three 2-cycles and two triangles.
        assert_eq!(simple_cycles(&inst, 5).len(), 5);
        assert_eq!(simple_cycles(&inst, 2).len(), 3);
    }
}
