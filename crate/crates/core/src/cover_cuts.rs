//! Influence cover cuts and their lifted variants, separated exactly by
//! auxiliary MIPs.

use std::time::Duration;

use crate::cuts::{external_influence, Cut, Point, Provenance};
use crate::instance::{Instance, NodeId};
use crate::lift::LiftedPropagation;
use crate::milp::{solve_mip, MilpModel, MipOptions, MipStatus, NoCallbacks, Row, Sense, Variable, CUT_VIOLATION};

/// Objective coefficients below this are treated as zero in separation MIPs.
const NEGLIGIBLE: f64 = 1e-9;

pub const DEFAULT_BUDGET: Duration = Duration::from_secs(5);

/// Which member is forced into the cover set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    /// `k ∈ X`; the cut's right-hand side is `x_k`.
    Anchor(NodeId),
    /// `|X| > floor((1 - alpha) |V|)`; the right-hand side is 1.
    Large,
}

#[derive(Clone, Debug, Default)]
pub struct Separation {
    pub cut: Option<Cut>,
    /// Optimal value of the separation MIP when it was solved to optimality.
    pub optimum: Option<f64>,
    pub budget_exhausted: bool,
}

struct Cols {
    s: Vec<usize>,
    y0: Vec<Vec<usize>>,
    z0: Vec<usize>,
}

fn binary(model: &mut MilpModel, name: String, objective: f64) -> usize {
    model.add_binary(&name, objective)
}

fn add_membership(model: &mut MilpModel, inst: &Instance, target: Target) -> Vec<usize> {
    let s: Vec<usize> = inst
        .nodes()
        .map(|i| {
            let forced = target == Target::Anchor(i);
            model
                .add_var(Variable {
                    name: format!("s{i}"),
                    lower: if forced { 1.0 } else { 0.0 },
                    upper: 1.0,
                    integer: true,
                    objective: 0.0,
                })
                .expect("binary")
        })
        .collect();
    if target == Target::Large {
        let coefs = s.iter().map(|&c| (c, 1.0)).collect();
        model
            .add_row(Row::new(coefs, Sense::Ge, (inst.max_inactive() + 1) as f64))
            .expect("cardinality row");
    }
    s
}

/// `y1_ip >= s_i - Σ_{q >= p} y0_iq`, skipped where the relaxation puts no weight.
fn add_incentive_linking(model: &mut MilpModel, inst: &Instance, point: &Point, s: &[usize], y0: &[Vec<usize>]) {
    for i in inst.nodes() {
        for p in 0..y0[i].len() {
            let w = point.y[i][p];
            if w <= NEGLIGIBLE {
                continue;
            }
            let y1 = binary(model, format!("y1_{i}_{p}"), w);
            let mut coefs = vec![(y1, 1.0), (s[i], -1.0)];
            coefs.extend(y0[i][p..].iter().map(|&c| (c, 1.0)));
            model.add_row(Row::new(coefs, Sense::Ge, 0.0)).expect("linking row");
        }
    }
}

fn build_icc_sep(inst: &Instance, lifted: &LiftedPropagation, point: &Point, target: Target) -> (MilpModel, Cols) {
    let mut model = MilpModel::new();
    let s = add_membership(&mut model, inst, target);
    let y0: Vec<Vec<usize>> = inst
        .nodes()
        .map(|i| (0..inst.incentives(i).len()).map(|p| binary(&mut model, format!("y0_{i}_{p}"), 0.0)).collect())
        .collect();
    let z0: Vec<usize> = (0..inst.arcs().len()).map(|e| binary(&mut model, format!("z0_{e}"), 0.0)).collect();
    for i in inst.nodes() {
        // Cover: the chosen incentive plus the kept external influence stays below the requirement.
        let mut coefs: Vec<(usize, f64)> = (0..y0[i].len()).map(|p| (y0[i][p], lifted.coefficient(i, p) as f64)).collect();
        coefs.extend(inst.in_arcs(i).iter().map(|&e| (z0[e], inst.arc(e).influence as f64)));
        model.add_row(Row::new(coefs, Sense::Le, lifted.rhs(i) as f64 - 1.0)).expect("cover row");
        let mut pick: Vec<(usize, f64)> = y0[i].iter().map(|&c| (c, 1.0)).collect();
        pick.push((s[i], -1.0));
        model.add_row(Row::new(pick, Sense::Le, 0.0)).expect("pick row");
    }
    add_incentive_linking(&mut model, inst, point, &s, &y0);
    for (e, a) in inst.arcs().iter().enumerate() {
        let (j, i) = (a.source, a.target);
        model
            .add_row(Row::new(vec![(z0[e], 1.0), (s[i], -1.0)], Sense::Le, 0.0))
            .expect("kept arc row");
        model
            .add_row(Row::new(vec![(z0[e], 1.0), (s[j], 1.0)], Sense::Le, 1.0))
            .expect("kept arc row");
        let w = point.z[e];
        if w <= NEGLIGIBLE {
            continue;
        }
        let z1 = binary(&mut model, format!("z1_{e}"), w);
        model
            .add_row(Row::new(vec![(z1, 1.0), (s[i], -1.0), (s[j], 1.0), (z0[e], 1.0)], Sense::Ge, 0.0))
            .expect("linking row");
    }
    (model, Cols { s, y0, z0 })
}

fn build_licc_sep(inst: &Instance, lifted: &LiftedPropagation, point: &Point, target: Target) -> (MilpModel, Cols) {
    let mut model = MilpModel::new();
    let s = add_membership(&mut model, inst, target);
    let y0: Vec<Vec<usize>> = inst
        .nodes()
        .map(|i| (0..inst.incentives(i).len()).map(|p| binary(&mut model, format!("y0_{i}_{p}"), 0.0)).collect())
        .collect();
    // `z0` here holds the node columns `x0_j`: membership of the shared external set.
    let x0: Vec<usize> = inst.nodes().map(|j| binary(&mut model, format!("x0_{j}"), 0.0)).collect();
    for i in inst.nodes() {
        let total = inst.total_in_influence(i) as f64;
        let mut coefs: Vec<(usize, f64)> = (0..y0[i].len()).map(|p| (y0[i][p], lifted.coefficient(i, p) as f64)).collect();
        coefs.extend(inst.in_arcs(i).iter().map(|&e| (x0[inst.arc(e).source], inst.arc(e).influence as f64)));
        coefs.push((s[i], total));
        model
            .add_row(Row::new(coefs, Sense::Le, total + lifted.rhs(i) as f64 - 1.0))
            .expect("cover row");
        let mut pick: Vec<(usize, f64)> = y0[i].iter().map(|&c| (c, 1.0)).collect();
        pick.push((s[i], -1.0));
        model.add_row(Row::new(pick, Sense::Le, 0.0)).expect("pick row");
        model
            .add_row(Row::new(vec![(x0[i], 1.0), (s[i], 1.0)], Sense::Le, 1.0))
            .expect("external row");
    }
    add_incentive_linking(&mut model, inst, point, &s, &y0);
    for j in inst.nodes() {
        let w = point.x[j];
        if w <= NEGLIGIBLE {
            continue;
        }
        let x1 = binary(&mut model, format!("x1_{j}"), w);
        model
            .add_row(Row::new(vec![(x1, 1.0), (s[j], 1.0), (x0[j], 1.0)], Sense::Ge, 1.0))
            .expect("linking row");
    }
    (model, Cols { s, y0, z0: x0 })
}

fn sep_options(point: &Point, target: Target, budget: Option<Duration>, with_cutoff: bool) -> MipOptions {
    let rhs = match target {
        Target::Anchor(k) => point.x[k],
        Target::Large => 1.0,
    };
    MipOptions {
        time_limit: budget,
        cutoff: with_cutoff.then_some(rhs - CUT_VIOLATION),
        integral_objective: false,
        root_cut_rounds: 0,
        node_cut_rounds: 0,
        ..MipOptions::default()
    }
}

fn anchor_of(target: Target) -> Option<NodeId> {
    match target {
        Target::Anchor(k) => Some(k),
        Target::Large => None,
    }
}

fn chosen_incentive(values: &[f64], cols: &[usize]) -> usize {
    cols.iter().rposition(|&c| values[c] > 0.5).unwrap_or(0)
}

/// Exact ICC separation for one anchor (or the rhs-1 variant).
pub fn separate_icc(
    inst: &Instance,
    lifted: &LiftedPropagation,
    point: &Point,
    target: Target,
    budget: Option<Duration>,
) -> Separation {
    if let Target::Anchor(k) = target {
        if point.x[k] <= CUT_VIOLATION {
            return Separation::default();
        }
    }
    if target == Target::Large && inst.max_inactive() + 1 > inst.node_count() {
        return Separation::default();
    }
    let (model, cols) = build_icc_sep(inst, lifted, point, target);
    let Ok(out) = solve_mip(&model, &mut NoCallbacks, &sep_options(point, target, budget, true)) else {
        return Separation::default();
    };
    let budget_exhausted = matches!(out.status, MipStatus::TimeLimit | MipStatus::NodeLimit);
    let Some(values) = out.solution else {
        return Separation { budget_exhausted, ..Separation::default() };
    };
    let set: Vec<NodeId> = inst.nodes().filter(|&i| values[cols.s[i]] > 0.5).collect();
    let incentive = set.iter().map(|&i| chosen_incentive(&values, &cols.y0[i])).collect();
    let external = set
        .iter()
        .map(|&i| {
            inst.in_arcs(i)
                .iter()
                .filter(|&&e| values[cols.z0[e]] > 0.5)
                .map(|&e| inst.arc(e).source)
                .filter(|j| set.binary_search(j).is_err())
                .collect()
        })
        .collect();
    let cut = postprocess_icc(inst, lifted, Cut::icc(inst, set, anchor_of(target), incentive, external));
    let optimum = (out.status == MipStatus::Optimal).then_some(out.objective.unwrap_or(f64::INFINITY));
    let keep = cut.is_well_formed(inst, lifted) && cut.violation(point) >= CUT_VIOLATION;
    debug_assert!(cut.is_well_formed(inst, lifted));
    Separation { cut: keep.then_some(cut), optimum, budget_exhausted }
}

/// Optimal value of the ICC separation MIP without cutoff: the smallest
/// left-hand side over all anchored covers.
pub fn icc_separation_value(inst: &Instance, lifted: &LiftedPropagation, point: &Point, target: Target) -> f64 {
    let (model, _) = build_icc_sep(inst, lifted, point, target);
    let out = solve_mip(&model, &mut NoCallbacks, &sep_options(point, target, None, false)).expect("separation MIP");
    out.objective.unwrap_or(f64::INFINITY)
}

/// Raises each incentive as far as the cover condition allows, then adds the
/// strongest remaining external influencers that keep it.
pub fn postprocess_icc(inst: &Instance, lifted: &LiftedPropagation, cut: Cut) -> Cut {
    let Provenance::Icc { set, anchor, mut incentive, mut external } = cut.provenance else {
        return cut;
    };
    for (pos, &i) in set.iter().enumerate() {
        let mut got = external_influence(inst, i, |j| external[pos].contains(&j));
        incentive[pos] = (0..inst.incentives(i).len())
            .rev()
            .find(|&p| lifted.insufficient(i, p, got))
            .unwrap_or(incentive[pos]);
        let mut candidates: Vec<(u64, NodeId)> = inst
            .in_arcs(i)
            .iter()
            .map(|&e| inst.arc(e))
            .filter(|a| set.binary_search(&a.source).is_err() && !external[pos].contains(&a.source))
            .map(|a| (a.influence, a.source))
            .collect();
        candidates.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        for (d, j) in candidates {
            if lifted.insufficient(i, incentive[pos], got + d) {
                got += d;
                external[pos].push(j);
            }
        }
        external[pos].sort_unstable();
    }
    Cut::icc(inst, set, anchor, incentive, external)
}

/// Lifted counterpart of [`postprocess_icc`] for a shared external set.
pub fn postprocess_licc(inst: &Instance, lifted: &LiftedPropagation, cut: Cut) -> Cut {
    let Provenance::Licc { set, anchor, mut incentive, mut external } = cut.provenance else {
        return cut;
    };
    let influence_into = |i: NodeId, ext: &[NodeId]| external_influence(inst, i, |j| ext.binary_search(&j).is_ok());
    for (pos, &i) in set.iter().enumerate() {
        let got = influence_into(i, &external);
        incentive[pos] = (0..inst.incentives(i).len())
            .rev()
            .find(|&p| lifted.insufficient(i, p, got))
            .unwrap_or(incentive[pos]);
    }
    let mut candidates: Vec<(u64, NodeId)> = inst
        .nodes()
        .filter(|j| set.binary_search(j).is_err() && external.binary_search(j).is_err())
        .map(|j| {
            let into: u64 = set.iter().filter_map(|&i| inst.find_arc(j, i)).map(|e| inst.arc(e).influence).sum();
            (into, j)
        })
        .collect();
    candidates.sort();
    for (_, j) in candidates {
        let pos_j = external.binary_search(&j).unwrap_err();
        external.insert(pos_j, j);
        let fits = set
            .iter()
            .enumerate()
            .all(|(pos, &i)| lifted.insufficient(i, incentive[pos], influence_into(i, &external)));
        if !fits {
            external.remove(pos_j);
        }
    }
    Cut::licc(inst, set, anchor, incentive, external)
}

/// Exact LICC separation for one anchor (or the rhs-1 variant).
pub fn separate_licc(
    inst: &Instance,
    lifted: &LiftedPropagation,
    point: &Point,
    target: Target,
    budget: Option<Duration>,
) -> Separation {
    if let Target::Anchor(k) = target {
        if point.x[k] <= CUT_VIOLATION {
            return Separation::default();
        }
    }
    if target == Target::Large && inst.max_inactive() + 1 > inst.node_count() {
        return Separation::default();
    }
    let (model, cols) = build_licc_sep(inst, lifted, point, target);
    let Ok(out) = solve_mip(&model, &mut NoCallbacks, &sep_options(point, target, budget, true)) else {
        return Separation::default();
    };
    let budget_exhausted = matches!(out.status, MipStatus::TimeLimit | MipStatus::NodeLimit);
    let Some(values) = out.solution else {
        return Separation { budget_exhausted, ..Separation::default() };
    };
    let set: Vec<NodeId> = inst.nodes().filter(|&i| values[cols.s[i]] > 0.5).collect();
    let incentive = set.iter().map(|&i| chosen_incentive(&values, &cols.y0[i])).collect();
    let external: Vec<NodeId> = inst
        .nodes()
        .filter(|&j| values[cols.z0[j]] > 0.5 && set.binary_search(&j).is_err())
        .collect();
    let cut = postprocess_licc(inst, lifted, Cut::licc(inst, set, anchor_of(target), incentive, external));
    let optimum = (out.status == MipStatus::Optimal).then_some(out.objective.unwrap_or(f64::INFINITY));
    let keep = cut.is_well_formed(inst, lifted) && cut.violation(point) >= CUT_VIOLATION;
    debug_assert!(cut.is_well_formed(inst, lifted));
    Separation { cut: keep.then_some(cut), optimum, budget_exhausted }
}

/// Smallest ICC left-hand side over every cover containing the anchor, by
/// enumeration of sets, incentives and external subsets. Tiny graphs only.
pub fn brute_force_icc_value(inst: &Instance, lifted: &LiftedPropagation, point: &Point, anchor: NodeId) -> f64 {
    let n = inst.node_count();
    assert!(n <= 12, "enumeration is exponential in the node count");
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << n) {
        if mask & (1 << anchor) == 0 {
            continue;
        }
        let set: Vec<NodeId> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        // Members are independent given the set: minimise each separately.
        let mut total = 0.0;
        for &i in &set {
            let outside: Vec<usize> = inst
                .in_arcs(i)
                .iter()
                .copied()
                .filter(|&e| mask & (1 << inst.arc(e).source) == 0)
                .collect();
            let mut node_best = f64::INFINITY;
            for p in 0..inst.incentives(i).len() {
                let y_terms: f64 = point.y[i][p + 1..].iter().sum();
                for sub in 0u32..(1 << outside.len()) {
                    let kept: u64 = (0..outside.len())
                        .filter(|&t| sub & (1 << t) != 0)
                        .map(|t| inst.arc(outside[t]).influence)
                        .sum();
                    if !lifted.insufficient(i, p, kept) {
                        continue;
                    }
                    let z_terms: f64 =
                        (0..outside.len()).filter(|&t| sub & (1 << t) == 0).map(|t| point.z[outside[t]]).sum();
                    node_best = node_best.min(y_terms + z_terms);
                }
            }
            total += node_best;
        }
        best = best.min(total);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::tests::spec;
    use crate::instance::Arc;
    use crate::milp::CutKind;

    fn mutual_pair(alpha: &str) -> Instance {
        let nodes = (0..2).map(|_| spec(5, &[(0, 0), (5, 4)])).collect();
        let arcs = vec![Arc { source: 0, target: 1, influence: 5 }, Arc { source: 1, target: 0, influence: 5 }];
        Instance::new(nodes, arcs, alpha.parse().unwrap(), "1".parse().unwrap()).unwrap()
    }

    fn bootstrapped_point() -> Point {
        Point { x: vec![1.0, 1.0], y: vec![vec![1.0, 0.0], vec![1.0, 0.0]], z: vec![1.0, 1.0] }
    }

    #[test]
    fn mutual_pair_icc_is_violated() {
        let inst = mutual_pair("1");
        let lifted = LiftedPropagation::new(&inst);
        let point = bootstrapped_point();
        let sep = separate_icc(&inst, &lifted, &point, Target::Anchor(0), None);
        let cut = sep.cut.expect("violated cover");
        assert_eq!(cut.kind, CutKind::Icc);
        assert!((cut.lhs(&point) + 1.0).abs() < 1e-9, "LHS 0 minus x_0");
        match &cut.provenance {
            Provenance::Icc { set, incentive, external, .. } => {
                assert_eq!(set, &vec![0, 1]);
                assert_eq!(incentive, &vec![0, 0]);
                assert!(external.iter().all(|e| e.is_empty()));
            }
            _ => unreachable!(),
        }
        assert_eq!(icc_separation_value(&inst, &lifted, &point, Target::Anchor(0)), 0.0);
        assert_eq!(brute_force_icc_value(&inst, &lifted, &point, 0), 0.0);
    }

    #[test]
    fn mutual_pair_rhs_one_variants() {
        let inst = mutual_pair("1");
        let lifted = LiftedPropagation::new(&inst);
        let point = bootstrapped_point();
        let icc = separate_icc(&inst, &lifted, &point, Target::Large, None).cut.unwrap();
        assert_eq!(icc.kind, CutKind::IccPlus);
        assert_eq!(icc.lhs(&point), 0.0);
        let licc = separate_licc(&inst, &lifted, &point, Target::Large, None).cut.unwrap();
        assert_eq!(licc.kind, CutKind::LiccPlus);
        assert_eq!(licc.lhs(&point), 0.0);
        match &licc.provenance {
            Provenance::Licc { set, external, .. } => {
                assert_eq!(set, &vec![0, 1]);
                assert!(external.is_empty());
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn integral_feasible_point_has_no_cover_cut() {
        let inst = mutual_pair("1");
        let lifted = LiftedPropagation::new(&inst);
        // Node 0 bought, node 1 follows along arc 0 -> 1.
        let point = Point { x: vec![1.0, 1.0], y: vec![vec![0.0, 1.0], vec![1.0, 0.0]], z: vec![1.0, 0.0] };
        for target in [Target::Anchor(0), Target::Anchor(1), Target::Large] {
            assert!(separate_icc(&inst, &lifted, &point, target, None).cut.is_none());
            assert!(separate_licc(&inst, &lifted, &point, target, None).cut.is_none());
        }
    }

    fn star(h: u64, menu: &[u64], d: u64) -> Instance {
        let m: Vec<(u64, u64)> = menu.iter().map(|&p| (p, p)).collect();
        let nodes = vec![spec(h, &m), spec(1, &[(0, 0), (1, 1)])];
        let arcs = vec![Arc { source: 1, target: 0, influence: d }];
        Instance::new(nodes, arcs, "1".parse().unwrap(), "1".parse().unwrap()).unwrap()
    }

    #[test]
    fn postprocessing_raises_incentive_first() {
        let inst = star(9, &[0, 3, 5, 7, 9], 3);
        let lifted = LiftedPropagation::new(&inst);
        let cut = Cut::icc(&inst, vec![0], Some(0), vec![0], vec![vec![]]);
        let done = postprocess_icc(&inst, &lifted, cut);
        // 7 < 9 with nothing kept; 7 + 3 would reach 9, so the neighbour stays out.
        assert_eq!(done.provenance, Provenance::Icc { set: vec![0], anchor: Some(0), incentive: vec![3], external: vec![vec![]] });
        let kept = Cut::icc(&inst, vec![0], Some(0), vec![0], vec![vec![1]]);
        let done = postprocess_icc(&inst, &lifted, kept);
        // With the neighbour kept only 5 stays below: 5 + 3 < 9 <= 7 + 3.
        assert_eq!(done.provenance, Provenance::Icc { set: vec![0], anchor: Some(0), incentive: vec![2], external: vec![vec![1]] });
        assert_eq!(postprocess_icc(&inst, &lifted, done.clone()), done);
    }

    #[test]
    fn postprocessing_adds_influencers_when_room_remains() {
        let inst = star(9, &[0, 3, 9], 2);
        let lifted = LiftedPropagation::new(&inst);
        let cut = postprocess_icc(&inst, &lifted, Cut::icc(&inst, vec![0], Some(0), vec![0], vec![vec![]]));
        // p = 3 is the largest insufficient level; 3 + 2 < 9 keeps the neighbour.
        assert_eq!(cut.provenance, Provenance::Icc { set: vec![0], anchor: Some(0), incentive: vec![1], external: vec![vec![1]] });
    }

    #[test]
    fn lifted_cut_counts_shared_influencer_once() {
        // Node 2 influences both 0 and 1.
        let nodes = (0..3).map(|_| spec(5, &[(0, 0), (5, 4)])).collect();
        let arcs = vec![Arc { source: 2, target: 0, influence: 5 }, Arc { source: 2, target: 1, influence: 5 }];
        let inst = Instance::new(nodes, arcs, "1".parse().unwrap(), "1".parse().unwrap()).unwrap();
        let icc = Cut::icc(&inst, vec![0, 1], Some(0), vec![0, 0], vec![vec![], vec![]]);
        let licc = Cut::licc(&inst, vec![0, 1], Some(0), vec![0, 0], vec![]);
        let point = Point { x: vec![1.0, 1.0, 1.0], y: vec![vec![1.0, 0.0]; 3], z: vec![1.0, 1.0] };
        assert_eq!(icc.lhs(&point), 1.0);
        assert_eq!(licc.lhs(&point), 0.0);
    }
}
