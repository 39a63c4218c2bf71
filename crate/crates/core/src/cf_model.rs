//! Compact formulation over incentive variables only.

use std::time::Duration;

use crate::cover_cuts::Separation;
use crate::cuts::{Cut, Point, Semantics, VarRef};
use crate::instance::{Instance, NodeId};
use crate::lift::LiftedPropagation;
use crate::milp::{solve_mip, MilpModel, MipOptions, MipStatus, NoCallbacks, Row, Sense, CUT_VIOLATION};
use crate::propagation::Propagator;

#[derive(Clone, Debug)]
pub struct CfModel {
    pub model: MilpModel,
    pub y: Vec<Vec<usize>>,
}

impl CfModel {
    pub fn build(inst: &Instance) -> CfModel {
        let mut model = MilpModel::new();
        let y: Vec<Vec<usize>> = inst
            .nodes()
            .map(|i| {
                inst.costs(i)
                    .iter()
                    .enumerate()
                    .map(|(p, &w)| model.add_binary(&format!("y{i}_{p}"), w as f64))
                    .collect()
            })
            .collect();
        for cols in &y {
            let coefs = cols.iter().map(|&c| (c, 1.0)).collect();
            model.add_row(Row::new(coefs, Sense::Eq, 1.0)).expect("assignment row");
        }
        CfModel { model, y }
    }

    pub fn row(&self, cut: &Cut) -> Row {
        let coefs = cut
            .terms
            .iter()
            .map(|&(v, c)| match v {
                VarRef::Y(i, p) => (self.y[i][p], c),
                other => panic!("compact model has no column for {other:?}"),
            })
            .collect();
        Row::new(coefs, Sense::Ge, cut.rhs)
    }

    pub fn point(&self, values: &[f64]) -> Point {
        Point {
            x: Vec::new(),
            y: self.y.iter().map(|cols| cols.iter().map(|&c| values[c]).collect()).collect(),
            z: Vec::new(),
        }
    }

    pub fn vector(&self, idx: &[usize]) -> Vec<f64> {
        let mut v = vec![0.0; self.model.num_vars()];
        for (i, &p) in idx.iter().enumerate() {
            v[self.y[i][p]] = 1.0;
        }
        v
    }

    pub fn incentives(&self, values: &[f64]) -> Vec<usize> {
        self.y
            .iter()
            .map(|cols| cols.iter().position(|&c| values[c] > 0.5).unwrap_or(0))
            .collect()
    }
}

/// Incentive indices of an integral point satisfying the assignment rows.
pub fn integral_choice(point: &Point) -> Vec<usize> {
    point.y.iter().map(|row| row.iter().position(|&v| v > 0.5).unwrap_or(0)).collect()
}

/// Integral separation: simulate the cascade and, if coverage fails, return
/// the cut for the set of nodes left inactive.
pub fn separate_cf_integral(prop: &Propagator<'_>, idx: &[usize]) -> Option<Cut> {
    let inst = prop.instance();
    let cascade = prop.cascade(idx);
    if cascade.activated.len() >= inst.coverage_target() {
        return None;
    }
    let cut = Cut::cf(inst, prop.lifted(), cascade.non_activated);
    debug_assert_eq!(cut.lhs(&Point::induced(prop, idx, Semantics::Compact)), 0.0);
    Some(cut)
}

/// Fractional separation through the covering MIP over set membership.
pub fn separate_cf_fractional(
    inst: &Instance,
    lifted: &LiftedPropagation,
    point: &Point,
    budget: Option<Duration>,
) -> Separation {
    if inst.max_inactive() + 1 > inst.node_count() {
        return Separation::default();
    }
    let mut model = MilpModel::new();
    let s1: Vec<usize> = inst.nodes().map(|i| model.add_binary(&format!("s1_{i}"), 0.0)).collect();
    let s0: Vec<usize> = inst.nodes().map(|i| model.add_binary(&format!("s0_{i}"), 0.0)).collect();
    let y0: Vec<Vec<usize>> = inst
        .nodes()
        .map(|i| (0..inst.incentives(i).len()).map(|p| model.add_binary(&format!("y0_{i}_{p}"), 0.0)).collect())
        .collect();
    for i in inst.nodes() {
        // Σ c y0 + Σ d_ji (s0_j + s1_i - 1) <= R_i - 1
        let total = inst.total_in_influence(i) as f64;
        let mut coefs: Vec<(usize, f64)> = (0..y0[i].len()).map(|p| (y0[i][p], lifted.coefficient(i, p) as f64)).collect();
        coefs.extend(inst.in_arcs(i).iter().map(|&e| (s0[inst.arc(e).source], inst.arc(e).influence as f64)));
        coefs.push((s1[i], total));
        model
            .add_row(Row::new(coefs, Sense::Le, lifted.rhs(i) as f64 - 1.0 + total))
            .expect("cover row");
        model
            .add_row(Row::new(vec![(s0[i], 1.0), (s1[i], 1.0)], Sense::Ge, 1.0))
            .expect("complement row");
        for p in 0..y0[i].len() {
            let w = point.y[i][p];
            if w <= 1e-9 {
                continue;
            }
            let y1 = model.add_binary(&format!("y1_{i}_{p}"), w);
            let mut coefs = vec![(y1, 1.0), (s1[i], -1.0)];
            coefs.extend(y0[i][p..].iter().map(|&c| (c, 1.0)));
            model.add_row(Row::new(coefs, Sense::Ge, 0.0)).expect("linking row");
        }
    }
    let card = s1.iter().map(|&c| (c, 1.0)).collect();
    model
        .add_row(Row::new(card, Sense::Ge, (inst.max_inactive() + 1) as f64))
        .expect("cardinality row");
    let opts = MipOptions {
        time_limit: budget,
        cutoff: Some(1.0 - CUT_VIOLATION),
        root_cut_rounds: 0,
        node_cut_rounds: 0,
        ..MipOptions::default()
    };
    let Ok(out) = solve_mip(&model, &mut NoCallbacks, &opts) else {
        return Separation::default();
    };
    let budget_exhausted = matches!(out.status, MipStatus::TimeLimit | MipStatus::NodeLimit);
    let Some(values) = out.solution else {
        return Separation { budget_exhausted, ..Separation::default() };
    };
    let set: Vec<NodeId> = inst.nodes().filter(|&i| values[s1[i]] > 0.5).collect();
    let cut = Cut::cf(inst, lifted, set);
    let keep = cut.violation(point) >= CUT_VIOLATION;
    let optimum = (out.status == MipStatus::Optimal).then_some(out.objective.unwrap_or(f64::INFINITY));
    Separation { cut: keep.then_some(cut), optimum, budget_exhausted }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cuts::Provenance;
    use crate::instance::tests::spec;
    use crate::instance::Arc;

    fn chain() -> Instance {
        let nodes = (0..3).map(|_| spec(1, &[(0, 0), (1, 1)])).collect();
        let arcs = vec![Arc { source: 0, target: 1, influence: 1 }, Arc { source: 1, target: 2, influence: 1 }];
        Instance::new(nodes, arcs, "1".parse().unwrap(), "1".parse().unwrap()).unwrap()
    }

    #[test]
    fn integral_separation_on_chain() {
        let inst = chain();
        let prop = Propagator::new(&inst);
        let cut = separate_cf_integral(&prop, &[0, 0, 0]).expect("nothing activates");
        assert_eq!(cut.provenance, Provenance::Cf { set: vec![0, 1, 2], threshold: vec![Some(1), Some(1), Some(1)] });
        assert!(separate_cf_integral(&prop, &[1, 0, 0]).is_none());
        // Buying node 1 leaves node 0 inactive.
        let cut = separate_cf_integral(&prop, &[0, 1, 0]).unwrap();
        assert_eq!(cut.provenance, Provenance::Cf { set: vec![0], threshold: vec![Some(1)] });
    }

    #[test]
    fn single_node_model() {
        let inst = Instance::new(vec![spec(5, &[(0, 0), (5, 4)])], vec![], "1".parse().unwrap(), "1".parse().unwrap()).unwrap();
        let prop = Propagator::new(&inst);
        let cut = separate_cf_integral(&prop, &[0]).unwrap();
        let m = CfModel::build(&inst);
        assert_eq!(m.row(&cut).coefs, vec![(m.y[0][1], 1.0)]);
    }

    #[test]
    fn fractional_mutual_pair() {
        let nodes = (0..2).map(|_| spec(5, &[(0, 0), (5, 4)])).collect();
        let arcs = vec![Arc { source: 0, target: 1, influence: 5 }, Arc { source: 1, target: 0, influence: 5 }];
        let inst = Instance::new(nodes, arcs, "1".parse().unwrap(), "1".parse().unwrap()).unwrap();
        let lifted = LiftedPropagation::new(&inst);
        let point = Point { x: vec![], y: vec![vec![0.7, 0.3], vec![0.8, 0.2]], z: vec![] };
        let sep = separate_cf_fractional(&inst, &lifted, &point, None);
        let cut = sep.cut.expect("violated");
        assert!((cut.lhs(&point) - 0.5).abs() < 1e-9);
        let integral = Point { x: vec![], y: vec![vec![0.0, 1.0], vec![1.0, 0.0]], z: vec![] };
        assert!(separate_cf_fractional(&inst, &lifted, &integral, None).cut.is_none());
    }
}
