//! Arc-flow formulation and cycle-elimination separation.

use crate::cuts::{Cut, Point, Semantics};
use crate::instance::Instance;
use crate::lift::LiftedPropagation;
use crate::milp::{MilpModel, Row, Sense, CUT_VIOLATION};
use crate::propagation::Propagator;

/// Column indices of `x`, `y`, `z` inside the underlying model.
#[derive(Clone, Debug)]
pub struct ArcModel {
    pub model: MilpModel,
    pub x: Vec<usize>,
    pub y: Vec<Vec<usize>>,
    pub z: Vec<usize>,
}

impl ArcModel {
    /// Objective, lifted propagation rows, one incentive per active node,
    /// linking rows for arcs without a reverse arc and the coverage row.
    /// Cycle rows are left to separation.
    pub fn build(inst: &Instance, lifted: &LiftedPropagation) -> ArcModel {
        let mut model = MilpModel::new();
        let x: Vec<usize> = inst.nodes().map(|i| model.add_binary(&format!("x{i}"), 0.0)).collect();
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
        let z: Vec<usize> = inst
            .arcs()
            .iter()
            .map(|a| model.add_binary(&format!("z{}_{}", a.source, a.target), 0.0))
            .collect();
        for i in inst.nodes() {
            let mut coefs: Vec<(usize, f64)> = (0..y[i].len())
                .map(|p| (y[i][p], lifted.coefficient(i, p) as f64))
                .collect();
            for &e in inst.in_arcs(i) {
                coefs.push((z[e], inst.arc(e).influence as f64));
            }
            coefs.push((x[i], -(lifted.rhs(i) as f64)));
            model.add_row(Row::new(coefs, Sense::Ge, 0.0)).expect("propagation row");
            let mut one = vec![(x[i], -1.0)];
            one.extend(y[i].iter().map(|&c| (c, 1.0)));
            model.add_row(Row::new(one, Sense::Eq, 0.0)).expect("incentive row");
        }
        for (e, a) in inst.arcs().iter().enumerate() {
            if inst.find_arc(a.target, a.source).is_none() {
                model.add_row(Row::new(vec![(z[e], 1.0), (x[a.source], -1.0)], Sense::Le, 0.0)).expect("linking row");
            }
        }
        let cover: Vec<(usize, f64)> = x.iter().map(|&c| (c, 1.0)).collect();
        model
            .add_row(Row::new(cover, Sense::Ge, inst.coverage_target() as f64))
            .expect("coverage row");
        ArcModel { model, x, y, z }
    }

    pub fn column(&self, v: crate::cuts::VarRef) -> usize {
        match v {
            crate::cuts::VarRef::X(i) => self.x[i],
            crate::cuts::VarRef::Y(i, p) => self.y[i][p],
            crate::cuts::VarRef::Z(e) => self.z[e],
        }
    }

    pub fn row(&self, cut: &Cut) -> Row {
        Row::new(cut.terms.iter().map(|&(v, c)| (self.column(v), c)).collect(), Sense::Ge, cut.rhs)
    }

    pub fn point(&self, values: &[f64]) -> Point {
        Point {
            x: self.x.iter().map(|&c| values[c]).collect(),
            y: self.y.iter().map(|cols| cols.iter().map(|&c| values[c]).collect()).collect(),
            z: self.z.iter().map(|&c| values[c]).collect(),
        }
    }

    /// Model vector for the solution induced by incentive indices `idx`.
    pub fn vector(&self, prop: &Propagator<'_>, idx: &[usize]) -> Vec<f64> {
        let p = Point::induced(prop, idx, Semantics::Arc);
        let mut v = vec![0.0; self.model.num_vars()];
        for (i, &c) in self.x.iter().enumerate() {
            v[c] = p.x[i];
            for (k, &cy) in self.y[i].iter().enumerate() {
                v[cy] = p.y[i][k];
            }
        }
        for (e, &c) in self.z.iter().enumerate() {
            v[c] = p.z[e];
        }
        v
    }

    /// Incentive indices of an integral model vector; inactive nodes get index 0.
    pub fn incentives(&self, values: &[f64]) -> Vec<usize> {
        self.y
            .iter()
            .map(|cols| cols.iter().position(|&c| values[c] > 0.5).unwrap_or(0))
            .collect()
    }
}

/// Cycle-elimination separation by all-pairs shortest paths on the weights
/// `max(0, x_i - z_ij)`. At most one cut per anchor node.
pub fn separate_cycles(inst: &Instance, point: &Point) -> Vec<Cut> {
    let n = inst.node_count();
    let mut cuts = Vec::new();
    let mut anchored = vec![false; n];
    // Arcs carrying more than their tail's activation: the 2-cycle through the
    // reverse arc is violated but hidden by the clipped weights.
    for (e, a) in inst.arcs().iter().enumerate() {
        if anchored[a.target] || point.z[e] <= point.x[a.source] + CUT_VIOLATION {
            continue;
        }
        if let Some(back) = inst.find_arc(a.target, a.source) {
            let cut = Cut::cycle(inst, vec![e, back], a.target);
            if cut.violation(point) >= CUT_VIOLATION {
                anchored[a.target] = true;
                cuts.push(cut);
            }
        }
    }
    let inf = f64::INFINITY;
    let mut dist = vec![inf; n * n];
    let mut next = vec![usize::MAX; n * n];
    for (e, a) in inst.arcs().iter().enumerate() {
        let w = (point.x[a.source] - point.z[e]).max(0.0);
        let (s, t) = (a.source, a.target);
        if w < dist[s * n + t] {
            dist[s * n + t] = w;
            next[s * n + t] = t;
        }
    }
    for m in 0..n {
        for s in 0..n {
            let dsm = dist[s * n + m];
            if !dsm.is_finite() || s == m {
                continue;
            }
            for t in 0..n {
                if t == s || t == m {
                    continue;
                }
                let cand = dsm + dist[m * n + t];
                if cand < dist[s * n + t] - 1e-12 {
                    dist[s * n + t] = cand;
                    next[s * n + t] = next[s * n + m];
                }
            }
        }
    }
    for k in 0..n {
        if anchored[k] {
            continue;
        }
        let mut best: Option<(f64, usize, usize)> = None;
        for &e in inst.in_arcs(k) {
            let j = inst.arc(e).source;
            let d = dist[k * n + j];
            if !d.is_finite() {
                continue;
            }
            let total = d + (point.x[j] - point.z[e]).max(0.0);
            if best.is_none_or(|(b, _, _)| total < b - 1e-12) {
                best = Some((total, j, e));
            }
        }
        let Some((total, j, closing)) = best else { continue };
        if total >= point.x[k] - CUT_VIOLATION {
            continue;
        }
        let mut arcs = Vec::new();
        let mut seen = vec![false; n];
        let mut u = k;
        let mut simple = true;
        while u != j {
            seen[u] = true;
            let v = next[u * n + j];
            if v == usize::MAX || seen[v] {
                simple = false;
                break;
            }
            arcs.push(inst.find_arc(u, v).expect("path follows arcs"));
            u = v;
        }
        if !simple {
            continue;
        }
        arcs.push(closing);
        let cut = Cut::cycle(inst, arcs, k);
        if cut.violation(point) >= CUT_VIOLATION {
            cuts.push(cut);
        }
    }
    cuts
}

/// Whether the arcs with `z = 1` contain a directed cycle.
#[cfg(test)]
pub(crate) fn has_integral_cycle(inst: &Instance, point: &Point) -> bool {
    use crate::instance::NodeId;
    let n = inst.node_count();
    let mut state = vec![0u8; n];
    fn dfs(u: NodeId, inst: &Instance, point: &Point, state: &mut [u8]) -> bool {
        state[u] = 1;
        for &e in inst.out_arcs(u) {
            if point.z[e] < 0.5 {
                continue;
            }
            let v = inst.arc(e).target;
            if state[v] == 1 || (state[v] == 0 && dfs(v, inst, point, state)) {
                return true;
            }
        }
        state[u] = 2;
        false
    }
    (0..n).any(|u| state[u] == 0 && dfs(u, inst, point, &mut state))
}
