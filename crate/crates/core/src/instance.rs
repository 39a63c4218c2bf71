//! Influence network instances: model, validation, text/JSON file formats.
//!
//! The text format is line oriented:
//!
//! ```text
//! glcip <n> <m> <alpha> <gamma>
//! node <id> <h_i> <|P_i|> <p_1> <w_1> ... <p_k> <w_k>   (n lines)
//! arc <src> <dst> <d>                                   (m lines)
//! ```
//!
//! Ids are 0-based. Blank lines and lines starting with `#` are ignored.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::rational::Rational;

pub type NodeId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arc {
    pub source: NodeId,
    pub target: NodeId,
    pub influence: u64,
}

#[derive(Debug, thiserror::Error)]
pub enum InstanceError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid instance: {0}")]
    Validation(String),
    #[error("invalid generator parameters: {0}")]
    Params(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// A validated GLCIP instance. Immutable after construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    node_count: usize,
    arcs: Vec<Arc>,
    thresholds: Vec<u64>,
    incentives: Vec<Vec<u64>>,
    costs: Vec<Vec<u64>>,
    alpha: Rational,
    gamma: Rational,
    in_arcs: Vec<Vec<usize>>,
    out_arcs: Vec<Vec<usize>>,
}

/// One node's data as supplied to [`Instance::new`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub threshold: u64,
    pub incentives: Vec<u64>,
    pub costs: Vec<u64>,
}

impl Instance {
    pub fn new(
        nodes: Vec<NodeSpec>,
        arcs: Vec<Arc>,
        alpha: Rational,
        gamma: Rational,
    ) -> Result<Self, InstanceError> {
        let bad = |m: String| Err(InstanceError::Validation(m));
        let n = nodes.len();
        if n == 0 {
            return bad("instance has no nodes".into());
        }
        if alpha.is_zero() || alpha > Rational::integer(1) {
            return bad(format!("alpha {alpha} outside (0, 1]"));
        }
        if gamma.is_zero() {
            return bad("gamma must be positive".into());
        }
        for (i, node) in nodes.iter().enumerate() {
            if node.threshold == 0 {
                return bad(format!("node {i}: threshold must be >= 1"));
            }
            if node.incentives.len() != node.costs.len() {
                return bad(format!("node {i}: incentive and cost lists differ in length"));
            }
            if node.incentives.first() != Some(&0) || node.costs[0] != 0 {
                return bad(format!("node {i}: incentive menu must start at 0 with cost 0"));
            }
            if node.incentives.windows(2).any(|w| w[0] >= w[1]) {
                return bad(format!("node {i}: incentives not strictly increasing"));
            }
            if node.costs.windows(2).any(|w| w[0] > w[1]) {
                return bad(format!("node {i}: costs decrease with the incentive"));
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        for a in &arcs {
            if a.source >= n || a.target >= n {
                return bad(format!("arc ({}, {}) references a missing node", a.source, a.target));
            }
            if a.source == a.target {
                return bad(format!("self-loop on node {}", a.source));
            }
            if a.influence == 0 {
                return bad(format!("arc ({}, {}) has zero influence", a.source, a.target));
            }
            if !seen.insert((a.source, a.target)) {
                return bad(format!("duplicate arc ({}, {})", a.source, a.target));
            }
        }
        let mut in_arcs = vec![Vec::new(); n];
        let mut out_arcs = vec![Vec::new(); n];
        for (idx, a) in arcs.iter().enumerate() {
            in_arcs[a.target].push(idx);
            out_arcs[a.source].push(idx);
        }
        for list in in_arcs.iter_mut() {
            list.sort_by_key(|&e| arcs[e].source);
        }
        for list in out_arcs.iter_mut() {
            list.sort_by_key(|&e| arcs[e].target);
        }
        let mut thresholds = Vec::with_capacity(n);
        let mut incentives = Vec::with_capacity(n);
        let mut costs = Vec::with_capacity(n);
        for node in nodes {
            thresholds.push(node.threshold);
            incentives.push(node.incentives);
            costs.push(node.costs);
        }
        Ok(Instance {
            node_count: n,
            arcs,
            thresholds,
            incentives,
            costs,
            alpha,
            gamma,
            in_arcs,
            out_arcs,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn nodes(&self) -> std::ops::Range<NodeId> {
        0..self.node_count
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn arc(&self, idx: usize) -> Arc {
        self.arcs[idx]
    }

    pub fn threshold(&self, i: NodeId) -> u64 {
        self.thresholds[i]
    }

    /// Incentive menu `P_i`, strictly increasing and starting at 0.
    pub fn incentives(&self, i: NodeId) -> &[u64] {
        &self.incentives[i]
    }

    pub fn costs(&self, i: NodeId) -> &[u64] {
        &self.costs[i]
    }

    pub fn alpha(&self) -> Rational {
        self.alpha
    }

    pub fn gamma(&self) -> Rational {
        self.gamma
    }

    /// Indices of arcs entering `i`, ordered by source id.
    pub fn in_arcs(&self, i: NodeId) -> &[usize] {
        &self.in_arcs[i]
    }

    /// Indices of arcs leaving `i`, ordered by target id.
    pub fn out_arcs(&self, i: NodeId) -> &[usize] {
        &self.out_arcs[i]
    }

    /// In-neighbours `N_i`, ascending.
    pub fn in_neighbors(&self, i: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.in_arcs[i].iter().map(move |&e| self.arcs[e].source)
    }

    /// Index of arc `(source, target)` if present.
    pub fn find_arc(&self, source: NodeId, target: NodeId) -> Option<usize> {
        self.out_arcs[source]
            .binary_search_by_key(&target, |&e| self.arcs[e].target)
            .ok()
            .map(|pos| self.out_arcs[source][pos])
    }

    /// `d_ji` summed over all in-neighbours of `i`.
    pub fn total_in_influence(&self, i: NodeId) -> u64 {
        self.in_arcs[i].iter().map(|&e| self.arcs[e].influence).sum()
    }

    /// Number of nodes that must end up active, `ceil(alpha * |V|)`.
    pub fn coverage_target(&self) -> usize {
        self.alpha.ceil_mul(self.node_count as u64) as usize
    }

    /// `floor((1 - alpha) * |V|)`: sets larger than this must contain an
    /// active node in every feasible solution.
    pub fn max_inactive(&self) -> usize {
        self.node_count - self.coverage_target()
    }

    pub fn node_spec(&self, i: NodeId) -> NodeSpec {
        NodeSpec {
            threshold: self.thresholds[i],
            incentives: self.incentives[i].clone(),
            costs: self.costs[i].clone(),
        }
    }

    /// Same network with different global parameters.
    pub fn with_parameters(&self, alpha: Rational, gamma: Rational) -> Result<Self, InstanceError> {
        Instance::new(
            self.nodes().map(|i| self.node_spec(i)).collect(),
            self.arcs.clone(),
            alpha,
            gamma,
        )
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, InstanceError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        if path.extension().is_some_and(|e| e == "json") {
            Self::from_json(&text)
        } else {
            Self::from_text(&text)
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), InstanceError> {
        let path = path.as_ref();
        let text = if path.extension().is_some_and(|e| e == "json") {
            self.to_json()
        } else {
            self.to_text()
        };
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "glcip {} {} {} {}", self.node_count, self.arcs.len(), self.alpha, self.gamma).unwrap();
        for i in self.nodes() {
            write!(out, "node {} {} {}", i, self.thresholds[i], self.incentives[i].len()).unwrap();
            for (p, w) in self.incentives[i].iter().zip(&self.costs[i]) {
                write!(out, " {p} {w}").unwrap();
            }
            out.push('\n');
        }
        for a in &self.arcs {
            writeln!(out, "arc {} {} {}", a.source, a.target, a.influence).unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, InstanceError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(no, l)| (no + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let perr = |line: usize, message: String| InstanceError::Parse { line, message };

        let (hl, header) = lines.next().ok_or_else(|| perr(1, "empty file".into()))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 5 || h[0] != "glcip" {
            return Err(perr(hl, "expected `glcip <n> <m> <alpha> <gamma>`".into()));
        }
        let field = |line: usize, name: &str, tok: &str| -> Result<u64, InstanceError> {
            tok.parse::<u64>()
                .map_err(|_| perr(line, format!("field {name}: expected a non-negative integer, got `{tok}`")))
        };
        let n = field(hl, "n", h[1])? as usize;
        let m = field(hl, "m", h[2])? as usize;
        let alpha: Rational = h[3].parse().map_err(|e| perr(hl, format!("field alpha: {e}")))?;
        let gamma: Rational = h[4].parse().map_err(|e| perr(hl, format!("field gamma: {e}")))?;

        let mut nodes: Vec<Option<NodeSpec>> = vec![None; n];
        for _ in 0..n {
            let (ln, l) = lines.next().ok_or_else(|| perr(hl, format!("expected {n} node lines")))?;
            let t: Vec<&str> = l.split_whitespace().collect();
            if t.len() < 4 || t[0] != "node" {
                return Err(perr(ln, "expected `node <id> <h> <k> <p_1> <w_1> ...`".into()));
            }
            let id = field(ln, "id", t[1])? as usize;
            let threshold = field(ln, "h", t[2])?;
            let k = field(ln, "|P|", t[3])? as usize;
            if t.len() != 4 + 2 * k {
                return Err(perr(ln, format!("expected {} incentive/cost values, found {}", 2 * k, t.len() - 4)));
            }
            let mut incentives = Vec::with_capacity(k);
            let mut costs = Vec::with_capacity(k);
            for c in 0..k {
                incentives.push(field(ln, "p", t[4 + 2 * c])?);
                costs.push(field(ln, "w", t[5 + 2 * c])?);
            }
            if id >= n {
                return Err(perr(ln, format!("node id {id} out of range")));
            }
            if nodes[id].is_some() {
                return Err(perr(ln, format!("node {id} defined twice")));
            }
            nodes[id] = Some(NodeSpec { threshold, incentives, costs });
        }
        let mut arcs = Vec::with_capacity(m);
        for _ in 0..m {
            let (ln, l) = lines.next().ok_or_else(|| perr(hl, format!("expected {m} arc lines")))?;
            let t: Vec<&str> = l.split_whitespace().collect();
            if t.len() != 4 || t[0] != "arc" {
                return Err(perr(ln, "expected `arc <src> <dst> <d>`".into()));
            }
            arcs.push(Arc {
                source: field(ln, "src", t[1])? as usize,
                target: field(ln, "dst", t[2])? as usize,
                influence: field(ln, "d", t[3])?,
            });
        }
        if let Some((ln, _)) = lines.next() {
            return Err(perr(ln, "trailing content".into()));
        }
        let nodes = nodes.into_iter().map(|n| n.expect("all ids seen")).collect();
        Instance::new(nodes, arcs, alpha, gamma)
    }

    pub fn to_json(&self) -> String {
        let file = JsonInstance {
            node_count: self.node_count,
            alpha: self.alpha,
            gamma: self.gamma,
            nodes: self.nodes().map(|i| self.node_spec(i)).collect(),
            arcs: self.arcs.clone(),
        };
        serde_json::to_string_pretty(&file).expect("instance serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, InstanceError> {
        let file: JsonInstance = serde_json::from_str(text)?;
        if file.nodes.len() != file.node_count {
            return Err(InstanceError::Validation(format!(
                "node_count {} but {} nodes listed",
                file.node_count,
                file.nodes.len()
            )));
        }
        Instance::new(file.nodes, file.arcs, file.alpha, file.gamma)
    }
}

#[derive(Serialize, Deserialize)]
struct JsonInstance {
    node_count: usize,
    alpha: Rational,
    gamma: Rational,
    nodes: Vec<NodeSpec>,
    arcs: Vec<Arc>,
}
