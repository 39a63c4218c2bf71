//! Seeded Watts–Strogatz instance generator with the benchmark incentive menu.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::instance::{Arc, Instance, InstanceError, NodeSpec};
use crate::power::floor_pow;
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorParams {
    pub n: usize,
    /// Mean degree of the undirected ring lattice; must be even.
    pub k: usize,
    pub beta: f64,
    pub seed: u64,
    /// Inclusive range for arc influences `d_ij`.
    pub weight_range: (u64, u64),
    pub alpha: Rational,
    pub gamma: Rational,
}

impl GeneratorParams {
    pub fn new(n: usize, k: usize, beta: f64, seed: u64, alpha: Rational, gamma: Rational) -> Self {
        GeneratorParams { n, k, beta, seed, weight_range: (1, 10), alpha, gamma }
    }

    fn validate(&self) -> Result<(), InstanceError> {
        let bad = |m: String| Err(InstanceError::Params(m));
        if self.n == 0 {
            return bad("n must be positive".into());
        }
        if !self.k.is_multiple_of(2) {
            return bad(format!("k = {} must be even", self.k));
        }
        if self.k >= self.n {
            return bad(format!("k = {} must be smaller than n = {}", self.k, self.n));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return bad(format!("beta = {} outside [0, 1]", self.beta));
        }
        let (lo, hi) = self.weight_range;
        if lo == 0 || lo > hi {
            return bad(format!("weight range [{lo}, {hi}] must be non-empty and positive"));
        }
        Ok(())
    }
}

/// Cost of offering incentive `p`: `floor(p^0.9)`.
pub fn incentive_cost(p: u64) -> u64 {
    floor_pow(p, Rational::new(9, 10))
}

/// Incentive menu `{0, ceil(h/4), ceil(h/2), ceil(3h/4), h}` for the largest
/// threshold `h`, with duplicate levels removed.
pub fn incentive_menu(max_threshold: u64) -> Vec<u64> {
    let levels = [0, 1, 2, 3, 4].map(|q| (q * max_threshold).div_ceil(4));
    let mut menu: Vec<u64> = levels.to_vec();
    menu.dedup();
    menu
}

/// Undirected Watts–Strogatz edge set on `n` nodes as sorted pairs.
pub fn watts_strogatz(n: usize, k: usize, beta: f64, rng: &mut impl Rng) -> BTreeSet<(usize, usize)> {
    let key = |a: usize, b: usize| if a < b { (a, b) } else { (b, a) };
    let mut edges = BTreeSet::new();
    for u in 0..n {
        for j in 1..=k / 2 {
            edges.insert(key(u, (u + j) % n));
        }
    }
    for j in 1..=k / 2 {
        for u in 0..n {
            let v = (u + j) % n;
            if !rng.gen_bool(beta) {
                continue;
            }
            let degree_u = edges.iter().filter(|&&(a, b)| a == u || b == u).count();
            if degree_u >= n - 1 {
                continue;
            }
            let w = loop {
                let w = rng.gen_range(0..n);
                if w != u && !edges.contains(&key(u, w)) {
                    break w;
                }
            };
            edges.remove(&key(u, v));
            edges.insert(key(u, w));
        }
    }
    edges
}

pub fn generate_instance(params: &GeneratorParams) -> Result<Instance, InstanceError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let edges = watts_strogatz(params.n, params.k, params.beta, &mut rng);
    let (lo, hi) = params.weight_range;
    let mut arcs = Vec::with_capacity(2 * edges.len());
    for &(u, v) in &edges {
        arcs.push(Arc { source: u, target: v, influence: rng.gen_range(lo..=hi) });
        arcs.push(Arc { source: v, target: u, influence: rng.gen_range(lo..=hi) });
    }
    let mut incoming = vec![0u64; params.n];
    for a in &arcs {
        incoming[a.target] += a.influence;
    }
    let thresholds: Vec<u64> = incoming
        .iter()
        .map(|&total| rng.gen_range(1..=(total / 2).max(1)))
        .collect();
    let max_h = thresholds.iter().copied().max().unwrap_or(1);
    let menu = incentive_menu(max_h);
    let costs: Vec<u64> = menu.iter().map(|&p| incentive_cost(p)).collect();
    let nodes = thresholds
        .into_iter()
        .map(|threshold| NodeSpec { threshold, incentives: menu.clone(), costs: costs.clone() })
        .collect();
    Instance::new(nodes, arcs, params.alpha, params.gamma)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, k: usize, beta: f64, seed: u64) -> GeneratorParams {
        GeneratorParams::new(n, k, beta, seed, "1".parse().unwrap(), "1".parse().unwrap())
    }

    #[test]
    fn menu_rounds_breakpoints_up() {
        assert_eq!(incentive_menu(34), vec![0, 9, 17, 26, 34]);
        assert_eq!(incentive_menu(4), vec![0, 1, 2, 3, 4]);
        assert_eq!(incentive_menu(1), vec![0, 1]);
        assert_eq!(incentive_menu(2), vec![0, 1, 2]);
    }

    #[test]
    fn costs_are_truncated() {
        assert_eq!(incentive_cost(0), 0);
        assert_eq!(incentive_cost(9), 7);
        assert_eq!(incentive_cost(34), 23);
        assert_eq!(incentive_cost(1), 1);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(generate_instance(&params(10, 3, 0.1, 0)).is_err());
        assert!(generate_instance(&params(4, 4, 0.1, 0)).is_err());
        assert!(generate_instance(&params(10, 4, 1.5, 0)).is_err());
        let mut p = params(10, 4, 0.1, 0);
        p.weight_range = (0, 3);
        assert!(generate_instance(&p).is_err());
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let a = generate_instance(&params(20, 4, 0.3, 7)).unwrap();
        let b = generate_instance(&params(20, 4, 0.3, 7)).unwrap();
        assert_eq!(a.to_text(), b.to_text());
        let mut arc_sets = BTreeSet::new();
        for seed in 0..100 {
            let inst = generate_instance(&params(20, 4, 0.3, seed)).unwrap();
            let arcs: Vec<(usize, usize, u64)> =
                inst.arcs().iter().map(|a| (a.source, a.target, a.influence)).collect();
            assert!(arc_sets.insert(arcs), "seed {seed} repeated an earlier instance");
        }
    }

    #[test]
    fn structural_properties() {
        for seed in 0..30 {
            for &(n, k, beta) in &[(8, 4, 0.1), (12, 4, 0.3), (20, 8, 0.3), (10, 2, 1.0)] {
                let inst = generate_instance(&params(n, k, beta, seed)).unwrap();
                assert_eq!(inst.arcs().len(), n * k, "edge count preserved by rewiring");
                let h_max = inst.nodes().map(|i| inst.threshold(i)).max().unwrap();
                for i in inst.nodes() {
                    assert!(!inst.in_arcs(i).is_empty(), "node {i} lost all neighbours");
                    assert_eq!(*inst.incentives(i).last().unwrap(), h_max);
                    assert!(inst.threshold(i) <= (inst.total_in_influence(i) / 2).max(1));
                }
                for a in inst.arcs() {
                    assert!(inst.find_arc(a.target, a.source).is_some());
                    assert!((1..=10).contains(&a.influence));
                }
            }
        }
    }

    #[test]
    fn round_trips_through_both_formats() {
        let inst = generate_instance(&params(20, 4, 0.1, 3)).unwrap();
        let dir = std::env::temp_dir().join(format!("glcip-rt-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        for name in ["a.txt", "a.json"] {
            let path = dir.join(name);
            inst.save(&path).unwrap();
            assert_eq!(Instance::load(&path).unwrap(), inst);
        }
        std::fs::remove_dir_all(&dir).ok();
    }
}
