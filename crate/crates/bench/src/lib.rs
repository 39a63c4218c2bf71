//! Shared fixtures for the solver benchmarks.

use glcip::{generate_instance, GeneratorParams, Instance, Rational};

/// Small generated instance that every formulation closes quickly.
pub fn small(n: usize, beta: f64, seed: u64, alpha: &str, gamma: &str) -> Instance {
    let alpha: Rational = alpha.parse().expect("alpha literal");
    let gamma: Rational = gamma.parse().expect("gamma literal");
    generate_instance(&GeneratorParams::new(n, 4, beta, seed, alpha, gamma)).expect("valid parameters")
}

/// Instances used by the solve benchmarks, with a label per instance.
pub fn solve_fixtures() -> Vec<(String, Instance)> {
    [(6, 0.1, 1, "0.5", "1"), (8, 0.3, 4, "0.5", "1"), (8, 0.1, 3, "1", "1.1")]
        .into_iter()
        .map(|(n, beta, seed, a, g)| (format!("n{n}_b{beta}_a{a}_g{g}"), small(n, beta, seed, a, g)))
        .collect()
}
