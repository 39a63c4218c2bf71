use std::collections::BTreeSet;

use glcip::arc_model::separate_cycles;
use glcip::cuts::Point;
use glcip::oracle::audit_cuts;
use glcip::power::pow_at_least;
use glcip::{generate_instance, GeneratorParams, Instance, LiftedPropagation, Propagator, Rational};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn params() -> impl Strategy<Value = GeneratorParams> {
    (3usize..14, 0usize..3, 0.0f64..1.0, any::<u64>(), 0usize..3, 0usize..3).prop_map(|(n, k, beta, seed, a, g)| {
        let k = [2, 4, 6][k].min(n - 1) & !1;
        let alpha: Rational = ["0.1", "0.5", "1"][a].parse().unwrap();
        let gamma: Rational = ["0.9", "1", "1.1"][g].parse().unwrap();
        GeneratorParams::new(n, k.max(2), beta, seed, alpha, gamma)
    })
}

fn instance_and_choice() -> impl Strategy<Value = (Instance, Vec<usize>)> {
    params().prop_flat_map(|p| {
        let inst = generate_instance(&p).unwrap();
        let sizes: Vec<usize> = inst.nodes().map(|i| inst.incentives(i).len()).collect();
        let idx = sizes.into_iter().map(|s| 0..s).collect::<Vec<_>>();
        (Just(inst), idx)
    })
}

fn incoming(inst: &Instance, i: usize, active: &[bool]) -> u64 {
    inst.in_arcs(i).iter().map(|&e| inst.arc(e)).filter(|a| active[a.source]).map(|a| a.influence).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_instances_round_trip(p in params()) {
        let inst = generate_instance(&p).unwrap();
        prop_assert_eq!(&Instance::from_text(&inst.to_text()).unwrap(), &inst);
        prop_assert_eq!(&Instance::from_json(&inst.to_json()).unwrap(), &inst);
        prop_assert_eq!(&generate_instance(&p).unwrap(), &inst);
    }

    #[test]
    fn every_node_reachable_and_buyable(p in params()) {
        let inst = generate_instance(&p).unwrap();
        for i in inst.nodes() {
            prop_assert!(!inst.in_arcs(i).is_empty());
            prop_assert!(*inst.incentives(i).last().unwrap() >= inst.threshold(i));
        }
    }

    #[test]
    fn raising_an_incentive_never_shrinks_the_cascade((inst, idx) in instance_and_choice(), pick in any::<prop::sample::Index>()) {
        let prop = Propagator::new(&inst);
        let i = pick.index(inst.node_count());
        let before: BTreeSet<usize> = prop.cascade(&idx).activated.into_iter().collect();
        let mut raised = idx.clone();
        raised[i] = inst.incentives(i).len() - 1;
        let after: BTreeSet<usize> = prop.cascade(&raised).activated.into_iter().collect();
        prop_assert!(before.is_subset(&after));
    }

    #[test]
    fn cascade_is_order_independent_and_exact((inst, idx) in instance_and_choice(), seed in any::<u64>()) {
        let prop = Propagator::new(&inst);
        let result = prop.cascade(&idx);
        // Fixed point under a shuffled sweep order with the exact power test.
        let mut order: Vec<usize> = inst.nodes().collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut active = vec![false; inst.node_count()];
        let mut changed = true;
        while changed {
            changed = false;
            for &i in &order {
                let need = inst.threshold(i).saturating_sub(inst.incentives(i)[idx[i]]);
                if !active[i] && pow_at_least(incoming(&inst, i, &active), inst.gamma(), need) {
                    active[i] = true;
                    changed = true;
                }
            }
        }
        for i in inst.nodes() {
            prop_assert_eq!(result.is_active(i), active[i], "node {}", i);
        }
    }

    #[test]
    fn requirement_falls_with_the_incentive(p in params()) {
        let inst = generate_instance(&p).unwrap();
        let lifted = LiftedPropagation::new(&inst);
        for i in inst.nodes() {
            prop_assert!(lifted.requirements(i).windows(2).all(|w| w[0] >= w[1]));
            prop_assert_eq!(lifted.requirement(i, 0), lifted.rhs(i));
        }
    }

    #[test]
    fn unit_gamma_lift_is_the_plain_row(p in params(), mask in any::<u64>()) {
        let mut p = p;
        p.gamma = Rational::integer(1);
        let inst = generate_instance(&p).unwrap();
        let lifted = LiftedPropagation::new(&inst);
        for i in inst.nodes() {
            let s: u64 = inst.in_arcs(i).iter().enumerate().filter(|(b, _)| mask >> (b % 64) & 1 == 1).map(|(_, &e)| inst.arc(e).influence).sum();
            for (q, &pv) in inst.incentives(i).iter().enumerate() {
                prop_assert_eq!(lifted.coefficient(i, q) + s >= lifted.rhs(i), pv + s >= inst.threshold(i));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cycle_cuts_hold_at_every_feasible_point(seed in any::<u64>(), n in 3usize..7, steps in prop::collection::vec(0u32..=8, 64)) {
        let alpha: Rational = "0.5".parse().unwrap();
        let inst = generate_instance(&GeneratorParams::new(n, 2, 0.3, seed, alpha, Rational::integer(1))).unwrap();
        let mut v = steps.iter().cycle().map(|&s| s as f64 / 8.0);
        let point = Point {
            x: inst.nodes().map(|_| v.next().unwrap()).collect(),
            y: inst.nodes().map(|i| inst.incentives(i).iter().map(|_| 0.0).collect()).collect(),
            z: inst.arcs().iter().map(|_| v.next().unwrap()).collect(),
        };
        let cuts = separate_cycles(&inst, &point);
        prop_assert!(audit_cuts(&inst, &cuts).unwrap().is_empty());
    }
}

#[test]
fn seeds_give_distinct_graphs() {
    let alpha: Rational = "0.5".parse().unwrap();
    let arc_sets: BTreeSet<Vec<(usize, usize)>> = (0..100)
        .map(|seed| {
            let inst = generate_instance(&GeneratorParams::new(20, 4, 0.3, seed, alpha, Rational::integer(1))).unwrap();
            inst.arcs().iter().map(|a| (a.source, a.target)).collect()
        })
        .collect();
    assert_eq!(arc_sets.len(), 100);
}
