use std::time::Duration;

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use glcip::{solve, Formulation, LiftedPropagation, Propagator, SolveOptions};
use glcip_bench::{small, solve_fixtures};

fn formulations(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve");
    group.sample_size(10).measurement_time(Duration::from_secs(20));
    for (label, inst) in solve_fixtures() {
        for f in [Formulation::Arc, Formulation::IccPlus, Formulation::LiccPlus, Formulation::Cf] {
            let mut opts = SolveOptions::new(f);
            opts.reproducible = true;
            group.bench_with_input(BenchmarkId::new(f.name(), &label), &inst, |b, inst| {
                b.iter(|| solve(black_box(inst), &opts).unwrap())
            });
        }
    }
    group.finish();
}

fn cascade(c: &mut Criterion) {
    let inst = small(100, 0.1, 7, "0.5", "1.1");
    let prop = Propagator::new(&inst);
    let full: Vec<usize> = inst.nodes().map(|i| inst.incentives(i).len() - 1).collect();
    let half: Vec<usize> = full.iter().enumerate().map(|(i, &p)| if i % 2 == 0 { p } else { 0 }).collect();
    c.bench_function("cascade_n100", |b| b.iter(|| prop.cascade(black_box(&half))));
    c.bench_function("lift_n100", |b| b.iter(|| LiftedPropagation::new(black_box(&inst))));
}

criterion_group!(benches, formulations, cascade);
criterion_main!(benches);
