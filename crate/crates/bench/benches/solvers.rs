use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nalgebra::DVector;

use saddle_core::harness::{generate_quadratic_instance, solve_idapg, solve_pdpg, IdapgOptions, InstanceSpec, PdpgOptions};
use saddle_core::{pdpg_default_config, pdpg_step, CaseLabel, PdpgState, StoppingRule};

fn step(c: &mut Criterion) {
    let mut group = c.benchmark_group("pdpg_step");
    for d in [10, 50, 200] {
        let g = generate_quadratic_instance(&InstanceSpec::new(CaseLabel::ScSc, 1, d, d)).unwrap();
        let cfg = pdpg_default_config(&g.problem).unwrap();
        let s = PdpgState::new(DVector::from_element(d, 1.0), DVector::from_element(d, -1.0));
        group.bench_with_input(BenchmarkId::from_parameter(d), &d, |b, _| {
            b.iter(|| pdpg_step(&g.problem, black_box(&s), &cfg).unwrap())
        });
    }
    group.finish();
}

fn solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_to_1e-8");
    group.sample_size(10);
    let stop = StoppingRule::with_tol(200_000, 1e-8);
    for case in [CaseLabel::ScSc, CaseLabel::Assumption2] {
        let g = generate_quadratic_instance(&InstanceSpec::new(case, 2, 20, 16)).unwrap();
        group.bench_function(BenchmarkId::new("pdpg", case), |b| {
            b.iter(|| solve_pdpg(&g.problem, &PdpgOptions::default(), &stop, None).unwrap())
        });
        group.bench_function(BenchmarkId::new("idapg", case), |b| {
            b.iter(|| solve_idapg(&g.problem, &IdapgOptions::default(), &stop, None).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, step, solve);
criterion_main!(benches);
