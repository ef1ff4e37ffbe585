use asep_coupling::diagnostics::{dyadic_qvar, height_difference_grid};
use asep_coupling::dynamics::{asep_model, evolve_coupled, ClockScheme, EvolveOptions};
use asep_coupling::lattice::{viable_max, viable_min};
use asep_coupling::BoundaryMode;
use asep_coupling_bench::{approx_pair, bernoulli};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use std::hint::black_box;

fn coupled_evolution(c: &mut Criterion) {
    let model = asep_model(0.04).expect("model");
    let initials = approx_pair(0.04, 256);
    let mut group = c.benchmark_group("evolve_coupled");
    for clocks in [ClockScheme::PerBondQueue, ClockScheme::Superposed] {
        let options = EvolveOptions {
            boundary: BoundaryMode::Periodic,
            clocks,
        };
        group.throughput(Throughput::Elements(513 * 20));
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("{clocks:?}")),
            &options,
            |b, &options| {
                b.iter(|| {
                    evolve_coupled(black_box(&initials), &model, 20.0, &[20.0], 7, options)
                        .expect("run")
                })
            },
        );
    }
    group.finish();
}

fn envelopes(c: &mut Criterion) {
    let a = bernoulli(4096, 1);
    let b = bernoulli(4096, 2);
    c.bench_function("viable_max_min_8k", |bench| {
        bench.iter(|| {
            (
                viable_max(black_box(&a), &b).expect("max"),
                viable_min(&a, &b).expect("min"),
            )
        })
    });
}

fn quadratic_variation(c: &mut Criterion) {
    let [a, b] = approx_pair(0.001, 1100);
    c.bench_function("qvar_levels_3_to_7", |bench| {
        bench.iter(|| {
            let grid = height_difference_grid(black_box(&a), &b, 0.001, 0.0, 1.0, 7);
            (3..=7)
                .map(|n| dyadic_qvar(&grid, n).expect("qvar"))
                .sum::<f64>()
        })
    });
}

criterion_group!(benches, coupled_evolution, envelopes, quadratic_variation);
criterion_main!(benches);
