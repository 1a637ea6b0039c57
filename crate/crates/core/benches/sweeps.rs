//! Exhaustive and sampled sweeps on one thread versus the default rayon pool.
//! Built with `--no-default-features` the library runs sequentially and both
//! pools time the same code.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use inoculation::classic::{self, Evaluation, MixedProfile};
use inoculation::constructions;
use inoculation::costshare;
use inoculation::GameParams;
use rayon::ThreadPool;

fn pools() -> Vec<(String, ThreadPool)> {
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut sizes = vec![1];
    if threads > 1 {
        sizes.push(threads);
    }
    sizes
        .into_iter()
        .map(|t| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(t).build().unwrap();
            (format!("{t}-threads"), pool)
        })
        .collect()
}

fn sweeps(c: &mut Criterion) {
    let params = GameParams::new(1.0, 4.0).unwrap();
    let cycle16 = constructions::cycle_graph(16).unwrap();
    let cycle1024 = constructions::cycle_graph(1024).unwrap();
    let (scheme, _) = constructions::theorem3_payment_scheme(&params, 1024, 0.0).unwrap();
    let probs: Vec<f64> = (0..12).map(|i| 0.1 + 0.07 * i as f64).collect();
    let mixed = MixedProfile::new(probs).unwrap();
    let cycle12 = constructions::cycle_graph(12).unwrap();

    for (label, pool) in pools() {
        let mut group = c.benchmark_group("sweeps");
        group.sample_size(10);
        group.bench_function(BenchmarkId::new("enumerate-cycle16", &label), |b| {
            b.iter(|| pool.install(|| classic::enumerate_classic_equilibria(&params, black_box(&cycle16), 20)))
        });
        group.bench_function(BenchmarkId::new("optimum-cycle16", &label), |b| {
            b.iter(|| pool.install(|| classic::social_optimum_bruteforce(&params, black_box(&cycle16), 20)))
        });
        group.bench_function(BenchmarkId::new("monte-carlo-100k", &label), |b| {
            let eval = Evaluation::MonteCarlo { samples: 100_000, seed: 7 };
            b.iter(|| pool.install(|| classic::expected_social_cost_mixed(&params, &cycle12, black_box(&mixed), eval)))
        });
        group.bench_function(BenchmarkId::new("verify-scheme-1024", &label), |b| {
            b.iter(|| {
                pool.install(|| costshare::check_costshare_equilibrium(&params, &cycle1024, black_box(&scheme), 1e-9, 20))
            })
        });
        group.finish();
    }
}

criterion_group!(benches, sweeps);
criterion_main!(benches);
