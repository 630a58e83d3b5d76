//! Global rayon pool against a one-thread pool on the data-parallel kernels.
//! Build with `--no-default-features` to time the plain sequential path.

use std::hint::black_box;

use alphacomp::alpha_fit::{self, AlphaBounds};
use alphacomp::dirichlet::{self, DirichletParams};
use alphacomp::exec;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn pools() -> Vec<(&'static str, rayon::ThreadPool)> {
    let all = rayon::ThreadPoolBuilder::new().build().unwrap();
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    vec![("all_threads", all), ("one_thread", one)]
}

fn kernels(c: &mut Criterion) {
    let params = DirichletParams::new(vec![2.0, 5.0, 3.0, 1.5, 0.8]).unwrap();
    let data = dirichlet::sample_log(&params, 20_000, 7);
    let small = dirichlet::sample_log(&params, 500, 8);
    let mode = if exec::is_parallel() { "rayon" } else { "sequential" };

    let mut g = c.benchmark_group(format!("kernels_{mode}"));
    g.sample_size(20);
    for (name, pool) in pools() {
        g.bench_with_input(BenchmarkId::new("sample_log_20k", name), &pool, |b, pool| {
            b.iter(|| pool.install(|| dirichlet::sample_log(black_box(&params), 20_000, 3)))
        });
        g.bench_with_input(BenchmarkId::new("transformed_loglik_20k", name), &pool, |b, pool| {
            b.iter(|| pool.install(|| alpha_fit::transformed_loglik(black_box(&data), 0.3, &params).unwrap()))
        });
        g.bench_with_input(BenchmarkId::new("profile_curve_82", name), &pool, |b, pool| {
            b.iter(|| pool.install(|| alpha_fit::profile_curve(black_box(&small), AlphaBounds::default(), 82).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, kernels);
criterion_main!(benches);
