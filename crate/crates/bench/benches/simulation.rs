use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use qjump_bench::resonant;
use qjump_core::hamiltonian::{evolve_step, Frame, HamiltonianSpec, StateVector};
use qjump_core::junction::{escape_rates, omega_10};
use qjump_core::rng::rng_stream;
use qjump_core::sweep::{run_trajectory, SweepEngine, TlsState};
use std::hint::black_box;

fn junction(c: &mut Criterion) {
    let cfg = resonant();
    c.bench_function("omega_10", |b| {
        b.iter(|| omega_10(&cfg.junction, black_box(35.55e-6)).unwrap())
    });
    c.bench_function("escape_rates", |b| {
        b.iter(|| escape_rates(&cfg.junction, &cfg.escape, black_box(35.55e-6), true).unwrap())
    });
}

fn integrator(c: &mut Criterion) {
    let spec = HamiltonianSpec {
        omega_10: 2e10,
        omega_r: 1.9e10,
        omega: 2e10,
        omega_c: 1.2e9,
        omega_m: 1.2e7,
        gamma_a: 1e3,
        gamma_b: 5e5,
        gamma_c: 1e3,
        gamma_ba: 6e5,
    };
    c.bench_function("rk4_step_rotating", |b| {
        b.iter_batched(
            || StateVector::basis(0, Frame::Rotating),
            |s| evolve_step(&s, &spec, black_box(1e-9)).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

fn sweeps(c: &mut Criterion) {
    let cfg = resonant();
    let engine = SweepEngine::new(&cfg).unwrap();
    // warm the per-interval plan cache
    engine.run_sweep(TlsState::Ground, &mut rng_stream(0, 0)).unwrap();
    engine.run_sweep(TlsState::Excited, &mut rng_stream(0, 1)).unwrap();
    let mut i = 0u64;
    c.bench_function("single_sweep_ground", |b| {
        b.iter(|| {
            i += 1;
            engine
                .run_sweep(TlsState::Ground, &mut rng_stream(7, i))
                .unwrap()
        })
    });
    let mut g = c.benchmark_group("trajectory");
    g.sample_size(10);
    g.bench_function("1000_sweeps_cold", |b| {
        b.iter(|| run_trajectory(&cfg, 1000, black_box(3)).unwrap())
    });
    g.finish();
}

criterion_group!(benches, junction, integrator, sweeps);
criterion_main!(benches);
