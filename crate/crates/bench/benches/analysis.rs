use criterion::{criterion_group, criterion_main, Criterion};
use qjump_bench::telegraph;
use qjump_core::analysis::spectrum::{fit_lorentzian, power_spectrum};
use qjump_core::{analyze, binarize, classify, extract_dwells, fit_telegraph, AnalysisOptions};

fn stages(c: &mut Criterion) {
    let t = telegraph(10_000.0, 1);
    let currents = t.currents();
    let (model, labels) = classify(&currents, 3).unwrap();
    let states = binarize(&labels, &model).unwrap();
    let mut g = c.benchmark_group("analysis_1e6_samples");
    g.sample_size(10);
    g.bench_function("classify", |b| b.iter(|| classify(&currents, 3).unwrap()));
    g.bench_function("dwell_fit", |b| {
        b.iter(|| fit_telegraph(&extract_dwells(&states, 0.01), 0.01).unwrap())
    });
    g.bench_function("welch_psd", |b| {
        b.iter(|| power_spectrum(&states, 0.01, 8e-8).unwrap())
    });
    let psd = power_spectrum(&states, 0.01, 8e-8).unwrap();
    g.bench_function("lorentzian_fit", |b| b.iter(|| fit_lorentzian(&psd).unwrap()));
    g.bench_function("full_pipeline", |b| {
        b.iter(|| analyze(&t, AnalysisOptions::default()).unwrap())
    });
    g.finish();
}

criterion_group!(benches, stages);
criterion_main!(benches);
