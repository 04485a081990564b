use proptest::prelude::*;
use qjump_core::analysis::bands::classify;
use qjump_core::analysis::spectrum::welch;
use qjump_core::synth::{telegraph_states, SynthParams};
use qjump_core::{fit_exponential, power_spectrum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};

fn three_clusters(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let c = [35.63e-6, 35.55e-6, 35.50e-6][rng.gen_range(0..3)];
            let z: f64 = StandardNormal.sample(&mut rng);
            c + 4e-9 * z
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn classification_ignores_event_order(seed in 0u64..1000, rot in 0usize..600) {
        let xs = three_clusters(seed, 600);
        let mut ys = xs.clone();
        ys.rotate_left(rot);
        let (ma, la) = classify(&xs, 3).unwrap();
        let (mb, lb) = classify(&ys, 3).unwrap();
        for (a, b) in ma.centers.iter().zip(&mb.centers) {
            prop_assert!((a - b).abs() < 1e-15);
        }
        let mut la_rot = la.clone();
        la_rot.rotate_left(rot);
        prop_assert_eq!(la_rot, lb);
    }

    #[test]
    fn labels_reproduce_from_model(seed in 0u64..1000) {
        let xs = three_clusters(seed, 500);
        let (m, labels) = classify(&xs, 3).unwrap();
        for (x, l) in xs.iter().zip(&labels) {
            prop_assert_eq!(m.label(*x), *l);
        }
        prop_assert_eq!(m.counts.iter().sum::<usize>(), xs.len());
    }

    #[test]
    fn exponential_fit_scales_with_time_unit(seed in 0u64..1000, scale in 0.01f64..100.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = Exp::new(1.7).unwrap();
        let xs: Vec<f64> = (0..200).map(|_| d.sample(&mut rng)).collect();
        let scaled: Vec<f64> = xs.iter().map(|x| x * scale).collect();
        let a = fit_exponential(&xs, None).unwrap();
        let b = fit_exponential(&scaled, None).unwrap();
        prop_assert!((a.rate / scale / b.rate - 1.0).abs() < 1e-12);
        prop_assert!((a.ci.0 / scale / b.ci.0 - 1.0).abs() < 1e-12);
        prop_assert!((a.ci.1 / scale / b.ci.1 - 1.0).abs() < 1e-12);
    }
}

#[test]
fn welch_integrates_to_the_variance() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let xs: Vec<f64> = (0..1 << 16)
        .map(|i| (i as f64 * 0.05).sin() + 0.3 * rng.gen::<f64>())
        .collect();
    let psd = welch(&xs, 50.0).unwrap();
    let rel = psd.ac_power() / psd.variance - 1.0;
    assert!(rel.abs() < 0.05, "Parseval mismatch {rel}");
}

#[test]
fn white_noise_spectrum_is_flat() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let fs = 100.0;
    let xs: Vec<f64> = (0..1_000_000).map(|_| StandardNormal.sample(&mut rng)).collect();
    let psd = welch(&xs, fs).unwrap();
    let expected = 2.0 / fs;
    let n = psd.power.len();
    for band in psd.power[1..n - 1].chunks_exact(n / 20) {
        let mean = band.iter().sum::<f64>() / band.len() as f64;
        assert!((mean / expected - 1.0).abs() < 0.05, "band mean {mean} vs {expected}");
    }
}

/// Above the corner, the telegraph spectrum falls as 1/f^2.
#[test]
fn telegraph_spectrum_has_lorentzian_tail() {
    let p = SynthParams::new(0.236, 2.38, 100.0, 10_000.0);
    let states = telegraph_states(&p, 3).unwrap();
    let psd = power_spectrum(&states, p.period(), 1.0).unwrap();
    let (mut sx, mut sy, mut sxx, mut sxy, mut n) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (f, v) in psd.frequency.iter().zip(&psd.power) {
        if (3.0..=10.0).contains(f) {
            let (x, y) = (f.ln(), v.ln());
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            n += 1.0;
        }
    }
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    assert!((slope / -2.0 - 1.0).abs() < 0.05, "slope {slope}");
}
