use proptest::prelude::*;
use qjump_core::analysis::bands::classify;
use qjump_core::config::SystemConfig;
use qjump_core::constants::hz_to_rad;
use qjump_core::hamiltonian::{evolve_step, Frame, HamiltonianSpec, Level, StateVector};
use qjump_core::sweep::run_trajectory_detailed;
use qjump_core::TlsState;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn channels_account_for_lost_norm(
        detune in -300e6f64..300e6,
        tls in -500e6f64..500e6,
        wc in 0.0f64..300e6,
        wm in 0.0f64..50e6,
        rates in prop::array::uniform4(0.0f64..1e9),
        start in 0usize..3,
        dt in 1e-10f64..5e-9,
    ) {
        let w10 = hz_to_rad(9e9);
        let s = HamiltonianSpec {
            omega_10: w10,
            omega_r: w10 + hz_to_rad(tls),
            omega: w10 - hz_to_rad(detune),
            omega_c: hz_to_rad(wc),
            omega_m: hz_to_rad(wm),
            gamma_a: rates[0],
            gamma_b: rates[1],
            gamma_c: rates[2],
            gamma_ba: rates[3],
        };
        let psi = StateVector::basis(start, Frame::Rotating);
        let (next, ch) = evolve_step(&psi, &s, dt).unwrap();
        let loss = 1.0 - next.norm_sqr();
        prop_assert!(next.norm_sqr() <= 1.0 + 4.0 * f64::EPSILON);
        prop_assert!((loss - ch.total()).abs() < 1e-9);
        prop_assert!(ch.escape_a >= 0.0 && ch.escape_b >= 0.0 && ch.escape_c >= 0.0 && ch.relax_ba >= 0.0);
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn short(mut c: SystemConfig) -> SystemConfig {
    c.n_sweeps = 2000;
    c
}

#[test]
fn every_sweep_switches_exactly_once() {
    let run = run_trajectory_detailed(&short(SystemConfig::resonant()), 2000, 3, Some(1)).unwrap();
    let t = &run.trajectory;
    assert_eq!(t.len(), 2000);
    for (i, e) in t.events.iter().enumerate() {
        assert_eq!(e.sweep_index, i as u64);
        assert!(e.time_in_sweep > 0.0 && e.time_in_sweep <= t.period);
        assert!(!e.forced, "ramp to 36.2 uA should always switch");
    }
}

#[test]
fn escape_level_medians_are_frozen() {
    let run = run_trajectory_detailed(&short(SystemConfig::resonant()), 2000, 3, Some(1)).unwrap();
    let by = |lv: Level| {
        median(
            run.trajectory
                .events
                .iter()
                .filter(|e| e.level == lv)
                .map(|e| e.bias)
                .collect(),
        )
    };
    let got = [by(Level::A), by(Level::B), by(Level::C)];
    let frozen = FROZEN_MEDIANS;
    for (g, f) in got.iter().zip(frozen) {
        assert!((g - f).abs() < 1e-12, "median {g:e} drifted from {f:e}");
    }
}

/// Seed 3, 2000 sweeps of the shipped configuration.
const FROZEN_MEDIANS: [f64; 3] = [3.558279e-5, 3.553935e-5, 3.550677e-5];

#[test]
fn without_drive_everything_switches_from_the_ground_band() {
    let mut c = short(SystemConfig::resonant());
    c.drive.amplitude = 0.0;
    let run = run_trajectory_detailed(&c, 2000, 4, Some(1)).unwrap();
    let t = &run.trajectory;
    assert!(t.events.iter().all(|e| e.level == Level::A));
    assert!(run.tls_after.iter().all(|s| *s == TlsState::Ground));
    let resonant = run_trajectory_detailed(&short(SystemConfig::resonant()), 2000, 4, Some(1)).unwrap();
    let (model, _) = classify(&resonant.trajectory.currents(), 3).unwrap();
    let undriven = median(t.currents());
    assert_eq!(model.label(undriven), 0, "undriven median {undriven:e} not in the top band");
}

fn excited_run_ratio(lifetime: f64) -> f64 {
    let mut c = short(SystemConfig::resonant());
    c.tls_lifetime = lifetime;
    let run = run_trajectory_detailed(&c, 4000, 5, Some(1)).unwrap();
    let e: Vec<bool> = run.tls_after.iter().map(|s| *s == TlsState::Excited).collect();
    let p = e.iter().filter(|&&x| x).count() as f64 / e.len() as f64;
    let stay = e.windows(2).filter(|w| w[0] && w[1]).count() as f64;
    let from = e[..e.len() - 1].iter().filter(|&&x| x).count() as f64;
    (stay / from) / p
}

#[test]
fn excited_defect_persists_across_sweeps() {
    let long = excited_run_ratio(SystemConfig::resonant().tls_lifetime);
    let instant = excited_run_ratio(1e-6);
    assert!(long > 3.0, "persistence ratio {long}");
    assert!(instant < 1.5, "control persistence ratio {instant}");
}
