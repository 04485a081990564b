//! Benchmark fixtures shared by the criterion targets.

use qjump_core::config::SystemConfig;
use qjump_core::synth::{synthesize, SynthParams};
use qjump_core::Trajectory;

/// Shipped configuration at the resonant drive.
pub fn resonant() -> SystemConfig {
    SystemConfig::resonant()
}

/// A synthetic record with the reference rates.
pub fn telegraph(duration: f64, seed: u64) -> Trajectory {
    synthesize(&SynthParams::new(0.236, 2.38, 100.0, duration), seed)
        .expect("valid synthetic parameters")
}
