//! Quantum-jump simulation of a current-biased phase qubit coupled to one
//! two-level defect, with the telegraph analysis that goes with it.
//!
//! The pipeline runs in four stages:
//!
//! 1. [`junction`]: single-junction physics (plasma frequency, barrier, level
//!    spacing, escape rates, couplings).
//! 2. [`hamiltonian`]: the three-level effective Hamiltonian and its
//!    non-unitary integration.
//! 3. [`sweep`]: bias-ramp Monte Carlo producing one switching event per sweep.
//! 4. [`analysis`]: bands, dwell-time rates, spectrum and jump statistics.
//!
//! Configuration parsing lives in [`config`], file formats in [`io`], and
//! synthetic oracle telegraphs in [`synth`].

pub mod analysis;
pub mod config;
pub mod constants;
pub mod error;
pub mod hamiltonian;
pub mod io;
pub mod junction;
pub mod rng;
pub mod sweep;
pub mod synth;

pub use analysis::bands::{binarize, classify, classify_checked, BandModel, BandState};
pub use analysis::dwell::{extract_dwells, fit_exponential, fit_telegraph, DwellRecord, RateFit};
pub use analysis::poisson::{poisson_test, PoissonFit};
pub use analysis::spectrum::{fit_lorentzian, power_spectrum, LorentzianFit, Psd};
pub use analysis::{analyze, Analysis, AnalysisOptions};
pub use config::{parse_config, RampConfig, SimulationMode, SystemConfig};
pub use error::{Error, Result};
pub use hamiltonian::{ChannelProbabilities, Frame, HamiltonianSpec, Level, StateVector};
pub use junction::{DriveParams, EscapeModel, JunctionParams, TlsParams};
pub use rng::{rng_stream, Domain};
pub use sweep::{
    run_fast_rate_mode, run_trajectory, simulate, CalibrationTable, SwitchingEvent, TlsOccupation,
    TlsState, Trajectory,
};
pub use synth::{synthesize, SynthParams};
