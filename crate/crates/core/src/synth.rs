//! Synthetic telegraphs with known rates, for validating the analysis chain.

use crate::error::{Error, Result};
use crate::hamiltonian::Level;
use crate::rng::{stream, Domain};
use crate::sweep::{SwitchingEvent, Trajectory};
use rand::Rng;
use rand_distr::{Distribution, Exp, Normal};
use sha2::{Digest, Sha256};

/// Band currents used for the synthetic map, amperes.
pub const UPPER_BAND: f64 = 35.63e-6;
pub const MIDDLE_BAND: f64 = 35.55e-6;
pub const LOWER_BAND: f64 = 35.50e-6;
pub const BAND_NOISE: f64 = 5e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthParams {
    /// Rate of leaving `on`, 1/s.
    pub r_on: f64,
    /// Rate of leaving `off`, 1/s.
    pub r_off: f64,
    /// Sweep (sampling) rate, Hz.
    pub sample_rate: f64,
    /// Seconds.
    pub duration: f64,
    /// Probability that an `on` sample lands in the middle band.
    pub middle_fraction: f64,
    /// Gaussian noise on every current, amperes.
    pub noise: f64,
}

impl SynthParams {
    pub fn new(r_on: f64, r_off: f64, sample_rate: f64, duration: f64) -> Self {
        SynthParams {
            r_on,
            r_off,
            sample_rate,
            duration,
            middle_fraction: 0.5,
            noise: BAND_NOISE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(name, format!("must be positive, got {v}")))
            }
        };
        pos("ron", self.r_on)?;
        pos("roff", self.r_off)?;
        pos("rate", self.sample_rate)?;
        pos("duration", self.duration)?;
        if !(0.0..=1.0).contains(&self.middle_fraction) {
            return Err(Error::invalid("middle_fraction", "must lie in [0, 1]"));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(Error::invalid("noise", "must be non-negative"));
        }
        if self.samples() == 0 {
            return Err(Error::invalid("duration", "shorter than one sample"));
        }
        Ok(())
    }

    pub fn samples(&self) -> usize {
        (self.duration * self.sample_rate).round() as usize
    }

    pub fn period(&self) -> f64 {
        1.0 / self.sample_rate
    }

    /// Content hash of the generator parameters.
    pub fn digest(&self) -> String {
        let text = format!(
            "synth r_on={:?} r_off={:?} rate={:?} duration={:?} middle={:?} noise={:?}",
            self.r_on,
            self.r_off,
            self.sample_rate,
            self.duration,
            self.middle_fraction,
            self.noise
        );
        let h = Sha256::digest(text.as_bytes());
        h[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Samples a continuous-time two-state Markov chain once per period.
///
/// The initial state is drawn from the stationary distribution; dwells are
/// exponential with rate `r_on` in `on` and `r_off` in `off`.
pub fn telegraph_states(p: &SynthParams, seed: u64) -> Result<Vec<bool>> {
    p.validate()?;
    let mut rng = stream(seed, Domain::Synthetic, 0);
    let n = p.samples();
    let t_s = p.period();
    let leave_on = Exp::new(p.r_on).map_err(|e| Error::invalid("ron", e.to_string()))?;
    let leave_off = Exp::new(p.r_off).map_err(|e| Error::invalid("roff", e.to_string()))?;
    let mut on = rng.gen::<f64>() < p.r_off / (p.r_on + p.r_off);
    let mut next_switch = if on {
        leave_on.sample(&mut rng)
    } else {
        leave_off.sample(&mut rng)
    };
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let t = i as f64 * t_s;
        while next_switch <= t {
            on = !on;
            next_switch += if on {
                leave_on.sample(&mut rng)
            } else {
                leave_off.sample(&mut rng)
            };
        }
        out.push(on);
    }
    Ok(out)
}

/// Synthetic trajectory: the sampled telegraph mapped onto the three band
/// currents with Gaussian noise. Escape levels follow the band (upper → a,
/// middle → b, lower → c).
pub fn synthesize(p: &SynthParams, seed: u64) -> Result<Trajectory> {
    let states = telegraph_states(p, seed)?;
    let mut rng = stream(seed, Domain::Synthetic, 1);
    let noise = Normal::new(0.0, p.noise).map_err(|e| Error::invalid("noise", e.to_string()))?;
    let events = states
        .iter()
        .enumerate()
        .map(|(i, &on)| {
            let (center, level) = if !on {
                (LOWER_BAND, Level::C)
            } else if rng.gen::<f64>() < p.middle_fraction {
                (MIDDLE_BAND, Level::B)
            } else {
                (UPPER_BAND, Level::A)
            };
            SwitchingEvent {
                sweep_index: i as u64,
                bias: center + noise.sample(&mut rng),
                level,
                time_in_sweep: 0.0,
                forced: false,
            }
        })
        .collect();
    Ok(Trajectory {
        events,
        period: p.period(),
        seed,
        digest: p.digest(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproducible() {
        let p = SynthParams::new(0.236, 2.38, 100.0, 200.0);
        assert_eq!(synthesize(&p, 4).unwrap(), synthesize(&p, 4).unwrap());
        assert_ne!(
            telegraph_states(&p, 4).unwrap(),
            telegraph_states(&p, 5).unwrap()
        );
    }

    #[test]
    fn fast_off_limit() {
        let p = SynthParams::new(0.236, 1e3, 100.0, 2000.0);
        let s = telegraph_states(&p, 1).unwrap();
        let off = s.iter().filter(|&&x| !x).count() as f64 / s.len() as f64;
        assert!(off < 1e-3, "{off}");
    }

    #[test]
    fn stationary_occupancy() {
        let p = SynthParams::new(0.236, 2.38, 100.0, 10_000.0);
        let s = telegraph_states(&p, 2).unwrap();
        let off = s.iter().filter(|&&x| !x).count() as f64 / s.len() as f64;
        let expected = 0.236 / (0.236 + 2.38);
        assert!((off / expected - 1.0).abs() < 0.1, "{off}");
    }

    #[test]
    fn rejects_bad_rates() {
        let p = SynthParams::new(0.0, 2.38, 100.0, 10.0);
        assert!(synthesize(&p, 0).is_err());
    }
}
