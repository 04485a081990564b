//! Dwell-time extraction and exponential rate fits for the on/off telegraph.

use crate::error::{Error, Result};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// One run of consecutive sweeps in the same telegraph state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DwellRecord {
    pub on: bool,
    /// Seconds; an integer number of sweep periods.
    pub duration: f64,
    pub sweeps: usize,
    pub start_index: usize,
    /// First or last run of the record; its true length is unknown.
    pub censored: bool,
}

/// Run-length encodes the telegraph. The first and last runs are flagged as
/// censored.
pub fn extract_dwells(states: &[bool], period: f64) -> Vec<DwellRecord> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=states.len() {
        if i == states.len() || states[i] != states[start] {
            out.push(DwellRecord {
                on: states[start],
                duration: (i - start) as f64 * period,
                sweeps: i - start,
                start_index: start,
                censored: start == 0 || i == states.len(),
            });
            start = i;
        }
    }
    out
}

/// Complete (uncensored) dwells in one state.
pub fn complete_durations(dwells: &[DwellRecord], on: bool) -> Vec<f64> {
    dwells
        .iter()
        .filter(|d| d.on == on && !d.censored)
        .map(|d| d.duration)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    /// 1/s.
    pub rate: f64,
    /// 90% confidence interval, 1/s.
    pub ci: (f64, f64),
    pub n: usize,
}

impl RateFit {
    pub fn contains(&self, rate: f64) -> bool {
        self.ci.0 <= rate && rate <= self.ci.1
    }

    /// Midpoint and half-width of the interval.
    pub fn symmetric(&self) -> (f64, f64) {
        (0.5 * (self.ci.0 + self.ci.1), 0.5 * (self.ci.1 - self.ci.0))
    }

    fn scaled(&self, s: f64) -> RateFit {
        RateFit {
            rate: self.rate * s,
            ci: (self.ci.0 * s, self.ci.1 * s),
            n: self.n,
        }
    }
}

pub const MIN_DWELLS: usize = 20;
pub const CONFIDENCE: f64 = 0.9;

fn check_durations(durations: &[f64]) -> Result<f64> {
    if durations.len() < MIN_DWELLS {
        return Err(Error::InsufficientData {
            what: "exponential dwell fit",
            needed: MIN_DWELLS,
            have: durations.len(),
        });
    }
    if durations.iter().any(|&d| !(d > 0.0 && d.is_finite())) {
        return Err(Error::Degenerate("dwell durations must be positive".into()));
    }
    Ok(durations.iter().sum())
}

/// Continuum MLE `n / Σd` with the exact chi-square interval.
fn continuum(n: usize, total: f64) -> RateFit {
    let alpha = 1.0 - CONFIDENCE;
    let chi = ChiSquared::new(2.0 * n as f64).expect("positive dof");
    RateFit {
        rate: n as f64 / total,
        ci: (
            chi.inverse_cdf(alpha / 2.0) / (2.0 * total),
            chi.inverse_cdf(1.0 - alpha / 2.0) / (2.0 * total),
        ),
        n,
    }
}

/// Exponential rate from dwell durations.
///
/// With `quantum = Some(T_s)` the durations are treated as counts of
/// sweeps: the per-sweep leaving probability `q = n/Σk` of the geometric
/// distribution is converted to the continuous rate `−ln(1−q)/T_s`, and the
/// chi-square interval is rescaled by the same factor. With `None` the plain
/// continuum estimate is returned.
pub fn fit_exponential(durations: &[f64], quantum: Option<f64>) -> Result<RateFit> {
    let total = check_durations(durations)?;
    let raw = continuum(durations.len(), total);
    match quantum {
        None => Ok(raw),
        Some(t) => {
            let q = raw.rate * t;
            if q >= 1.0 {
                return Err(Error::Degenerate(
                    "every dwell lasts a single sweep; rate is not resolved".into(),
                ));
            }
            Ok(raw.scaled(-(-q).ln_1p() / q))
        }
    }
}

/// Rates of leaving the on and off states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TelegraphFit {
    /// Rate of leaving `on` (inverse mean on-dwell).
    pub on: RateFit,
    /// Rate of leaving `off`.
    pub off: RateFit,
}

impl TelegraphFit {
    pub fn sum(&self) -> f64 {
        self.on.rate + self.off.rate
    }

    /// Interval for `R_on + R_off` from the endpoint sums.
    pub fn sum_ci(&self) -> (f64, f64) {
        (self.on.ci.0 + self.off.ci.0, self.on.ci.1 + self.off.ci.1)
    }
}

/// Joint fit of both rates for a two-state Markov telegraph observed once
/// per sweep.
///
/// Sampling at `T_s` gives per-sweep switching probabilities
/// `q_on = R_on/Σ · (1 − e^{−ΣT_s})` and likewise for `q_off`, with
/// `Σ = R_on + R_off`. The geometric estimates of `q_on`, `q_off` are
/// inverted exactly; each interval is rescaled by its point estimate's
/// correction factor.
pub fn fit_telegraph(dwells: &[DwellRecord], period: f64) -> Result<TelegraphFit> {
    let on_d = complete_durations(dwells, true);
    let off_d = complete_durations(dwells, false);
    let on_raw = continuum(on_d.len(), check_durations(&on_d)?);
    let off_raw = continuum(off_d.len(), check_durations(&off_d)?);
    let q_on = on_raw.rate * period;
    let q_off = off_raw.rate * period;
    let q = q_on + q_off;
    if q >= 1.0 {
        return Err(Error::Degenerate(
            "switching every sweep; telegraph rates are not resolved".into(),
        ));
    }
    let sigma = -(-q).ln_1p() / period;
    let on_rate = sigma * q_on / q;
    let off_rate = sigma * q_off / q;
    Ok(TelegraphFit {
        on: on_raw.scaled(on_rate / on_raw.rate),
        off: off_raw.scaled(off_rate / off_raw.rate),
    })
}

/// Histogram of dwell durations and its log-linear fit.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramFit {
    pub bin_width: f64,
    /// Lower bin edges, seconds.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    pub fit: RateFit,
}

pub const HISTOGRAM_BIN_SWEEPS: f64 = 10.0;

/// Bins durations at `10·T_s` and fits `ln(count) = a − R·t` by weighted
/// least squares (weights = counts) over non-empty bins. The interval is
/// the normal-approximation 90% band of the slope.
pub fn fit_histogram(durations: &[f64], period: f64) -> Result<HistogramFit> {
    check_durations(durations)?;
    let width = HISTOGRAM_BIN_SWEEPS * period;
    let max = durations.iter().cloned().fold(0.0, f64::max);
    let nbins = ((max / width).floor() as usize + 1).max(1);
    let mut counts = vec![0usize; nbins];
    for &d in durations {
        // nudge so exact multiples of the width land in the upper bin
        let b = ((d / width) * (1.0 + 1e-12)).floor() as usize;
        counts[b.min(nbins - 1)] += 1;
    }
    let pts: Vec<(f64, f64, f64)> = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(i, &c)| ((i as f64 + 0.5) * width, (c as f64).ln(), c as f64))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientData {
            what: "histogram dwell fit (non-empty bins)",
            needed: 3,
            have: pts.len(),
        });
    }
    let sw: f64 = pts.iter().map(|p| p.2).sum();
    let mx = pts.iter().map(|p| p.2 * p.0).sum::<f64>() / sw;
    let my = pts.iter().map(|p| p.2 * p.1).sum::<f64>() / sw;
    let sxx: f64 = pts.iter().map(|p| p.2 * (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| p.2 * (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    // With weights equal to counts, each log-count has unit variance times
    // 1/count, so the slope variance is 1/sxx. Inflate by the reduced
    // chi-square when the scatter exceeds the Poisson expectation.
    let dof = (pts.len() - 2) as f64;
    let chi2: f64 = pts
        .iter()
        .map(|p| p.2 * (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let scale = if dof > 0.0 { (chi2 / dof).max(1.0) } else { 1.0 };
    let se = (scale / sxx).sqrt();
    let z = 1.6448536269514722;
    let rate = -slope;
    Ok(HistogramFit {
        bin_width: width,
        edges: (0..nbins).map(|i| i as f64 * width).collect(),
        counts,
        fit: RateFit {
            rate,
            ci: (rate - z * se, rate + z * se),
            n: durations.len(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, Exp};

    #[test]
    fn run_length_examples() {
        assert!(extract_dwells(&[true; 7], 0.01).iter().all(|d| d.censored));
        let d = extract_dwells(&[true, true, false, true], 0.01);
        let complete: Vec<_> = d.iter().filter(|d| !d.censored).collect();
        assert_eq!(complete.len(), 1);
        assert!(!complete[0].on);
        assert_eq!(complete[0].duration, 0.01);
        assert_eq!(complete[0].start_index, 2);
        let alt: Vec<bool> = (0..20).map(|i| i % 2 == 0).collect();
        let d = extract_dwells(&alt, 0.01);
        assert_eq!(d.iter().filter(|d| !d.censored).count(), 18);
        assert!(d.windows(2).all(|w| w[0].on != w[1].on));
        assert!(extract_dwells(&[], 0.01).is_empty());
    }

    #[test]
    fn continuum_fit_on_constant_durations() {
        let f = fit_exponential(&[0.5; 40], None).unwrap();
        assert!((f.rate - 2.0).abs() < 1e-12);
        assert!(f.contains(f.rate));
    }

    #[test]
    fn too_few_dwells() {
        assert!(matches!(
            fit_exponential(&[1.0; 19], None),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn recovers_rate() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let exp = Exp::new(2.38).unwrap();
        let n = 10_000;
        let xs: Vec<f64> = (0..n).map(|_| exp.sample(&mut rng)).collect();
        let f = fit_exponential(&xs, None).unwrap();
        assert!((f.rate / 2.38 - 1.0).abs() < 3.0 / (n as f64).sqrt());
        let h = fit_histogram(&xs, 0.01).unwrap();
        assert!((h.fit.rate / 2.38 - 1.0).abs() < 0.1, "{}", h.fit.rate);
        assert_eq!(h.counts.iter().sum::<usize>(), n);
    }

    #[test]
    fn ci_width_shrinks_as_inverse_sqrt() {
        let widths: Vec<f64> = [100usize, 1000, 10_000]
            .iter()
            .map(|&n| {
                let f = fit_exponential(&vec![1.0; n], None).unwrap();
                f.ci.1 - f.ci.0
            })
            .collect();
        for w in widths.windows(2) {
            let r = w[0] / w[1];
            assert!((r / 10f64.sqrt() - 1.0).abs() < 0.05, "{r}");
        }
    }

    #[test]
    fn geometric_correction_is_exact_in_expectation() {
        // durations k·T with P(k) = q(1−q)^(k−1), q = 1 − e^(−R T)
        let (r, t) = (2.38f64, 0.01f64);
        let q: f64 = 1.0 - (-r * t).exp();
        let mean_k = 1.0 / q;
        let n = 50;
        // a sample whose mean equals the expectation
        let total_k = (mean_k * n as f64).round();
        let mut d = vec![t; n];
        d[0] = (total_k - (n as f64 - 1.0)) * t;
        let f = fit_exponential(&d, Some(t)).unwrap();
        assert!((f.rate / r - 1.0).abs() < 2e-3, "{}", f.rate);
    }

    #[test]
    fn joint_fit_inverts_sampled_chain() {
        let (ron, roff, t) = (0.236f64, 2.38f64, 0.01f64);
        let s = ron + roff;
        let q_on = ron / s * (1.0 - (-s * t).exp());
        let q_off = roff / s * (1.0 - (-s * t).exp());
        let n = 1000;
        let on_sweeps = (1.0 / q_on).round() as usize;
        let off_sweeps = (1.0 / q_off).round() as usize;
        let mut states = Vec::new();
        for _ in 0..n {
            states.extend(std::iter::repeat(true).take(on_sweeps));
            states.extend(std::iter::repeat(false).take(off_sweeps));
        }
        states.push(true);
        let fit = fit_telegraph(&extract_dwells(&states, t), t).unwrap();
        assert!((fit.on.rate / ron - 1.0).abs() < 0.01, "{}", fit.on.rate);
        assert!((fit.off.rate / roff - 1.0).abs() < 0.02, "{}", fit.off.rate);
        assert!(fit.on.contains(fit.on.rate) && fit.off.contains(fit.off.rate));
    }
}
