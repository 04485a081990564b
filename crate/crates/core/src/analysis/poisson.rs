//! Off→on jump counts in disjoint windows, tested against a Poisson law.

use crate::error::{Error, Result};
use statrs::distribution::{ChiSquared, ContinuousCDF, Discrete, Poisson};

pub const DEFAULT_WINDOW: f64 = 6.0;
pub const MIN_WINDOWS: usize = 50;
pub const MIN_EXPECTED: f64 = 5.0;

#[derive(Debug, Clone, PartialEq)]
pub struct PoissonFit {
    /// Seconds.
    pub window: f64,
    pub windows: usize,
    /// `histogram[m]` = number of windows with `m` jumps.
    pub histogram: Vec<usize>,
    pub lambda: f64,
    pub variance: f64,
    /// Pooled chi-square statistic, degrees of freedom and p-value; `None`
    /// when there are no jumps or too few pooled bins.
    pub chi2: Option<(f64, usize, f64)>,
}

impl PoissonFit {
    pub fn p_value(&self) -> Option<f64> {
        self.chi2.map(|c| c.2)
    }

    /// Variance-to-mean ratio of the counts.
    pub fn dispersion(&self) -> f64 {
        self.variance / self.lambda
    }

    /// Standard error of the dispersion index under a Poisson law.
    pub fn dispersion_sigma(&self) -> f64 {
        (2.0 / (self.windows as f64 - 1.0)).sqrt()
    }

    /// `|dispersion − 1|` in units of [`Self::dispersion_sigma`].
    pub fn dispersion_z(&self) -> f64 {
        (self.dispersion() - 1.0) / self.dispersion_sigma()
    }
}

/// Counts off→on transitions in disjoint windows of `window` seconds and
/// fits a Poisson distribution by its mean.
///
/// A transition between sweeps `i−1` and `i` belongs to the window holding
/// sweep `i`. A trailing partial window is dropped. Bins are pooled from
/// `m = 0` upward until each holds at least [`MIN_EXPECTED`] expected
/// windows; the upper tail forms the last bin. One parameter is estimated,
/// so the test has `bins − 2` degrees of freedom.
pub fn poisson_test(states: &[bool], period: f64, window: f64) -> Result<PoissonFit> {
    if !(window > 0.0 && period > 0.0) {
        return Err(Error::invalid("window", "window and period must be positive"));
    }
    let per = (window / period).round() as usize;
    let windows = if per == 0 { 0 } else { states.len() / per };
    if per == 0 || windows < MIN_WINDOWS {
        return Err(Error::InsufficientData {
            what: "Poisson windows",
            needed: MIN_WINDOWS,
            have: windows,
        });
    }
    let mut counts = vec![0usize; windows];
    for i in 1..windows * per {
        if !states[i - 1] && states[i] {
            counts[i / per] += 1;
        }
    }
    let w = windows as f64;
    let lambda = counts.iter().sum::<usize>() as f64 / w;
    let variance = counts
        .iter()
        .map(|&c| (c as f64 - lambda).powi(2))
        .sum::<f64>()
        / (w - 1.0);
    let max = counts.iter().copied().max().unwrap_or(0);
    let mut histogram = vec![0usize; max + 1];
    for &c in &counts {
        histogram[c] += 1;
    }
    let chi2 = if lambda > 0.0 {
        chi_square(&histogram, lambda, windows)
    } else {
        None
    };
    Ok(PoissonFit {
        window: per as f64 * period,
        windows,
        histogram,
        lambda,
        variance,
        chi2,
    })
}

fn chi_square(histogram: &[usize], lambda: f64, windows: usize) -> Option<(f64, usize, f64)> {
    let pois = Poisson::new(lambda).ok()?;
    let w = windows as f64;
    // (observed, expected) pooled bins; the last bin is the open tail
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut obs, mut exp, mut cum) = (0.0, 0.0, 0.0);
    let mut m = 0u64;
    loop {
        let p = pois.pmf(m);
        obs += histogram.get(m as usize).copied().unwrap_or(0) as f64;
        exp += w * p;
        cum += p;
        m += 1;
        let tail = w * (1.0 - cum).max(0.0);
        if exp >= MIN_EXPECTED {
            bins.push((obs, exp));
            obs = 0.0;
            exp = 0.0;
            if tail < MIN_EXPECTED {
                break;
            }
        }
        if tail < 1e-12 * w && exp == 0.0 {
            break;
        }
    }
    let tail_obs: usize = histogram.iter().skip(m as usize).sum();
    let tail_exp = w * (1.0 - cum).max(0.0);
    let last = bins.last_mut()?;
    last.0 += obs + tail_obs as f64;
    last.1 += exp + tail_exp;
    if bins.len() < 3 {
        return None;
    }
    let stat: f64 = bins.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let dof = bins.len() - 2;
    let p = 1.0 - ChiSquared::new(dof as f64).ok()?.cdf(stat);
    Some((stat, dof, p))
}
