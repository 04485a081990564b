//! Welch power spectrum of the coded telegraph and Lorentzian fitting.

use crate::constants::TWO_PI;
use crate::error::{Error, Result};
use num_complex::Complex64;
use rustfft::FftPlanner;

pub const MIN_SAMPLES: usize = 1 << 10;
pub const WELCH_SEGMENTS: usize = 8;

/// One-sided power spectral density.
#[derive(Debug, Clone, PartialEq)]
pub struct Psd {
    /// Hz, from 0 to Nyquist.
    pub frequency: Vec<f64>,
    /// Signal units squared per Hz.
    pub power: Vec<f64>,
    /// Bin spacing, Hz.
    pub resolution: f64,
    pub sample_rate: f64,
    pub segment_len: usize,
    pub mean: f64,
    pub variance: f64,
    /// Coding amplitude; zero when the PSD was built from a raw signal.
    pub kappa: f64,
    /// Equivalent chi-square degrees of freedom of one bin; infinite for
    /// noise-free spectra.
    pub dof: f64,
}

impl Psd {
    /// `Σ P·Δf` over all bins except DC.
    pub fn ac_power(&self) -> f64 {
        self.power[1..].iter().sum::<f64>() * self.resolution
    }

    /// `Σ P·Δf` over all bins.
    pub fn total_power(&self) -> f64 {
        self.power.iter().sum::<f64>() * self.resolution
    }
}

/// Power correlation between Hann segments at 50% overlap.
const SEGMENT_OVERLAP_CORRELATION: f64 = 0.1667 * 0.1667;
/// Power correlation between neighbouring Hann frequency bins at lags 1, 2.
const BIN_CORRELATION: [f64; 2] = [4.0 / 9.0, 1.0 / 36.0];

fn welch_dof(segments: usize) -> f64 {
    let k = segments as f64;
    2.0 * k / (1.0 + 2.0 * SEGMENT_OVERLAP_CORRELATION * (k - 1.0) / k)
}

fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (TWO_PI * i as f64 / n as f64).cos())
        .collect()
}

/// Welch estimate with [`WELCH_SEGMENTS`] Hann-windowed segments at 50%
/// overlap spanning the record.
///
/// Each segment has its window-weighted mean removed, so the non-DC bins
/// integrate to the variance. The DC bin carries the squared record mean
/// divided by the resolution, which puts all of a constant signal's power
/// at f = 0.
pub fn welch(signal: &[f64], sample_rate: f64) -> Result<Psd> {
    let n = signal.len();
    if n < MIN_SAMPLES {
        return Err(Error::InsufficientData {
            what: "power spectrum samples",
            needed: MIN_SAMPLES,
            have: n,
        });
    }
    if !(sample_rate > 0.0 && sample_rate.is_finite()) {
        return Err(Error::invalid("sample_rate", "must be positive"));
    }
    if signal.iter().any(|x| !x.is_finite()) {
        return Err(Error::Degenerate("non-finite sample in signal".into()));
    }
    let seg = 2 * n / (WELCH_SEGMENTS + 1);
    let step = seg / 2;
    let w = hann(seg);
    let wsum: f64 = w.iter().sum();
    let u: f64 = w.iter().map(|x| x * x).sum();
    let fft = FftPlanner::new().plan_fft_forward(seg);
    let half = seg / 2;
    let mut acc = vec![0.0; half + 1];
    let mut buf = vec![Complex64::new(0.0, 0.0); seg];
    for s in 0..WELCH_SEGMENTS {
        let x = &signal[s * step..s * step + seg];
        let m = x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / wsum;
        for i in 0..seg {
            buf[i] = Complex64::new((x[i] - m) * w[i], 0.0);
        }
        fft.process(&mut buf);
        for (k, a) in acc.iter_mut().enumerate() {
            *a += buf[k].norm_sqr();
        }
    }
    let df = sample_rate / seg as f64;
    let norm = 1.0 / (WELCH_SEGMENTS as f64 * sample_rate * u);
    let mut power: Vec<f64> = acc
        .iter()
        .enumerate()
        .map(|(k, a)| {
            let one_sided = if k == 0 || (seg % 2 == 0 && k == half) {
                1.0
            } else {
                2.0
            };
            one_sided * a * norm
        })
        .collect();
    let mean = signal.iter().sum::<f64>() / n as f64;
    let variance = signal.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
    power[0] = mean * mean / df;
    Ok(Psd {
        frequency: (0..=half).map(|k| k as f64 * df).collect(),
        power,
        resolution: df,
        sample_rate,
        segment_len: seg,
        mean,
        variance,
        kappa: 0.0,
        dof: welch_dof(WELCH_SEGMENTS),
    })
}

/// Spectrum of the telegraph coded as `+κ/2` (on) and `−κ/2` (off).
pub fn power_spectrum(states: &[bool], period: f64, kappa: f64) -> Result<Psd> {
    let half = 0.5 * kappa;
    let x: Vec<f64> = states.iter().map(|&s| if s { half } else { -half }).collect();
    let mut psd = welch(&x, 1.0 / period)?;
    psd.kappa = kappa;
    Ok(psd)
}

/// `S(f) = A / ((2πf)² + Σ²) + W`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzianFit {
    pub amplitude: f64,
    /// `R_on + R_off`, 1/s.
    pub sigma: f64,
    pub white: f64,
    /// Telegraph step size squared implied by the amplitude, or NaN when
    /// the PSD carries no coding information.
    pub kappa2: f64,
    /// RMS residual in natural-log power.
    pub residual: f64,
    pub iterations: usize,
    pub bins: usize,
}

impl LorentzianFit {
    /// Half-width in Hz.
    pub fn half_width(&self) -> f64 {
        self.sigma / TWO_PI
    }

    pub fn eval(&self, f: f64) -> f64 {
        lorentzian(self.amplitude, self.sigma, self.white, f)
    }
}

pub fn lorentzian(amplitude: f64, sigma: f64, white: f64, f: f64) -> f64 {
    let w = TWO_PI * f;
    amplitude / (w * w + sigma * sigma) + white
}

/// Bins per decade for the log-frequency grid.
pub const BINS_PER_DECADE: f64 = 20.0;
/// Fraction of the sample rate above which bins are ignored; the sampled
/// telegraph departs from a Lorentzian near Nyquist.
pub const FIT_BAND: f64 = 0.1;
pub const MAX_ITERATIONS: usize = 200;

struct Bin {
    members: Vec<f64>,
    log_power: f64,
}

/// `E[ln X̄] = ln μ + ψ(k) − ln k` for a Gamma-distributed mean of shape
/// `k`; returns the amount to add back.
fn log_bias(psd: &Psd, members: usize) -> f64 {
    if !psd.dof.is_finite() {
        return 0.0;
    }
    let m = members as f64;
    let mut denom = 1.0;
    for (l, r) in BIN_CORRELATION.iter().enumerate() {
        let lag = (l + 1) as f64;
        if lag < m {
            denom += 2.0 * (1.0 - lag / m) * r;
        }
    }
    let k = 0.5 * psd.dof * m / denom;
    k.ln() - statrs::function::gamma::digamma(k)
}

fn log_bins(psd: &Psd) -> Vec<Bin> {
    let f_max = FIT_BAND * psd.sample_rate;
    let f_min = psd.frequency[1];
    let mut bins: Vec<Bin> = Vec::new();
    let mut current: Vec<(f64, f64)> = Vec::new();
    let mut edge = f_min * 10f64.powf(1.0 / BINS_PER_DECADE);
    let flush = |cur: &mut Vec<(f64, f64)>, bins: &mut Vec<Bin>| {
        if !cur.is_empty() {
            let p = cur.iter().map(|x| x.1).sum::<f64>() / cur.len() as f64;
            if p > 0.0 {
                bins.push(Bin {
                    members: cur.iter().map(|x| x.0).collect(),
                    log_power: p.ln() + log_bias(psd, cur.len()),
                });
            }
            cur.clear();
        }
    };
    for (&f, &p) in psd.frequency.iter().zip(&psd.power).skip(1) {
        if f > f_max {
            break;
        }
        while f >= edge {
            flush(&mut current, &mut bins);
            edge *= 10f64.powf(1.0 / BINS_PER_DECADE);
        }
        current.push((f, p));
    }
    flush(&mut current, &mut bins);
    bins
}

/// Model mean over a bin's members and its log-derivatives with respect to
/// (ln A, ln Σ, ln W).
fn bin_model(bin: &Bin, p: &[f64; 3]) -> (f64, [f64; 3]) {
    let (a, s, w) = (p[0].exp(), p[1].exp(), p[2].exp());
    let mut m = 0.0;
    let mut d = [0.0; 3];
    for &f in &bin.members {
        let om = TWO_PI * f;
        let den = om * om + s * s;
        let l = a / den;
        m += l + w;
        d[0] += l;
        d[1] += -2.0 * s * s * l / den;
        d[2] += w;
    }
    let k = bin.members.len() as f64;
    m /= k;
    (m, [d[0] / k / m, d[1] / k / m, d[2] / k / m])
}

fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let m = nalgebra::Matrix3::from_fn(|i, j| a[i][j]);
    let v = nalgebra::Vector3::from_column_slice(&b);
    m.lu().solve(&v).map(|x| [x[0], x[1], x[2]])
}

/// Levenberg-Marquardt fit of a Lorentzian plus white floor in log power.
///
/// The PSD is averaged over log-spaced frequency bins up to
/// `FIT_BAND · sample_rate`, and the model is averaged over the same bin
/// members, so exact Lorentzian input is reproduced exactly.
pub fn fit_lorentzian(psd: &Psd) -> Result<LorentzianFit> {
    let bins = log_bins(psd);
    if bins.len() < 6 {
        return Err(Error::InsufficientData {
            what: "log-frequency bins for the Lorentzian fit",
            needed: 6,
            have: bins.len(),
        });
    }
    // initial guess: plateau from the lowest bins, corner at half plateau
    let plateau = bins[..3].iter().map(|b| b.log_power).sum::<f64>() / 3.0;
    let floor = bins[bins.len() - 1].log_power;
    let corner = bins
        .iter()
        .find(|b| b.log_power < plateau - std::f64::consts::LN_2)
        .map(|b| b.members[0])
        .unwrap_or(bins[bins.len() / 2].members[0]);
    let s0 = TWO_PI * corner;
    let mut p = [plateau + 2.0 * s0.ln(), s0.ln(), floor - 3.0];
    let lo_w = plateau - 60.0;

    let cost = |p: &[f64; 3]| -> f64 {
        bins.iter()
            .map(|b| (b.log_power - bin_model(b, p).0.ln()).powi(2))
            .sum()
    };
    let mut c = cost(&p);
    let mut lambda = 1e-3;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut jtj = [[0.0; 3]; 3];
        let mut jtr = [0.0; 3];
        for b in &bins {
            let (m, d) = bin_model(b, &p);
            let r = b.log_power - m.ln();
            for i in 0..3 {
                jtr[i] += d[i] * r;
                for j in 0..3 {
                    jtj[i][j] += d[i] * d[j];
                }
            }
        }
        let mut stepped = false;
        for _ in 0..30 {
            let mut a = jtj;
            for (i, row) in a.iter_mut().enumerate() {
                row[i] += lambda * (jtj[i][i] + 1e-12);
            }
            let Some(dp) = solve3(a, jtr) else {
                lambda *= 10.0;
                continue;
            };
            let mut trial = [p[0] + dp[0], p[1] + dp[1], p[2] + dp[2]];
            trial[2] = trial[2].max(lo_w);
            let ct = cost(&trial);
            if ct.is_finite() && ct <= c {
                let rel = (c - ct) / c.max(1e-300);
                let step = dp.iter().map(|x| x.abs()).fold(0.0, f64::max);
                p = trial;
                c = ct;
                lambda = (lambda * 0.3).max(1e-12);
                stepped = true;
                if rel < 1e-14 || step < 1e-12 || c < 1e-28 {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if !stepped {
            // no downhill step at any damping: a stationary point
            converged = true;
        }
        if converged {
            break;
        }
    }
    let residual = (c / bins.len() as f64).sqrt();
    if !converged || !p.iter().all(|x| x.is_finite()) {
        return Err(Error::NonConvergence {
            iterations,
            residual,
        });
    }
    let (amplitude, sigma) = (p[0].exp(), p[1].exp());
    let white = if p[2] <= lo_w { 0.0 } else { p[2].exp() };
    // variance of ±κ/2 coding is κ²·p_on·p_off
    let kappa2 = if psd.kappa > 0.0 && psd.variance > 0.0 {
        let pp = psd.variance / (psd.kappa * psd.kappa);
        amplitude / (4.0 * sigma * pp)
    } else {
        f64::NAN
    };
    Ok(LorentzianFit {
        amplitude,
        sigma,
        white,
        kappa2,
        residual,
        iterations,
        bins: bins.len(),
    })
}
