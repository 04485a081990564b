//! Post-processing of switching-current trajectories: bands, dwell-time
//! rates, the telegraph spectrum and jump-count statistics.

pub mod bands;
pub mod dwell;
pub mod poisson;
pub mod spectrum;

use crate::error::{Error, Result};
use crate::sweep::Trajectory;
use bands::{binarize, classify_checked, Classification};
use dwell::{extract_dwells, fit_histogram, fit_telegraph, DwellRecord, HistogramFit, TelegraphFit};
use poisson::{poisson_test, PoissonFit, DEFAULT_WINDOW};
use spectrum::{fit_lorentzian, power_spectrum, LorentzianFit, Psd};
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisOptions {
    pub bands: usize,
    /// Poisson window, seconds.
    pub window: f64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            bands: 3,
            window: DEFAULT_WINDOW,
        }
    }
}

/// Products of the on/off stages; present only for three-band data.
#[derive(Debug, Clone)]
pub struct TelegraphAnalysis {
    pub states: Vec<bool>,
    pub dwells: Vec<DwellRecord>,
    /// Mean current of on events minus mean of off events.
    pub kappa: f64,
    pub rates: Result<TelegraphFit>,
    pub on_histogram: Result<HistogramFit>,
    pub off_histogram: Result<HistogramFit>,
    pub psd: Result<Psd>,
    pub lorentzian: Result<LorentzianFit>,
    pub poisson: Result<PoissonFit>,
}

impl TelegraphAnalysis {
    pub fn on_fraction(&self) -> f64 {
        self.states.iter().filter(|&&s| s).count() as f64 / self.states.len() as f64
    }

    /// True when the Lorentzian's `R_on + R_off` lies within the summed
    /// 90% intervals of the dwell fits.
    pub fn lorentzian_consistent(&self) -> Option<bool> {
        let (Ok(r), Ok(l)) = (&self.rates, &self.lorentzian) else {
            return None;
        };
        let (lo, hi) = r.sum_ci();
        Some(lo <= l.sigma && l.sigma <= hi)
    }

    /// First failed stage and its error, if any.
    pub fn first_error(&self) -> Option<(&'static str, &Error)> {
        [
            ("dwell fit", self.rates.as_ref().err()),
            ("on-dwell histogram", self.on_histogram.as_ref().err()),
            ("off-dwell histogram", self.off_histogram.as_ref().err()),
            ("power spectrum", self.psd.as_ref().err()),
            ("Lorentzian fit", self.lorentzian.as_ref().err()),
            ("Poisson", self.poisson.as_ref().err()),
        ]
        .into_iter()
        .find_map(|(stage, e)| e.map(|e| (stage, e)))
    }
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub options: AnalysisOptions,
    pub events: usize,
    pub period: f64,
    pub seed: u64,
    pub digest: String,
    pub classification: Classification,
    pub telegraph: Option<TelegraphAnalysis>,
}

/// Runs classify → binarize → dwell fits → spectrum → Poisson test.
///
/// Classification errors abort. Later stages record their own errors so a
/// partial report can still be written.
pub fn analyze(traj: &Trajectory, options: AnalysisOptions) -> Result<Analysis> {
    let currents = traj.currents();
    let classification = classify_checked(&currents, options.bands)?;
    let telegraph = if classification.model.k() == 3 {
        Some(analyze_telegraph(&currents, &classification, traj.period, options.window)?)
    } else {
        None
    };
    Ok(Analysis {
        options,
        events: traj.len(),
        period: traj.period,
        seed: traj.seed,
        digest: traj.digest.clone(),
        classification,
        telegraph,
    })
}

fn analyze_telegraph(
    currents: &[f64],
    c: &Classification,
    period: f64,
    window: f64,
) -> Result<TelegraphAnalysis> {
    let states = binarize(&c.labels, &c.model)?;
    let (mut s_on, mut n_on, mut s_off, mut n_off) = (0.0, 0usize, 0.0, 0usize);
    for (&x, &on) in currents.iter().zip(&states) {
        if on {
            s_on += x;
            n_on += 1;
        } else {
            s_off += x;
            n_off += 1;
        }
    }
    let kappa = if n_on > 0 && n_off > 0 {
        s_on / n_on as f64 - s_off / n_off as f64
    } else {
        0.0
    };
    let dwells = extract_dwells(&states, period);
    let rates = fit_telegraph(&dwells, period);
    let on_histogram = fit_histogram(&dwell::complete_durations(&dwells, true), period);
    let off_histogram = fit_histogram(&dwell::complete_durations(&dwells, false), period);
    let psd = power_spectrum(&states, period, kappa);
    let lorentzian = match &psd {
        Ok(p) => fit_lorentzian(p),
        Err(e) => Err(e.clone()),
    };
    let poisson = poisson_test(&states, period, window);
    Ok(TelegraphAnalysis {
        states,
        dwells,
        kappa,
        rates,
        on_histogram,
        off_histogram,
        psd,
        lorentzian,
        poisson,
    })
}

fn fmt_err<T>(s: &mut String, key: &str, r: &Result<T>) -> bool {
    if let Err(e) = r {
        let _ = writeln!(s, "{key}.error = {e}");
        false
    } else {
        true
    }
}

impl Analysis {
    /// Structured `key = value` report.
    pub fn report(&self) -> String {
        let mut s = String::new();
        let m = &self.classification.model;
        let _ = writeln!(s, "# qjump analysis");
        let _ = writeln!(s, "source.digest = {}", self.digest);
        let _ = writeln!(s, "source.seed = {}", self.seed);
        let _ = writeln!(s, "events = {}", self.events);
        let _ = writeln!(s, "period_s = {:?}", self.period);
        let _ = writeln!(s, "bands.requested = {}", self.options.bands);
        let _ = writeln!(s, "bands.k = {}", m.k());
        if let Some(fb) = &self.classification.fallback {
            let _ = writeln!(s, "bands.warning = {}", fb.reason);
        }
        for i in 0..m.k() {
            let _ = writeln!(
                s,
                "bands.{i}.state = {:?}\nbands.{i}.center_A = {:.6e}\nbands.{i}.spread_A = {:.3e}\nbands.{i}.count = {}",
                m.states[i], m.centers[i], m.spreads[i], m.counts[i]
            );
        }
        for (i, t) in m.thresholds.iter().enumerate() {
            let _ = writeln!(s, "bands.threshold.{i}_A = {t:.6e}");
        }
        let Some(t) = &self.telegraph else {
            let _ = writeln!(s, "telegraph = skipped (needs three bands)");
            return s;
        };
        let _ = writeln!(s, "telegraph.on_fraction = {:.6}", t.on_fraction());
        let _ = writeln!(s, "telegraph.kappa_A = {:.6e}", t.kappa);
        let complete = t.dwells.iter().filter(|d| !d.censored).count();
        let _ = writeln!(s, "dwell.complete = {complete}");
        if fmt_err(&mut s, "dwell", &t.rates) {
            let r = t.rates.as_ref().unwrap();
            for (name, f) in [("on", &r.on), ("off", &r.off)] {
                let (mid, half) = f.symmetric();
                let _ = writeln!(
                    s,
                    "dwell.{name}.n = {}\ndwell.{name}.rate_per_s = {:.6}\ndwell.{name}.ci90_per_s = [{:.6}, {:.6}]\ndwell.{name}.ci90_mid_pm = {:.6} +- {:.6}",
                    f.n, f.rate, f.ci.0, f.ci.1, mid, half
                );
            }
            let _ = writeln!(s, "dwell.sum_per_s = {:.6}", r.sum());
        }
        for (name, h) in [("on", &t.on_histogram), ("off", &t.off_histogram)] {
            let key = format!("dwell.{name}.histogram");
            if fmt_err(&mut s, &key, h) {
                let h = h.as_ref().unwrap();
                let _ = writeln!(
                    s,
                    "{key}.rate_per_s = {:.6}\n{key}.ci90_per_s = [{:.6}, {:.6}]",
                    h.fit.rate, h.fit.ci.0, h.fit.ci.1
                );
            }
        }
        if fmt_err(&mut s, "psd", &t.psd) {
            let p = t.psd.as_ref().unwrap();
            let _ = writeln!(
                s,
                "psd.resolution_hz = {:.6e}\npsd.segment_len = {}\npsd.variance = {:.6e}\npsd.integral_ac = {:.6e}",
                p.resolution,
                p.segment_len,
                p.variance,
                p.ac_power()
            );
        }
        if fmt_err(&mut s, "lorentzian", &t.lorentzian) {
            let l = t.lorentzian.as_ref().unwrap();
            let _ = writeln!(
                s,
                "lorentzian.sum_rates_per_s = {:.6}\nlorentzian.half_width_hz = {:.6}\nlorentzian.kappa2_A2 = {:.6e}\nlorentzian.white = {:.6e}\nlorentzian.log_residual = {:.4}\nlorentzian.iterations = {}",
                l.sigma, l.half_width(), l.kappa2, l.white, l.residual, l.iterations
            );
            if let Some(ok) = t.lorentzian_consistent() {
                let _ = writeln!(s, "lorentzian.within_dwell_ci = {ok}");
            }
        }
        if fmt_err(&mut s, "poisson", &t.poisson) {
            let p = t.poisson.as_ref().unwrap();
            let _ = writeln!(
                s,
                "poisson.window_s = {:?}\npoisson.windows = {}\npoisson.lambda = {:.6}\npoisson.variance = {:.6}\npoisson.dispersion = {:.4}\npoisson.dispersion_z = {:.3}",
                p.window,
                p.windows,
                p.lambda,
                p.variance,
                p.dispersion(),
                p.dispersion_z()
            );
            match p.chi2 {
                Some((chi2, dof, pv)) => {
                    let _ = writeln!(
                        s,
                        "poisson.chi2 = {chi2:.4}\npoisson.dof = {dof}\npoisson.p_value = {pv:.6}"
                    );
                }
                None => {
                    let _ = writeln!(s, "poisson.p_value = skipped");
                }
            }
        }
        s
    }

    /// CSV tables for plotting, keyed by suggested file stem.
    pub fn tables(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        let mut bands = String::from("band,state,center_A,spread_A,count\n");
        let m = &self.classification.model;
        for i in 0..m.k() {
            let _ = writeln!(
                bands,
                "{i},{:?},{:e},{:e},{}",
                m.states[i], m.centers[i], m.spreads[i], m.counts[i]
            );
        }
        out.push(("bands", bands));
        let Some(t) = &self.telegraph else {
            return out;
        };
        let mut dw = String::from("state,bin_start_s,bin_end_s,count\n");
        for (name, h) in [("on", &t.on_histogram), ("off", &t.off_histogram)] {
            if let Ok(h) = h {
                for (e, c) in h.edges.iter().zip(&h.counts) {
                    let _ = writeln!(dw, "{name},{:e},{:e},{c}", e, e + h.bin_width);
                }
            }
        }
        out.push(("dwell_histogram", dw));
        if let Ok(p) = &t.psd {
            let mut ps = String::from("frequency_hz,power,lorentzian\n");
            let fit = t.lorentzian.as_ref().ok();
            for (f, v) in p.frequency.iter().zip(&p.power) {
                let model = fit.map(|l| l.eval(*f)).unwrap_or(f64::NAN);
                let _ = writeln!(ps, "{f:e},{v:e},{model:e}");
            }
            out.push(("psd", ps));
        }
        if let Ok(p) = &t.poisson {
            let mut ph = String::from("jumps,windows,poisson_expected\n");
            let pois = statrs::distribution::Poisson::new(p.lambda).ok();
            for (mcount, &c) in p.histogram.iter().enumerate() {
                let e = pois
                    .as_ref()
                    .map(|d| {
                        use statrs::distribution::Discrete;
                        d.pmf(mcount as u64) * p.windows as f64
                    })
                    .unwrap_or(f64::NAN);
                let _ = writeln!(ph, "{mcount},{c},{e:e}");
            }
            out.push(("poisson_histogram", ph));
        }
        out
    }
}
