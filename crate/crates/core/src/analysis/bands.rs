//! Band classification of switching currents by deterministic 1-D k-means.

use crate::error::{Error, Result};

/// Joint qubit/TLS state that a band represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BandState {
    /// |0g⟩, upper band.
    ZeroG,
    /// |1g⟩, middle band.
    OneG,
    /// |0e⟩, lower band.
    ZeroE,
}

/// Band centers (descending), decision thresholds and state assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct BandModel {
    pub centers: Vec<f64>,
    /// `thresholds[i]` separates band `i` from band `i + 1`.
    pub thresholds: Vec<f64>,
    pub states: Vec<BandState>,
    /// Events per band.
    pub counts: Vec<usize>,
    /// Standard deviation of the events in each band.
    pub spreads: Vec<f64>,
}

impl BandModel {
    pub fn k(&self) -> usize {
        self.centers.len()
    }

    /// Index of the band an event at `current` belongs to.
    pub fn label(&self, current: f64) -> usize {
        self.thresholds.iter().take_while(|&&t| current < t).count()
    }
}

pub const MIN_EVENTS: usize = 100;
const MAX_ITERATIONS: usize = 1000;

/// Lloyd iterations on sorted data. Clusters are contiguous runs of the
/// sorted sample, so each iteration is a threshold search plus prefix sums.
fn kmeans_sorted(sorted: &[f64], k: usize) -> Result<Vec<(usize, usize)>> {
    let n = sorted.len();
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    for &x in sorted {
        prefix.push(prefix.last().unwrap() + x);
    }
    let mean = |a: usize, b: usize| (prefix[b] - prefix[a]) / (b - a) as f64;
    // ascending centers at the evenly spaced quantiles (i + ½)/k
    let mut centers: Vec<f64> = (0..k)
        .map(|i| sorted[(((i as f64 + 0.5) / k as f64) * n as f64).floor() as usize])
        .collect();
    let mut bounds: Vec<(usize, usize)> = Vec::new();
    for _ in 0..MAX_ITERATIONS {
        let mut cuts = vec![0usize];
        for w in centers.windows(2) {
            let t = 0.5 * (w[0] + w[1]);
            cuts.push(sorted.partition_point(|&x| x < t));
        }
        cuts.push(n);
        let new_bounds: Vec<(usize, usize)> = cuts.windows(2).map(|c| (c[0], c[1])).collect();
        if new_bounds.iter().any(|&(a, b)| a == b) {
            return Err(Error::Degenerate(format!(
                "k-means left a band empty with k = {k}"
            )));
        }
        if new_bounds == bounds {
            break;
        }
        centers = new_bounds.iter().map(|&(a, b)| mean(a, b)).collect();
        bounds = new_bounds;
    }
    Ok(bounds)
}

fn states_for(k: usize) -> Vec<BandState> {
    match k {
        3 => vec![BandState::ZeroG, BandState::OneG, BandState::ZeroE],
        2 => vec![BandState::ZeroG, BandState::OneG],
        _ => vec![BandState::ZeroG],
    }
}

/// Classifies switching currents into `k ∈ {2, 3}` bands.
///
/// Centers start at the evenly spaced sample quantiles, so the result is a
/// function of the multiset of currents only. Centers are returned in
/// descending order; labels index into them.
pub fn classify(currents: &[f64], k: usize) -> Result<(BandModel, Vec<usize>)> {
    if !(2..=3).contains(&k) {
        return Err(Error::invalid("bands", "k must be 2 or 3"));
    }
    if currents.len() < MIN_EVENTS {
        return Err(Error::InsufficientData {
            what: "band classification",
            needed: MIN_EVENTS,
            have: currents.len(),
        });
    }
    if currents.iter().any(|x| !x.is_finite()) {
        return Err(Error::Degenerate("non-finite switching current".into()));
    }
    let mut sorted = currents.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted[0] == sorted[sorted.len() - 1] {
        return Err(Error::Degenerate("all switching currents are identical".into()));
    }
    let bounds = kmeans_sorted(&sorted, k)?;
    let mut centers = Vec::with_capacity(k);
    let mut counts = Vec::with_capacity(k);
    let mut spreads = Vec::with_capacity(k);
    for &(a, b) in bounds.iter().rev() {
        let s = &sorted[a..b];
        let m = s.iter().sum::<f64>() / s.len() as f64;
        let v = s.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / s.len() as f64;
        centers.push(m);
        counts.push(s.len());
        spreads.push(v.sqrt());
    }
    let thresholds: Vec<f64> = centers.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let model = BandModel {
        centers,
        thresholds,
        states: states_for(k),
        counts,
        spreads,
    };
    let labels = currents.iter().map(|&x| model.label(x)).collect();
    Ok((model, labels))
}

/// Why a requested band count was reduced.
#[derive(Debug, Clone, PartialEq)]
pub struct Fallback {
    pub requested: usize,
    pub reason: String,
}

/// Classification with a check that every requested band is real.
#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub model: BandModel,
    pub labels: Vec<usize>,
    pub fallback: Option<Fallback>,
}

/// Smallest share of events a band must hold.
pub const MIN_BAND_FRACTION: f64 = 0.01;

/// Largest allowed fraction of a band pair's events lying within
/// ±(separation / 5) of their threshold.
pub const MAX_BOUNDARY_FRACTION: f64 = 0.13;

/// Checks that adjacent bands are distinct populations rather than one
/// population cut in two.
///
/// A split is accepted when both bands hold at least [`MIN_BAND_FRACTION`]
/// of the events and the neighbourhood of the threshold is sparsely
/// populated: cutting a single unimodal band places the threshold near its
/// mode, where the density is highest.
pub fn degeneracy(currents_sorted: &[f64], model: &BandModel) -> Option<String> {
    let n = currents_sorted.len() as f64;
    for (i, &c) in model.counts.iter().enumerate() {
        if (c as f64) < MIN_BAND_FRACTION * n {
            return Some(format!(
                "band {} holds only {:.2}% of events",
                i,
                100.0 * c as f64 / n
            ));
        }
    }
    for i in 0..model.thresholds.len() {
        let sep = model.centers[i] - model.centers[i + 1];
        let t = model.thresholds[i];
        let half = sep / 5.0;
        let lo = currents_sorted.partition_point(|&x| x < t - half);
        let hi = currents_sorted.partition_point(|&x| x <= t + half);
        let pair = (model.counts[i] + model.counts[i + 1]) as f64;
        let frac = (hi - lo) as f64 / pair;
        if frac > MAX_BOUNDARY_FRACTION {
            return Some(format!(
                "bands {} and {} are not separated ({:.1}% of their events lie within {:.2e} A of the threshold)",
                i,
                i + 1,
                100.0 * frac,
                half
            ));
        }
    }
    None
}

/// Classifies into `k` bands, falling back to `k − 1` when the split is
/// degenerate.
pub fn classify_checked(currents: &[f64], k: usize) -> Result<Classification> {
    let mut sorted = currents.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut fallback: Option<Fallback> = None;
    let mut k_try = k;
    loop {
        let attempt = classify(currents, k_try);
        let reason = match &attempt {
            Ok((model, _)) => degeneracy(&sorted, model),
            Err(Error::Degenerate(msg)) if k_try > 2 => Some(msg.clone()),
            Err(e) => return Err(e.clone()),
        };
        match (attempt, reason) {
            (Ok((model, labels)), None) => {
                return Ok(Classification {
                    model,
                    labels,
                    fallback,
                })
            }
            (Ok((model, labels)), Some(reason)) if k_try == 2 => {
                // Two bands is the floor; report but keep the split.
                let fb = fallback.unwrap_or(Fallback {
                    requested: k,
                    reason: reason.clone(),
                });
                return Ok(Classification {
                    model,
                    labels,
                    fallback: Some(Fallback {
                        requested: fb.requested,
                        reason: format!("{}; two-band split also weak: {reason}", fb.reason),
                    }),
                });
            }
            (_, Some(reason)) => {
                if fallback.is_none() {
                    fallback = Some(Fallback {
                        requested: k,
                        reason,
                    });
                }
                k_try -= 1;
            }
            (Err(e), None) => return Err(e),
        }
    }
}

/// Maps three-band labels to the on/off telegraph: upper and middle are
/// `on` (true), lower is `off`.
pub fn binarize(labels: &[usize], model: &BandModel) -> Result<Vec<bool>> {
    if model.k() != 3 {
        return Err(Error::invalid(
            "bands",
            "binarization needs a three-band classification",
        ));
    }
    Ok(labels
        .iter()
        .map(|&l| model.states[l] != BandState::ZeroE)
        .collect())
}
