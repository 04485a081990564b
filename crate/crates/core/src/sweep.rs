//! Bias-ramp Monte Carlo: one switching event per sweep, with the TLS state
//! carried from sweep to sweep.
//!
//! Each sweep divides the ramp into `N` intervals. Inside an interval the
//! escape rates are frozen at the interval's bias while ω₁₀ follows the ramp
//! in piecewise-constant substeps. The state evolves under the co-moving form
//! of the rotating-frame Hamiltonian (see
//! [`build_comoving`](crate::hamiltonian::build_comoving)) with exact matrix
//! exponentials. Escape is tracked as a decaying survival probability and
//! the interval's switching probability `p` is compared with a fresh uniform
//! `r`. Relaxation b→a is unravelled as a quantum jump.
//!
//! Everything that does not depend on the state (propagators and the
//! population integrals of each substep) is computed once per interval and
//! shared by all sweeps.

use crate::config::{SimulationMode, SystemConfig};
use crate::error::{Error, Result};
use crate::hamiltonian::{build_comoving, Frame, HamiltonianSpec, Level};
use crate::junction::{escape_rates, omega_10, EscapeRates};
use crate::rng::{stream, Domain, Stream};
use nalgebra::{Matrix3, Matrix6, Vector3};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use std::sync::OnceLock;

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "QJUMP_WORKERS";

/// Intervals whose largest `Γ·τ` is below this are candidates for skipping.
pub const FROZEN_RATE_THRESHOLD: f64 = 1e-15;

/// Largest allowed `Γ·τ` per interval. Faster escape empties a level well
/// inside one interval, so larger rates are clamped to this.
pub const MAX_RATE_INTERVAL_PRODUCT: f64 = 50.0;

/// Substep budget per interval.
pub const MAX_SUBSTEPS_PER_INTERVAL: usize = 4096;

/// Fraction of the smallest dressed-level gap that ω₁₀ may move per substep.
pub const ADIABATIC_FRACTION: f64 = 0.1;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Configuration of the defect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TlsState {
    Ground,
    Excited,
}

impl TlsState {
    pub fn as_char(self) -> char {
        match self {
            TlsState::Ground => 'g',
            TlsState::Excited => 'e',
        }
    }
}

/// TLS state together with the sweep that last set it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TlsOccupation {
    pub state: TlsState,
    pub last_update: u64,
}

impl TlsOccupation {
    pub fn ground() -> Self {
        TlsOccupation {
            state: TlsState::Ground,
            last_update: 0,
        }
    }
}

/// One sweep's outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchingEvent {
    pub sweep_index: u64,
    /// Switching current in amperes.
    pub bias: f64,
    pub level: Level,
    /// Seconds since the start of the sweep.
    pub time_in_sweep: f64,
    /// The ramp ended without a switch; the event sits at the last interval.
    pub forced: bool,
}

/// A telegraph record: one event per sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub events: Vec<SwitchingEvent>,
    /// Sweep period in seconds.
    pub period: f64,
    pub seed: u64,
    pub digest: String,
}

impl Trajectory {
    pub fn currents(&self) -> Vec<f64> {
        self.events.iter().map(|e| e.bias).collect()
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

/// A trajectory plus the TLS state after each sweep (before inter-sweep
/// relaxation).
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRun {
    pub trajectory: Trajectory,
    pub tls_after: Vec<TlsState>,
}

/// Result of a single sweep, independent of its index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOutcome {
    pub interval: usize,
    pub bias: f64,
    pub level: Level,
    pub tls_out: TlsState,
    pub forced: bool,
}

struct Substep {
    propagator: Matrix3<Complex64>,
    /// `M_i = ∫ U(s)† P_i U(s) ds`, so `ψ† M_i ψ` integrates |ψ_i|².
    integrals: [Matrix3<Complex64>; 3],
}

enum IntervalPlan {
    /// The Hamiltonian is undefined or escape is certain.
    Certain { rates: EscapeRates },
    Evolve {
        rates: EscapeRates,
        substeps: Vec<Substep>,
    },
}

/// Precomputed ramp for one configuration.
pub struct SweepEngine {
    cfg: SystemConfig,
    omega_c: f64,
    omega_m: f64,
    tau: f64,
    first_active: usize,
    start_g: Vector3<Complex64>,
    start_e: Vector3<Complex64>,
    plans: Vec<OnceLock<Result<IntervalPlan>>>,
}

fn hermitian_gaps(h: &Matrix3<Complex64>) -> f64 {
    let herm = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let mut ev: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    (ev[1] - ev[0]).min(ev[2] - ev[1])
}

/// `U = e^{−iHh}` and the population integrals `∫₀ʰ U† P_i U ds` via the
/// block-triangular exponential `exp([[−A†, P_i], [0, A]] h)`, `A = −iH`.
fn propagate_with_integrals(h: &Matrix3<Complex64>, dt: f64) -> Substep {
    let a = h * (-I);
    let adt = a * Complex64::new(dt, 0.0);
    let propagator = adt.exp();
    let mut integrals = [Matrix3::zeros(); 3];
    let neg_adj = -a.adjoint() * Complex64::new(dt, 0.0);
    for (i, m) in integrals.iter_mut().enumerate() {
        let mut c = Matrix6::<Complex64>::zeros();
        c.fixed_view_mut::<3, 3>(0, 0).copy_from(&neg_adj);
        c.fixed_view_mut::<3, 3>(3, 3).copy_from(&adt);
        c[(i, 3 + i)] = Complex64::new(dt, 0.0);
        let e = c.exp();
        let g: Matrix3<Complex64> = e.fixed_view::<3, 3>(0, 3).into();
        let mut mi = propagator.adjoint() * g;
        // Hermitian by construction; symmetrize rounding noise away.
        mi = (mi + mi.adjoint()) * Complex64::new(0.5, 0.0);
        *m = mi;
    }
    Substep {
        propagator,
        integrals,
    }
}

fn quadratic_form(m: &Matrix3<Complex64>, y: &Vector3<Complex64>) -> f64 {
    (y.adjoint() * m * y)[(0, 0)].re.max(0.0)
}

impl SweepEngine {
    pub fn new(cfg: &SystemConfig) -> Result<Self> {
        cfg.validate()?;
        if cfg.frame == Frame::Lab {
            return Err(Error::invalid(
                "simulation.frame",
                "sweeps run in the rotating frame; the lab frame is for validation only",
            ));
        }
        let k = cfg.couplings()?;
        let tau = cfg.ramp.interval_duration();
        let n = cfg.ramp.intervals;
        let mut engine = SweepEngine {
            cfg: cfg.clone(),
            omega_c: k.omega_c,
            omega_m: k.omega_m,
            tau,
            first_active: 0,
            start_g: Vector3::new(Complex64::new(1.0, 0.0), Complex64::default(), Complex64::default()),
            start_e: Vector3::new(Complex64::default(), Complex64::default(), Complex64::new(1.0, 0.0)),
            plans: (0..n).map(|_| OnceLock::new()).collect(),
        };
        engine.first_active = engine.find_first_active();
        if let Some(w) = engine.omega_10_at(engine.cfg.ramp.bias_at_fraction(
            engine.first_active as f64 / n as f64,
        )) {
            let h = build_comoving(&engine.spec(w, &EscapeRates { a: 0.0, b: 0.0, c: 0.0 }));
            engine.start_g = adiabatic_state(&h, 0);
            engine.start_e = adiabatic_state(&h, 2);
        }
        Ok(engine)
    }

    pub fn config(&self) -> &SystemConfig {
        &self.cfg
    }

    /// First interval that is integrated; earlier intervals leave the
    /// adiabatically dressed initial state unchanged.
    pub fn first_active_interval(&self) -> usize {
        self.first_active
    }

    fn omega_10_at(&self, bias: f64) -> Option<f64> {
        if bias >= self.cfg.junction.critical_current {
            return None;
        }
        omega_10(&self.cfg.junction, bias).ok()
    }

    fn rates_at(&self, bias: f64) -> Option<EscapeRates> {
        if bias >= self.cfg.junction.critical_current {
            return None;
        }
        let r = escape_rates(&self.cfg.junction, &self.cfg.escape, bias, false).ok()?;
        let cap = MAX_RATE_INTERVAL_PRODUCT / self.tau;
        Some(EscapeRates {
            a: r.a.min(cap),
            b: r.b.min(cap),
            c: r.c.min(cap),
        })
    }

    fn spec(&self, w10: f64, rates: &EscapeRates) -> HamiltonianSpec {
        HamiltonianSpec {
            omega_10: w10,
            omega_r: self.cfg.tls.level_spacing,
            omega: self.cfg.drive.frequency,
            omega_c: self.omega_c,
            omega_m: self.omega_m,
            gamma_a: rates.a,
            gamma_b: rates.b,
            gamma_c: rates.c,
            gamma_ba: self.cfg.gamma_ba,
        }
    }

    fn find_first_active(&self) -> usize {
        let window = 10.0 * self.omega_c.abs() + 100.0 * self.omega_m.abs();
        let w = self.cfg.drive.frequency;
        let wr = self.cfg.tls.level_spacing;
        for k in 0..self.cfg.ramp.intervals {
            let lo = self.cfg.ramp.bias_at_fraction(k as f64 / self.cfg.ramp.intervals as f64);
            let hi = self
                .cfg
                .ramp
                .bias_at_fraction((k + 1) as f64 / self.cfg.ramp.intervals as f64);
            let (Some(w_lo), Some(w_hi), Some(r)) =
                (self.omega_10_at(lo), self.omega_10_at(hi), self.rates_at(hi))
            else {
                return k;
            };
            if r.max() * self.tau >= FROZEN_RATE_THRESHOLD {
                return k;
            }
            // ω₁₀ decreases along the ramp, so [w_hi, w_lo] brackets the interval.
            let near = |target: f64| target > w_hi - window && target < w_lo + window;
            if near(w) || near(wr) {
                return k;
            }
        }
        self.cfg.ramp.intervals - 1
    }

    fn plan(&self, k: usize) -> Result<&IntervalPlan> {
        self.plans[k]
            .get_or_init(|| self.build_plan(k))
            .as_ref()
            .map_err(Clone::clone)
    }

    fn build_plan(&self, k: usize) -> Result<IntervalPlan> {
        let ramp = &self.cfg.ramp;
        let n = ramp.intervals as f64;
        let bias = ramp.interval_bias(k);
        let lo = ramp.bias_at_fraction(k as f64 / n);
        let hi = ramp.bias_at_fraction((k + 1) as f64 / n);
        let fallback = EscapeRates {
            a: 1.0,
            b: 1.0,
            c: 1.0,
        };
        let Some(rates) = self.rates_at(bias) else {
            return Ok(IntervalPlan::Certain { rates: fallback });
        };
        let (Some(w_lo), Some(w_mid), Some(w_hi)) = (
            self.omega_10_at(lo),
            self.omega_10_at(bias),
            self.omega_10_at(hi),
        ) else {
            return Ok(IntervalPlan::Certain { rates });
        };
        let gap = [w_lo, w_mid, w_hi]
            .iter()
            .map(|&w| hermitian_gaps(&build_comoving(&self.spec(w, &rates))))
            .fold(f64::INFINITY, f64::min);
        let couplings = [self.omega_c.abs(), 0.5 * self.omega_m.abs()];
        let floor = couplings
            .iter()
            .copied()
            .filter(|&c| c > 0.0)
            .fold(f64::INFINITY, f64::min);
        let n_sub = if floor.is_finite() {
            let g = gap.max(floor);
            ((w_lo - w_hi).abs() / (ADIABATIC_FRACTION * g)).ceil() as usize
        } else {
            1
        }
        .clamp(1, MAX_SUBSTEPS_PER_INTERVAL);
        let h = self.tau / n_sub as f64;
        let mut substeps = Vec::with_capacity(n_sub);
        for j in 0..n_sub {
            let b = ramp.bias_at_fraction((k as f64 + (j as f64 + 0.5) / n_sub as f64) / n);
            let Some(w) = self.omega_10_at(b) else {
                return Ok(IntervalPlan::Certain { rates });
            };
            let hm = build_comoving(&self.spec(w, &rates));
            substeps.push(propagate_with_integrals(&hm, h));
        }
        Ok(IntervalPlan::Evolve { rates, substeps })
    }

    /// Runs one sweep starting from `|0, tls_in⟩`.
    pub fn run_sweep(&self, tls_in: TlsState, rng: &mut Stream) -> Result<SweepOutcome> {
        let mut y = match tls_in {
            TlsState::Ground => self.start_g,
            TlsState::Excited => self.start_e,
        };
        let gamma_ba = self.cfg.gamma_ba;
        let mut relax_threshold: f64 = rng.gen();
        let mut no_relax = 1.0;
        let n = self.cfg.ramp.intervals;
        for k in self.first_active..n {
            let r: f64 = rng.gen();
            match self.plan(k)? {
                IntervalPlan::Certain { rates } => {
                    let p = [
                        y[0].norm_sqr() * rates.a,
                        y[1].norm_sqr() * rates.b,
                        y[2].norm_sqr() * rates.c,
                    ];
                    let level = pick_level(p, r * (p[0] + p[1] + p[2]));
                    return Ok(self.outcome(k, level, &y, false));
                }
                IntervalPlan::Evolve { rates, substeps } => {
                    let mut survival = 1.0;
                    let mut w = [0.0; 3];
                    for s in substeps {
                        let y1 = s.propagator * y;
                        let j = [
                            quadratic_form(&s.integrals[0], &y),
                            quadratic_form(&s.integrals[1], &y),
                            quadratic_form(&s.integrals[2], &y),
                        ];
                        let esc = [
                            2.0 * rates.a * j[0],
                            2.0 * rates.b * j[1],
                            2.0 * rates.c * j[2],
                        ];
                        let esc_total = (esc[0] + esc[1] + esc[2]).min(1.0);
                        for i in 0..3 {
                            w[i] += survival * esc[i];
                        }
                        survival *= 1.0 - esc_total;
                        let relax = 2.0 * gamma_ba * j[1];
                        if esc_total < 1.0 {
                            no_relax *= 1.0 - (relax / (1.0 - esc_total)).min(1.0);
                        }
                        if no_relax < relax_threshold {
                            y = collapse_after_relaxation(&y1);
                            relax_threshold = rng.gen();
                            no_relax = 1.0;
                        } else {
                            let norm = y1.norm();
                            if !(norm > 0.0) || !norm.is_finite() {
                                return Err(Error::NonFinite {
                                    time: (k + 1) as f64 * self.tau,
                                });
                            }
                            y = y1.unscale(norm);
                        }
                    }
                    let p = 1.0 - survival;
                    if p > r {
                        let level = pick_level(w, r);
                        return Ok(self.outcome(k, level, &y, false));
                    }
                }
            }
        }
        Ok(self.outcome(n - 1, Level::A, &y, true))
    }

    fn outcome(&self, k: usize, level: Level, y: &Vector3<Complex64>, forced: bool) -> SweepOutcome {
        let pc = y[2].norm_sqr() / y.norm_squared();
        let tls_out = if level == Level::C || pc > 0.5 {
            TlsState::Excited
        } else {
            TlsState::Ground
        };
        SweepOutcome {
            interval: k,
            bias: self.cfg.ramp.interval_bias(k),
            level,
            tls_out,
            forced,
        }
    }

    fn event(&self, sweep_index: u64, o: &SweepOutcome) -> SwitchingEvent {
        SwitchingEvent {
            sweep_index,
            bias: o.bias,
            level: o.level,
            time_in_sweep: (o.interval as f64 + 0.5) * self.tau,
            forced: o.forced,
        }
    }
}

fn pick_level(weights: [f64; 3], r: f64) -> Level {
    if r < weights[0] {
        Level::A
    } else if r < weights[0] + weights[1] || weights[2] <= 0.0 {
        if weights[1] > 0.0 || weights[2] <= 0.0 {
            Level::B
        } else {
            Level::C
        }
    } else {
        Level::C
    }
}

/// Eigenvector of the Hermitian part of `h` with the largest weight on
/// basis state `index`, phase-fixed so that component is real positive.
fn adiabatic_state(h: &Matrix3<Complex64>, index: usize) -> Vector3<Complex64> {
    let herm = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    let col = (0..3)
        .max_by(|&a, &b| {
            eig.eigenvectors[(index, a)]
                .norm_sqr()
                .total_cmp(&eig.eigenvectors[(index, b)].norm_sqr())
        })
        .expect("three eigenvectors");
    let v: Vector3<Complex64> = eig.eigenvectors.column(col).into();
    let phase = v[index] / Complex64::new(v[index].norm(), 0.0);
    (v / phase).unscale(v.norm())
}

/// Relaxation removes the qubit excitation: the state collapses to the
/// junction ground state of the TLS configuration carrying more weight.
fn collapse_after_relaxation(y: &Vector3<Complex64>) -> Vector3<Complex64> {
    let z = Complex64::default();
    let one = Complex64::new(1.0, 0.0);
    if y[0].norm_sqr() + y[1].norm_sqr() >= y[2].norm_sqr() {
        Vector3::new(one, z, z)
    } else {
        Vector3::new(z, z, one)
    }
}

/// Intra-sweep stream for sweep `sweep_index`.
pub fn sweep_stream(seed: u64, sweep_index: u64) -> Stream {
    stream(seed, Domain::Sweep, sweep_index)
}

/// Whether an excited TLS relaxes in the gap after sweep `sweep_index`.
fn relaxes_between(seed: u64, sweep_index: u64, probability: f64) -> bool {
    let u: f64 = stream(seed, Domain::TlsRelaxation, sweep_index).gen();
    u < probability
}

/// Single-sweep entry point.
pub fn run_sweep(
    engine: &SweepEngine,
    tls_in: TlsOccupation,
    sweep_index: u64,
    seed: u64,
) -> Result<(SwitchingEvent, TlsOccupation)> {
    let mut rng = sweep_stream(seed, sweep_index);
    let o = engine.run_sweep(tls_in.state, &mut rng)?;
    Ok((
        engine.event(sweep_index, &o),
        TlsOccupation {
            state: o.tls_out,
            last_update: sweep_index,
        },
    ))
}

/// Worker count from [`WORKERS_ENV`], or `None` for the rayon default.
pub fn workers_from_env() -> Option<usize> {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&n: &usize| n > 0)
}

fn with_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers.or_else(workers_from_env) {
        b = b.num_threads(n);
    }
    let pool = b
        .build()
        .map_err(|e| Error::invalid("workers", e.to_string()))?;
    Ok(pool.install(f))
}

/// Threads the TLS state through `n_sweeps` full-dynamics sweeps.
///
/// Every sweep is first simulated in parallel as if the TLS were in `g`;
/// a sequential pass then keeps those results where the TLS really was in
/// `g` and recomputes the others from the same per-sweep stream. The result
/// depends only on `(config, seed)`.
pub fn run_trajectory(cfg: &SystemConfig, n_sweeps: usize, seed: u64) -> Result<Trajectory> {
    Ok(run_trajectory_detailed(cfg, n_sweeps, seed, None)?.trajectory)
}

pub fn run_trajectory_detailed(
    cfg: &SystemConfig,
    n_sweeps: usize,
    seed: u64,
    workers: Option<usize>,
) -> Result<TrajectoryRun> {
    if n_sweeps == 0 {
        return Err(Error::invalid("sweeps", "must be at least 1"));
    }
    let engine = SweepEngine::new(cfg)?;
    let ground: Vec<SweepOutcome> = with_pool(workers, || {
        (0..n_sweeps as u64)
            .into_par_iter()
            .map(|i| engine.run_sweep(TlsState::Ground, &mut sweep_stream(seed, i)))
            .collect::<Result<Vec<_>>>()
    })??;
    let p_relax = cfg.inter_sweep_relaxation();
    let mut tls = TlsState::Ground;
    let mut events = Vec::with_capacity(n_sweeps);
    let mut tls_after = Vec::with_capacity(n_sweeps);
    for (i, g) in ground.iter().enumerate() {
        let i = i as u64;
        let o = match tls {
            TlsState::Ground => *g,
            TlsState::Excited => engine.run_sweep(TlsState::Excited, &mut sweep_stream(seed, i))?,
        };
        events.push(engine.event(i, &o));
        tls_after.push(o.tls_out);
        tls = o.tls_out;
        if tls == TlsState::Excited && relaxes_between(seed, i, p_relax) {
            tls = TlsState::Ground;
        }
    }
    Ok(TrajectoryRun {
        trajectory: Trajectory {
            events,
            period: cfg.ramp.period,
            seed,
            digest: cfg.digest(),
        },
        tls_after,
    })
}

/// Empirical sweep outcomes conditioned on the incoming TLS state.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationTable {
    pub from_ground: Vec<SweepOutcome>,
    pub from_excited: Vec<SweepOutcome>,
}

impl CalibrationTable {
    /// Fraction of ground-state sweeps that leave the TLS excited.
    pub fn excitation_probability(&self) -> f64 {
        fraction(&self.from_ground, |o| o.tls_out == TlsState::Excited)
    }

    /// Fraction of excited-state sweeps that leave the TLS excited.
    pub fn retention_probability(&self) -> f64 {
        fraction(&self.from_excited, |o| o.tls_out == TlsState::Excited)
    }
}

fn fraction(v: &[SweepOutcome], f: impl Fn(&SweepOutcome) -> bool) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.iter().filter(|o| f(o)).count() as f64 / v.len() as f64
}

/// Runs `n_per_state` full sweeps from each TLS state.
pub fn calibrate(
    cfg: &SystemConfig,
    n_per_state: usize,
    seed: u64,
    workers: Option<usize>,
) -> Result<CalibrationTable> {
    if n_per_state == 0 {
        return Err(Error::invalid("calibration_sweeps", "must be at least 1"));
    }
    let engine = SweepEngine::new(cfg)?;
    let run = |tls: TlsState, offset: u64| {
        (0..n_per_state as u64)
            .into_par_iter()
            .map(|i| {
                engine.run_sweep(tls, &mut stream(seed, Domain::Calibration, offset + i))
            })
            .collect::<Result<Vec<_>>>()
    };
    let (from_ground, from_excited) = with_pool(workers, || {
        (run(TlsState::Ground, 0), run(TlsState::Excited, 1 << 40))
    })?;
    Ok(CalibrationTable {
        from_ground: from_ground?,
        from_excited: from_excited?,
    })
}

/// Surrogate trajectory: each sweep resamples an outcome from the table row
/// of the incoming TLS state; inter-sweep relaxation is as in full mode.
pub fn run_fast_rate_mode(
    cfg: &SystemConfig,
    n_sweeps: usize,
    seed: u64,
    table: Option<&CalibrationTable>,
) -> Result<TrajectoryRun> {
    let table = table.ok_or(Error::MissingCalibration)?;
    if table.from_ground.is_empty() || table.from_excited.is_empty() {
        return Err(Error::MissingCalibration);
    }
    let tau = cfg.ramp.interval_duration();
    let p_relax = cfg.inter_sweep_relaxation();
    let mut tls = TlsState::Ground;
    let mut events = Vec::with_capacity(n_sweeps);
    let mut tls_after = Vec::with_capacity(n_sweeps);
    for i in 0..n_sweeps as u64 {
        let row = match tls {
            TlsState::Ground => &table.from_ground,
            TlsState::Excited => &table.from_excited,
        };
        let pick = stream(seed, Domain::FastRate, i).gen_range(0..row.len());
        let o = row[pick];
        events.push(SwitchingEvent {
            sweep_index: i,
            bias: o.bias,
            level: o.level,
            time_in_sweep: (o.interval as f64 + 0.5) * tau,
            forced: o.forced,
        });
        tls_after.push(o.tls_out);
        tls = o.tls_out;
        if tls == TlsState::Excited && relaxes_between(seed, i, p_relax) {
            tls = TlsState::Ground;
        }
    }
    Ok(TrajectoryRun {
        trajectory: Trajectory {
            events,
            period: cfg.ramp.period,
            seed,
            digest: cfg.digest(),
        },
        tls_after,
    })
}

/// Runs the configured mode for `cfg.n_sweeps` sweeps with `cfg.seed`.
pub fn simulate(cfg: &SystemConfig, workers: Option<usize>) -> Result<TrajectoryRun> {
    match cfg.mode {
        SimulationMode::Full => run_trajectory_detailed(cfg, cfg.n_sweeps, cfg.seed, workers),
        SimulationMode::FastRate { calibration_sweeps } => {
            let table = calibrate(cfg, calibration_sweeps, cfg.seed, workers)?;
            run_fast_rate_mode(cfg, cfg.n_sweeps, cfg.seed, Some(&table))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick_cfg() -> SystemConfig {
        let mut c = SystemConfig::resonant();
        c.ramp.intervals = 2000;
        c
    }

    #[test]
    fn population_integrals_match_quadrature() {
        let h = Matrix3::new(
            Complex64::new(0.0, -0.3),
            Complex64::new(-0.5, 0.0),
            Complex64::default(),
            Complex64::new(-0.5, 0.0),
            Complex64::new(1.0, -0.7),
            Complex64::new(-2.0, 0.0),
            Complex64::default(),
            Complex64::new(-2.0, 0.0),
            Complex64::new(-1.5, -0.1),
        );
        let dt = 1.7;
        let s = propagate_with_integrals(&h, dt);
        let y = Vector3::new(
            Complex64::new(0.6, 0.0),
            Complex64::new(0.0, 0.8),
            Complex64::default(),
        );
        let n = 20_000;
        let mut acc = [0.0; 3];
        for k in 0..=n {
            let t = dt * k as f64 / n as f64;
            let u = (h * (-I) * Complex64::new(t, 0.0)).exp();
            let v = u * y;
            let wgt = if k == 0 || k == n { 0.5 } else { 1.0 };
            for i in 0..3 {
                acc[i] += wgt * v[i].norm_sqr() * dt / n as f64;
            }
        }
        for i in 0..3 {
            let exact = quadratic_form(&s.integrals[i], &y);
            assert!((exact - acc[i]).abs() < 1e-6, "{i}: {exact} vs {}", acc[i]);
        }
        // d‖ψ‖²/dt = −2 Σ Γ_i |ψ_i|² integrates to the norm loss
        let loss = 1.0 - (s.propagator * y).norm_squared();
        let predicted = 2.0 * (0.3 * acc[0] + 0.7 * acc[1] + 0.1 * acc[2]);
        assert!((loss - predicted).abs() < 1e-6);
    }

    #[test]
    fn zero_drive_escapes_from_ground() {
        let mut c = quick_cfg();
        c.drive.amplitude = 0.0;
        let engine = SweepEngine::new(&c).unwrap();
        for i in 0..20 {
            let o = engine
                .run_sweep(TlsState::Ground, &mut sweep_stream(3, i))
                .unwrap();
            assert_eq!(o.level, Level::A);
            assert_eq!(o.tls_out, TlsState::Ground);
            assert!(!o.forced);
        }
    }

    #[test]
    fn deterministic_across_workers() {
        let c = quick_cfg();
        let a = run_trajectory_detailed(&c, 24, 11, Some(1)).unwrap();
        let b = run_trajectory_detailed(&c, 24, 11, Some(3)).unwrap();
        assert_eq!(a, b);
        let single = run_sweep(
            &SweepEngine::new(&c).unwrap(),
            TlsOccupation::ground(),
            0,
            11,
        )
        .unwrap()
        .0;
        assert_eq!(single, a.trajectory.events[0]);
    }

    #[test]
    fn lab_frame_rejected() {
        let mut c = quick_cfg();
        c.frame = Frame::Lab;
        assert!(SweepEngine::new(&c).is_err());
    }

    #[test]
    fn fast_mode_requires_table() {
        let c = quick_cfg();
        assert_eq!(
            run_fast_rate_mode(&c, 10, 1, None).unwrap_err(),
            Error::MissingCalibration
        );
    }

    #[test]
    fn pick_level_partitions() {
        let w = [0.1, 0.2, 0.3];
        assert_eq!(pick_level(w, 0.05), Level::A);
        assert_eq!(pick_level(w, 0.25), Level::B);
        assert_eq!(pick_level(w, 0.55), Level::C);
    }
}
