//! Non-Hermitian three-level Hamiltonians over the basis
//! `{|a⟩ = |0g⟩, |b⟩ = |1g⟩, |c⟩ = |0e⟩}` and their time evolution.
//!
//! Matrices are in rad/s. Escape out of the well and relaxation b→a enter as
//! negative imaginary diagonal terms, so the squared norm of an evolving state
//! is its survival probability. Rates are amplitude rates: a level with
//! `−iΓ` on the diagonal loses population at `2Γ`.

use crate::error::{Error, Result};
use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

/// Largest `dt · ‖H‖∞` accepted for a single RK4 substep.
pub const STABILITY_BOUND: f64 = 0.1;

/// Substep target actually used by [`evolve_step`]. RK4 damps a unitary
/// mode by about `(h‖H‖)⁶/72` per substep; at 0.01 that is ~1e-14, far below
/// the norm-conservation tolerance.
pub const SUBSTEP_TARGET: f64 = 0.01;

/// Upper limit on the number of RK4 substeps a single [`evolve_step`] may take.
pub const MAX_SUBSTEPS: usize = 1 << 24;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Frequencies (rad/s) and rates (1/s) that define one Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianSpec {
    pub omega_10: f64,
    pub omega_r: f64,
    /// Drive frequency ω.
    pub omega: f64,
    pub omega_c: f64,
    pub omega_m: f64,
    pub gamma_a: f64,
    pub gamma_b: f64,
    pub gamma_c: f64,
    /// Relaxation b→a.
    pub gamma_ba: f64,
}

impl HamiltonianSpec {
    /// Drive detuning Δ = ω₁₀ − ω.
    pub fn detuning(&self) -> f64 {
        self.omega_10 - self.omega
    }

    /// TLS detuning Δ_r = ω_r − ω₁₀.
    pub fn tls_detuning(&self) -> f64 {
        self.omega_r - self.omega_10
    }

    pub fn validate(&self) -> Result<()> {
        let freqs = [
            ("omega_10", self.omega_10),
            ("omega_r", self.omega_r),
            ("omega", self.omega),
            ("omega_c", self.omega_c),
            ("omega_m", self.omega_m),
        ];
        for (name, v) in freqs {
            if !v.is_finite() {
                return Err(Error::invalid(name, "must be finite"));
            }
        }
        let rates = [
            ("gamma_a", self.gamma_a),
            ("gamma_b", self.gamma_b),
            ("gamma_c", self.gamma_c),
            ("gamma_ba", self.gamma_ba),
        ];
        for (name, v) in rates {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, "must be finite and non-negative"));
            }
        }
        Ok(())
    }

    /// Copy with every escape and relaxation rate set to zero.
    pub fn without_rates(&self) -> Self {
        HamiltonianSpec {
            gamma_a: 0.0,
            gamma_b: 0.0,
            gamma_c: 0.0,
            gamma_ba: 0.0,
            ..*self
        }
    }

    fn decay_diagonal(&self) -> [f64; 3] {
        [self.gamma_a, self.gamma_b + self.gamma_ba, self.gamma_c]
    }
}

/// Reference frame in which a state vector is expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Frame {
    Lab,
    Rotating,
}

/// Amplitudes over `{|a⟩, |b⟩, |c⟩}` at a given time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector {
    pub amplitudes: Vector3<Complex64>,
    pub frame: Frame,
    /// Seconds.
    pub time: f64,
}

impl StateVector {
    pub fn basis(index: usize, frame: Frame) -> Self {
        let mut amplitudes = Vector3::zeros();
        amplitudes[index] = re(1.0);
        StateVector {
            amplitudes,
            frame,
            time: 0.0,
        }
    }

    pub fn new(amplitudes: [Complex64; 3], frame: Frame, time: f64) -> Result<Self> {
        let s = StateVector {
            amplitudes: Vector3::from(amplitudes),
            frame,
            time,
        };
        let n = s.norm_sqr();
        if !(n > 0.0 && n <= 1.0 + 1e-12) {
            return Err(Error::domain(
                "state norm",
                n,
                "squared norm must lie in (0, 1]",
            ));
        }
        Ok(s)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.norm_squared()
    }

    pub fn populations(&self) -> [f64; 3] {
        [
            self.amplitudes[0].norm_sqr(),
            self.amplitudes[1].norm_sqr(),
            self.amplitudes[2].norm_sqr(),
        ]
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm_sqr().sqrt();
        StateVector {
            amplitudes: self.amplitudes / re(n),
            ..*self
        }
    }
}

/// Probabilities accrued over one step, one per decay channel.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ChannelProbabilities {
    pub escape_a: f64,
    pub escape_b: f64,
    pub escape_c: f64,
    pub relax_ba: f64,
}

impl ChannelProbabilities {
    pub fn total(&self) -> f64 {
        self.escape_a + self.escape_b + self.escape_c + self.relax_ba
    }

    pub fn escape_total(&self) -> f64 {
        self.escape_a + self.escape_b + self.escape_c
    }

    /// Instantaneous channel densities `2Γ_i|ψ_i|²` and `2γ_ba|ψ_b|²`.
    fn densities(spec: &HamiltonianSpec, pops: [f64; 3]) -> [f64; 4] {
        [
            2.0 * spec.gamma_a * pops[0],
            2.0 * spec.gamma_b * pops[1],
            2.0 * spec.gamma_c * pops[2],
            2.0 * spec.gamma_ba * pops[1],
        ]
    }

    /// Simpson estimate from start, midpoint and end populations, rescaled so
    /// that the channels exactly partition `loss`.
    fn from_simpson(
        spec: &HamiltonianSpec,
        p0: [f64; 3],
        pm: [f64; 3],
        p1: [f64; 3],
        loss: f64,
    ) -> Self {
        let f0 = Self::densities(spec, p0);
        let fm = Self::densities(spec, pm);
        let f1 = Self::densities(spec, p1);
        let mut w = [0.0; 4];
        for i in 0..4 {
            w[i] = (f0[i] + 4.0 * fm[i] + f1[i]).max(0.0);
        }
        let sum: f64 = w.iter().sum();
        if !(loss > 0.0) || !(sum > 0.0) {
            return ChannelProbabilities::default();
        }
        let s = loss / sum;
        ChannelProbabilities {
            escape_a: w[0] * s,
            escape_b: w[1] * s,
            escape_c: w[2] * s,
            relax_ba: w[3] * s,
        }
    }

    fn accumulate(&mut self, other: &ChannelProbabilities) {
        self.escape_a += other.escape_a;
        self.escape_b += other.escape_b;
        self.escape_c += other.escape_c;
        self.relax_ba += other.relax_ba;
    }
}

/// Decay channels of the three-level system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    EscapeA,
    EscapeB,
    EscapeC,
    RelaxBa,
}

/// Level from which the junction escaped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Level {
    A,
    B,
    C,
}

impl Level {
    pub fn as_char(self) -> char {
        match self {
            Level::A => 'a',
            Level::B => 'b',
            Level::C => 'c',
        }
    }

    pub fn from_char(c: char) -> Option<Level> {
        match c {
            'a' => Some(Level::A),
            'b' => Some(Level::B),
            'c' => Some(Level::C),
            _ => None,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Outcome of applying a quantum jump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JumpOutcome {
    Continue(StateVector),
    Switched(Level),
}

/// Lab-frame Hamiltonian at time `t`.
pub fn build_lab(spec: &HamiltonianSpec, t: f64) -> Matrix3<Complex64> {
    let [da, db, dc] = spec.decay_diagonal();
    let ab = re(spec.omega_c - spec.omega_m * (spec.omega * t).cos());
    let bc = re(-spec.omega_c);
    let zero = re(0.0);
    Matrix3::new(
        -I * da,
        ab,
        zero,
        ab,
        re(spec.omega_10) - I * db,
        bc,
        zero,
        bc,
        re(spec.omega_r) - I * dc,
    )
}

/// Rotating-frame Hamiltonian at time `t`.
pub fn build_rotating(spec: &HamiltonianSpec, t: f64) -> Matrix3<Complex64> {
    let [da, db, dc] = spec.decay_diagonal();
    let delta = spec.detuning();
    let ab = re(-0.5 * spec.omega_m);
    let phase = Complex64::from_polar(1.0, -delta * t);
    let zero = re(0.0);
    Matrix3::new(
        -I * da,
        ab,
        zero,
        ab,
        re(delta) - I * db,
        -spec.omega_c * phase,
        zero,
        -spec.omega_c * phase.conj(),
        re(spec.tls_detuning()) - I * dc,
    )
}

/// Time-independent equivalent of [`build_rotating`].
///
/// Substituting `ψ_c → e^{−iΔt} ψ_c` removes the residual time dependence;
/// the |c⟩ diagonal becomes `ω_r − ω`. Populations are unchanged by this
/// gauge, so this form is used for fast propagation with matrix exponentials.
pub fn build_comoving(spec: &HamiltonianSpec) -> Matrix3<Complex64> {
    let [da, db, dc] = spec.decay_diagonal();
    let ab = re(-0.5 * spec.omega_m);
    let bc = re(-spec.omega_c);
    let zero = re(0.0);
    Matrix3::new(
        -I * da,
        ab,
        zero,
        ab,
        re(spec.detuning()) - I * db,
        bc,
        zero,
        bc,
        re(spec.omega_r - spec.omega) - I * dc,
    )
}

/// Upper bound on ‖H(t)‖∞ valid for every `t` in the given frame.
pub fn norm_bound(spec: &HamiltonianSpec, frame: Frame) -> f64 {
    let [da, db, dc] = spec.decay_diagonal();
    let oc = spec.omega_c.abs();
    match frame {
        Frame::Lab => {
            let ab = oc + spec.omega_m.abs();
            let row_a = da + ab;
            let row_b = spec.omega_10.hypot(db) + ab + oc;
            let row_c = spec.omega_r.hypot(dc) + oc;
            row_a.max(row_b).max(row_c)
        }
        Frame::Rotating => {
            let ab = 0.5 * spec.omega_m.abs();
            let row_a = da + ab;
            let row_b = spec.detuning().hypot(db) + ab + oc;
            let row_c = spec.tls_detuning().hypot(dc) + oc;
            row_a.max(row_b).max(row_c)
        }
    }
}

fn hamiltonian_at(spec: &HamiltonianSpec, frame: Frame, t: f64) -> Matrix3<Complex64> {
    match frame {
        Frame::Lab => build_lab(spec, t),
        Frame::Rotating => build_rotating(spec, t),
    }
}

fn pops(v: &Vector3<Complex64>) -> [f64; 3] {
    [v[0].norm_sqr(), v[1].norm_sqr(), v[2].norm_sqr()]
}

/// Advances `psi` by `dt` with classical RK4, sub-stepping so that every
/// substep satisfies `h · ‖H‖∞ ≤ SUBSTEP_TARGET`.
///
/// Channel probabilities are Simpson integrals of the instantaneous
/// channel densities over each substep (midpoint amplitudes from cubic
/// Hermite interpolation), scaled to partition the exact norm loss.
pub fn evolve_step(
    psi: &StateVector,
    spec: &HamiltonianSpec,
    dt: f64,
) -> Result<(StateVector, ChannelProbabilities)> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::domain("dt", dt, "step must be positive"));
    }
    let bound = norm_bound(spec, psi.frame);
    let needed = (dt * bound / SUBSTEP_TARGET).ceil();
    if !(needed <= MAX_SUBSTEPS as f64) {
        return Err(Error::StepSize {
            dt,
            substeps: if needed.is_finite() {
                needed as usize
            } else {
                usize::MAX
            },
        });
    }
    evolve_substeps(psi, spec, dt, (needed as usize).max(1))
}

/// Advances `psi` by `dt` in exactly `substeps` RK4 steps, without the
/// step-size check of [`evolve_step`]. Used for convergence studies.
pub fn evolve_substeps(
    psi: &StateVector,
    spec: &HamiltonianSpec,
    dt: f64,
    substeps: usize,
) -> Result<(StateVector, ChannelProbabilities)> {
    if !(dt > 0.0) || !dt.is_finite() || substeps == 0 {
        return Err(Error::domain("dt", dt, "step must be positive"));
    }
    let n = substeps;
    let h = dt / n as f64;
    let frame = psi.frame;
    let mut y = psi.amplitudes;
    let mut channels = ChannelProbabilities::default();
    let t0 = psi.time;
    let hc = re(h);
    for k in 0..n {
        let t = t0 + k as f64 * h;
        let h0 = hamiltonian_at(spec, frame, t);
        let hm = hamiltonian_at(spec, frame, t + 0.5 * h);
        let h1 = hamiltonian_at(spec, frame, t + h);
        let k1 = (h0 * y) * (-I);
        let k2 = (hm * (y + k1 * (hc * 0.5))) * (-I);
        let k3 = (hm * (y + k2 * (hc * 0.5))) * (-I);
        let k4 = (h1 * (y + k3 * hc)) * (-I);
        let y1 = y + (k1 + k2 * re(2.0) + k3 * re(2.0) + k4) * (hc / 6.0);
        let d1 = (h1 * y1) * (-I);
        let ymid = (y + y1) * re(0.5) + (k1 - d1) * (hc / 8.0);
        let loss = y.norm_squared() - y1.norm_squared();
        let ch = ChannelProbabilities::from_simpson(spec, pops(&y), pops(&ymid), pops(&y1), loss);
        channels.accumulate(&ch);
        y = y1;
    }
    if y.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite { time: t0 + dt });
    }
    Ok((
        StateVector {
            amplitudes: y,
            frame,
            time: t0 + dt,
        },
        channels,
    ))
}

/// Applies a quantum jump.
///
/// Escapes are terminal. Relaxation b→a collapses onto the junction ground
/// state of whichever TLS configuration carries more weight: |a⟩ unless the
/// |c⟩ population exceeds the combined |a⟩ and |b⟩ population, in which case
/// |c⟩ (the jump operator removes the qubit excitation, not the defect's).
pub fn apply_jump(psi: &StateVector, channel: Channel) -> JumpOutcome {
    match channel {
        Channel::EscapeA => JumpOutcome::Switched(Level::A),
        Channel::EscapeB => JumpOutcome::Switched(Level::B),
        Channel::EscapeC => JumpOutcome::Switched(Level::C),
        Channel::RelaxBa => {
            let p = psi.populations();
            let target = if p[0] + p[1] >= p[2] { 0 } else { 2 };
            let mut s = StateVector::basis(target, psi.frame);
            s.time = psi.time;
            JumpOutcome::Continue(s)
        }
    }
}

/// Exact propagator of the time-independent [`build_comoving`] Hamiltonian
/// over a fixed step, with the half-step propagator kept for the channel
/// midpoint estimate.
#[derive(Debug, Clone)]
pub struct ComovingPropagator {
    half: Matrix3<Complex64>,
    spec: HamiltonianSpec,
}

impl ComovingPropagator {
    pub fn new(spec: &HamiltonianSpec, dt: f64) -> Self {
        let h = build_comoving(spec);
        let half = (h * (-I * (0.5 * dt))).exp();
        ComovingPropagator { half, spec: *spec }
    }

    /// Advances raw amplitudes by one step; returns channel probabilities.
    pub fn step(&self, y: &mut Vector3<Complex64>) -> ChannelProbabilities {
        let ym = self.half * *y;
        let y1 = self.half * ym;
        let loss = y.norm_squared() - y1.norm_squared();
        let ch = ChannelProbabilities::from_simpson(&self.spec, pops(y), pops(&ym), pops(&y1), loss);
        *y = y1;
        ch
    }
}
