//! Washboard-potential physics of the current-biased junction and the
//! coupling constants derived from it.
//!
//! The cubic approximation of the tilted washboard is used throughout: the
//! small-oscillation plasma frequency, the barrier height, the leading
//! anharmonic correction to the 0→1 spacing, and the ground-state macroscopic
//! quantum tunnelling rate all follow from it.

use crate::constants::{FLUX_QUANTUM, HBAR, TWO_PI};
use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Critical current and capacitance of the junction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JunctionParams {
    /// Critical current I_c in amperes.
    pub critical_current: f64,
    /// Junction capacitance C in farads.
    pub capacitance: f64,
}

impl JunctionParams {
    pub fn new(critical_current: f64, capacitance: f64) -> Result<Self> {
        let j = JunctionParams {
            critical_current,
            capacitance,
        };
        j.validate()?;
        Ok(j)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.critical_current > 0.0) || !self.critical_current.is_finite() {
            return Err(Error::invalid("critical_current", "must be positive"));
        }
        if !(self.capacitance > 0.0) || !self.capacitance.is_finite() {
            return Err(Error::invalid("capacitance", "must be positive"));
        }
        Ok(())
    }

    /// Copy of the junction with its critical current lowered by `shift`.
    fn with_reduced_critical_current(&self, shift: f64) -> Self {
        JunctionParams {
            critical_current: self.critical_current - shift,
            capacitance: self.capacitance,
        }
    }
}

/// The microscopic defect: level spacing and critical-current asymmetry of
/// its two configurations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TlsParams {
    /// Level spacing ω_r in rad/s.
    pub level_spacing: f64,
    /// I_c^A − I_c^B in amperes.
    pub critical_current_asymmetry: f64,
}

impl TlsParams {
    pub fn validate(&self, junction: &JunctionParams) -> Result<()> {
        if !(self.level_spacing > 0.0) || !self.level_spacing.is_finite() {
            return Err(Error::invalid("level_spacing", "must be positive"));
        }
        if !(self.critical_current_asymmetry.abs() < junction.critical_current) {
            return Err(Error::invalid(
                "critical_current_asymmetry",
                "magnitude must be below the critical current",
            ));
        }
        Ok(())
    }
}

/// Microwave drive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveParams {
    /// Drive frequency ω in rad/s.
    pub frequency: f64,
    /// Microwave current amplitude I_m in amperes.
    pub amplitude: f64,
}

impl DriveParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.frequency > 0.0) || !self.frequency.is_finite() {
            return Err(Error::invalid("frequency", "must be positive"));
        }
        if !(self.amplitude >= 0.0) || !self.amplitude.is_finite() {
            return Err(Error::invalid("amplitude", "must be non-negative"));
        }
        Ok(())
    }
}

/// Escape-rate law for the three levels.
///
/// Γ₀ follows the ground-state MQT law
/// `Γ₀ = a (ω_p/2π) exp(−B ΔU/ħω_p)` with `a = √(A · B ΔU/ħω_p)`, where `A`
/// is [`EscapeModel::prefactor`] (120π) and `B` is
/// [`EscapeModel::exponent`] (7.2). The first excited junction level escapes
/// `ratio` times faster; the TLS-excited level sees a critical current
/// lowered by `tls_shift`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EscapeModel {
    pub ratio: f64,
    pub tls_shift: f64,
    pub prefactor: f64,
    pub exponent: f64,
}

impl Default for EscapeModel {
    fn default() -> Self {
        EscapeModel {
            ratio: 500.0,
            tls_shift: 0.0,
            prefactor: 120.0 * PI,
            exponent: 7.2,
        }
    }
}

impl EscapeModel {
    pub fn validate(&self, junction: &JunctionParams) -> Result<()> {
        if !(self.ratio > 1.0) || !self.ratio.is_finite() {
            return Err(Error::invalid("ratio", "must exceed 1"));
        }
        if !(self.tls_shift >= 0.0 && self.tls_shift < junction.critical_current) {
            return Err(Error::invalid(
                "tls_shift",
                "must lie in [0, critical current)",
            ));
        }
        if !(self.prefactor > 0.0) || !(self.exponent > 0.0) {
            return Err(Error::invalid(
                "prefactor/exponent",
                "tunnelling-law constants must be positive",
            ));
        }
        Ok(())
    }
}

/// Escape rates Γ_a, Γ_b, Γ_c of the three levels, in 1/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EscapeRates {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl EscapeRates {
    pub fn max(&self) -> f64 {
        self.a.max(self.b).max(self.c)
    }
}

fn check_bias_open(j: &JunctionParams, bias: f64, quantity: &'static str) -> Result<()> {
    if !(bias >= 0.0) {
        return Err(Error::domain(quantity, bias, "bias must be non-negative"));
    }
    if !(bias < j.critical_current) {
        return Err(Error::domain(
            quantity,
            bias,
            "bias must be below the critical current",
        ));
    }
    Ok(())
}

/// Small-oscillation plasma frequency at bias `bias`, in rad/s.
///
/// `ω_p = √(2π I_c / (Φ₀ C)) · (1 − (I_b/I_c)²)^{1/4}`
pub fn plasma_frequency(j: &JunctionParams, bias: f64) -> Result<f64> {
    check_bias_open(j, bias, "plasma_frequency")?;
    let x = bias / j.critical_current;
    let zero_bias = (TWO_PI * j.critical_current / (FLUX_QUANTUM * j.capacitance)).sqrt();
    Ok(zero_bias * (1.0 - x * x).sqrt().sqrt())
}

/// Cubic-potential barrier height in joules; zero at `bias == I_c`.
pub fn barrier_height(j: &JunctionParams, bias: f64) -> Result<f64> {
    if !(bias >= 0.0 && bias <= j.critical_current) {
        return Err(Error::domain(
            "barrier_height",
            bias,
            "bias must lie in [0, I_c]",
        ));
    }
    let josephson_energy = j.critical_current * FLUX_QUANTUM / TWO_PI;
    let eps = 1.0 - bias / j.critical_current;
    Ok(2.0 * 2f64.sqrt() / 3.0 * josephson_energy * eps * eps.sqrt())
}

/// Ratio ΔU/ħω_p: roughly the number of levels the well holds.
pub fn level_count(j: &JunctionParams, bias: f64) -> Result<f64> {
    let wp = plasma_frequency(j, bias)?;
    let du = barrier_height(j, bias)?;
    Ok(du / (HBAR * wp))
}

/// Qubit 0→1 transition frequency with the leading anharmonic correction,
/// `ω₁₀ = ω_p (1 − 5ħω_p / 36ΔU)`.
pub fn omega_10(j: &JunctionParams, bias: f64) -> Result<f64> {
    let wp = plasma_frequency(j, bias)?;
    let du = barrier_height(j, bias)?;
    let level = HBAR * wp;
    if !(du > level) {
        return Err(Error::ShallowWell {
            bias,
            barrier: du,
            level,
        });
    }
    Ok(wp * (1.0 - 5.0 * level / (36.0 * du)))
}

/// Bias at which [`omega_10`] equals `target` (rad/s), by bisection.
///
/// ω₁₀ decreases monotonically with bias, so the root is unique when it
/// exists inside the range where the well holds a level.
pub fn bias_for_omega_10(j: &JunctionParams, target: f64) -> Result<f64> {
    let mut lo = 0.0;
    let w_lo = omega_10(j, lo)?;
    if target > w_lo {
        return Err(Error::domain(
            "bias_for_omega_10",
            target,
            "target exceeds the zero-bias transition frequency",
        ));
    }
    // Upper end: the largest bias where the well still holds a level.
    let mut hi = j.critical_current;
    let mut inside = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (inside + hi);
        if omega_10(j, mid).is_ok() {
            inside = mid;
        } else {
            hi = mid;
        }
    }
    hi = inside;
    if target < omega_10(j, hi)? {
        return Err(Error::domain(
            "bias_for_omega_10",
            target,
            "target lies below the shallow-well limit",
        ));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if omega_10(j, mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Phase matrix element δ₁₀ = (2π/Φ₀) √(ħ / (2 ω₁₀ C)), dimensionless.
pub fn coupling_delta10(j: &JunctionParams, omega_10: f64) -> Result<f64> {
    if !(omega_10 > 0.0) || !omega_10.is_finite() {
        return Err(Error::domain(
            "coupling_delta10",
            omega_10,
            "transition frequency must be positive",
        ));
    }
    Ok(TWO_PI / FLUX_QUANTUM * (HBAR / (2.0 * omega_10 * j.capacitance)).sqrt())
}

/// TLS coupling Ω_c = ΔI_c Φ₀ δ₁₀ / (4πħ), in rad/s.
pub fn omega_c(tls: &TlsParams, delta10: f64) -> f64 {
    tls.critical_current_asymmetry * FLUX_QUANTUM * delta10 / (4.0 * PI * HBAR)
}

/// Asymmetry ΔI_c that produces the coupling `omega_c` (rad/s).
pub fn asymmetry_for_omega_c(omega_c: f64, delta10: f64) -> f64 {
    omega_c * 4.0 * PI * HBAR / (FLUX_QUANTUM * delta10)
}

/// Microwave coupling Ω_m = Φ₀ δ₁₀ I_m / (2πħ), in rad/s.
pub fn omega_m(drive: &DriveParams, delta10: f64) -> f64 {
    FLUX_QUANTUM * delta10 * drive.amplitude / (TWO_PI * HBAR)
}

/// Drive amplitude I_m that produces the Rabi coupling `omega_m` (rad/s).
pub fn amplitude_for_omega_m(omega_m: f64, delta10: f64) -> f64 {
    omega_m * TWO_PI * HBAR / (FLUX_QUANTUM * delta10)
}

/// Ground-state MQT escape rate Γ₀ in 1/s.
///
/// Returns `f64::INFINITY` at or beyond the critical current, where the
/// barrier is gone.
pub fn ground_escape_rate(j: &JunctionParams, em: &EscapeModel, bias: f64) -> Result<f64> {
    if !(bias >= 0.0) {
        return Err(Error::domain("escape_rate", bias, "bias must be non-negative"));
    }
    if bias >= j.critical_current {
        return Ok(f64::INFINITY);
    }
    let wp = plasma_frequency(j, bias)?;
    let scaled = em.exponent * barrier_height(j, bias)? / (HBAR * wp);
    let a = (em.prefactor * scaled).sqrt();
    Ok(a * wp / TWO_PI * (-scaled).exp())
}

/// Escape rates of |0g⟩, |1g⟩ and |0e⟩ at bias `bias`.
///
/// `Γ_a = Γ₀(I_b)`, `Γ_b = ρ Γ₀(I_b)` and `Γ_c` is Γ₀ for a junction whose
/// critical current is lowered by `em.tls_shift`. With `tls_excited` the
/// lowered critical current applies to the junction levels as well. Γ_c is
/// `f64::INFINITY` once the lowered barrier has vanished.
pub fn escape_rates(
    j: &JunctionParams,
    em: &EscapeModel,
    bias: f64,
    tls_excited: bool,
) -> Result<EscapeRates> {
    check_bias_open(j, bias, "escape_rates")?;
    let shifted = j.with_reduced_critical_current(em.tls_shift);
    let junction_levels = if tls_excited { &shifted } else { j };
    let g0 = ground_escape_rate(junction_levels, em, bias)?;
    let gc = ground_escape_rate(&shifted, em, bias)?;
    Ok(EscapeRates {
        a: g0,
        b: em.ratio * g0,
        c: gc,
    })
}

/// One point of the dressed qubit-TLS spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DressedPoint {
    pub bias: f64,
    /// Bare qubit frequency ω₁₀ at this bias.
    pub omega_10: f64,
    pub lower: f64,
    pub upper: f64,
}

impl DressedPoint {
    pub fn splitting(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Eigenfrequencies of `[[ω₁₀(I_b), Ω_c], [Ω_c, ω_r]]` over a bias grid.
pub fn dressed_spectrum(
    j: &JunctionParams,
    level_spacing: f64,
    omega_c: f64,
    biases: &[f64],
) -> Result<Vec<DressedPoint>> {
    biases
        .iter()
        .map(|&bias| {
            let w10 = omega_10(j, bias)?;
            let mean = 0.5 * (w10 + level_spacing);
            let half = 0.5 * (w10 - level_spacing);
            let root = half.hypot(omega_c);
            Ok(DressedPoint {
                bias,
                omega_10: w10,
                lower: mean - root,
                upper: mean + root,
            })
        })
        .collect()
}

/// Point of smallest branch splitting.
pub fn min_splitting(points: &[DressedPoint]) -> Option<DressedPoint> {
    points
        .iter()
        .copied()
        .min_by(|a, b| a.splitting().total_cmp(&b.splitting()))
}
