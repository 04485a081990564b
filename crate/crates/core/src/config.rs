//! Run configuration: a sectioned `key = value unit` text format.
//!
//! Every dimensional value must carry a unit; values are converted to SI on
//! parse. [`SystemConfig::to_canonical`] writes SI values with shortest
//! round-trip float formatting, so parse → serialize → parse is exact.
//!
//! ```text
//! [junction]
//! critical_current = 36 uA
//! capacitance = 5 pF
//!
//! [tls]
//! omega_r = 8.7 GHz
//! coupling = 200 MHz        # or: asymmetry = 17.4 nA
//! lifetime = 0.42 s
//!
//! [drive]
//! omega = 9.02 GHz
//! rabi = 2 MHz              # or: amplitude = 0.087 nA
//! ```

use crate::constants::TWO_PI;
use crate::error::{Error, Result};
use crate::hamiltonian::Frame;
use crate::junction::{
    amplitude_for_omega_m, asymmetry_for_omega_c, coupling_delta10, omega_c, omega_m,
    DriveParams, EscapeModel, JunctionParams, TlsParams,
};
use sha2::{Digest, Sha256};
use std::collections::{BTreeMap, HashMap};

/// Saw-tooth bias ramp.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RampConfig {
    /// Amperes.
    pub start: f64,
    /// Amperes; may exceed the critical current.
    pub end: f64,
    /// Sweep period T_s in seconds.
    pub period: f64,
    /// Intervals per sweep.
    pub intervals: usize,
}

impl RampConfig {
    pub const MIN_INTERVALS: usize = 1000;

    pub fn validate(&self) -> Result<()> {
        if !(self.start >= 0.0 && self.start < self.end) || !self.end.is_finite() {
            return Err(Error::invalid("ramp.start", "ramp must satisfy 0 <= start < end"));
        }
        if !(self.period > 0.0) || !self.period.is_finite() {
            return Err(Error::invalid("ramp.period", "must be positive"));
        }
        if self.intervals < Self::MIN_INTERVALS {
            return Err(Error::invalid(
                "ramp.intervals",
                format!("must be at least {}", Self::MIN_INTERVALS),
            ));
        }
        Ok(())
    }

    /// Duration of one interval.
    pub fn interval_duration(&self) -> f64 {
        self.period / self.intervals as f64
    }

    /// Bias at the midpoint of interval `k`.
    pub fn interval_bias(&self, k: usize) -> f64 {
        self.bias_at_fraction((k as f64 + 0.5) / self.intervals as f64)
    }

    /// Bias at fraction `x ∈ [0, 1]` of the sweep.
    pub fn bias_at_fraction(&self, x: f64) -> f64 {
        self.start + (self.end - self.start) * x
    }
}

/// Full-dynamics or calibrated surrogate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimulationMode {
    Full,
    /// Resample sweep outcomes from a table built by `calibration_sweeps`
    /// full-dynamics sweeps per TLS state.
    FastRate { calibration_sweeps: usize },
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub junction: JunctionParams,
    pub tls: TlsParams,
    pub drive: DriveParams,
    pub escape: EscapeModel,
    pub ramp: RampConfig,
    /// Amplitude relaxation rate b→a in 1/s.
    pub gamma_ba: f64,
    /// Lifetime of the TLS excited state between sweeps, seconds.
    pub tls_lifetime: f64,
    /// Qubit frequency (rad/s) at which δ₁₀, and hence Ω_c and Ω_m, are
    /// evaluated.
    pub reference_omega_10: f64,
    pub frame: Frame,
    pub mode: SimulationMode,
    pub seed: u64,
    pub n_sweeps: usize,
}

/// Couplings derived from a configuration, in rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Couplings {
    pub delta10: f64,
    pub omega_c: f64,
    pub omega_m: f64,
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        self.junction.validate()?;
        self.tls.validate(&self.junction)?;
        self.drive.validate()?;
        self.escape.validate(&self.junction)?;
        self.ramp.validate()?;
        if !(self.gamma_ba >= 0.0) || !self.gamma_ba.is_finite() {
            return Err(Error::invalid("gamma_ba", "must be non-negative"));
        }
        if !(self.tls_lifetime > 0.0) {
            return Err(Error::invalid("tls.lifetime", "must be positive"));
        }
        if !(self.reference_omega_10 > 0.0) || !self.reference_omega_10.is_finite() {
            return Err(Error::invalid("drive.reference", "must be positive"));
        }
        if self.n_sweeps == 0 {
            return Err(Error::invalid("simulation.sweeps", "must be at least 1"));
        }
        if let SimulationMode::FastRate { calibration_sweeps } = self.mode {
            if calibration_sweeps == 0 {
                return Err(Error::invalid(
                    "simulation.calibration_sweeps",
                    "must be at least 1",
                ));
            }
        }
        Ok(())
    }

    pub fn couplings(&self) -> Result<Couplings> {
        let delta10 = coupling_delta10(&self.junction, self.reference_omega_10)?;
        Ok(Couplings {
            delta10,
            omega_c: omega_c(&self.tls, delta10),
            omega_m: omega_m(&self.drive, delta10),
        })
    }

    /// Probability that an excited TLS relaxes between two sweeps.
    pub fn inter_sweep_relaxation(&self) -> f64 {
        -(-self.ramp.period / self.tls_lifetime).exp_m1()
    }

    /// The parameter set used throughout the documentation and tests.
    pub fn resonant() -> Self {
        parse_config(RESONANT_CONFIG).expect("shipped configuration parses")
    }

    /// Canonical text form: fixed section and key order, SI units.
    pub fn to_canonical(&self) -> String {
        let mut out = String::new();
        for (section, entries) in self.entries() {
            out.push('[');
            out.push_str(section);
            out.push_str("]\n");
            for (k, v) in entries {
                out.push_str(&format!("{k} = {v}\n"));
            }
            out.push('\n');
        }
        out
    }

    fn entries(&self) -> Vec<(&'static str, Vec<(&'static str, String)>)> {
        let f = |x: f64, unit: &str| format!("{x:?} {unit}");
        let mut sim = vec![
            (
                "frame",
                match self.frame {
                    Frame::Lab => "lab".to_string(),
                    Frame::Rotating => "rotating".to_string(),
                },
            ),
            (
                "mode",
                match self.mode {
                    SimulationMode::Full => "full".to_string(),
                    SimulationMode::FastRate { .. } => "fast".to_string(),
                },
            ),
        ];
        if let SimulationMode::FastRate { calibration_sweeps } = self.mode {
            sim.push(("calibration_sweeps", calibration_sweeps.to_string()));
        }
        sim.push(("seed", self.seed.to_string()));
        sim.push(("sweeps", self.n_sweeps.to_string()));
        vec![
            (
                "junction",
                vec![
                    ("critical_current", f(self.junction.critical_current, "A")),
                    ("capacitance", f(self.junction.capacitance, "F")),
                ],
            ),
            (
                "tls",
                vec![
                    ("omega_r", f(self.tls.level_spacing, "rad/s")),
                    ("asymmetry", f(self.tls.critical_current_asymmetry, "A")),
                    ("lifetime", f(self.tls_lifetime, "s")),
                ],
            ),
            (
                "drive",
                vec![
                    ("omega", f(self.drive.frequency, "rad/s")),
                    ("amplitude", f(self.drive.amplitude, "A")),
                    ("reference", f(self.reference_omega_10, "rad/s")),
                ],
            ),
            (
                "escape",
                vec![
                    ("ratio", format!("{:?}", self.escape.ratio)),
                    ("tls_shift", f(self.escape.tls_shift, "A")),
                    ("prefactor", format!("{:?}", self.escape.prefactor)),
                    ("exponent", format!("{:?}", self.escape.exponent)),
                ],
            ),
            ("relaxation", vec![("gamma_ba", f(self.gamma_ba, "1/s"))]),
            (
                "ramp",
                vec![
                    ("start", f(self.ramp.start, "A")),
                    ("end", f(self.ramp.end, "A")),
                    ("period", f(self.ramp.period, "s")),
                    ("intervals", self.ramp.intervals.to_string()),
                ],
            ),
            ("simulation", sim),
        ]
    }

    /// SHA-256 over the sorted canonical `section.key=value` lines, seed
    /// excluded. Independent of the order fields were written in.
    pub fn digest(&self) -> String {
        let mut lines: Vec<String> = self
            .entries()
            .into_iter()
            .flat_map(|(s, es)| {
                es.into_iter()
                    .filter(move |(k, _)| !(s == "simulation" && *k == "seed"))
                    .map(move |(k, v)| format!("{s}.{k}={v}"))
            })
            .collect();
        lines.sort();
        let mut h = Sha256::new();
        for l in &lines {
            h.update(l.as_bytes());
            h.update(b"\n");
        }
        h.finalize()
            .iter()
            .take(8)
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

/// Contents of the shipped `paper.cfg`.
pub const RESONANT_CONFIG: &str = include_str!("../../../configs/paper.cfg");

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Dim {
    Current,
    Capacitance,
    AngularFrequency,
    Rate,
    Time,
    None,
}

/// Decimal exponent of a unit prefix, and whether the unit is cyclic
/// (Hz-based, converted to rad/s with a factor 2π).
fn unit_scale(dim: Dim, unit: &str) -> Option<(i32, bool)> {
    let s = match (dim, unit) {
        (Dim::Current, "A") => (0, false),
        (Dim::Current, "mA") => (-3, false),
        (Dim::Current, "uA" | "μA") => (-6, false),
        (Dim::Current, "nA") => (-9, false),
        (Dim::Current, "pA") => (-12, false),
        (Dim::Capacitance, "F") => (0, false),
        (Dim::Capacitance, "nF") => (-9, false),
        (Dim::Capacitance, "pF") => (-12, false),
        (Dim::Capacitance, "fF") => (-15, false),
        (Dim::AngularFrequency, "rad/s") => (0, false),
        (Dim::AngularFrequency, "Hz") => (0, true),
        (Dim::AngularFrequency, "kHz") => (3, true),
        (Dim::AngularFrequency, "MHz") => (6, true),
        (Dim::AngularFrequency, "GHz") => (9, true),
        (Dim::Rate, "1/s" | "/s") => (0, false),
        (Dim::Rate, "1/ms" | "/ms") => (3, false),
        (Dim::Rate, "1/us" | "/us" | "1/μs" | "/μs") => (6, false),
        (Dim::Rate, "1/ns" | "/ns") => (9, false),
        (Dim::Time, "s") => (0, false),
        (Dim::Time, "ms") => (-3, false),
        (Dim::Time, "us" | "μs") => (-6, false),
        (Dim::Time, "ns") => (-9, false),
        _ => return None,
    };
    Some(s)
}

/// Parses a decimal literal shifted by `10^shift`, rounding only once.
fn parse_shifted(num: &str, shift: i32) -> Option<f64> {
    if shift == 0 {
        return num.parse().ok();
    }
    let (mantissa, exp) = match num.find(['e', 'E']) {
        Some(i) => (&num[..i], num[i + 1..].parse::<i32>().ok()?),
        None => (num, 0),
    };
    mantissa.parse::<f64>().ok()?;
    format!("{mantissa}e{}", exp + shift).parse().ok()
}

fn key_dim(section: &str, key: &str) -> Option<Dim> {
    use Dim::*;
    let d = match (section, key) {
        ("junction", "critical_current") => Current,
        ("junction", "capacitance") => Capacitance,
        ("tls", "omega_r") => AngularFrequency,
        ("tls", "asymmetry") => Current,
        ("tls", "coupling") => AngularFrequency,
        ("tls", "lifetime") => Time,
        ("drive", "omega") => AngularFrequency,
        ("drive", "amplitude") => Current,
        ("drive", "rabi") => AngularFrequency,
        ("drive", "reference") => AngularFrequency,
        ("escape", "ratio") => None,
        ("escape", "tls_shift") => Current,
        ("escape", "prefactor") => None,
        ("escape", "exponent") => None,
        ("relaxation", "gamma_ba") => Rate,
        ("ramp", "start") => Current,
        ("ramp", "end") => Current,
        ("ramp", "period") => Time,
        ("ramp", "intervals") => None,
        ("simulation", "frame" | "mode" | "calibration_sweeps" | "seed" | "sweeps") => None,
        _ => return Option::None,
    };
    Some(d)
}

struct Entry {
    line: usize,
    raw: String,
}

/// Parses configuration text into a validated [`SystemConfig`].
pub fn parse_config(text: &str) -> Result<SystemConfig> {
    let mut entries: HashMap<(String, String), Entry> = HashMap::new();
    let mut section: Option<String> = None;
    for (i, raw_line) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| Error::Parse {
                line,
                message: format!("malformed section header `{content}`"),
            })?;
            section = Some(name.trim().to_string());
            continue;
        }
        let (k, v) = content.split_once('=').ok_or_else(|| Error::Parse {
            line,
            message: format!("expected `key = value`, found `{content}`"),
        })?;
        let sec = section.clone().ok_or_else(|| Error::Parse {
            line,
            message: "key outside of any section".into(),
        })?;
        let key = k.trim().to_string();
        if key_dim(&sec, &key).is_none() {
            return Err(Error::Parse {
                line,
                message: format!("unknown key `{key}` in section [{sec}]"),
            });
        }
        let id = (sec.clone(), key.clone());
        if let Some(prev) = entries.get(&id) {
            return Err(Error::Parse {
                line,
                message: format!("duplicate key `{sec}.{key}` (first on line {})", prev.line),
            });
        }
        entries.insert(
            id,
            Entry {
                line,
                raw: v.trim().to_string(),
            },
        );
    }
    Builder { entries }.build()
}

struct Builder {
    entries: HashMap<(String, String), Entry>,
}

impl Builder {
    fn get(&self, section: &str, key: &str) -> Option<&Entry> {
        self.entries.get(&(section.to_string(), key.to_string()))
    }

    fn line_of(&self, section: &str, key: &str) -> usize {
        self.get(section, key).map_or(0, |e| e.line)
    }

    fn quantity(&self, section: &str, key: &str) -> Result<Option<f64>> {
        let Some(e) = self.get(section, key) else {
            return Ok(None);
        };
        let dim = key_dim(section, key).expect("keys are checked while reading");
        let mut parts = e.raw.split_whitespace();
        let num = parts.next().ok_or_else(|| Error::Parse {
            line: e.line,
            message: format!("missing value for `{key}`"),
        })?;
        let unit: Vec<&str> = parts.collect();
        let unit = unit.join(" ");
        let (shift, cyclic) = if dim == Dim::None {
            if !unit.is_empty() {
                return Err(Error::Parse {
                    line: e.line,
                    message: format!("`{key}` is dimensionless but has unit `{unit}`"),
                });
            }
            (0, false)
        } else if unit.is_empty() {
            return Err(Error::Parse {
                line: e.line,
                message: format!("`{key}` requires a unit"),
            });
        } else {
            unit_scale(dim, &unit).ok_or_else(|| Error::Parse {
                line: e.line,
                message: format!("unit `{unit}` does not fit `{key}` ({dim:?})"),
            })?
        };
        let value = parse_shifted(num, shift).ok_or_else(|| Error::Parse {
            line: e.line,
            message: format!("`{num}` is not a number"),
        })?;
        Ok(Some(if cyclic { TWO_PI * value } else { value }))
    }

    fn required(&self, section: &str, key: &str) -> Result<f64> {
        self.quantity(section, key)?.ok_or_else(|| Error::Parse {
            line: 0,
            message: format!("missing required key `{section}.{key}`"),
        })
    }

    fn integer(&self, section: &str, key: &str) -> Result<Option<u64>> {
        let Some(e) = self.get(section, key) else {
            return Ok(None);
        };
        e.raw.parse::<u64>().map(Some).map_err(|_| Error::Parse {
            line: e.line,
            message: format!("`{key}` must be a non-negative integer"),
        })
    }

    fn word(&self, section: &str, key: &str) -> Option<(&str, usize)> {
        self.get(section, key).map(|e| (e.raw.as_str(), e.line))
    }

    fn exclusive(&self, section: &str, a: &str, b: &str) -> Result<()> {
        if self.get(section, a).is_some() && self.get(section, b).is_some() {
            return Err(Error::Parse {
                line: self.line_of(section, b),
                message: format!("`{a}` and `{b}` are mutually exclusive"),
            });
        }
        Ok(())
    }

    fn build(self) -> Result<SystemConfig> {
        let junction = JunctionParams {
            critical_current: self.required("junction", "critical_current")?,
            capacitance: self.required("junction", "capacitance")?,
        };
        self.locate(junction.validate())?;

        let level_spacing = self.required("tls", "omega_r")?;
        let drive_frequency = self.required("drive", "omega")?;
        let reference_omega_10 = self
            .quantity("drive", "reference")?
            .unwrap_or(drive_frequency);
        let delta10 = self.at_field(
            coupling_delta10(&junction, reference_omega_10),
            &[("drive", "reference"), ("drive", "omega")],
        )?;

        self.exclusive("tls", "asymmetry", "coupling")?;
        let asymmetry = match (
            self.quantity("tls", "asymmetry")?,
            self.quantity("tls", "coupling")?,
        ) {
            (Some(a), _) => a,
            (None, Some(c)) => asymmetry_for_omega_c(c, delta10),
            (None, None) => {
                return Err(Error::Parse {
                    line: 0,
                    message: "missing `tls.asymmetry` or `tls.coupling`".into(),
                })
            }
        };
        self.exclusive("drive", "amplitude", "rabi")?;
        let amplitude = match (
            self.quantity("drive", "amplitude")?,
            self.quantity("drive", "rabi")?,
        ) {
            (Some(a), _) => a,
            (None, Some(r)) => amplitude_for_omega_m(r, delta10),
            (None, None) => 0.0,
        };
        let tls = TlsParams {
            level_spacing,
            critical_current_asymmetry: asymmetry,
        };
        let drive = DriveParams {
            frequency: drive_frequency,
            amplitude,
        };
        let defaults = EscapeModel::default();
        let escape = EscapeModel {
            ratio: self.quantity("escape", "ratio")?.unwrap_or(defaults.ratio),
            tls_shift: self.quantity("escape", "tls_shift")?.unwrap_or(0.0),
            prefactor: self
                .quantity("escape", "prefactor")?
                .unwrap_or(defaults.prefactor),
            exponent: self
                .quantity("escape", "exponent")?
                .unwrap_or(defaults.exponent),
        };
        let ramp = RampConfig {
            start: self.quantity("ramp", "start")?.unwrap_or(0.0),
            end: self.required("ramp", "end")?,
            period: self.quantity("ramp", "period")?.unwrap_or(0.01),
            intervals: self.integer("ramp", "intervals")?.unwrap_or(10_000) as usize,
        };
        let frame = match self.word("simulation", "frame") {
            None | Some(("rotating", _)) => Frame::Rotating,
            Some(("lab", _)) => Frame::Lab,
            Some((other, line)) => {
                return Err(Error::Parse {
                    line,
                    message: format!("frame must be `rotating` or `lab`, found `{other}`"),
                })
            }
        };
        let calibration_sweeps =
            self.integer("simulation", "calibration_sweeps")?.unwrap_or(2000) as usize;
        let mode = match self.word("simulation", "mode") {
            None | Some(("full", _)) => SimulationMode::Full,
            Some(("fast", _)) => SimulationMode::FastRate { calibration_sweeps },
            Some((other, line)) => {
                return Err(Error::Parse {
                    line,
                    message: format!("mode must be `full` or `fast`, found `{other}`"),
                })
            }
        };
        let cfg = SystemConfig {
            junction,
            tls,
            drive,
            escape,
            ramp,
            gamma_ba: self.quantity("relaxation", "gamma_ba")?.unwrap_or(0.0),
            tls_lifetime: self.quantity("tls", "lifetime")?.unwrap_or(1.0 / 2.38),
            reference_omega_10,
            frame,
            mode,
            seed: self.integer("simulation", "seed")?.unwrap_or(1),
            n_sweeps: self.integer("simulation", "sweeps")?.unwrap_or(10_000) as usize,
        };
        self.locate(cfg.validate())?;
        Ok(cfg)
    }

    fn at_field<T>(&self, r: Result<T>, fields: &[(&str, &str)]) -> Result<T> {
        r.map_err(|e| {
            let line = fields
                .iter()
                .map(|(s, k)| self.line_of(s, k))
                .find(|&l| l > 0)
                .unwrap_or(0);
            Error::Parse {
                line,
                message: e.to_string(),
            }
        })
    }

    /// Attaches the line of the offending key to a validation error.
    fn locate(&self, r: Result<()>) -> Result<()> {
        r.map_err(|e| {
            let line = match &e {
                Error::InvalidParameter { field, .. } => {
                    let (s, k) = field_location(field);
                    self.line_of(s, k)
                }
                _ => 0,
            };
            Error::Parse {
                line,
                message: e.to_string(),
            }
        })
    }
}

fn field_location(field: &str) -> (&str, &str) {
    match field {
        "critical_current" => ("junction", "critical_current"),
        "capacitance" => ("junction", "capacitance"),
        "level_spacing" => ("tls", "omega_r"),
        "critical_current_asymmetry" => ("tls", "asymmetry"),
        "frequency" => ("drive", "omega"),
        "amplitude" => ("drive", "amplitude"),
        "ratio" => ("escape", "ratio"),
        "tls_shift" => ("escape", "tls_shift"),
        "prefactor/exponent" => ("escape", "prefactor"),
        "gamma_ba" => ("relaxation", "gamma_ba"),
        other => other.split_once('.').unwrap_or(("", other)),
    }
}

/// Sorted `(section.key, value)` view, handy for reports.
pub fn canonical_map(cfg: &SystemConfig) -> BTreeMap<String, String> {
    cfg.entries()
        .into_iter()
        .flat_map(|(s, es)| es.into_iter().map(move |(k, v)| (format!("{s}.{k}"), v)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::hz_to_rad;
    use std::f64::consts::PI;

    #[test]
    fn shipped_config_parses() {
        let c = SystemConfig::resonant();
        assert_eq!(c.drive.frequency, hz_to_rad(9.02e9));
        assert_eq!(c.tls.level_spacing, hz_to_rad(8.7e9));
        let k = c.couplings().unwrap();
        assert!((k.omega_c / hz_to_rad(200e6) - 1.0).abs() < 1e-12);
        assert!((k.omega_m / hz_to_rad(2e6) - 1.0).abs() < 1e-12);
        assert_eq!(c.gamma_ba, 0.6e6);
    }

    #[test]
    fn round_trip_is_exact() {
        let c = SystemConfig::resonant();
        let text = c.to_canonical();
        let again = parse_config(&text).unwrap();
        assert_eq!(c, again);
        assert_eq!(text, again.to_canonical());
        assert_eq!(c.digest(), again.digest());
    }

    #[test]
    fn omega_unit_conversion() {
        let text = RESONANT_CONFIG.replace("omega = 9.02 GHz", "omega = 9020 MHz");
        let c = parse_config(&text).unwrap();
        assert_eq!(c.drive.frequency, 2.0 * PI * 9.02e9);
    }

    #[test]
    fn digest_ignores_order_and_seed() {
        let c = SystemConfig::resonant();
        let text = c.to_canonical();
        let mut blocks: Vec<&str> = text.split("\n\n").filter(|b| !b.trim().is_empty()).collect();
        blocks.reverse();
        let shuffled = blocks.join("\n\n");
        let d = parse_config(&shuffled).unwrap();
        assert_eq!(c.digest(), d.digest());
        let mut e = c.clone();
        e.seed += 1;
        assert_eq!(c.digest(), e.digest());
        e.drive.frequency *= 1.0 + 1e-12;
        assert_ne!(c.digest(), e.digest());
    }

    #[test]
    fn negative_capacitance_names_field_and_line() {
        let text = RESONANT_CONFIG.replace("capacitance = 5 pF", "capacitance = -5 pF");
        assert_ne!(text, RESONANT_CONFIG);
        let line = text
            .lines()
            .position(|l| l.contains("capacitance"))
            .unwrap()
            + 1;
        match parse_config(&text) {
            Err(Error::Parse { line: l, message }) => {
                assert_eq!(l, line);
                assert!(message.contains("capacitance"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_key_and_bad_units() {
        let t = format!("{RESONANT_CONFIG}\n[drive]\nbogus = 1 GHz\n");
        assert!(matches!(parse_config(&t), Err(Error::Parse { .. })));
        let t = RESONANT_CONFIG.replace("omega = 9.02 GHz", "omega = 9.02 pF");
        assert!(matches!(parse_config(&t), Err(Error::Parse { .. })));
        let t = RESONANT_CONFIG.replace("omega = 9.02 GHz", "omega = 9.02");
        assert!(matches!(parse_config(&t), Err(Error::Parse { .. })));
        let t = RESONANT_CONFIG.replace("ratio = 500", "ratio = 500 Hz");
        assert!(matches!(parse_config(&t), Err(Error::Parse { .. })));
    }

    #[test]
    fn inter_sweep_relaxation_probability() {
        let c = SystemConfig::resonant();
        let p = c.inter_sweep_relaxation();
        assert!((p - (1.0 - (-2.38f64 * 0.01).exp())).abs() < 1e-3);
    }
}
