use qjump_core::analysis::bands::classify_checked;
use qjump_core::config::{parse_config, SimulationMode, SystemConfig};
use qjump_core::constants::TWO_PI;
use qjump_core::io::{format_trajectory, parse_trajectory};
use qjump_core::junction::{bias_for_omega_10, dressed_spectrum, min_splitting, omega_10};
use qjump_core::sweep::{simulate as run_simulation, Trajectory};
use qjump_core::synth::{synthesize, SynthParams};
use qjump_core::{analyze as run_analysis, AnalysisOptions, Error};
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

/// Failure with its process exit code: 1 for usage, configuration and I/O
/// problems, 2 for data and convergence problems.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError {
            code: if e.is_data_error() { 2 } else { 1 },
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> CliError {
    CliError {
        code: 1,
        message: message.into(),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_config(path: &Path) -> Result<SystemConfig, CliError> {
    parse_config(&read(path)?).map_err(|e| {
        let mut c = CliError::from(e);
        c.message = format!("{}: {}", path.display(), c.message);
        c.code = 1;
        c
    })
}

/// Trajectory text with a provenance line after the header.
fn with_provenance(t: &Trajectory, command: &str) -> String {
    let body = format_trajectory(t);
    let (header, rest) = body.split_once('\n').unwrap_or((&body, ""));
    format!("{header}\n# command: {command}\n{rest}")
}

pub fn simulate(
    config: &Path,
    seed: Option<u64>,
    sweeps: Option<usize>,
    fast: Option<bool>,
    workers: Option<usize>,
    out: &Path,
) -> Result<(), CliError> {
    let mut cfg = load_config(config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(n) = sweeps {
        if n == 0 {
            return Err(usage("--sweeps must be at least 1"));
        }
        cfg.n_sweeps = n;
    }
    match (fast, cfg.mode) {
        (Some(true), SimulationMode::Full) => {
            cfg.mode = SimulationMode::FastRate {
                calibration_sweeps: 10_000,
            }
        }
        (Some(false), _) => cfg.mode = SimulationMode::Full,
        _ => {}
    }
    let mode = match cfg.mode {
        SimulationMode::Full => "full".to_string(),
        SimulationMode::FastRate { calibration_sweeps } => {
            format!("fast-rate --calibration-sweeps {calibration_sweeps}")
        }
    };
    let start = Instant::now();
    let run = run_simulation(&cfg, workers)?;
    let elapsed = start.elapsed().as_secs_f64();
    let t = &run.trajectory;
    let command = format!(
        "qjump simulate {} --seed {} --sweeps {} (mode {mode}, config digest {})",
        config.display(),
        cfg.seed,
        cfg.n_sweeps,
        t.digest
    );
    write(out, &with_provenance(t, &command))?;
    let bands = if t.len() >= qjump_core::analysis::bands::MIN_EVENTS {
        match classify_checked(&t.currents(), 3) {
            Ok(c) => c.model.k().to_string(),
            Err(e) => format!("n/a ({e})"),
        }
    } else {
        format!("n/a (fewer than {} events)", qjump_core::analysis::bands::MIN_EVENTS)
    };
    let excited = run
        .tls_after
        .iter()
        .filter(|s| matches!(s, qjump_core::TlsState::Excited))
        .count();
    println!("output = {}", out.display());
    println!("digest = {}", t.digest);
    println!("seed = {}", t.seed);
    println!("sweeps = {}", t.len());
    println!("mode = {mode}");
    println!("band_estimate = {bands}");
    println!("tls_excited_fraction = {:.6}", excited as f64 / t.len() as f64);
    println!("runtime_s = {elapsed:.3}");
    Ok(())
}

pub fn analyze(
    path: &Path,
    bands: usize,
    window: f64,
    out: Option<&Path>,
) -> Result<(), CliError> {
    if !(2..=3).contains(&bands) {
        return Err(usage("--bands must be 2 or 3"));
    }
    if !(window > 0.0) {
        return Err(usage("--window must be positive"));
    }
    let text = read(path)?;
    let traj = parse_trajectory(&text).map_err(|e| CliError {
        code: 2,
        message: format!("{}: {e}", path.display()),
    })?;
    let analysis = run_analysis(&traj, AnalysisOptions { bands, window })?;
    if let Some(fb) = &analysis.classification.fallback {
        eprintln!(
            "warning: requested {} bands, using {}: {}",
            fb.requested,
            analysis.classification.model.k(),
            fb.reason
        );
    }
    let report = analysis.report();
    print!("{report}");
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(|e| usage(format!("{}: {e}", dir.display())))?;
        write(&dir.join("report.txt"), &report)?;
        for (stem, csv) in analysis.tables() {
            write(&dir.join(format!("{stem}.csv")), &csv)?;
        }
    }
    if let Some((stage, e)) = analysis.telegraph.as_ref().and_then(|t| t.first_error()) {
        let mut err = CliError::from(e.clone());
        err.message = format!("report written, but the {stage} stage failed: {}", err.message);
        return Err(err);
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn synth(
    ron: f64,
    roff: f64,
    rate: f64,
    duration: f64,
    seed: u64,
    middle: f64,
    noise_na: f64,
    out: &Path,
) -> Result<(), CliError> {
    let p = SynthParams {
        r_on: ron,
        r_off: roff,
        sample_rate: rate,
        duration,
        middle_fraction: middle,
        noise: noise_na * 1e-9,
    };
    let t = synthesize(&p, seed).map_err(|e| usage(e.to_string()))?;
    let command = format!(
        "qjump synth --ron {ron:?} --roff {roff:?} --rate {rate:?} --duration {duration:?} --seed {seed} --middle {middle:?} --noise-na {noise_na:?}"
    );
    write(out, &with_provenance(&t, &command))?;
    let off = t
        .events
        .iter()
        .filter(|e| matches!(e.level, qjump_core::Level::C))
        .count();
    println!("output = {}", out.display());
    println!("digest = {}", t.digest);
    println!("seed = {seed}");
    println!("samples = {}", t.len());
    println!("off_fraction = {:.6}", off as f64 / t.len() as f64);
    Ok(())
}

fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || usage(format!("--grid expects START:END:POINTS in uA, got `{spec}`"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if n < 2 || !(b > a) {
        return Err(usage("--grid needs END > START and at least 2 points"));
    }
    Ok(linspace(a * 1e-6, b * 1e-6, n))
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

pub const DEFAULT_GRID_POINTS: usize = 2001;

/// Grid covering ω₁₀ within ±5·Ω_c (at least ±500 MHz) of the TLS,
/// clipped below the bias where the well stops holding a level.
pub fn default_grid(cfg: &SystemConfig) -> Result<Vec<f64>, Error> {
    let j = &cfg.junction;
    let center = bias_for_omega_10(j, cfg.tls.level_spacing)?;
    let h = 1e-10;
    let slope = (omega_10(j, center - h)? - omega_10(j, center + h)?) / (2.0 * h);
    let wc = cfg.couplings()?.omega_c.abs();
    let half = (5.0 * wc).max(TWO_PI * 500e6) / slope;
    // largest bias with a bound level
    let (mut ok, mut bad) = (center, j.critical_current);
    for _ in 0..200 {
        let mid = 0.5 * (ok + bad);
        if omega_10(j, mid).is_ok() {
            ok = mid;
        } else {
            bad = mid;
        }
    }
    let upper = (center + half).min(ok);
    Ok(linspace(center - half, upper, DEFAULT_GRID_POINTS))
}

pub fn spectroscopy(config: &Path, grid: Option<&str>, out: &Path) -> Result<(), CliError> {
    let cfg = load_config(config)?;
    let biases = match grid {
        Some(g) => parse_grid(g)?,
        None => default_grid(&cfg)?,
    };
    let wc = cfg.couplings()?.omega_c;
    let points = dressed_spectrum(&cfg.junction, cfg.tls.level_spacing, wc, &biases)
        .map_err(|e| usage(format!("grid outside the valid bias range: {e}")))?;
    let mut csv = String::from("bias_A,omega_10_hz,lower_hz,upper_hz,splitting_hz\n");
    for p in &points {
        let _ = writeln!(
            csv,
            "{:e},{:e},{:e},{:e},{:e}",
            p.bias,
            p.omega_10 / TWO_PI,
            p.lower / TWO_PI,
            p.upper / TWO_PI,
            p.splitting() / TWO_PI
        );
    }
    write(out, &csv)?;
    let m = min_splitting(&points).expect("grid has points");
    println!("output = {}", out.display());
    println!("digest = {}", cfg.digest());
    println!("points = {}", points.len());
    println!("min_splitting_hz = {:.6e}", m.splitting() / TWO_PI);
    println!("min_splitting_bias_A = {:.9e}", m.bias);
    println!("two_omega_c_hz = {:.6e}", 2.0 * wc.abs() / TWO_PI);
    Ok(())
}
