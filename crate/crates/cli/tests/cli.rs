use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn qjump(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qjump"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn config(name: &str) -> String {
    format!("{}/../../configs/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn value<'a>(report: &'a str, key: &str) -> &'a str {
    report
        .lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(" = ")))
        .unwrap_or_else(|| panic!("no `{key}` in\n{report}"))
}

fn tmp() -> tempfile::TempDir {
    tempfile::tempdir().unwrap()
}

#[test]
fn simulation_is_independent_of_worker_count() {
    let d = tmp();
    let cfg = config("paper.cfg");
    let base = ["simulate", &cfg, "--seed", "9", "--sweeps", "300"];
    let one = qjump(&[&base[..], &["--workers", "1", "--out", "one.csv"]].concat(), d.path());
    let three = qjump(&[&base[..], &["--workers", "3", "--out", "three.csv"]].concat(), d.path());
    assert!(one.status.success(), "{}", stderr(&one));
    assert!(three.status.success(), "{}", stderr(&three));
    let a = std::fs::read(d.path().join("one.csv")).unwrap();
    let b = std::fs::read(d.path().join("three.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn single_sweep_writes_one_record_with_provenance() {
    let d = tmp();
    let o = qjump(&["simulate", &config("paper.cfg"), "--sweeps", "1", "--out", "t.csv"], d.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(value(&stdout(&o), "sweeps"), "1");
    let text = std::fs::read_to_string(d.path().join("t.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# qjump trajectory digest="));
    assert!(lines[1].starts_with("# command: qjump simulate"));
    assert_eq!(lines[2], "sweep_index,time_s,I_sw_A,escape_level");
    assert_eq!(lines.len(), 4);
    assert!(lines[3].starts_with("0,"));
}

#[test]
fn usage_and_configuration_errors_exit_one() {
    let d = tmp();
    std::fs::write(d.path().join("bad.cfg"), "[junction]\ncapacitance = -1 pF\n").unwrap();
    for args in [
        vec!["simulate"],
        vec!["frobnicate"],
        vec!["simulate", "missing.cfg"],
        vec!["simulate", "bad.cfg"],
        vec!["analyze", "x.csv", "--bands", "4"],
        vec!["spectroscopy", &config("paper.cfg"), "--grid", "1:2"],
    ] {
        let o = qjump(&args, d.path());
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", stderr(&o));
    }
    let o = qjump(&["--help"], d.path());
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn data_errors_exit_two() {
    let d = tmp();
    std::fs::write(
        d.path().join("short.csv"),
        "# qjump trajectory digest=x seed=0 period=0.01\n0,0.001,3.5e-5,a\n",
    )
    .unwrap();
    std::fs::write(d.path().join("garbled.csv"), "# qjump trajectory digest=x seed=0 period=0.01\n0,zz,1,a\n").unwrap();
    for f in ["short.csv", "garbled.csv"] {
        let o = qjump(&["analyze", f], d.path());
        assert_eq!(o.status.code(), Some(2), "{f}: {}", stderr(&o));
    }
}

fn synth_fixture(dir: &Path) -> PathBuf {
    let o = qjump(
        &["synth", "--ron", "0.236", "--roff", "2.38", "--duration", "1000", "--seed", "7", "--out", "s.csv"],
        dir,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    dir.join("s.csv")
}

#[test]
fn synthetic_report_is_stable() {
    let d = tmp();
    synth_fixture(d.path());
    let o = qjump(&["analyze", "s.csv", "--out", "report"], d.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let r = stdout(&o);
    assert_eq!(value(&r, "events"), "100000");
    assert_eq!(value(&r, "bands.k"), "3");
    assert_eq!(value(&r, "dwell.on.rate_per_s"), FROZEN_ON);
    assert_eq!(value(&r, "dwell.off.rate_per_s"), FROZEN_OFF);
    assert_eq!(value(&r, "lorentzian.sum_rates_per_s"), FROZEN_SUM);
    let saved = std::fs::read_to_string(d.path().join("report/report.txt")).unwrap();
    assert_eq!(saved, r);
    for stem in ["bands", "dwell_histogram", "psd", "poisson_histogram"] {
        assert!(d.path().join(format!("report/{stem}.csv")).exists(), "{stem}");
    }
}

// `qjump synth --ron 0.236 --roff 2.38 --duration 1000 --seed 7`
const FROZEN_ON: &str = "0.239633";
const FROZEN_OFF: &str = "2.300246";
const FROZEN_SUM: &str = "2.592392";

#[test]
fn off_resonant_trajectory_falls_back_to_two_bands() {
    let d = tmp();
    let o = qjump(&["simulate", &config("off_resonant.cfg"), "--sweeps", "3000", "--out", "o.csv"], d.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let a = qjump(&["analyze", "o.csv"], d.path());
    assert!(stderr(&a).contains("warning: requested 3 bands, using 2"), "{}", stderr(&a));
    assert_eq!(value(&stdout(&a), "bands.k"), "2");
    assert!(stdout(&a).contains("telegraph = skipped"));
}

fn spectroscopy(args: &[&str], dir: &Path) -> (Output, String) {
    let o = qjump(&[&["spectroscopy"], args].concat(), dir);
    let s = stdout(&o);
    (o, s)
}

#[test]
fn refined_spectroscopy_resolves_twice_the_coupling() {
    let d = tmp();
    let cfg = config("paper.cfg");
    let (o, coarse) = spectroscopy(&[&cfg], d.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let at: f64 = value(&coarse, "min_splitting_bias_A").parse().unwrap();
    let grid = format!("{}:{}:2001", (at - 2e-9) * 1e6, (at + 2e-9) * 1e6);
    let (o, fine) = spectroscopy(&[&cfg, "--grid", &grid, "--out", "fine.csv"], d.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let split: f64 = value(&fine, "min_splitting_hz").parse().unwrap();
    let target: f64 = value(&fine, "two_omega_c_hz").parse().unwrap();
    assert!((split / target - 1.0).abs() < 1e-3, "{split} vs {target}");
    let rows = std::fs::read_to_string(d.path().join("fine.csv")).unwrap();
    assert_eq!(rows.lines().count(), 2002);
}

#[test]
fn uncoupled_defect_has_no_gap() {
    let d = tmp();
    let text = std::fs::read_to_string(config("paper.cfg"))
        .unwrap()
        .replace("coupling = 200 MHz", "coupling = 0 MHz");
    std::fs::write(d.path().join("free.cfg"), text).unwrap();
    let (o, s) = spectroscopy(&["free.cfg"], d.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let split: f64 = value(&s, "min_splitting_hz").parse().unwrap();
    assert!(split < 1e-3 * 4e8, "{split}");
}

#[test]
fn grid_outside_the_well_is_rejected() {
    let d = tmp();
    let (o, _) = spectroscopy(&[&config("paper.cfg"), "--grid", "30:40:11"], d.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("valid bias range"), "{}", stderr(&o));
}
