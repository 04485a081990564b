//! Plain-text trajectory files.
//!
//! ```text
//! # qjump trajectory digest=3f2a... seed=1 period=0.01
//! sweep_index,time_s,I_sw_A,escape_level
//! 0,0.009825,3.5582e-5,a
//! ```
//!
//! `time_s` is the time since the start of the sweep. A `!` after the level
//! marks an event forced at the end of a ramp that did not switch. Floats
//! use the shortest representation that parses back to the same value.

use crate::error::{Error, Result};
use crate::hamiltonian::Level;
use crate::sweep::{SwitchingEvent, Trajectory};
use std::fmt::Write as _;

pub const MAGIC: &str = "# qjump trajectory";
pub const COLUMNS: &str = "sweep_index,time_s,I_sw_A,escape_level";

pub fn format_trajectory(t: &Trajectory) -> String {
    let mut s = String::with_capacity(40 * (t.events.len() + 2));
    let _ = writeln!(
        s,
        "{MAGIC} digest={} seed={} period={:?}",
        t.digest, t.seed, t.period
    );
    s.push_str(COLUMNS);
    s.push('\n');
    for e in &t.events {
        let _ = writeln!(
            s,
            "{},{:?},{:?},{}{}",
            e.sweep_index,
            e.time_in_sweep,
            e.bias,
            e.level.as_char(),
            if e.forced { "!" } else { "" }
        );
    }
    s
}

fn perr(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_header(line: &str) -> Result<(String, u64, f64)> {
    let rest = line
        .strip_prefix(MAGIC)
        .ok_or_else(|| perr(1, format!("expected header starting with `{MAGIC}`")))?;
    let (mut digest, mut seed, mut period) = (None, None, None);
    for tok in rest.split_whitespace() {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| perr(1, format!("malformed header field `{tok}`")))?;
        match k {
            "digest" => digest = Some(v.to_string()),
            "seed" => {
                seed = Some(
                    v.parse::<u64>()
                        .map_err(|_| perr(1, format!("invalid seed `{v}`")))?,
                )
            }
            "period" => {
                let p = v
                    .parse::<f64>()
                    .map_err(|_| perr(1, format!("invalid period `{v}`")))?;
                if !(p > 0.0 && p.is_finite()) {
                    return Err(perr(1, "period must be positive"));
                }
                period = Some(p)
            }
            _ => return Err(perr(1, format!("unknown header field `{k}`"))),
        }
    }
    Ok((
        digest.ok_or_else(|| perr(1, "header lacks digest"))?,
        seed.ok_or_else(|| perr(1, "header lacks seed"))?,
        period.ok_or_else(|| perr(1, "header lacks period"))?,
    ))
}

pub fn parse_trajectory(text: &str) -> Result<Trajectory> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, first) = lines.next().ok_or_else(|| perr(1, "empty file"))?;
    let (digest, seed, period) = parse_header(first.trim_end())?;
    let mut events = Vec::new();
    let mut last: Option<u64> = None;
    for (no, raw) in lines {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line == COLUMNS {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 4 {
            return Err(perr(no, format!("expected 4 fields, found {}", f.len())));
        }
        let idx: u64 = f[0]
            .trim()
            .parse()
            .map_err(|_| perr(no, format!("invalid sweep index `{}`", f[0])))?;
        if last.is_some_and(|l| idx <= l) {
            return Err(perr(no, "sweep indices must be strictly increasing"));
        }
        let num = |s: &str, what: &str| -> Result<f64> {
            let v: f64 = s
                .trim()
                .parse()
                .map_err(|_| perr(no, format!("invalid {what} `{s}`")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(perr(no, format!("{what} is not finite")))
            }
        };
        let time = num(f[1], "time")?;
        let bias = num(f[2], "current")?;
        let lv = f[3].trim();
        let (lv, forced) = match lv.strip_suffix('!') {
            Some(l) => (l, true),
            None => (lv, false),
        };
        let mut chars = lv.chars();
        let level = match (chars.next(), chars.next()) {
            (Some(c), None) => Level::from_char(c),
            _ => None,
        }
        .ok_or_else(|| perr(no, format!("invalid escape level `{}`", f[3])))?;
        events.push(SwitchingEvent {
            sweep_index: idx,
            bias,
            level,
            time_in_sweep: time,
            forced,
        });
        last = Some(idx);
    }
    Ok(Trajectory {
        events,
        period,
        seed,
        digest,
    })
}

pub fn write_trajectory(path: &std::path::Path, t: &Trajectory) -> std::io::Result<()> {
    std::fs::write(path, format_trajectory(t))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Trajectory {
        Trajectory {
            events: vec![
                SwitchingEvent {
                    sweep_index: 0,
                    bias: 35.58312e-6,
                    level: Level::A,
                    time_in_sweep: 0.0098291,
                    forced: false,
                },
                SwitchingEvent {
                    sweep_index: 1,
                    bias: 36.2e-6,
                    level: Level::C,
                    time_in_sweep: 0.01,
                    forced: true,
                },
            ],
            period: 0.01,
            seed: 17,
            digest: "0123456789abcdef".into(),
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let t = sample();
        let text = format_trajectory(&t);
        let back = parse_trajectory(&text).unwrap();
        assert_eq!(back, t);
        assert_eq!(format_trajectory(&back), text);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let mut text = format_trajectory(&sample());
        text.push_str("2,0.1,nope,a\n");
        match parse_trajectory(&text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("{other:?}"),
        }
        let bad = text.replace("1,0.01", "0,0.01");
        assert!(matches!(
            parse_trajectory(&bad),
            Err(Error::Parse { line: 4, .. })
        ));
        assert!(matches!(
            parse_trajectory("hello\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        let lvl = format_trajectory(&sample()).replace(",a\n", ",q\n");
        assert!(matches!(
            parse_trajectory(&lvl),
            Err(Error::Parse { line: 3, .. })
        ));
    }
}
