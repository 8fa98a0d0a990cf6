//! Sweep configuration files and CSV output.
//!
//! Configuration is line-oriented `key = value` text; `#` starts a comment and
//! lists are comma-separated. Run records and rate fits are written as CSV with
//! every number in `{:.16e}` form (17 significant digits), which reads back
//! bit-for-bit.

use std::collections::HashSet;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{ExperimentError, IoError};
use crate::experiments::{RateFit, RunRecord, RunSample, SweepConfig};

/// Keys accepted in configuration files and overrides.
pub const CONFIG_KEYS: [&str; 14] = [
    "grid_n",
    "sobolev_s",
    "final_time",
    "dt",
    "dt_policy",
    "epsilon_list",
    "base_flow",
    "base_speed",
    "amplitude",
    "seed",
    "coupling",
    "ma_tol",
    "ma_max_newton",
    "sample_cadence",
];

fn number<T: std::str::FromStr>(value: &str) -> Result<T, String> {
    value
        .parse::<T>()
        .map_err(|_| format!("cannot parse `{value}` as a number"))
}

/// Sets one key. The message of the error is meant to be wrapped with the
/// caller's location.
fn apply(config: &mut SweepConfig, key: &str, value: &str) -> Result<(), String> {
    match key {
        "grid_n" => config.grid_n = number(value)?,
        "sobolev_s" => config.sobolev_s = number(value)?,
        "final_time" => config.final_time = number(value)?,
        "dt" => {
            config.dt = if value == "auto" {
                None
            } else {
                Some(number(value)?)
            }
        }
        "dt_policy" => config.dt_policy = value.parse()?,
        "epsilon_list" => {
            config.epsilon_list = value
                .split(',')
                .map(|item| number::<f64>(item.trim()))
                .collect::<Result<_, _>>()?
        }
        "base_flow" => {
            config.base_flow = value.parse().map_err(|e: ExperimentError| e.to_string())?
        }
        "base_speed" => config.base_speed = number(value)?,
        "amplitude" => config.amplitude = number(value)?,
        "seed" => config.seed = number(value)?,
        "coupling" => config.coupling = value.parse()?,
        "ma_tol" => config.ma_tol = number(value)?,
        "ma_max_newton" => config.ma_max_newton = number(value)?,
        "sample_cadence" => config.sample_cadence = number(value)?,
        other => return Err(format!("unknown key `{other}`")),
    }
    Ok(())
}

fn validated(config: SweepConfig) -> Result<SweepConfig, IoError> {
    match config.validate() {
        Ok(()) => Ok(config),
        Err(ExperimentError::InvalidConfig { field, message }) => Err(IoError::Validation {
            field: field.to_string(),
            message,
        }),
        Err(other) => Err(IoError::Validation {
            field: "config".into(),
            message: other.to_string(),
        }),
    }
}

/// Parses a configuration file, applying defaults for absent keys.
pub fn parse_config(text: &str) -> Result<SweepConfig, IoError> {
    let mut config = SweepConfig::default();
    let mut seen = HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| IoError::Parse {
            line,
            message: format!("expected `key = value`, got `{content}`"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if !seen.insert(key.to_string()) && CONFIG_KEYS.contains(&key) {
            return Err(IoError::Parse {
                line,
                message: format!("duplicate key `{key}`"),
            });
        }
        apply(&mut config, key, value).map_err(|message| IoError::Parse { line, message })?;
    }
    validated(config)
}

/// Splits a `key=value` command-line override.
pub fn parse_override(arg: &str) -> Result<(String, String), IoError> {
    let (key, value) = arg.split_once('=').ok_or_else(|| IoError::Override {
        arg: arg.to_string(),
        message: "expected key=value".into(),
    })?;
    let key = key.trim();
    if !CONFIG_KEYS.contains(&key) {
        return Err(IoError::Override {
            arg: arg.to_string(),
            message: format!("unknown key `{key}`"),
        });
    }
    Ok((key.to_string(), value.trim().to_string()))
}

/// Applies overrides in order and re-validates.
pub fn apply_overrides(config: SweepConfig, overrides: &[String]) -> Result<SweepConfig, IoError> {
    let mut config = config;
    for arg in overrides {
        let (key, value) = parse_override(arg)?;
        apply(&mut config, &key, &value).map_err(|message| IoError::Override {
            arg: arg.clone(),
            message,
        })?;
    }
    validated(config)
}

/// Writes `bytes` next to `path` and renames it into place.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| IoError::Io(e.error))?;
    Ok(())
}

fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_num(cell: &str) -> Result<f64, IoError> {
    cell.trim()
        .parse()
        .map_err(|_| IoError::Format(format!("`{cell}` is not a number")))
}

pub fn run_csv_bytes(samples: &[RunSample]) -> Result<Vec<u8>, IoError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(RunSample::COLUMNS)?;
    for s in samples {
        w.write_record(s.to_row().iter().map(|&v| fmt_num(v)))?;
    }
    w.into_inner().map_err(|e| IoError::Io(e.into_error()))
}

/// Writes the samples of `record`, one row per sample time.
pub fn emit_run_csv(record: &RunRecord, path: &Path) -> Result<(), IoError> {
    if let Some(bad) = record.samples.iter().find(|s| !s.is_finite()) {
        return Err(IoError::Format(format!(
            "non-finite sample at t = {}",
            bad.t
        )));
    }
    write_atomic(path, &run_csv_bytes(&record.samples)?)
}

/// Reads samples written by [`emit_run_csv`].
pub fn read_run_csv_from<R: Read>(reader: R) -> Result<Vec<RunSample>, IoError> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let header = r.headers()?.clone();
    if header.iter().ne(RunSample::COLUMNS.iter().copied()) {
        return Err(IoError::Format(format!(
            "unexpected header {:?}",
            header.iter().collect::<Vec<_>>()
        )));
    }
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let mut row = [0.0; 12];
        for (slot, cell) in row.iter_mut().zip(rec.iter()) {
            *slot = parse_num(cell)?;
        }
        out.push(RunSample::from_row(row));
    }
    Ok(out)
}

pub fn read_run_csv(path: &Path) -> Result<Vec<RunSample>, IoError> {
    read_run_csv_from(fs::File::open(path)?)
}

pub const RATE_COLUMNS: [&str; 4] = ["quantity", "slope", "r2", "flag"];

pub fn rate_csv_bytes(fits: &[RateFit]) -> Result<Vec<u8>, IoError> {
    let mut w = csv::WriterBuilder::new()
        .flexible(true)
        .from_writer(Vec::new());
    w.write_record(RATE_COLUMNS)?;
    for fit in fits {
        let mut row = vec![
            fit.quantity.clone(),
            fit.slope.map(fmt_num).unwrap_or_default(),
            fit.r2.map(fmt_num).unwrap_or_default(),
            fit.flag.clone().unwrap_or_default(),
        ];
        row.extend(
            fit.points
                .iter()
                .map(|&(e, err)| format!("eps:{}={}", fmt_num(e), fmt_num(err))),
        );
        w.write_record(&row)?;
    }
    w.into_inner().map_err(|e| IoError::Io(e.into_error()))
}

/// Writes one row per fit: name, slope, R², flag, then `eps:<ε>=<error>` cells.
pub fn emit_rate_csv(fits: &[RateFit], path: &Path) -> Result<(), IoError> {
    write_atomic(path, &rate_csv_bytes(fits)?)
}

fn optional_num(cell: &str) -> Result<Option<f64>, IoError> {
    if cell.is_empty() {
        Ok(None)
    } else {
        parse_num(cell).map(Some)
    }
}

/// Reads fits written by [`emit_rate_csv`]; intercepts are not stored.
pub fn read_rate_csv_from<R: Read>(reader: R) -> Result<Vec<RateFit>, IoError> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header = r.headers()?.clone();
    if header.iter().ne(RATE_COLUMNS.iter().copied()) {
        return Err(IoError::Format(format!(
            "unexpected header {:?}",
            header.iter().collect::<Vec<_>>()
        )));
    }
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        if rec.len() < RATE_COLUMNS.len() {
            return Err(IoError::Format(format!(
                "short row with {} cells",
                rec.len()
            )));
        }
        let mut points = Vec::new();
        for cell in rec.iter().skip(RATE_COLUMNS.len()) {
            let pair = cell
                .strip_prefix("eps:")
                .and_then(|rest| rest.split_once('='))
                .ok_or_else(|| {
                    IoError::Format(format!("expected eps:<value>=<error>, got `{cell}`"))
                })?;
            points.push((parse_num(pair.0)?, parse_num(pair.1)?));
        }
        let flag = if rec[3].is_empty() {
            None
        } else {
            Some(rec[3].to_string())
        };
        out.push(RateFit {
            quantity: rec[0].to_string(),
            points,
            slope: optional_num(&rec[1])?,
            intercept: None,
            r2: optional_num(&rec[2])?,
            flag,
        });
    }
    Ok(out)
}

pub fn read_rate_csv(path: &Path) -> Result<Vec<RateFit>, IoError> {
    read_rate_csv_from(fs::File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{fit_rate, BaseFlowKind, CouplingChoice, RunStatus};
    use crate::flow::{Coupling, Scheme};

    #[test]
    fn empty_text_gives_defaults() {
        let c = parse_config("").unwrap();
        assert_eq!(c, SweepConfig::default());
        assert_eq!(c.grid_n, 64);
        assert_eq!(c.sobolev_s, 2.0);
        assert_eq!(c.final_time, 0.5);
        assert_eq!(c.epsilon_list, vec![0.2, 0.1, 0.05, 0.025]);
    }

    #[test]
    fn single_key_overrides_default() {
        let c = parse_config("grid_n = 32").unwrap();
        assert_eq!(c.grid_n, 32);
        assert_eq!(SweepConfig { grid_n: 64, ..c }, SweepConfig::default());
    }

    #[test]
    fn negative_epsilon_is_a_validation_error() {
        match parse_config("epsilon_list = 0.2, 0.1, -0.05") {
            Err(IoError::Validation { field, .. }) => assert_eq!(field, "epsilon_list"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn every_key_is_understood() {
        let text = "\
# full configuration
grid_n = 32
sobolev_s = 3
final_time = 0.25   # shorter
dt = 1e-3
dt_policy = lie-split-if
epsilon_list = 0.1, 0.05, 0.02
base_flow = double-shear
base_speed = 0.1
amplitude = 0.5
seed = 42
coupling = both
ma_tol = 1e-12
ma_max_newton = 12
sample_cadence = 10
";
        let c = parse_config(text).unwrap();
        assert_eq!(c.grid_n, 32);
        assert_eq!(c.sobolev_s, 3.0);
        assert_eq!(c.final_time, 0.25);
        assert_eq!(c.dt, Some(1e-3));
        assert_eq!(c.dt_policy, Scheme::LieSplitIf);
        assert_eq!(c.epsilon_list, vec![0.1, 0.05, 0.02]);
        assert_eq!(c.base_flow, BaseFlowKind::DoubleShear);
        assert_eq!(c.base_speed, 0.1);
        assert_eq!(c.amplitude, 0.5);
        assert_eq!(c.seed, 42);
        assert_eq!(c.coupling, CouplingChoice::Both);
        assert_eq!(c.ma_tol, 1e-12);
        assert_eq!(c.ma_max_newton, 12);
        assert_eq!(c.sample_cadence, 10.0);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        match parse_config("grid_n = 32\n\nfoo = 1") {
            Err(IoError::Parse { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("foo"));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_config("grid_n 32"),
            Err(IoError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_config("grid_n = x"),
            Err(IoError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_config("seed = 1\nseed = 2"),
            Err(IoError::Parse { line: 2, .. })
        ));
        assert!(parse_config("grid_n = 30").is_ok());
        assert!(matches!(
            parse_config("grid_n = 31"),
            Err(IoError::Validation { .. })
        ));
        assert!(matches!(
            parse_config("base_flow = vortex"),
            Err(IoError::Parse { .. })
        ));
    }

    #[test]
    fn overrides_apply_in_order() {
        let c = apply_overrides(
            SweepConfig::default(),
            &[
                "seed=3".to_string(),
                "seed = 4".to_string(),
                "coupling=monge-ampere".to_string(),
            ],
        )
        .unwrap();
        assert_eq!(c.seed, 4);
        assert_eq!(c.coupling, CouplingChoice::MongeAmpere);
        assert!(matches!(
            parse_override("seed"),
            Err(IoError::Override { .. })
        ));
        assert!(matches!(
            parse_override("speed=1"),
            Err(IoError::Override { .. })
        ));
        assert!(matches!(
            apply_overrides(SweepConfig::default(), &["final_time=-1".to_string()]),
            Err(IoError::Validation { .. })
        ));
    }

    fn record(samples: Vec<RunSample>) -> RunRecord {
        RunRecord {
            eps: 0.1,
            coupling: Coupling::Poisson,
            seed: 1,
            dt: 1e-3,
            samples,
            status: RunStatus::Complete,
            snapshots: Vec::new(),
        }
    }

    fn sample(t: f64) -> RunSample {
        RunSample::from_row([
            t,
            0.1 / 3.0,
            std::f64::consts::PI * 1e-7,
            1.0 / 7.0,
            -2.5e-17,
            f64::MIN_POSITIVE,
            1e300,
            2.0f64.sqrt(),
            0.0,
            -0.0,
            123456.789,
            5e-324,
        ])
    }

    #[test]
    fn run_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.csv");

        emit_run_csv(&record(vec![]), &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert!(read_run_csv(&path).unwrap().is_empty());

        emit_run_csv(&record(vec![sample(0.0)]), &path).unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap().lines().count(), 2);

        let samples = vec![sample(0.0), sample(0.1), sample(1.0 / 3.0)];
        emit_run_csv(&record(samples.clone()), &path).unwrap();
        let back = read_run_csv(&path).unwrap();
        for (a, b) in samples.iter().zip(&back) {
            for (x, y) in a.to_row().iter().zip(b.to_row().iter()) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn non_finite_samples_are_refused() {
        let dir = tempfile::tempdir().unwrap();
        let mut s = sample(0.0);
        s.energy = f64::NAN;
        assert!(emit_run_csv(&record(vec![s]), &dir.path().join("x.csv")).is_err());
    }

    #[test]
    fn rate_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rates.csv");
        let pts: Vec<_> = [0.2, 0.1, 0.05].iter().map(|&e: &f64| (e, e * e)).collect();
        let good = fit_rate("velocity", &pts).unwrap();
        let bad = RateFit::degenerate("density", &pts, "below noise floor, not fitted");
        emit_rate_csv(&[good.clone(), bad.clone()], &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "quantity,slope,r2,flag");
        assert!(lines[1].starts_with("velocity,2.0000000000000000e0,"));
        assert!(lines[2].starts_with("density,,,"));

        let back = read_rate_csv(&path).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(
            back[0].slope.map(f64::to_bits),
            good.slope.map(f64::to_bits)
        );
        assert_eq!(back[0].r2.map(f64::to_bits), good.r2.map(f64::to_bits));
        assert_eq!(back[0].points, good.points);
        assert_eq!(back[1].slope, None);
        assert_eq!(back[1].flag, bad.flag);

        // deterministic output
        emit_rate_csv(&[good, bad], &path).unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), text);
    }

    #[test]
    fn malformed_csv_is_rejected() {
        assert!(read_run_csv_from("a,b\n1,2\n".as_bytes()).is_err());
        let header = RunSample::COLUMNS.join(",");
        assert!(read_run_csv_from(format!("{header}\n1,2\n").as_bytes()).is_err());
        assert!(read_rate_csv_from("quantity,slope,r2,flag\nv,1,1,,eps:0.1\n".as_bytes()).is_err());
    }
}
