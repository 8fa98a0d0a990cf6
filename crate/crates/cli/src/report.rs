use std::path::{Path, PathBuf};

use quasineutral::error::IoError;
use quasineutral::experiments::{RateFit, RunRecord, RunStatus, SweepConfig};
use quasineutral::flow::Coupling;
use quasineutral::io::{emit_rate_csv, emit_run_csv};
use serde_json::{json, Value};

/// Everything written to `summary.json`.
pub struct Report {
    command: String,
    out: PathBuf,
    config: Value,
    runs: Vec<Value>,
    checks: Vec<Value>,
    files: Vec<String>,
    error: Option<String>,
}

fn config_json(c: &SweepConfig) -> Value {
    json!({
        "grid_n": c.grid_n,
        "sobolev_s": c.sobolev_s,
        "final_time": c.final_time,
        "dt": c.dt,
        "dt_policy": c.dt_policy.as_str(),
        "epsilon_list": c.epsilon_list,
        "base_flow": c.base_flow.as_str(),
        "base_speed": c.base_speed,
        "amplitude": c.amplitude,
        "seed": c.seed,
        "coupling": c.coupling.as_str(),
        "ma_tol": c.ma_tol,
        "ma_max_newton": c.ma_max_newton,
        "sample_cadence": c.sample_cadence,
    })
}

fn finite_or_null(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

/// `<command>_eps<ε>_<coupling>_seed<seed>.csv`; the ε part is left out for
/// incompressible runs.
pub fn run_file_name(command: &str, record: &RunRecord) -> String {
    if record.coupling == Coupling::Euler {
        format!("{command}_{}_seed{}.csv", record.coupling, record.seed)
    } else {
        format!(
            "{command}_eps{}_{}_seed{}.csv",
            record.eps, record.coupling, record.seed
        )
    }
}

impl Report {
    pub fn new(command: &str, out: &Path, config: &SweepConfig) -> Self {
        Self {
            command: command.to_string(),
            out: out.to_path_buf(),
            config: config_json(config),
            runs: Vec::new(),
            checks: Vec::new(),
            files: Vec::new(),
            error: None,
        }
    }

    pub fn command(&self) -> &str {
        &self.command
    }

    pub fn record_run(&mut self, record: &RunRecord) -> Result<(), IoError> {
        let name = run_file_name(&self.command, record);
        emit_run_csv(record, &self.out.join(&name))?;
        let (status, reason) = match &record.status {
            RunStatus::Complete => ("complete", None),
            RunStatus::Aborted { reason, .. } => ("aborted", Some(reason.clone())),
        };
        self.runs.push(json!({
            "file": name,
            "eps": record.eps,
            "coupling": record.coupling.as_str(),
            "seed": record.seed,
            "dt": record.dt,
            "samples": record.samples.len(),
            "status": status,
            "reason": reason,
            "sup_err_v": finite_or_null(record.sup_err_v()),
            "sup_err_rho": finite_or_null(record.sup_err_rho()),
        }));
        self.files.push(name);
        Ok(())
    }

    pub fn record_rates(&mut self, name: &str, fits: &[RateFit]) -> Result<(), IoError> {
        emit_rate_csv(fits, &self.out.join(name))?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn check(&mut self, name: &str, pass: bool, detail: String) {
        log::info!("{name}: {} ({detail})", if pass { "pass" } else { "fail" });
        self.checks
            .push(json!({ "name": name, "pass": pass, "detail": detail }));
    }

    pub fn check_slope(&mut self, name: &str, fit: &RateFit, band: (f64, f64)) {
        let detail = match (fit.slope, &fit.flag) {
            (Some(s), _) => format!("slope {s:.4}, band [{}, {}]", band.0, band.1),
            (None, Some(flag)) => format!("not fitted: {flag}"),
            (None, None) => "not fitted".to_string(),
        };
        self.check(name, fit.slope_within(band.0, band.1), detail);
    }

    pub fn fail(&mut self, error: String) {
        self.error = Some(error);
    }

    pub fn passed(&self) -> bool {
        self.error.is_none()
            && self.runs.iter().all(|r| r["status"] == "complete")
            && self.checks.iter().all(|c| c["pass"] == true)
    }

    fn failures(&self) -> Vec<Value> {
        let mut out: Vec<Value> = self
            .runs
            .iter()
            .filter(|r| r["status"] != "complete")
            .map(|r| json!({ "kind": "run", "file": r["file"], "reason": r["reason"] }))
            .collect();
        out.extend(
            self.checks
                .iter()
                .filter(|c| c["pass"] != true)
                .map(|c| json!({ "kind": "check", "name": c["name"], "detail": c["detail"] })),
        );
        if let Some(e) = &self.error {
            out.push(json!({ "kind": "error", "message": e }));
        }
        out
    }

    pub fn to_json(&self) -> Value {
        json!({
            "command": self.command,
            "passed": self.passed(),
            "config": self.config,
            "runs": self.runs,
            "checks": self.checks,
            "files": self.files,
            "failures": self.failures(),
        })
    }

    pub fn write(&self) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(&self.to_json()).map_err(std::io::Error::other)?;
        std::fs::write(self.out.join("summary.json"), text + "\n")
    }
}
