use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{HarnessError, Result};
use crate::experiments::{ExperimentResult, SettingResult};

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| HarnessError::io(path, e))
}

fn metrics_csv(metrics: &[(String, f64)]) -> String {
    let mut out = String::from("metric,value\n");
    for (k, v) in metrics {
        let _ = writeln!(out, "{k},{v:.16e}");
    }
    out
}

fn summary_csv(setting: &SettingResult) -> String {
    let mut out = String::from("parameter,mean,sd\n");
    for (j, name) in setting.parameter_names.iter().enumerate() {
        let _ = writeln!(out, "{name},{:.16e},{:.16e}", setting.summary.mean[j], setting.summary.sd[j]);
    }
    out
}

fn chains_csv(setting: &SettingResult) -> String {
    let mut out = String::from("replicate,acceptance,frozen_acceptance,frozen_from,final_L,divergences,min_ess_per_l\n");
    for (r, c) in setting.chains.iter().enumerate() {
        let _ = writeln!(
            out,
            "{r},{:.16e},{:.16e},{},{},{},{:.16e}",
            c.acceptance, c.frozen_acceptance, c.frozen_from, c.final_steps, c.divergences, c.min_ess_per_l
        );
    }
    out
}

fn write_setting(dir: &Path, setting: &SettingResult) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    for (r, trace) in setting.traces.iter().enumerate() {
        write(&dir.join(format!("trace_{r}.csv")), &trace.to_csv())?;
    }
    write(&dir.join("ess.csv"), &setting.ess.to_csv())?;
    write(&dir.join("summary.csv"), &summary_csv(setting))?;
    write(&dir.join("chains.csv"), &chains_csv(setting))?;
    if !setting.metrics.is_empty() {
        write(&dir.join("metrics.csv"), &metrics_csv(&setting.metrics))?;
    }
    Ok(())
}

/// Writes `<out>/<experiment>/` and returns that directory. Settings with a label get their
/// own sub-directory; every number is printed with 17 significant digits.
pub fn write_result(result: &ExperimentResult, out: &Path) -> Result<PathBuf> {
    let dir = out.join(result.spec.experiment.name());
    fs::create_dir_all(&dir).map_err(|e| HarnessError::io(&dir, e))?;
    write(&dir.join("config.snapshot"), &result.spec.to_snapshot())?;
    for setting in &result.settings {
        match &setting.label {
            Some(label) => write_setting(&dir.join(label), setting)?,
            None => write_setting(&dir, setting)?,
        }
    }
    if !result.metrics.is_empty() {
        write(&dir.join("metrics.csv"), &metrics_csv(&result.metrics))?;
    }
    for (name, contents) in &result.tables {
        write(&dir.join(name), contents)?;
    }
    Ok(dir)
}
