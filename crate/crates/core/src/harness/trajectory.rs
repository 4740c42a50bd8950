//! Conversion of trial logs into plotting-friendly trajectory tables.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::harness::eval::{TrialLog, LOG_VERSION};

pub const TRAJECTORY_HEADER: [&str; 8] = ["t", "x", "y", "theta", "v", "omega", "min_scan", "source"];

pub fn read_log(path: &Path) -> Result<TrialLog> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let log: TrialLog = serde_json::from_str(&text)?;
    if log.schema_version != LOG_VERSION {
        return Err(Error::InvalidConfig(format!(
            "unsupported log version {}",
            log.schema_version
        )));
    }
    if log.rows.is_empty() || log.rows[0].source != "start" {
        return Err(Error::InvalidConfig(format!("{}: log has no start row", path.display())));
    }
    Ok(log)
}

/// Writes one CSV row per logged pose, initial pose first.
pub fn write_trajectory(log: &TrialLog, out: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(out)?;
    w.write_record(TRAJECTORY_HEADER)?;
    for r in &log.rows {
        w.write_record([
            r.t.to_string(),
            r.x.to_string(),
            r.y.to_string(),
            r.theta.to_string(),
            r.v.to_string(),
            r.omega.to_string(),
            r.min_scan.to_string(),
            r.source.clone(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(out, e))?;
    Ok(())
}

/// Reads `log_path` and writes its trajectory to `out`.
pub fn replay(log_path: &Path, out: &Path) -> Result<TrialLog> {
    let log = read_log(log_path)?;
    write_trajectory(&log, out)?;
    Ok(log)
}
