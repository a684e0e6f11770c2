use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde_json::{json, Value};

use crate::config::ExperimentConfig;
use crate::scenarios::Outcome;

/// Writes into a sibling temp file, then renames over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("output");
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    {
        let mut f = fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).with_context(|| format!("renaming onto {}", path.display()))
}

/// `report.json` body. Everything except `timestamp` is a function of the
/// configuration alone.
pub fn report(cfg: &ExperimentConfig, outcome: &Outcome) -> Value {
    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    json!({
        "scenario": cfg.scenario.to_string(),
        "seed": cfg.seed,
        "passed": outcome.passed,
        "config": cfg,
        "results": outcome.results,
        "timestamp": timestamp,
    })
}

pub fn write_outputs(cfg: &ExperimentConfig, outcome: &Outcome) -> Result<()> {
    fs::create_dir_all(&cfg.out).with_context(|| format!("creating output directory {}", cfg.out.display()))?;
    let body = serde_json::to_string_pretty(&report(cfg, outcome))?;
    write_atomic(&cfg.out.join("report.json"), body.as_bytes())?;
    for (name, csv) in &outcome.traces {
        write_atomic(&cfg.out.join(name), csv.as_bytes())?;
    }
    Ok(())
}
