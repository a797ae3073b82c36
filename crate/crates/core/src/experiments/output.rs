//! CSV and JSON artifacts of experiment runs.

use std::fs;
use std::path::Path;

use serde::Serialize;

use super::scenario::{ScenarioKind, ScenarioOutput};
use crate::error::Result;
use crate::signal::io::write_json;

/// Serializes `rows` as CSV with a header row.
pub fn write_csv<T: Serialize>(path: impl AsRef<Path>, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| crate::error::Error::Format(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| crate::error::Error::Format(e.to_string()))
}

pub fn scenario_stem(kind: ScenarioKind) -> &'static str {
    match kind {
        ScenarioKind::S1 => "scenario1",
        ScenarioKind::S2 => "scenario2",
        ScenarioKind::Fp => "false_positive",
        ScenarioKind::Sens => "sensitivity",
    }
}

/// `<stem>_columns.csv`, `<stem>_summary.csv`, `<stem>_failures.json` and
/// one ground-truth document per dataset under `<stem>_truth/`.
pub fn write_scenario(dir: &Path, out: &ScenarioOutput) -> Result<()> {
    let Some(kind) = out.summaries.first().map(|s| s.scenario) else {
        return Ok(());
    };
    let stem = scenario_stem(kind);
    fs::create_dir_all(dir)?;
    write_csv(dir.join(format!("{stem}_columns.csv")), &out.records)?;
    write_csv(dir.join(format!("{stem}_summary.csv")), &out.summaries)?;
    write_json(dir.join(format!("{stem}_failures.json")), &out.failures)?;
    let truth_dir = dir.join(format!("{stem}_truth"));
    fs::create_dir_all(&truth_dir)?;
    for (configuration, grid, k, truth) in &out.truths {
        let name = format!("{configuration:?}_{grid}_{k:03}.json").to_lowercase();
        write_json(truth_dir.join(name), truth)?;
    }
    Ok(())
}
