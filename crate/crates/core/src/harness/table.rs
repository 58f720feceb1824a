use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::capacity::{rate_grid, read_csv, write_csv, RateRow};

/// Link counts covered by the golden table.
pub const GOLDEN_LINKS: std::ops::RangeInclusive<usize> = 1..=8;

/// The golden table shipped with the crate.
pub fn default_golden_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join("capacity_golden.csv")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableReport {
    pub path: String,
    pub generated: bool,
    pub rows: usize,
    pub mismatches: Vec<String>,
}

impl TableReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

fn key(r: &RateRow) -> (String, String, usize, usize, usize) {
    (r.scenario.clone(), r.c_or_profile.clone(), r.z_rw, r.z_ro, r.z_wo)
}

/// Compare two tables cell by cell.
pub fn diff_tables(expected: &[RateRow], actual: &[RateRow]) -> Vec<String> {
    let want: BTreeMap<_, _> = expected.iter().map(|r| (key(r), r)).collect();
    let got: BTreeMap<_, _> = actual.iter().map(|r| (key(r), r)).collect();
    let mut out = Vec::new();
    for (k, w) in &want {
        match got.get(k) {
            None => out.push(format!("{} C={} z=({},{},{}): missing", k.0, k.1, k.2, k.3, k.4)),
            Some(g) if g != w => out.push(format!(
                "{} C={} z=({},{},{}): expected {} {}, got {} {}",
                k.0, k.1, k.2, k.3, k.4, w.regime, w.rate, g.regime, g.rate
            )),
            Some(_) => {}
        }
    }
    for k in got.keys().filter(|k| !want.contains_key(k)) {
        out.push(format!("{} C={} z=({},{},{}): unexpected row", k.0, k.1, k.2, k.3, k.4));
    }
    if expected.len() != want.len() || actual.len() != got.len() {
        out.push("duplicate rows".into());
    }
    out
}

/// Evaluate the full grid and diff it against the golden file, writing the
/// file first if it does not exist yet.
pub fn verify_capacity_table(path: &Path) -> Result<TableReport, HarnessError> {
    let rows = rate_grid(GOLDEN_LINKS)?;
    let io = |e: std::io::Error| HarnessError::Io(format!("{}: {e}", path.display()));
    if !path.exists() {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(io)?;
        }
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf)?;
        fs::write(path, buf).map_err(io)?;
        return Ok(TableReport {
            path: path.display().to_string(),
            generated: true,
            rows: rows.len(),
            mismatches: Vec::new(),
        });
    }
    let golden = read_csv(fs::File::open(path).map_err(io)?)?;
    Ok(TableReport {
        path: path.display().to_string(),
        generated: false,
        rows: rows.len(),
        mismatches: diff_tables(&golden, &rows),
    })
}
