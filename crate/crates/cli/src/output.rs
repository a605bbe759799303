//! Writes a run to disk: `report.json`, the CSV tables and the exported
//! kernel sections.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::run::RunOutput;
use crate::CliError;

pub fn report_json(out: &RunOutput) -> Result<String, CliError> {
    Ok(serde_json::to_string_pretty(&out.report)? + "\n")
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// File-system safe form of a kernel name.
fn slug(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' })
        .collect()
}

/// Writes everything under `dir` and returns the paths written.
pub fn write_all(out: &RunOutput, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let report = dir.join("report.json");
    fs::write(&report, report_json(out)?)?;
    written.push(report);

    let t = &out.tables;
    let mut table = |name: &str, empty: bool, f: &dyn Fn(&Path) -> Result<(), CliError>| -> Result<(), CliError> {
        if !empty {
            let p = dir.join(name);
            f(&p)?;
            written.push(p);
        }
        Ok(())
    };
    table("theta.csv", t.theta.is_empty(), &|p| write_csv(p, &t.theta))?;
    table("sphere.csv", t.sphere.is_empty(), &|p| write_csv(p, &t.sphere))?;
    table("schedule.csv", t.schedule.is_empty(), &|p| write_csv(p, &t.schedule))?;
    table("witness.csv", t.witness.is_empty(), &|p| write_csv(p, &t.witness))?;

    if !t.kernels.is_empty() {
        let kdir = dir.join("kernels");
        fs::create_dir_all(&kdir)?;
        for k in &t.kernels {
            let stem = slug(&k.name);
            let txt = kdir.join(format!("{stem}.txt"));
            fs::write(&txt, &k.text)?;
            let json = kdir.join(format!("{stem}.json"));
            fs::write(&json, serde_json::to_string_pretty(&k.record)? + "\n")?;
            written.push(txt);
            written.push(json);
        }
    }
    Ok(written)
}
