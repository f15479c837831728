use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::report::SolutionReport;
use crate::error::{Error, Result};
use crate::grid::GridFunction;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config_sha256: String,
    pub version: String,
    pub files: Vec<String>,
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `x,u` rows with 17 significant digits.
pub fn write_csv(path: &Path, nodes: &[f64], u: &GridFunction) -> Result<()> {
    if nodes.len() != u.len() {
        return Err(Error::GridMismatch {
            expected: nodes.len(),
            found: u.len(),
        });
    }
    let mut text = String::with_capacity(48 * (nodes.len() + 1));
    text.push_str("x,u\n");
    for (x, v) in nodes.iter().zip(u.iter()) {
        text.push_str(&format!("{x:.16e},{v:.16e}\n"));
    }
    let mut file = fs::File::create(path).map_err(io_error(path))?;
    file.write_all(text.as_bytes()).map_err(io_error(path))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    text.push('\n');
    fs::write(path, text).map_err(io_error(path))
}

/// Writes `report.json`, one `<name>.csv` per solution and `manifest.json`
/// into `dir`, creating it if needed. Returns the written paths.
pub fn export_report(
    report: &SolutionReport,
    nodes: &[f64],
    solutions: &[(String, GridFunction)],
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(io_error(dir))?;
    let mut written = Vec::new();

    let report_path = dir.join("report.json");
    write_json(&report_path, report)?;
    written.push(report_path);

    for (name, u) in solutions {
        let path = dir.join(format!("{name}.csv"));
        write_csv(&path, nodes, u)?;
        written.push(path);
    }

    let manifest = Manifest {
        config_sha256: report.config.digest(),
        version: report.version.clone(),
        files: written
            .iter()
            .filter_map(|p| p.file_name().map(|f| f.to_string_lossy().into_owned()))
            .collect(),
    };
    let manifest_path = dir.join("manifest.json");
    write_json(&manifest_path, &manifest)?;
    written.push(manifest_path);
    Ok(written)
}
