use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde::Serialize;
use tempfile::NamedTempFile;

use qlbm::lattice::LatticeGrid;
use qlbm::{QlbmError, Result};

fn io_error(path: &Path, e: impl std::fmt::Display) -> QlbmError {
    QlbmError::Config(format!("cannot write {}: {e}", path.display()))
}

/// Files collected in memory and written together once every computation
/// has succeeded. Each file lands via rename, so readers never see a
/// partial file.
#[derive(Default)]
pub struct Outputs {
    files: Vec<(std::path::PathBuf, String)>,
}

impl Outputs {
    pub fn add(&mut self, path: impl Into<std::path::PathBuf>, contents: String) {
        self.files.push((path.into(), contents));
    }

    pub fn add_json<T: Serialize>(&mut self, path: impl Into<std::path::PathBuf>, value: &T) {
        let mut text = serde_json::to_string_pretty(value).expect("report serializes");
        text.push('\n');
        self.add(path, text);
    }

    pub fn commit(self) -> Result<()> {
        for (path, contents) in self.files {
            let dir = path.parent().unwrap_or(Path::new("."));
            std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
            let mut tmp = NamedTempFile::new_in(dir).map_err(|e| io_error(&path, e))?;
            tmp.write_all(contents.as_bytes())
                .map_err(|e| io_error(&path, e))?;
            tmp.persist(&path).map_err(|e| io_error(&path, e.error))?;
        }
        Ok(())
    }
}

/// `index, x[, y[, z]], <columns...>` with one row per site.
pub fn density_csv(grid: &LatticeGrid, columns: &[(&str, &[f64])]) -> String {
    let axes = ["x", "y", "z"];
    let mut out = String::from("index");
    for a in &axes[..grid.dims()] {
        out.push(',');
        out.push_str(a);
    }
    for (name, _) in columns {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for k in 0..grid.sites() {
        let c = grid.coords(k);
        write!(out, "{k}").unwrap();
        for v in &c[..grid.dims()] {
            write!(out, ",{v}").unwrap();
        }
        for (_, values) in columns {
            write!(out, ",{}", values[k]).unwrap();
        }
        out.push('\n');
    }
    out
}
