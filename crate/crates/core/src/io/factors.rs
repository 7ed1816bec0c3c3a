//! Factor matrices as headerless CSV (`U.csv`, `V.csv`, `W.csv`) plus a
//! `meta.json` describing the run.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{FactorMatrix, KruskalModel, Matrix};

const FILES: [&str; 3] = ["U.csv", "V.csv", "W.csv"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub dims: [usize; 3],
    pub rank: usize,
    pub solver: String,
    pub seed: u64,
    pub iters: usize,
    pub wall_ms: f64,
}

/// One row per line, values comma-separated. `Display` for `f64` prints the
/// shortest decimal that parses back to the same bits.
pub fn factor_to_csv(f: &FactorMatrix) -> String {
    let mut out = String::new();
    for i in 0..f.rows() {
        let row: Vec<String> = f.row(i).iter().map(|v| v.to_string()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn factor_from_csv(text: &str, origin: &str) -> Result<FactorMatrix> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse {
                path: origin.to_string(),
                line: i + 1,
                msg: e.to_string(),
            })?;
        rows.push(row);
    }
    let m = Matrix::from_rows(&rows).map_err(|e| Error::Parse {
        path: origin.to_string(),
        line: 0,
        msg: e.to_string(),
    })?;
    FactorMatrix::from_matrix(m)
}

fn check_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    if !dir.is_dir() {
        return Err(Error::io(
            dir,
            std::io::Error::new(std::io::ErrorKind::NotADirectory, "not a directory"),
        ));
    }
    Ok(())
}

pub fn write_factors(model: &KruskalModel, meta: &RunMeta, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    check_dir(dir)?;
    let mut written = Vec::new();
    for (factor, name) in [model.u(), model.v(), model.w()].into_iter().zip(FILES) {
        let path = dir.join(name);
        fs::write(&path, factor_to_csv(factor)).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    let path = dir.join("meta.json");
    let json = serde_json::to_string_pretty(meta).expect("meta serialises");
    fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok(written)
}

pub fn read_factors(dir: impl AsRef<Path>) -> Result<KruskalModel> {
    let dir = dir.as_ref();
    let mut factors = Vec::with_capacity(3);
    for name in FILES {
        let path = dir.join(name);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        factors.push(factor_from_csv(&text, &path.display().to_string())?);
    }
    let w = factors.pop().unwrap();
    let v = factors.pop().unwrap();
    let u = factors.pop().unwrap();
    KruskalModel::new(u, v, w)
}

pub fn read_meta(dir: impl AsRef<Path>) -> Result<RunMeta> {
    let path = dir.as_ref().join("meta.json");
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        line: e.line(),
        msg: e.to_string(),
    })
}
