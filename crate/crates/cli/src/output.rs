//! Output directory, manifests and CSV writing.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Component, Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::Command;
use crate::error::CliError;

pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn new(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|e| CliError::Usage(format!("cannot create output directory {}: {e}", root.display())))?;
        Ok(Self { root: root.to_path_buf() })
    }

    /// `name` joined to the root; absolute paths and `..` are refused.
    pub fn path(&self, name: &Path) -> Result<PathBuf, CliError> {
        let ok = name.components().all(|c| matches!(c, Component::Normal(_) | Component::CurDir));
        if !ok || name.as_os_str().is_empty() {
            return Err(CliError::Usage(format!("output `{}` must be a relative path inside the output directory", name.display())));
        }
        Ok(self.root.join(name))
    }

    pub fn write(&self, name: &Path, bytes: &[u8]) -> Result<String, CliError> {
        let path = self.path(name)?;
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| CliError::Numeric(e.into()))?;
        }
        fs::write(&path, bytes).map_err(|e| CliError::Numeric(anyhow::anyhow!("writing {}: {e}", path.display())))?;
        Ok(sha256_hex(bytes))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub seed: Option<u64>,
    pub config: &'a Command,
    pub tolerances: BTreeMap<&'static str, f64>,
    /// Edge scale constant applied to rescaled extremes, when the command uses one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_xi: Option<f64>,
}

pub fn tolerances() -> BTreeMap<&'static str, f64> {
    use edgelab::{characteristics, stats, tracy_widom};
    BTreeMap::from([
        ("characteristics.flow_rtol", characteristics::FLOW_RTOL),
        ("characteristics.ratio_band", characteristics::RATIO_BAND),
        ("characteristics.integral_ratio_limit", characteristics::INTEGRAL_RATIO_LIMIT),
        ("deformed_mp.eta_limit", edgelab::deformed_mp::DEFAULT_ETA_LIMIT),
        ("stats.dkw_alpha", stats::DKW_ALPHA),
        ("tracy_widom.grid_step", tracy_widom::GRID_STEP),
        ("dbm.guard_factor", edgelab::dbm::DbmOptions::default().guard_factor),
    ])
}

/// Record written last: ties every output to the manifest by content hash.
#[derive(Debug, Serialize)]
pub struct RunRecord {
    pub manifest: String,
    pub manifest_sha256: String,
    pub outputs: BTreeMap<String, String>,
    pub wall_seconds: f64,
}

pub fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(value).expect("serializable");
    v.push(b'\n');
    v
}

/// CSV with a header row; floats in `{:.16e}` (17 significant digits).
pub struct Csv {
    text: String,
}

pub enum Cell {
    Int(i64),
    Float(f64),
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self { text: format!("{}\n", header.join(",")) }
    }

    pub fn row<I: IntoIterator<Item = Cell>>(&mut self, cells: I) {
        let line: Vec<String> = cells
            .into_iter()
            .map(|c| match c {
                Cell::Int(i) => i.to_string(),
                Cell::Float(x) => format!("{x:.16e}"),
            })
            .collect();
        self.text.push_str(&line.join(","));
        self.text.push('\n');
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.text.into_bytes()
    }
}

#[macro_export]
macro_rules! cells {
    ($($x:expr),* $(,)?) => { [$($crate::output::Cell::from($x)),*] };
}
