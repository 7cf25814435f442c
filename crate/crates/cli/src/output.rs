use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{Flags, SweepConfig};
use crate::experiments::Table;
use crate::CliError;

/// Inserts the flag suffix before the extension: `a/fig4.csv` → `a/fig4.encoding-noise-on.csv`.
pub fn suffixed_path(path: &Path, flags: &Flags) -> PathBuf {
    let suffix = flags.suffix();
    if suffix.is_empty() {
        return path.to_path_buf();
    }
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}.{suffix}.{}", ext.to_string_lossy()),
        None => format!("{stem}.{suffix}"),
    };
    path.with_file_name(name)
}

pub fn sidecar_path(csv: &Path) -> PathBuf {
    let mut name = csv.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(".meta.json");
    csv.with_file_name(name)
}

pub fn render_csv(table: &Table) -> String {
    let mut out = String::new();
    let header: Vec<&str> = table.key_columns.iter().chain(&table.value_columns).copied().chain(["error"]).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for p in &table.points {
        let mut cells: Vec<String> = p.keys.iter().map(|c| c.render()).collect();
        match &p.values {
            Ok(values) => {
                cells.extend(values.iter().map(|c| c.render()));
                cells.push(String::new());
            }
            Err(e) => {
                cells.extend(std::iter::repeat_n("nan".to_string(), table.value_columns.len()));
                cells.push(format!("\"{}\"", e.replace('"', "'")));
            }
        }
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

pub fn config_hash(cfg: &SweepConfig) -> String {
    let canonical = serde_json::to_string(cfg).expect("config serializes");
    let digest = Sha256::digest(canonical.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Serialize)]
pub struct Conventions {
    pub rotation_sign: &'static str,
    pub superoperator: &'static str,
    pub composite_order: &'static str,
    pub quadrupole: String,
    pub frame: &'static str,
}

impl Conventions {
    pub fn for_config(cfg: &SweepConfig) -> Self {
        let quadrupole = if cfg.flags.quantize_wait {
            format!("waits rounded to the nearest positive multiple of 4 pi / Q with Q/Omega = {}", cfg.q_over_omega)
        } else {
            "waits used as requested (no quadrupole revival constraint)".to_string()
        };
        Self {
            rotation_sign: "encoding and recovery end with exp(+i pi/2 I_x); detection and decoding start with exp(-i pi/2 I_x)",
            superoperator: "column-stacking vec, vec(A X B) = (B^T kron A) vec(X)",
            composite_order: "nucleus kron electron, descending m, electron (up, down)",
            quadrupole,
            frame: "per-branch Pauli frame calibrated from noiseless propagation",
        }
    }
}

#[derive(Serialize)]
pub struct PointStatus {
    pub index: usize,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Serialize)]
pub struct Metadata<'a> {
    pub experiment: String,
    pub config_hash: String,
    pub config: &'a SweepConfig,
    pub versions: Versions,
    pub conventions: Conventions,
    pub wall_clock_seconds: f64,
    pub threads: usize,
    pub complete: bool,
    pub points: Vec<PointStatus>,
}

#[derive(Serialize)]
pub struct Versions {
    pub maus_core: &'static str,
    pub maus_sim: &'static str,
}

impl<'a> Metadata<'a> {
    pub fn new(cfg: &'a SweepConfig, table: &Table, wall_clock_seconds: f64, threads: usize) -> Self {
        let points: Vec<PointStatus> = table
            .points
            .iter()
            .enumerate()
            .map(|(index, p)| match &p.values {
                Ok(_) => PointStatus { index, status: "ok", error: None },
                Err(e) => PointStatus { index, status: "failed", error: Some(e.clone()) },
            })
            .collect();
        Self {
            experiment: cfg.experiment.to_string(),
            config_hash: config_hash(cfg),
            config: cfg,
            versions: Versions { maus_core: maus_core::VERSION, maus_sim: env!("CARGO_PKG_VERSION") },
            conventions: Conventions::for_config(cfg),
            wall_clock_seconds,
            threads,
            complete: table.failures() == 0,
            points,
        }
    }
}

pub fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}
