//! Directory-per-run persistence: config, dataset, and checksum files,
//! with deterministic replay for simulated runs.

use super::{emit_csv, ingest_csv, DataIoError};
use crate::pick::{run_parametric_study, PickDataset, StudyCell, StudyConfig};
use sha2::{Digest, Sha256};
use std::path::Path;

pub const CONFIG_FILE: &str = "config.txt";
pub const DATASET_FILE: &str = "dataset.csv";
pub const CHECKSUM_FILE: &str = "checksum.txt";
/// Timestamp metadata lives outside the checksummed payload.
pub const META_FILE: &str = "meta.txt";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Simulated,
    External,
}

impl Provenance {
    fn name(&self) -> &'static str {
        match self {
            Provenance::Simulated => "simulated",
            Provenance::External => "external",
        }
    }

    fn from_name(s: &str) -> Option<Provenance> {
        match s {
            "simulated" => Some(Provenance::Simulated),
            "external" => Some(Provenance::External),
            _ => None,
        }
    }
}

/// Study configuration plus the grid it ran over: everything needed to
/// re-execute the run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub study: StudyConfig,
    pub grid: Vec<StudyCell>,
    pub provenance: Provenance,
}

impl RunConfig {
    pub fn to_text(&self) -> String {
        let mut out = format!("provenance={}\n", self.provenance.name());
        out.push_str(&self.study.to_kv());
        for cell in &self.grid {
            out.push_str(&format!(
                "cell={},{},{}\n",
                cell.tau_mm, cell.lambda_mm, cell.sigma
            ));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<RunConfig, DataIoError> {
        let study = StudyConfig::from_kv(text).map_err(|e| DataIoError::Config(e.to_string()))?;
        let mut grid = Vec::new();
        let mut provenance = Provenance::Simulated;
        for line in text.lines() {
            if let Some(rest) = line.trim().strip_prefix("cell=") {
                let parts: Vec<&str> = rest.split(',').collect();
                if parts.len() != 3 {
                    return Err(DataIoError::Config(format!("bad cell line: {line}")));
                }
                grid.push(StudyCell {
                    tau_mm: parts[0]
                        .parse()
                        .map_err(|e| DataIoError::Config(format!("cell tau: {e}")))?,
                    lambda_mm: parts[1]
                        .parse()
                        .map_err(|e| DataIoError::Config(format!("cell lambda: {e}")))?,
                    sigma: parts[2]
                        .parse()
                        .map_err(|e| DataIoError::Config(format!("cell sigma: {e}")))?,
                });
            } else if let Some(rest) = line.trim().strip_prefix("provenance=") {
                provenance = Provenance::from_name(rest)
                    .ok_or_else(|| DataIoError::Config(format!("bad provenance: {rest}")))?;
            }
        }
        Ok(RunConfig {
            study,
            grid,
            provenance,
        })
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentRun {
    pub run_id: String,
    pub config: RunConfig,
    pub dataset: PickDataset,
    pub created_at: String,
}

fn checksum(config_text: &str, dataset_csv: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(config_text.as_bytes());
    hasher.update(dataset_csv.as_bytes());
    format!("{:x}", hasher.finalize())
}

fn io_err(e: std::io::Error) -> DataIoError {
    DataIoError::Io(e.to_string())
}

/// Write a run directory: config.txt, dataset.csv, checksum.txt, meta.txt.
pub fn save_run(dir: &Path, run: &ExperimentRun) -> Result<(), DataIoError> {
    std::fs::create_dir_all(dir).map_err(io_err)?;
    let config_text = run.config.to_text();
    let dataset_csv = emit_csv(&run.dataset);
    std::fs::write(dir.join(CONFIG_FILE), &config_text).map_err(io_err)?;
    std::fs::write(dir.join(DATASET_FILE), &dataset_csv).map_err(io_err)?;
    std::fs::write(dir.join(CHECKSUM_FILE), checksum(&config_text, &dataset_csv))
        .map_err(io_err)?;
    std::fs::write(
        dir.join(META_FILE),
        format!("run_id={}\ncreated_at={}\n", run.run_id, run.created_at),
    )
    .map_err(io_err)?;
    Ok(())
}

/// Load a run directory back, without validating the checksum.
pub fn load_run(dir: &Path) -> Result<ExperimentRun, DataIoError> {
    let config_text = std::fs::read_to_string(dir.join(CONFIG_FILE)).map_err(io_err)?;
    let dataset_csv = std::fs::read_to_string(dir.join(DATASET_FILE)).map_err(io_err)?;
    let meta = std::fs::read_to_string(dir.join(META_FILE)).unwrap_or_default();
    let mut run_id = String::new();
    let mut created_at = String::new();
    for line in meta.lines() {
        if let Some(v) = line.strip_prefix("run_id=") {
            run_id = v.to_string();
        } else if let Some(v) = line.strip_prefix("created_at=") {
            created_at = v.to_string();
        }
    }
    let config = RunConfig::from_text(&config_text)?;
    let mut dataset = ingest_csv(&dataset_csv)?;
    // CSV carries records only; the counting metadata comes from the config.
    dataset.available_units = config.study.targets_per_cell;
    dataset.iterations = config.study.iterations;
    Ok(ExperimentRun {
        run_id,
        config,
        dataset,
        created_at,
    })
}

/// Re-execute a stored simulated run and verify it reproduces the stored
/// dataset byte for byte. The checksum is validated first, so a tampered
/// config or dataset is reported before any simulation happens.
pub fn replay(dir: &Path) -> Result<PickDataset, DataIoError> {
    let config_text = std::fs::read_to_string(dir.join(CONFIG_FILE)).map_err(io_err)?;
    let dataset_csv = std::fs::read_to_string(dir.join(DATASET_FILE)).map_err(io_err)?;
    let stored_checksum = std::fs::read_to_string(dir.join(CHECKSUM_FILE)).map_err(io_err)?;
    if checksum(&config_text, &dataset_csv) != stored_checksum.trim() {
        return Err(DataIoError::ChecksumMismatch);
    }
    let config = RunConfig::from_text(&config_text)?;
    if config.provenance != Provenance::Simulated {
        return Err(DataIoError::Provenance);
    }
    let output = run_parametric_study(&config.study, &config.grid);
    let replayed_csv = emit_csv(&output.dataset);
    if replayed_csv != dataset_csv {
        return Err(DataIoError::ReplayDiverged);
    }
    Ok(output.dataset)
}
