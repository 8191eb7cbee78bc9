//! Dataset interchange (CSV), per-configuration summaries, and the
//! directory-per-run experiment store with deterministic replay.

mod run_store;

pub use run_store::{
    load_run, replay, save_run, ExperimentRun, Provenance, RunConfig, CHECKSUM_FILE, CONFIG_FILE,
    DATASET_FILE, META_FILE,
};

use crate::pick::{PickDataset, PickRecord, Protocol};
use crate::stats::{mean, sample_std};
use thiserror::Error;

/// Interchange header, bit-exact.
pub const CSV_HEADER: &str =
    "protocol,grain_count,tau_mm,lambda_mm,spikes,iteration,seed,picked_mass_g,unit_mass_g,picked_units";

#[derive(Debug, Error, PartialEq)]
pub enum DataIoError {
    #[error("schema error at line {line}: {detail}")]
    Schema { line: usize, detail: String },
    #[error("value error at row {row}: {detail}")]
    Value { row: usize, detail: String },
    #[error("io error: {0}")]
    Io(String),
    #[error("run has external provenance; replay is only defined for simulated runs")]
    Provenance,
    #[error("checksum mismatch: run files were modified after recording")]
    ChecksumMismatch,
    #[error("replayed dataset differs from the stored one")]
    ReplayDiverged,
    #[error("config error: {0}")]
    Config(String),
}

/// Emit a dataset as CSV with the fixed header. Floats are written in
/// their shortest round-trippable form, so ingest(emit(d)) == d.
pub fn emit_csv(dataset: &PickDataset) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &dataset.records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.protocol.name(),
            r.grain_count,
            r.tau_mm,
            r.lambda_mm,
            r.spikes,
            r.iteration,
            r.seed,
            r.picked_mass_g,
            r.unit_mass_g,
            r.picked_units
        ));
    }
    out
}

/// Parse and validate a dataset CSV. Row numbers in errors are 1-based
/// data-row indices; line numbers count the header.
pub fn ingest_csv(text: &str) -> Result<PickDataset, DataIoError> {
    let mut lines = text.lines();
    let header = lines.next().ok_or(DataIoError::Schema {
        line: 1,
        detail: "empty file".to_string(),
    })?;
    if header.trim_end() != CSV_HEADER {
        return Err(DataIoError::Schema {
            line: 1,
            detail: format!("header mismatch: expected {CSV_HEADER:?}"),
        });
    }
    let mut records = Vec::new();
    for (idx, line) in lines.enumerate() {
        let row = idx + 1;
        let line_no = idx + 2;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 10 {
            return Err(DataIoError::Schema {
                line: line_no,
                detail: format!("expected 10 columns, got {}", fields.len()),
            });
        }
        let protocol = Protocol::from_name(fields[0]).ok_or_else(|| DataIoError::Value {
            row,
            detail: format!("unknown protocol {:?}", fields[0]),
        })?;
        let parse_f = |i: usize, name: &str| -> Result<f64, DataIoError> {
            fields[i].parse().map_err(|e| DataIoError::Value {
                row,
                detail: format!("{name}: {e}"),
            })
        };
        let parse_u = |i: usize, name: &str| -> Result<u64, DataIoError> {
            fields[i].parse().map_err(|e| DataIoError::Value {
                row,
                detail: format!("{name}: {e}"),
            })
        };
        let record = PickRecord {
            protocol,
            grain_count: parse_u(1, "grain_count")? as u32,
            tau_mm: parse_f(2, "tau_mm")?,
            lambda_mm: parse_f(3, "lambda_mm")?,
            spikes: parse_u(4, "spikes")? as u32,
            iteration: parse_u(5, "iteration")? as u32,
            seed: parse_u(6, "seed")?,
            picked_mass_g: parse_f(7, "picked_mass_g")?,
            unit_mass_g: parse_f(8, "unit_mass_g")?,
            picked_units: parse_u(9, "picked_units")? as u32,
        };
        if record.picked_mass_g < 0.0 {
            return Err(DataIoError::Value {
                row,
                detail: format!("picked_mass_g must be >= 0, got {}", record.picked_mass_g),
            });
        }
        if record.tau_mm <= 0.0 {
            return Err(DataIoError::Value {
                row,
                detail: format!("tau_mm must be > 0, got {}", record.tau_mm),
            });
        }
        records.push(record);
    }
    Ok(PickDataset::new(records))
}

/// Per-configuration summary statistics (sample std, n-1 denominator).
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigSummary {
    pub protocol: Protocol,
    pub grain_count: u32,
    pub tau_mm: f64,
    pub lambda_mm: f64,
    pub spikes: u32,
    pub mean_units: f64,
    pub std_units: f64,
    pub n: usize,
}

/// Group records by configuration and report mean/std/n of picked units.
/// Single-record groups report std 0 with n = 1 as the flag.
pub fn summarize(dataset: &PickDataset) -> Vec<ConfigSummary> {
    let mut groups: std::collections::BTreeMap<_, Vec<f64>> = std::collections::BTreeMap::new();
    for r in &dataset.records {
        groups
            .entry(r.config_key())
            .or_default()
            .push(r.picked_units as f64);
    }
    groups
        .into_iter()
        .map(|((protocol, grain_count, tau_bits, lambda_bits, spikes), values)| ConfigSummary {
            protocol,
            grain_count,
            tau_mm: f64::from_bits(tau_bits),
            lambda_mm: f64::from_bits(lambda_bits),
            spikes,
            mean_units: mean(&values),
            std_units: if values.len() > 1 {
                sample_std(&values)
            } else {
                0.0
            },
            n: values.len(),
        })
        .collect()
}

/// Summary table as CSV.
pub fn summary_csv(summaries: &[ConfigSummary]) -> String {
    let mut out =
        String::from("protocol,grain_count,tau_mm,lambda_mm,spikes,mean_units,std_units,n\n");
    for s in summaries {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            s.protocol.name(),
            s.grain_count,
            s.tau_mm,
            s.lambda_mm,
            s.spikes,
            s.mean_units,
            s.std_units,
            s.n
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn record(units: u32, iteration: u32) -> PickRecord {
        PickRecord {
            protocol: Protocol::Magnet,
            grain_count: 30,
            tau_mm: 0.2,
            lambda_mm: 120.0,
            spikes: 2,
            iteration,
            seed: 99,
            picked_mass_g: units as f64 * 0.173,
            unit_mass_g: 0.173,
            picked_units: units,
        }
    }

    #[test]
    fn header_only_file_is_empty_dataset() {
        let d = ingest_csv(&format!("{CSV_HEADER}\n")).unwrap();
        assert!(d.is_empty());
    }

    #[test]
    fn bad_header_is_schema_error() {
        let err = ingest_csv("a,b,c\n").unwrap_err();
        assert!(matches!(err, DataIoError::Schema { line: 1, .. }));
    }

    #[test]
    fn negative_mass_is_value_error_with_row() {
        let text = format!(
            "{CSV_HEADER}\nmagnet,30,0.2,120,2,0,1,1.0,0.1,10\nmagnet,30,0.2,120,2,1,1,-1.0,0.1,0\n"
        );
        let err = ingest_csv(&text).unwrap_err();
        assert!(matches!(err, DataIoError::Value { row: 2, .. }), "{err:?}");
    }

    #[test]
    fn zero_tau_is_value_error() {
        let text = format!("{CSV_HEADER}\nmagnet,30,0,120,2,0,1,1.0,0.1,10\n");
        assert!(matches!(
            ingest_csv(&text).unwrap_err(),
            DataIoError::Value { row: 1, .. }
        ));
    }

    #[test]
    fn wrong_column_count_is_schema_error_with_line() {
        let text = format!("{CSV_HEADER}\nmagnet,30,0.2\n");
        assert!(matches!(
            ingest_csv(&text).unwrap_err(),
            DataIoError::Schema { line: 2, .. }
        ));
    }

    #[test]
    fn summarize_hand_values() {
        let dataset = PickDataset::new(vec![record(8, 0), record(12, 1)]);
        let summaries = summarize(&dataset);
        assert_eq!(summaries.len(), 1);
        assert_relative_eq!(summaries[0].mean_units, 10.0);
        assert_relative_eq!(summaries[0].std_units, 8.0f64.sqrt(), epsilon = 1e-12);
        assert_eq!(summaries[0].n, 2);
    }

    #[test]
    fn summarize_single_record_flags_n1() {
        let dataset = PickDataset::new(vec![record(5, 0)]);
        let summaries = summarize(&dataset);
        assert_eq!(summaries[0].n, 1);
        assert_eq!(summaries[0].std_units, 0.0);
    }

    #[test]
    fn summarize_is_permutation_invariant() {
        let mut records: Vec<PickRecord> = (0..10).map(|i| record(i % 4 + 2, i)).collect();
        let forward = summarize(&PickDataset::new(records.clone()));
        records.reverse();
        let backward = summarize(&PickDataset::new(records));
        assert_eq!(forward, backward);
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_lossless(
            units in proptest::collection::vec(0u32..40, 1..30),
            masses in proptest::collection::vec(0.0..10.0f64, 30),
            seeds in proptest::collection::vec(0u64..u64::MAX, 30),
        ) {
            let records: Vec<PickRecord> = units
                .iter()
                .enumerate()
                .map(|(i, &u)| PickRecord {
                    protocol: if i % 2 == 0 { Protocol::Magnet } else { Protocol::Gripper },
                    grain_count: 25 + i as u32,
                    tau_mm: 0.2 + masses[i] / 100.0,
                    lambda_mm: 12.0 * (i as f64 + 1.0) / 3.0,
                    spikes: (i % 3) as u32,
                    iteration: i as u32,
                    seed: seeds[i],
                    picked_mass_g: masses[i],
                    unit_mass_g: 0.173,
                    picked_units: u,
                })
                .collect();
            let dataset = PickDataset::new(records);
            let back = ingest_csv(&emit_csv(&dataset)).unwrap();
            prop_assert_eq!(dataset, back);
        }
    }
}
