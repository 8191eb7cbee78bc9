//! Picking protocols and their experiment records: the electromagnet
//! drop-and-recall sequence, the parallel-gripper baseline, and the
//! parametric study driver.

mod gripper;
mod magnet;
mod study;

pub use gripper::{gripper_pick_protocol, GripperSpec};
pub use magnet::{magnet_pick_protocol, MagnetSpec};
pub use study::{
    grain_count_sweep, net_bag_success_study, run_parametric_study, study_grid_full, StudyCell,
    StudyConfig,
};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PickError {
    #[error("unit mass must be positive, got {0}")]
    NonPositiveUnitMass(f64),
    #[error("no records to evaluate")]
    EmptyRecords,
    #[error("magnet attract step captured no grains")]
    NoGrainsAttached,
    #[error("simulation failed: {0}")]
    Simulation(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Protocol {
    Magnet,
    Gripper,
}

impl Protocol {
    pub fn name(&self) -> &'static str {
        match self {
            Protocol::Magnet => "magnet",
            Protocol::Gripper => "gripper",
        }
    }

    pub fn from_name(s: &str) -> Option<Protocol> {
        match s {
            "magnet" => Some(Protocol::Magnet),
            "gripper" => Some(Protocol::Gripper),
            _ => None,
        }
    }
}

/// One picking iteration: configuration, seed, and what came up.
#[derive(Debug, Clone, PartialEq)]
pub struct PickRecord {
    pub protocol: Protocol,
    pub grain_count: u32,
    pub tau_mm: f64,
    pub lambda_mm: f64,
    pub spikes: u32,
    pub iteration: u32,
    pub seed: u64,
    pub picked_mass_g: f64,
    pub unit_mass_g: f64,
    pub picked_units: u32,
}

impl PickRecord {
    /// Grouping key for per-configuration summaries.
    pub fn config_key(&self) -> (Protocol, u32, u64, u64, u32) {
        (
            self.protocol,
            self.grain_count,
            self.tau_mm.to_bits(),
            self.lambda_mm.to_bits(),
            self.spikes,
        )
    }
}

/// A collection of picking iterations plus the bookkeeping constants that
/// convert masses to unit counts.
#[derive(Debug, Clone, PartialEq)]
pub struct PickDataset {
    pub records: Vec<PickRecord>,
    /// Reference unit mass when one applies to the whole dataset (g).
    pub unit_mass_g: f64,
    pub available_units: u32,
    pub iterations: u32,
}

impl PickDataset {
    pub fn new(records: Vec<PickRecord>) -> PickDataset {
        let unit_mass_g = records.first().map(|r| r.unit_mass_g).unwrap_or(0.0);
        PickDataset {
            records,
            unit_mass_g,
            available_units: 100,
            iterations: 10,
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Picked mass converted to unit counts, clamped to what was available.
pub fn picked_units(picked_mass_g: f64, unit_mass_g: f64, available: u32) -> Result<u32, PickError> {
    if !(unit_mass_g > 0.0) {
        return Err(PickError::NonPositiveUnitMass(unit_mass_g));
    }
    let raw = (picked_mass_g / unit_mass_g).round();
    Ok((raw.max(0.0) as u32).min(available))
}

/// Fraction of records satisfying the success predicate.
pub fn success_rate<F>(records: &[PickRecord], predicate: F) -> Result<f64, PickError>
where
    F: Fn(&PickRecord) -> bool,
{
    if records.is_empty() {
        return Err(PickError::EmptyRecords);
    }
    let hits = records.iter().filter(|r| predicate(r)).count();
    Ok(hits as f64 / records.len() as f64)
}
