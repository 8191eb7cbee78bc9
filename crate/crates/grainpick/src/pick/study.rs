//! Parametric study driver: the 27-cell target grid, grain-count sweeps,
//! and the net-bag success study. Cells run independently and in parallel;
//! all randomness is derived from the study seed.

use super::magnet::{magnet_pick_protocol, MagnetOutcome};
use super::{picked_units, MagnetSpec, PickDataset, PickError, PickRecord, Protocol};
use crate::entangle::LinkModel;
use crate::exec::map_ordered;
use crate::geometry::{build_target, GrainType, MaterialSpec, TargetShape};
use crate::simulate::{
    add_unit, net_bag_body, settle, spawn_grains, spawn_target_bowl_scene, spawn_targets,
    Container, ScatterSpec, SceneState, SimParams,
};
use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// One cell of the target-geometry grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudyCell {
    pub tau_mm: f64,
    pub lambda_mm: f64,
    pub sigma: u32,
}

/// The full 27-cell grid (3 thicknesses x 3 lengths x 3 spike counts).
pub fn study_grid_full() -> Vec<StudyCell> {
    let mut cells = Vec::with_capacity(27);
    for &tau in &[0.2, 0.4, 1.0] {
        for &lambda in &[12.0, 60.0, 120.0] {
            for &sigma in &[0u32, 1, 2] {
                cells.push(StudyCell {
                    tau_mm: tau,
                    lambda_mm: lambda,
                    sigma,
                });
            }
        }
    }
    cells
}

/// Desk-scale study configuration. The defaults trade absolute counts for
/// runtime; trends and orderings are what the study is for.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub iterations: u32,
    pub grain_count: u32,
    pub grain_type: GrainType,
    pub targets_per_cell: u32,
    /// Link length used to subdivide flexible targets (mm).
    pub target_link_length_mm: f64,
    pub seed: u64,
    pub link_d0_mm: f64,
    pub sim: SimParams,
    pub magnet: MagnetSpec,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            iterations: 10,
            grain_count: 30,
            grain_type: GrainType::V,
            targets_per_cell: 18,
            target_link_length_mm: 24.0,
            seed: 0,
            link_d0_mm: 2.0,
            sim: SimParams::default(),
            magnet: MagnetSpec::default(),
        }
    }
}

impl StudyConfig {
    /// Flat key=value snapshot; enough to re-execute a run bit-exactly.
    pub fn to_kv(&self) -> String {
        format!(
            "iterations={}\ngrain_count={}\ngrain_type={}\ntargets_per_cell={}\n\
             target_link_length_mm={}\nseed={}\nlink_d0_mm={}\ndt_s={}\n\
             contact_stiffness_n_per_mm={}\ncontact_damping_ratio={}\nfriction={}\n\
             settle_ke_threshold_nj={}\nmax_steps={}\npenetration_tol_mm={}\n\
             max_speed_mm_s={}\nangular_damping={}\nface_diameter_mm={}\n\
             capture_gap_mm={}\nmax_pull_n={}\n",
            self.iterations,
            self.grain_count,
            self.grain_type.name(),
            self.targets_per_cell,
            self.target_link_length_mm,
            self.seed,
            self.link_d0_mm,
            self.sim.dt_s,
            self.sim.contact_stiffness_n_per_mm,
            self.sim.contact_damping_ratio,
            self.sim.friction,
            self.sim.settle_ke_threshold_nj,
            self.sim.max_steps,
            self.sim.penetration_tol_mm,
            self.sim.max_speed_mm_s,
            self.sim.angular_damping,
            self.magnet.face_diameter_mm,
            self.magnet.capture_gap_mm,
            self.magnet.max_pull_n,
        )
    }

    pub fn from_kv(text: &str) -> Result<StudyConfig, PickError> {
        let mut map = std::collections::HashMap::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some((k, v)) = line.split_once('=') {
                map.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        let get = |k: &str| -> Result<&String, PickError> {
            map.get(k)
                .ok_or_else(|| PickError::Simulation(format!("config missing key {k}")))
        };
        let f = |k: &str| -> Result<f64, PickError> {
            get(k)?
                .parse()
                .map_err(|e| PickError::Simulation(format!("config key {k}: {e}")))
        };
        let u = |k: &str| -> Result<u64, PickError> {
            get(k)?
                .parse()
                .map_err(|e| PickError::Simulation(format!("config key {k}: {e}")))
        };
        Ok(StudyConfig {
            iterations: u("iterations")? as u32,
            grain_count: u("grain_count")? as u32,
            grain_type: GrainType::from_name(get("grain_type")?)
                .ok_or_else(|| PickError::Simulation("bad grain_type".into()))?,
            targets_per_cell: u("targets_per_cell")? as u32,
            target_link_length_mm: f("target_link_length_mm")?,
            seed: u("seed")?,
            link_d0_mm: f("link_d0_mm")?,
            sim: SimParams {
                dt_s: f("dt_s")?,
                contact_stiffness_n_per_mm: f("contact_stiffness_n_per_mm")?,
                contact_damping_ratio: f("contact_damping_ratio")?,
                friction: f("friction")?,
                settle_ke_threshold_nj: f("settle_ke_threshold_nj")?,
                max_steps: u("max_steps")? as usize,
                penetration_tol_mm: f("penetration_tol_mm")?,
                max_speed_mm_s: f("max_speed_mm_s")?,
                angular_damping: f("angular_damping")?,
            },
            magnet: MagnetSpec {
                face_diameter_mm: f("face_diameter_mm")?,
                capture_gap_mm: f("capture_gap_mm")?,
                max_pull_n: f("max_pull_n")?,
            },
        })
    }
}

/// Splitmix-style stream derivation so every cell gets its own seed.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base
        .wrapping_add(0x9E3779B97F4A7C15u64.wrapping_mul(stream.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

fn steel_per_segment_mass() -> f64 {
    crate::simulate::SEGMENT_VOLUME_MM3 * crate::simulate::STEEL_DENSITY_GCC * 1e-3
}

fn target_for_cell(cell: &StudyCell) -> Result<TargetShape, PickError> {
    let material = MaterialSpec::for_study_thickness(cell.tau_mm);
    build_target(cell.tau_mm, cell.lambda_mm, cell.sigma, &material)
        .map_err(|e| PickError::Simulation(e.to_string()))
}

fn subdivisions_for(cell_lambda: f64, link_length: f64) -> usize {
    ((cell_lambda / link_length).round() as usize).max(1)
}

/// Run the iteration loop for one cell on one seeded scene.
fn run_cell(
    config: &StudyConfig,
    cell: &StudyCell,
    cell_seed: u64,
) -> Result<Vec<PickRecord>, PickError> {
    let target = target_for_cell(cell)?;
    let unit_mass = target.unit_mass_g();
    let subdivisions = subdivisions_for(cell.lambda_mm, config.target_link_length_mm);
    let mut rng = ChaCha8Rng::seed_from_u64(cell_seed);
    let mut scene = spawn_target_bowl_scene(
        &target,
        config.targets_per_cell as usize,
        subdivisions,
        &config.sim,
        cell_seed,
        &mut rng,
    );
    settle(&mut scene, &config.sim).map_err(|e| PickError::Simulation(e.to_string()))?;

    let link_model = LinkModel {
        d0_mm: config.link_d0_mm,
    };
    let mut records = Vec::with_capacity(config.iterations as usize);
    let mut grains_held = config.grain_count as usize;
    let mut targets_to_return = 0usize;

    for iteration in 0..config.iterations {
        // Return previously picked targets, then deploy the grain charge.
        if targets_to_return > 0 {
            let top = crate::simulate::structure_height(&scene);
            let spec = ScatterSpec {
                center: Vector3::new(0.0, 0.0, top + 10.0),
                footprint_radius_mm: 30.0,
                layer_height_mm: 8.0,
                units_per_layer: 4,
                max_tilt: Some(0.5),
            };
            spawn_targets(
                &mut scene,
                &target,
                targets_to_return,
                subdivisions,
                config.sim.dt_s,
                &spec,
                &mut rng,
            );
        }
        if grains_held > 0 {
            let top = crate::simulate::structure_height(&scene);
            let spec = ScatterSpec {
                center: Vector3::new(0.0, 0.0, top + 8.0),
                footprint_radius_mm: config.magnet.face_diameter_mm / 2.0 - 8.0,
                layer_height_mm: 7.0,
                units_per_layer: 10,
                max_tilt: None,
            };
            spawn_grains(
                &mut scene,
                config.grain_type,
                grains_held,
                steel_per_segment_mass(),
                true,
                &spec,
                &mut rng,
            );
        }

        let outcome: MagnetOutcome = magnet_pick_protocol(
            &mut scene,
            &config.magnet,
            &config.sim,
            &link_model,
            &mut rng,
        )?;

        let units = picked_units(
            outcome.picked_target_mass_g,
            unit_mass,
            config.targets_per_cell,
        )?;
        records.push(PickRecord {
            protocol: Protocol::Magnet,
            grain_count: config.grain_count,
            tau_mm: cell.tau_mm,
            lambda_mm: cell.lambda_mm,
            spikes: cell.sigma,
            iteration,
            seed: cell_seed,
            picked_mass_g: outcome.picked_target_mass_g,
            unit_mass_g: unit_mass,
            picked_units: units,
        });
        grains_held = outcome.grains_recovered.max(1);
        targets_to_return = outcome.picked_target_units;
    }
    Ok(records)
}

/// Study output: the dataset plus any per-cell failures (failed cells are
/// skipped, the rest of the study continues).
#[derive(Debug, Clone)]
pub struct StudyOutput {
    pub dataset: PickDataset,
    pub failures: Vec<(StudyCell, String)>,
}

/// Run `iterations` picks for every cell of the grid. Cells execute
/// independently (parallel when enabled) on seeds derived from the study
/// seed, so output is reproducible and order-stable.
pub fn run_parametric_study(config: &StudyConfig, grid: &[StudyCell]) -> StudyOutput {
    let indexed: Vec<(usize, StudyCell)> = grid.iter().copied().enumerate().collect();
    let results = map_ordered(indexed, |(idx, cell)| {
        let cell_seed = derive_seed(config.seed, idx as u64);
        (cell, run_cell(config, &cell, cell_seed))
    });
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (cell, result) in results {
        match result {
            Ok(mut cell_records) => records.append(&mut cell_records),
            Err(e) => failures.push((cell, e.to_string())),
        }
    }
    let mut dataset = PickDataset::new(records);
    dataset.iterations = config.iterations;
    dataset.available_units = config.targets_per_cell;
    StudyOutput { dataset, failures }
}

/// Grain-count sweep on a fixed target configuration (one cell), returning
/// one dataset with grain_count varying across records.
pub fn grain_count_sweep(
    config: &StudyConfig,
    cell: &StudyCell,
    grain_counts: &[u32],
) -> StudyOutput {
    let runs: Vec<(usize, u32)> = grain_counts.iter().copied().enumerate().collect();
    let results = map_ordered(runs, |(idx, count)| {
        let mut cfg = config.clone();
        cfg.grain_count = count;
        let cell_seed = derive_seed(config.seed, 1000 + idx as u64);
        (count, run_cell(&cfg, cell, cell_seed))
    });
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (_, result) in results {
        match result {
            Ok(mut r) => records.append(&mut r),
            Err(e) => failures.push((*cell, e.to_string())),
        }
    }
    let mut dataset = PickDataset::new(records);
    dataset.iterations = config.iterations;
    dataset.available_units = config.targets_per_cell;
    StudyOutput { dataset, failures }
}

/// Net-bag success study: one meshed target in the bowl, picked or not per
/// iteration, swept over grain counts. Success means the whole bag came up.
pub fn net_bag_success_study(
    config: &StudyConfig,
    grain_counts: &[u32],
) -> Result<Vec<(u32, f64)>, PickError> {
    let runs: Vec<(usize, u32)> = grain_counts.iter().copied().enumerate().collect();
    let results = map_ordered(runs, |(idx, count)| {
        let seed = derive_seed(config.seed, 2000 + idx as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let link_model = LinkModel {
            d0_mm: config.link_d0_mm,
        };
        let mut successes = 0u32;
        for _ in 0..config.iterations {
            let mut scene = SceneState::new(Container::experiment_bowl(), seed);
            let bag = net_bag_body(4, 15.0, 1.0, 40.0, 0);
            add_unit(&mut scene, vec![bag], vec![]);
            if let Err(e) = settle(&mut scene, &config.sim) {
                return (count, Err(PickError::Simulation(e.to_string())));
            }
            let top = crate::simulate::structure_height(&scene);
            let spec = ScatterSpec {
                center: Vector3::new(0.0, 0.0, top + 8.0),
                footprint_radius_mm: config.magnet.face_diameter_mm / 2.0 - 8.0,
                layer_height_mm: 7.0,
                units_per_layer: 10,
                max_tilt: None,
            };
            spawn_grains(
                &mut scene,
                config.grain_type,
                count as usize,
                steel_per_segment_mass(),
                true,
                &spec,
                &mut rng,
            );
            match magnet_pick_protocol(
                &mut scene,
                &config.magnet,
                &config.sim,
                &link_model,
                &mut rng,
            ) {
                Ok(outcome) => {
                    if outcome.picked_target_units > 0 {
                        successes += 1;
                    }
                }
                Err(PickError::NoGrainsAttached) => {}
                Err(e) => return (count, Err(e)),
            }
        }
        (count, Ok(successes as f64 / config.iterations as f64))
    });
    results
        .into_iter()
        .map(|(count, r)| r.map(|rate| (count, rate)))
        .collect()
}
