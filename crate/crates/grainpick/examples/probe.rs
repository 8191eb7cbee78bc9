//! Calibration probe for the simulation-level experiments. Not part of the
//! test suite; used to inspect settle times, integrity values, and picking
//! trends at desk scale.

use grainpick::entangle::entanglement_graph;
use grainpick::exec::map_ordered;
use grainpick::geometry::GrainType;
use grainpick::pick::{
    grain_count_sweep, run_parametric_study, study_grid_full, StudyCell, StudyConfig,
};
use grainpick::simulate::{
    remove_cylinder_and_relax, settle, shake, spawn_cylinder_scene, structure_height, SimParams,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

fn integrity_run(grain_type: GrainType, seed: u64, params: &SimParams) -> (f64, f64, f64, bool) {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scene = spawn_cylinder_scene(grain_type, 100, seed, &mut rng);
    let s1 = match settle(&mut scene, params) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{} seed {seed}: settle failed: {e}", grain_type.name());
            return (0.0, 0.0, -1.0, false);
        }
    };
    let t1 = t0.elapsed().as_secs_f64();
    let pre_shake = structure_height(&scene);
    let s2 = match shake(&mut scene, params, 2.0, 2.0, 10.0) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{} seed {seed}: shake failed: {e}", grain_type.name());
            return (pre_shake, 0.0, -1.0, false);
        }
    };
    let t2 = t0.elapsed().as_secs_f64();
    let h0 = structure_height(&scene);
    let s3 = match remove_cylinder_and_relax(&mut scene, params, 50.0) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{} seed {seed}: removal failed: {e}", grain_type.name());
            return (pre_shake, h0, -1.0, false);
        }
    };
    let h = structure_height(&scene);
    let integrity = (h / h0).min(1.0);
    let converged = s1.converged && s2.converged && s3.converged;
    eprintln!(
        "  {} seed {seed}: settle {:.0}st/{t1:.0}s shake done at {t2:.0}s removal {:.0}st total {:.0}s conv=({},{},{})",
        grain_type.name(), s1.steps as f64, s3.steps as f64,
        t0.elapsed().as_secs_f64(), s1.converged, s2.converged, s3.converged
    );
    (pre_shake, h0, integrity, converged)
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let mode = args.get(1).map(|s| s.as_str()).unwrap_or("integrity");
    let params = SimParams::default();

    match mode {
        "integrity" => {
            let seeds: Vec<u64> = (0..6).collect();
            for grain_type in [GrainType::I, GrainType::IV, GrainType::V, GrainType::VII] {
                let t0 = Instant::now();
                let results = map_ordered(seeds.clone(), |seed| {
                    integrity_run(grain_type, seed, &params)
                });
                let mut integrities: Vec<f64> = results.iter().map(|r| r.2).collect();
                integrities.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let median = integrities[integrities.len() / 2];
                println!(
                    "type {:<4} median_integrity={:.3} values={:?} h0s={:?} conv={:?} ({:.1}s)",
                    grain_type.name(),
                    median,
                    results.iter().map(|r| (r.2 * 100.0).round() / 100.0).collect::<Vec<_>>(),
                    results.iter().map(|r| (r.1 * 10.0).round() / 10.0).collect::<Vec<_>>(),
                    results.iter().map(|r| r.3).collect::<Vec<_>>(),
                    t0.elapsed().as_secs_f64()
                );
            }
        }
        "graph" => {
            // How many entanglement edges does a settled V pile have?
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            let mut scene = spawn_cylinder_scene(GrainType::V, 100, 3, &mut rng);
            settle(&mut scene, &params).unwrap();
            let graph = entanglement_graph(&scene);
            println!("V pile: {} bodies, {} edges", scene.bodies.len(), graph.edges.len());
            for e in graph.edges.iter().take(10) {
                println!("  {:?}", e);
            }
        }
        "cell" => {
            let config = StudyConfig {
                iterations: 4,
                seed: 5,
                ..StudyConfig::default()
            };
            for cell in [
                StudyCell { tau_mm: 1.0, lambda_mm: 12.0, sigma: 0 },
                StudyCell { tau_mm: 0.2, lambda_mm: 120.0, sigma: 2 },
            ] {
                let t0 = Instant::now();
                let out = run_parametric_study(&config, &[cell]);
                let units: Vec<u32> = out.dataset.records.iter().map(|r| r.picked_units).collect();
                println!(
                    "cell tau={} lambda={} sigma={}: picked={:?} failures={:?} ({:.1}s)",
                    cell.tau_mm, cell.lambda_mm, cell.sigma, units, out.failures,
                    t0.elapsed().as_secs_f64()
                );
            }
        }
        "grid" => {
            let config = StudyConfig {
                iterations: 4,
                seed: 5,
                ..StudyConfig::default()
            };
            let t0 = Instant::now();
            let out = run_parametric_study(&config, &study_grid_full());
            println!("full grid in {:.1}s, failures: {:?}", t0.elapsed().as_secs_f64(), out.failures);
            let summaries = grainpick::data_io::summarize(&out.dataset);
            for s in &summaries {
                println!(
                    "tau={:<4} lambda={:<5} sigma={} mean={:.2} std={:.2}",
                    s.tau_mm, s.lambda_mm, s.spikes, s.mean_units, s.std_units
                );
            }
        }
        "sweep" => {
            let config = StudyConfig {
                iterations: 4,
                seed: 9,
                ..StudyConfig::default()
            };
            let cell = StudyCell { tau_mm: 1.0, lambda_mm: 120.0, sigma: 2 };
            let t0 = Instant::now();
            let out = grain_count_sweep(&config, &cell, &[10, 20, 40, 60]);
            println!("sweep in {:.1}s failures={:?}", t0.elapsed().as_secs_f64(), out.failures);
            let summaries = grainpick::data_io::summarize(&out.dataset);
            for s in &summaries {
                println!("grains={:<4} mean={:.2} std={:.2}", s.grain_count, s.mean_units, s.std_units);
            }
        }
        other => eprintln!("unknown probe mode {other}"),
    }
}
