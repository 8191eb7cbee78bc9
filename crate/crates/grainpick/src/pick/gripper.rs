//! Parallel-gripper baseline: force closure over whatever sits between the
//! jaws, plus entanglement carry-along.

use super::PickError;
use crate::entangle::{entanglement_graph, LinkModel};
use crate::pick::magnet::{closure_with_units, remove_bodies};
use crate::simulate::{BodyKind, SceneState};
use nalgebra::Vector3;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

/// Parallel-jaw gripper closing onto the top of the pile. Dimensions are
/// configuration, not constants: the hardware reference names no numbers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GripperSpec {
    pub jaw_width_mm: f64,
    pub jaw_depth_mm: f64,
    /// Gap remaining between the jaws after the closing stroke.
    pub closed_gap_mm: f64,
}

impl Default for GripperSpec {
    fn default() -> Self {
        GripperSpec {
            jaw_width_mm: 60.0,
            jaw_depth_mm: 18.0,
            closed_gap_mm: 5.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GripperOutcome {
    pub picked_target_mass_g: f64,
    pub picked_target_units: usize,
    pub picked_grain_mass_g: f64,
    pub picked_grain_segments: usize,
    pub bodies_removed: usize,
}

fn segment_hits_box(
    a: Vector3<f64>,
    b: Vector3<f64>,
    radius: f64,
    min: Vector3<f64>,
    max: Vector3<f64>,
) -> bool {
    // Conservative sampling along the axis with the radius as margin.
    const SAMPLES: usize = 12;
    for i in 0..=SAMPLES {
        let t = i as f64 / SAMPLES as f64;
        let p = a + (b - a) * t;
        if p.x >= min.x - radius
            && p.x <= max.x + radius
            && p.y >= min.y - radius
            && p.y <= max.y + radius
            && p.z >= min.z - radius
            && p.z <= max.z + radius
        {
            return true;
        }
    }
    false
}

/// Grasp the settled cluster: bodies intersecting the closed jaw volume are
/// seeds; entangled neighbours ride along. Picked bodies are removed.
pub fn gripper_pick_protocol(
    state: &mut SceneState,
    gripper: &GripperSpec,
    link_model: &LinkModel,
    rng: &mut ChaCha8Rng,
) -> Result<GripperOutcome, PickError> {
    let top = state.bodies.iter().map(|b| b.top_z()).fold(0.0, f64::max);
    let min = Vector3::new(
        -gripper.jaw_width_mm / 2.0,
        -gripper.closed_gap_mm / 2.0,
        top - gripper.jaw_depth_mm,
    );
    let max = Vector3::new(
        gripper.jaw_width_mm / 2.0,
        gripper.closed_gap_mm / 2.0,
        top + 1.0,
    );

    let mut seeds: BTreeSet<usize> = BTreeSet::new();
    for b in &state.bodies {
        for c in b.world_capsules() {
            if segment_hits_box(c.endpoint_a, c.endpoint_b, c.radius, min, max) {
                seeds.insert(b.id);
                break;
            }
        }
    }

    let graph = entanglement_graph(state);
    let picked = closure_with_units(state, &graph, &seeds, link_model, rng);

    let mut outcome = GripperOutcome {
        picked_target_mass_g: 0.0,
        picked_target_units: 0,
        picked_grain_mass_g: 0.0,
        picked_grain_segments: 0,
        bodies_removed: picked.len(),
    };
    let mut target_units = BTreeSet::new();
    for &i in &picked {
        let b = &state.bodies[i];
        match b.kind {
            BodyKind::Grain(t) => {
                outcome.picked_grain_mass_g += b.mass;
                outcome.picked_grain_segments += crate::geometry::segment_count(t);
            }
            _ => {
                outcome.picked_target_mass_g += b.mass;
                target_units.insert(b.unit);
            }
        }
    }
    outcome.picked_target_units = target_units.len();
    remove_bodies(state, &picked);
    Ok(outcome)
}
