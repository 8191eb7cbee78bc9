//! Electromagnet drop-and-recall protocol.

use super::PickError;
use crate::entangle::{entanglement_graph, EntanglementGraph, LinkModel};
use crate::simulate::{settle, BodyKind, ScatterSpec, SceneState, SimParams};
use nalgebra::Vector3;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

/// Electromagnetic end-effector. Attraction is kinematic: the magnet is
/// strong enough that capture is binary within a proximity gap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MagnetSpec {
    pub face_diameter_mm: f64,
    /// Vertical proximity within which a ferromagnetic body attaches.
    pub capture_gap_mm: f64,
    /// Rated pull force (recorded metadata; not force-simulated).
    pub max_pull_n: f64,
}

impl Default for MagnetSpec {
    fn default() -> Self {
        MagnetSpec {
            face_diameter_mm: 80.0,
            capture_gap_mm: 3.0,
            max_pull_n: 2000.0,
        }
    }
}

/// Capture every ferromagnetic body reachable from the lowered face:
/// the top layer within the proximity gap seeds the set, and capture then
/// chains through ferromagnetic bodies in near contact (the steel grains
/// magnetize through each other, which is what lets the rated pull collect
/// the whole charge).
pub fn attract_chain(state: &SceneState, magnet: &MagnetSpec) -> BTreeSet<usize> {
    let face_r = magnet.face_diameter_mm / 2.0;
    let in_footprint = |b: &crate::simulate::Body| {
        let p = b.pose.position;
        (p.x * p.x + p.y * p.y).sqrt() <= face_r
    };
    let candidates: Vec<usize> = state
        .bodies
        .iter()
        .filter(|b| b.ferromagnetic && in_footprint(b))
        .map(|b| b.id)
        .collect();
    if candidates.is_empty() {
        return BTreeSet::new();
    }
    let face_z = candidates
        .iter()
        .map(|&i| state.bodies[i].top_z())
        .fold(f64::NEG_INFINITY, f64::max);
    let mut attached: BTreeSet<usize> = candidates
        .iter()
        .copied()
        .filter(|&i| state.bodies[i].top_z() >= face_z - magnet.capture_gap_mm)
        .collect();

    // Chain capture to near-contact ferromagnetic neighbours.
    let world: Vec<_> = state.bodies.iter().map(|b| b.world_capsules()).collect();
    loop {
        let mut grew = false;
        for &i in &candidates {
            if attached.contains(&i) {
                continue;
            }
            'outer: for &j in attached.clone().iter() {
                let bi = &state.bodies[i];
                let bj = &state.bodies[j];
                let centre_gap = (bi.pose.position - bj.pose.position).norm()
                    - bi.bounding_radius
                    - bj.bounding_radius;
                if centre_gap > magnet.capture_gap_mm {
                    continue;
                }
                for ca in &world[i] {
                    for cb in &world[j] {
                        if crate::geometry::capsule_closest_distance(ca, cb).distance
                            <= magnet.capture_gap_mm
                        {
                            attached.insert(i);
                            grew = true;
                            break 'outer;
                        }
                    }
                }
            }
        }
        if !grew {
            break;
        }
    }
    attached
}

/// Closure over probabilistic edges with whole-unit propagation: links of
/// one target cell are rigidly joined, so a picked link brings its unit and
/// the unit's other links keep pulling through their own edges.
pub fn closure_with_units<R: Rng>(
    state: &SceneState,
    graph: &EntanglementGraph,
    seeds: &BTreeSet<usize>,
    link_model: &LinkModel,
    rng: &mut R,
) -> BTreeSet<usize> {
    let held: Vec<bool> = graph
        .edges
        .iter()
        .map(|e| rng.gen::<f64>() < link_model.p_hold(e.depth_mm))
        .collect();
    let adj = graph.adjacency();
    let units = state.unit_members();
    let mut picked = seeds.clone();
    let mut queue: Vec<usize> = seeds.iter().copied().collect();
    while let Some(node) = queue.pop() {
        for &(next, edge) in &adj[node] {
            if held[edge] && picked.insert(next) {
                queue.push(next);
            }
        }
        if let Some(members) = units.get(&state.bodies[node].unit) {
            for &m in members {
                if picked.insert(m) {
                    queue.push(m);
                }
            }
        }
    }
    picked
}

/// Result of one magnet pick: what came up and what it weighed.
#[derive(Debug, Clone)]
pub struct MagnetOutcome {
    /// Mass of picked non-ferromagnetic bodies (g).
    pub picked_target_mass_g: f64,
    /// Distinct target units picked whole.
    pub picked_target_units: usize,
    /// Grains recovered on the magnet (captured directly or entangled).
    pub grains_recovered: usize,
    /// Body count removed from the scene.
    pub bodies_removed: usize,
}

/// One full magnet cycle on a scene that already contains ferromagnetic
/// grains and a target cluster: attract, drop onto the targets, settle,
/// rebuild entanglement, re-attract, and take the closure. Picked bodies
/// are removed from the scene.
pub fn magnet_pick_protocol(
    state: &mut SceneState,
    magnet: &MagnetSpec,
    params: &SimParams,
    link_model: &LinkModel,
    rng: &mut ChaCha8Rng,
) -> Result<MagnetOutcome, PickError> {
    let has_grains = state.bodies.iter().any(|b| b.ferromagnetic);
    if has_grains {
        // Collect the charge of grains wherever it currently sits.
        let captured = attract_chain(state, magnet);
        if captured.is_empty() {
            return Err(PickError::NoGrainsAttached);
        }
        // Drop: scatter the captured grains above the target pile.
        let top = state
            .bodies
            .iter()
            .map(|b| b.top_z())
            .fold(0.0, f64::max);
        let spec = ScatterSpec {
            center: Vector3::new(0.0, 0.0, top + 6.0),
            footprint_radius_mm: magnet.face_diameter_mm / 2.0 - 8.0,
            layer_height_mm: 7.0,
            units_per_layer: 12,
            max_tilt: None,
        };
        for (k, &i) in captured.iter().enumerate() {
            let (rot, pos) = spec.pose_for(k, rng);
            let b = &mut state.bodies[i];
            b.pose.position = pos;
            b.pose.orientation = rot;
            b.linvel = Vector3::zeros();
            b.angvel = Vector3::zeros();
        }
        settle(state, params).map_err(|e| PickError::Simulation(e.to_string()))?;
    }

    let graph = entanglement_graph(state);
    let seeds = attract_chain(state, magnet);
    if has_grains && seeds.is_empty() {
        return Err(PickError::NoGrainsAttached);
    }
    let picked = closure_with_units(state, &graph, &seeds, link_model, rng);

    let mut picked_target_mass = 0.0;
    let mut target_units: BTreeSet<u32> = BTreeSet::new();
    let mut grains = 0usize;
    for &i in &picked {
        let b = &state.bodies[i];
        if matches!(b.kind, BodyKind::Grain(_)) {
            grains += 1;
        } else {
            picked_target_mass += b.mass;
            target_units.insert(b.unit);
        }
    }
    let outcome = MagnetOutcome {
        picked_target_mass_g: picked_target_mass,
        picked_target_units: target_units.len(),
        grains_recovered: grains,
        bodies_removed: picked.len(),
    };
    remove_bodies(state, &picked);
    Ok(outcome)
}

/// Remove bodies by id, reindexing the survivors and their joints.
pub fn remove_bodies(state: &mut SceneState, ids: &BTreeSet<usize>) {
    let mut remap = vec![usize::MAX; state.bodies.len()];
    let mut kept = Vec::with_capacity(state.bodies.len() - ids.len());
    for b in state.bodies.drain(..) {
        if !ids.contains(&b.id) {
            remap[b.id] = kept.len();
            kept.push(b);
        }
    }
    for (new_id, b) in kept.iter_mut().enumerate() {
        b.id = new_id;
    }
    state.bodies = kept;
    state.joints.retain(|j| {
        remap[j.body_a] != usize::MAX && remap[j.body_b] != usize::MAX
    });
    for j in &mut state.joints {
        j.body_a = remap[j.body_a];
        j.body_b = remap[j.body_b];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::GrainType;
    use crate::simulate::{grain_body, transform_unit, Container};
    use nalgebra::UnitQuaternion;
    use rand::SeedableRng;

    fn grain_at(x: f64, z: f64, id: usize, ferro: bool) -> crate::simulate::Body {
        let mut b = grain_body(GrainType::V, 0.095, ferro, id as u32);
        let mut unit = vec![b.clone()];
        transform_unit(
            &mut unit,
            UnitQuaternion::identity(),
            Vector3::new(x, 0.0, z),
        );
        b = unit.pop().unwrap();
        b.id = id;
        b
    }

    #[test]
    fn attract_captures_chained_pile() {
        let mut state = SceneState::new(Container::experiment_bowl(), 0);
        // A vertical stack of near-touching grains: top one seeds, chain
        // capture takes the rest.
        for k in 0..5 {
            state.bodies.push(grain_at(0.0, 1.0 + 2.0 * k as f64, k, true));
        }
        // A far-away grain outside the chain.
        state.bodies.push(grain_at(0.0, 60.0, 5, true));
        let captured = attract_chain(&state, &MagnetSpec::default());
        assert!(captured.contains(&5));
        // The far grain is 50 mm above the stack: it seeds the layer and the
        // stack is beyond the gap from it.
        assert_eq!(captured.len(), 1);
    }

    #[test]
    fn attract_ignores_non_ferromagnetic() {
        let mut state = SceneState::new(Container::experiment_bowl(), 0);
        state.bodies.push(grain_at(0.0, 1.0, 0, false));
        assert!(attract_chain(&state, &MagnetSpec::default()).is_empty());
    }

    #[test]
    fn remove_bodies_reindexes_joints() {
        use crate::geometry::{build_target, MaterialSpec};
        use crate::simulate::{add_unit, target_bodies};
        let mut state = SceneState::new(Container::Plane, 0);
        let t = build_target(1.0, 60.0, 0, &MaterialSpec::acrylic()).unwrap();
        let (bodies, joints) = target_bodies(&t, 3, 2e-4, 0);
        add_unit(&mut state, bodies, joints);
        let (bodies, joints) = target_bodies(&t, 3, 2e-4, 0);
        add_unit(&mut state, bodies, joints);
        // Remove the first unit entirely.
        remove_bodies(&mut state, &[0usize, 1, 2].into_iter().collect());
        assert_eq!(state.bodies.len(), 3);
        assert_eq!(state.joints.len(), 2);
        assert_eq!(state.joints[0].body_a, 0);
        assert_eq!(state.joints[0].body_b, 1);
        for (i, b) in state.bodies.iter().enumerate() {
            assert_eq!(b.id, i);
        }
    }

    #[test]
    fn empty_scene_yields_empty_pick() {
        let mut state = SceneState::new(Container::experiment_bowl(), 0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let outcome = magnet_pick_protocol(
            &mut state,
            &MagnetSpec::default(),
            &SimParams::default(),
            &LinkModel::default(),
            &mut rng,
        )
        .unwrap();
        assert_eq!(outcome.picked_target_units, 0);
        assert_eq!(outcome.grains_recovered, 0);
    }
}
