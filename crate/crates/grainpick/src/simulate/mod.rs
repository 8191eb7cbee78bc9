//! Quasi-static capsule-contact dynamics: drop, shake, and settle bodies in
//! containers; measure structure height, packing fraction, and integrity.
//!
//! The engine integrates semi-implicitly with penalty-spring contacts and a
//! Coulomb-capped viscous friction law. Pair stiffness is mass-proportional
//! (constant contact frequency), so light mylar links and heavy steel grains
//! share one stable time step. Stepping uses no RNG and iterates contact
//! pairs in a fixed order: identical inputs give bit-identical trajectories.

mod engine;
mod metrics;
mod scenes;
mod snapshot;

pub use engine::{remove_cylinder_and_relax, settle, shake, step, total_kinetic_energy, SettleOutcome};
pub use metrics::{integrity, packing_fraction, structure_height};
pub use scenes::{
    add_unit, body_from_capsules, body_from_link, grain_bodies_for_budget, grain_body,
    net_bag_body, random_orientation, spawn_cylinder_scene, spawn_grains, spawn_target_bowl_scene,
    spawn_targets, target_bodies, transform_unit, ScatterSpec, SEGMENT_VOLUME_MM3,
    STEEL_DENSITY_GCC,
};
pub use snapshot::{
    read_scene_snapshot, write_scene_snapshot, SceneSnapshot, SnapshotBody, TrajectoryRecorder,
};

use crate::geometry::{Capsule, CaptureRegion, GrainType};
use nalgebra::{Matrix3, UnitQuaternion, Vector3};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("instability: body {body} reached {speed_mm_s:.0} mm/s at t={time_s:.4}s")]
    Instability {
        body: usize,
        speed_mm_s: f64,
        time_s: f64,
    },
    #[error("container has no wall to remove")]
    NoWall,
    #[error("invalid metric input: {0}")]
    Metric(&'static str),
    #[error("snapshot parse error: {0}")]
    Snapshot(String),
}

/// Containers a scene can run in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Container {
    /// Open-topped cylinder standing on a floor plane at z = 0.
    Cylinder { diameter_mm: f64, height_mm: f64 },
    /// Truncated-cone bowl: flat bottom disk, linearly widening wall.
    Bowl {
        bottom_diameter_mm: f64,
        top_diameter_mm: f64,
        depth_mm: f64,
    },
    /// Bare floor plane at z = 0.
    Plane,
}

impl Container {
    /// Packing/integrity cylinder from the experiments (30 mm x 100 mm).
    pub fn experiment_cylinder() -> Container {
        Container::Cylinder {
            diameter_mm: 30.0,
            height_mm: 100.0,
        }
    }

    /// Picking bowl: 80 mm bottom opening widening to 200 mm.
    pub fn experiment_bowl() -> Container {
        Container::Bowl {
            bottom_diameter_mm: 80.0,
            top_diameter_mm: 200.0,
            depth_mm: 60.0,
        }
    }

    pub fn descriptor(&self) -> String {
        match self {
            Container::Cylinder {
                diameter_mm,
                height_mm,
            } => format!("cylinder diameter_mm={diameter_mm} height_mm={height_mm}"),
            Container::Bowl {
                bottom_diameter_mm,
                top_diameter_mm,
                depth_mm,
            } => format!(
                "bowl bottom_diameter_mm={bottom_diameter_mm} top_diameter_mm={top_diameter_mm} depth_mm={depth_mm}"
            ),
            Container::Plane => "plane".to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BodyKind {
    Grain(GrainType),
    TargetLink,
    NetBag,
    Fixture,
}

impl BodyKind {
    pub fn name(&self) -> String {
        match self {
            BodyKind::Grain(t) => format!("grain:{}", t.name()),
            BodyKind::TargetLink => "target".to_string(),
            BodyKind::NetBag => "netbag".to_string(),
            BodyKind::Fixture => "fixture".to_string(),
        }
    }
}

/// Position and orientation of a body's centre of mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub position: Vector3<f64>,
    pub orientation: UnitQuaternion<f64>,
}

impl Pose {
    pub fn identity() -> Pose {
        Pose {
            position: Vector3::zeros(),
            orientation: UnitQuaternion::identity(),
        }
    }

    pub fn transform_point(&self, p: Vector3<f64>) -> Vector3<f64> {
        self.orientation * p + self.position
    }

    pub fn transform_dir(&self, d: Vector3<f64>) -> Vector3<f64> {
        self.orientation * d
    }
}

/// One rigid body: capsules and capture regions in a COM-centred local
/// frame plus kinematic state.
#[derive(Debug, Clone)]
pub struct Body {
    pub id: usize,
    pub kind: BodyKind,
    /// Unit this body belongs to (target links of one cell share a unit).
    pub unit: u32,
    pub capsules: Vec<Capsule>,
    pub regions: Vec<CaptureRegion>,
    pub pose: Pose,
    pub linvel: Vector3<f64>,
    pub angvel: Vector3<f64>,
    pub mass: f64,
    pub inv_mass: f64,
    pub inertia_body: Matrix3<f64>,
    pub inv_inertia_body: Matrix3<f64>,
    pub ferromagnetic: bool,
    /// Frozen bodies do not integrate (fixtures, magnet-held bodies).
    pub frozen: bool,
    pub bounding_radius: f64,
}

impl Body {
    /// Capsules transformed into the world frame.
    pub fn world_capsules(&self) -> Vec<Capsule> {
        self.capsules
            .iter()
            .map(|c| Capsule {
                endpoint_a: self.pose.transform_point(c.endpoint_a),
                endpoint_b: self.pose.transform_point(c.endpoint_b),
                radius: c.radius,
                body_id: self.id,
                ferromagnetic: self.ferromagnetic,
            })
            .collect()
    }

    /// Highest surface point of the body (world z of top of any capsule).
    pub fn top_z(&self) -> f64 {
        self.world_capsules()
            .iter()
            .map(|c| c.endpoint_a.z.max(c.endpoint_b.z) + c.radius)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn world_inv_inertia(&self) -> Matrix3<f64> {
        let r = self.pose.orientation.to_rotation_matrix();
        r * self.inv_inertia_body * r.transpose()
    }
}

/// Spring-pinned hinge between two links of an articulated target, with an
/// angular spring whose stiffness derives from the cell's bending stiffness.
#[derive(Debug, Clone, Copy)]
pub struct Joint {
    pub body_a: usize,
    pub body_b: usize,
    /// Hinge point in each body's local frame.
    pub anchor_a: Vector3<f64>,
    pub anchor_b: Vector3<f64>,
    /// Link axis direction in each body's local frame.
    pub axis_a: Vector3<f64>,
    pub axis_b: Vector3<f64>,
    /// Angular spring stiffness (torque units per radian), already clamped
    /// for stability.
    pub bend_stiffness: f64,
}

/// Parameters of the penalty-contact integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimParams {
    pub dt_s: f64,
    /// Upper cap on pair stiffness (N/mm); pair stiffness is otherwise
    /// mass-proportional at a fixed contact frequency.
    pub contact_stiffness_n_per_mm: f64,
    /// Damping ratio of the contact spring-damper.
    pub contact_damping_ratio: f64,
    /// Coulomb friction coefficient.
    pub friction: f64,
    /// Settle exit threshold on total kinetic energy (nJ; 1 nJ = 1e-9 J).
    pub settle_ke_threshold_nj: f64,
    pub max_steps: usize,
    pub penetration_tol_mm: f64,
    /// Blow-up sentinel (10 m/s).
    pub max_speed_mm_s: f64,
    /// Per-step angular velocity damping factor.
    pub angular_damping: f64,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            dt_s: 2e-4,
            contact_stiffness_n_per_mm: 0.4,
            contact_damping_ratio: 0.9,
            friction: 0.5,
            settle_ke_threshold_nj: 1.0,
            max_steps: 50_000,
            penetration_tol_mm: 0.5,
            max_speed_mm_s: 10_000.0,
            angular_damping: 2e-3,
        }
    }
}

/// The unit of simulation: bodies, joints, container, and time.
#[derive(Debug, Clone)]
pub struct SceneState {
    pub bodies: Vec<Body>,
    pub joints: Vec<Joint>,
    pub container: Container,
    /// Shake animation displacement of the whole container.
    pub container_offset: Vector3<f64>,
    /// Height the cylinder wall has been lifted during removal.
    pub wall_lift_mm: f64,
    pub wall_present: bool,
    pub gravity_mm_s2: f64,
    pub rng_seed: u64,
    pub time_s: f64,
}

impl SceneState {
    pub fn new(container: Container, rng_seed: u64) -> SceneState {
        SceneState {
            bodies: Vec::new(),
            joints: Vec::new(),
            container,
            container_offset: Vector3::zeros(),
            wall_lift_mm: 0.0,
            wall_present: !matches!(container, Container::Plane),
            gravity_mm_s2: crate::GRAVITY_MM_S2,
            rng_seed,
            time_s: 0.0,
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.bodies.iter().map(|b| b.mass).sum()
    }

    pub fn floor_z(&self) -> f64 {
        self.container_offset.z
    }

    /// Units present in the scene, with the body ids belonging to each.
    pub fn unit_members(&self) -> std::collections::BTreeMap<u32, Vec<usize>> {
        let mut map = std::collections::BTreeMap::new();
        for b in &self.bodies {
            map.entry(b.unit).or_insert_with(Vec::new).push(b.id);
        }
        map
    }

    pub fn next_unit(&self) -> u32 {
        self.bodies.iter().map(|b| b.unit + 1).max().unwrap_or(0)
    }
}
