//! Scene construction: rigid bodies from discretized shapes, randomized
//! deployment of units into containers, and the experiment scene builders.

use super::{Body, BodyKind, Container, Joint, Pose, SceneState, SimParams};
use crate::geometry::{
    build_grain, discretize_grain, discretize_target, Capsule, CaptureRegion, DiscretizedShape,
    GrainType, TargetShape, DEFAULT_ARC_SUBDIVISIONS, PER_SEGMENT_MASS_G,
};
use nalgebra::{Matrix3, UnitQuaternion, Vector3};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Density of the stainless-steel picking grains (g/cc).
pub const STEEL_DENSITY_GCC: f64 = 7.9;
/// Nominal volume of one 12 x 1 x 1 mm segment (mm³).
pub const SEGMENT_VOLUME_MM3: f64 = 12.0;

/// Mass-weighted assembly of a capsule group into a COM-centred rigid body.
pub fn body_from_capsules(
    capsules: Vec<Capsule>,
    regions: Vec<CaptureRegion>,
    mass: f64,
    kind: BodyKind,
    ferromagnetic: bool,
    unit: u32,
) -> Body {
    let lengths: Vec<f64> = capsules.iter().map(|c| c.outer_length().max(1e-9)).collect();
    let total_len: f64 = lengths.iter().sum();
    let com = capsules
        .iter()
        .zip(&lengths)
        .map(|(c, l)| c.midpoint() * *l)
        .sum::<Vector3<f64>>()
        / total_len;

    let capsules: Vec<Capsule> = capsules
        .into_iter()
        .map(|c| c.translated(-com))
        .collect();
    let regions: Vec<CaptureRegion> = regions.iter().map(|r| r.translated(-com)).collect();

    // Thin-rod inertia per capsule plus parallel-axis transport to the COM.
    let mut inertia = Matrix3::zeros();
    for (c, l) in capsules.iter().zip(&lengths) {
        let m = mass * l / total_len;
        let axis_len = c.axis_length().max(1e-9);
        let u = (c.endpoint_b - c.endpoint_a) / axis_len;
        let r2 = c.radius * c.radius;
        let i_axial = 0.5 * m * r2;
        let i_perp = m * (axis_len * axis_len / 12.0 + r2 / 4.0);
        let uut = u * u.transpose();
        let rod = uut * i_axial + (Matrix3::identity() - uut) * i_perp;
        let d = c.midpoint();
        let transport = (Matrix3::identity() * d.norm_squared() - d * d.transpose()) * m;
        inertia += rod + transport;
    }
    // Floor the principal inertias so near-degenerate bodies stay invertible.
    let floor = 1e-3 * mass;
    for i in 0..3 {
        if inertia[(i, i)] < floor {
            inertia[(i, i)] = floor;
        }
    }
    let inv_inertia = inertia.try_inverse().expect("inertia tensor invertible");

    let bounding_radius = capsules
        .iter()
        .map(|c| c.endpoint_a.norm().max(c.endpoint_b.norm()) + c.radius)
        .fold(0.0, f64::max);

    Body {
        id: 0,
        kind,
        unit,
        capsules,
        regions,
        pose: Pose::identity(),
        linvel: Vector3::zeros(),
        angvel: Vector3::zeros(),
        mass,
        inv_mass: 1.0 / mass,
        inertia_body: inertia,
        inv_inertia_body: inv_inertia,
        ferromagnetic,
        frozen: false,
        bounding_radius,
    }
}

/// Build the rigid body for one link of a discretized shape. The body pose
/// is set so that world coordinates initially match the shape frame.
pub fn body_from_link(
    shape: &DiscretizedShape,
    link: usize,
    link_mass: f64,
    kind: BodyKind,
    ferromagnetic: bool,
    unit: u32,
) -> Body {
    let capsules: Vec<Capsule> = shape
        .capsules
        .iter()
        .zip(&shape.capsule_link)
        .filter(|(_, l)| **l == link)
        .map(|(c, _)| *c)
        .collect();
    let regions: Vec<CaptureRegion> = shape
        .regions
        .iter()
        .zip(&shape.region_link)
        .filter(|(_, l)| **l == link)
        .map(|(r, _)| *r)
        .collect();
    let lengths: Vec<f64> = capsules.iter().map(|c| c.outer_length().max(1e-9)).collect();
    let total_len: f64 = lengths.iter().sum();
    let com = capsules
        .iter()
        .zip(&lengths)
        .map(|(c, l)| c.midpoint() * *l)
        .sum::<Vector3<f64>>()
        / total_len;
    let mut body = body_from_capsules(capsules, regions, link_mass, kind, ferromagnetic, unit);
    body.pose.position = com;
    body
}

/// One grain as a single rigid body, posed at the shape frame origin.
pub fn grain_body(
    grain_type: GrainType,
    per_segment_mass_g: f64,
    ferromagnetic: bool,
    unit: u32,
) -> Body {
    let shape = build_grain(grain_type);
    let d = discretize_grain(&shape, DEFAULT_ARC_SUBDIVISIONS);
    let mass = shape.total_segments() as f64 * per_segment_mass_g;
    body_from_link(&d, 0, mass, BodyKind::Grain(grain_type), ferromagnetic, unit)
}

/// All links and joints of one target cell, in the shape frame. Joint body
/// indices refer to the returned vector and are offset on insertion.
pub fn target_bodies(
    target: &TargetShape,
    subdivisions: usize,
    dt_s: f64,
    unit: u32,
) -> (Vec<Body>, Vec<Joint>) {
    let d = discretize_target(target, subdivisions);
    let section = target.thickness_mm * target.thickness_mm;
    let density = target.density_gcc * 1e-3; // g/mm3
    let pitch_nominal = target.length_mm / d.n_links as f64;
    let mut bodies = Vec::with_capacity(d.n_links);
    for link in 0..d.n_links {
        // Nominal pitch share plus the spikes riding on this link; sums to
        // the cell's unit mass exactly.
        let spikes_on_link = d
            .capsule_link
            .iter()
            .skip(d.n_links)
            .filter(|&&l| l == link)
            .count() as f64;
        let link_volume =
            (pitch_nominal + spikes_on_link * target.spike_length_mm) * section;
        let mass = (link_volume * density).max(1e-6);
        bodies.push(body_from_link(
            &d,
            link,
            mass,
            BodyKind::TargetLink,
            false,
            unit,
        ));
    }
    let pitch = target.length_mm / d.n_links as f64;
    let joints = d
        .joints
        .iter()
        .map(|j| {
            let (a, b) = (j.link_a, j.link_b);
            let m_eff = 1.0 / (1.0 / bodies[a].mass + 1.0 / bodies[b].mass);
            // EI (mN·m²) converted to torque-per-radian in g·mm²/s² units,
            // clamped so the bend mode stays below the contact frequency.
            let raw = target.bending_stiffness_mnm2 * 1e9 / pitch;
            let omega = 0.2 / dt_s;
            let i_perp = m_eff * pitch * pitch / 12.0;
            let stiffness = raw.min(0.25 * i_perp * omega * omega);
            Joint {
                body_a: a,
                body_b: b,
                anchor_a: j.anchor - bodies[a].pose.position,
                anchor_b: j.anchor - bodies[b].pose.position,
                axis_a: Vector3::x(),
                axis_b: Vector3::x(),
                bend_stiffness: stiffness,
            }
        })
        .collect();
    (bodies, joints)
}

/// A coarse net-bag target: a rigid lattice of capsules whose cells act as
/// capture openings.
pub fn net_bag_body(cells: usize, pitch_mm: f64, strand_radius_mm: f64, mass_g: f64, unit: u32) -> Body {
    let span = cells as f64 * pitch_mm;
    let half = span / 2.0;
    let mut capsules = Vec::new();
    for i in 0..=cells {
        let offset = i as f64 * pitch_mm - half;
        capsules.push(Capsule::new(
            Vector3::new(-half, offset, 0.0),
            Vector3::new(half, offset, 0.0),
            strand_radius_mm,
        ));
        capsules.push(Capsule::new(
            Vector3::new(offset, -half, 0.0),
            Vector3::new(offset, half, 0.0),
            strand_radius_mm,
        ));
    }
    let mut regions = Vec::new();
    for i in 0..cells {
        for j in 0..cells {
            regions.push(CaptureRegion::Quad {
                origin: Vector3::new(i as f64 * pitch_mm - half, j as f64 * pitch_mm - half, 0.0),
                edge_u: Vector3::new(pitch_mm, 0.0, 0.0),
                edge_v: Vector3::new(0.0, pitch_mm, 0.0),
            });
        }
    }
    body_from_capsules(capsules, regions, mass_g, BodyKind::NetBag, false, unit)
}

/// Apply one rigid transform to every body of a unit.
pub fn transform_unit(
    bodies: &mut [Body],
    rotation: UnitQuaternion<f64>,
    translation: Vector3<f64>,
) {
    for b in bodies {
        b.pose.position = rotation * b.pose.position + translation;
        b.pose.orientation = rotation * b.pose.orientation;
    }
}

/// Insert a unit into the scene, assigning fresh body ids and a fresh unit
/// number, and offsetting joint indices.
pub fn add_unit(scene: &mut SceneState, mut bodies: Vec<Body>, joints: Vec<Joint>) -> u32 {
    let unit = scene.next_unit();
    let base = scene.bodies.len();
    for (i, b) in bodies.iter_mut().enumerate() {
        b.id = base + i;
        b.unit = unit;
    }
    scene.bodies.extend(bodies);
    scene.joints.extend(joints.into_iter().map(|mut j| {
        j.body_a += base;
        j.body_b += base;
        j
    }));
    unit
}

/// Randomized placement spec for dropping units into a container.
#[derive(Debug, Clone, Copy)]
pub struct ScatterSpec {
    pub center: Vector3<f64>,
    pub footprint_radius_mm: f64,
    pub layer_height_mm: f64,
    pub units_per_layer: usize,
    /// None: uniform random orientation. Some(t): random yaw with tilt
    /// bounded by t radians (for strip-like units dropped flat).
    pub max_tilt: Option<f64>,
}

impl ScatterSpec {
    pub fn pose_for(&self, index: usize, rng: &mut ChaCha8Rng) -> (UnitQuaternion<f64>, Vector3<f64>) {
        let layer = index / self.units_per_layer.max(1);
        let angle = rng.gen_range(0.0..std::f64::consts::TAU);
        let radius = self.footprint_radius_mm * rng.gen_range(0.0..1.0f64).sqrt();
        let translation = Vector3::new(
            self.center.x + radius * angle.cos(),
            self.center.y + radius * angle.sin(),
            self.center.z + layer as f64 * self.layer_height_mm,
        );
        let rotation = match self.max_tilt {
            None => random_orientation(rng),
            Some(max_tilt) => {
                let yaw = UnitQuaternion::from_axis_angle(
                    &Vector3::z_axis(),
                    rng.gen_range(0.0..std::f64::consts::TAU),
                );
                let tilt_axis = UnitQuaternion::from_axis_angle(
                    &Vector3::z_axis(),
                    rng.gen_range(0.0..std::f64::consts::TAU),
                ) * Vector3::x_axis();
                let tilt =
                    UnitQuaternion::from_axis_angle(&tilt_axis, rng.gen_range(-max_tilt..max_tilt));
                tilt * yaw
            }
        };
        (rotation, translation)
    }
}

/// Uniform random orientation from four normal deviates.
pub fn random_orientation(rng: &mut ChaCha8Rng) -> UnitQuaternion<f64> {
    let mut normal = || {
        let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        let u2: f64 = rng.gen_range(0.0..1.0);
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    };
    let q = nalgebra::Quaternion::new(normal(), normal(), normal(), normal());
    UnitQuaternion::from_quaternion(q)
}

/// Number of grains holding a given segment budget (e.g. 33 type-V grains
/// for a 100-segment specimen).
pub fn grain_bodies_for_budget(grain_type: GrainType, segment_budget: usize) -> usize {
    let per = crate::geometry::segment_count(grain_type);
    (segment_budget as f64 / per as f64).round().max(1.0) as usize
}

/// Scatter grain units into the scene above the given base height.
pub fn spawn_grains(
    scene: &mut SceneState,
    grain_type: GrainType,
    count: usize,
    per_segment_mass_g: f64,
    ferromagnetic: bool,
    spec: &ScatterSpec,
    rng: &mut ChaCha8Rng,
) {
    for i in 0..count {
        let body = grain_body(grain_type, per_segment_mass_g, ferromagnetic, 0);
        let (rot, pos) = spec.pose_for(i, rng);
        let mut unit = vec![body];
        transform_unit(&mut unit, rot, pos);
        add_unit(scene, unit, vec![]);
    }
}

/// Scatter target units into the scene.
pub fn spawn_targets(
    scene: &mut SceneState,
    target: &TargetShape,
    count: usize,
    subdivisions: usize,
    dt_s: f64,
    spec: &ScatterSpec,
    rng: &mut ChaCha8Rng,
) {
    for i in 0..count {
        let (mut bodies, joints) = target_bodies(target, subdivisions, dt_s, 0);
        let (rot, pos) = spec.pose_for(i, rng);
        transform_unit(&mut bodies, rot, pos);
        add_unit(scene, bodies, joints);
    }
}

/// Packing/integrity scene: grains worth `segment_budget` segments dropped
/// into the experiment cylinder. Not yet settled.
pub fn spawn_cylinder_scene(
    grain_type: GrainType,
    segment_budget: usize,
    seed: u64,
    rng: &mut ChaCha8Rng,
) -> SceneState {
    let mut scene = SceneState::new(Container::experiment_cylinder(), seed);
    let count = grain_bodies_for_budget(grain_type, segment_budget);
    let spec = ScatterSpec {
        center: Vector3::new(0.0, 0.0, 10.0),
        footprint_radius_mm: 6.0,
        layer_height_mm: 9.0,
        units_per_layer: 2,
        max_tilt: None,
    };
    spawn_grains(
        &mut scene,
        grain_type,
        count,
        PER_SEGMENT_MASS_G,
        false,
        &spec,
        rng,
    );
    scene
}

/// Picking scene: target cells dropped into the experiment bowl. Not yet
/// settled.
pub fn spawn_target_bowl_scene(
    target: &TargetShape,
    count: usize,
    subdivisions: usize,
    params: &SimParams,
    seed: u64,
    rng: &mut ChaCha8Rng,
) -> SceneState {
    let mut scene = SceneState::new(Container::experiment_bowl(), seed);
    let spec = ScatterSpec {
        center: Vector3::new(0.0, 0.0, 15.0),
        footprint_radius_mm: 30.0,
        layer_height_mm: 8.0,
        units_per_layer: 4,
        max_tilt: Some(0.5),
    };
    spawn_targets(
        &mut scene,
        target,
        count,
        subdivisions,
        params.dt_s,
        &spec,
        rng,
    );
    scene
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_target, MaterialSpec};
    use approx::assert_relative_eq;
    use rand::SeedableRng;

    #[test]
    fn grain_body_mass_and_com() {
        let b = grain_body(GrainType::V, 0.04, false, 0);
        assert_relative_eq!(b.mass, 0.12, epsilon = 1e-12);
        assert_eq!(b.capsules.len(), 3);
        // COM-centred: length-weighted capsule midpoints cancel.
        let com: Vector3<f64> = b
            .capsules
            .iter()
            .map(|c| c.midpoint() * c.outer_length())
            .sum::<Vector3<f64>>()
            / b.capsules.iter().map(|c| c.outer_length()).sum::<f64>();
        assert!(com.norm() < 1e-9);
        assert!(b.bounding_radius > 6.0 && b.bounding_radius < 20.0);
    }

    #[test]
    fn target_link_masses_sum_to_unit_mass() {
        let m = MaterialSpec::acrylic();
        let t = build_target(1.0, 120.0, 2, &m).unwrap();
        let (bodies, joints) = target_bodies(&t, 5, 2e-4, 0);
        assert_eq!(bodies.len(), 5);
        assert_eq!(joints.len(), 4);
        let total: f64 = bodies.iter().map(|b| b.mass).sum();
        assert_relative_eq!(total, t.unit_mass_g(), max_relative = 1e-6);
        for j in &joints {
            assert!(j.bend_stiffness > 0.0);
        }
    }

    #[test]
    fn add_unit_assigns_ids_and_offsets_joints() {
        let m = MaterialSpec::acrylic();
        let t = build_target(1.0, 60.0, 0, &m).unwrap();
        let mut scene = SceneState::new(Container::Plane, 0);
        let (bodies, joints) = target_bodies(&t, 3, 2e-4, 0);
        add_unit(&mut scene, bodies.clone(), joints.clone());
        let (bodies2, joints2) = target_bodies(&t, 3, 2e-4, 0);
        add_unit(&mut scene, bodies2, joints2);
        assert_eq!(scene.bodies.len(), 6);
        assert_eq!(scene.joints.len(), 4);
        assert_eq!(scene.joints[2].body_a, 3);
        assert_eq!(scene.bodies[4].unit, 1);
    }

    #[test]
    fn scatter_is_deterministic_per_seed() {
        let mut rng1 = ChaCha8Rng::seed_from_u64(5);
        let mut rng2 = ChaCha8Rng::seed_from_u64(5);
        let a = spawn_cylinder_scene(GrainType::V, 60, 5, &mut rng1);
        let b = spawn_cylinder_scene(GrainType::V, 60, 5, &mut rng2);
        for (x, y) in a.bodies.iter().zip(&b.bodies) {
            assert_eq!(x.pose.position, y.pose.position);
            assert_eq!(x.pose.orientation, y.pose.orientation);
        }
    }

    #[test]
    fn net_bag_has_cell_regions() {
        let bag = net_bag_body(4, 15.0, 1.0, 30.0, 0);
        assert_eq!(bag.regions.len(), 16);
        assert_eq!(bag.capsules.len(), 10);
        assert_relative_eq!(bag.mass, 30.0);
    }
}
