//! The penalty-contact integrator and the experiment motions built on it
//! (settle, shake, cylinder removal).

use super::{Container, SceneState, SimError, SimParams};
use crate::geometry::capsule_closest_distance;
use nalgebra::{UnitQuaternion, Vector3};

/// Contact frequency: omega * dt product held constant so stiffness scales
/// with pair effective mass and the step stays stable for light and heavy
/// bodies alike.
const CONTACT_OMEGA_DT: f64 = 0.15;
/// Penetration depth is capped when computing spring force so overlapping
/// spawns cannot catapult bodies.
const PENETRATION_FORCE_CAP_MM: f64 = 1.0;
/// Bodies slower than these thresholds while the scene relaxes are put to
/// rest; contact forces wake them naturally on the next step.
const SLEEP_LINVEL_MM_S: f64 = 1.0;
const SLEEP_ANGVEL_RAD_S: f64 = 0.1;
/// Settle never exits before this many steps unless the scene is empty.
const MIN_SETTLE_STEPS: usize = 200;

struct Accumulator {
    force: Vec<Vector3<f64>>,
    torque: Vec<Vector3<f64>>,
}

impl Accumulator {
    fn new(n: usize) -> Accumulator {
        Accumulator {
            force: vec![Vector3::zeros(); n],
            torque: vec![Vector3::zeros(); n],
        }
    }

    fn apply(&mut self, body: usize, point: Vector3<f64>, com: Vector3<f64>, f: Vector3<f64>) {
        self.force[body] += f;
        self.torque[body] += (point - com).cross(&f);
    }
}

fn pair_stiffness(m_eff: f64, params: &SimParams) -> f64 {
    let omega = CONTACT_OMEGA_DT / params.dt_s;
    (m_eff * omega * omega).min(params.contact_stiffness_n_per_mm * 1e6)
}

/// Effective mass a contact sees: linear plus rotational compliance along
/// the contact normal. Keeping stiffness proportional to this keeps the
/// angular response inside the stable band too.
fn contact_effective_mass(
    state: &SceneState,
    body: usize,
    point: Vector3<f64>,
    normal: Vector3<f64>,
) -> f64 {
    let b = &state.bodies[body];
    if b.frozen {
        return 0.0;
    }
    let r = point - b.pose.position;
    let rn = r.cross(&normal);
    b.inv_mass + rn.dot(&(b.world_inv_inertia() * rn))
}

/// Spring-damper normal force plus Coulomb-capped viscous friction at a
/// contact point. `normal` points from body a toward body b.
#[allow(clippy::too_many_arguments)]
fn contact_force(
    penetration: f64,
    normal: Vector3<f64>,
    rel_vel: Vector3<f64>,
    m_eff: f64,
    params: &SimParams,
) -> Vector3<f64> {
    let k = pair_stiffness(m_eff, params);
    let c = 2.0 * params.contact_damping_ratio * (k * m_eff).sqrt();
    let vn = rel_vel.dot(&normal);
    let fn_mag = (k * penetration.min(PENETRATION_FORCE_CAP_MM) - c * vn).max(0.0);
    let mut force = normal * fn_mag;
    let vt = rel_vel - normal * vn;
    let vt_norm = vt.norm();
    if vt_norm > 1e-9 {
        let ft_mag = (c * vt_norm).min(params.friction * fn_mag);
        force -= vt / vt_norm * ft_mag;
    }
    force
}

fn velocity_at(state: &SceneState, body: usize, point: Vector3<f64>) -> Vector3<f64> {
    let b = &state.bodies[body];
    b.linvel + b.angvel.cross(&(point - b.pose.position))
}

/// Advance the scene by one time step.
pub fn step(state: &mut SceneState, params: &SimParams) -> Result<(), SimError> {
    let n = state.bodies.len();
    let mut acc = Accumulator::new(n);

    // Gravity.
    for (i, b) in state.bodies.iter().enumerate() {
        if !b.frozen {
            acc.force[i].z -= b.mass * state.gravity_mm_s2;
        }
    }

    // World capsules, computed once per step.
    let world: Vec<Vec<crate::geometry::Capsule>> =
        state.bodies.iter().map(|b| b.world_capsules()).collect();

    // Body-body contacts with bounding-sphere broad phase, fixed pair order.
    for i in 0..n {
        for j in (i + 1)..n {
            let (bi, bj) = (&state.bodies[i], &state.bodies[j]);
            if bi.frozen && bj.frozen {
                continue;
            }
            let gap = (bj.pose.position - bi.pose.position).norm()
                - bi.bounding_radius
                - bj.bounding_radius;
            if gap > 1.0 {
                continue;
            }
            for ca in &world[i] {
                for cb in &world[j] {
                    let res = capsule_closest_distance(ca, cb);
                    if res.distance < 0.0 {
                        let mut normal = res.witness_b - res.witness_a;
                        let norm = normal.norm();
                        if norm < 1e-9 {
                            // Coincident axes: push apart along z.
                            normal = Vector3::z();
                        } else {
                            normal /= norm;
                        }
                        let point = (res.witness_a + res.witness_b) * 0.5;
                        let m_eff = 1.0
                            / (contact_effective_mass(state, i, point, normal)
                                + contact_effective_mass(state, j, point, normal))
                            .max(1e-12);
                        let rel = velocity_at(state, j, point) - velocity_at(state, i, point);
                        let f = contact_force(-res.distance, normal, rel, m_eff, params);
                        // f is the force on body i along -normal side; reaction on j.
                        let com_i = state.bodies[i].pose.position;
                        let com_j = state.bodies[j].pose.position;
                        acc.apply(i, point, com_i, -f);
                        acc.apply(j, point, com_j, f);
                    }
                }
            }
        }
    }

    // Container contacts, evaluated at capsule endpoints.
    for i in 0..n {
        if state.bodies[i].frozen {
            continue;
        }
        let com = state.bodies[i].pose.position;
        for c in &world[i] {
            for p in [c.endpoint_a, c.endpoint_b] {
                for (pen, normal) in container_contacts(state, p, c.radius) {
                    // The container is body "a" at rest: relative velocity at
                    // the contact is the body's own point velocity.
                    let m_eff =
                        1.0 / contact_effective_mass(state, i, p, normal).max(1e-12);
                    let vel = velocity_at(state, i, p);
                    let f = contact_force(pen, normal, vel, m_eff, params);
                    acc.apply(i, p, com, f);
                }
            }
        }
    }

    // Joints: pin springs plus bend springs.
    for joint in &state.joints {
        let (ia, ib) = (joint.body_a, joint.body_b);
        let pa = state.bodies[ia].pose.transform_point(joint.anchor_a);
        let pb = state.bodies[ib].pose.transform_point(joint.anchor_b);
        let gap_dir = {
            let d = pb - pa;
            let n = d.norm();
            if n > 1e-9 {
                d / n
            } else {
                Vector3::z()
            }
        };
        let m_eff = 1.0
            / (contact_effective_mass(state, ia, pa, gap_dir)
                + contact_effective_mass(state, ib, pb, gap_dir))
            .max(1e-12);
        let k = pair_stiffness(m_eff, params);
        let c = 2.0 * params.contact_damping_ratio * (k * m_eff).sqrt();
        let rel_vel = velocity_at(state, ib, pb) - velocity_at(state, ia, pa);
        let f = (pb - pa) * k + rel_vel * c;
        let com_a = state.bodies[ia].pose.position;
        let com_b = state.bodies[ib].pose.position;
        acc.apply(ia, pa, com_a, f);
        acc.apply(ib, pb, com_b, -f);

        let ua = state.bodies[ia].pose.transform_dir(joint.axis_a);
        let ub = state.bodies[ib].pose.transform_dir(joint.axis_b);
        let bend = ua.cross(&ub) * joint.bend_stiffness;
        let rel_ang = state.bodies[ib].angvel - state.bodies[ia].angvel;
        let bend_damp = rel_ang * (0.1 * joint.bend_stiffness * params.dt_s);
        acc.torque[ia] += bend + bend_damp;
        acc.torque[ib] -= bend + bend_damp;
    }

    // Semi-implicit integration.
    let dt = params.dt_s;
    for (i, b) in state.bodies.iter_mut().enumerate() {
        if b.frozen {
            b.linvel = Vector3::zeros();
            b.angvel = Vector3::zeros();
            continue;
        }
        b.linvel += acc.force[i] * (b.inv_mass * dt);
        let speed = b.linvel.norm();
        if speed > params.max_speed_mm_s {
            return Err(SimError::Instability {
                body: i,
                speed_mm_s: speed,
                time_s: state.time_s,
            });
        }
        b.pose.position += b.linvel * dt;
        let inv_inertia = b.world_inv_inertia();
        b.angvel += inv_inertia * acc.torque[i] * dt;
        b.angvel *= 1.0 - params.angular_damping;
        // Creep suppression: bodies slower than the sleep thresholds come to
        // rest outright; any net force wakes them on the next step.
        if b.linvel.norm() < SLEEP_LINVEL_MM_S && b.angvel.norm() < SLEEP_ANGVEL_RAD_S {
            b.linvel = Vector3::zeros();
            b.angvel = Vector3::zeros();
        }
        let rotation = UnitQuaternion::from_scaled_axis(b.angvel * dt);
        b.pose.orientation = rotation * b.pose.orientation;
    }
    state.time_s += dt;
    Ok(())
}

/// Contacts of a sphere (point + radius) against the active container
/// surfaces; yields (penetration, inward normal) pairs.
fn container_contacts(
    state: &SceneState,
    p: Vector3<f64>,
    radius: f64,
) -> Vec<(f64, Vector3<f64>)> {
    let mut out = Vec::new();
    let off = state.container_offset;
    let floor_z = off.z;

    // Floor plane exists for every container.
    let floor_pen = radius - (p.z - floor_z);
    if floor_pen > 0.0 {
        out.push((floor_pen, Vector3::z()));
    }

    match state.container {
        Container::Plane => {}
        Container::Cylinder { diameter_mm, .. } => {
            if state.wall_present {
                let wall_bottom = floor_z + state.wall_lift_mm;
                if p.z + radius > wall_bottom {
                    let axis = Vector3::new(off.x, off.y, 0.0);
                    let dx = p.x - axis.x;
                    let dy = p.y - axis.y;
                    let rho = (dx * dx + dy * dy).sqrt();
                    let pen = rho + radius - diameter_mm / 2.0;
                    if pen > 0.0 && rho > 1e-9 {
                        out.push((pen, Vector3::new(-dx / rho, -dy / rho, 0.0)));
                    }
                }
            }
        }
        Container::Bowl {
            bottom_diameter_mm,
            top_diameter_mm,
            depth_mm,
        } => {
            let slope = (top_diameter_mm - bottom_diameter_mm) / 2.0 / depth_mm;
            let z_local = (p.z - floor_z).max(0.0);
            let allowed = bottom_diameter_mm / 2.0 + slope * z_local;
            let dx = p.x - off.x;
            let dy = p.y - off.y;
            let rho = (dx * dx + dy * dy).sqrt();
            let slant = (1.0 + slope * slope).sqrt();
            let pen = (rho - allowed) / slant + radius;
            if pen > 0.0 && rho > 1e-9 {
                let normal =
                    Vector3::new(-dx / rho, -dy / rho, slope) / slant;
                out.push((pen, normal));
            }
        }
    }
    out
}

/// Total kinetic energy in nJ (1 nJ = 1e-9 J).
pub fn total_kinetic_energy(state: &SceneState) -> f64 {
    state
        .bodies
        .iter()
        .filter(|b| !b.frozen)
        .map(|b| {
            let lin = 0.5 * b.mass * b.linvel.norm_squared();
            let r = b.pose.orientation.to_rotation_matrix();
            let inertia_world = r * b.inertia_body * r.transpose();
            let ang = 0.5 * b.angvel.dot(&(inertia_world * b.angvel));
            lin + ang
        })
        .sum()
}

#[derive(Debug, Clone, Copy)]
pub struct SettleOutcome {
    pub converged: bool,
    pub steps: usize,
}

/// Step until total kinetic energy falls below the settle threshold or the
/// step budget is exhausted. The final state is always usable; `converged`
/// reports which exit was taken.
pub fn settle(state: &mut SceneState, params: &SimParams) -> Result<SettleOutcome, SimError> {
    if state.bodies.iter().all(|b| b.frozen) {
        return Ok(SettleOutcome {
            converged: true,
            steps: 0,
        });
    }
    for i in 0..params.max_steps {
        if i >= MIN_SETTLE_STEPS && total_kinetic_energy(state) < params.settle_ke_threshold_nj {
            return Ok(SettleOutcome {
                converged: true,
                steps: i,
            });
        }
        step(state, params)?;
    }
    let converged = total_kinetic_energy(state) < params.settle_ke_threshold_nj;
    Ok(SettleOutcome {
        converged,
        steps: params.max_steps,
    })
}

/// Oscillate the container (lateral + vertical) for `duration_s`, then
/// settle. Deterministic per scene.
pub fn shake(
    state: &mut SceneState,
    params: &SimParams,
    duration_s: f64,
    amplitude_mm: f64,
    frequency_hz: f64,
) -> Result<SettleOutcome, SimError> {
    let steps = (duration_s / params.dt_s).round() as usize;
    let omega = 2.0 * std::f64::consts::PI * frequency_hz;
    for i in 0..steps {
        let t = i as f64 * params.dt_s;
        state.container_offset = Vector3::new(
            amplitude_mm * (omega * t).sin(),
            0.0,
            0.5 * amplitude_mm * (2.0 * omega * t).sin(),
        );
        step(state, params)?;
    }
    state.container_offset = Vector3::zeros();
    settle(state, params)
}

/// Lift the cylinder wall at a gentle fixed speed until it clears the
/// structure, delete it, and relax. The floor stays.
pub fn remove_cylinder_and_relax(
    state: &mut SceneState,
    params: &SimParams,
    lift_speed_mm_s: f64,
) -> Result<SettleOutcome, SimError> {
    if !matches!(state.container, Container::Cylinder { .. }) || !state.wall_present {
        return Err(SimError::NoWall);
    }
    let clearance = state
        .bodies
        .iter()
        .map(|b| b.top_z())
        .fold(0.0, f64::max)
        + 5.0;
    while state.wall_lift_mm < clearance {
        state.wall_lift_mm += lift_speed_mm_s * params.dt_s;
        step(state, params)?;
    }
    state.wall_present = false;
    state.container = Container::Plane;
    settle(state, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_grain, discretize_grain, GrainType};
    use crate::simulate::{body_from_link, BodyKind, Container, Pose, SceneState};
    use approx::assert_relative_eq;
    use nalgebra::{UnitQuaternion, Vector3};

    fn single_grain_scene(z: f64) -> SceneState {
        let mut state = SceneState::new(Container::Plane, 1);
        let d = discretize_grain(&build_grain(GrainType::I), 6);
        let mut body = body_from_link(&d, 0, 0.04, BodyKind::Grain(GrainType::I), false, 0);
        body.id = 0;
        body.pose = Pose {
            position: Vector3::new(0.0, 0.0, z),
            orientation: UnitQuaternion::identity(),
        };
        state.bodies.push(body);
        state
    }

    #[test]
    fn free_fall_matches_kinematics() {
        let mut state = single_grain_scene(200.0);
        let params = SimParams {
            dt_s: 1e-3,
            ..SimParams::default()
        };
        let z0 = state.bodies[0].pose.position.z;
        for _ in 0..100 {
            step(&mut state, &params).unwrap();
        }
        let drop = z0 - state.bodies[0].pose.position.z;
        let expected = 0.5 * crate::GRAVITY_MM_S2 * (0.1f64).powi(2);
        assert!(
            (drop - expected).abs() / expected < 0.02,
            "drop {drop} vs {expected}"
        );
    }

    #[test]
    fn resting_grain_stays_put() {
        // Start at the spring equilibrium height and verify the pose drifts
        // less than the penetration tolerance over many steps.
        let mut state = single_grain_scene(0.5);
        let params = SimParams::default();
        let before = state.bodies[0].pose.position;
        for _ in 0..2000 {
            step(&mut state, &params).unwrap();
        }
        let after = state.bodies[0].pose.position;
        assert!((after - before).norm() < params.penetration_tol_mm);
    }

    #[test]
    fn identical_seeds_are_bit_identical() {
        let run = || {
            let mut state = single_grain_scene(30.0);
            let params = SimParams::default();
            for _ in 0..3000 {
                step(&mut state, &params).unwrap();
            }
            (
                state.bodies[0].pose.position,
                state.bodies[0].pose.orientation,
            )
        };
        let (p1, q1) = run();
        let (p2, q2) = run();
        assert_eq!(p1, p2);
        assert_eq!(q1, q2);
    }

    #[test]
    fn empty_scene_settles_in_zero_steps() {
        let mut state = SceneState::new(Container::Plane, 0);
        let outcome = settle(&mut state, &SimParams::default()).unwrap();
        assert!(outcome.converged);
        assert_eq!(outcome.steps, 0);
    }

    #[test]
    fn dropped_grain_settles_on_floor() {
        let mut state = single_grain_scene(20.0);
        let params = SimParams::default();
        let outcome = settle(&mut state, &params).unwrap();
        assert!(outcome.converged, "did not settle in {} steps", outcome.steps);
        // Axis rests one radius above the floor.
        assert_relative_eq!(
            state.bodies[0].pose.position.z,
            0.5,
            epsilon = params.penetration_tol_mm
        );
        assert!(total_kinetic_energy(&state) < params.settle_ke_threshold_nj);
    }

    #[test]
    fn stacked_capsules_rest_in_tolerance() {
        let mut state = single_grain_scene(0.5);
        let d = discretize_grain(&build_grain(GrainType::I), 6);
        let mut upper = body_from_link(&d, 0, 0.04, BodyKind::Grain(GrainType::I), false, 1);
        upper.id = 1;
        // Crossed on top of the lower rod.
        upper.pose = Pose {
            position: Vector3::new(0.0, 0.0, 1.6),
            orientation: UnitQuaternion::from_axis_angle(
                &Vector3::z_axis(),
                std::f64::consts::FRAC_PI_2,
            ),
        };
        state.bodies.push(upper);
        let params = SimParams::default();
        let outcome = settle(&mut state, &params).unwrap();
        assert!(outcome.converged);
        let gap = state.bodies[1].pose.position.z - state.bodies[0].pose.position.z - 1.0;
        assert!(
            gap.abs() <= params.penetration_tol_mm,
            "stack gap {gap} out of tolerance"
        );
    }

    #[test]
    fn instability_is_reported() {
        let mut state = single_grain_scene(5.0);
        state.bodies[0].linvel = Vector3::new(0.0, 0.0, -50_000.0);
        let err = step(&mut state, &SimParams::default());
        assert!(matches!(err, Err(SimError::Instability { .. })));
    }
}

