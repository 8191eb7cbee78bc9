//! Ground-truth entanglement oracle: straight-line escape search over a
//! sampled direction set.

use crate::geometry::capsule_closest_distance;
use crate::simulate::SceneState;
use nalgebra::Vector3;

/// Surface overlap beyond which a swept pose counts as a collision. Resting
/// contacts penetrate less than this, so settled neighbours do not block
/// escape paths spuriously.
const COLLISION_PENETRATION_MM: f64 = 0.05;
/// Sampling step along each escape ray (mm).
const SWEEP_STEP_MM: f64 = 0.5;

/// Nested direction families from normalized cubic-lattice offsets: the
/// 3x3x3 shell (6 axes, 18 with edge diagonals, 26 with corners) and the
/// 5x5x5 shell (98). The requested count is rounded up to the next family,
/// so larger counts always contain smaller ones.
pub fn direction_set(count: usize) -> Vec<Vector3<f64>> {
    let range: i32 = if count <= 26 { 1 } else { 2 };
    let max_sq: i32 = if count <= 6 {
        1
    } else if count <= 18 {
        2
    } else if count <= 26 {
        3
    } else {
        12
    };
    let mut dirs: Vec<Vector3<f64>> = Vec::new();
    for i in -range..=range {
        for j in -range..=range {
            for k in -range..=range {
                let sq = i * i + j * j + k * k;
                if sq == 0 || sq > max_sq {
                    continue;
                }
                let v = Vector3::new(i as f64, j as f64, k as f64).normalize();
                if !dirs.iter().any(|d| (d - v).norm() < 1e-9) {
                    dirs.push(v);
                }
            }
        }
    }
    dirs
}

/// True when no sampled straight-line translation of `body_b` by up to
/// `escape_distance_mm` avoids collision with `body_a`: every direction
/// hits at some point along its path.
pub fn escape_oracle(
    state: &SceneState,
    body_a: usize,
    body_b: usize,
    directions: usize,
    escape_distance_mm: f64,
) -> bool {
    let caps_a = state.bodies[body_a].world_capsules();
    let caps_b = state.bodies[body_b].world_capsules();
    let center_a = state.bodies[body_a].pose.position;
    let center_b = state.bodies[body_b].pose.position;
    let reach = state.bodies[body_a].bounding_radius + state.bodies[body_b].bounding_radius;

    'dirs: for dir in direction_set(directions) {
        // Quick reject: if the swept bounding sphere never approaches body a,
        // the direction is a free escape.
        let mut approaches = false;
        let steps = (escape_distance_mm / SWEEP_STEP_MM).ceil() as usize;
        for s in 1..=steps {
            let offset = dir * (s as f64 * SWEEP_STEP_MM);
            if (center_b + offset - center_a).norm() <= reach + SWEEP_STEP_MM {
                approaches = true;
                break;
            }
        }
        if !approaches {
            return false;
        }
        for s in 1..=steps {
            let offset = dir * (s as f64 * SWEEP_STEP_MM);
            for cb in &caps_b {
                let moved = cb.translated(offset);
                for ca in &caps_a {
                    if capsule_closest_distance(ca, &moved).distance < -COLLISION_PENETRATION_MM {
                        // Collision on this path: direction blocked.
                        continue 'dirs;
                    }
                }
            }
        }
        // A full collision-free path exists: body b escapes.
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direction_families_are_nested() {
        let six = direction_set(6);
        let eighteen = direction_set(18);
        let twenty_six = direction_set(26);
        let big = direction_set(98);
        assert_eq!(six.len(), 6);
        assert_eq!(eighteen.len(), 18);
        assert_eq!(twenty_six.len(), 26);
        assert_eq!(big.len(), 98);
        for d in &six {
            assert!(eighteen.iter().any(|e| (d - e).norm() < 1e-9));
        }
        for d in &twenty_six {
            assert!(big.iter().any(|e| (d - e).norm() < 1e-9));
        }
    }

    #[test]
    fn directions_are_unit() {
        for d in direction_set(98) {
            assert!((d.norm() - 1.0).abs() < 1e-12);
        }
    }
}

#[cfg(test)]
mod debug_scratch {
    use super::*;
    use crate::entangle::fixtures;
    use crate::geometry::capsule_closest_distance;

    #[test]
    fn debug_escape_direction() {
        for case in fixtures::corpus() {
            if !case.expect_entangled {
                continue;
            }
            let state = &case.state;
            let caps_a = state.bodies[0].world_capsules();
            let caps_b = state.bodies[1].world_capsules();
            for dir in direction_set(26) {
                let mut blocked = false;
                'sweep: for s in 1..=60 {
                    let offset = dir * (s as f64 * 0.5);
                    for cb in &caps_b {
                        let moved = cb.translated(offset);
                        for ca in &caps_a {
                            if capsule_closest_distance(ca, &moved).distance < -0.05 {
                                blocked = true;
                                break 'sweep;
                            }
                        }
                    }
                }
                if !blocked {
                    eprintln!("{}: escape along ({:.2},{:.2},{:.2})", case.name, dir.x, dir.y, dir.z);
                }
            }
        }
    }
}

#[cfg(test)]
mod corpus_tests {
    use super::*;
    use crate::entangle::fixtures;

    #[test]
    fn separated_bodies_escape() {
        let state = fixtures::two_rods_side_by_side();
        assert!(!escape_oracle(&state, 0, 1, 26, 30.0));
        assert!(!escape_oracle(&state, 1, 0, 26, 30.0));
    }

    #[test]
    fn ring_locks_on_long_rod_at_coarse_counts() {
        for case in fixtures::corpus() {
            if case.name.starts_with("ring_on_rod") {
                for n in [6, 18, 26] {
                    assert!(
                        escape_oracle(&case.state, 0, 1, n, 30.0),
                        "{} at {} directions",
                        case.name,
                        n
                    );
                }
            }
        }
    }

    #[test]
    fn more_directions_never_add_entanglement() {
        // Direction families are nested, so a denser sweep can only find
        // more escapes: flags are monotone non-increasing in count.
        for case in fixtures::corpus() {
            let mut prev = true;
            for n in [6, 18, 26, 98] {
                let flag = escape_oracle(&case.state, 0, 1, n, 30.0);
                assert!(
                    !flag || prev,
                    "{}: entangled appeared when directions grew to {}",
                    case.name,
                    n
                );
                prev = flag;
            }
        }
    }
}
