//! Capsule primitive and the segment-segment contact kernel.

use nalgebra::Vector3;

/// A capsule: the set of points within `radius` of the segment
/// `endpoint_a`–`endpoint_b`. Degenerate (point) capsules are allowed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Capsule {
    pub endpoint_a: Vector3<f64>,
    pub endpoint_b: Vector3<f64>,
    pub radius: f64,
    pub body_id: usize,
    pub ferromagnetic: bool,
}

impl Capsule {
    pub fn new(endpoint_a: Vector3<f64>, endpoint_b: Vector3<f64>, radius: f64) -> Capsule {
        Capsule {
            endpoint_a,
            endpoint_b,
            radius,
            body_id: 0,
            ferromagnetic: false,
        }
    }

    pub fn axis_length(&self) -> f64 {
        (self.endpoint_b - self.endpoint_a).norm()
    }

    /// Outer length of the enclosed bar: axis plus both end caps.
    pub fn outer_length(&self) -> f64 {
        self.axis_length() + 2.0 * self.radius
    }

    pub fn midpoint(&self) -> Vector3<f64> {
        (self.endpoint_a + self.endpoint_b) * 0.5
    }

    /// Radius of the bounding sphere centred at the midpoint.
    pub fn bounding_radius(&self) -> f64 {
        0.5 * self.axis_length() + self.radius
    }

    pub fn translated(&self, offset: Vector3<f64>) -> Capsule {
        Capsule {
            endpoint_a: self.endpoint_a + offset,
            endpoint_b: self.endpoint_b + offset,
            ..*self
        }
    }
}

/// Result of a capsule-capsule proximity query.
#[derive(Debug, Clone, Copy)]
pub struct ClosestResult {
    /// Surface-to-surface distance: negative when the capsules overlap.
    pub distance: f64,
    /// Closest point on the axis of the first capsule.
    pub witness_a: Vector3<f64>,
    /// Closest point on the axis of the second capsule.
    pub witness_b: Vector3<f64>,
}

const PARALLEL_EPS: f64 = 1e-12;

/// Closest points between two segments, returned as the parameters
/// (s, t) in [0, 1] along each segment.
///
/// Clamped quadratic minimisation after Ericson's real-time collision
/// detection formulation.
pub fn segment_closest_points(
    p1: Vector3<f64>,
    q1: Vector3<f64>,
    p2: Vector3<f64>,
    q2: Vector3<f64>,
) -> (f64, f64) {
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let a = d1.dot(&d1);
    let e = d2.dot(&d2);
    let f = d2.dot(&r);

    if a <= PARALLEL_EPS && e <= PARALLEL_EPS {
        return (0.0, 0.0);
    }
    if a <= PARALLEL_EPS {
        return (0.0, (f / e).clamp(0.0, 1.0));
    }
    let c = d1.dot(&r);
    if e <= PARALLEL_EPS {
        return ((-c / a).clamp(0.0, 1.0), 0.0);
    }

    let b = d1.dot(&d2);
    let denom = a * e - b * b;
    let mut s = if denom > PARALLEL_EPS * a * e {
        ((b * f - c * e) / denom).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let mut t = (b * s + f) / e;
    if t < 0.0 {
        t = 0.0;
        s = (-c / a).clamp(0.0, 1.0);
    } else if t > 1.0 {
        t = 1.0;
        s = ((b - c) / a).clamp(0.0, 1.0);
    }
    (s, t)
}

fn lex_less(a: &Capsule, b: &Capsule) -> bool {
    let ka = [
        a.endpoint_a.x,
        a.endpoint_a.y,
        a.endpoint_a.z,
        a.endpoint_b.x,
        a.endpoint_b.y,
        a.endpoint_b.z,
        a.radius,
    ];
    let kb = [
        b.endpoint_a.x,
        b.endpoint_a.y,
        b.endpoint_a.z,
        b.endpoint_b.x,
        b.endpoint_b.y,
        b.endpoint_b.z,
        b.radius,
    ];
    for (x, y) in ka.iter().zip(kb.iter()) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    false
}

/// Surface distance between two capsules with the axis points that realise it.
///
/// Arguments are canonically ordered internally, so the result is exactly
/// symmetric under swapping `a` and `b`.
pub fn capsule_closest_distance(a: &Capsule, b: &Capsule) -> ClosestResult {
    let swap = lex_less(b, a);
    let (first, second) = if swap { (b, a) } else { (a, b) };
    let (s, t) = segment_closest_points(
        first.endpoint_a,
        first.endpoint_b,
        second.endpoint_a,
        second.endpoint_b,
    );
    let pa = first.endpoint_a + (first.endpoint_b - first.endpoint_a) * s;
    let pb = second.endpoint_a + (second.endpoint_b - second.endpoint_a) * t;
    let distance = (pb - pa).norm() - first.radius - second.radius;
    if swap {
        ClosestResult {
            distance,
            witness_a: pb,
            witness_b: pa,
        }
    } else {
        ClosestResult {
            distance,
            witness_a: pa,
            witness_b: pb,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn cap(ax: f64, ay: f64, az: f64, bx: f64, by: f64, bz: f64, r: f64) -> Capsule {
        Capsule::new(
            Vector3::new(ax, ay, az),
            Vector3::new(bx, by, bz),
            r,
        )
    }

    #[test]
    fn parallel_unit_offset_segments_touch() {
        let a = cap(0.0, 0.0, 0.0, 12.0, 0.0, 0.0, 0.5);
        let b = cap(0.0, 1.0, 0.0, 12.0, 1.0, 0.0, 0.5);
        let res = capsule_closest_distance(&a, &b);
        assert_relative_eq!(res.distance, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn identical_capsules_fully_overlap() {
        let a = cap(1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 0.5);
        let res = capsule_closest_distance(&a, &a);
        assert_relative_eq!(res.distance, -1.0, epsilon = 1e-12);
    }

    #[test]
    fn crossing_segments() {
        let a = cap(-6.0, 0.0, 0.0, 6.0, 0.0, 0.0, 0.5);
        let b = cap(0.0, -6.0, 2.0, 0.0, 6.0, 2.0, 0.5);
        let res = capsule_closest_distance(&a, &b);
        assert_relative_eq!(res.distance, 1.0, epsilon = 1e-12);
        assert_relative_eq!(res.witness_a.x, 0.0, epsilon = 1e-12);
        assert_relative_eq!(res.witness_b.y, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_point_capsule() {
        let a = cap(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.5);
        let b = cap(3.0, 0.0, 0.0, 5.0, 0.0, 0.0, 0.5);
        let res = capsule_closest_distance(&a, &b);
        assert_relative_eq!(res.distance, 2.0, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn distance_is_exactly_symmetric(
            vals in proptest::collection::vec(-20.0..20.0f64, 12),
            ra in 0.1..1.0f64,
            rb in 0.1..1.0f64,
        ) {
            let a = cap(vals[0], vals[1], vals[2], vals[3], vals[4], vals[5], ra);
            let b = cap(vals[6], vals[7], vals[8], vals[9], vals[10], vals[11], rb);
            let ab = capsule_closest_distance(&a, &b);
            let ba = capsule_closest_distance(&b, &a);
            prop_assert_eq!(ab.distance, ba.distance);
            prop_assert_eq!(ab.witness_a, ba.witness_b);
            prop_assert_eq!(ab.witness_b, ba.witness_a);
        }

        #[test]
        fn witnesses_realise_the_distance(
            vals in proptest::collection::vec(-20.0..20.0f64, 12),
        ) {
            let a = cap(vals[0], vals[1], vals[2], vals[3], vals[4], vals[5], 0.5);
            let b = cap(vals[6], vals[7], vals[8], vals[9], vals[10], vals[11], 0.5);
            let res = capsule_closest_distance(&a, &b);
            let axis_dist = (res.witness_b - res.witness_a).norm();
            prop_assert!((axis_dist - (res.distance + 1.0)).abs() < 1e-9);
        }
    }
}
