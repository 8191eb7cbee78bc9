//! Discretization of grammar shapes into capsule chains plus the planar
//! capture regions used by the interlock heuristic.
//!
//! Conventions (shape-local frame): the base/strip runs along +x starting at
//! the origin, spikes extend along ±y, everything lies in the z = 0 plane.
//! A nominal segment of length `s` becomes a capsule of axis length
//! `s - 2r` so its outer envelope (axis plus end caps) spans exactly `s`.

use super::{BaseCurve, Capsule, GrainShape, TargetShape, SEGMENT_LENGTH_MM};
use nalgebra::Vector3;
use std::f64::consts::PI;

pub const DEFAULT_ARC_SUBDIVISIONS: usize = 6;

/// Default link count for a flexible target strip: one 12 mm link per
/// segment-scale span.
pub fn default_target_subdivisions(lambda_mm: f64) -> usize {
    ((lambda_mm / SEGMENT_LENGTH_MM).round() as usize).max(1)
}

/// A planar region bounded by shape members; a foreign capsule axis crossing
/// it is a candidate interlock.
#[derive(Debug, Clone, Copy)]
pub enum CaptureRegion {
    /// Parallelogram `origin + a·edge_u + b·edge_v`, a, b in [0, 1].
    Quad {
        origin: Vector3<f64>,
        edge_u: Vector3<f64>,
        edge_v: Vector3<f64>,
    },
    /// Pocket of a curved base: points of the disk around `center` (radius
    /// `radius`, plane normal `normal`) lying on the `open_dir` side.
    HalfDisk {
        center: Vector3<f64>,
        normal: Vector3<f64>,
        radius: f64,
        open_dir: Vector3<f64>,
    },
}

impl CaptureRegion {
    pub fn translated(&self, offset: Vector3<f64>) -> CaptureRegion {
        match *self {
            CaptureRegion::Quad {
                origin,
                edge_u,
                edge_v,
            } => CaptureRegion::Quad {
                origin: origin + offset,
                edge_u,
                edge_v,
            },
            CaptureRegion::HalfDisk {
                center,
                normal,
                radius,
                open_dir,
            } => CaptureRegion::HalfDisk {
                center: center + offset,
                normal,
                radius,
                open_dir,
            },
        }
    }
}

/// Joint between two links of an articulated shape.
#[derive(Debug, Clone, Copy)]
pub struct ShapeJoint {
    pub link_a: usize,
    pub link_b: usize,
    /// Hinge point in the shape-local frame.
    pub anchor: Vector3<f64>,
}

/// A shape reduced to capsules, capture regions, and link structure.
///
/// Rigid shapes have a single link; flexible targets have one link per
/// strip subdivision joined by angular joints.
#[derive(Debug, Clone)]
pub struct DiscretizedShape {
    pub capsules: Vec<Capsule>,
    pub capsule_link: Vec<usize>,
    pub regions: Vec<CaptureRegion>,
    pub region_link: Vec<usize>,
    pub n_links: usize,
    pub joints: Vec<ShapeJoint>,
    /// Total nominal material length (mm) of the shape.
    pub nominal_length_mm: f64,
    /// Material length (mm) accounted for by the emitted capsules.
    pub measured_length_mm: f64,
}

fn spike_capsule(attach: Vector3<f64>, dir: Vector3<f64>, length: f64, radius: f64) -> Capsule {
    Capsule::new(
        attach + dir * radius,
        attach + dir * (length - radius),
        radius,
    )
}

/// Quads flanking a spike: one toward each side of the attachment point
/// where backing material exists, clipped at the nearest same-side spike.
fn spike_regions(
    attach_x: f64,
    side: f64,
    spike_length: f64,
    span_min_x: f64,
    span_max_x: f64,
    same_side_attachments: &[f64],
) -> Vec<CaptureRegion> {
    let mut out = Vec::new();
    let mut left = attach_x - span_min_x;
    let mut right = span_max_x - attach_x;
    for &other in same_side_attachments {
        let d = other - attach_x;
        if d > 1e-9 {
            right = right.min(d);
        } else if d < -1e-9 {
            left = left.min(-d);
        }
    }
    let v = Vector3::new(0.0, side * spike_length, 0.0);
    // Windows narrower than a segment width are not usable openings.
    if left > 1.0 {
        out.push(CaptureRegion::Quad {
            origin: Vector3::new(attach_x, 0.0, 0.0),
            edge_u: Vector3::new(-left, 0.0, 0.0),
            edge_v: v,
        });
    }
    if right > 1.0 {
        out.push(CaptureRegion::Quad {
            origin: Vector3::new(attach_x, 0.0, 0.0),
            edge_u: Vector3::new(right, 0.0, 0.0),
            edge_v: v,
        });
    }
    out
}

/// Discretize a grain into a single rigid link.
///
/// Curved bases become `arc_subdivisions` chord capsules whose vertices sit
/// on a circle scaled so the polyline length matches the straight-base axis
/// length exactly; total material length is preserved.
pub fn discretize_grain(shape: &GrainShape, arc_subdivisions: usize) -> DiscretizedShape {
    let n = arc_subdivisions.max(1);
    let r = shape.cross_section_mm / 2.0;
    let base_len = shape.base.length_mm();
    let mut capsules = Vec::new();
    let mut regions = Vec::new();
    let mut measured = 0.0;

    // Base polyline: axis points at parameter u in [0, 1].
    let polyline: Vec<Vector3<f64>> = match shape.base {
        BaseCurve::Straight { length_mm } => {
            vec![
                Vector3::new(r, 0.0, 0.0),
                Vector3::new(length_mm - r, 0.0, 0.0),
            ]
        }
        BaseCurve::Arc { arc_length_mm } => {
            let nominal_radius = arc_length_mm / PI;
            let axis_len = arc_length_mm - 2.0 * r;
            let scaled_radius = axis_len / (2.0 * n as f64 * (PI / (2.0 * n as f64)).sin());
            let center = Vector3::new(nominal_radius, 0.0, 0.0);
            (0..=n)
                .map(|k| {
                    let theta = PI + k as f64 * PI / n as f64;
                    center + Vector3::new(theta.cos(), theta.sin(), 0.0) * scaled_radius
                })
                .collect()
        }
    };
    for w in polyline.windows(2) {
        capsules.push(Capsule::new(w[0], w[1], r));
    }
    let polyline_len: f64 = polyline.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
    measured += polyline_len + 2.0 * r;

    // Map an attach fraction to a point on the polyline (by arc length).
    let attach_point = |f: f64| -> Vector3<f64> {
        let target = f * polyline_len;
        let mut acc = 0.0;
        for w in polyline.windows(2) {
            let seg = (w[1] - w[0]).norm();
            if acc + seg >= target - 1e-12 {
                let t = if seg > 0.0 { (target - acc) / seg } else { 0.0 };
                return w[0] + (w[1] - w[0]) * t.clamp(0.0, 1.0);
            }
            acc += seg;
        }
        *polyline.last().unwrap()
    };

    for spike in &shape.spikes {
        let p = attach_point(spike.attach_fraction);
        let dir = Vector3::new(0.0, spike.side, 0.0);
        capsules.push(spike_capsule(p, dir, spike.length_mm, r));
        measured += spike.length_mm;

        let same_side: Vec<f64> = shape
            .spikes
            .iter()
            .filter(|s| s.side == spike.side && s.attach_fraction != spike.attach_fraction)
            .map(|s| attach_point(s.attach_fraction).x)
            .collect();
        // Capture windows use the chord span of the base.
        let span = (
            polyline.first().unwrap().x.min(polyline.last().unwrap().x),
            polyline.first().unwrap().x.max(polyline.last().unwrap().x),
        );
        let mut quads = spike_regions(p.x, spike.side, spike.length_mm, span.0, span.1, &same_side);
        regions.append(&mut quads);
    }

    // Curved bases carry a pocket region between chord and arc.
    if let BaseCurve::Arc { arc_length_mm } = shape.base {
        let nominal_radius = arc_length_mm / PI;
        let radius = capsules[0]
            .endpoint_a
            .iter()
            .zip([nominal_radius, 0.0, 0.0])
            .map(|(a, c)| (a - c) * (a - c))
            .sum::<f64>()
            .sqrt();
        regions.push(CaptureRegion::HalfDisk {
            center: Vector3::new(nominal_radius, 0.0, 0.0),
            normal: Vector3::new(0.0, 0.0, 1.0),
            radius,
            open_dir: Vector3::new(0.0, -1.0, 0.0),
        });
    }

    let n_caps = capsules.len();
    let n_regs = regions.len();
    DiscretizedShape {
        capsules,
        capsule_link: vec![0; n_caps],
        regions,
        region_link: vec![0; n_regs],
        n_links: 1,
        joints: vec![],
        nominal_length_mm: base_len + shape.spikes.len() as f64 * SEGMENT_LENGTH_MM,
        measured_length_mm: measured,
    }
}

/// Discretize a target cell into an articulated chain of strip links with
/// spikes riding on the link that carries their attachment point.
pub fn discretize_target(shape: &TargetShape, target_subdivisions: usize) -> DiscretizedShape {
    let n = target_subdivisions.max(1);
    let r = shape.thickness_mm / 2.0;
    let lambda = shape.length_mm;
    let pitch = lambda / n as f64;
    let mut capsules = Vec::new();
    let mut capsule_link = Vec::new();
    let mut measured = 0.0;

    for k in 0..n {
        let x0 = if k == 0 { r } else { k as f64 * pitch };
        let x1 = if k == n - 1 {
            lambda - r
        } else {
            (k + 1) as f64 * pitch
        };
        capsules.push(Capsule::new(
            Vector3::new(x0, 0.0, 0.0),
            Vector3::new(x1, 0.0, 0.0),
            r,
        ));
        capsule_link.push(k);
        measured += x1 - x0;
    }
    measured += 2.0 * r;

    let fractions = shape.spike_fractions();
    let attach_xs: Vec<f64> = fractions.iter().map(|f| f * lambda).collect();
    let mut regions = Vec::new();
    let mut region_link = Vec::new();
    for &x in &attach_xs {
        let link = ((x / pitch) as usize).min(n - 1);
        let attach = Vector3::new(x, 0.0, 0.0);
        capsules.push(spike_capsule(
            attach,
            Vector3::new(0.0, 1.0, 0.0),
            shape.spike_length_mm,
            r,
        ));
        capsule_link.push(link);
        measured += shape.spike_length_mm;

        let same_side: Vec<f64> = attach_xs.iter().copied().filter(|&o| o != x).collect();
        for quad in spike_regions(x, 1.0, shape.spike_length_mm, 0.0, lambda, &same_side) {
            regions.push(quad);
            region_link.push(link);
        }
    }

    let joints = (0..n.saturating_sub(1))
        .map(|k| ShapeJoint {
            link_a: k,
            link_b: k + 1,
            anchor: Vector3::new((k + 1) as f64 * pitch, 0.0, 0.0),
        })
        .collect();

    DiscretizedShape {
        capsules,
        capsule_link,
        regions,
        region_link,
        n_links: n,
        joints,
        nominal_length_mm: lambda + shape.spike_count as f64 * shape.spike_length_mm,
        measured_length_mm: measured,
    }
}
