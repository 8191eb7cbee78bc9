//! Interlock detection between bodies, the weighted entanglement graph,
//! and probabilistic pick closures over it.

mod closure;
pub mod fixtures;
mod oracle;

pub use closure::{pick_closure, LinkModel};
pub use oracle::{direction_set, escape_oracle};

use crate::exec::map_ordered;
use crate::geometry::CaptureRegion;
use crate::simulate::{Body, BodyKind, Pose, SceneState};
use nalgebra::Vector3;

/// Minimum surface clearance (mm) for a crossing to count as an interlock.
pub const INTERLOCK_MARGIN_MM: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    GrainGrain,
    GrainTarget,
    TargetTarget,
}

impl EdgeKind {
    pub fn name(&self) -> &'static str {
        match self {
            EdgeKind::GrainGrain => "grain-grain",
            EdgeKind::GrainTarget => "grain-target",
            EdgeKind::TargetTarget => "target-target",
        }
    }

    fn classify(a: &BodyKind, b: &BodyKind) -> EdgeKind {
        let grain_a = matches!(a, BodyKind::Grain(_));
        let grain_b = matches!(b, BodyKind::Grain(_));
        match (grain_a, grain_b) {
            (true, true) => EdgeKind::GrainGrain,
            (false, false) => EdgeKind::TargetTarget,
            _ => EdgeKind::GrainTarget,
        }
    }
}

/// An interlock link between two bodies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub body_a: usize,
    pub body_b: usize,
    pub depth_mm: f64,
    pub kind: EdgeKind,
}

/// Weighted interlock graph over scene bodies.
#[derive(Debug, Clone, PartialEq)]
pub struct EntanglementGraph {
    pub n_nodes: usize,
    /// Simple edge list: body_a < body_b, one entry per pair, sorted.
    pub edges: Vec<Edge>,
}

impl EntanglementGraph {
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.n_nodes];
        for (idx, e) in self.edges.iter().enumerate() {
            adj[e.body_a].push((e.body_b, idx));
            adj[e.body_b].push((e.body_a, idx));
        }
        adj
    }

    /// CSV edge list: body_a, body_b, depth_mm, kind.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("body_a,body_b,depth_mm,kind\n");
        for e in &self.edges {
            out.push_str(&format!(
                "{},{},{},{}\n",
                e.body_a,
                e.body_b,
                e.depth_mm,
                e.kind.name()
            ));
        }
        out
    }
}

#[derive(Debug, Clone, Copy)]
pub struct InterlockResult {
    pub entangled: bool,
    pub depth_mm: f64,
}

fn region_world(region: &CaptureRegion, pose: &Pose) -> CaptureRegion {
    match *region {
        CaptureRegion::Quad {
            origin,
            edge_u,
            edge_v,
        } => CaptureRegion::Quad {
            origin: pose.transform_point(origin),
            edge_u: pose.transform_dir(edge_u),
            edge_v: pose.transform_dir(edge_v),
        },
        CaptureRegion::HalfDisk {
            center,
            normal,
            radius,
            open_dir,
        } => CaptureRegion::HalfDisk {
            center: pose.transform_point(center),
            normal: pose.transform_dir(normal),
            radius,
            open_dir: pose.transform_dir(open_dir),
        },
    }
}

/// Depth of a segment crossing through a world-frame capture region:
/// distance from the crossing point to the region boundary, or None when
/// the segment does not cross inside the region.
fn crossing_depth(
    region: &CaptureRegion,
    p0: Vector3<f64>,
    p1: Vector3<f64>,
) -> Option<f64> {
    let (plane_point, plane_normal) = match region {
        CaptureRegion::Quad {
            origin,
            edge_u,
            edge_v,
        } => {
            let n = edge_u.cross(edge_v);
            let norm = n.norm();
            if norm < 1e-9 {
                return None;
            }
            (*origin, n / norm)
        }
        CaptureRegion::HalfDisk { center, normal, .. } => (*center, normal.normalize()),
    };
    let d0 = (p0 - plane_point).dot(&plane_normal);
    let d1 = (p1 - plane_point).dot(&plane_normal);
    if d0 * d1 >= 0.0 {
        return None;
    }
    let t = d0 / (d0 - d1);
    let q = p0 + (p1 - p0) * t;
    match region {
        CaptureRegion::Quad {
            origin,
            edge_u,
            edge_v,
        } => {
            // In-plane coordinates via the 2x2 Gram system.
            let w = q - origin;
            let (uu, uv, vv) = (edge_u.dot(edge_u), edge_u.dot(edge_v), edge_v.dot(edge_v));
            let det = uu * vv - uv * uv;
            if det.abs() < 1e-12 {
                return None;
            }
            let wu = w.dot(edge_u);
            let wv = w.dot(edge_v);
            let a = (wu * vv - wv * uv) / det;
            let b = (wv * uu - wu * uv) / det;
            if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) {
                return None;
            }
            let lu = edge_u.norm();
            let lv = edge_v.norm();
            Some(
                (a * lu)
                    .min((1.0 - a) * lu)
                    .min(b * lv)
                    .min((1.0 - b) * lv),
            )
        }
        CaptureRegion::HalfDisk {
            center,
            radius,
            open_dir,
            ..
        } => {
            let r = q - center;
            let open = open_dir.normalize();
            let along_open = r.dot(&open);
            let dist = r.norm();
            if dist > *radius || along_open < 0.0 {
                return None;
            }
            Some((radius - dist).min(along_open))
        }
    }
}

/// Directional interlock heuristic: does any capsule axis of `probe` cross a
/// capture region of `anchor` with positive surface clearance? Depth is the
/// best boundary clearance minus the probe capsule radius.
pub fn interlock_test(anchor: &Body, probe: &Body, _state: &SceneState) -> InterlockResult {
    let mut best: f64 = f64::NEG_INFINITY;
    if anchor.regions.is_empty() {
        return InterlockResult {
            entangled: false,
            depth_mm: 0.0,
        };
    }
    let probe_caps = probe.world_capsules();
    for region in &anchor.regions {
        let world = region_world(region, &anchor.pose);
        for cap in &probe_caps {
            if let Some(depth) = crossing_depth(&world, cap.endpoint_a, cap.endpoint_b) {
                best = best.max(depth - cap.radius);
            }
        }
    }
    if best >= INTERLOCK_MARGIN_MM {
        InterlockResult {
            entangled: true,
            depth_mm: best,
        }
    } else {
        InterlockResult {
            entangled: false,
            depth_mm: 0.0,
        }
    }
}

/// Build the entanglement graph of a settled scene: an edge per body pair
/// where the interlock heuristic fires in either direction. Pairs are
/// pruned by bounding spheres and evaluated in a deterministic order.
pub fn entanglement_graph(state: &SceneState) -> EntanglementGraph {
    let n = state.bodies.len();
    let mut candidates = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let (bi, bj) = (&state.bodies[i], &state.bodies[j]);
            if bi.unit == bj.unit {
                continue;
            }
            let dist = (bj.pose.position - bi.pose.position).norm();
            if dist <= 2.0 * (bi.bounding_radius + bj.bounding_radius) {
                candidates.push((i, j));
            }
        }
    }
    let edges: Vec<Option<Edge>> = map_ordered(candidates, |(i, j)| {
        let (bi, bj) = (&state.bodies[i], &state.bodies[j]);
        let fwd = interlock_test(bi, bj, state);
        let rev = interlock_test(bj, bi, state);
        if fwd.entangled || rev.entangled {
            Some(Edge {
                body_a: i,
                body_b: j,
                depth_mm: fwd.depth_mm.max(rev.depth_mm),
                kind: EdgeKind::classify(&bi.kind, &bj.kind),
            })
        } else {
            None
        }
    });
    EntanglementGraph {
        n_nodes: n,
        edges: edges.into_iter().flatten().collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures;
    use super::*;
    use crate::simulate::{Container, SceneState};

    #[test]
    fn rods_side_by_side_are_not_entangled() {
        let state = fixtures::two_rods_side_by_side();
        let r = interlock_test(&state.bodies[0], &state.bodies[1], &state);
        assert!(!r.entangled);
        let graph = entanglement_graph(&state);
        assert!(graph.edges.is_empty());
    }

    #[test]
    fn strip_through_u_mouth_is_entangled() {
        let state = fixtures::strip_through_u();
        let r = interlock_test(&state.bodies[0], &state.bodies[1], &state);
        assert!(r.entangled);
        assert!(r.depth_mm > 0.0);
    }

    #[test]
    fn graph_or_combines_directions() {
        // The strip has no regions, so only the U->strip direction fires;
        // the edge must exist anyway.
        let state = fixtures::strip_through_u();
        let graph = entanglement_graph(&state);
        assert_eq!(graph.edges.len(), 1);
        assert_eq!(graph.edges[0].kind, EdgeKind::GrainTarget);
    }

    #[test]
    fn chain_fixture_has_two_edges() {
        let state = fixtures::hooked_chain_of_three();
        let graph = entanglement_graph(&state);
        assert_eq!(graph.edges.len(), 2, "edges: {:?}", graph.edges);
    }

    #[test]
    fn graph_is_stable_under_relabeling() {
        let state = fixtures::hooked_chain_of_three();
        let graph = entanglement_graph(&state);
        let mut relabeled = SceneState::new(Container::Plane, 0);
        relabeled.bodies = state.bodies.clone();
        relabeled.bodies.reverse();
        for (i, b) in relabeled.bodies.iter_mut().enumerate() {
            b.id = i;
            b.unit = i as u32;
        }
        let graph2 = entanglement_graph(&relabeled);
        assert_eq!(graph.edges.len(), graph2.edges.len());
        // Same edge set under the reversing permutation.
        let n = state.bodies.len();
        for e in &graph.edges {
            let (ra, rb) = (n - 1 - e.body_a, n - 1 - e.body_b);
            let (ra, rb) = (ra.min(rb), ra.max(rb));
            assert!(
                graph2
                    .edges
                    .iter()
                    .any(|e2| e2.body_a == ra && e2.body_b == rb),
                "missing relabeled edge for {e:?}"
            );
        }
    }
}
