//! Versioned scene snapshots (structured text) and CSV trajectory export.

use super::{SceneState, SimError};
use nalgebra::{Quaternion, UnitQuaternion, Vector3};

pub const SNAPSHOT_VERSION: &str = "grainpick-scene v1";

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotBody {
    pub id: usize,
    pub kind: String,
    pub unit: u32,
    pub ferromagnetic: bool,
    pub position: Vector3<f64>,
    pub orientation: UnitQuaternion<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneSnapshot {
    pub seed: u64,
    pub time_s: f64,
    pub container: String,
    pub bodies: Vec<SnapshotBody>,
}

/// Serialize body poses plus container/seed metadata. Floats use their
/// shortest round-trippable representation.
pub fn write_scene_snapshot(state: &SceneState) -> String {
    let mut out = String::new();
    out.push_str(SNAPSHOT_VERSION);
    out.push('\n');
    out.push_str(&format!("seed={}\n", state.rng_seed));
    out.push_str(&format!("time_s={}\n", state.time_s));
    out.push_str(&format!("container={}\n", state.container.descriptor()));
    for b in &state.bodies {
        let q = b.pose.orientation.quaternion();
        out.push_str(&format!(
            "body id={} kind={} unit={} ferro={} pos={},{},{} quat={},{},{},{}\n",
            b.id,
            b.kind.name(),
            b.unit,
            b.ferromagnetic,
            b.pose.position.x,
            b.pose.position.y,
            b.pose.position.z,
            q.w,
            q.i,
            q.j,
            q.k
        ));
    }
    out
}

fn parse_kv<'a>(token: &'a str, key: &str, line_no: usize) -> Result<&'a str, SimError> {
    token
        .strip_prefix(key)
        .and_then(|rest| rest.strip_prefix('='))
        .ok_or_else(|| SimError::Snapshot(format!("line {line_no}: expected {key}=...")))
}

pub fn read_scene_snapshot(text: &str) -> Result<SceneSnapshot, SimError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| SimError::Snapshot("empty snapshot".into()))?;
    if header.trim() != SNAPSHOT_VERSION {
        return Err(SimError::Snapshot(format!(
            "unsupported version: {header:?}"
        )));
    }
    let mut seed = 0u64;
    let mut time_s = 0.0;
    let mut container = String::new();
    let mut bodies = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("seed=") {
            seed = rest
                .parse()
                .map_err(|e| SimError::Snapshot(format!("line {line_no}: seed: {e}")))?;
        } else if let Some(rest) = line.strip_prefix("time_s=") {
            time_s = rest
                .parse()
                .map_err(|e| SimError::Snapshot(format!("line {line_no}: time_s: {e}")))?;
        } else if let Some(rest) = line.strip_prefix("container=") {
            container = rest.to_string();
        } else if let Some(rest) = line.strip_prefix("body ") {
            let tokens: Vec<&str> = rest.split_whitespace().collect();
            if tokens.len() != 6 {
                return Err(SimError::Snapshot(format!(
                    "line {line_no}: expected 6 body fields, got {}",
                    tokens.len()
                )));
            }
            let parse_f = |s: &str| -> Result<f64, SimError> {
                s.parse()
                    .map_err(|e| SimError::Snapshot(format!("line {line_no}: {e}")))
            };
            let id = parse_kv(tokens[0], "id", line_no)?
                .parse()
                .map_err(|e| SimError::Snapshot(format!("line {line_no}: id: {e}")))?;
            let kind = parse_kv(tokens[1], "kind", line_no)?.to_string();
            let unit = parse_kv(tokens[2], "unit", line_no)?
                .parse()
                .map_err(|e| SimError::Snapshot(format!("line {line_no}: unit: {e}")))?;
            let ferro = parse_kv(tokens[3], "ferro", line_no)?
                .parse()
                .map_err(|e| SimError::Snapshot(format!("line {line_no}: ferro: {e}")))?;
            let pos: Vec<f64> = parse_kv(tokens[4], "pos", line_no)?
                .split(',')
                .map(parse_f)
                .collect::<Result<_, _>>()?;
            let quat: Vec<f64> = parse_kv(tokens[5], "quat", line_no)?
                .split(',')
                .map(parse_f)
                .collect::<Result<_, _>>()?;
            if pos.len() != 3 || quat.len() != 4 {
                return Err(SimError::Snapshot(format!(
                    "line {line_no}: pos needs 3 and quat needs 4 components"
                )));
            }
            bodies.push(SnapshotBody {
                id,
                kind,
                unit,
                ferromagnetic: ferro,
                position: Vector3::new(pos[0], pos[1], pos[2]),
                // Written from a unit quaternion; re-normalizing would
                // perturb the stored bits.
                orientation: UnitQuaternion::new_unchecked(Quaternion::new(
                    quat[0], quat[1], quat[2], quat[3],
                )),
            });
        } else {
            return Err(SimError::Snapshot(format!(
                "line {line_no}: unrecognized record"
            )));
        }
    }
    Ok(SceneSnapshot {
        seed,
        time_s,
        container,
        bodies,
    })
}

/// Collects body poses every `every` steps and renders them as CSV
/// (step, body_id, x, y, z, qw, qx, qy, qz).
#[derive(Debug, Clone)]
pub struct TrajectoryRecorder {
    every: usize,
    rows: Vec<(usize, usize, [f64; 7])>,
}

impl TrajectoryRecorder {
    pub fn new(every: usize) -> TrajectoryRecorder {
        TrajectoryRecorder {
            every: every.max(1),
            rows: Vec::new(),
        }
    }

    pub fn record(&mut self, step: usize, state: &SceneState) {
        if step % self.every != 0 {
            return;
        }
        for b in &state.bodies {
            let q = b.pose.orientation.quaternion();
            self.rows.push((
                step,
                b.id,
                [
                    b.pose.position.x,
                    b.pose.position.y,
                    b.pose.position.z,
                    q.w,
                    q.i,
                    q.j,
                    q.k,
                ],
            ));
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,body_id,x,y,z,qw,qx,qy,qz\n");
        for (step, id, v) in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                step, id, v[0], v[1], v[2], v[3], v[4], v[5], v[6]
            ));
        }
        out
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::GrainType;
    use crate::simulate::scenes::spawn_cylinder_scene;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn snapshot_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let scene = spawn_cylinder_scene(GrainType::V, 30, 2, &mut rng);
        let text = write_scene_snapshot(&scene);
        let snap = read_scene_snapshot(&text).unwrap();
        assert_eq!(snap.seed, 2);
        assert_eq!(snap.bodies.len(), scene.bodies.len());
        for (sb, b) in snap.bodies.iter().zip(&scene.bodies) {
            assert_eq!(sb.position, b.pose.position);
            assert_eq!(sb.orientation, b.pose.orientation);
            assert_eq!(sb.kind, b.kind.name());
        }
        // Re-serialization is byte identical.
        assert!(text.contains("container=cylinder"));
    }

    #[test]
    fn snapshot_rejects_bad_version() {
        assert!(read_scene_snapshot("something-else v9\n").is_err());
    }

    #[test]
    fn trajectory_csv_header() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let scene = spawn_cylinder_scene(GrainType::I, 5, 2, &mut rng);
        let mut rec = TrajectoryRecorder::new(10);
        rec.record(0, &scene);
        rec.record(5, &scene); // skipped
        rec.record(10, &scene);
        let csv = rec.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "step,body_id,x,y,z,qw,qx,qy,qz");
        assert_eq!(lines.len(), 1 + 2 * scene.bodies.len());
    }
}
