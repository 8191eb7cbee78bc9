//! Closed-form experiment metrics, independent of the dynamics.

use super::{SceneState, SimError};

/// Height of the granular structure: the highest capsule surface point
/// above the container floor. Empty scenes measure 0.
pub fn structure_height(state: &SceneState) -> f64 {
    let floor = state.floor_z();
    state
        .bodies
        .iter()
        .map(|b| b.top_z() - floor)
        .fold(0.0, f64::max)
}

/// Packing fraction: grain volume over the enclosing structure volume.
pub fn packing_fraction(v_grains_mm3: f64, v_container_mm3: f64) -> Result<f64, SimError> {
    if !(v_container_mm3 > 0.0) {
        return Err(SimError::Metric("container volume must be positive"));
    }
    Ok(v_grains_mm3 / v_container_mm3)
}

/// Structural integrity: fraction of the initial height still standing
/// after confinement removal, (h0 - dh) / h0.
pub fn integrity(h0_mm: f64, dh_mm: f64) -> Result<f64, SimError> {
    if !(h0_mm > 0.0) {
        return Err(SimError::Metric("initial height must be positive"));
    }
    if dh_mm < 0.0 || dh_mm > h0_mm {
        return Err(SimError::Metric("height change must lie in [0, h0]"));
    }
    Ok((h0_mm - dh_mm) / h0_mm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::{Container, SceneState};
    use approx::assert_relative_eq;

    #[test]
    fn empty_scene_has_zero_height() {
        let state = SceneState::new(Container::Plane, 0);
        assert_eq!(structure_height(&state), 0.0);
    }

    #[test]
    fn packing_fraction_hand_values() {
        assert_relative_eq!(packing_fraction(7.0, 7.0).unwrap(), 1.0);
        assert_relative_eq!(packing_fraction(0.0, 3.0).unwrap(), 0.0);
        // 100 segments in a 30 mm cylinder measured at 40 mm height.
        let v_c = std::f64::consts::PI * 15.0 * 15.0 * 40.0;
        assert_relative_eq!(
            packing_fraction(1200.0, v_c).unwrap(),
            0.042441318157838759,
            max_relative = 1e-9
        );
        assert!(packing_fraction(1.0, 0.0).is_err());
        assert!(packing_fraction(1.0, -2.0).is_err());
    }

    #[test]
    fn integrity_hand_values() {
        assert_relative_eq!(integrity(80.0, 0.0).unwrap(), 1.0);
        assert_relative_eq!(integrity(80.0, 80.0).unwrap(), 0.0);
        assert_relative_eq!(integrity(80.0, 4.0).unwrap(), 0.95, max_relative = 1e-12);
        assert!(integrity(0.0, 0.0).is_err());
        assert!(integrity(10.0, 11.0).is_err());
        assert!(integrity(10.0, -1.0).is_err());
    }
}
