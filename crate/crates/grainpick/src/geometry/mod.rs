//! Constructive grammar for grains and target cells, discretization into
//! capsule primitives, and mass/volume/stiffness bookkeeping.
//!
//! All values are pure data; nothing here mutates shared state, so shapes
//! and capsule sets can be shared freely across threads.

mod capsule;
mod discretize;

pub use capsule::{capsule_closest_distance, segment_closest_points, Capsule, ClosestResult};
pub use discretize::{
    default_target_subdivisions, discretize_grain, discretize_target, CaptureRegion,
    DiscretizedShape, ShapeJoint, DEFAULT_ARC_SUBDIVISIONS,
};

use thiserror::Error;

/// Nominal length of every grain segment and target spike (mm).
pub const SEGMENT_LENGTH_MM: f64 = 12.0;
/// Grain segments have a 1 mm × 1 mm cross-section.
pub const GRAIN_CROSS_SECTION_MM: f64 = 1.0;
/// Mass of one grain segment for packing/integrity experiments (4 g / 100 segments).
pub const PER_SEGMENT_MASS_G: f64 = 0.04;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("degenerate target strip: length {lambda} mm < thickness {tau} mm")]
    DegenerateStrip { tau: f64, lambda: f64 },
    #[error("non-positive target parameter: {0}")]
    NonPositiveParameter(&'static str),
}

/// The nine canonical grain types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GrainType {
    I,
    II,
    III,
    IV,
    V,
    VI,
    VII,
    VIII,
    IX,
}

impl GrainType {
    pub const ALL: [GrainType; 9] = [
        GrainType::I,
        GrainType::II,
        GrainType::III,
        GrainType::IV,
        GrainType::V,
        GrainType::VI,
        GrainType::VII,
        GrainType::VIII,
        GrainType::IX,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            GrainType::I => "I",
            GrainType::II => "II",
            GrainType::III => "III",
            GrainType::IV => "IV",
            GrainType::V => "V",
            GrainType::VI => "VI",
            GrainType::VII => "VII",
            GrainType::VIII => "VIII",
            GrainType::IX => "IX",
        }
    }

    pub fn from_name(name: &str) -> Option<GrainType> {
        GrainType::ALL.iter().copied().find(|t| t.name() == name)
    }

    pub fn has_curved_base(&self) -> bool {
        matches!(self, GrainType::IV | GrainType::VII)
    }
}

/// Total segment count (base + spikes) for a grain type.
pub fn segment_count(grain_type: GrainType) -> usize {
    match grain_type {
        GrainType::I => 1,
        GrainType::II | GrainType::III | GrainType::IV => 2,
        GrainType::V | GrainType::VI | GrainType::VII => 3,
        GrainType::VIII | GrainType::IX => 5,
    }
}

/// Base curve of a grain: a straight 12 mm segment or a semicircular arc of
/// arc-length 12 mm (radius 12/π mm).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BaseCurve {
    Straight { length_mm: f64 },
    Arc { arc_length_mm: f64 },
}

impl BaseCurve {
    pub fn length_mm(&self) -> f64 {
        match self {
            BaseCurve::Straight { length_mm } => *length_mm,
            BaseCurve::Arc { arc_length_mm } => *arc_length_mm,
        }
    }
}

/// A spike: a perpendicular segment attached to the base (or to the base's
/// chord when the base is curved).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spike {
    /// Attachment position along the base, in [0, 1].
    pub attach_fraction: f64,
    /// Side of the base the spike extends toward: +1 or -1.
    pub side: f64,
    pub length_mm: f64,
}

/// A grain shape: base curve plus perpendicular spikes.
#[derive(Debug, Clone, PartialEq)]
pub struct GrainShape {
    pub grain_type: GrainType,
    pub base: BaseCurve,
    pub spikes: Vec<Spike>,
    pub cross_section_mm: f64,
}

impl GrainShape {
    pub fn total_segments(&self) -> usize {
        let base_segments = 1;
        base_segments + self.spikes.len()
    }

    /// Nominal material volume: one 12 mm³ bar per segment.
    pub fn volume_mm3(&self) -> f64 {
        self.total_segments() as f64
            * SEGMENT_LENGTH_MM
            * self.cross_section_mm
            * self.cross_section_mm
    }
}

/// Deterministic canonical shape per grain type.
///
/// The published figures give silhouettes, not coordinates; this table fixes
/// one readable convention: II = L, III = T, IV = J (curved base), V = U,
/// VI = Z, VII = curved-base U, VIII = four spikes alternating sides,
/// IX = four spikes same side.
pub fn build_grain(grain_type: GrainType) -> GrainShape {
    let straight = BaseCurve::Straight {
        length_mm: SEGMENT_LENGTH_MM,
    };
    let curved = BaseCurve::Arc {
        arc_length_mm: SEGMENT_LENGTH_MM,
    };
    let spike = |f: f64, side: f64| Spike {
        attach_fraction: f,
        side,
        length_mm: SEGMENT_LENGTH_MM,
    };
    let (base, spikes) = match grain_type {
        GrainType::I => (straight, vec![]),
        GrainType::II => (straight, vec![spike(1.0, 1.0)]),
        GrainType::III => (straight, vec![spike(0.5, 1.0)]),
        GrainType::IV => (curved, vec![spike(1.0, 1.0)]),
        GrainType::V => (straight, vec![spike(0.0, 1.0), spike(1.0, 1.0)]),
        GrainType::VI => (straight, vec![spike(0.0, 1.0), spike(1.0, -1.0)]),
        GrainType::VII => (curved, vec![spike(0.0, 1.0), spike(1.0, 1.0)]),
        GrainType::VIII => (
            straight,
            vec![
                spike(0.0, 1.0),
                spike(1.0 / 3.0, -1.0),
                spike(2.0 / 3.0, 1.0),
                spike(1.0, -1.0),
            ],
        ),
        GrainType::IX => (
            straight,
            vec![
                spike(0.0, 1.0),
                spike(1.0 / 3.0, 1.0),
                spike(2.0 / 3.0, 1.0),
                spike(1.0, 1.0),
            ],
        ),
    };
    GrainShape {
        grain_type,
        base,
        spikes,
        cross_section_mm: GRAIN_CROSS_SECTION_MM,
    }
}

/// Mass of a grain cluster from its segment count.
pub fn grain_mass(shape: &GrainShape, per_segment_mass_g: f64) -> f64 {
    shape.total_segments() as f64 * per_segment_mass_g
}

/// Material description for target cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialSpec {
    pub youngs_modulus_gpa: f64,
    pub density_gcc: f64,
    pub friction_coefficient: f64,
    pub area_moment_mm4: f64,
}

impl MaterialSpec {
    /// Acrylic sheet material backing the 1.0 mm target cells.
    pub fn acrylic() -> MaterialSpec {
        MaterialSpec {
            youngs_modulus_gpa: 3.0,
            density_gcc: 1.2,
            friction_coefficient: 0.5,
            area_moment_mm4: 0.1220,
        }
    }

    /// Mylar sheet material backing the sub-millimetre target cells.
    pub fn mylar(area_moment_mm4: f64) -> MaterialSpec {
        MaterialSpec {
            youngs_modulus_gpa: 3.15,
            density_gcc: 1.4,
            friction_coefficient: 0.5,
            area_moment_mm4,
        }
    }

    /// Catalog material for one of the three study thicknesses
    /// (0.2 / 0.4 mm mylar, 1.0 mm acrylic). Area moments are consumed
    /// as tabulated, never re-derived from the cross-section.
    pub fn for_study_thickness(tau_mm: f64) -> MaterialSpec {
        if tau_mm <= 0.3 {
            MaterialSpec::mylar(0.0008)
        } else if tau_mm <= 0.7 {
            MaterialSpec::mylar(0.0012)
        } else {
            MaterialSpec::acrylic()
        }
    }
}

/// Bending stiffness EI in mN·m² from E (GPa) and I (mm⁴).
///
/// Follows the source table's arithmetic: the numeric value equals
/// E[MPa] × I[mm⁴], i.e. E[GPa] × I[mm⁴] × 10³.
pub fn bending_stiffness(youngs_modulus_gpa: f64, area_moment_mm4: f64) -> f64 {
    youngs_modulus_gpa * area_moment_mm4 * 1e3
}

/// An engineered pickable target cell.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetShape {
    pub thickness_mm: f64,
    pub length_mm: f64,
    pub spike_count: u32,
    pub spike_length_mm: f64,
    pub bending_stiffness_mnm2: f64,
    pub density_gcc: f64,
    pub friction_coefficient: f64,
}

impl TargetShape {
    /// Attachment fractions of the spikes, evenly spaced along the length.
    pub fn spike_fractions(&self) -> Vec<f64> {
        let n = self.spike_count;
        (1..=n).map(|i| i as f64 / (n + 1) as f64).collect()
    }

    /// Material volume: square τ×τ cross-section strip plus spikes.
    pub fn volume_mm3(&self) -> f64 {
        let section = self.thickness_mm * self.thickness_mm;
        section * (self.length_mm + self.spike_count as f64 * self.spike_length_mm)
    }

    /// Unit mass in grams from the material density.
    pub fn unit_mass_g(&self) -> f64 {
        self.volume_mm3() * self.density_gcc * 1e-3
    }
}

/// Build a target cell with `sigma` evenly spaced spikes.
pub fn build_target(
    tau_mm: f64,
    lambda_mm: f64,
    sigma: u32,
    material: &MaterialSpec,
) -> Result<TargetShape, GeometryError> {
    if !(tau_mm > 0.0) {
        return Err(GeometryError::NonPositiveParameter("tau_mm"));
    }
    if !(lambda_mm > 0.0) {
        return Err(GeometryError::NonPositiveParameter("lambda_mm"));
    }
    if lambda_mm < tau_mm {
        return Err(GeometryError::DegenerateStrip {
            tau: tau_mm,
            lambda: lambda_mm,
        });
    }
    Ok(TargetShape {
        thickness_mm: tau_mm,
        length_mm: lambda_mm,
        spike_count: sigma,
        spike_length_mm: SEGMENT_LENGTH_MM,
        bending_stiffness_mnm2: bending_stiffness(
            material.youngs_modulus_gpa,
            material.area_moment_mm4,
        ),
        density_gcc: material.density_gcc,
        friction_coefficient: material.friction_coefficient,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn segment_counts_match_grammar() {
        assert_eq!(segment_count(GrainType::I), 1);
        assert_eq!(segment_count(GrainType::II), 2);
        assert_eq!(segment_count(GrainType::III), 2);
        assert_eq!(segment_count(GrainType::IV), 2);
        assert_eq!(segment_count(GrainType::V), 3);
        assert_eq!(segment_count(GrainType::VI), 3);
        assert_eq!(segment_count(GrainType::VII), 3);
        assert_eq!(segment_count(GrainType::VIII), 5);
        assert_eq!(segment_count(GrainType::IX), 5);
    }

    #[test]
    fn build_grain_matches_segment_count() {
        for t in GrainType::ALL {
            let shape = build_grain(t);
            assert_eq!(shape.total_segments(), segment_count(t), "type {}", t.name());
            assert!(shape
                .spikes
                .iter()
                .all(|s| (0.0..=1.0).contains(&s.attach_fraction)));
        }
    }

    #[test]
    fn type_i_is_single_straight_segment() {
        let shape = build_grain(GrainType::I);
        assert_eq!(shape.base, BaseCurve::Straight { length_mm: 12.0 });
        assert!(shape.spikes.is_empty());
    }

    #[test]
    fn type_v_is_u_shape() {
        let shape = build_grain(GrainType::V);
        assert_eq!(shape.spikes.len(), 2);
        assert_eq!(shape.spikes[0].attach_fraction, 0.0);
        assert_eq!(shape.spikes[1].attach_fraction, 1.0);
        assert_eq!(shape.spikes[0].side, shape.spikes[1].side);
    }

    #[test]
    fn type_ix_has_five_segments() {
        assert_eq!(build_grain(GrainType::IX).total_segments(), 5);
    }

    #[test]
    fn curved_bases_only_on_iv_and_vii() {
        for t in GrainType::ALL {
            let shape = build_grain(t);
            let curved = matches!(shape.base, BaseCurve::Arc { .. });
            assert_eq!(curved, t.has_curved_base());
        }
    }

    #[test]
    fn grain_mass_scales_with_segments() {
        // 100 segments at 0.04 g -> 4.0 g, regardless of how the segments
        // are split across grains.
        for t in GrainType::ALL {
            let shape = build_grain(t);
            let per_grain = grain_mass(&shape, PER_SEGMENT_MASS_G);
            let grains_for_100 = 100.0 / shape.total_segments() as f64;
            assert_relative_eq!(per_grain * grains_for_100, 4.0, max_relative = 1e-12);
        }
        let v = build_grain(GrainType::V);
        assert_relative_eq!(grain_mass(&v, 0.04) * 50.0, 6.0); // 150 segments
    }

    #[test]
    fn bending_stiffness_reproduces_table_values() {
        // Acrylic row of the material table.
        assert_relative_eq!(bending_stiffness(3.0, 0.1220), 366.0, max_relative = 1e-9);
        // 0.8 mm nylon core: I = pi d^4 / 64.
        let i = std::f64::consts::PI * 0.8f64.powi(4) / 64.0;
        assert_relative_eq!(
            bending_stiffness(3.0, i),
            60.31857894892403,
            max_relative = 1e-9
        );
        // Bilinear in E and I.
        assert_relative_eq!(
            bending_stiffness(6.0, 0.1220),
            2.0 * bending_stiffness(3.0, 0.1220),
            max_relative = 1e-12
        );
        assert_relative_eq!(
            bending_stiffness(3.0, 0.2440),
            2.0 * bending_stiffness(3.0, 0.1220),
            max_relative = 1e-12
        );
    }

    #[test]
    fn build_target_validates_inputs() {
        let m = MaterialSpec::acrylic();
        assert!(build_target(1.0, 12.0, 0, &m).is_ok());
        assert_eq!(
            build_target(1.0, 0.5, 0, &m),
            Err(GeometryError::DegenerateStrip {
                tau: 1.0,
                lambda: 0.5
            })
        );
        assert!(build_target(0.0, 12.0, 0, &m).is_err());
    }

    #[test]
    fn target_spikes_evenly_spaced() {
        let m = MaterialSpec::acrylic();
        let t0 = build_target(1.0, 12.0, 0, &m).unwrap();
        assert!(t0.spike_fractions().is_empty());
        let t2 = build_target(1.0, 120.0, 2, &m).unwrap();
        assert_eq!(t2.spike_fractions(), vec![1.0 / 3.0, 2.0 / 3.0]);
    }

    #[test]
    fn study_materials_consume_tabulated_moments() {
        assert_eq!(MaterialSpec::for_study_thickness(0.2).area_moment_mm4, 0.0008);
        assert_eq!(MaterialSpec::for_study_thickness(0.4).area_moment_mm4, 0.0012);
        assert_eq!(MaterialSpec::for_study_thickness(1.0).area_moment_mm4, 0.1220);
    }
}
