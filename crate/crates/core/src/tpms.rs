//! Triply periodic minimal surface nodal approximations and the implicit
//! scaffold field built from them.

use crate::error::{Error, Result};
use crate::spline::TrivariateScalarField;

/// Default half-width of the sheet band, in field units.
pub const DEFAULT_SHEET_EPSILON: f64 = 0.3;

/// Supported TPMS families (nodal approximations).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TpmsType {
    /// Schwarz Primitive.
    P,
    /// Schwarz Diamond.
    D,
    /// Schoen Gyroid.
    G,
    /// Schoen I-WP.
    Iwp,
}

impl TpmsType {
    pub const ALL: [TpmsType; 4] = [TpmsType::P, TpmsType::D, TpmsType::G, TpmsType::Iwp];

    /// Nodal surface value at a point already scaled by the period
    /// coefficients, i.e. the caller passes `omega_x * x` and so on.
    fn nodal(&self, x: f64, y: f64, z: f64) -> f64 {
        match self {
            TpmsType::P => x.cos() + y.cos() + z.cos(),
            TpmsType::D => x.cos() * y.cos() * z.cos() - x.sin() * y.sin() * z.sin(),
            TpmsType::G => x.sin() * y.cos() + y.sin() * z.cos() + z.sin() * x.cos(),
            TpmsType::Iwp => {
                2.0 * (x.cos() * y.cos() + y.cos() * z.cos() + z.cos() * x.cos())
                    - ((2.0 * x).cos() + (2.0 * y).cos() + (2.0 * z).cos())
            }
        }
    }

    /// Nodal surface value at `(u, v, w)` under the given periods.
    pub fn psi(&self, periods: &PeriodCoefficients, u: f64, v: f64, w: f64) -> f64 {
        self.nodal(periods.x * u, periods.y * v, periods.z * w)
    }

    /// Inclusive threshold interval within which the level set stays a
    /// connected surface without pinch-off or disappearing sheets.
    pub fn valid_range(&self) -> (f64, f64) {
        match self {
            TpmsType::P => (-0.8, 0.8),
            TpmsType::D => (-0.6, 0.6),
            TpmsType::G => (-0.8, 0.8),
            TpmsType::Iwp => (-2.0, 2.0),
        }
    }

    pub fn clamp_threshold(&self, c: f64) -> f64 {
        let (lo, hi) = self.valid_range();
        c.clamp(lo, hi)
    }

    pub fn check_threshold(&self, c: f64) -> Result<()> {
        let (lo, hi) = self.valid_range();
        if c.is_finite() && c >= lo && c <= hi {
            Ok(())
        } else {
            Err(Error::ThresholdOutOfRange { tpms: self.name(), value: c, lo, hi })
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            TpmsType::P => "P",
            TpmsType::D => "D",
            TpmsType::G => "G",
            TpmsType::Iwp => "IWP",
        }
    }

    pub fn from_name(name: &str) -> Option<TpmsType> {
        match name.to_ascii_uppercase().as_str() {
            "P" => Some(TpmsType::P),
            "D" => Some(TpmsType::D),
            "G" => Some(TpmsType::G),
            "IWP" | "I-WP" => Some(TpmsType::Iwp),
            _ => None,
        }
    }
}

impl std::fmt::Display for TpmsType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Angular frequencies of the TPMS along the three parameter axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodCoefficients {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl PeriodCoefficients {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    /// Periods that fit a whole number of unit cells along each axis of
    /// the unit cube: `omega = 2 * pi * cells`.
    pub fn from_cells(cx: u32, cy: u32, cz: u32) -> Self {
        let tau = std::f64::consts::TAU;
        Self { x: tau * cx as f64, y: tau * cy as f64, z: tau * cz as f64 }
    }
}

/// Which side of the combined field `f = psi - C` constitutes material.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StructureKind {
    /// `f >= 0`.
    Pore,
    /// `f <= 0`.
    Rod,
    /// `-epsilon <= f <= 0`.
    Sheet,
}

impl StructureKind {
    pub const ALL: [StructureKind; 3] =
        [StructureKind::Pore, StructureKind::Rod, StructureKind::Sheet];

    /// Whether a field value lies inside the (closed) structure.
    pub fn contains(&self, f: f64, epsilon: f64) -> bool {
        match self {
            StructureKind::Pore => f >= 0.0,
            StructureKind::Rod => f <= 0.0,
            StructureKind::Sheet => -epsilon <= f && f <= 0.0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            StructureKind::Pore => "pore",
            StructureKind::Rod => "rod",
            StructureKind::Sheet => "sheet",
        }
    }

    pub fn from_name(name: &str) -> Option<StructureKind> {
        match name.to_ascii_lowercase().as_str() {
            "pore" => Some(StructureKind::Pore),
            "rod" => Some(StructureKind::Rod),
            "sheet" => Some(StructureKind::Sheet),
            _ => None,
        }
    }
}

impl std::fmt::Display for StructureKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Where the threshold `C(u, v, w)` comes from.
#[derive(Debug, Clone, Copy)]
pub enum ThresholdSource<'a> {
    /// Homogeneous scaffold with a single threshold.
    Constant(f64),
    /// Heterogeneous scaffold driven by a TDF.
    Field(&'a TrivariateScalarField),
}

impl ThresholdSource<'_> {
    pub fn value(&self, u: f64, v: f64, w: f64) -> Result<f64> {
        match self {
            ThresholdSource::Constant(c) => Ok(*c),
            ThresholdSource::Field(field) => field.value(u, v, w),
        }
    }
}

/// The implicit field `f(u, v, w) = psi(u, v, w) - C(u, v, w)` that the
/// polygonizer contours over the unit cube.
#[derive(Debug, Clone, Copy)]
pub struct ImplicitFieldSpec<'a> {
    pub tpms: TpmsType,
    pub periods: PeriodCoefficients,
    pub threshold: ThresholdSource<'a>,
}

impl ImplicitFieldSpec<'_> {
    pub fn value(&self, u: f64, v: f64, w: f64) -> Result<f64> {
        Ok(self.tpms.psi(&self.periods, u, v, w) - self.threshold.value(u, v, w)?)
    }
}
