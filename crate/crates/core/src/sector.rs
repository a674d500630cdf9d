//! Closed sectors `Σ(φ) = {z ≠ 0 : |arg z| ≤ φ} ∪ {0}` and the optimal
//! numerical-range angle `φ_p = arcsin|1 - 2/p|`.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::error::{domain, Result};

/// Absolute tolerance used wherever a caller does not pick one.
pub const DEFAULT_TOL: f64 = 1e-9;

/// `φ_p = arcsin|1 - 2/p|` for `p ∈ (1, ∞)`.
pub fn sector_angle(p: f64) -> Result<f64> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(domain(format!("sector angle needs p in (1, ∞), got {p}")));
    }
    Ok((1.0 - 2.0 / p).abs().asin())
}

/// The same angle through `arctan(|p - 2| / (2 √(p - 1)))`.
pub fn sector_angle_arctan(p: f64) -> Result<f64> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(domain(format!("sector angle needs p in (1, ∞), got {p}")));
    }
    Ok(((p - 2.0).abs() / (2.0 * (p - 1.0).sqrt())).atan())
}

/// Opening angle `arccos|1 - 2/p|` of the sector on which the `L^p`
/// semigroup stays contractive.
pub fn contraction_angle(p: f64) -> Result<f64> {
    Ok(FRAC_PI_2 - sector_angle(p)?)
}

/// A closed sector symmetric about the positive real axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sector {
    angle: f64,
}

impl Sector {
    pub fn new(angle: f64) -> Result<Self> {
        if !(0.0..=FRAC_PI_2).contains(&angle) {
            return Err(domain(format!("sector angle must lie in [0, π/2], got {angle}")));
        }
        Ok(Self { angle })
    }

    /// `Σ_p = Σ(φ_p)`.
    pub fn for_exponent(p: f64) -> Result<Self> {
        Self::new(sector_angle(p)?)
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    /// Membership with absolute tolerance `tol`; values with `|z| ≤ tol`
    /// count as the apex.
    pub fn contains(&self, z: Complex64, tol: f64) -> bool {
        if z.norm() <= tol {
            return true;
        }
        z.re >= -tol && z.arg().abs() <= self.angle + tol
    }
}

/// Free-function form of [`Sector::contains`].
pub fn in_sector(z: Complex64, sector: &Sector, tol: f64) -> bool {
    sector.contains(z, tol)
}
