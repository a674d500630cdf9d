//! Sweeps of `‖e^{-zA}‖_{p→p}` over complex times `z = r e^{iθ}`, probing
//! contractivity on the sector `|arg z| ≤ arccos|1 - 2/p|`.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::operators::{operator_pnorm_lower_bound, Generator};
use crate::sector::contraction_angle;
use crate::space::Exponent;

pub const INSIDE_TOL: f64 = 1e-8;

/// Norm estimates on a polar grid of complex times.
#[derive(Debug, Clone, PartialEq)]
pub struct RaySweep {
    pub p: f64,
    pub theta_grid: Vec<f64>,
    pub radius_grid: Vec<f64>,
    /// `norm_estimates[i][k]` belongs to `theta_grid[i]`, `radius_grid[k]`;
    /// each is a lower bound of the true norm (exact for `p = 2`).
    pub norm_estimates: Vec<Vec<f64>>,
    /// `arccos|1 - 2/p|`.
    pub critical_angle: f64,
}

/// One grid point of a [`RaySweep`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub theta: f64,
    pub radius: f64,
    pub norm_estimate: f64,
    pub inside_sector: bool,
}

impl RaySweep {
    pub fn points(&self) -> impl Iterator<Item = SweepPoint> + '_ {
        self.theta_grid.iter().enumerate().flat_map(move |(i, &theta)| {
            self.radius_grid.iter().enumerate().map(move |(k, &radius)| SweepPoint {
                theta,
                radius,
                norm_estimate: self.norm_estimates[i][k],
                inside_sector: theta <= self.critical_angle,
            })
        })
    }

    /// Largest estimate among points with `θ ≤ critical_angle - margin`.
    pub fn max_inside(&self, margin: f64) -> f64 {
        self.points()
            .filter(|pt| pt.theta <= self.critical_angle - margin)
            .map(|pt| pt.norm_estimate)
            .fold(0.0, f64::max)
    }

    /// Largest estimate strictly outside the contraction sector.
    pub fn max_outside(&self) -> Option<f64> {
        self.points().filter(|pt| !pt.inside_sector).map(|pt| pt.norm_estimate).reduce(f64::max)
    }
}

/// 32 angles uniform in `[0, π/2 - 1e-3]`.
pub fn default_theta_grid() -> Vec<f64> {
    let top = FRAC_PI_2 - 1e-3;
    (0..32).map(|i| top * i as f64 / 31.0).collect()
}

pub fn default_radius_grid() -> Vec<f64> {
    vec![0.1, 1.0, 10.0]
}

pub fn contraction_sweep(
    gen: &Generator,
    p: f64,
    theta_grid: &[f64],
    radius_grid: &[f64],
    restarts: usize,
    seed: u64,
) -> Result<RaySweep> {
    let critical_angle = contraction_angle(p)?;
    if let Some(th) = theta_grid.iter().find(|th| !(**th >= 0.0 && **th < FRAC_PI_2)) {
        return Err(domain(format!("angles must lie in [0, π/2), got {th}")));
    }
    if let Some(r) = radius_grid.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
        return Err(domain(format!("radii must be positive, got {r}")));
    }
    let nr = radius_grid.len();
    let flat: Result<Vec<f64>> = (0..theta_grid.len() * nr)
        .into_par_iter()
        .map(|idx| {
            let z = Complex64::from_polar(radius_grid[idx % nr], theta_grid[idx / nr]);
            let op = gen.semigroup_at(z)?;
            Ok(operator_pnorm_lower_bound(&op, Exponent::Finite(p), restarts, seed.wrapping_add(idx as u64)))
        })
        .collect();
    let flat = flat?;
    Ok(RaySweep {
        p,
        theta_grid: theta_grid.to_vec(),
        radius_grid: radius_grid.to_vec(),
        norm_estimates: flat.chunks(nr.max(1)).map(<[f64]>::to_vec).collect(),
        critical_angle,
    })
}
