//! Scalar and two-dimensional machinery behind the sector `Σ_p`: the
//! two-point form `(w - z) conj(F_p(w) - F_p(z))`, the real Jacobian of
//! `F_p`, quadratic forms of 2×2 symmetric matrices and the searches that
//! show the angle `φ_p` is attained in the limit.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::optimize::NelderMead;
use crate::random::stream;
use crate::sector::sector_angle;
use crate::space::duality_scalar;

/// Best angle found by a search together with the bound it is measured
/// against.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleReport {
    /// Radians.
    pub best_angle: f64,
    /// Search-specific coordinates of the maximiser.
    pub attaining_input: Vec<f64>,
    pub target: f64,
    /// `target - best_angle`.
    pub gap: f64,
}

impl AngleReport {
    pub(crate) fn new(best_angle: f64, attaining_input: Vec<f64>, target: f64) -> Self {
        Self { best_angle, attaining_input, target, gap: target - best_angle }
    }
}

fn check_p(p: f64) -> Result<()> {
    if p > 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("p must lie in (1, ∞), got {p}")))
    }
}

/// `(w - z) · conj(F_p(w) - F_p(z))`.
pub fn lp_form(z: Complex64, w: Complex64, p: f64) -> Complex64 {
    (w - z) * (duality_scalar(w, p) - duality_scalar(z, p)).conj()
}

/// The real Jacobian `F_p'(y) = |y|^{p-2} (I + (p-2) y yᵗ / |y|²)` with its
/// eigenpairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Jacobian {
    pub matrix: [[f64; 2]; 2],
    /// `[|y|^{p-2}, (p-1)|y|^{p-2}]`.
    pub eigenvalues: [f64; 2],
    /// Unit eigenvectors `[y^⊥, y]`, matching `eigenvalues`.
    pub eigenvectors: [[f64; 2]; 2],
}

pub fn jacobian_f(y: [f64; 2], p: f64) -> Result<Jacobian> {
    check_p(p)?;
    let r2 = y[0] * y[0] + y[1] * y[1];
    if !(r2 > 0.0) {
        return Err(domain("F_p is not differentiable at the origin"));
    }
    let r = r2.sqrt();
    let scale = r.powf(p - 2.0);
    let k = (p - 2.0) / r2;
    let mut matrix = [[0.0; 2]; 2];
    for (i, row) in matrix.iter_mut().enumerate() {
        for (j, entry) in row.iter_mut().enumerate() {
            let delta = if i == j { 1.0 } else { 0.0 };
            *entry = scale * (delta + k * y[i] * y[j]);
        }
    }
    let unit = [y[0] / r, y[1] / r];
    Ok(Jacobian {
        matrix,
        eigenvalues: [scale, (p - 1.0) * scale],
        eigenvectors: [[-unit[1], unit[0]], unit],
    })
}

/// Central finite-difference Jacobian of `F_p` viewed as a map of the
/// plane.
pub fn finite_difference_jacobian(y: [f64; 2], p: f64, step: f64) -> [[f64; 2]; 2] {
    let f = |a: f64, b: f64| {
        let v = duality_scalar(Complex64::new(a, b), p);
        [v.re, v.im]
    };
    let mut out = [[0.0; 2]; 2];
    for j in 0..2 {
        let mut plus = y;
        let mut minus = y;
        plus[j] += step;
        minus[j] -= step;
        let fp = f(plus[0], plus[1]);
        let fm = f(minus[0], minus[1]);
        for i in 0..2 {
            out[i][j] = (fp[i] - fm[i]) / (2.0 * step);
        }
    }
    out
}

/// `h · conj(A h)` with `h` read as a vector of the plane; its argument is
/// the signed angle from `A h` to `h`.
pub fn quad_form_value(h: Complex64, a: [[f64; 2]; 2]) -> Result<Complex64> {
    if (a[0][1] - a[1][0]).abs() > 1e-12 {
        return Err(domain("quadratic form needs a symmetric matrix"));
    }
    let ah = Complex64::new(a[0][0] * h.re + a[0][1] * h.im, a[1][0] * h.re + a[1][1] * h.im);
    Ok(h * ah.conj())
}

/// Result of [`lemma3_sup_angle`].
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticSweep {
    pub angle: AngleReport,
    /// Largest `|sin α_x - sin(a + b)(1 - λ)/(1 + λ)|` over the grid.
    pub identity_residual: f64,
    pub grid_size: usize,
}

/// Sweeps `α_x = ∢(A(1, x), (1, x))` for `A = diag(1, λ)` over a
/// tan-spaced grid, refines the best grid cell, and checks the sine
/// identity at every grid point. The target is `arcsin(|λ - 1|/(λ + 1))`.
pub fn lemma3_sup_angle(lambda: f64, grid_size: usize) -> Result<QuadraticSweep> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(domain(format!("λ must be positive, got {lambda}")));
    }
    if grid_size == 0 {
        return Err(domain("grid must have at least one point"));
    }
    let a = [[1.0, 0.0], [0.0, lambda]];
    let ratio = (1.0 - lambda) / (1.0 + lambda);
    let alpha = |theta: f64| {
        let x = theta.tan();
        quad_form_value(Complex64::new(1.0, x), a).map(|v| v.arg()).unwrap_or(0.0)
    };
    let cell = PI / grid_size as f64;
    let theta_at = |i: usize| -FRAC_PI_2 + cell * (i as f64 + 0.5);

    let mut residual = 0.0f64;
    let mut best = (0.0f64, 0.0f64);
    for i in 0..grid_size {
        let theta = theta_at(i);
        let x = theta.tan();
        let angle = alpha(theta);
        let sum = x.atan() + (lambda * x).atan();
        residual = residual.max((angle.sin() - sum.sin() * ratio).abs());
        if angle.abs() > best.0 {
            best = (angle.abs(), theta);
        }
    }

    // golden-section refinement on the neighbouring cells
    let (mut lo, mut hi) = ((best.1 - cell).max(-FRAC_PI_2 + 1e-15), (best.1 + cell).min(FRAC_PI_2 - 1e-15));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - g * (hi - lo);
    let mut d = lo + g * (hi - lo);
    let (mut fc, mut fd) = (alpha(c).abs(), alpha(d).abs());
    for _ in 0..200 {
        if hi - lo < 1e-15 {
            break;
        }
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = alpha(c).abs();
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = alpha(d).abs();
        }
    }
    for (v, th) in [(fc, c), (fd, d)] {
        if v > best.0 {
            best = (v, th);
        }
    }

    let target = ((lambda - 1.0).abs() / (lambda + 1.0)).asin();
    Ok(QuadraticSweep {
        angle: AngleReport::new(best.0, vec![best.1.tan()], target),
        identity_residual: residual,
        grid_size,
    })
}

/// Output of [`scalar_sharpness_search`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarSharpness {
    /// Maximisation of `|arg lp_form(z, w)|`; input `[α, ln r, β]` with
    /// `z = e^{iα}`, `w = r e^{iβ}`.
    pub direct: AngleReport,
    /// Maximisation of `|arg(h · conj(F_p'(z) h))|`; input `[α, γ]` with
    /// `z = e^{iα}`, `h = e^{iγ}`.
    pub limit: AngleReport,
}

impl ScalarSharpness {
    pub fn best_angle(&self) -> f64 {
        self.direct.best_angle
    }
}

/// Pairs closer than this (relative to `|z| = 1`) are skipped by the
/// direct search: rounding in `F(w) - F(z)` would dominate the angle.
const MIN_SEPARATION: f64 = 1e-5;

pub const DEFAULT_RESTARTS: usize = 64;

/// Multistart search for the largest `|arg|` of the two-point form, plus
/// the derivative route through the Jacobian. Both approach `φ_p`.
pub fn scalar_sharpness_search(p: f64, restarts: usize, seed: u64) -> Result<ScalarSharpness> {
    check_p(p)?;
    let target = sector_angle(p)?;
    let restarts = restarts.max(1);
    let nm = NelderMead { step: 0.4, max_evals: 3000, f_tol: 0.0, x_tol: 1e-13 };

    let direct_objective = |x: &[f64]| {
        let z = Complex64::from_polar(1.0, x[0]);
        let w = Complex64::from_polar(x[1].exp(), x[2]);
        if (w - z).norm() < MIN_SEPARATION {
            return 0.0;
        }
        let v = lp_form(z, w, p);
        if v.norm() == 0.0 {
            0.0
        } else {
            -v.arg().abs()
        }
    };
    let direct = best_of(restarts, |k| {
        let mut rng = stream(seed, k as u64);
        let start = [rng.random_range(-PI..PI), rng.random_range(-1.0..1.0), rng.random_range(-PI..PI)];
        let m = nm.minimize(direct_objective, &start);
        (-m.value, m.x)
    });

    let limit_objective = |x: &[f64]| {
        let y = [x[0].cos(), x[0].sin()];
        let jac = match jacobian_f(y, p) {
            Ok(j) => j.matrix,
            Err(_) => return 0.0,
        };
        match quad_form_value(Complex64::from_polar(1.0, x[1]), jac) {
            Ok(v) if v.norm() > 0.0 => -v.arg().abs(),
            _ => 0.0,
        }
    };
    let limit = best_of(restarts, |k| {
        let mut rng = stream(seed.wrapping_add(0x9e37_79b9_7f4a_7c15), k as u64);
        let start = [rng.random_range(-PI..PI), rng.random_range(-PI..PI)];
        let m = nm.minimize(limit_objective, &start);
        (-m.value, m.x)
    });

    Ok(ScalarSharpness {
        direct: AngleReport::new(direct.0, direct.1, target),
        limit: AngleReport::new(limit.0, limit.1, target),
    })
}

/// Runs `search(k)` for every restart in parallel; keeps the largest
/// angle, ties going to the lower restart index.
pub(crate) fn best_of<F>(restarts: usize, search: F) -> (f64, Vec<f64>)
where
    F: Fn(usize) -> (f64, Vec<f64>) + Sync,
{
    let (value, _, x) = (0..restarts)
        .into_par_iter()
        .map(|k| {
            let (v, x) = search(k);
            (v, k, x)
        })
        .reduce(
            || (f64::NEG_INFINITY, usize::MAX, Vec::new()),
            |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a },
        );
    (value, x)
}
