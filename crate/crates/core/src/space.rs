//! Finite atomic measure spaces, weighted `L^p` norms, the duality pairing
//! and the duality map `F_p(z) = z |z|^{p-2}`.

use num_complex::Complex64;

use crate::compensated::{ComplexSum, KahanSum};
use crate::error::{check_len, domain, Result};

/// Entries below this modulus are treated as exact zeros by the duality map.
pub const ZERO_ENTRY: f64 = 1e-300;

/// An integrability exponent `p ∈ [1, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(domain(format!("exponent must lie in [1, ∞], got {p}")));
        }
        Ok(if p.is_infinite() { Exponent::Infinity } else { Exponent::Finite(p) })
    }

    /// The dual exponent `p'` with `1/p + 1/p' = 1`.
    pub fn conjugate(self) -> Self {
        match self {
            Exponent::Infinity => Exponent::Finite(1.0),
            Exponent::Finite(1.0) => Exponent::Infinity,
            Exponent::Finite(p) => Exponent::Finite(p / (p - 1.0)),
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Exponent::Finite(p) => p,
            Exponent::Infinity => f64::INFINITY,
        }
    }
}

impl From<f64> for Exponent {
    /// Panics on `p < 1`; use [`Exponent::new`] for fallible conversion.
    fn from(p: f64) -> Self {
        Exponent::new(p).expect("exponent must lie in [1, ∞]")
    }
}

/// Dual exponent of a finite `p > 1`.
pub fn dual_exponent(p: f64) -> f64 {
    p / (p - 1.0)
}

/// A finite measure space `{1, …, n}` with positive atom weights.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMeasureSpace {
    weights: Vec<f64>,
}

impl FiniteMeasureSpace {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(domain("a measure space needs at least one atom"));
        }
        if let Some((j, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w > 0.0))
        {
            return Err(domain(format!("atom {j} has non-positive or non-finite weight {w}")));
        }
        Ok(Self { weights })
    }

    /// Counting measure on `n` atoms.
    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(vec![1.0; n])
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().copied().collect::<KahanSum>().value()
    }

    /// `⟨f, g⟩ = Σ_j f_j conj(g_j) μ_j`.
    pub fn pairing(&self, f: &[Complex64], g: &[Complex64]) -> Result<Complex64> {
        check_len(self.len(), f.len())?;
        check_len(self.len(), g.len())?;
        let mut acc = ComplexSum::new();
        for ((fj, gj), mu) in f.iter().zip(g).zip(&self.weights) {
            acc.add_prod(fj * mu, gj.conj());
        }
        Ok(acc.value())
    }

    /// Weighted `p`-norm; for `p = ∞` the weights are ignored.
    pub fn p_norm(&self, f: &[Complex64], p: Exponent) -> Result<f64> {
        check_len(self.len(), f.len())?;
        let peak = f.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let p = match p {
            Exponent::Infinity => return Ok(peak),
            Exponent::Finite(p) => p,
        };
        if peak == 0.0 {
            return Ok(0.0);
        }
        // scale by the peak to keep |f_j|^p in range for large p
        let sum: KahanSum = f
            .iter()
            .zip(&self.weights)
            .map(|(z, mu)| (z.norm() / peak).powf(p) * mu)
            .collect();
        Ok(peak * sum.value().powf(1.0 / p))
    }

    /// Returns `f / ‖f‖_p`.
    pub fn normalize(&self, f: &[Complex64], p: Exponent) -> Result<Vec<Complex64>> {
        let norm = self.p_norm(f, p)?;
        if norm == 0.0 || !norm.is_finite() {
            return Err(domain("cannot normalize the zero vector"));
        }
        Ok(f.iter().map(|z| z / norm).collect())
    }

    /// Indicator vector of atom `j`.
    pub fn indicator(&self, j: usize) -> Vec<Complex64> {
        let mut v = vec![Complex64::new(0.0, 0.0); self.len()];
        v[j] = Complex64::new(1.0, 0.0);
        v
    }
}

/// The scalar duality map `F_p(z) = z |z|^{p-2}`, with `F_p(0) = 0`.
#[inline]
pub fn duality_scalar(z: Complex64, p: f64) -> Complex64 {
    let r = z.norm();
    if r < ZERO_ENTRY {
        Complex64::new(0.0, 0.0)
    } else if p == 2.0 {
        z
    } else {
        z * r.powf(p - 2.0)
    }
}

/// Entrywise duality map `F_p(f)`.
pub fn duality_map(f: &[Complex64], p: f64) -> Result<Vec<Complex64>> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(domain(format!("duality map needs p in (1, ∞), got {p}")));
    }
    Ok(f.iter().map(|&z| duality_scalar(z, p)).collect())
}
