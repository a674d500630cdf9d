//! Error-free transformations and compensated accumulation.
//!
//! Sums of products are accumulated as in the `Dot2` scheme of Ogita, Rump
//! and Oishi: every addition goes through `two_sum`, every product through
//! `two_prod`, and the rounding errors are collected in a second word. The
//! result is as accurate as if it had been computed in twice the working
//! precision and then rounded.

use num_complex::Complex64;

#[inline]
pub fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
pub fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let err = a.mul_add(b, -p);
    (p, err)
}

/// Compensated accumulator for real sums.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let (s, e) = two_sum(self.sum, x);
        self.sum = s;
        self.comp += e;
    }

    /// Adds the exact product `a * b`.
    #[inline]
    pub fn add_prod(&mut self, a: f64, b: f64) {
        let (p, e) = two_prod(a, b);
        self.add(p);
        self.comp += e;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = KahanSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated accumulator for complex sums and sums of complex products.
#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexSum {
    re: KahanSum,
    im: KahanSum,
}

impl ComplexSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    /// Adds the exact product `a * b` (each real product error-free).
    #[inline]
    pub fn add_prod(&mut self, a: Complex64, b: Complex64) {
        self.re.add_prod(a.re, b.re);
        self.re.add_prod(-a.im, b.im);
        self.im.add_prod(a.re, b.im);
        self.im.add_prod(a.im, b.re);
    }

    #[inline]
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// Compensated `Σ a_i b_i`.
pub fn dot<I>(pairs: I) -> Complex64
where
    I: IntoIterator<Item = (Complex64, Complex64)>,
{
    let mut acc = ComplexSum::new();
    for (a, b) in pairs {
        acc.add_prod(a, b);
    }
    acc.value()
}
