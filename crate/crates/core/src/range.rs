//! The `L^p` numerical range `{⟨A f, F_p(f)⟩ : ‖f‖_p = 1}` of a generator,
//! its time-discrete variant `⟨(I - e^{-tA}) f, F_p(f)⟩`, random sampling
//! of both, and a search for the widest angle.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::operators::{apply_matrix, Generator, OperatorMatrix};
use crate::optimize::NelderMead;
use crate::random::{complex_cauchy, complex_gaussian, stream};
use crate::scalar::{best_of, AngleReport};
use crate::sector::sector_angle;
use crate::space::{duality_map, Exponent, FiniteMeasureSpace};

/// Values at or below this modulus carry no angle information.
pub const NEGLIGIBLE: f64 = 1e-12;

/// Samples per RNG stream in [`sample_range`]; fixed so results do not
/// depend on the thread count.
const CHUNK: usize = 1024;

fn check_p(p: f64) -> Result<()> {
    if p > 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("p must lie in (1, ∞), got {p}")))
    }
}

/// `⟨M f, F_p(f)⟩` at the given scale, with compensated arithmetic.
pub(crate) fn raw_form(m: &OperatorMatrix, f: &[Complex64], p: f64) -> Result<Complex64> {
    let mf = m.apply(f)?;
    let ff = duality_map(f, p)?;
    m.space().pairing(&mf, &ff)
}

fn normalized(space: &FiniteMeasureSpace, f: &[Complex64], p: f64) -> Result<Vec<Complex64>> {
    if f.iter().all(|z| z.norm() == 0.0) {
        return Err(domain("form is undefined for f = 0"));
    }
    space.normalize(f, Exponent::Finite(p))
}

/// `⟨A f, F_p(f)⟩` after normalising `‖f‖_p = 1`.
pub fn form_value(gen: &Generator, f: &[Complex64], p: f64) -> Result<Complex64> {
    check_p(p)?;
    let f = normalized(gen.space(), f, p)?;
    raw_form(&gen.as_operator(), &f, p)
}

/// `⟨(I - e^{-tA}) f, F_p(f)⟩` after normalising `‖f‖_p = 1`.
pub fn difference_form(gen: &Generator, t: f64, f: &[Complex64], p: f64) -> Result<Complex64> {
    check_p(p)?;
    let f = normalized(gen.space(), f, p)?;
    raw_form(&gen.decay_complement(t)?, &f, p)
}

/// A batch of sampled numerical-range values.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeSample {
    pub values: Vec<Complex64>,
    pub p: f64,
    pub generator_id: String,
    /// Largest `|arg|` over values with modulus above [`NEGLIGIBLE`].
    pub max_abs_arg: f64,
    pub seed: u64,
    pub sample_count: usize,
}

impl RangeSample {
    /// Largest `|Im|` over the values.
    pub fn max_abs_imag(&self) -> f64 {
        self.values.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }
}

pub(crate) fn max_abs_arg(values: &[Complex64]) -> f64 {
    values
        .iter()
        .filter(|z| z.norm() > NEGLIGIBLE)
        .map(|z| z.arg().abs())
        .fold(0.0, f64::max)
}

/// Draws `n_samples` random vectors (complex Gaussian entries, every tenth
/// sample complex Cauchy) and evaluates [`form_value`] on each.
pub fn sample_range(gen: &Generator, p: f64, n_samples: usize, seed: u64) -> Result<RangeSample> {
    check_p(p)?;
    if n_samples == 0 {
        return Err(domain("need at least one sample"));
    }
    let n = gen.dim();
    let op = gen.as_operator();
    let chunks = n_samples.div_ceil(CHUNK);
    let parts: Result<Vec<Vec<Complex64>>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream(seed, c as u64);
            let count = CHUNK.min(n_samples - c * CHUNK);
            let mut out = Vec::with_capacity(count);
            for i in 0..count {
                let heavy = (c * CHUNK + i) % 10 == 9;
                let f: Vec<Complex64> = (0..n)
                    .map(|_| if heavy { complex_cauchy(&mut rng) } else { complex_gaussian(&mut rng) })
                    .collect();
                let f = match normalized(gen.space(), &f, p) {
                    Ok(f) => f,
                    // all-zero draw: the apex of the sector
                    Err(_) => {
                        out.push(Complex64::new(0.0, 0.0));
                        continue;
                    }
                };
                out.push(raw_form(&op, &f, p)?);
            }
            Ok(out)
        })
        .collect();
    let values: Vec<Complex64> = parts?.into_iter().flatten().collect();
    Ok(RangeSample {
        max_abs_arg: max_abs_arg(&values),
        sample_count: values.len(),
        values,
        p,
        generator_id: gen.label().to_string(),
        seed,
    })
}

pub const DEFAULT_SEARCH_RESTARTS: usize = 8;

/// Multistart Nelder–Mead search for `max |arg form_value(f)|`.
///
/// `f` is parameterised by `2n - 1` reals: `Im f_0` is pinned to zero
/// since the form is invariant under `f ↦ e^{iθ} f`. The attaining input
/// is reported as `[Re f_0, Re f_1, Im f_1, …]` after normalisation.
/// Values whose modulus is below `1e-10 · max(1, ‖A‖_∞)` are ignored, as
/// their argument is not resolved by double precision.
pub fn max_arg_search(gen: &Generator, p: f64, restarts: usize, seed: u64) -> Result<AngleReport> {
    check_p(p)?;
    let target = sector_angle(p)?;
    let n = gen.dim();
    let op = gen.as_operator();
    let floor = 1e-10 * op.linf_norm().max(1.0);
    let space = gen.space();
    let objective = |x: &[f64]| {
        let Ok(f) = normalized(space, &unpack_attaining(x), p) else { return 0.0 };
        let mf = apply_matrix(op.matrix(), &f);
        let Ok(ff) = duality_map(&f, p) else { return 0.0 };
        match space.pairing(&mf, &ff) {
            Ok(v) if v.norm() > floor => -v.arg().abs(),
            _ => 0.0,
        }
    };
    let nm = NelderMead { step: 0.5, max_evals: 600 * (2 * n).max(4), f_tol: 0.0, x_tol: 1e-12 };
    let (best, x) = best_of(restarts.max(1), |k| {
        let mut rng = stream(seed, k as u64);
        let start: Vec<f64> = (0..2 * n - 1).map(|_| rng.random_range(-1.0..1.0)).collect();
        let m = nm.minimize(objective, &start);
        (-m.value, m.x)
    });
    let f = normalized(space, &unpack_attaining(&x), p).unwrap_or_else(|_| unpack_attaining(&x));
    let mut attaining = vec![f[0].re];
    for z in &f[1..] {
        attaining.push(z.re);
        attaining.push(z.im);
    }
    let best = best.max(0.0);
    Ok(AngleReport::new(best, attaining, target))
}

/// Rebuilds the complex vector from an attaining input of
/// [`max_arg_search`].
pub fn unpack_attaining(x: &[f64]) -> Vec<Complex64> {
    let n = x.len().div_ceil(2);
    let mut f = Vec::with_capacity(n);
    f.push(Complex64::new(x[0], 0.0));
    for k in 1..n {
        f.push(Complex64::new(x[2 * k - 1], x[2 * k]));
    }
    f
}
