//! Generators of symmetric `L∞`-contractive semigroups on finite measure
//! spaces, their exponentials, and operator norm estimates.
//!
//! A generator is stored as the matrix `A` of the positive operator, so the
//! semigroup is `t ↦ e^{-tA}`. Self-adjointness is with respect to the
//! weighted pairing, i.e. `D A = A^H D` with `D = diag(μ)`, which makes
//! `H = D^{1/2} A D^{-1/2}` Hermitian. All exponentials are taken through
//! the eigendecomposition of `H`, which also covers complex times.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::compensated::{ComplexSum, KahanSum};
use crate::error::{check_len, domain, Error, Result};
use crate::random::{complex_gaussian_vec, stream, unit_phase};
use crate::space::{duality_scalar, Exponent, FiniteMeasureSpace};

pub type CMatrix = DMatrix<Complex64>;

/// Eigenvalues of `H` down to this value are accepted and clamped to zero.
pub const PSD_TOL: f64 = 1e-10;
pub const SELF_ADJOINT_TOL: f64 = 1e-12;
pub const CONTRACTION_TOL: f64 = 1e-9;
/// Attempts allowed to [`random_generator`] before giving up.
pub const SAMPLING_BUDGET: usize = 10_000;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Default time grid for contractivity checks: 20 points, geometric in
/// `[1e-3, 1e2]`.
pub fn default_time_grid() -> Vec<f64> {
    let (lo, hi) = (1e-3f64.ln(), 1e2f64.ln());
    (0..20).map(|k| (lo + (hi - lo) * k as f64 / 19.0).exp()).collect()
}

/// A matrix acting on functions over a finite measure space.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    matrix: CMatrix,
    space: FiniteMeasureSpace,
}

impl OperatorMatrix {
    pub fn new(matrix: CMatrix, space: FiniteMeasureSpace) -> Result<Self> {
        check_square(&matrix, &space)?;
        Ok(Self { matrix, space })
    }

    pub fn identity(space: FiniteMeasureSpace) -> Self {
        let n = space.len();
        Self { matrix: CMatrix::identity(n, n), space }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn space(&self) -> &FiniteMeasureSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.len()
    }

    /// `(M f)_j = Σ_k M_{jk} f_k`, with compensated accumulation.
    pub fn apply(&self, f: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len(self.dim(), f.len())?;
        Ok(apply_matrix(&self.matrix, f))
    }

    /// Adjoint with respect to the weighted pairing: `D^{-1} M^H D`.
    pub fn weighted_adjoint(&self) -> Self {
        let mu = self.space.weights();
        let matrix =
            CMatrix::from_fn(self.dim(), self.dim(), |j, k| self.matrix[(k, j)].conj() * mu[k] / mu[j]);
        Self { matrix, space: self.space.clone() }
    }

    /// `‖M‖_{∞→∞} = max_j Σ_k |M_{jk}|`.
    pub fn linf_norm(&self) -> f64 {
        linf_norm(&self.matrix)
    }

    /// `‖M‖_{1→1} = max_k (1/μ_k) Σ_j μ_j |M_{jk}|` on the weighted space.
    pub fn l1_norm(&self) -> f64 {
        let mu = self.space.weights();
        (0..self.dim())
            .map(|k| {
                let col: KahanSum = (0..self.dim()).map(|j| mu[j] * self.matrix[(j, k)].norm()).collect();
                col.value() / mu[k]
            })
            .fold(0.0, f64::max)
    }

    /// Exact `L^2(μ)` operator norm: largest singular value of
    /// `D^{1/2} M D^{-1/2}`.
    pub fn l2_norm(&self) -> f64 {
        let s: Vec<f64> = self.space.weights().iter().map(|m| m.sqrt()).collect();
        let b = CMatrix::from_fn(self.dim(), self.dim(), |j, k| self.matrix[(j, k)] * s[j] / s[k]);
        b.singular_values().iter().copied().fold(0.0, f64::max)
    }
}

pub(crate) fn apply_matrix(m: &CMatrix, f: &[Complex64]) -> Vec<Complex64> {
    (0..m.nrows())
        .map(|j| {
            let mut acc = ComplexSum::new();
            for (k, fk) in f.iter().enumerate() {
                acc.add_prod(m[(j, k)], *fk);
            }
            acc.value()
        })
        .collect()
}

fn linf_norm(m: &CMatrix) -> f64 {
    m.row_iter()
        .map(|row| row.iter().map(|z| z.norm()).collect::<KahanSum>().value())
        .fold(0.0, f64::max)
}

fn check_square(matrix: &CMatrix, space: &FiniteMeasureSpace) -> Result<()> {
    check_len(matrix.nrows(), matrix.ncols())?;
    check_len(space.len(), matrix.nrows())
}

/// Outcome of [`validate_generator`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub self_adjoint: bool,
    /// `max_{jk} |μ_j A_{jk} - conj(μ_k A_{kj})|`.
    pub self_adjoint_defect: f64,
    pub positive_semidefinite: bool,
    pub min_eigenvalue: f64,
    pub linf_contractive: bool,
    /// `max_t ‖e^{-tA}‖_{∞→∞} - 1` over the grid.
    pub linf_defect: f64,
    pub l1_contractive: bool,
    pub l1_defect: f64,
    pub t_grid: Vec<f64>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.self_adjoint && self.positive_semidefinite && self.linf_contractive
    }

    fn failures(&self) -> String {
        let mut out = Vec::new();
        if !self.self_adjoint {
            out.push(format!("not self-adjoint (defect {:.3e})", self.self_adjoint_defect));
        }
        if !self.positive_semidefinite {
            out.push(format!("not positive semidefinite (min eigenvalue {:.3e})", self.min_eigenvalue));
        }
        if !self.linf_contractive {
            out.push(format!("not L∞-contractive (defect {:.3e})", self.linf_defect));
        }
        out.join("; ")
    }
}

/// Tolerances for [`validate_generator`].
#[derive(Debug, Clone, Copy)]
pub struct ValidationTolerances {
    pub self_adjoint: f64,
    pub psd: f64,
    pub contraction: f64,
}

impl Default for ValidationTolerances {
    fn default() -> Self {
        Self { self_adjoint: SELF_ADJOINT_TOL, psd: PSD_TOL, contraction: CONTRACTION_TOL }
    }
}

/// Hermitian eigendecomposition of `H = D^{1/2} A D^{-1/2}`.
#[derive(Debug, Clone)]
struct Spectrum {
    sqrt_mu: Vec<f64>,
    /// Raw eigenvalues, ascending.
    values: Vec<f64>,
    vectors: CMatrix,
}

impl Spectrum {
    fn of(matrix: &CMatrix, space: &FiniteMeasureSpace) -> Self {
        let n = space.len();
        let sqrt_mu: Vec<f64> = space.weights().iter().map(|m| m.sqrt()).collect();
        let h = CMatrix::from_fn(n, n, |j, k| matrix[(j, k)] * sqrt_mu[j] / sqrt_mu[k]);
        let h = (&h + h.adjoint()).scale(0.5);
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        Self { sqrt_mu, values, vectors }
    }

    /// `D^{-1/2} U diag(g(λ)) U^H D^{1/2}`, optionally with `λ` clamped to
    /// `[0, ∞)`.
    fn function(&self, g: impl Fn(f64) -> Complex64, clamp: bool) -> CMatrix {
        let n = self.values.len();
        let u = &self.vectors;
        let lam = |c: usize| if clamp { self.values[c].max(0.0) } else { self.values[c] };
        let scaled = CMatrix::from_fn(n, n, |r, c| u[(r, c)] * g(lam(c)));
        let core = scaled * u.adjoint();
        CMatrix::from_fn(n, n, |j, k| core[(j, k)] * self.sqrt_mu[k] / self.sqrt_mu[j])
    }
}

/// Generic matrix exponential (scaling and squaring of a Taylor series),
/// used only to assess candidates that fail self-adjointness.
fn expm_general(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    let norm = linf_norm(m);
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let x = m.scale(0.5f64.powi(squarings));
    let mut term = CMatrix::identity(n, n);
    let mut sum = term.clone();
    for k in 1..=24 {
        term = &term * &x / Complex64::new(k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Checks self-adjointness, positivity and `L∞`-contractivity of `e^{-tA}`
/// on `t_grid`, and reports `L¹`-contractivity alongside.
pub fn validate_generator(
    matrix: &CMatrix,
    space: &FiniteMeasureSpace,
    t_grid: &[f64],
    tol: ValidationTolerances,
) -> Result<ValidationReport> {
    check_square(matrix, space)?;
    let n = space.len();
    let mu = space.weights();

    let mut self_adjoint_defect = 0.0f64;
    for j in 0..n {
        for k in 0..n {
            let d = (matrix[(j, k)] * mu[j] - (matrix[(k, j)] * mu[k]).conj()).norm();
            self_adjoint_defect = self_adjoint_defect.max(d);
        }
    }
    let self_adjoint = self_adjoint_defect <= tol.self_adjoint;

    let spectrum = Spectrum::of(matrix, space);
    let min_eigenvalue = spectrum.values[0];
    let positive_semidefinite = min_eigenvalue >= -tol.psd;

    let mut linf_defect = f64::NEG_INFINITY;
    let mut l1_defect = f64::NEG_INFINITY;
    for &t in t_grid {
        let semigroup = if self_adjoint {
            spectrum.function(|l| Complex64::new((-t * l).exp(), 0.0), false)
        } else {
            expm_general(&matrix.scale(-t))
        };
        let op = OperatorMatrix { matrix: semigroup, space: space.clone() };
        linf_defect = linf_defect.max(op.linf_norm() - 1.0);
        l1_defect = l1_defect.max(op.l1_norm() - 1.0);
    }
    if t_grid.is_empty() {
        linf_defect = 0.0;
        l1_defect = 0.0;
    }

    Ok(ValidationReport {
        self_adjoint,
        self_adjoint_defect,
        positive_semidefinite,
        min_eigenvalue,
        linf_contractive: linf_defect <= tol.contraction,
        linf_defect,
        l1_contractive: l1_defect <= tol.contraction,
        l1_defect,
        t_grid: t_grid.to_vec(),
    })
}

/// A validated generator: `-A` generates a symmetric `L∞`-contractive
/// semigroup on `L²(μ)`.
#[derive(Debug, Clone)]
pub struct Generator {
    label: String,
    matrix: CMatrix,
    space: FiniteMeasureSpace,
    report: ValidationReport,
    spectrum: Spectrum,
}

impl Generator {
    /// Validates `matrix` on the default time grid.
    pub fn new(matrix: CMatrix, space: FiniteMeasureSpace) -> Result<Self> {
        let report = validate_generator(&matrix, &space, &default_time_grid(), Default::default())?;
        if !report.is_valid() {
            return Err(domain(format!("invalid generator: {}", report.failures())));
        }
        let spectrum = Spectrum::of(&matrix, &space);
        Ok(Self { label: format!("matrix:{}", space.len()), matrix, space, report, spectrum })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn space(&self) -> &FiniteMeasureSpace {
        &self.space
    }

    pub fn report(&self) -> &ValidationReport {
        &self.report
    }

    pub fn dim(&self) -> usize {
        self.space.len()
    }

    /// Eigenvalues of `A` (equivalently of `H`), ascending and unclamped.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.spectrum.values
    }

    pub fn as_operator(&self) -> OperatorMatrix {
        OperatorMatrix { matrix: self.matrix.clone(), space: self.space.clone() }
    }

    pub fn apply(&self, f: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len(self.dim(), f.len())?;
        Ok(apply_matrix(&self.matrix, f))
    }

    /// `e^{-zA}` for `Re z ≥ 0`.
    pub fn semigroup_at(&self, z: Complex64) -> Result<OperatorMatrix> {
        semigroup_at(self, z)
    }

    /// `I - e^{-tA}` for `t > 0`, via `expm1` so small `t` keeps full
    /// relative accuracy.
    pub fn decay_complement(&self, t: f64) -> Result<OperatorMatrix> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(domain(format!("time must be positive, got {t}")));
        }
        let matrix = self.spectrum.function(|l| Complex64::new(-(-t * l).exp_m1(), 0.0), true);
        Ok(OperatorMatrix { matrix, space: self.space.clone() })
    }
}

/// `e^{-zA}` for `Re z ≥ 0`.
pub fn semigroup_at(gen: &Generator, z: Complex64) -> Result<OperatorMatrix> {
    if !(z.re >= 0.0) || !z.im.is_finite() {
        return Err(domain(format!("semigroup needs Re z ≥ 0, got {z}")));
    }
    let matrix = gen.spectrum.function(|l| (-z * l).exp(), true);
    Ok(OperatorMatrix { matrix, space: gen.space.clone() })
}

/// Euler approximant `(I + (t/n) A)^{-n}`.
pub fn euler_approx(gen: &Generator, t: f64, steps: u32) -> Result<OperatorMatrix> {
    if !(t > 0.0) || steps == 0 {
        return Err(domain(format!("euler approximant needs t > 0 and n ≥ 1, got t = {t}, n = {steps}")));
    }
    let n = gen.dim();
    let h = Complex64::new(t / steps as f64, 0.0);
    let shifted = CMatrix::identity(n, n) + gen.matrix.map(|a| a * h);
    let resolvent = shifted
        .try_inverse()
        .ok_or_else(|| Error::Numeric("resolvent I + (t/n)A is singular".into()))?;
    let mut result = CMatrix::identity(n, n);
    let mut base = resolvent;
    let mut k = steps;
    while k > 0 {
        if k & 1 == 1 {
            result = &result * &base;
        }
        k >>= 1;
        if k > 0 {
            base = &base * &base;
        }
    }
    Ok(OperatorMatrix { matrix: result, space: gen.space.clone() })
}

/// Iteration cap for each ascent run in [`operator_pnorm_lower_bound`].
const ASCENT_ITERS: usize = 100;

/// Weighted `‖M‖_{p→p}`: exact for `p ∈ {1, 2, ∞}`, otherwise the best
/// value of `‖Mf‖_p / ‖f‖_p` found by multistart ascent (a lower bound).
pub fn operator_pnorm_lower_bound(op: &OperatorMatrix, p: Exponent, restarts: usize, seed: u64) -> f64 {
    let p = match p {
        Exponent::Infinity => return op.linf_norm(),
        Exponent::Finite(1.0) => return op.l1_norm(),
        Exponent::Finite(2.0) => return op.l2_norm(),
        Exponent::Finite(p) => p,
    };
    let adjoint = op.weighted_adjoint();
    let n = op.dim();
    let starts = restarts.max(1);
    (0..=starts)
        .into_par_iter()
        .map(|k| {
            let start = if k == 0 {
                vec![ONE; n]
            } else {
                complex_gaussian_vec(&mut stream(seed, k as u64), n)
            };
            power_ascent(op, &adjoint, start, p)
        })
        .reduce(|| 0.0, f64::max)
}

/// Boyd's power iteration for `‖M‖_{p→p}`: alternately apply the norming
/// functional in `L^{p'}` and the adjoint. The ratio never decreases.
fn power_ascent(op: &OperatorMatrix, adjoint: &OperatorMatrix, start: Vec<Complex64>, p: f64) -> f64 {
    let space = op.space();
    let pe = Exponent::Finite(p);
    let q = p / (p - 1.0);
    let mut f = start;
    let mut best = 0.0f64;
    for _ in 0..ASCENT_ITERS {
        let Ok(fnorm) = space.p_norm(&f, pe) else { break };
        if !(fnorm > 0.0 && fnorm.is_finite()) {
            break;
        }
        let y = apply_matrix(op.matrix(), &f);
        let ynorm = space.p_norm(&y, pe).unwrap_or(0.0);
        let ratio = ynorm / fnorm;
        let improved = ratio > best * (1.0 + 1e-14);
        best = best.max(ratio);
        if !improved || ynorm == 0.0 {
            break;
        }
        let g: Vec<Complex64> = y.iter().map(|&z| duality_scalar(z / ynorm, p)).collect();
        let u = apply_matrix(adjoint.matrix(), &g);
        let unorm = space.p_norm(&u, Exponent::Finite(q)).unwrap_or(0.0);
        if unorm == 0.0 {
            break;
        }
        f = u.iter().map(|&z| duality_scalar(z / unorm, q)).collect();
    }
    best
}

/// The 2×2 generator `[[1, -conj λ], [-λ, 1]]` on counting measure, for
/// unimodular `λ`.
pub fn make_lambda_family(lambda: Complex64) -> Result<Generator> {
    if (lambda.norm() - 1.0).abs() > 1e-12 {
        return Err(domain(format!("λ must be unimodular, got |λ| = {}", lambda.norm())));
    }
    let m = CMatrix::from_row_slice(2, 2, &[ONE, -lambda.conj(), -lambda, ONE]);
    Ok(Generator::new(m, FiniteMeasureSpace::uniform(2)?)?.with_label(format!("lambda:{},{}", lambda.re, lambda.im)))
}

/// The 2×2 example `[[1, -1], [-1, 1]]`.
pub fn paper_two_by_two() -> Generator {
    make_lambda_family(ONE).expect("λ = 1 is unimodular").with_label("paper2x2")
}

/// Graph Laplacian-type generator with `A_{jj} = d_j`, `A_{jk} = -W_{jk}`.
///
/// `W` must be nonnegative with `μ_j W_{jk} = μ_k W_{kj}`, and every
/// off-diagonal row sum must be dominated by `d_j`. The diagonal of `W` is
/// ignored.
pub fn make_graph_laplacian(w: &DMatrix<f64>, d: &[f64], space: FiniteMeasureSpace) -> Result<Generator> {
    let n = space.len();
    check_len(n, w.nrows())?;
    check_len(n, w.ncols())?;
    check_len(n, d.len())?;
    let mu = space.weights();
    for j in 0..n {
        let mut row = KahanSum::new();
        for k in (0..n).filter(|&k| k != j) {
            let wjk = w[(j, k)];
            if !(wjk >= 0.0 && wjk.is_finite()) {
                return Err(Error::Construction { row: j, reason: format!("weight W[{j},{k}] = {wjk} is not a nonnegative number") });
            }
            let lhs = mu[j] * wjk;
            let rhs = mu[k] * w[(k, j)];
            if (lhs - rhs).abs() > SELF_ADJOINT_TOL * (1.0 + lhs.abs().max(rhs.abs())) {
                return Err(Error::Construction { row: j, reason: format!("μ_j W[{j},{k}] = {lhs} differs from μ_k W[{k},{j}] = {rhs}") });
            }
            row.add(wjk);
        }
        let row = row.value();
        if !(d[j] >= 0.0) || row > d[j] {
            return Err(Error::Construction { row: j, reason: format!("off-diagonal row sum {row} exceeds diagonal {}", d[j]) });
        }
    }
    let m = CMatrix::from_fn(n, n, |j, k| {
        if j == k {
            Complex64::new(d[j], 0.0)
        } else {
            Complex64::new(-w[(j, k)], 0.0)
        }
    });
    Ok(Generator::new(m, space)?.with_label(format!("laplacian:{n}")))
}

/// Draws a random valid generator on `n` atoms with random weights.
///
/// With `positivity_preserving` the result is a dominated graph Laplacian.
/// Otherwise off-diagonal couplings carry random unimodular phases
/// (Hermitian in the weighted sense), so the semigroup is in general not
/// positivity-preserving.
pub fn random_generator(n: usize, seed: u64, positivity_preserving: bool) -> Result<Generator> {
    if n == 0 {
        return Err(domain("random generator needs n ≥ 1"));
    }
    let mut rng = stream(seed, 0);
    for _ in 0..SAMPLING_BUDGET {
        let mu: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
        let space = FiniteMeasureSpace::new(mu.clone())?;
        let density = rng.random_range(0.4..1.0);
        let mut m = CMatrix::zeros(n, n);
        for j in 0..n {
            for k in (j + 1)..n {
                if rng.random::<f64>() > density {
                    continue;
                }
                // symmetric coupling s = μ_j W_jk = μ_k W_kj
                let s: f64 = rng.random_range(0.05..2.0);
                let phase = if positivity_preserving {
                    ONE
                } else if rng.random::<f64>() < 0.25 {
                    -ONE
                } else {
                    unit_phase(&mut rng)
                };
                m[(j, k)] = -phase * (s / mu[j]);
                m[(k, j)] = -phase.conj() * (s / mu[k]);
            }
        }
        for j in 0..n {
            let row: KahanSum = (0..n).filter(|&k| k != j).map(|k| m[(j, k)].norm()).collect();
            let slack = if rng.random::<bool>() { 0.0 } else { rng.random_range(0.0..1.0) };
            m[(j, j)] = Complex64::new(row.value() + slack, 0.0);
        }
        if let Ok(gen) = Generator::new(m, space) {
            let kind = if positivity_preserving { "laplacian" } else { "random" };
            return Ok(gen.with_label(format!("{kind}:{n}:{seed}")));
        }
    }
    Err(Error::Sampling { tries: SAMPLING_BUDGET })
}

impl Generator {
    /// Zero generator (trivial semigroup) on `space`.
    pub fn zero(space: FiniteMeasureSpace) -> Self {
        let n = space.len();
        Self::new(CMatrix::from_element(n, n, ZERO), space)
            .expect("the zero matrix is a valid generator")
            .with_label("zero")
    }
}
