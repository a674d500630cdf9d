//! Explicit decomposition of `⟨(I - T(t)) f, F_p(f)⟩` for step functions
//! `f = Σ_j c_j 1_{B_j}` into a nonnegative diagonal part plus a positive
//! combination of two-point forms, and the compression of `T(t)` onto the
//! blocks of a partition.
//!
//! With `d_j = μ(B_j)` and `a_{kj} = ⟨T(t) 1_{B_j}, 1_{B_k}⟩`, writing
//! `a_{kj} = λ_{kj} |a_{kj}|` gives
//!
//! ```text
//! ⟨(I - T)f, F(f)⟩ = Σ_j (d_j - Σ_k |a_{kj}|) |c_j|^p
//!                  + ½ Σ_{jk} |a_{kj}| (λ_{kj} c_j - c_k) conj(F(λ_{kj} c_j) - F(c_k)).
//! ```
//!
//! The first sum is nonnegative because `T(t)` is an `L¹` contraction and
//! each summand of the second lies in `Σ_p`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::compensated::{ComplexSum, KahanSum};
use crate::error::{domain, Error, Result};
use crate::operators::{CMatrix, Generator, OperatorMatrix};
use crate::range::raw_form;
use crate::scalar::lp_form;
use crate::sector::Sector;
use crate::space::FiniteMeasureSpace;

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const L1_BOUND_TOL: f64 = 1e-10;
pub const FIRST_SUM_TOL: f64 = 1e-12;
pub const TERM_SECTOR_TOL: f64 = 1e-9;
pub const RESIDUAL_TOL: f64 = 1e-10;
pub const REDUCTION_TOL: f64 = 1e-12;

/// Disjoint nonempty blocks covering all atoms of a finite measure space.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
    measures: Vec<f64>,
    parent: FiniteMeasureSpace,
}

impl Partition {
    pub fn new(blocks: Vec<Vec<usize>>, parent: &FiniteMeasureSpace) -> Result<Self> {
        let n = parent.len();
        let mut owner = vec![None; n];
        if blocks.is_empty() {
            return Err(Error::Partition("no blocks".into()));
        }
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::Partition(format!("block {b} is empty")));
            }
            for &i in block {
                if i >= n {
                    return Err(Error::Partition(format!("atom {i} out of range for {n} atoms")));
                }
                if let Some(prev) = owner[i].replace(b) {
                    return Err(Error::Partition(format!("atom {i} lies in blocks {prev} and {b}")));
                }
            }
        }
        if let Some(i) = owner.iter().position(Option::is_none) {
            return Err(Error::Partition(format!("atom {i} is not covered")));
        }
        let mu = parent.weights();
        let measures = blocks
            .iter()
            .map(|block| block.iter().map(|&i| mu[i]).collect::<KahanSum>().value())
            .collect();
        Ok(Self { blocks, measures, parent: parent.clone() })
    }

    /// Every atom in its own block.
    pub fn atoms(parent: &FiniteMeasureSpace) -> Self {
        Self::new((0..parent.len()).map(|i| vec![i]).collect(), parent).expect("singletons partition")
    }

    /// One block holding every atom.
    pub fn whole(parent: &FiniteMeasureSpace) -> Self {
        Self::new(vec![(0..parent.len()).collect()], parent).expect("one block partitions")
    }

    /// Assigns atoms to `m` nonempty blocks uniformly at random.
    pub fn random<R: rand::Rng + ?Sized>(parent: &FiniteMeasureSpace, m: usize, rng: &mut R) -> Result<Self> {
        let n = parent.len();
        if m == 0 || m > n {
            return Err(Error::Partition(format!("cannot split {n} atoms into {m} nonempty blocks")));
        }
        let mut atoms: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            atoms.swap(i, rng.random_range(0..=i));
        }
        let mut blocks: Vec<Vec<usize>> = atoms[..m].iter().map(|&i| vec![i]).collect();
        for &i in &atoms[m..] {
            blocks[rng.random_range(0..m)].push(i);
        }
        for b in &mut blocks {
            b.sort_unstable();
        }
        Self::new(blocks, parent)
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Block measures `d_j = μ(B_j)`.
    pub fn measures(&self) -> &[f64] {
        &self.measures
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn parent(&self) -> &FiniteMeasureSpace {
        &self.parent
    }

    /// The quotient space `{1, …, m}` with weights `d_j`.
    pub fn compressed_space(&self) -> FiniteMeasureSpace {
        FiniteMeasureSpace::new(self.measures.clone()).expect("block measures are positive")
    }

    /// `J c = Σ_j c_j 1_{B_j}`.
    pub fn embed(&self, c: &[Complex64]) -> Result<Vec<Complex64>> {
        crate::error::check_len(self.len(), c.len())?;
        let mut f = vec![Complex64::new(0.0, 0.0); self.parent.len()];
        for (block, cj) in self.blocks.iter().zip(c) {
            for &i in block {
                f[i] = *cj;
            }
        }
        Ok(f)
    }

    /// Hilbert adjoint of [`Partition::embed`]: block averages
    /// `(J* g)_j = (1/d_j) Σ_{i ∈ B_j} μ_i g_i`.
    pub fn average(&self, g: &[Complex64]) -> Result<Vec<Complex64>> {
        crate::error::check_len(self.parent.len(), g.len())?;
        let mu = self.parent.weights();
        Ok(self
            .blocks
            .iter()
            .zip(&self.measures)
            .map(|(block, d)| {
                let mut acc = ComplexSum::new();
                for &i in block {
                    acc.add(g[i] * mu[i]);
                }
                acc.value() / d
            })
            .collect())
    }
}

/// Pass/fail status of each certificate invariant with its worst defect.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificateChecks {
    /// `max |a_{jk} - conj(a_{kj})|`.
    pub hermitian_defect: f64,
    pub hermitian: bool,
    /// `max_j (Σ_k |a_{kj}| - d_j)`.
    pub l1_excess: f64,
    pub l1_bound: bool,
    /// `|Σ_k |a_{kj}| - ⟨T 1_{B_j}, Σ_k λ_{kj} 1_{B_k}⟩|`, maximised over `j`.
    pub l1_mechanism_defect: f64,
    pub first_sum_nonnegative: bool,
    pub terms_in_sector: bool,
    pub residual_small: bool,
    pub direct_in_sector: bool,
}

impl CertificateChecks {
    pub fn all_pass(&self) -> bool {
        self.hermitian
            && self.l1_bound
            && self.first_sum_nonnegative
            && self.terms_in_sector
            && self.residual_small
            && self.direct_in_sector
    }
}

/// Decomposition data for one step function and one time.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub t: f64,
    pub p: f64,
    pub c: Vec<Complex64>,
    pub d: Vec<f64>,
    /// `a[(k, j)] = ⟨T 1_{B_j}, 1_{B_k}⟩`.
    pub a: CMatrix,
    /// Unimodular phases with `a = λ |a|`; `1` where `a` vanishes.
    pub lambda: CMatrix,
    pub first_sum: f64,
    /// `terms[(k, j)] = ½ |a_{kj}| (λ_{kj} c_j - c_k) conj(F(λ_{kj} c_j) - F(c_k))`.
    pub terms: CMatrix,
    pub total: Complex64,
    /// `⟨(I - T) f, F_p(f)⟩` at raw scale, computed independently.
    pub direct_value: Complex64,
    pub residual: f64,
    pub checks: CertificateChecks,
}

fn check_inputs(t: f64, part: &Partition, c: &[Complex64], p: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(domain(format!("time must be positive, got {t}")));
    }
    if !(p > 1.0 && p.is_finite()) {
        return Err(domain(format!("p must lie in (1, ∞), got {p}")));
    }
    crate::error::check_len(part.len(), c.len())?;
    if let Some(j) = c.iter().position(|z| z.norm() == 0.0) {
        return Err(domain(format!("coefficient c_{j} is zero")));
    }
    Ok(())
}

/// `a[(k, j)] = ⟨T 1_{B_j}, 1_{B_k}⟩ = Σ_{i ∈ B_k} μ_i Σ_{l ∈ B_j} T_{il}`.
fn block_pairings(step: &OperatorMatrix, part: &Partition) -> CMatrix {
    let m = part.len();
    let mu = part.parent().weights();
    let tm = step.matrix();
    CMatrix::from_fn(m, m, |k, j| {
        let mut acc = ComplexSum::new();
        for &i in &part.blocks()[k] {
            for &l in &part.blocks()[j] {
                acc.add(tm[(i, l)] * mu[i]);
            }
        }
        acc.value()
    })
}

/// Builds the certificate for `T(t) = e^{-tA}`.
pub fn build_certificate(gen: &Generator, t: f64, part: &Partition, c: &[Complex64], p: f64) -> Result<Certificate> {
    check_inputs(t, part, c, p)?;
    check_parent(gen.space(), part)?;
    let step = gen.semigroup_at(Complex64::new(t, 0.0))?;
    let complement = gen.decay_complement(t)?;
    certify(&step, &complement, t, part, c, p)
}

/// Builds the certificate for an arbitrary one-step operator `T` standing
/// in for `T(t)` (for example a compression).
pub fn certificate_for_step(step: &OperatorMatrix, t: f64, part: &Partition, c: &[Complex64], p: f64) -> Result<Certificate> {
    check_inputs(t, part, c, p)?;
    check_parent(step.space(), part)?;
    let n = step.dim();
    let complement = OperatorMatrix::new(CMatrix::identity(n, n) - step.matrix(), step.space().clone())?;
    certify(step, &complement, t, part, c, p)
}

fn check_parent(space: &FiniteMeasureSpace, part: &Partition) -> Result<()> {
    if part.parent() != space {
        return Err(Error::Partition("partition belongs to a different measure space".into()));
    }
    Ok(())
}

fn certify(
    step: &OperatorMatrix,
    complement: &OperatorMatrix,
    t: f64,
    part: &Partition,
    c: &[Complex64],
    p: f64,
) -> Result<Certificate> {
    let m = part.len();
    let d = part.measures().to_vec();
    let a = block_pairings(step, part);
    let lambda = a.map(|z| if z.norm() > 0.0 { z / z.norm() } else { Complex64::new(1.0, 0.0) });

    let mut hermitian_defect = 0.0f64;
    for j in 0..m {
        for k in 0..m {
            hermitian_defect = hermitian_defect.max((a[(j, k)] - a[(k, j)].conj()).norm());
        }
    }

    let column_abs: Vec<f64> =
        (0..m).map(|j| (0..m).map(|k| a[(k, j)].norm()).collect::<KahanSum>().value()).collect();
    let l1_excess = column_abs.iter().zip(&d).map(|(s, dj)| s - dj).fold(f64::NEG_INFINITY, f64::max);

    // Σ_k |a_kj| again, as ⟨T 1_{B_j}, Σ_k λ_kj 1_{B_k}⟩
    let mut l1_mechanism_defect = 0.0f64;
    for j in 0..m {
        let mut ind = vec![Complex64::new(0.0, 0.0); m];
        ind[j] = Complex64::new(1.0, 0.0);
        let tj = step.apply(&part.embed(&ind)?)?;
        let phases: Vec<Complex64> = (0..m).map(|k| lambda[(k, j)]).collect();
        let via_phases = step.space().pairing(&tj, &part.embed(&phases)?)?;
        l1_mechanism_defect = l1_mechanism_defect.max((via_phases - column_abs[j]).norm());
    }

    let first_sum = (0..m)
        .map(|j| (d[j] - column_abs[j]) * c[j].norm().powf(p))
        .collect::<KahanSum>()
        .value();

    let terms = CMatrix::from_fn(m, m, |k, j| {
        let weight = a[(k, j)].norm();
        if weight == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            lp_form(c[k], lambda[(k, j)] * c[j], p) * (0.5 * weight)
        }
    });
    let mut total_acc = ComplexSum::new();
    total_acc.add(Complex64::new(first_sum, 0.0));
    for z in terms.iter() {
        total_acc.add(*z);
    }
    let total = total_acc.value();

    let f = part.embed(c)?;
    let direct_value = raw_form(complement, &f, p)?;
    let residual = (total - direct_value).norm();

    let sector = Sector::for_exponent(p)?;
    let checks = CertificateChecks {
        hermitian_defect,
        hermitian: hermitian_defect <= HERMITIAN_TOL,
        l1_excess,
        l1_bound: l1_excess <= L1_BOUND_TOL,
        l1_mechanism_defect,
        first_sum_nonnegative: first_sum >= -FIRST_SUM_TOL,
        terms_in_sector: terms.iter().all(|z| sector.contains(*z, TERM_SECTOR_TOL)),
        residual_small: residual <= RESIDUAL_TOL * (1.0 + direct_value.norm()),
        direct_in_sector: sector.contains(direct_value, TERM_SECTOR_TOL),
    };

    Ok(Certificate {
        t,
        p,
        c: c.to_vec(),
        d,
        a,
        lambda,
        first_sum,
        terms,
        total,
        direct_value,
        residual,
        checks,
    })
}

/// Compression `S = J* T(t) J`, i.e. `S_{jk} = a_{jk} / d_j`, on the
/// quotient space with weights `d_j`.
pub fn compress(gen: &Generator, t: f64, part: &Partition) -> Result<(OperatorMatrix, FiniteMeasureSpace)> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(domain(format!("time must be positive, got {t}")));
    }
    check_parent(gen.space(), part)?;
    let step = gen.semigroup_at(Complex64::new(t, 0.0))?;
    compress_step(&step, part)
}

/// Compression of an arbitrary operator onto the blocks of `part`.
pub fn compress_step(step: &OperatorMatrix, part: &Partition) -> Result<(OperatorMatrix, FiniteMeasureSpace)> {
    check_parent(step.space(), part)?;
    let a = block_pairings(step, part);
    let d = part.measures();
    let s = CMatrix::from_fn(part.len(), part.len(), |j, k| a[(j, k)] / d[j]);
    let space = part.compressed_space();
    Ok((OperatorMatrix::new(s, space.clone())?, space))
}

/// `|⟨(I - S)v, F(v)⟩_{μ'} - ⟨(I - T(t))f, F(f)⟩_μ|` with `v = c` and
/// `f = J c`.
pub fn verify_reduction_identity(gen: &Generator, t: f64, part: &Partition, c: &[Complex64], p: f64) -> Result<f64> {
    Ok(reduction_sides(gen, t, part, c, p)?.residual())
}

/// Both sides of the reduction identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReductionSides {
    pub compressed: Complex64,
    pub original: Complex64,
}

impl ReductionSides {
    pub fn residual(&self) -> f64 {
        (self.compressed - self.original).norm()
    }

    pub fn magnitude(&self) -> f64 {
        self.compressed.norm().max(self.original.norm())
    }

    pub fn holds(&self) -> bool {
        self.residual() <= REDUCTION_TOL * (1.0 + self.magnitude())
    }
}

pub fn reduction_sides(gen: &Generator, t: f64, part: &Partition, c: &[Complex64], p: f64) -> Result<ReductionSides> {
    check_inputs(t, part, c, p)?;
    let (s, space) = compress(gen, t, part)?;
    let m = part.len();
    let complement_s = OperatorMatrix::new(CMatrix::identity(m, m) - s.matrix(), space)?;
    let compressed = raw_form(&complement_s, c, p)?;
    let original = raw_form(&gen.decay_complement(t)?, &part.embed(c)?, p)?;
    Ok(ReductionSides { compressed, original })
}

/// Real 0/1 matrix of the embedding `J` (atoms × blocks).
pub fn embedding_matrix(part: &Partition) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(part.parent().len(), part.len());
    for (b, block) in part.blocks().iter().enumerate() {
        for &i in block {
            j[(i, b)] = 1.0;
        }
    }
    j
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{paper_two_by_two, random_generator};
    use crate::random::{complex_gaussian_vec, stream};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn partition_validation() {
        let s = FiniteMeasureSpace::new(vec![1.0, 2.0, 0.5]).unwrap();
        let p = Partition::new(vec![vec![0, 2], vec![1]], &s).unwrap();
        assert_eq!(p.measures(), &[1.5, 2.0]);
        assert!(Partition::new(vec![vec![0], vec![1]], &s).is_err());
        assert!(Partition::new(vec![vec![0, 1], vec![1, 2]], &s).is_err());
        assert!(Partition::new(vec![vec![0, 1, 2], vec![]], &s).is_err());
        assert!(Partition::new(vec![vec![0, 1, 3]], &s).is_err());
        assert!(Partition::new(vec![], &s).is_err());
        let mut rng = stream(1, 0);
        for m in 1..=3 {
            let r = Partition::random(&s, m, &mut rng).unwrap();
            assert_eq!(r.len(), m);
        }
        assert!(Partition::random(&s, 4, &mut rng).is_err());
    }

    #[test]
    fn embedding_adjoint_relation() {
        let s = FiniteMeasureSpace::new(vec![1.0, 2.0, 0.5, 3.0]).unwrap();
        let part = Partition::new(vec![vec![0, 3], vec![1, 2]], &s).unwrap();
        let v = [c(1., -1.), c(0.5, 2.)];
        let g = [c(0.2, 0.), c(-1., 1.), c(3., 0.5), c(0., -2.)];
        // ⟨J v, g⟩_μ = ⟨v, J* g⟩_{μ'}
        let lhs = s.pairing(&part.embed(&v).unwrap(), &g).unwrap();
        let rhs = part.compressed_space().pairing(&v, &part.average(&g).unwrap()).unwrap();
        assert!((lhs - rhs).norm() < 1e-14);
        // J is an isometry on L²
        let jv = part.embed(&v).unwrap();
        assert!((s.pairing(&jv, &jv).unwrap() - part.compressed_space().pairing(&v, &v).unwrap()).norm() < 1e-14);
    }

    #[test]
    fn single_block_collapse() {
        let g = random_generator(4, 2, true).unwrap();
        let part = Partition::whole(g.space());
        let cert = build_certificate(&g, 0.8, &part, &[c(0.7, -1.1)], 3.0).unwrap();
        assert!(cert.lambda[(0, 0)] == c(1., 0.) || (cert.lambda[(0, 0)] - 1.0).norm() < 1e-14);
        assert!(cert.terms[(0, 0)].norm() < 1e-14);
        let expect = (cert.d[0] - cert.a[(0, 0)].norm()) * c(0.7, -1.1).norm().powf(3.0);
        assert!((cert.first_sum - expect).abs() < 1e-14);
        assert!(cert.first_sum >= 0.0);
        assert!(cert.checks.all_pass(), "{:?}", cert.checks);
    }

    #[test]
    fn two_by_two_certificate() {
        let g = paper_two_by_two();
        let part = Partition::atoms(g.space());
        let cert = build_certificate(&g, 1.0, &part, &[c(1., 0.), c(0., 2.)], 4.0).unwrap();
        assert!(cert.residual <= 1e-10 * (1.0 + cert.direct_value.norm()));
        assert!(cert.checks.all_pass(), "{:?}", cert.checks);
        // e^{-A} entries: a_11 = (1 + e^{-2})/2, a_21 = (1 - e^{-2})/2
        let e = (-2f64).exp();
        assert!((cert.a[(0, 0)].re - (1.0 + e) / 2.0).abs() < 1e-14);
        assert!((cert.a[(1, 0)].re - (1.0 - e) / 2.0).abs() < 1e-14);
        assert!(cert.first_sum.abs() < 1e-13);
    }

    #[test]
    fn random_certificate_three_blocks() {
        let g = random_generator(8, 21, true).unwrap();
        let mut rng = stream(21, 1);
        let part = Partition::random(g.space(), 3, &mut rng).unwrap();
        let cv = complex_gaussian_vec(&mut rng, 3);
        let cert = build_certificate(&g, 0.6, &part, &cv, 3.0).unwrap();
        assert!(cert.checks.all_pass(), "{:?}", cert.checks);
        assert!(cert.checks.l1_mechanism_defect < 1e-12);
        for j in 0..3 {
            for k in 0..3 {
                assert!((cert.lambda[(k, j)].norm() - 1.0).abs() < 1e-15);
                assert!((cert.lambda[(k, j)] * cert.a[(k, j)].norm() - cert.a[(k, j)]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn certificate_input_errors() {
        let g = paper_two_by_two();
        let part = Partition::atoms(g.space());
        assert!(matches!(
            build_certificate(&g, 1.0, &part, &[c(1., 0.), c(0., 0.)], 3.0),
            Err(Error::Domain(_))
        ));
        assert!(build_certificate(&g, 0.0, &part, &[c(1., 0.), c(1., 0.)], 3.0).is_err());
        let other = FiniteMeasureSpace::new(vec![1.0, 2.0]).unwrap();
        let wrong = Partition::atoms(&other);
        assert!(matches!(
            build_certificate(&g, 1.0, &wrong, &[c(1., 0.), c(1., 0.)], 3.0),
            Err(Error::Partition(_))
        ));
    }

    #[test]
    fn compression_examples() {
        let g = random_generator(5, 7, false).unwrap();
        let (s, space) = compress(&g, 0.9, &Partition::atoms(g.space())).unwrap();
        let t = g.semigroup_at(c(0.9, 0.)).unwrap();
        assert_eq!(&space, g.space());
        assert!((s.matrix() - t.matrix()).iter().all(|z| z.norm() < 1e-15));

        let p2 = paper_two_by_two();
        for time in [0.1, 1.0, 4.0] {
            let (s, space) = compress(&p2, time, &Partition::whole(p2.space())).unwrap();
            assert_eq!(space.weights(), &[2.0]);
            assert!((s.matrix()[(0, 0)] - 1.0).norm() < 1e-14);
            assert!((s.l1_norm() - 1.0).abs() < 1e-14 && (s.linf_norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn compression_equals_sandwich() {
        let g = random_generator(7, 3, false).unwrap();
        let mut rng = stream(3, 9);
        let part = Partition::random(g.space(), 3, &mut rng).unwrap();
        let (s, _) = compress(&g, 0.4, &part).unwrap();
        let t = g.semigroup_at(c(0.4, 0.)).unwrap();
        for k in 0..part.len() {
            let mut e = vec![c(0., 0.); part.len()];
            e[k] = c(1., 0.);
            let col = part.average(&t.apply(&part.embed(&e).unwrap()).unwrap()).unwrap();
            for j in 0..part.len() {
                assert!((col[j] - s.matrix()[(j, k)]).norm() < 1e-14);
            }
        }
        let jm = embedding_matrix(&part);
        assert_eq!(jm.column_sum().iter().map(|&x| x as usize).sum::<usize>(), 7);
    }

    #[test]
    fn reduction_identity_examples() {
        let g = paper_two_by_two();
        let cv = [c(1., 0.), c(0., 2.)];
        let r = verify_reduction_identity(&g, 1.0, &Partition::atoms(g.space()), &cv, 4.0).unwrap();
        assert!(r <= 1e-12 * 17.0, "{r}");
        let sides = reduction_sides(&g, 1.0, &Partition::whole(g.space()), &[c(0.3, 0.4)], 4.0).unwrap();
        assert!(sides.holds(), "{sides:?}");
        // single block of a conservative semigroup: S = 1, so both sides vanish
        assert!(sides.magnitude() < 1e-14);
    }
}
