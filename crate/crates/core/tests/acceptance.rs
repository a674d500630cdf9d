//! Acceptance suite: eleven numbered criteria, each run against its time
//! budget. Prints one PASS/FAIL line per criterion and exits non-zero if
//! any criterion fails.

mod common;

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nrsector_core::certificate::{reduction_sides, Partition};
use nrsector_core::random::{complex_gaussian, complex_gaussian_vec, stream};
use nrsector_core::range::{unpack_attaining, DEFAULT_SEARCH_RESTARTS};
use nrsector_core::sector::sector_angle_arctan;
use nrsector_core::{
    build_certificate, compress, contraction_sweep, euler_approx, form_value, jacobian_f, lemma3_sup_angle, lp_form,
    max_arg_search, paper_two_by_two, random_generator, sample_range, scalar_sharpness_search, sector_angle,
    semigroup_at, Complex64, Generator, OperatorMatrix, Sector,
};
use rand::Rng;

use common::{fleet, EXPONENTS};

type Check = std::result::Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn c1_form_inclusion() -> Check {
    let mut worst = f64::NEG_INFINITY;
    for (i, &p) in EXPONENTS.iter().enumerate() {
        let sector = Sector::for_exponent(p).map_err(|e| e.to_string())?;
        let mut rng = stream(0xacce_0001, i as u64);
        for _ in 0..100_000 {
            let sz = 10f64.powf(rng.random_range(-2.0..2.0));
            let sw = 10f64.powf(rng.random_range(-2.0..2.0));
            let z = complex_gaussian(&mut rng) * sz;
            let w = complex_gaussian(&mut rng) * sw;
            let v = lp_form(z, w, p);
            if v.norm() > 0.0 {
                worst = worst.max(v.arg().abs() - sector.angle());
            }
            ensure(sector.contains(v, 1e-9), || format!("p = {p}: z = {z}, w = {w} gives {v}"))?;
        }
    }
    Ok(format!("6e5 pairs, worst |arg| - φ_p = {worst:.3e}"))
}

fn c2_scalar_sharpness() -> Check {
    let mut worst = 0.0f64;
    for p in [1.5, 3.0, 4.0, 10.0] {
        let s = scalar_sharpness_search(p, 64, 2).map_err(|e| e.to_string())?;
        let phi = sector_angle(p).unwrap();
        let gap = phi - s.best_angle();
        ensure(gap.abs() <= 1e-3, || format!("p = {p}: best {} vs φ_p {phi}", s.best_angle()))?;
        ensure(s.best_angle() <= phi + 1e-9, || format!("p = {p}: best {} overshoots φ_p", s.best_angle()))?;
        worst = worst.max(gap.abs());
    }
    Ok(format!("worst gap {worst:.3e}"))
}

fn c3_diagonal_quadratic_form() -> Check {
    let mut worst_gap = 0.0f64;
    let mut worst_identity = 0.0f64;
    for lambda in [0.1, 0.5, 1.0, 2.0, 3.0, 10.0] {
        let s = lemma3_sup_angle(lambda, 10_000).map_err(|e| e.to_string())?;
        let target = ((lambda - 1.0f64).abs() / (lambda + 1.0)).asin();
        let gap = (s.angle.best_angle - target).abs();
        ensure(gap <= 1e-6, || format!("λ = {lambda}: sup {} vs {target}", s.angle.best_angle))?;
        ensure(s.identity_residual <= 1e-12, || format!("λ = {lambda}: identity residual {}", s.identity_residual))?;
        worst_gap = worst_gap.max(gap);
        worst_identity = worst_identity.max(s.identity_residual);
    }
    Ok(format!("worst gap {worst_gap:.3e}, identity residual {worst_identity:.3e}"))
}

/// Central differences of the duality map, computed here rather than by
/// the library.
fn fd_oracle(y: [f64; 2], p: f64, h: f64) -> [[f64; 2]; 2] {
    let f = |a: f64, b: f64| {
        let z = Complex64::new(a, b);
        let r = z.norm();
        let v = z * r.powf(p - 2.0);
        [v.re, v.im]
    };
    let mut out = [[0.0; 2]; 2];
    for j in 0..2 {
        let (mut hi, mut lo) = (y, y);
        hi[j] += h;
        lo[j] -= h;
        let (a, b) = (f(hi[0], hi[1]), f(lo[0], lo[1]));
        for i in 0..2 {
            out[i][j] = (a[i] - b[i]) / (2.0 * h);
        }
    }
    out
}

fn c4_jacobian() -> Check {
    let mut rng = stream(0xacce_0004, 0);
    let (mut worst_fd, mut worst_eig) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let p = rng.random_range(1.1..10.0);
        let r = 10f64.powf(rng.random_range(-1.0..1.0));
        let th = rng.random_range(-PI..PI);
        let y = [r * th.cos(), r * th.sin()];
        let j = jacobian_f(y, p).map_err(|e| e.to_string())?;
        let fd = fd_oracle(y, p, 1e-6 * r);
        let scale = j.matrix.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max);
        for a in 0..2 {
            for b in 0..2 {
                let rel = (j.matrix[a][b] - fd[a][b]).abs() / scale;
                worst_fd = worst_fd.max(rel);
                ensure(rel <= 1e-6, || format!("y = {y:?}, p = {p}: entry ({a},{b}) off by {rel:.3e}"))?;
            }
        }
        // eigenpairs (|y|^{p-2}, y^⊥) and ((p-1)|y|^{p-2}, y)
        let base = r.powf(p - 2.0);
        let unit = [y[0] / r, y[1] / r];
        let expected = [(base, [-unit[1], unit[0]]), ((p - 1.0) * base, unit)];
        for (k, (lam, v)) in expected.iter().enumerate() {
            let dl = (j.eigenvalues[k] - lam).abs() / lam;
            let dv = (j.eigenvectors[k][0] - v[0]).abs().max((j.eigenvectors[k][1] - v[1]).abs());
            let av = [
                j.matrix[0][0] * v[0] + j.matrix[0][1] * v[1],
                j.matrix[1][0] * v[0] + j.matrix[1][1] * v[1],
            ];
            let res = (av[0] - lam * v[0]).abs().max((av[1] - lam * v[1]).abs()) / lam;
            let d = dl.max(dv).max(res);
            worst_eig = worst_eig.max(d);
            ensure(d <= 1e-10, || format!("y = {y:?}, p = {p}: eigenpair {k} off by {d:.3e}"))?;
        }
    }
    Ok(format!("1e3 points, worst fd {worst_fd:.3e}, eigenpair {worst_eig:.3e}"))
}

fn c5_angle_formula() -> Check {
    let mut rng = stream(0xacce_0005, 0);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let p = 1.0 + 99.0 * rng.random_range(f64::EPSILON..1.0);
        if p <= 1.0 {
            continue;
        }
        let a = sector_angle(p).map_err(|e| e.to_string())?;
        let b = sector_angle_arctan(p).map_err(|e| e.to_string())?;
        let oracle = ((p - 2.0).abs() / (2.0 * (p - 1.0).sqrt())).atan();
        let d = (a - b).abs().max((a - oracle).abs());
        worst = worst.max(d);
        ensure(d <= 1e-12, || format!("p = {p}: arcsin {a} vs arctan {b}"))?;
    }
    Ok(format!("worst difference {worst:.3e}"))
}

fn c6_fleet_containment(gens: &[Generator]) -> Check {
    let mut worst = f64::NEG_INFINITY;
    let mut evaluations = 0usize;
    for (g, gen) in gens.iter().enumerate() {
        for (i, &p) in EXPONENTS.iter().enumerate() {
            let sector = Sector::for_exponent(p).unwrap();
            let seed = (g * 16 + i) as u64;
            let sample = sample_range(gen, p, 10_000, seed).map_err(|e| e.to_string())?;
            evaluations += sample.values.len();
            for v in &sample.values {
                ensure(sector.contains(*v, 1e-9), || format!("{} at p = {p}: sampled {v}", gen.label()))?;
            }
            worst = worst.max(sample.max_abs_arg - sector.angle());
            let found = max_arg_search(gen, p, DEFAULT_SEARCH_RESTARTS, seed).map_err(|e| e.to_string())?;
            ensure(found.best_angle <= sector.angle() + 1e-9, || {
                format!("{} at p = {p}: search angle {}", gen.label(), found.best_angle)
            })?;
            let v = form_value(gen, &unpack_attaining(&found.attaining_input), p).map_err(|e| e.to_string())?;
            ensure(sector.contains(v, 1e-9), || format!("{} at p = {p}: maximiser gives {v}", gen.label()))?;
            worst = worst.max(found.best_angle - sector.angle());
        }
    }
    Ok(format!("{} generators, {evaluations} samples, worst |arg| - φ_p = {worst:.3e}", gens.len()))
}

fn c7_two_by_two_sharpness() -> Check {
    let gen = paper_two_by_two();
    let mut worst = 0.0f64;
    for p in [1.5, 4.0] {
        let s = max_arg_search(&gen, p, 8, 7).map_err(|e| e.to_string())?;
        let phi = sector_angle(p).unwrap();
        let gap = (phi - s.best_angle).abs();
        ensure(gap <= 1e-3, || format!("p = {p}: best {} vs φ_p {phi}", s.best_angle))?;
        worst = worst.max(gap);
    }
    Ok(format!("worst gap {worst:.3e}"))
}

fn random_instance(i: u64, salt: u64) -> std::result::Result<(Generator, Partition, Vec<Complex64>, f64, f64), String> {
    let n = 2 + (i as usize % 7);
    let gen = random_generator(n, salt + i, i % 2 == 0).map_err(|e| e.to_string())?;
    let mut rng = stream(salt, i);
    let m = rng.random_range(1..=n);
    let part = Partition::random(gen.space(), m, &mut rng).map_err(|e| e.to_string())?;
    let c = complex_gaussian_vec(&mut rng, m);
    let p = EXPONENTS[i as usize % EXPONENTS.len()];
    let t = 10f64.powf(rng.random_range(-1.3..0.7));
    Ok((gen, part, c, p, t))
}

fn c8_certificates() -> Check {
    let (mut herm, mut excess, mut neg, mut resid) = (0.0f64, f64::NEG_INFINITY, 0.0f64, 0.0f64);
    for i in 0..200 {
        let (gen, part, c, p, t) = random_instance(i, 80_000)?;
        let cert = build_certificate(&gen, t, &part, &c, p).map_err(|e| e.to_string())?;
        let label = || format!("instance {i} ({}, m = {}, p = {p}, t = {t:.3})", gen.label(), part.len());
        let m = part.len();
        let sector = Sector::for_exponent(p).unwrap();

        let first = cert.first_sum;
        ensure(first >= -1e-12, || format!("{}: first sum {first}", label()))?;
        neg = neg.min(first);
        for j in 0..m {
            let col: f64 = (0..m).map(|k| cert.a[(k, j)].norm()).sum();
            excess = excess.max(col - cert.d[j]);
            ensure(col <= cert.d[j] + 1e-10, || format!("{}: column {j} sum {col} > d = {}", label(), cert.d[j]))?;
            for k in 0..m {
                let h = (cert.a[(j, k)] - cert.a[(k, j)].conj()).norm();
                herm = herm.max(h);
                ensure(h <= 1e-12, || format!("{}: hermitian defect {h}", label()))?;
                let term = cert.terms[(k, j)];
                ensure(sector.contains(term, 1e-9), || format!("{}: term ({k},{j}) = {term}", label()))?;
            }
        }
        let rel = cert.residual / (1.0 + cert.direct_value.norm());
        resid = resid.max(rel);
        ensure(rel <= 1e-10, || format!("{}: residual {}", label(), cert.residual))?;
        ensure(cert.checks.all_pass(), || format!("{}: {:?}", label(), cert.checks))?;
    }
    Ok(format!(
        "200 instances, hermitian {herm:.1e}, column excess {excess:.1e}, min first sum {neg:.1e}, residual {resid:.1e}"
    ))
}

fn c9_reduction_identity() -> Check {
    let (mut worst, mut worst_norm) = (0.0f64, 0.0f64);
    for i in 0..100 {
        let (gen, part, c, p, t) = random_instance(i, 90_000)?;
        let sides = reduction_sides(&gen, t, &part, &c, p).map_err(|e| e.to_string())?;
        let rel = sides.residual() / (1.0 + sides.magnitude());
        worst = worst.max(rel);
        ensure(rel <= 1e-12, || format!("instance {i} ({}): residual {}", gen.label(), sides.residual()))?;
        let (s, _) = compress(&gen, t, &part).map_err(|e| e.to_string())?;
        let norms = s.l1_norm().max(s.linf_norm());
        worst_norm = worst_norm.max(norms);
        ensure(norms <= 1.0 + 1e-10, || format!("instance {i} ({}): compressed norm {norms}", gen.label()))?;
    }
    Ok(format!("100 instances, worst relative residual {worst:.1e}, worst L1/Linf norm of S {worst_norm:.12}"))
}

fn linf_distance(a: &OperatorMatrix, b: &OperatorMatrix) -> f64 {
    let d = a.matrix() - b.matrix();
    d.row_iter().map(|r| r.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

fn c10_exponential_formula() -> Check {
    let mut gens = vec![paper_two_by_two()];
    for k in 0..5u64 {
        gens.push(random_generator(3 + k as usize, 100 + k, k % 2 == 0).map_err(|e| e.to_string())?);
    }
    let mut last = 0.0f64;
    for gen in &gens {
        let exact = semigroup_at(gen, Complex64::new(1.0, 0.0)).map_err(|e| e.to_string())?;
        let mut prev = f64::INFINITY;
        for n in [1u32, 10, 100, 1000] {
            let err = linf_distance(&euler_approx(gen, 1.0, n).map_err(|e| e.to_string())?, &exact);
            ensure(err < prev, || format!("{}: error {err:.3e} at n = {n} does not decrease from {prev:.3e}", gen.label()))?;
            prev = err;
        }
        ensure(prev <= 1e-2, || format!("{}: error {prev:.3e} at n = 1000", gen.label()))?;
        last = last.max(prev);
    }
    Ok(format!("6 generators, worst error at n = 1000: {last:.3e}"))
}

fn c11_sector_contraction(gens: &[Generator]) -> Check {
    let thetas = nrsector_core::analytic::default_theta_grid();
    let radii = nrsector_core::analytic::default_radius_grid();
    let mut worst = 0.0f64;
    for (g, gen) in gens.iter().enumerate() {
        for p in [1.5, 2.0, 3.0, 4.0] {
            let sweep = contraction_sweep(gen, p, &thetas, &radii, 3, g as u64).map_err(|e| e.to_string())?;
            let inside = sweep.max_inside(1e-6);
            worst = worst.max(inside);
            ensure(inside <= 1.0 + 1e-8, || format!("{} at p = {p}: norm {inside} inside the sector", gen.label()))?;
        }
    }
    Ok(format!("{} generators, largest estimate inside {worst:.12}", gens.len()))
}

fn main() -> ExitCode {
    let gens = fleet();
    let criteria: Vec<(&str, u64, Box<dyn Fn() -> Check + '_>)> = vec![
        ("two-point form inclusion", 5_000, Box::new(c1_form_inclusion)),
        ("two-point form sharpness", 10_000, Box::new(c2_scalar_sharpness)),
        ("diagonal quadratic form angle", 2_000, Box::new(c3_diagonal_quadratic_form)),
        ("duality map jacobian", 2_000, Box::new(c4_jacobian)),
        ("angle formula identity", 100, Box::new(c5_angle_formula)),
        ("fleet numerical range containment", 60_000, Box::new(|| c6_fleet_containment(&gens))),
        ("2x2 numerical range sharpness", 10_000, Box::new(c7_two_by_two_sharpness)),
        ("certificate soundness", 30_000, Box::new(c8_certificates)),
        ("reduction identity", 10_000, Box::new(c9_reduction_identity)),
        ("exponential formula", 5_000, Box::new(c10_exponential_formula)),
        ("analytic sector contraction", 60_000, Box::new(|| c11_sector_contraction(&gens))),
    ];

    let mut failures = 0;
    for (idx, (name, budget_ms, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let budget = Duration::from_millis(*budget_ms);
        let (ok, detail) = match outcome {
            Ok(d) if elapsed <= budget => (true, d),
            Ok(d) => (false, format!("{d}; over time budget")),
            Err(e) => (false, e),
        };
        if !ok {
            failures += 1;
        }
        println!(
            "{} [{:02}] {name:<36} {:>8.3} s / {:>6.1} s  {detail}",
            if ok { "PASS" } else { "FAIL" },
            idx + 1,
            elapsed.as_secs_f64(),
            budget.as_secs_f64(),
        );
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
