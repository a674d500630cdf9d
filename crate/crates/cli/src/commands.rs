use std::f64::consts::{FRAC_PI_2, PI};

use nrsector_core::analytic::{default_radius_grid, default_theta_grid};
use nrsector_core::certificate::reduction_sides;
use nrsector_core::operators::{default_time_grid, ValidationTolerances};
use nrsector_core::random::{complex_gaussian, complex_gaussian_vec, stream};
use nrsector_core::range::unpack_attaining;
use nrsector_core::scalar::finite_difference_jacobian;
use nrsector_core::{
    build_certificate, compress, contraction_sweep, form_value, jacobian_f, lemma3_sup_angle, lp_form,
    max_arg_search, quad_form_value, sample_range, scalar_sharpness_search, sector_angle, validate_generator,
    Complex64, Generator, Partition, Sector,
};
use rand::Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::error::CliError;
use crate::generators::{self, Candidate};
use crate::report::{cx, cx_matrix, cx_vec, Check, Outcome, Table};
use crate::RunConfig;

const CHUNK: usize = 4096;

/// `max(|arg v| - angle)` over values that are not negligible, floored at 0.
fn worst_excess<'a>(values: impl IntoIterator<Item = &'a Complex64>, sector: &Sector, tol: f64) -> f64 {
    values
        .into_iter()
        .filter(|v| v.norm() > tol)
        .map(|v| v.arg().abs() - sector.angle())
        .fold(0.0, f64::max)
}

fn containment(name: &'static str, values: &[Complex64], sector: &Sector, tol: f64) -> Check {
    Check {
        name,
        passed: values.iter().all(|v| sector.contains(*v, tol)),
        worst_defect: worst_excess(values, sector, tol),
        tolerance: tol,
    }
}

fn generator(cfg: &RunConfig) -> Result<Generator, CliError> {
    generators::parse(&cfg.gen, cfg.seed)?.into_generator()
}

pub fn lemma2(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let p = cfg.p;
    let sector = Sector::for_exponent(p)?;
    let chunks = cfg.samples.div_ceil(CHUNK);
    let triples: Vec<[Complex64; 3]> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream(cfg.seed, c as u64);
            let count = CHUNK.min(cfg.samples - c * CHUNK);
            (0..count)
                .map(|_| {
                    let z = complex_gaussian(&mut rng) * 10f64.powf(rng.random_range(-2.0..2.0));
                    let w = complex_gaussian(&mut rng) * 10f64.powf(rng.random_range(-2.0..2.0));
                    [z, w, lp_form(z, w, p)]
                })
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    let values: Vec<Complex64> = triples.iter().map(|t| t[2]).collect();
    let max_angle = values.iter().filter(|v| v.norm() > 0.0).map(|v| v.arg().abs()).fold(0.0, f64::max);
    let outside = values.iter().filter(|v| !sector.contains(**v, 1e-9)).count();

    let mut table = Table::new(&["z_re", "z_im", "w_re", "w_im", "re", "im", "abs", "arg"]);
    for [z, w, v] in &triples {
        table.push([z.re, z.im, w.re, w.im, v.re, v.im, v.norm(), v.arg()]);
    }
    Ok(Outcome {
        checks: vec![containment("inclusion", &values, &sector, 1e-9)],
        result: json!({
            "p": p,
            "phi_p": sector.angle(),
            "samples": values.len(),
            "max_angle": max_angle,
            "outside": outside,
        }),
        table,
    })
}

pub fn lemma3(cfg: &RunConfig, lambda: f64) -> Result<Outcome, CliError> {
    let sweep = lemma3_sup_angle(lambda, cfg.samples)?;
    let a = [[1.0, 0.0], [0.0, lambda]];
    let ratio = (1.0 - lambda) / (1.0 + lambda);
    let cell = PI / cfg.samples as f64;
    let mut table = Table::new(&["x", "alpha", "identity_residual"]);
    for i in 0..cfg.samples {
        let x = (-FRAC_PI_2 + cell * (i as f64 + 0.5)).tan();
        let alpha = quad_form_value(Complex64::new(1.0, x), a)?.arg();
        let identity = (x.atan() + (lambda * x).atan()).sin() * ratio;
        table.push([x, alpha, (alpha.sin() - identity).abs()]);
    }
    let gap = (sweep.angle.best_angle - sweep.angle.target).abs();
    Ok(Outcome {
        checks: vec![
            Check::bound("sup_angle", gap, 1e-6),
            Check::bound("sine_identity", sweep.identity_residual, 1e-12),
        ],
        result: json!({
            "lambda": lambda,
            "sup_angle": sweep.angle.best_angle,
            "target": sweep.angle.target,
            "gap": sweep.angle.gap,
            "attaining_x": sweep.angle.attaining_input[0],
            "identity_residual": sweep.identity_residual,
            "grid_size": sweep.grid_size,
        }),
        table,
    })
}

pub fn jacobian(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let p = cfg.p;
    let mut rng = stream(cfg.seed, 0);
    let mut table = Table::new(&["y_re", "y_im", "fd_defect", "eigen_defect"]);
    let (mut worst_fd, mut worst_eig) = (0.0f64, 0.0f64);
    for _ in 0..cfg.samples {
        let r = 10f64.powf(rng.random_range(-1.0..1.0));
        let th = rng.random_range(-PI..PI);
        let y = [r * th.cos(), r * th.sin()];
        let j = jacobian_f(y, p)?;
        let fd = finite_difference_jacobian(y, p, 1e-6 * r);
        let scale = j.matrix.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max);
        let fd_defect = (0..4).map(|i| (j.matrix[i / 2][i % 2] - fd[i / 2][i % 2]).abs()).fold(0.0, f64::max) / scale;

        let base = r.powf(p - 2.0);
        let unit = [y[0] / r, y[1] / r];
        let mut eigen_defect = 0.0f64;
        for (k, (lam, v)) in [(base, [-unit[1], unit[0]]), ((p - 1.0) * base, unit)].into_iter().enumerate() {
            let av = [j.matrix[0][0] * v[0] + j.matrix[0][1] * v[1], j.matrix[1][0] * v[0] + j.matrix[1][1] * v[1]];
            let residual = (av[0] - lam * v[0]).abs().max((av[1] - lam * v[1]).abs()) / lam;
            let value = (j.eigenvalues[k] - lam).abs() / lam;
            let vector = (j.eigenvectors[k][0] - v[0]).abs().max((j.eigenvectors[k][1] - v[1]).abs());
            eigen_defect = eigen_defect.max(residual).max(value).max(vector);
        }
        worst_fd = worst_fd.max(fd_defect);
        worst_eig = worst_eig.max(eigen_defect);
        table.push([y[0], y[1], fd_defect, eigen_defect]);
    }
    Ok(Outcome {
        checks: vec![Check::bound("finite_difference", worst_fd, 1e-6), Check::bound("eigenpairs", worst_eig, 1e-10)],
        result: json!({ "p": p, "samples": cfg.samples, "worst_fd_defect": worst_fd, "worst_eigen_defect": worst_eig }),
        table,
    })
}

pub fn range(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let gen = generator(cfg)?;
    let sector = Sector::for_exponent(cfg.p)?;
    let sample = sample_range(&gen, cfg.p, cfg.samples, cfg.seed)?;
    let mut checks = vec![containment("in_sector", &sample.values, &sector, 1e-9)];
    if cfg.p == 2.0 {
        checks.push(Check::bound("real_at_p2", sample.max_abs_imag(), 1e-10));
    }
    let mut table = Table::new(&["re", "im", "abs", "arg"]);
    for v in &sample.values {
        table.push([v.re, v.im, v.norm(), v.arg()]);
    }
    Ok(Outcome {
        checks,
        result: json!({
            "generator": sample.generator_id,
            "p": sample.p,
            "phi_p": sector.angle(),
            "sample_count": sample.sample_count,
            "max_abs_arg": sample.max_abs_arg,
            "max_abs_imag": sample.max_abs_imag(),
        }),
        table,
    })
}

pub fn sharpness(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let phi = sector_angle(cfg.p)?;
    let scalar = scalar_sharpness_search(cfg.p, cfg.restarts, cfg.seed)?;
    let gen = generator(cfg)?;
    let found = max_arg_search(&gen, cfg.p, cfg.restarts, cfg.seed)?;
    let f = unpack_attaining(&found.attaining_input);
    let value = form_value(&gen, &f, cfg.p)?;

    let mut checks = vec![
        Check::bound("scalar_sharp", scalar.direct.gap.abs(), 1e-3),
        Check::bound("scalar_bound", scalar.best_angle() - phi, 1e-9),
        Check::bound("range_bound", found.best_angle - phi, 1e-9),
    ];
    // the 2×2 family attains φ_p; other generators need not
    let label = gen.label();
    if label == "paper2x2" || label.starts_with("lambda:") {
        checks.push(Check::bound("range_sharp", found.gap.abs(), 1e-3));
    }
    let mut table = Table::new(&["source", "best_angle", "target", "gap"]);
    table.push(["scalar_direct".to_string(), scalar.direct.best_angle.to_string(), phi.to_string(), scalar.direct.gap.to_string()]);
    table.push(["scalar_limit".to_string(), scalar.limit.best_angle.to_string(), phi.to_string(), scalar.limit.gap.to_string()]);
    table.push([label.to_string(), found.best_angle.to_string(), phi.to_string(), found.gap.to_string()]);
    Ok(Outcome {
        checks,
        result: json!({
            "p": cfg.p,
            "phi_p": phi,
            "scalar": {
                "best_angle": scalar.direct.best_angle,
                "attaining_input": scalar.direct.attaining_input,
                "limit_angle": scalar.limit.best_angle,
                "limit_input": scalar.limit.attaining_input,
            },
            "range": {
                "generator": label,
                "best_angle": found.best_angle,
                "gap": found.gap,
                "attaining_f": cx_vec(&f),
                "value": cx(value),
            },
        }),
        table,
    })
}

fn block_instance(gen: &Generator, cfg: &RunConfig) -> Result<(Partition, Vec<Complex64>), CliError> {
    let mut rng = stream(cfg.seed, 0);
    let m = cfg.n.min(gen.dim());
    let part = Partition::random(gen.space(), m, &mut rng)?;
    let c = complex_gaussian_vec(&mut rng, m);
    Ok((part, c))
}

pub fn certificate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let gen = generator(cfg)?;
    let (part, c) = block_instance(&gen, cfg)?;
    let cert = build_certificate(&gen, cfg.t, &part, &c, cfg.p)?;
    let sector = Sector::for_exponent(cfg.p)?;
    let terms: Vec<Complex64> = cert.terms.iter().copied().collect();
    let ch = &cert.checks;
    let checks = vec![
        Check::bound("hermitian", ch.hermitian_defect, 1e-12),
        Check::bound("column_bound", ch.l1_excess, 1e-10),
        Check::bound("first_sum_nonnegative", (-cert.first_sum).max(0.0), 1e-12),
        containment("terms_in_sector", &terms, &sector, 1e-9),
        Check::bound("residual", cert.residual / (1.0 + cert.direct_value.norm()), 1e-10),
        containment("direct_in_sector", &[cert.direct_value], &sector, 1e-9),
    ];
    let m = part.len();
    let mut table = Table::new(&["k", "j", "a_re", "a_im", "term_re", "term_im"]);
    for k in 0..m {
        for j in 0..m {
            let (a, t) = (cert.a[(k, j)], cert.terms[(k, j)]);
            table.push([k.to_string(), j.to_string(), a.re.to_string(), a.im.to_string(), t.re.to_string(), t.im.to_string()]);
        }
    }
    Ok(Outcome {
        checks,
        result: json!({
            "generator": gen.label(),
            "t": cert.t,
            "p": cert.p,
            "blocks": part.blocks(),
            "c": cx_vec(&cert.c),
            "d": cert.d,
            "a": cx_matrix(&cert.a),
            "lambda": cx_matrix(&cert.lambda),
            "first_sum": cert.first_sum,
            "terms": cx_matrix(&cert.terms),
            "total": cx(cert.total),
            "direct_value": cx(cert.direct_value),
            "residual": cert.residual,
            "checks": {
                "hermitian_defect": ch.hermitian_defect,
                "hermitian": ch.hermitian,
                "l1_excess": ch.l1_excess,
                "l1_bound": ch.l1_bound,
                "l1_mechanism_defect": ch.l1_mechanism_defect,
                "first_sum_nonnegative": ch.first_sum_nonnegative,
                "terms_in_sector": ch.terms_in_sector,
                "residual_small": ch.residual_small,
                "direct_in_sector": ch.direct_in_sector,
            },
        }),
        table,
    })
}

pub fn compress_cmd(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let gen = generator(cfg)?;
    let (part, c) = block_instance(&gen, cfg)?;
    let (s, space) = compress(&gen, cfg.t, &part)?;
    let sides = reduction_sides(&gen, cfg.t, &part, &c, cfg.p)?;
    let (l1, linf) = (s.l1_norm(), s.linf_norm());
    let checks = vec![
        Check::bound("l1_contraction", l1 - 1.0, 1e-10),
        Check::bound("linf_contraction", linf - 1.0, 1e-10),
        Check::bound("reduction_identity", sides.residual() / (1.0 + sides.magnitude()), 1e-12),
    ];
    let m = part.len();
    let mut table = Table::new(&["j", "k", "re", "im"]);
    for j in 0..m {
        for k in 0..m {
            let z = s.matrix()[(j, k)];
            table.push([j.to_string(), k.to_string(), z.re.to_string(), z.im.to_string()]);
        }
    }
    Ok(Outcome {
        checks,
        result: json!({
            "generator": gen.label(),
            "t": cfg.t,
            "p": cfg.p,
            "blocks": part.blocks(),
            "weights": space.weights(),
            "s": cx_matrix(s.matrix()),
            "l1_norm": l1,
            "linf_norm": linf,
            "c": cx_vec(&c),
            "compressed_form": cx(sides.compressed),
            "original_form": cx(sides.original),
            "residual": sides.residual(),
        }),
        table,
    })
}

pub fn sweep(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let gen = generator(cfg)?;
    let sweep = contraction_sweep(&gen, cfg.p, &default_theta_grid(), &default_radius_grid(), cfg.restarts, cfg.seed)?;
    let inside = sweep.max_inside(1e-6);
    let mut table = Table::new(&["theta", "radius", "norm_estimate", "inside_sector"]);
    for pt in sweep.points() {
        table.push([pt.theta.to_string(), pt.radius.to_string(), pt.norm_estimate.to_string(), pt.inside_sector.to_string()]);
    }
    Ok(Outcome {
        checks: vec![Check::bound("contractive_inside", inside - 1.0, 1e-8)],
        result: json!({
            "generator": gen.label(),
            "p": sweep.p,
            "critical_angle": sweep.critical_angle,
            "theta_grid": sweep.theta_grid,
            "radius_grid": sweep.radius_grid,
            "norm_estimates": sweep.norm_estimates,
            "max_inside": inside,
            "max_outside": sweep.max_outside(),
        }),
        table,
    })
}

pub fn validate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let Candidate { label, matrix, space } = generators::parse(&cfg.gen, cfg.seed)?;
    let tol = ValidationTolerances::default();
    let r = validate_generator(&matrix, &space, &default_time_grid(), tol)?;
    let checks = vec![
        Check::bound("self_adjoint", r.self_adjoint_defect, tol.self_adjoint),
        Check::bound("positive_semidefinite", -r.min_eigenvalue, tol.psd),
        Check::bound("linf_contractive", r.linf_defect, tol.contraction),
        Check::bound("l1_contractive", r.l1_defect, tol.contraction),
    ];
    let mut table = Table::new(&["check", "passed", "worst_defect", "tolerance"]);
    for c in &checks {
        table.push([c.name.to_string(), c.passed.to_string(), c.worst_defect.to_string(), c.tolerance.to_string()]);
    }
    Ok(Outcome {
        checks,
        result: json!({
            "generator": label,
            "dim": space.len(),
            "weights": space.weights(),
            "self_adjoint_defect": r.self_adjoint_defect,
            "min_eigenvalue": r.min_eigenvalue,
            "linf_defect": r.linf_defect,
            "l1_defect": r.l1_defect,
            "t_grid": r.t_grid,
            "valid": r.is_valid(),
        }),
        table,
    })
}
