mod common;

use nrsector_core::certificate::{certificate_for_step, Partition};
use nrsector_core::random::{complex_gaussian_vec, stream};
use nrsector_core::space::dual_exponent;
use nrsector_core::{
    build_certificate, compress, max_arg_search, paper_two_by_two, quad_form_value, random_generator,
    scalar_sharpness_search, sector_angle, Complex64,
};
use proptest::prelude::*;
use rand::Rng;

fn rotated_diag(theta: f64, lambda: f64) -> [[f64; 2]; 2] {
    let (s, c) = theta.sin_cos();
    [
        [c * c + lambda * s * s, (1.0 - lambda) * c * s],
        [(1.0 - lambda) * c * s, s * s + lambda * c * c],
    ]
}

proptest! {
    #[test]
    fn quadratic_form_stays_in_sector(
        lambda in 1e-3f64..1e3,
        theta in -3.2f64..3.2,
        hr in -10.0f64..10.0,
        hi in -10.0f64..10.0,
    ) {
        prop_assume!(hr.hypot(hi) > 1e-6);
        let a = rotated_diag(theta, lambda);
        let v = quad_form_value(Complex64::new(hr, hi), a).unwrap();
        let bound = ((lambda - 1.0).abs() / (lambda + 1.0)).asin();
        prop_assert!(v.re > 0.0);
        prop_assert!(v.arg().abs() <= bound + 1e-12);
    }

    #[test]
    fn quadratic_form_is_rotation_invariant(
        lambda in 1e-2f64..1e2,
        theta in -3.2f64..3.2,
        hr in -3.0f64..3.0,
        hi in -3.0f64..3.0,
    ) {
        let base = quad_form_value(Complex64::new(hr, hi), rotated_diag(0.0, lambda)).unwrap();
        let rotated_h = Complex64::new(hr, hi) * Complex64::from_polar(1.0, theta);
        let rotated = quad_form_value(rotated_h, rotated_diag(theta, lambda)).unwrap();
        prop_assert!((base - rotated).norm() <= 1e-11 * (1.0 + base.norm()));
    }
}

#[test]
fn scalar_sharpness_agrees_for_dual_exponents() {
    for p in [1.25, 1.5, 3.0] {
        let q = dual_exponent(p);
        let a = scalar_sharpness_search(p, 32, 11).unwrap().best_angle();
        let b = scalar_sharpness_search(q, 32, 12).unwrap().best_angle();
        assert!((a - b).abs() <= 2e-3, "p = {p}: {a} vs {b}");
        assert!((sector_angle(p).unwrap() - sector_angle(q).unwrap()).abs() < 1e-15);
    }
}

#[test]
fn range_angle_agrees_for_dual_exponents() {
    let gens = [paper_two_by_two(), random_generator(3, 21, false).unwrap(), random_generator(4, 22, true).unwrap()];
    for gen in &gens {
        for p in [1.5, 4.0] {
            let a = max_arg_search(gen, p, 64, 1).unwrap().best_angle;
            let b = max_arg_search(gen, dual_exponent(p), 64, 2).unwrap().best_angle;
            assert!((a - b).abs() <= 2e-3, "{} at p = {p}: {a} vs {b}", gen.label());
        }
    }
}

#[test]
fn compression_certificate_matches_original() {
    let mut rng = stream(31, 0);
    for i in 0..40u64 {
        let n = 2 + i as usize % 7;
        let gen = random_generator(n, 500 + i, i % 2 == 0).unwrap();
        let m = rng.random_range(1..=n);
        let part = Partition::random(gen.space(), m, &mut rng).unwrap();
        let c = complex_gaussian_vec(&mut rng, m);
        let p = common::EXPONENTS[i as usize % 6];
        let t = rng.random_range(0.1..3.0);
        let original = build_certificate(&gen, t, &part, &c, p).unwrap();
        let (s, space) = compress(&gen, t, &part).unwrap();
        let reduced = certificate_for_step(&s, t, &Partition::atoms(&space), &c, p).unwrap();
        let scale = 1.0 + original.direct_value.norm();
        assert!((reduced.direct_value - original.direct_value).norm() <= 1e-12 * scale, "instance {i}");
        assert!(reduced.checks.all_pass(), "instance {i}: {:?}", reduced.checks);
        assert!((reduced.first_sum - original.first_sum).abs() <= 1e-12 * scale);
    }
}
