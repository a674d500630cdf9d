#![allow(dead_code)]

use nrsector_core::{make_lambda_family, random_generator, Complex64, Generator};

pub const EXPONENTS: [f64; 6] = [1.1, 1.5, 2.0, 3.0, 4.0, 10.0];

/// 25 dominated graph Laplacians, 24 phase-twisted generators and the
/// 2×2 family at λ ∈ {1, i, -1, e^{iπ/4}}; sizes at most 8.
pub fn fleet() -> Vec<Generator> {
    let mut out = Vec::new();
    for i in 0..25u64 {
        out.push(random_generator(2 + (i as usize % 7), i, true).expect("laplacian sample"));
    }
    for i in 0..24u64 {
        out.push(random_generator(2 + (i as usize % 7), 1000 + i, false).expect("twisted sample"));
    }
    for lambda in [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(-1.0, 0.0),
        Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4),
    ] {
        out.push(make_lambda_family(lambda).expect("unimodular λ"));
    }
    out
}
