//! Numerical verification of sector bounds for the `L^p` numerical range of
//! generators of symmetric `L∞`-contractive semigroups on finite atomic
//! measure spaces.
//!
//! The pieces, bottom up:
//!
//! * [`space`] and [`sector`]: weighted norms, the pairing, the duality map
//!   `F_p` and the sectors `Σ(φ)`;
//! * [`operators`]: validated generators, `e^{-zA}`, Euler approximants and
//!   operator norm estimates;
//! * [`scalar`]: the two-point form and 2×2 quadratic forms;
//! * [`range`]: sampling and maximising the numerical-range angle;
//! * [`certificate`]: the step-function decomposition and block compression;
//! * [`analytic`]: contractivity of `e^{-zA}` on complex rays.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod certificate;
pub mod compensated;
pub mod error;
pub mod operators;
pub mod optimize;
pub mod random;
pub mod range;
pub mod scalar;
pub mod sector;
pub mod space;

pub use analytic::{contraction_sweep, RaySweep};
pub use certificate::{build_certificate, compress, verify_reduction_identity, Certificate, Partition};
pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use operators::{
    euler_approx, make_graph_laplacian, make_lambda_family, operator_pnorm_lower_bound, paper_two_by_two,
    random_generator, semigroup_at, validate_generator, CMatrix, Generator, OperatorMatrix, ValidationReport,
};
pub use range::{difference_form, form_value, max_arg_search, sample_range, RangeSample};
pub use scalar::{
    jacobian_f, lemma3_sup_angle, lp_form, quad_form_value, scalar_sharpness_search, AngleReport,
};
pub use sector::{in_sector, sector_angle, Sector, DEFAULT_TOL};
pub use space::{duality_map, Exponent, FiniteMeasureSpace};
