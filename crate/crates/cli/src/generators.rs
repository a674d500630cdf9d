//! Generator specifications accepted by `--gen`.
//!
//! * `paper2x2`
//! * `lambda:<re>,<im>`
//! * `random:<n>[:<seed>]`, `markov:<n>[:<seed>]` (positivity-preserving)
//! * `laplacian:<file>`: JSON `{"weights": [...], "couplings": [[...]],
//!   "diagonal": [...]}`; `diagonal` defaults to the off-diagonal row sums
//! * any other value is a JSON matrix file `{"weights": [...], "matrix":
//!   [[...]]}` whose entries are numbers or `[re, im]` pairs

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use nrsector_core::{
    make_graph_laplacian, make_lambda_family, paper_two_by_two, random_generator, CMatrix, Complex64,
    FiniteMeasureSpace, Generator,
};
use serde::Deserialize;

use crate::error::CliError;

/// A candidate matrix that has not been validated yet.
pub struct Candidate {
    pub label: String,
    pub matrix: CMatrix,
    pub space: FiniteMeasureSpace,
}

impl Candidate {
    pub fn into_generator(self) -> Result<Generator, CliError> {
        let label = self.label;
        Generator::new(self.matrix, self.space)
            .map(|g| g.with_label(label.clone()))
            .map_err(|e| CliError::Input(format!("generator {label} rejected: {e}")))
    }
}

impl From<Generator> for Candidate {
    fn from(g: Generator) -> Self {
        Candidate { label: g.label().to_string(), matrix: g.matrix().clone(), space: g.space().clone() }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    fn value(&self) -> Complex64 {
        match *self {
            Entry::Real(re) => Complex64::new(re, 0.0),
            Entry::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixFile {
    weights: Vec<f64>,
    matrix: Vec<Vec<Entry>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LaplacianFile {
    weights: Vec<f64>,
    couplings: Vec<Vec<f64>>,
    diagonal: Option<Vec<f64>>,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("cannot parse {}: {e}", path.display())))
}

fn square<T>(rows: &[Vec<T>], n: usize, what: &str) -> Result<(), CliError> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(CliError::Input(format!("{what} must be {n}×{n} to match the weights")));
    }
    Ok(())
}

fn space(weights: Vec<f64>) -> Result<FiniteMeasureSpace, CliError> {
    FiniteMeasureSpace::new(weights).map_err(|e| CliError::Input(format!("bad weights: {e}")))
}

fn parse_size_seed(rest: &str, default_seed: u64, spec: &str) -> Result<(usize, u64), CliError> {
    let bad = || CliError::Usage(format!("cannot parse generator '{spec}'"));
    let mut parts = rest.split(':');
    let n: usize = parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
    let seed = match parts.next() {
        Some(s) => s.parse().map_err(|_| bad())?,
        None => default_seed,
    };
    if parts.next().is_some() || !(1..=64).contains(&n) {
        return Err(bad());
    }
    Ok((n, seed))
}

pub fn parse(spec: &str, seed: u64) -> Result<Candidate, CliError> {
    let named = |g: nrsector_core::Result<Generator>| {
        g.map(Candidate::from).map_err(|e| CliError::Input(format!("generator '{spec}': {e}")))
    };
    if spec == "paper2x2" {
        return Ok(paper_two_by_two().into());
    }
    if let Some(rest) = spec.strip_prefix("lambda:") {
        let parts: Vec<f64> = rest.split(',').map(|s| s.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| {
            CliError::Usage(format!("cannot parse generator '{spec}', expected lambda:<re>,<im>"))
        })?;
        let [re, im] = parts[..] else {
            return Err(CliError::Usage(format!("cannot parse generator '{spec}', expected lambda:<re>,<im>")));
        };
        return named(make_lambda_family(Complex64::new(re, im)));
    }
    if let Some(rest) = spec.strip_prefix("random:") {
        let (n, s) = parse_size_seed(rest, seed, spec)?;
        return named(random_generator(n, s, false));
    }
    if let Some(rest) = spec.strip_prefix("markov:") {
        let (n, s) = parse_size_seed(rest, seed, spec)?;
        return named(random_generator(n, s, true));
    }
    if let Some(path) = spec.strip_prefix("laplacian:") {
        let file: LaplacianFile = read_json(Path::new(path))?;
        let n = file.weights.len();
        square(&file.couplings, n, "couplings")?;
        let w = DMatrix::from_fn(n, n, |j, k| file.couplings[j][k]);
        let d = match file.diagonal {
            Some(d) => d,
            None => (0..n).map(|j| (0..n).filter(|&k| k != j).map(|k| w[(j, k)]).sum()).collect(),
        };
        let g = make_graph_laplacian(&w, &d, space(file.weights)?)
            .map_err(|e| CliError::Input(format!("{path}: {e}")))?;
        return Ok(g.with_label(format!("laplacian:{path}")).into());
    }
    let file: MatrixFile = read_json(Path::new(spec))?;
    let n = file.weights.len();
    square(&file.matrix, n, "matrix")?;
    let matrix = CMatrix::from_fn(n, n, |j, k| file.matrix[j][k].value());
    Ok(Candidate { label: format!("file:{spec}"), matrix, space: space(file.weights)? })
}
