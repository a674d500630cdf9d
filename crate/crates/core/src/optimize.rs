//! Derivative-free local minimisation (Nelder–Mead simplex).

/// Stopping rules and initial simplex size.
#[derive(Debug, Clone, Copy)]
pub struct NelderMead {
    pub step: f64,
    pub max_evals: usize,
    /// Stop once the spread of simplex values falls below this.
    pub f_tol: f64,
    /// Stop once the simplex diameter falls below this.
    pub x_tol: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self { step: 0.5, max_evals: 4000, f_tol: 1e-15, x_tol: 1e-12 }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
}

impl NelderMead {
    pub fn minimize<F>(&self, objective: F, start: &[f64]) -> Minimum
    where
        F: Fn(&[f64]) -> f64,
    {
        let dim = start.len();
        let evals = std::cell::Cell::new(0usize);
        let eval = |x: &[f64]| {
            evals.set(evals.get() + 1);
            let v = objective(x);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };

        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
        simplex.push((start.to_vec(), eval(start)));
        for i in 0..dim {
            let mut x = start.to_vec();
            x[i] += self.step;
            let v = eval(&x);
            simplex.push((x, v));
        }

        let centroid = |s: &[(Vec<f64>, f64)]| {
            let mut c = vec![0.0; dim];
            for (x, _) in &s[..dim] {
                for (ci, xi) in c.iter_mut().zip(x) {
                    *ci += xi / dim as f64;
                }
            }
            c
        };
        let along = |c: &[f64], x: &[f64], t: f64| -> Vec<f64> {
            c.iter().zip(x).map(|(ci, xi)| ci + t * (xi - ci)).collect()
        };

        loop {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let best = simplex[0].1;
            let worst = simplex[dim].1;
            let diameter = simplex[1..]
                .iter()
                .map(|(x, _)| {
                    x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
                })
                .fold(0.0, f64::max);
            if evals.get() >= self.max_evals || (worst - best).abs() <= self.f_tol || diameter <= self.x_tol {
                break;
            }

            let c = centroid(&simplex);
            let reflected = along(&c, &simplex[dim].0, -1.0);
            let fr = eval(&reflected);
            if fr < simplex[0].1 {
                let expanded = along(&c, &simplex[dim].0, -2.0);
                let fe = eval(&expanded);
                simplex[dim] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
                continue;
            }
            if fr < simplex[dim - 1].1 {
                simplex[dim] = (reflected, fr);
                continue;
            }
            let (contracted, fc) = if fr < simplex[dim].1 {
                let x = along(&c, &simplex[dim].0, -0.5);
                let v = eval(&x);
                (x, v)
            } else {
                let x = along(&c, &simplex[dim].0, 0.5);
                let v = eval(&x);
                (x, v)
            };
            if fc < simplex[dim].1.min(fr) {
                simplex[dim] = (contracted, fc);
                continue;
            }
            let anchor = simplex[0].0.clone();
            for entry in simplex.iter_mut().skip(1) {
                let x = along(&anchor, &entry.0, 0.5);
                let v = eval(&x);
                *entry = (x, v);
            }
        }

        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (x, value) = simplex.swap_remove(0);
        Minimum { x, value, evals: evals.get() }
    }
}
