//! Budgeted Nelder–Mead minimization.
//!
//! Non-finite objective values are treated as `+inf`, which lets callers
//! encode constraints by returning `f64::INFINITY` outside the feasible set.

/// Result of a local search.
#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone)]
pub struct NelderMead {
    /// Hard cap on objective evaluations.
    pub max_evaluations: usize,
    /// Initial simplex edge relative to `max(|x0|_inf, 1e-3)`.
    pub initial_step: f64,
    /// Converged when the spread of simplex values falls below this
    /// (relative to the best value) and the simplex is small.
    pub tolerance: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self { max_evaluations: 1000, initial_step: 0.1, tolerance: 1e-12 }
    }
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

impl NelderMead {
    /// Minimizes `f` from `x0`, restarting from the incumbent with a fresh
    /// simplex whenever the current one collapses and budget remains.
    pub fn minimize(&self, f: impl Fn(&[f64]) -> f64, x0: &[f64]) -> Minimum {
        let dim = x0.len();
        let mut evals = 0usize;
        let eval = |x: &[f64], evals: &mut usize| {
            *evals += 1;
            sanitize(f(x))
        };
        let mut best_x = x0.to_vec();
        let mut best_v = eval(x0, &mut evals);
        if dim == 0 {
            return Minimum { x: best_x, value: best_v, evaluations: evals };
        }

        // adaptive coefficients for higher dimensions
        let d = dim as f64;
        let (alpha, gamma) = (1.0, 1.0 + 2.0 / d);
        let rho = (0.75 - 1.0 / (2.0 * d)).max(0.25);
        let sigma = (1.0 - 1.0 / d).max(0.25);

        let mut step = self.initial_step;
        while evals + dim + 1 <= self.max_evaluations {
            let scale = best_x.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1e-3);
            let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
            simplex.push((best_x.clone(), best_v));
            for i in 0..dim {
                let mut x = best_x.clone();
                x[i] += step * scale;
                let v = eval(&x, &mut evals);
                simplex.push((x, v));
            }

            loop {
                simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
                let lo = simplex[0].1;
                let hi = simplex[dim].1;
                let size = simplex[1..]
                    .iter()
                    .map(|(x, _)| x.iter().zip(&simplex[0].0).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs())))
                    .fold(0.0_f64, f64::max);
                let converged = lo.is_finite()
                    && (hi - lo).abs() <= self.tolerance * lo.abs().max(1e-300)
                    && size <= 1e-10 * scale;
                if converged || size == 0.0 || evals + 2 > self.max_evaluations {
                    break;
                }

                let mut centroid = vec![0.0; dim];
                for (x, _) in &simplex[..dim] {
                    for (c, v) in centroid.iter_mut().zip(x) {
                        *c += v / d;
                    }
                }
                let worst = simplex[dim].0.clone();
                let along = |t: f64| -> Vec<f64> {
                    centroid.iter().zip(&worst).map(|(c, w)| c + t * (c - w)).collect()
                };

                let xr = along(alpha);
                let fr = eval(&xr, &mut evals);
                if fr < simplex[0].1 {
                    let xe = along(gamma);
                    let fe = eval(&xe, &mut evals);
                    simplex[dim] = if fe < fr { (xe, fe) } else { (xr, fr) };
                } else if fr < simplex[dim - 1].1 {
                    simplex[dim] = (xr, fr);
                } else {
                    let (xc, fc) = if fr < simplex[dim].1 {
                        let xc = along(alpha * rho);
                        let fc = eval(&xc, &mut evals);
                        (xc, fc)
                    } else {
                        let xc = along(-rho);
                        let fc = eval(&xc, &mut evals);
                        (xc, fc)
                    };
                    if fc < simplex[dim].1.min(fr) {
                        simplex[dim] = (xc, fc);
                    } else {
                        if evals + dim > self.max_evaluations {
                            break;
                        }
                        let x0 = simplex[0].0.clone();
                        for (x, v) in simplex.iter_mut().skip(1) {
                            for (xi, bi) in x.iter_mut().zip(&x0) {
                                *xi = bi + sigma * (*xi - bi);
                            }
                            *v = eval(x, &mut evals);
                        }
                    }
                }
            }

            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let improved = simplex[0].1 < best_v;
            if improved {
                best_x = simplex[0].0.clone();
                best_v = simplex[0].1;
            }
            // restart with a smaller simplex if this round made no progress
            if !improved {
                step *= 0.5;
                if step < 1e-8 {
                    break;
                }
            }
        }
        Minimum { x: best_x, value: best_v, evaluations: evals }
    }
}
