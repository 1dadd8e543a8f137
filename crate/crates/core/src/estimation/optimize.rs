//! Derivative-free Nelder–Mead minimizer.

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NotConverged {
    pub best: Minimum,
}

#[derive(Debug, Clone, Copy)]
pub struct NelderMead {
    /// Stop once `2|f_worst - f_best| <= rel_tol (|f_worst| + |f_best|)`.
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            max_iter: 500,
        }
    }
}

impl NelderMead {
    /// Minimize `f` from `start` with an axis-aligned initial simplex of
    /// edge lengths `steps`. Non-finite values act as walls.
    pub fn minimize<F: Fn(&[f64]) -> f64>(&self, f: F, start: &[f64], steps: &[f64]) -> Result<Minimum, NotConverged> {
        let dim = start.len();
        let eval = |x: &[f64]| {
            let v = f(x);
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
            x[i] += steps[i];
            let v = eval(&x);
            simplex.push((x, v));
        }

        for iteration in 0..self.max_iter {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let best = simplex[0].1;
            let worst = simplex[dim].1;
            if best.is_finite() && 2.0 * (worst - best).abs() <= self.rel_tol * (worst.abs() + best.abs()) + 1e-300 {
                return Ok(Minimum {
                    x: simplex[0].0.clone(),
                    value: best,
                    iterations: iteration,
                });
            }

            let centroid: Vec<f64> = (0..dim)
                .map(|j| simplex[..dim].iter().map(|(x, _)| x[j]).sum::<f64>() / dim as f64)
                .collect();
            let toward = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&simplex[dim].0)
                    .map(|(c, w)| c + t * (w - c))
                    .collect()
            };

            let reflected = toward(-1.0);
            let f_reflected = eval(&reflected);
            if f_reflected < simplex[0].1 {
                let expanded = toward(-2.0);
                let f_expanded = eval(&expanded);
                simplex[dim] = if f_expanded < f_reflected {
                    (expanded, f_expanded)
                } else {
                    (reflected, f_reflected)
                };
                continue;
            }
            if f_reflected < simplex[dim - 1].1 {
                simplex[dim] = (reflected, f_reflected);
                continue;
            }
            let (contracted, f_contracted) = if f_reflected < simplex[dim].1 {
                let c = toward(-0.5);
                let v = eval(&c);
                (c, v)
            } else {
                let c = toward(0.5);
                let v = eval(&c);
                (c, v)
            };
            if f_contracted < simplex[dim].1.min(f_reflected) {
                simplex[dim] = (contracted, f_contracted);
                continue;
            }
            // Shrink toward the best vertex.
            let best_x = simplex[0].0.clone();
            for vertex in simplex.iter_mut().skip(1) {
                for (xi, bi) in vertex.0.iter_mut().zip(&best_x) {
                    *xi = bi + 0.5 * (*xi - bi);
                }
                vertex.1 = eval(&vertex.0);
            }
        }
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        Err(NotConverged {
            best: Minimum {
                x: simplex[0].0.clone(),
                value: simplex[0].1,
                iterations: self.max_iter,
            },
        })
    }
}
