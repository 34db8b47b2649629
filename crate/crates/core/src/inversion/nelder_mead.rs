//! Derivative-free simplex minimization.

use serde::{Deserialize, Serialize};

/// Simplex coefficients and stopping rules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NelderMeadOptions {
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
    /// Stop once the largest vertex distance from the best vertex is below this...
    pub x_tolerance: f64,
    /// ...and the spread of objective values is below this.
    pub f_tolerance: f64,
    pub max_iterations: usize,
    /// Relative edge of the initial simplex; zero components get `initial_step_abs`.
    pub initial_step_rel: f64,
    pub initial_step_abs: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
            x_tolerance: 1e-6,
            f_tolerance: 1e-10,
            max_iterations: 500,
            initial_step_rel: 0.05,
            initial_step_abs: 0.025,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    /// Best objective value after each iteration.
    pub history: Vec<f64>,
}

fn combine(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    // a + t (b - a)
    a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
}

/// Minimizes `f` from `x_init`.
///
/// Non-finite objective values are treated as `+inf`, so the simplex moves
/// away from them. Hitting the iteration cap is reported through
/// `converged = false` and a log warning; the best point is still returned.
pub fn nelder_mead<F>(mut f: F, x_init: &[f64], opts: &NelderMeadOptions) -> NelderMeadResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x_init.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64]| {
        evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x_init.to_vec(), eval(x_init)));
    for i in 0..n {
        let mut v = x_init.to_vec();
        v[i] = if v[i] != 0.0 {
            v[i] * (1.0 + opts.initial_step_rel)
        } else {
            opts.initial_step_abs
        };
        let fv = eval(&v);
        simplex.push((v, fv));
    }
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    loop {
        // stable sort keeps the earlier vertex first on ties
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[n].1;
        let spread = worst - best;
        let diameter = simplex[1..]
            .iter()
            .map(|(v, _)| {
                v.iter()
                    .zip(&simplex[0].0)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if spread == 0.0 || (diameter < opts.x_tolerance && spread < opts.f_tolerance) {
            converged = true;
            break;
        }
        if iterations >= opts.max_iterations {
            log::warn!(
                "nelder_mead: {} iterations without convergence (diameter {diameter:.3e}, spread {spread:.3e})",
                iterations
            );
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for (v, _) in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / n as f64;
            }
        }
        let xr = combine(&centroid, &simplex[n].0, -opts.reflection);
        let fr = eval(&xr);
        if fr < best {
            let xe = combine(&centroid, &simplex[n].0, -opts.reflection * opts.expansion);
            let fe = eval(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            // outside contraction if the reflected point improved on the worst
            let (xc, fc) = if fr < worst {
                let xc = combine(&centroid, &xr, opts.contraction);
                let fc = eval(&xc);
                (xc, fc)
            } else {
                let xc = combine(&centroid, &simplex[n].0, opts.contraction);
                let fc = eval(&xc);
                (xc, fc)
            };
            if fc < worst.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let x0 = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    let xs = combine(&x0, &vertex.0, opts.shrink);
                    let fs = eval(&xs);
                    *vertex = (xs, fs);
                }
            }
        }
        history.push(simplex.iter().map(|v| v.1).fold(f64::INFINITY, f64::min));
    }
    let (x, fx) = simplex.swap_remove(0);
    NelderMeadResult {
        x,
        f: fx,
        iterations,
        evaluations: evals,
        converged,
        history,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convex_quadratic() {
        let r = nelder_mead(
            |v| (v[0] - 2.0).powi(2) + (v[1] + 1.0).powi(2),
            &[0.0, 0.0],
            &NelderMeadOptions::default(),
        );
        assert!(r.converged);
        assert!(
            (r.x[0] - 2.0).abs() < 1e-5 && (r.x[1] + 1.0).abs() < 1e-5,
            "{:?}",
            r.x
        );
    }

    #[test]
    fn rosenbrock() {
        let r = nelder_mead(
            |v| 100.0 * (v[1] - v[0] * v[0]).powi(2) + (1.0 - v[0]).powi(2),
            &[-1.2, 1.0],
            &NelderMeadOptions::default(),
        );
        assert!(
            (r.x[0] - 1.0).abs() < 1e-3 && (r.x[1] - 1.0).abs() < 1e-3,
            "{:?}",
            r.x
        );
    }

    #[test]
    fn constant_objective_stops_at_start() {
        let r = nelder_mead(|_| 3.0, &[0.4, -0.2], &NelderMeadOptions::default());
        assert!(r.converged);
        assert_eq!(r.iterations, 0);
        assert_eq!(r.x, vec![0.4, -0.2]);
    }

    #[test]
    fn history_is_non_increasing() {
        let r = nelder_mead(
            |v| (v[0] - 0.3).powi(4) + (v[1] * 3.0).sin().powi(2) + v[1] * v[1],
            &[1.0, 0.5],
            &NelderMeadOptions::default(),
        );
        for w in r.history.windows(2) {
            assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn iteration_cap_reports_non_convergence() {
        let opts = NelderMeadOptions {
            max_iterations: 5,
            ..Default::default()
        };
        let r = nelder_mead(|v| v[0] * v[0] + v[1] * v[1], &[3.0, 4.0], &opts);
        assert!(!r.converged);
        assert_eq!(r.iterations, 5);
        assert!(r.f < 25.0);
    }

    #[test]
    fn nan_is_avoided() {
        let r = nelder_mead(
            |v| {
                if v[0] < 0.0 {
                    f64::NAN
                } else {
                    (v[0] - 1.0).powi(2)
                }
            },
            &[0.5],
            &NelderMeadOptions::default(),
        );
        assert!((r.x[0] - 1.0).abs() < 1e-5);
    }
}
