//! Derivative-free simplex minimizer.

#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions {
    pub max_iters: usize,
    /// Converged once `f_worst - f_best` over the simplex drops to this.
    pub ftol: f64,
    /// Converged once the best value improved by less than `stall_tol` over this many iterations.
    pub stall_window: usize,
    pub stall_tol: f64,
    pub initial_step: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            max_iters: 2000,
            ftol: 1e-9,
            stall_window: 50,
            stall_tol: 1e-9,
            initial_step: 0.5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NelderMeadOutcome {
    pub x: Vec<f64>,
    pub fx: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

pub fn minimize<F>(mut f: F, x0: &[f64], opts: &NelderMeadOptions) -> NelderMeadOutcome
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let mut evaluations = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    if n == 0 {
        let fx = eval(x0, &mut evaluations);
        return NelderMeadOutcome {
            x: vec![],
            fx,
            iterations: 0,
            evaluations,
            converged: true,
        };
    }

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += opts.initial_step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|x| eval(x, &mut evaluations)).collect();
    let mut best_history: Vec<f64> = Vec::with_capacity(opts.max_iters + 1);

    let mut iterations = 0;
    let mut converged = false;
    loop {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();
        best_history.push(values[0]);

        if values[n] - values[0] <= opts.ftol {
            converged = true;
            break;
        }
        if iterations >= opts.stall_window {
            let then = best_history[iterations - opts.stall_window];
            if then - values[0] < opts.stall_tol {
                converged = true;
                break;
            }
        }
        if iterations >= opts.max_iters {
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for x in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }
        let along = |t: f64, from: &[f64]| -> Vec<f64> {
            centroid
                .iter()
                .zip(from)
                .map(|(c, x)| c + t * (x - c))
                .collect()
        };

        let worst = simplex[n].clone();
        let xr = along(-REFLECT, &worst);
        let fr = eval(&xr, &mut evaluations);

        if fr < values[0] {
            let xe = along(-REFLECT * EXPAND, &worst);
            let fe = eval(&xe, &mut evaluations);
            if fe < fr {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = xr;
            values[n] = fr;
            continue;
        }
        let (xc, fc, accept) = if fr < values[n] {
            let xc = along(-REFLECT * CONTRACT, &worst);
            let fc = eval(&xc, &mut evaluations);
            (xc, fc, fc <= fr)
        } else {
            let xc = along(CONTRACT, &worst);
            let fc = eval(&xc, &mut evaluations);
            (xc, fc, fc < values[n])
        };
        if accept {
            simplex[n] = xc;
            values[n] = fc;
            continue;
        }
        let best = simplex[0].clone();
        for i in 1..=n {
            let shrunk: Vec<f64> = best
                .iter()
                .zip(&simplex[i])
                .map(|(b, x)| b + SHRINK * (x - b))
                .collect();
            values[i] = eval(&shrunk, &mut evaluations);
            simplex[i] = shrunk;
        }
    }

    NelderMeadOutcome {
        x: simplex.swap_remove(0),
        fx: values[0],
        iterations,
        evaluations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        let out = minimize(
            |x| (x[0] - 1.0).powi(2) + 3.0 * (x[1] + 2.0).powi(2),
            &[0.0, 0.0],
            &NelderMeadOptions { ftol: 1e-14, ..Default::default() },
        );
        assert!(out.converged);
        assert!((out.x[0] - 1.0).abs() < 1e-5);
        assert!((out.x[1] + 2.0).abs() < 1e-5);
        assert!(out.fx < 1e-10);
    }

    #[test]
    fn rosenbrock() {
        let out = minimize(
            |x| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2),
            &[-1.2, 1.0],
            &NelderMeadOptions {
                ftol: 1e-16,
                stall_tol: 1e-16,
                max_iters: 5000,
                ..Default::default()
            },
        );
        assert!((out.x[0] - 1.0).abs() < 1e-3, "{out:?}");
        assert!((out.x[1] - 1.0).abs() < 1e-3, "{out:?}");
    }

    #[test]
    fn iteration_cap_reports_non_convergence() {
        let out = minimize(
            |x| x.iter().map(|v| v * v).sum::<f64>(),
            &[10.0; 6],
            &NelderMeadOptions { max_iters: 5, ..Default::default() },
        );
        assert!(!out.converged);
        assert_eq!(out.iterations, 5);
    }

    #[test]
    fn flat_objective_converges_immediately() {
        let out = minimize(|_| 0.25, &[0.3, 0.4], &NelderMeadOptions::default());
        assert!(out.converged);
        assert_eq!(out.iterations, 0);
    }
}
