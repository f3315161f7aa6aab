//! Derivative-free minimisation used by the likelihood fits.

use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadConfig {
    pub max_iterations: usize,
    /// Relative change of the best value over `window` iterations that
    /// counts as converged.
    pub rel_tolerance: f64,
    pub window: usize,
    pub initial_step: f64,
    /// Fresh-simplex restarts from the incumbent after convergence.
    pub restarts: usize,
}

impl Default for NelderMeadConfig {
    fn default() -> Self {
        Self {
            max_iterations: 6000,
            rel_tolerance: 1e-8,
            window: 10,
            initial_step: 0.25,
            restarts: 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum<T> {
    pub x: Vec<T>,
    pub value: T,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

/// Minimises `f` from `x0`. Non-finite objective values are treated as `+∞`.
pub fn nelder_mead<T: Real, F>(f: F, x0: &[T], config: &NelderMeadConfig) -> Minimum<T>
where
    F: Fn(&[T]) -> T,
{
    let eval = |x: &[T]| {
        let v = f(x);
        if v.finite() {
            v
        } else {
            T::c(f64::INFINITY)
        }
    };
    let mut best = x0.to_vec();
    let mut best_value = eval(&best);
    let mut iterations = 0;
    let mut evaluations = 1;
    let mut converged = false;
    for round in 0..=config.restarts {
        let run = single_run(
            &eval,
            &best,
            best_value,
            config,
            config.max_iterations.saturating_sub(iterations),
        );
        iterations += run.iterations;
        evaluations += run.evaluations;
        let improved = rel_change(best_value, run.value) > config.rel_tolerance;
        if run.value <= best_value {
            best = run.x;
            best_value = run.value;
        }
        converged = run.converged;
        if !run.converged || (round > 0 && !improved) {
            break;
        }
    }
    Minimum {
        x: best,
        value: best_value,
        iterations,
        evaluations,
        converged,
    }
}

fn rel_change<T: Real>(old: T, new: T) -> f64 {
    let (o, n) = (old.f64(), new.f64());
    if !o.is_finite() {
        return if n.is_finite() { f64::INFINITY } else { 0.0 };
    }
    (o - n).abs() / o.abs().max(1e-300)
}

fn single_run<T: Real, E>(
    eval: &E,
    x0: &[T],
    f0: T,
    config: &NelderMeadConfig,
    budget: usize,
) -> Minimum<T>
where
    E: Fn(&[T]) -> T,
{
    let n = x0.len();
    let (alpha, gamma, rho, sigma) = (T::one(), T::c(2.0), T::c(0.5), T::c(0.5));
    let mut simplex: Vec<(Vec<T>, T)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f0));
    let mut evaluations = 0;
    for i in 0..n {
        let mut x = x0.to_vec();
        let step = T::c(config.initial_step) * (T::one() + x[i].abs() * T::c(0.1));
        x[i] += step;
        let v = eval(&x);
        evaluations += 1;
        simplex.push((x, v));
    }
    let mut history: Vec<T> = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < budget {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
        history.push(simplex[0].1);
        if history.len() > config.window {
            let past = history[history.len() - 1 - config.window];
            if simplex[0].1.finite() && rel_change(past, simplex[0].1) < config.rel_tolerance {
                converged = true;
                break;
            }
        }
        iterations += 1;
        let centroid: Vec<T> = (0..n)
            .map(|k| simplex[..n].iter().fold(T::zero(), |acc, p| acc + p.0[k]) / T::from_count(n))
            .collect();
        let along = |t: T| -> Vec<T> {
            centroid
                .iter()
                .zip(&simplex[n].0)
                .map(|(&c, &w)| c + t * (c - w))
                .collect()
        };
        let xr = along(alpha);
        let fr = eval(&xr);
        evaluations += 1;
        if fr < simplex[0].1 {
            let xe = along(gamma);
            let fe = eval(&xe);
            evaluations += 1;
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < simplex[n].1 {
            let xc = along(alpha * rho);
            let fc = eval(&xc);
            (xc, fc)
        } else {
            let xc = along(-rho);
            let fc = eval(&xc);
            (xc, fc)
        };
        evaluations += 1;
        if fc < simplex[n].1.min(fr) {
            simplex[n] = (xc, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for p in simplex.iter_mut().skip(1) {
            let x: Vec<T> = best
                .iter()
                .zip(&p.0)
                .map(|(&b, &v)| b + sigma * (v - b))
                .collect();
            p.1 = eval(&x);
            p.0 = x;
            evaluations += 1;
        }
    }
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
    let (x, value) = simplex.swap_remove(0);
    Minimum {
        x,
        value,
        iterations,
        evaluations,
        converged,
    }
}
