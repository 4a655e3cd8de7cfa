use argmin::core::{CostFunction, Executor, State, TerminationReason, TerminationStatus};
use argmin::solver::neldermead::NelderMead;

struct Closure<F>(F);

impl<F: Fn(&[f64]) -> f64> CostFunction for Closure<F> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, x: &Vec<f64>) -> Result<f64, argmin::core::Error> {
        Ok((self.0)(x))
    }
}

pub(crate) struct Minimum {
    pub x: Vec<f64>,
    pub converged: bool,
}

/// Nelder–Mead from `x0` with an axis-aligned initial simplex.
pub(crate) fn nelder_mead(f: impl Fn(&[f64]) -> f64, x0: &[f64], steps: &[f64], max_iters: u64) -> Minimum {
    let start = f(x0);
    let fallback = || Minimum { x: x0.to_vec(), converged: false };
    let mut simplex = vec![x0.to_vec()];
    for (i, s) in steps.iter().enumerate() {
        let mut v = x0.to_vec();
        v[i] += s;
        simplex.push(v);
    }
    let Ok(solver) = NelderMead::new(simplex).with_sd_tolerance(1e-9) else {
        return fallback();
    };
    let Ok(res) = Executor::new(Closure(f), solver).configure(|s| s.max_iters(max_iters)).run() else {
        return fallback();
    };
    let state = res.state();
    let converged = matches!(state.get_termination_status(), TerminationStatus::Terminated(TerminationReason::SolverConverged));
    match state.get_best_param() {
        Some(x) if state.get_best_cost() <= start => Minimum { x: x.clone(), converged },
        _ => Minimum { converged, ..fallback() },
    }
}

/// Golden-section search for a minimum of `f` on `[a, b]`.
pub(crate) fn golden(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Weighted median, lower on ties.
pub(crate) fn weighted_median(vals: &mut [(f64, f64)]) -> f64 {
    vals.sort_by(|a, b| a.0.total_cmp(&b.0));
    let half = 0.5 * vals.iter().map(|v| v.1).sum::<f64>();
    let mut acc = 0.0;
    for &(v, w) in vals.iter() {
        acc += w;
        if acc >= half {
            return v;
        }
    }
    vals.last().map_or(0.0, |v| v.0)
}
