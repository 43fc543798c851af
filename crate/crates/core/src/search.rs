//! Compass pattern search: axis steps with a shrinking step size.
//!
//! Derivative-free and deterministic; infeasible regions are handled by
//! objectives returning `f64::INFINITY`.

/// Search controls. One iteration sweeps all `2n` axis directions.
#[derive(Debug, Clone, Copy)]
pub struct PatternSearch {
    pub step0: f64,
    pub min_step: f64,
    pub max_iters: usize,
    pub shrink: f64,
}

impl PatternSearch {
    pub fn new(step0: f64) -> Self {
        Self {
            step0,
            min_step: step0 * 1e-7,
            max_iters: 80,
            shrink: 0.5,
        }
    }

    pub fn with_iters(mut self, iters: usize) -> Self {
        self.max_iters = iters;
        self
    }
}

/// Minimizes `f` from `x0`; returns the best point and value seen.
pub fn minimize<F: Fn(&[f64]) -> f64>(f: F, x0: &[f64], opts: &PatternSearch) -> (Vec<f64>, f64) {
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    let mut step = opts.step0;
    let n = x.len();
    for _ in 0..opts.max_iters {
        if step < opts.min_step {
            break;
        }
        let mut best_move: Option<(usize, f64, f64)> = None;
        for i in 0..n {
            for sign in [1.0, -1.0] {
                let old = x[i];
                x[i] = old + sign * step;
                let fy = f(&x);
                x[i] = old;
                if fy < best_move.map_or(fx, |(_, _, v)| v) {
                    best_move = Some((i, sign, fy));
                }
            }
        }
        match best_move {
            Some((i, sign, fy)) if fy < fx => {
                x[i] += sign * step;
                fx = fy;
                // Re-expanding after a success lets the search crawl along
                // narrow valleys instead of freezing at the first fine step.
                step = (step * 2.0).min(opts.step0);
            }
            _ => step *= opts.shrink,
        }
    }
    (x, fx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_quadratic_minimum() {
        let f = |x: &[f64]| (x[0] - 1.5).powi(2) + 3.0 * (x[1] + 0.5).powi(2);
        let (x, fx) = minimize(f, &[0.0, 0.0], &PatternSearch::new(1.0).with_iters(200));
        assert!(fx < 1e-10);
        assert!((x[0] - 1.5).abs() < 1e-5);
        assert!((x[1] + 0.5).abs() < 1e-5);
    }

    #[test]
    fn respects_infeasible_regions() {
        // Minimum of |x| subject to x >= 1.
        let f = |x: &[f64]| if x[0] < 1.0 { f64::INFINITY } else { x[0].abs() };
        let (x, fx) = minimize(f, &[3.0], &PatternSearch::new(1.0).with_iters(200));
        assert!((fx - 1.0).abs() < 1e-6);
        assert!(x[0] >= 1.0);
    }

    #[test]
    fn never_returns_worse_than_start() {
        let f = |x: &[f64]| x[0].sin() * 10.0 + x[0] * x[0];
        let (_, fx) = minimize(f, &[2.0], &PatternSearch::new(0.5));
        assert!(fx <= f(&[2.0]));
    }
}
