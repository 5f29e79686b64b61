//! Limited-memory BFGS with Armijo backtracking, for the smooth
//! unconstrained subproblems of the rate optimizers.

use std::collections::VecDeque;

#[derive(Clone, Copy, Debug)]
pub(crate) struct LbfgsOptions {
    pub max_iter: usize,
    pub memory: usize,
    /// Stop once the gradient infinity norm drops below this.
    pub grad_tol: f64,
    /// Stop once successive objective values differ by less than this (relative).
    pub f_tol: f64,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        Self { max_iter: 500, memory: 8, grad_tol: 1e-9, f_tol: 1e-14 }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct LbfgsResult {
    pub x: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimizes `f`, which writes its gradient into the second argument and returns the value.
pub(crate) fn lbfgs<F>(mut f: F, x0: Vec<f64>, opts: LbfgsOptions) -> LbfgsResult
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let n = x0.len();
    let mut x = x0;
    let mut g = vec![0.0; n];
    let mut fx = f(&x, &mut g);
    let mut hist: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut xn = vec![0.0; n];
    let mut gn = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut alpha = vec![0.0; opts.memory];

    for _ in 0..opts.max_iter {
        let gmax = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !fx.is_finite() {
            return LbfgsResult { x };
        }
        if gmax < opts.grad_tol {
            return LbfgsResult { x };
        }

        // two-loop recursion
        d.copy_from_slice(&g);
        for (k, (s, y, rho)) in hist.iter().enumerate().rev() {
            alpha[k] = rho * dot(s, &d);
            for (di, yi) in d.iter_mut().zip(y) {
                *di -= alpha[k] * yi;
            }
        }
        if let Some((s, y, _)) = hist.back() {
            let scale = dot(s, y) / dot(y, y);
            d.iter_mut().for_each(|v| *v *= scale);
        } else {
            let scale = 1.0 / gmax.max(1.0);
            d.iter_mut().for_each(|v| *v *= scale);
        }
        for (k, (s, y, rho)) in hist.iter().enumerate() {
            let beta = rho * dot(y, &d);
            for (di, si) in d.iter_mut().zip(s) {
                *di += (alpha[k] - beta) * si;
            }
        }
        d.iter_mut().for_each(|v| *v = -*v);
        let mut slope = dot(&g, &d);
        if slope >= 0.0 {
            hist.clear();
            for (di, gi) in d.iter_mut().zip(&g) {
                *di = -gi / gmax.max(1.0);
            }
            slope = dot(&g, &d);
        }

        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            for i in 0..n {
                xn[i] = x[i] + step * d[i];
            }
            let fnew = f(&xn, &mut gn);
            if fnew.is_finite() && fnew <= fx + 1e-4 * step * slope {
                accepted = true;
                let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
                let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
                let sy = dot(&s, &y);
                if sy > 1e-16 {
                    if hist.len() == opts.memory {
                        hist.pop_front();
                    }
                    hist.push_back((s, y, 1.0 / sy));
                }
                let done = (fx - fnew).abs() <= opts.f_tol * fx.abs().max(1.0);
                std::mem::swap(&mut x, &mut xn);
                std::mem::swap(&mut g, &mut gn);
                fx = fnew;
                if done {
                    return LbfgsResult { x };
                }
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            return LbfgsResult { x };
        }
    }
    LbfgsResult { x }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64], g: &mut [f64]| {
            let (a, b) = (x[0], x[1]);
            g[0] = -2.0 * (1.0 - a) - 400.0 * a * (b - a * a);
            g[1] = 200.0 * (b - a * a);
            (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2)
        };
        let r = lbfgs(f, vec![-1.2, 1.0], LbfgsOptions { max_iter: 2000, ..Default::default() });
        assert!((r.x[0] - 1.0).abs() < 1e-5 && (r.x[1] - 1.0).abs() < 1e-5, "{:?}", r.x);
    }

    #[test]
    fn quadratic_in_many_dims() {
        let f = |x: &[f64], g: &mut [f64]| {
            let mut v = 0.0;
            for (i, (xi, gi)) in x.iter().zip(g.iter_mut()).enumerate() {
                let c = (i + 1) as f64;
                v += c * (xi - 1.0) * (xi - 1.0);
                *gi = 2.0 * c * (xi - 1.0);
            }
            v
        };
        let r = lbfgs(f, vec![0.0; 30], LbfgsOptions::default());
        assert!(r.x.iter().all(|v| (v - 1.0).abs() < 1e-6));
    }
}
