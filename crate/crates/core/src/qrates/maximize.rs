//! Mirror ascent for linear combinations of input, output and environment
//! entropies over density matrices.

use rayon::prelude::*;

use crate::quantum::linalg::{self, c, CMat};
use crate::quantum::{DensityMatrix, QuantumChannel};
use crate::rng::trial_rng;

pub const MAX_ITERATIONS: usize = 5000;

const LOG_FLOOR: f64 = 1e-300;
const MAX_STEP: f64 = 64.0;
const MIN_STEP: f64 = 1e-12;

/// a·H(ρ) + b·H(N(ρ)) + e·H(N^c(ρ)) in bits.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Weights {
    pub input: f64,
    pub output: f64,
    pub env: f64,
}

#[derive(Clone, Debug)]
pub struct OptimizerReport {
    pub value: f64,
    pub argmax: DensityMatrix,
    /// λ_max(∇f) − Tr ρ∇f at the returned state. For concave objectives this
    /// bounds the distance to the optimum.
    pub gap: f64,
    pub iterations: usize,
    pub converged: bool,
    pub restart_values: Vec<f64>,
}

pub(crate) struct Objective<'a> {
    ch: &'a QuantumChannel,
    comp: QuantumChannel,
    w: Weights,
}

fn log2_floor(a: &CMat) -> CMat {
    linalg::herm_fn(a, |x| x.max(LOG_FLOOR).log2())
}

impl<'a> Objective<'a> {
    pub fn new(ch: &'a QuantumChannel, w: Weights) -> Self {
        Self { ch, comp: ch.complementary(), w }
    }

    pub fn value(&self, rho: &CMat) -> f64 {
        let mut v = 0.0;
        if self.w.input != 0.0 {
            v += self.w.input * linalg::entropy(rho);
        }
        if self.w.output != 0.0 {
            v += self.w.output * linalg::entropy(&self.ch.apply_matrix(rho));
        }
        if self.w.env != 0.0 {
            v += self.w.env * linalg::entropy(&self.comp.apply_matrix(rho));
        }
        v
    }

    /// Gradient in bits, up to a multiple of the identity.
    fn gradient(&self, rho: &CMat) -> CMat {
        let d = rho.nrows();
        let mut g = CMat::zeros(d, d);
        if self.w.input != 0.0 {
            g -= log2_floor(rho) * c(self.w.input);
        }
        if self.w.output != 0.0 {
            g -= self.ch.adjoint_apply(&log2_floor(&self.ch.apply_matrix(rho))) * c(self.w.output);
        }
        if self.w.env != 0.0 {
            g -= self.comp.adjoint_apply(&log2_floor(&self.comp.apply_matrix(rho))) * c(self.w.env);
        }
        (&g + g.adjoint()) * c(0.5)
    }

    fn gap(&self, rho: &CMat, g: &CMat) -> f64 {
        let top = linalg::eigenvalues(g).last().copied().unwrap_or(0.0);
        (top - (rho * g).trace().re).max(0.0)
    }

    /// Single ascent run from `start`.
    fn run(&self, start: CMat, tol: f64) -> (CMat, f64, f64, usize, bool) {
        let mut rho = start;
        let mut f = self.value(&rho);
        let mut eta = 1.0;
        for it in 0..MAX_ITERATIONS {
            let g = self.gradient(&rho);
            let gap = self.gap(&rho, &g);
            if gap <= tol {
                return (rho, f, gap, it, true);
            }
            let log_rho = linalg::herm_fn(&rho, |x| x.max(LOG_FLOOR).ln());
            let step_dir = g * c(std::f64::consts::LN_2);
            loop {
                let cand = exp_normalized(&(&log_rho + &step_dir * c(eta)));
                let fc = self.value(&cand);
                if fc >= f {
                    rho = cand;
                    f = fc;
                    eta = (eta * 1.5).min(MAX_STEP);
                    break;
                }
                eta *= 0.5;
                if eta < MIN_STEP {
                    let gap = self.gap(&rho, &self.gradient(&rho));
                    return (rho, f, gap, it, gap <= tol);
                }
            }
        }
        let gap = self.gap(&rho, &self.gradient(&rho));
        (rho, f, gap, MAX_ITERATIONS, gap <= tol)
    }
}

/// exp(L) / Tr exp(L), shifted for stability.
fn exp_normalized(l: &CMat) -> CMat {
    let top = linalg::eigenvalues(l).last().copied().unwrap_or(0.0);
    let m = linalg::herm_fn(l, |x| (x - top).exp());
    let t = m.trace().re;
    m / c(t)
}

/// Restart 0 starts at the maximally mixed state, the others at random
/// full-rank states drawn from (seed, restart).
pub(crate) fn maximize(ch: &QuantumChannel, w: Weights, tol: f64, restarts: usize, seed: u64) -> OptimizerReport {
    let obj = Objective::new(ch, w);
    let d = ch.d_in();
    let runs: Vec<_> = (0..restarts.max(1))
        .into_par_iter()
        .map(|i| {
            let start = if i == 0 {
                linalg::eye(d) / c(d as f64)
            } else {
                let mut rng = trial_rng(seed, i as u64);
                let r = linalg::random_density_matrix(d, d, &mut rng);
                (r + linalg::eye(d) * c(0.1 / d as f64)) / c(1.1)
            };
            obj.run(start, tol)
        })
        .collect();
    let restart_values: Vec<f64> = runs.iter().map(|r| r.1).collect();
    let mut best = (0..runs.len()).fold(0, |b, i| if runs[i].1 > runs[b].1 { i } else { b });
    // A certified run within tol of the best value is preferred.
    if !runs[best].4 {
        if let Some(i) = (0..runs.len()).find(|&i| runs[i].4 && runs[i].1 >= runs[best].1 - tol) {
            best = i;
        }
    }
    let (rho, value, gap, iterations, converged) = runs.into_iter().nth(best).unwrap();
    OptimizerReport {
        value,
        argmax: DensityMatrix::from_trusted(rho, vec![d]),
        gap,
        iterations,
        converged,
        restart_values,
    }
}
