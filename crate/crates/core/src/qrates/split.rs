//! Search over splitting isometries V: E → E_A ⊗ E_B.
//!
//! For a state ω on B ⊗ E the objective is a·H(B E_B) + b·H(E_A), minimized by
//! Riemannian gradient descent on the Stiefel manifold with a polar retraction.

use rayon::prelude::*;

use crate::quantum::linalg::{self, c, CMat};
use crate::rng::{derive_seed, trial_rng};

const MAX_STEPS: usize = 400;
const GRAD_TOL: f64 = 1e-9;
const LOG_FLOOR: f64 = 1e-15;

#[derive(Clone, Debug)]
pub struct SplitWitness {
    pub d_ea: usize,
    pub d_eb: usize,
    /// (d_ea·d_eb) × d_e isometry, rows indexed ea·d_eb + eb.
    pub isometry: CMat,
    pub h_b_eb: f64,
    pub h_ea: f64,
}

pub(crate) struct SplitProblem {
    pub omega: CMat,
    pub d_b: usize,
    pub d_e: usize,
}

/// Entropies (H(B E_B), H(E_A)) and the two reduced states.
fn reduced(p: &SplitProblem, v: &CMat, d_ea: usize, d_eb: usize) -> (CMat, CMat) {
    let lift = linalg::kron(&linalg::eye(p.d_b), v);
    let tau = &lift * &p.omega * lift.adjoint();
    let dims = [p.d_b, d_ea, d_eb];
    let s1 = linalg::partial_trace(&tau, &dims, &[0, 2]).expect("dims checked");
    let s2 = linalg::partial_trace(&tau, &dims, &[1]).expect("dims checked");
    (s1, s2)
}

pub(crate) fn entropies(p: &SplitProblem, v: &CMat, d_ea: usize, d_eb: usize) -> (f64, f64) {
    let (s1, s2) = reduced(p, v, d_ea, d_eb);
    (linalg::entropy(&s1), linalg::entropy(&s2))
}

fn objective(p: &SplitProblem, v: &CMat, d_ea: usize, d_eb: usize, a: f64, b: f64) -> f64 {
    let (h1, h2) = entropies(p, v, d_ea, d_eb);
    a * h1 + b * h2
}

/// Euclidean gradient with respect to V, in the convention dL = Re Tr(∇† dV).
fn euclidean_gradient(p: &SplitProblem, v: &CMat, d_ea: usize, d_eb: usize, a: f64, b: f64) -> CMat {
    let (s1, s2) = reduced(p, v, d_ea, d_eb);
    let l1 = linalg::herm_fn(&s1, |x| x.max(LOG_FLOOR).log2());
    let l2 = linalg::herm_fn(&s2, |x| x.max(LOG_FLOOR).log2());
    let (db, de) = (p.d_b, p.d_e);
    let dd = d_ea * d_eb;
    // G on B ⊗ E_A ⊗ E_B
    let g = CMat::from_fn(db * dd, db * dd, |i, j| {
        let (bi, ai, ei) = (i / dd, (i % dd) / d_eb, i % d_eb);
        let (bj, aj, ej) = (j / dd, (j % dd) / d_eb, j % d_eb);
        let mut z = c(0.0);
        if ai == aj {
            z += l1[(bi * d_eb + ei, bj * d_eb + ej)] * a;
        }
        if bi == bj && ei == ej {
            z += l2[(ai, aj)] * b;
        }
        z
    });
    let lift = linalg::kron(&linalg::eye(db), v);
    let k = &p.omega * lift.adjoint() * g;
    let pm = CMat::from_fn(de, dd, |e, d| (0..db).map(|bb| k[(bb * de + e, bb * dd + d)]).sum());
    pm.adjoint() * c(-2.0)
}

fn riemannian(v: &CMat, egrad: &CMat) -> CMat {
    let x = v.adjoint() * egrad;
    let sym = (&x + x.adjoint()) * c(0.5);
    egrad - v * sym
}

/// Local minimization from `v0`; returns the final isometry and value.
pub(crate) fn descend(p: &SplitProblem, v0: CMat, d_ea: usize, d_eb: usize, a: f64, b: f64) -> (CMat, f64) {
    let mut v = v0;
    let mut f = objective(p, &v, d_ea, d_eb, a, b);
    let mut step = 1.0;
    for _ in 0..MAX_STEPS {
        let g = riemannian(&v, &euclidean_gradient(p, &v, d_ea, d_eb, a, b));
        let gn2 = g.norm_squared();
        if gn2.sqrt() < GRAD_TOL {
            break;
        }
        let mut accepted = false;
        while step > 1e-12 {
            let cand = linalg::polar_isometry(&(&v - &g * c(step)));
            let fc = objective(p, &cand, d_ea, d_eb, a, b);
            if fc <= f - 1e-4 * step * gn2 {
                v = cand;
                f = fc;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        step = (step * 2.0).min(1e3);
    }
    (v, f)
}

/// Factor pairs (d_ea, d_eb) with 1 ≤ d_ea, d_eb ≤ d_e and d_ea·d_eb ≥ d_e.
pub(crate) fn split_pairs(d_e: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for a in 1..=d_e {
        for b in 1..=d_e {
            if a * b >= d_e {
                out.push((a, b));
            }
        }
    }
    out
}

/// Coordinate embedding E → E_A ⊗ E_B: basis vector e goes to row e.
fn embedding(d: usize, d_e: usize) -> CMat {
    CMat::from_fn(d, d_e, |i, j| if i == j { c(1.0) } else { c(0.0) })
}

/// Minimizes a·H(B E_B) + b·H(E_A) over all splits; the score of each
/// candidate is `score(h_b_eb, h_ea)` and the lowest-scoring witness wins.
pub(crate) fn search<S>(p: &SplitProblem, weights: &[(f64, f64)], restarts: usize, seed: u64, score: S) -> (SplitWitness, f64)
where
    S: Fn(f64, f64) -> f64 + Sync,
{
    let pairs = split_pairs(p.d_e);
    let jobs: Vec<(usize, usize, usize)> = (0..pairs.len())
        .flat_map(|pi| (0..weights.len()).flat_map(move |wi| (0..restarts.max(1)).map(move |r| (pi, wi, r))))
        .collect();
    let results: Vec<(SplitWitness, f64)> = jobs
        .par_iter()
        .map(|&(pi, wi, r)| {
            let (d_ea, d_eb) = pairs[pi];
            let (a, b) = weights[wi];
            let d = d_ea * d_eb;
            let v0 = if r == 0 {
                embedding(d, p.d_e)
            } else {
                let mut rng = trial_rng(derive_seed(seed, pi as u64), (wi * 1000 + r) as u64);
                linalg::haar_isometry(d, p.d_e, &mut rng)
            };
            let mut best = v0.clone();
            let (h1, h2) = entropies(p, &v0, d_ea, d_eb);
            let mut best_score = score(h1, h2);
            let (v, _) = descend(p, v0, d_ea, d_eb, a, b);
            let (g1, g2) = entropies(p, &v, d_ea, d_eb);
            if score(g1, g2) < best_score {
                best_score = score(g1, g2);
                best = v;
            }
            let (h_b_eb, h_ea) = entropies(p, &best, d_ea, d_eb);
            (SplitWitness { d_ea, d_eb, isometry: best, h_b_eb, h_ea }, best_score)
        })
        .collect();
    results
        .into_iter()
        .reduce(|x, y| if y.1 < x.1 { y } else { x })
        .expect("at least one split")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = rng_from_seed(9);
        let omega = linalg::random_density_matrix(6, 6, &mut rng);
        let p = SplitProblem { omega, d_b: 2, d_e: 3 };
        let (d_ea, d_eb) = (2, 2);
        let v = linalg::haar_isometry(4, 3, &mut rng);
        let raw = linalg::haar_isometry(4, 3, &mut rng);
        let dir = riemannian(&v, &raw);
        let (a, b) = (0.8, -0.4);
        let g = euclidean_gradient(&p, &v, d_ea, d_eb, a, b);
        let h = 1e-6;
        let fd = (objective(&p, &(&v + &dir * c(h)), d_ea, d_eb, a, b)
            - objective(&p, &(&v - &dir * c(h)), d_ea, d_eb, a, b))
            / (2.0 * h);
        let an = (g.adjoint() * &dir).trace().re;
        assert!((fd - an).abs() < 1e-6, "fd {fd} analytic {an}");
    }

    #[test]
    fn descent_stays_isometric_and_decreases() {
        let mut rng = rng_from_seed(10);
        let omega = linalg::random_density_matrix(6, 3, &mut rng);
        let p = SplitProblem { omega, d_b: 2, d_e: 3 };
        let v0 = linalg::haar_isometry(6, 3, &mut rng);
        let f0 = objective(&p, &v0, 3, 2, 1.0, 0.0);
        let (v, f) = descend(&p, v0, 3, 2, 1.0, 0.0);
        assert!(f <= f0);
        assert!(linalg::max_abs_diff(&(v.adjoint() * &v), &linalg::eye(3)) < 1e-10);
    }

    #[test]
    fn pairs_cover_the_environment() {
        assert_eq!(split_pairs(1), vec![(1, 1)]);
        assert_eq!(split_pairs(2), vec![(1, 2), (2, 1), (2, 2)]);
        assert!(split_pairs(4).iter().all(|&(a, b)| a * b >= 4));
    }
}
