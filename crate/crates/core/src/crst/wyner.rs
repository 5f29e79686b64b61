//! Optimization over auxiliary variables W with X - W - Y Markov:
//! Wyner's common information and the non-feedback rate tradeoff.
//!
//! p(w), p(x|w), p(y|w) are softmax-parameterized so the factorization holds by
//! construction; the joint is matched by an augmented Lagrangian on
//! Σ_w p(w)p(x|w)p(y|w) - j, and the optional I(X;W) ≤ c constraint by the
//! PHR multiplier method.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classical::JointDistribution;
use crate::error::{Error, Result};
use crate::optim::{lbfgs, LbfgsOptions};
use crate::rng::{derive_seed, rng_from_seed};
use rand::Rng;

/// ‖m - j‖₁ below which a candidate counts as reproducing the joint.
pub const MARGINAL_TOL: f64 = 1e-6;
/// Slack allowed on I(X;W) ≤ c, in bits.
pub const CONSTRAINT_TOL: f64 = 1e-7;
const PAD: f64 = -30.0;
const OUTER_ITERS: usize = 60;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WynerResult {
    /// Best feasible I(XY;W) in bits; +∞ if no start reproduced the joint.
    pub value: f64,
    pub w_size: usize,
    /// Entry k-1 is the best value using at most k values of W.
    pub per_size: Vec<f64>,
    pub feasible_starts: usize,
    pub total_starts: usize,
    /// ‖m - j‖₁ of the reported optimum.
    pub marginal_error: f64,
}

/// Evaluated auxiliary variable: weights, p(x|w), p(y|w) and the induced quantities.
#[derive(Clone, Debug)]
struct Candidate {
    i_xyw: f64,
    i_xw: f64,
    err: f64,
}

struct Problem<'a> {
    j: &'a [f64],
    nx: usize,
    ny: usize,
    k: usize,
}

fn softmax(z: &[f64], out: &mut [f64]) {
    let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut s = 0.0;
    for (o, &v) in out.iter_mut().zip(z) {
        *o = (v - m).exp();
        s += *o;
    }
    out.iter_mut().for_each(|o| *o /= s);
}

fn ent(p: &[f64]) -> f64 {
    -p.iter().filter(|&&v| v > 0.0).map(|&v| v * v.ln()).sum::<f64>()
}

/// Softmax backprop: gz_i = p_i (g_i - <p, g>).
fn soft_back(p: &[f64], g: &[f64], gz: &mut [f64]) {
    let avg: f64 = p.iter().zip(g).map(|(a, b)| a * b).sum();
    for ((o, &pi), &gi) in gz.iter_mut().zip(p).zip(g) {
        *o = pi * (gi - avg);
    }
}

struct Decoded {
    pi: Vec<f64>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    m: Vec<f64>,
    mx: Vec<f64>,
}

impl Problem<'_> {
    fn dim(&self) -> usize {
        self.k * (1 + self.nx + self.ny)
    }

    fn decode(&self, z: &[f64]) -> Decoded {
        let (k, nx, ny) = (self.k, self.nx, self.ny);
        let mut pi = vec![0.0; k];
        softmax(&z[..k], &mut pi);
        let mut alpha = vec![0.0; k * nx];
        let mut beta = vec![0.0; k * ny];
        for w in 0..k {
            let a0 = k + w * nx;
            softmax(&z[a0..a0 + nx], &mut alpha[w * nx..(w + 1) * nx]);
            let b0 = k + k * nx + w * ny;
            softmax(&z[b0..b0 + ny], &mut beta[w * ny..(w + 1) * ny]);
        }
        let mut m = vec![0.0; nx * ny];
        let mut mx = vec![0.0; nx];
        for w in 0..k {
            for x in 0..nx {
                let a = pi[w] * alpha[w * nx + x];
                mx[x] += a;
                for y in 0..ny {
                    m[x * ny + y] += a * beta[w * ny + y];
                }
            }
        }
        Decoded { pi, alpha, beta, m, mx }
    }

    /// (I(XY;W), I(X;W)) in nats for the model joint.
    fn informations(&self, d: &Decoded) -> (f64, f64) {
        let (nx, ny) = (self.nx, self.ny);
        let mut cond_xy = 0.0;
        let mut cond_x = 0.0;
        for w in 0..self.k {
            let ha = ent(&d.alpha[w * nx..(w + 1) * nx]);
            let hb = ent(&d.beta[w * ny..(w + 1) * ny]);
            cond_xy += d.pi[w] * (ha + hb);
            cond_x += d.pi[w] * ha;
        }
        (ent(&d.m) - cond_xy, ent(&d.mx) - cond_x)
    }

    fn evaluate(&self, z: &[f64]) -> Candidate {
        let d = self.decode(z);
        let (a, b) = self.informations(&d);
        let err = d.m.iter().zip(self.j).map(|(p, q)| (p - q).abs()).sum();
        Candidate { i_xyw: a / std::f64::consts::LN_2, i_xw: b / std::f64::consts::LN_2, err }
    }

    /// Augmented Lagrangian value and gradient. `cap` is the I(X;W) bound in
    /// nats with its multiplier.
    fn lagrangian(&self, z: &[f64], grad: &mut [f64], lam: &[f64], rho: f64, cap: Option<(f64, f64)>) -> f64 {
        let (k, nx, ny) = (self.k, self.nx, self.ny);
        let d = self.decode(z);
        let (i_xyw, i_xw) = self.informations(&d);
        let mut val = i_xyw;
        let mut gm = vec![0.0; nx * ny];
        for c in 0..nx * ny {
            let r = d.m[c] - self.j[c];
            val += lam[c] * r + 0.5 * rho * r * r;
            gm[c] = -d.m[c].max(1e-300).ln() + lam[c] + rho * r;
        }
        // PHR term for g = I(X;W) - cap ≤ 0
        let mut s = 0.0;
        if let Some((capv, mu)) = cap {
            let t = (mu + rho * (i_xw - capv)).max(0.0);
            val += (t * t - mu * mu) / (2.0 * rho);
            s = t;
        }
        let lmx: Vec<f64> = d.mx.iter().map(|v| v.max(1e-300).ln()).collect();

        let mut gpi = vec![0.0; k];
        let mut ga = vec![0.0; nx];
        let mut gb = vec![0.0; ny];
        for w in 0..k {
            let al = &d.alpha[w * nx..(w + 1) * nx];
            let be = &d.beta[w * ny..(w + 1) * ny];
            let p = d.pi[w];
            let (ha, hb) = (ent(al), ent(be));
            let mut gp = -(ha + hb);
            for x in 0..nx {
                let mut acc = 0.0;
                for y in 0..ny {
                    acc += gm[x * ny + y] * be[y];
                }
                gp += al[x] * acc;
                ga[x] = p * (acc + al[x].max(1e-300).ln());
            }
            for y in 0..ny {
                let mut acc = 0.0;
                for x in 0..nx {
                    acc += gm[x * ny + y] * al[x];
                }
                gb[y] = p * (acc + be[y].max(1e-300).ln());
            }
            if s > 0.0 {
                // ∂I(X;W)/∂π_w = -Σ α ln m_X - H(α) (constants dropped), ∂/∂α = π (ln α - ln m_X)
                let mut gpx = -ha;
                for x in 0..nx {
                    gpx -= al[x] * lmx[x];
                    ga[x] += s * p * (al[x].max(1e-300).ln() - lmx[x]);
                }
                gp += s * gpx;
            }
            gpi[w] = gp;
            let a0 = k + w * nx;
            soft_back(al, &ga, &mut grad[a0..a0 + nx]);
            let b0 = k + k * nx + w * ny;
            soft_back(be, &gb, &mut grad[b0..b0 + ny]);
        }
        soft_back(&d.pi, &gpi, &mut grad[..k]);
        val
    }

    /// Runs the multiplier method from `z0`; returns the final point and its evaluation.
    fn solve(&self, z0: Vec<f64>, cap_bits: Option<f64>, tol: f64) -> (Vec<f64>, Candidate) {
        let cap = cap_bits.map(|c| c * std::f64::consts::LN_2);
        let mut lam = vec![0.0; self.nx * self.ny];
        let mut mu = 0.0;
        let mut rho = 10.0;
        let mut z = z0;
        let mut prev_viol = f64::INFINITY;
        let opts = LbfgsOptions { max_iter: 3000, grad_tol: tol.min(1e-9), ..Default::default() };
        let mut last = self.evaluate(&z);
        for _ in 0..OUTER_ITERS {
            let capm = cap.map(|c| (c, mu));
            let res = lbfgs(|x, g| self.lagrangian(x, g, &lam, rho, capm), z.clone(), opts);
            z = res.x;
            let d = self.decode(&z);
            let (_, i_xw) = self.informations(&d);
            for c in 0..lam.len() {
                lam[c] += rho * (d.m[c] - self.j[c]);
            }
            let mut viol: f64 = d.m.iter().zip(self.j).map(|(p, q)| (p - q).abs()).sum();
            if let Some(c) = cap {
                mu = (mu + rho * (i_xw - c)).max(0.0);
                viol = viol.max(i_xw - c);
            }
            let cand = self.evaluate(&z);
            let settled = (cand.i_xyw - last.i_xyw).abs() < tol;
            last = cand;
            if viol <= MARGINAL_TOL * 0.1 && settled {
                break;
            }
            if viol > 0.25 * prev_viol {
                rho = (rho * 5.0).min(1e9);
            }
            prev_viol = viol;
        }
        (z, last)
    }

    fn feasible(&self, c: &Candidate, cap_bits: Option<f64>) -> bool {
        c.err <= MARGINAL_TOL && cap_bits.map_or(true, |cap| c.i_xw <= cap + CONSTRAINT_TOL)
    }

    /// Logit vector from explicit (π, α, β) tables.
    fn encode(&self, pi: &[f64], alpha: &[Vec<f64>], beta: &[Vec<f64>]) -> Vec<f64> {
        let lg = |v: f64| if v > 0.0 { v.ln().max(PAD) } else { PAD };
        let mut z = Vec::with_capacity(self.dim());
        z.extend(pi.iter().map(|&v| lg(v)));
        for a in alpha {
            z.extend(a.iter().map(|&v| lg(v)));
        }
        for b in beta {
            z.extend(b.iter().map(|&v| lg(v)));
        }
        z
    }

    /// W = X, W = Y, W = (X, Y) and constant W, where they fit in k values.
    fn structured_starts(&self) -> Vec<Vec<f64>> {
        let (k, nx, ny) = (self.k, self.nx, self.ny);
        let px: Vec<f64> = (0..nx).map(|x| (0..ny).map(|y| self.j[x * ny + y]).sum()).collect();
        let py: Vec<f64> = (0..ny).map(|y| (0..nx).map(|x| self.j[x * ny + y]).sum()).collect();
        let one_hot = |n: usize, i: usize| {
            let mut v = vec![0.0; n];
            v[i] = 1.0;
            v
        };
        let cond = |row: Vec<f64>| {
            let s: f64 = row.iter().sum();
            if s > 0.0 {
                row.iter().map(|v| v / s).collect()
            } else {
                vec![1.0 / row.len() as f64; row.len()]
            }
        };
        let mut out = Vec::new();
        let fill = |pi: Vec<f64>, mut a: Vec<Vec<f64>>, mut b: Vec<Vec<f64>>| {
            let mut pi = pi;
            pi.resize(k, 0.0);
            a.resize(k, vec![1.0 / nx as f64; nx]);
            b.resize(k, vec![1.0 / ny as f64; ny]);
            (pi, a, b)
        };
        if k >= nx {
            let a = (0..nx).map(|x| one_hot(nx, x)).collect();
            let b = (0..nx).map(|x| cond((0..ny).map(|y| self.j[x * ny + y]).collect())).collect();
            let (p, a, b) = fill(px.clone(), a, b);
            out.push(self.encode(&p, &a, &b));
        }
        if k >= ny {
            let a = (0..ny).map(|y| cond((0..nx).map(|x| self.j[x * ny + y]).collect())).collect();
            let b = (0..ny).map(|y| one_hot(ny, y)).collect();
            let (p, a, b) = fill(py.clone(), a, b);
            out.push(self.encode(&p, &a, &b));
        }
        if k >= nx * ny {
            let a = (0..nx * ny).map(|c| one_hot(nx, c / ny)).collect();
            let b = (0..nx * ny).map(|c| one_hot(ny, c % ny)).collect();
            let (p, a, b) = fill(self.j.to_vec(), a, b);
            out.push(self.encode(&p, &a, &b));
        }
        let (p, a, b) = fill(vec![1.0], vec![px], vec![py]);
        out.push(self.encode(&p, &a, &b));
        out
    }

    fn random_start(&self, seed: u64) -> Vec<f64> {
        let mut rng = rng_from_seed(seed);
        (0..self.dim()).map(|_| rng.random_range(-2.0..2.0)).collect()
    }
}

fn check_joint(j: &JointDistribution) -> Result<(usize, usize)> {
    match j.dims() {
        [a, b] => Ok((*a, *b)),
        d => Err(Error::dims(format!("expected a two-axis joint, got {} axes", d.len()))),
    }
}

/// Best feasible value over structured and random starts with |W| = k.
fn best_at_size(j: &JointDistribution, k: usize, cap: Option<f64>, tol: f64, restarts: usize, seed: u64) -> (Option<Candidate>, usize, usize) {
    let (nx, ny) = (j.dims()[0], j.dims()[1]);
    let prob = Problem { j: j.table(), nx, ny, k };
    let mut starts = prob.structured_starts();
    for i in 0..restarts {
        starts.push(prob.random_start(derive_seed(seed, i as u64)));
    }
    let total = starts.len();
    let results: Vec<Candidate> = starts
        .into_par_iter()
        .map(|z0| prob.solve(z0, cap, tol).1)
        .collect();
    let feasible: Vec<Candidate> = results.into_iter().filter(|c| prob.feasible(c, cap)).collect();
    let n = feasible.len();
    let best = feasible.into_iter().min_by(|a, b| a.i_xyw.total_cmp(&b.i_xyw));
    (best, n, total)
}

/// Upper bound on min I(XY;W) over X - W - Y with |W| ≤ w_size. Sizes 1..=w_size are
/// each searched with `restarts` random starts plus the structured ones, and the
/// running minimum is reported, so the value never increases with w_size.
pub fn wyner_common_information(
    j: &JointDistribution,
    w_size: usize,
    tol: f64,
    restarts: usize,
    seed: u64,
) -> Result<WynerResult> {
    constrained_wyner(j, w_size, None, tol, restarts, seed)
}

/// As [`wyner_common_information`] with the extra constraint I(X;W) ≤ `cap` bits.
pub fn constrained_wyner(
    j: &JointDistribution,
    w_size: usize,
    cap: Option<f64>,
    tol: f64,
    restarts: usize,
    seed: u64,
) -> Result<WynerResult> {
    check_joint(j)?;
    if w_size == 0 {
        return Err(Error::param("w_size must be at least 1"));
    }
    if !(tol > 0.0) {
        return Err(Error::param("tol must be positive"));
    }
    let mut per_size = Vec::with_capacity(w_size);
    let mut best: Option<Candidate> = None;
    let (mut feas, mut total) = (0, 0);
    for k in 1..=w_size {
        let (b, f, t) = best_at_size(j, k, cap, tol, restarts, derive_seed(seed, 1000 + k as u64));
        feas += f;
        total += t;
        if let Some(c) = b {
            if best.as_ref().map_or(true, |cur| c.i_xyw < cur.i_xyw) {
                best = Some(c);
            }
        }
        per_size.push(best.as_ref().map_or(f64::INFINITY, |c| c.i_xyw.max(0.0)));
    }
    Ok(WynerResult {
        value: best.as_ref().map_or(f64::INFINITY, |c| c.i_xyw.max(0.0)),
        w_size,
        per_size,
        feasible_starts: feas,
        total_starts: total,
        marginal_error: best.as_ref().map_or(f64::INFINITY, |c| c.err),
    })
}

pub fn default_w_size(j: &JointDistribution) -> usize {
    j.dims().iter().product()
}
