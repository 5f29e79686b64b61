//! Shannon capacity by alternating maximization, and the maximal output
//! entropy, both with duality-gap certificates.

use serde::{Deserialize, Serialize};

use crate::classical::{entropy_of, ClassicalChannel, Distribution};
use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 200_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacityResult {
    pub capacity: f64,
    pub argmax: Distribution,
    /// Certified upper bound minus reported value.
    pub gap: f64,
    pub iterations: usize,
}

/// D(N(.|x) || q) in bits for every x.
fn divergences(ch: &ClassicalChannel, q: &[f64]) -> Vec<f64> {
    (0..ch.input_size())
        .map(|x| {
            ch.row(x)
                .iter()
                .zip(q)
                .filter(|(&n, _)| n > 0.0)
                .map(|(&n, &qy)| n * (n / qy).log2())
                .sum::<f64>()
        })
        .collect()
}

fn push(ch: &ClassicalChannel, p: &[f64]) -> Vec<f64> {
    let mut q = vec![0.0; ch.output_size()];
    for (x, &px) in p.iter().enumerate() {
        if px > 0.0 {
            for (qy, &n) in q.iter_mut().zip(ch.row(x)) {
                *qy += px * n;
            }
        }
    }
    q
}

/// C = max_p I(X;Y). Stops once max_x D(N(.|x)||q) - I(p) <= tol; that
/// difference bounds the distance to the optimum.
pub fn capacity(ch: &ClassicalChannel, tol: f64) -> Result<CapacityResult> {
    if !(tol > 0.0) {
        return Err(Error::param("tol must be positive"));
    }
    let nx = ch.input_size();
    let mut p = vec![1.0 / nx as f64; nx];
    let mut best = (0.0, p.clone());
    for it in 0..MAX_ITERATIONS {
        let q = push(ch, &p);
        let d = divergences(ch, &q);
        let lower: f64 = p.iter().zip(&d).map(|(a, b)| a * b).sum();
        let upper = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if lower > best.0 {
            best = (lower, p.clone());
        }
        if upper - lower <= tol {
            return Ok(CapacityResult {
                capacity: lower.max(0.0),
                argmax: Distribution::new(p)?,
                gap: (upper - lower).max(0.0),
                iterations: it,
            });
        }
        let mut z = 0.0;
        for (px, dx) in p.iter_mut().zip(&d) {
            *px *= dx.exp2();
            z += *px;
        }
        p.iter_mut().for_each(|v| *v /= z);
    }
    Err(Error::NoConvergence { iterations: MAX_ITERATIONS, best: best.0 })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaxEntropyResult {
    pub value: f64,
    pub argmax: Distribution,
    pub gap: f64,
    pub iterations: usize,
}

/// max_p H(N(p)) by exponentiated-gradient ascent. H(N(p)) is concave in p, so
/// max_x g_x - <p, g> bounds the suboptimality, g the gradient.
pub fn max_output_entropy(ch: &ClassicalChannel, tol: f64) -> Result<MaxEntropyResult> {
    if !(tol > 0.0) {
        return Err(Error::param("tol must be positive"));
    }
    let nx = ch.input_size();
    let mut p = vec![1.0 / nx as f64; nx];
    let mut step = 1.0;
    let grad = |q: &[f64]| -> Vec<f64> {
        (0..nx)
            .map(|x| {
                -ch.row(x)
                    .iter()
                    .zip(q)
                    .filter(|(&n, _)| n > 0.0)
                    .map(|(&n, &qy)| n * qy.log2())
                    .sum::<f64>()
            })
            .collect()
    };
    let mut q = push(ch, &p);
    let mut h = entropy_of(&q);
    for it in 0..MAX_ITERATIONS {
        let g = grad(&q);
        let avg: f64 = p.iter().zip(&g).map(|(a, b)| a * b).sum();
        let gmax = g.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if gmax - avg <= tol {
            return Ok(MaxEntropyResult { value: h, argmax: Distribution::new(p)?, gap: gmax - avg, iterations: it });
        }
        loop {
            let mut cand: Vec<f64> = p
                .iter()
                .zip(&g)
                .map(|(&px, &gx)| px * (step * std::f64::consts::LN_2 * (gx - gmax)).exp())
                .collect();
            let z: f64 = cand.iter().sum();
            cand.iter_mut().for_each(|v| *v /= z);
            let qc = push(ch, &cand);
            let hc = entropy_of(&qc);
            if hc >= h - 1e-15 || step < 1e-12 {
                p = cand;
                q = qc;
                h = hc;
                step = (step * 1.5).min(4.0);
                break;
            }
            step *= 0.5;
        }
    }
    Err(Error::NoConvergence { iterations: MAX_ITERATIONS, best: h })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::h2;

    #[test]
    fn analytic_capacities() {
        for d in [2, 3, 5] {
            let c = capacity(&ClassicalChannel::identity(d), 1e-12).unwrap();
            assert!((c.capacity - (d as f64).log2()).abs() < 1e-12);
        }
        let k = ClassicalChannel::constant(3, &Distribution::new(vec![0.2, 0.8]).unwrap());
        assert!(capacity(&k, 1e-12).unwrap().capacity.abs() < 1e-12);
        let c = capacity(&ClassicalChannel::bsc(0.11).unwrap(), 1e-10).unwrap();
        assert!((c.capacity - (1.0 - h2(0.11))).abs() < 1e-6);
        let c = capacity(&ClassicalChannel::bec(0.3).unwrap(), 1e-10).unwrap();
        assert!((c.capacity - 0.7).abs() < 1e-6);
    }

    #[test]
    fn asymmetric_channel_certificate() {
        // Z channel: closed form log2(1 + (1-p) p^(p/(1-p))) for 1 -> 0 flips with prob p
        let p: f64 = 0.3;
        let z = ClassicalChannel::new(vec![vec![1.0, 0.0], vec![p, 1.0 - p]]).unwrap();
        let c = capacity(&z, 1e-10).unwrap();
        let exact = (1.0 + (1.0 - p) * p.powf(p / (1.0 - p))).log2();
        assert!((c.capacity - exact).abs() < 1e-8, "{} vs {exact}", c.capacity);
        let i = z.mutual_information(&c.argmax).unwrap();
        assert!((i - c.capacity).abs() <= 1e-10);
    }

    #[test]
    fn output_entropy_maximum() {
        let z = ClassicalChannel::new(vec![vec![1.0, 0.0], vec![0.3, 0.7]]).unwrap();
        let m = max_output_entropy(&z, 1e-10).unwrap();
        // output (1,0) mixed with (0.3, 0.7) reaches the uniform output
        assert!((m.value - 1.0).abs() < 1e-9);
        let bec = ClassicalChannel::bec(0.2).unwrap();
        let m = max_output_entropy(&bec, 1e-10).unwrap();
        assert!((m.value - (h2(0.2) + 0.8)).abs() < 1e-9);
    }
}
