//! Symmetric-group characters and isotypic projectors on (C^d)^{⊗n}.

use std::collections::BTreeSet;

use rayon::prelude::*;

use super::{dim_p, to_f64, Partition};
use crate::error::{Error, Result};
use crate::quantum::linalg::{c, CMat};

/// Largest n for which projectors are built by summing over S_n.
pub const MAX_GROUP_N: usize = 6;

/// All permutations of 0..n in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut p: Vec<usize> = (0..n).collect();
    let mut out = vec![p.clone()];
    loop {
        let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| p[j] > p[i - 1]).unwrap();
        p.swap(i - 1, j);
        p[i..].reverse();
        out.push(p.clone());
    }
}

fn cycle_type(perm: &[usize]) -> Vec<usize> {
    let mut seen = vec![false; perm.len()];
    let mut out = Vec::new();
    for s in 0..perm.len() {
        if !seen[s] {
            let mut len = 0;
            let mut k = s;
            while !seen[k] {
                seen[k] = true;
                k = perm[k];
                len += 1;
            }
            out.push(len);
        }
    }
    out.sort_unstable_by(|a, b| b.cmp(a));
    out
}

/// χ_λ on the class of cycle type μ (Murnaghan–Nakayama on beta-sets).
fn mn(beta: &BTreeSet<usize>, mu: &[usize]) -> i64 {
    let Some((&k, rest)) = mu.split_first() else {
        return 1;
    };
    let mut total = 0;
    for &b in beta {
        if b < k || beta.contains(&(b - k)) {
            continue;
        }
        let between = beta.range(b - k + 1..b).count();
        let mut next = beta.clone();
        next.remove(&b);
        next.insert(b - k);
        let sign = if between % 2 == 0 { 1 } else { -1 };
        total += sign * mn(&next, rest);
    }
    total
}

/// Irreducible character χ_λ(π).
pub fn character(lam: &Partition, perm: &[usize]) -> Result<i64> {
    if perm.len() != lam.n() {
        return Err(Error::dims(format!("permutation of {} points for n = {}", perm.len(), lam.n())));
    }
    let l = lam.d();
    let beta: BTreeSet<usize> = lam.parts().iter().enumerate().map(|(i, &x)| x + l - 1 - i).collect();
    Ok(mn(&beta, &cycle_type(perm)))
}

/// P_π |i_1 … i_n⟩ = |i_{π⁻¹(1)} … i_{π⁻¹(n)}⟩, i.e. tensor factor k moves to slot π(k).
pub fn permutation_operator(perm: &[usize], d: usize) -> CMat {
    let n = perm.len();
    let dim = d.pow(n as u32);
    let mut m = CMat::zeros(dim, dim);
    let mut digits = vec![0usize; n];
    let mut out = vec![0usize; n];
    for idx in 0..dim {
        let mut rem = idx;
        for k in (0..n).rev() {
            digits[k] = rem % d;
            rem /= d;
        }
        for k in 0..n {
            out[perm[k]] = digits[k];
        }
        let j = out.iter().fold(0, |acc, &x| acc * d + x);
        m[(j, idx)] = c(1.0);
    }
    m
}

/// Π_λ = (dim P_λ / n!) Σ_π χ_λ(π) P_π on (C^d)^{⊗n}.
pub fn young_projector(lam: &Partition, d: usize) -> Result<CMat> {
    let n = lam.n();
    if n > MAX_GROUP_N {
        return Err(Error::param(format!("group averaging limited to n ≤ {MAX_GROUP_N}")));
    }
    let dim = d.pow(n as u32);
    // Partitions with more than d nonzero rows have zero projector.
    if lam.parts().iter().filter(|&&x| x > 0).count() > d {
        return Ok(CMat::zeros(dim, dim));
    }
    let perms = permutations(n);
    let scale = to_f64(&dim_p(lam)) / perms.len() as f64;
    let sum = perms
        .par_iter()
        .map(|p| {
            let chi = character(lam, p).expect("sizes match");
            permutation_operator(p, d) * c(chi as f64)
        })
        .reduce(|| CMat::zeros(dim, dim), |a, b| a + b);
    Ok(sum * c(scale))
}
