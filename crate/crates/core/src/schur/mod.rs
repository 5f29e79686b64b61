//! Schur–Weyl bookkeeping: partitions, irrep dimensions, Schur polynomials,
//! block masses of tensor-power states, and flat isometries.

mod flat;
mod symmetric;

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::DensityMatrix;

pub use flat::{
    decoupling_sweep, flat_decoupling_sim, verify_flat, verify_permutation_covariance, BlockReport, CovarianceReport,
    DecouplingEstimate, DecouplingSweep, FlatIsometry, FlatReport,
};
pub use symmetric::{character, permutation_operator, permutations, young_projector};

/// λ₁ ≥ … ≥ λ_d ≥ 0, padded with zeros to length d.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Partition {
    parts: Vec<usize>,
}

impl Partition {
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::param("a partition needs at least one row"));
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::param(format!("{parts:?} is not nonincreasing")));
        }
        Ok(Self { parts })
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn n(&self) -> usize {
        self.parts.iter().sum()
    }

    pub fn d(&self) -> usize {
        self.parts.len()
    }

    /// λ / n.
    pub fn normalized(&self) -> Vec<f64> {
        let n = self.n().max(1) as f64;
        self.parts.iter().map(|&x| x as f64 / n).collect()
    }

    fn shifted(&self) -> Vec<usize> {
        let d = self.d();
        self.parts.iter().enumerate().map(|(i, &l)| l + d - 1 - i).collect()
    }
}

/// All partitions of n with at most d rows, in descending lexicographic order.
pub fn enumerate_partitions(n: usize, d: usize) -> Result<Vec<Partition>> {
    if d == 0 {
        return Err(Error::param("d must be at least 1"));
    }
    fn rec(left: usize, max: usize, rows: usize, cur: &mut Vec<usize>, out: &mut Vec<Partition>) {
        if rows == 0 {
            if left == 0 {
                out.push(Partition { parts: cur.clone() });
            }
            return;
        }
        for p in (0..=left.min(max)).rev() {
            // the remaining rows can hold at most p each
            if p * rows < left {
                break;
            }
            cur.push(p);
            rec(left - p, p, rows - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, d, &mut Vec::with_capacity(d), &mut out);
    Ok(out)
}

fn factorial(k: usize) -> BigUint {
    (1..=k).fold(BigUint::one(), |acc, i| acc * i)
}

fn vandermonde(l: &[usize]) -> BigUint {
    let mut v = BigUint::one();
    for i in 0..l.len() {
        for j in i + 1..l.len() {
            v *= l[i] - l[j];
        }
    }
    v
}

/// Dimension of the unitary-group irrep Q_λ^d (Weyl dimension formula).
pub fn dim_q(lam: &Partition) -> BigUint {
    let denom = (1..lam.d()).fold(BigUint::one(), |acc, m| acc * factorial(m));
    vandermonde(&lam.shifted()) / denom
}

/// Dimension of the symmetric-group irrep P_λ.
pub fn dim_p(lam: &Partition) -> BigUint {
    let l = lam.shifted();
    let denom = l.iter().fold(BigUint::one(), |acc, &x| acc * factorial(x));
    factorial(lam.n()) * vandermonde(&l) / denom
}

pub fn to_f64(x: &BigUint) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}

/// Complete homogeneous symmetric polynomials h_0..=h_k of r.
fn complete_homogeneous(r: &[f64], k: usize) -> Vec<f64> {
    let mut h = vec![0.0; k + 1];
    h[0] = 1.0;
    for &x in r {
        for j in 1..=k {
            h[j] += x * h[j - 1];
        }
    }
    h
}

fn determinant(mut m: Vec<Vec<f64>>) -> f64 {
    let n = m.len();
    let mut det = 1.0;
    for col in 0..n {
        let piv = (col..n).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs())).unwrap();
        if m[piv][col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            m.swap(piv, col);
            det = -det;
        }
        det *= m[col][col];
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            for k in col..n {
                m[row][k] -= f * m[col][k];
            }
        }
    }
    det
}

/// s_λ(r) = det[h_{λ_i − i + j}(r)] (Jacobi–Trudi).
pub fn schur_polynomial_jacobi_trudi(lam: &Partition, r: &[f64]) -> Result<f64> {
    check_spectrum(lam, r)?;
    let d = lam.d();
    let h = complete_homogeneous(r, lam.parts[0] + d);
    let m = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| {
                    let k = lam.parts[i] as isize - i as isize + j as isize;
                    if k < 0 {
                        0.0
                    } else {
                        h[k as usize]
                    }
                })
                .collect()
        })
        .collect();
    Ok(determinant(m))
}

fn check_spectrum(lam: &Partition, r: &[f64]) -> Result<()> {
    if r.len() != lam.d() {
        return Err(Error::dims(format!("{} variables for a {}-row partition", r.len(), lam.d())));
    }
    if r.iter().any(|&x| !(x >= 0.0)) {
        return Err(Error::param("spectrum must be nonnegative"));
    }
    Ok(())
}

/// s_λ(r) by the branching rule s_λ(r₁..r_d) = Σ_{μ ≺ λ} s_μ(r₁..r_{d−1}) r_d^{|λ|−|μ|}.
/// Every term is nonnegative, so there is no cancellation.
pub fn schur_polynomial(lam: &Partition, r: &[f64]) -> Result<f64> {
    check_spectrum(lam, r)?;
    let mut memo = HashMap::new();
    Ok(branch(&lam.parts, r, &mut memo))
}

fn branch(lam: &[usize], r: &[f64], memo: &mut HashMap<Vec<usize>, f64>) -> f64 {
    let d = lam.len();
    if d == 1 {
        return r[0].powi(lam[0] as i32);
    }
    if lam[d - 1] > 0 && r[d - 1] == 0.0 {
        return 0.0;
    }
    if let Some(&v) = memo.get(lam) {
        return v;
    }
    // μ interlaces λ: λ_{i+1} ≤ μ_i ≤ λ_i for i < d−1.
    let n: usize = lam.iter().sum();
    let mut total = 0.0;
    let mut mu = vec![0usize; d - 1];
    fn walk(
        i: usize,
        lam: &[usize],
        mu: &mut Vec<usize>,
        r: &[f64],
        n: usize,
        total: &mut f64,
        memo: &mut HashMap<Vec<usize>, f64>,
    ) {
        let d = lam.len();
        if i == d - 1 {
            let m: usize = mu.iter().sum();
            let w = r[d - 1].powi((n - m) as i32);
            if w > 0.0 || n == m {
                *total += branch(mu, &r[..d - 1], memo) * if n == m { 1.0 } else { w };
            }
            return;
        }
        for v in lam[i + 1]..=lam[i] {
            mu[i] = v;
            walk(i + 1, lam, mu, r, n, total, memo);
        }
    }
    let mut inner = HashMap::new();
    walk(0, lam, &mut mu, r, n, &mut total, &mut inner);
    memo.insert(lam.to_vec(), total);
    total
}

/// Eigenvalues of ρ in nonincreasing order, clamped at zero.
fn spectrum_of(rho: &DensityMatrix) -> Vec<f64> {
    let mut r: Vec<f64> = rho.spectrum().into_iter().map(|x| x.max(0.0)).collect();
    r.sort_by(|a, b| b.total_cmp(a));
    r
}

/// Tr Π_λ ρ^{⊗n} = s_λ(spec ρ) · dim P_λ.
pub fn block_mass(lam: &Partition, rho: &DensityMatrix, n: usize) -> Result<f64> {
    if lam.n() != n || lam.d() != rho.dim() {
        return Err(Error::dims(format!("partition {:?} does not match n = {n}, d = {}", lam.parts, rho.dim())));
    }
    Ok(schur_polynomial(lam, &spectrum_of(rho))? * to_f64(&dim_p(lam)))
}

/// D(p‖q) in nats; +∞ when p is not absolutely continuous.
fn kl_nats(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(&a, _)| a > 0.0)
        .map(|(&a, &b)| if b > 0.0 { a * (a / b).ln() } else { f64::INFINITY })
        .sum()
}

/// (lower, upper) of e^{−nD(λ̄‖r)}·(n+d)^{−d(d+1)/2} ≤ mass ≤ e^{−nD(λ̄‖r)}·(n+d)^{d(d−1)/2}.
pub fn block_mass_sandwich(lam: &Partition, r: &[f64]) -> (f64, f64) {
    let (n, d) = (lam.n() as f64, lam.d() as f64);
    let base = (-n * kl_nats(&lam.normalized(), r)).exp();
    (base * (n + d).powf(-d * (d + 1.0) / 2.0), base * (n + d).powf(d * (d - 1.0) / 2.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassTable {
    pub n: usize,
    pub spectrum: Vec<f64>,
    pub blocks: Vec<MassEntry>,
    pub total: f64,
    pub sandwich_ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassEntry {
    pub partition: Vec<usize>,
    pub dim_q: String,
    pub dim_p: String,
    pub mass: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Block masses of ρ^{⊗n} over every partition, with the sandwich bounds.
pub fn block_masses(rho: &DensityMatrix, n: usize) -> Result<MassTable> {
    let r = spectrum_of(rho);
    let mut blocks = Vec::new();
    let mut ok = true;
    for lam in enumerate_partitions(n, rho.dim())? {
        let mass = block_mass(&lam, rho, n)?;
        let (lower, upper) = block_mass_sandwich(&lam, &r);
        ok &= mass >= lower * (1.0 - 1e-9) && mass <= upper * (1.0 + 1e-9);
        blocks.push(MassEntry {
            partition: lam.parts.clone(),
            dim_q: dim_q(&lam).to_string(),
            dim_p: dim_p(&lam).to_string(),
            mass,
            lower,
            upper,
        });
    }
    let total = blocks.iter().map(|b| b.mass).sum();
    Ok(MassTable { n, spectrum: r, blocks, total, sandwich_ok: ok })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypicalMass {
    pub mass: f64,
    /// 1 − (n+d)^{d(d+1)/2} e^{−nδ²/2}
    pub lower_bound: f64,
}

/// Σ block_mass over λ with ‖λ/n − spec ρ‖₁ ≤ δ.
pub fn typical_partition_mass(rho: &DensityMatrix, n: usize, delta: f64) -> Result<TypicalMass> {
    if !(delta > 0.0) {
        return Err(Error::param("delta must be positive"));
    }
    let r = spectrum_of(rho);
    let mut mass = 0.0;
    for lam in enumerate_partitions(n, rho.dim())? {
        let dist: f64 = lam.normalized().iter().zip(&r).map(|(a, b)| (a - b).abs()).sum();
        if dist <= delta + 1e-12 {
            mass += block_mass(&lam, rho, n)?;
        }
    }
    let d = rho.dim() as f64;
    let lower_bound = 1.0 - (n as f64 + d).powf(d * (d + 1.0) / 2.0) * (-(n as f64) * delta * delta / 2.0).exp();
    Ok(TypicalMass { mass, lower_bound })
}
