//! Flat isometries, the random-split decoupling simulation, and the
//! permutation-covariance block test for tensor-power isometries.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::symmetric::{permutation_operator, permutations, young_projector};
use super::{enumerate_partitions, Partition};
use crate::error::{Error, Result};
use crate::quantum::linalg::{self, c, CMat, CVec};
use crate::quantum::QuantumChannel;
use crate::rng::trial_rng;

const ISOMETRY_TOL: f64 = 1e-9;
const FLAT_TOL: f64 = 1e-6;
const BLOCK_TOL: f64 = 1e-8;
const ROUNDOFF: f64 = 1e-14;

/// V: A → B ⊗ E stored as a (d_B·d_E) × d_A matrix, row index b·d_E + e.
#[derive(Clone, Debug)]
pub struct FlatIsometry {
    matrix: CMat,
    d_b: usize,
    d_e: usize,
}

impl FlatIsometry {
    pub fn new(matrix: CMat, d_b: usize, d_e: usize) -> Result<Self> {
        if d_b == 0 || d_e == 0 || matrix.nrows() != d_b * d_e || matrix.ncols() == 0 {
            return Err(Error::dims(format!(
                "{}x{} matrix cannot map into {d_b}x{d_e}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let dev = linalg::max_abs_diff(&(matrix.adjoint() * &matrix), &linalg::eye(matrix.ncols()));
        if dev > ISOMETRY_TOL {
            return Err(Error::param(format!("V†V deviates from identity by {dev:.3e}")));
        }
        Ok(Self { matrix, d_b, d_e })
    }

    /// |a⟩ ↦ |a⟩_B|a⟩_E on a qubit.
    pub fn ghz_copy() -> Self {
        let mut m = CMat::zeros(4, 2);
        m[(0, 0)] = c(1.0);
        m[(3, 1)] = c(1.0);
        Self { matrix: m, d_b: 2, d_e: 2 }
    }

    /// Identity A → B with a one-dimensional environment.
    pub fn identity(d: usize) -> Self {
        Self { matrix: linalg::eye(d), d_b: d, d_e: 1 }
    }

    pub fn haar<R: rand::Rng + ?Sized>(d_a: usize, d_b: usize, d_e: usize, rng: &mut R) -> Result<Self> {
        if d_a == 0 || d_a > d_b * d_e {
            return Err(Error::dims(format!("no isometry from {d_a} into {d_b}x{d_e}")));
        }
        Ok(Self { matrix: linalg::haar_isometry(d_b * d_e, d_a, rng), d_b, d_e })
    }

    /// V^{⊗k} with rows regrouped as B₁…B_k E₁…E_k.
    pub fn tensor_power(&self, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::param("tensor power needs k ≥ 1"));
        }
        let mut m = self.matrix.clone();
        for _ in 1..k {
            m = linalg::kron(&m, &self.matrix);
        }
        let m = regroup_rows(&m, self.d_b, self.d_e, k);
        Ok(Self { matrix: m, d_b: self.d_b.pow(k as u32), d_e: self.d_e.pow(k as u32) })
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn d_a(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn d_b(&self) -> usize {
        self.d_b
    }

    pub fn d_e(&self) -> usize {
        self.d_e
    }

    /// ψ = (I ⊗ V)Φ on R ⊗ B ⊗ E.
    fn output_vector(&self) -> CVec {
        let (da, db, de) = (self.d_a(), self.d_b, self.d_e);
        let s = (da as f64).sqrt();
        CVec::from_fn(da * db * de, |i, _| {
            let (r, be) = (i / (db * de), i % (db * de));
            self.matrix[(be, r)] / s
        })
    }
}

/// Rows of a k-fold Kronecker power ordered (b₁e₁)(b₂e₂)… → b₁…b_k e₁…e_k.
fn regroup_rows(m: &CMat, d_b: usize, d_e: usize, k: usize) -> CMat {
    let (bk, ek) = (d_b.pow(k as u32), d_e.pow(k as u32));
    let mut out = CMat::zeros(bk * ek, m.ncols());
    for row in 0..m.nrows() {
        let (mut rem, mut b, mut e, mut pb, mut pe) = (row, 0, 0, 1, 1);
        for _ in 0..k {
            let pair = rem % (d_b * d_e);
            rem /= d_b * d_e;
            b += (pair / d_e) * pb;
            e += (pair % d_e) * pe;
            pb *= d_b;
            pe *= d_e;
        }
        out.set_row(b * ek + e, &m.row(row));
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatReport {
    pub flat: bool,
    /// Largest entrywise deviation of ψ^R, ψ^B, ψ^E from maximally mixed.
    pub max_deviation: f64,
}

pub fn verify_flat(v: &FlatIsometry) -> Result<FlatReport> {
    let psi = v.output_vector();
    let dims = [v.d_a(), v.d_b, v.d_e];
    let mut dev = 0.0f64;
    for k in 0..3 {
        let rho = linalg::reduce_pure(&psi, &dims, &[k])?;
        let mixed = linalg::eye(dims[k]) / c(dims[k] as f64);
        dev = dev.max(linalg::max_abs_diff(&rho, &mixed));
    }
    Ok(FlatReport { flat: dev <= FLAT_TOL, max_deviation: dev })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecouplingEstimate {
    pub d_m: usize,
    pub d_k: usize,
    /// Mean over trials of F(ψ^{RK}, I/D_R ⊗ I/D_K).
    pub mean_fidelity: f64,
    pub std_err: f64,
    /// D_M / √(D_R D_B / D_E)
    pub gamma: f64,
    /// 4γ^{1/4}
    pub printed_error_bound: f64,
    pub trials: usize,
}

/// Fidelity of ψ^{RK} with the maximally mixed state after a Haar unitary on
/// B = M ⊗ K (index m·D_K + k); M is sent, K is matched against shared ebits.
pub fn flat_decoupling_sim(v: &FlatIsometry, d_k: usize, d_m: usize, trials: usize, seed: u64) -> Result<DecouplingEstimate> {
    let (da, db, de) = (v.d_a(), v.d_b, v.d_e);
    if d_k == 0 || d_m == 0 || d_k * d_m != db {
        return Err(Error::dims(format!("D_K·D_M = {d_k}·{d_m} does not factor D_B = {db}")));
    }
    if trials == 0 {
        return Err(Error::param("trials must be positive"));
    }
    let psi = v.output_vector();
    // Columns indexed by (r, e), rows by b.
    let block = CMat::from_fn(db, da * de, |b, re| psi[(re / de * db + b) * de + re % de]);
    let fids: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let u = linalg::haar_unitary(db, &mut trial_rng(seed, t as u64));
            let rotated = &u * &block;
            rk_fidelity(&rotated, da, d_m, d_k, de)
        })
        .collect();
    let mean = fids.iter().sum::<f64>() / trials as f64;
    let var = if trials > 1 {
        fids.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (trials - 1) as f64
    } else {
        0.0
    };
    let gamma = d_m as f64 / (da as f64 * db as f64 / de as f64).sqrt();
    Ok(DecouplingEstimate {
        d_m,
        d_k,
        mean_fidelity: mean,
        std_err: (var / trials as f64).sqrt(),
        gamma,
        printed_error_bound: 4.0 * gamma.powf(0.25),
        trials,
    })
}

fn rk_fidelity(rotated: &CMat, da: usize, d_m: usize, d_k: usize, de: usize) -> f64 {
    // ψ^{RK}[(r,k),(r',k')] = Σ_{m,e} ψ(r,m,k,e) ψ*(r',m,k',e)
    let dim = da * d_k;
    let mut rho = CMat::zeros(dim, dim);
    for m in 0..d_m {
        for e in 0..de {
            let col = CVec::from_fn(dim, |rk, _| {
                let (r, k) = (rk / d_k, rk % d_k);
                rotated[(m * d_k + k, r * de + e)]
            });
            rho += &col * col.adjoint();
        }
    }
    // Round-off eigenvalues of order 1e-17 would otherwise add ~1e-9 each through the square root.
    let root: f64 = linalg::eigenvalues(&rho).iter().filter(|&&x| x > ROUNDOFF).map(|x| x.sqrt()).sum();
    (root * root / dim as f64).min(1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecouplingSweep {
    pub points: Vec<DecouplingEstimate>,
    pub monotone: bool,
    /// Whether 4γ^{1/4} increases along the sweep while fidelity improves.
    pub bound_grows_with_d_m: bool,
}

/// Runs the simulation for every divisor D_M of D_B, ascending. Trials share
/// seeds across points, so the unitaries coincide and the curve is monotone per trial.
pub fn decoupling_sweep(v: &FlatIsometry, trials: usize, seed: u64) -> Result<DecouplingSweep> {
    let db = v.d_b;
    let points = (1..=db)
        .filter(|m| db % m == 0)
        .map(|m| flat_decoupling_sim(v, db / m, m, trials, seed))
        .collect::<Result<Vec<_>>>()?;
    let monotone = points.windows(2).all(|w| w[1].mean_fidelity >= w[0].mean_fidelity - 1e-12);
    let bound_grows_with_d_m = points.windows(2).all(|w| w[1].printed_error_bound > w[0].printed_error_bound);
    Ok(DecouplingSweep { points, monotone, bound_grows_with_d_m })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockReport {
    pub lambda_a: Vec<usize>,
    pub lambda_b: Vec<usize>,
    pub lambda_e: Vec<usize>,
    pub s_max: f64,
    pub s_min: f64,
    pub flat: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovarianceReport {
    pub n: usize,
    pub commutes: bool,
    pub max_commutator: f64,
    pub blocks: Vec<BlockReport>,
    pub all_flat: bool,
}

/// Computational basis vectors of (C^d)^{⊗n} whose letter counts equal λ.
fn weight_vectors(lam: &Partition, d: usize, n: usize) -> Vec<usize> {
    (0..d.pow(n as u32))
        .filter(|&idx| {
            let mut counts = vec![0usize; d];
            let mut rem = idx;
            for _ in 0..n {
                counts[rem % d] += 1;
                rem /= d;
            }
            counts == lam.parts()
        })
        .collect()
}

/// Orthonormal basis of the range of a PSD matrix.
fn range_basis(m: &CMat) -> CMat {
    let (vals, vecs) = linalg::hermitian_eigen(&(m * m.adjoint()));
    let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > 1e-10).collect();
    CMat::from_fn(m.nrows(), keep.len(), |r, k| vecs[(r, keep[k])])
}

/// Checks that U^{⊗n} commutes with the S_n action and that each block
/// (Π_{λ_B} ⊗ Π_{λ_E}) U^{⊗n} restricted to the highest-weight copy of P_{λ_A}
/// is proportional to an isometry.
pub fn verify_permutation_covariance(ch: &QuantumChannel, n: usize) -> Result<CovarianceReport> {
    if n == 0 || n > 3 {
        return Err(Error::param("covariance check supports 1 ≤ n ≤ 3"));
    }
    let (da, db, de) = (ch.d_in(), ch.d_out(), ch.d_env());
    let v = FlatIsometry { matrix: ch.stinespring(), d_b: db, d_e: de }.tensor_power(n)?;
    let vn = v.matrix;

    let max_commutator = permutations(n)
        .par_iter()
        .map(|p| {
            let lhs = &vn * permutation_operator(p, da);
            let rhs = linalg::kron(&permutation_operator(p, db), &permutation_operator(p, de)) * &vn;
            linalg::max_abs_diff(&lhs, &rhs)
        })
        .reduce(|| 0.0, f64::max);

    let proj_b: Vec<_> = enumerate_partitions(n, db)?
        .into_iter()
        .map(|l| young_projector(&l, db).map(|p| (l, p)))
        .collect::<Result<_>>()?;
    let proj_e: Vec<_> = enumerate_partitions(n, de)?
        .into_iter()
        .map(|l| young_projector(&l, de).map(|p| (l, p)))
        .collect::<Result<_>>()?;

    let mut blocks = Vec::new();
    for la in enumerate_partitions(n, da)? {
        let pa = young_projector(&la, da)?;
        let wv = weight_vectors(&la, da, n);
        if wv.is_empty() {
            continue;
        }
        let cols = CMat::from_fn(pa.nrows(), wv.len(), |r, k| pa[(r, wv[k])]);
        let input = range_basis(&cols);
        if input.ncols() == 0 {
            continue;
        }
        let mapped = &vn * &input;
        for (lb, pb) in &proj_b {
            for (le, pe) in &proj_e {
                let m = linalg::kron(pb, pe) * &mapped;
                let sv = m.singular_values();
                let s_max = sv.iter().copied().fold(0.0, f64::max);
                if s_max <= BLOCK_TOL {
                    continue;
                }
                let s_min = sv.iter().copied().fold(f64::INFINITY, f64::min);
                blocks.push(BlockReport {
                    lambda_a: la.parts().to_vec(),
                    lambda_b: lb.parts().to_vec(),
                    lambda_e: le.parts().to_vec(),
                    s_max,
                    s_min,
                    flat: s_max - s_min <= BLOCK_TOL,
                });
            }
        }
    }
    let all_flat = blocks.iter().all(|b| b.flat);
    Ok(CovarianceReport { n, commutes: max_commutator <= BLOCK_TOL, max_commutator, blocks, all_flat })
}
