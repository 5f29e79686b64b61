//! Dense complex helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

/// Eigenvalues below this magnitude are treated as zero.
pub const EIG_TOL: f64 = 1e-10;

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn eye(d: usize) -> CMat {
    CMat::identity(d, d)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Largest entrywise modulus of a - a†.
pub fn hermitian_defect(a: &CMat) -> f64 {
    let mut m = 0.0f64;
    for i in 0..a.nrows() {
        for j in i..a.ncols() {
            m = m.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    m
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Eigenpairs of the Hermitian part, eigenvalues ascending.
pub fn hermitian_eigen(a: &CMat) -> (Vec<f64>, CMat) {
    let h = (a + a.adjoint()) * c(0.5);
    let e = SymmetricEigen::new(h);
    let mut idx: Vec<usize> = (0..e.eigenvalues.len()).collect();
    idx.sort_by(|&i, &j| e.eigenvalues[i].total_cmp(&e.eigenvalues[j]));
    let vals = idx.iter().map(|&i| e.eigenvalues[i]).collect();
    let vecs = CMat::from_fn(a.nrows(), idx.len(), |r, k| e.eigenvectors[(r, idx[k])]);
    (vals, vecs)
}

pub fn eigenvalues(a: &CMat) -> Vec<f64> {
    hermitian_eigen(a).0
}

/// f applied to a Hermitian matrix through its spectrum.
pub fn herm_fn(a: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (vals, vecs) = hermitian_eigen(a);
    let mut scaled = vecs.clone();
    for (k, &v) in vals.iter().enumerate() {
        let s = c(f(v));
        scaled.column_mut(k).iter_mut().for_each(|z| *z *= s);
    }
    scaled * vecs.adjoint()
}

/// Spectrum clamped to nonnegative values and renormalized to sum 1.
pub fn clamped_spectrum(a: &CMat) -> Vec<f64> {
    let mut v: Vec<f64> = eigenvalues(a).into_iter().map(|x| x.max(0.0)).collect();
    let s: f64 = v.iter().sum();
    if s > 0.0 {
        v.iter_mut().for_each(|x| *x /= s);
    }
    v
}

/// Von Neumann entropy in bits of a positive matrix with unit trace.
pub fn entropy(a: &CMat) -> f64 {
    crate::classical::entropy_of(&clamped_spectrum(a))
}

/// log2 on the support, 0 on the kernel.
pub fn log2m(a: &CMat) -> CMat {
    herm_fn(a, |x| if x > EIG_TOL { x.log2() } else { 0.0 })
}

pub fn sqrtm_psd(a: &CMat) -> CMat {
    herm_fn(a, |x| x.max(0.0).sqrt())
}

/// Uhlmann fidelity (Tr|√ρ√σ|)².
pub fn fidelity(rho: &CMat, sigma: &CMat) -> f64 {
    let s = sqrtm_psd(sigma);
    let m = &s * rho * &s;
    let t: f64 = eigenvalues(&m).into_iter().map(|x| x.max(0.0).sqrt()).sum();
    t * t
}

pub fn trace_norm(a: &CMat) -> f64 {
    eigenvalues(a).into_iter().map(f64::abs).sum()
}

/// Reindexing tables for a split of the factors into `keep` and the rest.
fn split_indices(dims: &[usize], keep: &[usize]) -> (usize, usize, Vec<usize>) {
    let n = dims.len();
    let rest: Vec<usize> = (0..n).filter(|i| !keep.contains(i)).collect();
    let dk: usize = keep.iter().map(|&i| dims[i]).product();
    let dr: usize = rest.iter().map(|&i| dims[i]).product();
    let total: usize = dims.iter().product();
    let mut strides = vec![1usize; n];
    for i in (0..n.saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    // table[k * dr + r] = full index
    let mut table = vec![0usize; total];
    let mut digits = vec![0usize; n];
    for full in 0..total {
        let mut rem = full;
        for i in 0..n {
            digits[i] = rem / strides[i];
            rem %= strides[i];
        }
        let mut k = 0;
        for &i in keep {
            k = k * dims[i] + digits[i];
        }
        let mut r = 0;
        for &i in &rest {
            r = r * dims[i] + digits[i];
        }
        table[k * dr + r] = full;
    }
    (dk, dr, table)
}

fn check_keep(dims: &[usize], keep: &[usize]) -> crate::Result<()> {
    if keep.windows(2).any(|w| w[0] >= w[1]) || keep.iter().any(|&k| k >= dims.len()) {
        return Err(crate::Error::dims(format!("keep set {keep:?} invalid for {} factors", dims.len())));
    }
    Ok(())
}

/// Partial trace of an operator on ⊗ dims, keeping the (sorted) factors in `keep`.
pub fn partial_trace(a: &CMat, dims: &[usize], keep: &[usize]) -> crate::Result<CMat> {
    check_keep(dims, keep)?;
    let total: usize = dims.iter().product();
    if a.nrows() != total || a.ncols() != total {
        return Err(crate::Error::dims(format!("operator is {}x{}, dims give {total}", a.nrows(), a.ncols())));
    }
    let (dk, dr, t) = split_indices(dims, keep);
    Ok(CMat::from_fn(dk, dk, |i, j| (0..dr).map(|r| a[(t[i * dr + r], t[j * dr + r])]).sum()))
}

/// Reduced state of a pure vector on ⊗ dims.
pub fn reduce_pure(psi: &CVec, dims: &[usize], keep: &[usize]) -> crate::Result<CMat> {
    check_keep(dims, keep)?;
    let total: usize = dims.iter().product();
    if psi.len() != total {
        return Err(crate::Error::dims(format!("vector has length {}, dims give {total}", psi.len())));
    }
    let (dk, dr, t) = split_indices(dims, keep);
    let m = CMat::from_fn(dk, dr, |k, r| psi[t[k * dr + r]]);
    Ok(&m * m.adjoint())
}

fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    })
}

/// Haar-distributed isometry C^cols → C^rows (QR of a Ginibre matrix with phase fix).
pub fn haar_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    assert!(rows >= cols);
    let qr = gaussian_matrix(rows, cols, rng).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for k in 0..cols {
        let d = r[(k, k)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { c(1.0) };
        q.column_mut(k).iter_mut().for_each(|z| *z *= ph);
    }
    q
}

pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    haar_isometry(d, d, rng)
}

/// Random density matrix G G† / Tr with G a d×k Ginibre matrix.
pub fn random_density_matrix<R: Rng + ?Sized>(d: usize, k: usize, rng: &mut R) -> CMat {
    let g = gaussian_matrix(d, k, rng);
    let m = &g * g.adjoint();
    let t = m.trace().re;
    m / c(t)
}

/// Haar-random unit vector.
pub fn random_pure<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CVec {
    let g = gaussian_matrix(d, 1, rng);
    let n = g.norm();
    CVec::from_iterator(d, g.iter().map(|z| z / n))
}

/// Polar factor V(V†V)^{-1/2}, the closest isometry.
pub fn polar_isometry(a: &CMat) -> CMat {
    let g = a.adjoint() * a;
    a * herm_fn(&g, |x| if x > 1e-300 { 1.0 / x.sqrt() } else { 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn partial_trace_of_product_recovers_factors() {
        let mut rng = rng_from_seed(1);
        let a = random_density_matrix(2, 2, &mut rng);
        let b = random_density_matrix(3, 3, &mut rng);
        let ab = kron(&a, &b);
        assert!(max_abs_diff(&partial_trace(&ab, &[2, 3], &[0]).unwrap(), &a) < 1e-12);
        assert!(max_abs_diff(&partial_trace(&ab, &[2, 3], &[1]).unwrap(), &b) < 1e-12);
        assert!(max_abs_diff(&partial_trace(&ab, &[2, 3], &[0, 1]).unwrap(), &ab) < 1e-15);
        assert!(partial_trace(&ab, &[3, 3], &[0]).is_err());
        assert!(partial_trace(&ab, &[2, 3], &[1, 0]).is_err());
    }

    #[test]
    fn reduce_pure_matches_partial_trace() {
        let mut rng = rng_from_seed(2);
        let psi = random_pure(12, &mut rng);
        let rho = &psi * psi.adjoint();
        for keep in [&[0][..], &[1], &[2], &[0, 2], &[1, 2]] {
            let a = reduce_pure(&psi, &[2, 3, 2], keep).unwrap();
            let b = partial_trace(&rho, &[2, 3, 2], keep).unwrap();
            assert!(max_abs_diff(&a, &b) < 1e-12);
        }
    }

    #[test]
    fn haar_isometry_is_isometric() {
        let mut rng = rng_from_seed(3);
        let v = haar_isometry(6, 3, &mut rng);
        assert!(max_abs_diff(&(v.adjoint() * &v), &eye(3)) < 1e-12);
        let u = haar_unitary(4, &mut rng);
        assert!(max_abs_diff(&(&u * u.adjoint()), &eye(4)) < 1e-12);
    }

    #[test]
    fn fidelity_and_functions() {
        let mut rng = rng_from_seed(4);
        let r = random_density_matrix(3, 3, &mut rng);
        assert!((fidelity(&r, &r) - 1.0).abs() < 1e-9);
        let s = sqrtm_psd(&r);
        assert!(max_abs_diff(&(&s * &s), &r) < 1e-12);
        let p = CMat::from_diagonal(&CVec::from_vec(vec![c(1.0), c(0.0)]));
        let q = CMat::from_diagonal(&CVec::from_vec(vec![c(0.0), c(1.0)]));
        assert!(fidelity(&p, &q).abs() < 1e-12);
        assert!((trace_norm(&(&p - &q)) - 2.0).abs() < 1e-12);
    }
}
