//! Density matrices and pure states on tensor products.

use num_complex::Complex64;

use super::linalg::{self, c, CMat, CVec, EIG_TOL};
use crate::error::{Error, Result};

/// Largest total dimension accepted for dense operators.
pub const MAX_DENSE_DIM: usize = 1 << 12;
pub const STATE_TOL: f64 = 1e-9;

fn check_dims(dims: &[usize], total: usize) -> Result<()> {
    if dims.is_empty() || dims.iter().any(|&d| d == 0) {
        return Err(Error::dims("factor dimensions must be positive"));
    }
    if dims.iter().product::<usize>() != total {
        return Err(Error::dims(format!("factor dimensions {dims:?} do not multiply to {total}")));
    }
    if total > MAX_DENSE_DIM {
        return Err(Error::dims(format!("dimension {total} exceeds the dense cap {MAX_DENSE_DIM}")));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: CMat,
    dims: Vec<usize>,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity (eigenvalues ≥ -1e-10).
    pub fn new(matrix: CMat, dims: Vec<usize>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::dims("density matrix must be square"));
        }
        check_dims(&dims, matrix.nrows())?;
        let h = linalg::hermitian_defect(&matrix);
        if h > STATE_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (defect {h:e})")));
        }
        let t = matrix.trace();
        if (t.re - 1.0).abs() > STATE_TOL || t.im.abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {t} is not 1")));
        }
        let lo = linalg::eigenvalues(&matrix)[0];
        if lo < -EIG_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {lo:e}")));
        }
        let matrix = (&matrix + matrix.adjoint()) * c(0.5);
        Ok(Self { matrix, dims })
    }

    pub fn from_matrix(matrix: CMat) -> Result<Self> {
        let d = matrix.nrows();
        Self::new(matrix, vec![d])
    }

    pub(crate) fn from_trusted(matrix: CMat, dims: Vec<usize>) -> Self {
        Self { matrix, dims }
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self { matrix: linalg::eye(d) / c(d as f64), dims: vec![d] }
    }

    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        let p = crate::classical::Distribution::new(probs.to_vec())?;
        let v = CVec::from_iterator(p.probs().len(), p.probs().iter().map(|&x| c(x)));
        Ok(Self { matrix: CMat::from_diagonal(&v), dims: vec![probs.len()] })
    }

    pub fn pure(psi: &CVec) -> Result<Self> {
        let n = psi.norm();
        if (n - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("vector norm {n} is not 1")));
        }
        Ok(Self { matrix: psi * psi.adjoint(), dims: vec![psi.len()] })
    }

    pub fn random<R: rand::Rng + ?Sized>(d: usize, rng: &mut R) -> Self {
        Self { matrix: linalg::random_density_matrix(d, d, rng), dims: vec![d] }
    }

    pub fn with_dims(mut self, dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims, self.dim())?;
        self.dims = dims;
        Ok(self)
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Eigenvalues, clamped at zero and renormalized, ascending.
    pub fn spectrum(&self) -> Vec<f64> {
        linalg::clamped_spectrum(&self.matrix)
    }

    pub fn entropy(&self) -> f64 {
        von_neumann_entropy(self)
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let m = linalg::partial_trace(&self.matrix, &self.dims, keep)?;
        let dims = keep.iter().map(|&i| self.dims[i]).collect();
        Ok(Self { matrix: m, dims })
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        check_dims(&dims, self.dim() * other.dim())?;
        Ok(Self { matrix: linalg::kron(&self.matrix, &other.matrix), dims })
    }

    pub fn mix(&self, other: &DensityMatrix, lambda: f64) -> Result<DensityMatrix> {
        if self.dims != other.dims || !(0.0..=1.0).contains(&lambda) {
            return Err(Error::param("mixture needs equal dims and lambda in [0, 1]"));
        }
        Ok(Self { matrix: &self.matrix * c(lambda) + &other.matrix * c(1.0 - lambda), dims: self.dims.clone() })
    }
}

/// Unit vector on ⊗ dims.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    vector: CVec,
    dims: Vec<usize>,
}

/// Pure state on R ⊗ B ⊗ E.
pub type TripartitePureState = PureState;

impl PureState {
    pub fn new(vector: CVec, dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims, vector.len())?;
        let n = vector.norm();
        if (n - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("vector norm {n} is not 1")));
        }
        Ok(Self { vector, dims })
    }

    pub fn vector(&self) -> &CVec {
        &self.vector
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn marginal(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let m = linalg::reduce_pure(&self.vector, &self.dims, keep)?;
        Ok(DensityMatrix::from_trusted(m, keep.iter().map(|&i| self.dims[i]).collect()))
    }

    /// Entropy of the marginal on `part`; the empty part has entropy 0.
    pub fn entropy_of(&self, part: &[usize]) -> Result<f64> {
        if part.is_empty() {
            return Ok(0.0);
        }
        Ok(self.marginal(part)?.entropy())
    }

    pub fn mutual_information(&self, a: &[usize], b: &[usize]) -> Result<f64> {
        let mut ab: Vec<usize> = a.iter().chain(b).cloned().collect();
        ab.sort_unstable();
        if ab.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::param("parts must be disjoint"));
        }
        Ok(self.entropy_of(a)? + self.entropy_of(b)? - self.entropy_of(&ab)?)
    }

    /// H(a|b) = H(ab) - H(b).
    pub fn conditional_entropy(&self, a: &[usize], b: &[usize]) -> Result<f64> {
        let mut ab: Vec<usize> = a.iter().chain(b).cloned().collect();
        ab.sort_unstable();
        Ok(self.entropy_of(&ab)? - self.entropy_of(b)?)
    }
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    linalg::entropy(rho.matrix())
}

/// I(a;b) for disjoint sorted factor sets of a multipartite state.
pub fn quantum_mutual_information(rho: &DensityMatrix, a: &[usize], b: &[usize]) -> Result<f64> {
    let mut ab: Vec<usize> = a.iter().chain(b).cloned().collect();
    ab.sort_unstable();
    if ab.windows(2).any(|w| w[0] == w[1]) || a.is_empty() || b.is_empty() {
        return Err(Error::param("parts must be disjoint and nonempty"));
    }
    let h = |p: &[usize]| rho.partial_trace(p).map(|m| m.entropy());
    Ok(h(a)? + h(b)? - h(&ab)?)
}

/// Purification on R ⊗ A with dim R = rank ρ: Σ √λ_i |i⟩_R |v_i⟩_A.
pub fn purify(rho: &DensityMatrix) -> PureState {
    let (vals, vecs) = linalg::hermitian_eigen(rho.matrix());
    let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > EIG_TOL).collect();
    let total: f64 = keep.iter().map(|&i| vals[i]).sum();
    let (r, d) = (keep.len(), rho.dim());
    let mut v = CVec::zeros(r * d);
    for (ri, &i) in keep.iter().enumerate() {
        let s = Complex64::new((vals[i] / total).sqrt(), 0.0);
        for a in 0..d {
            v[ri * d + a] = s * vecs[(a, i)];
        }
    }
    PureState { vector: v, dims: vec![r, d] }
}
