//! Quantum channels in Kraus form with Stinespring dilation and complement.

use num_complex::Complex64;
use rand::Rng;

use super::linalg::{self, c, CMat, CVec};
use super::state::{purify, DensityMatrix, PureState, MAX_DENSE_DIM, STATE_TOL};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct QuantumChannel {
    d_in: usize,
    d_out: usize,
    kraus: Vec<CMat>,
}

impl QuantumChannel {
    /// Validates shapes and Σ K†K = I within 1e-9.
    pub fn new(kraus: Vec<CMat>) -> Result<Self> {
        let first = kraus.first().ok_or_else(|| Error::InvalidChannel("no Kraus operators".into()))?;
        let (d_out, d_in) = (first.nrows(), first.ncols());
        if d_in == 0 || d_out == 0 {
            return Err(Error::InvalidChannel("empty Kraus operator".into()));
        }
        if kraus.iter().any(|k| k.nrows() != d_out || k.ncols() != d_in) {
            return Err(Error::InvalidChannel("Kraus operators differ in shape".into()));
        }
        if d_out * kraus.len() > MAX_DENSE_DIM || d_in > MAX_DENSE_DIM {
            return Err(Error::dims("channel exceeds the dense dimension cap"));
        }
        let mut s = CMat::zeros(d_in, d_in);
        for k in &kraus {
            s += k.adjoint() * k;
        }
        let dev = linalg::max_abs_diff(&s, &linalg::eye(d_in));
        if dev > STATE_TOL {
            return Err(Error::InvalidChannel(format!("Σ K†K deviates from identity by {dev:e}")));
        }
        Ok(Self { d_in, d_out, kraus })
    }

    /// Channel with Kraus K_k[b, a] = V[b·d_env + k, a].
    pub fn from_stinespring(v: &CMat, d_out: usize, d_env: usize) -> Result<Self> {
        if v.nrows() != d_out * d_env {
            return Err(Error::dims(format!("isometry has {} rows, expected {}", v.nrows(), d_out * d_env)));
        }
        let d_in = v.ncols();
        let kraus = (0..d_env).map(|k| CMat::from_fn(d_out, d_in, |b, a| v[(b * d_env + k, a)])).collect();
        Self::new(kraus)
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn d_env(&self) -> usize {
        self.kraus.len()
    }

    pub fn kraus(&self) -> &[CMat] {
        &self.kraus
    }

    /// V: A → B ⊗ E as a (d_out·d_env) × d_in isometry.
    pub fn stinespring(&self) -> CMat {
        let de = self.d_env();
        CMat::from_fn(self.d_out * de, self.d_in, |row, a| self.kraus[row % de][(row / de, a)])
    }

    pub fn complementary(&self) -> QuantumChannel {
        let de = self.d_env();
        let kraus = (0..self.d_out)
            .map(|b| CMat::from_fn(de, self.d_in, |k, a| self.kraus[k][(b, a)]))
            .collect();
        QuantumChannel { d_in: self.d_in, d_out: de, kraus }
    }

    pub(crate) fn apply_matrix(&self, rho: &CMat) -> CMat {
        let mut out = CMat::zeros(self.d_out, self.d_out);
        for k in &self.kraus {
            out += k * rho * k.adjoint();
        }
        out
    }

    /// Heisenberg-picture map Σ K† X K.
    pub(crate) fn adjoint_apply(&self, x: &CMat) -> CMat {
        let mut out = CMat::zeros(self.d_in, self.d_in);
        for k in &self.kraus {
            out += k.adjoint() * x * k;
        }
        out
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.d_in {
            return Err(Error::dims(format!("input has dimension {}, channel expects {}", rho.dim(), self.d_in)));
        }
        let m = self.apply_matrix(rho.matrix());
        Ok(DensityMatrix::from_trusted((&m + m.adjoint()) * c(0.5), vec![self.d_out]))
    }

    pub fn tensor(&self, other: &QuantumChannel) -> Result<QuantumChannel> {
        let mut kraus = Vec::with_capacity(self.kraus.len() * other.kraus.len());
        for a in &self.kraus {
            for b in &other.kraus {
                kraus.push(linalg::kron(a, b));
            }
        }
        QuantumChannel::new(kraus)
    }

    pub fn identity(d: usize) -> Self {
        Self { d_in: d, d_out: d, kraus: vec![linalg::eye(d)] }
    }

    /// Qubit depolarizing ρ ↦ (1-p)ρ + p I/2.
    pub fn depolarizing(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::param(format!("depolarizing p = {p} outside [0, 1]")));
        }
        let [i, x, y, z] = paulis();
        let a = c((1.0 - 0.75 * p).sqrt());
        let b = c((p / 4.0).sqrt());
        Self::new(vec![i * a, x * b, y * b, z * b])
    }

    /// ρ ↦ I/d.
    pub fn completely_depolarizing(d: usize) -> Self {
        let s = c(1.0 / (d as f64).sqrt());
        let kraus = (0..d * d)
            .map(|k| {
                let mut m = CMat::zeros(d, d);
                m[(k / d, k % d)] = s;
                m
            })
            .collect();
        Self { d_in: d, d_out: d, kraus }
    }

    /// Qubit dephasing ρ ↦ (1-p)ρ + p ZρZ.
    pub fn dephasing(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::param(format!("dephasing p = {p} outside [0, 1]")));
        }
        let [i, _, _, z] = paulis();
        Self::new(vec![i * c((1.0 - p).sqrt()), z * c(p.sqrt())])
    }

    pub fn amplitude_damping(g: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&g) {
            return Err(Error::param(format!("damping {g} outside [0, 1]")));
        }
        let k0 = CMat::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c((1.0 - g).sqrt())]);
        let k1 = CMat::from_row_slice(2, 2, &[c(0.0), c(g.sqrt()), c(0.0), c(0.0)]);
        Self::new(vec![k0, k1])
    }

    /// Replaces every input by σ.
    pub fn constant(d_in: usize, sigma: &DensityMatrix) -> Self {
        let (vals, vecs) = linalg::hermitian_eigen(sigma.matrix());
        let mut kraus = Vec::new();
        for (i, &s) in vals.iter().enumerate() {
            if s <= linalg::EIG_TOL {
                continue;
            }
            for j in 0..d_in {
                let mut m = CMat::zeros(sigma.dim(), d_in);
                for b in 0..sigma.dim() {
                    m[(b, j)] = vecs[(b, i)] * c(s.sqrt());
                }
                kraus.push(m);
            }
        }
        let scale: f64 = vals.iter().filter(|&&s| s > linalg::EIG_TOL).sum();
        kraus.iter_mut().for_each(|k| *k /= c(scale.sqrt()));
        Self { d_in, d_out: sigma.dim(), kraus }
    }

    /// Computational-basis measurement with classical output.
    pub fn measurement(d: usize) -> Self {
        let kraus = (0..d)
            .map(|j| {
                let mut m = CMat::zeros(d, d);
                m[(j, j)] = c(1.0);
                m
            })
            .collect();
        Self { d_in: d, d_out: d, kraus }
    }

    /// Classical-quantum channel ρ ↦ Σ_j ⟨j|ρ|j⟩ σ_j.
    pub fn classical_quantum(states: &[DensityMatrix]) -> Result<Self> {
        let d_in = states.len();
        let d_out = states.first().map(|s| s.dim()).ok_or_else(|| Error::param("no output states"))?;
        let mut kraus = Vec::new();
        for (j, s) in states.iter().enumerate() {
            if s.dim() != d_out {
                return Err(Error::dims("cq output states differ in dimension"));
            }
            let (vals, vecs) = linalg::hermitian_eigen(s.matrix());
            for (i, &v) in vals.iter().enumerate() {
                if v > linalg::EIG_TOL {
                    let mut m = CMat::zeros(d_out, d_in);
                    for b in 0..d_out {
                        m[(b, j)] = vecs[(b, i)] * c(v.sqrt());
                    }
                    kraus.push(m);
                }
            }
        }
        // renormalize against clamped eigenvalues
        let mut s = CMat::zeros(d_in, d_in);
        for k in &kraus {
            s += k.adjoint() * k;
        }
        for k in kraus.iter_mut() {
            for j in 0..d_in {
                let w = s[(j, j)].re.sqrt();
                k.column_mut(j).iter_mut().for_each(|z| *z /= c(w));
            }
        }
        Self::new(kraus)
    }

    /// Channel with a Haar-random Stinespring isometry.
    pub fn random<R: Rng + ?Sized>(d_in: usize, d_out: usize, d_env: usize, rng: &mut R) -> Result<Self> {
        if d_out * d_env < d_in {
            return Err(Error::dims("d_out·d_env must be at least d_in"));
        }
        let v = linalg::haar_isometry(d_out * d_env, d_in, rng);
        Self::from_stinespring(&v, d_out, d_env)
    }
}

pub(crate) fn paulis() -> [CMat; 4] {
    let z = Complex64::new(0.0, 0.0);
    let i1 = Complex64::new(0.0, 1.0);
    [
        linalg::eye(2),
        CMat::from_row_slice(2, 2, &[z, c(1.0), c(1.0), z]),
        CMat::from_row_slice(2, 2, &[z, -i1, i1, z]),
        CMat::from_row_slice(2, 2, &[c(1.0), z, z, c(-1.0)]),
    ]
}

/// Ψ = (I_R ⊗ V)|Φ_ρ⟩ on R ⊗ B ⊗ E, with R the purifying system of ρ.
pub fn channel_output_state(ch: &QuantumChannel, rho: &DensityMatrix) -> Result<PureState> {
    if rho.dim() != ch.d_in() {
        return Err(Error::dims(format!("input has dimension {}, channel expects {}", rho.dim(), ch.d_in())));
    }
    let phi = purify(rho);
    let r = phi.dims()[0];
    let v = ch.stinespring();
    let be = v.nrows();
    let pm = CMat::from_fn(r, ch.d_in(), |i, a| phi.vector()[i * ch.d_in() + a]);
    let out = pm * v.transpose();
    let vec = CVec::from_iterator(r * be, (0..r * be).map(|idx| out[(idx / be, idx % be)]));
    PureState::new(vec, vec![r, ch.d_out(), ch.d_env()])
}
