//! Entanglement spread, its smoothed version, clean entanglement capacities
//! of communication resources, and embezzling states.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qrates::ResourceVector;
use crate::quantum::DensityMatrix;

/// Eigenvalues at or below this are treated as zero.
pub const SPECTRUM_CUTOFF: f64 = 1e-15;
const SUM_TOL: f64 = 1e-12;

/// Nonincreasing nonnegative spectrum with total mass at most 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumState {
    eigenvalues: Vec<f64>,
}

impl SpectrumState {
    pub fn new(eigenvalues: Vec<f64>) -> Result<Self> {
        if eigenvalues.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::InvalidState("eigenvalues must be finite and nonnegative".into()));
        }
        if eigenvalues.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidState("eigenvalues must be nonincreasing".into()));
        }
        let s: f64 = eigenvalues.iter().sum();
        if s > 1.0 + SUM_TOL {
            return Err(Error::InvalidState(format!("eigenvalues sum to {s} > 1")));
        }
        Ok(Self { eigenvalues })
    }

    /// Sorts into nonincreasing order first; tiny negative round-off is clamped.
    pub fn from_unsorted(mut v: Vec<f64>) -> Result<Self> {
        for x in v.iter_mut() {
            if *x < 0.0 && *x > -SUM_TOL {
                *x = 0.0;
            }
        }
        v.sort_by(|a, b| b.total_cmp(a));
        Self::new(v)
    }

    pub fn from_state(rho: &DensityMatrix) -> Result<Self> {
        Self::from_unsorted(rho.spectrum())
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn mass(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }

    fn support(&self) -> usize {
        self.eigenvalues.iter().take_while(|&&x| x > SPECTRUM_CUTOFF).count()
    }

    pub fn entropy(&self) -> f64 {
        crate::classical::entropy_of(&self.eigenvalues)
    }
}

fn nonzero(s: &SpectrumState) -> Result<()> {
    if s.support() == 0 {
        return Err(Error::InvalidState("spectrum is zero".into()));
    }
    Ok(())
}

/// S₀ = log2 rank.
pub fn renyi_zero(s: &SpectrumState) -> Result<f64> {
    nonzero(s)?;
    Ok((s.support() as f64).log2())
}

/// S_∞ = −log2 λ_max.
pub fn renyi_infinity(s: &SpectrumState) -> Result<f64> {
    nonzero(s)?;
    Ok(-s.eigenvalues[0].log2())
}

/// Δ = S₀ − S_∞; zero for the all-zero spectrum.
pub fn spread(s: &SpectrumState) -> f64 {
    if s.support() == 0 {
        return 0.0;
    }
    (s.support() as f64).log2() + s.eigenvalues[0].log2()
}

/// Smallest cap c with Σ_{i<k} min(λ_i, c) ≥ target, or None when even the
/// uncapped top k fall short.
fn water_level(lam: &[f64], k: usize, target: f64) -> Option<f64> {
    let top: f64 = lam[..k].iter().sum();
    // Only summation round-off is forgiven.
    if top < target - 8.0 * f64::EPSILON * k as f64 {
        return None;
    }
    let target = target.min(top);
    // j entries capped: j·c + Σ_{i=j}^{k-1} λ_i = target with λ_j ≤ c ≤ λ_{j-1}.
    let mut tail = top;
    for j in 1..=k {
        tail -= lam[j - 1];
        let c = (target - tail) / j as f64;
        let below = if j < k { lam[j] } else { 0.0 };
        if c >= below && c <= lam[j - 1] {
            return Some(c);
        }
    }
    Some(lam[0])
}

/// Δ_ε = min Δ(σ) over 0 ≤ σ ≤ ρ, Tr σ ≥ 1 − ε, with σ diagonal in the
/// eigenbasis of ρ: keep the k largest eigenvalues and cap them at a level c.
/// Δ(σ) is evaluated on σ / Tr σ, so Δ_ε ≥ 0.
pub fn smoothed_spread(s: &SpectrumState, eps: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::param(format!("eps = {eps} must lie in [0, 1)")));
    }
    let n = s.support();
    if n == 0 {
        return Ok(0.0);
    }
    if eps == 0.0 {
        // σ ≤ ρ with full trace forces σ = ρ.
        return Ok(spread(s));
    }
    let lam = &s.eigenvalues[..n];
    let target = 1.0 - eps;
    let best = (1..=n)
        .into_par_iter()
        .filter_map(|k| {
            water_level(lam, k, target).map(|c| {
                let m: f64 = lam[..k].iter().map(|&x| x.min(c)).sum();
                ((k as f64).log2() + (c / m).log2()).max(0.0)
            })
        })
        .reduce(|| f64::INFINITY, f64::min);
    if best.is_finite() {
        Ok(best)
    } else {
        Err(Error::InvalidState(format!("spectrum mass {} is below 1 − eps", s.mass())))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommBound {
    /// Δ_δ + log2(1 − δ)
    pub bound: f64,
    pub smoothed_spread: f64,
    pub delta: f64,
    /// Preparation error ε = δ⁸/4 for which the bound applies.
    pub error_budget: f64,
}

/// Classical communication needed to prepare the state from EPR pairs.
pub fn spread_comm_lower_bound(s: &SpectrumState, delta: f64) -> Result<CommBound> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param(format!("delta = {delta} must lie in (0, 1)")));
    }
    let sm = smoothed_spread(s, delta)?;
    Ok(CommBound { bound: sm + (1.0 - delta).log2(), smoothed_spread: sm, delta, error_budget: delta.powi(8) / 4.0 })
}

/// Spectrum of ψ^A for Σ_i √p_i |i⟩|i⟩|Φ⟩^{⊗n_i}|00⟩^{⊗(N−n_i)}, label
/// register included: p_i / 2^{n_i} with multiplicity 2^{n_i}.
pub fn superposition_spectrum(p: &[f64], n: &[u32]) -> Result<SpectrumState> {
    if p.len() != n.len() || p.is_empty() {
        return Err(Error::dims("one weight per branch"));
    }
    crate::classical::Distribution::new(p.to_vec())?;
    let total: u64 = n.iter().map(|&k| 1u64.checked_shl(k).unwrap_or(u64::MAX)).sum();
    if n.iter().any(|&k| k > 24) || total > 1 << 24 {
        return Err(Error::param("spectrum too large to list"));
    }
    let mut v = Vec::with_capacity(total as usize);
    for (&pi, &ni) in p.iter().zip(n) {
        let m = 1usize << ni;
        v.extend(std::iter::repeat_n(pi / m as f64, m));
    }
    SpectrumState::from_unsorted(v)
}

/// max n_i − min n_i, the label-free estimate of spread.
pub fn crude_spread(n: &[u32]) -> u32 {
    n.iter().max().copied().unwrap_or(0) - n.iter().min().copied().unwrap_or(0)
}

/// Set of ebit counts a resource can cleanly produce; infinite ends mark
/// unbounded sides.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CleanInterval {
    pub lo: f64,
    pub hi: f64,
}

impl CleanInterval {
    pub fn point(e: f64) -> Self {
        Self { lo: e, hi: e }
    }

    pub fn unbounded_below(&self) -> bool {
        self.lo == f64::NEG_INFINITY
    }

    pub fn unbounded_above(&self) -> bool {
        self.hi == f64::INFINITY
    }

    /// Minkowski sum.
    pub fn plus(&self, other: &CleanInterval) -> CleanInterval {
        CleanInterval { lo: self.lo + other.lo, hi: self.hi + other.hi }
    }

    pub fn scale(&self, k: f64) -> CleanInterval {
        CleanInterval { lo: k * self.lo, hi: k * self.hi }
    }

    /// Whether every ebit level of a target superposition can be produced.
    pub fn covers(&self, levels: &[f64]) -> bool {
        levels.iter().all(|&e| e >= self.lo - SUM_TOL && e <= self.hi + SUM_TOL)
    }
}

pub const QUBIT_INTERVAL: CleanInterval = CleanInterval { lo: -1.0, hi: 1.0 };
pub const CBIT_INTERVAL: CleanInterval = CleanInterval { lo: -1.0, hi: 0.0 };
pub const EBIT_INTERVAL: CleanInterval = CleanInterval { lo: 1.0, hi: 1.0 };
pub const EMB_INTERVAL: CleanInterval = CleanInterval { lo: f64::NEG_INFINITY, hi: f64::INFINITY };

/// Clean entanglement capacity of a resource combination.
pub fn clean_capacity_interval(rv: &ResourceVector) -> Result<CleanInterval> {
    if !rv.e.is_finite() {
        return Err(Error::param("clean capacity needs a finite ebit count"));
    }
    if rv.emb {
        return Ok(EMB_INTERVAL);
    }
    Ok(QUBIT_INTERVAL
        .scale(rv.q_fwd + rv.q_bwd)
        .plus(&CBIT_INTERVAL.scale(rv.c_fwd + rv.c_bwd))
        .plus(&EBIT_INTERVAL.scale(rv.e)))
}

/// Spectrum of the embezzling state of Schmidt rank N: λ_j ∝ 1/j.
pub fn embezzling_state(n: usize) -> Result<SpectrumState> {
    if n == 0 {
        return Err(Error::param("embezzling state needs N ≥ 1"));
    }
    let h: f64 = (1..=n).map(|j| 1.0 / j as f64).sum();
    SpectrumState::new((1..=n).map(|j| 1.0 / (j as f64 * h)).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbezzleResult {
    pub n: usize,
    pub k: usize,
    /// max |⟨φ_N| (U_A ⊗ U_B) |φ_N ⊗ Φ_k⟩| over local unitaries.
    pub fidelity: f64,
    /// 2√(1 − F²), the trace distance of the two pure states.
    pub trace_err: f64,
    /// k/N, the error scale quoted for the construction.
    pub k_over_n: f64,
    /// 1 − log2 k / log2 N, the logarithmic fidelity guarantee.
    pub log_fidelity_bound: f64,
}

/// Optimal overlap between φ_N and φ_N ⊗ Φ_k: the sorted Schmidt
/// coefficients are paired (von Neumann trace inequality).
pub fn embezzle_fidelity(n: usize, k: usize) -> Result<EmbezzleResult> {
    if k == 0 || k > n {
        return Err(Error::param(format!("need 1 ≤ k ≤ N, got k = {k}, N = {n}")));
    }
    let lam = embezzling_state(n)?;
    let lam = lam.eigenvalues();
    // Schmidt spectrum of φ_N ⊗ Φ_k, sorted: each λ_j/k repeated k times.
    let kf = k as f64;
    let fidelity: f64 = (0..n).map(|i| (lam[i] * lam[i / k] / kf).sqrt()).sum::<f64>().min(1.0);
    Ok(EmbezzleResult {
        n,
        k,
        fidelity,
        trace_err: 2.0 * (1.0 - fidelity * fidelity).max(0.0).sqrt(),
        k_over_n: kf / n as f64,
        log_fidelity_bound: if n > 1 { 1.0 - kf.log2() / (n as f64).log2() } else { f64::NEG_INFINITY },
    })
}
