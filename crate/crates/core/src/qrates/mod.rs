//! Quantum rates: entanglement-assisted capacity, feedback simulation rates,
//! extremal output entropies, resource checks for arbitrary inputs and the
//! single-letter low-entanglement region.

mod maximize;
mod split;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::linalg::{self, CMat};
use crate::quantum::{channel_output_state, purify, DensityMatrix, QuantumChannel};
use crate::rng::derive_seed;

pub use maximize::{OptimizerReport, MAX_ITERATIONS};
pub use split::SplitWitness;

use maximize::{maximize, Weights};
use split::SplitProblem;

/// Absolute slack for region predicates.
pub const REGION_TOL: f64 = 1e-9;

const C_E: Weights = Weights { input: 1.0, output: 1.0, env: -1.0 };
const OUTPUT: Weights = Weights { input: 0.0, output: 1.0, env: 0.0 };
/// H(B|E) = H(ρ) − H(N^c(ρ)).
const COND_E: Weights = Weights { input: 1.0, output: 0.0, env: -1.0 };

/// max_ρ I(R;B) in bits. Non-convergence is reported through
/// `converged = false` together with the best value found.
pub fn entanglement_assisted_capacity(ch: &QuantumChannel, tol: f64, restarts: usize, seed: u64) -> OptimizerReport {
    maximize(ch, C_E, tol, restarts, seed)
}

/// I(R;B) of the purified channel output for input ρ.
pub fn mutual_information_rb(ch: &QuantumChannel, rho: &DensityMatrix) -> Result<f64> {
    channel_output_state(ch, rho)?.mutual_information(&[0], &[1])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeedbackRates {
    /// ½ I(R;B)
    pub qubits_per_use: f64,
    /// ½ I(E;B)
    pub ebits_per_use: f64,
    /// Co-bit form: I(R;B) co-bits ...
    pub cobits_per_use: f64,
    /// ... plus H(B|R) ebits (negative values mean ebits are generated).
    pub cobit_ebits_per_use: f64,
}

pub fn qrst_feedback_rates(ch: &QuantumChannel, rho: &DensityMatrix) -> Result<FeedbackRates> {
    let psi = channel_output_state(ch, rho)?;
    let i_rb = psi.mutual_information(&[0], &[1])?;
    let i_eb = psi.mutual_information(&[2], &[1])?;
    let h_b_r = psi.conditional_entropy(&[1], &[0])?;
    Ok(FeedbackRates {
        qubits_per_use: 0.5 * i_rb,
        ebits_per_use: 0.5 * i_eb,
        cobits_per_use: i_rb,
        cobit_ebits_per_use: h_b_r,
    })
}

#[derive(Clone, Debug)]
pub struct ExtremalEntropies {
    pub max_hb: f64,
    pub min_hb_given_r: f64,
    pub max_hb_given_e: f64,
    /// min H(B|R) + max H(B|E); zero for exact optimizers since
    /// H(B|R) = −H(B|E) on every purified output.
    pub duality_defect: f64,
    pub consistent: bool,
    pub converged: bool,
    pub argmax_hb: DensityMatrix,
    pub argmin_hb_given_r: DensityMatrix,
    pub argmax_hb_given_e: DensityMatrix,
}

/// max H(B), min H(B|R) and max H(B|E), each from its own optimizer run.
/// min H(B|R) is re-evaluated on the purified output state at its argmin.
pub fn extremal_output_entropies(ch: &QuantumChannel, tol: f64, restarts: usize, seed: u64) -> Result<ExtremalEntropies> {
    let hb = maximize(ch, OUTPUT, tol, restarts, derive_seed(seed, 1));
    let neg_hbr = maximize(ch, COND_E, tol, restarts, derive_seed(seed, 2));
    let hbe = maximize(ch, COND_E, tol, restarts, derive_seed(seed, 3));
    let min_hb_given_r = channel_output_state(ch, &neg_hbr.argmax)?.conditional_entropy(&[1], &[0])?;
    let defect = min_hb_given_r + hbe.value;
    let slack = tol.max(neg_hbr.gap).max(hbe.gap).max(1e-9);
    Ok(ExtremalEntropies {
        max_hb: hb.value,
        min_hb_given_r,
        max_hb_given_e: hbe.value,
        duality_defect: defect,
        consistent: defect.abs() <= slack,
        converged: hb.converged && neg_hbr.converged && hbe.converged,
        argmax_hb: hb.argmax,
        argmin_hb_given_r: neg_hbr.argmax,
        argmax_hb_given_e: hbe.argmax,
    })
}

/// Per-channel summary of every rate quantity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelProfile {
    pub d_in: usize,
    pub d_out: usize,
    pub d_env: usize,
    pub c_e: f64,
    pub q_e: f64,
    pub c_e_gap: f64,
    pub max_hb: f64,
    pub min_hb_given_r: f64,
    pub max_hb_given_e: f64,
    pub duality_defect: f64,
    pub consistent: bool,
    pub spread_requirement: f64,
    pub converged: bool,
    pub restarts: usize,
    pub tol: f64,
}

impl ChannelProfile {
    pub fn compute(ch: &QuantumChannel, tol: f64, restarts: usize, seed: u64) -> Result<Self> {
        let ce = entanglement_assisted_capacity(ch, tol, restarts, derive_seed(seed, 0));
        let ex = extremal_output_entropies(ch, tol, restarts, seed)?;
        let raw = ex.max_hb - ex.min_hb_given_r - ce.value;
        Ok(Self {
            d_in: ch.d_in(),
            d_out: ch.d_out(),
            d_env: ch.d_env(),
            c_e: ce.value,
            q_e: 0.5 * ce.value,
            c_e_gap: ce.gap,
            max_hb: ex.max_hb,
            min_hb_given_r: ex.min_hb_given_r,
            max_hb_given_e: ex.max_hb_given_e,
            duality_defect: ex.duality_defect,
            consistent: ex.consistent,
            spread_requirement: clip(raw, tol),
            converged: ce.converged && ex.converged,
            restarts,
            tol,
        })
    }
}

/// Values within `tol` of zero (numerical noise of three separate optimizers)
/// are reported as exactly zero.
fn clip(raw: f64, tol: f64) -> f64 {
    if raw <= tol.max(REGION_TOL) * 10.0 {
        0.0
    } else {
        raw
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpreadRequirement {
    /// max(0, max H(B) − min H(B|R) − C_E)
    pub value: f64,
    pub raw: f64,
    pub max_hb: f64,
    pub min_hb_given_r: f64,
    pub c_e: f64,
}

/// Lower bound on 2(Q₁+Q₂)+C₂ forced by entanglement spread.
pub fn spread_requirement(ch: &QuantumChannel, tol: f64) -> Result<SpreadRequirement> {
    let p = ChannelProfile::compute(ch, tol, 4, 0)?;
    let raw = p.max_hb - p.min_hb_given_r - p.c_e;
    Ok(SpreadRequirement { value: p.spread_requirement, raw, max_hb: p.max_hb, min_hb_given_r: p.min_hb_given_r, c_e: p.c_e })
}

/// Coefficients over {[q→q], [q←q], [c→c], [c←c], [qq], Emb}.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResourceVector {
    pub q_fwd: f64,
    pub q_bwd: f64,
    pub c_fwd: f64,
    pub c_bwd: f64,
    /// Ebits; `f64::INFINITY` for an unlimited supply.
    pub e: f64,
    pub emb: bool,
}

impl ResourceVector {
    pub fn new(q_fwd: f64, q_bwd: f64, c_fwd: f64, c_bwd: f64, e: f64, emb: bool) -> Result<Self> {
        for (name, v) in [("q_fwd", q_fwd), ("q_bwd", q_bwd), ("c_fwd", c_fwd), ("c_bwd", c_bwd), ("e", e)] {
            if v.is_nan() || v < 0.0 || (v.is_infinite() && name != "e") {
                return Err(Error::param(format!("{name} = {v} must be finite and nonnegative")));
            }
        }
        Ok(Self { q_fwd, q_bwd, c_fwd, c_bwd, e, emb })
    }

    pub fn zero() -> Self {
        Self { q_fwd: 0.0, q_bwd: 0.0, c_fwd: 0.0, c_bwd: 0.0, e: 0.0, emb: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BindingConstraint {
    /// Forward qubits below Q_E.
    ForwardQuantum,
    /// No ebit count fits between the two spread constraints.
    EntanglementWindow,
    /// Embezzling states remove the spread constraints.
    Embezzlement,
    None,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResourceCheck {
    pub achievable: bool,
    pub binding: BindingConstraint,
    pub q_e: f64,
    /// Feasible ebit interval [lo, hi] (empty when lo > hi).
    pub e_window: (f64, f64),
}

/// Arbitrary-input feedback simulation with the resources `rv`.
///
/// Forward qubits must cover Q_E. Without embezzling states the simulation
/// must also produce entanglement spread: some ebit count e ≤ rv.e has to
/// satisfy max H(B) − (Q₁+Q₂) ≤ e ≤ Q₁+Q₂+C₂+min H(B|R), with Q₁, Q₂ the
/// forward and backward qubits and C₂ the classical bits in either direction.
pub fn feedback_resource_check(profile: &ChannelProfile, rv: &ResourceVector) -> ResourceCheck {
    let q_e = profile.q_e;
    if rv.q_fwd < q_e - REGION_TOL {
        return ResourceCheck { achievable: false, binding: BindingConstraint::ForwardQuantum, q_e, e_window: (0.0, 0.0) };
    }
    let q = rv.q_fwd + rv.q_bwd;
    let lo = (profile.max_hb - q).max(0.0);
    let hi = rv.e.min(q + rv.c_fwd + rv.c_bwd + profile.min_hb_given_r);
    if rv.emb {
        return ResourceCheck { achievable: true, binding: BindingConstraint::Embezzlement, q_e, e_window: (lo, hi) };
    }
    let ok = lo <= hi + REGION_TOL;
    ResourceCheck {
        achievable: ok,
        binding: if ok { BindingConstraint::None } else { BindingConstraint::EntanglementWindow },
        q_e,
        e_window: (lo, hi),
    }
}

/// Reduced state on B ⊗ E of the purified output for input ρ, plus H(ρ).
fn output_be(ch: &QuantumChannel, rho: &DensityMatrix) -> Result<(SplitProblem, f64)> {
    let psi = channel_output_state(ch, rho)?;
    let omega = psi.marginal(&[1, 2])?.matrix().clone();
    Ok((SplitProblem { omega, d_b: ch.d_out(), d_e: ch.d_env() }, rho.entropy()))
}

#[derive(Clone, Debug)]
pub struct LowEntVerdict {
    pub achievable: bool,
    /// max(½I(R;E_B B) − q, H(B E_B) − q − e) at the witness; ≤ 0 when achievable.
    pub shortfall: f64,
    pub witness: SplitWitness,
    /// ½ I(R; E_B B) at the witness.
    pub half_i_r_ebb: f64,
}

/// Single-copy test of q[q→q] + e[qq] ≥ ⟨N:ρ⟩: searches splits
/// V: E → E_A ⊗ E_B for q ≥ ½I(R;E_B B) and q + e ≥ H(B E_B).
/// A positive answer is certified by the witness; a negative one only means
/// no single-copy split was found.
pub fn lowent_region_check_n1(
    ch: &QuantumChannel,
    rho: &DensityMatrix,
    q: f64,
    e: f64,
    restarts: usize,
    seed: u64,
) -> Result<LowEntVerdict> {
    if !(q >= 0.0 && e >= 0.0) {
        return Err(Error::param("rates must be nonnegative"));
    }
    let (p, h_a) = output_be(ch, rho)?;
    // I(R; E_B B) = H(A) + H(B E_B) − H(E_A) for the pure global state.
    let half_i = move |h_bebb: f64, h_ea: f64| 0.5 * (h_a + h_bebb - h_ea);
    let score = move |h1: f64, h2: f64| (half_i(h1, h2) - q).max(h1 - q - e);
    let weights: Vec<(f64, f64)> = [0.0, 0.25, 0.5, 0.75, 1.0]
        .iter()
        .map(|&t| (0.5 * t + (1.0 - t), -0.5 * t))
        .collect();
    let (witness, shortfall) = split::search(&p, &weights, restarts, seed, score);
    Ok(LowEntVerdict {
        achievable: shortfall <= REGION_TOL,
        shortfall,
        half_i_r_ebb: half_i(witness.h_b_eb, witness.h_ea),
        witness,
    })
}

#[derive(Clone, Debug)]
pub struct EopResult {
    /// Single-letter min over splits of H(B E_B); an upper bound on the
    /// regularized entanglement of purification.
    pub value: f64,
    pub witness: Option<SplitWitness>,
    /// Half the two-copy value, evaluated when the purifying system has
    /// dimension at most 2.
    pub two_copy_per_copy: Option<f64>,
}

/// Swaps the factors of an operator on C^d1 ⊗ C^d2.
fn swap_factors(m: &CMat, d1: usize, d2: usize) -> CMat {
    let idx = |i: usize| (i % d2) * d1 + i / d2;
    let n = d1 * d2;
    let mut out = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out[(idx(i), idx(j))] = m[(i, j)];
        }
    }
    out
}

fn eop_single(rho: &DensityMatrix, d_r: usize, d_b: usize, restarts: usize, seed: u64) -> Result<(f64, Option<SplitWitness>)> {
    let phi = purify(rho);
    let d_e = phi.dims()[0];
    if d_e == 1 {
        return Ok((rho.partial_trace(&[1])?.entropy(), None));
    }
    let psi = crate::quantum::PureState::new(phi.vector().clone(), vec![d_e, d_r, d_b])?;
    let omega = swap_factors(psi.marginal(&[0, 2])?.matrix(), d_e, d_b);
    let p = SplitProblem { omega, d_b, d_e };
    let (w, v) = split::search(&p, &[(1.0, 0.0)], restarts, seed, |h1, _| h1);
    Ok((v, Some(w)))
}

/// Entanglement of purification of a bipartite state on R ⊗ B at the single-copy level.
pub fn entanglement_of_purification(rho: &DensityMatrix, restarts: usize, seed: u64) -> Result<EopResult> {
    let dims = rho.dims().to_vec();
    if dims.len() != 2 {
        return Err(Error::dims("entanglement of purification needs a bipartite state"));
    }
    let (d_r, d_b) = (dims[0], dims[1]);
    let (value, witness) = eop_single(rho, d_r, d_b, restarts, seed)?;
    let rank = purify(rho).dims()[0];
    let two_copy_per_copy = if rank > 1 && rank <= 2 {
        // R1 B1 R2 B2 → R1 R2 B1 B2
        let t = linalg::kron(rho.matrix(), rho.matrix());
        let m = permute_middle(&t, d_r, d_b);
        let two = DensityMatrix::new(m, vec![d_r * d_r, d_b * d_b])?;
        Some(eop_single(&two, d_r * d_r, d_b * d_b, restarts, derive_seed(seed, 2))?.0 / 2.0)
    } else {
        None
    };
    Ok(EopResult { value, witness, two_copy_per_copy })
}

/// Reorders R1 B1 R2 B2 into R1 R2 B1 B2.
fn permute_middle(m: &CMat, d_r: usize, d_b: usize) -> CMat {
    let n = d_r * d_b * d_r * d_b;
    let map = |i: usize| {
        let b2 = i % d_b;
        let r2 = (i / d_b) % d_r;
        let b1 = (i / (d_b * d_r)) % d_b;
        let r1 = i / (d_b * d_r * d_b);
        ((r1 * d_r + r2) * d_b + b1) * d_b + b2
    };
    let mut out = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out[(map(i), map(j))] = m[(i, j)];
        }
    }
    out
}

#[cfg(test)]
mod tests;
