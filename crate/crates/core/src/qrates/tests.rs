use super::*;
use crate::classical::h2;
use crate::quantum::linalg::{c, CMat};
use crate::rng::rng_from_seed;
use num_complex::Complex64;

const TOL: f64 = 1e-10;

/// Qubit state with Bloch vector (x, 0, z).
fn bloch(x: f64, z: f64) -> DensityMatrix {
    let m = CMat::from_row_slice(2, 2, &[c(0.5 * (1.0 + z)), c(0.5 * x), c(0.5 * x), c(0.5 * (1.0 - z))]);
    DensityMatrix::from_matrix(m).unwrap()
}

/// Max and min of f over the xz Bloch disk on a polar grid.
fn grid_extrema(f: impl Fn(&DensityMatrix) -> f64) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..=120 {
        let r = i as f64 / 120.0;
        for k in 0..=180 {
            let th = std::f64::consts::PI * k as f64 / 180.0;
            let v = f(&bloch(r * th.sin(), r * th.cos()));
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    (lo, hi)
}

fn constant_channel() -> (QuantumChannel, f64) {
    let sigma = DensityMatrix::diagonal(&[0.8, 0.2]).unwrap();
    (QuantumChannel::constant(2, &sigma), h2(0.2))
}

#[test]
fn capacity_of_simple_channels() {
    let r = entanglement_assisted_capacity(&QuantumChannel::identity(2), TOL, 3, 1);
    assert!(r.converged);
    assert!((r.value - 2.0).abs() < 1e-8);
    let r = entanglement_assisted_capacity(&QuantumChannel::completely_depolarizing(2), TOL, 3, 1);
    assert!(r.value.abs() < 1e-8);
    let r = entanglement_assisted_capacity(&QuantumChannel::identity(3), TOL, 2, 1);
    assert!((r.value - 2.0 * 3f64.log2()).abs() < 1e-8);
}

#[test]
fn capacity_of_depolarizing_matches_bloch_grid() {
    let ch = QuantumChannel::depolarizing(0.25).unwrap();
    let r = entanglement_assisted_capacity(&ch, TOL, 4, 7);
    assert!(r.converged);
    // Covariance: I(R;B) depends on the Bloch radius only.
    let f = |rad: f64| mutual_information_rb(&ch, &bloch(0.0, rad)).unwrap();
    let grid = (0..=2000).map(|i| f(i as f64 / 2000.0)).fold(f64::NEG_INFINITY, f64::max);
    assert!((r.value - grid).abs() < 1e-4, "{} vs {grid}", r.value);
    // The argmax re-evaluated on the purified output reproduces the value.
    let again = mutual_information_rb(&ch, &r.argmax).unwrap();
    assert!((again - r.value).abs() < 1e-9);
}

#[test]
fn capacity_objective_is_concave_at_midpoints() {
    let mut rng = rng_from_seed(21);
    for _ in 0..50 {
        let ch = QuantumChannel::random(2, 2, 3, &mut rng).unwrap();
        let a = DensityMatrix::random(2, &mut rng);
        let b = DensityMatrix::random(2, &mut rng);
        let mid = a.mix(&b, 0.5).unwrap();
        let ia = mutual_information_rb(&ch, &a).unwrap();
        let ib = mutual_information_rb(&ch, &b).unwrap();
        let im = mutual_information_rb(&ch, &mid).unwrap();
        assert!(im >= 0.5 * (ia + ib) - 1e-10);
    }
}

#[test]
fn capacity_is_additive_on_two_copies() {
    for ch in [QuantumChannel::amplitude_damping(0.3).unwrap(), QuantumChannel::dephasing(0.2).unwrap()] {
        let one = entanglement_assisted_capacity(&ch, 1e-9, 2, 3).value;
        let two = entanglement_assisted_capacity(&ch.tensor(&ch).unwrap(), 1e-9, 2, 3).value;
        assert!((two - 2.0 * one).abs() < 1e-3, "{two} vs {one}");
    }
}

#[test]
fn feedback_rate_examples() {
    let mm = DensityMatrix::maximally_mixed(2);
    let r = qrst_feedback_rates(&QuantumChannel::identity(2), &mm).unwrap();
    assert!((r.qubits_per_use - 1.0).abs() < 1e-12 && r.ebits_per_use.abs() < 1e-12);
    assert!((r.cobits_per_use - 2.0).abs() < 1e-12 && (r.cobit_ebits_per_use + 1.0).abs() < 1e-12);
    let (ch, h) = constant_channel();
    let r = qrst_feedback_rates(&ch, &mm).unwrap();
    assert!(r.qubits_per_use.abs() < 1e-12 && (r.ebits_per_use - h).abs() < 1e-12);
    // Dephasing(0.5) is complete dephasing: I(R;B) = 1 and I(E;B) = 1 on max-mixed input.
    let r = qrst_feedback_rates(&QuantumChannel::dephasing(0.5).unwrap(), &mm).unwrap();
    assert!((r.qubits_per_use - 0.5).abs() < 1e-12 && (r.ebits_per_use - 0.5).abs() < 1e-12);
}

#[test]
fn feedback_rates_sum_to_output_entropy() {
    let mut rng = rng_from_seed(22);
    for i in 0..100 {
        let (din, dout, denv) = (2 + i % 2, 2 + (i / 2) % 2, 1 + i % 4);
        let ch = QuantumChannel::random(din, dout, denv, &mut rng).unwrap();
        let rho = DensityMatrix::random(din, &mut rng);
        let r = qrst_feedback_rates(&ch, &rho).unwrap();
        let hb = ch.apply(&rho).unwrap().entropy();
        assert!((r.qubits_per_use + r.ebits_per_use - hb).abs() < 1e-9);
        assert!(r.qubits_per_use >= -1e-12 && r.ebits_per_use >= -1e-12);
    }
}

#[test]
fn extremal_entropies_of_identity_and_constant() {
    let e = extremal_output_entropies(&QuantumChannel::identity(2), TOL, 3, 1).unwrap();
    assert!((e.max_hb - 1.0).abs() < 1e-8);
    assert!((e.min_hb_given_r + 1.0).abs() < 1e-6);
    assert!((e.max_hb_given_e - 1.0).abs() < 1e-8);
    assert!(e.consistent);
    let (ch, h) = constant_channel();
    let e = extremal_output_entropies(&ch, TOL, 3, 1).unwrap();
    assert!((e.max_hb - h).abs() < 1e-8);
    assert!((e.min_hb_given_r - h).abs() < 1e-8);
    assert!((e.max_hb_given_e + h).abs() < 1e-8);
    assert!(e.consistent);
}

#[test]
fn extremal_entropies_of_dephasing_match_bloch_grid() {
    let ch = QuantumChannel::dephasing(0.5).unwrap();
    let e = extremal_output_entropies(&ch, 1e-9, 4, 5).unwrap();
    let ent = |rho: &DensityMatrix| channel_output_state(&ch, rho).unwrap();
    let (_, hb) = grid_extrema(|r| ent(r).entropy_of(&[1]).unwrap());
    let (hbr, _) = grid_extrema(|r| ent(r).conditional_entropy(&[1], &[0]).unwrap());
    let (_, hbe) = grid_extrema(|r| ent(r).conditional_entropy(&[1], &[2]).unwrap());
    for (opt, grid) in [(e.max_hb, hb), (-e.min_hb_given_r, -hbr), (e.max_hb_given_e, hbe)] {
        assert!(opt >= grid - 1e-9, "{opt} < {grid}");
        assert!(opt <= grid + 1e-3, "{opt} > {grid}");
    }
    assert!(e.consistent);
}

#[test]
fn spread_requirement_vanishes_on_examples() {
    assert_eq!(spread_requirement(&QuantumChannel::identity(2), 1e-9).unwrap().value, 0.0);
    assert_eq!(spread_requirement(&constant_channel().0, 1e-9).unwrap().value, 0.0);
    assert_eq!(spread_requirement(&QuantumChannel::measurement(2), 1e-9).unwrap().value, 0.0);
    assert_eq!(spread_requirement(&QuantumChannel::measurement(3), 1e-9).unwrap().value, 0.0);
}

#[test]
fn spread_requirement_vanishes_for_cq_channel() {
    let s0 = DensityMatrix::diagonal(&[1.0, 0.0]).unwrap();
    let plus = crate::quantum::CVec::from_vec(vec![c(0.5f64.sqrt()), c(0.5f64.sqrt())]);
    let s1 = DensityMatrix::pure(&plus).unwrap();
    let ch = QuantumChannel::classical_quantum(&[s0, s1]).unwrap();
    let s = spread_requirement(&ch, 1e-10).unwrap();
    assert_eq!(s.value, 0.0);
    assert!(s.raw.abs() < 1e-9);
}

#[test]
fn spread_requirement_of_amplitude_damping_matches_bloch_grid() {
    // The three maxima sit at different inputs, so the requirement is positive.
    let ch = QuantumChannel::amplitude_damping(0.3).unwrap();
    let s = spread_requirement(&ch, 1e-10).unwrap();
    let ent = |rho: &DensityMatrix| channel_output_state(&ch, rho).unwrap();
    let (_, hb) = grid_extrema(|r| ent(r).entropy_of(&[1]).unwrap());
    let (hbr, _) = grid_extrema(|r| ent(r).conditional_entropy(&[1], &[0]).unwrap());
    let (_, ce) = grid_extrema(|r| ent(r).mutual_information(&[0], &[1]).unwrap());
    assert!((s.raw - (hb - hbr - ce)).abs() < 1e-3, "{} vs {}", s.raw, hb - hbr - ce);
    assert!(s.value > 0.1);
}

#[test]
fn resource_check_examples() {
    let p = ChannelProfile::compute(&QuantumChannel::identity(2), TOL, 3, 1).unwrap();
    let emb = ResourceVector { q_fwd: p.q_e, emb: true, ..ResourceVector::zero() };
    assert!(feedback_resource_check(&p, &emb).achievable);
    let inf = ResourceVector { q_fwd: p.q_e, e: f64::INFINITY, ..ResourceVector::zero() };
    let chk = feedback_resource_check(&p, &inf);
    assert!(chk.achievable, "{chk:?}");
    let short = ResourceVector { q_fwd: p.q_e - 0.01, e: f64::INFINITY, c_bwd: 10.0, emb: true, ..ResourceVector::zero() };
    let chk = feedback_resource_check(&p, &short);
    assert!(!chk.achievable);
    assert_eq!(chk.binding, BindingConstraint::ForwardQuantum);
}

#[test]
fn back_communication_threshold() {
    // With Q_E forward qubits and max H(B) − Q_E ebits the check passes iff
    // back cbits cover max H(B) − min H(B|R) − C_E.
    let ch = QuantumChannel::amplitude_damping(0.3).unwrap();
    let p = ChannelProfile::compute(&ch, 1e-10, 4, 2).unwrap();
    let need = (p.max_hb - p.min_hb_given_r - p.c_e).max(0.0);
    let rv = |cb: f64| ResourceVector { q_fwd: p.q_e, c_bwd: cb, e: p.max_hb - p.q_e, ..ResourceVector::zero() };
    assert!(feedback_resource_check(&p, &rv(need + 1e-6)).achievable);
    if need > 1e-6 {
        let chk = feedback_resource_check(&p, &rv(need - 1e-6));
        assert!(!chk.achievable);
        assert_eq!(chk.binding, BindingConstraint::EntanglementWindow);
    }
}

#[test]
fn lowent_reduces_to_feedback_rates() {
    let ch = QuantumChannel::amplitude_damping(0.4).unwrap();
    let rho = DensityMatrix::diagonal(&[0.6, 0.4]).unwrap();
    let r = qrst_feedback_rates(&ch, &rho).unwrap();
    let v = lowent_region_check_n1(&ch, &rho, r.qubits_per_use, r.ebits_per_use, 2, 3).unwrap();
    assert!(v.achievable, "shortfall {}", v.shortfall);
    let v = lowent_region_check_n1(&ch, &rho, r.qubits_per_use - 0.05, 10.0, 2, 3).unwrap();
    assert!(!v.achievable);
    assert!(v.half_i_r_ebb >= r.qubits_per_use - 1e-9);
}

#[test]
fn lowent_without_entanglement_needs_purification_cost() {
    // Complete dephasing on max-mixed input: ρ_RB is the classically correlated
    // bit pair, whose single-copy purification cost is 1.
    let ch = QuantumChannel::dephasing(0.5).unwrap();
    let rho = DensityMatrix::maximally_mixed(2);
    assert!(lowent_region_check_n1(&ch, &rho, 1.0, 0.0, 2, 4).unwrap().achievable);
    assert!(!lowent_region_check_n1(&ch, &rho, 0.9, 0.0, 2, 4).unwrap().achievable);
}

fn bell_like(p: f64) -> DensityMatrix {
    let s = (p.sqrt(), (1.0 - p).sqrt());
    let v = crate::quantum::CVec::from_vec(vec![c(s.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), c(s.1)]);
    DensityMatrix::pure(&v).unwrap().with_dims(vec![2, 2]).unwrap()
}

#[test]
fn purification_of_pure_and_product_states() {
    let e = entanglement_of_purification(&bell_like(0.3), 2, 1).unwrap();
    assert!((e.value - h2(0.3)).abs() < 1e-10);
    assert!(e.witness.is_none());
    let a = DensityMatrix::diagonal(&[0.7, 0.3]).unwrap();
    let b = DensityMatrix::diagonal(&[0.6, 0.4]).unwrap();
    let prod = a.tensor(&b).unwrap().with_dims(vec![2, 2]).unwrap();
    let e = entanglement_of_purification(&prod, 2, 1).unwrap();
    assert!(e.value.abs() < 1e-6, "{}", e.value);
}

#[test]
fn purification_of_correlated_bits() {
    let m = DensityMatrix::diagonal(&[0.5, 0.0, 0.0, 0.5]).unwrap().with_dims(vec![2, 2]).unwrap();
    let e = entanglement_of_purification(&m, 3, 1).unwrap();
    assert!((e.value - 1.0).abs() < 1e-6, "{}", e.value);
    let two = e.two_copy_per_copy.unwrap();
    assert!((two - 1.0).abs() < 1e-6, "{two}");
}
