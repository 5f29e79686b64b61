//! Type-class simulation protocols for n uses of a classical channel.
//!
//! Alice draws a joint type with the exact law it has under the channel, sends
//! it, and the remaining work is a flat simulation inside the type class.
//! Small type classes are enumerated and simulated with a certified partition;
//! large ones use the partition-averaged output law, which is uniform over the
//! conditional type class.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classical::{l1, ClassicalChannel, Distribution};
use crate::error::{Error, Result};
use crate::flat::{find_good_partition, UnweightedChannel};
use crate::rng::{derive_seed, rng_from_seed, sample_discrete, shuffle, trial_rng};
use crate::types::{log2_multinomial, sample_joint_type_with, type_class_strings, JointType, TypeVector};

/// Type classes with |X|·|Y| up to 2^16 strings pairs are simulated explicitly.
pub const EXPLICIT_LOG2_PAIRS: f64 = 16.0;
const EXPLICIT_RESTARTS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    /// Type classes enumerated; certified partition; the actual three-step protocol.
    Explicit,
    /// Output drawn from the protocol's law averaged over partitions.
    Averaged,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationTranscript {
    pub n: usize,
    pub input_string: Vec<usize>,
    pub output_string: Vec<usize>,
    pub joint_type_sent: JointType,
    /// log2 m plus the type overhead.
    pub message_bits: f64,
    pub type_overhead_bits: f64,
    /// log2 r.
    pub randomness_bits: f64,
    pub gamma: f64,
    pub backend: Backend,
}

impl SimulationTranscript {
    pub fn message_rate(&self) -> f64 {
        self.message_bits / self.n as f64
    }

    pub fn randomness_rate(&self) -> f64 {
        self.randomness_bits / self.n as f64
    }
}

fn check_input(x: &[usize], nx: usize, eps: f64) -> Result<()> {
    if x.is_empty() {
        return Err(Error::param("input string must be nonempty"));
    }
    if let Some(&s) = x.iter().find(|&&s| s >= nx) {
        return Err(Error::param(format!("input symbol {s} outside alphabet of size {nx}")));
    }
    if !(eps > 0.0 && eps <= 2.0) {
        return Err(Error::param(format!("eps = {eps} outside (0, 2]")));
    }
    Ok(())
}

fn ln_two_times(log2_size: f64) -> f64 {
    std::f64::consts::LN_2 * (1.0 + log2_size)
}

/// Uniform string y with (x, y) of joint type `t`: within each input symbol's
/// positions, shuffle that symbol's output labels.
fn conditional_uniform<R: Rng + ?Sized>(x: &[usize], t: &JointType, rng: &mut R) -> Vec<usize> {
    let (nx, ny) = (t.dims()[0], t.dims()[1]);
    let mut y = vec![0; x.len()];
    for a in 0..nx {
        let mut labels: Vec<usize> = (0..ny).flat_map(|b| std::iter::repeat(b).take(t.get2(a, b))).collect();
        shuffle(&mut labels, rng);
        let mut it = labels.into_iter();
        for (i, &xi) in x.iter().enumerate() {
            if xi == a {
                y[i] = it.next().expect("type marginal matches input");
            }
        }
    }
    y
}

/// Simulates n uses of `channel` with feedback on input `x`.
pub fn crst_feedback_simulate(
    channel: &ClassicalChannel,
    x: &[usize],
    eps: f64,
    seed: u64,
) -> Result<SimulationTranscript> {
    let (nx, ny) = (channel.input_size(), channel.output_size());
    check_input(x, nx, eps)?;
    let n = x.len();
    let mut rng = rng_from_seed(seed);
    let s = TypeVector::of_string(x, nx)?;
    let t = sample_joint_type_with(&s, channel, &mut rng)?;
    let ty = t.marginal_type(1);
    let lx = log2_multinomial(s.counts());
    let ly = log2_multinomial(ty.counts());
    let le = log2_multinomial(t.counts());
    let gamma = 2.0 * ln_two_times(le) / (eps * eps);
    let overhead = (nx * ny) as f64 * ((n + 1) as f64).log2();

    if lx + ly <= EXPLICIT_LOG2_PAIRS {
        let xs = type_class_strings(&s);
        let ys = type_class_strings(&ty);
        let neighbors: Vec<Vec<usize>> = xs
            .iter()
            .map(|xa| {
                (0..ys.len())
                    .filter(|&j| JointType::of_strings(&[xa, &ys[j]], &[nx, ny]).map(|u| u == t).unwrap_or(false))
                    .collect()
            })
            .collect();
        let g = UnweightedChannel::new(xs.len(), ys.len(), neighbors)?;
        let cert = find_good_partition(&g, eps, gamma, EXPLICIT_RESTARTS, derive_seed(seed, 1))?;
        let xi = xs.binary_search(&x.to_vec()).expect("input lies in its own type class");
        let block = &cert.partition.blocks()[rng.random_range(0..cert.params.r)];
        let hits: Vec<usize> = (0..block.len()).filter(|&j| g.contains(xi, block[j])).collect();
        let j = if hits.is_empty() { 0 } else { hits[rng.random_range(0..hits.len())] };
        return Ok(SimulationTranscript {
            n,
            input_string: x.to_vec(),
            output_string: ys[block[j]].clone(),
            joint_type_sent: t,
            message_bits: (cert.params.m as f64).log2() + overhead,
            type_overhead_bits: overhead,
            randomness_bits: (cert.params.r as f64).log2(),
            gamma: cert.params.gamma,
            backend: Backend::Explicit,
        });
    }

    let log_m = (lx + ly + gamma.log2() - le).min(ly).max(0.0);
    let y = conditional_uniform(x, &t, &mut rng);
    Ok(SimulationTranscript {
        n,
        input_string: x.to_vec(),
        output_string: y,
        joint_type_sent: t,
        message_bits: log_m + overhead,
        type_overhead_bits: overhead,
        randomness_bits: ly - log_m,
        gamma,
        backend: Backend::Averaged,
    })
}

/// Simulates n uses of `n2 ∘ n1` without feedback, routing through the intermediate alphabet.
pub fn crst_twostage_simulate(
    n1: &ClassicalChannel,
    n2: &ClassicalChannel,
    x: &[usize],
    eps: f64,
    seed: u64,
) -> Result<SimulationTranscript> {
    let (nx, nw, ny) = (n1.input_size(), n1.output_size(), n2.output_size());
    if n2.input_size() != nw {
        return Err(Error::dims("N2 input alphabet must equal N1 output alphabet"));
    }
    check_input(x, nx, eps)?;
    let n = x.len();
    let mut rng = rng_from_seed(seed);
    let w_hat: Vec<usize> = x.iter().map(|&a| sample_discrete(n1.row(a), &mut rng)).collect();
    let y_hat: Vec<usize> = w_hat.iter().map(|&b| sample_discrete(n2.row(b), &mut rng)).collect();
    let t = JointType::of_strings(&[x, &w_hat, &y_hat], &[nx, nw, ny])?;
    let lx = log2_multinomial(t.marginal(&[0]).counts());
    let lw = log2_multinomial(t.marginal(&[1]).counts());
    let t_xw = t.marginal(&[0, 1]);
    let t_wy = t.marginal(&[1, 2]);
    let l_xw = log2_multinomial(t_xw.counts());
    let l_xy = log2_multinomial(t.marginal(&[0, 2]).counts());
    let l_wy = log2_multinomial(t_wy.counts());
    let gamma = 32.0 * ln_two_times(l_xy) / (eps * eps);
    let log_r = (l_xy + lw - l_wy - lx).max(0.0);
    let log_m = (lx + lw + gamma.log2() - l_xw).min(lw - log_r).max(0.0);
    let overhead = (nx * nw * ny) as f64 * ((n + 1) as f64).log2();

    let w = conditional_uniform(x, &t_xw, &mut rng);
    let y = conditional_uniform(&w, &t_wy, &mut rng);
    Ok(SimulationTranscript {
        n,
        input_string: x.to_vec(),
        output_string: y,
        joint_type_sent: t,
        message_bits: log_m + overhead,
        type_overhead_bits: overhead,
        randomness_bits: log_r,
        gamma,
        backend: Backend::Averaged,
    })
}

/// Aggregate of many independent protocol runs on i.i.d. inputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloSummary {
    pub trials: usize,
    pub n: usize,
    pub mean_message_rate: f64,
    pub mean_randomness_rate: f64,
    pub max_message_rate: f64,
    pub max_randomness_rate: f64,
    /// Pooled empirical joint law of (x_i, y_i), row-major.
    pub empirical_joint: Vec<f64>,
    /// 1-norm distance from the true joint law p(x)N(y|x).
    pub joint_tv: f64,
}

/// Which protocol a Monte Carlo run exercises.
#[derive(Clone, Debug)]
pub enum ProtocolSpec<'a> {
    Feedback(&'a ClassicalChannel),
    TwoStage(&'a ClassicalChannel, &'a ClassicalChannel),
}

/// Runs `trials` protocol instances with inputs drawn i.i.d. from `p`.
/// Trial k uses stream k of `seed` for its input and protocol seed.
pub fn crst_monte_carlo(
    spec: ProtocolSpec<'_>,
    p: &Distribution,
    n: usize,
    eps: f64,
    trials: usize,
    seed: u64,
) -> Result<MonteCarloSummary> {
    if trials == 0 || n == 0 {
        return Err(Error::param("trials and n must be positive"));
    }
    let target = match &spec {
        ProtocolSpec::Feedback(ch) => (*ch).clone(),
        ProtocolSpec::TwoStage(a, b) => a.then(b)?,
    };
    let (nx, ny) = (target.input_size(), target.output_size());
    if p.alphabet_size() != nx {
        return Err(Error::dims("input distribution does not match channel"));
    }
    let runs: Vec<Result<(f64, f64, Vec<usize>)>> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = trial_rng(seed, k as u64);
            let x: Vec<usize> = (0..n).map(|_| sample_discrete(p.probs(), &mut rng)).collect();
            let s = rng.random::<u64>();
            let tr = match &spec {
                ProtocolSpec::Feedback(ch) => crst_feedback_simulate(ch, &x, eps, s)?,
                ProtocolSpec::TwoStage(a, b) => crst_twostage_simulate(a, b, &x, eps, s)?,
            };
            let mut counts = vec![0usize; nx * ny];
            for (&a, &b) in tr.input_string.iter().zip(&tr.output_string) {
                counts[a * ny + b] += 1;
            }
            Ok((tr.message_rate(), tr.randomness_rate(), counts))
        })
        .collect();
    let mut counts = vec![0usize; nx * ny];
    let (mut msg, mut rnd, mut max_msg, mut max_rnd) = (0.0, 0.0, 0.0f64, 0.0f64);
    for r in runs {
        let (m, q, c) = r?;
        msg += m;
        rnd += q;
        max_msg = max_msg.max(m);
        max_rnd = max_rnd.max(q);
        for (t, v) in counts.iter_mut().zip(c) {
            *t += v;
        }
    }
    let total = (trials * n) as f64;
    let empirical: Vec<f64> = counts.iter().map(|&c| c as f64 / total).collect();
    let truth: Vec<f64> = target.joint(p)?.table().to_vec();
    Ok(MonteCarloSummary {
        trials,
        n,
        mean_message_rate: msg / trials as f64,
        mean_randomness_rate: rnd / trials as f64,
        max_message_rate: max_msg,
        max_randomness_rate: max_rnd,
        joint_tv: l1(&empirical, &truth),
        empirical_joint: empirical,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{conditional_entropy, mutual_information, JointDistribution};

    #[test]
    fn identity_channel_copies_input() {
        let x = vec![0, 1, 1, 0, 2];
        let tr = crst_feedback_simulate(&ClassicalChannel::identity(3), &x, 0.2, 5).unwrap();
        assert_eq!(tr.output_string, x);
        assert_eq!(tr.backend, Backend::Explicit);
        // Bob must learn which of the 5!/(2!2!1!) = 30 strings of this type was sent
        assert!(tr.randomness_bits.abs() < 1e-12);
        assert!((tr.message_bits - tr.type_overhead_bits - 30f64.log2()).abs() < 1e-12);
        let x = vec![1; 500];
        let tr = crst_feedback_simulate(&ClassicalChannel::identity(3), &x, 0.2, 5).unwrap();
        assert_eq!(tr.output_string, x);
        assert!((tr.message_bits - tr.type_overhead_bits).abs() < 1e-9);
    }

    #[test]
    fn identity_channel_message_is_input_entropy() {
        let x: Vec<usize> = (0..1000).map(|i| i % 2).collect();
        let tr = crst_feedback_simulate(&ClassicalChannel::identity(2), &x, 0.2, 1).unwrap();
        assert_eq!(tr.output_string, x);
        assert_eq!(tr.backend, Backend::Averaged);
        let payload = (tr.message_bits - tr.type_overhead_bits) / 1000.0;
        assert!((payload - 1.0).abs() < 0.01, "{payload}");
        assert!(tr.randomness_bits.abs() < 1e-9);
    }

    #[test]
    fn constant_channel_costs_overhead_only() {
        let ch = ClassicalChannel::constant(2, &Distribution::point_mass(3, 2));
        let x: Vec<usize> = (0..300).map(|i| (i * 7) % 2).collect();
        let tr = crst_feedback_simulate(&ch, &x, 0.1, 3).unwrap();
        assert!(tr.output_string.iter().all(|&y| y == 2));
        assert!((tr.message_bits - tr.type_overhead_bits).abs() < 1e-9);
    }

    #[test]
    fn explicit_backend_is_deterministic_and_consistent() {
        let ch = ClassicalChannel::bsc(0.3).unwrap();
        let x = vec![0, 0, 1, 1, 0, 1, 0, 0];
        let a = crst_feedback_simulate(&ch, &x, 0.5, 42).unwrap();
        let b = crst_feedback_simulate(&ch, &x, 0.5, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.backend, Backend::Explicit);
        let t = JointType::of_strings(&[&a.input_string, &a.output_string], &[2, 2]).unwrap();
        assert_eq!(t, a.joint_type_sent);
    }

    #[test]
    fn costs_track_empirical_information() {
        let ch = ClassicalChannel::bsc(0.11).unwrap();
        let mut rng = rng_from_seed(8);
        let x: Vec<usize> = (0..2000).map(|_| rng.random_range(0..2)).collect();
        let tr = crst_feedback_simulate(&ch, &x, 0.1, 9).unwrap();
        let j = JointDistribution::new(vec![2, 2], tr.joint_type_sent.empirical()).unwrap();
        let i = mutual_information(&j).unwrap();
        let h = conditional_entropy(&j).unwrap();
        let slack = 3.0 * (2001f64).log2() * 4.0 / 2000.0;
        assert!(tr.message_rate() <= i + slack);
        assert!(tr.randomness_rate() <= h + slack);
        assert!(tr.message_rate() >= i - slack);
    }

    #[test]
    fn twostage_with_identity_second_stage_matches_feedback_costs() {
        // with W = Y both protocols charge I(X;Y) and H(Y|X) of their own sampled type
        let ch = ClassicalChannel::bsc(0.2).unwrap();
        let id = ClassicalChannel::identity(2);
        let mut rng = rng_from_seed(3);
        let x: Vec<usize> = (0..2000).map(|_| rng.random_range(0..2)).collect();
        let f = crst_feedback_simulate(&ch, &x, 0.2, 4).unwrap();
        let t = crst_twostage_simulate(&ch, &id, &x, 0.2, 4).unwrap();
        let jf = JointDistribution::new(vec![2, 2], f.joint_type_sent.empirical()).unwrap();
        let jt = JointDistribution::new(vec![2, 2], t.joint_type_sent.marginal(&[0, 2]).empirical()).unwrap();
        let fm = (f.message_bits - f.type_overhead_bits) / 2000.0;
        let tm = (t.message_bits - t.type_overhead_bits) / 2000.0;
        let (i_f, i_t) = (mutual_information(&jf).unwrap(), mutual_information(&jt).unwrap());
        assert!((fm - i_f).abs() < 0.02, "{fm} vs {i_f}");
        assert!((tm - i_t).abs() < 0.02, "{tm} vs {i_t}");
        assert!((f.randomness_rate() - conditional_entropy(&jf).unwrap()).abs() < 0.02);
        assert!((t.randomness_rate() - conditional_entropy(&jt).unwrap()).abs() < 0.02);
    }

    #[test]
    fn twostage_with_identity_first_stage_sends_input() {
        let ch = ClassicalChannel::bsc(0.2).unwrap();
        let id = ClassicalChannel::identity(2);
        let mut rng = rng_from_seed(5);
        let x: Vec<usize> = (0..2000).map(|_| usize::from(rng.random::<f64>() < 0.3)).collect();
        let t = crst_twostage_simulate(&id, &ch, &x, 0.2, 6).unwrap();
        let hx = TypeVector::of_string(&x, 2).unwrap();
        let hx = crate::classical::entropy_of(&hx.empirical());
        let payload = (t.message_bits - t.type_overhead_bits) / 2000.0;
        assert!((payload - hx).abs() < 0.01, "{payload} vs {hx}");
        assert!(t.randomness_rate() < 1e-9);
    }

    #[test]
    fn bsc_chain_costs_near_single_letter_targets() {
        let n1 = ClassicalChannel::bsc(0.1).unwrap();
        let n2 = ClassicalChannel::bsc(0.15).unwrap();
        let p = Distribution::uniform(2);
        let s = crst_monte_carlo(ProtocolSpec::TwoStage(&n1, &n2), &p, 2000, 0.2, 64, 1).unwrap();
        let i_xw = n1.mutual_information(&p).unwrap();
        // I(XY;W) - I(X;W) = I(Y;W|X) = H(Y|X) - H(Y|W)
        let h_y_x = crate::classical::h2(0.1 * 0.85 + 0.9 * 0.15);
        let target_r = h_y_x - crate::classical::h2(0.15);
        assert!((s.mean_message_rate - i_xw).abs() < 0.1, "{}", s.mean_message_rate);
        assert!((s.mean_randomness_rate - target_r).abs() < 0.1, "{}", s.mean_randomness_rate);
        assert!(s.joint_tv < 0.05);
    }

    #[test]
    fn bad_inputs_are_rejected() {
        let ch = ClassicalChannel::bsc(0.1).unwrap();
        assert!(crst_feedback_simulate(&ch, &[], 0.1, 0).is_err());
        assert!(crst_feedback_simulate(&ch, &[0, 2], 0.1, 0).is_err());
        assert!(crst_feedback_simulate(&ch, &[0, 1], 0.0, 0).is_err());
    }
}
