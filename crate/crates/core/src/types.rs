//! Method of types: type enumeration, exact type-class sizes, typical-set
//! masses and the joint-type sampler used by the type-class protocols.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rand::Rng;
use rand_distr::{Binomial, Distribution as _};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::classical::{ClassicalChannel, Distribution};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Above this block length multinomials switch from exact big integers to log-gamma.
pub const EXACT_MULTINOMIAL_MAX_N: usize = 300;

/// Symbol frequencies of a length-n string.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TypeVector {
    counts: Vec<usize>,
    n: usize,
}

impl TypeVector {
    pub fn new(counts: Vec<usize>) -> Self {
        let n = counts.iter().sum();
        Self { counts, n }
    }

    /// Type of a string over an alphabet of size `d`.
    pub fn of_string(s: &[usize], d: usize) -> Result<Self> {
        let mut counts = vec![0; d];
        for &c in s {
            if c >= d {
                return Err(Error::param(format!("symbol {c} outside alphabet of size {d}")));
            }
            counts[c] += 1;
        }
        Ok(Self::new(counts))
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    /// Empirical distribution t/n.
    pub fn empirical(&self) -> Vec<f64> {
        let n = self.n.max(1) as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }
}

/// Joint type over a product alphabet, stored row-major.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JointType {
    dims: Vec<usize>,
    counts: Vec<usize>,
    n: usize,
}

impl JointType {
    pub fn new(dims: Vec<usize>, counts: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.iter().product::<usize>() != counts.len() {
            return Err(Error::dims(format!("joint type counts do not match dims {dims:?}")));
        }
        let n = counts.iter().sum();
        Ok(Self { dims, counts, n })
    }

    /// Joint type of aligned strings, one per axis.
    pub fn of_strings(strings: &[&[usize]], dims: &[usize]) -> Result<Self> {
        if strings.len() != dims.len() {
            return Err(Error::dims("one string per axis required"));
        }
        let n = strings[0].len();
        if strings.iter().any(|s| s.len() != n) {
            return Err(Error::dims("strings have different lengths"));
        }
        let mut counts = vec![0; dims.iter().product()];
        for i in 0..n {
            let mut idx = 0;
            for (s, &d) in strings.iter().zip(dims) {
                if s[i] >= d {
                    return Err(Error::param(format!("symbol {} outside alphabet of size {d}", s[i])));
                }
                idx = idx * d + s[i];
            }
            counts[idx] += 1;
        }
        Ok(Self { dims: dims.to_vec(), counts, n })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get2(&self, x: usize, y: usize) -> usize {
        self.counts[x * self.dims[1] + y]
    }

    /// Marginal type on the listed axes, in that order.
    pub fn marginal(&self, axes: &[usize]) -> JointType {
        let out_dims: Vec<usize> = axes.iter().map(|&a| self.dims[a]).collect();
        let mut out = vec![0; out_dims.iter().product()];
        let mut idx = vec![0usize; self.dims.len()];
        for &c in &self.counts {
            let mut o = 0;
            for &a in axes {
                o = o * self.dims[a] + idx[a];
            }
            out[o] += c;
            for k in (0..idx.len()).rev() {
                idx[k] += 1;
                if idx[k] < self.dims[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        JointType { dims: out_dims, counts: out, n: self.n }
    }

    pub fn marginal_type(&self, axis: usize) -> TypeVector {
        TypeVector::new(self.marginal(&[axis]).counts)
    }

    /// Empirical joint distribution, as a flat table.
    pub fn empirical(&self) -> Vec<f64> {
        let n = self.n.max(1) as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }
}

/// All types of length-n strings over `d` symbols, in descending lexicographic order.
pub fn enumerate_types(n: usize, d: usize) -> Result<Vec<TypeVector>> {
    if d == 0 {
        return Err(Error::param("alphabet size must be at least 1"));
    }
    let mut out = Vec::new();
    let mut cur = vec![0usize; d];
    fn rec(pos: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<TypeVector>) {
        if pos + 1 == cur.len() {
            cur[pos] = left;
            out.push(TypeVector::new(cur.clone()));
            return;
        }
        for c in (0..=left).rev() {
            cur[pos] = c;
            rec(pos + 1, left - c, cur, out);
        }
    }
    rec(0, n, &mut cur, &mut out);
    Ok(out)
}

/// Every string of type `t`, in lexicographic order.
pub fn type_class_strings(t: &TypeVector) -> Vec<Vec<usize>> {
    let mut cur: Vec<usize> = t
        .counts()
        .iter()
        .enumerate()
        .flat_map(|(sym, &c)| std::iter::repeat(sym).take(c))
        .collect();
    let mut out = vec![cur.clone()];
    // next lexicographic permutation of a multiset
    loop {
        let Some(i) = (1..cur.len()).rev().find(|&i| cur[i - 1] < cur[i]) else {
            return out;
        };
        let j = (i..cur.len()).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
        cur.swap(i - 1, j);
        cur[i..].reverse();
        out.push(cur.clone());
    }
}

fn factorial(n: usize) -> BigUint {
    (2..=n).fold(BigUint::one(), |acc, k| acc * BigUint::from(k))
}

pub(crate) fn log2_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        x.to_f64().unwrap_or(f64::INFINITY).log2()
    } else {
        let shift = bits - 64;
        (x >> shift).to_f64().unwrap().log2() + shift as f64
    }
}

/// Exact multinomial coefficient n! / prod t_i!.
pub fn multinomial(counts: &[usize]) -> BigUint {
    let n: usize = counts.iter().sum();
    let den = counts.iter().fold(BigUint::one(), |acc, &c| acc * factorial(c));
    factorial(n) / den
}

/// log2 of the multinomial; exact for n up to `EXACT_MULTINOMIAL_MAX_N`, log-gamma beyond.
pub fn log2_multinomial(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    if n <= EXACT_MULTINOMIAL_MAX_N {
        log2_biguint(&multinomial(counts))
    } else {
        log2_multinomial_gamma(counts)
    }
}

pub(crate) fn log2_multinomial_gamma(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    let ln = ln_gamma(n as f64 + 1.0) - counts.iter().map(|&c| ln_gamma(c as f64 + 1.0)).sum::<f64>();
    ln / std::f64::consts::LN_2
}

/// log2 |T_t|, the number of strings of type t.
pub fn log_type_class_size(t: &TypeVector) -> f64 {
    log2_multinomial(t.counts())
}

/// Probability that an i.i.d. string from `p` has type `t`.
pub fn iid_type_probability(p: &Distribution, t: &TypeVector) -> Result<f64> {
    if p.alphabet_size() != t.dim() {
        return Err(Error::dims(format!(
            "distribution over {} symbols vs type over {}",
            p.alphabet_size(),
            t.dim()
        )));
    }
    let mut lp = log_type_class_size(t);
    for (&c, &px) in t.counts().iter().zip(p.probs()) {
        if c > 0 {
            if px == 0.0 {
                return Ok(0.0);
            }
            lp += c as f64 * px.log2();
        }
    }
    Ok(lp.exp2())
}

/// Exact mass of the types whose empirical distribution is within `delta` of `p` in 1-norm.
pub fn typical_mass(p: &Distribution, n: usize, delta: f64) -> Result<f64> {
    if delta <= 0.0 {
        return Err(Error::param("delta must be positive"));
    }
    let mut mass = 0.0;
    for t in enumerate_types(n, p.alphabet_size())? {
        let dist: f64 = t.empirical().iter().zip(p.probs()).map(|(a, b)| (a - b).abs()).sum();
        if dist <= delta + 1e-12 {
            mass += iid_type_probability(p, &t)?;
        }
    }
    Ok(mass.min(1.0))
}

/// Lower bound `1 - (n+1)^d exp(-n delta^2 / 2)` on the typical mass.
pub fn typical_mass_lower_bound(d: usize, n: usize, delta: f64) -> f64 {
    1.0 - ((d as f64) * ((n + 1) as f64).ln() - n as f64 * delta * delta / 2.0).exp()
}

/// Draws the joint type of (x^n, y^n) when y^n is the channel output on any
/// x^n of type `s`: independent multinomials per input symbol.
pub fn sample_joint_type(s: &TypeVector, channel: &ClassicalChannel, seed: u64) -> Result<JointType> {
    sample_joint_type_with(s, channel, &mut rng_from_seed(seed))
}

pub fn sample_joint_type_with<R: Rng + ?Sized>(
    s: &TypeVector,
    channel: &ClassicalChannel,
    rng: &mut R,
) -> Result<JointType> {
    if s.dim() != channel.input_size() {
        return Err(Error::dims("input type does not match channel input alphabet"));
    }
    let ny = channel.output_size();
    let mut counts = vec![0; s.dim() * ny];
    for (x, &sx) in s.counts().iter().enumerate() {
        let row = multinomial_sample(sx, channel.row(x), rng);
        counts[x * ny..(x + 1) * ny].copy_from_slice(&row);
    }
    JointType::new(vec![s.dim(), ny], counts)
}

/// Multinomial draw by sequential conditional binomials.
pub(crate) fn multinomial_sample<R: Rng + ?Sized>(n: usize, probs: &[f64], rng: &mut R) -> Vec<usize> {
    let mut out = vec![0; probs.len()];
    let mut left = n as u64;
    let mut mass = 1.0f64;
    let last = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
    for (i, &p) in probs.iter().enumerate() {
        if left == 0 {
            break;
        }
        if i == last {
            out[i] = left as usize;
            break;
        }
        if p <= 0.0 {
            continue;
        }
        let q = (p / mass).clamp(0.0, 1.0);
        let k = Binomial::new(left, q).expect("valid binomial").sample(rng);
        out[i] = k as usize;
        left -= k;
        mass -= p;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    use std::collections::HashMap;

    #[test]
    fn enumeration_examples() {
        let t = enumerate_types(2, 2).unwrap();
        let c: Vec<_> = t.iter().map(|t| t.counts().to_vec()).collect();
        assert_eq!(c, vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(enumerate_types(0, 3).unwrap()[0].counts(), &[0, 0, 0]);
        assert!(enumerate_types(3, 0).is_err());
    }

    #[test]
    fn enumeration_matches_string_dedup() {
        for (n, d) in [(4usize, 2usize), (3, 3), (5, 3), (2, 4)] {
            let mut seen = std::collections::BTreeSet::new();
            let total = d.pow(n as u32);
            for code in 0..total {
                let s: Vec<usize> = (0..n).map(|i| (code / d.pow(i as u32)) % d).collect();
                seen.insert(TypeVector::of_string(&s, d).unwrap().counts().to_vec());
            }
            let types = enumerate_types(n, d).unwrap();
            assert_eq!(types.len(), seen.len());
            for w in types.windows(2) {
                assert!(w[0].counts() > w[1].counts());
            }
        }
        assert_eq!(enumerate_types(4, 2).unwrap().len(), 5);
    }

    #[test]
    fn class_size_examples() {
        assert!((log_type_class_size(&TypeVector::new(vec![2, 2])) - 6f64.log2()).abs() < 1e-14);
        assert_eq!(log_type_class_size(&TypeVector::new(vec![7, 0])), 0.0);
        // brute-force count of strings with type (3,2,1)
        let mut count = 0;
        for code in 0..3usize.pow(6) {
            let s: Vec<usize> = (0..6).map(|i| (code / 3usize.pow(i)) % 3).collect();
            if TypeVector::of_string(&s, 3).unwrap().counts() == [3, 2, 1] {
                count += 1;
            }
        }
        assert_eq!(count, 60);
        assert!((log_type_class_size(&TypeVector::new(vec![3, 2, 1])) - 60f64.log2()).abs() < 1e-14);
    }

    #[test]
    fn class_strings_are_complete() {
        let t = TypeVector::new(vec![2, 1, 1]);
        let strings = type_class_strings(&t);
        assert_eq!(strings.len(), 12);
        assert!(strings.windows(2).all(|w| w[0] < w[1]));
        assert!(strings.iter().all(|s| TypeVector::of_string(s, 3).unwrap() == t));
        assert_eq!(type_class_strings(&TypeVector::new(vec![0, 3])), vec![vec![1, 1, 1]]);
    }

    #[test]
    fn big_int_and_gamma_agree_at_crossover() {
        for counts in [vec![150, 150], vec![100, 120, 80], vec![300, 0], vec![1, 299], vec![75; 4]] {
            let exact = log2_biguint(&multinomial(&counts));
            let approx = log2_multinomial_gamma(&counts);
            let rel = (exact - approx).abs() / exact.max(1.0);
            assert!(rel < 1e-9, "{counts:?}: {exact} vs {approx}");
        }
    }

    #[test]
    fn type_probability_examples() {
        let u = Distribution::uniform(2);
        assert!((iid_type_probability(&u, &TypeVector::new(vec![1, 1])).unwrap() - 0.5).abs() < 1e-15);
        let pm = Distribution::point_mass(2, 0);
        assert_eq!(iid_type_probability(&pm, &TypeVector::new(vec![9, 0])).unwrap(), 1.0);
        assert_eq!(iid_type_probability(&pm, &TypeVector::new(vec![8, 1])).unwrap(), 0.0);
        let p = Distribution::new(vec![0.7, 0.3]).unwrap();
        assert!((iid_type_probability(&p, &TypeVector::new(vec![1, 1])).unwrap() - 0.42).abs() < 1e-14);
        assert!(iid_type_probability(&p, &TypeVector::new(vec![1, 1, 0])).is_err());
    }

    #[test]
    fn type_probabilities_sum_to_one() {
        let ps = [vec![0.5, 0.5], vec![0.2, 0.3, 0.5], vec![0.1, 0.2, 0.3, 0.4], vec![0.0, 0.25, 0.75]];
        for probs in ps {
            let p = Distribution::new(probs).unwrap();
            for n in [1, 5, 13, 20] {
                let total: f64 = enumerate_types(n, p.alphabet_size())
                    .unwrap()
                    .iter()
                    .map(|t| iid_type_probability(&p, t).unwrap())
                    .sum();
                assert!((total - 1.0).abs() < 1e-9, "n={n} total={total}");
            }
        }
    }

    #[test]
    fn class_size_sandwich() {
        for d in 1..=4 {
            for n in [1, 4, 9, 16] {
                for t in enumerate_types(n, d).unwrap() {
                    let h = crate::classical::entropy_of(&t.empirical());
                    let upper = n as f64 * h;
                    let lower = upper - d as f64 * ((n + 1) as f64).log2();
                    let l = log_type_class_size(&t);
                    assert!(l <= upper + 1e-9 && l >= lower - 1e-9, "{:?}", t.counts());
                }
            }
        }
    }

    #[test]
    fn typical_mass_examples() {
        let u = Distribution::uniform(2);
        assert!((typical_mass(&u, 30, 2.0).unwrap() - 1.0).abs() < 1e-12);
        let pm = Distribution::point_mass(3, 2);
        assert!((typical_mass(&pm, 30, 0.01).unwrap() - 1.0).abs() < 1e-12);
        // |k/100 - 1/2| * 2 <= 0.2  <=>  40 <= k <= 60; exact binomial sum
        let exact: f64 = (40..=60u64)
            .map(|k| {
                let c = multinomial(&[k as usize, 100 - k as usize]);
                log2_biguint(&c).exp2() * 0.5f64.powi(100)
            })
            .sum();
        let m = typical_mass(&u, 100, 0.2).unwrap();
        assert!((m - exact).abs() < 1e-12);
        assert!((0.954..=1.0).contains(&m));
        assert!(m >= typical_mass_lower_bound(2, 100, 0.2));
        assert!(typical_mass(&u, 10, 0.0).is_err());
    }

    #[test]
    fn sampler_degenerate_channels() {
        let s = TypeVector::new(vec![3, 5, 2]);
        let t = sample_joint_type(&s, &ClassicalChannel::identity(3), 4).unwrap();
        assert_eq!(t.counts(), &[3, 0, 0, 0, 5, 0, 0, 0, 2]);
        let c = ClassicalChannel::constant(3, &Distribution::point_mass(4, 1));
        let t = sample_joint_type(&s, &c, 5).unwrap();
        for x in 0..3 {
            assert_eq!(t.get2(x, 1), s.counts()[x]);
        }
    }

    #[test]
    fn sampler_matches_exact_law_chi_square() {
        let ch = ClassicalChannel::bsc(0.3).unwrap();
        let s = TypeVector::new(vec![6, 4]);
        let x: Vec<usize> = [vec![0; 6], vec![1; 4]].concat();
        // exact law by enumerating every output string
        let mut exact: HashMap<Vec<usize>, f64> = HashMap::new();
        for code in 0..(1usize << 10) {
            let y: Vec<usize> = (0..10).map(|i| (code >> i) & 1).collect();
            let w: f64 = x.iter().zip(&y).map(|(&a, &b)| ch.prob(a, b)).product();
            let t = JointType::of_strings(&[&x, &y], &[2, 2]).unwrap();
            *exact.entry(t.counts().to_vec()).or_default() += w;
        }
        let samples = 100_000;
        let mut rng = rng_from_seed(11);
        let mut seen: HashMap<Vec<usize>, usize> = HashMap::new();
        for _ in 0..samples {
            let t = sample_joint_type_with(&s, &ch, &mut rng).unwrap();
            assert_eq!(t.marginal_type(0), s);
            *seen.entry(t.counts().to_vec()).or_default() += 1;
        }
        assert!(seen.keys().all(|k| exact.contains_key(k)));
        let mut cells: Vec<(f64, f64)> = Vec::new();
        let (mut pool_e, mut pool_o) = (0.0, 0.0);
        for (k, &p) in &exact {
            let e = p * samples as f64;
            let o = *seen.get(k).unwrap_or(&0) as f64;
            if e < 5.0 {
                pool_e += e;
                pool_o += o;
            } else {
                cells.push((e, o));
            }
        }
        if pool_e > 0.0 {
            cells.push((pool_e, pool_o));
        }
        let stat: f64 = cells.iter().map(|(e, o)| (o - e) * (o - e) / e).sum();
        let df = (cells.len() - 1) as f64;
        let pval = 1.0 - ChiSquared::new(df).unwrap().cdf(stat);
        assert!(pval > 0.01, "chi-square p-value {pval}");
    }

    proptest! {
        #[test]
        fn sampler_preserves_input_marginal(
            counts in prop::collection::vec(0usize..40, 1..5),
            seed in any::<u64>(),
            bias in 0.0f64..1.0,
        ) {
            let d = counts.len();
            let rows: Vec<Vec<f64>> = (0..d)
                .map(|x| {
                    let mut r = vec![(1.0 - bias) / 3.0; 3];
                    r[x % 3] += bias;
                    r
                })
                .collect();
            let ch = ClassicalChannel::new(rows).unwrap();
            let s = TypeVector::new(counts);
            let t = sample_joint_type(&s, &ch, seed).unwrap();
            prop_assert_eq!(t.marginal_type(0), s);
        }
    }
}
