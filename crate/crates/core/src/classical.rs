//! Finite distributions, classical channels and Shannon-entropic functionals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for the unit-sum check on probability vectors.
pub const PROB_TOL: f64 = 1e-9;

/// `-x log2 x`, with `0 log 0 = 0`.
#[inline]
pub fn eta(x: f64) -> f64 {
    if x > 0.0 {
        -x * x.log2()
    } else {
        0.0
    }
}

/// Entropy of a nonnegative weight vector, without validation.
pub fn entropy_of(weights: &[f64]) -> f64 {
    weights.iter().map(|&p| eta(p)).sum::<f64>().max(0.0)
}

fn check_probs(probs: &mut [f64], what: &str) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::InvalidDistribution(format!("{what}: empty")));
    }
    for (i, p) in probs.iter().enumerate() {
        if !p.is_finite() || *p < 0.0 {
            return Err(Error::InvalidDistribution(format!(
                "{what}: entry {i} = {p} is negative or not finite"
            )));
        }
    }
    let s: f64 = probs.iter().sum();
    if (s - 1.0).abs() > PROB_TOL {
        return Err(Error::InvalidDistribution(format!(
            "{what}: entries sum to {s}, not 1"
        )));
    }
    for p in probs.iter_mut() {
        *p /= s;
    }
    Ok(())
}

/// Probability vector over a finite alphabet.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    /// Validates and renormalizes; rejects negative entries and sums off by more than `PROB_TOL`.
    pub fn new(mut probs: Vec<f64>) -> Result<Self> {
        check_probs(&mut probs, "distribution")?;
        Ok(Self { probs })
    }

    pub fn uniform(d: usize) -> Self {
        assert!(d > 0, "uniform distribution needs a nonempty alphabet");
        Self { probs: vec![1.0 / d as f64; d] }
    }

    pub fn point_mass(d: usize, i: usize) -> Self {
        assert!(i < d);
        let mut probs = vec![0.0; d];
        probs[i] = 1.0;
        Self { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn alphabet_size(&self) -> usize {
        self.probs.len()
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.probs.iter().enumerate().filter(|(_, &p)| p > 0.0).map(|(i, _)| i)
    }

    pub fn entropy(&self) -> f64 {
        entropy_of(&self.probs)
    }
}

/// Joint probability table with an arbitrary number of axes, stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointDistribution {
    dims: Vec<usize>,
    table: Vec<f64>,
}

impl JointDistribution {
    pub fn new(dims: Vec<usize>, mut table: Vec<f64>) -> Result<Self> {
        let size: usize = dims.iter().product();
        if dims.is_empty() || size != table.len() {
            return Err(Error::dims(format!(
                "table of length {} does not match dims {:?}",
                table.len(),
                dims
            )));
        }
        check_probs(&mut table, "joint distribution")?;
        Ok(Self { dims, table })
    }

    /// Two-axis joint from a matrix of rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let nx = rows.len();
        let ny = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != ny) {
            return Err(Error::dims("ragged joint table"));
        }
        Self::new(vec![nx, ny], rows.concat())
    }

    /// Product distribution p(x)q(y).
    pub fn product(p: &Distribution, q: &Distribution) -> Self {
        let table = p
            .probs()
            .iter()
            .flat_map(|&a| q.probs().iter().map(move |&b| a * b))
            .collect();
        Self { dims: vec![p.alphabet_size(), q.alphabet_size()], table }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    /// Entry at a two-axis index.
    pub fn get2(&self, x: usize, y: usize) -> f64 {
        debug_assert_eq!(self.dims.len(), 2);
        self.table[x * self.dims[1] + y]
    }

    /// Marginal on the listed axes, in the listed order.
    pub fn marginal(&self, axes: &[usize]) -> Result<JointDistribution> {
        if axes.is_empty() || axes.iter().any(|&a| a >= self.dims.len()) {
            return Err(Error::dims(format!("bad marginal axes {axes:?}")));
        }
        let out_dims: Vec<usize> = axes.iter().map(|&a| self.dims[a]).collect();
        let mut out = vec![0.0; out_dims.iter().product()];
        let mut idx = vec![0usize; self.dims.len()];
        for &v in &self.table {
            let mut o = 0;
            for &a in axes {
                o = o * self.dims[a] + idx[a];
            }
            out[o] += v;
            for k in (0..idx.len()).rev() {
                idx[k] += 1;
                if idx[k] < self.dims[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        Ok(JointDistribution { dims: out_dims, table: out })
    }

    /// Single-axis marginal as a distribution.
    pub fn marginal_distribution(&self, axis: usize) -> Result<Distribution> {
        let m = self.marginal(&[axis])?;
        Ok(Distribution { probs: m.table })
    }

    pub fn entropy(&self) -> f64 {
        entropy_of(&self.table)
    }

    /// Entropy of the marginal on `axes`.
    pub fn entropy_of_axes(&self, axes: &[usize]) -> Result<f64> {
        Ok(self.marginal(axes)?.entropy())
    }
}

/// Row-stochastic matrix N(y|x).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalChannel {
    input_size: usize,
    output_size: usize,
    matrix: Vec<f64>,
}

impl ClassicalChannel {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let input_size = rows.len();
        if input_size == 0 {
            return Err(Error::InvalidChannel("no input symbols".into()));
        }
        let output_size = rows[0].len();
        let mut matrix = Vec::with_capacity(input_size * output_size);
        for (x, mut row) in rows.into_iter().enumerate() {
            if row.len() != output_size {
                return Err(Error::InvalidChannel(format!(
                    "row {x} has length {} but expected {output_size}",
                    row.len()
                )));
            }
            check_probs(&mut row, &format!("row {x}"))
                .map_err(|e| Error::InvalidChannel(e.to_string()))?;
            matrix.extend(row);
        }
        Ok(Self { input_size, output_size, matrix })
    }

    pub fn identity(d: usize) -> Self {
        let mut matrix = vec![0.0; d * d];
        for i in 0..d {
            matrix[i * d + i] = 1.0;
        }
        Self { input_size: d, output_size: d, matrix }
    }

    /// Every input maps to the same output distribution.
    pub fn constant(input_size: usize, out: &Distribution) -> Self {
        let matrix = (0..input_size).flat_map(|_| out.probs().iter().copied()).collect();
        Self { input_size, output_size: out.alphabet_size(), matrix }
    }

    /// Binary symmetric channel with crossover probability `p`.
    pub fn bsc(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::param(format!("crossover {p} outside [0,1]")));
        }
        Self::new(vec![vec![1.0 - p, p], vec![p, 1.0 - p]])
    }

    /// Binary erasure channel; output 2 is the erasure symbol.
    pub fn bec(e: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&e) {
            return Err(Error::param(format!("erasure probability {e} outside [0,1]")));
        }
        Self::new(vec![vec![1.0 - e, 0.0, e], vec![0.0, 1.0 - e, e]])
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }

    pub fn output_size(&self) -> usize {
        self.output_size
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.matrix[x * self.output_size..(x + 1) * self.output_size]
    }

    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.matrix[x * self.output_size + y]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.input_size).map(|x| self.row(x).to_vec()).collect()
    }

    /// `other ∘ self`: first apply `self`, then `other`.
    pub fn then(&self, other: &ClassicalChannel) -> Result<ClassicalChannel> {
        if self.output_size != other.input_size {
            return Err(Error::dims(format!(
                "cannot compose channel with {} outputs into one with {} inputs",
                self.output_size, other.input_size
            )));
        }
        let mut matrix = vec![0.0; self.input_size * other.output_size];
        for x in 0..self.input_size {
            for w in 0..self.output_size {
                let a = self.prob(x, w);
                if a == 0.0 {
                    continue;
                }
                for y in 0..other.output_size {
                    matrix[x * other.output_size + y] += a * other.prob(w, y);
                }
            }
        }
        Ok(ClassicalChannel { input_size: self.input_size, output_size: other.output_size, matrix })
    }

    pub fn output_distribution(&self, p: &Distribution) -> Result<Distribution> {
        self.check_input(p)?;
        let mut q = vec![0.0; self.output_size];
        for (x, &px) in p.probs().iter().enumerate() {
            for (y, qy) in q.iter_mut().enumerate() {
                *qy += px * self.prob(x, y);
            }
        }
        Ok(Distribution { probs: q })
    }

    /// Joint law of (X, N(X)).
    pub fn joint(&self, p: &Distribution) -> Result<JointDistribution> {
        self.check_input(p)?;
        let table = p
            .probs()
            .iter()
            .enumerate()
            .flat_map(|(x, &px)| self.row(x).iter().map(move |&n| px * n))
            .collect();
        Ok(JointDistribution { dims: vec![self.input_size, self.output_size], table })
    }

    /// Mutual information I(X;Y) for input `p`.
    pub fn mutual_information(&self, p: &Distribution) -> Result<f64> {
        mutual_information(&self.joint(p)?)
    }

    fn check_input(&self, p: &Distribution) -> Result<()> {
        if p.alphabet_size() != self.input_size {
            return Err(Error::dims(format!(
                "input distribution has {} symbols, channel expects {}",
                p.alphabet_size(),
                self.input_size
            )));
        }
        Ok(())
    }
}

pub fn shannon_entropy(p: &Distribution) -> f64 {
    p.entropy()
}

/// I(X;Y) = H(X) + H(Y) - H(XY) for a two-axis joint.
pub fn mutual_information(j: &JointDistribution) -> Result<f64> {
    if j.dims().len() != 2 {
        return Err(Error::dims("mutual_information expects a two-axis joint"));
    }
    mutual_information_between(j, &[0], &[1])
}

/// I(A;B) between two disjoint groups of axes.
pub fn mutual_information_between(j: &JointDistribution, a: &[usize], b: &[usize]) -> Result<f64> {
    if a.iter().any(|x| b.contains(x)) {
        return Err(Error::param("axis groups overlap"));
    }
    let ab: Vec<usize> = a.iter().chain(b).copied().collect();
    let v = j.entropy_of_axes(a)? + j.entropy_of_axes(b)? - j.entropy_of_axes(&ab)?;
    Ok(v.max(0.0))
}

/// H(Y|X) = H(XY) - H(X) for a two-axis joint.
pub fn conditional_entropy(j: &JointDistribution) -> Result<f64> {
    if j.dims().len() != 2 {
        return Err(Error::dims("conditional_entropy expects a two-axis joint"));
    }
    Ok((j.entropy() - j.entropy_of_axes(&[0])?).max(0.0))
}

/// D(q||p) in bits; `+inf` when q puts mass outside the support of p.
pub fn kl_divergence(q: &Distribution, p: &Distribution) -> Result<f64> {
    if q.alphabet_size() != p.alphabet_size() {
        return Err(Error::dims("kl_divergence alphabets differ"));
    }
    let mut d = 0.0;
    for (&a, &b) in q.probs().iter().zip(p.probs()) {
        if a > 0.0 {
            if b <= 0.0 {
                return Ok(f64::INFINITY);
            }
            d += a * (a / b).log2();
        }
    }
    Ok(d.max(0.0))
}

/// The 1-norm ||p - q||_1, in [0, 2].
pub fn tv_distance(p: &Distribution, q: &Distribution) -> Result<f64> {
    if q.alphabet_size() != p.alphabet_size() {
        return Err(Error::dims("tv_distance alphabets differ"));
    }
    Ok(l1(p.probs(), q.probs()))
}

pub(crate) fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Continuity bound `t log2 d + eta(min(t, 1/e))` on |H(p) - H(q)| for ||p - q||_1 = t.
pub fn fannes_bound(t: f64, d: usize) -> f64 {
    t * (d as f64).log2() + eta(t.min(std::f64::consts::E.recip()))
}

/// Binary entropy.
pub fn h2(p: f64) -> f64 {
    eta(p) + eta(1.0 - p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(shannon_entropy(&Distribution::uniform(2)), 1.0);
        assert_eq!(shannon_entropy(&Distribution::point_mass(3, 1)), 0.0);
        let p = Distribution::new(vec![0.25, 0.75]).unwrap();
        assert!(close(shannon_entropy(&p), 0.811_278_124_459_132_9, 1e-14));
    }

    #[test]
    fn validation() {
        assert!(Distribution::new(vec![0.5, 0.4]).is_err());
        assert!(Distribution::new(vec![1.2, -0.2]).is_err());
        let p = Distribution::new(vec![0.5 + 4e-10, 0.5]).unwrap();
        assert!((p.probs().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        let err = ClassicalChannel::new(vec![vec![0.5, 0.4], vec![0.5, 0.5]]).unwrap_err();
        assert!(err.to_string().contains("row 0"));
    }

    #[test]
    fn mutual_information_examples() {
        let prod = JointDistribution::product(&Distribution::uniform(2), &Distribution::uniform(3));
        assert!(close(mutual_information(&prod).unwrap(), 0.0, 1e-15));
        let copy = JointDistribution::from_rows(&[vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        assert!(close(mutual_information(&copy).unwrap(), 1.0, 1e-15));
        let j = ClassicalChannel::bsc(0.11).unwrap().joint(&Distribution::uniform(2)).unwrap();
        // 1 - h2(0.11)
        assert!(close(mutual_information(&j).unwrap(), 0.500_084_041_835_472_0, 1e-12));
        assert!(close(conditional_entropy(&j).unwrap(), 0.499_915_958_164_528_0, 1e-12));
        assert!(close(conditional_entropy(&copy).unwrap(), 0.0, 1e-15));
        assert!(close(conditional_entropy(&prod).unwrap(), 3f64.log2(), 1e-12));
    }

    #[test]
    fn kl_examples() {
        let u = Distribution::uniform(2);
        assert_eq!(kl_divergence(&u, &u).unwrap(), 0.0);
        assert!(close(kl_divergence(&Distribution::point_mass(2, 0), &u).unwrap(), 1.0, 1e-15));
        let p = Distribution::new(vec![0.9, 0.1]).unwrap();
        assert!(close(kl_divergence(&u, &p).unwrap(), 0.736_965_594_166_206_2, 1e-12));
        assert_eq!(kl_divergence(&u, &Distribution::point_mass(2, 0)).unwrap(), f64::INFINITY);
        assert!(kl_divergence(&u, &Distribution::uniform(3)).is_err());
    }

    #[test]
    fn tv_examples() {
        let u = Distribution::uniform(2);
        assert_eq!(tv_distance(&u, &u).unwrap(), 0.0);
        let a = Distribution::point_mass(2, 0);
        let b = Distribution::point_mass(2, 1);
        assert_eq!(tv_distance(&a, &b).unwrap(), 2.0);
        let p = Distribution::new(vec![0.6, 0.4]).unwrap();
        assert!(close(tv_distance(&p, &u).unwrap(), 0.2, 1e-15));
        assert!(tv_distance(&p, &Distribution::uniform(3)).is_err());
    }

    #[test]
    fn marginals_follow_axis_order() {
        let j = JointDistribution::new(vec![2, 3], vec![0.1, 0.2, 0.0, 0.3, 0.1, 0.3]).unwrap();
        let t = j.marginal(&[1, 0]).unwrap();
        assert_eq!(t.dims(), &[3, 2]);
        assert!(close(t.table()[1], 0.3, 1e-15));
        assert!(close(t.table()[2], 0.2, 1e-15));
        let x = j.marginal_distribution(0).unwrap();
        assert!(close(x.probs()[0], 0.3, 1e-15));
    }

    #[test]
    fn composition() {
        let a = ClassicalChannel::bsc(0.1).unwrap();
        let b = ClassicalChannel::bsc(0.2).unwrap();
        let c = a.then(&b).unwrap();
        assert!(close(c.prob(0, 1), 0.1 * 0.8 + 0.9 * 0.2, 1e-15));
        assert!(a.then(&ClassicalChannel::bec(0.1).unwrap()).is_ok());
        assert!(ClassicalChannel::bec(0.1).unwrap().then(&a).is_err());
    }

    fn dist(d: usize) -> impl Strategy<Value = Distribution> {
        prop::collection::vec(0.0f64..1.0, d).prop_filter_map("nonzero", |v| {
            let s: f64 = v.iter().sum();
            (s > 1e-6).then(|| Distribution::new(v.iter().map(|x| x / s).collect()).unwrap())
        })
    }

    fn joint(nx: usize, ny: usize) -> impl Strategy<Value = JointDistribution> {
        dist(nx * ny).prop_map(move |d| JointDistribution::new(vec![nx, ny], d.probs().to_vec()).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]

        #[test]
        fn pinsker_and_nonnegativity(p in dist(5), q in dist(5)) {
            let d = kl_divergence(&q, &p).unwrap();
            let t = tv_distance(&p, &q).unwrap();
            prop_assert!(d >= 0.0);
            prop_assert!(shannon_entropy(&p) >= 0.0);
            prop_assert!(d >= 0.5 * t * t - 1e-12);
            prop_assert!((0.0..=2.0 + 1e-12).contains(&t));
        }

        #[test]
        fn fannes_continuity(p in dist(6), q in dist(6)) {
            let t = tv_distance(&p, &q).unwrap();
            let gap = (shannon_entropy(&p) - shannon_entropy(&q)).abs();
            prop_assert!(gap <= fannes_bound(t, 6) + 1e-12);
        }

        #[test]
        fn chain_rule(j in joint(3, 4)) {
            let hx = j.entropy_of_axes(&[0]).unwrap();
            let hyx = conditional_entropy(&j).unwrap();
            prop_assert!((j.entropy() - hx - hyx).abs() <= 1e-12);
            prop_assert!(mutual_information(&j).unwrap() >= 0.0);
        }
    }
}
