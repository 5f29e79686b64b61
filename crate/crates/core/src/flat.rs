//! Unweighted ("flat") channels: the single-shot partition protocol, the
//! two-stage protocol through an intermediate alphabet, and the
//! hypergeometric concentration bounds behind both.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classical::{l1, ClassicalChannel};
use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, sample_indices, shuffle, trial_rng};

/// Slack used when comparing a count with a real-valued threshold.
const THRESHOLD_SLACK: f64 = 1e-9;

/// Channel mapping x to a uniformly random neighbour in a biregular bipartite graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnweightedChannel {
    x_size: usize,
    y_size: usize,
    neighbors: Vec<Vec<usize>>,
}

impl UnweightedChannel {
    /// Validates index ranges and both left and right regularity.
    pub fn new(x_size: usize, y_size: usize, mut neighbors: Vec<Vec<usize>>) -> Result<Self> {
        if x_size == 0 || y_size == 0 {
            return Err(Error::InvalidChannel("empty alphabet".into()));
        }
        if neighbors.len() != x_size {
            return Err(Error::InvalidChannel(format!(
                "{} neighbour lists for {x_size} inputs",
                neighbors.len()
            )));
        }
        let mut rev = vec![0usize; y_size];
        for (x, nb) in neighbors.iter_mut().enumerate() {
            nb.sort_unstable();
            if nb.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidChannel(format!("duplicate neighbour of x={x}")));
            }
            if nb.is_empty() {
                return Err(Error::InvalidChannel(format!("x={x} has no neighbours")));
            }
            for &y in nb.iter() {
                if y >= y_size {
                    return Err(Error::InvalidChannel(format!("neighbour {y} of x={x} out of range")));
                }
                rev[y] += 1;
            }
        }
        let deg = neighbors[0].len();
        if let Some(x) = neighbors.iter().position(|nb| nb.len() != deg) {
            return Err(Error::InvalidChannel(format!(
                "not left-regular: x={x} has degree {} but x=0 has {deg}",
                neighbors[x].len()
            )));
        }
        if let Some(y) = rev.iter().position(|&d| d != rev[0]) {
            return Err(Error::InvalidChannel(format!(
                "not right-regular: y={y} has degree {} but y=0 has {}",
                rev[y], rev[0]
            )));
        }
        Ok(Self { x_size, y_size, neighbors })
    }

    /// Complete bipartite graph.
    pub fn complete(x_size: usize, y_size: usize) -> Self {
        Self { x_size, y_size, neighbors: vec![(0..y_size).collect(); x_size] }
    }

    /// Noiseless channel on `d` symbols.
    pub fn identity(d: usize) -> Self {
        Self { x_size: d, y_size: d, neighbors: (0..d).map(|x| vec![x]).collect() }
    }

    /// Cayley-type graph on Z_d: Γ(x) = {x + s mod d : s in offsets}.
    pub fn cyclic(d: usize, offsets: &[usize]) -> Result<Self> {
        let neighbors = (0..d).map(|x| offsets.iter().map(|s| (x + s) % d).collect()).collect();
        Self::new(d, d, neighbors)
    }

    /// Random `degree`-regular bipartite graph on d + d vertices, built as a
    /// union of edge-disjoint uniformly random perfect matchings.
    pub fn random_regular(d: usize, degree: usize, seed: u64) -> Result<Self> {
        if degree == 0 || degree > d {
            return Err(Error::param(format!("degree {degree} impossible on {d} vertices")));
        }
        let mut rng = rng_from_seed(seed);
        'outer: for _ in 0..10_000 {
            let mut neighbors: Vec<Vec<usize>> = vec![Vec::with_capacity(degree); d];
            for _ in 0..degree {
                let mut placed = false;
                for _ in 0..1000 {
                    let mut perm: Vec<usize> = (0..d).collect();
                    shuffle(&mut perm, &mut rng);
                    if (0..d).all(|x| !neighbors[x].contains(&perm[x])) {
                        for x in 0..d {
                            neighbors[x].push(perm[x]);
                        }
                        placed = true;
                        break;
                    }
                }
                if !placed {
                    continue 'outer;
                }
            }
            return Self::new(d, d, neighbors);
        }
        Err(Error::param("could not build a random regular graph"))
    }

    pub fn x_size(&self) -> usize {
        self.x_size
    }

    pub fn y_size(&self) -> usize {
        self.y_size
    }

    pub fn neighbors(&self, x: usize) -> &[usize] {
        &self.neighbors[x]
    }

    pub fn degree(&self) -> usize {
        self.neighbors[0].len()
    }

    pub fn edges(&self) -> usize {
        self.x_size * self.degree()
    }

    pub fn reverse_degree(&self) -> usize {
        self.edges() / self.y_size
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.neighbors[x].binary_search(&y).is_ok()
    }

    /// Dense adjacency, row-major |X| x |Y|.
    pub fn adjacency(&self) -> Vec<bool> {
        let mut a = vec![false; self.x_size * self.y_size];
        for (x, nb) in self.neighbors.iter().enumerate() {
            for &y in nb {
                a[x * self.y_size + y] = true;
            }
        }
        a
    }

    pub fn to_channel(&self) -> ClassicalChannel {
        let p = 1.0 / self.degree() as f64;
        let rows = self
            .neighbors
            .iter()
            .map(|nb| {
                let mut r = vec![0.0; self.y_size];
                for &y in nb {
                    r[y] = p;
                }
                r
            })
            .collect();
        ClassicalChannel::new(rows).expect("uniform rows are stochastic")
    }
}

/// Partition of Y into `r` blocks of equal size `m`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputPartition {
    blocks: Vec<Vec<usize>>,
}

impl OutputPartition {
    pub fn new(y_size: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let sel = IntermediateSelection::new(y_size, blocks)?;
        if sel.covered() != y_size {
            return Err(Error::param("partition blocks do not cover Y"));
        }
        Ok(Self { blocks: sel.blocks })
    }

    /// Uniformly random partition into `r` blocks, by Fisher-Yates on Y.
    pub fn random<R: Rng + ?Sized>(y_size: usize, r: usize, rng: &mut R) -> Result<Self> {
        if r == 0 || y_size % r != 0 {
            return Err(Error::param(format!("{r} blocks do not divide |Y| = {y_size}")));
        }
        let m = y_size / r;
        let mut perm: Vec<usize> = (0..y_size).collect();
        shuffle(&mut perm, rng);
        Ok(Self { blocks: perm.chunks(m).map(|c| c.to_vec()).collect() })
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn r(&self) -> usize {
        self.blocks.len()
    }

    pub fn m(&self) -> usize {
        self.blocks[0].len()
    }
}

/// Disjoint equal-size subsets W_1..W_r of W, not necessarily covering it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntermediateSelection {
    blocks: Vec<Vec<usize>>,
}

impl IntermediateSelection {
    pub fn new(w_size: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        if blocks.is_empty() || blocks[0].is_empty() {
            return Err(Error::param("selection needs at least one nonempty block"));
        }
        let m = blocks[0].len();
        let mut used = vec![false; w_size];
        for (i, b) in blocks.iter().enumerate() {
            if b.len() != m {
                return Err(Error::param(format!("block {i} has size {} instead of {m}", b.len())));
            }
            for &w in b {
                if w >= w_size {
                    return Err(Error::param(format!("element {w} out of range")));
                }
                if used[w] {
                    return Err(Error::param(format!("element {w} appears in two blocks")));
                }
                used[w] = true;
            }
        }
        Ok(Self { blocks })
    }

    /// `r` disjoint random blocks of size `m`.
    pub fn random<R: Rng + ?Sized>(w_size: usize, r: usize, m: usize, rng: &mut R) -> Result<Self> {
        if r == 0 || m == 0 || r * m > w_size {
            return Err(Error::param(format!("cannot fit {r} blocks of size {m} into {w_size}")));
        }
        let picked = sample_indices(w_size, r * m, rng);
        Ok(Self { blocks: picked.chunks(m).map(|c| c.to_vec()).collect() })
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn r(&self) -> usize {
        self.blocks.len()
    }

    pub fn m(&self) -> usize {
        self.blocks[0].len()
    }

    fn covered(&self) -> usize {
        self.r() * self.m()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailMode {
    Upper,
    Lower,
    TwoSided,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailBound {
    pub exact: f64,
    pub hoeffding: f64,
}

/// Hypergeometric pmf of K = |A ∩ B| for fixed |A| = a and uniformly random B of size b in [n].
pub fn hypergeometric_pmf(n: usize, a: usize, b: usize) -> Vec<f64> {
    let lf: Vec<f64> = {
        let mut v = vec![0.0; n + 1];
        for k in 1..=n {
            v[k] = v[k - 1] + (k as f64).ln();
        }
        v
    };
    let lc = |p: usize, q: usize| lf[p] - lf[q] - lf[p - q];
    let lo = (a + b).saturating_sub(n);
    let hi = a.min(b);
    let total = lc(n, b);
    let mut pmf = vec![0.0; hi + 1];
    for k in lo..=hi {
        pmf[k] = (lc(a, k) + lc(n - a, b - k) - total).exp();
    }
    pmf
}

/// Exact hypergeometric tail next to the bound `exp(-mu eps^2 / 2)` (doubled two-sided), mu = ab/n.
///
/// The law of |A ∩ B| is symmetric in (a, b), so either order is accepted.
pub fn hypergeometric_tail(n: usize, a: usize, b: usize, mode: TailMode, eps: f64) -> Result<TailBound> {
    if !(0 < a && a < n && 0 < b && b < n) {
        return Err(Error::param(format!("need 0 < a, b < n, got n={n} a={a} b={b}")));
    }
    if eps < 0.0 || !eps.is_finite() {
        return Err(Error::param("eps must be a nonnegative number"));
    }
    let mu = (a * b) as f64 / n as f64;
    let pmf = hypergeometric_pmf(n, a, b);
    let hit = |k: usize| {
        let k = k as f64;
        match mode {
            TailMode::Upper => k >= (1.0 + eps) * mu - THRESHOLD_SLACK,
            TailMode::Lower => k <= (1.0 - eps) * mu + THRESHOLD_SLACK,
            TailMode::TwoSided => (k - mu).abs() >= eps * mu - THRESHOLD_SLACK,
        }
    };
    let exact: f64 = pmf.iter().enumerate().filter(|(k, _)| hit(*k)).map(|(_, p)| p).sum();
    let one = (-mu * eps * eps / 2.0).exp();
    let hoeffding = if mode == TailMode::TwoSided { 2.0 * one } else { one };
    Ok(TailBound { exact: exact.min(1.0), hoeffding })
}

/// Exact induced channel of a flat simulation protocol.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InducedChannel {
    pub n_hat: ClassicalChannel,
    pub max_tv: f64,
    /// Per-input 1-norm error.
    pub tv: Vec<f64>,
    /// (x, block) pairs whose neighbour set missed the block; Alice sent index 0 there.
    pub empty_intersections: Vec<(usize, usize)>,
}

/// Induced channel of the partition protocol: shared block i, Alice picks a
/// uniform neighbour inside Y_i, Bob decodes its position.
pub fn induced_channel_lemma1(g: &UnweightedChannel, p: &OutputPartition) -> Result<InducedChannel> {
    let ny = g.y_size();
    let covered: usize = p.blocks().iter().map(Vec::len).sum();
    if covered != ny || p.blocks().iter().flatten().any(|&y| y >= ny) {
        return Err(Error::dims("partition does not cover the output alphabet"));
    }
    let r = p.r() as f64;
    let adj = g.adjacency();
    let mut rows = vec![vec![0.0; ny]; g.x_size()];
    let mut empty = Vec::new();
    for (x, row) in rows.iter_mut().enumerate() {
        let a = &adj[x * ny..(x + 1) * ny];
        for (i, block) in p.blocks().iter().enumerate() {
            let hits = block.iter().filter(|&&y| a[y]).count();
            if hits == 0 {
                empty.push((x, i));
                row[block[0]] += 1.0 / r;
                continue;
            }
            let w = 1.0 / (r * hits as f64);
            for &y in block {
                if a[y] {
                    row[y] += w;
                }
            }
        }
    }
    finish(g.to_channel(), rows, empty)
}

fn finish(target: ClassicalChannel, rows: Vec<Vec<f64>>, empty: Vec<(usize, usize)>) -> Result<InducedChannel> {
    let tv: Vec<f64> = rows.iter().enumerate().map(|(x, r)| l1(r, target.row(x))).collect();
    let max_tv = tv.iter().cloned().fold(0.0, f64::max);
    let n_hat = ClassicalChannel::new(rows)?;
    Ok(InducedChannel { n_hat, max_tv, tv, empty_intersections: empty })
}

/// Block parameters of the partition protocol after rounding.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionParams {
    pub r: usize,
    pub m: usize,
    /// γ requested by the caller.
    pub gamma_target: f64,
    /// γ = m|E| / (|X||Y|) for the rounded m.
    pub gamma: f64,
    /// Probability bound 1 - |E| exp(-γ ε²) at the rounded γ (may be negative).
    pub success_bound: f64,
}

/// Rounds m* = γ|X||Y|/|E| up to the nearest divisor of |Y| (capped at |Y|).
pub fn partition_params(g: &UnweightedChannel, gamma: f64, eps: f64) -> Result<PartitionParams> {
    if !(gamma > 0.0) {
        return Err(Error::param("gamma must be positive"));
    }
    let ny = g.y_size();
    let m_star = gamma * (g.x_size() * ny) as f64 / g.edges() as f64;
    let m = (1..=ny)
        .filter(|m| ny % m == 0)
        .find(|&m| m as f64 >= m_star - THRESHOLD_SLACK)
        .unwrap_or(ny);
    let r = ny / m;
    let gamma_eff = (m * g.edges()) as f64 / (g.x_size() * ny) as f64;
    let success_bound = 1.0 - g.edges() as f64 * (-gamma_eff * eps * eps).exp();
    Ok(PartitionParams { r, m, gamma_target: gamma, gamma: gamma_eff, success_bound })
}

/// A certified partition and how it was found.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionCertificate {
    pub partition: OutputPartition,
    pub params: PartitionParams,
    pub max_tv: f64,
    /// Index of the successful restart (0-based).
    pub restart: usize,
    pub empty_intersections: usize,
}

/// Searches random partitions (restart k uses stream k of `seed`) until one
/// has exact max_tv <= eps. The lowest successful restart index wins, so the
/// result does not depend on thread count.
pub fn find_good_partition(
    g: &UnweightedChannel,
    eps: f64,
    gamma: f64,
    max_restarts: usize,
    seed: u64,
) -> Result<PartitionCertificate> {
    let params = partition_params(g, gamma, eps)?;
    let attempt = |k: usize| -> Result<(OutputPartition, InducedChannel)> {
        let mut rng = trial_rng(seed, k as u64);
        let p = OutputPartition::random(g.y_size(), params.r, &mut rng)?;
        let ind = induced_channel_lemma1(g, &p)?;
        Ok((p, ind))
    };
    search(max_restarts, eps, attempt, |k, (p, ind)| PartitionCertificate {
        partition: p,
        params,
        max_tv: ind.max_tv,
        restart: k,
        empty_intersections: ind.empty_intersections.len(),
    })
}

fn search<T: Send, C>(
    max_restarts: usize,
    eps: f64,
    attempt: impl Fn(usize) -> Result<(T, InducedChannel)> + Sync,
    certify: impl FnOnce(usize, (T, InducedChannel)) -> C,
) -> Result<C> {
    if max_restarts == 0 {
        return Err(Error::param("max_restarts must be at least 1"));
    }
    let chunk = rayon::current_num_threads().max(1) * 2;
    let mut best = f64::INFINITY;
    let mut start = 0;
    while start < max_restarts {
        let end = (start + chunk).min(max_restarts);
        let results: Vec<Result<(T, InducedChannel)>> = (start..end).into_par_iter().map(&attempt).collect();
        for (off, res) in results.into_iter().enumerate() {
            let (t, ind) = res?;
            if ind.max_tv <= eps + THRESHOLD_SLACK {
                return Ok(certify(start + off, (t, ind)));
            }
            best = best.min(ind.max_tv);
        }
        start = end;
    }
    Err(Error::PartitionSearch { restarts: max_restarts, best_tv: best })
}

/// Checks that N2 ∘ N1 equals N for the three unweighted graphs, i.e. that
/// |Γ_XW(x) ∩ Γ_YW(y)| = [y ∈ Γ_XY(x)] |E_XW||E_WY| / (|E_XY||W|).
pub fn check_factorization(
    g_xy: &UnweightedChannel,
    g_xw: &UnweightedChannel,
    g_wy: &UnweightedChannel,
) -> Result<()> {
    if g_xw.x_size() != g_xy.x_size() || g_wy.y_size() != g_xy.y_size() || g_xw.y_size() != g_wy.x_size() {
        return Err(Error::dims("graph alphabets do not chain X -> W -> Y"));
    }
    let composed = g_xw.to_channel().then(&g_wy.to_channel())?;
    let target = g_xy.to_channel();
    for x in 0..g_xy.x_size() {
        let d = l1(composed.row(x), target.row(x));
        if d > 1e-9 {
            return Err(Error::InvalidChannel(format!(
                "factorization fails at x={x}: ||N2∘N1 - N||_1 = {d}"
            )));
        }
    }
    Ok(())
}

/// Induced channel of the two-stage protocol: shared block i, Alice picks a
/// uniform w in Γ_XW(x) ∩ W_i and sends its position, Bob applies N2 locally.
pub fn induced_channel_lemma2(
    g_xw: &UnweightedChannel,
    g_wy: &UnweightedChannel,
    n2: &ClassicalChannel,
    s: &IntermediateSelection,
) -> Result<InducedChannel> {
    let target = g_xw.to_channel().then(&g_wy.to_channel())?;
    induced_two_stage(g_xw, n2, s, target)
}

fn induced_two_stage(
    g_xw: &UnweightedChannel,
    n2: &ClassicalChannel,
    s: &IntermediateSelection,
    target: ClassicalChannel,
) -> Result<InducedChannel> {
    let nw = g_xw.y_size();
    if n2.input_size() != nw || s.blocks().iter().flatten().any(|&w| w >= nw) {
        return Err(Error::dims("selection or N2 does not match the intermediate alphabet"));
    }
    let ny = n2.output_size();
    let r = s.r() as f64;
    let adj = g_xw.adjacency();
    let mut rows = vec![vec![0.0; ny]; g_xw.x_size()];
    let mut empty = Vec::new();
    for (x, row) in rows.iter_mut().enumerate() {
        let a = &adj[x * nw..(x + 1) * nw];
        for (i, block) in s.blocks().iter().enumerate() {
            let hits: Vec<usize> = block.iter().copied().filter(|&w| a[w]).collect();
            let (ws, wt) = if hits.is_empty() {
                empty.push((x, i));
                (vec![block[0]], 1.0 / r)
            } else {
                let wt = 1.0 / (r * hits.len() as f64);
                (hits, wt)
            };
            for w in ws {
                for (y, v) in row.iter_mut().enumerate() {
                    *v += wt * n2.prob(w, y);
                }
            }
        }
    }
    finish(target, rows, empty)
}

/// Block parameters of the two-stage protocol after rounding.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionParams {
    pub r: usize,
    pub m: usize,
    pub gamma_target: f64,
    /// γ = m|E_XW| / (|X||W|) for the rounded m.
    pub gamma: f64,
    /// 1 - 2|E_XY| exp(-γ ε²/32) at the requested γ.
    pub success_bound_target: f64,
    /// The same bound at the rounded γ.
    pub success_bound: f64,
}

/// r = |E_XY||W| / (|E_WY||X|) and m = γ|X||W|/|E_XW|, both rounded up;
/// m is then reduced so that r·m <= |W|.
pub fn selection_params(
    g_xy: &UnweightedChannel,
    g_xw: &UnweightedChannel,
    g_wy: &UnweightedChannel,
    gamma: f64,
    eps: f64,
) -> Result<SelectionParams> {
    if !(gamma > 0.0) {
        return Err(Error::param("gamma must be positive"));
    }
    let nx = g_xy.x_size() as f64;
    let nw = g_xw.y_size();
    let r_star = (g_xy.edges() * nw) as f64 / (g_wy.edges() as f64 * nx);
    let r = ((r_star - THRESHOLD_SLACK).ceil() as usize).max(1);
    if r > nw {
        return Err(Error::param("more blocks than intermediate symbols"));
    }
    let m_star = gamma * nx * nw as f64 / g_xw.edges() as f64;
    let m = ((m_star - THRESHOLD_SLACK).ceil() as usize).clamp(1, nw / r);
    let gamma_eff = m as f64 * g_xw.edges() as f64 / (nx * nw as f64);
    let e = g_xy.edges() as f64;
    Ok(SelectionParams {
        r,
        m,
        gamma_target: gamma,
        gamma: gamma_eff,
        success_bound_target: 1.0 - 2.0 * e * (-gamma * eps * eps / 32.0).exp(),
        success_bound: 1.0 - 2.0 * e * (-gamma_eff * eps * eps / 32.0).exp(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionCertificate {
    pub selection: IntermediateSelection,
    pub params: SelectionParams,
    pub max_tv: f64,
    pub restart: usize,
    pub empty_intersections: usize,
}

/// Two-stage analogue of [`find_good_partition`]; validates the factorization first.
pub fn find_good_selection(
    g_xy: &UnweightedChannel,
    g_xw: &UnweightedChannel,
    g_wy: &UnweightedChannel,
    eps: f64,
    gamma: f64,
    max_restarts: usize,
    seed: u64,
) -> Result<SelectionCertificate> {
    check_factorization(g_xy, g_xw, g_wy)?;
    let params = selection_params(g_xy, g_xw, g_wy, gamma, eps)?;
    let n2 = g_wy.to_channel();
    let target = g_xy.to_channel();
    let attempt = |k: usize| -> Result<(IntermediateSelection, InducedChannel)> {
        let mut rng = trial_rng(seed, k as u64);
        let s = IntermediateSelection::random(g_xw.y_size(), params.r, params.m, &mut rng)?;
        let ind = induced_two_stage(g_xw, &n2, &s, target.clone())?;
        Ok((s, ind))
    };
    search(max_restarts, eps, attempt, |k, (s, ind)| SelectionCertificate {
        selection: s,
        params,
        max_tv: ind.max_tv,
        restart: k,
        empty_intersections: ind.empty_intersections.len(),
    })
}
