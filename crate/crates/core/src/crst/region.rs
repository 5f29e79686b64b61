//! Achievable (c, r) regions for classical channel simulation and the
//! minimal-randomness tradeoff curve.

use serde::{Deserialize, Serialize};

use crate::classical::{ClassicalChannel, Distribution};
use crate::crst::capacity::{capacity, max_output_entropy};
use crate::crst::wyner::{constrained_wyner, default_w_size};
use crate::error::{Error, Result};

pub const REGION_TOL: f64 = 1e-9;
const OPT_TOL: f64 = 1e-10;
const TRADEOFF_RESTARTS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    /// cbits per channel use.
    pub c: f64,
    /// rbits per channel use.
    pub r: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimulationKind {
    /// Feedback simulation on a known i.i.d. source.
    FeedbackKnownSource,
    /// Feedback simulation valid for every input.
    FeedbackArbitrarySource,
    /// Non-feedback simulation on a known source.
    NonFeedback,
}

fn known_quantities(ch: &ClassicalChannel, p: &Distribution) -> Result<(f64, f64)> {
    let i = ch.mutual_information(p)?;
    let hy = ch.output_distribution(p)?.entropy();
    Ok((i, hy))
}

/// Whether c cbits plus r rbits per use suffice. `p` is required for the
/// known-source kinds and ignored otherwise; r may be +∞.
pub fn feedback_region_check(
    ch: &ClassicalChannel,
    p: Option<&Distribution>,
    c: f64,
    r: f64,
    kind: SimulationKind,
) -> Result<bool> {
    if !(c >= 0.0) || !(r >= 0.0) {
        return Err(Error::param("rates must be nonnegative"));
    }
    let need_p = || p.ok_or_else(|| Error::param("a source distribution is required"));
    match kind {
        SimulationKind::FeedbackKnownSource => {
            let (i, hy) = known_quantities(ch, need_p()?)?;
            Ok(c >= i - REGION_TOL && c + r >= hy - REGION_TOL)
        }
        SimulationKind::FeedbackArbitrarySource => {
            let cap = capacity(ch, OPT_TOL)?.capacity;
            let hmax = max_output_entropy(ch, OPT_TOL)?.value;
            Ok(c >= cap - REGION_TOL && r >= hmax - cap - REGION_TOL)
        }
        SimulationKind::NonFeedback => {
            let p = need_p()?;
            let (i, hy) = known_quantities(ch, p)?;
            if c < i - REGION_TOL {
                return Ok(false);
            }
            // W = Y and W = X
            if c + r >= hy - REGION_TOL || c >= p.entropy() - REGION_TOL {
                return Ok(true);
            }
            let j = ch.joint(p)?;
            let best = constrained_wyner(&j, default_w_size(&j), Some(c), OPT_TOL, TRADEOFF_RESTARTS, 0)?;
            Ok(c + r >= best.value - REGION_TOL)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TradeoffPoint {
    pub c: f64,
    pub r: f64,
    /// The reported r is achieved by an explicit feasible W.
    pub certified: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TradeoffCurve {
    pub mutual_information: f64,
    pub output_entropy: f64,
    /// Feedback curve max(0, H(Y) - c) on the same grid.
    pub feedback: Vec<RatePoint>,
    /// Non-feedback minimal r, after the lower convex hull.
    pub non_feedback: Vec<TradeoffPoint>,
}

/// Lower convex hull of the points, evaluated back on their abscissae.
fn lower_hull(pts: &[(f64, f64)]) -> Vec<f64> {
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for &p in pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            if (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0) <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    pts.iter()
        .map(|&(x, y)| {
            let i = hull.partition_point(|h| h.0 < x);
            if i < hull.len() && hull[i].0 == x {
                return hull[i].1.min(y);
            }
            let (a, b) = (hull[i - 1], hull[i]);
            (a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0)).min(y)
        })
        .collect()
}

/// Minimal shared randomness per use at each communication rate in `grid`
/// (strictly increasing, each at least I(X;Y)).
pub fn tradeoff_curve(
    ch: &ClassicalChannel,
    p: &Distribution,
    grid: &[f64],
    w_size: Option<usize>,
    seed: u64,
) -> Result<TradeoffCurve> {
    let (i, hy) = known_quantities(ch, p)?;
    if grid.is_empty() {
        return Err(Error::param("empty grid"));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::param("grid must be strictly increasing"));
    }
    if grid[0] < i - REGION_TOL {
        return Err(Error::param(format!("grid starts at {} below I(X;Y) = {i}", grid[0])));
    }
    let j = ch.joint(p)?;
    let k = w_size.unwrap_or_else(|| default_w_size(&j));
    let hx = p.entropy();
    let mut raw = Vec::with_capacity(grid.len());
    let mut certified = Vec::with_capacity(grid.len());
    for (idx, &c) in grid.iter().enumerate() {
        // W = Y and W = X are always available
        let mut best = hy;
        let mut cert = true;
        if c >= hx - REGION_TOL {
            best = best.min(hx);
        }
        if c < hy {
            match constrained_wyner(&j, k, Some(c), OPT_TOL, TRADEOFF_RESTARTS, crate::rng::derive_seed(seed, idx as u64)) {
                Ok(w) if w.value.is_finite() => best = best.min(w.value),
                Ok(_) => {}
                Err(_) => cert = false,
            }
        }
        raw.push((c, (best - c).max(0.0)));
        certified.push(cert);
    }
    let hull = lower_hull(&raw);
    Ok(TradeoffCurve {
        mutual_information: i,
        output_entropy: hy,
        feedback: grid.iter().map(|&c| RatePoint { c, r: (hy - c).max(0.0) }).collect(),
        non_feedback: grid
            .iter()
            .zip(hull)
            .zip(certified)
            .map(|((&c, r), certified)| TradeoffPoint { c, r, certified })
            .collect(),
    })
}

/// CSV with header `c,r,certified`.
pub fn tradeoff_csv(points: &[TradeoffPoint]) -> String {
    let mut s = String::from("c,r,certified\n");
    for p in points {
        s.push_str(&format!("{},{},{}\n", p.c, p.r, p.certified));
    }
    s
}
