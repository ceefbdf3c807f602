//! Finite-horizon avoidance sets on an expanding leaf, the recursive
//! Bowen-box cover, and the codimension calculators.
//!
//! The leaf is the closed cell `V̄_r ⊂ P ≅ ℝ^p` and `A^N_x(t,r,S)` is the set
//! of `h ∈ V̄_r` with `g_{ℓt} h x ∈ S` for `ℓ = 1, …, N`.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{horospherical_frame, FlowSpec, HorosphericalFrame};
use crate::height::unit_ball_volume;
use crate::lattice::LatticeBasis;
use crate::mc::{map_indexed, Estimate, Executor, McConfig};
use crate::target::{measure_of_target, Displacement, TargetSet};
use crate::tessellation::{side, R_STAR};

/// Grids larger than this are refused.
pub const MAX_GRID_NODES: u64 = 100_000_000;
/// Default cap on the number of boxes kept at one level of the cover.
pub const DEFAULT_MAX_BOXES: usize = 4_000_000;
const MIN_BOX_SIDE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AvoidanceQuery {
    pub x: LatticeBasis,
    pub flow: FlowSpec,
    pub m: usize,
    pub n: usize,
    pub t: f64,
    pub r: f64,
    /// The set the orbit must stay in.
    pub s: TargetSet,
    pub horizon: u32,
}

impl AvoidanceQuery {
    pub fn frame(&self) -> Result<HorosphericalFrame> {
        horospherical_frame(&self.flow, self.m, self.n)
    }

    fn validate(&self) -> Result<HorosphericalFrame> {
        if !(self.r > 0.0 && self.r <= R_STAR) {
            return Err(Error::precondition("need 0 < r <= r_*"));
        }
        if self.horizon == 0 {
            return Err(Error::precondition("need horizon N >= 1"));
        }
        if !(self.t > 0.0) {
            return Err(Error::precondition("need t > 0"));
        }
        self.frame()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AvoidanceGrid {
    pub p: usize,
    /// Nodes per axis; node `i` sits at `−s/2 + s·i/(res−1)`.
    pub res: usize,
    pub side: f64,
    pub horizon: u32,
    /// Number of consecutive steps `ℓ = 1, 2, …` with `g_{ℓt}hx ∈ S`, capped at the horizon.
    pub survival: Vec<u32>,
}

impl AvoidanceGrid {
    pub fn len(&self) -> usize {
        self.survival.len()
    }

    pub fn is_empty(&self) -> bool {
        self.survival.is_empty()
    }

    /// Coordinates of node `i`; axis 0 varies fastest.
    pub fn node(&self, mut i: usize) -> Vec<f64> {
        let mut h = Vec::with_capacity(self.p);
        for _ in 0..self.p {
            let k = i % self.res;
            i /= self.res;
            h.push(-self.side / 2.0 + self.side * k as f64 / (self.res - 1) as f64);
        }
        h
    }

    /// Membership in `A^level` for `level ≤ horizon`.
    pub fn indicator(&self, level: u32) -> Vec<bool> {
        self.survival.iter().map(|&s| s >= level).collect()
    }

    pub fn fraction(&self, level: u32) -> f64 {
        self.survival.iter().filter(|&&s| s >= level).count() as f64 / self.len() as f64
    }
}

fn survival_at(frame: &HorosphericalFrame, q: &AvoidanceQuery, h: &[f64]) -> u32 {
    let mut y = frame.apply_unipotent(h, &q.x);
    for level in 1..=q.horizon {
        y = q.flow.advance(q.t, &y);
        if !q.s.contains(&y) {
            return level - 1;
        }
    }
    q.horizon
}

/// Evaluates membership in `A^N_x(t,r,S)` on a uniform grid of `V̄_r`.
pub fn sample_avoidance_set<E: Executor>(exec: &E, shards: usize, q: &AvoidanceQuery, res: usize) -> Result<AvoidanceGrid> {
    let frame = q.validate()?;
    if res < 2 {
        return Err(Error::precondition("grid needs at least 2 nodes per axis"));
    }
    let p = frame.p;
    let total = (res as u64).checked_pow(p as u32).filter(|&n| n <= MAX_GRID_NODES);
    let Some(total) = total else {
        let max_res = (MAX_GRID_NODES as f64).powf(1.0 / p as f64).floor() as u64;
        return Err(Error::budget(alloc::format!("grid of {res}^{p} nodes exceeds {MAX_GRID_NODES}"), Some(max_res)));
    };
    let mut grid = AvoidanceGrid { p, res, side: side(p, q.r), horizon: q.horizon, survival: Vec::new() };
    grid.survival = match q.s {
        TargetSet::Whole => vec![q.horizon; total as usize],
        TargetSet::Empty => vec![0; total as usize],
        _ => map_indexed(exec, total as usize, shards, |i| survival_at(&frame, q, &grid.node(i))),
    };
    Ok(grid)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverLevel {
    pub level: u32,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverBox {
    pub center: Vec<f64>,
    pub sides: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverAudit {
    pub resolution: usize,
    pub nodes: u64,
    pub avoiding_nodes: u64,
    pub uncovered_nodes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecursiveCover {
    pub theta: f64,
    pub levels: Vec<CoverLevel>,
    /// The Bowen `(Nt, θ)`-boxes at the final level.
    pub boxes: Vec<CoverBox>,
    pub audit: CoverAudit,
}

/// Side of the level-`ℓ` cells along each axis.
fn level_sides(frame: &HorosphericalFrame, theta_side: f64, t: f64, level: u32) -> Vec<f64> {
    frame.entry_exponents.iter().map(|l| theta_side * (-l * t * level as f64).exp()).collect()
}

fn axis_range(lo: f64, hi: f64, w: f64) -> (i64, i64) {
    const SLACK: f64 = 1e-9;
    let a = ((lo - w / 2.0) / w - SLACK).ceil() as i64;
    let b = ((hi + w / 2.0) / w + SLACK).floor() as i64;
    (a, b)
}

/// Builds the cover level by level. A level-`ℓ` cell `h_c + g_{−ℓt}V̄_θ g_{ℓt}`
/// of the pulled-back `Λ_θ` grid is kept if it meets a kept level-`(ℓ−1)`
/// cell and `S` may meet `u(w) g_{ℓt}u(h_c)x` for some `‖w‖ ≤ √p·side(θ)/2`.
/// Every avoiding node of an audit grid must end up in a final cell.
pub fn recursive_cover<E: Executor>(
    exec: &E,
    shards: usize,
    q: &AvoidanceQuery,
    theta: f64,
    audit_resolution: usize,
    max_boxes: usize,
) -> Result<RecursiveCover> {
    let frame = q.validate()?;
    if !(theta >= q.r && theta <= R_STAR / 2.0) && theta != q.r {
        return Err(Error::precondition("need r <= theta <= r_*/2"));
    }
    let p = frame.p;
    let s_theta = side(p, theta);
    let final_sides = level_sides(&frame, s_theta, q.t, q.horizon);
    if final_sides.iter().any(|&w| w < MIN_BOX_SIDE) {
        return Err(Error::precondition("N t exceeds the contraction budget: final box sides fall below 1e-12"));
    }
    let probe = Displacement::unipotent(s_theta / 2.0 * (p as f64).sqrt() * (1.0 + 1e-9));

    let s_r = side(p, q.r);
    let mut parents: Vec<(Vec<f64>, Vec<f64>)> = vec![(vec![0.0; p], vec![s_r; p])];
    let mut levels = Vec::with_capacity(q.horizon as usize);
    let mut current: Vec<Vec<i64>> = Vec::new();
    for level in 1..=q.horizon {
        let w = level_sides(&frame, s_theta, q.t, level);
        let mut candidates = BTreeSet::new();
        for (center, sides) in &parents {
            let ranges: Vec<(i64, i64)> =
                (0..p).map(|k| axis_range(center[k] - sides[k] / 2.0, center[k] + sides[k] / 2.0, w[k])).collect();
            let size: u64 = ranges.iter().map(|(a, b)| (b - a + 1).max(0) as u64).product();
            if candidates.len() as u64 + size > max_boxes as u64 {
                return Err(Error::budget(
                    alloc::format!("cover exceeds {max_boxes} candidate boxes at level {level}"),
                    Some(level as u64 - 1),
                ));
            }
            let mut idx: Vec<i64> = ranges.iter().map(|r| r.0).collect();
            'outer: loop {
                candidates.insert(idx.clone());
                for k in 0..p {
                    if idx[k] < ranges[k].1 {
                        idx[k] += 1;
                        continue 'outer;
                    }
                    idx[k] = ranges[k].0;
                }
                break;
            }
        }
        let candidates: Vec<Vec<i64>> = candidates.into_iter().collect();
        let keep = map_indexed(exec, candidates.len(), shards, |i| {
            let h: Vec<f64> = candidates[i].iter().zip(&w).map(|(&k, &wk)| k as f64 * wk).collect();
            match q.s {
                TargetSet::Whole => true,
                TargetSet::Empty => false,
                _ => q.s.may_meet(&frame.push(&q.flow, q.t * level as f64, &h, &q.x), probe),
            }
        });
        current = candidates.into_iter().zip(keep).filter(|(_, k)| *k).map(|(c, _)| c).collect();
        levels.push(CoverLevel { level, count: current.len() as u64 });
        parents = current
            .iter()
            .map(|c| (c.iter().zip(&w).map(|(&k, &wk)| k as f64 * wk).collect(), w.clone()))
            .collect();
    }

    let grid = sample_avoidance_set(exec, shards, q, audit_resolution)?;
    let kept: BTreeSet<&Vec<i64>> = current.iter().collect();
    let uncovered = map_indexed(exec, grid.len(), shards, |i| {
        if grid.survival[i] < q.horizon {
            return false;
        }
        let h = grid.node(i);
        let options: Vec<(i64, i64)> = h
            .iter()
            .zip(&final_sides)
            .map(|(&x, &w)| ((x / w + 0.5 - 1e-9).floor() as i64, (x / w + 0.5 + 1e-9).floor() as i64))
            .collect();
        let mut idx = vec![0i64; p];
        for mask in 0u32..(1 << p) {
            for k in 0..p {
                idx[k] = if mask >> k & 1 == 1 { options[k].1 } else { options[k].0 };
            }
            if kept.contains(&idx) {
                return false;
            }
        }
        true
    });
    let audit = CoverAudit {
        resolution: audit_resolution,
        nodes: grid.len() as u64,
        avoiding_nodes: grid.survival.iter().filter(|&&s| s >= q.horizon).count() as u64,
        uncovered_nodes: uncovered.iter().filter(|&&u| u).count() as u64,
    };
    if audit.uncovered_nodes > 0 {
        return Err(Error::audit(alloc::format!(
            "{} of {} avoiding grid nodes are not covered",
            audit.uncovered_nodes,
            audit.avoiding_nodes
        )));
    }
    let boxes = current
        .iter()
        .map(|c| CoverBox { center: c.iter().zip(&final_sides).map(|(&k, &w)| k as f64 * w).collect(), sides: final_sides.clone() })
        .collect();
    Ok(RecursiveCover { theta, levels, boxes, audit })
}

/// `C₂ = C₀ + vol(B₁)(4√p)^p / c₁`, with `ν` the unit-ball probability.
pub fn big_c2(c0: f64, c1: f64, p: usize) -> f64 {
    c0 + unit_ball_volume(p) * (4.0 * (p as f64).sqrt()).powi(p as i32) / c1
}

/// `e^{δNt}(1 − μ(σ_r O) + C₂ r^{−p} e^{−λt})^N`.
#[allow(clippy::too_many_arguments)]
pub fn cover_count_bound(delta: f64, t: f64, n: u32, mu_core: f64, c2: f64, r: f64, p: usize, lambda: f64) -> f64 {
    let base = 1.0 - mu_core + c2 / r.powi(p as i32) * (-lambda * t).exp();
    (delta * n as f64 * t).exp() * base.powi(n as i32)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundValue {
    pub raw: f64,
    pub clamped: f64,
    /// True when the raw value was negative and clamping changed it.
    pub clamped_flag: bool,
}

impl BoundValue {
    fn new(raw: f64) -> Self {
        BoundValue { raw, clamped: raw.max(0.0), clamped_flag: raw < 0.0 }
    }
}

/// `(1/(λ_max k t)) log((1−c)/(4c))`.
pub fn codim_bound_s1(lambda_max: f64, k: u32, t: f64, c: f64) -> Result<BoundValue> {
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::precondition("need 0 < c < 1"));
    }
    if k < 2 || !(t > 0.0) || !(lambda_max > 0.0) {
        return Err(Error::precondition("need k >= 2, t > 0 and lambda_max > 0"));
    }
    Ok(BoundValue::new(((1.0 - c) / (4.0 * c)).ln() / (lambda_max * k as f64 * t)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct S2Input {
    pub mu_core: f64,
    pub big_c1: f64,
    pub theta: f64,
    pub p: usize,
    pub c: f64,
    pub big_c2: f64,
    pub r: f64,
    pub lambda: f64,
    pub k: u32,
    pub t: f64,
    pub lambda_max: f64,
}

/// `(μ(σ_{4θ}O) − (8C₁/θ^p)·√c/(1−c) − (C₂/r^p)e^{−λkt}) / (λ_max k t)`.
pub fn codim_bound_s2(i: &S2Input) -> Result<BoundValue> {
    if !(i.c > 0.0 && i.c < 1.0) {
        return Err(Error::precondition("need 0 < c < 1"));
    }
    if !(i.theta >= i.r && i.r > 0.0) {
        return Err(Error::precondition("need 0 < r <= theta"));
    }
    if !(i.big_c1 > 0.0 && i.big_c2 > 0.0 && i.lambda > 0.0 && i.t > 0.0 && i.lambda_max > 0.0) || i.k == 0 {
        return Err(Error::precondition("S2 inputs must be positive"));
    }
    let kt = i.k as f64 * i.t;
    let num = i.mu_core
        - 8.0 * i.big_c1 / i.theta.powi(i.p as i32) * i.c.sqrt() / (1.0 - i.c)
        - i.big_c2 / i.r.powi(i.p as i32) * (-i.lambda * kt).exp();
    Ok(BoundValue::new(num / (i.lambda_max * kt)))
}

/// `μ(O) / (4 λ_max k t)`.
pub fn final_codim(mu_o: f64, lambda_max: f64, k: u32, t: f64) -> Result<f64> {
    if !(mu_o > 0.0) {
        return Err(Error::precondition("mu(O) = 0: no bound"));
    }
    if k < 2 || !(t > 0.0) || !(lambda_max > 0.0) {
        return Err(Error::precondition("need k >= 2, t > 0 and lambda_max > 0"));
    }
    Ok(mu_o / (4.0 * lambda_max * k as f64 * t))
}

/// `c = min(1/(4√e + 1), (μ(O) θ^p / (128 C₁))²)`.
pub fn c_of_o(mu_o: f64, big_c1: f64, theta: f64, p: usize) -> f64 {
    let second = (mu_o * theta.powi(p as i32) / (128.0 * big_c1)).powi(2);
    (1.0 / (4.0 * 0.5f64.exp() + 1.0)).min(second)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaReport {
    pub theta: f64,
    pub mu_o: Estimate,
    /// `(θ, μ̂(σ_{4θ}O))` in evaluation order.
    pub trace: Vec<(f64, Estimate)>,
    /// `μ̂(σ_{4θ}O)` is non-increasing in `θ` across the trace.
    pub monotone: bool,
}

/// `θ_O = sup{θ ≤ 1 : μ̂(σ_{4θ}O) ≥ μ̂(O)/2}` by bisection to `tol`.
/// All estimates share one sample stream so that nested cores give nested counts.
pub fn theta_o<E: Executor>(exec: &E, cfg: &McConfig, o: &TargetSet, kappa: f64, tol: f64) -> Result<ThetaReport> {
    let mu_o = measure_of_target(o, exec, cfg)?;
    if !(mu_o.mean > 0.0) {
        return Err(Error::precondition("mu(O) = 0: no bound"));
    }
    let mut trace = Vec::new();
    let mut eval = |theta: f64| -> Result<bool> {
        let m = measure_of_target(&o.inner_core(4.0 * theta, kappa)?, exec, cfg)?;
        trace.push((theta, m));
        Ok(m.mean >= mu_o.mean / 2.0)
    };
    let theta = if eval(1.0)? {
        1.0
    } else {
        let (mut lo, mut hi) = (0.0, 1.0);
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if eval(mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    let mut sorted = trace.clone();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let monotone = sorted.windows(2).all(|w| w[1].1.mean <= w[0].1.mean);
    Ok(ThetaReport { theta, mu_o, trace, monotone })
}
