//! Cube tessellations of the abelian block `P ≅ R^p`, Bowen boxes, and
//! exact counts for the three covering lemmas.
//!
//! `V_r` is the open cube of side `s = r/(4√p)` centred at the origin and
//! `Λ_r = sZ^p`. Conjugation by `g_{−t}` contracts coordinate `i` by
//! `e^{−λ_i t}`, so every count below factorises over axes.

use alloc::vec::Vec;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::HorosphericalFrame;

pub const R_STAR: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TessellationSpec {
    pub p: usize,
    pub r: f64,
    pub r_star: f64,
    pub c1: f64,
    pub c2: f64,
}

impl TessellationSpec {
    pub fn new(p: usize, r: f64) -> Result<Self> {
        if p == 0 {
            return Err(Error::precondition("p must be positive"));
        }
        if !(r > 0.0 && r <= R_STAR) {
            return Err(Error::precondition(alloc::format!("need 0 < r <= {R_STAR}, got r = {r}")));
        }
        Ok(TessellationSpec { p, r, r_star: R_STAR, c1: 1.0, c2: 1.0 })
    }

    pub fn side(&self) -> f64 {
        side(self.p, self.r)
    }

    /// `C₀ = 2^{p+3} p^{3/2} c₂/c₁`.
    pub fn c0(&self) -> f64 {
        c0(self.p, self.c1, self.c2)
    }

    /// Lebesgue volume of `V_r`.
    pub fn cell_volume(&self) -> f64 {
        self.side().powi(self.p as i32)
    }
}

pub fn side(p: usize, r: f64) -> f64 {
    r / (4.0 * (p as f64).sqrt())
}

pub fn c0(p: usize, c1: f64, c2: f64) -> f64 {
    let pf = p as f64;
    2f64.powi(p as i32 + 3) * pf.powf(1.5) * c2 / c1
}

/// Smallest `t` allowed by the covering lemma: `log(8√p)/λ_min`.
pub fn covering_time_threshold(frame: &HorosphericalFrame) -> f64 {
    (8.0 * (frame.p as f64).sqrt()).ln() / frame.lambda_min
}

/// `g_{−t} V̄_r γ g_t`, an axis-aligned box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BowenBox {
    pub t: f64,
    pub r: f64,
    pub gamma: Vec<i64>,
    pub center: Vec<f64>,
    pub sides: Vec<f64>,
}

impl BowenBox {
    pub fn new(frame: &HorosphericalFrame, tess: &TessellationSpec, t: f64, gamma: &[i64]) -> Self {
        let s = tess.side();
        let center = gamma
            .iter()
            .zip(&frame.entry_exponents)
            .map(|(&g, l)| g as f64 * s * (-l * t).exp())
            .collect();
        let sides = frame.entry_exponents.iter().map(|l| s * (-l * t).exp()).collect();
        BowenBox { t, r: tess.r, gamma: gamma.to_vec(), center, sides }
    }

    pub fn volume(&self) -> f64 {
        self.sides.iter().product()
    }

    pub fn diameter(&self) -> f64 {
        self.sides.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn contains(&self, h: &[f64]) -> bool {
        h.iter()
            .zip(self.center.iter().zip(&self.sides))
            .all(|(x, (c, s))| (x - c).abs() <= s / 2.0)
    }
}

/// `(r/2) e^{−λ_min t}`, the chart-level diameter bound for Bowen boxes.
pub fn bowen_diameter_bound(frame: &HorosphericalFrame, r: f64, t: f64) -> f64 {
    r / 2.0 * (-frame.lambda_min * t).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountReport {
    pub count: u64,
    pub bound: f64,
    pub pass: bool,
}

fn product_count(mut per_axis: impl Iterator<Item = u64>) -> Result<u64> {
    per_axis.try_fold(1u64, |acc, k| {
        acc.checked_mul(k).ok_or_else(|| Error::budget("translate count overflows u64", None))
    })
}

/// Number of integers `k` with `|k| ≤ (e^{λt}+1)/2`: the grid translates
/// whose contracted closed cube meets the closed unit cell along one axis.
fn closed_axis_count(lambda: f64, t: f64) -> u64 {
    let half = (((lambda * t).exp() + 1.0) / 2.0).floor();
    2 * half as u64 + 1
}

/// Exact `#{γ ∈ Λ_r : g_{−t} V̄_r γ g_t ∩ V̄_r ≠ ∅}` with no time restriction.
pub fn intersecting_translates(frame: &HorosphericalFrame, t: f64) -> Result<u64> {
    if t < 0.0 {
        return Err(Error::precondition("t must be non-negative"));
    }
    product_count(frame.entry_exponents.iter().map(|&l| closed_axis_count(l, t)))
}

/// `e^{δt}(1 + C₀ e^{−λ_min t})`.
pub fn intersecting_translates_bound(frame: &HorosphericalFrame, tess: &TessellationSpec, t: f64) -> f64 {
    (frame.delta * t).exp() * (1.0 + tess.c0() * (-frame.lambda_min * t).exp())
}

/// Exact count against the covering bound, with the lemma's hypotheses
/// `t ≥ log(8√p)/λ_min` and `r ≤ r_*/2` enforced.
pub fn count_intersecting_translates(
    frame: &HorosphericalFrame,
    tess: &TessellationSpec,
    t: f64,
) -> Result<CountReport> {
    let t_min = covering_time_threshold(frame);
    if t < t_min {
        return Err(Error::precondition(alloc::format!("need t >= log(8 sqrt p)/lambda_min = {t_min:.6}, got {t}")));
    }
    if tess.r > tess.r_star / 2.0 {
        return Err(Error::precondition("need r <= r_*/2"));
    }
    count_intersecting_translates_unchecked(frame, tess, t)
}

/// Same as [`count_intersecting_translates`] without the time threshold.
pub fn count_intersecting_translates_unchecked(
    frame: &HorosphericalFrame,
    tess: &TessellationSpec,
    t: f64,
) -> Result<CountReport> {
    let count = intersecting_translates(frame, t)?;
    let bound = intersecting_translates_bound(frame, tess, t);
    Ok(CountReport { count, bound, pass: (count as f64) <= bound })
}

/// Grid translates of the open `V_r` that meet the open `V_θ`, against
/// `(c₂/c₁)(θ/r + 8√p)^p`.
pub fn cover_v_theta_by_v_r(tess: &TessellationSpec, theta: f64) -> Result<CountReport> {
    if theta < tess.r {
        return Err(Error::precondition(alloc::format!("need theta >= r, got theta = {theta}, r = {}", tess.r)));
    }
    if theta > tess.r_star / 2.0 {
        return Err(Error::precondition("need theta <= r_*/2"));
    }
    let ratio = theta / tess.r;
    let per_axis = v_theta_axis_count(ratio);
    let count = product_count(core::iter::repeat(per_axis).take(tess.p))?;
    let bound = v_theta_bound(tess, theta);
    Ok(CountReport { count, bound, pass: (count as f64) <= bound })
}

/// Integers `k` with `|k| < (θ/r + 1)/2`.
fn v_theta_axis_count(ratio: f64) -> u64 {
    let x = (ratio + 1.0) / 2.0;
    2 * x.ceil() as u64 - 1
}

pub fn v_theta_bound(tess: &TessellationSpec, theta: f64) -> f64 {
    tess.c2 / tess.c1 * (theta / tess.r + 8.0 * (tess.p as f64).sqrt()).powi(tess.p as i32)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallCover {
    pub radius: f64,
    pub centers: Vec<Vec<f64>>,
    pub bound: f64,
    /// Every probe point of the box lies within `radius` of some centre.
    pub verified: bool,
}

/// Covers the Bowen box `g_{−t} V̄_r g_t` by balls of radius `r e^{−λ_max t}`
/// via axis subdivision into cubes of side at most `2 r e^{−λ_max t}/√p`.
pub fn cover_bowen_by_balls(frame: &HorosphericalFrame, t: f64, r: f64) -> Result<BallCover> {
    if !(r > 0.0 && r <= R_STAR) {
        return Err(Error::precondition("need 0 < r <= r_*"));
    }
    if t <= 0.0 {
        return Err(Error::precondition("need t > 0"));
    }
    let p = frame.p;
    let s = side(p, r);
    let radius = r * (-frame.lambda_max * t).exp();
    let sides: Vec<f64> = frame.entry_exponents.iter().map(|l| s * (-l * t).exp()).collect();
    let pieces: Vec<usize> = frame
        .entry_exponents
        .iter()
        .map(|l| (((frame.lambda_max - l) * t).exp() / 8.0).ceil().max(1.0) as usize)
        .collect();
    let total: usize = pieces.iter().product();
    if total > 10_000_000 {
        return Err(Error::budget("ball cover too large", None));
    }
    let axis_centers: Vec<Vec<f64>> = sides
        .iter()
        .zip(&pieces)
        .map(|(&len, &k)| (0..k).map(|j| -len / 2.0 + len * (j as f64 + 0.5) / k as f64).collect())
        .collect();
    let centers = grid_product(&axis_centers);

    // probes: a 5-point lattice per axis, which includes every corner
    let probes_axis: Vec<Vec<f64>> =
        sides.iter().map(|&len| (0..5).map(|j| -len / 2.0 + len * j as f64 / 4.0).collect()).collect();
    let verified = grid_product(&probes_axis).iter().all(|q| {
        centers.iter().any(|c| {
            let d2: f64 = q.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum();
            d2.sqrt() <= radius * (1.0 + 1e-12)
        })
    });
    let bound = ((p as f64 * frame.lambda_max - frame.delta) * t).exp();
    Ok(BallCover { radius, centers, bound, verified })
}

fn grid_product(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = alloc::vec![Vec::new()];
    for axis in axes {
        let mut next = Vec::with_capacity(out.len() * axis.len());
        for prefix in &out {
            for &x in axis {
                let mut v = prefix.clone();
                v.push(x);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

/// Exact tiling audit on the window `[−w, w]^p`: the clipped lengths of the
/// grid cells along each axis sum to the window length, and neighbouring
/// cells share only an endpoint. Returns the covered window volume.
pub fn tiling_audit(tess: &TessellationSpec, w: f64) -> Result<f64> {
    let s = tess.side();
    let kmax = (w / s).ceil() as i64 + 1;
    let mut covered = 0.0;
    for k in -kmax..=kmax {
        let lo = (k as f64 - 0.5) * s;
        let hi = (k as f64 + 0.5) * s;
        let next_lo = (k as f64 + 0.5) * s;
        if hi > next_lo {
            return Err(Error::audit("adjacent cells overlap"));
        }
        covered += (hi.min(w) - lo.max(-w)).max(0.0);
    }
    if (covered - 2.0 * w).abs() > 1e-12 * (2.0 * w).max(1.0) {
        return Err(Error::audit(alloc::format!("cells cover {covered} of a window of length {}", 2.0 * w)));
    }
    Ok(covered.powi(tess.p as i32))
}
