//! Height functions and Monte-Carlo checks of Margulis-type inequalities.
//!
//! The height is `u(Λ) = max(1, λ₁(Λ)^{−s})`. Averages over the expanding
//! block are taken against `ν`, the uniform probability measure on the unit
//! ball `B^P(1) ⊂ R^p`; sub-regions keep their true `ν`-mass, so the
//! average over `B^P(1/2)` is *not* renormalised.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_traits::Float;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{FlowSpec, HorosphericalFrame};
use crate::lattice::{LatticeBasis, NormKind};
use crate::mc::{mc_mean, streams, Estimate, Executor, McConfig, McRng};
use crate::shape::{cusp_point, sample_haar_2d};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeightFunctionSpec {
    pub s: f64,
    /// Growth of `log ‖g‖_op` per unit of surrogate displacement.
    pub kappa: f64,
}

impl Default for HeightFunctionSpec {
    fn default() -> Self {
        HeightFunctionSpec { s: 0.5, kappa: 0.5 }
    }
}

impl HeightFunctionSpec {
    pub fn new(s: f64) -> Result<Self> {
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::precondition("height exponent s must lie in (0, 1)"));
        }
        Ok(HeightFunctionSpec { s, ..Default::default() })
    }

    pub fn value(&self, x: &LatticeBasis) -> f64 {
        self.value_of_systole(x.systole(NormKind::Euclidean))
    }

    pub fn value_of_systole(&self, systole: f64) -> f64 {
        systole.powf(-self.s).max(1.0)
    }

    /// `α = s · max_k |a_k|`, so that `e^{−αt} u(x) ≤ u(g_t x) ≤ e^{αt} u(x)`.
    pub fn alpha(&self, flow: &FlowSpec) -> f64 {
        self.s * flow.max_abs_exponent()
    }

    /// `C = e^{2sκ}`: regularity constant for displacements of size at most 2.
    pub fn regularity_constant(&self) -> f64 {
        (2.0 * self.s * self.kappa).exp()
    }
}

/// Volume of the Euclidean unit ball in `R^p`.
pub fn unit_ball_volume(p: usize) -> f64 {
    match p {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / p as f64 * unit_ball_volume(p - 2),
    }
}

/// Integration region inside `B^P(1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    Ball { radius: f64 },
    /// Closed cube of the given side centred at the origin.
    Cube { side: f64 },
}

impl Region {
    /// `ν(region)` under the unit-ball normalisation.
    pub fn nu_mass(&self, p: usize) -> f64 {
        match *self {
            Region::Ball { radius } => radius.powi(p as i32),
            Region::Cube { side } => side.powi(p as i32) / unit_ball_volume(p),
        }
    }

    pub fn within_unit_ball(&self, p: usize) -> bool {
        match *self {
            Region::Ball { radius } => radius > 0.0 && radius <= 1.0,
            Region::Cube { side } => side > 0.0 && side * (p as f64).sqrt() / 2.0 <= 1.0,
        }
    }

    pub fn sample(&self, rng: &mut McRng, out: &mut [f64]) {
        match *self {
            Region::Cube { side } => {
                for h in out.iter_mut() {
                    *h = side * (rng.gen::<f64>() - 0.5);
                }
            }
            Region::Ball { radius } => loop {
                for h in out.iter_mut() {
                    *h = 2.0 * rng.gen::<f64>() - 1.0;
                }
                if out.iter().map(|x| x * x).sum::<f64>() <= 1.0 {
                    out.iter_mut().for_each(|h| *h *= radius);
                    return;
                }
            },
        }
    }

    pub fn label(&self) -> String {
        match *self {
            Region::Ball { radius } => alloc::format!("B^P({radius})"),
            Region::Cube { side } => alloc::format!("cube(side {side})"),
        }
    }
}

/// `∫_region ψ(g_t h x) dν(h)`, estimated by sampling `h` uniformly in the region.
#[allow(clippy::too_many_arguments)]
pub fn integral_operator<E, F>(
    exec: &E,
    cfg: &McConfig,
    frame: &HorosphericalFrame,
    flow: &FlowSpec,
    region: Region,
    t: f64,
    x: &LatticeBasis,
    psi: F,
) -> Result<Estimate>
where
    E: Executor,
    F: Fn(&LatticeBasis) -> f64 + Sync + Send,
{
    if !region.within_unit_ball(frame.p) {
        return Err(Error::precondition("integration region must lie in the unit ball"));
    }
    if cfg.samples == 0 {
        return Err(Error::precondition("need at least one sample"));
    }
    let p = frame.p;
    let est = mc_mean(exec, cfg, streams::INTEGRAL, |rng| {
        let mut h = [0.0; 4];
        region.sample(rng, &mut h[..p]);
        psi(&frame.push(flow, t, &h[..p], x))
    });
    Ok(est.scaled(region.nu_mass(p)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelEntry {
    pub basis: LatticeBasis,
    pub u: f64,
    pub estimate: Estimate,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MargulisReport {
    pub t: f64,
    pub s: f64,
    pub alpha: f64,
    pub regularity_c: f64,
    pub region: String,
    pub n_samples: u64,
    pub d_floor: Estimate,
    pub c_hat: f64,
    pub c_sigma: f64,
    pub d_hat: f64,
    pub anchors: usize,
    pub pass: bool,
    pub panel: Vec<PanelEntry>,
    pub warnings: Vec<String>,
}

/// Cusp panel: `u` log-spaced over `[u_lo, u_hi]`, at d = 2 with rotation
/// angles spread by the golden ratio.
pub fn default_panel(height: &HeightFunctionSpec, dim: usize, count: usize, u_lo: f64, u_hi: f64) -> Vec<LatticeBasis> {
    let golden = 0.5 * (5f64.sqrt() - 1.0);
    (0..count)
        .map(|j| {
            let frac = if count > 1 { j as f64 / (count - 1) as f64 } else { 0.0 };
            let u = u_lo * (u_hi / u_lo).powf(frac);
            let eps = u.powf(-1.0 / height.s);
            if dim == 2 {
                let phi = 2.0 * PI * ((j as f64 + 1.0) * golden).fract();
                cusp_point(eps, phi)
            } else {
                let rest = eps.powf(-1.0 / (dim - 1) as f64);
                let mut f = alloc::vec![rest; dim];
                f[0] = eps;
                LatticeBasis::identity(dim).scale_rows(&f)
            }
        })
        .collect()
}

/// Estimates the contraction constant of `u` over the panel.
///
/// `d_floor` is the average at the standard lattice. Then
/// `c_hat = max_x (Î u(x) − d_floor)/u(x)` over the panel, and `d_hat` is the
/// smallest additive constant making `Î u ≤ c_hat u + d_hat` hold (with a
/// 3σ margin) at the standard lattice, the panel and `anchors` Haar-random
/// points (d = 2 only).
#[allow(clippy::too_many_arguments)]
pub fn margulis_check<E: Executor>(
    exec: &E,
    cfg: &McConfig,
    height: &HeightFunctionSpec,
    frame: &HorosphericalFrame,
    flow: &FlowSpec,
    t: f64,
    panel: &[LatticeBasis],
    anchors: usize,
) -> Result<MargulisReport> {
    if panel.is_empty() {
        return Err(Error::precondition("panel must not be empty"));
    }
    if t < 0.0 {
        return Err(Error::precondition("t must be non-negative"));
    }
    let region = Region::Ball { radius: 1.0 };
    let mut warnings = Vec::new();
    if t == 0.0 {
        warnings.push("t = 0: identity flow, contraction is not expected".into());
    }
    let estimate = |x: &LatticeBasis, label: u64| {
        integral_operator(exec, &cfg.derive(label), frame, flow, region, t, x, |y| height.value(y))
    };
    let dim = frame.dim();
    let d_floor = estimate(&LatticeBasis::identity(dim), 0)?;
    let mut entries = Vec::with_capacity(panel.len());
    for (i, x) in panel.iter().enumerate() {
        let u = height.value(x);
        let est = estimate(x, 1 + i as u64)?;
        entries.push(PanelEntry { basis: *x, u, estimate: est, ratio: (est.mean - d_floor.mean) / u });
    }
    if entries.iter().all(|e| e.u < 1.0 + 1e-9) {
        warnings.push("degenerate panel: every u(x) is 1, contraction is unobservable and d dominates".into());
    }
    let (c_hat, c_sigma) = entries
        .iter()
        .map(|e| (e.ratio, (e.estimate.std_err.powi(2) + d_floor.std_err.powi(2)).sqrt() / e.u))
        .fold((f64::NEG_INFINITY, 0.0), |acc, v| if v.0 > acc.0 { v } else { acc });
    let c_hat = c_hat.max(0.0);

    let mut d_hat = d_floor.mean;
    for e in &entries {
        d_hat = d_hat.max(e.estimate.mean - c_hat * e.u + 3.0 * e.estimate.std_err);
    }
    d_hat = d_hat.max(d_floor.mean * (1.0 - c_hat) + 3.0 * d_floor.std_err);
    if dim == 2 && anchors > 0 {
        let mut rng = cfg.rng(streams::BASE_POINTS, 0);
        for a in 0..anchors {
            let x = sample_haar_2d(&mut rng);
            let est = estimate(&x, 10_000 + a as u64)?;
            d_hat = d_hat.max(est.mean - c_hat * height.value(&x) + 3.0 * est.std_err);
        }
    }
    Ok(MargulisReport {
        t,
        s: height.s,
        alpha: height.alpha(flow),
        regularity_c: height.regularity_constant(),
        region: region.label(),
        n_samples: cfg.samples,
        d_floor,
        c_hat,
        c_sigma,
        d_hat,
        anchors: if dim == 2 { anchors } else { 0 },
        pass: c_hat + 3.0 * c_sigma < 1.0,
        panel: entries,
        warnings,
    })
}

/// `c₀^N u(x) + d/(1 − c₀)`.
pub fn iterate_margulis_bound(c0: f64, d: f64, n: u32, u_x: f64) -> Result<f64> {
    if !(c0 > 0.0 && c0 < 1.0) {
        return Err(Error::precondition("need 0 < c0 < 1"));
    }
    if n == 0 {
        return Err(Error::precondition("need N >= 1"));
    }
    Ok(c0.powi(n as i32) * u_x + d / (1.0 - c0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub u_x: f64,
    pub estimate: Estimate,
    pub bound: f64,
    pub pass: bool,
}

/// Checks `∫_{B^P(1/2)} u(g_{Nt} h x) dν(h) ≤ c₀^N u(x) + d/(1 − c₀)` at each point.
#[allow(clippy::too_many_arguments)]
pub fn iterate_check<E: Executor>(
    exec: &E,
    cfg: &McConfig,
    height: &HeightFunctionSpec,
    frame: &HorosphericalFrame,
    flow: &FlowSpec,
    t: f64,
    n: u32,
    c0: f64,
    d: f64,
    points: &[LatticeBasis],
) -> Result<Vec<BoundCheck>> {
    let region = Region::Ball { radius: 0.5 };
    points
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let u_x = height.value(x);
            let bound = iterate_margulis_bound(c0, d, n, u_x)?;
            let estimate = integral_operator(
                exec,
                &cfg.derive(streams::ITERATE * 1000 + i as u64),
                frame,
                flow,
                region,
                n as f64 * t,
                x,
                |y| height.value(y),
            )?;
            Ok(BoundCheck { u_x, estimate, bound, pass: estimate.mean <= bound + 3.0 * estimate.std_err })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EscapeBoundInput {
    pub c: f64,
    pub d: f64,
    pub alpha: f64,
    pub t: f64,
    pub ell: f64,
    pub big_c: f64,
    pub n_iter: u32,
    pub k: u32,
    pub u_x: f64,
}

impl EscapeBoundInput {
    /// Fills in `ℓ = max(d/c, e^{αt})`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(c: f64, d: f64, alpha: f64, t: f64, big_c: f64, n_iter: u32, k: u32, u_x: f64) -> Result<Self> {
        if !(c > 0.0 && c < 1.0) {
            return Err(Error::precondition("need 0 < c < 1"));
        }
        if d <= 0.0 {
            return Err(Error::precondition("need d > 0"));
        }
        Ok(EscapeBoundInput { c, d, alpha, t, ell: ell(c, d, alpha, t), big_c, n_iter, k, u_x })
    }
}

/// `ℓ_{c,t} = max(d/c, e^{αt})`.
pub fn ell(c: f64, d: f64, alpha: f64, t: f64) -> f64 {
    (d / c).max((alpha * t).exp())
}

/// `(4c/(1−c))^N · max(u(x), d) / ℓ²`.
pub fn escape_mass_bound(input: &EscapeBoundInput) -> Result<f64> {
    let EscapeBoundInput { c, d, alpha, t, ell, k, u_x, n_iter, .. } = *input;
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::precondition("need 0 < c < 1"));
    }
    if k < 2 {
        return Err(Error::precondition("need k >= 2"));
    }
    if ell < d / c * (1.0 - 1e-12) || ell < (alpha * t).exp() * (1.0 - 1e-12) {
        return Err(Error::precondition("need ell >= max(d/c, e^{alpha t})"));
    }
    Ok((4.0 * c / (1.0 - c)).powi(n_iter as i32) * u_x.max(d) / (ell * ell))
}

/// Monte-Carlo `ν({h ∈ V̄_θ : u(g_{ikt} h x) > C²ℓ² for all 1 ≤ i ≤ N})`
/// against [`escape_mass_bound`].
#[allow(clippy::too_many_arguments)]
pub fn escape_check<E: Executor>(
    exec: &E,
    cfg: &McConfig,
    height: &HeightFunctionSpec,
    frame: &HorosphericalFrame,
    flow: &FlowSpec,
    input: &EscapeBoundInput,
    theta: f64,
    x: &LatticeBasis,
) -> Result<BoundCheck> {
    let bound = escape_mass_bound(input)?;
    let p = frame.p;
    let region = Region::Cube { side: crate::tessellation::side(p, theta) };
    let level = input.big_c * input.big_c * input.ell * input.ell;
    let step = input.k as f64 * input.t;
    let frac = mc_mean(exec, cfg, streams::ESCAPE, |rng| {
        let mut h = [0.0; 4];
        region.sample(rng, &mut h[..p]);
        let mut y = frame.apply_unipotent(&h[..p], x);
        for _ in 0..input.n_iter {
            y = flow.advance(step, &y);
            if height.value(&y) <= level {
                return 0.0;
            }
        }
        1.0
    });
    let estimate = frac.scaled(region.nu_mass(p));
    Ok(BoundCheck { u_x: height.value(x), estimate, bound, pass: estimate.mean <= bound + 3.0 * estimate.std_err })
}
