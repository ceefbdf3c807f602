//! Equidistribution of pushed tessellation cells, measured with indicator
//! functions.
//!
//! For a cell `V_r` of the expanding block and a base point `x`, the
//! fraction of `h ∈ V_r` with `g_t h x ∈ O` should approach `μ(O)` at an
//! exponential rate. [`fit_decay`] estimates that rate from the measured
//! discrepancies and [`measure_lower_bound_check`] tests the resulting
//! lower bound on `ν({h ∈ V_r : g_t h x ∈ O})`.

use alloc::vec::Vec;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{FlowSpec, HorosphericalFrame};
use crate::height::{Region, unit_ball_volume};
use crate::lattice::LatticeBasis;
use crate::mc::{mc_mean, streams, Estimate, Executor, McConfig};
use crate::regression::{ols, t_quantile_975};
use crate::target::{measure_of_target, TargetSet};
use crate::tessellation::R_STAR;

/// Fraction of `h` uniform in the closed cell `V̄_r` with `g_t h x ∈ O`.
#[allow(clippy::too_many_arguments)]
pub fn orbit_fraction<E: Executor>(
    exec: &E,
    cfg: &McConfig,
    frame: &HorosphericalFrame,
    flow: &FlowSpec,
    x: &LatticeBasis,
    t: f64,
    o: &TargetSet,
    r: f64,
) -> Result<Estimate> {
    match o {
        TargetSet::Whole => return Ok(Estimate::exact(1.0)),
        TargetSet::Empty => return Ok(Estimate::exact(0.0)),
        _ => {}
    }
    if cfg.samples == 0 {
        return Err(Error::precondition("need at least one sample"));
    }
    let p = frame.p;
    let region = Region::Cube { side: crate::tessellation::side(p, r) };
    Ok(mc_mean(exec, cfg, streams::EQUIDIST, |rng| {
        let mut h = [0.0; 4];
        region.sample(rng, &mut h[..p]);
        if o.contains(&frame.push(flow, t, &h[..p], x)) {
            1.0
        } else {
            0.0
        }
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquidistPoint {
    pub t: f64,
    pub fraction: Estimate,
    pub mu: Estimate,
    pub error: f64,
    pub sigma: f64,
}

/// `|fraction − μ̂(O)|` with the combined standard error. `mu` may be
/// supplied to share one measure estimate across a time grid.
#[allow(clippy::too_many_arguments)]
pub fn equidistribution_error<E: Executor>(
    exec: &E,
    cfg: &McConfig,
    frame: &HorosphericalFrame,
    flow: &FlowSpec,
    x: &LatticeBasis,
    t: f64,
    o: &TargetSet,
    r: f64,
    mu: Option<Estimate>,
) -> Result<EquidistPoint> {
    if x.dim() != 2 {
        return Err(Error::unsupported("equidistribution experiments need μ, available only for d = 2"));
    }
    if !(r > 0.0 && r <= R_STAR) {
        return Err(Error::precondition("need 0 < r <= r_*"));
    }
    let mu = match mu {
        Some(m) => m,
        None => measure_of_target(o, exec, &cfg.derive(streams::MEASURE))?,
    };
    let fraction = orbit_fraction(exec, cfg, frame, flow, x, t, o, r)?;
    let error = (fraction.mean - mu.mean).abs();
    let sigma = (fraction.std_err.powi(2) + mu.std_err.powi(2)).sqrt();
    Ok(EquidistPoint { t, fraction, mu, error, sigma })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitStatus {
    Fitted,
    /// Too few points survived censoring.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub t_grid: Vec<f64>,
    pub errors: Vec<f64>,
    pub sigmas: Vec<f64>,
    /// Points with error below three standard errors are left out of the fit.
    pub censored: Vec<bool>,
    pub status: FitStatus,
    pub lambda_hat: f64,
    pub intercept: f64,
    pub ci95: (f64, f64),
    pub positive_95: bool,
    pub r_squared: f64,
}

/// Least-squares fit of `log e(t) = a − λ t` on the uncensored points.
pub fn fit_decay(t_grid: &[f64], errors: &[f64], sigmas: &[f64]) -> Result<DecayFit> {
    if t_grid.len() < 4 {
        return Err(Error::precondition("decay fit needs at least 4 grid points"));
    }
    if errors.len() != t_grid.len() || sigmas.len() != t_grid.len() {
        return Err(Error::invalid("grid, errors and sigmas differ in length"));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::precondition("time grid must be increasing"));
    }
    let censored: Vec<bool> = errors.iter().zip(sigmas).map(|(e, s)| !(*e > 3.0 * s && *e > 0.0)).collect();
    let (ts, logs): (Vec<f64>, Vec<f64>) = t_grid
        .iter()
        .zip(errors)
        .zip(&censored)
        .filter(|(_, c)| !**c)
        .map(|((t, e), _)| (*t, e.ln()))
        .unzip();
    let mut fit = DecayFit {
        t_grid: t_grid.to_vec(),
        errors: errors.to_vec(),
        sigmas: sigmas.to_vec(),
        censored,
        status: FitStatus::Inconclusive,
        lambda_hat: f64::NAN,
        intercept: f64::NAN,
        ci95: (f64::NAN, f64::NAN),
        positive_95: false,
        r_squared: f64::NAN,
    };
    if ts.len() < 3 {
        return Ok(fit);
    }
    let lf = ols(&ts, &logs)?;
    let lambda_hat = -lf.slope;
    let half = t_quantile_975(lf.n - 2) * lf.slope_se;
    fit.status = FitStatus::Fitted;
    fit.lambda_hat = lambda_hat;
    fit.intercept = lf.intercept;
    fit.ci95 = (lambda_hat - half, lambda_hat + half);
    fit.positive_95 = lambda_hat - half > 0.0;
    fit.r_squared = lf.r_squared;
    Ok(fit)
}

/// Runs [`equidistribution_error`] over a grid, sharing one `μ̂(O)`, then fits.
#[allow(clippy::too_many_arguments)]
pub fn decay_experiment<E: Executor>(
    exec: &E,
    cfg: &McConfig,
    frame: &HorosphericalFrame,
    flow: &FlowSpec,
    x: &LatticeBasis,
    o: &TargetSet,
    r: f64,
    t_grid: &[f64],
) -> Result<(Vec<EquidistPoint>, DecayFit)> {
    if t_grid.len() < 4 {
        return Err(Error::precondition("decay fit needs at least 4 grid points"));
    }
    let mu = measure_of_target(o, exec, &cfg.derive(streams::MEASURE))?;
    let points = t_grid
        .iter()
        .enumerate()
        .map(|(i, &t)| equidistribution_error(exec, &cfg.derive(100 + i as u64), frame, flow, x, t, o, r, Some(mu)))
        .collect::<Result<Vec<_>>>()?;
    let errors: Vec<f64> = points.iter().map(|p| p.error).collect();
    let sigmas: Vec<f64> = points.iter().map(|p| p.sigma).collect();
    let fit = fit_decay(t_grid, &errors, &sigmas)?;
    Ok((points, fit))
}

/// Surrogate mixing onset `2 + log(1/λ₁(x))`, clamped at 2.
pub fn mixing_onset(x: &LatticeBasis) -> f64 {
    let sys = x.systole(crate::lattice::NormKind::Euclidean);
    2.0 + (1.0 / sys).ln().max(0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundReport {
    pub t: f64,
    pub r: f64,
    pub lambda_prime: f64,
    pub nu_cell: f64,
    pub lhs: Estimate,
    pub core: TargetSet,
    pub mu_core: Estimate,
    pub rhs: f64,
    pub vacuous: bool,
    pub below_onset: bool,
    pub pass: bool,
}

/// `ν({h ∈ V_r : g_t h x ∈ O}) ≥ ν(V_r) μ(σ_{e^{−λ′t}} O) − e^{−λ′t}`,
/// with `ν` the unit-ball probability and the core taken conservatively.
#[allow(clippy::too_many_arguments)]
pub fn measure_lower_bound_check<E: Executor>(
    exec: &E,
    cfg: &McConfig,
    frame: &HorosphericalFrame,
    flow: &FlowSpec,
    x: &LatticeBasis,
    t: f64,
    o: &TargetSet,
    r: f64,
    lambda_prime: f64,
    kappa: f64,
) -> Result<LowerBoundReport> {
    if !(lambda_prime > 0.0) {
        return Err(Error::precondition("need lambda' > 0"));
    }
    let p = frame.p;
    let nu_cell = crate::tessellation::side(p, r).powi(p as i32) / unit_ball_volume(p);
    let slack = (-lambda_prime * t).exp();
    let core = o.inner_core(slack, kappa)?;
    let mu_core = measure_of_target(&core, exec, &cfg.derive(streams::MEASURE))?;
    let frac = orbit_fraction(exec, cfg, frame, flow, x, t, o, r)?;
    let lhs = frac.scaled(nu_cell);
    let rhs = nu_cell * mu_core.mean - slack;
    let sigma = (lhs.std_err.powi(2) + (nu_cell * mu_core.std_err).powi(2)).sqrt();
    Ok(LowerBoundReport {
        t,
        r,
        lambda_prime,
        nu_cell,
        lhs,
        core,
        mu_core,
        rhs,
        vacuous: rhs <= 0.0,
        below_onset: t < mixing_onset(x),
        pass: lhs.mean >= rhs - 3.0 * sigma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::horospherical_frame;
    use crate::mc::Sequential;

    #[test]
    fn synthetic_exponential_is_recovered() {
        for lam in [0.1, 0.5, 0.7, 1.0] {
            let ts = [1.0, 2.0, 3.0, 4.0, 5.0];
            let es: Vec<f64> = ts.iter().map(|t| 0.5 * (-lam * t).exp()).collect();
            let f = fit_decay(&ts, &es, &[0.0; 5]).unwrap();
            assert!((f.lambda_hat - lam).abs() < 1e-6);
            assert!(f.positive_95);
        }
    }

    #[test]
    fn all_censored_is_inconclusive() {
        let f = fit_decay(&[1.0, 2.0, 3.0, 4.0], &[0.0; 4], &[0.0; 4]).unwrap();
        assert_eq!(f.status, FitStatus::Inconclusive);
        assert!(fit_decay(&[1.0, 2.0, 3.0], &[1.0; 3], &[0.0; 3]).is_err());
    }

    #[test]
    fn whole_space_has_no_error() {
        let flow = FlowSpec::standard(1, 1).unwrap();
        let frame = horospherical_frame(&flow, 1, 1).unwrap();
        let cfg = McConfig::new(1, 100);
        let x = LatticeBasis::identity(2);
        let e = equidistribution_error(&Sequential, &cfg, &frame, &flow, &x, 3.0, &TargetSet::Whole, 0.1, None).unwrap();
        assert_eq!(e.error, 0.0);
        let lb =
            measure_lower_bound_check(&Sequential, &cfg, &frame, &flow, &x, 8.0, &TargetSet::Whole, 0.1, 1.0, 1.0).unwrap();
        assert!(lb.pass && !lb.vacuous);
        assert_eq!(lb.lhs.mean, lb.nu_cell);
    }
}
