use clap::Args as ClapArgs;
use orbitgauge_core::equidist::{decay_experiment, measure_lower_bound_check, FitStatus};
use orbitgauge_core::target::DEFAULT_KAPPA;
use orbitgauge_core::{LatticeBasis, TargetSet};
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{base_point, flow_and_frame, Ctx};
use crate::config::{ser_json_arg, Grid};
use crate::emit::fmt_f64;
use crate::error::CliResult;

#[derive(Debug, Clone, ClapArgs, Serialize)]
pub struct Args {
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub exponents: Option<Vec<f64>>,
    /// Target set, e.g. systole-below:0.3.
    #[arg(long)]
    pub target: Option<String>,
    #[arg(long)]
    pub t_grid: Option<Grid>,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    #[serde(serialize_with = "ser_json_arg")]
    pub basis: Option<String>,
    /// Rate for the lower-bound check (default: the fitted rate).
    #[arg(long)]
    pub lambda_prime: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Time of the lower-bound check (default: the last grid point).
    #[arg(long)]
    pub check_t: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub m: usize,
    pub n: usize,
    pub exponents: Option<Vec<f64>>,
    pub target: String,
    pub t_grid: Grid,
    pub r: f64,
    pub basis: Option<LatticeBasis>,
    pub lambda_prime: Option<f64>,
    pub kappa: f64,
    pub check_t: Option<f64>,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            m: 1,
            n: 1,
            exponents: None,
            target: "systole-below:0.3".into(),
            t_grid: Grid(vec![3.0, 4.0, 5.0, 6.0, 7.0, 8.0]),
            r: 0.1,
            basis: None,
            lambda_prime: None,
            kappa: DEFAULT_KAPPA,
            check_t: None,
        }
    }
}

pub fn run(ctx: &mut Ctx, p: &Params) -> CliResult<()> {
    let (flow, frame) = flow_and_frame(p.m, p.n, &p.exponents)?;
    let x = base_point(&p.basis, frame.dim())?;
    let o = TargetSet::parse(&p.target)?;
    let (points, fit) = decay_experiment(&ctx.exec, &ctx.cfg, &frame, &flow, &x, &o, p.r, &p.t_grid.0)?;
    let mut csv = ctx.csv(&["t", "fraction", "mu", "error", "sigma", "censored"])?;
    for (pt, cens) in points.iter().zip(&fit.censored) {
        csv.row(&[
            fmt_f64(pt.t),
            fmt_f64(pt.fraction.mean),
            fmt_f64(pt.mu.mean),
            fmt_f64(pt.error),
            fmt_f64(pt.sigma),
            cens.to_string(),
        ])?;
    }
    csv.finish()?;
    let rate = p.lambda_prime.or((fit.status == FitStatus::Fitted && fit.lambda_hat > 0.0).then_some(fit.lambda_hat));
    let check_t = p.check_t.or(p.t_grid.0.last().copied());
    let lower_bound = match (rate, check_t) {
        (Some(l), Some(t)) => {
            Some(measure_lower_bound_check(&ctx.exec, &ctx.cfg, &frame, &flow, &x, t, &o, p.r, l, p.kappa)?)
        }
        _ => None,
    };
    ctx.json(&json!({ "target": o, "points": points, "fit": fit, "lower_bound": lower_bound }))
}
