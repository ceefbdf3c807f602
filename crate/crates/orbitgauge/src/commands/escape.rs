use clap::Args as ClapArgs;
use orbitgauge_core::height::{default_panel, escape_check, margulis_check, EscapeBoundInput, HeightFunctionSpec};
use orbitgauge_core::mc::streams;
use orbitgauge_core::LatticeBasis;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{base_point, flow_and_frame, Ctx};
use crate::config::ser_json_arg;
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
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    /// Step multiplier: the orbit is sampled at times i·k·t.
    #[arg(long)]
    pub k: Option<u32>,
    /// Largest number of steps.
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub horizon: Option<u32>,
    #[arg(long)]
    pub theta: Option<f64>,
    /// Margulis constants; fitted with margulis-check when absent.
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub d: Option<f64>,
    /// Regularity constant of the height function.
    #[arg(long)]
    pub big_c: Option<f64>,
    /// Base point as row-major JSON or @file.json (default: the standard lattice).
    #[arg(long)]
    #[serde(serialize_with = "ser_json_arg")]
    pub basis: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub m: usize,
    pub n: usize,
    pub exponents: Option<Vec<f64>>,
    pub s: f64,
    pub t: f64,
    pub k: u32,
    #[serde(rename = "N")]
    pub horizon: u32,
    pub theta: f64,
    pub c: Option<f64>,
    pub d: Option<f64>,
    pub big_c: Option<f64>,
    pub basis: Option<LatticeBasis>,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            m: 1,
            n: 1,
            exponents: None,
            s: 0.5,
            t: 4.0,
            k: 2,
            horizon: 3,
            theta: 0.05,
            c: None,
            d: None,
            big_c: None,
            basis: None,
        }
    }
}

pub fn run(ctx: &mut Ctx, p: &Params) -> CliResult<()> {
    let (flow, frame) = flow_and_frame(p.m, p.n, &p.exponents)?;
    let height = HeightFunctionSpec::new(p.s)?;
    let x = base_point(&p.basis, frame.dim())?;
    let (c, d, fitted) = match (p.c, p.d) {
        (Some(c), Some(d)) => (c, d, None),
        _ => {
            let panel = default_panel(&height, frame.dim(), 8, 10.0, 100.0);
            let cfg = ctx.cfg.derive(streams::PANEL);
            let rep = margulis_check(&ctx.exec, &cfg, &height, &frame, &flow, p.t, &panel, 8)?;
            (p.c.unwrap_or(rep.c_hat), p.d.unwrap_or(rep.d_hat), Some(rep))
        }
    };
    let big_c = p.big_c.unwrap_or_else(|| height.regularity_constant());
    let alpha = height.alpha(&flow);
    let u_x = height.value(&x);
    let mut csv = ctx.csv(&["N", "bound", "mc_estimate", "sigma"])?;
    let mut rows = Vec::new();
    for big_n in 1..=p.horizon {
        let input = EscapeBoundInput::new(c, d, alpha, p.t, big_c, big_n, p.k, u_x)?;
        let check = escape_check(&ctx.exec, &ctx.cfg.derive(u64::from(big_n)), &height, &frame, &flow, &input, p.theta, &x)?;
        csv.row(&[big_n.to_string(), fmt_f64(check.bound), fmt_f64(check.estimate.mean), fmt_f64(check.estimate.std_err)])?;
        rows.push(json!({ "N": big_n, "input": input, "check": check }));
    }
    csv.finish()?;
    ctx.json(&json!({ "c": c, "d": d, "alpha": alpha, "big_c": big_c, "u_x": u_x, "margulis": fitted, "rows": rows }))
}
