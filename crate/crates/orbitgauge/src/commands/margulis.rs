use clap::Args as ClapArgs;
use orbitgauge_core::height::{default_panel, margulis_check, HeightFunctionSpec};
use serde::{Deserialize, Serialize};

use super::{flow_and_frame, Ctx};
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
    /// Height exponent: u = max(1, λ₁^{−s}).
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    /// Number of cusp panel points.
    #[arg(long)]
    pub panel: Option<usize>,
    #[arg(long)]
    pub u_lo: Option<f64>,
    #[arg(long)]
    pub u_hi: Option<f64>,
    /// Haar-random anchor points used to fit d.
    #[arg(long)]
    pub anchors: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub m: usize,
    pub n: usize,
    pub exponents: Option<Vec<f64>>,
    pub s: f64,
    pub t: f64,
    pub panel: usize,
    pub u_lo: f64,
    pub u_hi: f64,
    pub anchors: usize,
}

impl Default for Params {
    fn default() -> Self {
        Params { m: 1, n: 1, exponents: None, s: 0.5, t: 4.0, panel: 8, u_lo: 10.0, u_hi: 100.0, anchors: 8 }
    }
}

pub fn run(ctx: &mut Ctx, p: &Params) -> CliResult<()> {
    let (flow, frame) = flow_and_frame(p.m, p.n, &p.exponents)?;
    let height = HeightFunctionSpec::new(p.s)?;
    let panel = default_panel(&height, frame.dim(), p.panel, p.u_lo, p.u_hi);
    let report = margulis_check(&ctx.exec, &ctx.cfg, &height, &frame, &flow, p.t, &panel, p.anchors)?;
    let mut csv = ctx.csv(&["u", "estimate", "sigma", "ratio"])?;
    for e in &report.panel {
        csv.row(&[fmt_f64(e.u), fmt_f64(e.estimate.mean), fmt_f64(e.estimate.std_err), fmt_f64(e.ratio)])?;
    }
    csv.finish()?;
    ctx.json(&report)
}
