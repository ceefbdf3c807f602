use clap::Args as ClapArgs;
use orbitgauge_core::tessellation::{
    count_intersecting_translates, count_intersecting_translates_unchecked, cover_bowen_by_balls, cover_v_theta_by_v_r,
    covering_time_threshold, TessellationSpec,
};
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{flow_and_frame, Ctx};
use crate::config::Grid;
use crate::emit::fmt_f64;
use crate::error::CliResult;

#[derive(Debug, Clone, ClapArgs, Serialize)]
pub struct Args {
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Flow exponents, comma separated (default: the Dirichlet flow n,…,−m,…).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub exponents: Option<Vec<f64>>,
    #[arg(long)]
    pub r: Option<f64>,
    /// Times as start:stop:step, a list, or a single value.
    #[arg(long)]
    pub t: Option<Grid>,
    /// Also cover V_theta by V_r translates.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Skip the minimum-time hypothesis of the count.
    #[arg(long)]
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub unchecked: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub m: usize,
    pub n: usize,
    pub exponents: Option<Vec<f64>>,
    pub r: f64,
    pub t: Grid,
    pub theta: Option<f64>,
    pub unchecked: bool,
}

impl Default for Params {
    fn default() -> Self {
        Params { m: 1, n: 1, exponents: None, r: 0.1, t: Grid(vec![1.5, 2.0, 2.5, 3.0, 3.5, 4.0]), theta: None, unchecked: false }
    }
}

pub fn run(ctx: &mut Ctx, p: &Params) -> CliResult<()> {
    let (flow, frame) = flow_and_frame(p.m, p.n, &p.exponents)?;
    let tess = TessellationSpec::new(frame.p, p.r)?;
    let mut csv = ctx.csv(&["t", "exact_count", "bound", "pass"])?;
    let mut rows = Vec::new();
    for &t in &p.t.0 {
        let rep = if p.unchecked {
            count_intersecting_translates_unchecked(&frame, &tess, t)?
        } else {
            count_intersecting_translates(&frame, &tess, t)?
        };
        let balls = cover_bowen_by_balls(&frame, t, p.r)?;
        csv.row(&[fmt_f64(t), rep.count.to_string(), fmt_f64(rep.bound), rep.pass.to_string()])?;
        rows.push(json!({
            "t": t,
            "count": rep,
            "balls": { "radius": balls.radius, "count": balls.centers.len(), "bound": balls.bound, "verified": balls.verified },
        }));
    }
    csv.finish()?;
    let v_theta = p.theta.map(|th| cover_v_theta_by_v_r(&tess, th)).transpose()?;
    ctx.json(&json!({
        "flow": flow,
        "frame": frame,
        "side": tess.side(),
        "c0": tess.c0(),
        "time_threshold": covering_time_threshold(&frame),
        "rows": rows,
        "v_theta": v_theta,
    }))
}
