use clap::Args as ClapArgs;
use orbitgauge_core::cover::{big_c2, cover_count_bound, recursive_cover, AvoidanceQuery, DEFAULT_MAX_BOXES};
use orbitgauge_core::mc::streams;
use orbitgauge_core::target::{measure_of_target, DEFAULT_KAPPA};
use orbitgauge_core::tessellation::TessellationSpec;
use orbitgauge_core::{LatticeBasis, TargetSet};
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
    pub t: Option<f64>,
    /// Number of steps.
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub horizon: Option<u32>,
    #[arg(long)]
    pub r: Option<f64>,
    /// Cover cell scale (default: r).
    #[arg(long)]
    pub theta: Option<f64>,
    /// The set S the orbit must stay in; the avoided set is its complement.
    #[arg(long)]
    pub target: Option<String>,
    #[arg(long)]
    #[serde(serialize_with = "ser_json_arg")]
    pub basis: Option<String>,
    /// Nodes per axis of the soundness audit grid.
    #[arg(long)]
    pub audit_resolution: Option<usize>,
    #[arg(long)]
    pub max_boxes: Option<usize>,
    /// Boxes listed in the JSON output; the rest are only counted.
    #[arg(long)]
    pub max_listed_boxes: Option<usize>,
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Tessellation constant c₁.
    #[arg(long)]
    pub c1: Option<f64>,
    /// Mixing rate in the count bound (default: λ_min of the frame).
    #[arg(long)]
    pub lambda: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub m: usize,
    pub n: usize,
    pub exponents: Option<Vec<f64>>,
    pub t: f64,
    #[serde(rename = "N")]
    pub horizon: u32,
    pub r: f64,
    pub theta: Option<f64>,
    pub target: String,
    pub basis: Option<LatticeBasis>,
    pub audit_resolution: usize,
    pub max_boxes: usize,
    pub max_listed_boxes: usize,
    pub kappa: f64,
    pub c1: f64,
    pub lambda: Option<f64>,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            m: 1,
            n: 1,
            exponents: None,
            t: 2.0,
            horizon: 3,
            r: 0.1,
            theta: None,
            target: "systole-above:0.2".into(),
            basis: None,
            audit_resolution: 2001,
            max_boxes: DEFAULT_MAX_BOXES,
            max_listed_boxes: 100_000,
            kappa: DEFAULT_KAPPA,
            c1: 1.0,
            lambda: None,
        }
    }
}

pub fn run(ctx: &mut Ctx, p: &Params) -> CliResult<()> {
    let (flow, frame) = flow_and_frame(p.m, p.n, &p.exponents)?;
    let x = base_point(&p.basis, frame.dim())?;
    let s = TargetSet::parse(&p.target)?;
    let q = AvoidanceQuery { x, flow, m: p.m, n: p.n, t: p.t, r: p.r, s: s.clone(), horizon: p.horizon };
    let theta = p.theta.unwrap_or(p.r);
    let cover = recursive_cover(&ctx.exec, ctx.shards(), &q, theta, p.audit_resolution, p.max_boxes)?;

    // The count bound needs μ of the inner core of the avoided set, which is
    // only estimable for planar lattices.
    let tess = TessellationSpec::new(frame.p, p.r)?;
    let c2 = big_c2(tess.c0(), p.c1, frame.p);
    let lambda = p.lambda.unwrap_or(frame.lambda_min);
    let mu_core = s
        .clone()
        .complement()
        .inner_core(p.r, p.kappa)
        .and_then(|core| measure_of_target(&core, &ctx.exec, &ctx.cfg.derive(streams::MEASURE)))
        .ok();
    let bound_at = |level: u32| {
        mu_core.map(|mu| cover_count_bound(frame.delta, p.t, level, mu.mean, c2, p.r, frame.p, lambda))
    };

    let mut csv = ctx.csv(&["level", "count", "bound"])?;
    for lv in &cover.levels {
        let bound = bound_at(lv.level).map(fmt_f64).unwrap_or_default();
        csv.row(&[lv.level.to_string(), lv.count.to_string(), bound])?;
    }
    csv.finish()?;
    let listed = cover.boxes.len().min(p.max_listed_boxes);
    ctx.json(&json!({
        "theta": cover.theta,
        "levels": cover.levels,
        "audit": cover.audit,
        "bound": {
            "mu_core": mu_core,
            "c0": tess.c0(),
            "c2": c2,
            "lambda": lambda,
            "delta": frame.delta,
            "per_level": cover.levels.iter().map(|l| bound_at(l.level)).collect::<Vec<_>>(),
        },
        "box_count": cover.boxes.len(),
        "boxes_truncated": listed < cover.boxes.len(),
        "boxes": &cover.boxes[..listed],
    }))
}
