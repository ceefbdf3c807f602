use clap::Args as ClapArgs;
use orbitgauge_core::cover::{sample_avoidance_set, AvoidanceQuery};
use orbitgauge_core::dimension::{cantor_intervals, cf_bounded_cylinders, DimensionEstimate, IndicatorGrid, IntervalSet};
use orbitgauge_core::{Error, LatticeBasis, TargetSet};
use serde::{Deserialize, Serialize, Serializer};
use serde_json::json;

use super::{base_point, flow_and_frame, Ctx};
use crate::config::{read_json_arg, IntRange};
use crate::emit::fmt_f64;
use crate::error::CliResult;

fn ser_set<S: Serializer>(v: &Option<String>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(path) if path.ends_with(".json") => {
            read_json_arg(&format!("@{path}")).map_err(serde::ser::Error::custom)?.serialize(s)
        }
        other => other.serialize(s),
    }
}

#[derive(Debug, Clone, ClapArgs, Serialize)]
pub struct Args {
    /// interval, cantor, cf-bounded:K, or a JSON avoidance spec file.
    #[arg(long)]
    #[serde(serialize_with = "ser_set")]
    pub set: Option<String>,
    /// Dyadic scale exponents lo:hi.
    #[arg(long)]
    pub scales: Option<IntRange>,
    /// Construction depth for cantor and cf-bounded sets.
    #[arg(long)]
    pub depth: Option<u32>,
}

/// Finite-horizon avoidance set on the leaf through `x`, sampled on a node grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AvoidanceSpec {
    #[serde(default)]
    pub x: Option<LatticeBasis>,
    #[serde(default = "one")]
    pub m: usize,
    #[serde(default = "one")]
    pub n: usize,
    #[serde(default)]
    pub exponents: Option<Vec<f64>>,
    pub t: f64,
    pub r: f64,
    /// The set S the orbit must stay in.
    pub target: String,
    #[serde(rename = "N")]
    pub horizon: u32,
    /// Nodes per axis.
    pub resolution: usize,
    /// Level to measure (default: the horizon).
    #[serde(default)]
    pub level: Option<u32>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SetSpec {
    Named(String),
    Avoidance(AvoidanceSpec),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub set: SetSpec,
    pub scales: IntRange,
    pub depth: Option<u32>,
}

impl Default for Params {
    fn default() -> Self {
        Params { set: SetSpec::Named("cantor".into()), scales: IntRange::new(4, 14), depth: None }
    }
}

pub fn estimate(ctx: &Ctx, p: &Params) -> CliResult<DimensionEstimate> {
    let scales = p.scales.to_vec_u32();
    match &p.set {
        SetSpec::Named(name) => {
            let set = match name.split_once(':') {
                None if name == "interval" => IntervalSet::new(vec![(0.0, 1.0)])?,
                None if name == "cantor" => cantor_intervals(p.depth.unwrap_or(12)),
                Some(("cf-bounded", k)) => {
                    let k: u32 = k.trim().parse().map_err(|_| Error::invalid(format!("bad bound in '{name}'")))?;
                    cf_bounded_cylinders(k, p.depth.unwrap_or(14))?
                }
                _ => return Err(Error::invalid(format!("unknown set '{name}'")).into()),
            };
            Ok(set.dimension(&scales)?)
        }
        SetSpec::Avoidance(a) => {
            let (flow, frame) = flow_and_frame(a.m, a.n, &a.exponents)?;
            let x = base_point(&a.x, frame.dim())?;
            let s = TargetSet::parse(&a.target)?;
            let q = AvoidanceQuery { x, flow, m: a.m, n: a.n, t: a.t, r: a.r, s, horizon: a.horizon };
            let grid = sample_avoidance_set(&ctx.exec, ctx.shards(), &q, a.resolution)?;
            let level = a.level.unwrap_or(a.horizon).min(a.horizon);
            let ind = IndicatorGrid::new(grid.p, grid.res, grid.indicator(level))?;
            let mut est = ind.dimension(&scales)?;
            est.horizon = Some(level);
            Ok(est)
        }
    }
}

pub fn run(ctx: &mut Ctx, p: &Params) -> CliResult<()> {
    let est = estimate(ctx, p)?;
    let mut csv = ctx.csv(&["scale", "log_inv_delta", "log_count", "count"])?;
    for (i, &j) in est.scales.iter().enumerate() {
        let log_count = est.log_counts.get(i).copied().unwrap_or(f64::NEG_INFINITY);
        csv.row(&[j.to_string(), fmt_f64(est.log_inv_delta[i]), fmt_f64(log_count), est.counts[i].to_string()])?;
    }
    csv.finish()?;
    ctx.json(&json!({ "set": p.set, "estimate": est }))
}
