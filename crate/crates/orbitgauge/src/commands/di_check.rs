use clap::Args as ClapArgs;
use orbitgauge_core::diophantine::{
    correspondence_audit, dani_orbit_check, is_jointly_di, rational_improvability_bound, DiMatrix,
};
use orbitgauge_core::Error;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{fmt_ints, Ctx};
use crate::config::{ser_json_args, Grid, IntRange};
use crate::emit::fmt_f64;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, ClapArgs, Serialize)]
pub struct Args {
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub c: Option<f64>,
    /// Range of N as lo:hi.
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n_range: Option<IntRange>,
    /// Matrix as JSON, a scalar such as 1/3, or @file.json. Repeat for a joint check.
    #[arg(long = "Y")]
    #[serde(rename = "Y", serialize_with = "ser_json_args")]
    pub y: Vec<String>,
    /// Second matrix of a joint check.
    #[arg(long = "Y2")]
    #[serde(skip)]
    pub y2: Vec<String>,
    /// Also run the orbit-side check on this time grid.
    #[arg(long)]
    pub t_grid: Option<Grid>,
    /// Compare the per-N and per-t checks over the whole range.
    #[arg(long)]
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub audit: bool,
}

impl Args {
    /// Folds `--Y2` into the `--Y` list.
    pub fn normalized(mut self) -> Self {
        self.y.append(&mut self.y2);
        self
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub m: Option<usize>,
    pub n: Option<usize>,
    pub c: f64,
    #[serde(rename = "N")]
    pub n_range: IntRange,
    #[serde(rename = "Y")]
    pub y: Vec<DiMatrix>,
    pub t_grid: Option<Grid>,
    pub audit: bool,
}

impl Default for Params {
    fn default() -> Self {
        Params { m: None, n: None, c: 0.5, n_range: IntRange::new(10, 1000), y: Vec::new(), t_grid: None, audit: false }
    }
}

pub fn run(ctx: &mut Ctx, p: &Params) -> CliResult<()> {
    let Some(first) = p.y.first() else {
        return Err(Error::precondition("di-check needs at least one --Y").into());
    };
    if p.m.is_some_and(|m| m != first.m) || p.n.is_some_and(|n| n != first.n) {
        return Err(Error::precondition(format!("--m/--n do not match the {}x{} matrix", first.m, first.n)).into());
    }
    let range = (p.n_range.lo, p.n_range.hi);
    let result = is_jointly_di(&p.y, p.c, range)?;
    let mut csv = ctx.csv(&["N", "improvable", "best", "threshold", "q", "p"])?;
    for r in &result.per_n {
        let (q, pv) = r.witness.as_ref().map(|w| (fmt_ints(&w.q), fmt_ints(&w.p))).unwrap_or_default();
        csv.row(&[r.n.to_string(), r.improvable.to_string(), fmt_f64(r.best), fmt_f64(r.threshold), q, pv])?;
    }
    csv.finish()?;
    let dani = p.t_grid.as_ref().map(|g| dani_orbit_check(&p.y, p.c, &g.0)).transpose()?;
    let audits = if p.audit {
        p.y.iter().map(|y| correspondence_audit(y, p.c, range)).collect::<Result<Vec<_>, _>>()?
    } else {
        Vec::new()
    };
    let rational_bounds: Vec<Option<u64>> = p.y.iter().map(rational_improvability_bound).collect();
    ctx.json(&json!({ "result": result, "rational_bounds": rational_bounds, "dani": dani, "audits": audits }))?;
    if audits.iter().any(|a| !a.pass) {
        return Err(CliError::Failed("correspondence audit found disagreements outside the boundary band".into()));
    }
    Ok(())
}
