use clap::Args as ClapArgs;
use orbitgauge_core::cover::{big_c2, c_of_o, codim_bound_s1, codim_bound_s2, final_codim, theta_o, S2Input};
use orbitgauge_core::target::DEFAULT_KAPPA;
use orbitgauge_core::tessellation::{TessellationSpec, R_STAR};
use orbitgauge_core::{Error, TargetSet};
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::Ctx;
use crate::error::CliResult;

#[derive(Debug, Clone, ClapArgs, Serialize)]
pub struct Args {
    /// s1, s2 or final.
    pub kind: Option<String>,
    #[arg(long)]
    pub lambda_max: Option<f64>,
    #[arg(long)]
    pub k: Option<u32>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    /// μ of the inner core σ_{4θ}O (s2).
    #[arg(long)]
    pub mu_core: Option<f64>,
    /// μ(O) (final).
    #[arg(long)]
    pub mu_o: Option<f64>,
    #[arg(long)]
    pub big_c1: Option<f64>,
    #[arg(long)]
    pub big_c2: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub r: Option<f64>,
    /// Mixing rate (default: lambda_max).
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Planar target O; with final, μ(O), θ_O and c are estimated from it.
    #[arg(long)]
    pub target: Option<String>,
    #[arg(long)]
    pub kappa: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub kind: String,
    pub lambda_max: f64,
    pub k: u32,
    pub t: f64,
    pub c: Option<f64>,
    pub mu_core: Option<f64>,
    pub mu_o: Option<f64>,
    pub big_c1: f64,
    pub big_c2: Option<f64>,
    pub theta: Option<f64>,
    pub p: usize,
    pub r: f64,
    pub lambda: Option<f64>,
    pub target: Option<String>,
    pub kappa: f64,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            kind: "s1".into(),
            lambda_max: 2.0,
            k: 2,
            t: 5.0,
            c: None,
            mu_core: None,
            mu_o: None,
            big_c1: 1.0,
            big_c2: None,
            theta: None,
            p: 1,
            r: 0.1,
            lambda: None,
            target: None,
            kappa: DEFAULT_KAPPA,
        }
    }
}

fn need<T>(v: Option<T>, name: &str, kind: &str) -> CliResult<T> {
    v.ok_or_else(|| Error::precondition(format!("bounds {kind} needs --{name}")).into())
}

pub fn run(ctx: &mut Ctx, p: &Params) -> CliResult<()> {
    let value = match p.kind.as_str() {
        "s1" => {
            let b = codim_bound_s1(p.lambda_max, p.k, p.t, need(p.c, "c", "s1")?)?;
            json!({ "kind": "s1", "raw": b.raw, "clamped": b.clamped, "clamped_flag": b.clamped_flag })
        }
        "s2" => {
            let big_c2 = match p.big_c2 {
                Some(v) => v,
                None => big_c2(TessellationSpec::new(p.p, p.r)?.c0(), 1.0, p.p),
            };
            let input = S2Input {
                mu_core: need(p.mu_core, "mu-core", "s2")?,
                big_c1: p.big_c1,
                theta: need(p.theta, "theta", "s2")?,
                p: p.p,
                c: need(p.c, "c", "s2")?,
                big_c2,
                r: p.r,
                lambda: p.lambda.unwrap_or(p.lambda_max),
                k: p.k,
                t: p.t,
                lambda_max: p.lambda_max,
            };
            let b = codim_bound_s2(&input)?;
            json!({ "kind": "s2", "raw": b.raw, "clamped": b.clamped, "clamped_flag": b.clamped_flag, "input": input })
        }
        "final" => match (&p.target, p.mu_o) {
            (_, Some(mu)) => json!({ "kind": "final", "mu_o": mu, "codim": final_codim(mu, p.lambda_max, p.k, p.t)? }),
            (Some(spec), None) => {
                let o = TargetSet::parse(spec)?;
                let rep = theta_o(&ctx.exec, &ctx.cfg, &o, p.kappa, 1e-3)?;
                let theta = rep.theta.min(R_STAR / 2.0);
                let mu = rep.mu_o.mean;
                let c = c_of_o(mu, p.big_c1, theta, p.p);
                let s1 = codim_bound_s1(p.lambda_max, p.k, p.t, c)?;
                json!({
                    "kind": "final",
                    "target": o,
                    "mu_o": rep.mu_o,
                    "theta_o": rep,
                    "theta": theta,
                    "c": c,
                    "s1": s1,
                    "codim": final_codim(mu, p.lambda_max, p.k, p.t)?,
                })
            }
            (None, None) => return Err(Error::precondition("bounds final needs --mu-o or --target").into()),
        },
        other => return Err(Error::invalid(format!("unknown bound '{other}': use s1, s2 or final")).into()),
    };
    ctx.json(&value)
}
