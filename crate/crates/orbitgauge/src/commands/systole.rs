use clap::Args as ClapArgs;
use orbitgauge_core::lattice::shortest_vector;
use orbitgauge_core::mc::{mc_mean_multi, streams};
use orbitgauge_core::shape::{reduce_shape_2d, sample_haar_2d};
use orbitgauge_core::{LatticeBasis, NormKind};
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{fmt_ints, Ctx};
use crate::config::ser_json_arg;
use crate::emit::fmt_f64;
use crate::error::CliResult;

#[derive(Debug, Clone, ClapArgs, Serialize)]
pub struct Args {
    /// Basis as row-major JSON or @file.json. Without it, calibrates the Haar sampler.
    #[arg(long)]
    #[serde(serialize_with = "ser_json_arg")]
    pub basis: Option<String>,
    /// euclidean or supremum.
    #[arg(long)]
    pub norm: Option<String>,
    /// Calibration thresholds, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub basis: Option<LatticeBasis>,
    pub norm: NormKind,
    pub eps: Vec<f64>,
}

impl Default for Params {
    fn default() -> Self {
        Params { basis: None, norm: NormKind::Euclidean, eps: vec![0.05, 0.1, 0.2] }
    }
}

/// `P(λ₁ < ε) = 3ε²/π` for a Haar-random planar lattice and small `ε`.
pub fn siegel_oracle(eps: f64) -> f64 {
    3.0 * eps * eps / std::f64::consts::PI
}

pub fn run(ctx: &mut Ctx, p: &Params) -> CliResult<()> {
    match &p.basis {
        Some(b) => {
            let res = shortest_vector(b, p.norm)?;
            let mut csv = ctx.csv(&["vector", "embedded", "norm", "radius"])?;
            let embedded: Vec<String> = res.embedded.iter().map(|&x| fmt_f64(x)).collect();
            csv.row(&[fmt_ints(&res.vector), embedded.join(" "), fmt_f64(res.norm), fmt_f64(res.radius)])?;
            csv.finish()?;
            let shape = if b.dim() == 2 { reduce_shape_2d(b).ok() } else { None };
            ctx.json(&json!({ "result": res, "shape": shape }))
        }
        None => {
            let eps = p.eps.clone();
            let est = mc_mean_multi(&ctx.exec, &ctx.cfg, streams::HAAR, eps.len(), |rng, out| {
                let s = sample_haar_2d(rng).systole(NormKind::Euclidean);
                for (o, e) in out.iter_mut().zip(&eps) {
                    *o = f64::from(u8::from(s < *e));
                }
            });
            let mut csv = ctx.csv(&["eps", "estimate", "sigma", "oracle", "z", "pass"])?;
            let mut rows = Vec::new();
            for (e, est) in p.eps.iter().zip(&est) {
                let oracle = siegel_oracle(*e);
                let z = (est.mean - oracle) / est.std_err;
                let pass = (est.mean - oracle).abs() <= 3.0 * est.std_err;
                csv.row(&[fmt_f64(*e), fmt_f64(est.mean), fmt_f64(est.std_err), fmt_f64(oracle), fmt_f64(z), pass.to_string()])?;
                rows.push(json!({ "eps": e, "estimate": est, "oracle": oracle, "z": z, "pass": pass }));
            }
            csv.finish()?;
            ctx.json(&json!({ "samples": ctx.cfg.samples, "calibration": rows }))
        }
    }
}
