use clap::Args as ClapArgs;
use orbitgauge_core::diophantine::di_dimension_scan;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::Ctx;
use crate::config::IntRange;
use crate::emit::fmt_f64;
use crate::error::CliResult;

#[derive(Debug, Clone, ClapArgs, Serialize)]
pub struct Args {
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long = "Nmin")]
    #[serde(rename = "Nmin")]
    pub n_min: Option<u64>,
    #[arg(long = "Nmax")]
    #[serde(rename = "Nmax")]
    pub n_max: Option<u64>,
    /// log2 of the number of grid cells.
    #[arg(long)]
    pub grid_bits: Option<u32>,
    /// Number of reals scanned jointly (1 or 2).
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub scales: Option<IntRange>,
    /// Intermediate N_max values reported in the trend, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub checkpoints: Option<Vec<u64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub c: f64,
    #[serde(rename = "Nmin")]
    pub n_min: u64,
    #[serde(rename = "Nmax")]
    pub n_max: u64,
    pub grid_bits: u32,
    pub k: usize,
    pub scales: IntRange,
    pub checkpoints: Vec<u64>,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            c: 0.5,
            n_min: 10,
            n_max: 1000,
            grid_bits: 16,
            k: 1,
            scales: IntRange::new(4, 14),
            checkpoints: vec![100, 300, 1000],
        }
    }
}

pub fn run(ctx: &mut Ctx, p: &Params) -> CliResult<()> {
    let scan = di_dimension_scan(
        &ctx.exec,
        ctx.shards(),
        p.c,
        p.k,
        p.n_min,
        p.n_max,
        p.grid_bits,
        &p.scales.to_vec_u32(),
        &p.checkpoints,
    )?;
    // Cell centres follow the scan's layout: axis 0 fastest, offset by the golden ratio.
    let per_axis = 1usize << (p.grid_bits / p.k as u32);
    let offset = (5f64.sqrt() - 1.0) / 2.0;
    let mut header = vec!["cell"];
    header.extend(["y1", "y2"].iter().take(p.k));
    header.extend(["first_failure", "survives"]);
    let mut csv = ctx.csv(&header)?;
    for (i, &f) in scan.first_failure.iter().enumerate() {
        let mut row = vec![i.to_string()];
        let mut j = i;
        for _ in 0..p.k {
            row.push(fmt_f64(((j % per_axis) as f64 + offset) / per_axis as f64));
            j /= per_axis;
        }
        row.push(f.to_string());
        row.push((f == 0).to_string());
        csv.row(&row)?;
    }
    csv.finish()?;
    ctx.json(&json!({
        "c": scan.c,
        "k": scan.k,
        "Nmin": scan.n_min,
        "Nmax": scan.n_max,
        "grid_bits": scan.grid_bits,
        "surviving_fraction": scan.surviving_fraction,
        "estimate": scan.estimate,
        "trend": scan.trend,
    }))
}
