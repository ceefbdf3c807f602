use clap::Args as ClapArgs;
use orbitgauge_core::combinatorics::{combination_audit, d_counts, subset_sum_bound_exact, CoverConstants};
use orbitgauge_core::convolution::convolution_density_check;
use orbitgauge_core::flow::{horospherical_frame, FlowSpec};
use orbitgauge_core::tessellation::{tiling_audit, TessellationSpec};
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::Ctx;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, ClapArgs, Serialize)]
pub struct Args {}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {}

#[derive(Debug, Clone, Serialize)]
pub struct Suite {
    pub name: &'static str,
    pub cases: u64,
    pub failures: u64,
}

fn subset_sum() -> CliResult<Suite> {
    let mut suite = Suite { name: "subset_sum", cases: 0, failures: 0 };
    for n in 1..=12 {
        for a in 1..=6u64 {
            for b in 1..=6u64 {
                for c in 1..=6u64 {
                    suite.cases += 1;
                    suite.failures += u64::from(!subset_sum_bound_exact(a, b, c, n)?.pass);
                }
            }
        }
    }
    Ok(suite)
}

fn alternations() -> Suite {
    let mut suite = Suite { name: "d_counts", cases: 0, failures: 0 };
    for n in 1..=16u32 {
        for j in 0u32..(1 << n) {
            let (d, dp) = d_counts(j, n);
            suite.cases += 1;
            suite.failures += u64::from(dp > d + 1 || d > dp + 1);
        }
    }
    suite
}

fn tiling() -> CliResult<Suite> {
    let mut suite = Suite { name: "tiling", cases: 0, failures: 0 };
    for p in 1..=2 {
        for r in [0.02, 0.05, 0.1] {
            for w in [0.3, 1.0, 2.5] {
                let vol = tiling_audit(&TessellationSpec::new(p, r)?, w)?;
                let want = (2.0 * w).powi(p as i32);
                suite.cases += 1;
                suite.failures += u64::from((vol - want).abs() > 1e-12 * want);
            }
        }
    }
    Ok(suite)
}

fn convolution() -> CliResult<Suite> {
    let mut suite = Suite { name: "convolution_density", cases: 0, failures: 0 };
    let frame = horospherical_frame(&FlowSpec::standard(1, 1)?, 1, 1)?;
    for n in 2..=10 {
        suite.cases += 1;
        suite.failures += u64::from(!convolution_density_check(&frame, 1.0, n)?.pass);
    }
    Ok(suite)
}

fn combination() -> CliResult<Suite> {
    let mut suite = Suite { name: "combination", cases: 0, failures: 0 };
    let base = CoverConstants { k1: 1.0, a1: 0.5, k2: 1.0, a2: 0.25, c0: 0.0, c1: 1.0, c2: 1.0, p: 1, theta: 0.1, r: 0.1 };
    for n in 1..=12 {
        for c0 in [0.0, 1.0, 16.0] {
            suite.cases += 1;
            suite.failures += u64::from(!combination_audit(&CoverConstants { c0, ..base }, n)?.pass);
        }
    }
    Ok(suite)
}

pub fn run(ctx: &mut Ctx, _p: &Params) -> CliResult<()> {
    let suites = vec![subset_sum()?, alternations(), tiling()?, convolution()?, combination()?];
    let mut csv = ctx.csv(&["suite", "cases", "failures", "pass"])?;
    for s in &suites {
        csv.row(&[s.name.to_string(), s.cases.to_string(), s.failures.to_string(), (s.failures == 0).to_string()])?;
    }
    csv.finish()?;
    let pass = suites.iter().all(|s| s.failures == 0);
    ctx.json(&json!({ "suites": suites, "pass": pass }))?;
    if !pass {
        return Err(CliError::Failed("selftest failed".into()));
    }
    Ok(())
}
