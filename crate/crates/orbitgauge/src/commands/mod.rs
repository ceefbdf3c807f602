//! One module per subcommand. Each defines clap `Args` (every flag
//! optional, so unset flags fall through to the config file), a `Params`
//! record with defaults that is stored in the manifest, and `run`.

pub mod bounds;
pub mod cover;
pub mod di_check;
pub mod di_scan;
pub mod dimension;
pub mod equidist;
pub mod escape;
pub mod margulis;
pub mod selftest;
pub mod systole;
pub mod tessellate;

use std::path::{Path, PathBuf};

use orbitgauge_core::flow::{horospherical_frame, FlowSpec};
use orbitgauge_core::mc::McConfig;
use orbitgauge_core::{HorosphericalFrame, LatticeBasis};
use serde::Serialize;

use crate::emit::{write_json, CsvSink};
use crate::error::CliResult;
use crate::exec::RayonExec;

pub struct Ctx {
    pub exec: RayonExec,
    pub cfg: McConfig,
    pub name: &'static str,
    out: PathBuf,
    outputs: Vec<PathBuf>,
}

impl Ctx {
    pub fn new(name: &'static str, out: &Path, cfg: McConfig) -> Self {
        Ctx { exec: RayonExec, cfg, name, out: out.to_path_buf(), outputs: Vec::new() }
    }

    pub fn shards(&self) -> usize {
        self.cfg.shards
    }

    /// Opens `<out>/<name>.csv`. The caller must `finish` the sink.
    pub fn csv(&mut self, header: &[&str]) -> CliResult<CsvSink> {
        let path = self.out.join(format!("{}.csv", self.name));
        self.outputs.push(path.clone());
        CsvSink::create(&path, header)
    }

    /// Writes `<out>/<name>.json`.
    pub fn json<T: Serialize + ?Sized>(&mut self, value: &T) -> CliResult<()> {
        let path = self.out.join(format!("{}.json", self.name));
        write_json(&path, value)?;
        self.outputs.push(path);
        Ok(())
    }

    pub fn outputs(&self) -> &[PathBuf] {
        &self.outputs
    }
}

pub fn flow_and_frame(m: usize, n: usize, exponents: &Option<Vec<f64>>) -> CliResult<(FlowSpec, HorosphericalFrame)> {
    let flow = match exponents {
        Some(a) => FlowSpec::new(a.clone())?,
        None => FlowSpec::standard(m, n)?,
    };
    let frame = horospherical_frame(&flow, m, n)?;
    Ok((flow, frame))
}

pub fn base_point(basis: &Option<LatticeBasis>, dim: usize) -> CliResult<LatticeBasis> {
    match basis {
        Some(b) if b.dim() != dim => Err(orbitgauge_core::Error::precondition(format!(
            "base point has dimension {}, flow has dimension {dim}",
            b.dim()
        ))
        .into()),
        Some(b) => Ok(b.clone()),
        None => Ok(LatticeBasis::identity(dim)),
    }
}

pub fn fmt_bool(b: bool) -> String {
    b.to_string()
}

pub fn fmt_ints<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(" ")
}
