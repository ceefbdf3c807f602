use orbitgauge_core::mc::Executor;
use rayon::prelude::*;

/// Runs shards on the rayon pool. Results come back in shard order, so
/// outputs do not depend on the thread count.
#[derive(Debug, Clone, Copy, Default)]
pub struct RayonExec;

impl Executor for RayonExec {
    fn map_shards<T, F>(&self, shards: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..shards).into_par_iter().map(f).collect()
    }
}
