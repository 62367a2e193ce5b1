//! Thread-pool executor.

use lilfields_core::Executor;
use rayon::prelude::*;
use rayon::ThreadPool;

/// Schedules replication slots on a private rayon pool. Results are
/// bit-identical to [`lilfields_core::Serial`] for any pool size.
pub struct Pool {
    pool: ThreadPool,
}

impl Pool {
    /// `threads == 0` lets rayon pick the size.
    pub fn new(threads: usize) -> Result<Self, rayon::ThreadPoolBuildError> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
        Ok(Pool { pool })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Executor for Pool {
    fn fill(&self, width: usize, out: &mut [f64], f: &(dyn Fn(usize, &mut [f64]) + Sync)) {
        assert!(width > 0);
        self.pool.install(|| out.par_chunks_mut(width).enumerate().for_each(|(i, chunk)| f(i, chunk)));
    }
}
