//! Thread-pool executor for the core reductions.
//!
//! Task boundaries are fixed by the core crate and results come back in task
//! order, so output does not depend on the number of threads.

use gmface_core::Executor;
use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "GMFACE_THREADS";

pub struct PoolExecutor {
    pool: ThreadPool,
}

impl PoolExecutor {
    /// `threads = 0` lets rayon pick.
    pub fn new(threads: usize) -> Self {
        let pool = ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool construction");
        Self { pool }
    }

    /// Sized from `GMFACE_THREADS` when set to a positive integer.
    pub fn from_env() -> Self {
        let threads = std::env::var(THREADS_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .unwrap_or(0);
        Self::new(threads)
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Executor for PoolExecutor {
    fn map_tasks<T, F>(&self, tasks: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.pool
            .install(|| (0..tasks).into_par_iter().map(f).collect())
    }
}
