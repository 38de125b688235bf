use fedsignal_core::eval::FoldExecutor;
use rayon::prelude::*;

use crate::error::PipelineError;

/// Runs fold and candidate jobs on a dedicated rayon pool. Results come back
/// in job order, so the thread count never changes any output.
pub struct RayonExecutor {
    pool: rayon::ThreadPool,
}

impl RayonExecutor {
    /// `None` uses every available core.
    pub fn new(threads: Option<usize>) -> Result<Self, PipelineError> {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = threads {
            if n == 0 {
                return Err(PipelineError::Config("--threads must be at least 1".into()));
            }
            b = b.num_threads(n);
        }
        b.build().map(|pool| Self { pool }).map_err(|e| PipelineError::Threads(e.to_string()))
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl FoldExecutor for RayonExecutor {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.pool.install(|| (0..n).into_par_iter().map(f).collect())
    }
}
