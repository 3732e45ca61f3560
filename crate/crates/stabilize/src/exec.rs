use rayon::prelude::*;
use stabilize_core::Executor;

use crate::error::{Error, Result};

/// Runs tasks on a dedicated rayon pool. Results come back in index order, so
/// output does not depend on the number of threads.
#[derive(Debug)]
pub struct RayonExecutor {
    pool: rayon::ThreadPool,
}

impl RayonExecutor {
    /// Pool with `threads` workers (default: available parallelism).
    pub fn new(threads: Option<usize>) -> Result<Self> {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = threads {
            if n == 0 {
                return Err(Error::Config("--threads must be positive".into()));
            }
            b = b.num_threads(n);
        }
        Ok(Self { pool: b.build().map_err(|e| Error::Pool(e.to_string()))? })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Executor for RayonExecutor {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.pool.install(|| (0..n).into_par_iter().map(f).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordered_and_thread_independent() {
        let a = RayonExecutor::new(Some(1)).unwrap().map(1000, |i| i * i);
        let b = RayonExecutor::new(Some(3)).unwrap().map(1000, |i| i * i);
        assert_eq!(a, b);
        assert_eq!(a[999], 999 * 999);
        assert!(RayonExecutor::new(Some(0)).is_err());
    }
}
