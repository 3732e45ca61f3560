//! Scheduling abstraction for embarrassingly parallel Monte Carlo work.
//!
//! Every task is identified by its index and derives its own random stream
//! from it, so the output of [`Executor::map`] is the same for every
//! implementation and every thread count.

use alloc::vec::Vec;

/// Maps a function over `0..n`, returning results in index order.
pub trait Executor: Sync {
    /// Evaluates `f(i)` for `i in 0..n` and returns the results in order.
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Single-threaded executor.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).map(f).collect()
    }
}

/// Evaluates fallible tasks and returns the first error in index order.
pub fn try_map<E, T, F>(exec: &E, n: usize, f: F) -> crate::Result<Vec<T>>
where
    E: Executor + ?Sized,
    T: Send,
    F: Fn(usize) -> crate::Result<T> + Sync + Send,
{
    exec.map(n, f).into_iter().collect()
}
