//! Pluggable parallel map. The core stays single-threaded; the CLI supplies
//! a thread-pool implementation.

use alloc::vec::Vec;

/// Evaluates `f(0), ..., f(n - 1)` and returns the results in index order.
pub trait Executor: Sync {
    fn map_indexed<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map_indexed<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).map(f).collect()
    }
}

/// Collects `n` fallible results, returning the first error by index.
pub fn try_map<E, T, Er, F>(exec: &E, n: usize, f: F) -> Result<Vec<T>, Er>
where
    E: Executor + ?Sized,
    T: Send,
    Er: Send,
    F: Fn(usize) -> Result<T, Er> + Sync + Send,
{
    exec.map_indexed(n, f).into_iter().collect()
}
