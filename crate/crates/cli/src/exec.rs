use rayon::prelude::*;
use strip_spectra_core::exec::Executor;

/// Runs independent jobs on the rayon pool; results keep index order.
#[derive(Debug, Clone, Copy, Default)]
pub struct Rayon;

impl Executor for Rayon {
    fn map_indexed<T: Send, F: Fn(usize) -> T + Sync + Send>(&self, n: usize, f: F) -> Vec<T> {
        (0..n).into_par_iter().map(f).collect()
    }
}
