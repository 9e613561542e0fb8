//! Row-level data parallelism with a sequential fallback.
//!
//! With the `parallel` feature off, [`Exec::Parallel`] silently runs the
//! sequential path, so callers never need their own `cfg` gates.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    /// Evaluate `f(i)` for `i in 0..n`, returning results in index order.
    pub fn map_range<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => (0..n).into_par_iter().map(f).collect(),
            _ => (0..n).map(f).collect(),
        }
    }

    /// Apply `f(row_index, row)` to each `width`-sized chunk of `data`.
    pub fn for_each_row<T, F>(self, data: &mut [T], width: usize, f: F)
    where
        T: Send,
        F: Fn(usize, &mut [T]) + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => data
                .par_chunks_mut(width)
                .enumerate()
                .for_each(|(i, row)| f(i, row)),
            _ => data
                .chunks_mut(width)
                .enumerate()
                .for_each(|(i, row)| f(i, row)),
        }
    }
}

/// Size the global pool from `POINTWAVE_THREADS`, if set. Safe to call more
/// than once; later calls are ignored.
pub fn init_thread_pool_from_env() {
    #[cfg(feature = "parallel")]
    if let Some(n) = std::env::var("POINTWAVE_THREADS")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}
