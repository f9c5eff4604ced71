//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature, [`ExecMode::Parallel`] runs on the rayon
//! global pool; without it, both modes execute sequentially. Results are
//! always returned in input order, so the two modes are interchangeable.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExecMode {
    Sequential,
    Parallel,
}

impl Default for ExecMode {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            ExecMode::Parallel
        } else {
            ExecMode::Sequential
        }
    }
}

/// `items.iter().map(f).collect()`, possibly in parallel.
pub fn map<T, U, F>(mode: ExecMode, items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    match mode {
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => items.par_iter().map(f).collect(),
        _ => items.iter().map(f).collect(),
    }
}

/// Concatenation of `f(i)` over `lo..=hi`, in order.
pub fn flat_map_range<U, F>(mode: ExecMode, lo: i64, hi: i64, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(i64) -> Vec<U> + Sync + Send,
{
    if lo > hi {
        return Vec::new();
    }
    match mode {
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => (lo..=hi).into_par_iter().flat_map_iter(f).collect(),
        _ => (lo..=hi).flat_map(f).collect(),
    }
}
