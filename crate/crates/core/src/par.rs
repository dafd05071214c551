//! Index-parallel helpers.
//!
//! With the `parallel` feature these fan out over rayon's pool; without it
//! they run the same closures in order. Results are collected by index, so
//! both builds produce identical output.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Evaluates `f(0), f(1), …, f(n - 1)` and collects the results in order.
#[cfg(feature = "parallel")]
pub fn map_indices<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indices<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Like [`map_indices`] but flattens the per-index vectors.
pub fn flat_map_indices<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> Vec<T> + Sync + Send,
{
    map_indices(n, f).into_iter().flatten().collect()
}

/// Whether the crate was built with the rayon backend.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
