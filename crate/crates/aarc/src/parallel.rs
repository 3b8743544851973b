//! Deterministic chunked map/reduce helpers.
//!
//! All data-parallel reductions in this crate go through [`map_chunks`]: the
//! index range is split into fixed-size chunks, a partial result is computed
//! per chunk, and the caller folds the partials **in chunk order**. Chunk
//! boundaries depend only on the data size, never on the thread count, so the
//! `parallel` and sequential builds perform identical floating-point
//! operations in identical order and agree bit-for-bit.

use std::ops::Range;

/// Rows per reduction chunk. Large enough to amortize scheduling, small
/// enough to parallelize the mid-sized benchmark datasets.
pub const CHUNK_SIZE: usize = 2048;

fn chunk_ranges(n: usize) -> Vec<Range<usize>> {
    if n == 0 {
        return Vec::new();
    }
    (0..n)
        .step_by(CHUNK_SIZE)
        .map(|start| start..(start + CHUNK_SIZE).min(n))
        .collect()
}

/// Applies `f` to each chunk of `0..n` and returns the partials in chunk order.
#[cfg(feature = "parallel")]
pub fn map_chunks<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(Range<usize>) -> T + Sync + Send,
{
    use rayon::prelude::*;
    chunk_ranges(n).into_par_iter().map(f).collect()
}

/// Applies `f` to each chunk of `0..n` and returns the partials in chunk order.
#[cfg(not(feature = "parallel"))]
pub fn map_chunks<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(Range<usize>) -> T + Sync + Send,
{
    chunk_ranges(n).into_iter().map(f).collect()
}

/// Computes `f(i)` for every `i` in `0..n`, preserving index order in the output.
///
/// Used for embarrassingly parallel per-index work such as finite-difference
/// Hessian columns; each output slot is written by exactly one index, so the
/// result is deterministic regardless of scheduling.
#[cfg(feature = "parallel")]
pub fn map_indices<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

/// Computes `f(i)` for every `i` in `0..n`, preserving index order in the output.
#[cfg(not(feature = "parallel"))]
pub fn map_indices<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}
