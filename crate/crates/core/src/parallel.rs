//! Thin wrappers over the data-parallel inner loops.
//!
//! With the `parallel` feature (default) these fan out over rayon's global
//! pool; without it they run as plain sequential loops. Both paths visit
//! items in index order and write results in index order, so the numerical
//! output is identical either way.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `0..n`, collecting results in index order. The fan-out only
/// happens when `worthwhile` is true; tiny tasks cost more to schedule than
/// to run.
#[allow(unused_variables)]
pub(crate) fn map_indexed_when<U, F>(worthwhile: bool, n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if worthwhile {
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    (0..n).map(f).collect()
}

/// Run `f(chunk_index, chunk)` over consecutive `size`-sized chunks of `buf`.
#[cfg(feature = "parallel")]
pub(crate) fn for_each_chunk_mut<T, F>(buf: &mut [T], size: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    buf.par_chunks_mut(size)
        .enumerate()
        .for_each(|(i, chunk)| f(i, chunk));
}

/// Run `f(chunk_index, chunk)` over consecutive `size`-sized chunks of `buf`.
#[cfg(not(feature = "parallel"))]
pub(crate) fn for_each_chunk_mut<T, F>(buf: &mut [T], size: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    buf.chunks_mut(size)
        .enumerate()
        .for_each(|(i, chunk)| f(i, chunk));
}
