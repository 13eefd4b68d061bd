//! Data-parallel helpers with a sequential fallback.
//!
//! Every helper here is bit-deterministic regardless of thread count: maps
//! write independent output slots, and reductions always combine fixed-size
//! chunks in chunk order. Building without the `parallel` feature swaps in
//! plain iterators that visit the same chunks in the same order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Chunk width for order-fixed reductions. Constant so results do not depend
/// on the number of worker threads.
pub(crate) const REDUCE_CHUNK: usize = 64;

/// Maps `f` over `0..n`, preserving index order in the output.
#[cfg(feature = "parallel")]
pub(crate) fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    (0..n).map(f).collect()
}

/// Splits `0..n` into `REDUCE_CHUNK`-sized ranges, maps each to a partial
/// value, and returns the partials in chunk order for a sequential combine.
pub(crate) fn chunk_partials<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(std::ops::Range<usize>) -> T + Sync,
{
    let bounds: Vec<std::ops::Range<usize>> = (0..n)
        .step_by(REDUCE_CHUNK)
        .map(|start| start..(start + REDUCE_CHUNK).min(n))
        .collect();
    #[cfg(feature = "parallel")]
    {
        bounds.into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        bounds.into_iter().map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_indexed_preserves_order() {
        let v = map_indexed(100, |i| i * 2);
        assert_eq!(v[0], 0);
        assert_eq!(v[99], 198);
        assert!(v.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn chunk_partials_cover_range_in_order() {
        let parts = chunk_partials(150, |r| (r.start, r.end));
        assert_eq!(parts, vec![(0, 64), (64, 128), (128, 150)]);
    }
}
