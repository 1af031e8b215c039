//! Parallel map/reduce helpers with a sequential fallback.
//!
//! Reductions are chunked in a fixed index order, so sums are bit-identical
//! for any thread count and with the `parallel` feature disabled.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Chunk length for deterministic floating-point reductions.
const REDUCE_CHUNK: usize = 1024;

/// Maps `f` over `0..len`, collecting results in index order.
#[cfg(feature = "parallel")]
pub fn map_indexed<T: Send, F: Fn(usize) -> T + Sync + Send>(len: usize, f: F) -> Vec<T> {
    (0..len).into_par_iter().map(f).collect()
}

/// Maps `f` over `0..len`, collecting results in index order.
#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T: Send, F: Fn(usize) -> T + Sync + Send>(len: usize, f: F) -> Vec<T> {
    (0..len).map(f).collect()
}

/// Sequential twin of [`map_indexed`]; the bench suite compares the two.
pub fn map_indexed_seq<T, F: Fn(usize) -> T>(len: usize, f: F) -> Vec<T> {
    (0..len).map(f).collect()
}

/// Applies `f` to every slot of `items`; each slot is visited exactly once,
/// so the mutation order per slot is scheduling-independent.
#[cfg(feature = "parallel")]
pub fn for_each_indexed_mut<T: Send, F: Fn(usize, &mut T) + Sync>(items: &mut [T], f: F) {
    items.par_iter_mut().enumerate().for_each(|(i, t)| f(i, t));
}

/// Applies `f` to every slot of `items`.
#[cfg(not(feature = "parallel"))]
pub fn for_each_indexed_mut<T: Send, F: Fn(usize, &mut T) + Sync>(items: &mut [T], f: F) {
    for (i, t) in items.iter_mut().enumerate() {
        f(i, t);
    }
}

/// Deterministic sum of `f(i)` for `i` in `0..len`.
///
/// Partial sums are taken per fixed-size chunk in index order and then added
/// sequentially, so the reduction order never depends on scheduling.
pub fn sum_indexed<F: Fn(usize) -> f64 + Sync>(len: usize, f: F) -> f64 {
    let chunks = len.div_ceil(REDUCE_CHUNK);
    let partials = map_indexed(chunks, |c| {
        let lo = c * REDUCE_CHUNK;
        let hi = (lo + REDUCE_CHUNK).min(len);
        let mut acc = 0.0;
        for i in lo..hi {
            acc += f(i);
        }
        acc
    });
    partials.iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunked_sum_matches_sequential() {
        let f = |i: usize| (i as f64).sin() / (i as f64 + 1.0);
        let par = sum_indexed(50_000, f);
        let mut seq = 0.0;
        // identical chunking by hand
        for c in 0..50_000usize.div_ceil(1024) {
            let mut acc = 0.0;
            for i in c * 1024..((c + 1) * 1024).min(50_000) {
                acc += f(i);
            }
            seq += acc;
        }
        assert_eq!(par, seq);
    }

    #[test]
    fn map_preserves_order() {
        let v = map_indexed(1000, |i| i * i);
        assert!(v.iter().enumerate().all(|(i, &x)| x == i * i));
    }
}
