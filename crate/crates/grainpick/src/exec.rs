//! Execution helpers: data-parallel maps with a sequential fallback.
//!
//! Every sweep in the crate (seed sweeps, study cells, cross-validation
//! grids) funnels through [`map_ordered`], which runs on rayon when the
//! `parallel` feature is enabled and degrades to a plain iterator otherwise.
//! Results are collected in input order, so parallel and sequential runs
//! produce bit-identical output.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `items`, preserving input order in the output.
#[cfg(feature = "parallel")]
pub fn map_ordered<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    items.into_par_iter().map(f).collect()
}

/// Map `f` over `items`, preserving input order in the output.
#[cfg(not(feature = "parallel"))]
pub fn map_ordered<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    items.into_iter().map(f).collect()
}

/// Sequential map with the same signature as [`map_ordered`].
///
/// Kept unconditionally so benchmarks can compare both paths in one build.
pub fn map_ordered_seq<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    items.into_iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_matches_sequential_order() {
        let items: Vec<u64> = (0..1000).collect();
        let par = map_ordered(items.clone(), |x| x * x + 1);
        let seq = map_ordered_seq(items, |x| x * x + 1);
        assert_eq!(par, seq);
    }
}
