//! Order-preserving data-parallel map with a sequential fallback.
//!
//! Batch drivers (multistarts, parameter sweeps, batched checks) route their
//! independent work items through [`maybe_par_map`]. With the `parallel`
//! feature the items are distributed over the rayon pool; without it they run
//! in order on the calling thread. Results are returned in input order either
//! way, and each item is computed by a pure closure, so the output is
//! identical under both backends.

#[cfg(feature = "parallel")]
pub fn maybe_par_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    items.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn maybe_par_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    items.into_iter().map(f).collect()
}
