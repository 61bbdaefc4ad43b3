//! Ordered parallel map over indices.

/// Computes `f(i)` for `i in 0..n`, using up to `threads` workers (0 means
/// one per core), and returns the results in index order.
#[cfg(feature = "parallel")]
pub(crate) fn map_indexed<T: Send>(
    n: usize,
    threads: usize,
    f: impl Fn(usize) -> T + Sync,
) -> Vec<T> {
    use rayon::prelude::*;
    let cores = std::thread::available_parallelism().map_or(1, |c| c.get());
    let threads = if threads == 0 {
        cores
    } else {
        threads.min(cores)
    };
    let work = || (0..n).into_par_iter().map(&f).collect();
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(work),
        Err(_) => work(),
    }
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_indexed<T: Send>(
    n: usize,
    _threads: usize,
    f: impl Fn(usize) -> T + Sync,
) -> Vec<T> {
    (0..n).map(f).collect()
}
