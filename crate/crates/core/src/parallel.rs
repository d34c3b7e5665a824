//! Index-preserving map over independent work items.
//!
//! With the `parallel` feature (default) and more than one thread the map
//! runs on a dedicated rayon pool; otherwise it is a plain sequential
//! loop. Results are always returned in input order, so output never
//! depends on the thread count.

/// Thread count requested by the caller; `1` forces the sequential path.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Parallelism(usize);

impl Parallelism {
    pub fn new(threads: usize) -> Self {
        Parallelism(threads.max(1))
    }

    pub fn sequential() -> Self {
        Parallelism(1)
    }

    pub fn threads(self) -> usize {
        self.0
    }
}

impl Default for Parallelism {
    fn default() -> Self {
        Parallelism::sequential()
    }
}

/// Whether the crate was built with rayon support.
pub const fn parallel_enabled() -> bool {
    cfg!(feature = "parallel")
}

pub fn map_ordered<T, R, F>(items: &[T], parallelism: Parallelism, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if parallelism.threads() > 1 {
            use rayon::prelude::*;
            match rayon::ThreadPoolBuilder::new()
                .num_threads(parallelism.threads())
                .build()
            {
                Ok(pool) => return pool.install(|| items.par_iter().map(&f).collect()),
                Err(e) => log::warn!("falling back to sequential evaluation: {e}"),
            }
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = parallelism;
    items.iter().map(f).collect()
}

/// Like [`map_ordered`] but stops at the first error in input order.
pub fn try_map_ordered<T, R, E, F>(items: &[T], parallelism: Parallelism, f: F) -> Result<Vec<R>, E>
where
    T: Sync,
    R: Send,
    E: Send,
    F: Fn(&T) -> Result<R, E> + Sync + Send,
{
    map_ordered(items, parallelism, f).into_iter().collect()
}
