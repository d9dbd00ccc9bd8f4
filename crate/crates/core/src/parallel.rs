//! Order-preserving parallel map with a configurable worker count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Runs closures over slices, on a dedicated rayon pool when a worker count
/// is given and the `parallel` feature is enabled, sequentially otherwise.
pub struct Executor {
    #[cfg(feature = "parallel")]
    pool: Option<rayon::ThreadPool>,
}

impl Executor {
    /// `None` uses the global pool; `Some(1)` runs sequentially.
    pub fn new(workers: Option<usize>) -> Self {
        #[cfg(feature = "parallel")]
        {
            let pool = workers.map(|w| {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(w.max(1))
                    .build()
                    .expect("thread pool")
            });
            Self { pool }
        }
        #[cfg(not(feature = "parallel"))]
        {
            let _ = workers;
            Self {}
        }
    }

    /// Maps `f` over `items`, keeping input order.
    pub fn map<T, U, F>(&self, items: &[T], f: F) -> Vec<U>
    where
        T: Sync,
        U: Send,
        F: Fn(&T) -> U + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        {
            match &self.pool {
                Some(pool) => pool.install(|| items.par_iter().map(&f).collect()),
                None => items.par_iter().map(&f).collect(),
            }
        }
        #[cfg(not(feature = "parallel"))]
        {
            items.iter().map(f).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let items: Vec<u64> = (0..1000).collect();
        for w in [None, Some(1), Some(3)] {
            let out = Executor::new(w).map(&items, |x| x * x);
            assert_eq!(out, items.iter().map(|x| x * x).collect::<Vec<_>>());
        }
    }
}
