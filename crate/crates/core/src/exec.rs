//! Sequential or data-parallel evaluation of independent work items.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Exec {
    Sequential,
    /// Uses rayon when the `parallel` feature is on, otherwise runs sequentially.
    #[default]
    Parallel,
}

impl Exec {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }

    /// `(0..n).map(f)` collected in index order.
    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Exec::Parallel {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }

    /// Folds chunks of `0..n` independently and merges the partial results.
    pub fn fold<T, F, M, I>(self, n: usize, init: I, f: F, merge: M) -> T
    where
        T: Send,
        I: Fn() -> T + Sync + Send,
        F: Fn(&mut T, usize) + Sync + Send,
        M: Fn(T, T) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Exec::Parallel {
            use rayon::prelude::*;
            return (0..n)
                .into_par_iter()
                .fold(&init, |mut acc, i| {
                    f(&mut acc, i);
                    acc
                })
                .reduce(&init, &merge);
        }
        #[cfg(not(feature = "parallel"))]
        let _ = &merge;
        let mut acc = init();
        for i in 0..n {
            f(&mut acc, i);
        }
        acc
    }
}

/// Picks the mode for a worker count and sizes the global pool; `1` is sequential.
pub fn configure_workers(workers: Option<usize>) -> Exec {
    match workers {
        Some(1) => Exec::Sequential,
        Some(n) => {
            #[cfg(feature = "parallel")]
            {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            let _ = n;
            Exec::Parallel
        }
        None => Exec::Parallel,
    }
}
