//! Execution strategy for chunked Monte Carlo work.
//!
//! Every parallel loop in the crate goes through [`Exec`]. Work items are
//! indexed and results are returned in index order, so the choice of
//! strategy never changes a result, only how fast it arrives.

/// How indexed work items are scheduled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Exec {
    /// Run items one after another on the calling thread.
    #[cfg_attr(not(feature = "parallel"), default)]
    Sequential,
    /// Run items on the rayon global pool.
    #[cfg(feature = "parallel")]
    #[default]
    Parallel,
}

impl Exec {
    /// Evaluates `f(0..len)` and returns the results in index order.
    pub fn map_range<T, F>(self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            Exec::Sequential => (0..len).map(f).collect(),
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                (0..len).into_par_iter().map(f).collect()
            }
        }
    }

    /// Maps over a slice, preserving order.
    pub fn map_slice<S, T, F>(self, items: &[S], f: F) -> Vec<T>
    where
        S: Sync,
        T: Send,
        F: Fn(&S) -> T + Sync + Send,
    {
        match self {
            Exec::Sequential => items.iter().map(f).collect(),
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                items.par_iter().map(f).collect()
            }
        }
    }

    /// Like [`Exec::map_range`] for fallible items; returns the first error
    /// in index order.
    pub fn try_map_range<T, E, F>(self, len: usize, f: F) -> Result<Vec<T>, E>
    where
        T: Send,
        E: Send,
        F: Fn(usize) -> Result<T, E> + Sync + Send,
    {
        self.map_range(len, f).into_iter().collect()
    }
}
