//! Data-parallel execution of independent sweep cells.
//!
//! With the `parallel` feature, [`Execution::Parallel`] maps cells on a rayon
//! pool; without it every mode runs sequentially. Results always come back
//! in input order.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Global rayon pool.
    #[default]
    Parallel,
    Threads(usize),
}

impl Execution {
    /// `--jobs N` semantics: `1` is sequential, `0` means all cores.
    pub fn from_jobs(jobs: usize) -> Self {
        match jobs {
            0 => Execution::Parallel,
            1 => Execution::Sequential,
            n => Execution::Threads(n),
        }
    }
}

/// Applies `f` to every item, returning results in item order.
pub fn map_cells<T, R, F>(items: &[T], mode: Execution, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match mode {
        Execution::Sequential => items.iter().map(f).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        #[cfg(feature = "parallel")]
        Execution::Threads(n) => {
            use rayon::prelude::*;
            match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
                Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
                Err(_) => items.iter().map(f).collect(),
            }
        }
        #[cfg(not(feature = "parallel"))]
        Execution::Parallel | Execution::Threads(_) => items.iter().map(f).collect(),
    }
}
