//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) the batch operations run on rayon; without it,
//! or with [`Execution::Sequential`], they run on the calling thread. Results are always
//! returned in input order, so both paths produce identical output.

/// Environment variable that caps the worker count of the global pool.
pub const THREADS_ENV: &str = "VARSTAB_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    /// Whether work will actually be spread over threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Maps `f` over `items`, preserving order.
pub fn map<T, R, F>(exec: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// Maps `f` over `0..n`, preserving order.
pub fn map_range<R, F>(exec: Execution, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Reads the thread cap from `VARSTAB_THREADS`; `None` when unset or unparsable.
pub fn thread_cap_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse::<usize>().ok().filter(|n| *n > 0)
}

/// Configures the global pool once. An explicit count wins over the environment.
/// Returns the effective worker count (1 without the `parallel` feature).
pub fn init_threads(explicit: Option<usize>) -> usize {
    let requested = explicit.or_else(thread_cap_from_env);
    #[cfg(feature = "parallel")]
    {
        if let Some(n) = requested {
            // a second initialisation is harmless; the first one wins
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = requested;
        1
    }
}
