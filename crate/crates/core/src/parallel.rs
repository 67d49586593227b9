//! Replica-level parallelism.
//!
//! With the `parallel` feature (default) replicas run on a rayon pool;
//! without it every map is sequential. Results always come back in index
//! order, so downstream aggregation is identical either way.

/// How to execute a batch of independent replicas.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// `threads == 0` lets rayon pick.
    Parallel { threads: usize },
}

impl Execution {
    /// `None` means one thread per available processor; `Some(1)` is
    /// sequential.
    pub fn from_parallelism(parallelism: Option<usize>) -> Self {
        match parallelism {
            Some(0) | Some(1) => Execution::Sequential,
            Some(threads) => Execution::Parallel { threads },
            None => Execution::Parallel {
                threads: std::thread::available_parallelism().map_or(1, |n| n.get()),
            },
        }
    }
}

pub fn is_parallel_available() -> bool {
    cfg!(feature = "parallel")
}

/// Maps `f` over `0..count`, returning results in index order.
pub fn map_indexed<T, F>(count: u64, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    match exec {
        Execution::Sequential => (0..count).map(f).collect(),
        Execution::Parallel { threads } => par_map_indexed(count, threads, f),
    }
}

#[cfg(feature = "parallel")]
fn par_map_indexed<T, F>(count: u64, threads: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    use rayon::prelude::*;
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(|| (0..count).into_par_iter().map(&f).collect()),
        Err(_) => (0..count).map(f).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
fn par_map_indexed<T, F>(count: u64, _threads: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    (0..count).map(f).collect()
}
