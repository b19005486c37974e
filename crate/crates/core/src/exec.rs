//! Replicate fan-out.
//!
//! Work items are mapped independently and collected in index order, so the
//! caller's reduction sees the same sequence whether the items ran on one
//! thread or many. Without the `parallel` feature every mode runs sequentially.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExecMode {
    Sequential,
    #[default]
    Parallel,
}

/// Maps `f` over `0..count`, returning results ordered by index.
pub fn map_indexed<T, F>(count: usize, mode: ExecMode, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match mode {
        ExecMode::Sequential => (0..count).map(f).collect(),
        ExecMode::Parallel => parallel_map(count, f),
    }
}

/// Fallible variant of [`map_indexed`]; the lowest failing index wins.
pub fn try_map_indexed<T, E, F>(count: usize, mode: ExecMode, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync + Send,
{
    map_indexed(count, mode, f).into_iter().collect()
}

#[cfg(feature = "parallel")]
fn parallel_map<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..count).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..count).map(f).collect()
}

/// Runs `op` with at most `workers` threads available to [`ExecMode::Parallel`].
///
/// `workers == 0` means "use the default pool".
#[cfg(feature = "parallel")]
pub fn with_workers<R: Send>(workers: usize, op: impl FnOnce() -> R + Send) -> R {
    if workers == 0 {
        return op();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(op),
        Err(e) => {
            log::warn!("could not build a {workers}-thread pool ({e}); using the global pool");
            op()
        }
    }
}

#[cfg(not(feature = "parallel"))]
pub fn with_workers<R: Send>(_workers: usize, op: impl FnOnce() -> R + Send) -> R {
    op()
}

/// Threads available to parallel work.
pub fn available_workers() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree_and_keep_order() {
        let seq = map_indexed(100, ExecMode::Sequential, |i| i * i);
        let par = map_indexed(100, ExecMode::Parallel, |i| i * i);
        assert_eq!(seq, par);
        assert_eq!(seq[7], 49);
    }

    #[test]
    fn first_error_by_index() {
        let r: Result<Vec<usize>, usize> = try_map_indexed(50, ExecMode::Parallel, |i| {
            if i % 10 == 3 {
                Err(i)
            } else {
                Ok(i)
            }
        });
        assert_eq!(r, Err(3));
    }

    #[test]
    fn bounded_pool_runs() {
        let v = with_workers(2, || map_indexed(10, ExecMode::Parallel, |i| i + 1));
        assert_eq!(v.iter().sum::<usize>(), 55);
    }
}
