//! Thread budget and reduction-order policy for the data-parallel loops.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use rayon::ThreadPool;

/// Environment variable holding the thread budget (`0` means automatic).
pub const THREADS_ENV: &str = "FCS_KIT_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExecConfig {
    /// Worker threads; `0` lets rayon decide.
    pub threads: usize,
    /// Fixed-order reductions, so results are bit-identical for any
    /// thread budget.
    pub deterministic: bool,
}

impl Default for ExecConfig {
    fn default() -> Self {
        ExecConfig { threads: 1, deterministic: true }
    }
}

impl ExecConfig {
    pub fn from_env(deterministic: bool) -> Self {
        let threads = std::env::var(THREADS_ENV)
            .ok()
            .and_then(|s| s.trim().parse().ok())
            .unwrap_or(0);
        ExecConfig { threads, deterministic }
    }

    /// Sums `term(i)` for `i in 0..len`.
    ///
    /// In deterministic mode the partial results are collected in index order
    /// and added sequentially; otherwise rayon's tree reduction is used.
    pub fn sum<T, F>(&self, len: usize, term: F) -> T
    where
        T: Send + Copy + std::iter::Sum<T> + std::ops::Add<Output = T> + Default,
        F: Fn(usize) -> T + Sync + Send,
    {
        if self.threads == 1 {
            return (0..len).map(&term).fold(T::default(), |acc, x| acc + x);
        }
        let run = || {
            if self.deterministic {
                let parts: Vec<T> = (0..len).into_par_iter().map(&term).collect();
                parts.into_iter().fold(T::default(), |acc, x| acc + x)
            } else {
                (0..len).into_par_iter().map(&term).sum()
            }
        };
        self.install(run)
    }

    /// Maps `f` over `0..len`, preserving order.
    pub fn map<T, F>(&self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        if self.threads == 1 {
            return (0..len).map(f).collect();
        }
        let run = || (0..len).into_par_iter().map(&f).collect();
        self.install(run)
    }

    /// Runs `op` on the global pool (`threads == 0`) or on a cached pool of
    /// the requested size.
    fn install<R: Send>(&self, op: impl FnOnce() -> R + Send) -> R {
        if self.threads == 0 {
            return op();
        }
        static POOLS: OnceLock<Mutex<HashMap<usize, Arc<ThreadPool>>>> = OnceLock::new();
        let pool = {
            let mut pools = POOLS.get_or_init(Default::default).lock().unwrap_or_else(|e| e.into_inner());
            match pools.get(&self.threads) {
                Some(p) => Some(Arc::clone(p)),
                None => match rayon::ThreadPoolBuilder::new().num_threads(self.threads).build() {
                    Ok(p) => {
                        let p = Arc::new(p);
                        pools.insert(self.threads, Arc::clone(&p));
                        Some(p)
                    }
                    Err(_) => None,
                },
            }
        };
        match pool {
            Some(p) => p.install(op),
            None => op(),
        }
    }
}
