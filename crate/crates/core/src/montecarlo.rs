//! Seeded Monte-Carlo execution.
//!
//! Every replication receives its own generator derived from `(seed, index)`,
//! so results are identical whether replications run on the rayon pool or on
//! the calling thread.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// How a batch of independent replications is executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        #[cfg(feature = "parallel")]
        return Execution::Parallel;
        #[cfg(not(feature = "parallel"))]
        return Execution::Sequential;
    }
}

/// Generator for a top-level seed.
pub fn rng(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for replication `index` under `seed`. Streams for distinct
/// indices do not overlap.
pub fn stream(seed: u64, index: u64) -> SimRng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(index);
    r
}

/// Maps `f` over `0..reps`, collecting results in index order.
pub fn map_reps<T, F>(reps: usize, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        Execution::Sequential => (0..reps).map(f).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..reps).into_par_iter().map(f).collect()
        }
    }
}

/// Maps `f` over a slice of items, collecting results in order.
pub fn map_items<I, T, F>(items: &[I], exec: Execution, f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
{
    match exec {
        Execution::Sequential => items.iter().map(f).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
    }
}

/// Fraction of `0..reps` for which `pred` holds.
pub fn rate<F>(reps: usize, exec: Execution, pred: F) -> f64
where
    F: Fn(usize) -> bool + Sync + Send,
{
    let hits = map_reps(reps, exec, pred).into_iter().filter(|&b| b).count();
    hits as f64 / reps as f64
}

/// Median of a non-empty slice (NaNs sort last).
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
