//! Execution strategy for the data-parallel inner loops.
//!
//! Every parallel loop in the crate goes through [`Exec`]. With the `parallel`
//! feature disabled, [`Exec::Parallel`] quietly degrades to sequential
//! iteration, so results never depend on which build is in use.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    /// Whether this build can actually run work in parallel.
    pub fn parallel_available() -> bool {
        cfg!(feature = "parallel")
    }

    /// `(0..n).map(f).collect()`, in index order regardless of schedule.
    pub fn map_range<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => (0..n).into_par_iter().map(f).collect(),
            _ => (0..n).map(f).collect(),
        }
    }

    /// Fill `out[i] = f(i)` for every index.
    pub fn fill<T, F>(self, out: &mut [T], f: F)
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => out
                .par_iter_mut()
                .enumerate()
                .for_each(|(i, slot)| *slot = f(i)),
            _ => out.iter_mut().enumerate().for_each(|(i, slot)| *slot = f(i)),
        }
    }

    /// Map-reduce over `0..n`.
    ///
    /// The range is cut into fixed-size chunks that are folded independently
    /// and then combined left to right, so floating-point results are
    /// bit-identical for every schedule and for both strategies.
    pub fn fold_range<A, Id, Fo, Co>(self, n: usize, identity: Id, fold: Fo, combine: Co) -> A
    where
        A: Send,
        Id: Fn() -> A + Sync + Send,
        Fo: Fn(A, usize) -> A + Sync + Send,
        Co: Fn(A, A) -> A,
    {
        let chunks = n.div_ceil(REDUCE_CHUNK);
        let partials = self.map_range(chunks, |c| {
            let end = ((c + 1) * REDUCE_CHUNK).min(n);
            (c * REDUCE_CHUNK..end).fold(identity(), &fold)
        });
        partials.into_iter().fold(identity(), combine)
    }
}

const REDUCE_CHUNK: usize = 1024;

/// Run `f` inside a pool limited to `workers` threads (0 = rayon default).
pub fn with_workers<R, F>(workers: usize, f: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    #[cfg(feature = "parallel")]
    {
        if workers > 0 {
            if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
                return pool.install(f);
            }
        }
        f()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = workers;
        f()
    }
}
