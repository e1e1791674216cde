//! Execution strategy for the data-parallel loops.
//!
//! With the `parallel` feature (on by default) the independent work items
//! (parameters, leave-one-out blocks, random trials) are spread over the
//! rayon pool. Without it everything runs on the calling thread. Results are
//! always collected in index order and every reduction runs sequentially
//! afterwards, so output is bit-identical under either strategy.

use std::cell::Cell;

thread_local! {
    static FORCE_SEQUENTIAL: Cell<bool> = const { Cell::new(false) };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Falls back to sequential when built without the `parallel` feature.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") && !FORCE_SEQUENTIAL.with(Cell::get) {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    /// Runs `f` with this strategy as the default for every nested library
    /// call made on the current thread.
    pub fn scope<R>(self, f: impl FnOnce() -> R) -> R {
        if self.is_parallel() {
            return f();
        }
        let prev = FORCE_SEQUENTIAL.with(|c| c.replace(true));
        let out = f();
        FORCE_SEQUENTIAL.with(|c| c.set(prev));
        out
    }

    /// `(0..n).map(f).collect()`, possibly in parallel, preserving order.
    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() && n > 1 {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }

    /// Like [`Execution::map`] for fallible work; the first error in index
    /// order wins.
    pub fn try_map<T, E, F>(self, n: usize, f: F) -> Result<Vec<T>, E>
    where
        T: Send,
        E: Send,
        F: Fn(usize) -> Result<T, E> + Sync + Send,
    {
        self.map(n, f).into_iter().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_order_under_both_strategies() {
        let seq = Execution::Sequential.map(1000, |i| i * i);
        let par = Execution::Parallel.map(1000, |i| i * i);
        assert_eq!(seq, par);
        assert_eq!(seq[31], 961);
    }

    #[test]
    fn sequential_scope_overrides_default() {
        Execution::Sequential.scope(|| assert_eq!(Execution::default(), Execution::Sequential));
        if cfg!(feature = "parallel") {
            assert_eq!(Execution::default(), Execution::Parallel);
        }
    }

    #[test]
    fn try_map_reports_first_error() {
        let r: Result<Vec<usize>, usize> =
            Execution::Parallel.try_map(100, |i| if i % 7 == 3 { Err(i) } else { Ok(i) });
        assert_eq!(r, Err(3));
    }
}
