//! Execution strategy for the data-parallel loops.
//!
//! Every parallel loop in the crate goes through [`Execution`], so the
//! sequential and parallel paths share one code path per operation and can be
//! benchmarked against each other. Without the `parallel` feature,
//! [`Execution::Parallel`] silently runs sequentially.
//!
//! Results are always collected in input order, so both strategies produce
//! bit-identical output.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Indices scanned sequentially per rayon task in [`Execution::find_first`].
#[cfg(feature = "parallel")]
const MIN_CHUNK: u64 = 1 << 12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// `true` if this strategy will actually fan out across threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    /// Order-preserving map over a slice.
    pub fn map<T, U, F>(self, items: &[T], f: F) -> Vec<U>
    where
        T: Sync,
        U: Send,
        F: Fn(&T) -> U + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }

    /// Order-preserving map over `0..n`.
    pub fn map_range<U, F>(self, n: u64, f: F) -> Vec<U>
    where
        U: Send,
        F: Fn(u64) -> U + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }

    /// Smallest index in `0..n` satisfying `pred`, independent of how the
    /// range is partitioned.
    pub fn find_first<F>(self, n: u64, pred: F) -> Option<u64>
    where
        F: Fn(u64) -> bool + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return (0..n.div_ceil(MIN_CHUNK))
                .into_par_iter()
                .find_map_first(|c| (c * MIN_CHUNK..n.min((c + 1) * MIN_CHUNK)).find(|&i| pred(i)));
        }
        (0..n).find(|&i| pred(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategies_agree() {
        let xs: Vec<u64> = (0..1000).collect();
        let a = Execution::Sequential.map(&xs, |x| x * x);
        let b = Execution::Parallel.map(&xs, |x| x * x);
        assert_eq!(a, b);
        let pred = |i: u64| i % 97 == 96 && i > 300;
        assert_eq!(
            Execution::Sequential.find_first(10_000, pred),
            Execution::Parallel.find_first(10_000, pred)
        );
        assert_eq!(Execution::Parallel.find_first(10, |_| false), None);
    }
}
