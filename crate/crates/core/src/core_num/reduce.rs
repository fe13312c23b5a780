use rayon::prelude::*;
use std::ops::Range;

/// Paths per work unit. Fixed, so the reduction tree does not depend on the
/// number of workers.
pub const BLOCK: u64 = 4096;

/// Runs `f` over consecutive blocks of `0..n` (possibly in parallel) and
/// returns the per-block results in block order.
pub fn block_reduce<R, F>(n: u64, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(Range<u64>) -> R + Sync,
{
    let blocks = n.div_ceil(BLOCK);
    (0..blocks)
        .into_par_iter()
        .map(|b| f(b * BLOCK..((b + 1) * BLOCK).min(n)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core_num::RngStream;

    fn run(threads: usize) -> f64 {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            block_reduce(50_000, |r| r.map(|i| RngStream::new(3, i).normal()).sum::<f64>())
                .into_iter()
                .sum()
        })
    }

    #[test]
    fn worker_count_does_not_change_bits() {
        let a = run(1);
        assert_eq!(a.to_bits(), run(3).to_bits());
        assert_eq!(a.to_bits(), run(8).to_bits());
    }

    #[test]
    fn covers_every_index_once() {
        let parts = block_reduce(10_001, |r| r.collect::<Vec<_>>());
        let flat: Vec<u64> = parts.into_iter().flatten().collect();
        assert_eq!(flat, (0..10_001).collect::<Vec<_>>());
    }
}
