//! Deterministic chunked reduction.
//!
//! Every averaged quantity in this crate is accumulated the same way: the
//! index range is cut into fixed chunks of [`CHUNK_LEN`] terms, each chunk is
//! summed sequentially, and the ordered chunk sums are combined by pairwise
//! (binary-tree) addition. Workers are assigned whole *runs* of consecutive
//! chunks, so the floating-point result is byte-identical for every worker
//! count: parallelism only changes who computes a chunk, never how sums
//! associate.

use num::complex::Complex64;
use num::Zero;
use std::ops::Range;

/// Terms per chunk. Fixed; part of the numeric contract.
pub const CHUNK_LEN: usize = 1024;

/// Number of chunks covering `total` items.
pub fn chunk_count(total: u64) -> usize {
    total.div_ceil(CHUNK_LEN as u64) as usize
}

/// The sub-range of `0..total` covered by chunk `idx`.
pub fn chunk_span(idx: usize, total: u64) -> Range<u64> {
    let start = idx as u64 * CHUNK_LEN as u64;
    start..total.min(start + CHUNK_LEN as u64)
}

/// Pairwise (binary-tree) sum; splits at the midpoint all the way down.
pub fn pairwise_sum_complex(xs: &[Complex64]) -> Complex64 {
    match xs.len() {
        0 => Complex64::zero(),
        1 => xs[0],
        n => {
            let (a, b) = xs.split_at(n / 2);
            pairwise_sum_complex(a) + pairwise_sum_complex(b)
        }
    }
}

pub fn pairwise_sum_f64(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n => {
            let (a, b) = xs.split_at(n / 2);
            pairwise_sum_f64(a) + pairwise_sum_f64(b)
        }
    }
}

/// Cuts `0..num_chunks` into at most `workers` contiguous runs of nearly
/// equal length, in order.
pub fn split_runs(num_chunks: usize, workers: usize) -> Vec<Range<usize>> {
    let workers = workers.max(1).min(num_chunks.max(1));
    let base = num_chunks / workers;
    let extra = num_chunks % workers;
    let mut runs = Vec::with_capacity(workers);
    let mut start = 0;
    for w in 0..workers {
        let len = base + usize::from(w < extra);
        if len == 0 {
            continue;
        }
        runs.push(start..start + len);
        start += len;
    }
    runs
}

/// Evaluates `f` on each run of chunks (in parallel when `workers > 1`) and
/// concatenates the per-chunk outputs in chunk order. `f` receives a range of
/// chunk indices and returns one output per chunk.
pub fn run_chunked<T, E, F>(num_chunks: usize, workers: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(Range<usize>) -> Result<Vec<T>, E> + Sync,
{
    if workers <= 1 || num_chunks <= 1 {
        return f(0..num_chunks);
    }
    let runs = split_runs(num_chunks, workers);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(runs.len())
        .build()
        .expect("worker pool");
    let per_run: Result<Vec<Vec<T>>, E> = pool.install(|| {
        use rayon::prelude::*;
        runs.into_par_iter().map(&f).collect()
    });
    Ok(per_run?.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn chunk_geometry() {
        assert_eq!(chunk_count(0), 0);
        assert_eq!(chunk_count(1), 1);
        assert_eq!(chunk_count(1024), 1);
        assert_eq!(chunk_count(1025), 2);
        assert_eq!(chunk_span(0, 2500), 0..1024);
        assert_eq!(chunk_span(2, 2500), 2048..2500);
    }

    #[test]
    fn split_runs_covers_in_order() {
        for (chunks, workers) in [(10, 3), (3, 10), (7, 1), (1, 1), (64, 8)] {
            let runs = split_runs(chunks, workers);
            assert!(runs.len() <= workers);
            let mut next = 0;
            for r in &runs {
                assert_eq!(r.start, next);
                assert!(r.end > r.start);
                next = r.end;
            }
            assert_eq!(next, chunks);
        }
        assert!(split_runs(0, 4).is_empty());
    }

    #[test]
    fn pairwise_matches_exact_on_integers() {
        // Integer-valued terms make float association irrelevant; the tree
        // sum must agree exactly with the sequential one.
        let xs: Vec<f64> = (1..=1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum_f64(&xs), 500500.0);
        let cs: Vec<Complex64> = (1..=777).map(|i| Complex64::new(i as f64, -(i as f64))).collect();
        let s = pairwise_sum_complex(&cs);
        assert_eq!(s, Complex64::new(302253.0, -302253.0));
    }

    #[test]
    fn worker_count_does_not_change_bytes() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let data: Vec<f64> = (0..10_000).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let total = data.len() as u64;
        let sum_with = |workers: usize| -> f64 {
            let chunks = run_chunked::<f64, std::convert::Infallible, _>(
                chunk_count(total),
                workers,
                |range| {
                    Ok(range
                        .map(|c| chunk_span(c, total).map(|i| data[i as usize]).sum())
                        .collect())
                },
            )
            .unwrap();
            pairwise_sum_f64(&chunks)
        };
        let baseline = sum_with(1);
        for workers in [2, 3, 4, 7, 16] {
            assert_eq!(sum_with(workers).to_bits(), baseline.to_bits(), "workers={workers}");
        }
    }

    #[test]
    fn run_chunked_propagates_errors() {
        let res = run_chunked::<f64, String, _>(8, 4, |range| {
            if range.contains(&5) {
                Err("chunk 5 failed".to_string())
            } else {
                Ok(vec![0.0; range.len()])
            }
        });
        assert_eq!(res, Err("chunk 5 failed".to_string()));
    }
}
