//! Multi-threaded distance matrices.
//!
//! Every entry is computed by the same function on the same argument order
//! as in the sequential builders of `tractmap_core::graph`, so results are
//! bit-identical whatever the thread count.

use std::num::NonZeroUsize;
use std::thread;

use tractmap_core::geometry::mam_distance;
use tractmap_core::{CrossDistance, DistanceMatrix, Streamline, Tractography};

use crate::error::Result;

pub fn available_threads() -> usize {
    thread::available_parallelism().map_or(1, NonZeroUsize::get)
}

/// Computes `rows` rows of length `cols` where row `i` covers columns
/// `first_col(i)..cols`. Rows are dealt round-robin to the workers.
fn rows_parallel(
    rows: usize,
    cols: usize,
    threads: usize,
    first_col: impl Fn(usize) -> usize + Sync,
    entry: impl Fn(usize, usize) -> f64 + Sync,
) -> Vec<f64> {
    let threads = threads.clamp(1, rows.max(1));
    let mut values = vec![0.0; rows * cols];
    if threads == 1 {
        for i in 0..rows {
            for j in first_col(i)..cols {
                values[i * cols + j] = entry(i, j);
            }
        }
        return values;
    }
    let parts: Vec<Vec<(usize, Vec<f64>)>> = thread::scope(|scope| {
        let handles: Vec<_> = (0..threads)
            .map(|w| {
                let (first_col, entry) = (&first_col, &entry);
                scope.spawn(move || {
                    (w..rows)
                        .step_by(threads)
                        .map(|i| (i, (first_col(i)..cols).map(|j| entry(i, j)).collect()))
                        .collect()
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("distance worker panicked"))
            .collect()
    });
    for (i, row) in parts.into_iter().flatten() {
        let start = i * cols + first_col(i);
        values[start..start + row.len()].copy_from_slice(&row);
    }
    values
}

fn mam(a: &Streamline, b: &Streamline) -> f64 {
    mam_distance(a, b).expect("streamlines are non-empty")
}

/// Pairwise MAM matrix of `t` using up to `threads` workers.
pub fn distance_matrix(t: &Tractography, threads: usize) -> Result<DistanceMatrix> {
    let s = t.streamlines();
    let n = s.len();
    let mut values = rows_parallel(n, n, threads, |i| i + 1, |i, j| mam(&s[i], &s[j]));
    for i in 0..n {
        for j in i + 1..n {
            values[j * n + i] = values[i * n + j];
        }
    }
    Ok(DistanceMatrix::from_row_major(n, values)?)
}

/// MAM distances from every `source` streamline to every `target` one.
pub fn cross_distance(
    source: &Tractography,
    target: &Tractography,
    threads: usize,
) -> Result<CrossDistance> {
    let (a, b) = (source.streamlines(), target.streamlines());
    let values = rows_parallel(a.len(), b.len(), threads, |_| 0, |i, j| mam(&a[i], &b[j]));
    Ok(CrossDistance::from_row_major(a.len(), b.len(), values)?)
}
