use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::{CrossDistance, Mapping};
use crate::rng;

/// 1-nearest-neighbour mapping: each source goes to its closest target,
/// lowest index on ties.
pub fn nn_init(cross: &CrossDistance) -> Result<Mapping> {
    if cross.rows() == 0 || cross.cols() == 0 {
        return Err(Error::EmptyTractography);
    }
    let assignment = (0..cross.rows())
        .map(|i| {
            let mut best = (0, f64::INFINITY);
            for (j, &d) in cross.row(i).iter().enumerate() {
                if d < best.1 {
                    best = (j, d);
                }
            }
            best.0
        })
        .collect();
    Mapping::new(assignment, cross.cols())
}

/// Uniformly random mapping of `n_sources` onto `n_targets`.
pub fn random_init(n_sources: usize, n_targets: usize, seed: u64) -> Result<Mapping> {
    if n_sources == 0 || n_targets == 0 {
        return Err(Error::EmptyTractography);
    }
    let mut r = rng::seeded(seed);
    let assignment: Vec<usize> = (0..n_sources)
        .map(|_| rng::index(&mut r, n_targets))
        .collect();
    Mapping::new(assignment, n_targets)
}
