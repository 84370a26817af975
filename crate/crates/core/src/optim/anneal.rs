use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{
    check_source, remap_delta_unchecked, squared_loss, squared_loss_unchecked, DistanceMatrix,
    Mapping,
};
use crate::rng;

/// Best re-mapping of source `i`: the target with the most negative
/// squared-loss delta, lowest index on ties. Returns `(q(i), 0.0)` when no
/// target improves the loss.
pub fn greedy_remap(
    a: &DistanceMatrix,
    b: &DistanceMatrix,
    q: &Mapping,
    i: usize,
) -> Result<(usize, f64)> {
    check_source(a, b, q, i)?;
    Ok(greedy_unchecked(a, b, q, i))
}

fn greedy_unchecked(a: &DistanceMatrix, b: &DistanceMatrix, q: &Mapping, i: usize) -> (usize, f64) {
    let mut best = (q.target(i), 0.0);
    for j in 0..b.n() {
        let delta = remap_delta_unchecked(a, b, q, i, j);
        if delta < best.1 {
            best = (j, delta);
        }
    }
    best
}

/// Annealing parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnealSchedule {
    /// Number of transition proposals.
    pub iterations: usize,
    /// Starting temperature on the squared-loss scale. `None` uses the
    /// initial squared loss divided by the number of sources.
    pub initial_temperature: Option<f64>,
    /// Geometric cooling factor applied after every iteration, in (0, 1).
    pub cooling: f64,
    pub seed: u64,
    /// Never accept a move that increases the loss.
    pub greedy_only: bool,
    /// Iterations at which the best-so-far mapping is snapshotted.
    pub checkpoints: Vec<usize>,
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        AnnealSchedule {
            iterations: 1000,
            initial_temperature: None,
            cooling: 0.995,
            seed: 42,
            greedy_only: false,
            checkpoints: Vec::new(),
        }
    }
}

impl AnnealSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.cooling > 0.0 && self.cooling < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "cooling must be in (0, 1), got {}",
                self.cooling
            )));
        }
        if let Some(t) = self.initial_temperature {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "initial temperature must be > 0, got {t}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub iteration: usize,
    /// Loss of the current mapping after this iteration.
    pub loss: f64,
    pub normalized_loss: f64,
    /// Lowest loss seen up to and including this iteration.
    pub best_loss: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnealTrace {
    /// `iterations + 1` records; record 0 is the initial state.
    pub records: Vec<TraceRecord>,
    /// Best mapping found.
    pub final_mapping: Mapping,
    /// Loss of `final_mapping`, recomputed from scratch.
    pub final_loss: f64,
    /// Temperature the run started from (0 when no uphill moves are possible).
    pub initial_temperature: f64,
    /// Best-so-far mapping at each requested checkpoint within range.
    pub snapshots: Vec<(usize, Mapping)>,
}

/// Simulated annealing over mappings.
///
/// Each iteration draws a source `i` uniformly and re-maps it greedily
/// ([`greedy_remap`]). When no target improves the loss for `i` and uphill
/// moves are enabled, a random move is proposed instead: with equal odds,
/// exchanging the targets of `i` and another uniformly drawn source, or
/// sending `i` to a uniformly drawn other target. It is accepted with
/// probability `min(1, exp(−Δ/T))` (Metropolis on the squared loss). The
/// temperature decays geometrically. The best mapping visited is returned.
pub fn anneal(
    a: &DistanceMatrix,
    b: &DistanceMatrix,
    q0: &Mapping,
    sched: &AnnealSchedule,
) -> Result<AnnealTrace> {
    sched.validate()?;
    let initial_sq = squared_loss(a, b, q0)?;
    let n = q0.len();
    let m = b.n();
    let mut temperature = if sched.greedy_only {
        0.0
    } else {
        sched.initial_temperature.unwrap_or(initial_sq / n as f64)
    };
    let initial_temperature = temperature;
    let mut rng = rng::seeded(sched.seed);

    let mut q = q0.clone();
    let mut current_sq = initial_sq;
    let mut best = q.clone();
    let mut best_sq = initial_sq;
    let mut records = Vec::with_capacity(sched.iterations + 1);
    let record = |iteration, sq: f64, best_sq: f64, accepted| {
        let loss = libm::sqrt(sq.max(0.0));
        TraceRecord {
            iteration,
            loss,
            normalized_loss: loss / n as f64,
            best_loss: libm::sqrt(best_sq.max(0.0)),
            accepted,
        }
    };
    records.push(record(0, current_sq, best_sq, true));
    let mut snapshots = Vec::new();
    if sched.checkpoints.contains(&0) {
        snapshots.push((0, best.clone()));
    }

    for iteration in 1..=sched.iterations {
        let i = rng::index(&mut rng, n);
        let (j, delta) = greedy_unchecked(a, b, &q, i);
        let mut accepted = false;
        if delta < 0.0 {
            q.set(i, j);
            current_sq += delta;
            accepted = true;
        } else if temperature > 0.0 && m > 1 {
            let swap_with = if n > 1 && rng.random_bool(0.5) {
                let r = rng::index(&mut rng, n - 1);
                Some(if r >= i { r + 1 } else { r })
            } else {
                None
            };
            let ti = q.target(i);
            let uphill = match swap_with {
                Some(l) => {
                    let tl = q.target(l);
                    let first = remap_delta_unchecked(a, b, &q, i, tl);
                    q.set(i, tl);
                    let second = remap_delta_unchecked(a, b, &q, l, ti);
                    q.set(l, ti);
                    first + second
                }
                None => {
                    let r = rng::index(&mut rng, m - 1);
                    let proposal = if r >= ti { r + 1 } else { r };
                    let delta = remap_delta_unchecked(a, b, &q, i, proposal);
                    q.set(i, proposal);
                    delta
                }
            };
            let u: f64 = rng.random();
            if uphill <= 0.0 || u < libm::exp(-uphill / temperature) {
                current_sq += uphill;
                accepted = true;
            } else {
                if let Some(l) = swap_with {
                    q.set(l, q.target(i));
                }
                q.set(i, ti);
            }
        }
        // keep the running sum from drifting
        if iteration % n == 0 {
            current_sq = squared_loss_unchecked(a, b, &q);
        }
        if accepted && current_sq < best_sq {
            best_sq = current_sq;
            best.clone_from(&q);
        }
        temperature *= sched.cooling;
        records.push(record(iteration, current_sq, best_sq, accepted));
        if sched.checkpoints.contains(&iteration) {
            snapshots.push((iteration, best.clone()));
        }
    }

    let final_loss = libm::sqrt(squared_loss_unchecked(a, b, &best));
    Ok(AnnealTrace {
        records,
        final_mapping: best,
        final_loss,
        initial_temperature,
        snapshots,
    })
}
