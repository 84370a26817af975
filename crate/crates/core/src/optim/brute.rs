use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::{squared_loss_unchecked, DistanceMatrix, Mapping};

/// Default cap on the number of mappings `brute_force_mapping` will score.
pub const DEFAULT_MAPPING_BUDGET: u128 = 1_000_000;

/// Largest size accepted by [`brute_force_matching`] (8! = 40320).
pub const MAX_MATCHING_SIZE: usize = 8;

/// Exact minimizer of the mapping loss over all `M^N` mappings, with the
/// default budget.
pub fn brute_force_mapping(a: &DistanceMatrix, b: &DistanceMatrix) -> Result<(Mapping, f64)> {
    brute_force_mapping_with_budget(a, b, DEFAULT_MAPPING_BUDGET)
}

/// Exhaustive search over all mappings in lexicographic order; the
/// lexicographically smallest minimizer is returned. Refuses when `M^N`
/// exceeds `budget`.
pub fn brute_force_mapping_with_budget(
    a: &DistanceMatrix,
    b: &DistanceMatrix,
    budget: u128,
) -> Result<(Mapping, f64)> {
    let (n, m) = (a.n(), b.n());
    let required = u32::try_from(n)
        .ok()
        .and_then(|e| (m as u128).checked_pow(e))
        .unwrap_or(u128::MAX);
    if required > budget {
        return Err(Error::BudgetExceeded { required, budget });
    }

    let mut q = Mapping::new(alloc::vec![0; n], m)?;
    let mut best = (q.clone(), squared_loss_unchecked(a, b, &q));
    // odometer over assignments, last position fastest
    loop {
        let mut pos = n;
        loop {
            if pos == 0 {
                return Ok((best.0, libm::sqrt(best.1)));
            }
            pos -= 1;
            let next = q.target(pos) + 1;
            if next < m {
                q.set(pos, next);
                break;
            }
            q.set(pos, 0);
        }
        let sq = squared_loss_unchecked(a, b, &q);
        if sq < best.1 {
            best = (q.clone(), sq);
        }
    }
}

/// Exact minimizer of `‖A − P B Pᵀ‖` over permutations of equal-size
/// graphs (`n <= 8`). Lexicographically smallest permutation on ties.
pub fn brute_force_matching(a: &DistanceMatrix, b: &DistanceMatrix) -> Result<(Mapping, f64)> {
    let n = a.n();
    if b.n() != n {
        return Err(Error::DimensionMismatch(format!(
            "graph matching needs equal sizes, got {} and {}",
            n,
            b.n()
        )));
    }
    if n > MAX_MATCHING_SIZE {
        return Err(Error::InvalidParameter(format!(
            "graph matching oracle is limited to n <= {MAX_MATCHING_SIZE}, got {n}"
        )));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = (perm.clone(), f64::INFINITY);
    loop {
        let q = Mapping::new(perm.clone(), n)?;
        let sq = squared_loss_unchecked(a, b, &q);
        if sq < best.1 {
            best = (perm.clone(), sq);
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    Ok((Mapping::new(best.0, n)?, libm::sqrt(best.1)))
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).unwrap_or(i);
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}
