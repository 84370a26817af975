use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{mam_unchecked, Tractography};
use crate::graph::{distance_matrix, DistanceMatrix};

/// Index minimizing the row sum of `d`; the lowest index wins ties.
pub fn medoid(d: &DistanceMatrix) -> Result<usize> {
    if d.n() == 0 {
        return Err(Error::EmptyTractography);
    }
    let mut best = (0, f64::INFINITY);
    for i in 0..d.n() {
        let sum: f64 = d.row(i).iter().sum();
        if sum < best.1 {
            best = (i, sum);
        }
    }
    Ok(best.0)
}

/// Parameters of a superset selection: everything within `alpha · radius`
/// of the tract medoid is kept.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuperSetFilter {
    pub alpha: f64,
    /// Index of the medoid in the full tractography.
    pub medoid_index: usize,
    /// Largest distance from the medoid to a tract member, mm.
    pub radius: f64,
}

impl SuperSetFilter {
    pub fn threshold(&self) -> f64 {
        self.alpha * self.radius
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Superset {
    pub filter: SuperSetFilter,
    /// Ascending indices into the full tractography.
    pub indices: Vec<usize>,
}

/// Streamlines of `full` within `alpha · r` (MAM) of the medoid of the tract
/// `tract_indices`, where `r` is the tract's radius around that medoid.
///
/// With `alpha >= 1` the result contains every tract member.
pub fn superset_filter(
    full: &Tractography,
    tract_indices: &[usize],
    alpha: f64,
) -> Result<Superset> {
    if tract_indices.is_empty() {
        return Err(Error::EmptyTractography);
    }
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must be > 0, got {alpha}"
        )));
    }
    let tract = full.select(tract_indices)?;
    let d = distance_matrix(&tract)?;
    let m = medoid(&d)?;
    let radius = d.row(m).iter().copied().fold(0.0, f64::max);
    let filter = SuperSetFilter {
        alpha,
        medoid_index: tract_indices[m],
        radius,
    };

    let center = &full.streamlines()[filter.medoid_index];
    let threshold = filter.threshold();
    let indices = full
        .streamlines()
        .iter()
        .enumerate()
        .filter(|(_, s)| mam_unchecked(center, s) <= threshold)
        .map(|(j, _)| j)
        .collect();
    Ok(Superset { filter, indices })
}
