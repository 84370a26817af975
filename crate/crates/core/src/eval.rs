//! Overlap and recovery metrics.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{voxelize, Point3, Tractography};
use crate::graph::Mapping;

/// Default evaluation grid, mm.
pub const DEFAULT_VOXEL_SIZE: Point3 = Point3::new(2.0, 2.0, 2.0);

/// Full-tractography indices hit by `q`, where `q` targets positions in
/// `superset_indices`. Ascending, without repeats.
pub fn mapped_indices(q: &Mapping, superset_indices: &[usize]) -> Result<Vec<usize>> {
    let set = q
        .assignment()
        .iter()
        .map(|&t| {
            superset_indices
                .get(t)
                .copied()
                .ok_or(Error::IndexOutOfRange {
                    what: "superset",
                    index: t,
                    len: superset_indices.len(),
                })
        })
        .collect::<Result<BTreeSet<usize>>>()?;
    Ok(set.into_iter().collect())
}

/// The streamlines of `t_b` selected by `q` through `superset_indices`; a
/// streamline hit by several sources appears once.
pub fn mapped_tract(
    t_b: &Tractography,
    q: &Mapping,
    superset_indices: &[usize],
) -> Result<Tractography> {
    t_b.select(&mapped_indices(q, superset_indices)?)
}

/// Voxel overlap of two tractographies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapReport {
    /// `|A ∩ B| / min(|A|, |B|)`.
    pub jaccard: f64,
    /// `|A ∩ B| / |A ∪ B|`, reported alongside.
    pub union_jaccard: f64,
    pub vol_a: usize,
    pub vol_b: usize,
    pub vol_intersection: usize,
    pub voxel_size: Point3,
    /// Set when a voxel set was empty and the ratios were defined as 0.
    pub empty: bool,
}

/// Voxel overlap with the minimum-volume denominator. Symmetric in its
/// arguments.
pub fn jaccard_overlap(
    t_a: &Tractography,
    t_b_mapped: &Tractography,
    voxel_size: Point3,
) -> Result<OverlapReport> {
    let va = voxelize(t_a, voxel_size)?;
    let vb = voxelize(t_b_mapped, voxel_size)?;
    let inter = va.intersection_len(&vb);
    let min = va.len().min(vb.len());
    let empty = min == 0;
    let (jaccard, union_jaccard) = if empty {
        (0.0, 0.0)
    } else {
        (
            inter as f64 / min as f64,
            inter as f64 / va.union_len(&vb) as f64,
        )
    };
    Ok(OverlapReport {
        jaccard,
        union_jaccard,
        vol_a: va.len(),
        vol_b: vb.len(),
        vol_intersection: inter,
        voxel_size,
        empty,
    })
}

/// Fraction of sources mapped to their ground-truth target.
pub fn recovery_rate(q: &Mapping, ground_truth: &Mapping) -> Result<f64> {
    if q.len() != ground_truth.len() {
        return Err(Error::DimensionMismatch(format!(
            "mapping has {} sources, ground truth has {}",
            q.len(),
            ground_truth.len()
        )));
    }
    if q.is_empty() {
        return Err(Error::InvalidParameter(
            "recovery rate of an empty mapping".into(),
        ));
    }
    let hits = q
        .assignment()
        .iter()
        .zip(ground_truth.assignment())
        .filter(|(a, b)| a == b)
        .count();
    Ok(hits as f64 / q.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Streamline;
    use alloc::vec;

    fn tract(points: &[[f64; 3]]) -> Tractography {
        Tractography::new(
            points
                .iter()
                .map(|&p| Streamline::new(vec![Point3::from(p)]).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn mapped_tract_dedups() {
        let t = tract(&[[0.0; 3], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0], [3.0, 0.0, 0.0]]);
        let superset = [1, 2, 3];
        let q = Mapping::new(vec![0, 0, 1], 3).unwrap();
        let m = mapped_tract(&t, &q, &superset).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.streamlines()[0], t.streamlines()[1]);
        assert_eq!(
            mapped_tract(&t, &Mapping::new(vec![2, 2, 2], 3).unwrap(), &superset)
                .unwrap()
                .len(),
            1
        );
        assert_eq!(
            mapped_tract(&t, &Mapping::identity(3), &superset)
                .unwrap()
                .len(),
            3
        );
        assert!(mapped_tract(&t, &Mapping::new(vec![5], 6).unwrap(), &superset).is_err());
    }

    #[test]
    fn overlap_examples() {
        let one = Point3::new(1.0, 1.0, 1.0);
        let a = tract(&[[0.5, 0.5, 0.5], [1.5, 0.5, 0.5]]);
        assert_eq!(jaccard_overlap(&a, &a, one).unwrap().jaccard, 1.0);
        let far = tract(&[[10.5, 0.5, 0.5]]);
        let r = jaccard_overlap(&a, &far, one).unwrap();
        assert_eq!((r.jaccard, r.vol_intersection), (0.0, 0));
        let b = tract(&[[1.5, 0.5, 0.5], [2.5, 0.5, 0.5]]);
        let r = jaccard_overlap(&a, &b, one).unwrap();
        assert_eq!(r.jaccard, 0.5);
        assert!((r.union_jaccard - 1.0 / 3.0).abs() < 1e-15);
        assert!(!r.empty);
        assert!(jaccard_overlap(&a, &b, Point3::new(0.0, 1.0, 1.0)).is_err());
    }

    #[test]
    fn min_denominator_differs_from_union() {
        let one = Point3::new(1.0, 1.0, 1.0);
        let a = tract(&[[0.5, 0.5, 0.5]]);
        let b = tract(&[[0.5, 0.5, 0.5], [1.5, 0.5, 0.5], [2.5, 0.5, 0.5]]);
        let r = jaccard_overlap(&a, &b, one).unwrap();
        assert_eq!(r.jaccard, 1.0);
        assert!((r.union_jaccard - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn recovery_examples() {
        let truth = Mapping::new(vec![0, 1, 2, 3], 4).unwrap();
        assert_eq!(recovery_rate(&truth, &truth).unwrap(), 1.0);
        let wrong = Mapping::new(vec![1, 2, 3, 0], 4).unwrap();
        assert_eq!(recovery_rate(&wrong, &truth).unwrap(), 0.0);
        let half = Mapping::new(vec![0, 1, 0, 0], 4).unwrap();
        assert_eq!(recovery_rate(&half, &truth).unwrap(), 0.5);
        assert!(recovery_rate(&Mapping::identity(3), &truth).is_err());
    }
}
