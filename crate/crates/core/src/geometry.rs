//! Streamline value types, the MAM distance and vertex voxelization.
//!
//! Point-to-streamline distances are taken to the streamline's *vertices*,
//! not to its segments, so the discretization error of every distance is
//! controlled by the point density. Use [`resample`] to bound both the
//! error and the cost of a distance evaluation.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};

/// A point in millimeters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const ORIGIN: Point3 = Point3::new(0.0, 0.0, 0.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn dot(self, other: Point3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(self) -> f64 {
        libm::sqrt(self.dot(self))
    }

    pub fn distance(self, other: Point3) -> f64 {
        (self - other).norm()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl From<[f64; 3]> for Point3 {
    fn from([x, y, z]: [f64; 3]) -> Self {
        Point3 { x, y, z }
    }
}

impl Add for Point3 {
    type Output = Point3;
    fn add(self, rhs: Point3) -> Point3 {
        Point3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for Point3 {
    type Output = Point3;
    fn sub(self, rhs: Point3) -> Point3 {
        Point3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Mul<f64> for Point3 {
    type Output = Point3;
    fn mul(self, rhs: f64) -> Point3 {
        Point3::new(self.x * rhs, self.y * rhs, self.z * rhs)
    }
}

/// One fiber trajectory: a non-empty polyline of finite points.
#[derive(Debug, Clone, PartialEq)]
pub struct Streamline {
    points: Vec<Point3>,
}

impl Streamline {
    pub fn new(points: Vec<Point3>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyStreamline);
        }
        if let Some(index) = points.iter().position(|p| !p.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Streamline { points })
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Always false; kept for the `len`/`is_empty` convention.
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Applies `f` to every point. The result must stay finite.
    pub fn map_points(&self, f: impl FnMut(&Point3) -> Point3) -> Result<Streamline> {
        Streamline::new(self.points.iter().map(f).collect())
    }

    pub fn into_points(self) -> Vec<Point3> {
        self.points
    }
}

/// An indexed set of streamlines with optional metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Tractography {
    streamlines: Vec<Streamline>,
    pub voxel_size: Option<Point3>,
    pub name: Option<String>,
}

impl Tractography {
    pub fn new(streamlines: Vec<Streamline>) -> Result<Self> {
        if streamlines.is_empty() {
            return Err(Error::EmptyTractography);
        }
        Ok(Tractography {
            streamlines,
            voxel_size: None,
            name: None,
        })
    }

    pub fn with_voxel_size(mut self, voxel_size: Point3) -> Result<Self> {
        check_voxel_size(voxel_size)?;
        self.voxel_size = Some(voxel_size);
        Ok(self)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn streamlines(&self) -> &[Streamline] {
        &self.streamlines
    }

    pub fn len(&self) -> usize {
        self.streamlines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.streamlines.is_empty()
    }

    pub fn get(&self, index: usize) -> Result<&Streamline> {
        self.streamlines.get(index).ok_or(Error::IndexOutOfRange {
            what: "streamline",
            index,
            len: self.streamlines.len(),
        })
    }

    /// Sub-tractography made of `indices`, in the given order. Metadata is kept.
    pub fn select(&self, indices: &[usize]) -> Result<Tractography> {
        let streamlines = indices
            .iter()
            .map(|&i| self.get(i).cloned())
            .collect::<Result<Vec<_>>>()?;
        let mut out = Tractography::new(streamlines)?;
        out.voxel_size = self.voxel_size;
        out.name = self.name.clone();
        Ok(out)
    }

    /// Applies `f` to every point of every streamline.
    pub fn map_points(&self, mut f: impl FnMut(&Point3) -> Point3) -> Result<Tractography> {
        let streamlines = self
            .streamlines
            .iter()
            .map(|s| s.map_points(&mut f))
            .collect::<Result<Vec<_>>>()?;
        Ok(Tractography {
            streamlines,
            voxel_size: self.voxel_size,
            name: self.name.clone(),
        })
    }

    /// Resamples every streamline to `k` points, see [`resample`].
    pub fn resampled(&self, k: usize) -> Result<Tractography> {
        let streamlines = self
            .streamlines
            .iter()
            .map(|s| resample(s, k))
            .collect::<Result<Vec<_>>>()?;
        Ok(Tractography {
            streamlines,
            voxel_size: self.voxel_size,
            name: self.name.clone(),
        })
    }

    pub fn into_streamlines(self) -> Vec<Streamline> {
        self.streamlines
    }
}

/// Euclidean distance from `x` to the nearest vertex of `s`.
pub fn point_to_streamline_distance(x: Point3, s: &Streamline) -> Result<f64> {
    if s.points.is_empty() {
        return Err(Error::EmptyStreamline);
    }
    Ok(libm::sqrt(nearest_vertex_sq(x, &s.points)))
}

fn nearest_vertex_sq(x: Point3, points: &[Point3]) -> f64 {
    points
        .iter()
        .map(|p| {
            let d = x - *p;
            d.dot(d)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Mean over the vertices of `s` of their distance to `other`.
fn mean_min_distance(s: &[Point3], other: &[Point3]) -> f64 {
    let total: f64 = s
        .iter()
        .map(|&x| libm::sqrt(nearest_vertex_sq(x, other)))
        .sum();
    total / s.len() as f64
}

/// Mean Average Minimum distance: `½ (D(s, t) + D(t, s))` where `D(s, t)` is
/// the mean over the vertices of `s` of the distance to the closest vertex of
/// `t`.
///
/// Symmetric and zero on identical inputs. It is not a metric (the triangle
/// inequality can fail).
pub fn mam_distance(s: &Streamline, t: &Streamline) -> Result<f64> {
    if s.points.is_empty() || t.points.is_empty() {
        return Err(Error::EmptyStreamline);
    }
    Ok(mam_unchecked(s, t))
}

/// [`mam_distance`] for values that are non-empty by construction.
pub(crate) fn mam_unchecked(s: &Streamline, t: &Streamline) -> f64 {
    0.5 * (mean_min_distance(&s.points, &t.points) + mean_min_distance(&t.points, &s.points))
}

/// Resamples `s` to `k` points equally spaced in arc length, keeping both
/// endpoints. A zero-length streamline becomes `k` copies of its first point.
pub fn resample(s: &Streamline, k: usize) -> Result<Streamline> {
    if k == 0 {
        return Err(Error::InvalidParameter(
            "resample point count must be >= 1".into(),
        ));
    }
    let pts = &s.points;
    if pts.is_empty() {
        return Err(Error::EmptyStreamline);
    }
    let mut cumulative = Vec::with_capacity(pts.len());
    cumulative.push(0.0);
    for w in pts.windows(2) {
        let last = *cumulative.last().unwrap_or(&0.0);
        cumulative.push(last + w[0].distance(w[1]));
    }
    let total = *cumulative.last().unwrap_or(&0.0);
    if k == 1 || total == 0.0 {
        return Streamline::new(alloc::vec![pts[0]; k]);
    }

    let mut out = Vec::with_capacity(k);
    let mut seg = 0;
    for step in 0..k {
        if step == k - 1 {
            out.push(pts[pts.len() - 1]);
            break;
        }
        let target = total * step as f64 / (k - 1) as f64;
        while seg + 1 < pts.len() - 1 && cumulative[seg + 1] < target {
            seg += 1;
        }
        let len = cumulative[seg + 1] - cumulative[seg];
        let t = if len > 0.0 {
            ((target - cumulative[seg]) / len).clamp(0.0, 1.0)
        } else {
            0.0
        };
        out.push(pts[seg] + (pts[seg + 1] - pts[seg]) * t);
    }
    Streamline::new(out)
}

/// Integer voxel coordinates occupied by a tractography.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VoxelSet {
    voxels: BTreeSet<[i64; 3]>,
    voxel_size: [u64; 3],
}

impl VoxelSet {
    pub fn voxels(&self) -> &BTreeSet<[i64; 3]> {
        &self.voxels
    }

    pub fn voxel_size(&self) -> Point3 {
        Point3::new(
            f64::from_bits(self.voxel_size[0]),
            f64::from_bits(self.voxel_size[1]),
            f64::from_bits(self.voxel_size[2]),
        )
    }

    /// Volume in voxels.
    pub fn len(&self) -> usize {
        self.voxels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.voxels.is_empty()
    }

    pub fn intersection_len(&self, other: &VoxelSet) -> usize {
        self.voxels.intersection(&other.voxels).count()
    }

    pub fn union_len(&self, other: &VoxelSet) -> usize {
        self.len() + other.len() - self.intersection_len(other)
    }
}

pub(crate) fn check_voxel_size(v: Point3) -> Result<()> {
    let ok = [v.x, v.y, v.z].iter().all(|c| c.is_finite() && *c > 0.0);
    if ok {
        Ok(())
    } else {
        Err(Error::NonPositiveVoxelSize)
    }
}

/// Voxels containing at least one streamline vertex, `floor(coord / size)`
/// per axis. Segments between vertices are not rasterized.
pub fn voxelize(t: &Tractography, voxel_size: Point3) -> Result<VoxelSet> {
    check_voxel_size(voxel_size)?;
    let voxels = t
        .streamlines
        .iter()
        .flat_map(|s| s.points.iter())
        .map(|p| {
            [
                libm::floor(p.x / voxel_size.x) as i64,
                libm::floor(p.y / voxel_size.y) as i64,
                libm::floor(p.z / voxel_size.z) as i64,
            ]
        })
        .collect();
    Ok(VoxelSet {
        voxels,
        voxel_size: [
            voxel_size.x.to_bits(),
            voxel_size.y.to_bits(),
            voxel_size.z.to_bits(),
        ],
    })
}
