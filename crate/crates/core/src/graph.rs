//! Adjacency matrices, mappings and the mapping loss.
//!
//! A [`Mapping`] `q` stands for the binary `N×M` matrix `Q` with
//! `Q[i][q(i)] = 1`, so `(Q B Qᵀ)[i][j] = B[q(i)][q(j)]` and the loss
//! `‖A − Q B Qᵀ‖_F` never needs the matrix form.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{mam_unchecked, Tractography};

/// Symmetric, zero-diagonal, non-negative `n×n` matrix of streamline distances.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    values: Vec<f64>,
}

impl DistanceMatrix {
    /// Builds a matrix from row-major values, checking every invariant.
    pub fn from_row_major(n: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyTractography);
        }
        if values.len() != n * n {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {n}x{n} matrix",
                values.len()
            )));
        }
        for i in 0..n {
            if values[i * n + i] != 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "diagonal entry {i} is not zero"
                )));
            }
            for j in 0..n {
                let v = values[i * n + j];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "entry ({i},{j}) = {v} is not a finite non-negative distance"
                    )));
                }
                if v != values[j * n + i] {
                    return Err(Error::InvalidParameter(format!(
                        "matrix is not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(DistanceMatrix { n, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch("rows of unequal length".into()));
        }
        Self::from_row_major(n, rows.concat())
    }

    /// Fills the upper triangle with `f(i, j)` for `i < j` and mirrors it.
    pub fn from_upper(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut values = alloc::vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let v = f(i, j);
                values[i * n + j] = v;
                values[j * n + i] = v;
            }
        }
        Self::from_row_major(n, values)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// The matrix relabeled so that entry `(perm[i], perm[j])` of the result
    /// equals entry `(i, j)` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.n)?;
        let n = self.n;
        let mut values = alloc::vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                values[perm[i] * n + perm[j]] = self.get(i, j);
            }
        }
        Ok(DistanceMatrix { n, values })
    }
}

fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "permutation of length {} for size {n}",
            perm.len()
        )));
    }
    let mut seen = alloc::vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::InvalidParameter("not a permutation".into()));
        }
        seen[p] = true;
    }
    Ok(())
}

/// Pairwise MAM distances of a tractography (the graph adjacency matrix).
pub fn distance_matrix(t: &Tractography) -> Result<DistanceMatrix> {
    let s = t.streamlines();
    DistanceMatrix::from_upper(s.len(), |i, j| mam_unchecked(&s[i], &s[j]))
}

/// Rectangular `rows×cols` matrix of distances between two streamline sets.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossDistance {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl CrossDistance {
    pub fn from_row_major(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyTractography);
        }
        if values.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {rows}x{cols} matrix",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite cross distance".into()));
        }
        Ok(CrossDistance { rows, cols, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("rows of unequal length".into()));
        }
        Self::from_row_major(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }
}

/// MAM distance from every streamline of `source` to every one of `target`.
pub fn cross_distance(source: &Tractography, target: &Tractography) -> Result<CrossDistance> {
    let (a, b) = (source.streamlines(), target.streamlines());
    let values = a
        .iter()
        .flat_map(|s| b.iter().map(move |t| mam_unchecked(s, t)))
        .collect();
    CrossDistance::from_row_major(a.len(), b.len(), values)
}

/// A total, possibly many-to-one assignment of source to target indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mapping {
    assignment: Vec<usize>,
}

impl Mapping {
    /// Wraps `assignment`, checking that every target is below `n_targets`.
    pub fn new(assignment: Vec<usize>, n_targets: usize) -> Result<Self> {
        if let Some(&index) = assignment.iter().find(|&&t| t >= n_targets) {
            return Err(Error::IndexOutOfRange {
                what: "target",
                index,
                len: n_targets,
            });
        }
        Ok(Mapping { assignment })
    }

    pub fn identity(n: usize) -> Self {
        Mapping {
            assignment: (0..n).collect(),
        }
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn into_assignment(self) -> Vec<usize> {
        self.assignment
    }

    /// Number of source streamlines.
    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    #[inline]
    pub fn target(&self, source: usize) -> usize {
        self.assignment[source]
    }

    pub fn is_injective(&self) -> bool {
        let mut sorted = self.assignment.clone();
        sorted.sort_unstable();
        sorted.windows(2).all(|w| w[0] != w[1])
    }

    pub(crate) fn set(&mut self, source: usize, target: usize) {
        self.assignment[source] = target;
    }
}

fn check_mapping(a: &DistanceMatrix, b: &DistanceMatrix, q: &Mapping) -> Result<()> {
    if q.len() != a.n() {
        return Err(Error::DimensionMismatch(format!(
            "mapping has {} sources, matrix A is {}x{}",
            q.len(),
            a.n(),
            a.n()
        )));
    }
    if let Some(&index) = q.assignment.iter().find(|&&t| t >= b.n()) {
        return Err(Error::IndexOutOfRange {
            what: "target",
            index,
            len: b.n(),
        });
    }
    Ok(())
}

pub(crate) fn check_source(
    a: &DistanceMatrix,
    b: &DistanceMatrix,
    q: &Mapping,
    i: usize,
) -> Result<()> {
    check_mapping(a, b, q)?;
    if i >= q.len() {
        return Err(Error::IndexOutOfRange {
            what: "source",
            index: i,
            len: q.len(),
        });
    }
    Ok(())
}

/// `Σᵢⱼ (A[i][j] − B[q(i)][q(j)])²`, the square of [`mapping_loss`].
pub fn squared_loss(a: &DistanceMatrix, b: &DistanceMatrix, q: &Mapping) -> Result<f64> {
    check_mapping(a, b, q)?;
    Ok(squared_loss_unchecked(a, b, q))
}

pub(crate) fn squared_loss_unchecked(a: &DistanceMatrix, b: &DistanceMatrix, q: &Mapping) -> f64 {
    let mut total = 0.0;
    for i in 0..a.n() {
        let b_row = b.row(q.target(i));
        for (j, &a_ij) in a.row(i).iter().enumerate() {
            let d = a_ij - b_row[q.target(j)];
            total += d * d;
        }
    }
    total
}

/// Frobenius norm `‖A − Q B Qᵀ‖`.
pub fn mapping_loss(a: &DistanceMatrix, b: &DistanceMatrix, q: &Mapping) -> Result<f64> {
    squared_loss(a, b, q).map(libm::sqrt)
}

/// Loss divided by the number of source streamlines.
pub fn normalized_loss(loss: f64, n_source: usize) -> Result<f64> {
    if n_source == 0 {
        return Err(Error::InvalidParameter(
            "normalized loss needs at least one source".into(),
        ));
    }
    Ok(loss / n_source as f64)
}

/// Change of the *squared* loss when source `i` is re-mapped to `j_new`,
/// evaluated in O(N) from row/column `i` only.
pub fn remap_delta(
    a: &DistanceMatrix,
    b: &DistanceMatrix,
    q: &Mapping,
    i: usize,
    j_new: usize,
) -> Result<f64> {
    check_source(a, b, q, i)?;
    if j_new >= b.n() {
        return Err(Error::IndexOutOfRange {
            what: "target",
            index: j_new,
            len: b.n(),
        });
    }
    Ok(remap_delta_unchecked(a, b, q, i, j_new))
}

pub(crate) fn remap_delta_unchecked(
    a: &DistanceMatrix,
    b: &DistanceMatrix,
    q: &Mapping,
    i: usize,
    j_new: usize,
) -> f64 {
    let j_old = q.target(i);
    if j_new == j_old {
        return 0.0;
    }
    let a_row = a.row(i);
    let old_row = b.row(j_old);
    let new_row = b.row(j_new);
    let mut off_diagonal = 0.0;
    for (l, &a_il) in a_row.iter().enumerate() {
        if l == i {
            continue;
        }
        let t = q.target(l);
        let new = a_il - new_row[t];
        let old = a_il - old_row[t];
        off_diagonal += new * new - old * old;
    }
    // B has a zero diagonal, so the (i,i) term is A[i][i]² both before and after.
    let diag_new = a_row[i] - new_row[j_new];
    let diag_old = a_row[i] - old_row[j_old];
    2.0 * off_diagonal + (diag_new * diag_new - diag_old * diag_old)
}
