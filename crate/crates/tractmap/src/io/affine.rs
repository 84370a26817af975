//! Externally supplied affine transforms (e.g. the output of a volumetric
//! registration tool) applied to streamline coordinates.

use tractmap_core::{Point3, Tractography};

use crate::error::{Error, Result};

/// A 4×4 homogeneous transform with last row `(0, 0, 0, 1)` and an
/// invertible linear part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineTransform {
    m: [[f64; 4]; 4],
}

fn det3(m: &[[f64; 4]; 4]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

impl AffineTransform {
    pub fn new(m: [[f64; 4]; 4]) -> Result<Self> {
        if m.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Input("affine matrix has non-finite entries".into()));
        }
        if m[3] != [0.0, 0.0, 0.0, 1.0] {
            return Err(Error::Input(format!(
                "affine last row must be (0, 0, 0, 1), got {:?}",
                m[3]
            )));
        }
        if det3(&m).abs() <= 1e-12 {
            return Err(tractmap_core::Error::InvalidParameter(
                "affine matrix is not invertible".into(),
            )
            .into());
        }
        Ok(AffineTransform { m })
    }

    pub fn identity() -> Self {
        let mut m = [[0.0; 4]; 4];
        (0..4).for_each(|i| m[i][i] = 1.0);
        AffineTransform { m }
    }

    pub fn translation(t: Point3) -> Self {
        let mut a = Self::identity();
        a.m[0][3] = t.x;
        a.m[1][3] = t.y;
        a.m[2][3] = t.z;
        a
    }

    pub fn matrix(&self) -> &[[f64; 4]; 4] {
        &self.m
    }

    pub fn apply(&self, p: Point3) -> Point3 {
        let m = &self.m;
        let row = |r: usize| m[r][0] * p.x + m[r][1] * p.y + m[r][2] * p.z + m[r][3];
        Point3::new(row(0), row(1), row(2))
    }

    pub fn inverse(&self) -> AffineTransform {
        let m = &self.m;
        let det = det3(m);
        // adjugate of the linear part
        let mut inv = [[0.0; 4]; 4];
        for (r, row) in inv.iter_mut().take(3).enumerate() {
            for (c, v) in row.iter_mut().take(3).enumerate() {
                let (r1, r2) = ((c + 1) % 3, (c + 2) % 3);
                let (c1, c2) = ((r + 1) % 3, (r + 2) % 3);
                *v = (m[r1][c1] * m[r2][c2] - m[r1][c2] * m[r2][c1]) / det;
            }
            row[3] = -(0..3).map(|c| row[c] * m[c][3]).sum::<f64>();
        }
        inv[3][3] = 1.0;
        AffineTransform { m: inv }
    }

    /// Parses either a JSON document (`{"matrix": [[...], ...]}` or a bare
    /// nested array) or whitespace-separated text with 3 or 4 rows of 4
    /// numbers, the layout of FSL `.mat` files. A missing fourth row is
    /// taken as `(0, 0, 0, 1)`.
    pub fn parse(text: &str) -> Result<Self> {
        let trimmed = text.trim_start();
        let rows: Vec<Vec<f64>> = if trimmed.starts_with('{') || trimmed.starts_with('[') {
            let v: serde_json::Value =
                serde_json::from_str(text).map_err(|e| Error::json("$", e.to_string()))?;
            let m = v.get("matrix").unwrap_or(&v);
            serde_json::from_value(m.clone()).map_err(|e| Error::json("$.matrix", e.to_string()))?
        } else {
            text.lines()
                .filter(|l| !l.trim().is_empty())
                .map(|l| {
                    l.split_whitespace()
                        .map(|tok| {
                            tok.parse::<f64>()
                                .map_err(|_| Error::Input(format!("bad affine entry {tok:?}")))
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<_>>()?
        };
        if !(rows.len() == 3 || rows.len() == 4) || rows.iter().any(|r| r.len() != 4) {
            return Err(Error::Input("affine needs 3 or 4 rows of 4 numbers".into()));
        }
        let mut m = [[0.0, 0.0, 0.0, 1.0]; 4];
        for (r, row) in rows.iter().enumerate() {
            m[r].copy_from_slice(row);
        }
        Self::new(m)
    }
}

/// Maps every point of `t` through `m`; streamline order and lengths are
/// unchanged.
pub fn apply_affine(t: &Tractography, m: &AffineTransform) -> Result<Tractography> {
    Ok(t.map_points(|p| m.apply(*p))?)
}
