//! Rectangular sample grids over the model domains.
//!
//! Three domain shapes cover every model map: a solid torus `S^1 x D^2`
//! (coordinates `u, x, y`), the 4-dimensional `T^2 x D^2` (coordinates
//! `xi_1, xi_2, x, y`), and a plain box `[-1, 1]^d` for fold charts. Angle
//! axes are periodic with `res` samples per turn; Cartesian axes span
//! `[-1, 1]` with `res` cells (`res + 1` node planes), so an even resolution
//! puts node planes exactly on `0`. Disk coordinates are masked to
//! `x^2 + y^2 <= 1`.
//!
//! Scanning classifies *nodes* (cell corners, where a coordinate plane like
//! `z = 0` lies exactly on samples); tracing marks *cells* by their centers.

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GridError {
    #[error("domain {domain:?} needs {expected} resolutions, got {got}")]
    ResolutionCount {
        domain: DomainKind,
        expected: usize,
        got: usize,
    },
    #[error("resolution {0} is below the minimum of 8 per axis")]
    ResolutionTooSmall(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisKind {
    /// Periodic, `res` samples over `[0, 2*pi)`.
    Angle,
    /// `[-1, 1]`, `res` cells and `res + 1` node planes.
    Cartesian,
}

/// Shape of a model-map domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    /// `S^1 x D^2`, coordinates `(u, x, y)`.
    SolidTorus,
    /// `T^2 x D^2`, coordinates `(xi_1, xi_2, x, y)`.
    TorusTimesDisk,
    /// `[-1, 1]^dim`, coordinates `(t, x_1, ..)`.
    Box { dim: usize },
}

impl DomainKind {
    pub fn dim(&self) -> usize {
        match self {
            DomainKind::SolidTorus => 3,
            DomainKind::TorusTimesDisk => 4,
            DomainKind::Box { dim } => *dim,
        }
    }

    pub fn axes(&self) -> Vec<AxisKind> {
        match self {
            DomainKind::SolidTorus => {
                vec![AxisKind::Angle, AxisKind::Cartesian, AxisKind::Cartesian]
            }
            DomainKind::TorusTimesDisk => vec![
                AxisKind::Angle,
                AxisKind::Angle,
                AxisKind::Cartesian,
                AxisKind::Cartesian,
            ],
            DomainKind::Box { dim } => vec![AxisKind::Cartesian; *dim],
        }
    }

    /// Axis indices forming a disk factor (masked to the unit disk).
    pub fn disk_pair(&self) -> Option<(usize, usize)> {
        match self {
            DomainKind::SolidTorus => Some((1, 2)),
            DomainKind::TorusTimesDisk => Some((2, 3)),
            DomainKind::Box { .. } => None,
        }
    }

    pub fn angle_axes(&self) -> Vec<usize> {
        self.axes()
            .iter()
            .enumerate()
            .filter(|(_, k)| **k == AxisKind::Angle)
            .map(|(i, _)| i)
            .collect()
    }
}

/// A sample grid: one resolution per coordinate axis, plus an optional
/// explicit preimage thickness for tracing (`None` = first-order automatic).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub domain: DomainKind,
    pub resolutions: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
}

impl GridSpec {
    pub fn new(domain: DomainKind, resolutions: Vec<u32>) -> Result<Self, GridError> {
        if resolutions.len() != domain.dim() {
            return Err(GridError::ResolutionCount {
                domain,
                expected: domain.dim(),
                got: resolutions.len(),
            });
        }
        if let Some(&r) = resolutions.iter().find(|r| **r < 8) {
            return Err(GridError::ResolutionTooSmall(r));
        }
        Ok(GridSpec {
            domain,
            resolutions,
            delta: None,
        })
    }

    pub fn with_delta(mut self, delta: Option<f64>) -> Self {
        self.delta = delta;
        self
    }

    /// Width of one cell along an axis (`2*pi/res` on angles, `2/res` on
    /// Cartesian axes).
    pub fn step(&self, axis: usize) -> f64 {
        let r = f64::from(self.resolutions[axis]);
        match self.domain.axes()[axis] {
            AxisKind::Angle => TAU / r,
            AxisKind::Cartesian => 2.0 / r,
        }
    }

    pub fn steps(&self) -> Vec<f64> {
        (0..self.resolutions.len()).map(|a| self.step(a)).collect()
    }

    // ---- nodes (cell corners; used by the singularity scan) ----

    /// Node grid shape: `res` on angle axes, `res + 1` on Cartesian axes.
    pub fn node_counts(&self) -> Vec<u32> {
        self.resolutions
            .iter()
            .zip(self.domain.axes())
            .map(|(r, k)| match k {
                AxisKind::Angle => *r,
                AxisKind::Cartesian => *r + 1,
            })
            .collect()
    }

    pub fn node_coord(&self, axis: usize, idx: u32) -> f64 {
        match self.domain.axes()[axis] {
            AxisKind::Angle => f64::from(idx) * self.step(axis),
            AxisKind::Cartesian => -1.0 + f64::from(idx) * self.step(axis),
        }
    }

    pub fn node_coords(&self, idx: &[u32]) -> Vec<f64> {
        idx.iter()
            .enumerate()
            .map(|(a, i)| self.node_coord(a, *i))
            .collect()
    }

    // ---- cells (used by the fiber tracer) ----

    pub fn cell_counts(&self) -> Vec<u32> {
        self.resolutions.clone()
    }

    pub fn cell_center(&self, axis: usize, idx: u32) -> f64 {
        let h = self.step(axis);
        match self.domain.axes()[axis] {
            AxisKind::Angle => (f64::from(idx) + 0.5) * h,
            AxisKind::Cartesian => -1.0 + (f64::from(idx) + 0.5) * h,
        }
    }

    pub fn cell_centers(&self, idx: &[u32]) -> Vec<f64> {
        idx.iter()
            .enumerate()
            .map(|(a, i)| self.cell_center(a, *i))
            .collect()
    }

    /// Whether a coordinate vector survives the disk mask.
    pub fn in_disk(&self, coords: &[f64]) -> bool {
        match self.domain.disk_pair() {
            None => true,
            // Tiny slack keeps boundary nodes whose coordinates are not
            // exactly representable (e.g. steps of 1/12).
            Some((i, j)) => coords[i] * coords[i] + coords[j] * coords[j] <= 1.0 + 1e-9,
        }
    }

    /// Total number of index tuples in a shape (before disk masking).
    pub fn linear_len(shape: &[u32]) -> usize {
        shape.iter().map(|r| *r as usize).product()
    }

    /// Row-major linearization of a multi-index.
    pub fn linearize(shape: &[u32], idx: &[u32]) -> usize {
        let mut out = 0usize;
        for (r, i) in shape.iter().zip(idx) {
            out = out * (*r as usize) + *i as usize;
        }
        out
    }

    /// Inverse of [`GridSpec::linearize`].
    pub fn delinearize(shape: &[u32], mut lin: usize) -> Vec<u32> {
        let mut idx = vec![0u32; shape.len()];
        for a in (0..shape.len()).rev() {
            let r = shape[a] as usize;
            idx[a] = (lin % r) as u32;
            lin /= r;
        }
        idx
    }
}
