//! Closed-form model fibrations and their derivative data.
//!
//! Three families of maps to the plane (or disk) are implemented:
//!
//! * `multiple_fiber(p, k)`: the extension `(xi_1, xi_2, z) -> xi_2^k * z^p`
//!   of a fibration over `T^2 x D^2`. For `p >= 2` its differential vanishes
//!   identically on the core torus `{z = 0}` and it is a submersion
//!   elsewhere; for `p = 1` it is a submersion everywhere.
//! * `seifert(p, q)`: `(u, z) -> u^{-q} * z^p` on a solid torus, the local
//!   model of a `(p, q)` exceptional-fiber neighborhood. It satisfies
//!   `multiple_fiber(p, k)(xi_1, u, z) = seifert(p, -k)(u, z)`.
//! * `fold_chart(s_1, .., s_n)`: `(t, x) -> (t, sum s_i x_i^2)`, the normal
//!   form of a fold singularity. The fold is *indefinite* exactly when the
//!   signs are mixed (index not `0` or `n`).
//!
//! Circle coordinates are angles at the API boundary; internally they become
//! unit-modulus complex numbers, and all powers are integer powers
//! (`powi`), so no branch cut is ever crossed.
//!
//! The boundary regluing `psi` of a surgery is also evaluated here; it maps
//! the 3-torus to itself, so instead of a Jacobian it carries a winding
//! matrix (its action on `H_1`), recoverable numerically by
//! [`winding_matrix`].

use crate::grid::{DomainKind, GridSpec};
use crate::surgery::SurgeryData;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("point has |z| = {0}, outside the closed unit disk")]
    OutsideDisk(f64),
    #[error("psi acts on the boundary 3-torus; |z| = {0} is not 1")]
    NotOnBoundary(f64),
    #[error("expected {expected} spatial coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("step h = {h} reaches outside the domain at this point")]
    StepTooLarge { h: f64 },
    #[error("map {0} has no 2-plane target; its derivative data is the winding matrix")]
    UnsupportedMap(String),
    #[error("coordinate vector has length {got}, domain needs {expected}")]
    CoordinateCount { expected: usize, got: usize },
    #[error(transparent)]
    Surgery(#[from] crate::surgery::SurgeryError),
    #[error(transparent)]
    Grid(#[from] crate::grid::GridError),
}

/// Reduce an angle to `[0, 2*pi)`.
fn reduce_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r == TAU {
        0.0
    } else {
        r
    }
}

/// A point of `T^2 x D^2`: two angles and a disk coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusSolidPoint {
    xi1: f64,
    xi2: f64,
    z: Complex64,
}

impl TorusSolidPoint {
    pub fn new(xi1: f64, xi2: f64, z: Complex64) -> Result<Self, ModelError> {
        if z.norm() > 1.0 + 1e-12 {
            return Err(ModelError::OutsideDisk(z.norm()));
        }
        Ok(TorusSolidPoint {
            xi1: reduce_angle(xi1),
            xi2: reduce_angle(xi2),
            z,
        })
    }

    pub fn xi1(&self) -> f64 {
        self.xi1
    }

    pub fn xi2(&self) -> f64 {
        self.xi2
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }
}

/// A point of the solid torus `S^1 x D^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolidTorusPoint {
    u: f64,
    z: Complex64,
}

impl SolidTorusPoint {
    pub fn new(u: f64, z: Complex64) -> Result<Self, ModelError> {
        if z.norm() > 1.0 + 1e-12 {
            return Err(ModelError::OutsideDisk(z.norm()));
        }
        Ok(SolidTorusPoint {
            u: reduce_angle(u),
            z,
        })
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }
}

/// A point of a fold chart `[-1, 1] x R^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldChartPoint {
    pub t: f64,
    pub x: Vec<f64>,
}

/// Sign of one quadratic term in a fold normal form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn as_f64(&self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Identifier of a model map, carrying its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapId {
    MultipleFiber { p: i64, k: i64 },
    Seifert { p: i64, q: i64 },
    PsiBoundary(SurgeryData),
    FoldChart { signs: Vec<Sign> },
}

impl MapId {
    /// Grid-scannable domain; `None` for `psi`, which maps torus to torus.
    pub fn domain(&self) -> Option<DomainKind> {
        match self {
            MapId::MultipleFiber { .. } => Some(DomainKind::TorusTimesDisk),
            MapId::Seifert { .. } => Some(DomainKind::SolidTorus),
            MapId::FoldChart { signs } => Some(DomainKind::Box {
                dim: 1 + signs.len(),
            }),
            MapId::PsiBoundary(_) => None,
        }
    }

    pub fn label(&self) -> String {
        match self {
            MapId::MultipleFiber { p, k } => format!("multiple_fiber({p},{k})"),
            MapId::Seifert { p, q } => format!("seifert({p},{q})"),
            MapId::PsiBoundary(d) => format!("psi({},{})", d.p(), d.q()),
            MapId::FoldChart { signs } => {
                let s: String = signs
                    .iter()
                    .map(|s| if *s == Sign::Plus { '+' } else { '-' })
                    .collect();
                format!("fold_chart({s})")
            }
        }
    }

    fn check_coords(&self, coords: &[f64]) -> Result<usize, ModelError> {
        let d = self
            .domain()
            .ok_or_else(|| ModelError::UnsupportedMap(self.label()))?
            .dim();
        if coords.len() != d {
            return Err(ModelError::CoordinateCount {
                expected: d,
                got: coords.len(),
            });
        }
        Ok(d)
    }

    /// Evaluate at a real coordinate vector (target plane as `C`).
    ///
    /// Coordinate conventions: `multiple_fiber` takes `(xi_1, xi_2, x, y)`,
    /// `seifert` takes `(u, x, y)`, `fold_chart` takes `(t, x_1, .., x_n)`
    /// with the pair `(t, sum s_i x_i^2)` packed as `re + i*im`.
    pub fn eval(&self, coords: &[f64]) -> Result<Complex64, ModelError> {
        self.check_coords(coords)?;
        Ok(match self {
            MapId::MultipleFiber { p, k } => {
                let z = Complex64::new(coords[2], coords[3]);
                Complex64::from_polar(1.0, *k as f64 * coords[1]) * z.powi(*p as i32)
            }
            MapId::Seifert { p, q } => {
                let z = Complex64::new(coords[1], coords[2]);
                Complex64::from_polar(1.0, -(*q as f64) * coords[0]) * z.powi(*p as i32)
            }
            MapId::FoldChart { signs } => {
                let quad: f64 = signs
                    .iter()
                    .zip(&coords[1..])
                    .map(|(s, x)| s.as_f64() * x * x)
                    .sum();
                Complex64::new(coords[0], quad)
            }
            MapId::PsiBoundary(_) => unreachable!("check_coords rejects psi"),
        })
    }
}

/// `xi_2^k * z^p` on `T^2 x D^2` (with `xi_2` on the unit circle).
pub fn eval_multiple_fiber(p: i64, k: i64, pt: &TorusSolidPoint) -> Complex64 {
    Complex64::from_polar(1.0, k as f64 * pt.xi2) * pt.z.powi(p as i32)
}

/// `u^{-q} * z^p` on the solid torus: the `(p, q)` exceptional-fiber model.
pub fn eval_seifert(p: i64, q: i64, pt: &SolidTorusPoint) -> Complex64 {
    Complex64::from_polar(1.0, -(q as f64) * pt.u) * pt.z.powi(p as i32)
}

/// `(t, x) -> (t, sum s_i x_i^2)`.
pub fn eval_fold_chart(signs: &[Sign], pt: &FoldChartPoint) -> Result<(f64, f64), ModelError> {
    if signs.len() != pt.x.len() {
        return Err(ModelError::DimensionMismatch {
            expected: signs.len(),
            got: pt.x.len(),
        });
    }
    let quad = signs
        .iter()
        .zip(&pt.x)
        .map(|(s, x)| s.as_f64() * x * x)
        .sum();
    Ok((pt.t, quad))
}

/// The boundary regluing `psi(xi_1, xi_2, z) =
/// (xi_1, xi_2^{(qk+1)/p} * z^q, xi_2^k * z^p)` on the 3-torus `|z| = 1`.
///
/// Requires `p >= 1` (the `p = 0` matrix has no multiplicative form with an
/// integer center exponent) and `|z| = 1` up to 1e-9.
pub fn eval_psi(data: &SurgeryData, pt: &TorusSolidPoint) -> Result<TorusSolidPoint, ModelError> {
    if data.p() < 1 {
        return Err(ModelError::UnsupportedMap(format!(
            "psi({},{})",
            data.p(),
            data.q()
        )));
    }
    if (pt.z.norm() - 1.0).abs() > 1e-9 {
        return Err(ModelError::NotOnBoundary(pt.z.norm()));
    }
    let (p, q, k) = (data.p(), data.q(), data.k());
    let center = (q * k + 1) / p;
    let xi2 = Complex64::from_polar(1.0, pt.xi2);
    let new_xi2 = xi2.powi(center as i32) * pt.z.powi(q as i32);
    let new_z = xi2.powi(k as i32) * pt.z.powi(p as i32);
    // Renormalize to the unit circle: integer powers of unit numbers drift
    // only at rounding level, but the invariant should be exact.
    TorusSolidPoint::new(pt.xi1, new_xi2.arg(), new_z / new_z.norm())
}

/// A 2 x d real Jacobian (rows = target plane, columns = domain coordinates).
pub type Jacobian = DMatrix<f64>;

fn columns_to_jacobian(cols: &[Complex64]) -> Jacobian {
    DMatrix::from_fn(2, cols.len(), |r, c| {
        if r == 0 {
            cols[c].re
        } else {
            cols[c].im
        }
    })
}

/// Closed-form Jacobian of a plane-target model map in real coordinates.
pub fn jacobian_exact(map: &MapId, coords: &[f64]) -> Result<Jacobian, ModelError> {
    map.check_coords(coords)?;
    Ok(match map {
        MapId::MultipleFiber { p, k } => {
            let z = Complex64::new(coords[2], coords[3]);
            let phase = Complex64::from_polar(1.0, *k as f64 * coords[1]);
            let zp = z.powi(*p as i32);
            let zp1 = z.powi(*p as i32 - 1);
            columns_to_jacobian(&[
                Complex64::new(0.0, 0.0),
                Complex64::i() * (*k as f64) * phase * zp,
                phase * (*p as f64) * zp1,
                Complex64::i() * phase * (*p as f64) * zp1,
            ])
        }
        MapId::Seifert { p, q } => {
            let z = Complex64::new(coords[1], coords[2]);
            let phase = Complex64::from_polar(1.0, -(*q as f64) * coords[0]);
            let zp = z.powi(*p as i32);
            let zp1 = z.powi(*p as i32 - 1);
            columns_to_jacobian(&[
                -Complex64::i() * (*q as f64) * phase * zp,
                phase * (*p as f64) * zp1,
                Complex64::i() * phase * (*p as f64) * zp1,
            ])
        }
        MapId::FoldChart { signs } => {
            let d = 1 + signs.len();
            DMatrix::from_fn(2, d, |r, c| match (r, c) {
                (0, 0) => 1.0,
                (0, _) | (_, 0) => 0.0,
                (_, c) => 2.0 * signs[c - 1].as_f64() * coords[c],
            })
        }
        MapId::PsiBoundary(_) => unreachable!("check_coords rejects psi"),
    })
}

/// Central-difference Jacobian: an implementation-independent check of
/// [`jacobian_exact`]. Step `h` must keep `z` inside the closed disk.
pub fn jacobian_fd(map: &MapId, coords: &[f64], h: f64) -> Result<Jacobian, ModelError> {
    let d = map.check_coords(coords)?;
    if !(h > 0.0) {
        return Err(ModelError::StepTooLarge { h });
    }
    if let Some((i, j)) = map.domain().and_then(|dk| dk.disk_pair()) {
        let r = (coords[i] * coords[i] + coords[j] * coords[j]).sqrt();
        if r + h > 1.0 {
            return Err(ModelError::StepTooLarge { h });
        }
    }
    let mut cols = Vec::with_capacity(d);
    let mut work = coords.to_vec();
    for a in 0..d {
        let c0 = coords[a];
        work[a] = c0 + h;
        let fp = map.eval(&work)?;
        work[a] = c0 - h;
        let fm = map.eval(&work)?;
        work[a] = c0;
        cols.push((fp - fm) / (2.0 * h));
    }
    Ok(columns_to_jacobian(&cols))
}

/// Recover the `H_1` action of `psi` by sweeping each coordinate circle and
/// counting the winding of each output coordinate. Column `j` of the result
/// is the image of the `j`-th coordinate circle; for valid surgery data it
/// equals the corresponding column of
/// [`crate::surgery::gluing_matrix`] exactly.
///
/// `steps` is the number of sweep samples; it must exceed twice the largest
/// expected winding so the unwrapped phase never jumps by more than `pi`
/// per step (256 is ample for the multiplicities handled here).
pub fn winding_matrix(data: &SurgeryData, steps: usize) -> Result<[[i64; 3]; 3], ModelError> {
    // Generic base angles (xi_1, xi_2, arg z) away from coordinate planes.
    let base = [0.7, 1.3, 0.9];
    let eval_angles = |angles: &[f64; 3]| -> Result<[f64; 3], ModelError> {
        let pt = TorusSolidPoint::new(
            angles[0],
            angles[1],
            Complex64::from_polar(1.0, angles[2]),
        )?;
        let out = eval_psi(data, &pt)?;
        Ok([out.xi1(), out.xi2(), out.z().arg()])
    };
    let mut m = [[0i64; 3]; 3];
    for axis_in in 0..3 {
        let mut prev = eval_angles(&base)?;
        let mut winding = [0.0f64; 3];
        for s in 1..=steps {
            let mut angles = base;
            angles[axis_in] += TAU * s as f64 / steps as f64;
            let cur = eval_angles(&angles)?;
            for i in 0..3 {
                // Unwrap: take the representative of the step nearest zero.
                let mut d = cur[i] - prev[i];
                while d > std::f64::consts::PI {
                    d -= TAU;
                }
                while d < -std::f64::consts::PI {
                    d += TAU;
                }
                winding[i] += d;
            }
            prev = cur;
        }
        for i in 0..3 {
            m[i][axis_in] = (winding[i] / TAU).round() as i64;
        }
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SingularClass {
    Regular,
    DegenerateRank0,
    FoldIndefinite,
    FoldDefinite,
    /// Rank-1 point whose restricted quadratic form is itself degenerate;
    /// never produced by the model maps, kept so nothing is misreported.
    FoldDegenerate,
}

/// One non-regular (or explicitly kept) sample of a scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularSample {
    /// Node multi-index in the scan grid.
    pub index: Vec<u32>,
    pub coords: Vec<f64>,
    /// Singular values `(sigma_1, sigma_2)` of the 2 x d Jacobian.
    pub sigma: (f64, f64),
    /// Numerical rank at the scan tolerance.
    pub rank: u8,
    pub class: SingularClass,
}

/// Result of scanning a grid for rank-deficient points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularityReport {
    pub map: String,
    pub tolerance: f64,
    pub resolutions: Vec<u32>,
    pub total_samples: u64,
    pub regular_count: u64,
    pub rank0_count: u64,
    pub fold_indefinite_count: u64,
    pub fold_definite_count: u64,
    pub fold_degenerate_count: u64,
    /// All non-regular samples, sorted by grid index.
    pub samples: Vec<SingularSample>,
}

/// Knobs for [`scan_singularities`].
#[derive(Debug, Clone, Copy)]
pub struct ScanOptions {
    /// Rank tolerance on singular values. The model domains all have
    /// diameter of order one, so an absolute default is appropriate.
    pub tolerance: f64,
    /// Step for the finite-difference Hessian in the fold test.
    pub hessian_step: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            tolerance: 1e-8,
            hessian_step: 1e-3,
        }
    }
}

pub(crate) fn singular_values_2xd(j: &Jacobian) -> (f64, f64) {
    let sv = j.clone().svd(false, false).singular_values;
    let s1 = sv[0];
    let s2 = if sv.len() > 1 { sv[1] } else { 0.0 };
    if s1 >= s2 {
        (s1, s2)
    } else {
        (s2, s1)
    }
}

/// Classify one rank-1 point: take the unit normal `n` to the image line of
/// the differential, restrict the scalar map `n . f` to the kernel of the
/// differential, and read the eigenvalue signs of its Hessian. Mixed signs
/// mean an indefinite fold.
fn classify_rank1(map: &MapId, coords: &[f64], h: f64) -> Result<SingularClass, ModelError> {
    let j = jacobian_exact(map, coords)?;
    let svd = j.clone().svd(true, true);
    let u = svd.u.as_ref().expect("svd with u");
    let vt = svd.v_t.as_ref().expect("svd with v_t");
    // Left singular vector for the smaller singular value = unit normal to
    // the image direction; right singular vector for the larger one spans
    // the row space, its orthogonal complement is the kernel.
    let normal = (u[(0, 1)], u[(1, 1)]);
    let d = coords.len();
    let v1: Vec<f64> = (0..d).map(|c| vt[(0, c)]).collect();

    // Deterministic orthonormal completion of v1 by Gram-Schmidt over the
    // standard basis.
    let mut basis: Vec<Vec<f64>> = vec![v1];
    for e in 0..d {
        if basis.len() == d {
            break;
        }
        let mut w = vec![0.0; d];
        w[e] = 1.0;
        for b in &basis {
            let dot: f64 = b.iter().zip(&w).map(|(a, c)| a * c).sum();
            for (wi, bi) in w.iter_mut().zip(b) {
                *wi -= dot * bi;
            }
        }
        let n: f64 = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-6 {
            for wi in &mut w {
                *wi /= n;
            }
            basis.push(w);
        }
    }
    let kernel = &basis[1..];

    let g = |pt: &[f64]| -> Result<f64, ModelError> {
        let f = map.eval(pt)?;
        Ok(normal.0 * f.re + normal.1 * f.im)
    };
    let shift = |dir_a: &[f64], ca: f64, dir_b: &[f64], cb: f64| -> Vec<f64> {
        coords
            .iter()
            .zip(dir_a.iter().zip(dir_b))
            .map(|(x, (a, b))| x + ca * a + cb * b)
            .collect()
    };

    let m = kernel.len();
    let mut hess = DMatrix::zeros(m, m);
    let g0 = g(coords)?;
    for a in 0..m {
        let gp = g(&shift(&kernel[a], h, &kernel[a], 0.0))?;
        let gm = g(&shift(&kernel[a], -h, &kernel[a], 0.0))?;
        hess[(a, a)] = (gp - 2.0 * g0 + gm) / (h * h);
        for b in (a + 1)..m {
            let gpp = g(&shift(&kernel[a], h, &kernel[b], h))?;
            let gpm = g(&shift(&kernel[a], h, &kernel[b], -h))?;
            let gmp = g(&shift(&kernel[a], -h, &kernel[b], h))?;
            let gmm = g(&shift(&kernel[a], -h, &kernel[b], -h))?;
            let v = (gpp - gpm - gmp + gmm) / (4.0 * h * h);
            hess[(a, b)] = v;
            hess[(b, a)] = v;
        }
    }
    let eigs = hess.symmetric_eigen().eigenvalues;
    let scale = eigs.iter().fold(0.0f64, |m, e| m.max(e.abs())).max(1e-12);
    let tol = 1e-6 * scale;
    let pos = eigs.iter().filter(|e| **e > tol).count();
    let neg = eigs.iter().filter(|e| **e < -tol).count();
    Ok(if pos > 0 && neg > 0 {
        SingularClass::FoldIndefinite
    } else if pos + neg == m {
        SingularClass::FoldDefinite
    } else {
        SingularClass::FoldDegenerate
    })
}

/// Scan the node lattice of `grid` and classify each sample by the rank of
/// the exact Jacobian (singular values against `opts.tolerance`), with the
/// fold test on rank-1 points. Nodes outside the disk mask are skipped.
/// Cells are processed independently, so the report does not depend on the
/// number of worker threads.
pub fn scan_singularities(
    map: &MapId,
    grid: &GridSpec,
    opts: &ScanOptions,
) -> Result<SingularityReport, ModelError> {
    let domain = map
        .domain()
        .ok_or_else(|| ModelError::UnsupportedMap(map.label()))?;
    if grid.domain != domain {
        return Err(ModelError::CoordinateCount {
            expected: domain.dim(),
            got: grid.domain.dim(),
        });
    }
    let shape = grid.node_counts();
    let total = GridSpec::linear_len(&shape);

    let classified: Vec<Option<(Vec<u32>, Vec<f64>, (f64, f64), u8, SingularClass)>> = (0..total)
        .into_par_iter()
        .map(|lin| {
            let idx = GridSpec::delinearize(&shape, lin);
            let coords = grid.node_coords(&idx);
            if !grid.in_disk(&coords) {
                return Ok(None);
            }
            let j = jacobian_exact(map, &coords)?;
            let (s1, s2) = singular_values_2xd(&j);
            let (rank, class) = if s2 > opts.tolerance {
                (2u8, SingularClass::Regular)
            } else if s1 <= opts.tolerance {
                (0u8, SingularClass::DegenerateRank0)
            } else {
                (1u8, classify_rank1(map, &coords, opts.hessian_step)?)
            };
            Ok(Some((idx, coords, (s1, s2), rank, class)))
        })
        .collect::<Result<_, ModelError>>()?;

    let mut report = SingularityReport {
        map: map.label(),
        tolerance: opts.tolerance,
        resolutions: grid.resolutions.clone(),
        total_samples: 0,
        regular_count: 0,
        rank0_count: 0,
        fold_indefinite_count: 0,
        fold_definite_count: 0,
        fold_degenerate_count: 0,
        samples: Vec::new(),
    };
    for entry in classified.into_iter().flatten() {
        let (index, coords, sigma, rank, class) = entry;
        report.total_samples += 1;
        match class {
            SingularClass::Regular => report.regular_count += 1,
            SingularClass::DegenerateRank0 => report.rank0_count += 1,
            SingularClass::FoldIndefinite => report.fold_indefinite_count += 1,
            SingularClass::FoldDefinite => report.fold_definite_count += 1,
            SingularClass::FoldDegenerate => report.fold_degenerate_count += 1,
        }
        if class != SingularClass::Regular {
            report.samples.push(SingularSample {
                index,
                coords,
                sigma,
                rank,
                class,
            });
        }
    }
    Ok(report)
}
