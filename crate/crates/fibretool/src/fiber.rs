//! Grid-based fiber tracing for the model maps.
//!
//! A fiber approximation marks every grid cell whose center value lies
//! within a thickness `delta` of the target value `w`, then groups marked
//! cells into connected components under face adjacency (with wraparound on
//! angle axes).
//!
//! **Thickness policy.** With an explicit `delta` on the [`GridSpec`] the
//! marking is the uniform test `|f(center) - w| < delta`. By default the
//! thickness is *adaptive*: a cell is marked when
//!
//! ```text
//! |f(center) - w| < safety * sum_i |df/dx_i(center)| * step_i / 2
//! ```
//!
//! i.e. when the first-order variation of `f` across the cell can reach `w`.
//! A single global thickness large enough to cover every cell the fiber
//! passes through is, at the default resolutions, already larger than the
//! gap `|f(0) - w|` that separates distinct root clusters of the higher
//! multiplicity maps, so a uniform default would fuse clusters that the
//! adaptive test keeps apart. The reported `effective_delta` is the largest
//! local threshold that fired.
//!
//! **Core cells vs. shell.** Cells marked only thanks to the `safety`
//! factor form a shell around the cells whose first-order range genuinely
//! reaches `w`. The shell is what keeps the component count stable, but it
//! carries no evidence of a root, so the slice statistics
//! ([`slice_multiplicity`], [`core_winding`], [`fiber_stats`]) cluster core
//! cells only.
//!
//! **Singular guard.** Tracing a critical value is rejected by default: if
//! any corner node of a marked cell has a rank-deficient Jacobian the trace
//! fails with [`TraceError::ToleranceTooCoarse`] (opt in via
//! [`TraceOptions::allow_singular`]).

use crate::grid::{AxisKind, DomainKind, GridSpec};
use crate::maps::{jacobian_exact, singular_values_2xd, MapId, ModelError};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TraceError {
    #[error("no grid cell matched the target value")]
    EmptyFiber,
    #[error("{0} marked cells touch the singular set; refine the grid, shrink delta, or allow singular tracing")]
    ToleranceTooCoarse(usize),
    #[error("slice meets a singular cell; the slice is not transverse")]
    NonTransverseSlice,
    #[error("fiber has {0} components; winding needs exactly one")]
    MultiComponent(u32),
    #[error("cluster continuation between slices {0} and {1} is ambiguous at this resolution")]
    AmbiguousTraversal(u32, u32),
    #[error("expected {expected} angle values for the slice, got {got}")]
    SliceArity { expected: usize, got: usize },
    #[error("domain has no angle axes; slices are taken at fixed angles")]
    NoAngleAxes,
    #[error("target |w| = {0} is outside the open unit disk")]
    TargetOutsideDisk(f64),
    #[error("grid domain {got:?} does not match the map domain {expected:?}")]
    DomainMismatch {
        expected: DomainKind,
        got: DomainKind,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// How cells were marked.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarkingPolicy {
    Uniform { delta: f64 },
    Adaptive { safety: f64 },
}

/// Knobs for [`trace_fiber_with`].
#[derive(Debug, Clone, Copy)]
pub struct TraceOptions {
    /// Accept marked cells whose corners are rank-deficient.
    pub allow_singular: bool,
    /// Rank tolerance for the singular guard and transversality checks.
    pub rank_tolerance: f64,
    /// Safety factor of the adaptive thickness.
    pub safety: f64,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions {
            allow_singular: false,
            rank_tolerance: 1e-8,
            safety: 1.5,
        }
    }
}

/// A thickened preimage `f^{-1}(w)` on a cell grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberApproximation {
    pub map: MapId,
    pub grid: GridSpec,
    /// Target value (the plane target is read as `re + i*im`).
    pub target: Complex64,
    pub policy: MarkingPolicy,
    /// Largest marking threshold that fired (equals `delta` when uniform).
    pub effective_delta: f64,
    /// Linearized (row-major over `grid.resolutions`) indices of marked
    /// cells, ascending.
    pub cells: Vec<u64>,
    /// Component id of each marked cell, parallel to `cells`; ids are dense
    /// and numbered in order of first appearance.
    pub components: Vec<u32>,
    pub component_count: u32,
}

impl FiberApproximation {
    pub fn multi_index(&self, cell: u64) -> Vec<u32> {
        GridSpec::delinearize(&self.grid.resolutions, cell as usize)
    }

    /// CSV dump of marked cell centers: one row per cell, coordinates then
    /// component id. Rows follow the ascending cell order.
    pub fn cells_csv(&self) -> String {
        let dim = self.grid.domain.dim();
        let mut out = String::new();
        for a in 0..dim {
            out.push_str(&format!("c{a},"));
        }
        out.push_str("component\n");
        for (cell, comp) in self.cells.iter().zip(&self.components) {
            let idx = self.multi_index(*cell);
            for (a, i) in idx.iter().enumerate() {
                out.push_str(&format!("{:.17e},", self.grid.cell_center(a, *i)));
            }
            out.push_str(&format!("{comp}\n"));
        }
        out
    }
}

struct UnionFind {
    parent: Vec<u32>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, i: u32) -> u32 {
        let mut root = i;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        let mut cur = i;
        while self.parent[cur as usize] != root {
            let next = self.parent[cur as usize];
            self.parent[cur as usize] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra as usize].cmp(&self.rank[rb as usize]) {
            std::cmp::Ordering::Less => self.parent[ra as usize] = rb,
            std::cmp::Ordering::Greater => self.parent[rb as usize] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb as usize] = ra;
                self.rank[ra as usize] += 1;
            }
        }
    }
}

fn target_in_range(map: &MapId, w: Complex64) -> Result<(), TraceError> {
    match map {
        MapId::MultipleFiber { .. } | MapId::Seifert { .. } => {
            if w.norm() >= 1.0 {
                return Err(TraceError::TargetOutsideDisk(w.norm()));
            }
        }
        _ => {}
    }
    Ok(())
}

/// Trace with default options.
pub fn trace_fiber(
    map: &MapId,
    w: Complex64,
    grid: &GridSpec,
) -> Result<FiberApproximation, TraceError> {
    trace_fiber_with(map, w, grid, &TraceOptions::default())
}

/// Mark cells whose centers approximate `f = w` and split them into face
/// connected components. Marking decisions are per-cell, so the result is
/// independent of the number of worker threads.
pub fn trace_fiber_with(
    map: &MapId,
    w: Complex64,
    grid: &GridSpec,
    opts: &TraceOptions,
) -> Result<FiberApproximation, TraceError> {
    let domain = map
        .domain()
        .ok_or_else(|| ModelError::UnsupportedMap(map.label()))?;
    if grid.domain != domain {
        return Err(TraceError::DomainMismatch {
            expected: domain,
            got: grid.domain,
        });
    }
    target_in_range(map, w)?;

    let shape = grid.cell_counts();
    let steps = grid.steps();
    let total = GridSpec::linear_len(&shape);
    let policy = match grid.delta {
        Some(delta) => MarkingPolicy::Uniform { delta },
        None => MarkingPolicy::Adaptive { safety: opts.safety },
    };

    // Per-cell marking; Some(threshold) when the cell is marked.
    let marked_thresholds: Vec<Option<f64>> = (0..total)
        .into_par_iter()
        .map(|lin| {
            let idx = GridSpec::delinearize(&shape, lin);
            let centers = grid.cell_centers(&idx);
            if !grid.in_disk(&centers) {
                return Ok(None);
            }
            let f = map.eval(&centers)?;
            let dist = (f - w).norm();
            let threshold = match policy {
                MarkingPolicy::Uniform { delta } => delta,
                MarkingPolicy::Adaptive { safety } => {
                    let j = jacobian_exact(map, &centers)?;
                    let mut bound = 0.0;
                    for (a, h) in steps.iter().enumerate() {
                        let col = (j[(0, a)].powi(2) + j[(1, a)].powi(2)).sqrt();
                        bound += col * h / 2.0;
                    }
                    safety * bound
                }
            };
            Ok((dist < threshold).then_some(threshold))
        })
        .collect::<Result<_, ModelError>>()?;

    let mut cells: Vec<u64> = Vec::new();
    let mut effective_delta: f64 = 0.0;
    for (lin, th) in marked_thresholds.iter().enumerate() {
        if let Some(th) = th {
            cells.push(lin as u64);
            effective_delta = effective_delta.max(*th);
        }
    }
    if cells.is_empty() {
        return Err(TraceError::EmptyFiber);
    }

    if !opts.allow_singular {
        let bad = singular_corner_count(map, grid, &cells, opts.rank_tolerance)?;
        if bad > 0 {
            return Err(TraceError::ToleranceTooCoarse(bad));
        }
    }

    // Face adjacency inside the marked set, wrapping angle axes.
    let pos_of: HashMap<u64, u32> = cells
        .iter()
        .enumerate()
        .map(|(i, c)| (*c, i as u32))
        .collect();
    let axes = grid.domain.axes();
    let mut uf = UnionFind::new(cells.len());
    for (i, cell) in cells.iter().enumerate() {
        let idx = GridSpec::delinearize(&shape, *cell as usize);
        for (a, kind) in axes.iter().enumerate() {
            let res = shape[a];
            // Only the +1 neighbor: the -1 link is the +1 of the other cell.
            let next = match kind {
                AxisKind::Angle => (idx[a] + 1) % res,
                AxisKind::Cartesian => {
                    if idx[a] + 1 >= res {
                        continue;
                    }
                    idx[a] + 1
                }
            };
            let mut nidx = idx.clone();
            nidx[a] = next;
            let nlin = GridSpec::linearize(&shape, &nidx) as u64;
            if let Some(&j) = pos_of.get(&nlin) {
                uf.union(i as u32, j);
            }
        }
    }

    let mut components = vec![0u32; cells.len()];
    let mut relabel: HashMap<u32, u32> = HashMap::new();
    for i in 0..cells.len() {
        let root = uf.find(i as u32);
        let next_id = relabel.len() as u32;
        let id = *relabel.entry(root).or_insert(next_id);
        components[i] = id;
    }

    Ok(FiberApproximation {
        map: map.clone(),
        grid: grid.clone(),
        target: w,
        policy,
        effective_delta,
        component_count: relabel.len() as u32,
        cells,
        components,
    })
}

/// Count marked cells having at least one rank-deficient corner node.
fn singular_corner_count(
    map: &MapId,
    grid: &GridSpec,
    cells: &[u64],
    tol: f64,
) -> Result<usize, TraceError> {
    let shape = grid.cell_counts();
    let node_shape = grid.node_counts();
    let axes = grid.domain.axes();
    let dim = axes.len();
    let counts: Vec<usize> = cells
        .par_iter()
        .map(|cell| {
            let idx = GridSpec::delinearize(&shape, *cell as usize);
            for corner in 0..(1usize << dim) {
                let mut node = idx.clone();
                for a in 0..dim {
                    if corner & (1 << a) != 0 {
                        node[a] = match axes[a] {
                            AxisKind::Angle => (node[a] + 1) % node_shape[a],
                            AxisKind::Cartesian => node[a] + 1,
                        };
                    }
                }
                let coords = grid.node_coords(&node);
                if !grid.in_disk(&coords) {
                    continue;
                }
                let j = jacobian_exact(map, &coords)?;
                let (_, s2) = singular_values_2xd(&j);
                if s2 <= tol {
                    return Ok(1usize);
                }
            }
            Ok(0usize)
        })
        .collect::<Result<Vec<usize>, ModelError>>()?;
    Ok(counts.into_iter().sum())
}

/// Angle values -> cell indices along the angle axes.
fn slice_indices(grid: &GridSpec, angles: &[f64]) -> Result<Vec<(usize, u32)>, TraceError> {
    let angle_axes = grid.domain.angle_axes();
    if angle_axes.is_empty() {
        return Err(TraceError::NoAngleAxes);
    }
    if angles.len() != angle_axes.len() {
        return Err(TraceError::SliceArity {
            expected: angle_axes.len(),
            got: angles.len(),
        });
    }
    Ok(angle_axes
        .iter()
        .zip(angles)
        .map(|(&a, angle)| {
            let res = grid.resolutions[a];
            let step = grid.step(a);
            let idx = ((angle.rem_euclid(std::f64::consts::TAU)) / step) as u32;
            (a, idx.min(res - 1))
        })
        .collect())
}

/// Whether a marked cell passes the first-order test with no safety margin,
/// i.e. the linearized value range over the cell certainly reaches the
/// target. Cells marked only thanks to the safety factor form a thin shell
/// that keeps the thickened fiber connected; they are not evidence of a
/// root and are excluded from slice statistics.
fn is_core_cell(fiber: &FiberApproximation, idx: &[u32]) -> Result<bool, TraceError> {
    let centers = fiber.grid.cell_centers(idx);
    let dist = (fiber.map.eval(&centers)? - fiber.target).norm();
    match fiber.policy {
        // An explicit delta is the caller's definition of the fiber set.
        MarkingPolicy::Uniform { delta } => Ok(dist < delta),
        MarkingPolicy::Adaptive { .. } => {
            let j = jacobian_exact(&fiber.map, &centers)?;
            let mut bound = 0.0;
            for (a, h) in fiber.grid.steps().iter().enumerate() {
                let col = (j[(0, a)].powi(2) + j[(1, a)].powi(2)).sqrt();
                bound += col * h / 2.0;
            }
            Ok(dist < bound)
        }
    }
}

/// Cluster the core cells of one fixed-angle slice by adjacency in the
/// remaining (Cartesian) axes, diagonals included — the usual connectivity
/// for foreground objects of a 2-D raster, so a ragged cluster edge cannot
/// split off single-cell islands. Returns clusters as sorted cell-index
/// sets, ordered by their smallest member.
fn slice_clusters(
    fiber: &FiberApproximation,
    fixed: &[(usize, u32)],
) -> Result<Vec<Vec<u64>>, TraceError> {
    let grid = &fiber.grid;
    let shape = grid.cell_counts();
    let free_axes: Vec<usize> = (0..shape.len())
        .filter(|a| !fixed.iter().any(|(fa, _)| fa == a))
        .collect();

    let mut members: Vec<u64> = Vec::new();
    for cell in fiber.cells.iter().copied() {
        let idx = GridSpec::delinearize(&shape, cell as usize);
        if fixed.iter().all(|(a, v)| idx[*a] == *v) && is_core_cell(fiber, &idx)? {
            members.push(cell);
        }
    }
    let pos_of: HashMap<u64, u32> = members
        .iter()
        .enumerate()
        .map(|(i, c)| (*c, i as u32))
        .collect();

    // Offsets in {-1,0,1}^free with a positive leading component; the
    // mirror image of each link is supplied by the other endpoint.
    let mut offsets: Vec<Vec<i64>> = Vec::new();
    let mut stack: Vec<Vec<i64>> = vec![Vec::new()];
    while let Some(partial) = stack.pop() {
        if partial.len() == free_axes.len() {
            if partial.iter().any(|&d| d != 0)
                && *partial.iter().find(|&&d| d != 0).unwrap() > 0
            {
                offsets.push(partial);
            }
            continue;
        }
        for d in [-1i64, 0, 1] {
            let mut next = partial.clone();
            next.push(d);
            stack.push(next);
        }
    }

    let mut uf = UnionFind::new(members.len());
    for (i, cell) in members.iter().enumerate() {
        let idx = GridSpec::delinearize(&shape, *cell as usize);
        'offset: for off in &offsets {
            let mut nidx = idx.clone();
            for (&a, &d) in free_axes.iter().zip(off) {
                let moved = i64::from(nidx[a]) + d;
                if moved < 0 || moved >= i64::from(shape[a]) {
                    continue 'offset;
                }
                nidx[a] = moved as u32;
            }
            let nlin = GridSpec::linearize(&shape, &nidx) as u64;
            if let Some(&j) = pos_of.get(&nlin) {
                uf.union(i as u32, j);
            }
        }
    }
    let mut clusters: HashMap<u32, Vec<u64>> = HashMap::new();
    for (i, cell) in members.iter().enumerate() {
        clusters.entry(uf.find(i as u32)).or_default().push(*cell);
    }
    let mut out: Vec<Vec<u64>> = clusters.into_values().collect();
    for c in &mut out {
        c.sort_unstable();
    }
    out.sort_by_key(|c| c[0]);
    Ok(out)
}

/// Number of disjoint root clusters of the fiber over one fixed-angle slice
/// disk. For a regular fiber of `seifert(p, q)` or `multiple_fiber(p, k)`
/// this is exactly `p`.
///
/// Only core cells count (see [`is_core_cell`]): the safety shell of the
/// adaptive marking can bridge or fringe root clusters on steep maps, and
/// a root is always witnessed by a core cell.
pub fn slice_multiplicity(
    fiber: &FiberApproximation,
    angles: &[f64],
) -> Result<u32, TraceError> {
    let fixed = slice_indices(&fiber.grid, angles)?;
    let clusters = slice_clusters(fiber, &fixed)?;

    // Transversality: the slice must not meet rank-deficient cells.
    let shape = fiber.grid.cell_counts();
    let tol = TraceOptions::default().rank_tolerance;
    for cluster in &clusters {
        for cell in cluster {
            let idx = GridSpec::delinearize(&shape, *cell as usize);
            let coords = fiber.grid.cell_centers(&idx);
            let j = jacobian_exact(&fiber.map, &coords)?;
            let (_, s2) = singular_values_2xd(&j);
            if s2 <= tol {
                return Err(TraceError::NonTransverseSlice);
            }
        }
    }
    Ok(clusters.len() as u32)
}

/// Covering degree of a connected fiber over the base circle direction
/// (`u` on a solid torus, `xi_2` on `T^2 x D^2`).
///
/// The slice angle advances one cell at a time; clusters of consecutive
/// slices are matched by overlap in the disk coordinates, which yields a
/// permutation of the starting clusters after a full turn. The winding is
/// the orbit length of that permutation — the number of turns needed to
/// come back to the starting cluster.
pub fn core_winding(fiber: &FiberApproximation) -> Result<u32, TraceError> {
    if fiber.component_count != 1 {
        return Err(TraceError::MultiComponent(fiber.component_count));
    }
    let grid = &fiber.grid;
    let travel_axis = match grid.domain {
        DomainKind::SolidTorus => 0usize,
        DomainKind::TorusTimesDisk => 1usize,
        DomainKind::Box { .. } => return Err(TraceError::NoAngleAxes),
    };
    // Any other angle axes stay fixed at index 0.
    let other_fixed: Vec<(usize, u32)> = grid
        .domain
        .angle_axes()
        .into_iter()
        .filter(|a| *a != travel_axis)
        .map(|a| (a, 0u32))
        .collect();

    let res = grid.resolutions[travel_axis];
    // Disk footprint of each cluster in each slice.
    let shape = grid.cell_counts();
    let disk_axes: Vec<usize> = (0..shape.len())
        .filter(|a| *a != travel_axis && !other_fixed.iter().any(|(fa, _)| fa == a))
        .collect();
    let footprint = |cluster: &[u64]| -> Vec<u64> {
        let mut fp: Vec<u64> = cluster
            .iter()
            .map(|cell| {
                let idx = GridSpec::delinearize(&shape, *cell as usize);
                let mut key = 0u64;
                for &a in &disk_axes {
                    key = key * u64::from(shape[a]) + u64::from(idx[a]);
                }
                key
            })
            .collect();
        fp.sort_unstable();
        fp.dedup();
        fp
    };

    let per_slice: Vec<Vec<Vec<u64>>> = (0..res)
        .map(|j| {
            let mut fixed = other_fixed.clone();
            fixed.push((travel_axis, j));
            Ok(slice_clusters(fiber, &fixed)?
                .iter()
                .map(|c| footprint(c))
                .collect())
        })
        .collect::<Result<_, TraceError>>()?;
    if per_slice.iter().any(|s| s.is_empty()) {
        return Err(TraceError::EmptyFiber);
    }

    // Successor map from slice j to slice j+1 by footprint overlap.
    let overlap = |a: &[u64], b: &[u64]| -> bool {
        let (mut i, mut j) = (0usize, 0usize);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return true,
            }
        }
        false
    };
    let mut successors: Vec<Vec<u32>> = Vec::with_capacity(res as usize);
    for j in 0..res {
        let cur = &per_slice[j as usize];
        let next = &per_slice[((j + 1) % res) as usize];
        let mut sigma = Vec::with_capacity(cur.len());
        let mut hit = vec![false; next.len()];
        for c in cur {
            let matches: Vec<u32> = next
                .iter()
                .enumerate()
                .filter(|(_, n)| overlap(c, n))
                .map(|(i, _)| i as u32)
                .collect();
            if matches.len() != 1 {
                return Err(TraceError::AmbiguousTraversal(j, (j + 1) % res));
            }
            if hit[matches[0] as usize] {
                return Err(TraceError::AmbiguousTraversal(j, (j + 1) % res));
            }
            hit[matches[0] as usize] = true;
            sigma.push(matches[0]);
        }
        if hit.iter().any(|h| !h) {
            return Err(TraceError::AmbiguousTraversal(j, (j + 1) % res));
        }
        successors.push(sigma);
    }

    // Follow cluster 0 around the circle until it returns.
    let start_count = per_slice[0].len() as u32;
    let mut current = 0u32;
    let mut turns = 0u32;
    loop {
        for sigma in &successors {
            current = sigma[current as usize];
        }
        turns += 1;
        if current == 0 {
            break;
        }
        if turns > start_count {
            return Err(TraceError::AmbiguousTraversal(0, 0));
        }
    }
    // A connected fiber visits every starting cluster.
    if turns != start_count {
        return Err(TraceError::AmbiguousTraversal(0, 0));
    }
    Ok(turns)
}

/// Headline numbers of a fiber approximation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberStats {
    pub component_count: u32,
    /// Root clusters over the zero-angle reference slice, one entry per
    /// component (components without cells in that slice report 0). Empty
    /// when the domain has no angle axes to slice along.
    pub slice_multiplicities: Vec<u32>,
    /// Total clusters in the reference slice; absent without angle axes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slice_multiplicity_total: Option<u32>,
    /// Covering degree over the base circle; only for connected fibers
    /// over domains with a circle direction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub core_winding: Option<u32>,
}

/// Compute stats at the all-zero-angles reference slice.
pub fn fiber_stats(fiber: &FiberApproximation) -> Result<FiberStats, TraceError> {
    let n_angles = fiber.grid.domain.angle_axes().len();
    if n_angles == 0 {
        return Ok(FiberStats {
            component_count: fiber.component_count,
            slice_multiplicities: Vec::new(),
            slice_multiplicity_total: None,
            core_winding: None,
        });
    }
    let angles = vec![0.0; n_angles];
    let fixed = slice_indices(&fiber.grid, &angles)?;
    let clusters = slice_clusters(fiber, &fixed)?;
    let total = clusters.len() as u32;

    // Component of each cluster (clusters are connected, so any cell works).
    let mut per_component = vec![0u32; fiber.component_count as usize];
    for cluster in &clusters {
        let pos = fiber.cells.binary_search(&cluster[0]).expect("cluster cell is marked");
        per_component[fiber.components[pos] as usize] += 1;
    }
    let winding = if fiber.component_count == 1 {
        Some(core_winding(fiber)?)
    } else {
        None
    };
    Ok(FiberStats {
        component_count: fiber.component_count,
        slice_multiplicities: per_component,
        slice_multiplicity_total: Some(total),
        core_winding: winding,
    })
}
