//! Broken-fibration diagrams for elliptic surfaces with two multiple
//! fibers: Lefschetz critical images plus two nested groups of fold
//! circles on the base, with JSON and SVG emitters.
//!
//! The surface `E(n)_{p,q}` is drawn on an equatorial chart of the base
//! sphere as the unit square: the Lefschetz points sit on a horizontal row
//! in the outermost region, and each surgered fiber contributes one group
//! of `2(m - 1)` concentric fold circles whose region labels follow the
//! round-handle transition rules.

use crate::json;
use crate::pieces::{
    apply_transition, build_multiple_fiber, FiberComponent, FoldKind, PieceError, RegionFiber,
    ValidationCheck, ValidationReport,
};
use crate::surgery::gcd;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BlfError {
    #[error("multiplicities p = {p} and q = {q} share the factor {g}")]
    NotCoprime { p: i64, q: i64, g: i64 },
    #[error("invalid surface description: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Piece(#[from] PieceError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Which elliptic surface to draw. `lefschetz_count` defaults to `12 n`,
/// the count of an elliptic fibration with `n` nodal-fiber dozens; it is
/// caller-overridable configuration, not derived data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EllipticSurfaceSpec {
    pub n: i64,
    pub p: i64,
    pub q: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lefschetz_count: Option<i64>,
}

impl EllipticSurfaceSpec {
    pub fn new(n: i64, p: i64, q: i64) -> Self {
        EllipticSurfaceSpec {
            n,
            p,
            q,
            lefschetz_count: None,
        }
    }

    pub fn with_lefschetz_count(mut self, count: i64) -> Self {
        self.lefschetz_count = Some(count);
        self
    }

    pub fn resolved_lefschetz_count(&self) -> i64 {
        self.lefschetz_count.unwrap_or(12 * self.n)
    }

    pub fn validate(&self) -> Result<(), BlfError> {
        if self.n < 1 {
            return Err(BlfError::InvalidSpec(format!("n = {} must be >= 1", self.n)));
        }
        if self.p < 1 || self.q < 1 {
            return Err(BlfError::InvalidSpec(format!(
                "multiplicities p = {}, q = {} must be >= 1",
                self.p, self.q
            )));
        }
        let g = gcd(self.p, self.q);
        if g != 1 {
            return Err(BlfError::NotCoprime {
                p: self.p,
                q: self.q,
                g,
            });
        }
        if self.resolved_lefschetz_count() < 0 {
            return Err(BlfError::InvalidSpec(format!(
                "lefschetz count {} must be >= 0",
                self.resolved_lefschetz_count()
            )));
        }
        Ok(())
    }
}

/// One fold circle of a group, with the fiber labels on both sides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupCircle {
    pub kind: FoldKind,
    /// Radius in base-chart units, relative to the group center.
    pub radius: f64,
    pub outer_fiber: RegionFiber,
    pub inner_fiber: RegionFiber,
}

/// The concentric fold circles replacing one multiple fiber.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldGroup {
    pub multiplicity: i64,
    /// Center in the unit-square base chart.
    pub center: (f64, f64),
    /// Radius of the disk the group occupies.
    pub max_radius: f64,
    pub fold_circles: Vec<GroupCircle>,
    /// Region fibers outermost-first; entry 0 is the annulus at the group
    /// boundary, the last entry the innermost region.
    pub region_fibers: Vec<RegionFiber>,
}

impl FoldGroup {
    pub fn innermost(&self) -> &RegionFiber {
        self.region_fibers
            .last()
            .expect("a group has at least one region")
    }
}

/// The complete critical-image diagram on the base chart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BLFDiagram {
    pub spec: EllipticSurfaceSpec,
    pub lefschetz_points: Vec<(f64, f64)>,
    /// Fiber over the outermost region: one regular torus.
    pub outer_fiber: RegionFiber,
    pub fold_groups: [FoldGroup; 2],
}

const GROUP_CENTERS: [(f64, f64); 2] = [(0.3, 0.55), (0.7, 0.55)];
const GROUP_MAX_RADIUS: f64 = 0.12;
const LEFSCHETZ_ROW_Y: f64 = 0.15;

fn fold_group(multiplicity: i64, center: (f64, f64)) -> Result<FoldGroup, BlfError> {
    let complex = build_multiple_fiber(multiplicity)?;
    let count = complex.base_diagram.len();
    let fold_circles = complex
        .base_diagram
        .iter()
        .enumerate()
        .map(|(i, fc)| GroupCircle {
            kind: fc.kind,
            radius: GROUP_MAX_RADIUS * (count - i) as f64 / count as f64,
            outer_fiber: complex.region_fibers[i].clone(),
            inner_fiber: complex.region_fibers[i + 1].clone(),
        })
        .collect();
    Ok(FoldGroup {
        multiplicity,
        center,
        max_radius: GROUP_MAX_RADIUS,
        fold_circles,
        region_fibers: complex.region_fibers,
    })
}

/// Assemble the diagram: Lefschetz points on a row in the outer region and
/// one fold group per surgered fiber, on opposite sides of the chart.
pub fn build_blf(spec: EllipticSurfaceSpec) -> Result<BLFDiagram, BlfError> {
    spec.validate()?;
    let count = spec.resolved_lefschetz_count();
    let lefschetz_points = (0..count)
        .map(|j| ((j + 1) as f64 / (count + 1) as f64, LEFSCHETZ_ROW_Y))
        .collect();
    Ok(BLFDiagram {
        spec,
        lefschetz_points,
        outer_fiber: RegionFiber::new(vec![FiberComponent::surface(1, 1)]),
        fold_groups: [
            fold_group(spec.p, GROUP_CENTERS[0])?,
            fold_group(spec.q, GROUP_CENTERS[1])?,
        ],
    })
}

fn check(name: &str, pass: bool, detail: String) -> ValidationCheck {
    ValidationCheck {
        name: name.to_string(),
        pass,
        detail,
    }
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

/// Re-check every stored claim of the diagram: parameter sanity, circle
/// counts, the transition replay inside each group, nesting, innermost
/// regions, and the placement rules for Lefschetz points and groups.
pub fn validate_blf(d: &BLFDiagram) -> ValidationReport {
    let mut checks = Vec::new();

    let spec_ok = d.spec.validate().is_ok()
        && d.lefschetz_points.len() as i64 == d.spec.resolved_lefschetz_count();
    checks.push(check(
        "spec_parameters",
        spec_ok,
        format!(
            "n={}, p={}, q={}, {} lefschetz points",
            d.spec.n,
            d.spec.p,
            d.spec.q,
            d.lefschetz_points.len()
        ),
    ));

    let expected = [d.spec.p, d.spec.q];
    for (gi, group) in d.fold_groups.iter().enumerate() {
        let m = expected[gi];
        let want = 2 * (m - 1).max(0) as usize;
        checks.push(check(
            "fold_circle_count",
            group.multiplicity == m && group.fold_circles.len() == want,
            format!("group {gi}: {} circles, expected {want}", group.fold_circles.len()),
        ));

        // Region chain consistency plus one legal transition per circle.
        let mut replay_ok = group.region_fibers.len() == group.fold_circles.len() + 1;
        let mut detail = String::from("all transitions legal");
        if !replay_ok {
            detail = String::from("region chain length mismatch");
        }
        for (i, circle) in group.fold_circles.iter().enumerate() {
            if !replay_ok {
                break;
            }
            if circle.outer_fiber != group.region_fibers[i]
                || circle.inner_fiber != group.region_fibers[i + 1]
            {
                replay_ok = false;
                detail = format!("group {gi} circle {i}: labels disagree with region chain");
                break;
            }
            let witnessed = circle.outer_fiber.components.iter().any(|comp| {
                apply_transition(4, circle.kind, comp).is_ok_and(|outs| {
                    let mut next: Vec<FiberComponent> = circle
                        .outer_fiber
                        .components
                        .iter()
                        .filter(|c| *c != comp)
                        .copied()
                        .collect();
                    // Only the first occurrence of `comp` is consumed.
                    let removed =
                        circle.outer_fiber.components.iter().filter(|c| *c == comp).count();
                    next.extend(std::iter::repeat(*comp).take(removed - 1));
                    next.extend(outs);
                    RegionFiber::new(next) == circle.inner_fiber
                })
            });
            if !witnessed {
                replay_ok = false;
                detail = format!("group {gi} circle {i}: no legal transition produces the inner fiber");
            }
        }
        checks.push(check("transition_replay", replay_ok, detail));

        let nested = group
            .fold_circles
            .windows(2)
            .all(|w| w[0].radius > w[1].radius)
            && group
                .fold_circles
                .iter()
                .all(|c| c.radius > 0.0 && c.radius <= group.max_radius);
        checks.push(check(
            "group_nesting",
            nested,
            format!("group {gi}: radii strictly decreasing within {}", group.max_radius),
        ));

        let innermost = group.innermost();
        let innermost_ok = innermost.component_count() as i64 == m
            && innermost.all_multiplicity_one()
            && innermost.components.iter().all(|c| c.genus == Some(1));
        checks.push(check(
            "innermost_region",
            innermost_ok,
            format!(
                "group {gi}: {} components, expected {m} multiplicity-1 tori",
                innermost.component_count()
            ),
        ));

        let outer_ok = group.region_fibers.first().is_some_and(|r| {
            r.component_count() == 1
                && r.components[0] == FiberComponent::surface(1, m as u32)
        });
        checks.push(check(
            "group_outer_region",
            outer_ok,
            format!("group {gi}: boundary annulus carries one multiplicity-{m} torus"),
        ));
    }

    let outer_ok = d.outer_fiber == RegionFiber::new(vec![FiberComponent::surface(1, 1)]);
    checks.push(check(
        "outer_region",
        outer_ok,
        "outermost fiber is one regular torus".to_string(),
    ));

    let placement_ok = d.lefschetz_points.iter().all(|pt| {
        d.fold_groups
            .iter()
            .all(|g| dist(*pt, g.center) > g.max_radius)
    });
    checks.push(check(
        "lefschetz_placement",
        placement_ok,
        "all critical points lie outside both fold groups".to_string(),
    ));

    let [g0, g1] = &d.fold_groups;
    let disjoint = dist(g0.center, g1.center) > g0.max_radius + g1.max_radius;
    checks.push(check(
        "group_disjointness",
        disjoint,
        format!(
            "centers {:.3} apart, radii sum {:.3}",
            dist(g0.center, g1.center),
            g0.max_radius + g1.max_radius
        ),
    ));

    ValidationReport {
        pass: checks.iter().all(|c| c.pass),
        checks,
    }
}

/// Pixel geometry of the SVG rendering.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayoutOptions {
    pub width: u32,
    pub height: u32,
    pub stroke_width: f64,
    /// Half-diagonal of an x-mark, in pixels.
    pub mark_arm: f64,
}

impl Default for LayoutOptions {
    fn default() -> Self {
        LayoutOptions {
            width: 640,
            height: 400,
            stroke_width: 2.0,
            mark_arm: 5.0,
        }
    }
}

const FOLD_COLOR: &str = "#d62728";
const LEFSCHETZ_COLOR: &str = "#1f77b4";

/// Render the diagram as a self-contained SVG document. Output is a pure
/// function of diagram and layout, byte for byte.
pub fn emit_svg(d: &BLFDiagram, layout: &LayoutOptions) -> String {
    let w = f64::from(layout.width);
    let h = f64::from(layout.height);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">",
        layout.width, layout.height, layout.width, layout.height
    );
    let _ = writeln!(
        svg,
        "<rect width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>",
        layout.width, layout.height
    );

    let _ = writeln!(
        svg,
        "<g stroke=\"{FOLD_COLOR}\" fill=\"none\" stroke-width=\"{:.2}\">",
        layout.stroke_width
    );
    for group in &d.fold_groups {
        let cx = group.center.0 * w;
        let cy = group.center.1 * h;
        for circle in &group.fold_circles {
            let class = match circle.kind {
                FoldKind::Round1Handle => "fold round_1_handle",
                FoldKind::Round2Handle => "fold round_2_handle",
            };
            let _ = writeln!(
                svg,
                "<circle class=\"{class}\" cx=\"{cx:.2}\" cy=\"{cy:.2}\" r=\"{:.2}\"/>",
                circle.radius * h
            );
        }
    }
    svg.push_str("</g>\n");

    let _ = writeln!(
        svg,
        "<g stroke=\"{LEFSCHETZ_COLOR}\" stroke-width=\"{:.2}\" stroke-linecap=\"round\">",
        layout.stroke_width
    );
    let s = layout.mark_arm;
    for (px, py) in &d.lefschetz_points {
        let x = px * w;
        let y = py * h;
        let _ = writeln!(
            svg,
            "<path class=\"lefschetz\" d=\"M {:.2} {:.2} L {:.2} {:.2} M {:.2} {:.2} L {:.2} {:.2}\"/>",
            x - s,
            y - s,
            x + s,
            y + s,
            x + s,
            y - s,
            x - s,
            y + s
        );
    }
    svg.push_str("</g>\n</svg>\n");
    svg
}

/// Canonical JSON text of the diagram; see [`crate::json`].
pub fn emit_json(d: &BLFDiagram) -> Result<String, BlfError> {
    Ok(json::to_canonical_string(d)?)
}

/// Inverse of [`emit_json`].
pub fn parse_json(text: &str) -> Result<BLFDiagram, BlfError> {
    Ok(serde_json::from_str(text)?)
}
