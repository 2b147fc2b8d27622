//! Fibered piece complexes: collars, round handles, and trivial fillings
//! glued along fibered boundary tori.
//!
//! A complex records a "movie" over the disk: nested fold circles divide the
//! base into annular regions, the fiber over each region is a multiset of
//! components, and crossing a fold circle applies one elementary transition:
//!
//! * dimension 3, round 1-handle: a circle of multiplicity `m >= 2` becomes
//!   two circles of multiplicities `1` and `m - 1`;
//! * dimension 4, round 1-handle: a component of multiplicity `m >= 2` gains
//!   one genus;
//! * dimension 4, round 2-handle: a component of genus `g >= 2` and
//!   multiplicity `m >= 2` splits into two components of genus `g - 1` with
//!   multiplicities `1` and `m - 1`.
//!
//! The builders assemble the two standard complexes — the solid-torus
//! exceptional-fiber replacement and its four-dimensional multiple-fiber
//! analogue — and `validate_complex` re-derives every region fiber by
//! replaying transitions, so a mutated complex is caught by the replay
//! rather than by trusting stored labels.

use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PieceError {
    #[error("multiplicity {0} is not a positive integer")]
    InvalidMultiplicity(i64),
}

/// The five building blocks. Every kind has Euler characteristic zero:
/// collars and round pieces are circle bundles over intervals or handles,
/// and both trivial fillings are products with odd-dimensional factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PieceKind {
    #[serde(rename = "boundary_collar")]
    BoundaryCollar,
    #[serde(rename = "round_1_handle")]
    Round1Handle,
    #[serde(rename = "round_2_handle")]
    Round2Handle,
    #[serde(rename = "trivial_solid_torus")]
    TrivialSolidTorus,
    #[serde(rename = "trivial_T2xD2")]
    TrivialT2xD2,
}

impl PieceKind {
    pub fn euler_characteristic(self) -> i64 {
        match self {
            // S^1 x (anything), T^2 x I, S^1 x D^2, T^2 x D^2: all chi = 0.
            PieceKind::BoundaryCollar
            | PieceKind::Round1Handle
            | PieceKind::Round2Handle
            | PieceKind::TrivialSolidTorus
            | PieceKind::TrivialT2xD2 => 0,
        }
    }

    pub fn allowed_in_dimension(self, dim: u8) -> bool {
        match self {
            PieceKind::BoundaryCollar | PieceKind::Round1Handle => dim == 3 || dim == 4,
            PieceKind::Round2Handle | PieceKind::TrivialT2xD2 => dim == 4,
            PieceKind::TrivialSolidTorus => dim == 3,
        }
    }

    pub fn is_round(self) -> bool {
        matches!(self, PieceKind::Round1Handle | PieceKind::Round2Handle)
    }

    pub fn is_filling(self) -> bool {
        matches!(self, PieceKind::TrivialSolidTorus | PieceKind::TrivialT2xD2)
    }
}

/// Tag of a fold circle in the base diagram.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FoldKind {
    #[serde(rename = "round_1_handle")]
    Round1Handle,
    #[serde(rename = "round_2_handle")]
    Round2Handle,
}

impl FoldKind {
    pub fn piece_kind(self) -> PieceKind {
        match self {
            FoldKind::Round1Handle => PieceKind::Round1Handle,
            FoldKind::Round2Handle => PieceKind::Round2Handle,
        }
    }
}

/// One fiber component: a circle (dimension 3, `genus` absent) or a closed
/// surface (dimension 4), wrapping `multiplicity` times around the base
/// circle direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FiberComponent {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub genus: Option<u32>,
    pub multiplicity: u32,
}

impl FiberComponent {
    pub fn circle(multiplicity: u32) -> Self {
        FiberComponent {
            genus: None,
            multiplicity,
        }
    }

    pub fn surface(genus: u32, multiplicity: u32) -> Self {
        FiberComponent {
            genus: Some(genus),
            multiplicity,
        }
    }
}

/// The fiber over one region: an unordered multiset of components, stored
/// sorted so that equality is multiset equality.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionFiber {
    pub components: Vec<FiberComponent>,
}

impl RegionFiber {
    pub fn new(mut components: Vec<FiberComponent>) -> Self {
        components.sort_unstable();
        RegionFiber { components }
    }

    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    pub fn all_multiplicity_one(&self) -> bool {
        self.components.iter().all(|c| c.multiplicity == 1)
    }

    /// Sum of 2 - 2g over surface components (zero in dimension 3, where
    /// circle fibers contribute nothing).
    pub fn euler_characteristic(&self) -> i64 {
        self.components
            .iter()
            .map(|c| c.genus.map_or(0, |g| 2 - 2 * i64::from(g)))
            .sum()
    }

    pub fn total_genus(&self) -> u32 {
        self.components.iter().map(|c| c.genus.unwrap_or(0)).sum()
    }
}

/// A building block plus the fiber component over each of its boundary
/// tori. Slot 0 faces outward (toward the disk boundary); the remaining
/// slots face inward.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberedPiece {
    pub kind: PieceKind,
    pub dimension: u8,
    pub label: String,
    pub boundary: Vec<FiberComponent>,
}

/// A fold circle of the base diagram, outermost first, pointing at the
/// round piece attached along it. `radius` places it in the unit disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldCircle {
    pub kind: FoldKind,
    pub piece: u32,
    pub radius: f64,
}

/// An identification of two boundary tori. `slope` records how the glued
/// piece's fibration sits on the torus when that is known; the trivial
/// fillings are fibered by (1,1) curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gluing {
    pub piece_a: u32,
    pub slot_a: u32,
    pub piece_b: u32,
    pub slot_b: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope: Option<(i64, i64)>,
}

/// The assembled complex. Region 0 is the outermost annulus, adjacent to
/// the disk boundary; region `i + 1` lies inside fold circle `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PieceComplex {
    pub dimension: u8,
    pub pieces: Vec<FiberedPiece>,
    pub gluings: Vec<Gluing>,
    pub base_diagram: Vec<FoldCircle>,
    pub region_fibers: Vec<RegionFiber>,
}

impl PieceComplex {
    pub fn fold_circle_count(&self) -> usize {
        self.base_diagram.len()
    }

    pub fn innermost_region(&self) -> &RegionFiber {
        self.region_fibers.last().expect("a complex has at least one region")
    }
}

/// Fiber components produced when `input` crosses a fold circle of the
/// given kind, or a description of why the crossing is illegal.
pub fn apply_transition(
    dimension: u8,
    kind: FoldKind,
    input: &FiberComponent,
) -> Result<Vec<FiberComponent>, String> {
    match (dimension, kind) {
        (3, FoldKind::Round1Handle) => {
            if input.genus.is_some() {
                return Err("circle fibers cannot carry genus".into());
            }
            if input.multiplicity < 2 {
                return Err(format!(
                    "multiplicity {} cannot split; need at least 2",
                    input.multiplicity
                ));
            }
            Ok(vec![
                FiberComponent::circle(1),
                FiberComponent::circle(input.multiplicity - 1),
            ])
        }
        (3, FoldKind::Round2Handle) => {
            Err("round 2-handles do not occur in three-dimensional complexes".into())
        }
        (4, FoldKind::Round1Handle) => {
            let g = input.genus.ok_or("surface fibers need a genus")?;
            if input.multiplicity < 2 {
                return Err(format!(
                    "multiplicity {} component is already finished",
                    input.multiplicity
                ));
            }
            Ok(vec![FiberComponent::surface(g + 1, input.multiplicity)])
        }
        (4, FoldKind::Round2Handle) => {
            let g = input.genus.ok_or("surface fibers need a genus")?;
            if g < 2 {
                return Err(format!("no genus-{g} component can split; need genus >= 2"));
            }
            if input.multiplicity < 2 {
                return Err(format!(
                    "multiplicity {} cannot split; need at least 2",
                    input.multiplicity
                ));
            }
            Ok(vec![
                FiberComponent::surface(g - 1, 1),
                FiberComponent::surface(g - 1, input.multiplicity - 1),
            ])
        }
        (d, _) => Err(format!("unsupported dimension {d}")),
    }
}

/// Replace one occurrence of `input` in `region` by `outputs`.
fn step_region(
    region: &RegionFiber,
    input: &FiberComponent,
    outputs: &[FiberComponent],
) -> Result<RegionFiber, String> {
    let mut components = region.components.clone();
    let pos = components
        .iter()
        .position(|c| c == input)
        .ok_or_else(|| format!("region has no component {input:?}"))?;
    components.remove(pos);
    components.extend_from_slice(outputs);
    Ok(RegionFiber::new(components))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationCheck {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub pass: bool,
    pub checks: Vec<ValidationCheck>,
}

impl ValidationReport {
    fn from_checks(checks: Vec<ValidationCheck>) -> Self {
        ValidationReport {
            pass: checks.iter().all(|c| c.pass),
            checks,
        }
    }

    pub fn first_failure(&self) -> Option<&ValidationCheck> {
        self.checks.iter().find(|c| !c.pass)
    }
}

fn check(name: &str, pass: bool, detail: String) -> ValidationCheck {
    ValidationCheck {
        name: name.to_string(),
        pass,
        detail,
    }
}

/// Re-derive every stored invariant of the complex from first principles:
/// piece kinds against the dimension, the fold-circle ledger, a transition
/// replay of all region fibers, gluing completeness with matching fiber
/// labels, the Euler-characteristic sum, and the innermost-region contract.
pub fn validate_complex(c: &PieceComplex) -> ValidationReport {
    let mut checks = Vec::new();

    // Piece kinds and dimensions.
    let dim_ok = c.dimension == 3 || c.dimension == 4;
    let kinds_ok = c
        .pieces
        .iter()
        .all(|p| p.dimension == c.dimension && p.kind.allowed_in_dimension(c.dimension));
    let collar_count = c
        .pieces
        .iter()
        .filter(|p| p.kind == PieceKind::BoundaryCollar)
        .count();
    checks.push(check(
        "piece_kinds",
        dim_ok && kinds_ok && collar_count == 1,
        format!(
            "dimension {}, {} pieces, {} collar(s)",
            c.dimension,
            c.pieces.len(),
            collar_count
        ),
    ));

    // Fold circles vs round pieces.
    let round_pieces: Vec<u32> = c
        .pieces
        .iter()
        .enumerate()
        .filter(|(_, p)| p.kind.is_round())
        .map(|(i, _)| i as u32)
        .collect();
    let mut seen = vec![false; c.pieces.len()];
    let circles_ok = c.base_diagram.len() == round_pieces.len()
        && c.base_diagram.iter().all(|fc| {
            let ok = (fc.piece as usize) < c.pieces.len()
                && !std::mem::replace(&mut seen[fc.piece as usize], true)
                && c.pieces[fc.piece as usize].kind == fc.kind.piece_kind();
            ok
        });
    checks.push(check(
        "fold_circles",
        circles_ok,
        format!(
            "{} fold circles over {} round pieces",
            c.base_diagram.len(),
            round_pieces.len()
        ),
    ));

    // Region count.
    let regions_ok = c.region_fibers.len() == c.base_diagram.len() + 1;
    checks.push(check(
        "region_count",
        regions_ok,
        format!(
            "{} regions for {} circles",
            c.region_fibers.len(),
            c.base_diagram.len()
        ),
    ));

    // Transition replay: recompute each region from the previous one.
    let mut replay_ok = regions_ok && !c.region_fibers.is_empty();
    let mut replay_detail = String::from("all transitions legal");
    if replay_ok {
        let mut current = c.region_fibers[0].clone();
        for (i, fc) in c.base_diagram.iter().enumerate() {
            let piece = match c.pieces.get(fc.piece as usize) {
                Some(p) => p,
                None => {
                    replay_ok = false;
                    replay_detail = format!("circle {i} references a missing piece");
                    break;
                }
            };
            let input = match piece.boundary.first() {
                Some(b) => *b,
                None => {
                    replay_ok = false;
                    replay_detail = format!("circle {i}: round piece has no outer slot");
                    break;
                }
            };
            let next = apply_transition(c.dimension, fc.kind, &input)
                .and_then(|outs| step_region(&current, &input, &outs));
            match next {
                Ok(next) => {
                    if next != c.region_fibers[i + 1] {
                        replay_ok = false;
                        replay_detail = format!(
                            "region {} mismatch: replay gives {:?}, stored {:?}",
                            i + 1,
                            next,
                            c.region_fibers[i + 1]
                        );
                        break;
                    }
                    current = next;
                }
                Err(e) => {
                    replay_ok = false;
                    replay_detail = format!("circle {i}: {e}");
                    break;
                }
            }
        }
    } else {
        replay_detail = String::from("region list inconsistent with circles");
    }
    checks.push(check("transition_replay", replay_ok, replay_detail));

    // Gluing completeness: every slot except the collar's outward slot is
    // used exactly once, and glued slots carry the same fiber component.
    let mut gluing_ok = true;
    let mut gluing_detail = String::from("all interior tori glued once, labels match");
    let mut used: Vec<Vec<u32>> = c.pieces.iter().map(|p| vec![0; p.boundary.len()]).collect();
    for g in &c.gluings {
        let ends = [(g.piece_a, g.slot_a), (g.piece_b, g.slot_b)];
        let mut labels = Vec::new();
        for (piece, slot) in ends {
            match c
                .pieces
                .get(piece as usize)
                .and_then(|p| p.boundary.get(slot as usize))
            {
                Some(comp) => {
                    labels.push(*comp);
                    used[piece as usize][slot as usize] += 1;
                }
                None => {
                    gluing_ok = false;
                    gluing_detail = format!("gluing references missing slot {piece}:{slot}");
                }
            }
        }
        if gluing_ok && labels.len() == 2 && labels[0] != labels[1] {
            gluing_ok = false;
            gluing_detail = format!(
                "gluing {}:{} - {}:{} joins different fibers {:?} vs {:?}",
                g.piece_a, g.slot_a, g.piece_b, g.slot_b, labels[0], labels[1]
            );
        }
        // Fillings are fibered by (1,1) curves on their boundary torus.
        let touches_filling = [g.piece_a, g.piece_b].iter().any(|p| {
            c.pieces
                .get(*p as usize)
                .is_some_and(|p| p.kind.is_filling())
        });
        if gluing_ok && touches_filling && g.slope != Some((1, 1)) {
            gluing_ok = false;
            gluing_detail = format!(
                "filling gluing {}:{} - {}:{} must record slope (1,1)",
                g.piece_a, g.slot_a, g.piece_b, g.slot_b
            );
        }
    }
    if gluing_ok {
        for (pi, piece) in c.pieces.iter().enumerate() {
            for (si, count) in used[pi].iter().enumerate() {
                let outward = piece.kind == PieceKind::BoundaryCollar && si == 0;
                let expected = u32::from(!outward);
                if *count != expected {
                    gluing_ok = false;
                    gluing_detail =
                        format!("slot {pi}:{si} glued {count} times, expected {expected}");
                }
            }
        }
    }
    checks.push(check("gluing_completeness", gluing_ok, gluing_detail));

    // Euler characteristic ledger.
    let chi: i64 = c.pieces.iter().map(|p| p.kind.euler_characteristic()).sum();
    checks.push(check(
        "euler_characteristic",
        chi == 0,
        format!("sum of piece contributions = {chi}"),
    ));

    // Innermost region: all multiplicities 1, tori in dimension 4, one
    // trivial filling per component.
    let innermost = c.region_fibers.last();
    let filling_count = c.pieces.iter().filter(|p| p.kind.is_filling()).count();
    let innermost_ok = innermost.is_some_and(|r| {
        r.all_multiplicity_one()
            && (c.dimension == 3 || r.components.iter().all(|comp| comp.genus == Some(1)))
            && r.component_count() == filling_count
    });
    checks.push(check(
        "innermost_region",
        innermost_ok,
        format!(
            "innermost {:?} with {} filling(s)",
            innermost.map(|r| r.component_count()),
            filling_count
        ),
    ));

    ValidationReport::from_checks(checks)
}

fn circle_radius(index: usize, count: usize) -> f64 {
    (count - index) as f64 / (count as f64 + 1.0)
}

/// The replacement fibration of a neighborhood of a (2,1) exceptional
/// fiber: one round 1-handle between the boundary collar and two trivially
/// fibered solid tori.
pub fn build_exceptional_21() -> PieceComplex {
    build_exceptional_p1(2).expect("2 is a valid multiplicity")
}

/// The replacement fibration of a neighborhood of a (p,1) exceptional
/// fiber: `p - 1` round 1-handles peel off one multiplicity-1 circle each,
/// and `p` trivially fibered solid tori fill the innermost region.
pub fn build_exceptional_p1(p: i64) -> Result<PieceComplex, PieceError> {
    if p < 1 {
        return Err(PieceError::InvalidMultiplicity(p));
    }
    let p = p as u32;

    // Region i carries i split-off circles plus one of multiplicity p - i.
    let region_fibers: Vec<RegionFiber> = (0..p)
        .map(|i| {
            let mut comps = vec![FiberComponent::circle(1); i as usize];
            comps.push(FiberComponent::circle(p - i));
            RegionFiber::new(comps)
        })
        .collect();

    let mut pieces = vec![FiberedPiece {
        kind: PieceKind::BoundaryCollar,
        dimension: 3,
        label: "collar".into(),
        boundary: vec![FiberComponent::circle(p); 2],
    }];
    let mut gluings = Vec::new();
    let mut base_diagram = Vec::new();

    // Chain of round 1-handles: slot 0 continues the unfinished circle,
    // slot 1 is the split-off multiplicity-1 circle, slot 2 the remainder.
    let mut open = (0u32, 1u32, FiberComponent::circle(p));
    for j in 0..p - 1 {
        let m = p - j;
        let id = pieces.len() as u32;
        pieces.push(FiberedPiece {
            kind: PieceKind::Round1Handle,
            dimension: 3,
            label: format!("round-1-handle-{j}"),
            boundary: vec![
                FiberComponent::circle(m),
                FiberComponent::circle(1),
                FiberComponent::circle(m - 1),
            ],
        });
        base_diagram.push(FoldCircle {
            kind: FoldKind::Round1Handle,
            piece: id,
            radius: circle_radius(j as usize, p as usize - 1),
        });
        gluings.push(Gluing {
            piece_a: open.0,
            slot_a: open.1,
            piece_b: id,
            slot_b: 0,
            slope: None,
        });
        // The split-off circle gets its trivial filling immediately.
        let fill = pieces.len() as u32;
        pieces.push(FiberedPiece {
            kind: PieceKind::TrivialSolidTorus,
            dimension: 3,
            label: format!("filling-{j}"),
            boundary: vec![FiberComponent::circle(1)],
        });
        gluings.push(Gluing {
            piece_a: id,
            slot_a: 1,
            piece_b: fill,
            slot_b: 0,
            slope: Some((1, 1)),
        });
        open = (id, 2, FiberComponent::circle(m - 1));
    }

    // The last unfinished circle has multiplicity 1; fill it.
    debug_assert_eq!(open.2, FiberComponent::circle(1));
    let fill = pieces.len() as u32;
    pieces.push(FiberedPiece {
        kind: PieceKind::TrivialSolidTorus,
        dimension: 3,
        label: format!("filling-{}", p - 1),
        boundary: vec![FiberComponent::circle(1)],
    });
    gluings.push(Gluing {
        piece_a: open.0,
        slot_a: open.1,
        piece_b: fill,
        slot_b: 0,
        slope: Some((1, 1)),
    });

    Ok(PieceComplex {
        dimension: 3,
        pieces,
        gluings,
        base_diagram,
        region_fibers,
    })
}

/// The four-dimensional replacement fibration around a multiplicity-`p`
/// multiple fiber: `p - 1` round 1-handle / round 2-handle pairs take the
/// single multiplicity-`p` torus to `p` disjoint multiplicity-1 tori,
/// filled by trivially fibered `T^2 x D^2` pieces. Each 1-handle raises
/// genus by one and the following 2-handle splits the genus-2 component.
pub fn build_multiple_fiber(p: i64) -> Result<PieceComplex, PieceError> {
    if p < 1 {
        return Err(PieceError::InvalidMultiplicity(p));
    }
    let p = p as u32;

    // Regions alternate between j finished tori plus one unfinished torus
    // of multiplicity p - j, and the same with the unfinished component
    // raised to genus 2.
    let mut region_fibers = Vec::new();
    for j in 0..p {
        let finished = vec![FiberComponent::surface(1, 1); j as usize];
        let mut torus_region = finished.clone();
        torus_region.push(FiberComponent::surface(1, p - j));
        region_fibers.push(RegionFiber::new(torus_region));
        if j + 1 < p {
            let mut raised = finished;
            raised.push(FiberComponent::surface(2, p - j));
            region_fibers.push(RegionFiber::new(raised));
        }
    }

    let mut pieces = vec![FiberedPiece {
        kind: PieceKind::BoundaryCollar,
        dimension: 4,
        label: "collar".into(),
        boundary: vec![FiberComponent::surface(1, p); 2],
    }];
    let mut gluings = Vec::new();
    let mut base_diagram = Vec::new();
    let circle_count = 2 * (p as usize - 1);

    let mut open = (0u32, 1u32, FiberComponent::surface(1, p));
    for j in 0..p - 1 {
        let m = p - j;
        // Round 1-handle: genus 1 -> 2 on the unfinished component.
        let r1 = pieces.len() as u32;
        pieces.push(FiberedPiece {
            kind: PieceKind::Round1Handle,
            dimension: 4,
            label: format!("round-1-handle-{j}"),
            boundary: vec![
                FiberComponent::surface(1, m),
                FiberComponent::surface(2, m),
            ],
        });
        base_diagram.push(FoldCircle {
            kind: FoldKind::Round1Handle,
            piece: r1,
            radius: circle_radius(2 * j as usize, circle_count),
        });
        gluings.push(Gluing {
            piece_a: open.0,
            slot_a: open.1,
            piece_b: r1,
            slot_b: 0,
            slope: None,
        });

        // Round 2-handle: the genus-2 component splits into two tori.
        let r2 = pieces.len() as u32;
        pieces.push(FiberedPiece {
            kind: PieceKind::Round2Handle,
            dimension: 4,
            label: format!("round-2-handle-{j}"),
            boundary: vec![
                FiberComponent::surface(2, m),
                FiberComponent::surface(1, 1),
                FiberComponent::surface(1, m - 1),
            ],
        });
        base_diagram.push(FoldCircle {
            kind: FoldKind::Round2Handle,
            piece: r2,
            radius: circle_radius(2 * j as usize + 1, circle_count),
        });
        gluings.push(Gluing {
            piece_a: r1,
            slot_a: 1,
            piece_b: r2,
            slot_b: 0,
            slope: None,
        });
        let fill = pieces.len() as u32;
        pieces.push(FiberedPiece {
            kind: PieceKind::TrivialT2xD2,
            dimension: 4,
            label: format!("filling-{j}"),
            boundary: vec![FiberComponent::surface(1, 1)],
        });
        gluings.push(Gluing {
            piece_a: r2,
            slot_a: 1,
            piece_b: fill,
            slot_b: 0,
            slope: Some((1, 1)),
        });
        open = (r2, 2, FiberComponent::surface(1, m - 1));
    }

    debug_assert_eq!(open.2, FiberComponent::surface(1, 1));
    let fill = pieces.len() as u32;
    pieces.push(FiberedPiece {
        kind: PieceKind::TrivialT2xD2,
        dimension: 4,
        label: format!("filling-{}", p - 1),
        boundary: vec![FiberComponent::surface(1, 1)],
    });
    gluings.push(Gluing {
        piece_a: open.0,
        slot_a: open.1,
        piece_b: fill,
        slot_b: 0,
        slope: Some((1, 1)),
    });

    Ok(PieceComplex {
        dimension: 4,
        pieces,
        gluings,
        base_diagram,
        region_fibers,
    })
}

/// Which of the two movie charts a point of the frame circle belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChartRole {
    G1,
    G2,
}

/// One chart of the movie at frame angle `phi`. The handle attachment of a
/// round pair lives over the theta-interval `i1`; `i2` is its complement,
/// where the pair acts as a product. A frame meets the fold set of its pair
/// exactly once, at `singular_theta` inside `i1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MovieChart {
    pub pair: u32,
    pub role: ChartRole,
    pub phi: f64,
    pub i1: (f64, f64),
    pub i2: (f64, f64),
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub singular_theta: Option<f64>,
}

/// The chart decomposition of one movie frame for the multiplicity-`p`
/// construction: a G1/G2 chart pair per round-handle pair, in attachment
/// order. The two theta-intervals tile the circle with disjoint interiors.
pub fn movie_slices(p: i64, phi: f64) -> Result<Vec<MovieChart>, PieceError> {
    if p < 2 {
        return Err(PieceError::InvalidMultiplicity(p));
    }
    let phi = phi.rem_euclid(TAU);
    let i1 = (-PI / 4.0, PI / 4.0);
    let i2 = (PI / 4.0, 7.0 * PI / 4.0);
    let mut charts = Vec::new();
    for pair in 0..(p - 1) as u32 {
        charts.push(MovieChart {
            pair,
            role: ChartRole::G1,
            phi,
            i1,
            i2,
            singular_theta: Some(0.0),
        });
        charts.push(MovieChart {
            pair,
            role: ChartRole::G2,
            phi,
            i1,
            i2,
            singular_theta: None,
        });
    }
    Ok(charts)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Closed-form region fibers, written independently of the builders'
    /// incremental chains, to cross-check stored labels.
    fn expected_regions_3d(p: u32, i: u32) -> RegionFiber {
        let mut comps = vec![FiberComponent::circle(1); i as usize];
        comps.push(FiberComponent::circle(p - i));
        RegionFiber::new(comps)
    }

    #[test]
    fn multiplicity_two_complex_has_one_fold_and_two_fillings() {
        let c = build_exceptional_21();
        assert_eq!(c.fold_circle_count(), 1);
        assert_eq!(c.dimension, 3);
        let fillings = c
            .pieces
            .iter()
            .filter(|p| p.kind == PieceKind::TrivialSolidTorus)
            .count();
        assert_eq!(fillings, 2);
        assert_eq!(
            c.region_fibers[0],
            RegionFiber::new(vec![FiberComponent::circle(2)])
        );
        assert_eq!(
            c.innermost_region(),
            &RegionFiber::new(vec![FiberComponent::circle(1); 2])
        );
        assert!(validate_complex(&c).pass);
    }

    #[test]
    fn p2_matches_the_dedicated_builder() {
        assert_eq!(build_exceptional_21(), build_exceptional_p1(2).unwrap());
    }

    #[test]
    fn exceptional_p5_region_ledger() {
        let c = build_exceptional_p1(5).unwrap();
        assert_eq!(c.fold_circle_count(), 4);
        assert_eq!(c.innermost_region().component_count(), 5);
        for i in 0..5 {
            assert_eq!(c.region_fibers[i as usize], expected_regions_3d(5, i));
        }
        assert!(validate_complex(&c).pass);
    }

    #[test]
    fn exceptional_p1_has_no_singularities() {
        let c = build_exceptional_p1(1).unwrap();
        assert_eq!(c.fold_circle_count(), 0);
        assert_eq!(c.region_fibers.len(), 1);
        assert_eq!(
            c.region_fibers[0],
            RegionFiber::new(vec![FiberComponent::circle(1)])
        );
        let fillings = c.pieces.iter().filter(|p| p.kind.is_filling()).count();
        assert_eq!(fillings, 1);
        assert!(validate_complex(&c).pass);
    }

    #[test]
    fn multiple_fiber_p2_regions() {
        let c = build_multiple_fiber(2).unwrap();
        assert_eq!(c.fold_circle_count(), 2);
        assert_eq!(
            c.region_fibers,
            vec![
                RegionFiber::new(vec![FiberComponent::surface(1, 2)]),
                RegionFiber::new(vec![FiberComponent::surface(2, 2)]),
                RegionFiber::new(vec![FiberComponent::surface(1, 1); 2]),
            ]
        );
        assert!(validate_complex(&c).pass);
    }

    #[test]
    fn multiple_fiber_p3_counts() {
        let c = build_multiple_fiber(3).unwrap();
        assert_eq!(c.fold_circle_count(), 4);
        assert_eq!(c.innermost_region().component_count(), 3);
        assert!(c.innermost_region().all_multiplicity_one());
        assert!(c
            .innermost_region()
            .components
            .iter()
            .all(|comp| comp.genus == Some(1)));
        assert!(validate_complex(&c).pass);
    }

    #[test]
    fn fold_circles_alternate_kinds() {
        let c = build_multiple_fiber(5).unwrap();
        assert_eq!(c.fold_circle_count(), 8);
        for (i, fc) in c.base_diagram.iter().enumerate() {
            let expected = if i % 2 == 0 {
                FoldKind::Round1Handle
            } else {
                FoldKind::Round2Handle
            };
            assert_eq!(fc.kind, expected, "circle {i}");
        }
        // Strict radial nesting, outermost first.
        for w in c.base_diagram.windows(2) {
            assert!(w[0].radius > w[1].radius);
        }
    }

    #[test]
    fn both_builders_validate_up_to_ten() {
        for p in 1..=10 {
            assert!(
                validate_complex(&build_exceptional_p1(p).unwrap()).pass,
                "exceptional p={p}"
            );
            assert!(
                validate_complex(&build_multiple_fiber(p).unwrap()).pass,
                "multiple fiber p={p}"
            );
        }
    }

    #[test]
    fn each_pair_preserves_euler_characteristic_and_adds_a_component() {
        let c = build_multiple_fiber(6).unwrap();
        for j in 0..5 {
            let before = &c.region_fibers[2 * j];
            let after = &c.region_fibers[2 * j + 2];
            assert_eq!(before.euler_characteristic(), after.euler_characteristic());
            // Genus net of components is the pair invariant; the raw genus
            // total grows with the component count for torus fibers.
            assert_eq!(
                before.total_genus() as i64 - before.component_count() as i64,
                after.total_genus() as i64 - after.component_count() as i64,
            );
            assert_eq!(
                after.component_count(),
                before.component_count() + 1,
                "pair {j} adds one component"
            );
        }
    }

    #[test]
    fn consecutive_round_2_handles_fail_validation() {
        let mut c = build_multiple_fiber(3).unwrap();
        // Swap the kinds of the first two circles so a 2-handle comes first.
        let p0 = c.base_diagram[0].piece as usize;
        let p1 = c.base_diagram[1].piece as usize;
        c.base_diagram[0].kind = FoldKind::Round2Handle;
        c.pieces[p0].kind = PieceKind::Round2Handle;
        c.base_diagram[1].kind = FoldKind::Round2Handle;
        c.pieces[p1].kind = PieceKind::Round2Handle;
        let report = validate_complex(&c);
        assert!(!report.pass);
        assert_eq!(report.first_failure().unwrap().name, "transition_replay");
    }

    #[test]
    fn innermost_multiplicity_two_fails_validation() {
        let mut c = build_exceptional_p1(3).unwrap();
        let last = c.region_fibers.last_mut().unwrap();
        last.components[0].multiplicity = 2;
        let report = validate_complex(&c);
        assert!(!report.pass);
    }

    #[test]
    fn unglued_slot_fails_validation() {
        let mut c = build_exceptional_21();
        c.gluings.pop();
        let report = validate_complex(&c);
        assert!(!report.pass);
        assert_eq!(
            report.first_failure().unwrap().name,
            "gluing_completeness"
        );
    }

    #[test]
    fn mismatched_gluing_fiber_fails_validation() {
        let mut c = build_multiple_fiber(2).unwrap();
        let fill = c
            .pieces
            .iter()
            .position(|p| p.kind == PieceKind::TrivialT2xD2)
            .unwrap();
        c.pieces[fill].boundary[0] = FiberComponent::surface(1, 2);
        assert!(!validate_complex(&c).pass);
    }

    #[test]
    fn movie_charts_partition_the_circle() {
        let charts = movie_slices(3, 0.0).unwrap();
        assert_eq!(charts.len(), 4);
        for chart in &charts {
            let len1 = chart.i1.1 - chart.i1.0;
            let len2 = chart.i2.1 - chart.i2.0;
            assert!((len1 + len2 - TAU).abs() < 1e-12);
            assert_eq!(chart.i1.1, chart.i2.0);
            assert!((chart.i2.1 - TAU - chart.i1.0).abs() < 1e-12);
            match chart.role {
                ChartRole::G1 => {
                    let theta = chart.singular_theta.unwrap();
                    assert!(chart.i1.0 < theta && theta < chart.i1.1);
                }
                ChartRole::G2 => assert!(chart.singular_theta.is_none()),
            }
        }
        // One singular parameter per pair per frame.
        let singular: Vec<u32> = charts
            .iter()
            .filter(|c| c.singular_theta.is_some())
            .map(|c| c.pair)
            .collect();
        assert_eq!(singular, vec![0, 1]);
    }

    #[test]
    fn movie_slices_need_multiplicity_two() {
        assert_eq!(
            movie_slices(1, 0.0),
            Err(PieceError::InvalidMultiplicity(1))
        );
    }

    #[test]
    fn builders_reject_nonpositive_multiplicity() {
        assert_eq!(
            build_exceptional_p1(0),
            Err(PieceError::InvalidMultiplicity(0))
        );
        assert_eq!(
            build_multiple_fiber(-3),
            Err(PieceError::InvalidMultiplicity(-3))
        );
    }
}
