//! Local mesh modification: slide the three midpoint nodes of each cut
//! patch so that the interface chord becomes an element edge, while every
//! interior angle stays bounded away from 180 degrees.
//!
//! For a patch cut through two edges the corners are relabeled so that P1
//! is the corner shared by the cut edges and P2, P3 follow counter-
//! clockwise; the intersections sit at parameters s (edge P1P2) and r
//! (edge P1P3). The midpoints move to
//!
//! ```text
//! P4 = P1 + s (P2 - P1),   P5 = P2 + t (P3 - P2),   P6 = P1 + r (P3 - P1)
//! ```
//!
//! with the free parameter t chosen per configuration:
//!
//! * A: r, s <= 1/2        -> t = 1/2
//! * B: r, s > 1/2         -> t = 1 - s
//! * C: one of r, s <= 1/2 -> t = 1/2
//!
//! A patch cut through a vertex and the opposite edge relabels the cut
//! vertex to P2 (P3, P1 counter-clockwise after it), places P6 at the
//! opposite-edge intersection (parameter r from P1) and uses
//!
//! * D1: r <= 1/2 -> s = r, t = 1/2
//! * D2: r > 1/2  -> s = 1/2, t = r
//!
//! with children rearranged so the chord P2P6 is an element edge. On the
//! equilateral reference patch all resulting interior angles stay below
//! 150 degrees for every parameter choice; `reference_patch_sweep` checks
//! that exhaustively.

use alloc::vec;
use alloc::vec::Vec;


// Inherent f64 math appears once any crate in the graph links std; the
// trait import is what keeps the pure no_std build working.
#[allow(unused_imports)]
use num_traits::Float;
use crate::error::{Error, Result};
use crate::geometry::{Point2, Triangle};
use crate::interface::{classify_patch, CutClassification, LevelSet};
use crate::mesh::PatchMesh;

/// The five placement cases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConfigKind {
    A,
    B,
    C,
    D1,
    D2,
}

impl ConfigKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ConfigKind::A => "A",
            ConfigKind::B => "B",
            ConfigKind::C => "C",
            ConfigKind::D1 => "D1",
            ConfigKind::D2 => "D2",
        }
    }
}

/// A placement case together with its midpoint parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Configuration {
    pub kind: ConfigKind,
    pub r: f64,
    pub s: f64,
    pub t: f64,
}

/// Chooses the configuration for a classified cut. Ties at 1/2 take the
/// "<=" branch (A over B/C, D1 over D2).
pub fn select_configuration(class: &CutClassification) -> Result<Configuration> {
    match *class {
        CutClassification::NotCut => Err(Error::NothingToFit),
        CutClassification::TwoEdges { r, s, .. } => {
            let (kind, t) = if r <= 0.5 && s <= 0.5 {
                (ConfigKind::A, 0.5)
            } else if r > 0.5 && s > 0.5 {
                (ConfigKind::B, 1.0 - s)
            } else {
                (ConfigKind::C, 0.5)
            };
            Ok(Configuration { kind, r, s, t })
        }
        CutClassification::VertexEdge { r, .. } => {
            if r <= 0.5 {
                Ok(Configuration {
                    kind: ConfigKind::D1,
                    r,
                    s: r,
                    t: 0.5,
                })
            } else {
                Ok(Configuration {
                    kind: ConfigKind::D2,
                    r,
                    s: 0.5,
                    t: r,
                })
            }
        }
    }
}

/// Midpoint positions for relabeled corners. The parameters are fractions
/// of the respective edge, which keeps the construction affine invariant.
pub fn place_points(
    p1: Point2,
    p2: Point2,
    p3: Point2,
    cfg: &Configuration,
) -> Result<(Point2, Point2, Point2)> {
    for (name, v) in [("r", cfg.r), ("s", cfg.s), ("t", cfg.t)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::ParameterOutOfRange { name, value: v });
        }
    }
    Ok((p1.lerp(p2, cfg.s), p2.lerp(p3, cfg.t), p1.lerp(p3, cfg.r)))
}

/// The four child triangles of a fitted patch with relabeled corners
/// (p1, p2, p3). Configurations A-C keep the default connectivity; D
/// rearranges the second and fourth child so the chord P2P6 is shared.
pub fn patch_children(
    p1: Point2,
    p2: Point2,
    p3: Point2,
    cfg: &Configuration,
) -> Result<[Triangle; 4]> {
    let (p4, p5, p6) = place_points(p1, p2, p3, cfg)?;
    Ok(match cfg.kind {
        ConfigKind::A | ConfigKind::B | ConfigKind::C => [
            Triangle::new(p1, p4, p6),
            Triangle::new(p4, p2, p5),
            Triangle::new(p6, p5, p3),
            Triangle::new(p4, p5, p6),
        ],
        ConfigKind::D1 | ConfigKind::D2 => [
            Triangle::new(p1, p4, p6),
            Triangle::new(p4, p2, p6),
            Triangle::new(p6, p5, p3),
            Triangle::new(p2, p5, p6),
        ],
    })
}

/// The equilateral reference patch.
pub fn reference_patch() -> (Point2, Point2, Point2) {
    (
        Point2::new(0.0, 0.0),
        Point2::new(1.0, 0.0),
        Point2::new(0.5, 3.0_f64.sqrt() / 2.0),
    )
}

/// Exhaustive angle check on the reference patch: fits every (r, s) on an
/// m x m interior grid of (0,1)^2 through the two-edge configurations plus
/// the vertex-edge family over r, and returns the worst interior angle in
/// degrees.
pub fn reference_patch_sweep(m: usize) -> Result<f64> {
    if m < 2 {
        return Err(Error::ParameterOutOfRange {
            name: "m",
            value: m as f64,
        });
    }
    let (p1, p2, p3) = reference_patch();
    let step = 1.0 / (m + 1) as f64;
    let mut worst: f64 = 0.0;
    for i in 1..=m {
        let r = i as f64 * step;
        for j in 1..=m {
            let s = j as f64 * step;
            let cfg = select_configuration(&CutClassification::TwoEdges { apex: 0, r, s })?;
            for tri in patch_children(p1, p2, p3, &cfg)? {
                worst = worst.max(tri.max_angle()?);
            }
        }
        let cfg = select_configuration(&CutClassification::VertexEdge { corner: 0, r })?;
        for tri in patch_children(p1, p2, p3, &cfg)? {
            worst = worst.max(tri.max_angle()?);
        }
    }
    Ok(worst)
}

/// Subdomain label of an element, assigned by the sign of the level-set
/// function at its centroid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subdomain {
    One,
    Two,
}

impl Subdomain {
    pub fn tag(self) -> u8 {
        match self {
            Subdomain::One => 1,
            Subdomain::Two => 2,
        }
    }
}

/// Per-patch fitting record.
#[derive(Debug, Clone, Copy)]
pub struct PatchFit {
    pub config: Configuration,
    /// Local corner id the relabeling is anchored at: P1 for two-edge cuts,
    /// P2 for vertex-edge cuts.
    pub anchor: usize,
}

/// The locally modified mesh: same vertex and element counts as the input,
/// with midpoints of cut patches moved onto the interface and every element
/// tagged by subdomain.
#[derive(Debug, Clone)]
pub struct FittedMesh {
    pub mesh: PatchMesh,
    /// Fitting record per patch; `None` for uncut patches.
    pub fits: Vec<Option<PatchFit>>,
    /// Subdomain tag per element.
    pub tags: Vec<Subdomain>,
}

impl FittedMesh {
    pub fn cut_patch_count(&self) -> usize {
        self.fits.iter().filter(|f| f.is_some()).count()
    }
}

#[derive(Clone, Copy)]
struct NodeWrite {
    pos: Point2,
    /// Whether the write pins an interface intersection (as opposed to a
    /// quality adjustment of an uncut edge's midpoint).
    interface: bool,
    patch: usize,
}

fn record_write(
    writes: &mut [Option<NodeWrite>],
    node: usize,
    pos: Point2,
    interface: bool,
    patch: usize,
) {
    match writes[node] {
        None => writes[node] = Some(NodeWrite { pos, interface, patch }),
        Some(prev) => {
            if interface && !prev.interface {
                writes[node] = Some(NodeWrite { pos, interface, patch });
            } else if interface == prev.interface && prev.pos != pos {
                // Interface writes from the two patches sharing a cut edge
                // agree (same canonical root); only quality adjustments of a
                // shared uncut edge can genuinely collide. Keep the first
                // writer and rely on the global angle check.
                if !interface {
                    log::warn!(
                        "patches {} and {patch} both adjust node {node}; keeping the first",
                        prev.patch
                    );
                }
            }
        }
    }
}

/// Fits the mesh to the interface: classifies every patch, moves midpoints
/// per the selected configurations, rearranges children of vertex-edge
/// patches, and tags elements by the centroid sign of `phi`.
pub fn fit_mesh<P: LevelSet + ?Sized>(
    mesh: &PatchMesh,
    phi: &P,
    snap_tol: f64,
) -> Result<FittedMesh> {
    let mut elements = mesh.elements.clone();
    let mut fits: Vec<Option<PatchFit>> = vec![None; mesh.patches.len()];
    let mut writes: Vec<Option<NodeWrite>> = vec![None; mesh.vertices.len()];

    for (pid, patch) in mesh.patches.iter().enumerate() {
        let class = classify_patch(mesh, pid, phi, snap_tol)?;
        if class == CutClassification::NotCut {
            continue;
        }
        let cfg = select_configuration(&class)?;
        // Local corner ids after relabeling.
        let (l1, anchor) = match class {
            CutClassification::TwoEdges { apex, .. } => (apex, apex),
            CutClassification::VertexEdge { corner, .. } => ((corner + 2) % 3, corner),
            CutClassification::NotCut => unreachable!(),
        };
        let (l2, l3) = ((l1 + 1) % 3, (l1 + 2) % 3);
        let g = [patch.corners[l1], patch.corners[l2], patch.corners[l3]];
        let (p4, p5, p6) = place_points(
            mesh.vertices[g[0]],
            mesh.vertices[g[1]],
            mesh.vertices[g[2]],
            &cfg,
        )?;
        let m4 = patch.midpoint_between(l1, l2);
        let m5 = patch.midpoint_between(l2, l3);
        let m6 = patch.midpoint_between(l1, l3);

        // Midpoints on cut edges pin the interface; the remaining moves are
        // quality adjustments. A parameter of exactly 1/2 keeps the original
        // midpoint, so no write is recorded for it.
        match cfg.kind {
            ConfigKind::A | ConfigKind::C => {
                record_write(&mut writes, m4, p4, true, pid);
                record_write(&mut writes, m6, p6, true, pid);
            }
            ConfigKind::B => {
                record_write(&mut writes, m4, p4, true, pid);
                record_write(&mut writes, m6, p6, true, pid);
                record_write(&mut writes, m5, p5, false, pid);
            }
            ConfigKind::D1 => {
                record_write(&mut writes, m6, p6, true, pid);
                record_write(&mut writes, m4, p4, false, pid);
            }
            ConfigKind::D2 => {
                record_write(&mut writes, m6, p6, true, pid);
                record_write(&mut writes, m5, p5, false, pid);
            }
        }

        if matches!(cfg.kind, ConfigKind::D1 | ConfigKind::D2) {
            // Chord P2P6 must be an element edge: corner children at P1 and
            // P3 keep their shape, the P2 corner child and the middle child
            // are re-wired.
            elements[patch.children[l1]] = [g[0], m4, m6];
            elements[patch.children[l2]] = [m4, g[1], m6];
            elements[patch.children[l3]] = [m6, m5, g[2]];
            elements[patch.children[3]] = [g[1], m5, m6];
        }

        fits[pid] = Some(PatchFit { config: cfg, anchor });
    }

    let mut vertices = mesh.vertices.clone();
    for (node, w) in writes.iter().enumerate() {
        if let Some(w) = w {
            vertices[node] = w.pos;
        }
    }

    let mut tags = Vec::with_capacity(elements.len());
    for (e, el) in elements.iter().enumerate() {
        let tri = Triangle::new(vertices[el[0]], vertices[el[1]], vertices[el[2]]);
        if tri.signed_area() <= 0.0 || tri.is_degenerate() {
            return Err(Error::InvalidFit { element: e });
        }
        tags.push(if phi.eval(tri.centroid()) < 0.0 {
            Subdomain::One
        } else {
            Subdomain::Two
        });
    }

    let mut fitted = mesh.clone();
    fitted.vertices = vertices;
    fitted.elements = elements;
    Ok(FittedMesh {
        mesh: fitted,
        fits,
        tags,
    })
}

/// Tags elements by centroid sign without touching the mesh. This is the
/// unfitted baseline: the interface is ignored geometrically and only the
/// coefficient assignment sees it.
pub fn tag_by_centroid<P: LevelSet + ?Sized>(mesh: &PatchMesh, phi: &P) -> FittedMesh {
    let tags = mesh
        .elements
        .iter()
        .map(|el| {
            let tri = Triangle::new(
                mesh.vertices[el[0]],
                mesh.vertices[el[1]],
                mesh.vertices[el[2]],
            );
            if phi.eval(tri.centroid()) < 0.0 {
                Subdomain::One
            } else {
                Subdomain::Two
            }
        })
        .collect();
    FittedMesh {
        mesh: mesh.clone(),
        fits: vec![None; mesh.patches.len()],
        tags,
    }
}

/// Largest interior angle over all elements together with the element
/// attaining it.
pub fn verify_angles(fitted: &FittedMesh) -> Result<(f64, usize)> {
    let mut worst = (0.0_f64, 0usize);
    for (e, el) in fitted.mesh.elements.iter().enumerate() {
        let tri = Triangle::new(
            fitted.mesh.vertices[el[0]],
            fitted.mesh.vertices[el[1]],
            fitted.mesh.vertices[el[2]],
        );
        let ang = tri.max_angle()?;
        if ang > worst.0 {
            worst = (ang, e);
        }
    }
    Ok(worst)
}
