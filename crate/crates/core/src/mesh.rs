//! Structured macro triangulations of the unit square and their one-level
//! uniform refinement.
//!
//! The fine mesh records, for every macro triangle, the six nodes and four
//! child elements that make up its patch. Fine vertices are numbered with
//! all macro vertices first and the edge midpoints after, so the
//! coarse/bubble split of the nodal basis is a pure index partition.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{cross, Point2};

/// A conforming, positively oriented coarse triangulation.
#[derive(Debug, Clone)]
pub struct MacroMesh {
    pub vertices: Vec<Point2>,
    /// Vertex indices per triangle, counter-clockwise.
    pub triangles: Vec<[usize; 3]>,
    /// Per-vertex flag: lies on the mesh boundary.
    pub boundary: Vec<bool>,
}

fn canonical(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Counts how many triangles use each undirected edge and checks that no
/// directed edge appears twice (which would mean inconsistent orientation
/// or duplicated triangles).
fn edge_use_counts(
    triangles: &[[usize; 3]],
) -> Result<BTreeMap<(usize, usize), usize>> {
    let mut directed = BTreeSet::new();
    let mut counts: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for tri in triangles {
        for e in 0..3 {
            let (i, j) = (tri[e], tri[(e + 1) % 3]);
            if !directed.insert((i, j)) {
                return Err(Error::Nonconforming("directed edge used twice"));
            }
            *counts.entry(canonical(i, j)).or_insert(0) += 1;
        }
    }
    if counts.values().any(|&c| c > 2) {
        return Err(Error::Nonconforming("edge shared by more than two triangles"));
    }
    Ok(counts)
}

impl MacroMesh {
    /// Builds a macro mesh from raw data, validating orientation and
    /// conformity. Boundary flags are derived from the edge structure.
    pub fn new(vertices: Vec<Point2>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        for tri in &triangles {
            if tri.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::Nonconforming("vertex index out of range"));
            }
            if cross(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]) <= 0.0 {
                return Err(Error::Nonconforming("triangle not counter-clockwise"));
            }
        }
        let counts = edge_use_counts(&triangles)?;
        let mut boundary = vec![false; vertices.len()];
        for (&(i, j), &c) in &counts {
            if c == 1 {
                boundary[i] = true;
                boundary[j] = true;
            }
        }
        Ok(Self {
            vertices,
            triangles,
            boundary,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    /// One uniform refinement: one midpoint per edge, four children per
    /// triangle.
    pub fn refine(&self) -> Result<PatchMesh> {
        let counts = edge_use_counts(&self.triangles)?;
        let nv = self.vertices.len();

        // Midpoint ids in sorted canonical-edge order: deterministic and
        // independent of triangle order.
        let mut midpoint_of: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for (k, &edge) in counts.keys().enumerate() {
            midpoint_of.insert(edge, nv + k);
        }

        let mut vertices = self.vertices.clone();
        let mut boundary = self.boundary.clone();
        let mut movable: Vec<Option<(usize, usize)>> = vec![None; nv];
        for (&(i, j), &mid) in &midpoint_of {
            debug_assert_eq!(mid, vertices.len());
            vertices.push(self.vertices[i].lerp(self.vertices[j], 0.5));
            boundary.push(counts[&(i, j)] == 1);
            movable.push(Some((i, j)));
        }

        let mut elements = Vec::with_capacity(4 * self.triangles.len());
        let mut patches = Vec::with_capacity(self.triangles.len());
        for &[v0, v1, v2] in &self.triangles {
            let m01 = midpoint_of[&canonical(v0, v1)];
            let m12 = midpoint_of[&canonical(v1, v2)];
            let m20 = midpoint_of[&canonical(v2, v0)];
            let base = elements.len();
            elements.push([v0, m01, m20]);
            elements.push([m01, v1, m12]);
            elements.push([m20, m12, v2]);
            elements.push([m01, m12, m20]);
            patches.push(Patch {
                corners: [v0, v1, v2],
                midpoints: [m01, m12, m20],
                children: [base, base + 1, base + 2, base + 3],
            });
        }

        Ok(PatchMesh {
            vertices,
            elements,
            patches,
            boundary,
            movable,
            n_macro_vertices: nv,
        })
    }
}

/// Uniform n x n grid of unit-square cells, each split into two right
/// isosceles triangles by the diagonal from lower-left to upper-right.
pub fn build_macro_mesh(n: usize) -> Result<MacroMesh> {
    if n == 0 {
        return Err(Error::InvalidGridSize);
    }
    let h = 1.0 / n as f64;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push(Point2::new(i as f64 * h, j as f64 * h));
        }
    }
    let idx = |i: usize, j: usize| j * (n + 1) + i;
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }
    MacroMesh::new(vertices, triangles)
}

/// One macro triangle's footprint in the fine mesh.
///
/// `midpoints[k]` lies on the macro edge `(corners[k], corners[(k+1)%3])`.
/// `children[k]` is the corner element at `corners[k]` for k < 3 and the
/// middle element for k = 3; in the unfitted state the connectivity is
/// `(c0, m01, m20)`, `(m01, c1, m12)`, `(m20, m12, c2)`, `(m01, m12, m20)`.
#[derive(Debug, Clone, Copy)]
pub struct Patch {
    pub corners: [usize; 3],
    pub midpoints: [usize; 3],
    pub children: [usize; 4],
}

impl Patch {
    /// Midpoint node of the macro edge between local corners `a` and `b`.
    pub fn midpoint_between(&self, a: usize, b: usize) -> usize {
        for k in 0..3 {
            let pair = (k, (k + 1) % 3);
            if pair == (a, b) || pair == (b, a) {
                return self.midpoints[k];
            }
        }
        unreachable!("local corner ids must be distinct and < 3")
    }
}

/// The uniformly refined mesh with its patch bookkeeping.
#[derive(Debug, Clone)]
pub struct PatchMesh {
    /// Macro vertices first (indices < `n_macro_vertices`), midpoints after.
    pub vertices: Vec<Point2>,
    pub elements: Vec<[usize; 3]>,
    pub patches: Vec<Patch>,
    /// Per-vertex flag: lies on the mesh boundary.
    pub boundary: Vec<bool>,
    /// For midpoint vertices, the macro edge (canonical endpoint pair) the
    /// node may slide along; `None` for macro vertices.
    pub movable: Vec<Option<(usize, usize)>>,
    pub n_macro_vertices: usize,
}

impl PatchMesh {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn element_count(&self) -> usize {
        self.elements.len()
    }

    /// Maximum edge length over all elements.
    pub fn mesh_size(&self) -> f64 {
        let mut h: f64 = 0.0;
        for el in &self.elements {
            for e in 0..3 {
                let len = self.vertices[el[e]].distance(self.vertices[el[(e + 1) % 3]]);
                h = h.max(len);
            }
        }
        h
    }

    /// Minimum edge length over all elements.
    pub fn min_edge_length(&self) -> f64 {
        let mut h = f64::INFINITY;
        for el in &self.elements {
            for e in 0..3 {
                let len = self.vertices[el[e]].distance(self.vertices[el[(e + 1) % 3]]);
                h = h.min(len);
            }
        }
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use crate::geometry::Triangle;

    #[test]
    fn macro_mesh_counts() {
        for (n, nv, nt) in [(1, 4, 2), (2, 9, 8), (4, 25, 32)] {
            let m = build_macro_mesh(n).unwrap();
            assert_eq!(m.vertex_count(), nv);
            assert_eq!(m.triangle_count(), nt);
        }
        assert!(matches!(build_macro_mesh(0), Err(Error::InvalidGridSize)));
    }

    #[test]
    fn refine_counts() {
        let fine = build_macro_mesh(1).unwrap().refine().unwrap();
        assert_eq!(fine.vertex_count(), 9);
        assert_eq!(fine.element_count(), 8);
        let fine = build_macro_mesh(2).unwrap().refine().unwrap();
        assert_eq!(fine.vertex_count(), 25);
        assert_eq!(fine.element_count(), 32);
        for n in [1usize, 3, 5] {
            let fine = build_macro_mesh(n).unwrap().refine().unwrap();
            assert_eq!(fine.vertex_count(), (2 * n + 1) * (2 * n + 1));
            assert_eq!(fine.element_count(), 8 * n * n);
            assert_eq!(fine.n_macro_vertices, (n + 1) * (n + 1));
        }
    }

    #[test]
    fn children_partition_patch() {
        let coarse = build_macro_mesh(3).unwrap();
        let fine = coarse.refine().unwrap();
        for (p, patch) in fine.patches.iter().enumerate() {
            let tri = |v: [usize; 3]| {
                Triangle::new(fine.vertices[v[0]], fine.vertices[v[1]], fine.vertices[v[2]])
            };
            let macro_area = Triangle::new(
                coarse.vertices[coarse.triangles[p][0]],
                coarse.vertices[coarse.triangles[p][1]],
                coarse.vertices[coarse.triangles[p][2]],
            )
            .signed_area();
            let child_area: f64 = patch
                .children
                .iter()
                .map(|&c| tri(fine.elements[c]).signed_area())
                .sum();
            assert_relative_eq!(child_area, macro_area, max_relative = 1e-12);
            // Midpoints bisect their macro edges initially.
            for k in 0..3 {
                let (a, b) = (patch.corners[k], patch.corners[(k + 1) % 3]);
                let mid = fine.vertices[patch.midpoints[k]];
                let expect = fine.vertices[a].lerp(fine.vertices[b], 0.5);
                assert_relative_eq!(mid.x, expect.x, epsilon = 1e-15);
                assert_relative_eq!(mid.y, expect.y, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn mesh_size_halves() {
        let h1 = build_macro_mesh(1).unwrap().refine().unwrap().mesh_size();
        let h2 = build_macro_mesh(2).unwrap().refine().unwrap().mesh_size();
        assert_relative_eq!(h1, 2.0_f64.sqrt() / 2.0, max_relative = 1e-15);
        assert_relative_eq!(h2, 2.0_f64.sqrt() / 4.0, max_relative = 1e-15);
        assert_relative_eq!(h1 / h2, 2.0, max_relative = 1e-14);
    }

    #[test]
    fn conformity_of_structured_mesh() {
        let fine = build_macro_mesh(4).unwrap().refine().unwrap();
        let counts = edge_use_counts(&fine.elements).unwrap();
        for (&(i, j), &c) in &counts {
            let on_boundary = fine.boundary[i] && fine.boundary[j];
            // Interior edges are shared by exactly two elements; boundary
            // edges (both endpoints on the boundary and collinear with it)
            // by exactly one.
            assert!(c == 2 || (c == 1 && on_boundary));
        }
    }

    #[test]
    fn nonconforming_input_rejected() {
        // Two triangles using the same directed edge.
        let verts = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
            Point2::new(1.0, 1.0),
        ];
        let bad = MacroMesh::new(verts.clone(), vec![[0, 1, 2], [1, 3, 2], [0, 1, 3]]);
        assert!(bad.is_err());
        let cw = MacroMesh::new(verts, vec![[0, 2, 1]]);
        assert!(matches!(cw, Err(Error::Nonconforming(_))));
    }

    #[test]
    fn boundary_flags() {
        let fine = build_macro_mesh(2).unwrap().refine().unwrap();
        let n_boundary = fine.boundary.iter().filter(|&&b| b).count();
        assert_eq!(n_boundary, 8 * 2); // perimeter nodes of the fine grid
        for (v, mv) in fine.movable.iter().enumerate() {
            assert_eq!(mv.is_some(), v >= fine.n_macro_vertices);
        }
    }
}
