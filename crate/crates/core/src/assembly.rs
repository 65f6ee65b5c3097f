//! Piecewise-linear Galerkin assembly on a fitted mesh.
//!
//! The coefficient is constant per element (the mesh resolves the
//! interface, so every element lies in one subdomain up to chord error).
//! Dirichlet conditions are eliminated symmetrically: known columns move to
//! the right-hand side and the reduced matrix stays symmetric positive
//! definite on the free nodes.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fitting::{FittedMesh, Subdomain};
use crate::geometry::{Point2, Triangle};
use crate::interface::LevelSetInterface;
use crate::linalg::SymmetricSparse;

/// The two material coefficients; both strictly positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialCoefficients {
    pub kappa1: f64,
    pub kappa2: f64,
}

impl MaterialCoefficients {
    pub fn new(kappa1: f64, kappa2: f64) -> Result<Self> {
        if !(kappa1 > 0.0) {
            return Err(Error::ParameterOutOfRange {
                name: "kappa1",
                value: kappa1,
            });
        }
        if !(kappa2 > 0.0) {
            return Err(Error::ParameterOutOfRange {
                name: "kappa2",
                value: kappa2,
            });
        }
        Ok(Self { kappa1, kappa2 })
    }

    pub fn for_subdomain(&self, s: Subdomain) -> f64 {
        match s {
            Subdomain::One => self.kappa1,
            Subdomain::Two => self.kappa2,
        }
    }
}

/// Scalar data attached to the problem (source term, Dirichlet trace, ...).
pub type ScalarField = Box<dyn Fn(Point2) -> f64 + Send + Sync>;

/// The boundary value problem: diffusion coefficients per subdomain, source
/// term, Dirichlet data and the interface separating the subdomains.
pub struct ProblemSpec {
    pub coefficients: MaterialCoefficients,
    pub source: ScalarField,
    pub dirichlet: ScalarField,
    pub interface: LevelSetInterface,
}

/// Gradients of the three nodal basis functions on a triangle, plus its
/// area. The gradients are constant per element.
pub fn basis_gradients(t: &Triangle) -> Result<([[f64; 2]; 3], f64)> {
    if t.is_degenerate() || t.signed_area() <= 0.0 {
        return Err(Error::DegenerateTriangle);
    }
    let two_a = 2.0 * t.signed_area();
    let [pa, pb, pc] = [t.a, t.b, t.c];
    let grads = [
        [(pb.y - pc.y) / two_a, (pc.x - pb.x) / two_a],
        [(pc.y - pa.y) / two_a, (pa.x - pc.x) / two_a],
        [(pa.y - pb.y) / two_a, (pb.x - pa.x) / two_a],
    ];
    Ok((grads, 0.5 * two_a))
}

/// Element stiffness matrix `kappa * integral of grad(phi_i) . grad(phi_j)`.
/// Symmetric with zero row sums.
pub fn element_stiffness(t: &Triangle, kappa: f64) -> Result<[[f64; 3]; 3]> {
    let (g, area) = basis_gradients(t)?;
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = kappa * area * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
        }
    }
    Ok(k)
}

/// Element load vector by the three-point edge-midpoint rule (exact for
/// quadratic integrands). Basis function i is 1/2 at the two midpoints of
/// the edges meeting in vertex i and 0 at the opposite one.
pub fn element_load<F: Fn(Point2) -> f64 + ?Sized>(t: &Triangle, f: &F) -> [f64; 3] {
    let area = t.signed_area();
    let mids = [
        t.a.lerp(t.b, 0.5),
        t.b.lerp(t.c, 0.5),
        t.c.lerp(t.a, 0.5),
    ];
    let fv = [f(mids[0]), f(mids[1]), f(mids[2])];
    let w = area / 6.0;
    [
        w * (fv[0] + fv[2]),
        w * (fv[0] + fv[1]),
        w * (fv[1] + fv[2]),
    ]
}

/// Assembled linear system after symmetric Dirichlet elimination.
#[derive(Debug, Clone)]
pub struct SparseSystem {
    /// Reduced operator on the free nodes; symmetric positive definite.
    pub matrix: SymmetricSparse,
    /// Reduced right-hand side (load minus eliminated columns).
    pub rhs: Vec<f64>,
    /// Global node index per free slot.
    pub free_nodes: Vec<usize>,
    /// Dirichlet nodes with their boundary values, ascending by node.
    pub dirichlet: Vec<(usize, f64)>,
    /// Total node count of the mesh.
    pub n_nodes: usize,
}

impl SparseSystem {
    /// Scatters free values back into a full nodal vector, filling in the
    /// Dirichlet values.
    pub fn expand(&self, free_values: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.n_nodes];
        for (slot, &node) in self.free_nodes.iter().enumerate() {
            full[node] = free_values[slot];
        }
        for &(node, value) in &self.dirichlet {
            full[node] = value;
        }
        full
    }
}

/// Stiffness matrix and load vector over all nodes, without boundary
/// conditions. The matrix annihilates constant vectors.
pub fn assemble_unconstrained(
    fitted: &FittedMesh,
    spec: &ProblemSpec,
) -> Result<(SymmetricSparse, Vec<f64>)> {
    let mesh = &fitted.mesh;
    check_tags(fitted)?;
    let n = mesh.vertices.len();
    let mut triplets = Vec::with_capacity(9 * mesh.elements.len());
    let mut load = vec![0.0; n];
    for (e, el) in mesh.elements.iter().enumerate() {
        let tri = Triangle::new(
            mesh.vertices[el[0]],
            mesh.vertices[el[1]],
            mesh.vertices[el[2]],
        );
        let kappa = spec.coefficients.for_subdomain(fitted.tags[e]);
        let k = element_stiffness(&tri, kappa)?;
        let b = element_load(&tri, &*spec.source);
        for i in 0..3 {
            load[el[i]] += b[i];
            for j in 0..3 {
                triplets.push((el[i], el[j], k[i][j]));
            }
        }
    }
    Ok((SymmetricSparse::from_triplets(n, &triplets), load))
}

fn check_tags(fitted: &FittedMesh) -> Result<()> {
    if fitted.tags.len() != fitted.mesh.elements.len() {
        return Err(Error::UntaggedElement {
            element: fitted.tags.len(),
        });
    }
    Ok(())
}

/// Assembles the reduced Galerkin system: per-element coefficient from the
/// subdomain tag, Dirichlet data interpolated at boundary nodes (which stay
/// on the boundary even when fitting moved them, since midpoints only slide
/// along their edge).
pub fn assemble(fitted: &FittedMesh, spec: &ProblemSpec) -> Result<SparseSystem> {
    let mesh = &fitted.mesh;
    check_tags(fitted)?;
    let n = mesh.vertices.len();

    let mut slot_of: Vec<Option<usize>> = vec![None; n];
    let mut free_nodes = Vec::new();
    let mut dirichlet = Vec::new();
    let mut boundary_value = vec![0.0; n];
    for v in 0..n {
        if mesh.boundary[v] {
            let g = (spec.dirichlet)(mesh.vertices[v]);
            boundary_value[v] = g;
            dirichlet.push((v, g));
        } else {
            slot_of[v] = Some(free_nodes.len());
            free_nodes.push(v);
        }
    }

    let mut triplets = Vec::with_capacity(9 * mesh.elements.len());
    let mut rhs = vec![0.0; free_nodes.len()];
    for (e, el) in mesh.elements.iter().enumerate() {
        let tri = Triangle::new(
            mesh.vertices[el[0]],
            mesh.vertices[el[1]],
            mesh.vertices[el[2]],
        );
        let kappa = spec.coefficients.for_subdomain(fitted.tags[e]);
        let k = element_stiffness(&tri, kappa)?;
        let b = element_load(&tri, &*spec.source);
        for i in 0..3 {
            let Some(fi) = slot_of[el[i]] else { continue };
            rhs[fi] += b[i];
            for j in 0..3 {
                match slot_of[el[j]] {
                    Some(fj) => triplets.push((fi, fj, k[i][j])),
                    None => rhs[fi] -= k[i][j] * boundary_value[el[j]],
                }
            }
        }
    }

    Ok(SparseSystem {
        matrix: SymmetricSparse::from_triplets(free_nodes.len(), &triplets),
        rhs,
        free_nodes,
        dirichlet,
        n_nodes: n,
    })
}
