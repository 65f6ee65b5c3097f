//! Hierarchical node splitting, diagonal basis scaling, and condition
//! number studies.
//!
//! Sliver cuts (intersection parameters near 0 or 1) shrink some basis
//! supports and blow up the stiffness diagonal, so the raw system matrix
//! can become arbitrarily ill-conditioned even though all angles stay
//! bounded. Rescaling every nodal basis function to unit energy norm is a
//! symmetric diagonal congruence that restores the usual O(h^-2) growth of
//! the condition number, uniformly in the cut position. The split into
//! coarse (macro) nodes and bubble (midpoint) nodes is a pure index
//! partition thanks to the mesh numbering.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

// Inherent f64 math appears once any crate in the graph links std; the
// trait import is what keeps the pure no_std build working.
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::assembly::{assemble, basis_gradients, element_stiffness, ProblemSpec, SparseSystem};
use crate::error::{Error, Result};
use crate::fitting::{fit_mesh, FittedMesh};
use crate::geometry::Triangle;
use crate::interface::{LevelSetInterface, DEFAULT_SNAP_TOL};
use crate::linalg::{cg_solve, extreme_eigs};
use crate::mesh::build_macro_mesh;

const EQ4_SEED: u64 = 0x0e94;
/// Rayleigh-quotient tolerance for the condition studies.
const STUDY_EIG_TOL: f64 = 1e-6;

/// Node index sets of the hierarchical splitting: coarse-mesh nodes versus
/// the refinement midpoints whose basis functions vanish on all macro
/// nodes.
#[derive(Debug, Clone)]
pub struct HierarchicalSplit {
    pub macro_nodes: Vec<usize>,
    pub bubble_nodes: Vec<usize>,
}

/// Splits the nodes by index: macro vertices come first by construction.
pub fn split_nodes(fitted: &FittedMesh) -> HierarchicalSplit {
    let nm = fitted.mesh.n_macro_vertices;
    let nv = fitted.mesh.vertices.len();
    HierarchicalSplit {
        macro_nodes: (0..nm).collect(),
        bubble_nodes: (nm..nv).collect(),
    }
}

/// Positive diagonal scaling of the nodal basis.
#[derive(Debug, Clone)]
pub struct BasisScaling {
    pub diagonal: Vec<f64>,
}

/// Scaling factors `d_i = L_ii^(-1/2)` from the unit-coefficient stiffness
/// matrix, so every scaled basis function has energy norm exactly one
/// (bubble and macro nodes alike).
pub fn compute_scaling(fitted: &FittedMesh) -> Result<BasisScaling> {
    let mesh = &fitted.mesh;
    let mut diag = vec![0.0; mesh.vertices.len()];
    for el in &mesh.elements {
        let tri = Triangle::new(
            mesh.vertices[el[0]],
            mesh.vertices[el[1]],
            mesh.vertices[el[2]],
        );
        let k = element_stiffness(&tri, 1.0)?;
        for i in 0..3 {
            diag[el[i]] += k[i][i];
        }
    }
    let mut scaling = Vec::with_capacity(diag.len());
    for (node, &v) in diag.iter().enumerate() {
        if !(v > 0.0) {
            return Err(Error::NonPositiveDiagonal { node });
        }
        scaling.push(1.0 / v.sqrt());
    }
    Ok(BasisScaling { diagonal: scaling })
}

/// Applies the congruence `A_hat = D A D`, `b_hat = D b` on the free nodes.
/// A solution of the scaled system recovers the original one via `x = D
/// x_hat`.
pub fn scaled_system(sys: &SparseSystem, sc: &BasisScaling) -> Result<SparseSystem> {
    if sc.diagonal.len() != sys.n_nodes {
        return Err(Error::DimensionMismatch {
            expected: sys.n_nodes,
            got: sc.diagonal.len(),
        });
    }
    let d_free: Vec<f64> = sys.free_nodes.iter().map(|&v| sc.diagonal[v]).collect();
    let matrix = sys.matrix.scale_symmetric(&d_free)?;
    let rhs: Vec<f64> = sys.rhs.iter().zip(&d_free).map(|(b, d)| b * d).collect();
    Ok(SparseSystem {
        matrix,
        rhs,
        free_nodes: sys.free_nodes.clone(),
        dirichlet: sys.dirichlet.clone(),
        n_nodes: sys.n_nodes,
    })
}

/// Iteration count and final residual of a solve.
#[derive(Debug, Clone, Copy)]
pub struct SolveStats {
    pub iterations: usize,
    pub residual: f64,
}

/// Solves the reduced system by conjugate gradients, optionally through the
/// scaled basis, and returns the full nodal vector with Dirichlet values
/// filled in.
pub fn solve_system(
    sys: &SparseSystem,
    scaling: Option<&BasisScaling>,
    rel_tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, SolveStats)> {
    match scaling {
        None => {
            let res = cg_solve(&sys.matrix, &sys.rhs, rel_tol, max_iter)?;
            let stats = SolveStats {
                iterations: res.iterations,
                residual: res.residual,
            };
            Ok((sys.expand(&res.solution), stats))
        }
        Some(sc) => {
            let scaled = scaled_system(sys, sc)?;
            let res = cg_solve(&scaled.matrix, &scaled.rhs, rel_tol, max_iter)?;
            let mut free = res.solution;
            for (slot, &node) in sys.free_nodes.iter().enumerate() {
                free[slot] *= sc.diagonal[node];
            }
            let stats = SolveStats {
                iterations: res.iterations,
                residual: res.residual,
            };
            Ok((sys.expand(&free), stats))
        }
    }
}

/// One measurement of the condition study.
#[derive(Debug, Clone, Copy)]
pub struct ConditionRow {
    pub level: usize,
    pub n: usize,
    pub h: f64,
    /// Offset added to the interface radius for the sliver probes; zero for
    /// the plain refinement rows.
    pub radius_offset: f64,
    pub scaled: bool,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub cond2: f64,
}

fn condition_row(
    spec: &ProblemSpec,
    iface: &LevelSetInterface,
    level: usize,
    n: usize,
    radius_offset: f64,
    with_scaling: bool,
) -> Result<ConditionRow> {
    let mesh = build_macro_mesh(n)?.refine()?;
    let h = mesh.mesh_size();
    let fitted = fit_mesh(&mesh, iface, DEFAULT_SNAP_TOL)?;
    let sys = assemble(&fitted, spec)?;
    let matrix = if with_scaling {
        let sc = compute_scaling(&fitted)?;
        scaled_system(&sys, &sc)?.matrix
    } else {
        sys.matrix
    };
    let (lambda_min, lambda_max) = extreme_eigs(&matrix, STUDY_EIG_TOL)?;
    Ok(ConditionRow {
        level,
        n,
        h,
        radius_offset,
        scaled: with_scaling,
        lambda_min,
        lambda_max,
        cond2: lambda_max / lambda_min,
    })
}

/// Measures cond_2 of the (optionally scaled) system matrix over a sequence
/// of uniformly refined meshes, and probes sliver cuts by offsetting a
/// circular interface radius by q * h_min for q in {1e-1, 1e-3, 1e-6} at
/// the coarsest resolution. Non-circular interfaces skip the sliver rows.
pub fn condition_study(
    spec: &ProblemSpec,
    n0: usize,
    levels: usize,
    with_scaling: bool,
) -> Result<Vec<ConditionRow>> {
    if levels < 2 {
        return Err(Error::ParameterOutOfRange {
            name: "levels",
            value: levels as f64,
        });
    }
    let mut rows = Vec::new();
    for k in 0..levels {
        let n = n0
            .checked_shl(k as u32)
            .ok_or(Error::InvalidGridSize)?;
        let row = condition_row(spec, &spec.interface, k, n, 0.0, with_scaling)
            .map_err(|e| Error::AtLevel {
                level: k,
                source: Box::new(e),
            })?;
        rows.push(row);
    }
    if let LevelSetInterface::Circle { center, radius } = spec.interface {
        let h_min = build_macro_mesh(n0)?.refine()?.min_edge_length();
        for q in [1e-1, 1e-3, 1e-6] {
            let offset = q * h_min;
            let probe = LevelSetInterface::Circle {
                center,
                radius: radius + offset,
            };
            rows.push(condition_row(spec, &probe, 0, n0, offset, with_scaling)?);
        }
    }
    Ok(rows)
}

struct Adjacency {
    elements_of: Vec<Vec<usize>>,
    patches_of: Vec<Vec<usize>>,
}

impl Adjacency {
    fn build(fitted: &FittedMesh) -> Self {
        let nv = fitted.mesh.vertices.len();
        let mut elements_of: Vec<Vec<usize>> = vec![Vec::new(); nv];
        for (e, el) in fitted.mesh.elements.iter().enumerate() {
            for &v in el {
                elements_of[v].push(e);
            }
        }
        let mut patches_of: Vec<Vec<usize>> = vec![Vec::new(); nv];
        for (p, patch) in fitted.mesh.patches.iter().enumerate() {
            for &v in patch.corners.iter().chain(patch.midpoints.iter()) {
                patches_of[v].push(p);
            }
        }
        Self {
            elements_of,
            patches_of,
        }
    }
}

/// Largest observed ratio |coefficient| / local energy norm at one bubble
/// node: sample 0 is the single-bubble vector itself, the rest are random
/// coefficient vectors supported on the bubble nodes of the adjacent
/// patches.
fn eq4_node_ratio(
    fitted: &FittedMesh,
    sc: &BasisScaling,
    adj: &Adjacency,
    node: usize,
    samples: usize,
) -> f64 {
    let mesh = &fitted.mesh;
    let mut support: Vec<usize> = adj.patches_of[node]
        .iter()
        .flat_map(|&p| mesh.patches[p].midpoints)
        .collect();
    support.sort_unstable();
    support.dedup();
    let me = support.iter().position(|&v| v == node).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(EQ4_SEED ^ (node as u64));
    let mut worst: f64 = 0.0;
    let mut coeffs = vec![0.0; support.len()];
    for sample in 0..=samples {
        if sample == 0 {
            coeffs.fill(0.0);
            coeffs[me] = 1.0;
        } else {
            for c in coeffs.iter_mut() {
                *c = rng.random_range(-1.0..1.0);
            }
        }
        if coeffs[me] == 0.0 {
            continue;
        }
        // Energy of v_b over the elements containing the node; the bubble
        // coefficients act through the scaled basis.
        let mut energy = 0.0;
        for &e in &adj.elements_of[node] {
            let el = mesh.elements[e];
            let tri = Triangle::new(
                mesh.vertices[el[0]],
                mesh.vertices[el[1]],
                mesh.vertices[el[2]],
            );
            let (grads, area) = basis_gradients(&tri).expect("fitted mesh has valid elements");
            let mut gx = 0.0;
            let mut gy = 0.0;
            for k in 0..3 {
                if let Some(pos) = support.iter().position(|&v| v == el[k]) {
                    let w = coeffs[pos] * sc.diagonal[el[k]];
                    gx += w * grads[k][0];
                    gy += w * grads[k][1];
                }
            }
            energy += (gx * gx + gy * gy) * area;
        }
        if energy > 0.0 {
            worst = worst.max(coeffs[me].abs() / energy.sqrt());
        }
    }
    worst
}

/// Verifies the coefficient-versus-local-norm stability of the scaled
/// bubble basis: returns the maximum over all bubble nodes and samples of
/// |v_b^i| / ||v_b||_{N_i}, where N_i is the set of elements containing
/// node i and the norm is the local energy norm. Bounded uniformly across
/// refinement levels and cut positions when the scaling does its job.
pub fn verify_eq4(fitted: &FittedMesh, sc: &BasisScaling, samples: usize) -> f64 {
    let adj = Adjacency::build(fitted);
    let mut worst: f64 = 0.0;
    for node in fitted.mesh.n_macro_vertices..fitted.mesh.vertices.len() {
        worst = worst.max(eq4_node_ratio(fitted, sc, &adj, node, samples));
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::MaterialCoefficients;
    use crate::geometry::Point2;
    use crate::linalg::SymmetricSparse;
    use approx::assert_relative_eq;

    fn fit_circle(n: usize) -> FittedMesh {
        let mesh = build_macro_mesh(n).unwrap().refine().unwrap();
        let phi = LevelSetInterface::circle(0.0, 0.0, 0.5);
        fit_mesh(&mesh, &phi, DEFAULT_SNAP_TOL).unwrap()
    }

    fn circle_spec(kappa1: f64, kappa2: f64) -> ProblemSpec {
        ProblemSpec {
            coefficients: MaterialCoefficients::new(kappa1, kappa2).unwrap(),
            source: Box::new(|_| 1.0),
            dirichlet: Box::new(|_| 0.0),
            interface: LevelSetInterface::circle(0.0, 0.0, 0.5),
        }
    }

    #[test]
    fn split_counts() {
        for (n, macros, bubbles) in [(1usize, 4usize, 5usize), (2, 9, 16)] {
            let mesh = build_macro_mesh(n).unwrap().refine().unwrap();
            let fitted = fit_mesh(&mesh, &(|_: Point2| 1.0), DEFAULT_SNAP_TOL).unwrap();
            let split = split_nodes(&fitted);
            assert_eq!(split.macro_nodes.len(), macros);
            assert_eq!(split.bubble_nodes.len(), bubbles);
            assert_eq!(
                split.macro_nodes.len() + split.bubble_nodes.len(),
                fitted.mesh.vertex_count()
            );
        }
    }

    #[test]
    fn scaled_basis_has_unit_energy() {
        let fitted = fit_circle(4);
        let sc = compute_scaling(&fitted).unwrap();
        // Recompute per-node energies of the scaled basis functions.
        let mut energy = vec![0.0; fitted.mesh.vertex_count()];
        for el in &fitted.mesh.elements {
            let tri = Triangle::new(
                fitted.mesh.vertices[el[0]],
                fitted.mesh.vertices[el[1]],
                fitted.mesh.vertices[el[2]],
            );
            let (grads, area) = basis_gradients(&tri).unwrap();
            for k in 0..3 {
                let d = sc.diagonal[el[k]];
                energy[el[k]] +=
                    d * d * (grads[k][0] * grads[k][0] + grads[k][1] * grads[k][1]) * area;
            }
        }
        for e in energy {
            assert_relative_eq!(e, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn uniform_mesh_has_uniform_interior_scaling() {
        // The refined structured mesh is congruent to the structured mesh
        // of twice the resolution, so every interior node sees the same
        // element star up to translation.
        let mesh = build_macro_mesh(4).unwrap().refine().unwrap();
        let fitted = fit_mesh(&mesh, &(|_: Point2| 1.0), DEFAULT_SNAP_TOL).unwrap();
        let sc = compute_scaling(&fitted).unwrap();
        let interior: Vec<f64> = (0..fitted.mesh.vertex_count())
            .filter(|&v| !fitted.mesh.boundary[v])
            .map(|v| sc.diagonal[v])
            .collect();
        assert!(!interior.is_empty());
        for &d in &interior {
            assert_relative_eq!(d, interior[0], max_relative = 1e-12);
        }
    }

    #[test]
    fn scaling_identity_when_diagonal_is_one() {
        let fitted = fit_circle(2);
        let sys = assemble(&fitted, &circle_spec(1.0, 10.0)).unwrap();
        let ones = BasisScaling {
            diagonal: vec![1.0; fitted.mesh.vertex_count()],
        };
        let scaled = scaled_system(&sys, &ones).unwrap();
        assert_eq!(scaled.rhs, sys.rhs);
        let x = vec![1.0; sys.matrix.n()];
        assert_eq!(
            scaled.matrix.matvec(&x).unwrap(),
            sys.matrix.matvec(&x).unwrap()
        );
    }

    #[test]
    fn diagonal_congruence_on_diagonal_matrix() {
        let a = SymmetricSparse::from_triplets(2, &[(0, 0, 2.0), (1, 1, 8.0)]);
        let scaled = a.scale_symmetric(&[0.5, 2.0]).unwrap();
        assert_eq!(scaled.matvec(&[1.0, 1.0]).unwrap(), vec![0.5, 32.0]);
    }

    #[test]
    fn scaled_and_unscaled_solutions_agree() {
        let fitted = fit_circle(8);
        let spec = circle_spec(1.0, 10.0);
        let sys = assemble(&fitted, &spec).unwrap();
        let sc = compute_scaling(&fitted).unwrap();
        let (plain, _) = solve_system(&sys, None, 1e-12, 100_000).unwrap();
        let (scaled, _) = solve_system(&sys, Some(&sc), 1e-12, 100_000).unwrap();
        let norm: f64 = plain.iter().map(|v| v * v).sum::<f64>().sqrt();
        let diff: f64 = plain
            .iter()
            .zip(&scaled)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        assert!(diff <= 1e-8 * norm, "diff {diff}, norm {norm}");
    }

    #[test]
    fn single_bubble_ratio_is_one() {
        let fitted = fit_circle(4);
        let sc = compute_scaling(&fitted).unwrap();
        let adj = Adjacency::build(&fitted);
        for node in fitted.mesh.n_macro_vertices..fitted.mesh.vertex_count() {
            // The single-bubble vector has unit coefficient and unit local
            // energy (the basis function's whole support is its node star).
            let ratio = eq4_node_ratio(&fitted, &sc, &adj, node, 0);
            assert_relative_eq!(ratio, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn eq4_ratio_bounded_on_uniform_mesh() {
        let mesh = build_macro_mesh(4).unwrap().refine().unwrap();
        let fitted = fit_mesh(&mesh, &(|_: Point2| 1.0), DEFAULT_SNAP_TOL).unwrap();
        let sc = compute_scaling(&fitted).unwrap();
        let max = verify_eq4(&fitted, &sc, 20);
        assert!(max >= 1.0);
        assert!(max < 20.0, "eq4 ratio {max}");
    }

    #[test]
    fn condition_study_levels() {
        let spec = circle_spec(1.0, 10.0);
        let rows = condition_study(&spec, 4, 2, true).unwrap();
        // 2 level rows + 3 sliver rows.
        assert_eq!(rows.len(), 5);
        assert!(rows[1].cond2 > rows[0].cond2);
        for row in &rows {
            assert!(row.lambda_min > 0.0 && row.lambda_max > row.lambda_min);
        }
    }
}
