//! Manufactured solutions, discretization error norms, and convergence
//! studies over uniformly refined meshes.

use alloc::boxed::Box;
use alloc::vec::Vec;


// Inherent f64 math appears once any crate in the graph links std; the
// trait import is what keeps the pure no_std build working.
#[allow(unused_imports)]
use num_traits::Float;
use crate::assembly::{assemble, basis_gradients, MaterialCoefficients, ProblemSpec, ScalarField};
use crate::conditioning::{compute_scaling, solve_system, SolveStats};
use crate::error::{Error, Result};
use crate::fitting::{fit_mesh, tag_by_centroid, verify_angles, FittedMesh};
use crate::geometry::{Point2, Triangle};
use crate::interface::{LevelSetInterface, DEFAULT_SNAP_TOL};
use crate::mesh::build_macro_mesh;

/// Conjugate-gradient tolerance of the study solves; far below the
/// discretization error at every resolution considered here.
pub const STUDY_CG_TOL: f64 = 1e-12;
const STUDY_CG_MAX_ITER: usize = 200_000;

/// A boundary value problem with known exact solution and gradient.
pub struct ManufacturedProblem {
    pub spec: ProblemSpec,
    pub exact: ScalarField,
    pub exact_gradient: Box<dyn Fn(Point2) -> [f64; 2] + Send + Sync>,
}

fn radial_value(p: Point2, kappa1: f64, kappa2: f64, radius: f64, shift: f64) -> f64 {
    let r2 = p.x * p.x + p.y * p.y;
    if r2.sqrt() <= radius {
        r2 / kappa1 + shift
    } else {
        r2 / kappa2
    }
}

/// The radial reference problem on the unit square: piecewise `r^2 / kappa`
/// around a circular interface centered at the origin, glued continuously.
///
/// The radial flux `kappa * (2r / kappa) = 2r` matches across the
/// interface, so both transmission conditions hold identically; the source
/// is the constant `-4` and the Dirichlet data is the trace of the exact
/// solution.
pub fn radial_manufactured(
    kappa1: f64,
    kappa2: f64,
    radius: f64,
) -> Result<ManufacturedProblem> {
    let coefficients = MaterialCoefficients::new(kappa1, kappa2)?;
    if !(radius > 0.0 && radius < 1.0) {
        return Err(Error::RadiusOutOfRange(radius));
    }
    let shift = radius * radius * (1.0 / kappa2 - 1.0 / kappa1);
    let value = move |p: Point2| radial_value(p, kappa1, kappa2, radius, shift);
    let gradient = move |p: Point2| {
        let kappa = if (p.x * p.x + p.y * p.y).sqrt() <= radius {
            kappa1
        } else {
            kappa2
        };
        [2.0 * p.x / kappa, 2.0 * p.y / kappa]
    };
    Ok(ManufacturedProblem {
        spec: ProblemSpec {
            coefficients,
            source: Box::new(|_| -4.0),
            dirichlet: Box::new(value),
            interface: LevelSetInterface::circle(0.0, 0.0, radius),
        },
        exact: Box::new(value),
        exact_gradient: Box::new(gradient),
    })
}

/// Six-point, degree-4 triangle quadrature: barycentric coordinates and
/// weights relative to the element area.
const QUADRATURE: [([f64; 3], f64); 6] = [
    (
        [0.108103018168070, 0.445948490915965, 0.445948490915965],
        0.223381589678011,
    ),
    (
        [0.445948490915965, 0.108103018168070, 0.445948490915965],
        0.223381589678011,
    ),
    (
        [0.445948490915965, 0.445948490915965, 0.108103018168070],
        0.223381589678011,
    ),
    (
        [0.816847572980459, 0.091576213509771, 0.091576213509771],
        0.109951743655322,
    ),
    (
        [0.091576213509771, 0.816847572980459, 0.091576213509771],
        0.109951743655322,
    ),
    (
        [0.091576213509771, 0.091576213509771, 0.816847572980459],
        0.109951743655322,
    ),
];

/// L2 and H1-seminorm errors of a nodal solution against the exact one.
///
/// The exact solution is evaluated by its own geometry (the true interface
/// sign) at every quadrature point, so elements whose straight chord
/// deviates from the curved interface contribute their genuine error.
pub fn error_norms(
    fitted: &FittedMesh,
    solution: &[f64],
    problem: &ManufacturedProblem,
) -> Result<(f64, f64)> {
    let mesh = &fitted.mesh;
    if solution.len() != mesh.vertices.len() {
        return Err(Error::DimensionMismatch {
            expected: mesh.vertices.len(),
            got: solution.len(),
        });
    }
    let mut l2 = 0.0;
    let mut h1 = 0.0;
    for el in &mesh.elements {
        let [a, b, c] = [
            mesh.vertices[el[0]],
            mesh.vertices[el[1]],
            mesh.vertices[el[2]],
        ];
        let tri = Triangle::new(a, b, c);
        let (grads, area) = basis_gradients(&tri)?;
        let vals = [solution[el[0]], solution[el[1]], solution[el[2]]];
        let mut gh = [0.0, 0.0];
        for k in 0..3 {
            gh[0] += vals[k] * grads[k][0];
            gh[1] += vals[k] * grads[k][1];
        }
        for (bary, w) in QUADRATURE {
            let p = Point2::new(
                bary[0] * a.x + bary[1] * b.x + bary[2] * c.x,
                bary[0] * a.y + bary[1] * b.y + bary[2] * c.y,
            );
            let uh = bary[0] * vals[0] + bary[1] * vals[1] + bary[2] * vals[2];
            let du = (problem.exact)(p) - uh;
            l2 += w * area * du * du;
            let g = (problem.exact_gradient)(p);
            let (dx, dy) = (g[0] - gh[0], g[1] - gh[1]);
            h1 += w * area * (dx * dx + dy * dy);
        }
    }
    Ok((l2.sqrt(), h1.sqrt()))
}

/// One level of a convergence study.
#[derive(Debug, Clone, Copy)]
pub struct ConvergenceRow {
    pub nverts: usize,
    pub h: f64,
    pub l2_error: f64,
    /// log2 of the error drop from the previous level; `None` on the first.
    pub l2_rate: Option<f64>,
    pub h1_error: f64,
    pub h1_rate: Option<f64>,
    pub max_angle_deg: f64,
}

/// Output of a single solve on a fixed mesh.
pub struct SolveOutcome {
    pub fitted: FittedMesh,
    pub solution: Vec<f64>,
    pub stats: SolveStats,
    /// Mesh size of the unfitted mesh the level was built from.
    pub h: f64,
    pub max_angle_deg: f64,
}

/// Builds, fits, assembles and solves the problem on an n x n macro grid.
pub fn solve_problem(spec: &ProblemSpec, n: usize, with_scaling: bool) -> Result<SolveOutcome> {
    let mesh = build_macro_mesh(n)?.refine()?;
    let h = mesh.mesh_size();
    let fitted = fit_mesh(&mesh, &spec.interface, DEFAULT_SNAP_TOL)?;
    solve_on(fitted, spec, h, with_scaling)
}

/// Same pipeline but without any mesh modification: elements are tagged by
/// centroid sign on the unfitted mesh. Used to quantify what resolving the
/// interface buys.
pub fn solve_problem_unfitted(spec: &ProblemSpec, n: usize) -> Result<SolveOutcome> {
    let mesh = build_macro_mesh(n)?.refine()?;
    let h = mesh.mesh_size();
    let fitted = tag_by_centroid(&mesh, &spec.interface);
    solve_on(fitted, spec, h, true)
}

fn solve_on(
    fitted: FittedMesh,
    spec: &ProblemSpec,
    h: f64,
    with_scaling: bool,
) -> Result<SolveOutcome> {
    let sys = assemble(&fitted, spec)?;
    let scaling = if with_scaling {
        Some(compute_scaling(&fitted)?)
    } else {
        None
    };
    let (solution, stats) =
        solve_system(&sys, scaling.as_ref(), STUDY_CG_TOL, STUDY_CG_MAX_ITER)?;
    let (max_angle_deg, _) = verify_angles(&fitted)?;
    Ok(SolveOutcome {
        fitted,
        solution,
        stats,
        h,
        max_angle_deg,
    })
}

/// Full convergence study: for k = 0..levels the resolution n0 * 2^k is
/// built, fitted, solved and measured; rates are log2 ratios of consecutive
/// errors.
pub fn convergence_study(
    problem: &ManufacturedProblem,
    n0: usize,
    levels: usize,
) -> Result<Vec<ConvergenceRow>> {
    if levels < 2 {
        return Err(Error::ParameterOutOfRange {
            name: "levels",
            value: levels as f64,
        });
    }
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(levels);
    for k in 0..levels {
        let n = n0.checked_shl(k as u32).ok_or(Error::InvalidGridSize)?;
        let row = (|| -> Result<ConvergenceRow> {
            let outcome = solve_problem(&problem.spec, n, true)?;
            let (l2_error, h1_error) = error_norms(&outcome.fitted, &outcome.solution, problem)?;
            Ok(ConvergenceRow {
                nverts: outcome.fitted.mesh.vertex_count(),
                h: outcome.h,
                l2_error,
                l2_rate: None,
                h1_error,
                h1_rate: None,
                max_angle_deg: outcome.max_angle_deg,
            })
        })()
        .map_err(|e| Error::AtLevel {
            level: k,
            source: Box::new(e),
        })?;
        rows.push(row);
    }
    for k in 1..rows.len() {
        rows[k].l2_rate = Some((rows[k - 1].l2_error / rows[k].l2_error).log2());
        rows[k].h1_rate = Some((rows[k - 1].h1_error / rows[k].h1_error).log2());
    }
    Ok(rows)
}
