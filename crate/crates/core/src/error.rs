//! Error type shared by all modules of the crate.

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::fmt;

/// Errors from mesh construction, interface fitting, assembly and solvers.
#[derive(Debug, Clone)]
pub enum Error {
    /// Angle query with coincident points.
    DegenerateAngle,
    /// Triangle whose area is below the degeneracy threshold.
    DegenerateTriangle,
    /// Macro grid resolution must be at least 1.
    InvalidGridSize,
    /// The macro mesh is not a conforming triangulation.
    Nonconforming(&'static str),
    /// Snap tolerance outside the admissible interval (0, 0.1).
    SnapTolOutOfRange(f64),
    /// The interface cuts a patch in a pattern outside the supported cases;
    /// a finer macro mesh resolves this.
    AssumptionViolated { patch: usize },
    /// Configuration selection on an uncut patch.
    NothingToFit,
    /// A numeric argument is outside its admissible range.
    ParameterOutOfRange { name: &'static str, value: f64 },
    /// Node movement produced a flipped or degenerate element.
    InvalidFit { element: usize },
    /// Element without a subdomain tag.
    UntaggedElement { element: usize },
    /// Interface specification string could not be parsed.
    InvalidInterfaceSpec,
    /// Vector/matrix dimensions do not match.
    DimensionMismatch { expected: usize, got: usize },
    /// A conjugate-gradient direction had non-positive curvature.
    NotSpd,
    /// Iteration budget exhausted; carries the final residual and best iterate.
    NoConvergence {
        iterations: usize,
        residual: f64,
        best: Vec<f64>,
    },
    /// Stiffness diagonal entry that should be positive is not.
    NonPositiveDiagonal { node: usize },
    /// Interface radius outside (0, 1).
    RadiusOutOfRange(f64),
    /// A multi-level study failed at the given level.
    AtLevel { level: usize, source: Box<Error> },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DegenerateAngle => write!(f, "degenerate angle"),
            Error::DegenerateTriangle => write!(f, "degenerate triangle"),
            Error::InvalidGridSize => write!(f, "macro grid resolution must be at least 1"),
            Error::Nonconforming(what) => write!(f, "nonconforming macro mesh: {what}"),
            Error::SnapTolOutOfRange(v) => {
                write!(f, "snap tolerance {v} outside (0, 0.1)")
            }
            Error::AssumptionViolated { patch } => {
                write!(f, "assumption violated: refine macro mesh (patch {patch})")
            }
            Error::NothingToFit => write!(f, "nothing to fit"),
            Error::ParameterOutOfRange { name, value } => {
                write!(f, "parameter {name} = {value} out of range")
            }
            Error::InvalidFit { element } => {
                write!(f, "fitting produced invalid mesh (element {element})")
            }
            Error::UntaggedElement { element } => write!(f, "untagged element {element}"),
            Error::InvalidInterfaceSpec => {
                write!(f, "invalid interface spec (expected circle:cx,cy,R or affine:nx,ny,c)")
            }
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::NotSpd => write!(f, "matrix not SPD"),
            Error::NoConvergence {
                iterations,
                residual,
                ..
            } => write!(
                f,
                "no convergence after {iterations} iterations (residual {residual:e})"
            ),
            Error::NonPositiveDiagonal { node } => {
                write!(f, "non-positive stiffness diagonal at node {node}")
            }
            Error::RadiusOutOfRange(r) => write!(f, "radius {r} outside (0, 1)"),
            Error::AtLevel { level, source } => write!(f, "level {level}: {source}"),
        }
    }
}

impl core::error::Error for Error {
    fn source(&self) -> Option<&(dyn core::error::Error + 'static)> {
        match self {
            Error::AtLevel { source, .. } => Some(source),
            _ => None,
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
