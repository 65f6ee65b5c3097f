//! Command line front end: study drivers and mesh export.
//!
//! Exit codes: 0 on success, 1 on numerical failure, 2 on usage errors.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use fitfem_core::analysis::{
    convergence_study, radial_manufactured, solve_problem, ConvergenceRow,
};
use fitfem_core::assembly::{MaterialCoefficients, ProblemSpec};
use fitfem_core::conditioning::{condition_study, ConditionRow};
use fitfem_core::error_norms;
use fitfem_core::fitting::{fit_mesh, reference_patch_sweep};
use fitfem_core::geometry::Point2;
use fitfem_core::interface::{LevelSetInterface, DEFAULT_SNAP_TOL};
use fitfem_core::mesh::build_macro_mesh;

#[derive(Parser)]
#[command(
    name = "fitfem",
    version,
    about = "Interface-fitted finite elements on patch-hierarchical triangular meshes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ProblemArgs {
    /// Diffusion coefficient inside the interface (phi < 0).
    #[arg(long, default_value_t = 1.0)]
    kappa1: f64,
    /// Diffusion coefficient outside the interface (phi > 0).
    #[arg(long, default_value_t = 10.0)]
    kappa2: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one interface problem and print a summary line.
    Solve {
        /// Macro grid resolution (n x n cells).
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        problem: ProblemArgs,
        /// Interface spec: circle:cx,cy,R or affine:nx,ny,c.
        #[arg(long, value_parser = LevelSetInterface::parse)]
        interface: LevelSetInterface,
        /// Solve without the unit-energy basis scaling.
        #[arg(long)]
        no_scaling: bool,
        /// Write the CSV to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convergence study against the radial reference solution.
    Convergence {
        /// Coarsest macro resolution.
        #[arg(long, default_value_t = 4)]
        n0: usize,
        /// Number of uniform refinements (levels).
        #[arg(long, default_value_t = 6)]
        levels: usize,
        #[command(flatten)]
        problem: ProblemArgs,
        /// Interface circle radius.
        #[arg(long, default_value_t = 0.5)]
        radius: f64,
        /// Write the CSV to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustive reference-patch angle sweep.
    Angles {
        /// Grid density per cut parameter.
        #[arg(long)]
        sweep: usize,
    },
    /// Condition number study with and without basis scaling.
    Condition {
        /// Coarsest macro resolution.
        #[arg(long, default_value_t = 4)]
        n0: usize,
        /// Number of uniform refinements (levels).
        #[arg(long, default_value_t = 4)]
        levels: usize,
        #[command(flatten)]
        problem: ProblemArgs,
        /// Interface circle radius.
        #[arg(long, default_value_t = 0.5)]
        radius: f64,
        /// Measure the raw (unscaled) system matrix.
        #[arg(long)]
        no_scaling: bool,
        /// Include the sliver probes (radius offset q * h_min).
        #[arg(long)]
        sliver_sweep: bool,
        /// Write the CSV to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit a mesh to an interface and write it as sectioned plain text.
    ExportMesh {
        /// Macro grid resolution (n x n cells).
        #[arg(long)]
        n: usize,
        /// Interface spec: circle:cx,cy,R or affine:nx,ny,c.
        #[arg(long, value_parser = LevelSetInterface::parse)]
        interface: LevelSetInterface,
        /// Output path.
        #[arg(long)]
        out: PathBuf,
    },
}

type DynError = Box<dyn std::error::Error>;

/// Runs the tool on the given argv (program name included) and writes the
/// primary output to `out` unless redirected by `--out`.
pub fn run_cli<I, W>(args: I, out: &mut W) -> i32
where
    I: IntoIterator<Item = String>,
    W: Write,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn with_output<W: Write>(
    out: &mut W,
    path: Option<&PathBuf>,
    body: impl FnOnce(&mut dyn Write) -> Result<(), DynError>,
) -> Result<(), DynError> {
    match path {
        Some(p) => {
            let mut file = BufWriter::new(File::create(p)?);
            body(&mut file)?;
            file.flush()?;
            Ok(())
        }
        None => body(out),
    }
}

fn dispatch<W: Write>(command: Command, out: &mut W) -> Result<(), DynError> {
    match command {
        Command::Solve {
            n,
            problem,
            interface,
            no_scaling,
            out: out_path,
        } => with_output(out, out_path.as_ref(), |w| {
            solve(n, &problem, interface, !no_scaling, w)
        }),
        Command::Convergence {
            n0,
            levels,
            problem,
            radius,
            out: out_path,
        } => {
            let mp = radial_manufactured(problem.kappa1, problem.kappa2, radius)?;
            let rows = convergence_study(&mp, n0, levels)?;
            with_output(out, out_path.as_ref(), |w| write_convergence_csv(w, &rows))
        }
        Command::Angles { sweep } => {
            let max = reference_patch_sweep(sweep)?;
            writeln!(out, "max_angle_deg,{max:.10}")?;
            Ok(())
        }
        Command::Condition {
            n0,
            levels,
            problem,
            radius,
            no_scaling,
            sliver_sweep,
            out: out_path,
        } => {
            let spec = ProblemSpec {
                coefficients: MaterialCoefficients::new(problem.kappa1, problem.kappa2)?,
                source: Box::new(|_| 1.0),
                dirichlet: Box::new(|_| 0.0),
                interface: LevelSetInterface::circle(0.0, 0.0, radius),
            };
            let rows = condition_study(&spec, n0, levels, !no_scaling)?;
            with_output(out, out_path.as_ref(), |w| {
                write_condition_csv(w, &rows, sliver_sweep)
            })
        }
        Command::ExportMesh {
            n,
            interface,
            out: out_path,
        } => {
            let mesh = build_macro_mesh(n)?.refine()?;
            let fitted = fit_mesh(&mesh, &interface, DEFAULT_SNAP_TOL)?;
            let mut file = BufWriter::new(File::create(&out_path)?);
            crate::export::write_fitted_mesh(&mut file, &fitted)?;
            file.flush()?;
            Ok(())
        }
    }
}

fn solve(
    n: usize,
    problem: &ProblemArgs,
    interface: LevelSetInterface,
    with_scaling: bool,
    w: &mut dyn Write,
) -> Result<(), DynError> {
    // A circle centered at the origin matches the radial reference
    // solution, so errors can be reported; any other interface solves the
    // unit-source problem without error columns.
    let manufactured = match interface {
        LevelSetInterface::Circle { center, radius }
            if center == Point2::new(0.0, 0.0) && radius > 0.0 && radius < 1.0 =>
        {
            Some(radial_manufactured(problem.kappa1, problem.kappa2, radius)?)
        }
        _ => None,
    };
    let fallback_spec;
    let spec = match &manufactured {
        Some(mp) => &mp.spec,
        None => {
            fallback_spec = ProblemSpec {
                coefficients: MaterialCoefficients::new(problem.kappa1, problem.kappa2)?,
                source: Box::new(|_| 1.0),
                dirichlet: Box::new(|_| 0.0),
                interface,
            };
            &fallback_spec
        }
    };
    let outcome = solve_problem(spec, n, with_scaling)?;
    let (l2, h1) = match &manufactured {
        Some(mp) => {
            let (l2, h1) = error_norms(&outcome.fitted, &outcome.solution, mp)?;
            (format!("{l2:e}"), format!("{h1:e}"))
        }
        None => (String::new(), String::new()),
    };
    writeln!(
        w,
        "nverts,h,l2_error,h1_error,max_angle_deg,cg_iterations,cg_residual"
    )?;
    writeln!(
        w,
        "{},{},{},{},{:.3},{},{:e}",
        outcome.fitted.mesh.vertex_count(),
        outcome.h,
        l2,
        h1,
        outcome.max_angle_deg,
        outcome.stats.iterations,
        outcome.stats.residual,
    )?;
    Ok(())
}

fn write_convergence_csv(w: &mut dyn Write, rows: &[ConvergenceRow]) -> Result<(), DynError> {
    writeln!(w, "nverts,h,l2_error,l2_rate,h1_error,h1_rate,max_angle_deg")?;
    for row in rows {
        let rate = |r: Option<f64>| r.map(|v| format!("{v:.4}")).unwrap_or_default();
        writeln!(
            w,
            "{},{},{:e},{},{:e},{},{:.3}",
            row.nverts,
            row.h,
            row.l2_error,
            rate(row.l2_rate),
            row.h1_error,
            rate(row.h1_rate),
            row.max_angle_deg,
        )?;
    }
    Ok(())
}

fn write_condition_csv(
    w: &mut dyn Write,
    rows: &[ConditionRow],
    sliver_sweep: bool,
) -> Result<(), DynError> {
    writeln!(
        w,
        "level,n,h,radius_offset,scaled,lambda_min,lambda_max,cond2"
    )?;
    for row in rows {
        if row.radius_offset != 0.0 && !sliver_sweep {
            continue;
        }
        writeln!(
            w,
            "{},{},{},{:e},{},{:e},{:e},{:e}",
            row.level,
            row.n,
            row.h,
            row.radius_offset,
            row.scaled,
            row.lambda_min,
            row.lambda_max,
            row.cond2,
        )?;
    }
    Ok(())
}
