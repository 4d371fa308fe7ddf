//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use vcl_core::balance::DEFAULT_TOL;

/// Find, verify and analyze binary point-vortex crystals.
#[derive(Debug, Parser)]
#[command(name = "vcl", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a crystal from one of the built-in families.
    Generate(GenerateArgs),
    /// Report the balance residual of a configuration.
    Check(CheckArgs),
    /// Refine a near-crystal by Gauss-Newton.
    Solve(SolveArgs),
    /// Rank of the balance Jacobian and the nondegeneracy verdict.
    Rank(RankArgs),
    /// Integrate the free vortex dynamics with RK4.
    Integrate(IntegrateArgs),
    /// Refine a one-parameter family and track rank changes.
    Sweep(SweepArgs),
    /// Sample the flow field on a grid and write CSV.
    Field(FieldArgs),
    /// Write the limit multigraph as an OBJ mesh.
    Mesh(MeshArgs),
    /// Period vectors of the limit minimal surfaces.
    Limits(LimitsArgs),
}

#[derive(Debug, Args)]
pub struct Tolerance {
    /// Balance tolerance on the residual sup-norm.
    #[arg(long, env = "VCL_TOL", default_value_t = DEFAULT_TOL)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(subcommand)]
    pub family: Family,
    /// Write the configuration here instead of standard output.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Root {
    Inner,
    Outer,
}

#[derive(Debug, Subcommand)]
pub enum Family {
    /// Opposite pair at ±i/(4π), translating with v = 1.
    Pair,
    /// Identical vortices on a regular polygon.
    Thomson {
        /// Number of vertices.
        #[arg(long)]
        n: usize,
        /// Circulation of every vortex, +1 or -1.
        #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
        sigma: i8,
    },
    /// Negative polygon with a central vortex.
    Centered {
        /// Number of vertices.
        #[arg(long)]
        n: usize,
        /// Circulation of the central vortex.
        #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
        center_sigma: i8,
    },
    /// Negative vortices at the roots of H_n.
    Hermite {
        /// Hermite degree.
        #[arg(long)]
        n: usize,
    },
    /// Positive roots of H_{m+1} and negative roots of H_m.
    Interlaced {
        /// Index m.
        #[arg(long)]
        m: usize,
    },
    /// Two concentric (k+1)-gons of opposite circulation.
    Nested {
        /// Index k, at least 1.
        #[arg(long)]
        k: usize,
        /// Which solution of the radius-ratio equation to use.
        #[arg(long, value_enum, default_value_t = Root::Inner)]
        root: Root,
    },
    /// Symmetric translating crystal from the j-th Adler-Moser polynomial.
    AdlerMoser {
        /// Index j, 1 to 8.
        #[arg(long)]
        j: usize,
    },
    /// Singly periodic vortex street.
    Karman {
        /// Distance between the rows.
        #[arg(long)]
        b: f64,
        /// Put the rows on top of each other instead of staggering them.
        #[arg(long)]
        aligned: bool,
    },
    /// Opposite pair on the torus C/<1, tau>.
    Dipole {
        /// Real part of tau.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        tau_re: f64,
        /// Imaginary part of tau.
        #[arg(long, default_value_t = 1.0)]
        tau_im: f64,
        /// Real part of the negative vortex position; default is the cell center.
        #[arg(long, allow_negative_numbers = true)]
        offset_re: Option<f64>,
        /// Imaginary part of the negative vortex position; default is the cell center.
        #[arg(long, allow_negative_numbers = true)]
        offset_im: Option<f64>,
    },
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Configuration document.
    pub config: PathBuf,
    #[command(flatten)]
    pub tol: Tolerance,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Configuration document; its motion block seeds the motion.
    pub config: PathBuf,
    #[command(flatten)]
    pub tol: Tolerance,
    /// Iteration cap.
    #[arg(long, default_value_t = 50)]
    pub max_iter: usize,
    /// Initial step length of the line search, in (0, 1].
    #[arg(long, default_value_t = 1.0)]
    pub damping: f64,
    /// Solve for the motion together with the positions.
    #[arg(long)]
    pub fit_motion: bool,
    /// Do not remove the trivial symmetry directions.
    #[arg(long)]
    pub free_gauge: bool,
    /// Keep a real coordinate fixed (index into Re p1, Im p1, Re p2, ...). Repeatable.
    #[arg(long)]
    pub pin: Vec<usize>,
    /// Restrict to perturbations respecting the document's symmetry block,
    /// or the detected symmetries if there is none.
    #[arg(long)]
    pub symmetric: bool,
    /// Write the refined configuration here.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    /// Configuration document.
    pub config: PathBuf,
    /// Restrict to perturbations respecting the document's symmetry block,
    /// or the detected symmetries if there is none.
    #[arg(long)]
    pub symmetry: bool,
    /// Exit with status 1 when the crystal is degenerate.
    #[arg(long)]
    pub require_nondegenerate: bool,
    /// Relative singular-value cutoff; defaults to 2n·1e-11.
    #[arg(long)]
    pub rel_tol: Option<f64>,
    #[command(flatten)]
    pub tol: Tolerance,
}

#[derive(Debug, Args)]
pub struct IntegrateArgs {
    /// Configuration document.
    pub config: PathBuf,
    /// Final time.
    #[arg(long)]
    pub t_end: f64,
    /// Time step.
    #[arg(long)]
    pub dt: f64,
    /// Keep every k-th sample in the written trajectory.
    #[arg(long, default_value_t = 1)]
    pub every: usize,
    /// Write the trajectory here as JSON.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepFamily {
    /// Staggered streets, parameter b.
    Karman,
    /// Aligned streets, parameter b.
    KarmanAligned,
    /// Dipoles on tau = i·s at the cell center, parameter s.
    Dipole,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Family to sweep.
    #[arg(value_enum)]
    pub family: SweepFamily,
    /// Name of the swept parameter: b for streets, s for dipoles.
    #[arg(long)]
    pub param: String,
    /// First parameter value.
    #[arg(long)]
    pub from: f64,
    /// Last parameter value.
    #[arg(long)]
    pub to: f64,
    /// Number of samples, both ends included.
    #[arg(long, default_value_t = 11)]
    pub steps: usize,
}

#[derive(Debug, Args)]
pub struct FieldArgs {
    /// Configuration document.
    pub config: PathBuf,
    /// Samples per side.
    #[arg(long, default_value_t = 41)]
    pub grid: usize,
    /// Half-width of the sampled square around the centroid; defaults to
    /// covering every vortex.
    #[arg(long)]
    pub half_width: Option<f64>,
    /// CSV output path.
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct MeshArgs {
    /// Configuration document.
    pub config: PathBuf,
    /// ε for the period report attached to balanced crystals.
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    /// Number of turns of the multigraph.
    #[arg(long, default_value_t = 1)]
    pub turns: usize,
    /// Grid cells per side.
    #[arg(long, default_value_t = 80)]
    pub cells: usize,
    /// Half-width of the meshed square; defaults to covering every vortex.
    #[arg(long)]
    pub half_width: Option<f64>,
    /// Exclusion radius around each vortex; defaults to 0.05 × the minimum separation.
    #[arg(long)]
    pub exclusion: Option<f64>,
    /// OBJ output path; the vortex lines go next to it with extension `lines.obj`.
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct LimitsArgs {
    /// Configuration document.
    pub config: PathBuf,
    /// Scale parameter ε of the surface family.
    #[arg(long)]
    pub eps: f64,
}
