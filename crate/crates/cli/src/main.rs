//! `modcap`: capacities, modulus metric values, metric spheres and the
//! verification suites from the command line.
//!
//! Exit codes: 0 success, 1 a verification suite failed, 2 usage or
//! configuration error, 3 numerical failure.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "modcap", version, about = "Conformal capacity and modulus metric laboratory")]
pub struct Cli {
    /// Seed for every random choice (optimizer restarts, suite cases).
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; falls back to MODMETRIC_JOBS, then to all cores.
    #[arg(long, global = true, env = "MODMETRIC_JOBS")]
    pub jobs: Option<usize>,
    /// Directory receiving JSON/CSV/VTK outputs.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Capacity of a condenser (D, K).
    Capacity(CapacityArgs),
    /// Modulus metric value between two points.
    Metric(MetricArgs),
    /// Metric sphere about a point, with its roundness ratio.
    Sphere(SphereArgs),
    /// Polarize a compact set with respect to a sphere.
    Polarize(PolarizeArgs),
    /// Third sphere of the three-spheres construction.
    ThreeSpheres(ThreeSpheresArgs),
    /// Run verification suites ("all" for every suite).
    Verify(VerifyArgs),
    /// Ring capacity under successive grid halvings.
    Convergence(ConvergenceArgs),
}

#[derive(Args, Debug)]
pub struct SolverArgs {
    /// Exponent n (2 or 3).
    #[arg(short, long, default_value_t = 2)]
    pub n: u32,
    /// Solver configuration JSON; the flags below override it.
    #[arg(long)]
    pub solver: Option<PathBuf>,
    /// Relative stopping tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Newton iteration cap.
    #[arg(long)]
    pub max_iters: Option<usize>,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
pub struct KArgs {
    /// Closed ball "c0,c1[,c2],r".
    #[arg(long)]
    pub k_ball: Option<String>,
    /// JSON array of shapes, same schema as domain shapes.
    #[arg(long)]
    pub k_shapes: Option<PathBuf>,
    /// Point list file "x,y;x,y;..." rasterized as a polyline.
    #[arg(long)]
    pub k_points: Option<PathBuf>,
    /// Run-length CSV mask.
    #[arg(long)]
    pub k_rle: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CapacityArgs {
    /// Domain configuration JSON.
    #[arg(long)]
    pub domain: PathBuf,
    #[command(flatten)]
    pub k: KArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Also write the potential as VTK and CSV.
    #[arg(long)]
    pub export_field: bool,
}

#[derive(Args, Debug)]
pub struct OptArgs {
    /// Optimizer configuration JSON; the flags below override it.
    #[arg(long)]
    pub opt: Option<PathBuf>,
    #[arg(long)]
    pub control_points: Option<usize>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub max_evals: Option<usize>,
}

#[derive(Args, Debug)]
pub struct MetricArgs {
    #[arg(long)]
    pub domain: PathBuf,
    /// First point "x,y[,z]".
    #[arg(long, allow_hyphen_values = true)]
    pub x: String,
    /// Second point "x,y[,z]".
    #[arg(long, allow_hyphen_values = true)]
    pub y: String,
    #[arg(short, long, default_value_t = 2)]
    pub n: u32,
    #[command(flatten)]
    pub opt: OptArgs,
}

#[derive(Args, Debug)]
pub struct SphereArgs {
    #[arg(long)]
    pub domain: PathBuf,
    /// Centre "x,y[,z]".
    #[arg(long, allow_hyphen_values = true)]
    pub x0: String,
    /// Metric level of the (first) sphere.
    #[arg(long)]
    pub level: f64,
    /// Number of levels: level, level/2, level/4, ...
    #[arg(long, default_value_t = 1)]
    pub levels: usize,
    /// Rays per sphere (evenly spaced on the circle; Fibonacci lattice in space).
    #[arg(long, default_value_t = 16)]
    pub directions: usize,
    /// Relative tolerance of the level search.
    #[arg(long, default_value_t = 2e-3)]
    pub tol: f64,
    #[arg(short, long, default_value_t = 2)]
    pub n: u32,
    #[command(flatten)]
    pub opt: OptArgs,
}

#[derive(Args, Debug)]
pub struct PolarizeArgs {
    #[arg(long)]
    pub domain: PathBuf,
    #[command(flatten)]
    pub k: KArgs,
    /// Sphere "c0,c1[,c2],r"; its closed ball must lie in D.
    #[arg(long, allow_hyphen_values = true)]
    pub sphere: String,
    /// Keep only the component of the polarized set inside the ball containing this point.
    #[arg(long, allow_hyphen_values = true)]
    pub anchor: Option<String>,
    /// Also compare the capacities before and after.
    #[arg(long)]
    pub capacity: bool,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Args, Debug)]
pub struct ThreeSpheresArgs {
    /// Radius ratio k in (0, 1).
    #[arg(long)]
    pub k: f64,
    /// Angle at x2 between x1 and x0 in the normalized configuration.
    #[arg(long, conflicts_with_all = ["x0", "x1", "x2"])]
    pub theta: Option<f64>,
    #[arg(long, allow_hyphen_values = true, requires_all = ["r", "x1", "x2"])]
    pub x0: Option<String>,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub x1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub x2: Option<String>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Suite names or "all".
    #[arg(required = true)]
    pub suites: Vec<String>,
    /// Size preset: small or full.
    #[arg(long, default_value = "full")]
    pub grid: String,
    /// Suite configuration JSON applied to every selected suite; flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub cases: Option<usize>,
    #[arg(long)]
    pub cells: Option<usize>,
    #[arg(short, long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub slack: Option<f64>,
}

#[derive(Args, Debug)]
pub struct ConvergenceArgs {
    /// Size preset: small or full.
    #[arg(long, default_value = "full")]
    pub grid: String,
    /// Cells per axis of the coarsest grid (even).
    #[arg(long)]
    pub cells: Option<usize>,
    /// Number of grids.
    #[arg(long)]
    pub levels: Option<usize>,
    #[arg(short, long, default_value_t = 2)]
    pub n: u32,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
