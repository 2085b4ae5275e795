use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use henonlab::C64;
use serde::Serialize;

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "henonlab",
    version,
    about = "Green functions, unstable slices, connectivity and horseshoes of Hénon maps"
)]
pub struct Cli {
    /// Artifact path; the run manifest goes next to it as `<out>.manifest.json`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Seed for every random stream of the run.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Wall-clock budget in seconds for commands that can stop early.
    #[arg(long, global = true)]
    pub budget_secs: Option<f64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Green function values, of `a − x²` or, with `--b`, of the Hénon map.
    Green(GreenArgs),
    /// Connectedness of the Julia set of `a − x²`.
    #[command(name = "connectivity-1d")]
    Connectivity1d(Connectivity1dArgs),
    /// Lyapunov exponent of `a − x²`.
    #[command(name = "lyapunov-1d")]
    Lyapunov1d(Lyapunov1dArgs),
    /// Periodic points of a given period with their eigendata.
    Saddles(SaddlesArgs),
    /// Escape-rate picture of an unstable slice.
    RenderSlice(RenderSliceArgs),
    /// Both connectivity tests on the default saddle.
    #[command(name = "connectivity-2d")]
    Connectivity2d(Connectivity2dArgs),
    /// Probe verdicts over a rectangle of parameters.
    RenderParam(RenderParamArgs),
    /// Lyapunov exponents of the saddle-orbit measure.
    Lambda(LambdaArgs),
    /// Interval-arithmetic horseshoe certificate.
    HorseshoeCertify(HorseshoeArgs),
    /// Real and complex periodic-point counts.
    Census(CensusArgs),
    /// Bisection for the boundary of the horseshoe locus at fixed `b`.
    BoundaryScan(BoundaryScanArgs),
    /// HTTP tile service.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, Args, Serialize)]
pub struct MapArgs {
    /// Parameter `a`, real or complex (`1.5`, `0.2+0.3i`).
    #[arg(long, allow_hyphen_values = true)]
    pub a: C64,
    /// Jacobian `b`, nonzero.
    #[arg(long, allow_hyphen_values = true)]
    pub b: C64,
}

#[derive(Debug, Args, Serialize)]
pub struct GreenArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub a: C64,
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<C64>,
    #[arg(long, allow_hyphen_values = true, default_value = "0")]
    pub x: C64,
    #[arg(long, allow_hyphen_values = true, default_value = "0")]
    pub y: C64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = henonlab::oracle1d::DEFAULT_DEPTH)]
    pub depth: u32,
}

#[derive(Debug, Args, Serialize)]
pub struct Connectivity1dArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub a: C64,
    #[arg(long, default_value_t = 1_000_000)]
    pub max_iter: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method1d {
    CriticalFormula,
    ErgodicAverage,
}

#[derive(Debug, Args, Serialize)]
pub struct Lyapunov1dArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub a: C64,
    #[arg(long, value_enum, default_value_t = Method1d::CriticalFormula)]
    pub method: Method1d,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 100_000)]
    pub n_points: usize,
    #[arg(long, default_value_t = 60)]
    pub depth: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchArg {
    Complex,
    Real,
}

#[derive(Debug, Args, Serialize)]
pub struct SaddlesArgs {
    #[command(flatten)]
    pub map: MapArgs,
    #[arg(long)]
    pub n: u32,
    #[arg(long, value_enum, default_value_t = SearchArg::Complex)]
    pub search: SearchArg,
    #[arg(long, default_value_t = 20)]
    pub starts_per_point: u32,
    #[arg(long, default_value_t = 60)]
    pub max_newton_steps: u32,
}

#[derive(Debug, Args, Serialize)]
pub struct RenderSliceArgs {
    #[command(flatten)]
    pub map: MapArgs,
    /// Image width; also the height unless `--height` is given.
    #[arg(long, default_value_t = 512)]
    pub res: u32,
    #[arg(long)]
    pub height: Option<u32>,
    #[arg(long, default_value_t = 200)]
    pub depth: u32,
    #[arg(long, default_value_t = 1.0)]
    pub thicken: f64,
    /// Index of the fixed point to linearize at; the default saddle if absent.
    #[arg(long)]
    pub saddle: Option<usize>,
    /// Window corners `x0 y0 x1 y1` in the linearizing coordinate.
    #[arg(long, num_args = 4, allow_hyphen_values = true, default_values_t = [-3.0, -3.0, 3.0, 3.0])]
    pub window: Vec<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct Connectivity2dArgs {
    #[command(flatten)]
    pub map: MapArgs,
    #[arg(long, default_value_t = 256)]
    pub res: u32,
    #[arg(long, default_value_t = 200)]
    pub depth: u32,
    /// Half-width of the square window around the saddle.
    #[arg(long, default_value_t = 3.0)]
    pub radius: f64,
    /// Test the stable slice instead.
    #[arg(long)]
    pub stable: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeArg {
    Connectivity,
    Horseshoe,
    EscapeOfMeasure,
}

#[derive(Debug, Args, Serialize)]
pub struct RenderParamArgs {
    #[arg(long, value_enum)]
    pub probe: ProbeArg,
    /// Real rectangle `a0 a1 b0 b1`.
    #[arg(long, num_args = 4, allow_hyphen_values = true, conflicts_with = "a_window")]
    pub ab: Option<Vec<f64>>,
    /// Complex `a` window `x0 y0 x1 y1`, used with `--b`.
    #[arg(long, num_args = 4, allow_hyphen_values = true, requires = "b")]
    pub a_window: Option<Vec<f64>>,
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<C64>,
    #[arg(long, default_value_t = 64)]
    pub res: u32,
    #[arg(long)]
    pub height: Option<u32>,
    #[arg(long, default_value_t = 64)]
    pub grid: u32,
    #[arg(long, default_value_t = 200)]
    pub depth: u32,
    #[arg(long, default_value_t = 6)]
    pub max_period: u32,
    #[arg(long, default_value_t = 5e11)]
    pub cost_cap: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct LambdaArgs {
    #[command(flatten)]
    pub map: MapArgs,
    #[arg(long, default_value_t = 1)]
    pub min_period: u32,
    #[arg(long, default_value_t = 6)]
    pub max_period: u32,
}

#[derive(Debug, Args, Serialize)]
pub struct HorseshoeArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub a: f64,
    /// Jacobian; omit for the one-variable map `a − x²`.
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
    #[arg(long)]
    pub grid: Option<u32>,
    #[arg(long)]
    pub max_steps: Option<u32>,
}

#[derive(Debug, Args, Serialize)]
pub struct CensusArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub a: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub b: f64,
    #[arg(long, default_value_t = 6)]
    pub n: u32,
}

#[derive(Debug, Args, Serialize)]
pub struct BoundaryScanArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub b: f64,
    #[arg(long, num_args = 2, allow_hyphen_values = true, default_values_t = [1.5, 4.0])]
    pub bracket: Vec<f64>,
    #[arg(long, default_value_t = 6)]
    pub n: u32,
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
    #[arg(long, default_value_t = 60)]
    pub max_evaluations: u32,
    #[arg(long)]
    pub no_tangency: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    /// Requests computed at once; further requests get 503.
    #[arg(long)]
    pub workers: Option<usize>,
}
