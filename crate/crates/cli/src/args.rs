use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "drop-moduli",
    version,
    about = "Equilibrium shapes of cylindrical rotating liquid drops: classify parameter points, \
             trace profile curves, scan the moduli plane, and run stability tests"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct ParamArgs {
    /// Rotation coefficient a.
    #[arg(long, allow_hyphen_values = true)]
    pub a: f64,
    /// Lagrange multiplier (canonical gauges: 0 with a = -1, or 1).
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub lambda0: f64,
    /// Level constant C of the first integral.
    #[arg(long = "C", allow_hyphen_values = true)]
    pub c: f64,
}

#[derive(Args, Debug, Clone)]
pub struct NumericArgs {
    /// Tolerance for rational-angle detection.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Largest denominator accepted when snapping the piece angle to a
    /// rational multiple of 2 pi.
    #[arg(long, default_value_t = 64)]
    pub max_denominator: u64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ProblemArg {
    Free,
    Fixed,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Json,
    Csv,
    Svg,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Classify a parameter point: roots, bands, moduli region, circles.
    Classify {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = FormatArg::Json)]
        format: FormatArg,
    },
    /// Critical level constants C_i(a) and the circle radii branches.
    Critical {
        /// Rotation coefficient a.
        #[arg(long, allow_hyphen_values = true)]
        a: f64,
        /// Lagrange multiplier.
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        lambda0: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = FormatArg::Json)]
        format: FormatArg,
    },
    /// Trace a profile curve: CSV samples plus a JSON summary.
    Trace {
        #[command(flatten)]
        params: ParamArgs,
        /// Band selector: `first`, `second`, or a 1-based index.
        #[arg(long, default_value = "first")]
        band: String,
        /// Assemble exactly this many copies of the fundamental piece
        /// (open layout); default closes the curve when the angle is
        /// rational.
        #[arg(long)]
        pieces: Option<usize>,
        /// Arc-length cap for exceptional (non-closing) traces.
        #[arg(long, default_value_t = 200.0)]
        max_arclength: f64,
        #[command(flatten)]
        numeric: NumericArgs,
        /// CSV destination (summary JSON goes to stdout). Without it the CSV
        /// goes to stdout and the summary to stderr.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
    },
    /// Piece angles of every band, the two-band identity check, and the
    /// critical-level limits.
    DeltaTheta {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = FormatArg::Json)]
        format: FormatArg,
    },
    /// Scan a rectangle of the (a, C) plane into a CSV of classified cells.
    Scan {
        /// a range as `lo:hi`.
        #[arg(long = "a-range", allow_hyphen_values = true)]
        a_range: String,
        /// C range as `lo:hi`.
        #[arg(long = "C-range", alias = "c-range", allow_hyphen_values = true)]
        c_range: String,
        /// Grid resolution as `NxM` (a-steps x C-steps).
        #[arg(long, default_value = "25x25")]
        grid: String,
        /// Lagrange multiplier.
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        lambda0: f64,
        #[command(flatten)]
        numeric: NumericArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
    },
    /// Stability report for a round cylinder or a traced closed curve.
    Stability {
        #[command(flatten)]
        params: ParamArgs,
        /// Cylinder height.
        #[arg(long)]
        h: f64,
        #[arg(long, value_enum)]
        problem: ProblemArg,
        /// Analyze the round cylinder of this radius instead of tracing.
        #[arg(long)]
        radius: Option<f64>,
        /// Band selector for traced curves.
        #[arg(long, default_value = "first")]
        band: String,
        #[command(flatten)]
        numeric: NumericArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = FormatArg::Json)]
        format: FormatArg,
    },
    /// Render a traced CSV as an SVG polyline.
    Render {
        /// Input CSV produced by `trace`.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overlay circles at the minimal and maximal radius.
        #[arg(long, default_value_t = false)]
        overlay_extrema: bool,
        /// Overlay a dashed limit circle of this radius.
        #[arg(long, allow_negative_numbers = false)]
        limit_r: Option<f64>,
        #[arg(long, value_enum, default_value_t = FormatArg::Svg)]
        format: FormatArg,
    },
}

/// Parse a band selector into a 0-based index.
pub fn parse_band(spec: &str) -> Result<usize, String> {
    match spec {
        "first" => Ok(0),
        "second" => Ok(1),
        other => other
            .parse::<usize>()
            .ok()
            .and_then(|n| n.checked_sub(1))
            .ok_or_else(|| {
                format!("invalid band selector '{other}' (use first, second, or a 1-based index)")
            }),
    }
}

/// Parse `lo:hi`.
pub fn parse_range(spec: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = spec
        .split_once(':')
        .ok_or_else(|| format!("invalid range '{spec}' (use lo:hi)"))?;
    let lo: f64 = lo
        .parse()
        .map_err(|_| format!("invalid range bound '{lo}'"))?;
    let hi: f64 = hi
        .parse()
        .map_err(|_| format!("invalid range bound '{hi}'"))?;
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(format!("range '{spec}' must be finite with lo <= hi"));
    }
    Ok((lo, hi))
}

/// Parse `NxM`.
pub fn parse_grid(spec: &str) -> Result<(usize, usize), String> {
    let (n, m) = spec
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("invalid grid '{spec}' (use NxM)"))?;
    let n: usize = n.parse().map_err(|_| format!("invalid grid count '{n}'"))?;
    let m: usize = m.parse().map_err(|_| format!("invalid grid count '{m}'"))?;
    if n == 0 || m == 0 {
        return Err("grid counts must be positive".to_string());
    }
    Ok((n, m))
}
