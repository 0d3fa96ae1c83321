//! Command line front end: configuration, subcommands mapped onto the
//! library's sweep/map/interferogram operations, deterministic CSV output,
//! and the self-verification table.

use std::fmt;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

pub mod commands;
pub mod config;
pub mod measured;
pub mod output;

/// CLI failure with the exit-code contract: 1 for validation problems,
/// 2 for numerical ones.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Numerical(String),
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        Self::Validation(message.into())
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Self::Numerical(message.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Validation(_) => 1,
            Self::Numerical(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Validation(m) => write!(f, "{m}"),
            Self::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<nisim::Error> for CliError {
    fn from(e: nisim::Error) -> Self {
        match e {
            nisim::Error::QuadratureNonConvergence { .. } => Self::Numerical(e.to_string()),
            other => Self::Validation(other.to_string()),
        }
    }
}

impl From<config::ConfigError> for CliError {
    fn from(e: config::ConfigError) -> Self {
        Self::Validation(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AxisArg {
    Y,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PortArg {
    O,
    H,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    /// Low-frequency closed form J0.
    Closed,
    /// Adaptive quadrature of the arrival-phase average (default).
    Quadrature,
    /// Seeded Monte Carlo average.
    Mc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeightArg {
    /// One extra crystal: average of e^{i beta}.
    Single,
    /// Four-blade loop: average of e^{i 2 beta}.
    Double,
}

/// Perfect-crystal neutron interferometer simulator.
#[derive(Debug, Parser)]
#[command(name = "nisim", version, about)]
pub struct Cli {
    /// Configuration file (falls back to $NISIM_CONFIG, then defaults).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output file (default: <subcommand>.csv).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Interpret frequency inputs as Hz (multiply by 2 pi).
    #[arg(long, global = true)]
    pub hz: bool,

    /// Also write a JSON sibling next to the CSV.
    #[arg(long, global = true)]
    pub json: bool,

    /// Worker thread cap for sweeps and maps (0 = automatic).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Coherence magnitude versus vibration frequency per geometry.
    Sweep {
        /// Vibration axis.
        #[arg(long, value_enum, default_value_t = AxisArg::Y)]
        axis: AxisArg,
        /// Geometries: "all" or a comma list of 3,4,5.
        #[arg(long, default_value = "all")]
        geometry: String,
        /// Frequencies: "start:step:end" or a comma list.
        #[arg(long, default_value = "0:2:400")]
        omega: String,
        /// Vibration amplitude (length for y, angle for z); defaults from
        /// the configuration.
        #[arg(long)]
        amplitude: Option<String>,
        #[arg(long, value_enum, default_value_t = MethodArg::Quadrature)]
        method: MethodArg,
    },
    /// Five-blade H intensity on a flag-phase grid (one omega).
    Densitymap {
        #[arg(long, default_value_t = 100.0)]
        omega: f64,
        /// Grid points per axis (>= 16).
        #[arg(long, default_value_t = 128)]
        grid: usize,
        #[arg(long, value_enum, default_value_t = AxisArg::Y)]
        axis: AxisArg,
        #[arg(long, value_enum, default_value_t = MethodArg::Quadrature)]
        method: MethodArg,
    },
    /// Noise-averaged fringe versus the loop-1 flag phase.
    Interferogram {
        /// Geometry: 3, 4 or 5.
        #[arg(long, default_value_t = 3)]
        geometry: u8,
        #[arg(long, value_enum, default_value_t = AxisArg::Y)]
        axis: AxisArg,
        #[arg(long, default_value_t = 0.0)]
        omega: f64,
        #[arg(long, value_enum, default_value_t = PortArg::O)]
        port: PortArg,
        /// Loop-2 flag phase (five-blade only), radians.
        #[arg(long, default_value_t = 0.0)]
        chi: f64,
        #[arg(long, default_value_t = 360)]
        points: usize,
        #[arg(long, value_enum, default_value_t = MethodArg::Quadrature)]
        method: MethodArg,
    },
    /// Five-blade fringe along the correlated flag line chi = mu - phi.
    Refocus {
        /// Frequencies, comma list or range.
        #[arg(long, default_value = "0,100,150,200")]
        omega: String,
        /// Line offset mu in radians.
        #[arg(long, default_value_t = std::f64::consts::PI)]
        mu: f64,
        #[arg(long, value_enum, default_value_t = AxisArg::Y)]
        axis: AxisArg,
        #[arg(long, default_value_t = 256)]
        points: usize,
        #[arg(long, value_enum, default_value_t = MethodArg::Quadrature)]
        method: MethodArg,
    },
    /// Contrast and phase of the momentum average as an analyzer crystal
    /// rocks through the Bragg angle.
    Ddscan {
        /// Misalignment grid in microradians, "start:step:end".
        #[arg(long, default_value = "-30:0.5:30", allow_hyphen_values = true)]
        range: String,
        /// Blade thickness (length with unit, e.g. "2mm").
        #[arg(long)]
        thickness: Option<String>,
        /// Wavelength (length with unit, e.g. "2.71angstrom").
        #[arg(long)]
        lambda: Option<String>,
        /// Lorentzian width parameter (angle with unit).
        #[arg(long)]
        sigma: Option<String>,
        #[arg(long, value_enum, default_value_t = WeightArg::Single)]
        weight: WeightArg,
        /// Tabulated phase profile file (microradians / radians columns)
        /// replacing the analytic model.
        #[arg(long)]
        profile: Option<PathBuf>,
    },
    /// Single-row report of the dynamical-phase contrast estimate.
    Ddcontrast {
        /// Geometry: 3, 4 or 5 (3 and 5 refocus the phase exactly).
        #[arg(long, default_value_t = 4)]
        geometry: u8,
        #[arg(long)]
        thickness: Option<String>,
        #[arg(long)]
        lambda: Option<String>,
        #[arg(long)]
        sigma: Option<String>,
    },
    /// Residuals of a measured series against a simulated curve.
    Compare {
        /// Measured CSV with header x,y[,y_err].
        #[arg(long)]
        measured: PathBuf,
        /// Simulated CSV with header x,y.
        #[arg(long)]
        simulated: PathBuf,
    },
    /// Runs the verification suite and prints one line per criterion.
    Selftest,
}

/// Parses "start:step:end" (end included when it lands within half a step)
/// or a comma list of numbers.
pub fn parse_value_list(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = |what: &str| CliError::validation(format!("cannot parse {what:?} in {spec:?}"));
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(CliError::validation(format!(
                "range must be start:step:end, got {spec:?}"
            )));
        }
        let start: f64 = parts[0].trim().parse().map_err(|_| bad(parts[0]))?;
        let step: f64 = parts[1].trim().parse().map_err(|_| bad(parts[1]))?;
        let end: f64 = parts[2].trim().parse().map_err(|_| bad(parts[2]))?;
        if !(step.is_finite() && step > 0.0) || end < start {
            return Err(CliError::validation(format!(
                "need positive step and end >= start, got {spec:?}"
            )));
        }
        if !(start.is_finite() && end.is_finite()) {
            return Err(CliError::validation(format!(
                "range bounds must be finite, got {spec:?}"
            )));
        }
        let n = ((end - start) / step + 0.5).floor() as usize;
        Ok((0..=n).map(|k| start + step * k as f64).collect())
    } else {
        spec.split(',')
            .map(|s| {
                let v: f64 = s.trim().parse().map_err(|_| bad(s))?;
                if !v.is_finite() {
                    return Err(CliError::validation(format!("non-finite value {s:?}")));
                }
                Ok(v)
            })
            .collect()
    }
}

/// Runs the CLI with the given argument vector; returns the exit code.
pub fn run<I, T>(args: I) -> Result<i32, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Validation(e.to_string()))?;
    commands::dispatch(cli)
}
