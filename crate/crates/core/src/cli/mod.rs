//! Command-line front end.
//!
//! Exit codes: 0 success, 1 numerical or I/O failure (including a failed
//! figure check), 2 usage error. Worker threads follow `RAYON_NUM_THREADS`.

mod commands;
pub mod config;
mod figures;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use crate::error::ChainError;
use config::{ChainInputs, Config};
use output::{OutputDir, ProxyCheck, RunManifest};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "ionchain", version, about = "Ring ion-chain phonons and Ramsey visibility")]
pub struct Cli {
    /// Flat key-value config file; flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Directory for CSV outputs and the run manifest.
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    pub out_dir: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct ChainArgs {
    /// Number of ions (even, at least 4).
    #[arg(long = "N", value_name = "N")]
    pub n_ions: Option<usize>,
    /// Distance to the critical transverse frequency, Δ/ω₀.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "nu_t")]
    pub delta: Option<f64>,
    /// Transverse trap frequency ν_t/ω₀.
    #[arg(long = "nu-t")]
    pub nu_t: Option<f64>,
    /// Lamb-Dicke parameter at the critical frequency.
    #[arg(long = "eta-c")]
    pub eta_c: Option<f64>,
    /// Temperature k_B T / (ħ ω₀).
    #[arg(long)]
    pub theta: Option<f64>,
    /// Ion mass in kg (physical input).
    #[arg(long)]
    pub ion_mass_kg: Option<f64>,
    /// Ion charge in C.
    #[arg(long)]
    pub ion_charge_c: Option<f64>,
    /// Inter-ion spacing in m.
    #[arg(long)]
    pub spacing_m: Option<f64>,
    /// Laser wave number in 1/m.
    #[arg(long)]
    pub laser_wavenumber: Option<f64>,
    /// Transverse trap frequency in rad/s.
    #[arg(long)]
    pub transverse_frequency: Option<f64>,
    /// Temperature in K.
    #[arg(long)]
    pub temperature_k: Option<f64>,
}

impl ChainArgs {
    fn inputs(&self) -> ChainInputs {
        ChainInputs {
            n_ions: self.n_ions,
            delta: self.delta,
            nu_t: self.nu_t,
            eta_c: self.eta_c,
            theta: self.theta,
            ion_mass_kg: self.ion_mass_kg,
            ion_charge_c: self.ion_charge_c,
            spacing_m: self.spacing_m,
            laser_wavenumber: self.laser_wavenumber,
            transverse_frequency: self.transverse_frequency,
            temperature_k: self.temperature_k,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Axial and transverse dispersion of the linear chain.
    Spectrum {
        #[command(flatten)]
        chain: ChainArgs,
    },
    /// Zigzag equilibrium and Hessian normal modes.
    Zigzag {
        #[command(flatten)]
        chain: ChainArgs,
        /// Points in an optional b(ν_t) bifurcation scan.
        #[arg(long)]
        scan_points: Option<usize>,
    },
    /// Visibility exponent, visibility and overlap on a time grid.
    Visibility {
        #[command(flatten)]
        chain: ChainArgs,
        #[arg(long, allow_hyphen_values = true)]
        t_min: Option<f64>,
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Fourier spectrum of the visibility on a symmetric window.
    Fourier {
        #[command(flatten)]
        chain: ChainArgs,
        /// Window length T_F (1/ω₀).
        #[arg(long)]
        window: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
        /// Peak prominence relative to the largest non-DC amplitude.
        #[arg(long)]
        prominence: Option<f64>,
        /// Skip the transverse band overlay.
        #[arg(long)]
        no_band: bool,
        /// Cap on samples × modes.
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Γ(Δ) and dΓ/dΔ on a log grid, optionally across the transition.
    GammaScan {
        #[command(flatten)]
        chain: ChainArgs,
        #[arg(long)]
        delta_min: Option<f64>,
        #[arg(long)]
        delta_max: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        /// Also scan Γ symmetrically through Δ = 0 using zigzag spectra.
        #[arg(long)]
        cusp: bool,
        #[arg(long)]
        cusp_n: Option<usize>,
        #[arg(long)]
        cusp_points: Option<usize>,
    },
    /// Γ, dΓ/dΔ, A_∞ and t* tables.
    Asymptotics {
        #[command(flatten)]
        chain: ChainArgs,
        #[arg(long)]
        delta_min: Option<f64>,
        #[arg(long)]
        delta_max: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
    },
    /// Exact against continuum visibility at long times, with revival detection.
    Longtime {
        #[command(flatten)]
        chain: ChainArgs,
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
    },
    /// Canned parameter sets for figures 2 to 7.
    Figures {
        /// Figure number (2-7) or `all`.
        #[arg(long, default_value = "all")]
        which: String,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Spectrum { .. } => "spectrum",
            Command::Zigzag { .. } => "zigzag",
            Command::Visibility { .. } => "visibility",
            Command::Fourier { .. } => "fourier",
            Command::GammaScan { .. } => "gamma-scan",
            Command::Asymptotics { .. } => "asymptotics",
            Command::Longtime { .. } => "longtime",
            Command::Figures { .. } => "figures",
        }
    }
}

/// Failure of a CLI run, carrying its exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Chain(ChainError),
    Check(String),
}

impl From<ChainError> for CliError {
    fn from(e: ChainError) -> Self {
        match e {
            ChainError::InvalidParameter(msg) => CliError::Usage(msg),
            other => CliError::Chain(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            _ => EXIT_FAILURE,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Chain(e) => write!(f, "{} error: {e}", e.kind()),
            CliError::Check(m) => write!(f, "check failed: {m}"),
        }
    }
}

/// Shared state of one run.
pub(crate) struct Run {
    pub cfg: Config,
    pub out: OutputDir,
    pub inputs: Map<String, Value>,
    pub params: Value,
    pub grids: Map<String, Value>,
    pub results: Map<String, Value>,
    pub proxies: Vec<ProxyCheck>,
}

impl Run {
    pub fn proxy(&mut self, name: &str, value: f64, threshold: &str, pass: bool) {
        let mark = if pass { "ok" } else { "FAILED" };
        eprintln!("[{mark}] {name}: {value:.6e} ({threshold})");
        self.proxies.push(ProxyCheck { name: name.into(), value, threshold: threshold.into(), pass });
    }
}

/// Parses `argv` (program name first), runs the subcommand and returns the exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli, &argv) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("ionchain: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli, argv: &[OsString]) -> Result<(), CliError> {
    let start = Instant::now();
    let cfg = match &cli.config {
        Some(path) => Config::load(path).map_err(|e| match e {
            ChainError::Io(io) => CliError::Usage(format!("cannot read config {}: {io}", path.display())),
            other => other.into(),
        })?,
        None => Config::default(),
    };
    let name = cli.command.name();
    let mut run = Run {
        cfg,
        out: OutputDir::new(cli.out_dir.clone())?,
        inputs: Map::new(),
        params: Value::Null,
        grids: Map::new(),
        results: Map::new(),
        proxies: Vec::new(),
    };
    if let Some(path) = &cli.config {
        run.inputs.insert("config".into(), json!(path.display().to_string()));
    }
    let outcome = match &cli.command {
        Command::Spectrum { chain } => commands::spectrum(&mut run, &chain.inputs()),
        Command::Zigzag { chain, scan_points } => commands::zigzag(&mut run, &chain.inputs(), *scan_points),
        Command::Visibility { chain, t_min, t_max, samples } => {
            commands::visibility(&mut run, &chain.inputs(), *t_min, *t_max, *samples)
        }
        Command::Fourier { chain, window, samples, prominence, no_band, budget } => commands::fourier(
            &mut run,
            &chain.inputs(),
            commands::FourierOptions {
                window: *window,
                samples: *samples,
                prominence: *prominence,
                band: !*no_band,
                budget: *budget,
            },
        ),
        Command::GammaScan { chain, delta_min, delta_max, points, cusp, cusp_n, cusp_points } => commands::gamma_scan(
            &mut run,
            &chain.inputs(),
            commands::ScanOptions { delta_min: *delta_min, delta_max: *delta_max, points: *points },
            cusp.then_some((*cusp_n, *cusp_points)),
        ),
        Command::Asymptotics { chain, delta_min, delta_max, points } => commands::asymptotics(
            &mut run,
            &chain.inputs(),
            commands::ScanOptions { delta_min: *delta_min, delta_max: *delta_max, points: *points },
        ),
        Command::Longtime { chain, t_max, dt } => commands::longtime(&mut run, &chain.inputs(), *t_max, *dt),
        Command::Figures { which } => figures::figures(&mut run, which),
    };
    outcome?;

    let manifest = RunManifest {
        subcommand: name.into(),
        argv: argv.iter().map(|a| a.to_string_lossy().into_owned()).collect(),
        version: env!("CARGO_PKG_VERSION").into(),
        inputs: Value::Object(run.inputs),
        params: run.params,
        grids: Value::Object(run.grids),
        results: Value::Object(run.results),
        proxies: run.proxies.clone(),
        outputs: run.out.written.clone(),
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    run.out.manifest(&manifest)?;
    let failed: Vec<&str> = run.proxies.iter().filter(|p| !p.pass).map(|p| p.name.as_str()).collect();
    if !failed.is_empty() {
        return Err(CliError::Check(failed.join(", ")));
    }
    Ok(())
}
