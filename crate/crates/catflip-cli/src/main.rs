//! `catflip` binary: argument parsing, dispatch, exit-code mapping.
//!
//! Exit codes: 0 success (and every validation check passed), 1 validation
//! checks failed, 2 configuration error, 3 numerical non-convergence,
//! 4 internal error.  Fatal errors print `{code, message, context}` JSON
//! on stderr.

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use catflip_cli::config::{
    parse_config_file, resolve, Method, OutputFormat, Overrides, RunConfig,
};
use catflip_cli::engine::{leakage_trace, run_rate, run_sweep};
use catflip_cli::error::CliError;
use catflip_cli::rows::{
    leakage_to_csv, leakage_to_json, row_to_json, rows_to_csv, rows_to_json,
};
use catflip_cli::validate::{run_suite, Suite};

#[derive(Parser)]
#[command(
    name = "catflip",
    version,
    about = "Bit-flip rates of dissipatively stabilized cat qubits.\n\
All rates and strengths are in units of the two-photon dissipation rate κ2;\n\
the engine is normalized to κ2 = 1 and no option reintroduces it."
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compute one rate row at a single α².
    Rate(RunArgs),
    /// Sweep a strictly increasing α² grid (work pool; CATFLIP_THREADS
    /// overrides the pool size, default = logical cores).
    Sweep(RunArgs),
    /// Tabulate the leakage l(t) of |0c⟩⟨0c| on a uniform time grid.
    Leakage(LeakArgs),
    /// Run a validation suite and report pass/fail JSON.
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
#[clap(rename_all = "snake_case")]
enum PerturbArg {
    None,
    PhotonLoss,
    PhotonGain,
    Dephasing,
    Detuning,
    Zgate,
    GenericDissipator,
}

impl PerturbArg {
    fn name(self) -> &'static str {
        match self {
            Self::None => "none",
            Self::PhotonLoss => "photon_loss",
            Self::PhotonGain => "photon_gain",
            Self::Dephasing => "dephasing",
            Self::Detuning => "detuning",
            Self::Zgate => "zgate",
            Self::GenericDissipator => "generic_dissipator",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
#[clap(rename_all = "snake_case")]
enum MethodArg {
    Analytic,
    Eigensum,
    Spectral,
    DecayFit,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Analytic => Method::Analytic,
            MethodArg::Eigensum => Method::Eigensum,
            MethodArg::Spectral => Method::Spectral,
            MethodArg::DecayFit => Method::DecayFit,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
#[clap(rename_all = "snake_case")]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
#[clap(rename_all = "snake_case")]
enum SuiteArg {
    Invariants,
    Figures,
    Tables,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Invariants => Suite::Invariants,
            SuiteArg::Figures => Suite::Figures,
            SuiteArg::Tables => Suite::Tables,
        }
    }
}

/// Flags shared by `rate`, `sweep`, and `leakage`; every flag overrides
/// the corresponding config-file field.
#[derive(Args)]
struct RunArgs {
    /// JSON run config; flags given alongside it win.
    #[arg(long, value_name = "PATH")]
    config: Option<std::path::PathBuf>,
    /// Perturbation kind (strengths via the flags below).
    #[arg(long, value_enum)]
    perturbation: Option<PerturbArg>,
    /// Single-photon loss rate κ1.
    #[arg(long)]
    kappa1: Option<f64>,
    /// Gain / generic-dissipator rate κ.
    #[arg(long)]
    kappa: Option<f64>,
    /// Dephasing rate κφ.
    #[arg(long)]
    kappa_phi: Option<f64>,
    /// Detuning Δ.
    #[arg(long)]
    delta: Option<f64>,
    /// Z-gate drive amplitude εZ.
    #[arg(long)]
    epsilon_z: Option<f64>,
    /// Creation exponent of a generic dissipator.
    #[arg(long)]
    m: Option<u32>,
    /// Annihilation exponent of a generic dissipator.
    #[arg(long)]
    n: Option<u32>,
    /// Mean photon number α²; repeat the flag to build a grid.
    #[arg(long = "alpha2", value_name = "A2")]
    alpha2: Vec<f64>,
    /// Computation route; repeat to combine routes.
    #[arg(long = "method", value_enum)]
    method: Vec<MethodArg>,
    /// Fock-space cutoff override.
    #[arg(long)]
    dim: Option<usize>,
    /// Output file (default stdout).
    #[arg(long, value_name = "PATH")]
    out: Option<std::path::PathBuf>,
    /// Output format.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let base = match &self.config {
            Some(path) => Some(parse_config_file(path)?),
            None => None,
        };
        let over = Overrides {
            perturbation: self.perturbation.map(PerturbArg::name),
            kappa1: self.kappa1,
            kappa: self.kappa,
            kappa_phi: self.kappa_phi,
            delta: self.delta,
            epsilon_z: self.epsilon_z,
            m: self.m,
            n: self.n,
            alpha2: self.alpha2.clone(),
            methods: self.method.iter().map(|&m| m.into()).collect(),
            dim: self.dim,
            out: self.out.as_ref().map(|p| p.display().to_string()),
            format: self.format.map(|f| f.into()),
        };
        resolve(base, &over)
    }
}

#[derive(Args)]
struct LeakArgs {
    #[command(flatten)]
    run: RunArgs,
    /// End of the time grid, in units of 1/κ2.
    #[arg(long = "t-max", default_value_t = 1.0)]
    t_max: f64,
    /// Number of uniform steps after t = 0.
    #[arg(long, default_value_t = 200)]
    samples: usize,
}

#[derive(Args)]
struct ValidateArgs {
    /// Which suite to run.
    #[arg(long, value_enum)]
    suite: SuiteArg,
    /// Report file (default stdout).
    #[arg(long, value_name = "PATH")]
    out: Option<std::path::PathBuf>,
}

fn write_output(path: Option<&str>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| CliError::internal(format!("cannot write output: {e}"), p.to_string())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn real_main() -> Result<i32, CliError> {
    let cli = Cli::try_parse().unwrap_or_else(|e| {
        if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
            let _ = e.print();
            std::process::exit(0);
        }
        let err = CliError::config(e.to_string().trim().to_string(), "argument parsing");
        eprintln!("{}", err.render_json());
        std::process::exit(err.code);
    });

    match cli.command {
        Cmd::Rate(args) => {
            let cfg = args.resolve()?;
            let row = run_rate(&cfg)?;
            let text = match cfg.format {
                OutputFormat::Csv => rows_to_csv(std::slice::from_ref(&row)),
                OutputFormat::Json => row_to_json(&row),
            };
            write_output(cfg.output_path.as_deref(), &text)?;
            Ok(0)
        }
        Cmd::Sweep(args) => {
            let cfg = args.resolve()?;
            let rows = run_sweep(&cfg)?;
            let text = match cfg.format {
                OutputFormat::Csv => rows_to_csv(&rows),
                OutputFormat::Json => rows_to_json(&rows),
            };
            write_output(cfg.output_path.as_deref(), &text)?;
            Ok(0)
        }
        Cmd::Leakage(args) => {
            let cfg = args.run.resolve()?;
            if cfg.alpha2_grid.len() != 1 {
                return Err(CliError::config(
                    format!(
                        "leakage takes exactly one alpha2 value, got {}",
                        cfg.alpha2_grid.len()
                    ),
                    "config validation",
                ));
            }
            let points = leakage_trace(
                &cfg.perturbation,
                cfg.alpha2_grid[0],
                cfg.dim_override,
                args.t_max,
                args.samples,
            )?;
            let text = match cfg.format {
                OutputFormat::Csv => leakage_to_csv(&points),
                OutputFormat::Json => leakage_to_json(&points),
            };
            write_output(cfg.output_path.as_deref(), &text)?;
            Ok(0)
        }
        Cmd::Validate(args) => {
            let report = run_suite(args.suite.into())?;
            let path = args.out.as_ref().map(|p| p.display().to_string());
            write_output(path.as_deref(), &report.to_json())?;
            Ok(if report.all_pass() { 0 } else { 1 })
        }
    }
}

fn main() {
    let code = match real_main() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("{}", err.render_json());
            err.code
        }
    };
    std::process::exit(code);
}
