use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use psp_cli::compute::{evaluate, Quantity, Query};
use psp_cli::config::{Config, Format};
use psp_cli::error::CliError;
use psp_cli::output::{write_outputs, RunManifest};
use psp_cli::sweeps::{self, Sweep};
use psp_core::generation::TriggerConvention;
use psp_core::qkd::{keyrate, optimize_mu, PhaseSet, Protocol};

/// Directory used for dataset files when neither --out nor [run].out_dir is given.
const OUTPUT_DIR_ENV: &str = "PSP_OUTPUT_DIR";

#[derive(Parser, Debug)]
#[command(name = "psp", version, about = "Pseudo-single-photon states: figure data, key rates and single-point queries")]
struct Cli {
    /// TOML configuration file; command-line flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for dataset files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true, value_enum)]
    trigger_convention: Option<TriggerArg>,
    #[arg(long, global = true, value_enum)]
    phase_set: Option<PhaseArg>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TriggerArg {
    Paper,
    Recomputed,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PhaseArg {
    Standard,
    PaperLiteral,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ProtocolArg {
    WcsNondecoy,
    WcsDecoy,
    PspNondecoy,
    PspPassiveDecoy,
    PspTriggered,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fidelity, g2(0), P11 and F2002 over a mean-photon-number grid.
    Fig1,
    /// X/Y basis fidelity of |0_d> and |1_d> over a mean-photon-number grid.
    Fig4,
    /// Key rate versus distance for weak-coherent and pseudo-single-photon sources.
    Fig5 {
        /// Re-optimize mu of the pseudo-single-photon curves at every distance.
        #[arg(long)]
        optimize_mu: bool,
    },
    /// Evaluate one quantity at one parameter point.
    Compute {
        #[arg(value_enum)]
        quantity: Quantity,
        #[command(flatten)]
        args: ComputeArgs,
    },
    /// Key rate of one protocol at one distance.
    Keyrate(KeyrateArgs),
}

#[derive(Args, Debug)]
struct ComputeArgs {
    #[arg(long)]
    mu: f64,
    #[arg(long)]
    d: u32,
    #[arg(long)]
    j: Option<u32>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    delta: f64,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    mu2: Option<f64>,
    #[arg(long)]
    d2: Option<u32>,
}

#[derive(Args, Debug)]
struct KeyrateArgs {
    #[arg(long, value_enum)]
    protocol: ProtocolArg,
    /// Required unless --optimize-mu is given.
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long, default_value_t = 8)]
    d: u32,
    /// Meter mean photon number of the triggered protocol; 2d^2 by default.
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    eta_trigger: Option<f64>,
    /// Fiber length in km; the configured channel distance by default.
    #[arg(long)]
    distance: Option<f64>,
    #[arg(long)]
    optimize_mu: bool,
}

fn resolve_config(cli: &Cli) -> Result<Config, CliError> {
    let mut config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(f) = cli.format {
        config.run.format = f;
    }
    if let Some(w) = cli.workers {
        config.run.workers = Some(w);
    }
    if let Some(t) = cli.trigger_convention {
        config.rates.trigger = match t {
            TriggerArg::Paper => TriggerConvention::Paper,
            TriggerArg::Recomputed => TriggerConvention::Recomputed,
        };
    }
    if let Some(p) = cli.phase_set {
        config.rates.phase_set = match p {
            PhaseArg::Standard => PhaseSet::Standard,
            PhaseArg::PaperLiteral => PhaseSet::PaperLiteral,
        };
    }
    if let Some(dir) = &cli.out {
        config.run.out_dir = Some(dir.clone());
    } else if let Some(dir) = std::env::var_os(OUTPUT_DIR_ENV) {
        config.run.out_dir = Some(PathBuf::from(dir));
    }
    if let Command::Fig5 { optimize_mu: true } = cli.command {
        config.fig5.optimize_mu = true;
    }
    Ok(config)
}

fn run_sweep(name: &str, config: &Config, sweep: fn(&Config) -> Result<Sweep, CliError>) -> Result<(), CliError> {
    let start = Instant::now();
    let Sweep { table, diagnostics } = sweep(config)?;
    let format = config.run.format;
    let dir = config.run.out_dir.clone().unwrap_or_default();
    let path = dir.join(format!("{name}.{}", format.extension()));
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: name.into(),
        output: path.clone(),
        format,
        rows: table.rows.len(),
        duration_seconds: start.elapsed().as_secs_f64(),
        config: config.clone(),
        diagnostics,
    };
    write_outputs(&table, &path, format, &manifest)?;
    writeln!(std::io::stdout().lock(), "{}", path.display())?;
    Ok(())
}

/// Prints the headline value and then the full result as one JSON line.
fn report<T: serde::Serialize>(value: f64, result: &T) -> Result<(), CliError> {
    let json = serde_json::to_string(result).expect("results serialize");
    let mut out = std::io::stdout().lock();
    writeln!(out, "{value:?}")?;
    writeln!(out, "{json}")?;
    Ok(())
}

fn run_keyrate(config: &Config, args: &KeyrateArgs) -> Result<(), CliError> {
    let eta_trigger = args.eta_trigger.unwrap_or(config.channel.eta_det);
    let protocol = match args.protocol {
        ProtocolArg::WcsNondecoy => Protocol::WcsNondecoy,
        ProtocolArg::WcsDecoy => Protocol::WcsDecoy,
        ProtocolArg::PspNondecoy => Protocol::PspNondecoy { d: args.d },
        ProtocolArg::PspPassiveDecoy => Protocol::PspPassiveDecoy { d: args.d },
        ProtocolArg::PspTriggered => match args.nu {
            Some(nu) => Protocol::PspTriggered { d: args.d, nu, eta_trigger },
            None => Protocol::triggered(args.d, eta_trigger),
        },
    };
    let channel = match args.distance {
        Some(l) => config.channel.at_distance(l),
        None => config.channel,
    };
    let result = if args.optimize_mu {
        let f = &config.fig5;
        let grid = match protocol {
            Protocol::WcsNondecoy => f.nondecoy_mu.values()?,
            Protocol::WcsDecoy => f.decoy_mu.values()?,
            _ => f.psp_mu.values()?,
        };
        optimize_mu(&channel, &protocol, &grid, &config.rates)?.1
    } else {
        let mu = args
            .mu
            .ok_or_else(|| CliError::Config("--mu is required unless --optimize-mu is given".into()))?;
        keyrate(&channel, mu, &protocol, &config.rates)?
    };
    report(result.rate, &result)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let config = resolve_config(cli)?;
    match &cli.command {
        Command::Fig1 => run_sweep("fig1", &config, sweeps::fig1),
        Command::Fig4 => run_sweep("fig4", &config, sweeps::fig4),
        Command::Fig5 { .. } => run_sweep("fig5", &config, sweeps::fig5),
        Command::Compute { quantity, args } => {
            let query = Query {
                mu: args.mu,
                d: args.d,
                j: args.j,
                delta: args.delta,
                nu: args.nu,
                eta: args.eta,
                mu2: args.mu2,
                d2: args.d2,
            };
            let e = evaluate(*quantity, &query, config.rates.trigger, config.rates.phase_set)?;
            report(e.value, &e)
        }
        Command::Keyrate(args) => run_keyrate(&config, args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let mut body = BTreeMap::new();
            body.insert("category", e.category().to_string());
            body.insert("message", e.to_string());
            eprintln!("{}", serde_json::json!({ "error": body }));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
