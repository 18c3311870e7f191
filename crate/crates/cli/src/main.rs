//! `beamalign` command line: Monte-Carlo sweeps, the bound inspector and
//! single-frame traces.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use beamalign::bounds::{
    dp_exact_q, value_bounds, HorizonContext, QuadratureSettings, MAX_ORACLE_ARMS, MAX_ORACLE_DEPTH,
};
use beamalign::harness::output::format_sig9;
use beamalign::harness::{
    emit_results, run_frame_observed, run_sweep, run_sweep_with_threads, write_csv,
    ExperimentConfig, FrameModel, OutputFormat, SweepVariable, TraceStep,
};
use beamalign::policy::rank_arms;
use beamalign::seed::stream;
use beamalign::{Nu, PolicySpec, PreferenceVector};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "beamalign",
    version,
    about = "Bayesian bandit beam alignment experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Alignment probability and spectral efficiency against beam-alignment SNR.
    SweepSnr(SweepArgs),
    /// Spectral efficiency against the number of beam-alignment slots.
    SweepOverhead(SweepArgs),
    /// Lower/upper value bounds (and the exact value for small cases) as JSON.
    Bounds(BoundsArgs),
    /// Slot-by-slot trajectory of a single frame.
    FrameTrace(TraceArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

#[derive(Args)]
struct ConfigArgs {
    /// TOML experiment config; defaults to the built-in preset for the subcommand.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in preset: fig2 or fig3.
    #[arg(long)]
    preset: Option<String>,
    /// Base seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Frames per (policy, point).
    #[arg(long)]
    iterations: Option<u64>,
    /// Comma-separated policies, e.g. second-best,lts,ucb:c=2.
    #[arg(long, value_delimiter = ',')]
    policies: Option<Vec<String>>,
    /// Output file; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct BoundsArgs {
    /// Preference vector, comma separated.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        required = true
    )]
    m: Vec<f64>,
    #[arg(long)]
    nu: f64,
    /// Number of beam-alignment slots.
    #[arg(long = "L")]
    horizon: usize,
    /// Current slot.
    #[arg(long = "k")]
    slot: usize,
    /// Gauss-Legendre nodes per panel for the exact value.
    #[arg(long, default_value_t = QuadratureSettings::default().panel_nodes)]
    nodes: usize,
}

#[derive(Args)]
struct TraceArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long, default_value = "second-best")]
    policy: String,
    /// Beam-alignment SNR in dB; defaults to the first value in the config.
    #[arg(long)]
    snr_db: Option<f64>,
    /// Beam-alignment slots; defaults to the first value in the config.
    #[arg(long)]
    slots: Option<usize>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

fn load_config(args: &ConfigArgs, default_preset: &str) -> Result<ExperimentConfig> {
    let mut config = match (&args.config, &args.preset) {
        (Some(path), _) => ExperimentConfig::from_path(path)?,
        (None, Some(name)) => ExperimentConfig::preset(name)?,
        (None, None) => ExperimentConfig::preset(default_preset)?,
    };
    if let Some(seed) = args.seed {
        config.base_seed = seed;
    }
    Ok(config)
}

fn sweep(args: SweepArgs, variable: SweepVariable) -> Result<()> {
    let preset = match variable {
        SweepVariable::Snr => "fig2",
        SweepVariable::Overhead => "fig3",
    };
    let mut config = load_config(&args.config, preset)?;
    config.sweep.variable = variable;
    if let Some(n) = args.iterations {
        config.iterations = n;
    }
    if let Some(list) = &args.policies {
        config.policies = list
            .iter()
            .map(|s| s.trim().parse::<PolicySpec>())
            .collect::<beamalign::Result<_>>()?;
    }
    if let Some(f) = args.format {
        config.output.format = f.into();
    }
    if let Some(path) = &args.output {
        config.output.path = Some(path.display().to_string());
    }
    config.validate()?;

    let results = match args.threads {
        Some(t) => run_sweep_with_threads(&config, t)?,
        None => run_sweep(&config)?,
    };
    match &config.output.path {
        Some(path) => emit_results(&results, &config, config.output.format, Path::new(path))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            match config.output.format {
                OutputFormat::Csv => write_csv(&results, &mut stdout)?,
                OutputFormat::Json => writeln!(
                    stdout,
                    "{}",
                    beamalign::harness::output::to_json(&config, &results)?
                )?,
            }
        }
    }
    Ok(())
}

fn bounds(args: BoundsArgs) -> Result<()> {
    let m = PreferenceVector::new(args.m)?;
    let nu = Nu::new(args.nu)?;
    let ctx = HorizonContext::new(args.horizon, args.slot, nu)?;
    let pair = value_bounds(&m, &ctx)?;
    // the scanned arm at which both bounds are evaluated; none at the terminal slot
    let arm = (ctx.remaining() > 0).then(|| rank_arms(&m).ranked[1]);
    let exact = match arm {
        Some(a) if m.len() <= MAX_ORACLE_ARMS && ctx.remaining() <= MAX_ORACLE_DEPTH => {
            let quad = QuadratureSettings {
                panel_nodes: args.nodes,
                ..QuadratureSettings::default()
            };
            Some(dp_exact_q(&m, a, &ctx, &quad)?)
        }
        _ if ctx.remaining() == 0 => Some(pair.lower),
        _ => None,
    };
    let doc = json!({
        "m": m.as_slice(),
        "nu": nu.get(),
        "L": args.horizon,
        "k": args.slot,
        "arm": arm,
        "lower": pair.lower,
        "upper": pair.upper,
        "exact": exact,
    });
    println!("{}", serde_json::to_string_pretty(&doc)?);
    Ok(())
}

fn frame_trace(args: TraceArgs) -> Result<()> {
    let config = load_config(&args.config, "fig2")?;
    let policy: PolicySpec = args.policy.parse()?;
    let snr_db = args
        .snr_db
        .or_else(|| config.sweep.snr_db.first().copied())
        .context("config has no SNR value")?;
    let slots = args
        .slots
        .or_else(|| config.sweep.alignment_slots.first().copied())
        .context("config has no alignment-slot value")?;
    if slots >= config.frame.slots_per_frame {
        bail!(
            "{slots} alignment slots leave no data phase in a {}-slot frame",
            config.frame.slots_per_frame
        );
    }
    let nu = config.gains.nu(snr_db)?;
    let model = FrameModel::new(config.prior.resolve(config.num_arms)?, nu, slots)?;
    let mut steps: Vec<TraceStep> = Vec::with_capacity(slots);
    let outcome = run_frame_observed(&model, &policy, stream(config.base_seed, &[]), |s| {
        steps.push(s.clone())
    })?;

    let mut out: Box<dyn Write> = match &args.output {
        Some(path) => Box::new(std::io::BufWriter::new(
            std::fs::File::create(path).with_context(|| format!("{}", path.display()))?,
        )),
        None => Box::new(std::io::stdout().lock()),
    };
    match args.format {
        Format::Json => {
            let doc = json!({
                "policy": policy.to_string(),
                "seed": config.base_seed,
                "snr_db": snr_db,
                "nu": nu.get(),
                "alignment_slots": slots,
                "true_sector": outcome.true_sector,
                "data_beam": outcome.data_beam,
                "aligned": outcome.aligned,
                "steps": steps,
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
        }
        Format::Csv => {
            writeln!(
                out,
                "slot,scanned_arm,feedback,increment,top_arm,top_belief"
            )?;
            for s in &steps {
                let m = PreferenceVector::new(s.preference.clone())?;
                let top = rank_arms(&m).ranked[0];
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    s.slot,
                    s.scanned_arm,
                    format_sig9(s.feedback),
                    format_sig9(s.increment),
                    top,
                    format_sig9(m.belief().as_slice()[top])
                )?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::SweepSnr(args) => sweep(args, SweepVariable::Snr),
        Command::SweepOverhead(args) => sweep(args, SweepVariable::Overhead),
        Command::Bounds(args) => bounds(args),
        Command::FrameTrace(args) => frame_trace(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
