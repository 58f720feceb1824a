use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use mpath::capacity::{evaluate, sweep_region, write_csv, CapacityProfile, Causality, Feedback, Scenario};
use mpath::channel::{AdversaryVector, JamModel};
use mpath::field::Field;
use mpath::harness::leakage::{fbsec_state_sweep, otp_leakage, pairwise_leakage, secrecy_stack, subsets};
use mpath::harness::{
    default_golden_path, run_trials, selftest, verify_capacity_table, AdversaryId, ExperimentConfig, SchemeId, ViewScope,
    SCHEMA_VERSION,
};
use mpath::scheme_fb::SecParams;
use mpath::scheme_noffb::PairwiseParams;

/// Acceptance or self-test failure.
const EXIT_FAILED_CHECK: u8 = 2;
/// Bad input of any kind.
const EXIT_INVALID: u8 = 1;

#[derive(Parser)]
#[command(name = "mpath", version, about = "Multipath jamming: capacities, simulation and leakage")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Capacity and regime for one adversary vector, or a sweep over all of them.
    Capacity(CapacityArgs),
    /// Run a Monte-Carlo experiment and print its statistics.
    Simulate(SimulateArgs),
    /// Exact leakage by enumeration.
    Leakage(LeakageArgs),
    /// Run the built-in invariant checks.
    Selftest {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Diff the capacity grid against the golden CSV, creating it if absent.
    VerifyTable {
        #[arg(long)]
        golden: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct Output {
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Output {
    fn emit(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

#[derive(Args)]
struct CapacityArgs {
    /// Number of unit links.
    #[arg(long = "C", conflicts_with = "profile")]
    links: Option<usize>,
    /// Per-link capacities, e.g. `3;1;1`.
    #[arg(long)]
    profile: Option<String>,
    /// Adversary vector `z_rw,z_ro,z_wo`.
    #[arg(long, required_unless_present = "sweep")]
    z: Option<AdversaryVector>,
    #[arg(long, default_value = "additive")]
    model: JamModel,
    #[arg(long, conflicts_with = "non_causal")]
    causal: bool,
    #[arg(long)]
    non_causal: bool,
    #[arg(long, conflicts_with = "no_feedback")]
    feedback: bool,
    #[arg(long)]
    no_feedback: bool,
    #[arg(long)]
    secrecy: bool,
    /// Every feasible `z` instead of one.
    #[arg(long)]
    sweep: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct SimulateArgs {
    /// Experiment config as JSON; flags below are ignored when given.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "causal-nofb-additive-reliable")]
    scenario: String,
    #[arg(long = "C", default_value_t = 7)]
    links: usize,
    #[arg(long, default_value = "1,2,1")]
    z: AdversaryVector,
    #[arg(long, default_value = "pairwise")]
    scheme: SchemeId,
    #[arg(long, default_value = "random-noise")]
    adversary: AdversaryId,
    #[arg(long, default_value_t = 16)]
    field_bits: u32,
    #[arg(long, default_value_t = 2)]
    blocklength: usize,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    /// One-bit one-time pad with its key.
    Otp,
    /// One-bit one-time pad with the key removed.
    OtpBare,
    /// Pairwise code without key mixing.
    Pairwise,
    /// Key-mixed pairwise code.
    PairwiseSecret,
    /// Per-round leakage of the four-stage feedback scheme in every state.
    Fbsec,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scope {
    Payload,
    FullLink,
}

#[derive(Args)]
struct LeakageArgs {
    #[arg(long, value_enum)]
    target: Target,
    #[arg(long = "C", default_value_t = 3)]
    links: usize,
    #[arg(long, default_value = "0,1,0")]
    z: AdversaryVector,
    #[arg(long, default_value = "additive")]
    model: JamModel,
    #[arg(long, default_value_t = 2)]
    field_bits: u32,
    /// Hash dimension for the pairwise codes, rounds for fbsec.
    #[arg(long, default_value_t = 1)]
    blocklength: usize,
    #[arg(long, value_enum, default_value = "payload")]
    scope: Scope,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn pretty(v: &impl serde::Serialize) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn emit_json(out: &Option<PathBuf>, v: &impl serde::Serialize) -> Result<()> {
    let text = pretty(v)?;
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn capacity(a: CapacityArgs) -> Result<u8> {
    let profile: CapacityProfile = match (a.links, &a.profile) {
        (Some(c), None) => CapacityProfile::Equal(c),
        (None, Some(p)) => p.parse()?,
        _ => bail!("give either --C or --profile"),
    };
    let causality = if a.non_causal { Causality::NonCausal } else { Causality::Causal };
    let feedback = if a.feedback { Feedback::Passive } else { Feedback::None };
    let scenario = Scenario::new(causality, feedback, a.model, a.secrecy)?;
    let rows = if a.sweep {
        sweep_region(&profile, &scenario)?
    } else {
        let z = a.z.context("--z is required")?;
        vec![evaluate(&profile, &z, &scenario)?]
    };
    let text = match a.output.format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_csv(&rows, &mut buf)?;
            String::from_utf8(buf)?
        }
        Format::Json if a.sweep => pretty(&json!({ "schema_version": SCHEMA_VERSION, "rows": rows }))?,
        Format::Json => pretty(&json!({ "schema_version": SCHEMA_VERSION, "row": rows[0] }))?,
    };
    a.output.emit(&text)?;
    Ok(0)
}

fn simulate(a: SimulateArgs) -> Result<u8> {
    let config = match &a.config {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            ExperimentConfig::from_json(&text)?
        }
        None => ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            scenario: a.scenario,
            links: a.links,
            z: a.z,
            scheme: a.scheme,
            adversary: a.adversary,
            field_bits: a.field_bits,
            blocklength: a.blocklength,
            trials: a.trials,
            seed: a.seed,
        },
    };
    let stats = run_trials(&config)?;
    emit_json(&a.out, &stats)?;
    Ok(0)
}

fn leakage(a: LeakageArgs) -> Result<u8> {
    let field = || Field::new(a.field_bits);
    match a.target {
        Target::Otp => emit_json(&a.out, &otp_leakage(true)?)?,
        Target::OtpBare => emit_json(&a.out, &otp_leakage(false)?)?,
        Target::Pairwise | Target::PairwiseSecret => {
            let f = field()?;
            let p = if matches!(a.target, Target::PairwiseSecret) {
                PairwiseParams::secret(&f, a.links, a.z, a.model, a.blocklength)?
            } else {
                PairwiseParams::new(&f, a.links, a.z, a.model, a.blocklength)?
            };
            let scope = match a.scope {
                Scope::Payload => ViewScope::Payload,
                Scope::FullLink => ViewScope::FullLink,
            };
            let report = pairwise_leakage(&p, scope)?;
            let stack_ok = subsets(a.links, a.z.z_r())
                .iter()
                .map(|s| secrecy_stack(&p, s).map(|m| m.is_invertible(&f)))
                .collect::<Result<Vec<_>, _>>()?
                .into_iter()
                .all(|x| x);
            emit_json(&a.out, &json!({ "report": report, "stacked_systems_invertible": stack_ok }))?;
        }
        Target::Fbsec => {
            let p = SecParams::new(&field()?, a.links, a.z, a.model, a.blocklength.max(1))?;
            emit_json(&a.out, &fbsec_state_sweep(&p, 1 << 16)?)?;
        }
    }
    Ok(0)
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Capacity(a) => capacity(a),
        Command::Simulate(a) => simulate(a),
        Command::Leakage(a) => leakage(a),
        Command::Selftest { seed } => {
            let r = selftest(seed)?;
            print!("{}", pretty(&r)?);
            Ok(if r.passed() { 0 } else { EXIT_FAILED_CHECK })
        }
        Command::VerifyTable { golden } => {
            let r = verify_capacity_table(&golden.unwrap_or_else(default_golden_path))?;
            print!("{}", pretty(&r)?);
            Ok(if r.passed() { 0 } else { EXIT_FAILED_CHECK })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(EXIT_INVALID);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INVALID)
        }
    }
}
