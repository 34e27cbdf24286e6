//! Command-line front end: analytic attack probabilities, epoch simulation,
//! figure sweeps, alignment validation, the design-table report, and the PoW
//! identity model.
//!
//! Exit codes: 0 success, 1 validation-check failure, 2 usage/config error.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use shardsybil::analytics::{attack_probability, Attack, McConfig};
use shardsybil::experiments::{
    run_sweep, table2_report, validate_alignment, write_csv_path, write_json_path, AttackSelection,
    Figure, SweepSpec,
};
use shardsybil::pow::{
    difficulty, id_probability, is_strictly_sybil_resistant, solve_pow_demo, sybil_yield,
    AdversaryModel, HashPowerMapping, PowParams,
};
use shardsybil::protocol::{
    resolve_threshold, validate_params, ConsensusThresholdSpec, ProtocolParams,
};
use shardsybil::rng::DEFAULT_SEED;
use shardsybil::sim::run_trials;

#[derive(Parser)]
#[command(
    name = "shardsybil",
    version,
    about = "Sybil-attack feasibility analysis for shard-based permissionless blockchains"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analytic (hybrid closed-form + Monte Carlo) attack success probability.
    Analytic(AnalyticArgs),
    /// Monte Carlo epoch simulation of both attacks.
    Simulate(SimulateArgs),
    /// Parameter sweep producing plot-ready CSV/JSON.
    Sweep(SweepArgs),
    /// Check analytic-vs-simulated alignment of a sweep CSV.
    Validate(ValidateArgs),
    /// Evaluate the four design-table regimes.
    Table2(Table2Args),
    /// PoW identity-generation model numbers.
    Pow(PowArgs),
    /// Demonstration PoW solver (first qualifying nonce).
    PowSolve(PowSolveArgs),
}

/// Flat JSON config record mirroring the flag names. Flags given on the
/// command line override file values.
#[derive(Debug, Default, Clone, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(rename = "N")]
    nodes: Option<u64>,
    s: Option<u32>,
    c: Option<u64>,
    tau_frac: Option<f64>,
    tau_count: Option<u64>,
    #[serde(rename = "M")]
    m_sybil: Option<u64>,
    rho: Option<f64>,
    mapping: Option<MappingFlag>,
    trials: Option<u64>,
    seed: Option<u64>,
    workers: Option<usize>,
}

fn load_config(path: Option<&PathBuf>) -> Result<ConfigFile> {
    match path {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            serde_json::from_str(&text)
                .with_context(|| format!("parsing config {}", path.display()))
        }
        None => Ok(ConfigFile::default()),
    }
}

#[derive(Args)]
struct ProtocolFlags {
    /// Total nodes in the network.
    #[arg(long = "N")]
    nodes: Option<u64>,
    /// Shard-count exponent; the network runs 2^s shards.
    #[arg(long = "s")]
    shard_exp: Option<u32>,
    /// Shard capacity (IDs per shard).
    #[arg(long = "c")]
    capacity: Option<u64>,
    /// Consensus threshold as a fraction of capacity, in (0.5, 1.0].
    #[arg(long = "tau-frac", conflicts_with = "tau_count")]
    tau_frac: Option<f64>,
    /// Consensus threshold as an ID count, in (c/2, c].
    #[arg(long = "tau-count")]
    tau_count: Option<u64>,
}

impl ProtocolFlags {
    fn params(&self, config: &ConfigFile) -> Result<ProtocolParams> {
        let nodes = self.nodes.or(config.nodes).context("--N is required")?;
        let shard_exp = self.shard_exp.or(config.s).context("--s is required")?;
        let capacity = self.capacity.or(config.c).context("--c is required")?;
        let spec = match (
            self.tau_frac.or(config.tau_frac),
            self.tau_count.or(config.tau_count),
        ) {
            (_, Some(count)) if self.tau_count.is_some() => ConsensusThresholdSpec::Count(count),
            (Some(f), _) => ConsensusThresholdSpec::Fraction(f),
            (None, Some(count)) => ConsensusThresholdSpec::Count(count),
            (None, None) => bail!("one of --tau-frac or --tau-count is required"),
        };
        let tau = resolve_threshold(spec, capacity)?;
        Ok(ProtocolParams::new(nodes, shard_exp, capacity, tau)?)
    }
}

#[derive(Args)]
struct AdversaryFlags {
    /// Explicit Sybil-ID count.
    #[arg(long = "M", conflicts_with = "rho")]
    m_sybil: Option<u64>,
    /// Adversary hash-power value, mapped to M via --mapping.
    #[arg(long)]
    rho: Option<f64>,
    /// How --rho maps to a Sybil count.
    #[arg(long, value_enum)]
    mapping: Option<MappingFlag>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
enum MappingFlag {
    /// rho is the adversary's fraction of total network hash power.
    Fraction,
    /// rho is the adversary-to-average power ratio.
    Ratio,
}

impl From<MappingFlag> for HashPowerMapping {
    fn from(flag: MappingFlag) -> Self {
        match flag {
            MappingFlag::Fraction => HashPowerMapping::FractionOfTotal,
            MappingFlag::Ratio => HashPowerMapping::RatioToAverage,
        }
    }
}

impl AdversaryFlags {
    fn model(&self, config: &ConfigFile) -> Result<AdversaryModel> {
        let mapping: HashPowerMapping = self
            .mapping
            .or(config.mapping)
            .map(Into::into)
            .unwrap_or_default();
        match (
            self.m_sybil.or(config.m_sybil),
            self.rho.or(config.rho),
            self.m_sybil.is_some(),
            self.rho.is_some(),
        ) {
            // An explicit command-line choice wins over any config value.
            (Some(m), _, true, _) => Ok(AdversaryModel::ExplicitCount(m)),
            (_, Some(rho), _, true) => Ok(AdversaryModel::HashPower { rho, mapping }),
            (Some(m), None, ..) => Ok(AdversaryModel::ExplicitCount(m)),
            (None, Some(rho), ..) => Ok(AdversaryModel::HashPower { rho, mapping }),
            (Some(_), Some(_), ..) => bail!("config file sets both M and rho; pass --M or --rho to disambiguate"),
            (None, None, ..) => bail!("one of --M or --rho is required"),
        }
    }
}

#[derive(Args)]
struct AnalyticArgs {
    /// Which attack to evaluate.
    #[arg(long, value_enum)]
    attack: AttackFlag,
    #[command(flatten)]
    protocol: ProtocolFlags,
    #[command(flatten)]
    adversary: AdversaryFlags,
    /// Flat JSON config mirroring the flag names; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed for the conditional Monte Carlo streams.
    #[arg(long)]
    seed: Option<u64>,
    /// Trial budget per conditional Monte Carlo estimate.
    #[arg(long, default_value_t = 60_000)]
    mc_trials: u64,
    /// Target 95% CI half-width per conditional estimate.
    #[arg(long, default_value_t = 0.005)]
    mc_half_width: f64,
    /// Write the JSON result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum AttackFlag {
    Bcp,
    Gft,
}

impl From<AttackFlag> for Attack {
    fn from(flag: AttackFlag) -> Self {
        match flag {
            AttackFlag::Bcp => Attack::Bcp,
            AttackFlag::Gft => Attack::Gft,
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    protocol: ProtocolFlags,
    #[command(flatten)]
    adversary: AdversaryFlags,
    /// Flat JSON config mirroring the flag names; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Number of simulated epochs.
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = one per core). Results do not depend on this.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Named preset: 2a 2b 2c 3a 3b 3c 3d 4a 4b 4c 4d.
    #[arg(long)]
    fig: String,
    /// Output directory for <fig>.csv / <fig>.json.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Which file formats to write.
    #[arg(long, value_enum, default_value_t = FormatFlag::Csv)]
    format: FormatFlag,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum FormatFlag {
    Csv,
    Json,
    Both,
}

#[derive(Args)]
struct ValidateArgs {
    /// Sweep CSV produced by `sweep`.
    #[arg(long = "in")]
    input: PathBuf,
    /// Extra tolerance beyond the simulated 95% CI.
    #[arg(long, default_value_t = 0.02)]
    slack: f64,
}

#[derive(Args)]
struct Table2Args {
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PowArgs {
    /// Digest length in bits.
    #[arg(long = "L")]
    digest_bits: u32,
    /// First-epoch target exponent (MaxTarget = 2^L_t1).
    #[arg(long = "L-t1")]
    max_target_exp: u32,
    /// Current-epoch target exponent.
    #[arg(long = "L-ti")]
    target_exp: u32,
    /// Adversary hash power in hashes/second.
    #[arg(long = "h")]
    hash_power: f64,
    /// Initialization time in seconds.
    #[arg(long = "T-I")]
    init_time: f64,
}

#[derive(Args)]
struct PowSolveArgs {
    /// Epoch randomness (UTF-8 string material).
    #[arg(long, default_value = "epoch-randomness")]
    epoch_randomness: String,
    /// Identity material (stands in for IP || PK).
    #[arg(long, default_value = "192.0.2.1|pk")]
    identity: String,
    /// Target exponent; a digest must fall below 2^target-exp.
    #[arg(long)]
    target_exp: u32,
    #[arg(long, default_value_t = 1 << 20)]
    max_attempts: u64,
}

fn emit_json<T: serde::Serialize>(value: &T, out: Option<&PathBuf>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_analytic(args: AnalyticArgs) -> Result<ExitCode> {
    let config = load_config(args.config.as_ref())?;
    let params = args.protocol.params(&config)?;
    let m_sybil = args.adversary.model(&config)?.sybil_count(params.nodes)?;
    validate_params(&params, m_sybil)?;
    let mc = McConfig {
        max_trials: args.mc_trials,
        target_half_width: args.mc_half_width,
        seed: args.seed.or(config.seed).unwrap_or(DEFAULT_SEED),
        ..McConfig::default()
    };
    let result = attack_probability(args.attack.into(), m_sybil, &params, &mc)?;
    emit_json(&result, args.out.as_ref())?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_simulate(args: SimulateArgs) -> Result<ExitCode> {
    let config = load_config(args.config.as_ref())?;
    let params = args.protocol.params(&config)?;
    let m_sybil = args.adversary.model(&config)?.sybil_count(params.nodes)?;
    let trials = args.trials.or(config.trials).unwrap_or(100_000);
    let seed = args.seed.or(config.seed).unwrap_or(DEFAULT_SEED);
    let workers = args.workers.or(config.workers).unwrap_or(0);
    let report = run_trials(&params, m_sybil, trials, seed, workers)?;
    emit_json(&report, args.out.as_ref())?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(args: SweepArgs) -> Result<ExitCode> {
    let figure: Figure = args.fig.parse().map_err(anyhow::Error::msg)?;
    let mut spec: SweepSpec = figure.spec(args.trials, args.seed);
    spec.workers = args.workers;
    eprintln!(
        "sweep {}: attack={} N={} s={} c={} grid={} points, trials={}, seed={}",
        figure.file_stem(),
        match spec.attack {
            AttackSelection::Bcp => "bcp",
            AttackSelection::Gft => "gft",
            AttackSelection::Both => "both",
        },
        if spec.auto_nodes { 0 } else { spec.nodes },
        spec.shard_exp,
        spec.capacity,
        spec.rho_grid.len(),
        spec.trials,
        spec.master_seed,
    );
    let output = run_sweep(&spec);
    fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let stem = figure.file_stem();
    if matches!(args.format, FormatFlag::Csv | FormatFlag::Both) {
        let path = args.out.join(format!("{stem}.csv"));
        write_csv_path(&output.rows, &path)?;
        println!("{}", path.display());
    }
    if matches!(args.format, FormatFlag::Json | FormatFlag::Both) {
        let path = args.out.join(format!("{stem}.json"));
        write_json_path(&output.rows, &path)?;
        println!("{}", path.display());
    }
    for skip in &output.skipped {
        eprintln!(
            "skipped rho={} N={} s={} c={}: {}",
            skip.rho, skip.nodes, skip.s, skip.c, skip.reason
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_validate(args: ValidateArgs) -> Result<ExitCode> {
    let rows = shardsybil::experiments::read_csv_path(&args.input)?;
    let report = validate_alignment(&rows, args.slack);
    emit_json(&report, None)?;
    if report.pass {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(1))
    }
}

fn cmd_table2(args: Table2Args) -> Result<ExitCode> {
    let report = table2_report(args.trials, args.seed);
    for row in &report.rows {
        eprintln!(
            "{}: expected {} -> {}",
            row.label,
            row.expectation,
            if row.satisfied { "satisfied" } else { "NOT satisfied" }
        );
    }
    emit_json(&report, args.out.as_ref())?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_pow(args: PowArgs) -> Result<ExitCode> {
    let params = PowParams::new(
        args.digest_bits,
        args.max_target_exp,
        args.target_exp,
        args.init_time,
        args.hash_power,
    )?;
    let yield_ = sybil_yield(&params, args.hash_power);
    let report = serde_json::json!({
        "difficulty": difficulty(&params),
        "id_probability": id_probability(&params),
        "expected_yield": yield_.expected,
        "M": yield_.count,
        "strictly_sybil_resistant": is_strictly_sybil_resistant(&params, args.hash_power),
    });
    emit_json(&report, None)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_pow_solve(args: PowSolveArgs) -> Result<ExitCode> {
    match solve_pow_demo(
        args.epoch_randomness.as_bytes(),
        args.identity.as_bytes(),
        args.target_exp,
        args.max_attempts,
    ) {
        Some(solution) => {
            let report = serde_json::json!({
                "found": true,
                "nonce": solution.nonce,
                "digest": hex::encode(solution.digest),
            });
            emit_json(&report, None)?;
        }
        None => {
            let report = serde_json::json!({
                "found": false,
                "attempts": args.max_attempts,
            });
            emit_json(&report, None)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analytic(args) => cmd_analytic(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Validate(args) => cmd_validate(args),
        Command::Table2(args) => cmd_table2(args),
        Command::Pow(args) => cmd_pow(args),
        Command::PowSolve(args) => cmd_pow_solve(args),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
