use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use tokennet::coreperiphery::{CorePolicy, NullModel, NullModelConfig, UntestedPolicy};
use tokennet::ingest::{ErrorPolicy, InputFormat};
use tokennet::intel::RPC_URL_ENV;
use tokennet::pipeline::{self, AnalysisConfig, PipelineError, RunConfig};
use tokennet::report::CorrelationMethod;
use tokennet::Address;

const SCHEMA: &str = "\
INPUT SCHEMA:
  CSV (RFC 4180, header row required) or JSONL (one object per line) with fields
    token_address    0x-prefixed 40-hex-digit address
    from_address     sender address
    to_address       recipient address
    value            non-negative integer, decimal or 0x-hex, up to 256 bits
    block_timestamp  \"YYYY-MM-DD HH:MM:SS UTC\", ISO-8601/RFC 3339, or unix seconds
  Extra columns are ignored. Transfers from or to the null address and
  self-transfers are dropped. Days are UTC calendar days.

EXIT STATUS:
  0 success, 1 usage error, 2 data error, 3 I/O error";

#[derive(Parser)]
#[command(name = "tokennet", version, about = "Decentralization metrics for token transfer networks", after_help = SCHEMA)]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse transfer exports and write the per-day graph cache.
    #[command(after_help = SCHEMA)]
    Ingest(IngestArgs),
    /// Compute features and core-periphery structure for every cached day.
    Analyze(AnalyzeArgs),
    /// Write feature table, correlation matrix, profiles, charts and run metadata.
    Report(ReportArgs),
    /// Classify core addresses as contract or externally owned and write profiles.
    Classify(ClassifyArgs),
}

#[derive(Args)]
struct Dataset {
    /// Output directory holding one subdirectory per token.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Dataset name (subdirectory of --out); defaults to the token address,
    /// or to the only dataset present.
    #[arg(long)]
    token: Option<String>,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Jsonl,
}

#[derive(Clone, Copy, ValueEnum)]
enum OnErrorArg {
    Abort,
    Skip,
}

#[derive(Args)]
struct IngestArgs {
    /// Transfer export (repeatable; `-` reads stdin).
    #[arg(long, short, required = true)]
    input: Vec<PathBuf>,
    /// Input format; inferred from the file extension when omitted.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Keep only transfers of this token contract.
    #[arg(long)]
    token_address: Option<Address>,
    /// What to do with malformed rows.
    #[arg(long, value_enum, default_value = "abort")]
    on_error: OnErrorArg,
    #[command(flatten)]
    dataset: Dataset,
}

#[derive(Clone, Copy, ValueEnum)]
enum NullModelArg {
    Gnm,
    DegreePreserving,
}

#[derive(Clone, Copy, ValueEnum)]
enum CorePolicyArg {
    Filtered,
    Raw,
}

#[derive(Clone, Copy, ValueEnum)]
enum UntestedArg {
    NotSignificant,
    Significant,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Null-model replicates per day.
    #[arg(long, default_value_t = 100)]
    replicates: u32,
    /// Swap attempts per edge (degree-preserving null only).
    #[arg(long, default_value_t = 10)]
    swaps_per_edge: u32,
    /// Significance level.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Master seed for null-model sampling.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Seed for community detection.
    #[arg(long, default_value_t = 0)]
    community_seed: u64,
    /// Null model for the core significance test.
    #[arg(long, value_enum, default_value = "gnm")]
    null_model: NullModelArg,
    /// Zero core metrics on insignificant days (filtered) or always use them (raw).
    #[arg(long, value_enum, default_value = "filtered")]
    core_policy: CorePolicyArg,
    /// Classification of days without a p-value.
    #[arg(long, value_enum, default_value = "not-significant")]
    untested: UntestedArg,
    /// Skip null-model sampling.
    #[arg(long)]
    no_significance: bool,
    #[command(flatten)]
    dataset: Dataset,
}

#[derive(Clone, Copy, ValueEnum)]
enum CorrelationArg {
    Pearson,
    Spearman,
}

#[derive(Args)]
struct Intel {
    /// JSON-RPC endpoint for contract-code lookups.
    #[arg(long, env = RPC_URL_ENV)]
    rpc_url: Option<String>,
    /// Label store (versioned CSV); defaults to <out>/labels.csv.
    #[arg(long)]
    labels: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Correlation coefficient.
    #[arg(long, value_enum, default_value = "pearson")]
    correlation: CorrelationArg,
    /// Add daily value and address count to the correlation matrix.
    #[arg(long)]
    extended_correlation: bool,
    /// Also chart daily value and address count.
    #[arg(long)]
    aux_charts: bool,
    #[command(flatten)]
    intel: Intel,
    #[command(flatten)]
    dataset: Dataset,
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    intel: Intel,
    #[command(flatten)]
    dataset: Dataset,
}

fn base(dataset: &Dataset) -> RunConfig {
    RunConfig {
        out: dataset.out.clone(),
        token: dataset.token.clone(),
        jobs: dataset.jobs,
        ..RunConfig::default()
    }
}

fn with_intel(mut config: RunConfig, intel: &Intel) -> RunConfig {
    config.rpc_url = intel.rpc_url.clone();
    config.labels = intel.labels.clone();
    config
}

fn run(command: Command) -> Result<(), PipelineError> {
    match command {
        Command::Ingest(a) => {
            let config = RunConfig {
                inputs: a.input,
                format: a.format.map(|f| match f {
                    FormatArg::Csv => InputFormat::Csv,
                    FormatArg::Jsonl => InputFormat::Jsonl,
                }),
                token_address: a.token_address,
                on_error: match a.on_error {
                    OnErrorArg::Abort => ErrorPolicy::Abort,
                    OnErrorArg::Skip => ErrorPolicy::Skip,
                },
                ..base(&a.dataset)
            };
            if config.jobs > 0 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(config.jobs).build_global();
            }
            let s = pipeline::cmd_ingest(&config)?;
            let st = &s.stats;
            println!("token             {}", s.token);
            println!("rows read         {}", st.rows_read);
            println!("rows malformed    {}", st.rows_malformed);
            println!("rows other token  {}", st.rows_other_token);
            println!("null-address rows {}", st.rows_filtered_null);
            println!("self-transfers    {}", st.rows_filtered_selfloop);
            println!("rows retained     {}", st.rows_retained);
            match (st.first_day, st.last_day) {
                (Some(f), Some(l)) => println!(
                    "days              {} ({f}..{l}, {} calendar days)",
                    st.days, st.duration_days
                ),
                _ => println!("days              {}", st.days),
            }
            println!("unique addresses  {}", st.unique_addresses);
            println!("total value       {}", st.total_value);
            println!("edges             {}", s.edges);
            println!("cache             {}", s.dir.display());
        }
        Command::Analyze(a) => {
            let config = RunConfig {
                analysis: AnalysisConfig {
                    null_model: NullModelConfig {
                        replicates: a.replicates,
                        swaps_per_edge: a.swaps_per_edge,
                        alpha: a.alpha,
                        master_seed: a.seed,
                        null_model: match a.null_model {
                            NullModelArg::Gnm => NullModel::Gnm,
                            NullModelArg::DegreePreserving => NullModel::DegreePreserving,
                        },
                        untested: match a.untested {
                            UntestedArg::NotSignificant => UntestedPolicy::NotSignificant,
                            UntestedArg::Significant => UntestedPolicy::Significant,
                        },
                    },
                    community_seed: a.community_seed,
                    core_policy: match a.core_policy {
                        CorePolicyArg::Filtered => CorePolicy::Filtered,
                        CorePolicyArg::Raw => CorePolicy::Raw,
                    },
                    significance: !a.no_significance,
                    ..AnalysisConfig::default()
                },
                ..base(&a.dataset)
            };
            let s = pipeline::cmd_analyze(&config)?;
            println!("days analyzed     {}", s.days);
            println!("significant days  {}", s.significant_days);
            println!("config digest     {}", s.config_digest);
            println!("results           {}", s.dir.join("analysis").display());
        }
        Command::Report(a) => {
            let mut config = with_intel(base(&a.dataset), &a.intel);
            config.analysis.correlation = match a.correlation {
                CorrelationArg::Pearson => CorrelationMethod::Pearson,
                CorrelationArg::Spearman => CorrelationMethod::Spearman,
            };
            config.analysis.extended_correlation = a.extended_correlation;
            config.aux_charts = a.aux_charts;
            let s = pipeline::cmd_report(&config)?;
            for f in &s.files {
                println!("{}", f.display());
            }
            if s.unknown > 0 {
                eprintln!("warning: {} core addresses have kind=unknown", s.unknown);
            }
        }
        Command::Classify(a) => {
            let config = with_intel(base(&a.dataset), &a.intel);
            let s = pipeline::cmd_classify(&config)?;
            println!("profiles          {}", s.profiles.len());
            println!("outliers          {}", s.profiles.iter().filter(|p| p.outlier).count());
            if s.unknown > 0 {
                eprintln!("warning: {} core addresses have kind=unknown", s.unknown);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
