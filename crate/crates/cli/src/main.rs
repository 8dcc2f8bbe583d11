//! `ragfuzz`: run and resume fuzzing campaigns from the command line.
//!
//! Exit codes: 0 when the command ran (findings or not), 1 on a
//! configuration or system error, 2 when the campaign completed with
//! internal faults recorded in its report.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ragfuzz_core::campaign::{render_markdown, Campaign, CampaignConfig, CampaignReport, StageName};
use tracing_subscriber::EnvFilter;

#[derive(Parser)]
#[command(name = "ragfuzz", version, about = "Retrieval-augmented test generation and differential testing for SYCL toolchains")]
struct Cli {
    /// More log output on stderr (-v info, -vv debug). RAGFUZZ_LOG overrides.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract pass functions and index the documentation.
    Index(RunArgs),
    /// Generate characteristics and test cases (through repair and mutation).
    Gen(RunArgs),
    /// Compile, run and classify the generated test cases.
    Test(RunArgs),
    /// Run every remaining stage and write the report.
    Run(RunArgs),
    /// Continue an existing campaign directory to completion.
    Resume(ResumeArgs),
    /// Print the report of a tested campaign.
    Report(ReportArgs),
    /// Table-driven stand-in compiler used by mock toolchains.
    #[command(name = "mock-cc", hide = true)]
    MockCc {
        #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
        args: Vec<String>,
    },
}

#[derive(Args)]
struct WorkerArgs {
    /// Concurrent LLM-bound jobs.
    #[arg(long)]
    workers_llm: Option<usize>,
    /// Concurrent compile and run jobs.
    #[arg(long)]
    workers_tool: Option<usize>,
}

#[derive(Args)]
struct RunArgs {
    /// Campaign configuration (TOML). Optional with --resume.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    campaign_dir: PathBuf,
    /// Use the scripted LLM and hash embedder named in the config.
    #[arg(long)]
    mock_providers: bool,
    /// Override the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Continue the campaign already in --campaign-dir.
    #[arg(long)]
    resume: bool,
    #[command(flatten)]
    workers: WorkerArgs,
}

#[derive(Args)]
struct ResumeArgs {
    #[arg(long)]
    campaign_dir: PathBuf,
    #[command(flatten)]
    workers: WorkerArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Markdown,
    Json,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    campaign_dir: PathBuf,
    #[arg(long, value_enum, default_value = "markdown")]
    format: Format,
}

fn init_logging(verbose: u8) {
    let default = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let filter = EnvFilter::try_from_env("RAGFUZZ_LOG").unwrap_or_else(|_| EnvFilter::new(default));
    tracing_subscriber::fmt()
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .init();
}

fn apply_workers(campaign: &mut Campaign, args: &WorkerArgs) -> Result<()> {
    let mut workers = campaign.config().workers;
    if let Some(n) = args.workers_llm {
        workers.llm = n;
    }
    if let Some(n) = args.workers_tool {
        workers.tool = n;
    }
    if workers.llm == 0 || workers.tool == 0 {
        bail!("worker counts must be at least 1");
    }
    campaign.set_workers(workers);
    Ok(())
}

fn open_or_create(args: &RunArgs) -> Result<Campaign> {
    let mut campaign = match &args.config {
        Some(path) => {
            let mut config = CampaignConfig::load(path).with_context(|| format!("loading {}", path.display()))?;
            if let Some(seed) = args.seed {
                config.seed = seed;
            }
            Campaign::create(config, &args.campaign_dir, args.mock_providers)?
        }
        None if args.resume => {
            if args.seed.is_some() || args.mock_providers {
                bail!("--seed and --mock-providers need --config; a resumed campaign keeps its own settings");
            }
            Campaign::open(&args.campaign_dir)?
        }
        None => bail!("--config is required unless --resume is given"),
    };
    apply_workers(&mut campaign, &args.workers)?;
    Ok(campaign)
}

fn summary(campaign: &Campaign, report: &CampaignReport) {
    let t = &report.totals;
    let f = &report.findings;
    println!(
        "campaign {}: {} generated, {} compiled, {} failed, {} abandoned",
        report.campaign, t.generated, t.compiled, t.failed, t.abandoned
    );
    println!(
        "flagged {} test case(s): {} across compilers or opt levels, {} across devices",
        f.total_flagged, f.compiler_flagged, f.device_flagged
    );
    if let Some(total) = &report.cost.total.cost {
        println!("estimated cost: {total}");
    }
    if report.faults > 0 {
        println!("internal faults: {}", report.faults);
    }
    println!("report: {}", campaign.layout().report_markdown().display());
}

fn finish(campaign: &mut Campaign) -> Result<ExitCode> {
    let report = campaign.run()?;
    summary(campaign, &report);
    Ok(if report.faults > 0 { ExitCode::from(2) } else { ExitCode::SUCCESS })
}

fn stages(campaign: &mut Campaign, last: StageName) -> Result<ExitCode> {
    campaign.run_until(last)?;
    println!("campaign {}: complete through stage `{last}`", campaign.config().name);
    Ok(ExitCode::SUCCESS)
}

fn report(dir: &Path, format: Format) -> Result<ExitCode> {
    let mut campaign = Campaign::open(dir)?;
    if !campaign.manifest().is_complete(StageName::Classify) {
        bail!("campaign in {} has not been tested yet; run `ragfuzz test` first", dir.display());
    }
    campaign.run_until(StageName::Report)?;
    let report = campaign.report()?;
    match format {
        Format::Markdown => print!("{}", render_markdown(&report)),
        Format::Json => println!("{}", serde_json::to_string_pretty(&report)?),
    }
    Ok(ExitCode::SUCCESS)
}

fn dispatch(command: Command) -> Result<ExitCode> {
    match command {
        Command::Index(a) => stages(&mut open_or_create(&a)?, StageName::Index),
        Command::Gen(a) => stages(&mut open_or_create(&a)?, StageName::Generate),
        Command::Test(a) => stages(&mut open_or_create(&a)?, StageName::Classify),
        Command::Run(a) => finish(&mut open_or_create(&a)?),
        Command::Resume(a) => {
            let mut campaign = Campaign::open(&a.campaign_dir)?;
            apply_workers(&mut campaign, &a.workers)?;
            finish(&mut campaign)
        }
        Command::Report(a) => report(&a.campaign_dir, a.format),
        Command::MockCc { args } => {
            let code = ragfuzz_core::toolchain::mock_compile(&args);
            Ok(ExitCode::from(u8::try_from(code).unwrap_or(1)))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_logging(cli.verbose);
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
