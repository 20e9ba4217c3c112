//! `gmix`: fit Gaussian mixtures to financial-index log returns, evaluate
//! goodness of fit, and emit report, plot, and synthetic-data files.

mod report;

use chrono::NaiveDate;
use clap::{Parser, Subcommand, ValueEnum};
use gmix::{em, ks, plot::PlotData, returns, sample, FitConfig, MixtureModel};
use report::ReportTable;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "gmix",
    version,
    about = "Gaussian mixture modelling of financial index log returns"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a k-component mixture and a single-Gaussian baseline to the log
    /// returns of a price CSV, printing a component table with KS
    /// diagnostics
    Fit(FitArgs),
    /// Re-evaluate the KS statistic of a saved model against a price CSV
    Gof(GofArgs),
    /// Write histogram and density curves over a fixed grid as TSV
    Plotdata(PlotdataArgs),
    /// Generate a synthetic price CSV by sampling returns from a model
    Synth(SynthArgs),
}

#[derive(clap::Args)]
struct FitArgs {
    /// Price CSV with "date" and "close" columns
    #[arg(long)]
    input: PathBuf,
    /// Label for the series (appears in the report)
    #[arg(long)]
    name: String,
    /// Number of mixture components
    #[arg(long, default_value_t = 4)]
    components: usize,
    /// First date of the fitting window (inclusive, yyyy-mm-dd)
    #[arg(long, value_parser = parse_date)]
    start: Option<NaiveDate>,
    /// Last date of the fitting window (inclusive, yyyy-mm-dd)
    #[arg(long, value_parser = parse_date)]
    end: Option<NaiveDate>,
    /// Stop once the log-likelihood gain per iteration falls below this
    #[arg(long, default_value_t = 1e-8)]
    epsilon: f64,
    /// Iteration cap per restart
    #[arg(long = "max-iters", default_value_t = 1000)]
    max_iters: usize,
    /// Number of independently initialized EM runs
    #[arg(long, default_value_t = 8)]
    restarts: usize,
    /// Seed for deterministic initialization
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the fitted model as JSON to this path
    #[arg(long = "model-out")]
    model_out: Option<PathBuf>,
    /// Report format on standard output
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    report: ReportFormat,
}

#[derive(clap::Args)]
struct GofArgs {
    /// Price CSV with "date" and "close" columns
    #[arg(long)]
    input: PathBuf,
    /// Model JSON produced by `fit --model-out`
    #[arg(long)]
    model: PathBuf,
}

#[derive(clap::Args)]
struct PlotdataArgs {
    /// Price CSV with "date" and "close" columns
    #[arg(long)]
    input: PathBuf,
    /// Model JSON produced by `fit --model-out`
    #[arg(long)]
    model: PathBuf,
    /// Output TSV path
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
struct SynthArgs {
    /// Model JSON to sample returns from
    #[arg(long)]
    model: PathBuf,
    /// Number of price rows to generate (returns drawn: n - 1)
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    n: u64,
    /// Seed for the deterministic sampler
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

fn parse_date(raw: &str) -> Result<NaiveDate, String> {
    NaiveDate::parse_from_str(raw, "%Y-%m-%d")
        .map_err(|e| format!("expected yyyy-mm-dd, got {raw:?}: {e}"))
}

/// First price and first date of synthetic series.
const SYNTH_INITIAL_PRICE: f64 = 100.0;
const SYNTH_START: (i32, u32, u32) = (2000, 1, 3);

fn main() -> ExitCode {
    install_stderr_logger();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fit(args) => cmd_fit(args),
        Command::Gof(args) => cmd_gof(args),
        Command::Plotdata(args) => cmd_plotdata(args),
        Command::Synth(args) => cmd_synth(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn cmd_fit(args: FitArgs) -> gmix::Result<()> {
    let sample = load_returns(&args.input, &args.name, args.start, args.end)?;

    let config = FitConfig {
        k: args.components,
        epsilon: args.epsilon,
        max_iterations: args.max_iters,
        restarts: args.restarts,
        seed: args.seed,
    };
    let fitted = em::fit(&sample, &config)?;
    let baseline = em::fit(
        &sample,
        &FitConfig {
            k: 1,
            restarts: 1,
            ..config
        },
    )?;

    let ks = ks::ks_test(&fitted.model, &sample);
    let baseline_ks = ks::ks_test(&baseline.model, &sample);

    if let Some(path) = &args.model_out {
        fs::write(path, fitted.model.to_json())?;
    }

    let table = ReportTable::build(&sample, &fitted, ks, &baseline.model, baseline_ks);
    match args.report {
        ReportFormat::Text => print!("{}", table.render_text()),
        ReportFormat::Json => println!("{}", table.render_json()),
    }
    Ok(())
}

fn cmd_gof(args: GofArgs) -> gmix::Result<()> {
    let model = load_model(&args.model)?;
    let name = file_stem(&args.input);
    let sample = load_returns(&args.input, &name, None, None)?;
    let result = ks::ks_test(&model, &sample);
    println!("n = {}", result.n);
    println!("KS statistic = {:.12}", result.statistic);
    println!("p-value = {:.12}", result.p_value);
    Ok(())
}

fn cmd_plotdata(args: PlotdataArgs) -> gmix::Result<()> {
    let model = load_model(&args.model)?;
    let name = file_stem(&args.input);
    let sample = load_returns(&args.input, &name, None, None)?;
    let baseline = MixtureModel::from_triples(&[(1.0, sample.mean(), sample.std())])?;
    let data = PlotData::compute(&model, &baseline, &sample);
    let mut out = fs::File::create(&args.out)?;
    data.write_tsv(&mut out)?;
    out.flush()?;
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> gmix::Result<()> {
    let model = load_model(&args.model)?;
    let (y, m, d) = SYNTH_START;
    let start = NaiveDate::from_ymd_opt(y, m, d).expect("valid constant date");
    let series = sample::synthetic_prices(
        &model,
        args.n as usize,
        args.seed,
        SYNTH_INITIAL_PRICE,
        start,
        "synthetic",
    )?;
    let mut out = fs::File::create(&args.out)?;
    writeln!(out, "date,close")?;
    for (date, close) in series.observations() {
        // Full-precision closes so that reading the CSV back reproduces
        // the drawn returns exactly.
        writeln!(out, "{date},{close}")?;
    }
    out.flush()?;
    Ok(())
}

fn load_returns(
    input: &Path,
    name: &str,
    start: Option<NaiveDate>,
    end: Option<NaiveDate>,
) -> gmix::Result<gmix::ReturnSample> {
    let file = fs::File::open(input)?;
    let series = returns::load_prices(file, name)?;
    let series = match (start, end) {
        (None, None) => series,
        (start, end) => {
            let start = start.unwrap_or_else(|| series.first_date());
            let end = end.unwrap_or_else(|| series.last_date());
            series.slice_period(start, end)?
        }
    };
    series.log_returns()
}

fn load_model(path: &Path) -> gmix::Result<MixtureModel> {
    let json = fs::read_to_string(path)?;
    MixtureModel::from_json(&json)
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "input".into())
}

/// Forwards library warnings (discarded restarts) to standard error.
fn install_stderr_logger() {
    struct StderrLogger;
    impl log::Log for StderrLogger {
        fn enabled(&self, metadata: &log::Metadata) -> bool {
            metadata.level() <= log::Level::Warn
        }
        fn log(&self, record: &log::Record) {
            if self.enabled(record.metadata()) {
                eprintln!(
                    "{}: {}",
                    record.level().to_string().to_lowercase(),
                    record.args()
                );
            }
        }
        fn flush(&self) {}
    }
    static LOGGER: StderrLogger = StderrLogger;
    let _ = log::set_logger(&LOGGER).map(|()| log::set_max_level(log::LevelFilter::Warn));
}
