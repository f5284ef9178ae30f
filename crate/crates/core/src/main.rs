use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use calibration_measures::error::{Error, Result};
use calibration_measures::fixtures::{self, Expectation};
use calibration_measures::online::{
    default_stride, parse_adversary, parse_forecaster, prefix_curve, run, sequence_measure,
    SequenceMeasure, Transcript,
};
use calibration_measures::report::{
    build_report, oracle_report_for, to_json, Config, ConfigFile, Input, SCHEMA_VERSION,
};
use calibration_measures::{io, plot};

/// Calibration measures for binary predictors.
#[derive(Parser)]
#[command(name = "calib", version)]
struct Cli {
    /// TOML file with grid, oracle_cap, tolerance, kernel and seed.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Random seed; falls back to the config file, then CALIB_SEED, then 0.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute measures on a .csv, .jsonl or instance .json file.
    Report(ReportArgs),
    /// Exact distance oracles on a small instance .json file.
    Oracle(OracleArgs),
    /// Play a forecaster against an adversary and score the transcript.
    Online(OnlineArgs),
    /// Emit a worked example with its expected values.
    Fixture(FixtureArgs),
    /// CSV data for reliability diagrams, transcripts and regret curves.
    Plotdata {
        #[command(subcommand)]
        kind: PlotKind,
    },
}

#[derive(Args, Clone)]
struct Knobs {
    /// Grid resolution for interval calibration error.
    #[arg(long)]
    grid: Option<usize>,
    /// Largest instance the partition oracles accept (at most 13).
    #[arg(long)]
    oracle_cap: Option<usize>,
    /// Slack for inequality checks.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Kernel for the `kernel` measure, e.g. laplace:1 or gaussian:0.1.
    #[arg(long)]
    kernel: Option<String>,
}

#[derive(Args)]
struct ReportArgs {
    input: PathBuf,
    /// Comma-separated measure ids: ece, ece2, ece_q:<q>, tv, binned:<b>, smce,
    /// lowdeg:<d>, kernel[:...], emd, cdl, cfdl:<task>, intce, dce_upper, dce.
    #[arg(long, value_delimiter = ',', default_value = "ece,ece2,smce,cdl")]
    measures: Vec<String>,
    /// Check ece^2 <= ece2^2 <= cdl <= 2 ece; exit 1 when violated.
    #[arg(long)]
    verify_relations: bool,
    #[command(flatten)]
    knobs: Knobs,
    /// Write JSON here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    input: PathBuf,
    #[command(flatten)]
    knobs: Knobs,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct Episode {
    /// constant:<c>, running_mean[:<a>:<b>] or grid_random:<m>.
    #[arg(long)]
    forecaster: String,
    /// ones, zeros, bernoulli:<q>, threshold or alternating.
    #[arg(long)]
    adversary: String,
    /// Number of rounds.
    #[arg(short = 'T', long = "rounds")]
    rounds: usize,
}

#[derive(Args)]
struct OnlineArgs {
    #[command(flatten)]
    episode: Episode,
    /// Comma-separated: ece, ece2, smce, cdl, binned:<b>.
    #[arg(long, value_delimiter = ',', default_value = "ece,smce,cdl")]
    measures: Vec<String>,
    /// Rounds between prefix-curve samples; defaults to T/100.
    #[arg(long)]
    stride: Option<usize>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum EmitFormat {
    /// The feature-space instance.
    Json,
    /// The prediction-label joint as weighted rows.
    Csv,
}

#[derive(Args)]
struct FixtureArgs {
    /// two_point, cdl_example_1, cdl_example_2, quadratic_gap_near,
    /// quadratic_gap_calibrated or quadratic_gap_far.
    #[arg(long)]
    name: String,
    #[arg(long)]
    eps: f64,
    /// Number of points for cdl_example_2.
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Write the instance to this file.
    #[arg(long)]
    emit: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: EmitFormat,
}

#[derive(Subcommand)]
enum PlotKind {
    /// prediction, empirical_mean, mass per distinct prediction.
    Reliability { input: PathBuf },
    /// t, p, y per round.
    Transcript {
        #[command(flatten)]
        episode: Episode,
    },
    /// t and T-scaled measures of each prefix.
    Curves {
        #[command(flatten)]
        episode: Episode,
        #[arg(long, value_delimiter = ',', default_value = "ece,smce,cdl")]
        measures: Vec<String>,
        #[arg(long)]
        stride: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("calib: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

struct Settings {
    config: Config,
    seed: u64,
}

fn settings(cli_config: Option<&Path>, cli_seed: Option<u64>, knobs: Option<&Knobs>) -> Result<Settings> {
    let file = match cli_config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let mut config = file.apply(Config::default());
    if let Some(k) = knobs {
        config.grid = k.grid.unwrap_or(config.grid);
        config.oracle_cap = k.oracle_cap.unwrap_or(config.oracle_cap);
        config.tolerance = k.tolerance.unwrap_or(config.tolerance);
        if let Some(kernel) = &k.kernel {
            config.kernel = kernel.clone();
        }
    }
    let env_seed = match std::env::var("CALIB_SEED") {
        Ok(s) => Some(
            s.trim()
                .parse::<u64>()
                .map_err(|_| Error::InvalidParameter(format!("CALIB_SEED `{s}` is not an integer")))?,
        ),
        Err(_) => None,
    };
    let seed = cli_seed.or(config.seed).or(env_seed).unwrap_or(0);
    config.seed = Some(seed);
    if config.oracle_cap > calibration_measures::distance::DEFAULT_ORACLE_CAP {
        eprintln!(
            "calib: warning: oracle cap {} enumerates up to {} partitions",
            config.oracle_cap,
            calibration_measures::partitions::bell(config.oracle_cap)
        );
    }
    Ok(Settings { config, seed })
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    let config_path = cli.config.as_deref();
    match cli.command {
        Command::Report(args) => {
            let s = settings(config_path, cli.seed, Some(&args.knobs))?;
            let input = Input::load(&args.input)?;
            let report = build_report(&input, &args.measures, &s.config, args.verify_relations)?;
            write_output(args.output.as_deref(), &to_json(&report))?;
            if !report.relations_hold() {
                eprintln!("calib: relation chain violated");
                return Ok(ExitCode::from(1));
            }
        }
        Command::Oracle(args) => {
            let s = settings(config_path, cli.seed, Some(&args.knobs))?;
            let input = Input::load(&args.input)?;
            let report = oracle_report_for(&input, &s.config)?;
            write_output(args.output.as_deref(), &to_json(&report))?;
        }
        Command::Online(args) => {
            let s = settings(config_path, cli.seed, None)?;
            let measures = parse_measures(&args.measures)?;
            let transcript = play(&args.episode, s.seed)?;
            let stride = args.stride.unwrap_or_else(|| default_stride(transcript.len()));
            let out = online_summary(&args.episode, s.seed, &transcript, &measures, stride)?;
            write_output(args.output.as_deref(), &to_json(&out))?;
        }
        Command::Fixture(args) => {
            let fixture = fixtures::by_name(&args.name, args.eps, args.n)?;
            let emitted = match &args.emit {
                Some(path) => {
                    let text = match args.format {
                        EmitFormat::Json => to_json(&fixture.instance),
                        EmitFormat::Csv => {
                            let mut buf = Vec::new();
                            io::write_csv(&fixture.instance.project(), &mut buf)?;
                            String::from_utf8(buf).expect("CSV is UTF-8")
                        }
                    };
                    std::fs::write(path, text)?;
                    Some(path.display().to_string())
                }
                None => None,
            };
            let out = FixtureOut {
                schema: SCHEMA_VERSION,
                name: &fixture.name,
                params: &fixture.params,
                expected: &fixture.expected,
                instance: emitted.is_none().then_some(&fixture.instance),
                emitted,
            };
            write_output(None, &to_json(&out))?;
        }
        Command::Plotdata { kind } => {
            let mut buf = Vec::new();
            match kind {
                PlotKind::Reliability { input } => {
                    plot::write_reliability(&Input::load(&input)?.joint, &mut buf)?;
                }
                PlotKind::Transcript { episode } => {
                    let s = settings(config_path, cli.seed, None)?;
                    plot::write_transcript(&play(&episode, s.seed)?, &mut buf)?;
                }
                PlotKind::Curves {
                    episode,
                    measures,
                    stride,
                } => {
                    let s = settings(config_path, cli.seed, None)?;
                    let measures = parse_measures(&measures)?;
                    let transcript = play(&episode, s.seed)?;
                    let stride = stride.unwrap_or_else(|| default_stride(transcript.len()));
                    let series = measures
                        .iter()
                        .map(|m| Ok((m.to_string(), prefix_curve(&transcript, *m, stride)?)))
                        .collect::<Result<Vec<_>>>()?;
                    plot::write_curves(&series, &mut buf)?;
                }
            }
            write_output(None, &String::from_utf8(buf).expect("CSV is UTF-8"))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_measures(ids: &[String]) -> Result<Vec<SequenceMeasure>> {
    ids.iter().map(|id| id.parse()).collect()
}

fn play(episode: &Episode, seed: u64) -> Result<Transcript> {
    let forecaster = parse_forecaster(&episode.forecaster)?;
    let mut adversary = parse_adversary(&episode.adversary)?;
    run(forecaster.as_ref(), adversary.as_mut(), episode.rounds, seed)
}

#[derive(Serialize)]
struct FixtureOut<'a> {
    schema: u32,
    name: &'a str,
    params: &'a BTreeMap<String, f64>,
    expected: &'a BTreeMap<String, Expectation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    instance: Option<&'a calibration_measures::FiniteInstance>,
    #[serde(skip_serializing_if = "Option::is_none")]
    emitted: Option<String>,
}

#[derive(Serialize)]
struct Curves {
    stride: usize,
    t: Vec<usize>,
    series: BTreeMap<String, Vec<f64>>,
}

#[derive(Serialize)]
struct OnlineOut {
    schema: u32,
    forecaster: String,
    adversary: String,
    rounds: usize,
    seed: u64,
    /// `T` times each measure on the whole transcript.
    measures: BTreeMap<String, f64>,
    curves: Curves,
    version: &'static str,
}

fn online_summary(
    episode: &Episode,
    seed: u64,
    transcript: &Transcript,
    measures: &[SequenceMeasure],
    stride: usize,
) -> Result<OnlineOut> {
    let mut totals = BTreeMap::new();
    let mut series = BTreeMap::new();
    let mut t = Vec::new();
    for m in measures {
        totals.insert(m.to_string(), sequence_measure(transcript, *m)?);
        let curve = prefix_curve(transcript, *m, stride)?;
        t = curve.iter().map(|c| c.0).collect();
        series.insert(m.to_string(), curve.into_iter().map(|c| c.1).collect());
    }
    Ok(OnlineOut {
        schema: SCHEMA_VERSION,
        forecaster: episode.forecaster.clone(),
        adversary: episode.adversary.clone(),
        rounds: transcript.len(),
        seed,
        measures: totals,
        curves: Curves { stride, t, series },
        version: env!("CARGO_PKG_VERSION"),
    })
}
