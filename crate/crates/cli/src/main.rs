use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use binembed::embedders::{write_codes, BinaryCode, EmbeddingOperator, OperatorKind};
use binembed::harness::{self, summary_path, ExperimentConfig};
use binembed::metrics::{distortion_report, DistortionReport};
use binembed::sets::{gaussian_width, sample_points, PointCloud, SetDescriptor, UnitVector};
use binembed::theory::{required_samples, sketch_dimension, ComplexityQuery, Regime};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::warn;
use serde_json::json;

#[derive(Parser)]
#[command(name = "binembed", version, about = "Binary embeddings of sphere subsets: embed, measure, size")]
struct Cli {
    /// Master seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Embed vectors read from a text file (one per line).
    Embed(EmbedArgs),
    /// Worst-case distortion of one operator over a point cloud.
    Distortion(DistortionArgs),
    /// Monte Carlo Gaussian width of a set.
    Width(WidthArgs),
    /// Measurements required by a sample-complexity bound.
    Complexity(ComplexityArgs),
    /// Run a parameter sweep from a JSON config.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct OperatorArgs {
    #[arg(long, default_value = "dense-gaussian", value_parser = parse_kind)]
    kind: OperatorKind,
    /// Number of measurements (code length).
    #[arg(long)]
    m: usize,
    /// Intermediate sketch size for the sketched kinds.
    #[arg(long)]
    m_lin: Option<usize>,
}

#[derive(Args)]
struct EmbedArgs {
    #[arg(long)]
    input: PathBuf,
    /// Binary codes file; without it codes are printed as bit strings.
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    op: OperatorArgs,
}

#[derive(Args)]
struct DistortionArgs {
    /// Set descriptor as JSON, sampled with --p points.
    #[arg(long, conflicts_with = "input", required_unless_present = "input")]
    set: Option<String>,
    /// Text file of vectors to use as the cloud.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 200)]
    p: usize,
    #[command(flatten)]
    op: OperatorArgs,
}

#[derive(Args)]
struct WidthArgs {
    /// Set descriptor as JSON, e.g. '{"kind":"subspace","n":128,"d":9}'.
    #[arg(long)]
    set: String,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
}

#[derive(Args)]
struct ComplexityArgs {
    #[arg(long, value_parser = parse_regime)]
    regime: Regime,
    #[arg(long)]
    omega_sq: f64,
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    log_n_eps: Option<f64>,
    #[arg(long)]
    omega_sq_local: Option<f64>,
    #[arg(long)]
    c_k: Option<f64>,
    #[arg(long)]
    ambient_dim: Option<usize>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    c1: f64,
}

#[derive(Args)]
struct ExperimentArgs {
    /// ExperimentConfig JSON file.
    #[arg(long)]
    config: PathBuf,
    /// CSV destination, overriding output_path in the config.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn parse_kind(s: &str) -> Result<OperatorKind, String> {
    let kind: OperatorKind = s.parse().map_err(|e| format!("{e}"))?;
    if kind == OperatorKind::Explicit {
        return Err("explicit operators cannot be drawn at random".into());
    }
    Ok(kind)
}

fn parse_regime(s: &str) -> Result<Regime, String> {
    s.parse().map_err(|e| format!("{e}"))
}

/// Whitespace-separated decimals, one vector per line; blank lines and
/// lines starting with '#' are skipped.
fn read_vectors(path: &Path) -> Result<Vec<UnitVector>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let coords = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .with_context(|| format!("{}:{}: bad number", path.display(), lineno + 1))?;
        if let Some(first) = out.first().map(UnitVector::dim) {
            if coords.len() != first {
                bail!("{}:{}: expected {first} values, found {}", path.display(), lineno + 1, coords.len());
            }
        }
        let norm = coords.iter().map(|v| v * v).sum::<f64>().sqrt();
        let unit = UnitVector::normalize(coords).with_context(|| format!("{}:{}", path.display(), lineno + 1))?;
        if (norm - 1.0).abs() > binembed::sets::TOL {
            warn!("{}:{}: norm {norm} rescaled to 1", path.display(), lineno + 1);
        }
        out.push(unit);
    }
    if out.is_empty() {
        bail!("{} holds no vectors", path.display());
    }
    Ok(out)
}

fn build(op: &OperatorArgs, n: usize, seed: u64) -> Result<EmbeddingOperator> {
    Ok(EmbeddingOperator::build(op.kind, op.m, n, seed, op.m_lin)?)
}

fn bit_string(code: &BinaryCode) -> String {
    (0..code.len()).map(|i| if code.bit(i) { '1' } else { '0' }).collect()
}

fn embed(cli: &Cli, args: &EmbedArgs) -> Result<()> {
    let vectors = read_vectors(&args.input)?;
    let op = build(&args.op, vectors[0].dim(), cli.seed)?;
    let codes = op.embed_batch(&vectors)?;
    match &args.output {
        Some(path) => {
            let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            let mut w = BufWriter::new(file);
            write_codes(&mut w, &codes)?;
            w.flush()?;
        }
        None => {
            let strings: Vec<String> = codes.iter().map(bit_string).collect();
            match cli.format {
                Format::Csv => strings.iter().for_each(|s| println!("{s}")),
                Format::Json => println!("{}", serde_json::to_string(&strings)?),
            }
        }
    }
    Ok(())
}

fn parse_set(text: &str) -> Result<SetDescriptor> {
    let desc: SetDescriptor = serde_json::from_str(text).context("parsing set descriptor")?;
    desc.validate()?;
    Ok(desc)
}

fn distortion(cli: &Cli, args: &DistortionArgs) -> Result<()> {
    let cloud = match (&args.set, &args.input) {
        (Some(set), _) => sample_points(&parse_set(set)?, args.p, cli.seed)?,
        (None, Some(path)) => {
            PointCloud::from_vectors(read_vectors(path)?.into_iter().map(UnitVector::into_inner).collect())?
        }
        (None, None) => unreachable!("clap requires one of --set, --input"),
    };
    let op = build(&args.op, cloud.dim(), cli.seed)?;
    let report = distortion_report(&cloud, &op, cli.seed)?;
    match cli.format {
        Format::Csv => println!("{}\n{}", DistortionReport::CSV_HEADER, report.csv_row()),
        Format::Json => println!("{}", serde_json::to_string_pretty(&report)?),
    }
    Ok(())
}

fn width(cli: &Cli, args: &WidthArgs) -> Result<()> {
    let desc = parse_set(&args.set)?;
    let est = gaussian_width(&desc, args.trials, cli.seed)?;
    match cli.format {
        Format::Csv => println!(
            "set,estimate,std_error,trials\n{},{},{},{}",
            desc.kind_name(),
            est.estimate,
            est.std_error,
            est.trials
        ),
        Format::Json => println!("{}", serde_json::to_string_pretty(&json!({ "set": desc, "width": est }))?),
    }
    Ok(())
}

fn complexity(cli: &Cli, args: &ComplexityArgs) -> Result<()> {
    let q = ComplexityQuery {
        regime: args.regime,
        omega_sq: args.omega_sq,
        delta: args.delta,
        log_n_eps: args.log_n_eps,
        omega_sq_local: args.omega_sq_local,
        c_k: args.c_k,
        ambient_dim: args.ambient_dim,
        eta: args.eta,
        c1: args.c1,
    };
    let m = required_samples(&q)?;
    let m_lin = sketch_dimension(&q)?;
    match cli.format {
        Format::Csv => println!("regime,m_required\n{},{m}", q.regime),
        Format::Json => {
            let mut out = json!({
                "regime": q.regime,
                "inputs": q,
                "m_required": m,
                "formula": q.regime.formula(),
                "note": "order of magnitude: the absolute constant c1 is unspecified",
            });
            if let Some(k) = m_lin {
                out["m_lin"] = json!(k);
            }
            println!("{}", serde_json::to_string_pretty(&out)?);
        }
    }
    Ok(())
}

fn experiment(args: &ExperimentArgs) -> Result<()> {
    let text = fs::read_to_string(&args.config).with_context(|| format!("reading {}", args.config.display()))?;
    let mut config: ExperimentConfig = serde_json::from_str(&text).context("parsing experiment config")?;
    if let Some(out) = &args.output {
        config.output_path = Some(out.clone());
    }
    match &config.output_path {
        Some(path) => {
            harness::run(&config).with_context(|| format!("writing {}", path.display()))?;
            eprintln!("wrote {} and {}", path.display(), summary_path(path).display());
        }
        None => io::stdout().write_all(harness::execute(&config)?.csv.as_bytes())?,
    }
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Embed(a) => embed(cli, a),
        Command::Distortion(a) => distortion(cli, a),
        Command::Width(a) => width(cli, a),
        Command::Complexity(a) => complexity(cli, a),
        Command::Experiment(a) => experiment(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // clap exits with status 2 on usage errors.
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
