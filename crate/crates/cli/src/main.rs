//! `pcfec` command-line harness.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use pcfec::confidence::{self, DatasetConfig, TrainConfig};
use pcfec::harness::{self, SearchSpace, SimConfig, TuneConfig};
use pcfec::{ComponentCode, ConfidenceModel, DecoderParams, Variant};

#[derive(Parser)]
#[command(
    name = "pcfec",
    version,
    about = "Chase–Pyndiah product-code decoder lab"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a single Eb/N0 point.
    Simulate(SimArgs),
    /// Simulate a list of Eb/N0 points.
    Sweep(SimArgs),
    /// Generate a labeled training set (CSV) from decoder runs.
    Dataset(DatasetArgs),
    /// Train the confidence model on a CSV dataset.
    Train(TrainArgs),
    /// Evaluate a model's normalized confusion matrix on a CSV dataset.
    Confusion(ConfusionArgs),
    /// Random-search decoder parameters at one Eb/N0.
    Tune(TuneArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct Common {
    /// Component code name.
    #[arg(long, default_value = "ebch_256_239")]
    code: String,
    /// Decoder parameter file (JSON). Defaults to the classic schedule with I=4, p=6.
    #[arg(long = "params", value_name = "FILE")]
    params: Option<PathBuf>,
    /// Override the variant in the parameter file.
    #[arg(long, value_parser = parse_variant)]
    variant: Option<Variant>,
    /// Confidence model file (JSON); required by nn_assisted.
    #[arg(long = "model", value_name = "FILE")]
    model: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Args)]
struct SimArgs {
    #[command(flatten)]
    common: Common,
    /// Eb/N0 in dB; comma separated for sweeps.
    #[arg(
        long,
        value_delimiter = ',',
        required = true,
        allow_negative_numbers = true
    )]
    ebn0: Vec<f64>,
    /// Maximum frames per point.
    #[arg(long, default_value_t = 100_000)]
    frames: u64,
    #[arg(long = "fe-target", default_value_t = 100)]
    fe_target: u64,
    #[arg(long = "out", value_name = "FILE")]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct DatasetArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_delimiter = ',', required = true)]
    ebn0: Vec<f64>,
    /// Frames per Eb/N0 point.
    #[arg(long, default_value_t = 200)]
    frames: u64,
    /// Keep the natural class ratio instead of downsampling the majority class.
    #[arg(long)]
    unbalanced: bool,
    #[arg(long = "out", value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    /// Training data (CSV).
    #[arg(long, value_name = "FILE")]
    data: PathBuf,
    #[arg(long, default_value_t = 5000)]
    epochs: usize,
    #[arg(long, default_value_t = 0.001)]
    lr: f64,
    #[arg(long, default_value_t = 1280)]
    batch: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Run gradient descent on raw (unstandardized) features.
    #[arg(long)]
    raw_features: bool,
    #[arg(long = "out", value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ConfusionArgs {
    #[arg(long = "model", value_name = "FILE")]
    model: PathBuf,
    #[arg(long, value_name = "FILE")]
    data: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct TuneArgs {
    #[command(flatten)]
    common: Common,
    /// Search space (JSON with optional alpha, beta, gamma, t2 bounds).
    #[arg(long, value_name = "FILE")]
    space: PathBuf,
    #[arg(long, default_value_t = 50)]
    budget: usize,
    #[arg(long, allow_negative_numbers = true)]
    ebn0: f64,
    /// Frames per evaluation.
    #[arg(long, default_value_t = 50)]
    frames: u64,
    /// Seed of the parameter sampler (frames use --seed).
    #[arg(long = "search-seed", default_value_t = 7)]
    search_seed: u64,
    #[arg(long = "out", value_name = "FILE")]
    out: Option<PathBuf>,
    /// Also write every trial (JSON).
    #[arg(long, value_name = "FILE")]
    log: Option<PathBuf>,
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    s.parse().map_err(|e: pcfec::Error| e.to_string())
}

struct Setup {
    code: ComponentCode,
    params: DecoderParams,
    model: Option<ConfidenceModel>,
}

impl Common {
    fn load(&self) -> Result<Setup> {
        let code = ComponentCode::by_name(&self.code)?;
        let mut params = match &self.params {
            Some(path) => DecoderParams::load(path)
                .with_context(|| format!("reading parameters {}", path.display()))?,
            None => DecoderParams::pyndiah_classic(4, 6),
        };
        if let Some(v) = self.variant {
            params.variant = v;
        }
        let model = match &self.model {
            Some(path) => Some(
                ConfidenceModel::load(path)
                    .with_context(|| format!("reading model {}", path.display()))?,
            ),
            None => None,
        };
        if params.variant == Variant::NnAssisted && model.is_none() {
            bail!("variant nn_assisted needs --model FILE");
        }
        if self.threads == 0 {
            bail!("--threads must be ≥ 1");
        }
        Ok(Setup {
            code,
            params,
            model,
        })
    }
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn simulate(args: &SimArgs, single: bool) -> Result<()> {
    if single && args.ebn0.len() != 1 {
        bail!("simulate takes exactly one --ebn0 value (use sweep for lists)");
    }
    let s = args.common.load()?;
    let cfg = SimConfig {
        ebn0_db: args.ebn0.clone(),
        max_frames: args.frames,
        fe_target: args.fe_target,
        seed: args.common.seed,
        threads: args.common.threads,
    };
    cfg.validate()?;
    let mut points = Vec::new();
    for &e in &cfg.ebn0_db {
        let p = harness::simulate_point(&s.code, &s.params, s.model.as_ref(), e, &cfg)?;
        eprintln!(
            "{} {:.3} dB: frames {} fe {} ber {:.3e} fer {:.3e} flag {:.4} ({:.1}s)",
            s.params.variant, p.ebn0, p.frames, p.fe, p.ber, p.fer, p.flag_rate, p.seconds
        );
        points.push(p);
    }
    let out = output(&args.out)?;
    match args.format {
        Format::Csv => harness::write_csv(&points, out)?,
        Format::Json => harness::write_json(&points, out)?,
    }
    Ok(())
}

fn dataset(args: &DatasetArgs) -> Result<()> {
    let s = args.common.load()?;
    let cfg = DatasetConfig {
        ebn0_db: args.ebn0.clone(),
        frames_per_point: args.frames,
        seed: args.common.seed,
        threads: args.common.threads,
        balance: !args.unbalanced,
    };
    let samples = confidence::generate_dataset(&s.code, &s.params, s.model.as_ref(), &cfg)?;
    let errs = samples.iter().filter(|x| x.label == 1).count();
    eprintln!(
        "{} samples ({} erroneous, {} correct)",
        samples.len(),
        errs,
        samples.len() - errs
    );
    confidence::write_dataset_csv(&samples, output(&args.out)?)?;
    Ok(())
}

fn read_samples(path: &Path) -> Result<Vec<pcfec::LabeledSample>> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(confidence::read_dataset_csv(io::BufReader::new(f))?)
}

fn train(args: &TrainArgs) -> Result<()> {
    let samples = read_samples(&args.data)?;
    let cfg = TrainConfig {
        learning_rate: args.lr,
        epochs: args.epochs,
        batch: args.batch,
        seed: args.seed,
        standardize: !args.raw_features,
    };
    let mut model = confidence::train_model(&samples, &cfg)?;
    model.metadata.description = format!("trained on {}", args.data.display());
    let (loss, _) = confidence::bce_loss_and_grad(&model, &samples);
    let c = confidence::confusion(&model, &samples)?;
    eprintln!(
        "loss {loss:.5}; flagged|erroneous {:.3}, flagged|correct {:.3}",
        c.flagged_given_erroneous, c.flagged_given_correct
    );
    let mut out = output(&args.out)?;
    writeln!(out, "{}", model.to_json()?)?;
    Ok(())
}

fn confusion(args: &ConfusionArgs) -> Result<()> {
    let model = ConfidenceModel::load(&args.model)?;
    let c = confidence::confusion(&model, &read_samples(&args.data)?)?;
    match args.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&c)?),
        Format::Csv => {
            println!(",erroneous,correct");
            println!(
                "flagged,{:.4},{:.4}",
                c.flagged_given_erroneous, c.flagged_given_correct
            );
            println!(
                "not_flagged,{:.4},{:.4}",
                c.unflagged_given_erroneous, c.unflagged_given_correct
            );
        }
    }
    Ok(())
}

fn tune(args: &TuneArgs) -> Result<()> {
    let s = args.common.load()?;
    let text = std::fs::read_to_string(&args.space)
        .with_context(|| format!("reading search space {}", args.space.display()))?;
    let space = SearchSpace::from_json(&text)?;
    let cfg = TuneConfig {
        budget: args.budget,
        ebn0_db: args.ebn0,
        frames: args.frames,
        eval_seed: args.common.seed,
        search_seed: args.search_seed,
        threads: args.common.threads,
    };
    let outcome = harness::tune_random_search(&s.code, &s.params, &space, s.model.as_ref(), &cfg)?;
    eprintln!(
        "best BER {:.4e} over {} trials",
        outcome.best_ber,
        outcome.trials.len()
    );
    if let Some(log) = &args.log {
        std::fs::write(log, serde_json::to_string_pretty(&outcome.trials)?)?;
    }
    let mut out = output(&args.out)?;
    writeln!(out, "{}", outcome.best.to_json()?)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(a) => simulate(a, true),
        Command::Sweep(a) => simulate(a, false),
        Command::Dataset(a) => dataset(a),
        Command::Train(a) => train(a),
        Command::Confusion(a) => confusion(a),
        Command::Tune(a) => tune(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
