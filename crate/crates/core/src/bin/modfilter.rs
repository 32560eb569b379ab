//! Command-line front end: noise injection, both filters, evaluation and the
//! noise-sweep benchmark.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on I/O or format errors.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use modfilter::bench::{run_bench, write_csv, BenchConfig};
use modfilter::noise::{DEFAULT_LCG_A, DEFAULT_LCG_C};
use modfilter::{
    denoise, generate_synthetic, inject, median_filter, Aggregation, Channels, DamageMask, Donors,
    Error, EvalReport, FilterConfig, GraphConfig, Image, NoiseMode, NoiseSpec, Scope, Scoring,
    SyntheticKind, SyntheticSpec, WindowBorder,
};

#[derive(Parser, Debug)]
#[command(
    name = "modfilter",
    version,
    about = "Impulse-noise removal by modularity merge tests"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a synthetic test image.
    Synth {
        output: PathBuf,
        #[command(flatten)]
        source: SynthArgs,
    },
    /// Corrupt an image with impulse noise and write the ground-truth mask.
    Noise {
        input: PathBuf,
        output: PathBuf,
        mask: PathBuf,
        /// Fraction of damaged pixels in [0, 1].
        #[arg(long, value_parser = parse_fraction)]
        p: f64,
        #[command(flatten)]
        noise: NoiseArgs,
        #[arg(long, default_value_t = 1)]
        seed: u32,
    },
    /// Detect and repair impulse noise; writes the repaired image and the detection mask.
    Denoise {
        input: PathBuf,
        output: PathBuf,
        mask_out: PathBuf,
        #[command(flatten)]
        filter: FilterArgs,
    },
    /// Apply the 3x3 median filter.
    Median { input: PathBuf, output: PathBuf },
    /// Print distances and relative improvement as JSON.
    Compare {
        orig: PathBuf,
        noisy: PathBuf,
        restored: PathBuf,
        #[arg(long, requires = "detected_mask")]
        truth_mask: Option<PathBuf>,
        #[arg(long, requires = "truth_mask")]
        detected_mask: Option<PathBuf>,
    },
    /// Sweep noise levels and seeds, comparing both filters; writes CSV.
    Bench {
        /// Source image; a synthetic image is generated when omitted.
        #[arg(long, conflicts_with = "kind")]
        input: Option<PathBuf>,
        #[command(flatten)]
        source: SynthArgs,
        /// Noise levels in percent, each in (0, 100).
        #[arg(long = "p", value_delimiter = ',', default_values_t = [10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0])]
        p_list: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = [1u32, 2, 3])]
        seeds: Vec<u32>,
        #[command(flatten)]
        noise: NoiseArgs,
        #[command(flatten)]
        filter: FilterArgs,
        #[arg(long)]
        csv: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KindArg {
    SolidRect,
    SolidPlusGradient,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long, value_enum)]
    kind: Option<KindArg>,
    #[arg(long, default_value_t = 128)]
    width: usize,
    #[arg(long, default_value_t = 128)]
    height: usize,
    /// Generate a three-channel image.
    #[arg(long)]
    color: bool,
}

impl SynthArgs {
    fn spec(&self) -> SyntheticSpec {
        let kind = match self.kind.unwrap_or(KindArg::SolidPlusGradient) {
            KindArg::SolidRect => SyntheticKind::SolidRect,
            KindArg::SolidPlusGradient => SyntheticKind::SolidPlusGradient,
        };
        let mut spec = SyntheticSpec::new(kind, self.width, self.height);
        if self.color {
            spec.channels = Channels::Rgb;
        }
        spec
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    RandomValue,
    SaltPepper,
}

#[derive(Args, Debug)]
struct NoiseArgs {
    #[arg(long, value_enum, default_value = "random-value")]
    mode: ModeArg,
    #[arg(long, default_value_t = DEFAULT_LCG_A)]
    lcg_a: u32,
    #[arg(long, default_value_t = DEFAULT_LCG_C)]
    lcg_c: u32,
}

impl NoiseArgs {
    fn mode(&self) -> NoiseMode {
        match self.mode {
            ModeArg::RandomValue => NoiseMode::RandomValue,
            ModeArg::SaltPepper => NoiseMode::SaltPepper,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ScopeArg {
    Window,
    Global,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AggregationArg {
    Count,
    All,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BorderArg {
    Clip,
    Reflect,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ScoringArg {
    Best,
    Sum,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DonorsArg {
    Unflagged,
    All,
}

#[derive(Args, Debug)]
struct FilterArgs {
    /// Color-distance scale of the edge weights.
    #[arg(long = "h", value_parser = parse_positive, default_value_t = 20.0)]
    h: f64,
    #[arg(long, value_parser = parse_non_negative, default_value_t = 1e-12)]
    epsilon: f64,
    /// Minimum number of negative merge deltas that flags a pixel.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=8), default_value_t = 4)]
    k: u8,
    #[arg(long, value_enum, default_value = "window")]
    scope: ScopeArg,
    #[arg(long, value_enum, default_value = "count")]
    aggregation: AggregationArg,
    /// How windows are completed at the image border.
    #[arg(long, value_enum, default_value = "reflect")]
    border: BorderArg,
    /// How a candidate color is ranked against its donor neighbors.
    #[arg(long, value_enum, default_value = "sum")]
    scoring: ScoringArg,
    /// Neighbors that take part in the repair scan.
    #[arg(long, value_enum, default_value = "all")]
    donors: DonorsArg,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..), default_value_t = 8)]
    max_passes: u32,
    /// Detect/repair rounds.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..), default_value_t = FilterConfig::default().rounds as u32)]
    rounds: u32,
}

impl FilterArgs {
    fn config(&self) -> FilterConfig {
        FilterConfig {
            graph: GraphConfig { h: self.h },
            scope: match self.scope {
                ScopeArg::Window => Scope::Window3x3,
                ScopeArg::Global => Scope::Global,
            },
            epsilon: self.epsilon,
            k_min_negative: self.k as usize,
            max_passes: self.max_passes as usize,
            aggregation: match self.aggregation {
                AggregationArg::Count => Aggregation::Count,
                AggregationArg::All => Aggregation::All,
            },
            border: match self.border {
                BorderArg::Clip => WindowBorder::Clip,
                BorderArg::Reflect => WindowBorder::Reflect,
            },
            scoring: match self.scoring {
                ScoringArg::Best => Scoring::Best,
                ScoringArg::Sum => Scoring::Sum,
            },
            donors: match self.donors {
                DonorsArg::Unflagged => Donors::Unflagged,
                DonorsArg::All => Donors::All,
            },
            rounds: self.rounds as usize,
        }
    }
}

fn parse_f64(s: &str) -> Result<f64, String> {
    s.parse::<f64>().map_err(|e| e.to_string())
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("expected a positive number, got {v}"))
    }
}

fn parse_non_negative(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("expected a non-negative number, got {v}"))
    }
}

fn parse_fraction(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("expected a fraction in [0, 1], got {v}"))
    }
}

enum Failure {
    Usage(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) | Error::TooLarge { .. } | Error::DimensionMismatch(_) => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Io(e.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<Image, Failure> {
    Image::read_pnm_file(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn write(image: &Image, path: &Path) -> Result<(), Failure> {
    image
        .write_pnm_file(path)
        .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Synth { output, source } => write(&generate_synthetic(&source.spec())?, &output),
        Command::Noise {
            input,
            output,
            mask,
            p,
            noise,
            seed,
        } => {
            let image = read(&input)?;
            let spec = NoiseSpec {
                p,
                mode: noise.mode(),
                seed,
                lcg_a: noise.lcg_a,
                lcg_c: noise.lcg_c,
            };
            let (noisy, truth) = inject(&image, &spec)?;
            write(&noisy, &output)?;
            write(&truth.to_image(), &mask)
        }
        Command::Denoise {
            input,
            output,
            mask_out,
            filter,
        } => {
            let image = read(&input)?;
            let (restored, mask) = denoise(&image, &filter.config())?;
            write(&restored, &output)?;
            write(&mask.to_image(), &mask_out)
        }
        Command::Median { input, output } => write(&median_filter(&read(&input)?), &output),
        Command::Compare {
            orig,
            noisy,
            restored,
            truth_mask,
            detected_mask,
        } => {
            let (orig, noisy, restored) = (read(&orig)?, read(&noisy)?, read(&restored)?);
            let masks = match (truth_mask, detected_mask) {
                (Some(t), Some(d)) => Some((
                    DamageMask::from_image(&read(&t)?),
                    DamageMask::from_image(&read(&d)?),
                )),
                _ => None,
            };
            let report = EvalReport::evaluate(
                &orig,
                &noisy,
                &restored,
                masks.as_ref().map(|(t, d)| (t, d)),
            )?;
            println!(
                "{}",
                serde_json::to_string_pretty(&report).expect("report serializes")
            );
            Ok(())
        }
        Command::Bench {
            input,
            source,
            p_list,
            seeds,
            noise,
            filter,
            csv,
        } => {
            let image = match input {
                Some(path) => read(&path)?,
                None => generate_synthetic(&source.spec())?,
            };
            let config = BenchConfig {
                p_percents: p_list,
                seeds,
                mode: noise.mode(),
                filter: filter.config(),
                lcg_a: noise.lcg_a,
                lcg_c: noise.lcg_c,
            };
            config.validate()?;
            let rows = run_bench(&image, &config)?;
            let file =
                File::create(&csv).map_err(|e| Failure::Io(format!("{}: {e}", csv.display())))?;
            write_csv(&rows, BufWriter::new(file))?;
            for r in rows.iter().filter(|r| r.seed == -1) {
                eprintln!(
                    "p={:>5.1}%  proposed={:>7.2}%  median={:>7.2}%  precision={:.3}  recall={:.3}",
                    r.p_percent, r.delta_proposed, r.delta_median, r.precision, r.recall
                );
            }
            Ok(())
        }
    }
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
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
