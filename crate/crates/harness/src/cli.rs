//! Command-line front end. Exit codes: 0 success, 1 runtime error,
//! 2 usage error.

use std::io::Write;
use std::path::{Path, PathBuf};

use adrt::inversion::{run_inverse, Method};
use adrt::{adrt_adjoint, adrt_forward, Quadrant};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{HarnessError, Result};
use crate::experiments::{self, NoiseSetting};
use crate::generate::{generate, GeneratorKind, GeneratorSpec};
use crate::io::{self, MetricsRow};
use crate::noise::{add_noise, NoiseKind, NoiseSpec, PixelTarget};

#[derive(Debug, Parser)]
#[command(
    name = "adrt",
    version,
    about = "ADRT forward transform, inverses and experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a test image.
    Gen {
        #[arg(long)]
        kind: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Forward transform of an image file.
    Forward {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Adjoint transform of a data file.
    Adjoint {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Invert a data file.
    Inverse {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        method: MethodArg,
        /// CG iterations (default log2 N).
        #[arg(long)]
        iters: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        /// Reference image; prints a metrics CSV row.
        #[arg(long = "ref")]
        reference: Option<PathBuf>,
    },
    /// Add noise to a data file.
    Noise {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        noise: NoiseArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every method on the transform of an image.
    Compare {
        #[arg(long)]
        image: PathBuf,
        /// Noise as KIND:LEVEL, e.g. uniform:1e-3.
        #[arg(long)]
        noise: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Scale the noise level by the max-abs of the clean data.
        #[arg(long)]
        relative: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Errors of every method over a list of noise levels.
    Sweep {
        #[arg(long)]
        image: PathBuf,
        #[arg(long = "noise-kind")]
        noise_kind: String,
        /// Comma-separated levels.
        #[arg(long, value_delimiter = ',', required = true)]
        levels: Vec<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        relative: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Median timings of the forward transform and spife.
    Bench {
        #[arg(long = "n-min")]
        n_min: usize,
        #[arg(long = "n-max")]
        n_max: usize,
        #[arg(long, default_value_t = 5)]
        runs: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-level error trace of spife on clean data.
    Trace {
        #[arg(long)]
        image: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Spife,
    SpifeSq,
    Cg,
    Alg,
    Fmg,
}

#[derive(Debug, Args)]
pub struct NoiseArgs {
    #[arg(long)]
    kind: String,
    #[arg(long)]
    level: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    relative: bool,
    /// Pixel target quadrant (1-4) for kind=pixel.
    #[arg(long)]
    quadrant: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    h: Option<isize>,
    #[arg(long)]
    s: Option<usize>,
}

/// Outcome of a run that did not fail at runtime.
pub enum Outcome {
    Ok,
    Usage(String),
}

fn method_for(arg: MethodArg, iters: Option<usize>, n: usize) -> Option<Method> {
    match arg {
        MethodArg::Spife => Some(Method::Spife),
        MethodArg::SpifeSq => Some(Method::SpifeSq),
        MethodArg::Cg => Some(Method::Cg {
            iters: iters.unwrap_or(n.max(1)),
        }),
        MethodArg::Alg => Some(Method::Alg),
        MethodArg::Fmg => None,
    }
}

fn parse_noise(text: &str, seed: u64, n: usize) -> Result<NoiseSpec> {
    let (kind, level) = text
        .split_once(':')
        .ok_or_else(|| HarnessError::Invalid(format!("noise {text:?} is not KIND:LEVEL")))?;
    let kind: NoiseKind = kind.parse()?;
    let level: f64 = level
        .parse()
        .map_err(|_| HarnessError::Invalid(format!("noise level {level:?}")))?;
    Ok(match kind {
        NoiseKind::Pixel => NoiseSpec::pixel(level, PixelTarget::alg_blind_spot(n)),
        _ => NoiseSpec {
            kind,
            level,
            seed,
            target: None,
        },
    })
}

fn write_text(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => io::write_atomic(p, text.as_bytes()),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .map_err(|source| HarnessError::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

/// Executes a parsed command.
pub fn execute(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Gen { kind, n, seed, out } => {
            let kind: GeneratorKind = kind.parse()?;
            io::write_image(&out, &generate(&GeneratorSpec::new(kind, n, seed))?)?;
        }
        Command::Forward { input, out } => {
            let img = io::read_image(&input)?;
            io::write_data(&out, &adrt_forward(&img)?)?;
        }
        Command::Adjoint { input, out } => {
            let d = io::read_data(&input)?;
            io::write_image(&out, &adrt_adjoint(&d)?)?;
        }
        Command::Inverse {
            input,
            method,
            iters,
            out,
            reference,
        } => {
            if method == MethodArg::Fmg {
                return Ok(Outcome::Usage("unsupported: see docs".into()));
            }
            if iters == Some(0) {
                return Ok(Outcome::Usage("--iters must be at least 1".into()));
            }
            let d = io::read_data(&input)?;
            let method = method_for(method, iters, d.n()).expect("fmg handled above");
            let reference = reference.map(|p| io::read_image(&p)).transpose()?;
            let report = run_inverse(method, &d, reference.as_ref(), false)?;
            io::write_image(&out, &report.image)?;
            if let Some(m) = report.metrics {
                let row = MetricsRow {
                    method: method.name().into(),
                    n: d.n(),
                    noise_kind: "none".into(),
                    noise_level: 0.0,
                    seed: 0,
                    max_err: m.max_err,
                    l2_err: m.l2_err,
                    rel_l2: m.rel_l2,
                    seconds: report.seconds,
                };
                write_text(None, &io::metrics_csv(&[row])?)?;
            }
        }
        Command::Noise { input, noise, out } => {
            let d = io::read_data(&input)?;
            let kind: NoiseKind = noise.kind.parse()?;
            let spec = match kind {
                NoiseKind::Pixel => {
                    let target = match (noise.quadrant, noise.h, noise.s) {
                        (None, None, None) => PixelTarget::alg_blind_spot(d.n()),
                        (Some(q), Some(h), Some(s)) if (1..=4).contains(&q) => PixelTarget {
                            quadrant: Quadrant::from_index(q - 1)?,
                            h,
                            s,
                        },
                        _ => {
                            return Ok(Outcome::Usage(
                                "pixel noise needs --quadrant 1-4, --h and --s together".into(),
                            ))
                        }
                    };
                    NoiseSpec::pixel(noise.level, target)
                }
                _ => NoiseSpec {
                    kind,
                    level: noise.level,
                    seed: noise.seed,
                    target: None,
                },
            };
            let setting = NoiseSetting {
                spec,
                relative: noise.relative,
            };
            io::write_data(&out, &add_noise(&d, &setting.resolve(&d))?)?;
        }
        Command::Compare {
            image,
            noise,
            seed,
            relative,
            out,
        } => {
            let img = io::read_image(&image)?;
            let setting = noise
                .map(|t| parse_noise(&t, seed, img.n()))
                .transpose()?
                .map(|spec| NoiseSetting { spec, relative });
            let rows = experiments::compare(&img, setting, &Method::all(img.n()))?;
            write_text(out.as_deref(), &io::metrics_csv(&rows)?)?;
        }
        Command::Sweep {
            image,
            noise_kind,
            levels,
            seed,
            relative,
            out,
        } => {
            let img = io::read_image(&image)?;
            let kind: NoiseKind = noise_kind.parse()?;
            let rows =
                experiments::sweep(&img, kind, &levels, seed, relative, &Method::all(img.n()))?;
            io::write_atomic(&out, io::metrics_csv(&rows)?.as_bytes())?;
        }
        Command::Bench {
            n_min,
            n_max,
            runs,
            out,
        } => {
            if n_min == 0 || n_min > n_max || runs < 5 {
                return Ok(Outcome::Usage(
                    "need 1 <= --n-min <= --n-max and --runs >= 5".into(),
                ));
            }
            let rows = experiments::bench(n_min, n_max, runs)?;
            io::write_atomic(&out, experiments::bench_csv(&rows)?.as_bytes())?;
        }
        Command::Trace { image, out } => {
            let img = io::read_image(&image)?;
            let trace = experiments::trace(&img)?;
            io::write_atomic(&out, experiments::trace_csv(&trace)?.as_bytes())?;
        }
    }
    Ok(Outcome::Ok)
}

/// Caps the global thread pool from `ADRT_THREADS` (0 or unset = auto).
pub fn configure_threads() -> std::result::Result<(), String> {
    let Ok(value) = std::env::var("ADRT_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .map_err(|_| format!("ADRT_THREADS={value:?} is not a number"))?;
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| e.to_string())?;
    }
    Ok(())
}

/// Parses arguments, runs, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return 2;
    }
    match execute(cli) {
        Ok(Outcome::Ok) => 0,
        Ok(Outcome::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_usage() {
                2
            } else {
                1
            }
        }
    }
}
