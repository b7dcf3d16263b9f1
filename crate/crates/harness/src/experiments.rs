//! The comparison, noise sweep, timing and level-trace experiments.

use std::time::Instant;

use adrt::inversion::{level_error_trace, run_inverse, Method};
use adrt::{adrt_forward, AdrtData, Image};

use crate::error::Result;
use crate::io::{csv_string, MetricsRow};
use crate::noise::{add_noise, NoiseKind, NoiseSpec};

/// Noise to apply before inverting; with `relative` the level is scaled by
/// the max-abs of the clean data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSetting {
    pub spec: NoiseSpec,
    pub relative: bool,
}

impl NoiseSetting {
    pub fn resolve(&self, clean: &AdrtData) -> NoiseSpec {
        let mut spec = self.spec;
        if self.relative {
            spec.level *= clean.max_abs();
        }
        spec
    }
}

/// Runs each method on the (optionally noised) transform of `img`.
pub fn compare(
    img: &Image,
    noise: Option<NoiseSetting>,
    methods: &[Method],
) -> Result<Vec<MetricsRow>> {
    let clean = adrt_forward(img)?;
    let (data, kind, level, seed) = match noise {
        Some(setting) => {
            let spec = setting.resolve(&clean);
            (
                add_noise(&clean, &spec)?,
                spec.kind.name(),
                spec.level,
                spec.seed,
            )
        }
        None => (clean, "none", 0.0, 0),
    };
    methods
        .iter()
        .map(|&method| {
            let report = run_inverse(method, &data, Some(img), false)?;
            let m = report.metrics.expect("reference given");
            Ok(MetricsRow {
                method: method.name().to_string(),
                n: img.n(),
                noise_kind: kind.to_string(),
                noise_level: level,
                seed,
                max_err: m.max_err,
                l2_err: m.l2_err,
                rel_l2: m.rel_l2,
                seconds: report.seconds,
            })
        })
        .collect()
}

/// One [`compare`] run per noise level.
pub fn sweep(
    img: &Image,
    kind: NoiseKind,
    levels: &[f64],
    seed: u64,
    relative: bool,
    methods: &[Method],
) -> Result<Vec<MetricsRow>> {
    let mut rows = Vec::with_capacity(levels.len() * methods.len());
    for &level in levels {
        let spec = match kind {
            NoiseKind::Pixel => {
                NoiseSpec::pixel(level, crate::noise::PixelTarget::alg_blind_spot(img.n()))
            }
            _ => NoiseSpec {
                kind,
                level,
                seed,
                target: None,
            },
        };
        rows.extend(compare(
            img,
            Some(NoiseSetting { spec, relative }),
            methods,
        )?);
    }
    Ok(rows)
}

/// Median wall time of one operation at one size.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub operation: &'static str,
    pub n: usize,
    pub median_seconds: f64,
    pub runs: usize,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite timings"));
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

/// Times `op` `runs` times after one warm-up call and returns the median.
pub fn time_median<T>(runs: usize, mut op: impl FnMut() -> Result<T>) -> Result<f64> {
    op()?;
    let mut samples = Vec::with_capacity(runs);
    for _ in 0..runs {
        let start = Instant::now();
        let out = op()?;
        samples.push(start.elapsed().as_secs_f64());
        drop(out);
    }
    Ok(median(samples))
}

/// Median times of the forward transform and of spife for `n_min..=n_max`
/// on random images (seed 0).
pub fn bench(n_min: usize, n_max: usize, runs: usize) -> Result<Vec<BenchRow>> {
    let mut forward_rows = Vec::new();
    let mut spife_rows = Vec::new();
    for n in n_min..=n_max {
        let img = crate::generate::generate(&crate::generate::GeneratorSpec::new(
            crate::generate::GeneratorKind::Random,
            n,
            0,
        ))?;
        let b = adrt_forward(&img)?;
        forward_rows.push(BenchRow {
            operation: "forward",
            n,
            median_seconds: time_median(runs, || Ok(adrt_forward(&img)?))?,
            runs,
        });
        spife_rows.push(BenchRow {
            operation: "spife",
            n,
            median_seconds: time_median(runs, || Ok(adrt::spife(&b)?))?,
            runs,
        });
    }
    forward_rows.extend(spife_rows);
    Ok(forward_rows)
}

pub fn bench_csv(rows: &[BenchRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["operation", "n", "median_seconds", "runs"])?;
    for r in rows {
        w.write_record([
            r.operation.to_string(),
            r.n.to_string(),
            format!("{:e}", r.median_seconds),
            r.runs.to_string(),
        ])?;
    }
    csv_string(w)
}

/// Consecutive ratios `t(n+1)/t(n)` of one operation's median times.
pub fn doubling_ratios(rows: &[BenchRow], operation: &str) -> Vec<f64> {
    let t: Vec<f64> = rows
        .iter()
        .filter(|r| r.operation == operation)
        .map(|r| r.median_seconds)
        .collect();
    t.windows(2).map(|w| w[1] / w[0]).collect()
}

/// Per-level spife error trace of the clean transform of `img`.
pub fn trace(img: &Image) -> Result<Vec<(usize, f64)>> {
    let b = adrt_forward(img)?;
    Ok(level_error_trace(img, &b)?)
}

pub fn trace_csv(trace: &[(usize, f64)]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["level", "max_err"])?;
    for (m, e) in trace {
        w.write_record([m.to_string(), format!("{e:e}")])?;
    }
    csv_string(w)
}
