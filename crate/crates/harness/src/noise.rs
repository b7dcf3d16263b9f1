//! Seeded noise added to transform data.

use std::str::FromStr;

use adrt::{AdrtData, Quadrant};
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Normal};
use rand_xoshiro::SplitMix64;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    Uniform,
    Gaussian,
    Pixel,
}

impl FromStr for NoiseKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(NoiseKind::Uniform),
            "gaussian" => Ok(NoiseKind::Gaussian),
            "pixel" => Ok(NoiseKind::Pixel),
            _ => Err(HarnessError::Unknown {
                what: "noise kind",
                name: s.to_string(),
            }),
        }
    }
}

impl NoiseKind {
    pub fn name(&self) -> &'static str {
        match self {
            NoiseKind::Uniform => "uniform",
            NoiseKind::Gaussian => "gaussian",
            NoiseKind::Pixel => "pixel",
        }
    }
}

/// Address of one data entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PixelTarget {
    pub quadrant: Quadrant,
    pub h: isize,
    pub s: usize,
}

impl PixelTarget {
    /// Entry `h = N/2` of the last column of quadrant I. The exact
    /// algebraic inverse never reads it, while the spectral inverses
    /// spread it over the whole image.
    pub fn alg_blind_spot(n: usize) -> Self {
        let side = 1usize << n;
        PixelTarget {
            quadrant: Quadrant::I,
            h: (side / 2) as isize,
            s: side - 1,
        }
    }
}

/// `level` is the half-width for uniform noise, the standard deviation
/// for Gaussian noise and the added value for a pixel perturbation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub level: f64,
    pub seed: u64,
    pub target: Option<PixelTarget>,
}

impl NoiseSpec {
    pub fn uniform(level: f64, seed: u64) -> Self {
        NoiseSpec {
            kind: NoiseKind::Uniform,
            level,
            seed,
            target: None,
        }
    }

    pub fn gaussian(level: f64, seed: u64) -> Self {
        NoiseSpec {
            kind: NoiseKind::Gaussian,
            level,
            seed,
            target: None,
        }
    }

    pub fn pixel(level: f64, target: PixelTarget) -> Self {
        NoiseSpec {
            kind: NoiseKind::Pixel,
            level,
            seed: 0,
            target: Some(target),
        }
    }
}

/// Adds noise to a copy of `b`. Random kinds draw one value per entry in
/// storage order (quadrants I..IV, columns ascending, `h` ascending) from
/// SplitMix64 seeded with `spec.seed`.
pub fn add_noise(b: &AdrtData, spec: &NoiseSpec) -> Result<AdrtData> {
    if !(spec.level >= 0.0 && spec.level.is_finite()) {
        return Err(HarnessError::Invalid(format!("noise level {}", spec.level)));
    }
    let mut out = b.clone();
    let mut rng = SplitMix64::seed_from_u64(spec.seed);
    match spec.kind {
        NoiseKind::Uniform => {
            if spec.level > 0.0 {
                for v in out.iter_mut() {
                    *v += spec.level * (2.0 * rng.random::<f64>() - 1.0);
                }
            }
        }
        NoiseKind::Gaussian => {
            if spec.level > 0.0 {
                let normal = Normal::new(0.0, spec.level)
                    .map_err(|e| HarnessError::Invalid(e.to_string()))?;
                for v in out.iter_mut() {
                    *v += normal.sample(&mut rng);
                }
            }
        }
        NoiseKind::Pixel => {
            let t = spec
                .target
                .ok_or_else(|| HarnessError::Invalid("pixel noise needs a target".into()))?;
            let q = out.quadrant_mut(t.quadrant);
            if t.s >= q.side() {
                return Err(adrt::Error::OutOfRange(format!("column {}", t.s)).into());
            }
            let v = q.get(t.h, t.s);
            q.set(t.h, t.s, v + spec.level)?;
        }
    }
    Ok(out)
}
