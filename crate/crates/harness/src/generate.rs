//! Deterministic test images.

use std::str::FromStr;

use adrt::Image;
use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorKind {
    Random,
    Wavepacket,
    MutilatedGaussian,
}

impl FromStr for GeneratorKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(GeneratorKind::Random),
            "wavepacket" => Ok(GeneratorKind::Wavepacket),
            "mutilated-gaussian" => Ok(GeneratorKind::MutilatedGaussian),
            _ => Err(HarnessError::Unknown {
                what: "generator",
                name: s.to_string(),
            }),
        }
    }
}

/// Shape parameters; the Gaussian center and width apply to both smooth
/// kinds, the frequencies to the wave packet only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shape {
    pub x0: f64,
    pub y0: f64,
    pub sigma: f64,
    pub fx: f64,
    pub fy: f64,
}

impl Shape {
    pub fn default_for(kind: GeneratorKind) -> Self {
        match kind {
            GeneratorKind::MutilatedGaussian => Shape {
                x0: 0.55,
                y0: 0.55,
                sigma: 0.2,
                fx: 0.0,
                fy: 0.0,
            },
            _ => Shape {
                x0: 0.5,
                y0: 0.5,
                sigma: 0.15,
                fx: 6.0,
                fy: 4.0,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub n: usize,
    pub seed: u64,
    pub shape: Shape,
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind, n: usize, seed: u64) -> Self {
        GeneratorSpec {
            kind,
            n,
            seed,
            shape: Shape::default_for(kind),
        }
    }
}

/// Largest accepted size exponent (a `2^14 x 2^14` image).
pub const MAX_N: usize = 14;

/// Builds the image described by `spec`.
///
/// Random images draw i.i.d. values `u - 1/2` with `u` a 53-bit uniform
/// from SplitMix64 seeded with `spec.seed`, in row-major order. Smooth
/// images are sampled at pixel centers of the unit square, with `x`
/// along columns and `y` along rows.
pub fn generate(spec: &GeneratorSpec) -> Result<Image> {
    if spec.n > MAX_N {
        return Err(HarnessError::Invalid(format!(
            "n = {} exceeds the maximum {MAX_N}",
            spec.n
        )));
    }
    let side = 1usize << spec.n;
    let sh = spec.shape;
    let coord = |k: usize| (k as f64 + 0.5) / side as f64;
    let envelope = |x: f64, y: f64| {
        let r2 = (x - sh.x0).powi(2) + (y - sh.y0).powi(2);
        (-r2 / (2.0 * sh.sigma * sh.sigma)).exp()
    };
    let img = match spec.kind {
        GeneratorKind::Random => {
            let mut rng = SplitMix64::seed_from_u64(spec.seed);
            let pixels = (0..side * side)
                .map(|_| rng.random::<f64>() - 0.5)
                .collect();
            Image::from_pixels(spec.n, pixels)?
        }
        GeneratorKind::Wavepacket => Image::from_fn(side, |i, j| {
            let (x, y) = (coord(j), coord(i));
            envelope(x, y) * (2.0 * std::f64::consts::PI * (sh.fx * x + sh.fy * y)).sin()
        })?,
        GeneratorKind::MutilatedGaussian => Image::from_fn(side, |i, j| {
            let (x, y) = (coord(j), coord(i));
            if x + y > 1.0 {
                envelope(x, y)
            } else {
                0.0
            }
        })?,
    };
    Ok(img)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_values_in_range() {
        let img = generate(&GeneratorSpec::new(GeneratorKind::Random, 4, 1)).unwrap();
        assert_eq!(img.side(), 16);
        assert!(img.pixels().iter().all(|v| (-0.5..=0.5).contains(v)));
    }

    #[test]
    fn smooth_images_bounded() {
        let w = generate(&GeneratorSpec::new(GeneratorKind::Wavepacket, 7, 0)).unwrap();
        assert!(w.max_abs() <= 1.0 && w.max_abs() > 0.5);
        let g = generate(&GeneratorSpec::new(GeneratorKind::MutilatedGaussian, 5, 0)).unwrap();
        assert_eq!(g.get(0, 0), 0.0);
        assert!(g.get(31, 31) > 0.0);
    }

    #[test]
    fn deterministic() {
        for kind in [GeneratorKind::Random, GeneratorKind::Wavepacket] {
            let a = generate(&GeneratorSpec::new(kind, 5, 42)).unwrap();
            let b = generate(&GeneratorSpec::new(kind, 5, 42)).unwrap();
            assert_eq!(a, b);
        }
        let c = generate(&GeneratorSpec::new(GeneratorKind::Random, 5, 43)).unwrap();
        let a = generate(&GeneratorSpec::new(GeneratorKind::Random, 5, 42)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn unknown_kind_rejected() {
        assert!("checkerboard".parse::<GeneratorKind>().is_err());
        assert_eq!(
            "wavepacket".parse::<GeneratorKind>().unwrap(),
            GeneratorKind::Wavepacket
        );
    }
}
