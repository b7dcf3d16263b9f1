//! Images and ragged ADRT data arrays.

use crate::error::{Error, Result};

/// One of the four quadrants of the full transform, each covering a 45
/// degree range of line directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quadrant {
    I,
    II,
    III,
    IV,
}

impl Quadrant {
    pub const ALL: [Quadrant; 4] = [Quadrant::I, Quadrant::II, Quadrant::III, Quadrant::IV];

    pub fn index(self) -> usize {
        match self {
            Quadrant::I => 0,
            Quadrant::II => 1,
            Quadrant::III => 2,
            Quadrant::IV => 3,
        }
    }

    pub fn from_index(i: usize) -> Result<Self> {
        Self::ALL
            .get(i)
            .copied()
            .ok_or_else(|| Error::OutOfRange(format!("quadrant index {i}")))
    }
}

/// Square `2^n x 2^n` image, stored row-major; pixel `(i, j)` is row `i`,
/// column `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    n: usize,
    pixels: Vec<f64>,
}

impl Image {
    pub fn zeros(n: usize) -> Self {
        let side = 1usize << n;
        Image {
            n,
            pixels: vec![0.0; side * side],
        }
    }

    /// Wraps a row-major pixel buffer of length `4^n`.
    pub fn from_pixels(n: usize, pixels: Vec<f64>) -> Result<Self> {
        let side = 1usize << n;
        if pixels.len() != side * side {
            return Err(Error::LengthMismatch {
                expected: side * side,
                found: pixels.len(),
            });
        }
        if pixels.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Image { n, pixels })
    }

    /// Builds an image from a side length, which must be a power of two.
    pub fn from_fn(side: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        if !side.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(side));
        }
        let n = side.trailing_zeros() as usize;
        let mut pixels = Vec::with_capacity(side * side);
        for i in 0..side {
            for j in 0..side {
                pixels.push(f(i, j));
            }
        }
        Image::from_pixels(n, pixels)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn side(&self) -> usize {
        1 << self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.pixels[i * self.side() + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let side = self.side();
        self.pixels[i * side + j] = v;
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [f64] {
        &mut self.pixels
    }

    pub fn into_pixels(self) -> Vec<f64> {
        self.pixels
    }

    pub fn max_abs(&self) -> f64 {
        self.pixels.iter().fold(0.0, |a, v| a.max(v.abs()))
    }
}

/// Number of entries in column `s` of a level-`m` array: `2^n + (s mod 2^m)`.
pub fn column_height(n: usize, m: usize, s: usize) -> Result<usize> {
    if m > n {
        return Err(Error::InvalidLevel { n, m });
    }
    if s >= 1 << n {
        return Err(Error::OutOfRange(format!("column {s} for n = {n}")));
    }
    Ok((1 << n) + (s & ((1 << m) - 1)))
}

/// Ragged single-quadrant array at level `m`.
///
/// Column `s` covers `h` in `-(s mod 2^m) .. 2^n`; columns are stored
/// contiguously in order of `s`, each with `h` ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadrantData {
    n: usize,
    m: usize,
    offsets: Vec<usize>,
    values: Vec<f64>,
}

fn offsets_for(n: usize, m: usize) -> Vec<usize> {
    let side = 1usize << n;
    let mask = (1usize << m) - 1;
    let mut offsets = Vec::with_capacity(side + 1);
    let mut acc = 0;
    offsets.push(0);
    for s in 0..side {
        acc += side + (s & mask);
        offsets.push(acc);
    }
    offsets
}

impl QuadrantData {
    pub fn zeros(n: usize, m: usize) -> Result<Self> {
        if m > n {
            return Err(Error::InvalidLevel { n, m });
        }
        let offsets = offsets_for(n, m);
        let total = offsets[1 << n];
        Ok(QuadrantData {
            n,
            m,
            offsets,
            values: vec![0.0; total],
        })
    }

    /// Wraps a flat buffer laid out column by column.
    pub fn from_values(n: usize, m: usize, values: Vec<f64>) -> Result<Self> {
        let mut q = QuadrantData::zeros(n, m)?;
        if values.len() != q.values.len() {
            return Err(Error::LengthMismatch {
                expected: q.values.len(),
                found: values.len(),
            });
        }
        q.values = values;
        Ok(q)
    }

    /// Total number of entries, `4^n + 2^n (2^m - 1) / 2`.
    pub fn entry_count(n: usize, m: usize) -> usize {
        let side = 1usize << n;
        side * side + side * ((1 << m) - 1) / 2
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn level(&self) -> usize {
        self.m
    }

    pub fn side(&self) -> usize {
        1 << self.n
    }

    /// Lowest `h` stored in column `s`.
    pub fn h_min(&self, s: usize) -> isize {
        -((s & ((1 << self.m) - 1)) as isize)
    }

    pub fn column(&self, s: usize) -> &[f64] {
        &self.values[self.offsets[s]..self.offsets[s + 1]]
    }

    pub fn column_mut(&mut self, s: usize) -> &mut [f64] {
        &mut self.values[self.offsets[s]..self.offsets[s + 1]]
    }

    pub(crate) fn column_offset(&self, s: usize) -> usize {
        self.offsets[s]
    }

    /// Value at `(h, s)`; zero outside the column's range.
    pub fn get(&self, h: isize, s: usize) -> f64 {
        let idx = h - self.h_min(s);
        let col = self.column(s);
        if idx < 0 || idx as usize >= col.len() {
            0.0
        } else {
            col[idx as usize]
        }
    }

    /// Sets the value at `(h, s)`, which must be inside the column's range.
    pub fn set(&mut self, h: isize, s: usize, v: f64) -> Result<()> {
        let idx = h - self.h_min(s);
        let col = self.column_mut(s);
        if idx < 0 || idx as usize >= col.len() {
            return Err(Error::OutOfRange(format!("h = {h} in column {s}")));
        }
        col[idx as usize] = v;
        Ok(())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Full transform data: four quadrants at a common level.
#[derive(Debug, Clone, PartialEq)]
pub struct AdrtData {
    quadrants: [QuadrantData; 4],
}

impl AdrtData {
    pub fn zeros(n: usize, m: usize) -> Result<Self> {
        let q = QuadrantData::zeros(n, m)?;
        Ok(AdrtData {
            quadrants: [q.clone(), q.clone(), q.clone(), q],
        })
    }

    pub fn from_quadrants(quadrants: [QuadrantData; 4]) -> Result<Self> {
        let (n, m) = (quadrants[0].n, quadrants[0].m);
        for q in &quadrants[1..] {
            if q.n != n {
                return Err(Error::LengthMismatch {
                    expected: 1 << n,
                    found: 1 << q.n,
                });
            }
            if q.m != m {
                return Err(Error::LevelMismatch {
                    expected: m,
                    found: q.m,
                });
            }
        }
        Ok(AdrtData { quadrants })
    }

    /// Builds data from a flat buffer holding quadrants I..IV back to back.
    pub fn from_values(n: usize, m: usize, values: &[f64]) -> Result<Self> {
        let per = QuadrantData::entry_count(n, m);
        if values.len() != 4 * per {
            return Err(Error::LengthMismatch {
                expected: 4 * per,
                found: values.len(),
            });
        }
        let mk =
            |i: usize| QuadrantData::from_values(n, m, values[i * per..(i + 1) * per].to_vec());
        Ok(AdrtData {
            quadrants: [mk(0)?, mk(1)?, mk(2)?, mk(3)?],
        })
    }

    pub fn n(&self) -> usize {
        self.quadrants[0].n
    }

    pub fn level(&self) -> usize {
        self.quadrants[0].m
    }

    pub fn side(&self) -> usize {
        1 << self.n()
    }

    pub fn quadrant(&self, q: Quadrant) -> &QuadrantData {
        &self.quadrants[q.index()]
    }

    pub fn quadrant_mut(&mut self, q: Quadrant) -> &mut QuadrantData {
        &mut self.quadrants[q.index()]
    }

    pub fn quadrants(&self) -> &[QuadrantData; 4] {
        &self.quadrants
    }

    pub fn quadrants_mut(&mut self) -> &mut [QuadrantData; 4] {
        &mut self.quadrants
    }

    pub fn into_quadrants(self) -> [QuadrantData; 4] {
        self.quadrants
    }

    pub fn len(&self) -> usize {
        4 * self.quadrants[0].values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Flat copy in quadrant order I..IV.
    pub fn to_values(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        for q in &self.quadrants {
            out.extend_from_slice(&q.values);
        }
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.quadrants.iter().flat_map(|q| q.values.iter())
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.quadrants.iter_mut().flat_map(|q| q.values.iter_mut())
    }

    pub fn max_abs(&self) -> f64 {
        self.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    pub fn dot(&self, other: &AdrtData) -> f64 {
        self.iter().zip(other.iter()).map(|(a, b)| a * b).sum()
    }
}
