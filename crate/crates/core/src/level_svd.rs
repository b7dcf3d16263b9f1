//! Explicit SVD of the single-quadrant levels.
//!
//! Within one section, the pair of level `m-1` columns at offset `t`
//! (`a` and `b`, each `N + t` long, `N = 2^n`) is flattened with
//! `[b | a]_t` (see [`shift_concat`]). In that order every output entry is
//! the sum of two neighbours, so the level acts on the pair as the block
//!
//! ```text
//! Z = diag[H_t, K+_{2N}, H_t]      ((2N + 4t + 1) x (2N + 2t))
//! ```
//!
//! and its output is the interleave of the odd output column (first) with
//! the even one. All pairs share the same convolution block `K+_{2N}`, so
//! the level's singular values are `sqrt(2)` (from the `H_t` blocks) and
//! `2 cos(k pi / (4N + 2))`, `k = 1..2N`, once per pair.

use rayon::prelude::*;

use crate::data::{AdrtData, QuadrantData};
use crate::error::{Error, Result};
use crate::forward::to_array;
use crate::trig;

fn shift_concat_generic<T: Copy>(u: &[T], v: &[T], t: usize) -> Vec<T> {
    let r = u.len();
    let mut w = Vec::with_capacity(2 * r);
    w.extend_from_slice(&u[..t]);
    for i in 0..r - t {
        w.push(u[t + i]);
        w.push(v[i]);
    }
    w.extend_from_slice(&v[r - t..]);
    w
}

/// Alternating concatenation with shift: the first `t` entries of `u`,
/// then `u` and `v` alternating, then the last `t` entries of `v`.
pub fn shift_concat(u: &[f64], v: &[f64], t: usize) -> Result<Vec<f64>> {
    if u.len() != v.len() {
        return Err(Error::LengthMismatch {
            expected: u.len(),
            found: v.len(),
        });
    }
    if t > u.len() {
        return Err(Error::OutOfRange(format!(
            "shift {t} exceeds length {}",
            u.len()
        )));
    }
    Ok(shift_concat_generic(u, v, t))
}

/// Inverse of [`shift_concat`].
pub fn shift_concat_inverse(w: &[f64], t: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if !w.len().is_multiple_of(2) {
        return Err(Error::OddLength(w.len()));
    }
    let r = w.len() / 2;
    if t > r {
        return Err(Error::OutOfRange(format!("shift {t} exceeds length {r}")));
    }
    let mut u = Vec::with_capacity(r);
    let mut v = Vec::with_capacity(r);
    u.extend_from_slice(&w[..t]);
    for i in 0..r - t {
        u.push(w[t + 2 * i]);
        v.push(w[t + 2 * i + 1]);
    }
    v.extend_from_slice(&w[2 * r - t..]);
    Ok((u, v))
}

/// Sign of the two-tap kernel `[1, +-1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// Which singular-vector matrix to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    U,
    Ut,
    V,
    Vt,
}

/// The `(t+1) x t` convolution matrix `K_t^+-`:
/// `y_0 = +-x_0`, `y_j = x_{j-1} +- x_j`, `y_t = x_{t-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvFactor {
    pub t: usize,
    pub sign: Sign,
}

impl ConvFactor {
    pub fn new(t: usize, sign: Sign) -> Result<Self> {
        if t == 0 {
            return Err(Error::EmptyInput);
        }
        Ok(ConvFactor { t, sign })
    }

    fn s(&self) -> f64 {
        match self.sign {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        expect_len(x, self.t)?;
        let t = self.t;
        let s = self.s();
        let mut y = vec![0.0; t + 1];
        for j in 0..=t {
            let prev = if j > 0 { x[j - 1] } else { 0.0 };
            let cur = if j < t { s * x[j] } else { 0.0 };
            y[j] = prev + cur;
        }
        Ok(y)
    }

    pub fn apply_transpose(&self, y: &[f64]) -> Result<Vec<f64>> {
        expect_len(y, self.t + 1)?;
        let s = self.s();
        Ok((0..self.t).map(|j| s * y[j] + y[j + 1]).collect())
    }

    /// `sigma_k = 2 cos(k pi / (2t+2))` for `+`, `2 sin(k pi / (2t+2))` for
    /// `-`, `k = 1..t`.
    pub fn singular_values(&self) -> Vec<f64> {
        let denom = 2.0 * (self.t + 1) as f64;
        (1..=self.t)
            .map(|k| {
                let a = k as f64 * std::f64::consts::PI / denom;
                match self.sign {
                    Sign::Plus => 2.0 * a.cos(),
                    Sign::Minus => 2.0 * a.sin(),
                }
            })
            .collect()
    }

    /// Applies one of the unit-norm singular-vector matrices.
    ///
    /// `V` has DST-I columns; `U` has DST-II columns for `+` and negated
    /// DCT-II columns (frequencies `1..=t`) for `-`, so that
    /// `K = U diag(sigma) V^T`.
    pub fn factor_apply(&self, which: Factor, x: &[f64]) -> Result<Vec<f64>> {
        let t = self.t;
        let len = match which {
            Factor::U | Factor::V | Factor::Vt => t,
            Factor::Ut => t + 1,
        };
        expect_len(x, len)?;
        let out_len = if which == Factor::U { t + 1 } else { t };
        let mut out = vec![0.0; out_len];
        self.factor_apply_into(which, x, &mut out, None);
        Ok(out)
    }

    // Applies `which` to one or two inputs; `y` shares the FFT with `x`.
    fn factor_apply_into(
        &self,
        which: Factor,
        x: &[f64],
        out: &mut [f64],
        y: Option<(&[f64], &mut [f64])>,
    ) {
        let t = self.t;
        let s = (2.0 / (t + 1) as f64).sqrt();
        match which {
            Factor::V | Factor::Vt => {
                match y {
                    Some((y, oy)) => {
                        trig::dst1_pair_into(x, out, y, oy);
                        oy.iter_mut().for_each(|v| *v *= s);
                    }
                    None => trig::dst1_into(x, out),
                }
                out.iter_mut().for_each(|v| *v *= s);
            }
            Factor::U => {
                // frequencies 1..=t pad the transform input at the end (sine)
                // or after the unused zero frequency (cosine)
                let (scale, kernel, lift): (f64, PairKernel, Lift) = match self.sign {
                    Sign::Plus => (s, trig::dst2_transpose_pair_into, |x| {
                        let mut p = x.to_vec();
                        p.push(0.0);
                        p
                    }),
                    Sign::Minus => (-s, trig::dct2_transpose_pair_into, |x| {
                        std::iter::once(0.0).chain(x.iter().copied()).collect()
                    }),
                };
                apply_pair(
                    kernel,
                    &lift(x),
                    out,
                    y.map(|(y, oy)| (lift(y), oy)),
                    t + 1,
                    0,
                    scale,
                );
            }
            Factor::Ut => {
                let (scale, kernel, skip): (f64, PairKernel, usize) = match self.sign {
                    Sign::Plus => (s, trig::dst2_pair_into, 0),
                    Sign::Minus => (-s, trig::dct2_pair_into, 1),
                };
                apply_pair(
                    kernel,
                    x,
                    out,
                    y.map(|(y, oy)| (y.to_vec(), oy)),
                    t + 1,
                    skip,
                    scale,
                );
            }
        }
    }
}

type Lift = fn(&[f64]) -> Vec<f64>;

type PairKernel = fn(&[f64], &mut [f64], &[f64], &mut [f64]);

// Runs `kernel` on one or two inputs of length `len` and writes
// `scale * result[skip..]` to the outputs.
fn apply_pair(
    kernel: PairKernel,
    x: &[f64],
    out: &mut [f64],
    y: Option<(Vec<f64>, &mut [f64])>,
    len: usize,
    skip: usize,
    scale: f64,
) {
    let mut fx = vec![0.0; len];
    let mut fy = vec![0.0; len];
    let zeros;
    let second: &[f64] = match &y {
        Some((y, _)) => y,
        None => {
            zeros = vec![0.0; x.len()];
            &zeros
        }
    };
    kernel(x, &mut fx, second, &mut fy);
    for (o, v) in out.iter_mut().zip(&fx[skip..]) {
        *o = scale * v;
    }
    if let Some((_, oy)) = y {
        for (o, v) in oy.iter_mut().zip(&fy[skip..]) {
            *o = scale * v;
        }
    }
}

fn expect_len(x: &[f64], expected: usize) -> Result<()> {
    if x.len() != expected {
        Err(Error::LengthMismatch {
            expected,
            found: x.len(),
        })
    } else {
        Ok(())
    }
}

/// `H_s x`: every entry duplicated.
pub fn ht_apply(x: &[f64]) -> Vec<f64> {
    x.iter().flat_map(|&v| [v, v]).collect()
}

/// `H_s^T y`: sums of adjacent pairs.
pub fn ht_apply_transpose(y: &[f64]) -> Result<Vec<f64>> {
    if !y.len().is_multiple_of(2) {
        return Err(Error::OddLength(y.len()));
    }
    Ok(y.chunks_exact(2).map(|p| p[0] + p[1]).collect())
}

/// Flattening (`P`) and unflattening (`Q`) permutations of one
/// single-quadrant level.
///
/// `forward_map[k]` is the storage index (within the level `m-1` array)
/// placed at flat position `k`; `inverse_map[k]` is the storage index
/// (within the level `m` array) that receives flat output position `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelPermutations {
    pub n: usize,
    pub m: usize,
    pub forward_map: Vec<usize>,
    pub inverse_map: Vec<usize>,
    /// Per (section, pair) block: offset `t`, start in the flat input and
    /// start in the flat output.
    blocks: Vec<PairBlock>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct PairBlock {
    t: usize,
    input_start: usize,
    output_start: usize,
}

/// Builds `P` and `Q` for the level `m` of the full transform (`m >= 2`).
pub fn build_level_permutations(n: usize, m: usize) -> Result<LevelPermutations> {
    if m < 2 || m > n {
        return Err(Error::InvalidLevel { n, m });
    }
    LevelPermutations::single_quadrant(n, m)
}

impl LevelPermutations {
    /// Permutations for the single-quadrant level `m`, `1 <= m <= n`.
    pub fn single_quadrant(n: usize, m: usize) -> Result<Self> {
        if m == 0 || m > n {
            return Err(Error::InvalidLevel { n, m });
        }
        let prev = QuadrantData::zeros(n, m - 1)?;
        let next = QuadrantData::zeros(n, m)?;
        let side = 1usize << n;
        let half = 1usize << (m - 1);
        let mut forward_map = Vec::with_capacity(prev.values().len());
        let mut inverse_map = Vec::with_capacity(next.values().len());
        let mut blocks = Vec::with_capacity(side / 2);
        for l in 0..(side >> m) {
            let base = l << m;
            for t in 0..half {
                blocks.push(PairBlock {
                    t,
                    input_start: forward_map.len(),
                    output_start: inverse_map.len(),
                });
                let len = side + t;
                let a0 = prev.column_offset(base + t);
                let b0 = prev.column_offset(base + half + t);
                let a: Vec<usize> = (a0..a0 + len).collect();
                let b: Vec<usize> = (b0..b0 + len).collect();
                forward_map.extend(shift_concat_generic(&b, &a, t));
                let even0 = next.column_offset(base + 2 * t);
                let odd0 = next.column_offset(base + 2 * t + 1);
                let even_len = side + 2 * t;
                for i in 0..even_len {
                    inverse_map.push(odd0 + i);
                    inverse_map.push(even0 + i);
                }
                inverse_map.push(odd0 + even_len);
            }
        }
        Ok(LevelPermutations {
            n,
            m,
            forward_map,
            inverse_map,
            blocks,
        })
    }

    /// `P f`.
    pub fn flatten(&self, f: &QuadrantData) -> Result<Vec<f64>> {
        self.check(f, self.m - 1)?;
        let v = f.values();
        Ok(self.forward_map.iter().map(|&i| v[i]).collect())
    }

    /// `P^T x` (also `P^{-1} x`).
    pub fn flatten_inverse(&self, x: &[f64]) -> Result<QuadrantData> {
        expect_len(x, self.forward_map.len())?;
        let mut out = QuadrantData::zeros(self.n, self.m - 1)?;
        let v = out.values_mut();
        for (&i, &val) in self.forward_map.iter().zip(x) {
            v[i] = val;
        }
        Ok(out)
    }

    /// `Q z`.
    pub fn unflatten(&self, z: &[f64]) -> Result<QuadrantData> {
        expect_len(z, self.inverse_map.len())?;
        let mut out = QuadrantData::zeros(self.n, self.m)?;
        let v = out.values_mut();
        for (&i, &val) in self.inverse_map.iter().zip(z) {
            v[i] = val;
        }
        Ok(out)
    }

    /// `Q^T g`.
    pub fn unflatten_transpose(&self, g: &QuadrantData) -> Result<Vec<f64>> {
        self.check(g, self.m)?;
        let v = g.values();
        Ok(self.inverse_map.iter().map(|&i| v[i]).collect())
    }

    fn check(&self, q: &QuadrantData, level: usize) -> Result<()> {
        if q.n() != self.n {
            return Err(Error::LengthMismatch {
                expected: 1 << self.n,
                found: q.side(),
            });
        }
        if q.level() != level {
            return Err(Error::LevelMismatch {
                expected: level,
                found: q.level(),
            });
        }
        Ok(())
    }

    pub fn input_len(&self) -> usize {
        self.forward_map.len()
    }

    pub fn output_len(&self) -> usize {
        self.inverse_map.len()
    }
}

/// Applies the block-diagonal `Z` of the single-quadrant level `m` to a
/// flattened vector.
pub fn z_apply(n: usize, m: usize, x: &[f64]) -> Result<Vec<f64>> {
    let perms = LevelPermutations::single_quadrant(n, m)?;
    z_apply_with(&perms, x)
}

fn z_apply_with(perms: &LevelPermutations, x: &[f64]) -> Result<Vec<f64>> {
    expect_len(x, perms.input_len())?;
    let side = 1usize << perms.n;
    let k = ConvFactor::new(2 * side, Sign::Plus)?;
    let mut out = vec![0.0; perms.output_len()];
    for b in &perms.blocks {
        let t = b.t;
        let xin = &x[b.input_start..b.input_start + 2 * side + 2 * t];
        let y = &mut out[b.output_start..b.output_start + 2 * side + 4 * t + 1];
        y[..2 * t].copy_from_slice(&ht_apply(&xin[..t]));
        y[2 * t..2 * t + 2 * side + 1].copy_from_slice(&k.apply(&xin[t..t + 2 * side])?);
        y[2 * t + 2 * side + 1..].copy_from_slice(&ht_apply(&xin[t + 2 * side..]));
    }
    Ok(out)
}

/// SVD `S_m = (Q U) Sigma (P^T V)^T` of one single-quadrant level.
///
/// Coefficient vectors live in the flattened input ordering: per pair,
/// `t` entries for the leading `H_t` block, `2N` for the `K+_{2N}` block,
/// `t` for the trailing `H_t` block.
#[derive(Debug, Clone)]
pub struct SqLevelSvd {
    perms: LevelPermutations,
    conv: ConvFactor,
    conv_sigma: Vec<f64>,
}

impl SqLevelSvd {
    /// `1 <= m <= n`.
    pub fn new(n: usize, m: usize) -> Result<Self> {
        let perms = LevelPermutations::single_quadrant(n, m)?;
        let conv = ConvFactor::new(2 << n, Sign::Plus)?;
        let conv_sigma = conv.singular_values();
        Ok(SqLevelSvd {
            perms,
            conv,
            conv_sigma,
        })
    }

    pub fn n(&self) -> usize {
        self.perms.n
    }

    pub fn m(&self) -> usize {
        self.perms.m
    }

    pub fn permutations(&self) -> &LevelPermutations {
        &self.perms
    }

    pub fn coeff_len(&self) -> usize {
        self.perms.input_len()
    }

    fn side(&self) -> usize {
        1 << self.perms.n
    }

    /// Diagonal of `Sigma` in coefficient order.
    pub fn singular_values(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.coeff_len());
        let r2 = std::f64::consts::SQRT_2;
        for b in &self.perms.blocks {
            out.extend(std::iter::repeat_n(r2, b.t));
            out.extend_from_slice(&self.conv_sigma);
            out.extend(std::iter::repeat_n(r2, b.t));
        }
        out
    }

    // Applies a V factor in place to the convolution segment of every pair
    // block, two blocks per FFT.
    fn v_segments(&self, which: Factor, x: &mut [f64]) {
        let len = 2 * self.side();
        let mut out = vec![0.0; 2 * len];
        for chunk in self.perms.blocks.chunks(2) {
            let (o1, o2) = out.split_at_mut(len);
            let s1 = chunk[0].input_start + chunk[0].t;
            match chunk.get(1) {
                Some(b2) => {
                    let s2 = b2.input_start + b2.t;
                    let (lo, hi) = x.split_at_mut(s2);
                    self.conv.factor_apply_into(
                        which,
                        &lo[s1..s1 + len],
                        o1,
                        Some((&hi[..len], o2)),
                    );
                    lo[s1..s1 + len].copy_from_slice(o1);
                    hi[..len].copy_from_slice(o2);
                }
                None => {
                    self.conv
                        .factor_apply_into(which, &x[s1..s1 + len], o1, None);
                    x[s1..s1 + len].copy_from_slice(o1);
                }
            }
        }
    }

    /// `V^T P f`.
    pub fn v_t(&self, f: &QuadrantData) -> Result<Vec<f64>> {
        let mut x = self.perms.flatten(f)?;
        self.v_segments(Factor::Vt, &mut x);
        Ok(x)
    }

    /// `P^T V c`.
    pub fn v(&self, c: &[f64]) -> Result<QuadrantData> {
        expect_len(c, self.coeff_len())?;
        let mut x = c.to_vec();
        self.v_segments(Factor::V, &mut x);
        self.perms.flatten_inverse(&x)
    }

    /// `Q U c`.
    pub fn u(&self, c: &[f64]) -> Result<QuadrantData> {
        expect_len(c, self.coeff_len())?;
        let side = self.side();
        let inv_r2 = std::f64::consts::FRAC_1_SQRT_2;
        let mut z = vec![0.0; self.perms.output_len()];
        for b in &self.perms.blocks {
            let t = b.t;
            let cin = &c[b.input_start..b.input_start + 2 * side + 2 * t];
            let y = &mut z[b.output_start..b.output_start + 2 * side + 4 * t + 1];
            for i in 0..t {
                y[2 * i] = cin[i] * inv_r2;
                y[2 * i + 1] = cin[i] * inv_r2;
                let hi = 2 * t + 2 * side + 1 + 2 * i;
                y[hi] = cin[t + 2 * side + i] * inv_r2;
                y[hi + 1] = cin[t + 2 * side + i] * inv_r2;
            }
        }
        let (len_in, len_out) = (2 * side, 2 * side + 1);
        for chunk in self.perms.blocks.chunks(2) {
            let (b1, i1) = (chunk[0], chunk[0].input_start + chunk[0].t);
            let o1 = b1.output_start + 2 * b1.t;
            match chunk.get(1) {
                Some(b2) => {
                    let (i2, o2) = (b2.input_start + b2.t, b2.output_start + 2 * b2.t);
                    let (lo, hi) = z.split_at_mut(o2);
                    self.conv.factor_apply_into(
                        Factor::U,
                        &c[i1..i1 + len_in],
                        &mut lo[o1..o1 + len_out],
                        Some((&c[i2..i2 + len_in], &mut hi[..len_out])),
                    );
                }
                None => self.conv.factor_apply_into(
                    Factor::U,
                    &c[i1..i1 + len_in],
                    &mut z[o1..o1 + len_out],
                    None,
                ),
            }
        }
        self.perms.unflatten(&z)
    }

    /// `U^T Q^T g`.
    pub fn u_t(&self, g: &QuadrantData) -> Result<Vec<f64>> {
        let z = self.perms.unflatten_transpose(g)?;
        let side = self.side();
        let inv_r2 = std::f64::consts::FRAC_1_SQRT_2;
        let mut c = vec![0.0; self.coeff_len()];
        for b in &self.perms.blocks {
            let t = b.t;
            let y = &z[b.output_start..b.output_start + 2 * side + 4 * t + 1];
            let cout = &mut c[b.input_start..b.input_start + 2 * side + 2 * t];
            for i in 0..t {
                cout[i] = (y[2 * i] + y[2 * i + 1]) * inv_r2;
                let hi = 2 * t + 2 * side + 1 + 2 * i;
                cout[t + 2 * side + i] = (y[hi] + y[hi + 1]) * inv_r2;
            }
        }
        let (len_in, len_out) = (2 * side + 1, 2 * side);
        for chunk in self.perms.blocks.chunks(2) {
            let (b1, o1) = (chunk[0], chunk[0].input_start + chunk[0].t);
            let i1 = b1.output_start + 2 * b1.t;
            match chunk.get(1) {
                Some(b2) => {
                    let (o2, i2) = (b2.input_start + b2.t, b2.output_start + 2 * b2.t);
                    let (lo, hi) = c.split_at_mut(o2);
                    self.conv.factor_apply_into(
                        Factor::Ut,
                        &z[i1..i1 + len_in],
                        &mut lo[o1..o1 + len_out],
                        Some((&z[i2..i2 + len_in], &mut hi[..len_out])),
                    );
                }
                None => self.conv.factor_apply_into(
                    Factor::Ut,
                    &z[i1..i1 + len_in],
                    &mut c[o1..o1 + len_out],
                    None,
                ),
            }
        }
        Ok(c)
    }

    /// Multiplies coefficients by `Sigma` in place.
    pub fn sigma_in_place(&self, c: &mut [f64]) {
        self.scale(c, false)
    }

    /// Multiplies coefficients by `Sigma^{-1}` in place.
    pub fn sigma_inv_in_place(&self, c: &mut [f64]) {
        self.scale(c, true)
    }

    fn scale(&self, c: &mut [f64], inverse: bool) {
        let side = self.side();
        let r2 = if inverse {
            std::f64::consts::FRAC_1_SQRT_2
        } else {
            std::f64::consts::SQRT_2
        };
        for b in &self.perms.blocks {
            let t = b.t;
            let seg = &mut c[b.input_start..b.input_start + 2 * side + 2 * t];
            seg[..t].iter_mut().for_each(|v| *v *= r2);
            seg[t + 2 * side..].iter_mut().for_each(|v| *v *= r2);
            for (v, s) in seg[t..t + 2 * side].iter_mut().zip(&self.conv_sigma) {
                if inverse {
                    *v /= s;
                } else {
                    *v *= s;
                }
            }
        }
    }

    /// `S_m f` through the factors.
    pub fn forward(&self, f: &QuadrantData) -> Result<QuadrantData> {
        let mut c = self.v_t(f)?;
        self.sigma_in_place(&mut c);
        self.u(&c)
    }

    /// `V Sigma^{-1} U^T g`, the Moore-Penrose pseudo-inverse of the level.
    pub fn pinv(&self, g: &QuadrantData) -> Result<QuadrantData> {
        let mut c = self.u_t(g)?;
        self.sigma_inv_in_place(&mut c);
        self.v(&c)
    }
}

/// SVD of the full level `S_(m) = Id_4 (x) S_m`, `m >= 2`.
///
/// Full-level coefficient vectors hold the four per-quadrant coefficient
/// vectors back to back, in quadrant order I..IV.
#[derive(Debug, Clone)]
pub struct LevelSvd {
    sq: SqLevelSvd,
}

impl LevelSvd {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if m < 2 || m > n {
            return Err(Error::InvalidLevel { n, m });
        }
        Ok(LevelSvd {
            sq: SqLevelSvd::new(n, m)?,
        })
    }

    pub fn single_quadrant(&self) -> &SqLevelSvd {
        &self.sq
    }

    pub fn coeff_len(&self) -> usize {
        4 * self.sq.coeff_len()
    }

    pub fn singular_values(&self) -> Vec<f64> {
        self.sq.singular_values().repeat(4)
    }

    fn check(&self, d: &AdrtData, level: usize) -> Result<()> {
        if d.level() != level {
            return Err(Error::LevelMismatch {
                expected: level,
                found: d.level(),
            });
        }
        Ok(())
    }

    fn per_quadrant_to_coeffs(
        &self,
        d: &AdrtData,
        f: impl Fn(&QuadrantData) -> Result<Vec<f64>> + Sync + Send,
    ) -> Result<Vec<f64>> {
        let parts: Vec<Vec<f64>> = d.quadrants().par_iter().map(f).collect::<Result<_>>()?;
        Ok(parts.concat())
    }

    fn coeffs_to_data(
        &self,
        c: &[f64],
        f: impl Fn(&[f64]) -> Result<QuadrantData> + Sync + Send,
    ) -> Result<AdrtData> {
        expect_len(c, self.coeff_len())?;
        let parts: Vec<QuadrantData> = c
            .par_chunks(self.sq.coeff_len())
            .map(f)
            .collect::<Result<_>>()?;
        AdrtData::from_quadrants(to_array(parts))
    }

    pub fn v_t(&self, d: &AdrtData) -> Result<Vec<f64>> {
        self.check(d, self.sq.m() - 1)?;
        self.per_quadrant_to_coeffs(d, |q| self.sq.v_t(q))
    }

    pub fn v(&self, c: &[f64]) -> Result<AdrtData> {
        self.coeffs_to_data(c, |q| self.sq.v(q))
    }

    pub fn u(&self, c: &[f64]) -> Result<AdrtData> {
        self.coeffs_to_data(c, |q| self.sq.u(q))
    }

    pub fn u_t(&self, d: &AdrtData) -> Result<Vec<f64>> {
        self.check(d, self.sq.m())?;
        self.per_quadrant_to_coeffs(d, |q| self.sq.u_t(q))
    }

    pub fn sigma(&self, c: &[f64]) -> Result<Vec<f64>> {
        expect_len(c, self.coeff_len())?;
        let mut out = c.to_vec();
        out.chunks_mut(self.sq.coeff_len())
            .for_each(|ch| self.sq.sigma_in_place(ch));
        Ok(out)
    }

    pub fn sigma_inv(&self, c: &[f64]) -> Result<Vec<f64>> {
        expect_len(c, self.coeff_len())?;
        let mut out = c.to_vec();
        out.chunks_mut(self.sq.coeff_len())
            .for_each(|ch| self.sq.sigma_inv_in_place(ch));
        Ok(out)
    }

    /// `U Sigma V^T d`, equal to the level operator.
    pub fn forward(&self, d: &AdrtData) -> Result<AdrtData> {
        self.check(d, self.sq.m() - 1)?;
        crate::forward::map_quadrants(d, |q| self.sq.forward(q))
    }

    /// `V Sigma^{-1} U^T b`.
    pub fn pinv(&self, b: &AdrtData) -> Result<AdrtData> {
        self.check(b, self.sq.m())?;
        crate::forward::map_quadrants(b, |q| self.sq.pinv(q))
    }
}

/// Pseudo-inverse of the full level `m >= 2` applied to level-`m` data.
pub fn level_pinv_apply(b: &AdrtData) -> Result<AdrtData> {
    LevelSvd::new(b.n(), b.level())?.pinv(b)
}
