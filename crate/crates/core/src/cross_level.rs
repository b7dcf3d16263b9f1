//! The cross-quadrant level `S_(1)` and its fast pseudo-inverse.
//!
//! Images are expanded over 2x2 block patterns `chi^(p)`, `p = 0..3`,
//!
//! ```text
//! chi0 = [1 0]   chi1 = [-1 0]   chi2 = [0 1]   chi3 = [0 -1]
//!        [0 1]          [ 0 1]          [1 0]          [1  0]
//! ```
//!
//! placed at block `(j1, j2)` (pixels `2j1..2j1+2`, `2j2..2j2+2`), and the
//! block coefficients of each type are expanded over an orthonormal 2D
//! DST-I of size `N/2`. The resulting image basis `v^(p)_(k1,k2)`,
//! `k1, k2 = 1..N/2`, is orthonormal.
//!
//! The first level maps every block to three entries per quadrant that
//! only see that block (sub-blocks `w1`, `w2`, `w3`) and one sub-block
//! `w4` whose entries straddle vertically adjacent blocks. Dropping `w4`
//! leaves a block-diagonal system with the same 12x4 matrix at every
//! block, which the pseudo-inverse solves spectrally.

use rayon::prelude::*;

use crate::data::{AdrtData, Image, Quadrant, QuadrantData};
use crate::error::{Error, Result};
use crate::forward::{cross_level_adjoint, cross_level_forward, permute_source, to_array};
use crate::level_svd::{ConvFactor, Factor, Sign};
use crate::trig;

const SQRT_12: f64 = 3.464_101_615_137_754_6;

/// Block coefficients of the pixel at in-block position `(a, b)` in terms
/// of `(c0, c1, c2, c3)`.
const PIXEL_COEFFS: [[[f64; 4]; 2]; 2] = [
    [[1.0, -1.0, 0.0, 0.0], [0.0, 0.0, 1.0, -1.0]],
    [[0.0, 0.0, 1.0, 1.0], [1.0, 1.0, 0.0, 0.0]],
];

/// `N^2` coefficients: one `(N/2) x (N/2)` grid per block type `p`,
/// stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffGrid {
    n: usize,
    grids: [Vec<f64>; 4],
}

impl CoeffGrid {
    pub fn zeros(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidLevel { n, m: 1 });
        }
        let half = 1usize << (n - 1);
        let g = vec![0.0; half * half];
        Ok(CoeffGrid {
            n,
            grids: [g.clone(), g.clone(), g.clone(), g],
        })
    }

    pub fn from_grids(n: usize, grids: [Vec<f64>; 4]) -> Result<Self> {
        let z = CoeffGrid::zeros(n)?;
        let len = z.grids[0].len();
        for g in &grids {
            if g.len() != len {
                return Err(Error::LengthMismatch {
                    expected: len,
                    found: g.len(),
                });
            }
        }
        Ok(CoeffGrid { n, grids })
    }

    /// Flat buffer of `N^2` values, types 0..3 back to back.
    pub fn from_values(n: usize, values: &[f64]) -> Result<Self> {
        let z = CoeffGrid::zeros(n)?;
        let len = z.grids[0].len();
        if values.len() != 4 * len {
            return Err(Error::LengthMismatch {
                expected: 4 * len,
                found: values.len(),
            });
        }
        let mk = |p: usize| values[p * len..(p + 1) * len].to_vec();
        Ok(CoeffGrid {
            n,
            grids: [mk(0), mk(1), mk(2), mk(3)],
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Grid side `N/2`.
    pub fn half(&self) -> usize {
        1 << (self.n - 1)
    }

    /// Coefficient of `v^(p)_(k1,k2)`, `k1, k2` in `1..=N/2`.
    pub fn get(&self, p: usize, k1: usize, k2: usize) -> f64 {
        self.grids[p][(k1 - 1) * self.half() + (k2 - 1)]
    }

    pub fn set(&mut self, p: usize, k1: usize, k2: usize, v: f64) {
        let half = self.half();
        self.grids[p][(k1 - 1) * half + (k2 - 1)] = v;
    }

    pub fn grid(&self, p: usize) -> &[f64] {
        &self.grids[p]
    }

    pub fn grid_mut(&mut self, p: usize) -> &mut [f64] {
        &mut self.grids[p]
    }

    pub fn to_values(&self) -> Vec<f64> {
        self.grids.concat()
    }

    pub fn len(&self) -> usize {
        4 * self.grids[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

fn check_chi_grid(p: usize, side: usize, coeffs: &[f64]) -> Result<()> {
    if p > 3 {
        return Err(Error::OutOfRange(format!("block type {p}")));
    }
    let half = side / 2;
    if coeffs.len() != half * half {
        return Err(Error::LengthMismatch {
            expected: half * half,
            found: coeffs.len(),
        });
    }
    Ok(())
}

/// `sum_j coeffs(j) chi^(p)_j` for a `2^n x 2^n` image.
pub fn chi_synthesize(n: usize, p: usize, coeffs: &[f64]) -> Result<Image> {
    if n == 0 {
        return Err(Error::InvalidLevel { n, m: 1 });
    }
    let side = 1usize << n;
    check_chi_grid(p, side, coeffs)?;
    let mut grids: [Vec<f64>; 4] = Default::default();
    for (q, g) in grids.iter_mut().enumerate() {
        *g = if q == p {
            coeffs.to_vec()
        } else {
            vec![0.0; coeffs.len()]
        };
    }
    Ok(blocks_to_image(n, &grids))
}

// Image whose block (j1, j2) is sum_p c_p(j1, j2) chi^(p).
fn blocks_to_image(n: usize, c: &[Vec<f64>; 4]) -> Image {
    let side = 1usize << n;
    let half = side / 2;
    let mut img = Image::zeros(n);
    let px = img.pixels_mut();
    for j1 in 0..half {
        for j2 in 0..half {
            let k = j1 * half + j2;
            let (c0, c1, c2, c3) = (c[0][k], c[1][k], c[2][k], c[3][k]);
            let top = 2 * j1 * side + 2 * j2;
            px[top] = c0 - c1;
            px[top + 1] = c2 - c3;
            px[top + side] = c2 + c3;
            px[top + side + 1] = c0 + c1;
        }
    }
    img
}

// Block coefficients c_p(j) = <x, chi^(p)_j> / 2.
fn image_to_blocks(img: &Image) -> [Vec<f64>; 4] {
    let side = img.side();
    let half = side / 2;
    let px = img.pixels();
    let mut c: [Vec<f64>; 4] = Default::default();
    for g in c.iter_mut() {
        *g = vec![0.0; half * half];
    }
    for j1 in 0..half {
        for j2 in 0..half {
            let k = j1 * half + j2;
            let top = 2 * j1 * side + 2 * j2;
            let (a, b, g, d) = (px[top], px[top + 1], px[top + side], px[top + side + 1]);
            c[0][k] = 0.5 * (a + d);
            c[1][k] = 0.5 * (d - a);
            c[2][k] = 0.5 * (b + g);
            c[3][k] = 0.5 * (g - b);
        }
    }
    c
}

/// `sum c^(p)_(k1,k2) v^(p)_(k1,k2)`.
pub fn v_basis_synthesize(c: &CoeffGrid) -> Image {
    let half = c.half();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let blocks: Vec<Vec<f64>> = c
        .grids
        .par_iter()
        .map(|g| {
            let mut g = g.clone();
            trig::dst1_2d_orthonormal(&mut g, half, half);
            g.iter_mut().for_each(|v| *v *= s);
            g
        })
        .collect();
    blocks_to_image(c.n, &to_array(blocks))
}

/// Coefficients `<x, v^(p)_(k1,k2)>`; exact inverse of
/// [`v_basis_synthesize`].
pub fn v_basis_analyze(img: &Image) -> Result<CoeffGrid> {
    let n = img.n();
    if n == 0 {
        return Err(Error::InvalidLevel { n, m: 1 });
    }
    let half = img.side() / 2;
    let s = std::f64::consts::SQRT_2;
    let grids: Vec<Vec<f64>> = image_to_blocks(img)
        .into_par_iter()
        .map(|mut g| {
            trig::dst1_2d_orthonormal(&mut g, half, half);
            g.iter_mut().for_each(|v| *v *= s);
            g
        })
        .collect();
    CoeffGrid::from_grids(n, to_array(grids))
}

/// The four sub-blocks of one level-1 quadrant.
///
/// With `J1 = h div 2` and `J2 = s div 2`: `w1` holds even `h` of even
/// columns, `w2` odd `h` of even columns, `w3` even `h` of odd columns
/// (all `(N/2) x (N/2)`, index `J1 * N/2 + J2`), and `w4` the odd `h`
/// of odd columns, `w4(j1, J2) = g(2 j1 - 1, 2 J2 + 1)` for
/// `j1 = 0..=N/2` (index `j1 * N/2 + J2`).
#[derive(Debug, Clone, PartialEq)]
pub struct SubBlocks {
    pub half: usize,
    pub w1: Vec<f64>,
    pub w2: Vec<f64>,
    pub w3: Vec<f64>,
    pub w4: Vec<f64>,
}

impl SubBlocks {
    pub fn zeros(half: usize) -> Self {
        SubBlocks {
            half,
            w1: vec![0.0; half * half],
            w2: vec![0.0; half * half],
            w3: vec![0.0; half * half],
            w4: vec![0.0; (half + 1) * half],
        }
    }
}

/// Splits a level-1 quadrant into its four sub-blocks.
pub fn o_permute(q: &QuadrantData) -> Result<SubBlocks> {
    if q.level() != 1 {
        return Err(Error::LevelMismatch {
            expected: 1,
            found: q.level(),
        });
    }
    let half = q.side() / 2;
    let mut out = SubBlocks::zeros(half);
    for j2 in 0..half {
        let even = q.column(2 * j2);
        let odd = q.column(2 * j2 + 1);
        for j1 in 0..half {
            out.w1[j1 * half + j2] = even[2 * j1];
            out.w2[j1 * half + j2] = even[2 * j1 + 1];
            // odd columns start at h = -1
            out.w3[j1 * half + j2] = odd[2 * j1 + 1];
        }
        for j1 in 0..=half {
            out.w4[j1 * half + j2] = odd[2 * j1];
        }
    }
    Ok(out)
}

/// Inverse of [`o_permute`].
pub fn o_permute_inverse(n: usize, w: &SubBlocks) -> Result<QuadrantData> {
    let mut q = QuadrantData::zeros(n, 1)?;
    let half = q.side() / 2;
    if w.half != half
        || w.w1.len() != half * half
        || w.w2.len() != half * half
        || w.w3.len() != half * half
        || w.w4.len() != (half + 1) * half
    {
        return Err(Error::LengthMismatch {
            expected: half,
            found: w.half,
        });
    }
    for j2 in 0..half {
        {
            let even = q.column_mut(2 * j2);
            for j1 in 0..half {
                even[2 * j1] = w.w1[j1 * half + j2];
                even[2 * j1 + 1] = w.w2[j1 * half + j2];
            }
        }
        let odd = q.column_mut(2 * j2 + 1);
        for j1 in 0..half {
            odd[2 * j1 + 1] = w.w3[j1 * half + j2];
        }
        for j1 in 0..=half {
            odd[2 * j1] = w.w4[j1 * half + j2];
        }
    }
    Ok(q)
}

/// How one quadrant's relabeling moves 2x2 blocks.
#[derive(Debug, Clone)]
struct QuadGeom {
    /// Original block index (`B1 * half + B2`) of permuted block `(J1, J2)`.
    block_map: Vec<usize>,
    /// Rows of the per-block matrix for `w1`, `w2`, `w3`.
    rows: [[f64; 4]; 3],
    /// Original-grid axis along which `J1` moves, and whether it runs
    /// backwards.
    line_axis: usize,
    reversed: bool,
    /// Original coordinate on the other axis for each `J2`.
    other_of_j2: Vec<usize>,
    /// `w4 = sum coef * K^sign c_p` along the line axis.
    w4_terms: Vec<(usize, f64, Sign)>,
}

fn add4(a: [f64; 4], b: [f64; 4]) -> [f64; 4] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]
}

impl QuadGeom {
    fn new(q: Quadrant, n: usize) -> Self {
        let side = 1usize << n;
        let half = side / 2;
        let pos = |a: usize, b: usize| {
            let (r, c) = permute_source(q, side, a, b);
            PIXEL_COEFFS[r % 2][c % 2]
        };
        let rows = [
            add4(pos(0, 0), pos(0, 1)),
            add4(pos(1, 0), pos(1, 1)),
            add4(pos(0, 0), pos(1, 1)),
        ];
        let block = |side: usize, j1: usize, j2: usize| {
            let (r, c) = permute_source(q, side, 2 * j1, 2 * j2);
            [r / 2, c / 2]
        };
        let mut block_map = Vec::with_capacity(half * half);
        for j1 in 0..half {
            for j2 in 0..half {
                let b = block(side, j1, j2);
                block_map.push(b[0] * half + b[1]);
            }
        }
        // the relabeling is affine in block coordinates, so a 4x4 grid
        // settles the direction of J1 for every size
        let b00 = block(8, 0, 0);
        let b10 = block(8, 1, 0);
        let line_axis = if b00[0] != b10[0] { 0 } else { 1 };
        let reversed = b10[line_axis] < b00[line_axis];
        let other = 1 - line_axis;
        let other_of_j2 = (0..half).map(|j2| block(side, 0, j2)[other]).collect();
        // w4(j1) = P c(block of (j1-1)) + R c(block of j1) with P from the
        // bottom-left pixel and R from the top-right one
        let (p_prev, r_cur) = (pos(1, 0), pos(0, 1));
        let (prev, cur) = if reversed {
            (r_cur, p_prev)
        } else {
            (p_prev, r_cur)
        };
        let mut w4_terms = Vec::new();
        for p in 0..4 {
            if prev[p] == 0.0 {
                debug_assert_eq!(cur[p], 0.0);
                continue;
            }
            let sign = if cur[p] == prev[p] {
                Sign::Plus
            } else {
                Sign::Minus
            };
            debug_assert_eq!(cur[p].abs(), prev[p].abs());
            w4_terms.push((p, prev[p], sign));
        }
        QuadGeom {
            block_map,
            rows,
            line_axis,
            reversed,
            other_of_j2,
            w4_terms,
        }
    }
}

fn geometries(n: usize) -> [QuadGeom; 4] {
    Quadrant::ALL.map(|q| QuadGeom::new(q, n))
}

/// Diagonal of `Sigma_(1)`: for type `p` and frequencies `(k1, k2)`,
/// `sqrt(8 + (s+_k1^2 + s+_k2^2)/2)` for `p = 0, 2` and
/// `sqrt(4 + (s-_k1^2 + s-_k2^2)/2)` for `p = 1, 3`, with
/// `s+_k = 2 cos(k pi/(N+2))`, `s-_k = 2 sin(k pi/(N+2))`.
pub fn sigma1_values(n: usize) -> Result<CoeffGrid> {
    let mut out = CoeffGrid::zeros(n)?;
    let half = out.half();
    let plus = ConvFactor::new(half, Sign::Plus)?.singular_values();
    let minus = ConvFactor::new(half, Sign::Minus)?.singular_values();
    for p in 0..4 {
        let (base, s) = if p % 2 == 0 {
            (8.0, &plus)
        } else {
            (4.0, &minus)
        };
        for k1 in 1..=half {
            for k2 in 1..=half {
                let v = (base + 0.5 * s[k1 - 1].powi(2) + 0.5 * s[k2 - 1].powi(2)).sqrt();
                out.set(p, k1, k2, v);
            }
        }
    }
    Ok(out)
}

fn check_level1(b: &AdrtData) -> Result<()> {
    if b.level() != 1 {
        return Err(Error::LevelMismatch {
            expected: 1,
            found: b.level(),
        });
    }
    Ok(())
}

// Applies the orthonormal DST-I along one axis of a half x half grid.
fn dst1_axis(grid: &mut [f64], half: usize, axis: usize) {
    let s = (2.0 / (half + 1) as f64).sqrt();
    let mut line = vec![0.0; half];
    let mut out = vec![0.0; half];
    for o in 0..half {
        for u in 0..half {
            line[u] = if axis == 0 {
                grid[u * half + o]
            } else {
                grid[o * half + u]
            };
        }
        trig::dst1(&line)
            .map(|v| out.copy_from_slice(&v))
            .expect("nonempty line");
        for u in 0..half {
            let v = out[u] * s;
            if axis == 0 {
                grid[u * half + o] = v;
            } else {
                grid[o * half + u] = v;
            }
        }
    }
}

/// `U_(1) Sigma_(1) V_(1)^T x` assembled from fast transforms: the
/// sub-blocks `w1..w3` from the block coefficients, `w4` from the
/// left singular vectors of `K^+-_{N/2}` scaled by their singular values.
/// Equals the first level applied to `x`.
pub fn s1_decomp_apply(x: &Image) -> Result<AdrtData> {
    let n = x.n();
    let a = v_basis_analyze(x)?;
    let half = a.half();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let c: Vec<Vec<f64>> = a
        .grids
        .iter()
        .map(|g| {
            let mut g = g.clone();
            trig::dst1_2d_orthonormal(&mut g, half, half);
            g.iter_mut().for_each(|v| *v *= s);
            g
        })
        .collect();
    let geoms = geometries(n);
    let quads: Vec<QuadrantData> = geoms
        .par_iter()
        .map(|geom| {
            let mut w = SubBlocks::zeros(half);
            for (t, &b) in geom.block_map.iter().enumerate() {
                for (row, out) in geom.rows.iter().zip([&mut w.w1, &mut w.w2, &mut w.w3]) {
                    out[t] = (0..4).map(|p| row[p] * c[p][b]).sum();
                }
            }
            let other = 1 - geom.line_axis;
            for &(p, coef, sign) in &geom.w4_terms {
                let k = ConvFactor::new(half, sign)?;
                let sigma = k.singular_values();
                let mut g = a.grids[p].clone();
                dst1_axis(&mut g, half, other);
                let mut line = vec![0.0; half];
                for o in 0..half {
                    for (kk, l) in line.iter_mut().enumerate() {
                        let idx = if geom.line_axis == 0 {
                            kk * half + o
                        } else {
                            o * half + kk
                        };
                        *l = g[idx] * sigma[kk];
                    }
                    let y = k.factor_apply(Factor::U, &line)?;
                    let j2 = geom
                        .other_of_j2
                        .iter()
                        .position(|&v| v == o)
                        .expect("relabeling is a bijection");
                    for (r, v) in y.iter().enumerate() {
                        let j1 = if geom.reversed { half - r } else { r };
                        w.w4[j1 * half + j2] += coef * s * v;
                    }
                }
            }
            o_permute_inverse(n, &w)
        })
        .collect::<Result<_>>()?;
    AdrtData::from_quadrants(to_array(quads))
}

/// The truncation `M`: zeroes the `w4` entries (odd `h` in odd columns)
/// of every quadrant.
pub fn truncate_apply(b: &AdrtData) -> Result<AdrtData> {
    check_level1(b)?;
    let mut out = b.clone();
    for q in out.quadrants_mut() {
        let half = q.side() / 2;
        for j2 in 0..half {
            let odd = q.column_mut(2 * j2 + 1);
            for j1 in 0..=half {
                odd[2 * j1] = 0.0;
            }
        }
    }
    Ok(out)
}

/// Diagonal of `Sigma_hat`, in the rotated basis
/// `v0' = (v0 + v2)/sqrt2`, `v2' = (v0 - v2)/sqrt2`, `v1' = v1`, `v3' = v3`.
pub const SIGMA_HAT: [f64; 4] = [SQRT_12, 2.0, 2.0, 2.0];

/// Rotated coefficients `V_hat^T a`.
fn rotate_to_hat(a: &mut [Vec<f64>; 4]) {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let (lo, hi) = a.split_at_mut(2);
    for (x0, x2) in lo[0].iter_mut().zip(hi[0].iter_mut()) {
        let (u, v) = (*x0, *x2);
        *x0 = s * (u + v);
        *x2 = s * (u - v);
    }
}

/// `(M S_(1))^T b`, expressed in `v` coefficients.
fn truncated_adjoint(b: &AdrtData) -> Result<[Vec<f64>; 4]> {
    check_level1(b)?;
    let n = b.n();
    let half = b.side() / 2;
    let geoms = geometries(n);
    let parts: Vec<[Vec<f64>; 4]> = geoms
        .par_iter()
        .zip(b.quadrants().par_iter())
        .map(|(geom, q)| {
            let w = o_permute(q)?;
            let mut r: [Vec<f64>; 4] = Default::default();
            for g in r.iter_mut() {
                *g = vec![0.0; half * half];
            }
            for (t, &blk) in geom.block_map.iter().enumerate() {
                let vals = [w.w1[t], w.w2[t], w.w3[t]];
                for (row, v) in geom.rows.iter().zip(vals) {
                    for p in 0..4 {
                        r[p][blk] += row[p] * v;
                    }
                }
            }
            Ok(r)
        })
        .collect::<Result<_>>()?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut sum: [Vec<f64>; 4] = Default::default();
    for (p, g) in sum.iter_mut().enumerate() {
        *g = (0..half * half)
            .map(|i| parts.iter().map(|r| r[p][i]).sum())
            .collect();
    }
    sum.par_iter_mut().for_each(|g| {
        trig::dst1_2d_orthonormal(g, half, half);
        g.iter_mut().for_each(|v| *v *= s);
    });
    Ok(sum)
}

/// `U_hat^T b`, the coefficients of `M b` against the orthonormal system
/// `w_hat = M S_(1) v_hat / sigma_hat`.
pub fn u_hat_transpose(b: &AdrtData) -> Result<CoeffGrid> {
    let mut d = truncated_adjoint(b)?;
    rotate_to_hat(&mut d);
    for (g, s) in d.iter_mut().zip(SIGMA_HAT) {
        g.iter_mut().for_each(|v| *v /= s);
    }
    CoeffGrid::from_grids(b.n(), d)
}

/// `V_hat c`: maps rotated coefficients to an image.
pub fn v_hat_apply(c: &CoeffGrid) -> Image {
    let mut g = c.grids.clone();
    rotate_to_hat(&mut g);
    v_basis_synthesize(&CoeffGrid { n: c.n, grids: g })
}

/// `V_hat^T x`.
pub fn v_hat_transpose(x: &Image) -> Result<CoeffGrid> {
    let mut c = v_basis_analyze(x)?;
    rotate_to_hat(&mut c.grids);
    Ok(c)
}

/// `U_hat c = M S_(1) V_hat Sigma_hat^{-1} c`, through the forward level.
pub fn u_hat_apply(c: &CoeffGrid) -> Result<AdrtData> {
    let mut scaled = c.clone();
    for (g, s) in scaled.grids.iter_mut().zip(SIGMA_HAT) {
        g.iter_mut().for_each(|v| *v /= s);
    }
    truncate_apply(&cross_level_forward(&v_hat_apply(&scaled))?)
}

/// Fast pseudo-inverse of the first level,
/// `x = V_hat Sigma_hat^{-1} U_hat^T M b`; exact on the range.
pub fn s1_pinv_apply(b: &AdrtData) -> Result<Image> {
    let mut c = u_hat_transpose(b)?;
    for (g, s) in c.grids.iter_mut().zip(SIGMA_HAT) {
        g.iter_mut().for_each(|v| *v /= s);
    }
    Ok(v_hat_apply(&c))
}

/// Which part of the first-level Gram matrix a stencil is taken from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StencilSource {
    Total,
    Quadrant(Quadrant),
}

/// 3x3 neighbourhood of the Gram row of pixel `(i, j)`.
///
/// Displayed with `x` = column index to the right and `y` = row index
/// upward: `out[r][c]` is the entry for pixel `(i + 1 - r, j + c - 1)`.
/// Boundary pixels are rejected, as is a row whose support leaves the
/// neighbourhood.
pub fn gram_row_stencil(
    n: usize,
    i: usize,
    j: usize,
    source: StencilSource,
) -> Result<[[f64; 3]; 3]> {
    let side = 1usize << n;
    if n < 2 || i == 0 || j == 0 || i + 1 >= side || j + 1 >= side {
        return Err(Error::OutOfRange(format!("boundary row ({i}, {j})")));
    }
    let mut e = Image::zeros(n);
    e.set(i, j, 1.0);
    let mut d = cross_level_forward(&e)?;
    if let StencilSource::Quadrant(q) = source {
        for other in Quadrant::ALL {
            if other != q {
                d.quadrant_mut(other).values_mut().fill(0.0);
            }
        }
    }
    let row = cross_level_adjoint(&d)?;
    let mut out = [[0.0; 3]; 3];
    let mut inside = 0.0;
    for (r, out_row) in out.iter_mut().enumerate() {
        for (c, v) in out_row.iter_mut().enumerate() {
            *v = row.get(i + 1 - r, j + c - 1);
            inside += v.abs();
        }
    }
    let total: f64 = row.pixels().iter().map(|v| v.abs()).sum();
    if total != inside {
        return Err(Error::OutOfRange(format!(
            "Gram row ({i}, {j}) not supported on its 3x3 neighbourhood"
        )));
    }
    Ok(out)
}

/// Stencil for rows with column parity `x_parity` and row parity
/// `y_parity`, taken at an interior pixel.
pub fn gram_stencil(
    n: usize,
    x_parity: usize,
    y_parity: usize,
    source: StencilSource,
) -> Result<[[f64; 3]; 3]> {
    if x_parity > 1 || y_parity > 1 {
        return Err(Error::OutOfRange(format!(
            "parity ({x_parity}, {y_parity})"
        )));
    }
    gram_row_stencil(n, 2 - y_parity, 2 - x_parity, source)
}
