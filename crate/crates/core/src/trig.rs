//! Unnormalized real sine/cosine transforms computed through complex FFT
//! embeddings.
//!
//! Kernels, for a length-`M` input `x`:
//!
//! | transform | `X_k`                                              |
//! |-----------|----------------------------------------------------|
//! | DST-I     | `sum_j x_j sin(pi (j+1)(k+1) / (M+1))`             |
//! | DST-II    | `sum_j x_j sin(pi (j+1/2)(k+1) / M)`               |
//! | DCT-II    | `sum_j x_j cos(pi (j+1/2) k / M)`                  |
//!
//! No normalization is applied. The `*_transpose` functions multiply by the
//! transposed kernel matrix (type-III transforms) and the `*_inverse`
//! functions undo the forward transform exactly.
//!
//! Any length is accepted. DST-I uses an odd extension of length `2(M+1)`;
//! the half-sample transforms use the even/odd reordering of the input and
//! one complex FFT of length `M`. Two real inputs of the same length share
//! one complex FFT (the `*_pair_into` functions).

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::{Error, Result};

struct Workspace {
    planner: FftPlanner<f64>,
    // e^{-i pi k / 2M}, k = 0..M, keyed by M
    twiddles: HashMap<usize, Arc<[Complex64]>>,
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

thread_local! {
    static WORKSPACE: RefCell<Workspace> = RefCell::new(Workspace {
        planner: FftPlanner::new(),
        twiddles: HashMap::new(),
        buf: Vec::new(),
        scratch: Vec::new(),
    });
}

impl Workspace {
    fn plan(&mut self, len: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
        self.planner.plan_fft(len, direction)
    }

    fn twiddles(&mut self, m: usize) -> Arc<[Complex64]> {
        self.twiddles
            .entry(m)
            .or_insert_with(|| {
                (0..m)
                    .map(|k| {
                        Complex64::from_polar(
                            1.0,
                            -std::f64::consts::PI * k as f64 / (2 * m) as f64,
                        )
                    })
                    .collect()
            })
            .clone()
    }

    // Runs the FFT over `self.buf[..len]`.
    fn run(&mut self, len: usize, direction: FftDirection) {
        let fft = self.plan(len, direction);
        let need = fft.get_inplace_scratch_len();
        if self.scratch.len() < need {
            self.scratch.resize(need, Complex64::new(0.0, 0.0));
        }
        fft.process_with_scratch(&mut self.buf[..len], &mut self.scratch[..need]);
    }

    fn load(&mut self, len: usize) {
        self.buf.clear();
        self.buf.resize(len, Complex64::new(0.0, 0.0));
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Dst1,
    Dct2,
    Dst2,
    Dct3,
    Dst3,
}

type Lane<'a, 'b> = (&'a [f64], &'b mut [f64]);

fn transform(kind: Kind, first: Lane, second: Option<Lane>) {
    let m = first.0.len();
    debug_assert!(m > 0 && first.1.len() == m);
    debug_assert!(second
        .as_ref()
        .is_none_or(|(x, o)| x.len() == m && o.len() == m));
    WORKSPACE.with(|ws| {
        let mut ws = ws.borrow_mut();
        match kind {
            Kind::Dst1 => dst1_lanes(&mut ws, first, second),
            Kind::Dct2 => cos2_lanes(&mut ws, first, second, false),
            Kind::Dst2 => cos2_lanes(&mut ws, first, second, true),
            Kind::Dct3 => cos3_lanes(&mut ws, first, second, false),
            Kind::Dst3 => cos3_lanes(&mut ws, first, second, true),
        }
    });
}

// Odd extension: bin k+1 of the FFT is -2i DST-I(x)_k for a real lane, so
// the real and imaginary lanes separate without post-processing.
fn dst1_lanes(ws: &mut Workspace, first: Lane, second: Option<Lane>) {
    let m = first.0.len();
    let len = 2 * (m + 1);
    ws.load(len);
    for (j, &v) in first.0.iter().enumerate() {
        ws.buf[j + 1].re = v;
        ws.buf[len - 1 - j].re = -v;
    }
    if let Some((y, _)) = &second {
        for (j, &v) in y.iter().enumerate() {
            ws.buf[j + 1].im = v;
            ws.buf[len - 1 - j].im = -v;
        }
    }
    ws.run(len, FftDirection::Forward);
    for (k, o) in first.1.iter_mut().enumerate() {
        *o = -0.5 * ws.buf[k + 1].im;
    }
    if let Some((_, out)) = second {
        for (k, o) in out.iter_mut().enumerate() {
            *o = 0.5 * ws.buf[k + 1].re;
        }
    }
}

// Position of x_j in the even/odd reordering `[x0, x2, x4, .., x5, x3, x1]`.
#[inline]
fn reorder_index(j: usize, m: usize) -> usize {
    if j.is_multiple_of(2) {
        j / 2
    } else {
        m - 1 - j / 2
    }
}

// DCT-II as Re(e^{-i pi k/2M} FFT(reordered x)_k). With `sine`, the input
// is sign-alternated and the output reversed, which gives DST-II.
fn cos2_lanes(ws: &mut Workspace, first: Lane, second: Option<Lane>, sine: bool) {
    let m = first.0.len();
    ws.load(m);
    let sign = |j: usize| if sine && j % 2 == 1 { -1.0 } else { 1.0 };
    for (j, &v) in first.0.iter().enumerate() {
        ws.buf[reorder_index(j, m)].re = sign(j) * v;
    }
    if let Some((y, _)) = &second {
        for (j, &v) in y.iter().enumerate() {
            ws.buf[reorder_index(j, m)].im = sign(j) * v;
        }
    }
    ws.run(m, FftDirection::Forward);
    let tw = ws.twiddles(m);
    let out_index = |k: usize| if sine { m - 1 - k } else { k };
    let (out_x, mut out_y) = (first.1, second.map(|(_, o)| o));
    for k in 0..m {
        let z = ws.buf[k];
        let zc = ws.buf[(m - k) % m].conj();
        let vx = (z + zc) * 0.5;
        out_x[out_index(k)] = (tw[k] * vx).re;
        if let Some(oy) = out_y.as_deref_mut() {
            let vy = (z - zc) * Complex64::new(0.0, -0.5);
            oy[out_index(k)] = (tw[k] * vy).re;
        }
    }
}

// Transpose of `cos2_lanes`: the Hermitian part of e^{i pi k/2M} X_k is
// inverse-transformed, so each lane comes back real and two lanes share
// the FFT.
fn cos3_lanes(ws: &mut Workspace, first: Lane, second: Option<Lane>, sine: bool) {
    let m = first.0.len();
    let tw = ws.twiddles(m);
    ws.load(m);
    let at = |x: &[f64], k: usize| if sine { x[m - 1 - k] } else { x[k] };
    let hermitian = |x: &[f64], k: usize| -> Complex64 {
        if k == 0 {
            Complex64::new(at(x, 0), 0.0)
        } else {
            tw[k].conj() * Complex64::new(at(x, k), -at(x, m - k)) * 0.5
        }
    };
    for k in 0..m {
        ws.buf[k] = hermitian(first.0, k);
    }
    if let Some((y, _)) = &second {
        for k in 0..m {
            let g = hermitian(y, k);
            ws.buf[k] += Complex64::new(-g.im, g.re);
        }
    }
    ws.run(m, FftDirection::Inverse);
    let sign = |j: usize| if sine && j % 2 == 1 { -1.0 } else { 1.0 };
    for (j, o) in first.1.iter_mut().enumerate() {
        *o = sign(j) * ws.buf[reorder_index(j, m)].re;
    }
    if let Some((_, out)) = second {
        for (j, o) in out.iter_mut().enumerate() {
            *o = sign(j) * ws.buf[reorder_index(j, m)].im;
        }
    }
}

fn check(x: &[f64]) -> Result<()> {
    if x.is_empty() {
        Err(Error::EmptyInput)
    } else {
        Ok(())
    }
}

fn allocate(kind: Kind, x: &[f64]) -> Result<Vec<f64>> {
    check(x)?;
    let mut out = vec![0.0; x.len()];
    transform(kind, (x, &mut out), None);
    Ok(out)
}

/// DST-I, `X_k = sum_j x_j sin(pi (j+1)(k+1)/(M+1))`.
pub fn dst1(x: &[f64]) -> Result<Vec<f64>> {
    allocate(Kind::Dst1, x)
}

/// DST-II, `X_k = sum_j x_j sin(pi (j+1/2)(k+1)/M)`.
pub fn dst2(x: &[f64]) -> Result<Vec<f64>> {
    allocate(Kind::Dst2, x)
}

/// DCT-II, `X_k = sum_j x_j cos(pi (j+1/2) k/M)`.
pub fn dct2(x: &[f64]) -> Result<Vec<f64>> {
    allocate(Kind::Dct2, x)
}

/// Transpose of [`dst2`] (unnormalized DST-III),
/// `y_j = sum_k X_k sin(pi (j+1/2)(k+1)/M)`.
pub fn dst2_transpose(x: &[f64]) -> Result<Vec<f64>> {
    allocate(Kind::Dst3, x)
}

/// Transpose of [`dct2`] (unnormalized DCT-III),
/// `y_j = sum_k X_k cos(pi (j+1/2) k/M)`.
pub fn dct2_transpose(x: &[f64]) -> Result<Vec<f64>> {
    allocate(Kind::Dct3, x)
}

macro_rules! into_fns {
    ($($single:ident, $pair:ident, $kind:expr;)*) => {$(
        /// In-place-output variant; lengths must match and be nonzero.
        #[allow(dead_code)]
        pub(crate) fn $single(x: &[f64], out: &mut [f64]) {
            transform($kind, (x, out), None)
        }

        /// Two transforms of equal length sharing one FFT.
        #[allow(dead_code)]
        pub(crate) fn $pair(x: &[f64], out_x: &mut [f64], y: &[f64], out_y: &mut [f64]) {
            transform($kind, (x, out_x), Some((y, out_y)))
        }
    )*};
}

into_fns! {
    dst1_into, dst1_pair_into, Kind::Dst1;
    dst2_into, dst2_pair_into, Kind::Dst2;
    dct2_into, dct2_pair_into, Kind::Dct2;
    dst2_transpose_into, dst2_transpose_pair_into, Kind::Dst3;
    dct2_transpose_into, dct2_transpose_pair_into, Kind::Dct3;
}

/// Inverse of [`dst1`]: DST-I scaled by `2/(M+1)`.
pub fn dst1_inverse(x: &[f64]) -> Result<Vec<f64>> {
    let mut y = dst1(x)?;
    let s = 2.0 / (x.len() + 1) as f64;
    y.iter_mut().for_each(|v| *v *= s);
    Ok(y)
}

/// Inverse of [`dst2`].
///
/// The DST-II rows are orthogonal with squared norms `M/2` except the last
/// (`M`), so the inverse is the transpose after dividing by those norms.
pub fn dst2_inverse(x: &[f64]) -> Result<Vec<f64>> {
    check(x)?;
    let m = x.len();
    let half = m as f64 / 2.0;
    let scaled: Vec<f64> = x
        .iter()
        .enumerate()
        .map(|(k, &v)| if k + 1 == m { v / m as f64 } else { v / half })
        .collect();
    dst2_transpose(&scaled)
}

/// Inverse of [`dct2`]. Row norms are `M` for `k = 0` and `M/2` otherwise.
pub fn dct2_inverse(x: &[f64]) -> Result<Vec<f64>> {
    check(x)?;
    let m = x.len();
    let half = m as f64 / 2.0;
    let scaled: Vec<f64> = x
        .iter()
        .enumerate()
        .map(|(k, &v)| if k == 0 { v / m as f64 } else { v / half })
        .collect();
    dct2_transpose(&scaled)
}

/// Orthonormal 2D DST-I of a row-major `rows x cols` grid, applied in place.
/// The transform is an involution.
pub(crate) fn dst1_2d_orthonormal(grid: &mut [f64], rows: usize, cols: usize) {
    debug_assert_eq!(grid.len(), rows * cols);
    let sr = (2.0 / (rows + 1) as f64).sqrt();
    let sc = (2.0 / (cols + 1) as f64).sqrt();
    let mut out = vec![0.0; cols.max(rows)];
    for r in 0..rows {
        let row = &mut grid[r * cols..(r + 1) * cols];
        dst1_into(row, &mut out[..cols]);
        for (d, s) in row.iter_mut().zip(&out[..cols]) {
            *d = s * sc;
        }
    }
    let mut col = vec![0.0; rows];
    for c in 0..cols {
        for r in 0..rows {
            col[r] = grid[r * cols + c];
        }
        dst1_into(&col, &mut out[..rows]);
        for r in 0..rows {
            grid[r * cols + c] = out[r] * sr;
        }
    }
}
