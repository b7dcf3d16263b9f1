//! Inversion methods for full transform data.

use std::time::Instant;

use rayon::prelude::*;

use crate::cross_level::s1_pinv_apply;
use crate::data::{AdrtData, Image, Quadrant, QuadrantData};
use crate::error::{Error, Result};
use crate::forward::{
    adrt_adjoint, adrt_forward, columns_to_image, cross_level_forward, level_forward,
    quadrant_permute_inverse, sum_images,
};
use crate::level_svd::{LevelSvd, SqLevelSvd};

fn check_full(b: &AdrtData) -> Result<()> {
    if b.level() != b.n() {
        return Err(Error::LevelMismatch {
            expected: b.n(),
            found: b.level(),
        });
    }
    if b.n() == 0 {
        return Err(Error::InvalidLevel { n: 0, m: 1 });
    }
    Ok(())
}

fn average_quadrants(parts: Vec<(Quadrant, QuadrantData)>) -> Result<Image> {
    let images: Vec<Image> = parts
        .into_par_iter()
        .map(|(q, cols)| Ok(quadrant_permute_inverse(&columns_to_image(&cols)?, q)))
        .collect::<Result<_>>()?;
    let mut img = sum_images(images);
    img.pixels_mut().iter_mut().for_each(|v| *v *= 0.25);
    Ok(img)
}

fn spife_stages(b: &AdrtData, mut visit: impl FnMut(&AdrtData)) -> Result<Image> {
    check_full(b)?;
    let mut d = b.clone();
    for m in (2..=b.n()).rev() {
        d = LevelSvd::new(b.n(), m)?.pinv(&d)?;
        visit(&d);
    }
    s1_pinv_apply(&d)
}

/// Spectral pseudo-inverse: the level pseudo-inverses for `m = n..2`
/// followed by the first-level pseudo-inverse.
pub fn spife(b: &AdrtData) -> Result<Image> {
    spife_stages(b, |_| {})
}

/// Inverts each quadrant on its own with the single-quadrant level
/// pseudo-inverses (`m = n..1`), undoes the quadrant relabeling and
/// averages the four images.
pub fn spife_sq(b: &AdrtData) -> Result<Image> {
    check_full(b)?;
    let n = b.n();
    let svds: Vec<SqLevelSvd> = (1..=n)
        .map(|m| SqLevelSvd::new(n, m))
        .collect::<Result<_>>()?;
    let parts: Vec<(Quadrant, QuadrantData)> = Quadrant::ALL
        .par_iter()
        .map(|&q| {
            let mut d = b.quadrant(q).clone();
            for svd in svds.iter().rev() {
                d = svd.pinv(&d)?;
            }
            Ok((q, d))
        })
        .collect::<Result<_>>()?;
    average_quadrants(parts)
}

/// Result of [`cg_normal`].
#[derive(Debug, Clone)]
pub struct CgOutput {
    pub image: Image,
    /// Normal-equation residual norm `|R^T b - R^T R x_k|` for `k = 0..`.
    pub residuals: Vec<f64>,
}

/// Conjugate gradients on `R^T R x = R^T b` from a zero initial guess,
/// for exactly `iters` iterations unless the residual drops below 1e-15.
pub fn cg_normal(b: &AdrtData, iters: usize) -> Result<CgOutput> {
    check_full(b)?;
    if iters == 0 {
        return Err(Error::OutOfRange("iteration count 0".into()));
    }
    let n = b.n();
    let dot = |a: &Image, c: &Image| -> f64 {
        a.pixels().iter().zip(c.pixels()).map(|(u, v)| u * v).sum()
    };
    let normal = |x: &Image| -> Result<Image> { adrt_adjoint(&adrt_forward(x)?) };
    let mut x = Image::zeros(n);
    let mut r = adrt_adjoint(b)?;
    let mut p = r.clone();
    let mut rs = dot(&r, &r);
    let mut residuals = vec![rs.sqrt()];
    for _ in 0..iters {
        if rs.sqrt() < 1e-15 {
            break;
        }
        let ap = normal(&p)?;
        let alpha = rs / dot(&p, &ap);
        for ((xi, ri), (pi, api)) in x
            .pixels_mut()
            .iter_mut()
            .zip(r.pixels_mut().iter_mut())
            .zip(p.pixels().iter().zip(ap.pixels()))
        {
            *xi += alpha * pi;
            *ri -= alpha * api;
        }
        let rs_new = dot(&r, &r);
        residuals.push(rs_new.sqrt());
        let beta = rs_new / rs;
        for (pi, ri) in p.pixels_mut().iter_mut().zip(r.pixels()) {
            *pi = ri + beta * *pi;
        }
        rs = rs_new;
    }
    Ok(CgOutput {
        image: x,
        residuals,
    })
}

/// Exact inverse of one single-quadrant level by telescoping:
/// consecutive entries of the odd and even output columns differ by a
/// first difference of the shifted input column, so a cumulative sum
/// recovers it, and the other input column follows by subtraction.
///
/// Output entries that the recurrence does not need (the top `t + 1` of
/// each odd column) are ignored.
pub fn sq_level_exact_inverse(g: &QuadrantData) -> Result<QuadrantData> {
    let (n, m) = (g.n(), g.level());
    if m == 0 {
        return Err(Error::InvalidLevel { n, m });
    }
    let mut out = QuadrantData::zeros(n, m - 1)?;
    let side = 1usize << n;
    let half = 1usize << (m - 1);
    for l in 0..(side >> m) {
        let base = l << m;
        for t in 0..half {
            let even = g.column(base + 2 * t); // h from -2t
            let odd = g.column(base + 2 * t + 1); // h from -2t-1
                                                  // b(k) for k in -t..N, stored at index k + t
            let mut b = vec![0.0; side + t];
            b[0] = odd[0];
            for i in 1..side + t {
                // h = k - t - 1 with k = i - t
                let h = i as isize - 2 * t as isize - 1;
                let ie = (h + 2 * t as isize) as usize;
                let io = (h + 2 * t as isize + 1) as usize;
                b[i] = b[i - 1] + odd[io] - even[ie];
            }
            let a_col: Vec<f64> = (0..side + t)
                .map(|i| {
                    // a(h) with h = i - t; even index h + 2t; b index h + 2t
                    let ie = i + t;
                    let bi = i + t;
                    even[ie] - if bi < side + t { b[bi] } else { 0.0 }
                })
                .collect();
            out.column_mut(base + t).copy_from_slice(&a_col);
            out.column_mut(base + half + t).copy_from_slice(&b);
        }
    }
    Ok(out)
}

/// Algebraically exact inverse: each quadrant is inverted level by level
/// with [`sq_level_exact_inverse`], relabeled back, and the four images
/// are averaged. Only meaningful for data in the range of the transform.
pub fn alg_exact(b: &AdrtData) -> Result<Image> {
    check_full(b)?;
    let parts: Vec<(Quadrant, QuadrantData)> = Quadrant::ALL
        .par_iter()
        .map(|&q| {
            let mut d = b.quadrant(q).clone();
            while d.level() > 0 {
                d = sq_level_exact_inverse(&d)?;
            }
            Ok((q, d))
        })
        .collect::<Result<_>>()?;
    average_quadrants(parts)
}

/// Max-abs error of every spife stage against the exact intermediate.
///
/// Entry `(m, e)`: after the pseudo-inverse of level `m` (`m = n..1`), `e`
/// is the max-abs difference to the forward transform of `x_ref` through
/// level `m - 1` (the image itself for `m = 1`).
pub fn level_error_trace(x_ref: &Image, b: &AdrtData) -> Result<Vec<(usize, f64)>> {
    check_full(b)?;
    if x_ref.n() != b.n() {
        return Err(Error::LengthMismatch {
            expected: b.side(),
            found: x_ref.side(),
        });
    }
    let n = b.n();
    let mut exact = Vec::with_capacity(n);
    let mut d = cross_level_forward(x_ref)?;
    exact.push(d.clone());
    for _ in 2..n {
        d = level_forward(&d)?;
        exact.push(d.clone());
    }
    let mut trace = Vec::with_capacity(n);
    let mut m = n;
    let image = spife_stages(b, |stage| {
        let reference = &exact[m - 2];
        let err = stage
            .iter()
            .zip(reference.iter())
            .map(|(a, r)| (a - r).abs())
            .fold(0.0, f64::max);
        trace.push((m, err));
        m -= 1;
    })?;
    trace.push((1, max_abs_diff(image.pixels(), x_ref.pixels())));
    Ok(trace)
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Error metrics of a reconstruction against a reference image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub max_err: f64,
    pub l2_err: f64,
    pub rel_l2: f64,
}

/// Max-abs, l2 and relative l2 differences. `rel_l2` is 0 when both
/// images are zero and infinite when only the reference is.
pub fn metrics(x: &Image, reference: &Image) -> Result<Metrics> {
    if x.n() != reference.n() {
        return Err(Error::LengthMismatch {
            expected: reference.side(),
            found: x.side(),
        });
    }
    let max_err = max_abs_diff(x.pixels(), reference.pixels());
    let l2_err = x
        .pixels()
        .iter()
        .zip(reference.pixels())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let ref_norm = reference.pixels().iter().map(|v| v * v).sum::<f64>().sqrt();
    let rel_l2 = if l2_err == 0.0 {
        0.0
    } else {
        l2_err / ref_norm
    };
    Ok(Metrics {
        max_err,
        l2_err,
        rel_l2,
    })
}

/// Inversion method.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Spife,
    SpifeSq,
    Cg { iters: usize },
    Alg,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Spife => "spife",
            Method::SpifeSq => "spife-sq",
            Method::Cg { .. } => "cg",
            Method::Alg => "alg",
        }
    }

    /// All methods, with `log2 N` iterations for CG.
    pub fn all(n: usize) -> [Method; 4] {
        [
            Method::Spife,
            Method::SpifeSq,
            Method::Cg { iters: n.max(1) },
            Method::Alg,
        ]
    }

    pub fn invert(&self, b: &AdrtData) -> Result<Image> {
        match *self {
            Method::Spife => spife(b),
            Method::SpifeSq => spife_sq(b),
            Method::Cg { iters } => Ok(cg_normal(b, iters)?.image),
            Method::Alg => alg_exact(b),
        }
    }
}

/// Outcome of one inversion run.
#[derive(Debug, Clone)]
pub struct InverseReport {
    pub method: Method,
    pub image: Image,
    pub metrics: Option<Metrics>,
    pub trace: Option<Vec<(usize, f64)>>,
    pub seconds: f64,
}

/// Runs `method` on `b`, timing it and, given a reference, measuring the
/// error. With `with_trace` (spife only) the per-level trace is recorded
/// in a second, untimed pass.
pub fn run_inverse(
    method: Method,
    b: &AdrtData,
    reference: Option<&Image>,
    with_trace: bool,
) -> Result<InverseReport> {
    let start = Instant::now();
    let image = method.invert(b)?;
    let seconds = start.elapsed().as_secs_f64();
    let metrics = reference.map(|r| metrics(&image, r)).transpose()?;
    let trace = match (with_trace, method, reference) {
        (true, Method::Spife, Some(r)) => Some(level_error_trace(r, b)?),
        _ => None,
    };
    Ok(InverseReport {
        method,
        image,
        metrics,
        trace,
        seconds,
    })
}
