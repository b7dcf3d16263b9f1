//! The forward transform level by level, and its adjoint.
//!
//! A single-quadrant level merges pairs of adjacent sections: for section
//! `l` and offset `t` the columns `a = f(., l 2^m + t)` and
//! `b = f(., l 2^m + 2^(m-1) + t)` of the level `m-1` data produce
//!
//! ```text
//! g(h, l 2^m + 2t)     = a(h) + b(h + t)
//! g(h, l 2^m + 2t + 1) = a(h) + b(h + t + 1)
//! ```
//!
//! with reads outside a column's range taken as zero. The cross-quadrant
//! level applies the four quadrant permutations to the image first.

use rayon::prelude::*;

use crate::data::{AdrtData, Image, Quadrant, QuadrantData};
use crate::error::{Error, Result};

// Source pixel read by quadrant q at output position (i, j).
#[inline]
pub(crate) fn permute_source(q: Quadrant, side: usize, i: usize, j: usize) -> (usize, usize) {
    let last = side - 1;
    match q {
        Quadrant::I => (j, last - i),
        Quadrant::II => (last - i, j),
        Quadrant::III => (i, j),
        Quadrant::IV => (last - j, last - i),
    }
}

/// Applies the quadrant relabeling `T_q` to an image.
pub fn quadrant_permute(img: &Image, q: Quadrant) -> Image {
    let side = img.side();
    let mut out = Image::zeros(img.n());
    for i in 0..side {
        for j in 0..side {
            let (r, c) = permute_source(q, side, i, j);
            out.set(i, j, img.get(r, c));
        }
    }
    out
}

/// Inverse (equivalently, transpose) of [`quadrant_permute`].
pub fn quadrant_permute_inverse(img: &Image, q: Quadrant) -> Image {
    let side = img.side();
    let mut out = Image::zeros(img.n());
    for i in 0..side {
        for j in 0..side {
            let (r, c) = permute_source(q, side, i, j);
            out.set(r, c, img.get(i, j));
        }
    }
    out
}

/// Level-0 array of an image: `f(h, s) = pixel(h, s)`.
pub fn image_to_columns(img: &Image) -> QuadrantData {
    let side = img.side();
    let mut q = QuadrantData::zeros(img.n(), 0).expect("level 0 is always valid");
    for s in 0..side {
        let col = q.column_mut(s);
        for (h, v) in col.iter_mut().enumerate() {
            *v = img.get(h, s);
        }
    }
    q
}

/// Inverse of [`image_to_columns`].
pub fn columns_to_image(q: &QuadrantData) -> Result<Image> {
    if q.level() != 0 {
        return Err(Error::LevelMismatch {
            expected: 0,
            found: q.level(),
        });
    }
    let side = q.side();
    let mut img = Image::zeros(q.n());
    for s in 0..side {
        for (h, &v) in q.column(s).iter().enumerate() {
            img.set(h, s, v);
        }
    }
    Ok(img)
}

#[inline]
fn read(col: &[f64], lo: isize, h: isize) -> f64 {
    let idx = h - lo;
    if idx < 0 || idx as usize >= col.len() {
        0.0
    } else {
        col[idx as usize]
    }
}

/// One single-quadrant level: level `m-1` data to level `m`.
pub fn sq_level_forward(data: &QuadrantData) -> Result<QuadrantData> {
    let (n, prev) = (data.n(), data.level());
    if prev >= n {
        return Err(Error::InvalidLevel { n, m: prev + 1 });
    }
    let m = prev + 1;
    let mut out = QuadrantData::zeros(n, m)?;
    let side = 1usize << n;
    let half = 1usize << prev;
    for l in 0..(side >> m) {
        let base = l << m;
        for t in 0..half {
            let a = data.column(base + t);
            let b = data.column(base + half + t);
            let lo = -(t as isize);
            let ti = t as isize;
            for (shift, s_out) in [(ti, base + 2 * t), (ti + 1, base + 2 * t + 1)] {
                let h0 = out.h_min(s_out);
                for (k, g) in out.column_mut(s_out).iter_mut().enumerate() {
                    let h = h0 + k as isize;
                    *g = read(a, lo, h) + read(b, lo, h + shift);
                }
            }
        }
    }
    Ok(out)
}

/// Transpose of [`sq_level_forward`]: level `m` data to level `m-1`.
pub fn sq_level_adjoint(data: &QuadrantData) -> Result<QuadrantData> {
    let (n, m) = (data.n(), data.level());
    if m == 0 {
        return Err(Error::InvalidLevel { n, m });
    }
    let prev = m - 1;
    let mut out = QuadrantData::zeros(n, prev)?;
    let side = 1usize << n;
    let half = 1usize << prev;
    for l in 0..(side >> m) {
        let base = l << m;
        for t in 0..half {
            let ti = t as isize;
            let g_even = data.column(base + 2 * t);
            let g_odd = data.column(base + 2 * t + 1);
            let lo_even = -(2 * ti);
            let lo_odd = -(2 * ti + 1);
            let lo = -ti;
            for (k, v) in out.column_mut(base + t).iter_mut().enumerate() {
                let h = lo + k as isize;
                *v = read(g_even, lo_even, h) + read(g_odd, lo_odd, h);
            }
            for (k, v) in out.column_mut(base + half + t).iter_mut().enumerate() {
                let h = lo + k as isize;
                *v = read(g_even, lo_even, h - ti) + read(g_odd, lo_odd, h - ti - 1);
            }
        }
    }
    Ok(out)
}

/// Single-quadrant transform of an image (all `n` levels, no permutation).
pub fn sq_forward(img: &Image) -> QuadrantData {
    let mut q = image_to_columns(img);
    for _ in 0..img.n() {
        q = sq_level_forward(&q).expect("level below n");
    }
    q
}

/// Cross-quadrant level: permute the image per quadrant and apply the
/// first single-quadrant level to each.
pub fn cross_level_forward(img: &Image) -> Result<AdrtData> {
    if img.n() == 0 {
        return Err(Error::InvalidLevel { n: 0, m: 1 });
    }
    let quads: Vec<QuadrantData> = Quadrant::ALL
        .par_iter()
        .map(|&q| sq_level_forward(&image_to_columns(&quadrant_permute(img, q))))
        .collect::<Result<_>>()?;
    AdrtData::from_quadrants(to_array(quads))
}

/// Transpose of [`cross_level_forward`].
pub fn cross_level_adjoint(data: &AdrtData) -> Result<Image> {
    if data.level() != 1 {
        return Err(Error::LevelMismatch {
            expected: 1,
            found: data.level(),
        });
    }
    let parts: Vec<Image> = Quadrant::ALL
        .par_iter()
        .map(|&q| {
            let cols = sq_level_adjoint(data.quadrant(q))?;
            Ok(quadrant_permute_inverse(&columns_to_image(&cols)?, q))
        })
        .collect::<Result<_>>()?;
    Ok(sum_images(parts))
}

/// A single-quadrant level `m > 1` applied to every quadrant.
pub fn level_forward(data: &AdrtData) -> Result<AdrtData> {
    if data.level() == 0 {
        return Err(Error::LevelMismatch {
            expected: 1,
            found: 0,
        });
    }
    map_quadrants(data, sq_level_forward)
}

/// Transpose of [`level_forward`]; input level must be at least 2.
pub fn level_adjoint(data: &AdrtData) -> Result<AdrtData> {
    if data.level() < 2 {
        return Err(Error::InvalidLevel {
            n: data.n(),
            m: data.level(),
        });
    }
    map_quadrants(data, sq_level_adjoint)
}

pub(crate) fn map_quadrants(
    data: &AdrtData,
    f: impl Fn(&QuadrantData) -> Result<QuadrantData> + Sync,
) -> Result<AdrtData> {
    let quads: Vec<QuadrantData> = data.quadrants().par_iter().map(&f).collect::<Result<_>>()?;
    AdrtData::from_quadrants(to_array(quads))
}

pub(crate) fn to_array<T>(v: Vec<T>) -> [T; 4] {
    match v.try_into() {
        Ok(a) => a,
        Err(_) => unreachable!("exactly four quadrants"),
    }
}

pub(crate) fn sum_images(parts: Vec<Image>) -> Image {
    let mut iter = parts.into_iter();
    let mut acc = iter.next().expect("at least one image");
    for p in iter {
        for (a, b) in acc.pixels_mut().iter_mut().zip(p.pixels()) {
            *a += b;
        }
    }
    acc
}

/// The full transform `S_(n) ... S_(1)`.
///
/// Computed per quadrant: sections small enough to stay in cache are built
/// depth first, the remaining levels are merged section by section.
pub fn adrt_forward(img: &Image) -> Result<AdrtData> {
    if img.n() == 0 {
        return Err(Error::InvalidLevel { n: 0, m: 1 });
    }
    let quads: Vec<QuadrantData> = Quadrant::ALL
        .par_iter()
        .map(|&q| quadrant_forward(img, q))
        .collect::<Result<_>>()?;
    AdrtData::from_quadrants(to_array(quads))
}

/// Full transform through the level operators one at a time.
pub fn adrt_forward_levelwise(img: &Image) -> Result<AdrtData> {
    let mut data = cross_level_forward(img)?;
    for _ in 1..img.n() {
        data = level_forward(&data)?;
    }
    Ok(data)
}

// Sections of at most this many entries are built depth first.
const CACHE_SECTION: usize = 1 << 15;

// Entries in one level-`m` section: columns of lengths `side + 0..2^m`.
fn section_len(side: usize, m: usize) -> usize {
    let w = 1usize << m;
    w * side + w * (w - 1) / 2
}

// Start of column `t` within a section.
fn column_start(side: usize, t: usize) -> usize {
    t * side + t * t.saturating_sub(1) / 2
}

// Level-0 column `s` of quadrant `q`, i.e. column `s` of the relabeled image.
fn gather_column(img: &Image, q: Quadrant, s: usize, out: &mut [f64]) {
    let side = img.side();
    let last = side - 1;
    let px = img.pixels();
    match q {
        Quadrant::I => {
            let row = &px[s * side..(s + 1) * side];
            out.iter_mut()
                .zip(row.iter().rev())
                .for_each(|(o, v)| *o = *v);
        }
        Quadrant::II => {
            for (h, o) in out.iter_mut().enumerate() {
                *o = px[(last - h) * side + s];
            }
        }
        Quadrant::III => {
            for (h, o) in out.iter_mut().enumerate() {
                *o = px[h * side + s];
            }
        }
        Quadrant::IV => {
            let r = last - s;
            let row = &px[r * side..(r + 1) * side];
            out.iter_mut()
                .zip(row.iter().rev())
                .for_each(|(o, v)| *o = *v);
        }
    }
}

// Merges two level-`m-1` sections stored back to back in `src` into one
// level-`m` section.
fn merge_section(side: usize, m: usize, src: &[f64], dst: &mut [f64]) {
    let half = 1usize << (m - 1);
    let (left, right) = src.split_at(section_len(side, m - 1));
    for t in 0..half {
        let c = column_start(side, t);
        let a = &left[c..c + side + t];
        let b = &right[c..c + side + t];
        let start = column_start(side, 2 * t);
        let (even, odd) = dst[start..start + 2 * side + 4 * t + 1].split_at_mut(side + 2 * t);
        even[..t].copy_from_slice(&b[..t]);
        for ((g, x), y) in even[t..side + t].iter_mut().zip(&a[..side]).zip(&b[t..]) {
            *g = x + y;
        }
        even[side + t..].copy_from_slice(&a[side..]);
        odd[..t + 1].copy_from_slice(&b[..t + 1]);
        for ((g, x), y) in odd[t + 1..side + t]
            .iter_mut()
            .zip(&a[..side - 1])
            .zip(&b[t + 1..])
        {
            *g = x + y;
        }
        odd[side + t..].copy_from_slice(&a[side - 1..]);
    }
}

fn build_section(
    img: &Image,
    q: Quadrant,
    m: usize,
    s0: usize,
    out: &mut [f64],
    scratch: &mut [f64],
) {
    if m == 0 {
        gather_column(img, q, s0, out);
        return;
    }
    let side = img.side();
    let lower = section_len(side, m - 1);
    let (tmp, rest) = scratch.split_at_mut(2 * lower);
    {
        let (l, r) = tmp.split_at_mut(lower);
        build_section(img, q, m - 1, s0, l, rest);
        build_section(img, q, m - 1, s0 + (1 << (m - 1)), r, rest);
    }
    merge_section(side, m, tmp, out);
}

fn scratch_len(side: usize, m: usize) -> usize {
    (1..=m).map(|k| 2 * section_len(side, k - 1)).sum()
}

fn quadrant_forward(img: &Image, q: Quadrant) -> Result<QuadrantData> {
    let (n, side) = (img.n(), img.side());
    let cut = (0..=n)
        .take_while(|&m| section_len(side, m) <= CACHE_SECTION)
        .last()
        .unwrap_or(0);
    let mut cur = vec![0.0; QuadrantData::entry_count(n, n)];
    let mut next = vec![0.0; cur.len()];
    let len = QuadrantData::entry_count(n, cut);
    cur[..len]
        .par_chunks_mut(section_len(side, cut))
        .enumerate()
        .for_each_init(
            || vec![0.0; scratch_len(side, cut)],
            |scratch, (l, out)| build_section(img, q, cut, l << cut, out, scratch),
        );
    for m in cut + 1..=n {
        let (src_len, dst_len) = (
            QuadrantData::entry_count(n, m - 1),
            QuadrantData::entry_count(n, m),
        );
        next[..dst_len]
            .par_chunks_mut(section_len(side, m))
            .zip(cur[..src_len].par_chunks(2 * section_len(side, m - 1)))
            .for_each(|(dst, src)| merge_section(side, m, src, dst));
        std::mem::swap(&mut cur, &mut next);
    }
    QuadrantData::from_values(n, n, cur)
}

/// Transpose of [`adrt_forward`].
pub fn adrt_adjoint(data: &AdrtData) -> Result<Image> {
    if data.level() != data.n() {
        return Err(Error::LevelMismatch {
            expected: data.n(),
            found: data.level(),
        });
    }
    let mut d = data.clone();
    while d.level() > 1 {
        d = level_adjoint(&d)?;
    }
    cross_level_adjoint(&d)
}
