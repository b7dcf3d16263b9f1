//! Binary image and transform-data files, metrics CSV, atomic writes.
//!
//! Image file: `"AIMG"`, u32 version = 1, u32 `n`, then `4^n` f64 pixels
//! row-major. Data file: `"ADRT"`, u32 version = 1, u32 `n`, u32 level
//! `m`, then quadrants I..IV, columns `s` ascending, `h` ascending within a
//! column. All integers and floats little-endian.

use std::fs;
use std::io::Write;
use std::path::Path;

use adrt::{AdrtData, Image, QuadrantData};

use crate::error::{HarnessError, Result};
use crate::generate::MAX_N;

pub const IMAGE_MAGIC: [u8; 4] = *b"AIMG";
pub const DATA_MAGIC: [u8; 4] = *b"ADRT";
pub const VERSION: u32 = 1;

pub fn image_to_bytes(img: &Image) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + 8 * img.pixels().len());
    out.extend_from_slice(&IMAGE_MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(img.n() as u32).to_le_bytes());
    for v in img.pixels() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn data_to_bytes(d: &AdrtData) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + 8 * d.len());
    out.extend_from_slice(&DATA_MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(d.n() as u32).to_le_bytes());
    out.extend_from_slice(&(d.level() as u32).to_le_bytes());
    for v in d.iter() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn header(bytes: &'a [u8], magic: [u8; 4], header_len: usize) -> Result<Self> {
        if bytes.len() < 4 {
            return Err(HarnessError::Truncated {
                expected: header_len,
                found: bytes.len(),
            });
        }
        let found: [u8; 4] = bytes[..4].try_into().expect("four bytes");
        if found != magic {
            return Err(HarnessError::BadMagic {
                expected: magic,
                found,
            });
        }
        if bytes.len() < header_len {
            return Err(HarnessError::Truncated {
                expected: header_len,
                found: bytes.len(),
            });
        }
        Ok(Reader { bytes, pos: 4 })
    }

    fn u32(&mut self) -> u32 {
        let v = u32::from_le_bytes(
            self.bytes[self.pos..self.pos + 4]
                .try_into()
                .expect("four bytes"),
        );
        self.pos += 4;
        v
    }

    fn f64s(&self, count: usize) -> Result<Vec<f64>> {
        let expected = self.pos + 8 * count;
        if self.bytes.len() < expected {
            return Err(HarnessError::Truncated {
                expected,
                found: self.bytes.len(),
            });
        }
        if self.bytes.len() > expected {
            return Err(HarnessError::TrailingBytes(self.bytes.len() - expected));
        }
        Ok(self.bytes[self.pos..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("eight bytes")))
            .collect())
    }
}

fn check_version(v: u32) -> Result<()> {
    if v != VERSION {
        return Err(HarnessError::BadVersion(v));
    }
    Ok(())
}

fn check_n(n: u32) -> Result<usize> {
    if n as usize > MAX_N {
        return Err(HarnessError::BadSize(n));
    }
    Ok(n as usize)
}

pub fn image_from_bytes(bytes: &[u8]) -> Result<Image> {
    let mut r = Reader::header(bytes, IMAGE_MAGIC, 12)?;
    check_version(r.u32())?;
    let n = check_n(r.u32())?;
    let pixels = r.f64s(1 << (2 * n))?;
    Ok(Image::from_pixels(n, pixels)?)
}

pub fn data_from_bytes(bytes: &[u8]) -> Result<AdrtData> {
    let mut r = Reader::header(bytes, DATA_MAGIC, 16)?;
    check_version(r.u32())?;
    let n = check_n(r.u32())?;
    let m = r.u32() as usize;
    if m > n {
        return Err(adrt::Error::InvalidLevel { n, m }.into());
    }
    let values = r.f64s(4 * QuadrantData::entry_count(n, m))?;
    if values.iter().any(|v| !v.is_finite()) {
        return Err(adrt::Error::NonFinite.into());
    }
    Ok(AdrtData::from_values(n, m, &values)?)
}

/// Writes `bytes` to a temporary sibling file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let io_err = |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| HarnessError::Invalid(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(
        ".{}.tmp{}",
        name.to_string_lossy(),
        std::process::id()
    ));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(io_err)
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_image(path: &Path) -> Result<Image> {
    image_from_bytes(&read_file(path)?)
}

pub fn write_image(path: &Path, img: &Image) -> Result<()> {
    write_atomic(path, &image_to_bytes(img))
}

pub fn read_data(path: &Path) -> Result<AdrtData> {
    data_from_bytes(&read_file(path)?)
}

pub fn write_data(path: &Path, d: &AdrtData) -> Result<()> {
    write_atomic(path, &data_to_bytes(d))
}

pub const METRICS_HEADER: [&str; 9] = [
    "method",
    "n",
    "noise_kind",
    "noise_level",
    "seed",
    "max_err",
    "l2_err",
    "rel_l2",
    "seconds",
];

/// One row of the metrics CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub method: String,
    pub n: usize,
    pub noise_kind: String,
    pub noise_level: f64,
    pub seed: u64,
    pub max_err: f64,
    pub l2_err: f64,
    pub rel_l2: f64,
    pub seconds: f64,
}

impl MetricsRow {
    fn record(&self) -> [String; 9] {
        [
            self.method.clone(),
            self.n.to_string(),
            self.noise_kind.clone(),
            format!("{:e}", self.noise_level),
            self.seed.to_string(),
            format!("{:e}", self.max_err),
            format!("{:e}", self.l2_err),
            format!("{:e}", self.rel_l2),
            format!("{:.6}", self.seconds),
        ]
    }
}

/// CSV text with the metrics header and one line per row.
pub fn metrics_csv(rows: &[MetricsRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(METRICS_HEADER)?;
    for r in rows {
        w.write_record(r.record())?;
    }
    csv_string(w)
}

pub(crate) fn csv_string(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| HarnessError::Invalid(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| HarnessError::Invalid(e.to_string()))
}
