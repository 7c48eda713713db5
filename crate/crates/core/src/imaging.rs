//! Grayscale images, PGM/PNG file I/O and histogram equalization.

use std::fs;
use std::io::Cursor;
use std::path::Path;

use crate::error::{Error, Result};

/// An 8-bit grayscale image stored row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!(
                "dimensions must be positive, got {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "expected {} pixels for {width}x{height}, got {}",
                width * height,
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Image with every pixel set to `value`.
    ///
    /// Panics if either dimension is zero.
    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    /// Builds an image by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: u8) {
        self.data[y * self.width + x] = value;
    }

    /// Pixel lookup with edge replication for out-of-range coordinates.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> u8 {
        let cx = x.clamp(0, self.width as isize - 1) as usize;
        let cy = y.clamp(0, self.height as isize - 1) as usize;
        self.data[cy * self.width + cx]
    }

    /// Copies a `w`x`h` region whose top-left corner is at (`x0`, `y0`),
    /// replicating edge pixels where the region leaves the image.
    pub fn region_clamped(&self, x0: isize, y0: isize, w: usize, h: usize) -> GrayImage {
        GrayImage::from_fn(w, h, |x, y| {
            self.get_clamped(x0 + x as isize, y0 + y as isize)
        })
    }

    pub fn histogram(&self) -> Histogram {
        let mut counts = [0u64; 256];
        for &v in &self.data {
            counts[v as usize] += 1;
        }
        Histogram {
            counts,
            total: self.data.len() as u64,
        }
    }
}

/// 256-bin intensity histogram.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    pub counts: [u64; 256],
    pub total: u64,
}

impl Histogram {
    /// Cumulative counts, `cdf[v] = #pixels <= v`.
    pub fn cumulative(&self) -> [u64; 256] {
        let mut cdf = [0u64; 256];
        let mut acc = 0;
        for (c, &n) in cdf.iter_mut().zip(self.counts.iter()) {
            acc += n;
            *c = acc;
        }
        cdf
    }
}

/// What a [`FeatureMap`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MapKind {
    MaxProbability,
    Variance,
    Correlation,
    Entropy,
    GradientMagnitude,
}

/// Real-valued per-pixel map with the dimensions of its source image.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
    pub kind: MapKind,
}

impl FeatureMap {
    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageFormat {
    Pgm,
    Png,
}

impl ImageFormat {
    /// Guesses the format from a file extension; anything but `.png` is PGM.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("png") => ImageFormat::Png,
            _ => ImageFormat::Pgm,
        }
    }
}

const PNG_SIGNATURE: [u8; 8] = [0x89, b'P', b'N', b'G', 0x0d, 0x0a, 0x1a, 0x0a];

pub fn load_image(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_image(&bytes)
}

/// Decodes a binary PGM or 8-bit grayscale PNG from memory.
pub fn decode_image(bytes: &[u8]) -> Result<GrayImage> {
    if bytes.starts_with(&PNG_SIGNATURE) {
        decode_png(bytes)
    } else {
        decode_pgm(bytes)
    }
}

pub fn save_image(img: &GrayImage, path: impl AsRef<Path>, format: ImageFormat) -> Result<()> {
    let path = path.as_ref();
    let bytes = match format {
        ImageFormat::Pgm => encode_pgm(img),
        ImageFormat::Png => encode_png(img)?,
    };
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let header = format!("P5\n{} {}\n255\n", img.width, img.height);
    let mut out = Vec::with_capacity(header.len() + img.data.len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(&img.data);
    out
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderCursor<'_> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::MalformedFile(format!("missing {what} in PGM header")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::MalformedFile(format!("{what} out of range in PGM header")))
    }
}

pub fn decode_pgm(bytes: &[u8]) -> Result<GrayImage> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(Error::MalformedFile(
            "expected binary PGM magic \"P5\"".into(),
        ));
    }
    let mut cur = HeaderCursor { bytes, pos: 2 };
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval = cur.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::MalformedFile(format!(
            "zero dimension {width}x{height}"
        )));
    }
    if maxval != 255 {
        return Err(Error::UnsupportedDepth(format!(
            "PGM maxval {maxval}, only 255 is supported"
        )));
    }
    match bytes.get(cur.pos) {
        Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
        _ => {
            return Err(Error::MalformedFile(
                "missing whitespace after PGM maxval".into(),
            ))
        }
    }
    let n = width
        .checked_mul(height)
        .ok_or_else(|| Error::MalformedFile("image dimensions overflow".into()))?;
    let payload = &bytes[cur.pos..];
    if payload.len() < n {
        return Err(Error::MalformedFile(format!(
            "PGM payload has {} bytes, expected {n}",
            payload.len()
        )));
    }
    GrayImage::new(width, height, payload[..n].to_vec())
}

fn decode_png(bytes: &[u8]) -> Result<GrayImage> {
    let malformed = |e: png::DecodingError| Error::MalformedFile(format!("png: {e}"));
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::IDENTITY);
    let mut reader = decoder.read_info().map_err(malformed)?;
    let (color, depth) = {
        let info = reader.info();
        (info.color_type, info.bit_depth)
    };
    if color != png::ColorType::Grayscale || depth != png::BitDepth::Eight {
        return Err(Error::UnsupportedDepth(format!(
            "png is {color:?} at {depth:?}, expected 8-bit grayscale"
        )));
    }
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::MalformedFile("png frame too large".into()))?;
    let mut buf = vec![0u8; size];
    let frame = reader.next_frame(&mut buf).map_err(malformed)?;
    let (w, h) = (frame.width as usize, frame.height as usize);
    let mut data = Vec::with_capacity(w * h);
    for row in buf.chunks(frame.line_size).take(h) {
        data.extend_from_slice(&row[..w]);
    }
    GrayImage::new(w, h, data)
}

fn encode_png(img: &GrayImage) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    let failed = |e: png::EncodingError| {
        Error::io("<png encoder>", std::io::Error::other(e.to_string()))
    };
    {
        let mut encoder = png::Encoder::new(&mut out, img.width as u32, img.height as u32);
        encoder.set_color(png::ColorType::Grayscale);
        encoder.set_depth(png::BitDepth::Eight);
        let mut writer = encoder.write_header().map_err(failed)?;
        writer.write_image_data(&img.data).map_err(failed)?;
        writer.finish().map_err(failed)?;
    }
    Ok(out)
}

/// Lookup table for histogram equalization.
///
/// `lut[v] = round(255 * (cdf(v) - cdf_min) / (N - cdf_min))`, where `cdf_min`
/// is the cumulative count of the lowest occupied bin. A single occupied bin
/// maps everything to 0.
pub fn equalization_lut(hist: &Histogram) -> [u8; 256] {
    let cdf = hist.cumulative();
    let cdf_min = hist
        .counts
        .iter()
        .position(|&c| c > 0)
        .map_or(0, |v| cdf[v]);
    let span = hist.total.saturating_sub(cdf_min);
    let mut lut = [0u8; 256];
    if span == 0 {
        return lut;
    }
    for (out, &c) in lut.iter_mut().zip(cdf.iter()) {
        let above = c.saturating_sub(cdf_min);
        *out = ((255 * above) as f64 / span as f64).round() as u8;
    }
    lut
}

pub fn histogram_equalize(img: &GrayImage) -> GrayImage {
    let lut = equalization_lut(&img.histogram());
    GrayImage {
        width: img.width,
        height: img.height,
        data: img.data.iter().map(|&v| lut[v as usize]).collect(),
    }
}
