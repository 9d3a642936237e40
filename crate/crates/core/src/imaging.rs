//! Grayscale scans and their binary (ink / paper) form.
//!
//! Input is restricted to Netpbm graymaps, `P2` (ASCII) and `P5` (raw), with
//! `maxval <= 255`. Pixel values are kept exactly as stored; no rescaling to
//! the full 0..=255 range is done for smaller `maxval`.

use thiserror::Error;

/// Default cap on `width * height` accepted by [`parse_pgm`].
pub const DEFAULT_MAX_PIXELS: usize = 64 * 1024 * 1024;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ImagingError {
    #[error("malformed PGM header: {0}")]
    MalformedHeader(String),
    #[error("truncated pixel data: expected {expected} pixels, found {found}")]
    TruncatedPixelData { expected: usize, found: usize },
    #[error("unsupported maxval {0} (must be 1..=255)")]
    UnsupportedMaxval(u32),
    #[error("image of {width}x{height} exceeds the {cap} pixel cap")]
    DimensionOverflow {
        width: usize,
        height: usize,
        cap: usize,
    },
    #[error("invalid pixel value {value:?} at index {index}")]
    InvalidPixel { index: usize, value: String },
    #[error("cannot pick an Otsu threshold: every pixel has intensity {0}")]
    DegenerateImage(u8),
    #[error("threshold level {0} out of range 0..=255")]
    InvalidThreshold(u32),
    #[error("pixel buffer of length {len} does not match {width}x{height}")]
    BadDimensions {
        width: usize,
        height: usize,
        len: usize,
    },
}

/// Row-major 8-bit grayscale image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self, ImagingError> {
        if width == 0 || height == 0 || width.checked_mul(height) != Some(pixels.len()) {
            return Err(ImagingError::BadDimensions {
                width,
                height,
                len: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// A `width x height` image filled with `value`.
    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        Self {
            width,
            height,
            pixels: vec![value; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: u8) {
        self.pixels[y * self.width + x] = value;
    }

    /// Copies the `width x height` region whose top-left corner is `(x, y)`.
    /// Returns `None` when the region is empty or leaves the image.
    pub fn crop(&self, x: usize, y: usize, width: usize, height: usize) -> Option<GrayImage> {
        if width == 0 || height == 0 || x + width > self.width || y + height > self.height {
            return None;
        }
        let mut pixels = Vec::with_capacity(width * height);
        for row in y..y + height {
            let start = row * self.width + x;
            pixels.extend_from_slice(&self.pixels[start..start + width]);
        }
        Some(GrayImage {
            width,
            height,
            pixels,
        })
    }

    /// Photographic negative (`255 - v`).
    pub fn inverted(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|&v| 255 - v).collect(),
        }
    }

    pub fn histogram(&self) -> [u64; 256] {
        let mut hist = [0u64; 256];
        for &v in &self.pixels {
            hist[v as usize] += 1;
        }
        hist
    }
}

/// Row-major binary image, `1` = ink.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    bits: Vec<u8>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize, bits: Vec<u8>) -> Result<Self, ImagingError> {
        if width == 0 || height == 0 || width.checked_mul(height) != Some(bits.len()) {
            return Err(ImagingError::BadDimensions {
                width,
                height,
                len: bits.len(),
            });
        }
        if let Some(index) = bits.iter().position(|&b| b > 1) {
            return Err(ImagingError::InvalidPixel {
                index,
                value: bits[index].to_string(),
            });
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        Self {
            width,
            height,
            bits: vec![0; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.bits[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, ink: bool) {
        self.bits[y * self.width + x] = ink as u8;
    }

    pub fn transpose(&self) -> BinaryImage {
        let mut bits = Vec::with_capacity(self.bits.len());
        for x in 0..self.width {
            for y in 0..self.height {
                bits.push(self.get(x, y));
            }
        }
        BinaryImage {
            width: self.height,
            height: self.width,
            bits,
        }
    }

    pub fn ink_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }
}

/// How grayscale intensities become ink bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdPolicy {
    /// Ink iff `intensity < level`.
    Fixed(u8),
    /// Histogram-derived level maximizing between-class variance.
    Otsu,
}

impl ThresholdPolicy {
    /// Validating constructor for a fixed level; 256 and above are rejected.
    pub fn fixed(level: u32) -> Result<Self, ImagingError> {
        u8::try_from(level)
            .map(ThresholdPolicy::Fixed)
            .map_err(|_| ImagingError::InvalidThreshold(level))
    }
}

impl Default for ThresholdPolicy {
    fn default() -> Self {
        ThresholdPolicy::Fixed(128)
    }
}

impl std::str::FromStr for ThresholdPolicy {
    type Err = ImagingError;

    /// Accepts `otsu` or a decimal level.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("otsu") {
            return Ok(ThresholdPolicy::Otsu);
        }
        let level: u32 = s
            .parse()
            .map_err(|_| ImagingError::MalformedHeader(format!("bad threshold {s:?}")))?;
        ThresholdPolicy::fixed(level)
    }
}

/// Otsu level for the `ink iff intensity < t` convention.
///
/// Candidates are `t = 1..=255`; the first (lowest) `t` with maximal
/// between-class variance wins.
pub fn otsu_level(img: &GrayImage) -> Result<u8, ImagingError> {
    let hist = img.histogram();
    let first = img.pixels[0];
    if hist[first as usize] as usize == img.pixels.len() {
        return Err(ImagingError::DegenerateImage(first));
    }

    let total = img.pixels.len() as f64;
    let total_sum: f64 = hist
        .iter()
        .enumerate()
        .map(|(v, &c)| v as f64 * c as f64)
        .sum();

    let mut below_count = 0u64;
    let mut below_sum = 0f64;
    let mut best_level = 1u8;
    let mut best_var = f64::NEG_INFINITY;
    for t in 1..=255usize {
        below_count += hist[t - 1];
        below_sum += (t - 1) as f64 * hist[t - 1] as f64;
        let n0 = below_count as f64;
        let n1 = total - n0;
        if below_count == 0 || n1 == 0.0 {
            continue;
        }
        let mean0 = below_sum / n0;
        let mean1 = (total_sum - below_sum) / n1;
        let w0 = n0 / total;
        let w1 = n1 / total;
        let var = w0 * w1 * (mean0 - mean1) * (mean0 - mean1);
        if var > best_var {
            best_var = var;
            best_level = t as u8;
        }
    }
    Ok(best_level)
}

/// Maps intensities to ink bits: `1` iff `intensity < threshold`.
pub fn binarize(img: &GrayImage, policy: ThresholdPolicy) -> Result<BinaryImage, ImagingError> {
    let level = match policy {
        ThresholdPolicy::Fixed(level) => level,
        ThresholdPolicy::Otsu => otsu_level(img)?,
    };
    let bits = img.pixels.iter().map(|&v| (v < level) as u8).collect();
    Ok(BinaryImage {
        width: img.width,
        height: img.height,
        bits,
    })
}

/// Renders bits back to grayscale: ink 0 (black), paper 255 (white).
pub fn render_binary(img: &BinaryImage) -> GrayImage {
    GrayImage {
        width: img.width,
        height: img.height,
        pixels: img
            .bits
            .iter()
            .map(|&b| if b == 1 { 0 } else { 255 })
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgmEncoding {
    /// `P2`
    Ascii,
    /// `P5`
    Raw,
}

pub fn parse_pgm(bytes: &[u8]) -> Result<GrayImage, ImagingError> {
    parse_pgm_with_cap(bytes, DEFAULT_MAX_PIXELS)
}

pub fn parse_pgm_with_cap(bytes: &[u8], max_pixels: usize) -> Result<GrayImage, ImagingError> {
    let mut cur = Cursor { bytes, pos: 0 };
    let encoding = match bytes.get(..2) {
        Some(b"P2") => PgmEncoding::Ascii,
        Some(b"P5") => PgmEncoding::Raw,
        _ => return Err(ImagingError::MalformedHeader("missing P2/P5 magic".into())),
    };
    cur.pos = 2;
    if !cur
        .peek()
        .is_some_and(|b| b.is_ascii_whitespace() || b == b'#')
    {
        return Err(ImagingError::MalformedHeader(
            "magic not followed by whitespace".into(),
        ));
    }

    let width = cur.header_number("width")?;
    let height = cur.header_number("height")?;
    let maxval = cur.header_number("maxval")?;
    if width == 0 || height == 0 {
        return Err(ImagingError::MalformedHeader(format!(
            "zero dimension {width}x{height}"
        )));
    }
    if maxval == 0 || maxval > 255 {
        return Err(ImagingError::UnsupportedMaxval(
            maxval.min(u32::MAX as u64) as u32
        ));
    }
    let (width, height) = (width as usize, height as usize);
    let count = match width.checked_mul(height) {
        Some(n) if n <= max_pixels => n,
        _ => {
            return Err(ImagingError::DimensionOverflow {
                width,
                height,
                cap: max_pixels,
            })
        }
    };
    let maxval = maxval as u8;

    let pixels = match encoding {
        PgmEncoding::Raw => {
            // Exactly one whitespace byte separates maxval from the raster.
            match cur.peek() {
                Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
                _ => {
                    return Err(ImagingError::MalformedHeader(
                        "maxval not followed by whitespace".into(),
                    ))
                }
            }
            let raster = &bytes[cur.pos..];
            if raster.len() < count {
                return Err(ImagingError::TruncatedPixelData {
                    expected: count,
                    found: raster.len(),
                });
            }
            let raster = &raster[..count];
            if let Some(index) = raster.iter().position(|&v| v > maxval) {
                return Err(ImagingError::InvalidPixel {
                    index,
                    value: raster[index].to_string(),
                });
            }
            raster.to_vec()
        }
        PgmEncoding::Ascii => {
            let mut pixels = Vec::with_capacity(count);
            while pixels.len() < count {
                cur.skip_whitespace();
                let Some(token) = cur.token() else {
                    return Err(ImagingError::TruncatedPixelData {
                        expected: count,
                        found: pixels.len(),
                    });
                };
                let value = std::str::from_utf8(token)
                    .ok()
                    .and_then(|t| t.parse::<u16>().ok())
                    .filter(|&v| v <= maxval as u16);
                match value {
                    Some(v) => pixels.push(v as u8),
                    None => {
                        return Err(ImagingError::InvalidPixel {
                            index: pixels.len(),
                            value: String::from_utf8_lossy(token).into_owned(),
                        })
                    }
                }
            }
            pixels
        }
    };
    Ok(GrayImage {
        width,
        height,
        pixels,
    })
}

/// Serializes with `maxval` 255.
pub fn write_pgm(img: &GrayImage, encoding: PgmEncoding) -> Vec<u8> {
    let mut out = Vec::with_capacity(img.pixels.len() * 4 + 32);
    let magic = match encoding {
        PgmEncoding::Ascii => "P2",
        PgmEncoding::Raw => "P5",
    };
    out.extend_from_slice(format!("{magic}\n{} {}\n255\n", img.width, img.height).as_bytes());
    match encoding {
        PgmEncoding::Raw => out.extend_from_slice(&img.pixels),
        PgmEncoding::Ascii => {
            for row in img.pixels.chunks(img.width) {
                let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                out.extend_from_slice(line.join(" ").as_bytes());
                out.push(b'\n');
            }
        }
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn skip_whitespace(&mut self) {
        while self.peek().is_some_and(|b| b.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    /// Whitespace and `#`-to-end-of-line comments.
    fn skip_header_filler(&mut self) {
        loop {
            self.skip_whitespace();
            if self.peek() == Some(b'#') {
                while self.peek().is_some_and(|b| b != b'\n') {
                    self.pos += 1;
                }
            } else {
                return;
            }
        }
    }

    fn token(&mut self) -> Option<&'a [u8]> {
        let start = self.pos;
        while self.peek().is_some_and(|b| !b.is_ascii_whitespace()) {
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.bytes[start..self.pos])
    }

    fn header_number(&mut self, what: &str) -> Result<u64, ImagingError> {
        self.skip_header_filler();
        let start = self.pos;
        while self.peek().is_some_and(|b| b.is_ascii_digit()) {
            self.pos += 1;
        }
        let digits = &self.bytes[start..self.pos];
        let terminated = self
            .peek()
            .is_none_or(|b| b.is_ascii_whitespace() || b == b'#');
        if digits.is_empty() || !terminated {
            return Err(ImagingError::MalformedHeader(format!("bad {what} token")));
        }
        std::str::from_utf8(digits)
            .ok()
            .and_then(|s| s.parse::<u64>().ok())
            .ok_or_else(|| ImagingError::MalformedHeader(format!("{what} out of range")))
    }
}
