//! Trimming roughly-cropped character blocks down to the fixed 25x20 pattern.
//!
//! Rows and columns without ink have zero standard deviation while any row or
//! column crossing a stroke has a positive one. Trimming therefore removes, one
//! edge at a time, whichever opposite edge has the smaller standard deviation,
//! until the block is exactly [`PATTERN_ROWS`] x [`PATTERN_COLS`]. Only edges are
//! ever removed, so the glyph is never sheared.

use serde::Serialize;
use thiserror::Error;

use crate::imaging::BinaryImage;
use crate::scalar::Scalar;

pub const PATTERN_ROWS: usize = 25;
pub const PATTERN_COLS: usize = 20;
/// Length of a flattened pattern, the network input width.
pub const PATTERN_LEN: usize = PATTERN_ROWS * PATTERN_COLS;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExtractionError {
    #[error(
        "block of {height}x{width} is smaller than the required {PATTERN_ROWS}x{PATTERN_COLS}"
    )]
    BlockTooSmall { height: usize, width: usize },
    #[error("expected {PATTERN_LEN} values in {{0,1}}, got {0}")]
    BadPattern(String),
}

/// A 25x20 binary character pattern, row-major, `1` = ink.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PatternBlock {
    bits: [u8; PATTERN_LEN],
}

impl PatternBlock {
    pub fn blank() -> Self {
        Self {
            bits: [0; PATTERN_LEN],
        }
    }

    pub fn from_bits(bits: &[u8]) -> Result<Self, ExtractionError> {
        if bits.len() != PATTERN_LEN {
            return Err(ExtractionError::BadPattern(format!(
                "length {}",
                bits.len()
            )));
        }
        if bits.iter().any(|&b| b > 1) {
            return Err(ExtractionError::BadPattern("value outside {0,1}".into()));
        }
        let mut out = [0u8; PATTERN_LEN];
        out.copy_from_slice(bits);
        Ok(Self { bits: out })
    }

    /// Parses 500 `'0'`/`'1'` characters.
    pub fn from_bit_str(s: &str) -> Result<Self, ExtractionError> {
        let bits: Option<Vec<u8>> = s
            .bytes()
            .map(|c| match c {
                b'0' => Some(0),
                b'1' => Some(1),
                _ => None,
            })
            .collect();
        match bits {
            Some(bits) => Self::from_bits(&bits),
            None => Err(ExtractionError::BadPattern("non-binary character".into())),
        }
    }

    pub fn to_bit_string(&self) -> String {
        self.bits
            .iter()
            .map(|&b| if b == 1 { '1' } else { '0' })
            .collect()
    }

    pub fn bits(&self) -> &[u8; PATTERN_LEN] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.bits[row * PATTERN_COLS + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, ink: bool) {
        self.bits[row * PATTERN_COLS + col] = ink as u8;
    }

    pub fn ink_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    pub fn is_blank(&self) -> bool {
        self.bits.iter().all(|&b| b == 0)
    }

    pub fn to_image(&self) -> BinaryImage {
        BinaryImage::new(PATTERN_COLS, PATTERN_ROWS, self.bits.to_vec())
            .expect("pattern dimensions are valid")
    }

    /// Inverse of [`flatten`]; values must be exactly 0 or 1.
    pub fn unflatten<T: Scalar>(values: &[T]) -> Result<Self, ExtractionError> {
        let bits: Option<Vec<u8>> = values
            .iter()
            .map(|&v| {
                if v == T::zero() {
                    Some(0)
                } else if v == T::one() {
                    Some(1)
                } else {
                    None
                }
            })
            .collect();
        match bits {
            Some(bits) => Self::from_bits(&bits),
            None => Err(ExtractionError::BadPattern("value outside {0,1}".into())),
        }
    }
}

impl std::fmt::Debug for PatternBlock {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "PatternBlock {{")?;
        for row in self.bits.chunks(PATTERN_COLS) {
            let line: String = row
                .iter()
                .map(|&b| if b == 1 { '#' } else { '.' })
                .collect();
            writeln!(f, "  {line}")?;
        }
        write!(f, "}}")
    }
}

/// What the trimming removed, plus the edge statistics of the result.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrimReport {
    pub rows_removed_top: usize,
    pub rows_removed_bottom: usize,
    pub cols_removed_left: usize,
    pub cols_removed_right: usize,
    pub final_row_stddevs: Vec<f64>,
    pub final_col_stddevs: Vec<f64>,
}

impl TrimReport {
    pub fn removed_total(&self) -> usize {
        self.rows_removed_top
            + self.rows_removed_bottom
            + self.cols_removed_left
            + self.cols_removed_right
    }
}

/// Population standard deviation.
fn population_stddev<T: Scalar>(values: impl Iterator<Item = u8> + Clone) -> T {
    let mut n = 0usize;
    let mut sum = T::zero();
    for v in values.clone() {
        sum = sum + T::from_u8(v).unwrap();
        n += 1;
    }
    if n == 0 {
        return T::zero();
    }
    let count = T::from_usize(n).unwrap();
    let mean = sum / count;
    let mut sq = T::zero();
    for v in values {
        let d = T::from_u8(v).unwrap() - mean;
        sq = sq + d * d;
    }
    (sq / count).sqrt()
}

/// Rectangular window over a binary image.
#[derive(Clone, Copy)]
struct Window {
    top: usize,
    bottom: usize, // exclusive
    left: usize,
    right: usize, // exclusive
}

impl Window {
    fn height(&self) -> usize {
        self.bottom - self.top
    }

    fn width(&self) -> usize {
        self.right - self.left
    }
}

fn row_sd<T: Scalar>(img: &BinaryImage, win: Window, y: usize) -> T {
    population_stddev((win.left..win.right).map(move |x| img.get(x, y)))
}

fn col_sd<T: Scalar>(img: &BinaryImage, win: Window, x: usize) -> T {
    population_stddev((win.top..win.bottom).map(move |y| img.get(x, y)))
}

/// Population standard deviation of each row's bits.
pub fn row_stddevs<T: Scalar>(img: &BinaryImage) -> Vec<T> {
    let win = Window {
        top: 0,
        bottom: img.height(),
        left: 0,
        right: img.width(),
    };
    (0..img.height()).map(|y| row_sd(img, win, y)).collect()
}

/// Population standard deviation of each column's bits.
pub fn col_stddevs<T: Scalar>(img: &BinaryImage) -> Vec<T> {
    let win = Window {
        top: 0,
        bottom: img.height(),
        left: 0,
        right: img.width(),
    };
    (0..img.width()).map(|x| col_sd(img, win, x)).collect()
}

/// Trims `img` to exactly 25x20, or rejects it when it is smaller.
///
/// Each iteration removes one row (while taller than 25) and then one column
/// (while wider than 20). Between the two candidate edges the one with the
/// smaller standard deviation, measured over the current window, goes; ties
/// remove the top row or the left column.
pub fn extract_pattern(img: &BinaryImage) -> Result<(PatternBlock, TrimReport), ExtractionError> {
    if img.height() < PATTERN_ROWS || img.width() < PATTERN_COLS {
        return Err(ExtractionError::BlockTooSmall {
            height: img.height(),
            width: img.width(),
        });
    }

    let mut win = Window {
        top: 0,
        bottom: img.height(),
        left: 0,
        right: img.width(),
    };
    let mut report = TrimReport {
        rows_removed_top: 0,
        rows_removed_bottom: 0,
        cols_removed_left: 0,
        cols_removed_right: 0,
        final_row_stddevs: Vec::new(),
        final_col_stddevs: Vec::new(),
    };

    while win.height() > PATTERN_ROWS || win.width() > PATTERN_COLS {
        if win.height() > PATTERN_ROWS {
            let top: f64 = row_sd(img, win, win.top);
            let bottom: f64 = row_sd(img, win, win.bottom - 1);
            if top <= bottom {
                win.top += 1;
                report.rows_removed_top += 1;
            } else {
                win.bottom -= 1;
                report.rows_removed_bottom += 1;
            }
        }
        if win.width() > PATTERN_COLS {
            let left: f64 = col_sd(img, win, win.left);
            let right: f64 = col_sd(img, win, win.right - 1);
            if left <= right {
                win.left += 1;
                report.cols_removed_left += 1;
            } else {
                win.right -= 1;
                report.cols_removed_right += 1;
            }
        }
    }

    let mut block = PatternBlock::blank();
    for r in 0..PATTERN_ROWS {
        for c in 0..PATTERN_COLS {
            block.set(r, c, img.get(win.left + c, win.top + r) == 1);
        }
    }
    report.final_row_stddevs = (win.top..win.bottom).map(|y| row_sd(img, win, y)).collect();
    report.final_col_stddevs = (win.left..win.right).map(|x| col_sd(img, win, x)).collect();
    Ok((block, report))
}

/// Row-major 500-vector of 0.0 / 1.0.
pub fn flatten<T: Scalar>(block: &PatternBlock) -> Vec<T> {
    block
        .bits
        .iter()
        .map(|&b| if b == 1 { T::one() } else { T::zero() })
        .collect()
}
