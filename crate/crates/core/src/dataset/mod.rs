//! Labeled pattern corpora: a synthetic generator, the row-based
//! train/test split, the `CORPUS v1` text format and sheet ingestion.
//!
//! A corpus mimics a handwriting sheet on which every letter A..Z is written
//! once per row; `row_index` records the sheet row a sample came from.

mod glyphs;
mod sheet;

pub use glyphs::template;
pub use sheet::{ingest_sheet, render_sheet, SheetGrid, SkipReason, SkippedCell};

use std::collections::HashSet;
use std::fmt::Write as _;

use rand::Rng;
use thiserror::Error;

use crate::extraction::{PatternBlock, PATTERN_COLS, PATTERN_LEN, PATTERN_ROWS};
use crate::imaging::ImagingError;
use crate::models::Label;
use crate::seed::rng_from_seed;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DatasetError {
    #[error("need {needed} rows but corpus has {available}")]
    InsufficientRows { needed: usize, available: usize },
    #[error("invalid corpus: {0}")]
    InvalidCorpus(String),
    #[error("invalid noise spec: {0}")]
    InvalidNoise(String),
    #[error("grid {grid_width}x{grid_height} does not fit image {width}x{height}")]
    GridMismatch {
        grid_width: usize,
        grid_height: usize,
        width: usize,
        height: usize,
    },
    #[error("corpus file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Imaging(#[from] ImagingError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledSample {
    pub block: PatternBlock,
    pub label: Label,
    /// 0-based sheet row.
    pub row_index: usize,
}

/// Samples from `rows` sheet rows; each `(row_index, label)` at most once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    samples: Vec<LabeledSample>,
    rows: usize,
}

impl Corpus {
    pub fn new(samples: Vec<LabeledSample>, rows: usize) -> Result<Self, DatasetError> {
        if rows == 0 {
            return Err(DatasetError::InvalidCorpus(
                "rows must be at least 1".into(),
            ));
        }
        let mut seen = HashSet::new();
        for s in &samples {
            if s.row_index >= rows {
                return Err(DatasetError::InvalidCorpus(format!(
                    "row index {} >= {rows}",
                    s.row_index
                )));
            }
            if !seen.insert((s.row_index, s.label)) {
                return Err(DatasetError::InvalidCorpus(format!(
                    "duplicate ({}, {})",
                    s.row_index, s.label
                )));
            }
        }
        Ok(Self { samples, rows })
    }

    pub fn samples(&self) -> &[LabeledSample] {
        &self.samples
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Train = rows `< train_rows`; test = rows `>= rows - test_rows`.
    /// Both parts keep the original row indices and row count.
    pub fn split(
        &self,
        train_rows: usize,
        test_rows: usize,
    ) -> Result<(Corpus, Corpus), DatasetError> {
        let needed = train_rows + test_rows;
        if needed > self.rows {
            return Err(DatasetError::InsufficientRows {
                needed,
                available: self.rows,
            });
        }
        let test_start = self.rows - test_rows;
        let part = |keep: &dyn Fn(usize) -> bool| Corpus {
            samples: self
                .samples
                .iter()
                .filter(|s| keep(s.row_index))
                .cloned()
                .collect(),
            rows: self.rows,
        };
        Ok((part(&|r| r < train_rows), part(&|r| r >= test_start)))
    }

    /// `CORPUS v1 <rows> <count>` then `row,label,<500 bits>` per sample.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(32 + self.samples.len() * (PATTERN_LEN + 8));
        writeln!(out, "CORPUS v1 {} {}", self.rows, self.samples.len()).unwrap();
        for s in &self.samples {
            writeln!(
                out,
                "{},{},{}",
                s.row_index,
                s.label,
                s.block.to_bit_string()
            )
            .unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, DatasetError> {
        let err = |line: usize, message: String| DatasetError::Parse { line, message };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let (_, header) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let (rows, count) = match fields[..] {
            ["CORPUS", "v1", rows, count] => (
                rows.parse::<usize>()
                    .map_err(|_| err(1, format!("bad row count {rows:?}")))?,
                count
                    .parse::<usize>()
                    .map_err(|_| err(1, format!("bad sample count {count:?}")))?,
            ),
            _ => return Err(err(1, "expected `CORPUS v1 <rows> <count>` header".into())),
        };
        let mut samples = Vec::with_capacity(count);
        for (no, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.splitn(3, ',');
            let (Some(row), Some(label), Some(bits)) = (parts.next(), parts.next(), parts.next())
            else {
                return Err(err(no, "expected row,label,bits".into()));
            };
            let row_index = row
                .parse()
                .map_err(|_| err(no, format!("bad row {row:?}")))?;
            let label = label.parse::<Label>().map_err(|e| err(no, e.to_string()))?;
            let block = PatternBlock::from_bit_str(bits).map_err(|e| err(no, e.to_string()))?;
            samples.push(LabeledSample {
                block,
                label,
                row_index,
            });
        }
        if samples.len() != count {
            return Err(err(
                0,
                format!("header declares {count} samples, found {}", samples.len()),
            ));
        }
        Corpus::new(samples, rows)
    }
}

/// Distortions applied to templates by [`generate_synthetic`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    /// Per-pixel flip probability, in `[0, 0.5)`.
    pub flip_prob: f64,
    /// Maximum translation in pixels along each axis, `0..=3`.
    pub jitter: usize,
    pub seed: u64,
}

pub const MAX_JITTER: usize = 3;

impl NoiseSpec {
    pub fn none() -> Self {
        Self {
            flip_prob: 0.0,
            jitter: 0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), DatasetError> {
        if !(self.flip_prob >= 0.0 && self.flip_prob < 0.5) {
            return Err(DatasetError::InvalidNoise(format!(
                "flip_prob {} not in [0, 0.5)",
                self.flip_prob
            )));
        }
        if self.jitter > MAX_JITTER {
            return Err(DatasetError::InvalidNoise(format!(
                "jitter {} exceeds {MAX_JITTER}",
                self.jitter
            )));
        }
        Ok(())
    }
}

/// Moves ink by `(dx, dy)`; ink leaving the frame is dropped.
pub fn translate(block: &PatternBlock, dx: isize, dy: isize) -> PatternBlock {
    let mut out = PatternBlock::blank();
    for r in 0..PATTERN_ROWS {
        for c in 0..PATTERN_COLS {
            let (sr, sc) = (r as isize - dy, c as isize - dx);
            if (0..PATTERN_ROWS as isize).contains(&sr) && (0..PATTERN_COLS as isize).contains(&sc)
            {
                out.set(r, c, block.get(sr as usize, sc as usize) == 1);
            }
        }
    }
    out
}

/// `rows` sheet rows of A..Z. Per sample, in order: `dx` then `dy` drawn
/// uniformly from `-jitter..=jitter` (when jitter > 0), then one uniform draw
/// per pixel for flips (when flip_prob > 0). All draws come from one ChaCha8
/// stream seeded with `noise.seed`.
pub fn generate_synthetic(rows: usize, noise: &NoiseSpec) -> Result<Corpus, DatasetError> {
    noise.validate()?;
    if rows == 0 {
        return Err(DatasetError::InvalidCorpus(
            "rows must be at least 1".into(),
        ));
    }
    let mut rng = rng_from_seed(noise.seed);
    let j = noise.jitter as isize;
    let mut samples = Vec::with_capacity(rows * 26);
    for row_index in 0..rows {
        for label in Label::all() {
            let mut block = template(label).clone();
            if j > 0 {
                let dx = rng.gen_range(-j..=j);
                let dy = rng.gen_range(-j..=j);
                block = translate(&block, dx, dy);
            }
            if noise.flip_prob > 0.0 {
                for r in 0..PATTERN_ROWS {
                    for c in 0..PATTERN_COLS {
                        if rng.gen::<f64>() < noise.flip_prob {
                            block.set(r, c, block.get(r, c) == 0);
                        }
                    }
                }
            }
            samples.push(LabeledSample {
                block,
                label,
                row_index,
            });
        }
    }
    Corpus::new(samples, rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_noise_reproduces_templates() {
        let c = generate_synthetic(3, &NoiseSpec::none()).unwrap();
        assert_eq!(c.len(), 78);
        for s in c.samples() {
            assert_eq!(&s.block, template(s.label));
        }
    }

    #[test]
    fn sizes_and_determinism() {
        let noise = NoiseSpec {
            flip_prob: 0.02,
            jitter: 1,
            seed: 7,
        };
        let a = generate_synthetic(15, &noise).unwrap();
        assert_eq!(a.len(), 390);
        assert_eq!(a, generate_synthetic(15, &noise).unwrap());
        assert_ne!(
            a,
            generate_synthetic(15, &NoiseSpec { seed: 8, ..noise }).unwrap()
        );
    }

    #[test]
    fn noise_validation() {
        assert!(generate_synthetic(
            1,
            &NoiseSpec {
                flip_prob: 0.5,
                jitter: 0,
                seed: 0
            }
        )
        .is_err());
        assert!(generate_synthetic(
            1,
            &NoiseSpec {
                flip_prob: 0.0,
                jitter: 4,
                seed: 0
            }
        )
        .is_err());
        assert!(generate_synthetic(0, &NoiseSpec::none()).is_err());
    }

    #[test]
    fn paper_split_sizes() {
        let c = generate_synthetic(15, &NoiseSpec::none()).unwrap();
        let (train, test) = c.split(10, 5).unwrap();
        assert_eq!((train.len(), test.len()), (260, 130));
        assert!(train.samples().iter().all(|s| s.row_index < 10));
        assert!(test.samples().iter().all(|s| s.row_index >= 10));
        assert_eq!(
            c.split(15, 1),
            Err(DatasetError::InsufficientRows {
                needed: 16,
                available: 15
            })
        );
    }

    #[test]
    fn translate_moves_ink() {
        let mut b = PatternBlock::blank();
        b.set(0, 0, true);
        b.set(24, 19, true);
        let t = translate(&b, 1, 2);
        assert_eq!(t.get(2, 1), 1);
        assert_eq!(t.ink_count(), 1);
    }

    #[test]
    fn corpus_invariants() {
        let s = LabeledSample {
            block: PatternBlock::blank(),
            label: Label::new(1).unwrap(),
            row_index: 0,
        };
        assert!(Corpus::new(vec![s.clone(), s.clone()], 1).is_err());
        assert!(Corpus::new(
            vec![LabeledSample {
                row_index: 1,
                ..s.clone()
            }],
            1
        )
        .is_err());
        assert!(Corpus::new(vec![s], 0).is_err());
    }

    #[test]
    fn corpus_text_errors() {
        assert!(Corpus::from_text("").is_err());
        assert!(Corpus::from_text("CORPUS v2 1 0\n").is_err());
        assert!(Corpus::from_text("CORPUS v1 1 1\n").is_err());
        assert!(Corpus::from_text(&format!("CORPUS v1 1 1\n0,?,{}\n", "0".repeat(500))).is_err());
        assert!(Corpus::from_text(&format!("CORPUS v1 1 1\n0,A,{}\n", "0".repeat(499))).is_err());
        assert!(Corpus::from_text(&format!("CORPUS v1 1 1\n0,A,{}\n", "0".repeat(500))).is_ok());
        assert!(Corpus::from_text("FFNET v1 1 1 1\n").is_err());
    }

    proptest! {
        #[test]
        fn corpus_text_round_trip(rows in 1usize..4, flip in 0.0f64..0.3, jitter in 0usize..=3, seed in any::<u64>()) {
            let c = generate_synthetic(rows, &NoiseSpec { flip_prob: flip, jitter, seed }).unwrap();
            let text = c.to_text();
            let back = Corpus::from_text(&text).unwrap();
            prop_assert_eq!(&back, &c);
            prop_assert_eq!(back.to_text(), text);
        }

        #[test]
        fn split_is_disjoint_and_exhaustive(rows in 1usize..8, train in 0usize..8) {
            let c = generate_synthetic(rows, &NoiseSpec::none()).unwrap();
            let train = train.min(rows);
            let test = rows - train;
            let (a, b) = c.split(train, test).unwrap();
            prop_assert_eq!(a.len() + b.len(), c.len());
            let keys: HashSet<_> = a.samples().iter().map(|s| (s.row_index, s.label)).collect();
            prop_assert!(b.samples().iter().all(|s| !keys.contains(&(s.row_index, s.label))));
        }
    }
}
