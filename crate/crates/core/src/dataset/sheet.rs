//! Whole-sheet scans cut into a regular grid of character cells.
//!
//! Cell `(r, c)` occupies pixels `[c * cell_width, (c + 1) * cell_width)` by
//! `[r * cell_height, (r + 1) * cell_height)`. Column `c` holds letter `c + 1`.

use rayon::prelude::*;

use super::{Corpus, DatasetError, LabeledSample};
use crate::extraction::{extract_pattern, ExtractionError, PATTERN_COLS, PATTERN_ROWS};
use crate::imaging::{binarize, GrayImage, ImagingError, ThresholdPolicy};
use crate::models::{Label, LABEL_COUNT};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SheetGrid {
    pub rows: usize,
    pub cols: usize,
    pub cell_width: usize,
    pub cell_height: usize,
}

impl SheetGrid {
    /// `rows x 26` cells of `cell_width x cell_height`.
    pub fn alphabet(rows: usize, cell_width: usize, cell_height: usize) -> Self {
        Self {
            rows,
            cols: LABEL_COUNT,
            cell_width,
            cell_height,
        }
    }

    pub fn width(&self) -> usize {
        self.cols * self.cell_width
    }

    pub fn height(&self) -> usize {
        self.rows * self.cell_height
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SkipReason {
    TooSmall(ExtractionError),
    Blank,
    Binarize(ImagingError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkippedCell {
    pub row: usize,
    pub col: usize,
    pub reason: SkipReason,
}

/// Draws every sample of `corpus` into its cell (black ink on white). The
/// pattern sits in the bottom-right corner of the cell, so trimming removes
/// exactly the blank top and left margins.
pub fn render_sheet(corpus: &Corpus, grid: &SheetGrid) -> Result<GrayImage, DatasetError> {
    if grid.cell_width < PATTERN_COLS || grid.cell_height < PATTERN_ROWS {
        return Err(DatasetError::InvalidCorpus(format!(
            "cells of {}x{} cannot hold a {PATTERN_ROWS}x{PATTERN_COLS} pattern",
            grid.cell_height, grid.cell_width
        )));
    }
    if grid.rows < corpus.rows()
        || grid.cols < LABEL_COUNT
        || grid.width() == 0
        || grid.height() == 0
    {
        return Err(DatasetError::InvalidCorpus(
            "grid smaller than the corpus".into(),
        ));
    }
    let mut img = GrayImage::filled(grid.width(), grid.height(), 255);
    let (ox, oy) = (
        grid.cell_width - PATTERN_COLS,
        grid.cell_height - PATTERN_ROWS,
    );
    for s in corpus.samples() {
        let x0 = s.label.index() * grid.cell_width + ox;
        let y0 = s.row_index * grid.cell_height + oy;
        for r in 0..PATTERN_ROWS {
            for c in 0..PATTERN_COLS {
                if s.block.get(r, c) == 1 {
                    img.set(x0 + c, y0 + r, 0);
                }
            }
        }
    }
    Ok(img)
}

/// Binarizes and trims every cell. Cells that are too small, blank after
/// trimming or cannot be binarized are skipped and reported.
pub fn ingest_sheet(
    img: &GrayImage,
    grid: &SheetGrid,
    policy: ThresholdPolicy,
) -> Result<(Corpus, Vec<SkippedCell>), DatasetError> {
    if grid.rows == 0
        || grid.cols == 0
        || grid.cols > LABEL_COUNT
        || grid.cell_width == 0
        || grid.cell_height == 0
        || grid.width() > img.width()
        || grid.height() > img.height()
    {
        return Err(DatasetError::GridMismatch {
            grid_width: grid.width(),
            grid_height: grid.height(),
            width: img.width(),
            height: img.height(),
        });
    }

    let outcomes: Vec<Result<LabeledSample, SkippedCell>> = (0..grid.rows * grid.cols)
        .into_par_iter()
        .map(|i| {
            let (row, col) = (i / grid.cols, i % grid.cols);
            let skip = |reason| SkippedCell { row, col, reason };
            let cell = img
                .crop(
                    col * grid.cell_width,
                    row * grid.cell_height,
                    grid.cell_width,
                    grid.cell_height,
                )
                .expect("grid checked against image bounds");
            let bits = binarize(&cell, policy).map_err(|e| skip(SkipReason::Binarize(e)))?;
            let (block, _) = extract_pattern(&bits).map_err(|e| skip(SkipReason::TooSmall(e)))?;
            if block.is_blank() {
                return Err(skip(SkipReason::Blank));
            }
            let label = Label::from_index(col).expect("cols <= 26");
            Ok(LabeledSample {
                block,
                label,
                row_index: row,
            })
        })
        .collect();

    let mut samples = Vec::new();
    let mut skipped = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok(s) => samples.push(s),
            Err(s) => {
                log::warn!("skipping cell row {} col {}: {:?}", s.row, s.col, s.reason);
                skipped.push(s);
            }
        }
    }
    Ok((Corpus::new(samples, grid.rows)?, skipped))
}
