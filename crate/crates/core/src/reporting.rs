//! Accuracy reports and plot-ready CSV.
//!
//! CSV uses `,` separators and `\n` line endings; every field is a number or
//! a single letter, so nothing is quoted. Floats use shortest round-trip form.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::dataset::Corpus;
use crate::models::{Detail, Label, ModelKind, Recognizer, LABEL_COUNT};
use crate::network::TrainingTrace;
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("cannot evaluate on an empty corpus")]
    EmptyDataset,
    #[error("write failed: {0}")]
    IoFailure(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub model_kind: ModelKind,
    pub samples: usize,
    pub overall_accuracy: f64,
    /// `None` for letters absent from the corpus.
    pub per_label_accuracy: Vec<Option<f64>>,
    /// `confusion[true - 1][predicted - 1]`
    pub confusion: Vec<Vec<u64>>,
    /// Two-stage models only.
    pub group_accuracy: Option<f64>,
    /// Position accuracy over correctly grouped samples; `None` if there were none.
    pub position_accuracy: Option<f64>,
}

impl EvaluationReport {
    /// Builds the accuracies from a filled confusion matrix.
    pub fn from_confusion(
        model_kind: ModelKind,
        confusion: Vec<Vec<u64>>,
    ) -> Result<Self, ReportError> {
        let total: u64 = confusion.iter().flatten().sum();
        if total == 0 {
            return Err(ReportError::EmptyDataset);
        }
        let correct: u64 = (0..LABEL_COUNT).map(|k| confusion[k][k]).sum();
        let per_label_accuracy = confusion
            .iter()
            .enumerate()
            .map(|(k, row)| {
                let n: u64 = row.iter().sum();
                (n > 0).then(|| row[k] as f64 / n as f64)
            })
            .collect();
        Ok(Self {
            model_kind,
            samples: total as usize,
            overall_accuracy: correct as f64 / total as f64,
            per_label_accuracy,
            confusion,
            group_accuracy: None,
            position_accuracy: None,
        })
    }
}

/// Runs `model` over every sample of `corpus`.
pub fn evaluate<T: Scalar, M: Recognizer<T>>(
    model: &M,
    corpus: &Corpus,
) -> Result<EvaluationReport, ReportError> {
    if corpus.is_empty() {
        return Err(ReportError::EmptyDataset);
    }
    let results: Vec<(Label, Label, Option<usize>)> = corpus
        .samples()
        .par_iter()
        .map(|s| {
            let r = model.recognize(&s.block);
            let group = match r.detail {
                Detail::Hierarchical { group, .. } => Some(group),
                _ => None,
            };
            (s.label, r.predicted, group)
        })
        .collect();

    let mut confusion = vec![vec![0u64; LABEL_COUNT]; LABEL_COUNT];
    for &(truth, predicted, _) in &results {
        confusion[truth.index()][predicted.index()] += 1;
    }
    let mut report = EvaluationReport::from_confusion(model.kind(), confusion)?;

    if let Some(grouping) = model.grouping() {
        let mut grouped = 0u64;
        let mut positioned = 0u64;
        for &(truth, predicted, group) in &results {
            if group == Some(grouping.locate(truth).0) {
                grouped += 1;
                if predicted == truth {
                    positioned += 1;
                }
            }
        }
        report.group_accuracy = Some(grouped as f64 / results.len() as f64);
        report.position_accuracy = (grouped > 0).then(|| positioned as f64 / grouped as f64);
    }
    Ok(report)
}

/// `epoch,mse` then one row per epoch (1-based).
pub fn write_trace_csv<W: Write>(trace: &TrainingTrace, mut out: W) -> Result<(), ReportError> {
    out.write_all(b"epoch,mse\n")?;
    for (i, mse) in trace.epoch_mse.iter().enumerate() {
        writeln!(out, "{},{}", i + 1, mse)?;
    }
    out.flush()?;
    Ok(())
}

/// Per-letter accuracy rows, a confusion block (`true,A,...,Z` header, one
/// row per true letter) and summary rows (`overall`, plus `group` and
/// `position` for two-stage models). Undefined accuracies are empty fields.
pub fn write_report_csv<W: Write>(
    report: &EvaluationReport,
    mut out: W,
) -> Result<(), ReportError> {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    out.write_all(b"label,accuracy\n")?;
    for (label, acc) in Label::all().zip(&report.per_label_accuracy) {
        writeln!(out, "{label},{}", opt(*acc))?;
    }
    let header: Vec<String> = Label::all().map(|l| l.to_string()).collect();
    writeln!(out, "true,{}", header.join(","))?;
    for (label, row) in Label::all().zip(&report.confusion) {
        let counts: Vec<String> = row.iter().map(u64::to_string).collect();
        writeln!(out, "{label},{}", counts.join(","))?;
    }
    writeln!(out, "overall,{}", report.overall_accuracy)?;
    if report.model_kind == ModelKind::Hierarchical {
        writeln!(out, "group,{}", opt(report.group_accuracy))?;
        writeln!(out, "position,{}", opt(report.position_accuracy))?;
    }
    out.flush()?;
    Ok(())
}

pub fn trace_csv(trace: &TrainingTrace) -> String {
    let mut buf = Vec::new();
    write_trace_csv(trace, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii")
}

pub fn report_csv(report: &EvaluationReport) -> String {
    let mut buf = Vec::new();
    write_report_csv(report, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii")
}
