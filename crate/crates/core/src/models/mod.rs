//! The three recognizers built on [`crate::network`].
//!
//! * [`DirectModel`]: one 500-H-26 network, argmax over 26 outputs.
//! * [`CorrelationModel`]: 26 single-output networks, one per letter, each
//!   trained one-vs-rest; the letter whose network answers highest wins.
//! * [`HierarchicalModel`]: a group network picks one of 11 groups, then a
//!   per-group network picks the position inside it.
//!
//! Every argmax breaks ties toward the lowest index.

mod bundle;
mod correlation;
mod direct;
mod hierarchical;

pub use bundle::{load_bundle, read_manifest, save_bundle, Manifest};
pub use correlation::{one_vs_rest_targets, train_correlation, CorrelationModel};
pub use direct::{train_direct, DirectModel};
pub use hierarchical::{
    train_hierarchical, GroupingScheme, HierarchicalModel, HierarchicalTraces, GROUP_COUNT,
};

use serde::Serialize;
use thiserror::Error;

use crate::dataset::LabeledSample;
use crate::extraction::{flatten, PatternBlock};
use crate::network::{NetworkError, TrainingConfig};
use crate::scalar::Scalar;

/// Number of distinct letters, A..=Z.
pub const LABEL_COUNT: usize = 26;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("empty dataset")]
    EmptyDataset,
    #[error("group {group} ({letters}) has no training samples")]
    EmptyGroup { group: usize, letters: String },
    #[error("invalid grouping: {0}")]
    InvalidGrouping(String),
    #[error("invalid label: {0}")]
    InvalidLabel(String),
    #[error("invalid model structure: {0}")]
    Structure(String),
    #[error("model bundle: {0}")]
    Bundle(String),
    #[error("i/o error on {path}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// Letter label, `A = 1` through `Z = 26`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(u8);

impl Label {
    pub fn new(value: u8) -> Result<Self, ModelError> {
        if (1..=LABEL_COUNT as u8).contains(&value) {
            Ok(Label(value))
        } else {
            Err(ModelError::InvalidLabel(value.to_string()))
        }
    }

    /// From a 0-based index.
    pub fn from_index(index: usize) -> Result<Self, ModelError> {
        if index < LABEL_COUNT {
            Ok(Label(index as u8 + 1))
        } else {
            Err(ModelError::InvalidLabel(format!("index {index}")))
        }
    }

    pub fn from_letter(c: char) -> Result<Self, ModelError> {
        let upper = c.to_ascii_uppercase();
        if upper.is_ascii_uppercase() {
            Ok(Label(upper as u8 - b'A' + 1))
        } else {
            Err(ModelError::InvalidLabel(c.to_string()))
        }
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    pub fn letter(self) -> char {
        (b'A' + self.0 - 1) as char
    }

    pub fn all() -> impl Iterator<Item = Label> {
        (1..=LABEL_COUNT as u8).map(Label)
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl std::str::FromStr for Label {
    type Err = ModelError;

    /// A single letter or a number in 1..=26.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let mut chars = s.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) if c.is_ascii_alphabetic() => Label::from_letter(c),
            _ => s
                .parse::<u8>()
                .map_err(|_| ModelError::InvalidLabel(s.to_string()))
                .and_then(Label::new),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Direct,
    Correlation,
    Hierarchical,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Direct => "direct",
            ModelKind::Correlation => "correlation",
            ModelKind::Hierarchical => "hierarchical",
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ModelKind {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "direct" => Ok(ModelKind::Direct),
            "correlation" => Ok(ModelKind::Correlation),
            "hierarchical" => Ok(ModelKind::Hierarchical),
            other => Err(ModelError::Bundle(format!("unknown model kind {other:?}"))),
        }
    }
}

/// Model-specific part of a [`RecognitionResult`].
#[derive(Debug, Clone, PartialEq)]
pub enum Detail<T> {
    Direct,
    /// The 26 per-letter network outputs.
    Correlation {
        degrees: Vec<T>,
    },
    Hierarchical {
        group: usize,
        group_scores: Vec<T>,
        position: usize,
        position_scores: Vec<T>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecognitionResult<T> {
    pub predicted: Label,
    /// Scores of the final decision stage.
    pub scores: Vec<T>,
    pub detail: Detail<T>,
}

/// Index of the largest score; the first one wins ties. Panics on empty input.
pub fn argmax<T: PartialOrd + Copy>(scores: &[T]) -> usize {
    assert!(!scores.is_empty(), "argmax of empty scores");
    let mut best = 0;
    for (i, s) in scores.iter().enumerate().skip(1) {
        if *s > scores[best] {
            best = i;
        }
    }
    best
}

pub fn one_hot<T: Scalar>(index: usize, len: usize) -> Vec<T> {
    let mut v = vec![T::zero(); len];
    v[index] = T::one();
    v
}

pub trait Recognizer<T: Scalar>: Sync {
    fn kind(&self) -> ModelKind;

    fn recognize(&self, block: &PatternBlock) -> RecognitionResult<T>;

    /// Letter groups, for two-stage models.
    fn grouping(&self) -> Option<&GroupingScheme> {
        None
    }
}

/// Network width plus training hyperparameters shared by all sub-networks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelConfig<T> {
    pub hidden: usize,
    pub training: TrainingConfig<T>,
}

impl<T: Scalar> Default for ModelConfig<T> {
    fn default() -> Self {
        Self {
            hidden: 50,
            training: TrainingConfig::default(),
        }
    }
}

impl<T: Scalar> ModelConfig<T> {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.hidden == 0 {
            return Err(
                NetworkError::InvalidConfig("hidden size must be at least 1".into()).into(),
            );
        }
        Ok(self.training.validate()?)
    }
}

/// Any of the three recognizers.
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone, PartialEq)]
pub enum Model<T> {
    Direct(DirectModel<T>),
    Correlation(CorrelationModel<T>),
    Hierarchical(HierarchicalModel<T>),
}

impl<T: Scalar> Recognizer<T> for Model<T> {
    fn kind(&self) -> ModelKind {
        match self {
            Model::Direct(m) => m.kind(),
            Model::Correlation(m) => m.kind(),
            Model::Hierarchical(m) => m.kind(),
        }
    }

    fn recognize(&self, block: &PatternBlock) -> RecognitionResult<T> {
        match self {
            Model::Direct(m) => m.recognize(block),
            Model::Correlation(m) => m.recognize(block),
            Model::Hierarchical(m) => m.recognize(block),
        }
    }

    fn grouping(&self) -> Option<&GroupingScheme> {
        match self {
            Model::Hierarchical(m) => Some(m.grouping_scheme()),
            _ => None,
        }
    }
}

/// Flattened inputs for a training set.
pub(crate) fn inputs_of<T: Scalar>(samples: &[LabeledSample]) -> Result<Vec<Vec<T>>, ModelError> {
    if samples.is_empty() {
        return Err(ModelError::EmptyDataset);
    }
    Ok(samples.iter().map(|s| flatten(&s.block)).collect())
}

pub(crate) fn warn_missing_labels(samples: &[LabeledSample], context: &str) {
    let mut seen = [false; LABEL_COUNT];
    for s in samples {
        seen[s.label.index()] = true;
    }
    let missing: String = Label::all()
        .filter(|l| !seen[l.index()])
        .map(|l| l.letter())
        .collect();
    if !missing.is_empty() {
        log::warn!("{context}: no training samples for {missing}");
    }
}
