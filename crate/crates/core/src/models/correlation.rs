use rayon::prelude::*;

use super::{
    argmax, inputs_of, warn_missing_labels, Detail, Label, ModelConfig, ModelError, ModelKind,
    RecognitionResult, Recognizer, LABEL_COUNT,
};
use crate::dataset::LabeledSample;
use crate::extraction::{flatten, PatternBlock, PATTERN_LEN};
use crate::network::{train, FeedForwardNet, TrainingTrace};
use crate::scalar::Scalar;
use crate::seed::{derive_seed, stream};

/// 26 single-output networks; network `k` answers "how much does this look
/// like letter `k + 1`".
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationModel<T> {
    nets: Vec<FeedForwardNet<T>>,
}

impl<T: Scalar> CorrelationModel<T> {
    pub fn new(nets: Vec<FeedForwardNet<T>>) -> Result<Self, ModelError> {
        if nets.len() != LABEL_COUNT {
            return Err(ModelError::Structure(format!(
                "correlation model needs 26 nets, got {}",
                nets.len()
            )));
        }
        if let Some(k) = nets
            .iter()
            .position(|n| n.input_size() != PATTERN_LEN || n.output_size() != 1)
        {
            return Err(ModelError::Structure(format!(
                "net {k} is not {PATTERN_LEN}-input single-output"
            )));
        }
        Ok(Self { nets })
    }

    pub fn nets(&self) -> &[FeedForwardNet<T>] {
        &self.nets
    }

    pub fn net(&self, label: Label) -> &FeedForwardNet<T> {
        &self.nets[label.index()]
    }

    /// Output of every letter's network on `block`.
    pub fn degrees(&self, block: &PatternBlock) -> Vec<T> {
        let x = flatten(block);
        self.nets
            .iter()
            .map(|n| n.predict(&x).expect("pattern-sized input")[0])
            .collect()
    }
}

impl<T: Scalar> Recognizer<T> for CorrelationModel<T> {
    fn kind(&self) -> ModelKind {
        ModelKind::Correlation
    }

    fn recognize(&self, block: &PatternBlock) -> RecognitionResult<T> {
        let degrees = self.degrees(block);
        let predicted = Label::from_index(argmax(&degrees)).expect("26 nets");
        RecognitionResult {
            predicted,
            scores: degrees.clone(),
            detail: Detail::Correlation { degrees },
        }
    }
}

/// Target of `label`'s network for every sample: 1 on that letter, 0 otherwise.
pub fn one_vs_rest_targets<T: Scalar>(samples: &[LabeledSample], label: Label) -> Vec<T> {
    samples
        .iter()
        .map(|s| {
            if s.label == label {
                T::one()
            } else {
                T::zero()
            }
        })
        .collect()
}

/// Trains each letter's network one-vs-rest: target 1 on that letter's
/// samples, 0 on all others. Networks train in parallel with seeds derived
/// from the configured seed and the letter, so results do not depend on
/// scheduling.
pub fn train_correlation<T: Scalar>(
    samples: &[LabeledSample],
    cfg: &ModelConfig<T>,
) -> Result<(CorrelationModel<T>, Vec<TrainingTrace>), ModelError> {
    cfg.validate()?;
    let inputs = inputs_of::<T>(samples)?;
    warn_missing_labels(samples, "correlation model");

    let trained: Vec<(FeedForwardNet<T>, TrainingTrace)> = (0..LABEL_COUNT)
        .into_par_iter()
        .map(|k| {
            let label = Label::from_index(k).expect("k < 26");
            let data: Vec<(&[T], [T; 1])> = inputs
                .iter()
                .zip(one_vs_rest_targets::<T>(samples, label))
                .map(|(x, d)| (x.as_slice(), [d]))
                .collect();
            let seed = derive_seed(cfg.training.seed, stream::CORRELATION + k as u64);
            let net =
                FeedForwardNet::random(PATTERN_LEN, cfg.hidden, 1, cfg.training.init_range, seed);
            train(net, &data, &cfg.training.with_seed(seed))
        })
        .collect::<Result<_, _>>()?;

    let (nets, traces): (Vec<_>, Vec<_>) = trained.into_iter().unzip();
    Ok((CorrelationModel::new(nets)?, traces))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::LayerWeights;

    fn constant_net(bias: f64) -> FeedForwardNet<f64> {
        let hidden = LayerWeights::zeros(1, PATTERN_LEN);
        let output = LayerWeights::from_vec(1, 1, vec![0.0, bias]).unwrap();
        FeedForwardNet::from_layers(hidden, output).unwrap()
    }

    fn model(biases: &[f64]) -> CorrelationModel<f64> {
        CorrelationModel::new(biases.iter().map(|&b| constant_net(b)).collect()).unwrap()
    }

    #[test]
    fn highest_degree_wins() {
        let mut b = vec![-1.5; 26];
        b[0] = -1.0;
        b[1] = 3.0;
        b[2] = -2.0;
        let r = model(&b).recognize(&PatternBlock::blank());
        assert_eq!(r.predicted.value(), 2);
        match r.detail {
            Detail::Correlation { degrees } => assert_eq!(degrees, r.scores),
            other => panic!("unexpected detail {other:?}"),
        }
    }

    #[test]
    fn equal_degrees_pick_a() {
        assert_eq!(
            model(&[0.3; 26])
                .recognize(&PatternBlock::blank())
                .predicted
                .letter(),
            'A'
        );
    }

    #[test]
    fn permuting_nets_permutes_scores() {
        let biases: Vec<f64> = (0..26).map(|k| (k as f64 * 0.37).sin()).collect();
        let m = model(&biases);
        let rev: Vec<f64> = biases.iter().rev().copied().collect();
        let mr = model(&rev);
        let s = m.degrees(&PatternBlock::blank());
        let mut sr = mr.degrees(&PatternBlock::blank());
        sr.reverse();
        assert_eq!(s, sr);
    }

    #[test]
    fn structure_is_checked() {
        assert!(CorrelationModel::new(vec![constant_net(0.0); 25]).is_err());
        let mut nets = vec![constant_net(0.0); 26];
        nets[3] = FeedForwardNet::zeros(PATTERN_LEN, 2, 2);
        assert!(CorrelationModel::new(nets).is_err());
    }
}
