use super::{
    argmax, inputs_of, one_hot, warn_missing_labels, Detail, Label, ModelConfig, ModelError,
    ModelKind, RecognitionResult, Recognizer, LABEL_COUNT,
};
use crate::dataset::LabeledSample;
use crate::extraction::{flatten, PatternBlock, PATTERN_LEN};
use crate::network::{train, FeedForwardNet, TrainingTrace};
use crate::scalar::Scalar;
use crate::seed::{derive_seed, stream};

/// One network with an output neuron per letter.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectModel<T> {
    net: FeedForwardNet<T>,
}

impl<T: Scalar> DirectModel<T> {
    pub fn new(net: FeedForwardNet<T>) -> Result<Self, ModelError> {
        if net.input_size() != PATTERN_LEN || net.output_size() != LABEL_COUNT {
            return Err(ModelError::Structure(format!(
                "direct model needs {PATTERN_LEN} inputs and {LABEL_COUNT} outputs, got {}x{}",
                net.input_size(),
                net.output_size()
            )));
        }
        Ok(Self { net })
    }

    pub fn net(&self) -> &FeedForwardNet<T> {
        &self.net
    }
}

impl<T: Scalar> Recognizer<T> for DirectModel<T> {
    fn kind(&self) -> ModelKind {
        ModelKind::Direct
    }

    fn recognize(&self, block: &PatternBlock) -> RecognitionResult<T> {
        let scores = self
            .net
            .predict(&flatten(block))
            .expect("direct net takes a flattened pattern");
        let predicted = Label::from_index(argmax(&scores)).expect("26 outputs");
        RecognitionResult {
            predicted,
            scores,
            detail: Detail::Direct,
        }
    }
}

/// Trains the 26-way network on one-hot targets.
pub fn train_direct<T: Scalar>(
    samples: &[LabeledSample],
    cfg: &ModelConfig<T>,
) -> Result<(DirectModel<T>, TrainingTrace), ModelError> {
    cfg.validate()?;
    let inputs = inputs_of::<T>(samples)?;
    warn_missing_labels(samples, "direct model");
    let data: Vec<(&[T], Vec<T>)> = inputs
        .iter()
        .zip(samples)
        .map(|(x, s)| (x.as_slice(), one_hot(s.label.index(), LABEL_COUNT)))
        .collect();

    let seed = derive_seed(cfg.training.seed, stream::DIRECT);
    let net = FeedForwardNet::random(
        PATTERN_LEN,
        cfg.hidden,
        LABEL_COUNT,
        cfg.training.init_range,
        seed,
    );
    let (net, trace) = train(net, &data, &cfg.training.with_seed(seed))?;
    Ok((DirectModel::new(net)?, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::LayerWeights;

    /// A direct model whose output biases are `biases` and all other weights 0,
    /// so every block scores `sigmoid(biases)`.
    fn biased(biases: &[f64]) -> DirectModel<f64> {
        let hidden = LayerWeights::zeros(1, PATTERN_LEN);
        let mut output = LayerWeights::zeros(LABEL_COUNT, 1);
        for (k, &b) in biases.iter().enumerate() {
            output.set(k, 1, b);
        }
        DirectModel::new(FeedForwardNet::from_layers(hidden, output).unwrap()).unwrap()
    }

    #[test]
    fn recognizes_argmax_of_outputs() {
        let mut b = vec![-2.0; 26];
        b[0] = 2.0;
        assert_eq!(
            biased(&b)
                .recognize(&PatternBlock::blank())
                .predicted
                .letter(),
            'A'
        );
        let mut b = vec![-2.0; 26];
        b[2] = 1.0;
        b[5] = 1.0;
        let r = biased(&b).recognize(&PatternBlock::blank());
        assert_eq!(r.predicted.value(), 3);
        assert_eq!(r.scores.len(), 26);
    }

    #[test]
    fn rejects_wrong_shape() {
        assert!(DirectModel::new(FeedForwardNet::<f64>::zeros(500, 5, 11)).is_err());
        assert!(DirectModel::new(FeedForwardNet::<f64>::zeros(499, 5, 26)).is_err());
    }

    #[test]
    fn empty_training_set() {
        assert!(matches!(
            train_direct::<f64>(&[], &ModelConfig::default()),
            Err(ModelError::EmptyDataset)
        ));
    }
}
