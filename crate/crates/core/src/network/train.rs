//! Online backpropagation with an optional momentum term.
//!
//! For output neuron `j` the local gradient is `y_j (1 - y_j) (d_j - y_j)`; for
//! hidden neuron `j` it is `y_j (1 - y_j) * sum_k delta_k w_kj` over the output
//! neurons `k` fed by `j`. Every weight then moves by
//! `eta * delta_j * y_i + alpha * (previous change of that weight)`.

use rand::seq::SliceRandom;
use serde::Serialize;

use super::{check_len, FeedForwardNet, LayerWeights, NetworkError};
use crate::scalar::Scalar;
use crate::seed::{derive_seed, rng_from_seed, stream};

/// Hyperparameters for [`train`]. Defaults: eta 0.2, alpha 0.1, MSE threshold
/// 0.001, 50000 epochs, seed 42, init range 0.5, shuffling on.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainingConfig<T> {
    pub eta: T,
    /// `0` disables momentum exactly.
    pub alpha: T,
    pub mse_threshold: T,
    pub max_epochs: usize,
    pub seed: u64,
    pub init_range: T,
    pub shuffle_each_epoch: bool,
}

impl<T: Scalar> Default for TrainingConfig<T> {
    fn default() -> Self {
        Self {
            eta: T::lit(0.2),
            alpha: T::lit(0.1),
            mse_threshold: T::lit(0.001),
            max_epochs: 50_000,
            seed: 42,
            init_range: T::lit(0.5),
            shuffle_each_epoch: true,
        }
    }
}

impl<T: Scalar> TrainingConfig<T> {
    pub fn validate(&self) -> Result<(), NetworkError> {
        let bad = |msg: String| Err(NetworkError::InvalidConfig(msg));
        if !(self.eta.is_finite() && self.eta > T::zero()) {
            return bad(format!("eta must be positive, got {}", self.eta));
        }
        if !(self.alpha >= T::zero() && self.alpha < T::one()) {
            return bad(format!("alpha must lie in [0, 1), got {}", self.alpha));
        }
        if !(self.mse_threshold.is_finite() && self.mse_threshold > T::zero()) {
            return bad(format!(
                "mse_threshold must be positive, got {}",
                self.mse_threshold
            ));
        }
        if self.max_epochs == 0 {
            return bad("max_epochs must be at least 1".into());
        }
        if !(self.init_range.is_finite() && self.init_range > T::zero()) {
            return bad(format!(
                "init_range must be positive, got {}",
                self.init_range
            ));
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }
}

/// Per-epoch error history of one training run.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct TrainingTrace {
    pub epoch_mse: Vec<f64>,
    pub epochs_run: usize,
    pub converged: bool,
}

impl TrainingTrace {
    pub fn final_mse(&self) -> Option<f64> {
        self.epoch_mse.last().copied()
    }
}

/// Local gradient of an output neuron.
#[inline]
pub fn output_delta<T: Scalar>(y: T, d: T) -> T {
    y * (T::one() - y) * (d - y)
}

/// Local gradient of a hidden neuron with output `y`. `downstream_weights[k]`
/// is the weight from this neuron into downstream neuron `k` (no biases).
pub fn hidden_delta<T: Scalar>(
    y: T,
    downstream_deltas: &[T],
    downstream_weights: &[T],
) -> Result<T, NetworkError> {
    check_len(
        "downstream weights",
        downstream_deltas.len(),
        downstream_weights.len(),
    )?;
    let sum = downstream_deltas
        .iter()
        .zip(downstream_weights)
        .fold(T::zero(), |acc, (&d, &w)| acc + d * w);
    Ok(y * (T::one() - y) * sum)
}

/// In-place delta rule with momentum. `change` has the layer's shape, holds
/// the previous step's weight changes on entry and this step's on exit.
pub(crate) fn delta_rule_in_place<T: Scalar>(
    layer: &mut LayerWeights<T>,
    deltas: &[T],
    inputs: &[T],
    eta: T,
    alpha: T,
    change: &mut [T],
) {
    let stride = layer.stride();
    let in_count = layer.in_count();
    let momentum = alpha != T::zero();
    for ((row, prev), &delta) in layer
        .as_mut_slice()
        .chunks_exact_mut(stride)
        .zip(change.chunks_exact_mut(stride))
        .zip(deltas)
    {
        let scaled = eta * delta;
        for i in 0..stride {
            let y = if i < in_count { inputs[i] } else { T::one() };
            let mut c = scaled * y;
            if momentum {
                c = c + alpha * prev[i];
            }
            row[i] = row[i] + c;
            prev[i] = c;
        }
    }
}

/// Functional form of one delta-rule step on a single layer. Returns the
/// updated weights and the weight changes just applied (the next call's
/// `prev_change`).
pub fn apply_delta_rule<T: Scalar>(
    layer: &LayerWeights<T>,
    deltas: &[T],
    inputs: &[T],
    cfg: &TrainingConfig<T>,
    prev_change: &LayerWeights<T>,
) -> Result<(LayerWeights<T>, LayerWeights<T>), NetworkError> {
    check_len("layer deltas", layer.out_count(), deltas.len())?;
    check_len("layer inputs", layer.in_count(), inputs.len())?;
    check_len(
        "previous change rows",
        layer.out_count(),
        prev_change.out_count(),
    )?;
    check_len(
        "previous change columns",
        layer.in_count(),
        prev_change.in_count(),
    )?;
    let mut next = layer.clone();
    let mut change = prev_change.clone();
    delta_rule_in_place(
        &mut next,
        deltas,
        inputs,
        cfg.eta,
        cfg.alpha,
        change.as_mut_slice(),
    );
    Ok((next, change))
}

/// Owns a network during online training and applies one pattern at a time.
pub struct Trainer<T> {
    net: FeedForwardNet<T>,
    eta: T,
    alpha: T,
    hidden_change: Vec<T>,
    output_change: Vec<T>,
    hidden_y: Vec<T>,
    output_y: Vec<T>,
    output_deltas: Vec<T>,
    hidden_deltas: Vec<T>,
}

impl<T: Scalar> Trainer<T> {
    pub fn new(net: FeedForwardNet<T>, cfg: &TrainingConfig<T>) -> Result<Self, NetworkError> {
        cfg.validate()?;
        Ok(Self {
            hidden_change: vec![T::zero(); net.hidden().as_slice().len()],
            output_change: vec![T::zero(); net.output().as_slice().len()],
            hidden_y: Vec::with_capacity(net.hidden_size()),
            output_y: Vec::with_capacity(net.output_size()),
            output_deltas: vec![T::zero(); net.output_size()],
            hidden_deltas: vec![T::zero(); net.hidden_size()],
            eta: cfg.eta,
            alpha: cfg.alpha,
            net,
        })
    }

    pub fn net(&self) -> &FeedForwardNet<T> {
        &self.net
    }

    pub fn into_net(self) -> FeedForwardNet<T> {
        self.net
    }

    /// One forward pass, local gradients, then the update of both layers.
    /// Hidden gradients use the output weights from before this step.
    pub fn step(&mut self, input: &[T], target: &[T]) -> Result<(), NetworkError> {
        check_len("training input", self.net.input_size(), input.len())?;
        check_len("training target", self.net.output_size(), target.len())?;
        self.net
            .forward_into(input, &mut self.hidden_y, &mut self.output_y);

        for ((delta, &y), &d) in self
            .output_deltas
            .iter_mut()
            .zip(&self.output_y)
            .zip(target)
        {
            *delta = output_delta(y, d);
        }
        let out = self.net.output();
        for (j, (delta, &y)) in self
            .hidden_deltas
            .iter_mut()
            .zip(&self.hidden_y)
            .enumerate()
        {
            let sum = self
                .output_deltas
                .iter()
                .enumerate()
                .fold(T::zero(), |acc, (k, &dk)| acc + dk * out.get(k, j));
            *delta = y * (T::one() - y) * sum;
        }

        let (eta, alpha) = (self.eta, self.alpha);
        delta_rule_in_place(
            &mut self.net.output,
            &self.output_deltas,
            &self.hidden_y,
            eta,
            alpha,
            &mut self.output_change,
        );
        delta_rule_in_place(
            &mut self.net.hidden,
            &self.hidden_deltas,
            input,
            eta,
            alpha,
            &mut self.hidden_change,
        );
        Ok(())
    }

    /// Mean over samples and output neurons of `(d - y)^2` with the current weights.
    pub fn dataset_mse<A, B>(&mut self, samples: &[(A, B)]) -> T
    where
        A: AsRef<[T]>,
        B: AsRef<[T]>,
    {
        let mut sum = T::zero();
        for (input, target) in samples {
            self.net
                .forward_into(input.as_ref(), &mut self.hidden_y, &mut self.output_y);
            for (&y, &d) in self.output_y.iter().zip(target.as_ref()) {
                sum = sum + (d - y) * (d - y);
            }
        }
        sum / T::from_usize(samples.len() * self.net.output_size()).unwrap()
    }
}

/// Online training until the post-epoch MSE drops below the threshold or the
/// epoch cap is hit. Presentation order is reshuffled every epoch from a
/// stream derived from `cfg.seed` when `shuffle_each_epoch` is set.
pub fn train<T, A, B>(
    net: FeedForwardNet<T>,
    samples: &[(A, B)],
    cfg: &TrainingConfig<T>,
) -> Result<(FeedForwardNet<T>, TrainingTrace), NetworkError>
where
    T: Scalar,
    A: AsRef<[T]>,
    B: AsRef<[T]>,
{
    cfg.validate()?;
    if samples.is_empty() {
        return Err(NetworkError::EmptyDataset);
    }
    for (input, target) in samples {
        check_len("training input", net.input_size(), input.as_ref().len())?;
        check_len("training target", net.output_size(), target.as_ref().len())?;
        if input.as_ref().iter().any(|v| !v.is_finite()) {
            return Err(NetworkError::NonFinite("training input"));
        }
        if target
            .as_ref()
            .iter()
            .any(|&d| !(d >= T::zero() && d <= T::one()))
        {
            return Err(NetworkError::InvalidConfig(
                "targets must lie in [0, 1]".into(),
            ));
        }
    }

    let mut trainer = Trainer::new(net, cfg)?;
    let mut rng = rng_from_seed(derive_seed(cfg.seed, stream::SHUFFLE));
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut trace = TrainingTrace::default();

    while trace.epochs_run < cfg.max_epochs {
        if cfg.shuffle_each_epoch {
            order.shuffle(&mut rng);
        }
        for &i in &order {
            let (input, target) = &samples[i];
            trainer.step(input.as_ref(), target.as_ref())?;
        }
        let epoch_mse = trainer.dataset_mse(samples);
        if !epoch_mse.is_finite() {
            return Err(NetworkError::NonFinite("epoch mse"));
        }
        trace.epochs_run += 1;
        trace.epoch_mse.push(epoch_mse.as_f64());
        if epoch_mse < cfg.mse_threshold {
            trace.converged = true;
            break;
        }
    }
    Ok((trainer.into_net(), trace))
}
