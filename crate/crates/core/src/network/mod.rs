//! Fully-connected three-layer feedforward network (input, hidden, output)
//! with unipolar sigmoid activations on every active neuron.
//!
//! Each layer stores an `out x (in + 1)` row-major weight matrix; the last
//! column holds the bias weight, which sees a constant input of 1.0.

mod persist;
mod train;

pub use persist::{load_net, save_net};
pub use train::{
    apply_delta_rule, hidden_delta, output_delta, train, Trainer, TrainingConfig, TrainingTrace,
};

use rand::Rng;
use thiserror::Error;

use crate::scalar::Scalar;
use crate::seed::rng_from_seed;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("empty dataset")]
    EmptyDataset,
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("weight file line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub(crate) fn check_len(
    what: &'static str,
    expected: usize,
    found: usize,
) -> Result<(), NetworkError> {
    if expected == found {
        Ok(())
    } else {
        Err(NetworkError::DimensionMismatch {
            what,
            expected,
            found,
        })
    }
}

/// `1 / (1 + e^-x)`
#[inline]
pub fn sigmoid<T: Scalar>(x: T) -> T {
    T::one() / (T::one() + (-x).exp())
}

/// Mean of squared differences.
pub fn mse<T: Scalar>(outputs: &[T], targets: &[T]) -> Result<T, NetworkError> {
    check_len("mse targets", outputs.len(), targets.len())?;
    if outputs.is_empty() {
        return Err(NetworkError::EmptyDataset);
    }
    let sum = outputs
        .iter()
        .zip(targets)
        .fold(T::zero(), |acc, (&y, &d)| acc + (d - y) * (d - y));
    Ok(sum / T::from_usize(outputs.len()).unwrap())
}

/// Weights of one layer: `out_count` rows of `in_count + 1` values, the last
/// being the bias weight.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerWeights<T> {
    out_count: usize,
    in_count: usize,
    w: Vec<T>,
}

impl<T: Scalar> LayerWeights<T> {
    pub fn zeros(out_count: usize, in_count: usize) -> Self {
        Self {
            out_count,
            in_count,
            w: vec![T::zero(); out_count * (in_count + 1)],
        }
    }

    /// Builds from a row-major `out_count x (in_count + 1)` buffer.
    pub fn from_vec(out_count: usize, in_count: usize, w: Vec<T>) -> Result<Self, NetworkError> {
        check_len("layer weights", out_count * (in_count + 1), w.len())?;
        if w.iter().any(|v| !v.is_finite()) {
            return Err(NetworkError::NonFinite("layer weights"));
        }
        Ok(Self {
            out_count,
            in_count,
            w,
        })
    }

    /// Uniform draws in `[-range, range]`, row by row.
    pub fn random<R: Rng>(out_count: usize, in_count: usize, range: T, rng: &mut R) -> Self {
        let r = range.as_f64();
        let w = (0..out_count * (in_count + 1))
            .map(|_| T::lit(rng.gen_range(-r..=r)))
            .collect();
        Self {
            out_count,
            in_count,
            w,
        }
    }

    pub fn out_count(&self) -> usize {
        self.out_count
    }

    pub fn in_count(&self) -> usize {
        self.in_count
    }

    pub fn stride(&self) -> usize {
        self.in_count + 1
    }

    pub fn as_slice(&self) -> &[T] {
        &self.w
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.w
    }

    /// Weights of neuron `j`, bias last.
    pub fn row(&self, j: usize) -> &[T] {
        let s = self.stride();
        &self.w[j * s..(j + 1) * s]
    }

    #[inline]
    pub fn get(&self, j: usize, i: usize) -> T {
        self.w[j * self.stride() + i]
    }

    #[inline]
    pub fn set(&mut self, j: usize, i: usize, v: T) {
        let s = self.stride();
        self.w[j * s + i] = v;
    }

    /// `sigmoid(w_j . x + bias_j)` for every neuron, written into `out`.
    fn activate_into(&self, input: &[T], out: &mut Vec<T>) {
        out.clear();
        for row in self.w.chunks_exact(self.stride()) {
            let (weights, bias) = row.split_at(self.in_count);
            let net = weights
                .iter()
                .zip(input)
                .fold(T::zero(), |acc, (&w, &x)| acc + w * x)
                + bias[0];
            out.push(sigmoid(net));
        }
    }
}

/// Neuron outputs from one forward pass. `input` excludes the bias 1.0.
#[derive(Debug, Clone, PartialEq)]
pub struct Activations<T> {
    pub input: Vec<T>,
    pub hidden_y: Vec<T>,
    pub output_y: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeedForwardNet<T> {
    input_size: usize,
    hidden: LayerWeights<T>,
    output: LayerWeights<T>,
}

impl<T: Scalar> FeedForwardNet<T> {
    pub fn from_layers(
        hidden: LayerWeights<T>,
        output: LayerWeights<T>,
    ) -> Result<Self, NetworkError> {
        check_len("output layer inputs", hidden.out_count, output.in_count)?;
        Ok(Self {
            input_size: hidden.in_count,
            hidden,
            output,
        })
    }

    pub fn zeros(input: usize, hidden: usize, output: usize) -> Self {
        Self {
            input_size: input,
            hidden: LayerWeights::zeros(hidden, input),
            output: LayerWeights::zeros(output, hidden),
        }
    }

    /// Weights uniform in `[-init_range, init_range]` from a seeded ChaCha8
    /// stream; hidden layer first, then output layer.
    pub fn random(input: usize, hidden: usize, output: usize, init_range: T, seed: u64) -> Self {
        let mut rng = rng_from_seed(seed);
        let h = LayerWeights::random(hidden, input, init_range, &mut rng);
        let o = LayerWeights::random(output, hidden, init_range, &mut rng);
        Self {
            input_size: input,
            hidden: h,
            output: o,
        }
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }

    pub fn hidden_size(&self) -> usize {
        self.hidden.out_count
    }

    pub fn output_size(&self) -> usize {
        self.output.out_count
    }

    pub fn hidden(&self) -> &LayerWeights<T> {
        &self.hidden
    }

    pub fn output(&self) -> &LayerWeights<T> {
        &self.output
    }

    pub fn hidden_mut(&mut self) -> &mut LayerWeights<T> {
        &mut self.hidden
    }

    pub fn output_mut(&mut self) -> &mut LayerWeights<T> {
        &mut self.output
    }

    pub fn forward(&self, input: &[T]) -> Result<Activations<T>, NetworkError> {
        check_len("network input", self.input_size, input.len())?;
        let mut hidden_y = Vec::with_capacity(self.hidden_size());
        let mut output_y = Vec::with_capacity(self.output_size());
        self.forward_into(input, &mut hidden_y, &mut output_y);
        Ok(Activations {
            input: input.to_vec(),
            hidden_y,
            output_y,
        })
    }

    /// Output-layer activations only.
    pub fn predict(&self, input: &[T]) -> Result<Vec<T>, NetworkError> {
        Ok(self.forward(input)?.output_y)
    }

    /// Unchecked forward pass reusing caller buffers.
    pub(crate) fn forward_into(&self, input: &[T], hidden_y: &mut Vec<T>, output_y: &mut Vec<T>) {
        debug_assert_eq!(input.len(), self.input_size);
        self.hidden.activate_into(input, hidden_y);
        self.output.activate_into(hidden_y, output_y);
    }
}
