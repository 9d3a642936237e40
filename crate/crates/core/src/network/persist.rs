//! `FFNET v1` text format.
//!
//! ```text
//! FFNET v1 <input> <hidden> <output>
//! <hidden lines: input + 1 space-separated weights, bias last>
//! <output lines: hidden + 1 space-separated weights, bias last>
//! ```
//!
//! Values use the scalar's shortest round-trip decimal form.

use std::fmt::Write as _;

use super::{FeedForwardNet, LayerWeights, NetworkError};
use crate::scalar::Scalar;

const MAGIC: &str = "FFNET v1";

pub fn save_net<T: Scalar>(net: &FeedForwardNet<T>) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "{MAGIC} {} {} {}",
        net.input_size(),
        net.hidden_size(),
        net.output_size()
    )
    .unwrap();
    for layer in [net.hidden(), net.output()] {
        for j in 0..layer.out_count() {
            let mut first = true;
            for w in layer.row(j) {
                if !first {
                    out.push(' ');
                }
                first = false;
                write!(out, "{w}").unwrap();
            }
            out.push('\n');
        }
    }
    out
}

fn parse_err(line: usize, message: impl Into<String>) -> NetworkError {
    NetworkError::Parse {
        line,
        message: message.into(),
    }
}

pub fn load_net<T: Scalar>(text: &str) -> Result<FeedForwardNet<T>, NetworkError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));

    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let dims = header
        .strip_prefix(MAGIC)
        .ok_or_else(|| parse_err(1, format!("expected `{MAGIC}` header")))?;
    let dims: Vec<usize> = dims
        .split_whitespace()
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| parse_err(1, format!("bad dimension {t:?}")))
        })
        .collect::<Result<_, _>>()?;
    let [input, hidden, output] = dims[..] else {
        return Err(parse_err(1, "header needs exactly three dimensions"));
    };
    if input == 0 || hidden == 0 || output == 0 {
        return Err(parse_err(1, "dimensions must be positive"));
    }

    let mut read_layer =
        |out_count: usize, in_count: usize| -> Result<LayerWeights<T>, NetworkError> {
            let mut w = Vec::with_capacity(out_count * (in_count + 1));
            for _ in 0..out_count {
                let (no, line) = lines
                    .next()
                    .ok_or_else(|| parse_err(0, "unexpected end of file"))?;
                let before = w.len();
                for token in line.split_whitespace() {
                    let v: T = token
                        .parse()
                        .map_err(|_| parse_err(no, format!("bad weight {token:?}")))?;
                    if !v.is_finite() {
                        return Err(parse_err(no, "non-finite weight"));
                    }
                    w.push(v);
                }
                if w.len() - before != in_count + 1 {
                    return Err(NetworkError::DimensionMismatch {
                        what: "weights per line",
                        expected: in_count + 1,
                        found: w.len() - before,
                    });
                }
            }
            LayerWeights::from_vec(out_count, in_count, w)
        };
    let hidden_layer = read_layer(hidden, input)?;
    let output_layer = read_layer(output, hidden)?;

    if let Some((no, _)) = lines.find(|(_, l)| !l.trim().is_empty()) {
        return Err(parse_err(no, "trailing data after output layer"));
    }
    FeedForwardNet::from_layers(hidden_layer, output_layer)
}

impl<T: Scalar> FeedForwardNet<T> {
    /// Loads and checks the `input x hidden x output` shape.
    pub fn load_expecting(
        text: &str,
        input: usize,
        hidden: usize,
        output: usize,
    ) -> Result<Self, NetworkError> {
        let net = load_net::<T>(text)?;
        for (what, expected, found) in [
            ("input size", input, net.input_size()),
            ("hidden size", hidden, net.hidden_size()),
            ("output size", output, net.output_size()),
        ] {
            super::check_len(what, expected, found)?;
        }
        Ok(net)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_and_layout() {
        let hidden = LayerWeights::from_vec(1, 2, vec![0.5, -1.25, 3.0]).unwrap();
        let output = LayerWeights::from_vec(2, 1, vec![0.1, 0.2, 1e-20, -7.0]).unwrap();
        let net = FeedForwardNet::from_layers(hidden, output).unwrap();
        assert_eq!(
            save_net(&net),
            "FFNET v1 2 1 2\n0.5 -1.25 3\n0.1 0.2\n0.00000000000000000001 -7\n"
        );
    }

    #[test]
    fn loader_rejects_mismatches() {
        assert!(load_net::<f64>("FFNET v2 1 1 1\n0 0\n0 0\n").is_err());
        assert!(load_net::<f64>("FFNET v1 1 1\n0 0\n0 0\n").is_err());
        assert!(matches!(
            load_net::<f64>("FFNET v1 1 1 1\n0 0 0\n0 0\n"),
            Err(NetworkError::DimensionMismatch { .. })
        ));
        assert!(load_net::<f64>("FFNET v1 1 1 1\n0 0\n").is_err());
        assert!(load_net::<f64>("FFNET v1 1 1 1\n0 0\n0 0\n1\n").is_err());
        assert!(load_net::<f64>("FFNET v1 1 1 1\n0 x\n0 0\n").is_err());
        assert!(load_net::<f64>("FFNET v1 1 1 1\n0 inf\n0 0\n").is_err());
        assert!(load_net::<f64>("FFNET v1 1 1 1\n0 0\n0 0\n\n").is_ok());
        let text = save_net(&FeedForwardNet::<f64>::zeros(3, 2, 1));
        assert!(FeedForwardNet::<f64>::load_expecting(&text, 3, 2, 1).is_ok());
        assert!(FeedForwardNet::<f64>::load_expecting(&text, 3, 2, 26).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(seed in any::<u64>(), range in 0.001f64..100.0) {
            let net = FeedForwardNet::<f64>::random(6, 4, 3, range, seed);
            let back: FeedForwardNet<f64> = load_net(&save_net(&net)).unwrap();
            prop_assert_eq!(&back, &net);
            let net32 = FeedForwardNet::<f32>::random(6, 4, 3, range as f32, seed);
            let back32: FeedForwardNet<f32> = load_net(&save_net(&net32)).unwrap();
            prop_assert_eq!(back32, net32);
        }
    }
}
