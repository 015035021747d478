//! Feed-forward control policies with parameters packed as a flat genotype.

use crate::error::{Error, Result};
use crate::types::Genotype;

/// MLP with tanh on every hidden and output layer, so outputs are bounded
/// in [-1, 1]. Weights and biases are read from a flat parameter vector in
/// layer order: weights (input-major) then biases.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PolicyNet {
    pub layer_sizes: Vec<usize>,
}

impl PolicyNet {
    pub fn new(layer_sizes: Vec<usize>) -> Self {
        assert!(layer_sizes.len() >= 2);
        Self { layer_sizes }
    }

    /// Total parameter count (weights + biases).
    pub fn param_count(&self) -> usize {
        self.layer_sizes
            .windows(2)
            .map(|w| w[0] * w[1] + w[1])
            .sum()
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    /// Forward pass. Errors if the genotype length does not match the
    /// architecture or the output is not finite.
    pub fn forward(&self, genotype: &Genotype, input: &[f64]) -> Result<Vec<f64>> {
        if genotype.dim() != self.param_count() {
            return Err(Error::DimensionMismatch {
                expected: self.param_count(),
                got: genotype.dim(),
            });
        }
        assert_eq!(input.len(), self.input_dim());
        let params = &genotype.params;
        let mut offset = 0;
        let mut activ: Vec<f64> = input.to_vec();
        for w in self.layer_sizes.windows(2) {
            let (n_in, n_out) = (w[0], w[1]);
            let weights = &params[offset..offset + n_in * n_out];
            let biases = &params[offset + n_in * n_out..offset + n_in * n_out + n_out];
            offset += n_in * n_out + n_out;
            let mut next = Vec::with_capacity(n_out);
            for j in 0..n_out {
                let mut z = biases[j];
                for (i, &a) in activ.iter().enumerate() {
                    z += weights[i * n_out + j] * a;
                }
                next.push(z.tanh());
            }
            activ = next;
        }
        if activ.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("policy output"));
        }
        Ok(activ)
    }
}
