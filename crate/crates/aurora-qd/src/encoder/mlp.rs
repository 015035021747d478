//! MLP auto-encoder over the flattened trajectory.
//!
//! Encoder: input -> tanh hidden -> linear latent.
//! Decoder mirrors it: latent -> tanh hidden -> linear output.
//!
//! Parameter layout (flat): W1 (in x hid), b1, W2 (hid x lat), b2,
//! W3 (lat x hid), b3, W4 (hid x in), b4. Weights are input-major:
//! `w[i * n_out + j]` connects input i to output j.

use super::Net;

pub(crate) struct MlpNet {
    n_in: usize,
    hidden: usize,
    latent: usize,
}

struct Layout {
    w1: usize,
    b1: usize,
    w2: usize,
    b2: usize,
    w3: usize,
    b3: usize,
    w4: usize,
    b4: usize,
    total: usize,
}

impl MlpNet {
    pub fn new(n_in: usize, hidden: usize, latent: usize) -> Self {
        Self {
            n_in,
            hidden,
            latent,
        }
    }

    fn layout(&self) -> Layout {
        let (n, h, l) = (self.n_in, self.hidden, self.latent);
        let w1 = 0;
        let b1 = w1 + n * h;
        let w2 = b1 + h;
        let b2 = w2 + h * l;
        let w3 = b2 + l;
        let b3 = w3 + l * h;
        let w4 = b3 + h;
        let b4 = w4 + h * n;
        Layout {
            w1,
            b1,
            w2,
            b2,
            w3,
            b3,
            w4,
            b4,
            total: b4 + n,
        }
    }

    fn linear(x: &[f64], w: &[f64], b: &[f64], n_out: usize) -> Vec<f64> {
        let mut out = b.to_vec();
        for (i, &xi) in x.iter().enumerate() {
            let row = &w[i * n_out..(i + 1) * n_out];
            for (o, &wij) in out.iter_mut().zip(row) {
                *o += wij * xi;
            }
        }
        out
    }

    /// Full forward pass returning all activations needed for backprop:
    /// (h1 = tanh(.), z, h2 = tanh(.), y).
    fn forward(&self, p: &[f64], x: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
        let lo = self.layout();
        let mut h1 = Self::linear(x, &p[lo.w1..lo.b1], &p[lo.b1..lo.w2], self.hidden);
        h1.iter_mut().for_each(|v| *v = v.tanh());
        let z = Self::linear(&h1, &p[lo.w2..lo.b2], &p[lo.b2..lo.w3], self.latent);
        let mut h2 = Self::linear(&z, &p[lo.w3..lo.b3], &p[lo.b3..lo.w4], self.hidden);
        h2.iter_mut().for_each(|v| *v = v.tanh());
        let y = Self::linear(&h2, &p[lo.w4..lo.b4], &p[lo.b4..], self.n_in);
        (h1, z, h2, y)
    }

    /// dL/d(input of linear layer) and parameter grads for one layer.
    /// `d_out` is dL/d(layer output before any activation).
    fn linear_backward(
        x: &[f64],
        w: &[f64],
        d_out: &[f64],
        grad_w: &mut [f64],
        grad_b: &mut [f64],
    ) -> Vec<f64> {
        let n_out = d_out.len();
        for (gb, d) in grad_b.iter_mut().zip(d_out) {
            *gb += d;
        }
        let mut d_in = vec![0.0; x.len()];
        for (i, &xi) in x.iter().enumerate() {
            let wrow = &w[i * n_out..(i + 1) * n_out];
            let grow = &mut grad_w[i * n_out..(i + 1) * n_out];
            let mut acc = 0.0;
            for ((g, &wij), &d) in grow.iter_mut().zip(wrow).zip(d_out) {
                *g += xi * d;
                acc += wij * d;
            }
            d_in[i] = acc;
        }
        d_in
    }
}

impl Net for MlpNet {
    fn param_count(&self) -> usize {
        self.layout().total
    }


    fn encode(&self, p: &[f64], x: &[f64]) -> Vec<f64> {
        let lo = self.layout();
        let mut h1 = Self::linear(x, &p[lo.w1..lo.b1], &p[lo.b1..lo.w2], self.hidden);
        h1.iter_mut().for_each(|v| *v = v.tanh());
        Self::linear(&h1, &p[lo.w2..lo.b2], &p[lo.b2..lo.w3], self.latent)
    }

    fn reconstruct(&self, p: &[f64], x: &[f64]) -> Vec<f64> {
        self.forward(p, x).3
    }

    fn mse_backward(&self, p: &[f64], x: &[f64], grad: &mut [f64]) -> f64 {
        let lo = self.layout();
        let (h1, z, h2, y) = self.forward(p, x);
        let n = self.n_in as f64;
        let loss = y
            .iter()
            .zip(x)
            .map(|(yi, xi)| (yi - xi) * (yi - xi))
            .sum::<f64>()
            / n;

        // dL/dy for mean-squared error.
        let d_y: Vec<f64> = y.iter().zip(x).map(|(yi, xi)| 2.0 * (yi - xi) / n).collect();
        let (gw4, rest) = grad[lo.w4..].split_at_mut(lo.b4 - lo.w4);
        let d_h2 = Self::linear_backward(&h2, &p[lo.w4..lo.b4], &d_y, gw4, rest);
        // Through tanh.
        let d_h2pre: Vec<f64> = d_h2
            .iter()
            .zip(&h2)
            .map(|(d, h)| d * (1.0 - h * h))
            .collect();
        let (gw3, rest) = grad[lo.w3..lo.w4].split_at_mut(lo.b3 - lo.w3);
        let d_z = Self::linear_backward(&z, &p[lo.w3..lo.b3], &d_h2pre, gw3, rest);
        self.encode_backward_inner(p, x, &h1, &d_z, grad);
        loss
    }

    fn encode_backward(&self, p: &[f64], x: &[f64], latent_grad: &[f64], grad: &mut [f64]) {
        let lo = self.layout();
        let mut h1 = Self::linear(x, &p[lo.w1..lo.b1], &p[lo.b1..lo.w2], self.hidden);
        h1.iter_mut().for_each(|v| *v = v.tanh());
        self.encode_backward_inner(p, x, &h1, latent_grad, grad);
    }
}

impl MlpNet {
    fn encode_backward_inner(
        &self,
        p: &[f64],
        x: &[f64],
        h1: &[f64],
        d_z: &[f64],
        grad: &mut [f64],
    ) {
        let lo = self.layout();
        let (gw2, rest) = grad[lo.w2..lo.w3].split_at_mut(lo.b2 - lo.w2);
        let d_h1 = Self::linear_backward(h1, &p[lo.w2..lo.b2], d_z, gw2, rest);
        let d_h1pre: Vec<f64> = d_h1
            .iter()
            .zip(h1)
            .map(|(d, h)| d * (1.0 - h * h))
            .collect();
        let (gw1, rest) = grad[lo.w1..lo.w2].split_at_mut(lo.b1 - lo.w1);
        Self::linear_backward(x, &p[lo.w1..lo.b1], &d_h1pre, gw1, rest);
    }
}
