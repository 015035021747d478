//! Single-layer LSTM auto-encoder over trajectory rows.
//!
//! The encoder LSTM reads the T x D trajectory and maps its final hidden
//! state to the latent through a linear layer. The decoder maps the latent
//! to initial hidden/cell states (tanh) and unrolls an input-free LSTM for
//! T steps, emitting one D-dim row per step through a linear readout.

use super::Net;

pub(crate) struct LstmNet {
    rows: usize,
    cols: usize,
    hidden: usize,
    latent: usize,
}

/// Parameter offsets, in declaration order.
struct Layout {
    // Encoder gates, each as (Wx: D x H, Wh: H x H, b: H), order i, f, g, o.
    enc_gates: [(usize, usize, usize); 4],
    wz: usize,
    bz: usize,
    // Decoder state init from latent.
    wh0: usize,
    bh0: usize,
    wc0: usize,
    bc0: usize,
    // Decoder gates, each as (Wh: H x H, b: H), order i, f, g, o.
    dec_gates: [(usize, usize); 4],
    wy: usize,
    by: usize,
    total: usize,
}

#[derive(Clone, Default)]
struct StepCache {
    i: Vec<f64>,
    f: Vec<f64>,
    g: Vec<f64>,
    o: Vec<f64>,
    c: Vec<f64>,
    tanh_c: Vec<f64>,
    h: Vec<f64>,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl LstmNet {
    pub fn new(rows: usize, cols: usize, hidden: usize, latent: usize) -> Self {
        Self {
            rows,
            cols,
            hidden,
            latent,
        }
    }

    fn layout(&self) -> Layout {
        let (d, h, l) = (self.cols, self.hidden, self.latent);
        let mut off = 0;
        let mut take = |n: usize| {
            let at = off;
            off += n;
            at
        };
        let mut enc_gates = [(0, 0, 0); 4];
        for slot in &mut enc_gates {
            *slot = (take(d * h), take(h * h), take(h));
        }
        let wz = take(h * l);
        let bz = take(l);
        let wh0 = take(l * h);
        let bh0 = take(h);
        let wc0 = take(l * h);
        let bc0 = take(h);
        let mut dec_gates = [(0, 0); 4];
        for slot in &mut dec_gates {
            *slot = (take(h * h), take(h));
        }
        let wy = take(h * d);
        let by = take(d);
        Layout {
            enc_gates,
            wz,
            bz,
            wh0,
            bh0,
            wc0,
            bc0,
            dec_gates,
            wy,
            by,
            total: off,
        }
    }

    /// out[j] += x . W[:, j] for an n_in x n_out input-major weight block.
    fn add_matvec(x: &[f64], w: &[f64], out: &mut [f64]) {
        let n_out = out.len();
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            let row = &w[i * n_out..(i + 1) * n_out];
            for (o, &wij) in out.iter_mut().zip(row) {
                *o += wij * xi;
            }
        }
    }

    /// grad_w += x outer d; d_in += W d.
    fn matvec_backward(x: &[f64], w: &[f64], d: &[f64], grad_w: &mut [f64], d_in: &mut [f64]) {
        let n_out = d.len();
        for (i, &xi) in x.iter().enumerate() {
            let wrow = &w[i * n_out..(i + 1) * n_out];
            let grow = &mut grad_w[i * n_out..(i + 1) * n_out];
            let mut acc = 0.0;
            for ((g, &wij), &dj) in grow.iter_mut().zip(wrow).zip(d) {
                *g += xi * dj;
                acc += wij * dj;
            }
            d_in[i] += acc;
        }
    }

    /// One LSTM step; `x` may be empty (decoder).
    #[allow(clippy::too_many_arguments)]
    fn step(
        &self,
        p: &[f64],
        x: &[f64],
        wx: [usize; 4],
        wh: [usize; 4],
        b: [usize; 4],
        h_prev: &[f64],
        c_prev: &[f64],
    ) -> StepCache {
        let hn = self.hidden;
        let mut pre = [vec![0.0; hn], vec![0.0; hn], vec![0.0; hn], vec![0.0; hn]];
        for k in 0..4 {
            pre[k].copy_from_slice(&p[b[k]..b[k] + hn]);
            if !x.is_empty() {
                Self::add_matvec(x, &p[wx[k]..wx[k] + x.len() * hn], &mut pre[k]);
            }
            Self::add_matvec(h_prev, &p[wh[k]..wh[k] + hn * hn], &mut pre[k]);
        }
        let i: Vec<f64> = pre[0].iter().map(|&v| sigmoid(v)).collect();
        let f: Vec<f64> = pre[1].iter().map(|&v| sigmoid(v)).collect();
        let g: Vec<f64> = pre[2].iter().map(|&v| v.tanh()).collect();
        let o: Vec<f64> = pre[3].iter().map(|&v| sigmoid(v)).collect();
        let c: Vec<f64> = (0..hn).map(|j| f[j] * c_prev[j] + i[j] * g[j]).collect();
        let tanh_c: Vec<f64> = c.iter().map(|v| v.tanh()).collect();
        let h: Vec<f64> = (0..hn).map(|j| o[j] * tanh_c[j]).collect();
        StepCache {
            i,
            f,
            g,
            o,
            c,
            tanh_c,
            h,
        }
    }

    fn encoder_forward(&self, p: &[f64], input: &[f64]) -> Vec<StepCache> {
        let lo = self.layout();
        let wx = lo.enc_gates.map(|g| g.0);
        let wh = lo.enc_gates.map(|g| g.1);
        let b = lo.enc_gates.map(|g| g.2);
        let mut h = vec![0.0; self.hidden];
        let mut c = vec![0.0; self.hidden];
        let mut steps = Vec::with_capacity(self.rows);
        for t in 0..self.rows {
            let x = &input[t * self.cols..(t + 1) * self.cols];
            let s = self.step(p, x, wx, wh, b, &h, &c);
            h = s.h.clone();
            c = s.c.clone();
            steps.push(s);
        }
        steps
    }

    fn latent_from(&self, p: &[f64], h_last: &[f64]) -> Vec<f64> {
        let lo = self.layout();
        let mut z = p[lo.bz..lo.bz + self.latent].to_vec();
        Self::add_matvec(h_last, &p[lo.wz..lo.wz + self.hidden * self.latent], &mut z);
        z
    }

    fn decoder_forward(&self, p: &[f64], z: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<StepCache>, Vec<f64>) {
        let lo = self.layout();
        let hn = self.hidden;
        let mut h0 = p[lo.bh0..lo.bh0 + hn].to_vec();
        Self::add_matvec(z, &p[lo.wh0..lo.wh0 + self.latent * hn], &mut h0);
        h0.iter_mut().for_each(|v| *v = v.tanh());
        let mut c0 = p[lo.bc0..lo.bc0 + hn].to_vec();
        Self::add_matvec(z, &p[lo.wc0..lo.wc0 + self.latent * hn], &mut c0);
        c0.iter_mut().for_each(|v| *v = v.tanh());

        let wh = lo.dec_gates.map(|g| g.0);
        let b = lo.dec_gates.map(|g| g.1);
        let mut h = h0.clone();
        let mut c = c0.clone();
        let mut steps = Vec::with_capacity(self.rows);
        let mut output = Vec::with_capacity(self.rows * self.cols);
        for _ in 0..self.rows {
            let s = self.step(p, &[], [0; 4], wh, b, &h, &c);
            h = s.h.clone();
            c = s.c.clone();
            let mut y = p[lo.by..lo.by + self.cols].to_vec();
            Self::add_matvec(&h, &p[lo.wy..lo.wy + hn * self.cols], &mut y);
            output.extend_from_slice(&y);
            steps.push(s);
        }
        (h0, c0, steps, output)
    }

    /// BPTT through a cached LSTM unroll. `d_h_step[t]` is the external
    /// gradient arriving at h_t. `x_rows` is empty for the decoder.
    /// Returns (d_h0, d_c0) flowing out of step 0.
    #[allow(clippy::too_many_arguments)]
    fn bptt(
        &self,
        p: &[f64],
        steps: &[StepCache],
        x_rows: Option<&[f64]>,
        init_h: &[f64],
        init_c: &[f64],
        d_h_step: &[Vec<f64>],
        wx: [usize; 4],
        wh: [usize; 4],
        b: [usize; 4],
        grad: &mut [f64],
    ) -> (Vec<f64>, Vec<f64>) {
        let hn = self.hidden;
        let mut d_h = vec![0.0; hn];
        let mut d_c = vec![0.0; hn];
        for t in (0..steps.len()).rev() {
            let s = &steps[t];
            for j in 0..hn {
                d_h[j] += d_h_step[t][j];
            }
            let c_prev: &[f64] = if t == 0 { init_c } else { &steps[t - 1].c };
            let h_prev: &[f64] = if t == 0 { init_h } else { &steps[t - 1].h };
            let mut d_pre = [vec![0.0; hn], vec![0.0; hn], vec![0.0; hn], vec![0.0; hn]];
            for j in 0..hn {
                let do_j = d_h[j] * s.tanh_c[j];
                let dc_j = d_c[j] + d_h[j] * s.o[j] * (1.0 - s.tanh_c[j] * s.tanh_c[j]);
                let di_j = dc_j * s.g[j];
                let df_j = dc_j * c_prev[j];
                let dg_j = dc_j * s.i[j];
                d_c[j] = dc_j * s.f[j];
                d_pre[0][j] = di_j * s.i[j] * (1.0 - s.i[j]);
                d_pre[1][j] = df_j * s.f[j] * (1.0 - s.f[j]);
                d_pre[2][j] = dg_j * (1.0 - s.g[j] * s.g[j]);
                d_pre[3][j] = do_j * s.o[j] * (1.0 - s.o[j]);
            }
            let mut d_h_prev = vec![0.0; hn];
            for k in 0..4 {
                for j in 0..hn {
                    grad[b[k] + j] += d_pre[k][j];
                }
                Self::matvec_backward(
                    h_prev,
                    &p[wh[k]..wh[k] + hn * hn],
                    &d_pre[k],
                    &mut grad[wh[k]..wh[k] + hn * hn],
                    &mut d_h_prev,
                );
                if let Some(rows) = x_rows {
                    let x = &rows[t * self.cols..(t + 1) * self.cols];
                    let mut d_x = vec![0.0; self.cols];
                    Self::matvec_backward(
                        x,
                        &p[wx[k]..wx[k] + self.cols * hn],
                        &d_pre[k],
                        &mut grad[wx[k]..wx[k] + self.cols * hn],
                        &mut d_x,
                    );
                }
            }
            d_h = d_h_prev;
        }
        (d_h, d_c)
    }

    /// Backprop a latent gradient through the encoder (linear head + BPTT).
    fn encoder_backward(
        &self,
        p: &[f64],
        input: &[f64],
        steps: &[StepCache],
        d_z: &[f64],
        grad: &mut [f64],
    ) {
        let lo = self.layout();
        let hn = self.hidden;
        let h_last = &steps[self.rows - 1].h;
        let mut d_h_last = vec![0.0; hn];
        Self::matvec_backward(
            h_last,
            &p[lo.wz..lo.wz + hn * self.latent],
            d_z,
            &mut grad[lo.wz..lo.wz + hn * self.latent],
            &mut d_h_last,
        );
        for (g, d) in grad[lo.bz..lo.bz + self.latent].iter_mut().zip(d_z) {
            *g += d;
        }
        let mut d_h_step = vec![vec![0.0; hn]; self.rows];
        d_h_step[self.rows - 1] = d_h_last;
        let zeros = vec![0.0; hn];
        let wx = lo.enc_gates.map(|g| g.0);
        let wh = lo.enc_gates.map(|g| g.1);
        let b = lo.enc_gates.map(|g| g.2);
        self.bptt(
            p, steps, Some(input), &zeros, &zeros, &d_h_step, wx, wh, b, grad,
        );
    }
}

impl Net for LstmNet {
    fn param_count(&self) -> usize {
        self.layout().total
    }


    fn encode(&self, p: &[f64], input: &[f64]) -> Vec<f64> {
        let steps = self.encoder_forward(p, input);
        self.latent_from(p, &steps[self.rows - 1].h)
    }

    fn reconstruct(&self, p: &[f64], input: &[f64]) -> Vec<f64> {
        let z = self.encode(p, input);
        self.decoder_forward(p, &z).3
    }

    fn mse_backward(&self, p: &[f64], input: &[f64], grad: &mut [f64]) -> f64 {
        let lo = self.layout();
        let hn = self.hidden;
        let enc_steps = self.encoder_forward(p, input);
        let z = self.latent_from(p, &enc_steps[self.rows - 1].h);
        let (h0, c0, dec_steps, output) = self.decoder_forward(p, &z);

        let n = (self.rows * self.cols) as f64;
        let loss = output
            .iter()
            .zip(input)
            .map(|(y, x)| (y - x) * (y - x))
            .sum::<f64>()
            / n;

        // Readout backward: d y_t -> d h_t plus Wy/by grads.
        let mut d_h_step = vec![vec![0.0; hn]; self.rows];
        for t in 0..self.rows {
            let d_y: Vec<f64> = (0..self.cols)
                .map(|j| 2.0 * (output[t * self.cols + j] - input[t * self.cols + j]) / n)
                .collect();
            for (g, d) in grad[lo.by..lo.by + self.cols].iter_mut().zip(&d_y) {
                *g += d;
            }
            Self::matvec_backward(
                &dec_steps[t].h,
                &p[lo.wy..lo.wy + hn * self.cols],
                &d_y,
                &mut grad[lo.wy..lo.wy + hn * self.cols],
                &mut d_h_step[t],
            );
        }
        let wh = lo.dec_gates.map(|g| g.0);
        let b = lo.dec_gates.map(|g| g.1);
        let (d_h0, d_c0) = self.bptt(
            p, &dec_steps, None, &h0, &c0, &d_h_step, [0; 4], wh, b, grad,
        );

        // Through the tanh state-init layers into d_z.
        let mut d_z = vec![0.0; self.latent];
        let d_h0pre: Vec<f64> = d_h0
            .iter()
            .zip(&h0)
            .map(|(d, h)| d * (1.0 - h * h))
            .collect();
        for (g, d) in grad[lo.bh0..lo.bh0 + hn].iter_mut().zip(&d_h0pre) {
            *g += d;
        }
        Self::matvec_backward(
            &z,
            &p[lo.wh0..lo.wh0 + self.latent * hn],
            &d_h0pre,
            &mut grad[lo.wh0..lo.wh0 + self.latent * hn],
            &mut d_z,
        );
        let d_c0pre: Vec<f64> = d_c0
            .iter()
            .zip(&c0)
            .map(|(d, c)| d * (1.0 - c * c))
            .collect();
        for (g, d) in grad[lo.bc0..lo.bc0 + hn].iter_mut().zip(&d_c0pre) {
            *g += d;
        }
        Self::matvec_backward(
            &z,
            &p[lo.wc0..lo.wc0 + self.latent * hn],
            &d_c0pre,
            &mut grad[lo.wc0..lo.wc0 + self.latent * hn],
            &mut d_z,
        );

        self.encoder_backward(p, input, &enc_steps, &d_z, grad);
        loss
    }

    fn encode_backward(&self, p: &[f64], input: &[f64], latent_grad: &[f64], grad: &mut [f64]) {
        let steps = self.encoder_forward(p, input);
        self.encoder_backward(p, input, &steps, latent_grad, grad);
    }
}
