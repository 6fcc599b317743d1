use rand::distr::{Distribution, Uniform};
use rand::Rng;

use super::gemm::{gemm, Mat};
use super::{ModelConfig, NetError, Result};
use crate::scheme::Scheme;

pub const TENSOR_NAMES: [&str; 8] =
    ["conv1.w", "conv1.b", "conv2.w", "conv2.b", "fc1.w", "fc1.b", "fc2.w", "fc2.b"];

/// Index of the first head tensor in [`TENSOR_NAMES`] order.
pub(crate) const HEAD_START: usize = 6;

// Batches above this are split when no gradients are needed.
const EVAL_BATCH: usize = 256;
// Upper bound on floats in one conv2 im2col buffer.
const COL2_BUDGET: usize = 1 << 22;

/// Weights and biases; also used for gradients and optimizer moments.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub conv1_w: Vec<f32>,
    pub conv1_b: Vec<f32>,
    pub conv2_w: Vec<f32>,
    pub conv2_b: Vec<f32>,
    pub fc1_w: Vec<f32>,
    pub fc1_b: Vec<f32>,
    pub fc2_w: Vec<f32>,
    pub fc2_b: Vec<f32>,
}

impl Params {
    pub fn zeros(config: &ModelConfig) -> Self {
        let l = config.tensor_lens();
        Params {
            conv1_w: vec![0.0; l[0]],
            conv1_b: vec![0.0; l[1]],
            conv2_w: vec![0.0; l[2]],
            conv2_b: vec![0.0; l[3]],
            fc1_w: vec![0.0; l[4]],
            fc1_b: vec![0.0; l[5]],
            fc2_w: vec![0.0; l[6]],
            fc2_b: vec![0.0; l[7]],
        }
    }

    pub fn tensors(&self) -> [&[f32]; 8] {
        [
            &self.conv1_w,
            &self.conv1_b,
            &self.conv2_w,
            &self.conv2_b,
            &self.fc1_w,
            &self.fc1_b,
            &self.fc2_w,
            &self.fc2_b,
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut Vec<f32>; 8] {
        [
            &mut self.conv1_w,
            &mut self.conv1_b,
            &mut self.conv2_w,
            &mut self.conv2_b,
            &mut self.fc1_w,
            &mut self.fc1_b,
            &mut self.fc2_w,
            &mut self.fc2_b,
        ]
    }

    pub fn len(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Which parameters a training step may update.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trainable {
    All,
    /// Only the final linear layer.
    Head,
}

impl Trainable {
    pub(crate) fn includes(self, tensor: usize) -> bool {
        match self {
            Trainable::All => true,
            Trainable::Head => tensor >= HEAD_START,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub config: ModelConfig,
    pub class_list: Vec<Scheme>,
    pub params: Params,
}

struct Body {
    col1: Vec<f32>,
    a1: Vec<f32>,
    a2: Vec<f32>,
}

struct Top {
    mask: Option<Vec<f32>>,
    f: Vec<f32>,
    a3: Vec<f32>,
    logits: Vec<f32>,
}

fn relu_inplace(x: &mut [f32]) {
    for v in x {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
}

fn fill_uniform<R: Rng + ?Sized>(t: &mut [f32], fan_in: usize, rng: &mut R) {
    let bound = 1.0 / (fan_in as f32).sqrt();
    let dist = Uniform::new(-bound, bound).expect("bound is positive and finite");
    for v in t {
        *v = dist.sample(rng);
    }
}

/// Numerically stable softmax of one logit row.
pub fn softmax(logits: &[f32]) -> Vec<f32> {
    let m = logits.iter().copied().fold(f32::NEG_INFINITY, f32::max);
    let e: Vec<f32> = logits.iter().map(|&z| (z - m).exp()).collect();
    let s: f32 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// Mean softmax cross-entropy over `labels.len()` rows of `n` logits, and
/// its gradient with respect to the logits.
pub fn cross_entropy(logits: &[f32], labels: &[usize], n: usize) -> Result<(f32, Vec<f32>)> {
    let b = labels.len();
    if b == 0 {
        return Err(NetError::EmptyBatch);
    }
    let mut grad = vec![0.0f32; b * n];
    let mut total = 0.0f32;
    for (i, &y) in labels.iter().enumerate() {
        if y >= n {
            return Err(NetError::LabelOutOfRange { label: y, n });
        }
        let row = &logits[i * n..(i + 1) * n];
        let m = row.iter().copied().fold(f32::NEG_INFINITY, f32::max);
        let s: f32 = row.iter().map(|&z| (z - m).exp()).sum();
        let lse = m + s.ln();
        total += lse - row[y];
        for j in 0..n {
            grad[i * n + j] = (row[j] - lse).exp() / b as f32;
        }
        grad[i * n + y] -= 1.0 / b as f32;
    }
    Ok((total / b as f32, grad))
}

impl Model {
    /// Draws every weight and bias uniformly in ±1/sqrt(fan_in).
    pub fn init<R: Rng + ?Sized>(config: ModelConfig, class_list: Vec<Scheme>, rng: &mut R) -> Result<Model> {
        config.validate()?;
        if class_list.len() != config.n_classes {
            return Err(NetError::InvalidConfig(format!(
                "{} class names for {} outputs",
                class_list.len(),
                config.n_classes
            )));
        }
        let mut params = Params::zeros(&config);
        let fans = [config.w1(), config.k1() * 2 * config.w2(), config.flat(), config.h()];
        for (i, t) in params.tensors_mut().into_iter().enumerate() {
            fill_uniform(t, fans[i / 2], rng);
        }
        Ok(Model { config, class_list, params })
    }

    pub fn n_classes(&self) -> usize {
        self.config.n_classes
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    /// Swaps in a freshly initialized final layer for `class_list`.
    pub fn replace_head<R: Rng + ?Sized>(&self, class_list: Vec<Scheme>, rng: &mut R) -> Result<Model> {
        if class_list.len() < 2 {
            return Err(NetError::InvalidConfig("a new head needs at least 2 classes".into()));
        }
        let config = self.config.with_classes(class_list.len());
        let mut params = self.params.clone();
        let h = config.h();
        params.fc2_w = vec![0.0; class_list.len() * h];
        params.fc2_b = vec![0.0; class_list.len()];
        fill_uniform(&mut params.fc2_w, h, rng);
        fill_uniform(&mut params.fc2_b, h, rng);
        Ok(Model { config, class_list, params })
    }

    fn batch_size(&self, inputs: &[f32]) -> Result<usize> {
        let row = self.config.row();
        if inputs.is_empty() {
            return Err(NetError::EmptyBatch);
        }
        if !inputs.len().is_multiple_of(row) {
            return Err(NetError::ShapeMismatch { got: inputs.len(), row });
        }
        Ok(inputs.len() / row)
    }

    fn chunk(&self, b: usize) -> usize {
        let c = &self.config;
        (COL2_BUDGET / (c.k1() * 2 * c.w2() * c.t2())).clamp(1, b)
    }

    fn im2col2(&self, a1: &[f32], n1: usize, b0: usize, cb: usize, col2: &mut [f32]) {
        let c = &self.config;
        let (t1, t2, w2) = (c.t1(), c.t2(), c.w2());
        let ncol = cb * t2;
        for ch in 0..c.k1() {
            for r in 0..2 {
                for j in 0..w2 {
                    let row = &mut col2[((ch * 2 + r) * w2 + j) * ncol..][..ncol];
                    for bb in 0..cb {
                        let src = ch * n1 + ((b0 + bb) * 2 + r) * t1 + j;
                        row[bb * t2..(bb + 1) * t2].copy_from_slice(&a1[src..src + t2]);
                    }
                }
            }
        }
    }

    fn body(&self, x: &[f32], b: usize) -> Body {
        let c = &self.config;
        let (k1, k2, w1, t1, t2, len) = (c.k1(), c.k2(), c.w1(), c.t1(), c.t2(), c.input_len);
        let n1 = b * 2 * t1;
        let mut col1 = vec![0.0f32; w1 * n1];
        for j in 0..w1 {
            for br in 0..b * 2 {
                let src = br * len + j;
                col1[j * n1 + br * t1..][..t1].copy_from_slice(&x[src..src + t1]);
            }
        }
        let mut a1 = vec![0.0f32; k1 * n1];
        gemm(k1, w1, n1, Mat::rm(&self.params.conv1_w, w1), Mat::rm(&col1, n1), 0.0, &mut a1);
        for ch in 0..k1 {
            let bias = self.params.conv1_b[ch];
            for v in &mut a1[ch * n1..(ch + 1) * n1] {
                *v = (*v + bias).max(0.0);
            }
        }

        let flat = c.flat();
        let rows2 = k1 * 2 * c.w2();
        let chunk = self.chunk(b);
        let mut a2 = vec![0.0f32; b * flat];
        let mut col2 = vec![0.0f32; rows2 * chunk * t2];
        let mut out = vec![0.0f32; k2 * chunk * t2];
        for b0 in (0..b).step_by(chunk) {
            let cb = chunk.min(b - b0);
            let ncol = cb * t2;
            self.im2col2(&a1, n1, b0, cb, &mut col2);
            gemm(k2, rows2, ncol, Mat::rm(&self.params.conv2_w, rows2), Mat::rm(&col2, ncol), 0.0, &mut out);
            for bb in 0..cb {
                for k in 0..k2 {
                    let bias = self.params.conv2_b[k];
                    let dst = &mut a2[(b0 + bb) * flat + k * t2..][..t2];
                    let src = &out[k * ncol + bb * t2..][..t2];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d = (*s + bias).max(0.0);
                    }
                }
            }
        }
        Body { col1, a1, a2 }
    }

    fn top<R: Rng + ?Sized>(&self, a2: &[f32], b: usize, dropout: Option<&mut R>) -> Top {
        let c = &self.config;
        let (flat, h, n) = (c.flat(), c.h(), c.n_classes);
        let mut f = a2.to_vec();
        let mask = match dropout {
            Some(rng) if c.dropout_rate > 0.0 => {
                let keep = 1.0 - c.dropout_rate;
                let scale = 1.0 / keep;
                let m: Vec<f32> =
                    (0..f.len()).map(|_| if rng.random::<f32>() < keep { scale } else { 0.0 }).collect();
                for (v, s) in f.iter_mut().zip(&m) {
                    *v *= s;
                }
                Some(m)
            }
            _ => None,
        };
        let mut a3 = vec![0.0f32; b * h];
        gemm(b, flat, h, Mat::rm(&f, flat), Mat::t(&self.params.fc1_w, flat), 0.0, &mut a3);
        for row in a3.chunks_exact_mut(h) {
            for (v, bias) in row.iter_mut().zip(&self.params.fc1_b) {
                *v += bias;
            }
        }
        relu_inplace(&mut a3);
        let mut logits = vec![0.0f32; b * n];
        gemm(b, h, n, Mat::rm(&a3, h), Mat::t(&self.params.fc2_w, h), 0.0, &mut logits);
        for row in logits.chunks_exact_mut(n) {
            for (v, bias) in row.iter_mut().zip(&self.params.fc2_b) {
                *v += bias;
            }
        }
        Top { mask, f, a3, logits }
    }

    /// Pre-softmax logits, `B x n` row-major. Dropout is applied only in
    /// train mode.
    pub fn forward<R: Rng + ?Sized>(&self, inputs: &[f32], train_mode: bool, rng: &mut R) -> Result<Vec<f32>> {
        let b = self.batch_size(inputs)?;
        let body = self.body(inputs, b);
        Ok(self.top(&body.a2, b, if train_mode { Some(rng) } else { None }).logits)
    }

    /// Eval-mode logits, computed in bounded batches.
    pub fn predict(&self, inputs: &[f32]) -> Result<Vec<f32>> {
        let row = self.config.row();
        self.batch_size(inputs)?;
        let mut out = Vec::with_capacity(inputs.len() / row * self.n_classes());
        for chunk in inputs.chunks(EVAL_BATCH * row) {
            let b = chunk.len() / row;
            let body = self.body(chunk, b);
            out.extend(self.top::<rand_chacha::ChaCha8Rng>(&body.a2, b, None).logits);
        }
        Ok(out)
    }

    /// Flattened post-ReLU conv2 activations, `B x flat`, in eval mode.
    pub fn features(&self, inputs: &[f32]) -> Result<Vec<f32>> {
        let row = self.config.row();
        self.batch_size(inputs)?;
        let mut out = Vec::with_capacity(inputs.len() / row * self.config.flat());
        for chunk in inputs.chunks(EVAL_BATCH * row) {
            out.extend(self.body(chunk, chunk.len() / row).a2);
        }
        Ok(out)
    }

    /// Eval-mode logits from precomputed [`Model::features`].
    pub fn predict_from_features(&self, features: &[f32]) -> Result<Vec<f32>> {
        let flat = self.config.flat();
        if features.is_empty() || !features.len().is_multiple_of(flat) {
            return Err(NetError::ShapeMismatch { got: features.len(), row: flat });
        }
        Ok(self.top::<rand_chacha::ChaCha8Rng>(features, features.len() / flat, None).logits)
    }

    /// Mean eval-mode cross-entropy.
    pub fn loss(&self, inputs: &[f32], labels: &[usize]) -> Result<f64> {
        let logits = self.predict(inputs)?;
        self.mean_loss(&logits, labels)
    }

    pub(crate) fn mean_loss(&self, logits: &[f32], labels: &[usize]) -> Result<f64> {
        let n = self.n_classes();
        if logits.len() != labels.len() * n {
            return Err(NetError::LabelCount { inputs: logits.len() / n, labels: labels.len() });
        }
        let mut total = 0.0f64;
        for (i, &y) in labels.iter().enumerate() {
            let (l, _) = cross_entropy(&logits[i * n..(i + 1) * n], &[y], n)?;
            total += l as f64;
        }
        Ok(total / labels.len() as f64)
    }

    /// Mean training loss and the gradient of every parameter, dropout active.
    ///
    /// With [`Trainable::Head`] only the final layer's gradients are
    /// computed; the rest are zero.
    pub fn loss_and_grads<R: Rng + ?Sized>(
        &self,
        inputs: &[f32],
        labels: &[usize],
        rng: &mut R,
        trainable: Trainable,
    ) -> Result<(f32, Params)> {
        let b = self.batch_size(inputs)?;
        if labels.len() != b {
            return Err(NetError::LabelCount { inputs: b, labels: labels.len() });
        }
        let body = self.body(inputs, b);
        let top = self.top(&body.a2, b, Some(rng));
        let (loss, dl) = cross_entropy(&top.logits, labels, self.n_classes())?;
        let mut g = Params::zeros(&self.config);
        self.backward_top(&top, &dl, b, &mut g);
        if trainable == Trainable::All {
            let da2 = self.backward_fc1(&top, &dl, b, &mut g);
            self.backward_body(&body, da2, b, &mut g);
        }
        Ok((loss, g))
    }

    /// Head-only loss and gradients from cached [`Model::features`].
    pub fn head_loss_and_grads<R: Rng + ?Sized>(
        &self,
        features: &[f32],
        labels: &[usize],
        rng: &mut R,
    ) -> Result<(f32, Params)> {
        let flat = self.config.flat();
        if features.len() != labels.len() * flat {
            return Err(NetError::LabelCount { inputs: features.len() / flat.max(1), labels: labels.len() });
        }
        let b = labels.len();
        let top = self.top(features, b, Some(rng));
        let (loss, dl) = cross_entropy(&top.logits, labels, self.n_classes())?;
        let mut g = Params::zeros(&self.config);
        self.backward_top(&top, &dl, b, &mut g);
        Ok((loss, g))
    }

    fn backward_top(&self, top: &Top, dl: &[f32], b: usize, g: &mut Params) {
        let (h, n) = (self.config.h(), self.n_classes());
        gemm(n, b, h, Mat::t(dl, n), Mat::rm(&top.a3, h), 0.0, &mut g.fc2_w);
        for row in dl.chunks_exact(n) {
            for (acc, v) in g.fc2_b.iter_mut().zip(row) {
                *acc += v;
            }
        }
    }

    /// Backpropagates through fc1 and dropout; returns d(loss)/d(a2) masked by
    /// the conv2 ReLU.
    fn backward_fc1(&self, top: &Top, dl: &[f32], b: usize, g: &mut Params) -> Vec<f32> {
        let (flat, h, n) = (self.config.flat(), self.config.h(), self.n_classes());
        let mut dz3 = vec![0.0f32; b * h];
        gemm(b, n, h, Mat::rm(dl, n), Mat::rm(&self.params.fc2_w, h), 0.0, &mut dz3);
        for (d, a) in dz3.iter_mut().zip(&top.a3) {
            if *a <= 0.0 {
                *d = 0.0;
            }
        }
        gemm(h, b, flat, Mat::t(&dz3, h), Mat::rm(&top.f, flat), 0.0, &mut g.fc1_w);
        for row in dz3.chunks_exact(h) {
            for (acc, v) in g.fc1_b.iter_mut().zip(row) {
                *acc += v;
            }
        }
        let mut df = vec![0.0f32; b * flat];
        gemm(b, h, flat, Mat::rm(&dz3, h), Mat::rm(&self.params.fc1_w, flat), 0.0, &mut df);
        if let Some(mask) = &top.mask {
            for (d, m) in df.iter_mut().zip(mask) {
                *d *= m;
            }
        }
        df
    }

    fn backward_body(&self, body: &Body, mut dz2: Vec<f32>, b: usize, g: &mut Params) {
        let c = &self.config;
        let (k1, k2, w1, t1, t2) = (c.k1(), c.k2(), c.w1(), c.t1(), c.t2());
        let w2 = c.w2();
        let flat = c.flat();
        let n1 = b * 2 * t1;
        for (d, a) in dz2.iter_mut().zip(&body.a2) {
            if *a <= 0.0 {
                *d = 0.0;
            }
        }

        let rows2 = k1 * 2 * w2;
        let chunk = self.chunk(b);
        let mut col2 = vec![0.0f32; rows2 * chunk * t2];
        let mut dcol2 = vec![0.0f32; rows2 * chunk * t2];
        let mut dout = vec![0.0f32; k2 * chunk * t2];
        let mut da1 = vec![0.0f32; k1 * n1];
        for b0 in (0..b).step_by(chunk) {
            let cb = chunk.min(b - b0);
            let ncol = cb * t2;
            for bb in 0..cb {
                for k in 0..k2 {
                    let src = &dz2[(b0 + bb) * flat + k * t2..][..t2];
                    dout[k * ncol + bb * t2..][..t2].copy_from_slice(src);
                }
            }
            for k in 0..k2 {
                g.conv2_b[k] += dout[k * ncol..(k + 1) * ncol].iter().sum::<f32>();
            }
            self.im2col2(&body.a1, n1, b0, cb, &mut col2);
            gemm(k2, ncol, rows2, Mat::rm(&dout, ncol), Mat::t(&col2, ncol), 1.0, &mut g.conv2_w);
            gemm(rows2, k2, ncol, Mat::t(&self.params.conv2_w, rows2), Mat::rm(&dout, ncol), 0.0, &mut dcol2);
            for ch in 0..k1 {
                for r in 0..2 {
                    for j in 0..w2 {
                        let row = &dcol2[((ch * 2 + r) * w2 + j) * ncol..][..ncol];
                        for bb in 0..cb {
                            let dst = &mut da1[ch * n1 + ((b0 + bb) * 2 + r) * t1 + j..][..t2];
                            for (d, s) in dst.iter_mut().zip(&row[bb * t2..(bb + 1) * t2]) {
                                *d += s;
                            }
                        }
                    }
                }
            }
        }

        for (d, a) in da1.iter_mut().zip(&body.a1) {
            if *a <= 0.0 {
                *d = 0.0;
            }
        }
        gemm(k1, n1, w1, Mat::rm(&da1, n1), Mat::t(&body.col1, n1), 0.0, &mut g.conv1_w);
        for ch in 0..k1 {
            g.conv1_b[ch] = da1[ch * n1..(ch + 1) * n1].iter().sum();
        }
    }
}
