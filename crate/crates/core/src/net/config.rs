use serde::{Deserialize, Serialize};

use super::{NetError, Result};

/// Architecture constants. Layer widths are multiplied by `width_scale`
/// (rounded, at least 1) before use; kernel widths are never scaled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub conv1_kernels: usize,
    pub conv1_shape: [usize; 2],
    pub conv2_kernels: usize,
    pub conv2_shape: [usize; 2],
    pub hidden: usize,
    pub n_classes: usize,
    pub dropout_rate: f32,
    pub width_scale: f64,
    #[serde(default = "default_input_len")]
    pub input_len: usize,
}

fn default_input_len() -> usize {
    128
}

impl ModelConfig {
    /// The full-width network: 7432725 + 66·n trainable parameters.
    pub fn full(n_classes: usize) -> Self {
        ModelConfig {
            conv1_kernels: 1500,
            conv1_shape: [1, 7],
            conv2_kernels: 260,
            conv2_shape: [2, 7],
            hidden: 65,
            n_classes,
            dropout_rate: 0.5,
            width_scale: 1.0,
            input_len: default_input_len(),
        }
    }

    pub fn scaled(n_classes: usize, width_scale: f64) -> Self {
        ModelConfig { width_scale, ..Self::full(n_classes) }
    }

    /// Explicit small widths, used for gradient checks.
    pub fn tiny(n_classes: usize, conv1: usize, conv2: usize, hidden: usize) -> Self {
        ModelConfig { conv1_kernels: conv1, conv2_kernels: conv2, hidden, ..Self::full(n_classes) }
    }

    pub fn with_classes(&self, n_classes: usize) -> Self {
        ModelConfig { n_classes, ..self.clone() }
    }

    fn scale(&self, width: usize) -> usize {
        ((width as f64 * self.width_scale).round() as usize).max(1)
    }

    pub fn k1(&self) -> usize {
        self.scale(self.conv1_kernels)
    }

    pub fn k2(&self) -> usize {
        self.scale(self.conv2_kernels)
    }

    pub fn h(&self) -> usize {
        self.scale(self.hidden)
    }

    pub fn w1(&self) -> usize {
        self.conv1_shape[1]
    }

    pub fn w2(&self) -> usize {
        self.conv2_shape[1]
    }

    /// Time steps after the first convolution.
    pub fn t1(&self) -> usize {
        self.input_len + 1 - self.w1()
    }

    /// Time steps after the second convolution.
    pub fn t2(&self) -> usize {
        self.t1() + 1 - self.w2()
    }

    /// Length of the flattened conv2 output.
    pub fn flat(&self) -> usize {
        self.k2() * self.t2()
    }

    /// Values per input example.
    pub fn row(&self) -> usize {
        2 * self.input_len
    }

    /// Tensor lengths in checkpoint order.
    pub fn tensor_lens(&self) -> [usize; 8] {
        let (k1, k2, h, n) = (self.k1(), self.k2(), self.h(), self.n_classes);
        [k1 * self.w1(), k1, k2 * k1 * 2 * self.w2(), k2, h * self.flat(), h, n * h, n]
    }

    pub fn param_count(&self) -> usize {
        self.tensor_lens().iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(NetError::InvalidConfig(m.to_string()));
        if self.conv1_kernels == 0 || self.conv2_kernels == 0 || self.hidden == 0 {
            return bad("layer widths must be at least 1");
        }
        if self.n_classes < 1 {
            return bad("at least one class is required");
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return bad("dropout rate must lie in [0, 1)");
        }
        if !(self.width_scale > 0.0 && self.width_scale.is_finite()) {
            return bad("width scale must be positive");
        }
        if self.conv1_shape[0] != 1 || self.conv2_shape[0] != 2 {
            return bad("kernels must span 1 row in conv1 and both I/Q rows in conv2");
        }
        if self.w1() == 0 || self.w2() == 0 || self.w1() + self.w2() > self.input_len + 1 {
            return bad("kernel widths do not fit the input");
        }
        Ok(())
    }
}
