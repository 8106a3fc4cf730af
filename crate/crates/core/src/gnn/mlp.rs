//! Dense multilayer perceptron with hand-written reverse mode.
//!
//! Parameters of an [`Mlp`] flatten to one slice in a fixed order: for each
//! layer, the row-major weight matrix (`outputs × inputs`) followed by the
//! bias vector. Gradients use the same layout and are *accumulated* into the
//! caller's buffer so several calls can be summed.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_rows(rows: &[Vec<f64>], cols: usize) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::Shape(format!("row {r} has {} values, expected {cols}", row.len())));
            }
            data.extend_from_slice(row);
        }
        Ok(Self { rows: rows.len(), cols, data })
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} values for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    #[default]
    Relu,
    Tanh,
    Identity,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Tanh => x.tanh(),
            Activation::Identity => x,
        }
    }

    /// Derivative expressed through the activation's output.
    fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - y * y,
            Activation::Identity => 1.0,
        }
    }

    pub fn code(self) -> u8 {
        match self {
            Activation::Relu => 0,
            Activation::Tanh => 1,
            Activation::Identity => 2,
        }
    }

    pub fn from_code(code: u8) -> Result<Self> {
        match code {
            0 => Ok(Activation::Relu),
            1 => Ok(Activation::Tanh),
            2 => Ok(Activation::Identity),
            c => Err(Error::Checkpoint(format!("unknown activation code {c}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub inputs: usize,
    pub outputs: usize,
    /// `outputs × inputs`, row-major.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Layer {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            bias: vec![0.0; outputs],
        }
    }

    fn num_params(&self) -> usize {
        self.weights.len() + self.bias.len()
    }

    pub fn weight(&self, out: usize, inp: usize) -> f64 {
        self.weights[out * self.inputs + inp]
    }
}

/// Affine layers with a shared hidden nonlinearity; the last layer is linear.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub layers: Vec<Layer>,
    pub activation: Activation,
}

/// Per-layer outputs of a batched forward pass, kept for the backward pass.
#[derive(Debug, Clone)]
pub struct MlpCache {
    input: Matrix,
    /// Post-activation output of every layer; the last one is the MLP output.
    outputs: Vec<Matrix>,
}

impl MlpCache {
    pub fn output(&self) -> &Matrix {
        self.outputs.last().unwrap_or(&self.input)
    }
}

impl Mlp {
    /// Uniform initialisation in `±1/sqrt(fan_in)`, biases zero.
    pub fn new(widths: &[usize], activation: Activation, rng: &mut impl Rng) -> Self {
        let mut mlp = Self::zeros(widths, activation);
        for layer in &mut mlp.layers {
            let bound = 1.0 / (layer.inputs as f64).sqrt();
            for w in &mut layer.weights {
                *w = rng.random_range(-bound..bound);
            }
        }
        mlp
    }

    pub fn zeros(widths: &[usize], activation: Activation) -> Self {
        assert!(widths.len() >= 2, "an MLP needs at least input and output widths");
        let layers = widths.windows(2).map(|w| Layer::zeros(w[0], w[1])).collect();
        Self { layers, activation }
    }

    /// A single linear layer of the given size holding the identity map.
    pub fn identity(width: usize) -> Self {
        let mut mlp = Self::zeros(&[width, width], Activation::Relu);
        for k in 0..width {
            mlp.layers[0].weights[k * width + k] = 1.0;
        }
        mlp
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_width(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs
    }

    pub fn widths(&self) -> Vec<usize> {
        let mut w = vec![self.input_width()];
        w.extend(self.layers.iter().map(|l| l.outputs));
        w
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(Layer::num_params).sum()
    }

    pub fn write_params(&self, out: &mut Vec<f64>) {
        for l in &self.layers {
            out.extend_from_slice(&l.weights);
            out.extend_from_slice(&l.bias);
        }
    }

    /// Load parameters from the front of `src`, returning how many were read.
    pub fn read_params(&mut self, src: &[f64]) -> Result<usize> {
        if src.len() < self.num_params() {
            return Err(Error::Shape(format!(
                "{} parameters supplied, MLP needs {}",
                src.len(),
                self.num_params()
            )));
        }
        let mut at = 0;
        for l in &mut self.layers {
            let nw = l.weights.len();
            l.weights.copy_from_slice(&src[at..at + nw]);
            at += nw;
            let nb = l.bias.len();
            l.bias.copy_from_slice(&src[at..at + nb]);
            at += nb;
        }
        Ok(at)
    }

    /// Forward pass of a single input vector.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        let m = Matrix::from_vec(1, input.len(), input.to_vec())?;
        Ok(self.forward_batch(&m)?.output().data.clone())
    }

    /// Forward pass over every row of `input`.
    pub fn forward_batch(&self, input: &Matrix) -> Result<MlpCache> {
        if input.cols != self.input_width() {
            return Err(Error::Shape(format!(
                "MLP expects width {}, got {}",
                self.input_width(),
                input.cols
            )));
        }
        let last = self.layers.len() - 1;
        let mut outputs: Vec<Matrix> = Vec::with_capacity(self.layers.len());
        for (k, layer) in self.layers.iter().enumerate() {
            let x = if k == 0 { input } else { &outputs[k - 1] };
            let mut y = Matrix::zeros(x.rows, layer.outputs);
            for r in 0..x.rows {
                let xr = x.row(r);
                let yr = y.row_mut(r);
                for (o, out) in yr.iter_mut().enumerate() {
                    let w = &layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
                    let mut acc = layer.bias[o];
                    for (wi, xi) in w.iter().zip(xr) {
                        acc += wi * xi;
                    }
                    *out = if k == last { acc } else { self.activation.apply(acc) };
                }
            }
            outputs.push(y);
        }
        Ok(MlpCache { input: input.clone(), outputs })
    }

    /// Reverse pass. `upstream` is ∂L/∂output for every row of the cached
    /// batch. Parameter gradients are added into `grad` (length
    /// [`Mlp::num_params`]); the returned matrix is ∂L/∂input.
    pub fn backward_batch(&self, cache: &MlpCache, upstream: &Matrix, grad: &mut [f64]) -> Result<Matrix> {
        if upstream.rows != cache.input.rows || upstream.cols != self.output_width() {
            return Err(Error::Shape(format!(
                "upstream {}x{} does not match output {}x{}",
                upstream.rows,
                upstream.cols,
                cache.input.rows,
                self.output_width()
            )));
        }
        if grad.len() != self.num_params() {
            return Err(Error::Shape(format!(
                "gradient buffer of {} for {} parameters",
                grad.len(),
                self.num_params()
            )));
        }
        let last = self.layers.len() - 1;
        let mut offsets = Vec::with_capacity(self.layers.len());
        let mut at = 0;
        for l in &self.layers {
            offsets.push(at);
            at += l.num_params();
        }

        let mut delta = upstream.clone();
        for k in (0..self.layers.len()).rev() {
            let layer = &self.layers[k];
            if k != last {
                let y = &cache.outputs[k];
                for (d, &yv) in delta.data.iter_mut().zip(&y.data) {
                    *d *= self.activation.derivative_from_output(yv);
                }
            }
            let x = if k == 0 { &cache.input } else { &cache.outputs[k - 1] };
            let (wgrad, bgrad) =
                grad[offsets[k]..offsets[k] + layer.num_params()].split_at_mut(layer.weights.len());
            let mut dx = Matrix::zeros(x.rows, layer.inputs);
            for r in 0..x.rows {
                let xr = x.row(r);
                let dr = delta.row(r);
                let dxr = dx.row_mut(r);
                for (o, &d) in dr.iter().enumerate() {
                    if d == 0.0 {
                        continue;
                    }
                    bgrad[o] += d;
                    let w = &layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
                    let wg = &mut wgrad[o * layer.inputs..(o + 1) * layer.inputs];
                    for i in 0..layer.inputs {
                        wg[i] += d * xr[i];
                        dxr[i] += d * w[i];
                    }
                }
            }
            delta = dx;
        }
        Ok(delta)
    }

    /// Gradients of `upstream · output` with respect to the parameters and
    /// the input, for a single input vector.
    pub fn backward(&self, input: &[f64], upstream: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let x = Matrix::from_vec(1, input.len(), input.to_vec())?;
        let cache = self.forward_batch(&x)?;
        let up = Matrix::from_vec(1, upstream.len(), upstream.to_vec())?;
        let mut grad = vec![0.0; self.num_params()];
        let dx = self.backward_batch(&cache, &up, &mut grad)?;
        Ok((grad, dx.data))
    }
}
