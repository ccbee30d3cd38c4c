use ndarray::{Array1, Array2, ArrayView1, Axis};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::Scalar;
use crate::error::{Error, Result};

/// ELU(x) = x for x >= 0, e^x - 1 otherwise.
pub fn elu<F: Scalar>(x: F) -> F {
    if x >= F::zero() {
        x
    } else {
        x.exp() - F::one()
    }
}

pub fn elu_deriv<F: Scalar>(x: F) -> F {
    if x >= F::zero() {
        F::one()
    } else {
        x.exp()
    }
}

/// Dense feed-forward network: ELU on hidden layers, identity output.
///
/// Weight matrices are stored `[out, in]`; layer `k` maps
/// `layer_sizes[k] -> layer_sizes[k + 1]`.
#[derive(Debug, Clone)]
pub struct Mlp<F: Scalar> {
    layer_sizes: Vec<usize>,
    pub weights: Vec<Array2<F>>,
    pub biases: Vec<Array1<F>>,
}

/// Per-layer activations cached by a forward pass, consumed by `backward`.
pub struct MlpCache<F: Scalar> {
    /// Input to each layer (index 0 is the network input), post-activation.
    inputs: Vec<Array2<F>>,
    /// Pre-activation of each hidden layer.
    pre: Vec<Array2<F>>,
}

/// Parameter gradients, same shapes as the network parameters.
#[derive(Debug, Clone)]
pub struct MlpGrads<F: Scalar> {
    pub d_weights: Vec<Array2<F>>,
    pub d_biases: Vec<Array1<F>>,
}

impl<F: Scalar> MlpGrads<F> {
    pub fn zeros_like(mlp: &Mlp<F>) -> Self {
        MlpGrads {
            d_weights: mlp.weights.iter().map(|w| Array2::zeros(w.dim())).collect(),
            d_biases: mlp.biases.iter().map(|b| Array1::zeros(b.dim())).collect(),
        }
    }

    pub fn add_assign(&mut self, other: &MlpGrads<F>) {
        for (a, b) in self.d_weights.iter_mut().zip(&other.d_weights) {
            *a += b;
        }
        for (a, b) in self.d_biases.iter_mut().zip(&other.d_biases) {
            *a += b;
        }
    }
}

impl<F: Scalar> Mlp<F> {
    /// Builds a zero-initialized network.
    pub fn zeros(layer_sizes: &[usize]) -> Self {
        assert!(layer_sizes.len() >= 2, "need at least input and output");
        let weights = layer_sizes
            .windows(2)
            .map(|w| Array2::zeros((w[1], w[0])))
            .collect();
        let biases = layer_sizes[1..]
            .iter()
            .map(|&n| Array1::zeros(n))
            .collect();
        Mlp {
            layer_sizes: layer_sizes.to_vec(),
            weights,
            biases,
        }
    }

    /// Random initialization: orthogonalized Gaussian weights with gain
    /// sqrt(2) on hidden layers and `final_gain` on the output layer,
    /// zero biases.
    pub fn init<R: Rng>(layer_sizes: &[usize], final_gain: f64, rng: &mut R) -> Self {
        let mut mlp = Self::zeros(layer_sizes);
        let last = mlp.weights.len() - 1;
        for (k, w) in mlp.weights.iter_mut().enumerate() {
            let gain = if k == last { final_gain } else { f64::sqrt(2.0) };
            *w = orthogonal_init(w.dim(), gain, rng);
        }
        mlp
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    pub fn num_layers(&self) -> usize {
        self.weights.len()
    }

    pub fn param_count(&self) -> usize {
        self.weights.iter().map(|w| w.len()).sum::<usize>()
            + self.biases.iter().map(|b| b.len()).sum::<usize>()
    }

    fn check_input(&self, context: &str, dim: usize) -> Result<()> {
        if dim != self.input_dim() {
            return Err(Error::shape(
                format!("{context} (layer 0 input)"),
                self.input_dim(),
                dim,
            ));
        }
        Ok(())
    }

    /// Forward pass on a batch (rows are samples).
    pub fn forward_batch(&self, x: &Array2<F>) -> Result<Array2<F>> {
        self.check_input("mlp forward", x.ncols())?;
        let mut a = x.clone();
        let last = self.weights.len() - 1;
        for (k, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let mut z = a.dot(&w.t());
            z += &b.view().insert_axis(Axis(0));
            if k < last {
                z.mapv_inplace(elu);
            }
            a = z;
        }
        Ok(a)
    }

    /// Forward pass that keeps per-layer activations for `backward`.
    pub fn forward_batch_cached(&self, x: &Array2<F>) -> Result<(Array2<F>, MlpCache<F>)> {
        self.check_input("mlp forward", x.ncols())?;
        let last = self.weights.len() - 1;
        let mut inputs = Vec::with_capacity(self.weights.len());
        let mut pre = Vec::with_capacity(last);
        let mut a = x.clone();
        for (k, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            inputs.push(a.clone());
            let mut z = a.dot(&w.t());
            z += &b.view().insert_axis(Axis(0));
            if k < last {
                pre.push(z.clone());
                z.mapv_inplace(elu);
            }
            a = z;
        }
        Ok((a, MlpCache { inputs, pre }))
    }

    /// Single-sample forward.
    pub fn forward(&self, x: ArrayView1<F>) -> Result<Array1<F>> {
        self.check_input("mlp forward", x.len())?;
        let mut a = x.to_owned();
        let last = self.weights.len() - 1;
        for (k, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let mut z = w.dot(&a);
            z += b;
            if k < last {
                z.mapv_inplace(elu);
            }
            a = z;
        }
        Ok(a)
    }

    /// Reverse-mode pass: given dL/dy for the batch, returns parameter
    /// gradients and dL/dx.
    pub fn backward(
        &self,
        cache: &MlpCache<F>,
        output_grad: &Array2<F>,
    ) -> Result<(MlpGrads<F>, Array2<F>)> {
        if output_grad.ncols() != self.output_dim() {
            return Err(Error::shape(
                format!("mlp backward (layer {} output)", self.weights.len() - 1),
                self.output_dim(),
                output_grad.ncols(),
            ));
        }
        let mut grads = MlpGrads::zeros_like(self);
        let mut g = output_grad.clone();
        for k in (0..self.weights.len()).rev() {
            grads.d_weights[k] = g.t().dot(&cache.inputs[k]);
            grads.d_biases[k] = g.sum_axis(Axis(0));
            let mut gx = g.dot(&self.weights[k]);
            if k > 0 {
                gx.zip_mut_with(&cache.pre[k - 1], |gi, &zi| *gi *= elu_deriv(zi));
            }
            g = gx;
        }
        Ok((grads, g))
    }

    /// Gradients of `<output, output_grad>` for a single input, with
    /// respect to all parameters and the input.
    pub fn gradient(
        &self,
        x: ArrayView1<F>,
        output_grad: ArrayView1<F>,
    ) -> Result<(MlpGrads<F>, Array1<F>)> {
        let xb = x
            .to_owned()
            .into_shape_with_order((1, x.len()))
            .expect("row reshape");
        let gb = output_grad
            .to_owned()
            .into_shape_with_order((1, output_grad.len()))
            .expect("row reshape");
        let (_, cache) = self.forward_batch_cached(&xb)?;
        let (grads, dx) = self.backward(&cache, &gb)?;
        Ok((grads, dx.row(0).to_owned()))
    }

    /// Copies parameters from another network of identical shape.
    pub fn copy_from(&mut self, other: &Mlp<F>) -> Result<()> {
        if self.layer_sizes != other.layer_sizes {
            return Err(Error::IncompatibleCheckpoint(format!(
                "layer sizes {:?} vs {:?}",
                self.layer_sizes, other.layer_sizes
            )));
        }
        for (a, b) in self.weights.iter_mut().zip(&other.weights) {
            a.assign(b);
        }
        for (a, b) in self.biases.iter_mut().zip(&other.biases) {
            a.assign(b);
        }
        Ok(())
    }
}

/// Gram-Schmidt orthogonalization of a Gaussian matrix, scaled by `gain`.
/// For non-square shapes the longer dimension keeps unit-norm rows/columns.
fn orthogonal_init<F: Scalar, R: Rng>(dim: (usize, usize), gain: f64, rng: &mut R) -> Array2<F> {
    let (rows, cols) = dim;
    let transpose = rows < cols;
    let (n, m) = if transpose { (cols, rows) } else { (rows, cols) };
    // n >= m: orthonormalize the m columns of an n x m Gaussian matrix.
    let mut a: Vec<Vec<f64>> = (0..m)
        .map(|_| {
            (0..n)
                .map(|_| StandardNormal.sample(rng))
                .collect::<Vec<f64>>()
        })
        .collect();
    for j in 0..m {
        for i in 0..j {
            let dot: f64 = a[j].iter().zip(&a[i]).map(|(x, y)| x * y).sum();
            let (head, tail) = a.split_at_mut(j);
            for (x, y) in tail[0].iter_mut().zip(&head[i]) {
                *x -= dot * y;
            }
        }
        let norm: f64 = a[j].iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
        for x in a[j].iter_mut() {
            *x /= norm;
        }
    }
    Array2::from_shape_fn((rows, cols), |(r, c)| {
        let v = if transpose { a[r][c] } else { a[c][r] };
        F::from_f64(gain * v)
    })
}
