use ndarray::{ArrayD, ArrayViewD, ArrayViewMutD};

use super::Scalar;
use crate::error::{Error, Result};

pub const LR_MIN: f64 = 1e-5;
pub const LR_MAX: f64 = 1e-2;

/// Adam with bias correction over an ordered list of parameter arrays.
///
/// Moments mirror the parameter shapes and are zero-initialized. The
/// learning rate lives here so the KL-adaptive schedule has one place
/// to update.
#[derive(Debug, Clone)]
pub struct AdamState<F: Scalar> {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub step_count: u64,
    first_moment: Vec<ArrayD<F>>,
    second_moment: Vec<ArrayD<F>>,
}

impl<F: Scalar> AdamState<F> {
    pub fn new(param_shapes: &[Vec<usize>], learning_rate: f64) -> Self {
        let zeros: Vec<ArrayD<F>> = param_shapes
            .iter()
            .map(|s| ArrayD::zeros(s.as_slice()))
            .collect();
        AdamState {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            step_count: 0,
            second_moment: zeros.clone(),
            first_moment: zeros,
        }
    }

    pub fn for_views(params: &[ArrayViewMutD<'_, F>], learning_rate: f64) -> Self {
        let shapes: Vec<Vec<usize>> = params.iter().map(|p| p.shape().to_vec()).collect();
        Self::new(&shapes, learning_rate)
    }

    /// Sets the rate from the adaptive schedule, clamped to its
    /// operating range.
    pub fn set_learning_rate(&mut self, lr: f64) {
        self.learning_rate = lr.clamp(LR_MIN, LR_MAX);
    }

    /// One Adam update. Rejects non-finite gradients before touching any
    /// state, so a faulty minibatch can be skipped cleanly.
    pub fn step(
        &mut self,
        params: &mut [ArrayViewMutD<'_, F>],
        grads: &[ArrayViewD<'_, F>],
    ) -> Result<()> {
        if params.len() != self.first_moment.len() || grads.len() != params.len() {
            return Err(Error::shape(
                "adam step (parameter list)",
                self.first_moment.len(),
                params.len(),
            ));
        }
        for (k, g) in grads.iter().enumerate() {
            if g.shape() != self.first_moment[k].shape() {
                return Err(Error::shape(
                    format!("adam step (gradient {k})"),
                    self.first_moment[k].len(),
                    g.len(),
                ));
            }
            if g.iter().any(|v| !v.as_f64().is_finite()) {
                return Err(Error::NumericFault(format!("gradient {k} in adam step")));
            }
        }

        self.step_count += 1;
        let t = self.step_count as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);
        let lr = F::from_f64(self.learning_rate);
        let b1 = F::from_f64(self.beta1);
        let b2 = F::from_f64(self.beta2);
        let one_m_b1 = F::from_f64(1.0 - self.beta1);
        let one_m_b2 = F::from_f64(1.0 - self.beta2);
        let inv_bc1 = F::from_f64(1.0 / bc1);
        let inv_bc2_sqrt = F::from_f64(1.0 / bc2.sqrt());
        let eps = F::from_f64(self.epsilon);

        for ((p, g), (m, v)) in params
            .iter_mut()
            .zip(grads)
            .zip(self.first_moment.iter_mut().zip(&mut self.second_moment))
        {
            ndarray::Zip::from(p)
                .and(g)
                .and(m)
                .and(v)
                .for_each(|p, &g, m, v| {
                    *m = b1 * *m + one_m_b1 * g;
                    *v = b2 * *v + one_m_b2 * g * g;
                    let m_hat = *m * inv_bc1;
                    let v_hat_sqrt = (*v).sqrt() * inv_bc2_sqrt;
                    *p = *p - lr * m_hat / (v_hat_sqrt + eps);
                });
        }
        Ok(())
    }

    #[cfg(test)]
    pub(crate) fn first_moment(&self) -> &[ArrayD<F>] {
        &self.first_moment
    }
}
