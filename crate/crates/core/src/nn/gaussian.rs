use ndarray::{Array1, Array2, ArrayView1, Axis};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::Scalar;

const LOG_STD_MIN: f64 = -20.0;
const LOG_STD_MAX: f64 = 2.0;

/// Diagonal-Gaussian policy head with a state-independent, learnable
/// per-dimension log standard deviation.
#[derive(Debug, Clone)]
pub struct GaussianHead<F: Scalar> {
    pub log_std: Array1<F>,
}

impl<F: Scalar> GaussianHead<F> {
    pub fn new(dim: usize, init_log_std: f64) -> Self {
        GaussianHead {
            log_std: Array1::from_elem(dim, F::from_f64(init_log_std.clamp(LOG_STD_MIN, LOG_STD_MAX))),
        }
    }

    pub fn dim(&self) -> usize {
        self.log_std.len()
    }

    /// Clamps log_std into [-20, 2]; call after optimizer updates.
    pub fn clamp_log_std(&mut self) {
        let lo = F::from_f64(LOG_STD_MIN);
        let hi = F::from_f64(LOG_STD_MAX);
        self.log_std.mapv_inplace(|v| v.max(lo).min(hi));
    }

    pub fn std(&self) -> Array1<F> {
        self.log_std.mapv(|v| v.exp())
    }

    /// action = mean + exp(log_std) * eps, with the exact log density.
    pub fn sample<R: Rng>(&self, mean: ArrayView1<F>, rng: &mut R) -> (Array1<F>, F) {
        let std = self.std();
        let action = Array1::from_shape_fn(mean.len(), |i| {
            let eps: f64 = StandardNormal.sample(rng);
            mean[i] + std[i] * F::from_f64(eps)
        });
        let lp = self.log_prob(mean, action.view());
        (action, lp)
    }

    /// Exact diagonal-Gaussian log density of `action` under N(mean, std^2).
    pub fn log_prob(&self, mean: ArrayView1<F>, action: ArrayView1<F>) -> F {
        let d = mean.len();
        let half_ln_2pi = F::from_f64(0.5 * (2.0 * std::f64::consts::PI).ln());
        let mut lp = -F::from_f64(d as f64) * half_ln_2pi;
        for i in 0..d {
            let ls = self.log_std[i];
            let z = (action[i] - mean[i]) / ls.exp();
            lp = lp - ls - F::from_f64(0.5) * z * z;
        }
        lp
    }

    /// Row-wise sampling over a batch of means; returns actions and log-probs.
    pub fn sample_batch<R: Rng>(&self, means: &Array2<F>, rng: &mut R) -> (Array2<F>, Array1<F>) {
        let (n, d) = means.dim();
        assert_eq!(d, self.dim());
        let std = self.std();
        let mut actions = Array2::zeros((n, d));
        for i in 0..n {
            for j in 0..d {
                let eps: f64 = StandardNormal.sample(rng);
                actions[[i, j]] = means[[i, j]] + std[j] * F::from_f64(eps);
            }
        }
        let lps = self.log_prob_batch(means, &actions);
        (actions, lps)
    }

    pub fn log_prob_batch(&self, means: &Array2<F>, actions: &Array2<F>) -> Array1<F> {
        let n = means.nrows();
        Array1::from_shape_fn(n, |i| self.log_prob(means.row(i), actions.row(i)))
    }

    /// Closed-form entropy: sum_d (0.5 ln(2 pi e) + log_std_d).
    pub fn entropy(&self) -> F {
        let c = F::from_f64(0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln());
        self.log_std.iter().map(|&ls| c + ls).sum()
    }

    /// d log_prob / d mean for each sample: (a - mu) / sigma^2.
    pub fn dlogp_dmean(&self, means: &Array2<F>, actions: &Array2<F>) -> Array2<F> {
        let std = self.std();
        let mut out = actions - means;
        for j in 0..self.dim() {
            let inv_var = F::one() / (std[j] * std[j]);
            out.index_axis_mut(Axis(1), j).mapv_inplace(|v| v * inv_var);
        }
        out
    }

    /// d log_prob / d log_std per dimension, summed over the batch rows
    /// weighted by `row_weight`: sum_i w_i * (z_ij^2 - 1).
    pub fn dlogp_dlogstd_weighted(
        &self,
        means: &Array2<F>,
        actions: &Array2<F>,
        row_weight: &Array1<F>,
    ) -> Array1<F> {
        let (n, d) = means.dim();
        let std = self.std();
        let mut out = Array1::zeros(d);
        for i in 0..n {
            let w = row_weight[i];
            for j in 0..d {
                let z = (actions[[i, j]] - means[[i, j]]) / std[j];
                out[j] += w * (z * z - F::one());
            }
        }
        out
    }
}

/// KL(old || new) between two diagonal Gaussians, averaged over rows.
pub fn gaussian_kl<F: Scalar>(
    old_means: &Array2<F>,
    old_log_std: &Array1<F>,
    new_means: &Array2<F>,
    new_log_std: &Array1<F>,
) -> f64 {
    let (n, d) = old_means.dim();
    let mut total = 0.0f64;
    for i in 0..n {
        for j in 0..d {
            let lso = old_log_std[j].as_f64();
            let lsn = new_log_std[j].as_f64();
            let vo = (2.0 * lso).exp();
            let vn = (2.0 * lsn).exp();
            let dm = old_means[[i, j]].as_f64() - new_means[[i, j]].as_f64();
            total += lsn - lso + (vo + dm * dm) / (2.0 * vn) - 0.5;
        }
    }
    total / n as f64
}
