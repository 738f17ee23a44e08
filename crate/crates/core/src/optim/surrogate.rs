//! Single-hidden-layer network with random fixed hidden weights and a
//! least-squares output layer, used to estimate fitness cheaply.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Chromosome;
use crate::error::{LfcError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", deny_unknown_fields)]
pub enum Activation {
    /// Normalized firing rate of an integrate-and-fire unit:
    /// `clamp(gain * (net - threshold), 0, 1)`.
    ThresholdRate { gain: f64, threshold: f64 },
    Sigmoid,
    Identity,
}

impl Default for Activation {
    fn default() -> Self {
        Activation::ThresholdRate {
            gain: 1.0,
            threshold: 0.0,
        }
    }
}

impl Activation {
    #[inline]
    pub fn apply(&self, net: f64) -> f64 {
        match *self {
            Activation::ThresholdRate { gain, threshold } => (gain * (net - threshold)).clamp(0.0, 1.0),
            Activation::Sigmoid => 1.0 / (1.0 + (-net).exp()),
            Activation::Identity => net,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SurrogateConfig {
    pub hidden: usize,
    pub activation: Activation,
}

impl Default for SurrogateConfig {
    fn default() -> Self {
        SurrogateConfig {
            hidden: 40,
            activation: Activation::default(),
        }
    }
}

impl SurrogateConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden == 0 {
            return Err(LfcError::config("surrogate needs at least one hidden unit"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitReport {
    /// Euclidean norm of `H beta - y`.
    pub residual: f64,
    pub rank: usize,
    /// True when `H` lost rank and the minimum-norm solution was taken.
    pub rank_deficient: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateNet {
    /// Hidden weights, `n_inputs x hidden`.
    w: DMatrix<f64>,
    b: DVector<f64>,
    beta: DVector<f64>,
    activation: Activation,
}

impl SurrogateNet {
    /// Hidden layer drawn uniformly from `[-1, 1]`; output weights zero.
    pub fn random<R: Rng>(n_inputs: usize, hidden: usize, activation: Activation, rng: &mut R) -> Self {
        let w = DMatrix::from_fn(n_inputs, hidden, |_, _| rng.random_range(-1.0..=1.0));
        let b = DVector::from_fn(hidden, |_, _| rng.random_range(-1.0..=1.0));
        SurrogateNet {
            w,
            b,
            beta: DVector::zeros(hidden),
            activation,
        }
    }

    pub fn from_hidden(w: DMatrix<f64>, b: DVector<f64>, activation: Activation) -> Result<Self> {
        if w.ncols() != b.len() {
            return Err(LfcError::domain(format!(
                "hidden weights have {} columns but {} biases",
                w.ncols(),
                b.len()
            )));
        }
        let m = b.len();
        Ok(SurrogateNet {
            w,
            b,
            beta: DVector::zeros(m),
            activation,
        })
    }

    pub fn n_inputs(&self) -> usize {
        self.w.nrows()
    }

    pub fn hidden(&self) -> usize {
        self.b.len()
    }

    pub fn beta(&self) -> &DVector<f64> {
        &self.beta
    }

    pub fn set_beta(&mut self, beta: DVector<f64>) -> Result<()> {
        if beta.len() != self.hidden() {
            return Err(LfcError::domain("beta length does not match hidden layer"));
        }
        self.beta = beta;
        Ok(())
    }

    /// Hidden-unit outputs for one input vector.
    pub fn hidden_layer(&self, x: &[f64]) -> DVector<f64> {
        DVector::from_fn(self.hidden(), |j, _| {
            let net: f64 = x.iter().enumerate().map(|(i, xi)| self.w[(i, j)] * xi).sum::<f64>() + self.b[j];
            self.activation.apply(net)
        })
    }

    /// Hidden-layer output matrix, one row per sample.
    pub fn design_matrix(&self, xs: &[&[f64]]) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(xs.len(), self.hidden());
        for (r, x) in xs.iter().enumerate() {
            h.set_row(r, &self.hidden_layer(x).transpose());
        }
        h
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        self.hidden_layer(x).dot(&self.beta)
    }

    /// Solves `H beta ≈ y` in the least-squares sense (minimum-norm when rank deficient).
    pub fn fit(&mut self, samples: &[(Vec<f64>, f64)]) -> Result<FitReport> {
        let m = self.hidden();
        if samples.len() < m {
            return Err(LfcError::domain(format!(
                "surrogate with {m} hidden units needs >= {m} samples, got {}",
                samples.len()
            )));
        }
        if let Some((x, _)) = samples.iter().find(|(x, _)| x.len() != self.n_inputs()) {
            return Err(LfcError::domain(format!(
                "sample has {} inputs, network expects {}",
                x.len(),
                self.n_inputs()
            )));
        }
        if samples.iter().any(|(_, y)| !y.is_finite()) {
            return Err(LfcError::domain("surrogate targets must be finite"));
        }
        let xs: Vec<&[f64]> = samples.iter().map(|(x, _)| x.as_slice()).collect();
        let h = self.design_matrix(&xs);
        let y = DVector::from_iterator(samples.len(), samples.iter().map(|(_, y)| *y));
        let svd = h.clone().svd(true, true);
        let smax = svd.singular_values.max();
        let eps = smax * 1e-12 * (samples.len().max(m) as f64);
        let rank = svd.singular_values.iter().filter(|&&s| s > eps).count();
        let beta = svd
            .solve(&y, eps)
            .map_err(|e| LfcError::domain(format!("least squares failed: {e}")))?;
        let residual = (&h * &beta - &y).norm();
        self.beta = beta;
        Ok(FitReport {
            residual,
            rank,
            rank_deficient: rank < m,
        })
    }
}

/// Draws a hidden layer from `rng` and fits the output weights to `samples`.
pub fn surrogate_train<R: Rng>(
    samples: &[(Vec<f64>, f64)],
    cfg: &SurrogateConfig,
    rng: &mut R,
) -> Result<(SurrogateNet, FitReport)> {
    cfg.validate()?;
    let n = samples
        .first()
        .map(|(x, _)| x.len())
        .ok_or_else(|| LfcError::domain("no training samples"))?;
    let mut net = SurrogateNet::random(n, cfg.hidden, cfg.activation, rng);
    let report = net.fit(samples)?;
    Ok((net, report))
}

pub fn surrogate_predict(net: &SurrogateNet, c: &Chromosome) -> f64 {
    net.predict(&c.0)
}
