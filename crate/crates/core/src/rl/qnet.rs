//! Value networks scoring every UAV-C's off/on action.

use std::path::Path;

use crate::error::Result;
use crate::gnn::{ChainCache, ChainParams, GraphFeatures, Matrix};

/// A differentiable map from a graph observation to a `J × 2` Q table.
pub trait QNetwork: Clone {
    type Cache;

    fn forward_cached(&self, obs: &GraphFeatures) -> Result<(Matrix, Self::Cache)>;

    /// Accumulate ∂L/∂θ given ∂L/∂Q into `grad`.
    fn backward(&self, cache: &Self::Cache, d_q: &Matrix, grad: &mut [f64]) -> Result<()>;

    fn params(&self) -> Vec<f64>;
    fn set_params(&mut self, params: &[f64]) -> Result<()>;
    fn num_params(&self) -> usize;
    fn save(&self, path: &Path) -> Result<()>;

    fn q_values(&self, obs: &GraphFeatures) -> Result<Matrix> {
        Ok(self.forward_cached(obs)?.0)
    }
}

impl QNetwork for ChainParams {
    type Cache = ChainCache;

    fn forward_cached(&self, obs: &GraphFeatures) -> Result<(Matrix, ChainCache)> {
        ChainParams::forward_cached(self, obs)
    }

    fn backward(&self, cache: &ChainCache, d_q: &Matrix, grad: &mut [f64]) -> Result<()> {
        ChainParams::backward(self, cache, d_q, grad)
    }

    fn params(&self) -> Vec<f64> {
        ChainParams::params(self)
    }

    fn set_params(&mut self, params: &[f64]) -> Result<()> {
        ChainParams::set_params(self, params)
    }

    fn num_params(&self) -> usize {
        ChainParams::num_params(self)
    }

    fn save(&self, path: &Path) -> Result<()> {
        ChainParams::save(self, path)
    }
}
