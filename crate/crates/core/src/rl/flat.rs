//! Fully connected DQN baseline over a flattened observation.
//!
//! The input concatenates, in order: IoT features (`I × 3`), UAV-C features
//! (`J × 3`), one IoT→UAV delay per IoT device, the `J(J-1)` UAV→UAV delays
//! in row-major `(src, dst)` order with the diagonal skipped, one UAV→MEC
//! delay per UAV-C, and the MEC load term. The output holds `2J` values,
//! `[off, on]` per UAV-C. Smaller graphs are zero-padded into the trained
//! shape; larger ones are rejected.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gnn::checkpoint::{decode, encode, ModelKind};
use crate::gnn::{Activation, GraphFeatures, Matrix, Mlp, MlpCache, FEATURE_WIDTH};
use crate::rl::qnet::QNetwork;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlatDqnConfig {
    pub num_iot: usize,
    pub num_uav: usize,
    pub hidden: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlatDqn {
    pub config: FlatDqnConfig,
    pub mlp: Mlp,
}

#[derive(Debug, Clone)]
pub struct FlatCache {
    mlp: MlpCache,
    num_uav: usize,
}

pub fn flat_input_width(num_iot: usize, num_uav: usize) -> usize {
    num_iot * FEATURE_WIDTH + num_uav * FEATURE_WIDTH + num_iot + num_uav * (num_uav - 1) + num_uav + 1
}

impl FlatDqn {
    pub fn new(config: FlatDqnConfig, seed: u64) -> Result<Self> {
        if config.num_iot == 0 || config.num_uav == 0 || config.hidden.contains(&0) {
            return Err(Error::Config(format!("invalid flat DQN config {config:?}")));
        }
        let mut widths = vec![flat_input_width(config.num_iot, config.num_uav)];
        widths.extend(&config.hidden);
        widths.push(2 * config.num_uav);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mlp = Mlp::new(&widths, Activation::Relu, &mut rng);
        Ok(Self { config, mlp })
    }

    /// Flatten `obs` into this network's input, zero-padding missing nodes.
    pub fn flatten(&self, obs: &GraphFeatures) -> Result<Vec<f64>> {
        let (ni, nj) = (self.config.num_iot, self.config.num_uav);
        let (oi, oj) = (obs.num_iot(), obs.num_uav());
        if oi > ni || oj > nj {
            return Err(Error::Shape(format!(
                "observation has {oi} IoT / {oj} UAV-C, network was built for {ni} / {nj}"
            )));
        }
        let mut x = vec![0.0; flat_input_width(ni, nj)];
        let mut at = 0;
        x[..obs.iot.data.len()].copy_from_slice(&obs.iot.data);
        at += ni * FEATURE_WIDTH;
        x[at..at + obs.uav.data.len()].copy_from_slice(&obs.uav.data);
        at += nj * FEATURE_WIDTH;
        for (e, &(i, _)) in obs.iot_uav.endpoints.iter().enumerate() {
            x[at + i] += obs.iot_uav.features.get(e, 0);
        }
        at += ni;
        for (e, &(s, d)) in obs.uav_uav.endpoints.iter().enumerate() {
            if s == d {
                continue;
            }
            let col = if d < s { d } else { d - 1 };
            x[at + s * (nj - 1) + col] = obs.uav_uav.features.get(e, 0);
        }
        at += nj * (nj - 1);
        for (e, &(j, _)) in obs.uav_mec.endpoints.iter().enumerate() {
            x[at + j] = obs.uav_mec.features.get(e, 0);
        }
        at += nj;
        x[at] = obs.mec.get(0, 0);
        Ok(x)
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        encode(ModelKind::FlatDqn, &serde_json::to_string(&self.config)?, &[&self.mlp])
    }

    pub fn from_bytes(buf: &[u8]) -> Result<Self> {
        let raw = decode(buf)?;
        if raw.kind != ModelKind::FlatDqn {
            return Err(Error::Checkpoint(format!("expected a flat DQN checkpoint, found {:?}", raw.kind)));
        }
        let config: FlatDqnConfig = serde_json::from_str(&raw.header)?;
        let mut mlps = raw.mlps;
        let expected = Self::new(config.clone(), 0)?;
        match mlps.pop() {
            Some(mlp) if mlps.is_empty() && mlp.widths() == expected.mlp.widths() => Ok(Self { config, mlp }),
            _ => Err(Error::Checkpoint("flat DQN layers disagree with the stored config".into())),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

impl QNetwork for FlatDqn {
    type Cache = FlatCache;

    fn forward_cached(&self, obs: &GraphFeatures) -> Result<(Matrix, FlatCache)> {
        let x = self.flatten(obs)?;
        let cache = self.mlp.forward_batch(&Matrix::from_vec(1, x.len(), x)?)?;
        let j = obs.num_uav();
        let q = Matrix::from_vec(j, 2, cache.output().data[..2 * j].to_vec())?;
        Ok((q, FlatCache { mlp: cache, num_uav: j }))
    }

    fn backward(&self, cache: &FlatCache, d_q: &Matrix, grad: &mut [f64]) -> Result<()> {
        if d_q.rows != cache.num_uav || d_q.cols != 2 {
            return Err(Error::Shape(format!(
                "upstream is {}x{}, Q is {}x2",
                d_q.rows, d_q.cols, cache.num_uav
            )));
        }
        let mut up = Matrix::zeros(1, 2 * self.config.num_uav);
        up.data[..d_q.data.len()].copy_from_slice(&d_q.data);
        self.mlp.backward_batch(&cache.mlp, &up, grad)?;
        Ok(())
    }

    fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.mlp.num_params());
        self.mlp.write_params(&mut out);
        out
    }

    fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.mlp.num_params() {
            return Err(Error::Shape(format!(
                "{} parameters for a network with {}",
                params.len(),
                self.mlp.num_params()
            )));
        }
        self.mlp.read_params(params)?;
        Ok(())
    }

    fn num_params(&self) -> usize {
        self.mlp.num_params()
    }

    fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()?)?;
        Ok(())
    }
}
