//! Four-block heterogeneous chain producing a `J × 2` table of state-action
//! values, one row per UAV-C (column 0: unit off, column 1: unit on).
//!
//! 1. IoT → UAV-C over raw features, giving UAV-C latents `f'`.
//! 2. UAV-C → UAV-C over `f'` on both ends, giving `f''`.
//! 3. UAV-C → MEC with `f''` as sources and the padded MEC row as destination.
//! 4. MEC → UAV-C with the MEC latent as source and raw UAV-C features as
//!    destinations; its node MLP is the 2-wide Q head.
//!
//! Every block sums over incoming edges, so the same parameters run on any
//! number of IoT devices and UAV-Cs.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gnn::block::{BlockCache, GnBlock};
use crate::gnn::features::{GraphFeatures, FEATURE_WIDTH};
use crate::gnn::mlp::{Activation, Matrix, Mlp};

/// Number of Q-values per UAV-C.
pub const ACTIONS: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    /// Hidden widths of every edge and node MLP.
    pub hidden: Vec<usize>,
    /// Width of edge latents and intermediate node latents.
    pub latent: usize,
    /// Width of the (zero-padded) MEC node features.
    pub mec_width: usize,
    pub activation: Activation,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            hidden: vec![64, 64],
            latent: 32,
            mec_width: FEATURE_WIDTH,
            activation: Activation::Relu,
        }
    }
}

impl ChainConfig {
    pub fn small() -> Self {
        Self { hidden: vec![32], latent: 16, ..Self::default() }
    }

    fn widths(&self, input: usize, output: usize) -> Vec<usize> {
        let mut w = vec![input];
        w.extend(&self.hidden);
        w.push(output);
        w
    }

    /// `(edge MLP widths, node MLP widths)` for each of the four blocks.
    pub fn block_widths(&self) -> [(Vec<usize>, Vec<usize>); 4] {
        let (f, l, m) = (FEATURE_WIDTH, self.latent, self.mec_width);
        [
            (self.widths(f + f + f, l), self.widths(l + f, l)),
            (self.widths(f + l + l, l), self.widths(l + l, l)),
            (self.widths(f + l + m, l), self.widths(l + m, l)),
            (self.widths(f + l + f, l), self.widths(l + f, ACTIONS)),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        if self.latent == 0 || self.hidden.contains(&0) || self.mec_width < 1 {
            return Err(Error::Config(format!("invalid chain config {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainParams {
    pub config: ChainConfig,
    pub blocks: [GnBlock; 4],
}

#[derive(Debug, Clone)]
pub struct ChainCache {
    fingerprint: u64,
    blocks: [BlockCache; 4],
    num_uav: usize,
}

impl ChainParams {
    /// Seeded fan-in-scaled uniform initialisation.
    pub fn new(config: ChainConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let act = config.activation;
        let blocks = config.block_widths().map(|(e, n)| GnBlock {
            edge_mlp: Mlp::new(&e, act, &mut rng),
            node_mlp: Mlp::new(&n, act, &mut rng),
        });
        Ok(Self { config, blocks })
    }

    pub fn zeros(config: ChainConfig) -> Result<Self> {
        config.validate()?;
        let act = config.activation;
        let blocks = config.block_widths().map(|(e, n)| GnBlock {
            edge_mlp: Mlp::zeros(&e, act),
            node_mlp: Mlp::zeros(&n, act),
        });
        Ok(Self { config, blocks })
    }

    pub fn num_params(&self) -> usize {
        self.blocks.iter().map(GnBlock::num_params).sum()
    }

    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        for b in &self.blocks {
            b.write_params(&mut out);
        }
        out
    }

    pub fn set_params(&mut self, src: &[f64]) -> Result<()> {
        if src.len() != self.num_params() {
            return Err(Error::Shape(format!(
                "{} parameters for a chain with {}",
                src.len(),
                self.num_params()
            )));
        }
        let mut at = 0;
        for b in &mut self.blocks {
            at += b.read_params(&src[at..])?;
        }
        Ok(())
    }

    /// FNV-1a over the parameter bits; ties caches to the parameters that
    /// produced them.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in &self.blocks {
            for mlp in [&b.edge_mlp, &b.node_mlp] {
                for l in &mlp.layers {
                    for v in l.weights.iter().chain(&l.bias) {
                        h ^= v.to_bits();
                        h = h.wrapping_mul(0x0000_0100_0000_01b3);
                    }
                }
            }
        }
        h
    }

    /// A copy whose MEC input is `width` wide. The new first-layer columns of
    /// block 3 are zero, so outputs are unchanged on zero-padded features.
    pub fn widen_mec(&self, width: usize) -> Result<Self> {
        let old = self.config.mec_width;
        if width < old {
            return Err(Error::Shape(format!("cannot narrow MEC width {old} to {width}")));
        }
        let extra = width - old;
        let mut out = self.clone();
        out.config.mec_width = width;
        let l = self.config.latent;
        // MEC features sit at the end of the block-3 edge input (f + l + m)
        // and of the node input (l + m).
        for (mlp, prefix) in [
            (&mut out.blocks[2].edge_mlp, FEATURE_WIDTH + l),
            (&mut out.blocks[2].node_mlp, l),
        ] {
            let first = &mut mlp.layers[0];
            let mut weights = Vec::with_capacity(first.outputs * (first.inputs + extra));
            for o in 0..first.outputs {
                let row = &first.weights[o * first.inputs..(o + 1) * first.inputs];
                weights.extend_from_slice(&row[..prefix + old]);
                weights.extend(std::iter::repeat(0.0).take(extra));
            }
            first.inputs += extra;
            first.weights = weights;
        }
        Ok(out)
    }

    pub fn forward(&self, features: &GraphFeatures) -> Result<Matrix> {
        Ok(self.forward_cached(features)?.0)
    }

    pub fn forward_cached(&self, features: &GraphFeatures) -> Result<(Matrix, ChainCache)> {
        features.validate(self.config.mec_width)?;
        let [b1, b2, b3, b4] = &self.blocks;
        let (_, f1, c1) = b1.forward(&features.iot, &features.uav, &features.iot_uav)?;
        let (_, f2, c2) = b2.forward(&f1, &f1, &features.uav_uav)?;
        let (_, mec, c3) = b3.forward(&f2, &features.mec, &features.uav_mec)?;
        let (_, q, c4) = b4.forward(&mec, &features.uav, &features.mec_uav)?;
        Ok((
            q,
            ChainCache {
                fingerprint: self.fingerprint(),
                blocks: [c1, c2, c3, c4],
                num_uav: features.num_uav(),
            },
        ))
    }

    /// Accumulate ∂L/∂θ for upstream ∂L/∂Q into `grad` (layout of
    /// [`ChainParams::params`]).
    pub fn backward(&self, cache: &ChainCache, d_q: &Matrix, grad: &mut [f64]) -> Result<()> {
        if cache.fingerprint != self.fingerprint() {
            return Err(Error::Shape("stale forward cache: parameters changed since forward".into()));
        }
        if d_q.rows != cache.num_uav || d_q.cols != ACTIONS {
            return Err(Error::Shape(format!(
                "upstream is {}x{}, Q is {}x{ACTIONS}",
                d_q.rows, d_q.cols, cache.num_uav
            )));
        }
        if grad.len() != self.num_params() {
            return Err(Error::Shape(format!(
                "gradient buffer of {} for {} parameters",
                grad.len(),
                self.num_params()
            )));
        }
        let sizes: Vec<usize> = self.blocks.iter().map(GnBlock::num_params).collect();
        let (g1, rest) = grad.split_at_mut(sizes[0]);
        let (g2, rest) = rest.split_at_mut(sizes[1]);
        let (g3, g4) = rest.split_at_mut(sizes[2]);

        let [b1, b2, b3, b4] = &self.blocks;
        let [c1, c2, c3, c4] = &cache.blocks;
        let (d_mec, _) = b4.backward(c4, d_q, g4)?;
        let (d_f2, _) = b3.backward(c3, &d_mec, g3)?;
        let (d_src, d_dst) = b2.backward(c2, &d_f2, g2)?;
        let mut d_f1 = d_src;
        for (a, b) in d_f1.data.iter_mut().zip(&d_dst.data) {
            *a += b;
        }
        b1.backward(c1, &d_f1, g1)?;
        Ok(())
    }
}

/// `J × 2` state-action values.
pub fn chain_forward(params: &ChainParams, features: &GraphFeatures) -> Result<Matrix> {
    params.forward(features)
}

/// Gradients of `Σ dQ ⊙ Q` with respect to every chain parameter.
pub fn chain_backward(params: &ChainParams, cache: &ChainCache, d_q: &Matrix) -> Result<Vec<f64>> {
    let mut grad = vec![0.0; params.num_params()];
    params.backward(cache, d_q, &mut grad)?;
    Ok(grad)
}
