//! Graph-network value model.

pub mod block;
pub mod chain;
pub mod checkpoint;
pub mod features;
pub mod mlp;

pub use block::{gn_block_forward, BlockCache, EdgeSet, GnBlock};
pub use chain::{chain_backward, chain_forward, ChainCache, ChainConfig, ChainParams, ACTIONS};
pub use checkpoint::{ModelKind, RawCheckpoint};
pub use features::{GraphFeatures, FEATURE_WIDTH};
pub use mlp::{Activation, Layer, Matrix, Mlp, MlpCache};
