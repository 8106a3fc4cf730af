//! Edge-to-node graph-network block.
//!
//! Each edge latent is `φ_e(f_edge ∥ f_src ∥ f_dst)`. Latents are summed per
//! destination node and the node output is `φ_v(Σ ∥ f_dst)`. Destinations
//! with no incoming edge aggregate to zero.

use crate::error::{Error, Result};
use crate::gnn::mlp::{Matrix, Mlp, MlpCache};

/// Directed edges between a source and a destination node set.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSet {
    /// `(source index, destination index)` per edge.
    pub endpoints: Vec<(usize, usize)>,
    /// One feature row per edge.
    pub features: Matrix,
}

impl EdgeSet {
    pub fn empty(width: usize) -> Self {
        Self { endpoints: Vec::new(), features: Matrix::zeros(0, width) }
    }

    pub fn len(&self) -> usize {
        self.endpoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.endpoints.is_empty()
    }

    pub fn push(&mut self, src: usize, dst: usize, features: &[f64]) {
        debug_assert_eq!(features.len(), self.features.cols);
        self.endpoints.push((src, dst));
        self.features.data.extend_from_slice(features);
        self.features.rows += 1;
    }

    pub fn validate(&self, num_src: usize, num_dst: usize, width: usize, name: &str) -> Result<()> {
        if self.features.rows != self.endpoints.len() || self.features.cols != width {
            return Err(Error::Shape(format!(
                "{name}: {} endpoints with a {}x{} feature matrix, expected width {width}",
                self.endpoints.len(),
                self.features.rows,
                self.features.cols
            )));
        }
        for &(s, d) in &self.endpoints {
            if s >= num_src {
                return Err(Error::OutOfRange { what: "edge source", index: s, len: num_src });
            }
            if d >= num_dst {
                return Err(Error::OutOfRange { what: "edge destination", index: d, len: num_dst });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GnBlock {
    pub edge_mlp: Mlp,
    pub node_mlp: Mlp,
}

#[derive(Debug, Clone)]
pub struct BlockCache {
    endpoints: Vec<(usize, usize)>,
    edge: MlpCache,
    node: MlpCache,
    num_src: usize,
    edge_width: usize,
    src_width: usize,
    dst_width: usize,
}

impl GnBlock {
    pub fn num_params(&self) -> usize {
        self.edge_mlp.num_params() + self.node_mlp.num_params()
    }

    pub fn write_params(&self, out: &mut Vec<f64>) {
        self.edge_mlp.write_params(out);
        self.node_mlp.write_params(out);
    }

    pub fn read_params(&mut self, src: &[f64]) -> Result<usize> {
        let n = self.edge_mlp.read_params(src)?;
        Ok(n + self.node_mlp.read_params(&src[n..])?)
    }

    /// Returns `(edge latents, node outputs, cache)`.
    pub fn forward(&self, src: &Matrix, dst: &Matrix, edges: &EdgeSet) -> Result<(Matrix, Matrix, BlockCache)> {
        let (ew, sw, dw) = (edges.features.cols, src.cols, dst.cols);
        edges.validate(src.rows, dst.rows, ew, "block edges")?;
        if self.edge_mlp.input_width() != ew + sw + dw {
            return Err(Error::Shape(format!(
                "edge MLP takes {} inputs, features give {ew}+{sw}+{dw}",
                self.edge_mlp.input_width()
            )));
        }
        let latent = self.edge_mlp.output_width();
        if self.node_mlp.input_width() != latent + dw {
            return Err(Error::Shape(format!(
                "node MLP takes {} inputs, block gives {latent}+{dw}",
                self.node_mlp.input_width()
            )));
        }

        let mut edge_in = Matrix::zeros(edges.len(), ew + sw + dw);
        for (e, &(s, d)) in edges.endpoints.iter().enumerate() {
            let row = edge_in.row_mut(e);
            row[..ew].copy_from_slice(edges.features.row(e));
            row[ew..ew + sw].copy_from_slice(src.row(s));
            row[ew + sw..].copy_from_slice(dst.row(d));
        }
        let edge_cache = self.edge_mlp.forward_batch(&edge_in)?;
        let edge_latents = edge_cache.output().clone();

        let mut node_in = Matrix::zeros(dst.rows, latent + dw);
        for (e, &(_, d)) in edges.endpoints.iter().enumerate() {
            let lat = edge_latents.row(e);
            for (acc, v) in node_in.row_mut(d)[..latent].iter_mut().zip(lat) {
                *acc += v;
            }
        }
        for d in 0..dst.rows {
            node_in.row_mut(d)[latent..].copy_from_slice(dst.row(d));
        }
        let node_cache = self.node_mlp.forward_batch(&node_in)?;
        let nodes = node_cache.output().clone();
        let cache = BlockCache {
            endpoints: edges.endpoints.clone(),
            edge: edge_cache,
            node: node_cache,
            num_src: src.rows,
            edge_width: ew,
            src_width: sw,
            dst_width: dw,
        };
        Ok((edge_latents, nodes, cache))
    }

    /// Backpropagate ∂L/∂(node outputs). Parameter gradients (edge MLP then
    /// node MLP) are added into `grad`; returns `(∂L/∂src, ∂L/∂dst)`.
    pub fn backward(&self, cache: &BlockCache, d_nodes: &Matrix, grad: &mut [f64]) -> Result<(Matrix, Matrix)> {
        if grad.len() != self.num_params() {
            return Err(Error::Shape(format!(
                "gradient buffer of {} for a block with {} parameters",
                grad.len(),
                self.num_params()
            )));
        }
        let (edge_grad, node_grad) = grad.split_at_mut(self.edge_mlp.num_params());
        let d_node_in = self.node_mlp.backward_batch(&cache.node, d_nodes, node_grad)?;
        let latent = self.edge_mlp.output_width();
        let (ew, sw, dw) = (cache.edge_width, cache.src_width, cache.dst_width);
        let num_dst = d_node_in.rows;

        let mut d_dst = Matrix::zeros(num_dst, dw);
        for d in 0..num_dst {
            d_dst.row_mut(d).copy_from_slice(&d_node_in.row(d)[latent..]);
        }
        let mut d_edge_out = Matrix::zeros(cache.endpoints.len(), latent);
        for (e, &(_, d)) in cache.endpoints.iter().enumerate() {
            d_edge_out.row_mut(e).copy_from_slice(&d_node_in.row(d)[..latent]);
        }
        let d_edge_in = self.edge_mlp.backward_batch(&cache.edge, &d_edge_out, edge_grad)?;

        let mut d_src = Matrix::zeros(cache.num_src, sw);
        for (e, &(s, d)) in cache.endpoints.iter().enumerate() {
            let row = d_edge_in.row(e);
            for (acc, v) in d_src.row_mut(s).iter_mut().zip(&row[ew..ew + sw]) {
                *acc += v;
            }
            for (acc, v) in d_dst.row_mut(d).iter_mut().zip(&row[ew + sw..]) {
                *acc += v;
            }
        }
        Ok((d_src, d_dst))
    }
}

/// One block evaluation, returning `(edge latents, node latents)`.
pub fn gn_block_forward(
    block: &GnBlock,
    src: &Matrix,
    dst: &Matrix,
    edges: &EdgeSet,
) -> Result<(Matrix, Matrix)> {
    let (e, n, _) = block.forward(src, dst, edges)?;
    Ok((e, n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gnn::mlp::Activation;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> Matrix {
        Matrix::from_vec(rows, cols, (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
    }

    fn block(rng: &mut impl Rng, ew: usize, sw: usize, dw: usize, latent: usize, out: usize) -> GnBlock {
        GnBlock {
            edge_mlp: Mlp::new(&[ew + sw + dw, 5, latent], Activation::Relu, rng),
            node_mlp: Mlp::new(&[latent + dw, 5, out], Activation::Relu, rng),
        }
    }

    #[test]
    fn single_edge_aggregate_equals_its_latent() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let b = block(&mut rng, 2, 3, 3, 4, 2);
        let src = random_matrix(&mut rng, 1, 3);
        let dst = random_matrix(&mut rng, 1, 3);
        let mut edges = EdgeSet::empty(2);
        edges.push(0, 0, &[0.5, -0.5]);
        let (lat, nodes, _) = b.forward(&src, &dst, &edges).unwrap();
        let mut node_in = lat.row(0).to_vec();
        node_in.extend_from_slice(dst.row(0));
        assert_eq!(nodes.row(0), b.node_mlp.forward(&node_in).unwrap().as_slice());
    }

    #[test]
    fn duplicated_edge_doubles_aggregate() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut b = block(&mut rng, 2, 3, 3, 4, 4);
        // node MLP that exposes the aggregate: identity on the first 4 inputs
        b.node_mlp = Mlp::zeros(&[7, 4], Activation::Relu);
        for k in 0..4 {
            b.node_mlp.layers[0].weights[k * 7 + k] = 1.0;
        }
        let src = random_matrix(&mut rng, 1, 3);
        let dst = random_matrix(&mut rng, 1, 3);
        let mut one = EdgeSet::empty(2);
        one.push(0, 0, &[0.1, 0.2]);
        let mut two = one.clone();
        two.push(0, 0, &[0.1, 0.2]);
        let (_, a, _) = b.forward(&src, &dst, &one).unwrap();
        let (_, c, _) = b.forward(&src, &dst, &two).unwrap();
        for (x, y) in a.data.iter().zip(&c.data) {
            assert!((2.0 * x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn matches_edge_by_edge_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..10 {
            let (ns, nd) = (rng.random_range(1..6), rng.random_range(1..5));
            let b = block(&mut rng, 3, 4, 2, 3, 2);
            let src = random_matrix(&mut rng, ns, 4);
            let dst = random_matrix(&mut rng, nd, 2);
            let mut edges = EdgeSet::empty(3);
            for _ in 0..rng.random_range(0..10) {
                let f: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
                edges.push(rng.random_range(0..ns), rng.random_range(0..nd), &f);
            }
            let (_, nodes) = gn_block_forward(&b, &src, &dst, &edges).unwrap();
            for d in 0..nd {
                let mut agg = vec![0.0; 3];
                for (e, &(s, dd)) in edges.endpoints.iter().enumerate() {
                    if dd != d {
                        continue;
                    }
                    let mut x = edges.features.row(e).to_vec();
                    x.extend_from_slice(src.row(s));
                    x.extend_from_slice(dst.row(d));
                    for (a, v) in agg.iter_mut().zip(b.edge_mlp.forward(&x).unwrap()) {
                        *a += v;
                    }
                }
                agg.extend_from_slice(dst.row(d));
                let want = b.node_mlp.forward(&agg).unwrap();
                for (g, w) in nodes.row(d).iter().zip(&want) {
                    assert!((g - w).abs() <= 1e-9 * w.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn bad_endpoint_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let b = block(&mut rng, 1, 1, 1, 2, 2);
        let mut edges = EdgeSet::empty(1);
        edges.push(3, 0, &[0.0]);
        let m = Matrix::zeros(2, 1);
        assert!(matches!(
            b.forward(&m, &m, &edges),
            Err(Error::OutOfRange { .. })
        ));
    }
}
