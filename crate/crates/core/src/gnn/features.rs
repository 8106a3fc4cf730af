//! Node and edge features of the heterogeneous offloading graph.
//!
//! | tensor     | layout                                  |
//! |------------|-----------------------------------------|
//! | IoT node   | `[Σ packet, Σ load, min deadline]`      |
//! | UAV-C node | `[remaining energy, proc. delay, C_j]`  |
//! | MEC node   | `[proc. delay, 0, …]` (zero padded)     |
//! | IoT→UAV    | `[link delay, x_j, y_j]`                |
//! | UAV→UAV    | `[link delay, x_dst, y_dst]`            |
//! | UAV→MEC    | `[link delay, x_j, y_j]`                |
//! | MEC→UAV    | `[link delay of (j, MEC), x_j, y_j]`    |

use crate::error::{Error, Result};
use crate::gnn::block::EdgeSet;
use crate::gnn::mlp::Matrix;

/// Width of the raw IoT/UAV-C node features and of every edge feature.
pub const FEATURE_WIDTH: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct GraphFeatures {
    pub iot: Matrix,
    pub uav: Matrix,
    /// One row; width is the chain's MEC width.
    pub mec: Matrix,
    pub iot_uav: EdgeSet,
    pub uav_uav: EdgeSet,
    pub uav_mec: EdgeSet,
    pub mec_uav: EdgeSet,
}

impl GraphFeatures {
    pub fn num_iot(&self) -> usize {
        self.iot.rows
    }

    pub fn num_uav(&self) -> usize {
        self.uav.rows
    }

    pub fn validate(&self, mec_width: usize) -> Result<()> {
        let (i, j) = (self.num_iot(), self.num_uav());
        if self.iot.cols != FEATURE_WIDTH || self.uav.cols != FEATURE_WIDTH {
            return Err(Error::Shape(format!(
                "node features must be {FEATURE_WIDTH} wide, got IoT {} / UAV {}",
                self.iot.cols, self.uav.cols
            )));
        }
        if j == 0 {
            return Err(Error::Shape("graph has no UAV-C".into()));
        }
        if self.mec.rows != 1 || self.mec.cols != mec_width {
            return Err(Error::Shape(format!(
                "MEC features are {}x{}, expected 1x{mec_width}",
                self.mec.rows, self.mec.cols
            )));
        }
        self.iot_uav.validate(i, j, FEATURE_WIDTH, "IoT->UAV")?;
        self.uav_uav.validate(j, j, FEATURE_WIDTH, "UAV->UAV")?;
        self.uav_mec.validate(j, 1, FEATURE_WIDTH, "UAV->MEC")?;
        self.mec_uav.validate(1, j, FEATURE_WIDTH, "MEC->UAV")
    }

    /// Widen the MEC row with trailing zeros.
    pub fn pad_mec(&self, width: usize) -> Result<Self> {
        if width < self.mec.cols {
            return Err(Error::Shape(format!(
                "cannot shrink MEC features from {} to {width}",
                self.mec.cols
            )));
        }
        let mut row = self.mec.row(0).to_vec();
        row.resize(width, 0.0);
        Ok(Self { mec: Matrix::from_vec(1, width, row)?, ..self.clone() })
    }

    /// Relabel IoT devices: new index `perm[old]`. Edge order is preserved.
    pub fn permute_iot(&self, perm: &[usize]) -> Result<Self> {
        let iot = permute_rows(&self.iot, perm)?;
        let mut iot_uav = self.iot_uav.clone();
        for (s, _) in &mut iot_uav.endpoints {
            *s = perm[*s];
        }
        Ok(Self { iot, iot_uav, ..self.clone() })
    }

    /// Relabel UAV-Cs: new index `perm[old]`. Edge order is preserved.
    pub fn permute_uav(&self, perm: &[usize]) -> Result<Self> {
        let uav = permute_rows(&self.uav, perm)?;
        let mut out = Self { uav, ..self.clone() };
        for (_, d) in &mut out.iot_uav.endpoints {
            *d = perm[*d];
        }
        for (s, d) in &mut out.uav_uav.endpoints {
            *s = perm[*s];
            *d = perm[*d];
        }
        for (s, _) in &mut out.uav_mec.endpoints {
            *s = perm[*s];
        }
        for (_, d) in &mut out.mec_uav.endpoints {
            *d = perm[*d];
        }
        Ok(out)
    }
}

/// Row `r` of the input becomes row `perm[r]` of the output.
pub fn permute_rows(m: &Matrix, perm: &[usize]) -> Result<Matrix> {
    if perm.len() != m.rows {
        return Err(Error::Shape(format!("permutation of {} for {} rows", perm.len(), m.rows)));
    }
    let mut seen = vec![false; m.rows];
    let mut out = Matrix::zeros(m.rows, m.cols);
    for (r, &p) in perm.iter().enumerate() {
        if p >= m.rows || seen[p] {
            return Err(Error::Shape("not a permutation".into()));
        }
        seen[p] = true;
        out.row_mut(p).copy_from_slice(m.row(r));
    }
    Ok(out)
}
