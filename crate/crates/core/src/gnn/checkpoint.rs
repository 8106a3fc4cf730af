//! Binary model checkpoints with bit-exact round trips.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! "UAVQ" | u32 version | u8 kind | u32 header length | header (JSON, UTF-8)
//! u32 MLP count
//! per MLP:   u8 activation | u32 layer count
//! per layer: u32 inputs | u32 outputs | f64 weights[out*in] | f64 bias[out]
//! ```

use std::path::Path;

use crate::error::{Error, Result};
use crate::gnn::block::GnBlock;
use crate::gnn::chain::{ChainConfig, ChainParams};
use crate::gnn::mlp::{Activation, Layer, Mlp};

pub const MAGIC: &[u8; 4] = b"UAVQ";
pub const VERSION: u32 = 1;

/// Model family stored in a checkpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Chain = 1,
    FlatDqn = 2,
}

impl ModelKind {
    fn from_code(c: u8) -> Result<Self> {
        match c {
            1 => Ok(Self::Chain),
            2 => Ok(Self::FlatDqn),
            _ => Err(Error::Checkpoint(format!("unknown model kind {c}"))),
        }
    }
}

/// Decoded checkpoint before it is turned into a concrete model.
#[derive(Debug, Clone, PartialEq)]
pub struct RawCheckpoint {
    pub kind: ModelKind,
    pub header: String,
    pub mlps: Vec<Mlp>,
}

fn put_u32(out: &mut Vec<u8>, v: usize) -> Result<()> {
    let v = u32::try_from(v).map_err(|_| Error::Checkpoint(format!("{v} does not fit in u32")))?;
    out.extend_from_slice(&v.to_le_bytes());
    Ok(())
}

pub fn encode(kind: ModelKind, header: &str, mlps: &[&Mlp]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(kind as u8);
    put_u32(&mut out, header.len())?;
    out.extend_from_slice(header.as_bytes());
    put_u32(&mut out, mlps.len())?;
    for m in mlps {
        out.push(m.activation.code());
        put_u32(&mut out, m.layers.len())?;
        for l in &m.layers {
            put_u32(&mut out, l.inputs)?;
            put_u32(&mut out, l.outputs)?;
            for v in l.weights.iter().chain(&l.bias) {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    Ok(out)
}

struct Reader<'a> {
    buf: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.at.checked_add(n).filter(|&e| e <= self.buf.len()).ok_or_else(|| {
            Error::Checkpoint(format!("truncated: wanted {n} bytes at offset {}", self.at))
        })?;
        let s = &self.buf[self.at..end];
        self.at = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<usize> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as usize)
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let bytes = self.take(n.checked_mul(8).ok_or_else(|| Error::Checkpoint("size overflow".into()))?)?;
        Ok(bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect())
    }
}

pub fn decode(buf: &[u8]) -> Result<RawCheckpoint> {
    let mut r = Reader { buf, at: 0 };
    if r.take(4)? != MAGIC {
        return Err(Error::Checkpoint("bad magic".into()));
    }
    let version = r.u32()?;
    if version != VERSION as usize {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let kind = ModelKind::from_code(r.u8()?)?;
    let hlen = r.u32()?;
    let header = String::from_utf8(r.take(hlen)?.to_vec())
        .map_err(|e| Error::Checkpoint(format!("header is not UTF-8: {e}")))?;
    let count = r.u32()?;
    let mut mlps = Vec::with_capacity(count.min(64));
    for _ in 0..count {
        let activation = Activation::from_code(r.u8()?)?;
        let nl = r.u32()?;
        if nl == 0 {
            return Err(Error::Checkpoint("MLP without layers".into()));
        }
        let mut layers = Vec::with_capacity(nl.min(64));
        for _ in 0..nl {
            let inputs = r.u32()?;
            let outputs = r.u32()?;
            let weights = r.f64s(inputs * outputs)?;
            let bias = r.f64s(outputs)?;
            if let Some(prev) = layers.last().map(|l: &Layer| l.outputs) {
                if prev != inputs {
                    return Err(Error::Checkpoint(format!("layer width mismatch {prev} -> {inputs}")));
                }
            }
            layers.push(Layer { inputs, outputs, weights, bias });
        }
        mlps.push(Mlp { layers, activation });
    }
    if r.at != buf.len() {
        return Err(Error::Checkpoint(format!("{} trailing bytes", buf.len() - r.at)));
    }
    Ok(RawCheckpoint { kind, header, mlps })
}

pub fn read_raw(path: impl AsRef<Path>) -> Result<RawCheckpoint> {
    decode(&std::fs::read(path)?)
}

impl ChainParams {
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let header = serde_json::to_string(&self.config)?;
        let mlps: Vec<&Mlp> = self.blocks.iter().flat_map(|b| [&b.edge_mlp, &b.node_mlp]).collect();
        encode(ModelKind::Chain, &header, &mlps)
    }

    pub fn from_bytes(buf: &[u8]) -> Result<Self> {
        Self::from_raw(decode(buf)?)
    }

    pub fn from_raw(raw: RawCheckpoint) -> Result<Self> {
        if raw.kind != ModelKind::Chain {
            return Err(Error::Checkpoint(format!("expected a chain checkpoint, found {:?}", raw.kind)));
        }
        let config: ChainConfig = serde_json::from_str(&raw.header)?;
        let mut params = Self::zeros(config)?;
        if raw.mlps.len() != 8 {
            return Err(Error::Checkpoint(format!("chain needs 8 MLPs, found {}", raw.mlps.len())));
        }
        let mut it = raw.mlps.into_iter();
        for b in params.blocks.iter_mut() {
            let (e, n) = (it.next().expect("8 MLPs"), it.next().expect("8 MLPs"));
            if e.widths() != b.edge_mlp.widths() || n.widths() != b.node_mlp.widths() {
                return Err(Error::Checkpoint("MLP widths disagree with the stored config".into()));
            }
            *b = GnBlock { edge_mlp: e, node_mlp: n };
        }
        Ok(params)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}
