//! Versioned binary container for policy parameters.
//!
//! All integers and floats are little-endian.
//!
//! | field | type |
//! |-------|------|
//! | magic `QCPOLICY` | 8 bytes |
//! | format version | u32 |
//! | obs_dim, action_dim | u32, u32 |
//! | actor layer count `La`, then `(rows, cols)` per layer | u32, (u32, u32)… |
//! | critic layer count `Lc`, then `(rows, cols)` per layer | u32, (u32, u32)… |
//! | flags (bit 0: optimizer state follows) | u32 |
//! | update index, environment steps, seed | u64, u64, u64 |
//! | actor layers: weight `rows×cols` row-major, then bias `rows` | f64… |
//! | log_std | `action_dim` × f64 |
//! | critic layers, same layout as the actor | f64… |
//! | if flag bit 0: optimizer step, β₁, β₂, ε, first moments, second moments | u64, f64 ×3, P × f64, P × f64 |
//! | FNV-1a 64 checksum of every preceding byte | u64 |
//!
//! `P` is the total parameter count in the order written above.

use std::path::Path;

use ndarray::{Array1, Array2};

use super::adam::OptimizerState;
use super::nn::{Dense, Mlp};
use super::policy::PolicyParams;

pub const MAGIC: &[u8; 8] = b"QCPOLICY";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CheckpointError {
    #[error("checkpoint i/o on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("corrupted checkpoint: {0}")]
    Corrupt(String),
    #[error("checkpoint format version mismatch: expected {expected}, found {found}")]
    Version { expected: u32, found: u32 },
    #[error("checkpoint dimension mismatch: expected observation width {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CheckpointMeta {
    pub update: u64,
    pub env_steps: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub params: PolicyParams,
    pub optimizer: Option<OptimizerState>,
    pub meta: CheckpointMeta,
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in bytes {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_f64s(out: &mut Vec<u8>, vs: &[f64]) {
    for v in vs {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

fn put_shapes(out: &mut Vec<u8>, mlp: &Mlp) {
    put_u32(out, mlp.layers.len() as u32);
    for l in &mlp.layers {
        put_u32(out, l.outputs() as u32);
        put_u32(out, l.inputs() as u32);
    }
}

pub fn encode(ckpt: &Checkpoint) -> Vec<u8> {
    let p = &ckpt.params;
    let mut out = Vec::with_capacity(64 + 8 * p.num_params() * 3);
    out.extend_from_slice(MAGIC);
    put_u32(&mut out, FORMAT_VERSION);
    put_u32(&mut out, p.obs_dim() as u32);
    put_u32(&mut out, p.log_std.len() as u32);
    put_shapes(&mut out, &p.actor);
    put_shapes(&mut out, &p.critic);
    put_u32(&mut out, ckpt.optimizer.is_some() as u32);
    put_u64(&mut out, ckpt.meta.update);
    put_u64(&mut out, ckpt.meta.env_steps);
    put_u64(&mut out, ckpt.meta.seed);
    for t in p.tensors() {
        put_f64s(&mut out, t);
    }
    if let Some(opt) = &ckpt.optimizer {
        put_u64(&mut out, opt.step);
        put_f64s(&mut out, &[opt.beta1, opt.beta2, opt.epsilon]);
        put_f64s(&mut out, &opt.first_moment);
        put_f64s(&mut out, &opt.second_moment);
    }
    let sum = fnv1a(&out);
    put_u64(&mut out, sum);
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize, what: &str) -> Result<&[u8], CheckpointError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or_else(|| {
            CheckpointError::Corrupt(format!("truncated while reading {what} at byte {}", self.pos))
        })?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32, CheckpointError> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self, what: &str) -> Result<u64, CheckpointError> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().expect("8 bytes")))
    }

    fn f64s(&mut self, n: usize, what: &str) -> Result<Vec<f64>, CheckpointError> {
        let raw = self.take(n.checked_mul(8).ok_or_else(|| CheckpointError::Corrupt(format!("{what} too large")))?, what)?;
        Ok(raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect())
    }

    fn shapes(&mut self, what: &str) -> Result<Vec<(usize, usize)>, CheckpointError> {
        let n = self.u32(what)? as usize;
        if n == 0 || n > 64 {
            return Err(CheckpointError::Corrupt(format!("{what}: implausible layer count {n}")));
        }
        (0..n)
            .map(|_| Ok((self.u32(what)? as usize, self.u32(what)? as usize)))
            .collect()
    }
}

fn read_mlp(r: &mut Reader, shapes: &[(usize, usize)], what: &str) -> Result<Mlp, CheckpointError> {
    let layers = shapes
        .iter()
        .map(|&(rows, cols)| {
            let w = r.f64s(rows * cols, what)?;
            let b = r.f64s(rows, what)?;
            Ok(Dense {
                weight: Array2::from_shape_vec((rows, cols), w).expect("sized by shape"),
                bias: Array1::from(b),
            })
        })
        .collect::<Result<Vec<_>, CheckpointError>>()?;
    Ok(Mlp { layers })
}

fn check_chain(shapes: &[(usize, usize)], obs_dim: usize, out: usize, what: &str) -> Result<(), CheckpointError> {
    let mut width = obs_dim;
    for &(rows, cols) in shapes {
        if cols != width {
            return Err(CheckpointError::Corrupt(format!("{what}: layer input {cols} does not follow width {width}")));
        }
        width = rows;
    }
    if width != out {
        return Err(CheckpointError::Corrupt(format!("{what}: output width {width}, expected {out}")));
    }
    Ok(())
}

pub fn decode(bytes: &[u8]) -> Result<Checkpoint, CheckpointError> {
    if bytes.len() < 8 + 4 + 8 {
        return Err(CheckpointError::Corrupt(format!("only {} bytes", bytes.len())));
    }
    if &bytes[..8] != MAGIC {
        return Err(CheckpointError::Corrupt("bad magic".into()));
    }
    let mut r = Reader { bytes, pos: 8 };
    let version = r.u32("version")?;
    if version != FORMAT_VERSION {
        return Err(CheckpointError::Version {
            expected: FORMAT_VERSION,
            found: version,
        });
    }
    let (body, tail) = bytes.split_at(bytes.len() - 8);
    let stored = u64::from_le_bytes(tail.try_into().expect("8 bytes"));
    let obs_dim = r.u32("obs_dim")? as usize;
    let action_dim = r.u32("action_dim")? as usize;
    let actor_shapes = r.shapes("actor shapes")?;
    let critic_shapes = r.shapes("critic shapes")?;
    check_chain(&actor_shapes, obs_dim, action_dim, "actor")?;
    check_chain(&critic_shapes, obs_dim, 1, "critic")?;
    let flags = r.u32("flags")?;
    let meta = CheckpointMeta {
        update: r.u64("update")?,
        env_steps: r.u64("env_steps")?,
        seed: r.u64("seed")?,
    };
    let actor = read_mlp(&mut r, &actor_shapes, "actor weights")?;
    let log_std = Array1::from(r.f64s(action_dim, "log_std")?);
    let critic = read_mlp(&mut r, &critic_shapes, "critic weights")?;
    let params = PolicyParams { actor, log_std, critic };
    let optimizer = if flags & 1 == 1 {
        let step = r.u64("optimizer step")?;
        let consts = r.f64s(3, "optimizer constants")?;
        let p = params.num_params();
        Some(OptimizerState {
            first_moment: r.f64s(p, "first moments")?,
            second_moment: r.f64s(p, "second moments")?,
            step,
            beta1: consts[0],
            beta2: consts[1],
            epsilon: consts[2],
        })
    } else {
        None
    };
    if r.pos != body.len() {
        return Err(CheckpointError::Corrupt(format!(
            "payload ends at byte {} but checksum starts at {}",
            r.pos,
            body.len()
        )));
    }
    let actual = fnv1a(body);
    if actual != stored {
        return Err(CheckpointError::Corrupt(format!("checksum {actual:#018x} != stored {stored:#018x}")));
    }
    Ok(Checkpoint { params, optimizer, meta })
}

pub fn save_checkpoint(path: &Path, ckpt: &Checkpoint) -> Result<(), CheckpointError> {
    std::fs::write(path, encode(ckpt)).map_err(|source| CheckpointError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint, CheckpointError> {
    let bytes = std::fs::read(path).map_err(|source| CheckpointError::Io {
        path: path.display().to_string(),
        source,
    })?;
    decode(&bytes)
}

/// Loads and checks the observation width against `expected_obs_dim`.
pub fn load_checkpoint_for(path: &Path, expected_obs_dim: usize) -> Result<Checkpoint, CheckpointError> {
    let ckpt = load_checkpoint(path)?;
    let found = ckpt.params.obs_dim();
    if found != expected_obs_dim {
        return Err(CheckpointError::Dimension {
            expected: expected_obs_dim,
            found,
        });
    }
    Ok(ckpt)
}
