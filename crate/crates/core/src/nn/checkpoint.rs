//! Versioned binary checkpoint container.
//!
//! Layout (all integers little endian):
//!
//! ```text
//! magic       8 bytes  "QLCKPT01"
//! meta_count  u32      key/value utf-8 pairs, each length-prefixed (u32)
//! rec_count   u32
//! record:
//!   role_len u32, role utf-8        one of the NetRole tags
//!   dtype    u8                     1 = f32, 2 = f64
//!   has_std  u8
//!   n_sizes  u32, sizes u64 each    layer_sizes, input first
//!   layer k: weights row-major [out, in], biases   (raw IEEE-754 LE bits)
//!   log_std: output_dim scalars when has_std = 1
//! ```
//!
//! Scalars round-trip bit-exactly: `load(save(x)) == x`.

use std::fmt;
use std::path::Path;

use ndarray::{Array1, Array2};
use sha2::{Digest, Sha256};

use super::{Mlp, Scalar};
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"QLCKPT01";

/// Which network a checkpoint record holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetRole {
    TeacherBase,
    Critic,
    EncForce,
    EncTerrain,
    EncState,
    StudentBase,
    EncHistory,
    Residual,
}

impl NetRole {
    pub const ALL: [NetRole; 8] = [
        NetRole::TeacherBase,
        NetRole::Critic,
        NetRole::EncForce,
        NetRole::EncTerrain,
        NetRole::EncState,
        NetRole::StudentBase,
        NetRole::EncHistory,
        NetRole::Residual,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            NetRole::TeacherBase => "teacher_base",
            NetRole::Critic => "critic",
            NetRole::EncForce => "enc_force",
            NetRole::EncTerrain => "enc_terrain",
            NetRole::EncState => "enc_state",
            NetRole::StudentBase => "student_base",
            NetRole::EncHistory => "enc_history",
            NetRole::Residual => "residual",
        }
    }

    pub fn parse(s: &str) -> Result<NetRole> {
        Self::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| Error::Checkpoint(format!("unknown network role {s:?}")))
    }
}

impl fmt::Display for NetRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone)]
pub struct CheckpointRecord<F: Scalar> {
    pub role: NetRole,
    pub mlp: Mlp<F>,
    pub log_std: Option<Array1<F>>,
}

#[derive(Debug, Clone, Default)]
pub struct Checkpoint<F: Scalar> {
    pub meta: Vec<(String, String)>,
    pub records: Vec<CheckpointRecord<F>>,
}

impl<F: Scalar> Checkpoint<F> {
    pub fn new() -> Self {
        Checkpoint {
            meta: Vec::new(),
            records: Vec::new(),
        }
    }

    pub fn set_meta(&mut self, key: &str, value: impl Into<String>) {
        let value = value.into();
        if let Some(slot) = self.meta.iter_mut().find(|(k, _)| k == key) {
            slot.1 = value;
        } else {
            self.meta.push((key.to_string(), value));
        }
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.meta
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn push(&mut self, role: NetRole, mlp: Mlp<F>, log_std: Option<Array1<F>>) {
        self.records.push(CheckpointRecord { role, mlp, log_std });
    }

    pub fn find(&self, role: NetRole) -> Result<&CheckpointRecord<F>> {
        self.records.iter().find(|r| r.role == role).ok_or_else(|| {
            Error::IncompatibleCheckpoint(format!("missing {role} record"))
        })
    }

    pub fn has(&self, role: NetRole) -> bool {
        self.records.iter().any(|r| r.role == role)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        write_u32(&mut out, self.meta.len() as u32);
        for (k, v) in &self.meta {
            write_str(&mut out, k);
            write_str(&mut out, v);
        }
        write_u32(&mut out, self.records.len() as u32);
        for rec in &self.records {
            write_str(&mut out, rec.role.as_str());
            out.push(F::DTYPE);
            out.push(rec.log_std.is_some() as u8);
            let sizes = rec.mlp.layer_sizes();
            write_u32(&mut out, sizes.len() as u32);
            for &s in sizes {
                out.extend_from_slice(&(s as u64).to_le_bytes());
            }
            for (w, b) in rec.mlp.weights.iter().zip(&rec.mlp.biases) {
                for &v in w.iter() {
                    v.write_le(&mut out);
                }
                for &v in b.iter() {
                    v.write_le(&mut out);
                }
            }
            if let Some(ls) = &rec.log_std {
                for &v in ls.iter() {
                    v.write_le(&mut out);
                }
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut cur = Cursor { bytes, pos: 0 };
        let magic = cur.take(8)?;
        if magic != MAGIC {
            return Err(Error::Checkpoint("bad magic; not a checkpoint file".into()));
        }
        let meta_count = cur.u32()?;
        let mut meta = Vec::with_capacity(meta_count as usize);
        for _ in 0..meta_count {
            let k = cur.string()?;
            let v = cur.string()?;
            meta.push((k, v));
        }
        let rec_count = cur.u32()?;
        let mut records = Vec::with_capacity(rec_count as usize);
        for _ in 0..rec_count {
            let role = NetRole::parse(&cur.string()?)?;
            let dtype = cur.u8()?;
            if dtype != F::DTYPE {
                return Err(Error::IncompatibleCheckpoint(format!(
                    "record {role} stored with dtype {dtype}, expected {}",
                    F::DTYPE
                )));
            }
            let has_std = cur.u8()? != 0;
            let n_sizes = cur.u32()? as usize;
            let mut sizes = Vec::with_capacity(n_sizes);
            for _ in 0..n_sizes {
                sizes.push(cur.u64()? as usize);
            }
            if sizes.len() < 2 {
                return Err(Error::Checkpoint(format!("record {role}: too few layers")));
            }
            let mut mlp = Mlp::<F>::zeros(&sizes);
            for k in 0..sizes.len() - 1 {
                let (rows, cols) = (sizes[k + 1], sizes[k]);
                let mut w = Vec::with_capacity(rows * cols);
                for _ in 0..rows * cols {
                    w.push(cur.scalar::<F>()?);
                }
                mlp.weights[k] = Array2::from_shape_vec((rows, cols), w).expect("weight shape");
                let mut b = Vec::with_capacity(rows);
                for _ in 0..rows {
                    b.push(cur.scalar::<F>()?);
                }
                mlp.biases[k] = Array1::from_vec(b);
            }
            let log_std = if has_std {
                let d = *sizes.last().unwrap();
                let mut ls = Vec::with_capacity(d);
                for _ in 0..d {
                    ls.push(cur.scalar::<F>()?);
                }
                Some(Array1::from_vec(ls))
            } else {
                None
            };
            records.push(CheckpointRecord { role, mlp, log_std });
        }
        Ok(Checkpoint { meta, records })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| {
            Error::Checkpoint(format!("cannot read {}: {e}", path.display()))
        })?;
        Self::from_bytes(&bytes)
    }

    /// SHA-256 of the serialized bytes; used for provenance and the
    /// frozen-parameter audits.
    pub fn content_hash(&self) -> String {
        hash_bytes(&self.to_bytes())
    }
}

pub(crate) fn hash_bytes(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::Checkpoint("truncated checkpoint".into()));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn string(&mut self) -> Result<String> {
        let len = self.u32()? as usize;
        let s = self.take(len)?;
        String::from_utf8(s.to_vec())
            .map_err(|_| Error::Checkpoint("invalid utf-8 string".into()))
    }
    fn scalar<F: Scalar>(&mut self) -> Result<F> {
        Ok(F::read_le(self.take(F::BYTE_WIDTH)?))
    }
}

fn write_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn write_str(out: &mut Vec<u8>, s: &str) {
    write_u32(out, s.len() as u32);
    out.extend_from_slice(s.as_bytes());
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn round_trip_is_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        let mut ckpt = Checkpoint::<f64>::new();
        ckpt.set_meta("seed", "123");
        ckpt.push(
            NetRole::TeacherBase,
            Mlp::init(&[72, 32, 16, 12], 0.01, &mut rng),
            Some(Array1::from_elem(12, -0.5f64)),
        );
        ckpt.push(NetRole::Critic, Mlp::init(&[290, 32, 1], 1.0, &mut rng), None);

        let bytes = ckpt.to_bytes();
        let back = Checkpoint::<f64>::from_bytes(&bytes).unwrap();
        assert_eq!(back.meta("seed"), Some("123"));
        assert_eq!(back.records.len(), 2);
        assert_eq!(back.to_bytes(), bytes);

        let orig = ckpt.find(NetRole::TeacherBase).unwrap();
        let loaded = back.find(NetRole::TeacherBase).unwrap();
        for (a, b) in orig.mlp.weights.iter().zip(&loaded.mlp.weights) {
            assert_eq!(a, b);
        }
        assert_eq!(orig.log_std, loaded.log_std);
    }

    #[test]
    fn f32_round_trip_is_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut ckpt = Checkpoint::<f32>::new();
        ckpt.push(NetRole::Residual, Mlp::init(&[72, 8, 12], 0.01, &mut rng), None);
        let bytes = ckpt.to_bytes();
        let back = Checkpoint::<f32>::from_bytes(&bytes).unwrap();
        assert_eq!(back.to_bytes(), bytes);
    }

    #[test]
    fn dtype_mismatch_is_incompatible() {
        let mut ckpt = Checkpoint::<f32>::new();
        ckpt.push(NetRole::EncForce, Mlp::zeros(&[30, 8, 3]), None);
        let bytes = ckpt.to_bytes();
        let err = Checkpoint::<f64>::from_bytes(&bytes).unwrap_err();
        assert!(matches!(err, Error::IncompatibleCheckpoint(_)));
    }

    #[test]
    fn missing_role_reported() {
        let ckpt = Checkpoint::<f64>::new();
        let err = ckpt.find(NetRole::EncHistory).unwrap_err();
        assert!(err.to_string().contains("enc_history"));
    }

    #[test]
    fn truncated_file_rejected() {
        let mut ckpt = Checkpoint::<f64>::new();
        ckpt.push(NetRole::EncState, Mlp::zeros(&[28, 8, 8]), None);
        let bytes = ckpt.to_bytes();
        let err = Checkpoint::<f64>::from_bytes(&bytes[..bytes.len() - 3]).unwrap_err();
        assert!(matches!(err, Error::Checkpoint(_)));
    }

    #[test]
    fn content_hash_tracks_params() {
        let mut ckpt = Checkpoint::<f64>::new();
        ckpt.push(NetRole::EncState, Mlp::zeros(&[28, 8, 8]), None);
        let h1 = ckpt.content_hash();
        ckpt.records[0].mlp.weights[0][[0, 0]] = 1.0;
        let h2 = ckpt.content_hash();
        assert_ne!(h1, h2);
        assert_eq!(h1.len(), 64);
    }
}
