//! Checkpoint container.
//!
//! ```text
//! "ONOF"  u32 version  u64 payload_len  payload  u32 crc32(payload)
//! payload = u32 config_len, config JSON,
//!           u32 n_tensors, n_tensors * (u16 name_len, name, u32 rows, u32 cols, rows*cols f32)
//! ```
//!
//! All integers and floats are little-endian. Values are stored as `f32`.

use std::path::Path;

use super::{FactModel, ModelConfig, ModelError};
use crate::diffcore::{Scalar, Tensor};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"ONOF";
pub const CHECKPOINT_VERSION: u32 = 1;
const HEADER_LEN: usize = 16;
const TRAILER_LEN: usize = 4;

pub fn write_checkpoint<T: Scalar>(model: &FactModel<T>) -> Vec<u8> {
    let mut payload = Vec::new();
    let config = serde_json::to_vec(model.config()).expect("config serializes");
    payload.extend_from_slice(&(config.len() as u32).to_le_bytes());
    payload.extend_from_slice(&config);
    payload.extend_from_slice(&(model.params().len() as u32).to_le_bytes());
    for (_, name, t) in model.params().iter() {
        payload.extend_from_slice(&(name.len() as u16).to_le_bytes());
        payload.extend_from_slice(name.as_bytes());
        payload.extend_from_slice(&(t.rows() as u32).to_le_bytes());
        payload.extend_from_slice(&(t.cols() as u32).to_le_bytes());
        for &v in t.data() {
            payload.extend_from_slice(&(v.as_f64() as f32).to_le_bytes());
        }
    }
    let mut out = Vec::with_capacity(HEADER_LEN + payload.len() + TRAILER_LEN);
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
    out.extend_from_slice(&payload);
    out.extend_from_slice(&crc32fast::hash(&payload).to_le_bytes());
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], ModelError> {
        if self.bytes.len() - self.pos < n {
            return Err(ModelError::Payload("unexpected end of payload".into()));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u16(&mut self) -> Result<u16, ModelError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().expect("2 bytes")))
    }

    fn u32(&mut self) -> Result<u32, ModelError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
}

fn u32_at(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4 bytes"))
}

/// Decodes a checkpoint. Every tensor named by the config must be present
/// exactly once with the shape the config implies.
pub fn read_checkpoint(bytes: &[u8]) -> Result<FactModel<f32>, ModelError> {
    if bytes.len() < 4 || &bytes[..4] != CHECKPOINT_MAGIC {
        return Err(ModelError::BadMagic);
    }
    if bytes.len() < HEADER_LEN + TRAILER_LEN {
        return Err(ModelError::CorruptChecksum("file is shorter than the header".into()));
    }
    let version = u32_at(bytes, 4);
    if version != CHECKPOINT_VERSION {
        return Err(ModelError::VersionUnsupported(version));
    }
    let payload_len = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes"));
    let expected_total = (HEADER_LEN as u64).checked_add(payload_len).and_then(|v| v.checked_add(TRAILER_LEN as u64));
    if expected_total != Some(bytes.len() as u64) {
        return Err(ModelError::CorruptChecksum(format!(
            "payload length {payload_len} does not match a {}-byte file",
            bytes.len()
        )));
    }
    let payload = &bytes[HEADER_LEN..bytes.len() - TRAILER_LEN];
    let stored = u32_at(bytes, bytes.len() - TRAILER_LEN);
    let actual = crc32fast::hash(payload);
    if stored != actual {
        return Err(ModelError::CorruptChecksum(format!(
            "checksum crc32 {actual:08x} does not match stored {stored:08x}"
        )));
    }

    let mut r = Reader { bytes: payload, pos: 0 };
    let config_len = r.u32()? as usize;
    let config: ModelConfig =
        serde_json::from_slice(r.take(config_len)?).map_err(|e| ModelError::Payload(format!("config: {e}")))?;
    let mut model = FactModel::<f32>::new(config)?;
    let n = r.u32()? as usize;
    if n != model.params().len() {
        return Err(ModelError::Payload(format!(
            "{n} tensors stored, config implies {}",
            model.params().len()
        )));
    }
    let mut seen = vec![false; n];
    for _ in 0..n {
        let name_len = r.u16()? as usize;
        let name = std::str::from_utf8(r.take(name_len)?)
            .map_err(|_| ModelError::Payload("tensor name is not UTF-8".into()))?
            .to_string();
        let rows = r.u32()? as usize;
        let cols = r.u32()? as usize;
        let id = model
            .params()
            .by_name(&name)
            .ok_or_else(|| ModelError::Payload(format!("unknown tensor {name:?}")))?;
        if std::mem::replace(&mut seen[id.0], true) {
            return Err(ModelError::Payload(format!("tensor {name:?} stored twice")));
        }
        let expected = model.params().get(id).shape();
        if (rows, cols) != expected {
            return Err(ModelError::ShapeMismatch {
                what: name,
                expected,
                found: (rows, cols),
            });
        }
        let raw = r.take(rows * cols * 4)?;
        let data = raw
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes(b.try_into().expect("4 bytes")))
            .collect();
        *model.params_mut().get_mut(id) = Tensor::new(rows, cols, data)?;
    }
    if r.pos != payload.len() {
        return Err(ModelError::Payload("trailing bytes after the last tensor".into()));
    }
    Ok(model)
}

pub fn save_checkpoint<T: Scalar>(model: &FactModel<T>, path: impl AsRef<Path>) -> Result<(), ModelError> {
    let path = path.as_ref();
    std::fs::write(path, write_checkpoint(model)).map_err(|source| ModelError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<FactModel<f32>, ModelError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| ModelError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_checkpoint(&bytes)
}
