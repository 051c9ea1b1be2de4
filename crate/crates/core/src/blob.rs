//! Versioned binary blobs for fitted models.
//!
//! Layout: 5 magic bytes (format + version, e.g. `EDMC1`), a little-endian
//! u64 payload length, then the payload. The payload is a canonical JSON
//! encoding of the fitted state; the wrapper treats it as opaque bytes.

use crate::error::{EdmError, Result};

pub const COLLECTION_MAGIC: &[u8; 5] = b"EDMC1";
pub const PIPELINE_MAGIC: &[u8; 5] = b"EDMP1";

pub fn encode(magic: &[u8; 5], payload: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(13 + payload.len());
    out.extend_from_slice(magic);
    out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
    out.extend_from_slice(payload);
    out
}

pub fn decode<'a>(magic: &[u8; 5], blob: &'a [u8]) -> Result<&'a [u8]> {
    if blob.len() < 13 {
        return Err(EdmError::Blob(format!(
            "truncated: {} bytes, header needs 13",
            blob.len()
        )));
    }
    if &blob[..5] != magic {
        return Err(EdmError::Blob(format!(
            "bad magic {:?}, expected {:?}",
            String::from_utf8_lossy(&blob[..5]),
            String::from_utf8_lossy(magic)
        )));
    }
    let len = u64::from_le_bytes(blob[5..13].try_into().unwrap()) as usize;
    let payload = &blob[13..];
    if payload.len() != len {
        return Err(EdmError::Blob(format!(
            "payload length {} does not match header {len}",
            payload.len()
        )));
    }
    Ok(payload)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        let blob = encode(COLLECTION_MAGIC, b"{\"x\":1}");
        assert_eq!(decode(COLLECTION_MAGIC, &blob).unwrap(), b"{\"x\":1}");
    }

    #[test]
    fn rejects_wrong_magic_and_truncation() {
        let blob = encode(PIPELINE_MAGIC, b"abc");
        assert!(decode(COLLECTION_MAGIC, &blob).is_err());
        assert!(decode(PIPELINE_MAGIC, &blob[..7]).is_err());
        let mut bad = blob.clone();
        bad.truncate(bad.len() - 1);
        assert!(decode(PIPELINE_MAGIC, &bad).is_err());
    }
}
