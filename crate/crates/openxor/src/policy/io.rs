//! `.olm` model files: one JSON header line, then the flat parameter
//! vector as little-endian f64.

use super::net::{NetError, PolicyParams, EMBED_DIM, HIDDEN_DIM, OUT_DIM};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    format: String,
    feature_dim: usize,
    embed_dim: usize,
    hidden_dim: usize,
    out_dim: usize,
    param_count: usize,
    feature_layout: Vec<String>,
}

pub fn params_to_bytes(params: &PolicyParams) -> Vec<u8> {
    let header = Header {
        format: params.version.clone(),
        feature_dim: params.feature_dim,
        embed_dim: EMBED_DIM,
        hidden_dim: HIDDEN_DIM,
        out_dim: OUT_DIM,
        param_count: params.data.len(),
        feature_layout: params.feature_layout.clone(),
    };
    let mut bytes = serde_json::to_vec(&header).expect("header serialization is infallible");
    bytes.push(b'\n');
    for v in &params.data {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    bytes
}

pub fn params_from_bytes(bytes: &[u8]) -> Result<PolicyParams, NetError> {
    let newline = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| NetError::ModelFile {
            reason: "missing header line".into(),
        })?;
    let header: Header =
        serde_json::from_slice(&bytes[..newline]).map_err(|e| NetError::ModelFile {
            reason: format!("bad header: {e}"),
        })?;
    if header.format != crate::MODEL_FORMAT_VERSION {
        return Err(NetError::ModelFile {
            reason: format!("unsupported format '{}'", header.format),
        });
    }
    if header.embed_dim != EMBED_DIM || header.hidden_dim != HIDDEN_DIM || header.out_dim != OUT_DIM
    {
        return Err(NetError::ModelFile {
            reason: "layer shape mismatch".into(),
        });
    }
    let expected = PolicyParams::param_count(header.feature_dim);
    if header.param_count != expected {
        return Err(NetError::ModelFile {
            reason: format!(
                "param count {} inconsistent with feature dim {}",
                header.param_count, header.feature_dim
            ),
        });
    }
    let blob = &bytes[newline + 1..];
    if blob.len() != expected * 8 {
        return Err(NetError::ModelFile {
            reason: format!(
                "weight blob holds {} bytes, expected {}",
                blob.len(),
                expected * 8
            ),
        });
    }
    let mut data = Vec::with_capacity(expected);
    for chunk in blob.chunks_exact(8) {
        let v = f64::from_le_bytes(chunk.try_into().expect("chunk is 8 bytes"));
        if !v.is_finite() {
            return Err(NetError::ModelFile {
                reason: "non-finite weight".into(),
            });
        }
        data.push(v);
    }
    Ok(PolicyParams {
        data,
        feature_dim: header.feature_dim,
        version: header.format,
        feature_layout: header.feature_layout,
    })
}

pub fn save_params(path: &Path, params: &PolicyParams) -> Result<(), NetError> {
    std::fs::write(path, params_to_bytes(params)).map_err(|e| NetError::ModelFile {
        reason: format!("{}: {e}", path.display()),
    })
}

pub fn load_params(path: &Path) -> Result<PolicyParams, NetError> {
    let bytes = std::fs::read(path).map_err(|e| NetError::ModelFile {
        reason: format!("{}: {e}", path.display()),
    })?;
    params_from_bytes(&bytes)
}
