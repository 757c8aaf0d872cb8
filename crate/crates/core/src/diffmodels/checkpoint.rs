//! Model checkpoints.
//!
//! Binary layout (little endian):
//!
//! ```text
//! magic        8 bytes   "LNCRMLP\0"
//! version      u32       1
//! n_sizes      u32       number of layer sizes (>= 2)
//! sizes        u32 * n_sizes
//! n_params     u64       must equal the count implied by sizes
//! params       f64 * n_params   raw IEEE-754 bits
//! ```
//!
//! The JSON form carries the same information with 17-digit decimals:
//! `{"format":"lancer-mlp","version":1,"layer_sizes":[..],"params":[..]}`.

use serde::{Deserialize, Serialize};

use super::MlpModel;
use crate::error::{Error, Result};
use crate::json;

pub const MAGIC: &[u8; 8] = b"LNCRMLP\0";
pub const VERSION: u32 = 1;
const JSON_FORMAT: &str = "lancer-mlp";

impl MlpModel {
    pub fn to_bytes(&self) -> Vec<u8> {
        let sizes = self.layer_sizes();
        let mut out = Vec::with_capacity(24 + 4 * sizes.len() + 8 * self.param_count());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(sizes.len() as u32).to_le_bytes());
        for &s in sizes {
            out.extend_from_slice(&(s as u32).to_le_bytes());
        }
        out.extend_from_slice(&(self.param_count() as u64).to_le_bytes());
        for p in self.params() {
            out.extend_from_slice(&p.to_bits().to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(8)? != MAGIC {
            return Err(Error::Format("bad checkpoint magic".into()));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported checkpoint version {version}")));
        }
        let n_sizes = r.u32()? as usize;
        if n_sizes < 2 || n_sizes > r.remaining() / 4 {
            return Err(Error::Format(format!("implausible layer count {n_sizes}")));
        }
        let sizes = (0..n_sizes)
            .map(|_| r.u32().map(|s| s as usize))
            .collect::<Result<Vec<_>>>()?;
        let n_params = r.u64()?;
        if n_params.checked_mul(8) != Some(r.remaining() as u64) {
            return Err(Error::Format(format!(
                "header announces {n_params} parameters but {} bytes remain",
                r.remaining()
            )));
        }
        let params = (0..n_params)
            .map(|_| r.u64().map(f64::from_bits))
            .collect::<Result<Vec<_>>>()?;
        MlpModel::from_parts(sizes, params).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn to_json(&self) -> Result<Vec<u8>> {
        json::to_vec_pretty(&JsonCheckpoint {
            format: JSON_FORMAT.to_string(),
            version: VERSION,
            layer_sizes: self.layer_sizes().to_vec(),
            params: self.params().to_vec(),
        })
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let ck: JsonCheckpoint = serde_json::from_slice(bytes)?;
        if ck.format != JSON_FORMAT || ck.version != VERSION {
            return Err(Error::Format(format!(
                "expected {JSON_FORMAT} v{VERSION}, found {} v{}",
                ck.format, ck.version
            )));
        }
        MlpModel::from_parts(ck.layer_sizes, ck.params)
    }
}

#[derive(Serialize, Deserialize)]
struct JsonCheckpoint {
    format: String,
    version: u32,
    layer_sizes: Vec<usize>,
    params: Vec<f64>,
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.remaining() < n {
            return Err(Error::Format("truncated checkpoint".into()));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn binary_round_trip_is_bit_exact() {
        let m = MlpModel::glorot(&[5, 7, 3], &mut rng::stream(3, 0)).unwrap();
        let back = MlpModel::from_bytes(&m.to_bytes()).unwrap();
        assert_eq!(m, back);
        let back = MlpModel::from_json(&m.to_json().unwrap()).unwrap();
        assert!(m.params().iter().zip(back.params()).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn corrupt_inputs_are_rejected() {
        let m = MlpModel::zeros(&[2, 2]).unwrap();
        let bytes = m.to_bytes();
        assert!(MlpModel::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(MlpModel::from_bytes(&bad).is_err());
        let mut nan = bytes.clone();
        let last = nan.len() - 8;
        nan[last..].copy_from_slice(&f64::NAN.to_bits().to_le_bytes());
        assert!(MlpModel::from_bytes(&nan).is_err());
        assert!(MlpModel::from_bytes(&[]).is_err());
        assert!(MlpModel::from_json(b"{\"format\":\"lancer-mlp\",\"version\":1,\"layer_sizes\":[2,2],\"params\":[1]}").is_err());
    }
}
