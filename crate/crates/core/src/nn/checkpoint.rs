//! Binary parameter checkpoints.
//!
//! Layout (all integers and reals little-endian):
//!
//! ```text
//! b"COLUR1"
//! u64            number of dense layers L
//! u64 × (L + 1)  layer sizes [in, hidden..., K]
//! per layer:     f64 × (out·in) weights, row-major, then f64 × out biases
//! ```

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::nn::mlp::{Dense, MlpParams};
use crate::tensor::Tensor;

pub const MAGIC: &[u8; 6] = b"COLUR1";

pub fn encode(params: &MlpParams) -> Vec<u8> {
    let sizes = params.layer_sizes();
    let mut out = Vec::with_capacity(6 + 8 * (1 + sizes.len() + params.param_count()));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(params.layers().len() as u64).to_le_bytes());
    for s in &sizes {
        out.extend_from_slice(&(*s as u64).to_le_bytes());
    }
    for layer in params.layers() {
        for v in layer.weight.data().iter().chain(layer.bias.data()) {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> std::result::Result<&[u8], String> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len()).ok_or_else(|| {
            format!("truncated checkpoint: wanted {n} bytes at offset {}", self.pos)
        })?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u64(&mut self) -> std::result::Result<u64, String> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64s(&mut self, n: usize) -> std::result::Result<Vec<f64>, String> {
        let bytes = self.take(n.checked_mul(8).ok_or("size overflow")?)?;
        Ok(bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect())
    }
}

fn decode_inner(buf: &[u8]) -> std::result::Result<MlpParams, String> {
    let mut r = Reader { buf, pos: 0 };
    if r.take(MAGIC.len())? != MAGIC {
        return Err("bad magic; not a COLUR1 checkpoint".into());
    }
    let n_layers = r.u64()? as usize;
    if n_layers == 0 || n_layers > 1 << 16 {
        return Err(format!("implausible layer count {n_layers}"));
    }
    let sizes = (0..=n_layers)
        .map(|_| r.u64().map(|v| v as usize))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if sizes.contains(&0) {
        return Err(format!("zero extent in layer sizes {sizes:?}"));
    }
    let mut layers = Vec::with_capacity(n_layers);
    for w in sizes.windows(2) {
        let (n_in, n_out) = (w[0], w[1]);
        let weight = Tensor::from_vec(&[n_out, n_in], r.f64s(n_in * n_out)?).map_err(|e| e.to_string())?;
        let bias = Tensor::from_vec(&[n_out], r.f64s(n_out)?).map_err(|e| e.to_string())?;
        layers.push(Dense { weight, bias });
    }
    if r.pos != buf.len() {
        return Err(format!("{} trailing bytes", buf.len() - r.pos));
    }
    MlpParams::from_layers(layers).map_err(|e| e.to_string())
}

pub fn decode(buf: &[u8]) -> Result<MlpParams> {
    decode_inner(buf).map_err(|m| Error::format("<memory>", m))
}

pub fn save(params: &MlpParams, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode(params)).map_err(|e| Error::io(path, e))
}

pub fn load(path: impl AsRef<Path>) -> Result<MlpParams> {
    let path = path.as_ref();
    let buf = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_inner(&buf).map_err(|m| Error::format(path, m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::mlp::init_params;

    #[test]
    fn header_layout() {
        let p = init_params(&[2, 3], 1).unwrap();
        let bytes = encode(&p);
        assert_eq!(&bytes[..6], b"COLUR1");
        assert_eq!(u64::from_le_bytes(bytes[6..14].try_into().unwrap()), 1);
        assert_eq!(u64::from_le_bytes(bytes[14..22].try_into().unwrap()), 2);
        assert_eq!(u64::from_le_bytes(bytes[22..30].try_into().unwrap()), 3);
        assert_eq!(bytes.len(), 30 + 8 * (6 + 3));
        let w0 = f64::from_le_bytes(bytes[30..38].try_into().unwrap());
        assert_eq!(w0, p.layers()[0].weight.data()[0]);
    }

    #[test]
    fn roundtrip_is_bit_exact() {
        let p = init_params(&[3, 5, 4, 2], 9).unwrap();
        assert_eq!(decode(&encode(&p)).unwrap(), p);
    }

    #[test]
    fn rejects_corrupt_input() {
        let p = init_params(&[2, 3], 1).unwrap();
        let mut bytes = encode(&p);
        assert!(decode(&bytes[..bytes.len() - 1]).is_err());
        bytes.push(0);
        assert!(decode(&bytes).is_err());
        assert!(decode(b"NOTCKPT").is_err());
    }

    #[test]
    fn load_reports_path() {
        let err = load("/definitely/missing/theta.ckpt").unwrap_err();
        assert!(err.to_string().contains("/definitely/missing/theta.ckpt"));
    }
}
