//! JSON exports of submodule and quotient models. Matrices are stored as
//! base64 of little-endian `(re, im)` f64 pairs in column-major order.

use base64::engine::general_purpose::STANDARD;
use base64::Engine as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hardy::DegreePair;
use crate::linalg::{CMatrix, CVector, C64};
use crate::submodule::{QuotientModel, SubmoduleKind, SubmoduleModel};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixB64 {
    pub rows: usize,
    pub cols: usize,
    pub data: String,
}

impl MatrixB64 {
    pub fn encode(m: &CMatrix) -> Self {
        let mut bytes = Vec::with_capacity(m.len() * 16);
        // nalgebra storage is column-major
        for z in m.iter() {
            bytes.extend_from_slice(&z.re.to_le_bytes());
            bytes.extend_from_slice(&z.im.to_le_bytes());
        }
        MatrixB64 { rows: m.nrows(), cols: m.ncols(), data: STANDARD.encode(bytes) }
    }

    pub fn encode_vector(v: &CVector) -> Self {
        Self::encode(&CMatrix::from_column_slice(v.len(), 1, v.as_slice()))
    }

    pub fn decode(&self) -> Result<CMatrix> {
        let bytes =
            STANDARD.decode(&self.data).map_err(|e| Error::Config(format!("bad base64 matrix: {e}")))?;
        if bytes.len() != self.rows * self.cols * 16 {
            return Err(Error::Config(format!(
                "matrix payload has {} bytes, expected {}",
                bytes.len(),
                self.rows * self.cols * 16
            )));
        }
        let vals: Vec<C64> = bytes
            .chunks_exact(16)
            .map(|ch| {
                let re = f64::from_le_bytes(ch[..8].try_into().expect("8 bytes"));
                let im = f64::from_le_bytes(ch[8..].try_into().expect("8 bytes"));
                C64::new(re, im)
            })
            .collect();
        Ok(CMatrix::from_column_slice(self.rows, self.cols, &vals))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubmoduleExport {
    pub order: DegreePair,
    pub kind: SubmoduleKind,
    pub rank: usize,
    pub codimension: usize,
    pub dropped: usize,
    pub approximate: bool,
    pub onb: MatrixB64,
}

impl SubmoduleExport {
    pub fn new(sub: &SubmoduleModel) -> Self {
        SubmoduleExport {
            order: sub.space.order(),
            kind: sub.kind.clone(),
            rank: sub.rank(),
            codimension: sub.codimension(),
            dropped: sub.dropped,
            approximate: sub.approximate,
            onb: MatrixB64::encode(&sub.onb),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuotientExport {
    pub order: DegreePair,
    pub dim: usize,
    pub commutator_residual: f64,
    pub onb_k: MatrixB64,
    pub jordan_z: MatrixB64,
    pub jordan_w: MatrixB64,
    pub seed: MatrixB64,
}

impl QuotientExport {
    pub fn new(q: &QuotientModel) -> Self {
        QuotientExport {
            order: q.space().order(),
            dim: q.dim(),
            commutator_residual: q.commutator_residual(),
            onb_k: MatrixB64::encode(&q.onb_k),
            jordan_z: MatrixB64::encode(&q.jordan_z),
            jordan_w: MatrixB64::encode(&q.jordan_w),
            seed: MatrixB64::encode_vector(&q.seed),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn round_trip_is_bit_exact() {
        let m = CMatrix::from_fn(3, 2, |i, j| c(i as f64 / 3.0, -(j as f64) * 0.1));
        let e = MatrixB64::encode(&m);
        assert_eq!((e.rows, e.cols), (3, 2));
        assert_eq!(e.decode().unwrap(), m);
    }

    #[test]
    fn column_major_layout() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)]);
        let bytes = STANDARD.decode(MatrixB64::encode(&m).data).unwrap();
        let first_col_second = f64::from_le_bytes(bytes[16..24].try_into().unwrap());
        assert_eq!(first_col_second, 3.0);
    }

    #[test]
    fn truncated_payload_rejected() {
        let mut e = MatrixB64::encode(&CMatrix::zeros(2, 2));
        e.rows = 3;
        assert!(e.decode().is_err());
    }
}
