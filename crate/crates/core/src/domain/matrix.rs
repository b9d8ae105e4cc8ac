use std::ops::Deref;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::CMat;

/// A finite, nonempty dense complex matrix.
///
/// On the wire it is `{"rows": n, "cols": p, "entries": [[re, im], ...]}`
/// with entries in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix(CMat);

impl ComplexMatrix {
    pub fn new(m: CMat) -> Result<Self> {
        if m.nrows() == 0 || m.ncols() == 0 {
            return Err(Error::InvalidMatrix(format!(
                "shape {}x{} is empty",
                m.nrows(),
                m.ncols()
            )));
        }
        if let Some((idx, _)) = m
            .iter()
            .enumerate()
            .find(|(_, z)| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::InvalidMatrix(format!(
                "entry {idx} (column-major) is not finite"
            )));
        }
        Ok(Self(m))
    }

    pub fn from_row_major(rows: usize, cols: usize, entries: &[Complex64]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::InvalidMatrix(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        Self::new(CMat::from_row_slice(rows, cols, entries))
    }

    /// Single column matrix.
    pub fn column(entries: &[Complex64]) -> Result<Self> {
        Self::from_row_major(entries.len(), 1, entries)
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn as_mat(&self) -> &CMat {
        &self.0
    }

    pub fn into_inner(self) -> CMat {
        self.0
    }

    pub fn row_major_entries(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }
}

impl Deref for ComplexMatrix {
    type Target = CMat;

    fn deref(&self) -> &CMat {
        &self.0
    }
}

impl TryFrom<CMat> for ComplexMatrix {
    type Error = Error;

    fn try_from(m: CMat) -> Result<Self> {
        Self::new(m)
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    rows: usize,
    cols: usize,
    entries: Vec<[f64; 2]>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson {
            rows: self.rows(),
            cols: self.cols(),
            entries: self
                .row_major_entries()
                .iter()
                .map(|z| [z.re, z.im])
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(deserializer)?;
        let entries: Vec<Complex64> = raw
            .entries
            .iter()
            .map(|[re, im]| Complex64::new(*re, *im))
            .collect();
        ComplexMatrix::from_row_major(raw.rows, raw.cols, &entries)
            .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn rejects_bad_shapes_and_nan() {
        assert!(ComplexMatrix::from_row_major(2, 2, &[c(1.0, 0.0); 3]).is_err());
        assert!(ComplexMatrix::new(CMat::zeros(0, 3)).is_err());
        let mut m = CMat::zeros(2, 2);
        m[(1, 0)] = c(f64::NAN, 0.0);
        assert!(ComplexMatrix::new(m).is_err());
    }

    #[test]
    fn json_is_row_major() {
        let m = ComplexMatrix::from_row_major(
            2,
            2,
            &[c(1.0, 0.5), c(2.0, 0.0), c(3.0, -1.0), c(4.0, 0.0)],
        )
        .unwrap();
        let text = serde_json::to_string(&m).unwrap();
        assert_eq!(
            text,
            r#"{"rows":2,"cols":2,"entries":[[1.0,0.5],[2.0,0.0],[3.0,-1.0],[4.0,0.0]]}"#
        );
        assert_eq!(m[(0, 1)], c(2.0, 0.0));
        let back: ComplexMatrix = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn json_rejects_wrong_entry_count() {
        let bad = r#"{"rows":2,"cols":2,"entries":[[1.0,0.0]]}"#;
        assert!(serde_json::from_str::<ComplexMatrix>(bad).is_err());
    }
}
