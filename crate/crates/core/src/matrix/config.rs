//! JSON descriptions of matrices and families.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::matrix::{build_shift_family, Cesaro, Identity, MatrixFamily, MatrixRef, Scaled, SparseRows};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MatrixSpec {
    Cesaro,
    Identity,
    /// (n, k, value) triples; relative paths resolve against the config directory.
    TriangularCsv { path: PathBuf },
    /// Shifts b^(i)_nk = a_{n,k-i} for i ≤ i_max (defaults to the scale's i_max).
    ShiftOf {
        inner: Box<MatrixSpec>,
        #[serde(default)]
        i_max: Option<usize>,
    },
    Scaled { inner: Box<MatrixSpec>, factor: f64 },
}

impl MatrixSpec {
    /// A single matrix; `shift_of` is not a single matrix.
    pub fn matrix<T: Scalar>(&self, dir: &Path) -> Result<MatrixRef<T>> {
        Ok(match self {
            MatrixSpec::Cesaro => Arc::new(Cesaro),
            MatrixSpec::Identity => Arc::new(Identity),
            MatrixSpec::TriangularCsv { path } => {
                let p = if path.is_absolute() { path.clone() } else { dir.join(path) };
                Arc::new(SparseRows::<T>::from_csv(&p)?)
            }
            MatrixSpec::Scaled { inner, factor } => Arc::new(Scaled { inner: inner.matrix(dir)?, factor: T::of(*factor) }),
            MatrixSpec::ShiftOf { .. } => return input("shift_of describes a family, not a single matrix"),
        })
    }

    pub fn family<T: Scalar>(&self, dir: &Path, default_i_max: usize) -> Result<MatrixFamily<T>> {
        match self {
            MatrixSpec::ShiftOf { inner, i_max } => Ok(build_shift_family(inner.matrix(dir)?, i_max.unwrap_or(default_i_max))),
            m => Ok(MatrixFamily::single(m.matrix(dir)?)),
        }
    }
}
