//! Generalized convergence of real sequences: summability along matrix families, ideal
//! and statistical convergence, Orlicz-gauged strong summability, ideal limsup and cluster
//! points, pre-Cauchy detection and finite-dimensional sup-limsup checks.
//!
//! Every test runs on a finite prefix and returns a [`Verdict`] qualified by its [`Scale`].

pub mod banach;
pub mod corpus;
pub mod error;
pub mod ideal;
pub mod limsup_cluster;
pub mod matrix;
pub mod orlicz;
pub mod precauchy;
pub mod scalar;
pub mod scale;
pub mod sequence;
pub mod summability;
pub mod verdict;

pub use error::{Error, Result};
pub use ideal::{FilterBase, IdealHandle};
pub use matrix::{MatrixFamily, MatrixRef, SummabilityMatrix};
pub use scalar::{ExtendedNonneg, ExtendedReal, Scalar};
pub use scale::Scale;
pub use sequence::{Bound, IndexSet, SequencePrefix};
pub use verdict::{Status, TheoremReport, Verdict};

pub type Sequence = SequencePrefix<f64>;
pub type Family = MatrixFamily<f64>;
pub type Ideal = IdealHandle<f64>;
pub type Report = TheoremReport<f64>;
pub type Outcome = Verdict<f64>;
