//! Mode-rank truncation of Tucker-format 3-tensors after Hadamard products and sums.
//!
//! Tensors arrive in canonical or Tucker form; Hadamard products and linear
//! combinations produce Tucker-like tensors with inflated mode ranks (for the
//! Hadamard product the core is a Kronecker product of the argument cores).
//! [`recompress::truncate`] brings such a tensor back to an orthonormal Tucker
//! format by cross approximation of the Gram matrices of its unfoldings in
//! `O(n r^3 + r^4)` operations, never forming an `n`-sized Gram matrix or the
//! `r^2 x r^2 x r^2` core.
//!
//! Multi-indices follow one rule throughout: in a written multi-index such as
//! `jk` the first listed index varies fastest, which matches the column-major
//! storage of [`Dense3`] and [`Matrix`].

pub mod baselines;
pub mod bench;
pub mod error;
pub mod formats;
pub mod gram_cross;
pub mod io;
pub mod linalg;
pub mod recompress;
pub mod tensor;

pub use error::{Error, Result};
pub use formats::{Core, Limits, Tucker, TuckerLike, TuckerOrtho};
pub use gram_cross::{CoreGram, CrossState, GramOracle, StopRule};
pub use linalg::Matrix;
pub use recompress::{TruncationConfig, TruncationReport};
pub use tensor::{Dense3, Mode};
