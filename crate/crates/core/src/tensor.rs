//! Dense 3-tensors, cyclic unfoldings and mode products.
//!
//! Storage is column-major: element `(i, j, k)` (0-based) lives at
//! `i + j * n1 + k * n1 * n2`. The three unfoldings follow the cyclic
//! convention `A[i,jk]`, `A[j,ki]`, `A[k,ij]` with the first listed column
//! index varying fastest, so mode 2 and mode 3 unfoldings are the mode-1
//! unfolding of the tensor with its axes rotated once or twice.

use std::fmt;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{usage, Error, Result};
use crate::linalg::Matrix;

/// One of the three index directions of a 3-tensor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Mode {
    One,
    Two,
    Three,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::One, Mode::Two, Mode::Three];

    /// 0-based axis index.
    pub fn index(self) -> usize {
        match self {
            Mode::One => 0,
            Mode::Two => 1,
            Mode::Three => 2,
        }
    }

    /// Number of cyclic rotations that bring this mode into first position.
    pub fn rotations(self) -> usize {
        self.index()
    }
}

impl TryFrom<usize> for Mode {
    type Error = Error;

    /// Accepts the 1-based mode numbers 1, 2, 3.
    fn try_from(m: usize) -> Result<Self> {
        match m {
            1 => Ok(Mode::One),
            2 => Ok(Mode::Two),
            3 => Ok(Mode::Three),
            _ => usage(format!("invalid mode {m}, expected 1, 2 or 3")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index() + 1)
    }
}

/// Explicit `n1 x n2 x n3` array of 64-bit reals.
#[derive(Clone, Debug, PartialEq)]
pub struct Dense3 {
    dims: [usize; 3],
    data: Vec<f64>,
}

impl Dense3 {
    pub fn new(dims: [usize; 3], data: Vec<f64>) -> Result<Self> {
        let len = dims.iter().product::<usize>();
        if data.len() != len {
            return usage(format!(
                "Dense3: {} values supplied for dims {:?} ({} expected)",
                data.len(),
                dims,
                len
            ));
        }
        Ok(Dense3 { dims, data })
    }

    pub fn zeros(dims: [usize; 3]) -> Self {
        Dense3 {
            dims,
            data: vec![0.0; dims.iter().product()],
        }
    }

    /// Builds a tensor from a closure over 0-based indices.
    pub fn from_fn(dims: [usize; 3], mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let [n1, n2, n3] = dims;
        let mut data = Vec::with_capacity(n1 * n2 * n3);
        for k in 0..n3 {
            for j in 0..n2 {
                for i in 0..n1 {
                    data.push(f(i, j, k));
                }
            }
        }
        Dense3 { dims, data }
    }

    pub fn random<R: Rng + ?Sized>(dims: [usize; 3], rng: &mut R) -> Self {
        let len = dims.iter().product();
        Dense3 {
            dims,
            data: (0..len).map(|_| rng.sample(StandardNormal)).collect(),
        }
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn offset(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.offset(i, j, k)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let o = self.offset(i, j, k);
        self.data[o] = v;
    }

    /// Cyclic axis rotation: `out(j, k, i) = self(i, j, k)`.
    pub fn rotate(&self) -> Dense3 {
        let [n1, n2, n3] = self.dims;
        let mut data = Vec::with_capacity(self.data.len());
        for i in 0..n1 {
            for k in 0..n3 {
                for j in 0..n2 {
                    data.push(self.get(i, j, k));
                }
            }
        }
        Dense3 {
            dims: [n2, n3, n1],
            data,
        }
    }

    /// Applies [`Dense3::rotate`] `times` times (mod 3).
    pub fn rotate_by(&self, times: usize) -> Dense3 {
        match times % 3 {
            0 => self.clone(),
            1 => self.rotate(),
            _ => self.rotate().rotate(),
        }
    }

    /// Mode unfolding `A[i,jk]`, `A[j,ki]` or `A[k,ij]`.
    pub fn unfold(&self, mode: Mode) -> Matrix {
        let t = self.rotate_by(mode.rotations());
        let [n1, n2, n3] = t.dims;
        Matrix::from_vec(n1, n2 * n3, t.data)
    }

    /// Inverse of [`Dense3::unfold`].
    pub fn fold(m: &Matrix, mode: Mode, dims: [usize; 3]) -> Result<Dense3> {
        let r = mode.rotations();
        let rdims = [dims[r], dims[(r + 1) % 3], dims[(r + 2) % 3]];
        if m.nrows() != rdims[0] || m.ncols() != rdims[1] * rdims[2] {
            return usage(format!(
                "fold: matrix {}x{} does not match mode-{} unfolding of {:?}",
                m.nrows(),
                m.ncols(),
                mode,
                dims
            ));
        }
        let t = Dense3 {
            dims: rdims,
            data: m.as_slice().to_vec(),
        };
        Ok(t.rotate_by(3 - r))
    }

    /// Mode product `self ×_mode m`; the mode size is replaced by `m.nrows()`.
    pub fn mode_mul(&self, m: &Matrix, mode: Mode) -> Result<Dense3> {
        let r = mode.rotations();
        if m.ncols() != self.dims[r] {
            return usage(format!(
                "mode_mul: matrix has {} columns but mode {} has size {}",
                m.ncols(),
                mode,
                self.dims[r]
            ));
        }
        let unf = self.unfold(mode);
        let prod = m * unf;
        let mut dims = self.dims;
        dims[r] = m.nrows();
        Dense3::fold(&prod, mode, dims)
    }

    /// Frobenius inner product `Σ a_ijk b_ijk`.
    pub fn frob_inner(&self, other: &Dense3) -> Result<f64> {
        if self.dims != other.dims {
            return usage(format!(
                "frob_inner: dims {:?} and {:?} differ",
                self.dims, other.dims
            ));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a * b)
            .sum())
    }

    pub fn frob_norm(&self) -> f64 {
        self.data.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    /// Elementwise (Hadamard) product.
    pub fn hadamard(&self, other: &Dense3) -> Result<Dense3> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn sub(&self, other: &Dense3) -> Result<Dense3> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scaled(&self, s: f64) -> Dense3 {
        Dense3 {
            dims: self.dims,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    fn zip_with(&self, other: &Dense3, f: impl Fn(f64, f64) -> f64) -> Result<Dense3> {
        if self.dims != other.dims {
            return usage(format!("dims {:?} and {:?} differ", self.dims, other.dims));
        }
        Ok(Dense3 {
            dims: self.dims,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }
}
