//! Small dense matrix utilities shared by every module.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{usage, Result};

/// Column-major dense matrix of 64-bit reals.
pub type Matrix = DMatrix<f64>;

/// Spectral norm: square root of the largest eigenvalue of the smaller Gram matrix.
pub fn matrix_2norm(m: &Matrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let gram = if m.nrows() <= m.ncols() {
        m * m.transpose()
    } else {
        m.tr_mul(m)
    };
    gram_2norm(&gram)
}

/// `‖M‖_2` from the Gram matrix `MᵀM` (or `MMᵀ`).
pub fn gram_2norm(gram: &Matrix) -> f64 {
    if gram.is_empty() {
        return 0.0;
    }
    let vals = symmetrized(gram).symmetric_eigenvalues();
    vals.max().max(0.0).sqrt()
}

/// Row-wise Kronecker (transposed Khatri-Rao) product.
///
/// `result(i, a + p * b.ncols()) = b(i, a) * a(i, p)`: column `(a, p)` is the
/// elementwise product of column `a` of `b` and column `p` of `a`, with the
/// index into `b` varying fastest.
pub fn row_kron(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.nrows() != b.nrows() {
        return usage(format!(
            "row_kron: row counts differ ({} vs {})",
            a.nrows(),
            b.nrows()
        ));
    }
    let n = a.nrows();
    let (pa, pb) = (a.ncols(), b.ncols());
    let mut out = Matrix::zeros(n, pa * pb);
    for p in 0..pa {
        for s in 0..pb {
            let mut col = out.column_mut(s + p * pb);
            for i in 0..n {
                col[i] = b[(i, s)] * a[(i, p)];
            }
        }
    }
    Ok(out)
}

/// Symmetric eigendecomposition with eigenvalues sorted in descending order.
pub fn sym_eig_desc(m: &Matrix) -> (Vec<f64>, Matrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), Matrix::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(symmetrized(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]).then(i.cmp(&j)));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &eig.eigenvectors.column(src));
    }
    (vals, vecs)
}

/// Thin SVD returning left singular vectors and singular values, descending.
pub fn left_svd(m: &Matrix) -> (Matrix, Vec<f64>) {
    let (rows, cols) = m.shape();
    let k = rows.min(cols);
    if k == 0 {
        return (Matrix::zeros(rows, 0), Vec::new());
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| {
        svd.singular_values[j]
            .total_cmp(&svd.singular_values[i])
            .then(i.cmp(&j))
    });
    let mut basis = Matrix::zeros(rows, k);
    for (dst, &src) in order.iter().enumerate() {
        basis.set_column(dst, &u.column(src));
    }
    let sigma = order.iter().map(|&i| svd.singular_values[i]).collect();
    (basis, sigma)
}

/// Dominant left singular subspace: columns with `sigma >= rel_tol * sigma_1`.
pub fn dominant_left_subspace(m: &Matrix, rel_tol: f64) -> (Matrix, Vec<f64>) {
    let (u, sigma) = left_svd(m);
    let top = sigma.first().copied().unwrap_or(0.0);
    if top <= 0.0 {
        return (Matrix::zeros(m.nrows(), 0), Vec::new());
    }
    let keep = sigma.iter().take_while(|&&s| s >= rel_tol * top).count();
    (u.columns(0, keep).into_owned(), sigma[..keep].to_vec())
}

pub fn symmetrized(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

/// `‖XᵀX − I‖_F`.
pub fn orthonormality_defect(x: &Matrix) -> f64 {
    let g = x.tr_mul(x);
    (g - Matrix::identity(x.ncols(), x.ncols())).norm()
}

/// Largest principal angle (radians) between the column spans of two
/// orthonormal bases. Returns `pi/2` when dimensions differ.
pub fn max_principal_angle(a: &Matrix, b: &Matrix) -> f64 {
    if a.ncols() != b.ncols() {
        return std::f64::consts::FRAC_PI_2;
    }
    if a.ncols() == 0 {
        return 0.0;
    }
    // sin of the largest angle is ‖(I − AAᵀ) B‖₂, accurate for small angles.
    let resid = b - a * a.tr_mul(b);
    matrix_2norm(&resid).min(1.0).asin()
}

/// Project the columns of `u` onto the orthogonal complement of span(`basis`),
/// with one round of reorthogonalization.
pub fn project_out(basis: &Matrix, u: &Matrix) -> Matrix {
    let mut r = u - basis * basis.tr_mul(u);
    let corr = basis * basis.tr_mul(&r);
    r -= corr;
    r
}

pub fn random_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

pub fn random_vector<R: Rng + ?Sized>(len: usize, rng: &mut R) -> DVector<f64> {
    DVector::from_fn(len, |_, _| rng.sample(StandardNormal))
}

/// Random matrix with orthonormal columns (Q factor of a Gaussian matrix).
pub fn random_orthonormal<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Matrix {
    assert!(cols <= rows, "cannot fit {cols} orthonormal columns in {rows} rows");
    let g = random_matrix(rows, cols, rng);
    g.qr().q()
}
