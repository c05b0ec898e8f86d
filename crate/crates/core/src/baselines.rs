//! Dense reference algorithms used as independent oracles: HOSVD, Tucker-ALS,
//! diagonally pivoted Cholesky, matrix cross approximation, the factor
//! construction behind the Gram-cross accuracy theorem, tensor spectral norm
//! by higher-order power iteration, and the explicit Gram matrix of `F`.

use nalgebra::{DVector, Dyn, LU};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{usage, Error, Result};
use crate::formats::{Limits, Tucker, TuckerLike, TuckerOrtho};
use crate::gram_cross::PRECISION_FLOOR;
use crate::linalg::{left_svd, matrix_2norm, random_vector, sym_eig_desc, symmetrized, Matrix};
use crate::tensor::{Dense3, Mode};

/// Rank selection for [`hosvd_dense`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RankSpec {
    /// Smallest ranks whose discarded singular values per mode have
    /// Euclidean norm `<= eps * ‖t‖_F`.
    Tolerance(f64),
    Fixed([usize; 3]),
}

fn leading_basis(unf: &Matrix, keep: impl FnOnce(&[f64]) -> usize) -> Matrix {
    let (u, sigma) = left_svd(unf);
    let r = keep(&sigma).min(u.ncols());
    u.columns(0, r).into_owned()
}

fn project_dense(t: &Dense3, bases: &[Matrix; 3]) -> Result<Dense3> {
    t.mode_mul(&bases[0].transpose(), Mode::One)?
        .mode_mul(&bases[1].transpose(), Mode::Two)?
        .mode_mul(&bases[2].transpose(), Mode::Three)
}

/// Multilinear SVD with the core computed by projection.
pub fn hosvd_dense(t: &Dense3, spec: RankSpec) -> Result<TuckerOrtho> {
    let norm = t.frob_norm();
    let mut bases = Vec::with_capacity(3);
    for mode in Mode::ALL {
        let unf = t.unfold(mode);
        let basis = match spec {
            RankSpec::Fixed(r) => leading_basis(&unf, |_| r[mode.index()]),
            RankSpec::Tolerance(eps) => leading_basis(&unf, |sigma| {
                let budget = (eps * norm).powi(2);
                let mut tail = 0.0;
                let mut r = sigma.len();
                while r > 0 && tail + sigma[r - 1].powi(2) <= budget {
                    tail += sigma[r - 1].powi(2);
                    r -= 1;
                }
                r
            }),
        };
        bases.push(basis);
    }
    let bases: [Matrix; 3] = bases.try_into().expect("three modes");
    let core = project_dense(t, &bases)?;
    TuckerOrtho::new(core, bases)
}

/// Fixed-rank Tucker-ALS (HOOI). Returns the result and the relative error
/// after every sweep.
pub fn tucker_als_dense(
    t: &Dense3,
    ranks: [usize; 3],
    sweeps: usize,
    init: Option<&TuckerOrtho>,
) -> Result<(TuckerOrtho, Vec<f64>)> {
    let mut current = match init {
        Some(g) => g.clone(),
        None => hosvd_dense(t, RankSpec::Fixed(ranks))?,
    };
    let norm = t.frob_norm();
    let mut history = Vec::with_capacity(sweeps);
    for _ in 0..sweeps {
        let mut bases = current.factors.clone();
        for mode in Mode::ALL {
            let l = mode.index();
            let mut partial = t.clone();
            for other in Mode::ALL.into_iter().filter(|&m| m != mode) {
                partial = partial.mode_mul(&bases[other.index()].transpose(), other)?;
            }
            bases[l] = leading_basis(&partial.unfold(mode), |_| ranks[l]);
        }
        let core = project_dense(t, &bases)?;
        let err = ((norm * norm - core.frob_norm().powi(2)).max(0.0)).sqrt() / norm.max(1e-300);
        history.push(err);
        current = TuckerOrtho::new(core, bases)?;
    }
    Ok((current, history))
}

/// Outcome of [`pivoted_cholesky`].
#[derive(Clone, Debug)]
pub struct PivotedCholesky {
    /// `n x k` factor with `A ≈ L Lᵀ`.
    pub l: Matrix,
    pub pivots: Vec<usize>,
    /// Residual trace after each step.
    pub trace_history: Vec<f64>,
    pub initial_trace: f64,
    /// Stopped on a residual pivot at the roundoff floor.
    pub precision_floor: bool,
    /// Residual diagonal went negative beyond `1e-12 * trace`.
    pub indefinite: bool,
}

/// Diagonally pivoted partial Cholesky; stops when the residual trace is
/// `<= eps * trace(a)` or the rank reaches `r_max`. Ties go to the lowest index.
pub fn pivoted_cholesky(a: &Matrix, eps: f64, r_max: usize) -> Result<PivotedCholesky> {
    if !a.is_square() {
        return usage("pivoted_cholesky: matrix must be square");
    }
    let a = symmetrized(a);
    let n = a.nrows();
    let mut d: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    let trace: f64 = d.iter().map(|v| v.max(0.0)).sum();
    let mut out = PivotedCholesky {
        l: Matrix::zeros(n, 0),
        pivots: Vec::new(),
        trace_history: Vec::new(),
        initial_trace: trace,
        precision_floor: false,
        indefinite: d.iter().any(|&v| v < -1e-12 * trace),
    };
    if trace <= 0.0 {
        return Ok(out);
    }
    let mut resid_trace = trace;
    while resid_trace > eps * trace && out.pivots.len() < r_max {
        let mut best: Option<(usize, f64)> = None;
        for (i, &v) in d.iter().enumerate() {
            if v > 0.0 && best.is_none_or(|(_, b)| v > b) {
                best = Some((i, v));
            }
        }
        let Some((istar, dmax)) = best else {
            out.precision_floor = true;
            break;
        };
        if dmax <= PRECISION_FLOOR * trace {
            out.precision_floor = true;
            break;
        }
        let k = out.l.ncols();
        let lrow = out.l.row(istar).transpose();
        let col = a.column(istar) - &out.l * lrow;
        let piv = col[istar];
        if piv <= 0.0 {
            out.precision_floor = true;
            break;
        }
        let newcol = col / piv.sqrt();
        for (di, li) in d.iter_mut().zip(newcol.iter()) {
            *di -= li * li;
        }
        d[istar] = 0.0;
        out.indefinite |= d.iter().any(|&v| v < -1e-12 * trace);
        let mut grown = std::mem::replace(&mut out.l, Matrix::zeros(0, 0)).resize_horizontally(k + 1, 0.0);
        grown.set_column(k, &newcol);
        out.l = grown;
        out.pivots.push(istar);
        resid_trace = d.iter().map(|v| v.max(0.0)).sum();
        out.trace_history.push(resid_trace);
    }
    Ok(out)
}

/// Cross (skeleton) approximation `A[:,J] A[I,J]⁻¹ A[I,:]` with `I = J`.
#[derive(Clone, Debug)]
pub struct CrossMatrixApprox {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    /// LU factors of the generator `A[I,J]`.
    pub generator: LU<f64, Dyn, Dyn>,
    pub approx: Matrix,
    pub residual: Matrix,
    pub residual_2norm: f64,
}

fn submatrix(a: &Matrix, rows: &[usize], cols: &[usize]) -> Matrix {
    Matrix::from_fn(rows.len(), cols.len(), |i, j| a[(rows[i], cols[j])])
}

pub fn cross_matrix(a: &Matrix, pivots: &[usize]) -> Result<CrossMatrixApprox> {
    let n = a.nrows();
    if !a.is_square() || pivots.iter().any(|&p| p >= n) {
        return usage("cross_matrix: square matrix and in-range pivots required");
    }
    let a = symmetrized(a);
    let all: Vec<usize> = (0..n).collect();
    let a11 = submatrix(&a, pivots, pivots);
    let sigma = a11.clone().svd(false, false).singular_values;
    let (smax, smin) = (sigma.max(), sigma.min());
    if !pivots.is_empty() && !(smin > 1e-10 * smax) {
        return Err(Error::Singular(format!(
            "generator at pivots {pivots:?} has condition {:.2e}",
            smax / smin
        )));
    }
    let generator = a11.lu();
    let a_cols = submatrix(&a, &all, pivots);
    let a_rows = submatrix(&a, pivots, &all);
    let approx = if pivots.is_empty() {
        Matrix::zeros(n, n)
    } else {
        let solved = generator
            .solve(&a_rows)
            .ok_or_else(|| Error::Singular("generator LU solve failed".into()))?;
        a_cols * solved
    };
    let residual = &a - &approx;
    let residual_2norm = matrix_2norm(&residual);
    Ok(CrossMatrixApprox {
        rows: pivots.to_vec(),
        cols: pivots.to_vec(),
        generator,
        approx,
        residual,
        residual_2norm,
    })
}

/// Factor construction `Bᵀ = [I  A11⁻¹ A12]` for `U = [U1 U2]`, `A = UᵀU`.
#[derive(Clone, Debug)]
pub struct FactorBound {
    /// `m x split`.
    pub b: Matrix,
    /// `‖U − U1 Bᵀ‖_2`.
    pub residual_2norm: f64,
    /// `‖A22 − A21 A11⁻¹ A12‖_2 / ‖A‖_2`.
    pub eps: f64,
    /// `‖U‖_2`.
    pub u_2norm: f64,
}

impl FactorBound {
    /// Right-hand side `sqrt(eps) ‖U‖_2`.
    pub fn bound(&self) -> f64 {
        self.eps.sqrt() * self.u_2norm
    }
}

pub fn factor_bound(u: &Matrix, split: usize) -> Result<FactorBound> {
    let m = u.ncols();
    if split == 0 || split > m {
        return usage(format!("factor_bound: split {split} outside 1..={m}"));
    }
    let a = u.tr_mul(u);
    let a11 = a.view((0, 0), (split, split)).into_owned();
    let a12 = a.view((0, split), (split, m - split)).into_owned();
    let (evals, _) = sym_eig_desc(&a11);
    let (top, bottom) = (evals[0], *evals.last().expect("split >= 1"));
    if !(bottom > 1e-10 * top) {
        return Err(Error::Singular(format!(
            "leading block U1 is rank deficient (eigenvalues {top:.2e} .. {bottom:.2e})"
        )));
    }
    let chol = a11
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Singular("A11 is not positive definite".into()))?;
    let coupling = chol.solve(&a12);
    let mut bt = Matrix::zeros(split, m);
    bt.view_mut((0, 0), (split, split)).fill_with_identity();
    bt.view_mut((0, split), (split, m - split)).copy_from(&coupling);
    let u1 = u.columns(0, split);
    let residual = u - u1 * &bt;
    let schur = a.view((split, split), (m - split, m - split)) - a12.transpose() * &coupling;
    let a_norm = sym_eig_desc(&a).0[0];
    let schur_norm = if m > split {
        sym_eig_desc(&symmetrized(&schur)).0[0].abs()
    } else {
        0.0
    };
    Ok(FactorBound {
        b: bt.transpose(),
        residual_2norm: matrix_2norm(&residual),
        eps: schur_norm / a_norm,
        u_2norm: a_norm.sqrt(),
    })
}

/// Lower bound on the tensor spectral norm `max ⟨A, u ⊗ v ⊗ w⟩` over unit
/// vectors, by higher-order power iteration with five seeded random starts.
pub fn tensor_2norm_dense(t: &Dense3, iters: usize) -> f64 {
    let unf = Mode::ALL.map(|m| t.unfold(m));
    let [n1, n2, n3] = t.dims();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut best = 0.0f64;
    for _ in 0..5 {
        let mut u = DVector::zeros(n1);
        let mut v = random_vector(n2, &mut rng).normalize();
        let mut w = random_vector(n3, &mut rng).normalize();
        let mut value = 0.0;
        for _ in 0..iters.max(1) {
            u.copy_from(&normalized(&unf[0] * w.kronecker(&v)));
            v = normalized(&unf[1] * u.kronecker(&w));
            let raw = &unf[2] * v.kronecker(&u);
            value = raw.norm();
            w = normalized(raw);
        }
        best = best.max(value);
    }
    best
}

fn normalized(v: DVector<f64>) -> DVector<f64> {
    let n = v.norm();
    if n > 0.0 {
        v / n
    } else {
        v
    }
}

/// Explicit `n x n` Gram matrix of the mode unfolding of the structured `F`
/// (not of the splitting factor): `U K (W ⊗ V)ᵀ (W ⊗ V) Kᵀ Uᵀ`.
/// Each element costs `O(r^6)`; only small instances are accepted.
pub fn explicit_gram_of_f(f: &TuckerLike, mode: Mode, limits: &Limits) -> Result<Matrix> {
    let rot = f.rotated(mode);
    let n = rot.factors[0].nrows();
    let ranks = rot.ranks();
    if n > 200 || ranks.iter().any(|&r| r > 25) {
        return Err(Error::Resource(format!(
            "explicit Gram limited to n <= 200 and ranks <= 25, got n = {n}, ranks {ranks:?}"
        )));
    }
    let _ = limits;
    let c2 = rot.factors[1].tr_mul(&rot.factors[1]);
    let c3 = rot.factors[2].tr_mul(&rot.factors[2]);
    let core = rot.core_ref();
    let slices: Vec<Matrix> = (0..ranks[0]).map(|a| core.slice_mode1(a)).collect();
    let weighted: Vec<Matrix> = slices.iter().map(|s| &c2 * s * &c3).collect();
    let inner = Matrix::from_fn(ranks[0], ranks[0], |a, b| slices[a].dot(&weighted[b]));
    Ok(&rot.factors[0] * symmetrized(&inner) * rot.factors[0].transpose())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formats::{to_dense, Core};
    use crate::linalg::{random_matrix, random_orthonormal};

    #[test]
    fn hosvd_exact_and_rank_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = TuckerOrtho::new(
            Dense3::random([2, 2, 2], &mut rng),
            [
                random_orthonormal(8, 2, &mut rng),
                random_orthonormal(7, 2, &mut rng),
                random_orthonormal(6, 2, &mut rng),
            ],
        )
        .unwrap();
        let d = to_dense(&t, &Limits::default()).unwrap();
        let h = hosvd_dense(&d, RankSpec::Tolerance(1e-10)).unwrap();
        assert_eq!(h.core.dims(), [2, 2, 2]);
        let back = to_dense(&h, &Limits::default()).unwrap();
        assert!(back.sub(&d).unwrap().frob_norm() <= 1e-12 * d.frob_norm());

        let one = Dense3::from_fn([4, 5, 3], |i, j, k| (i + 1) as f64 * (j as f64 - 1.5) * (k + 2) as f64);
        assert_eq!(hosvd_dense(&one, RankSpec::Tolerance(1e-12)).unwrap().core.dims(), [1, 1, 1]);
    }

    #[test]
    fn full_rank_hosvd_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let t = Dense3::random([10, 10, 10], &mut rng);
        let h = hosvd_dense(&t, RankSpec::Fixed([10, 10, 10])).unwrap();
        let back = to_dense(&h, &Limits::default()).unwrap();
        assert!(back.sub(&t).unwrap().frob_norm() <= 1e-12 * t.frob_norm());
    }

    #[test]
    fn als_monotone_and_fixed_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = Dense3::random([8, 7, 6], &mut rng);
        let (_, hist) = tucker_als_dense(&t, [3, 3, 3], 5, None).unwrap();
        for w in hist.windows(2) {
            assert!(w[1] <= w[0] + 1e-13);
        }
        let (_, full) = tucker_als_dense(&t, [8, 7, 6], 1, None).unwrap();
        assert!(full[0] < 1e-7);
    }

    #[test]
    fn cholesky_on_diagonal() {
        let a = Matrix::from_diagonal(&DVector::from_vec(vec![4.0, 1.0, 0.0]));
        let pc = pivoted_cholesky(&a, 1e-12, 3).unwrap();
        assert_eq!(pc.pivots, vec![0, 1]);
        assert_eq!(pc.l.column(0).as_slice(), &[2.0, 0.0, 0.0]);
        assert_eq!(pc.l.column(1).as_slice(), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn cross_matrix_closed_forms() {
        let rho = 0.3;
        let a = Matrix::from_row_slice(2, 2, &[1.0, rho, rho, 1.0]);
        let c = cross_matrix(&a, &[0]).unwrap();
        assert!(c.residual[(0, 0)].abs() < 1e-15 && c.residual[(0, 1)].abs() < 1e-15);
        assert!((c.residual[(1, 1)] - (1.0 - rho * rho)).abs() < 1e-15);
        let full = cross_matrix(&a, &[0, 1]).unwrap();
        assert!(full.residual.amax() < 1e-14);
        let sing = Matrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(cross_matrix(&sing, &[0, 1]), Err(Error::Singular(_))));
    }

    #[test]
    fn factor_bound_exact_dependence_and_deficiency() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let u1 = random_matrix(10, 3, &mut rng);
        let c = random_matrix(3, 2, &mut rng);
        let mut u = Matrix::zeros(10, 5);
        u.columns_mut(0, 3).copy_from(&u1);
        u.columns_mut(3, 2).copy_from(&(&u1 * c));
        let f = factor_bound(&u, 3).unwrap();
        assert!(f.residual_2norm <= 1e-12 * f.u_2norm);
        let mut bad = u.clone();
        let first = bad.column(0).into_owned();
        bad.set_column(1, &first);
        assert!(factor_bound(&bad, 3).is_err());
    }

    #[test]
    fn power_iteration_on_rank_one_and_odeco() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (x, y, z) = (
            random_orthonormal(6, 3, &mut rng),
            random_orthonormal(5, 3, &mut rng),
            random_orthonormal(4, 3, &mut rng),
        );
        let rank_one = Dense3::from_fn([6, 5, 4], |i, j, k| 2.5 * x[(i, 0)] * y[(j, 0)] * z[(k, 0)]);
        assert!((tensor_2norm_dense(&rank_one, 50) - 2.5).abs() < 1e-12);
        let weights = [3.0, 2.0, 1.0];
        let odeco = Dense3::from_fn([6, 5, 4], |i, j, k| {
            (0..3).map(|s| weights[s] * x[(i, s)] * y[(j, s)] * z[(k, s)]).sum()
        });
        assert!((tensor_2norm_dense(&odeco, 200) - 3.0).abs() < 1e-8);
    }

    #[test]
    fn explicit_gram_matches_dense_unfolding() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let f = TuckerLike::new(
            Core::Kron {
                g: Dense3::random([2, 2, 2], &mut rng),
                h: Dense3::random([2, 3, 2], &mut rng),
            },
            [
                random_matrix(9, 4, &mut rng),
                random_matrix(8, 6, &mut rng),
                random_matrix(7, 4, &mut rng),
            ],
        )
        .unwrap();
        let d = to_dense(&f, &Limits::default()).unwrap();
        for mode in Mode::ALL {
            let unf = d.unfold(mode);
            let oracle = &unf * unf.transpose();
            let got = explicit_gram_of_f(&f, mode, &Limits::default()).unwrap();
            assert!((got - &oracle).amax() <= 1e-11 * oracle.amax());
            assert!((oracle.trace() - d.frob_norm().powi(2)).abs() <= 1e-11 * oracle.trace());
        }
    }
}
