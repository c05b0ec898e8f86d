//! Cross approximation of the Gram matrix of a structured unfolding.
//!
//! For `F = Kron(G,H) ×1 U ×2 V ×3 W` the mode-1 subspace of `F` is
//! approximated by that of `U' = Kron(G,H) ×1 U`, whose Gram matrix is
//! `A = U (Ĝ ⊗ Ĥ) Uᵀ` with `Ĝ = G[p,qs] G[qs,p']`, `Ĥ = H[a,bc] H[bc,a']`.
//! [`run_cross`] builds `A ≈ X Λ Xᵀ` from the diagonal of `A` and a handful
//! of its columns by diagonally pivoted (unfinished) Cholesky, keeping the
//! approximation in eigen-form so `X` is an orthonormal basis at every step.
//!
//! `eps` compares traces: stopping at `err <= eps * nrm` bounds the residual
//! factor by `sqrt(eps) * ‖U'‖_F`, so `eps = 1e-12` targets `~1e-6`.

use nalgebra::DVector;

use crate::error::{usage, Result};
use crate::formats::{Core, TuckerLike};
use crate::linalg::{sym_eig_desc, symmetrized, Matrix};
use crate::tensor::Mode;

/// Pivots with residual below `PRECISION_FLOOR * nrm` are treated as roundoff.
pub const PRECISION_FLOOR: f64 = 1e-15;

/// Gram matrix of a core's mode unfolding, in the cheapest available form.
#[derive(Clone, Debug, PartialEq)]
pub enum CoreGram {
    /// Kron core: `Gram(ap, a'p') = gHat(p,p') * hHat(a,a')`.
    KronPair { ghat: Matrix, hhat: Matrix },
    DenseG(Matrix),
    /// Squared weights of a superdiagonal core.
    DiagonalG(Vec<f64>),
}

fn unfolding_gram(c: &crate::tensor::Dense3) -> Matrix {
    let [r1, r2, r3] = c.dims();
    let unf = Matrix::from_column_slice(r1, r2 * r3, c.as_slice());
    symmetrized(&(&unf * unf.transpose()))
}

impl CoreGram {
    /// Gram data of the mode-`mode` unfolding of `core`; `O(r^4)` for Kron cores.
    pub fn new(core: &Core, mode: Mode) -> CoreGram {
        match core.rotate_by(mode.rotations()) {
            Core::Kron { g, h } => CoreGram::KronPair {
                ghat: unfolding_gram(&g),
                hhat: unfolding_gram(&h),
            },
            Core::Dense(c) => CoreGram::DenseG(unfolding_gram(&c)),
            Core::Diagonal(w) => CoreGram::DiagonalG(w.iter().map(|x| x * x).collect()),
        }
    }

    /// Effective rank (size of the implied Gram matrix).
    pub fn dim(&self) -> usize {
        match self {
            CoreGram::KronPair { ghat, hhat } => ghat.nrows() * hhat.nrows(),
            CoreGram::DenseG(m) => m.nrows(),
            CoreGram::DiagonalG(w) => w.len(),
        }
    }

    /// Explicit `R x R` Gram matrix (index `a + p * p1` for Kron pairs).
    pub fn full_matrix(&self) -> Matrix {
        match self {
            CoreGram::KronPair { ghat, hhat } => ghat.kronecker(hhat),
            CoreGram::DenseG(m) => m.clone(),
            CoreGram::DiagonalG(w) => Matrix::from_diagonal(&DVector::from_column_slice(w)),
        }
    }

    /// `Σ_{β,β'} m(β,β') Gram(β,β')` for a symmetric `m`.
    pub fn weighted_trace(&self, m: &Matrix) -> f64 {
        match self {
            CoreGram::KronPair { ghat, hhat } => {
                let p1 = hhat.nrows();
                let mut acc = 0.0;
                for pp in 0..ghat.ncols() {
                    for p in 0..ghat.nrows() {
                        let gv = ghat[(p, pp)];
                        if gv == 0.0 {
                            continue;
                        }
                        let block = m.view((p * p1, pp * p1), (p1, p1));
                        acc += gv * block.dot(hhat);
                    }
                }
                acc
            }
            CoreGram::DenseG(g) => m.dot(g),
            CoreGram::DiagonalG(w) => w.iter().enumerate().map(|(s, ws)| ws * m[(s, s)]).sum(),
        }
    }
}

/// Matrix-free access to `A = factor · Gram · factorᵀ`.
#[derive(Clone, Debug)]
pub struct GramOracle<'a> {
    pub factor: &'a Matrix,
    pub gram: CoreGram,
}

impl<'a> GramOracle<'a> {
    pub fn new(factor: &'a Matrix, gram: CoreGram) -> Result<Self> {
        if factor.ncols() != gram.dim() {
            return usage(format!(
                "GramOracle: factor has {} columns, core Gram has size {}",
                factor.ncols(),
                gram.dim()
            ));
        }
        Ok(GramOracle { factor, gram })
    }

    /// Oracle for the mode-`mode` splitting factor `U'` of a Tucker-like tensor.
    pub fn for_mode(f: &'a TuckerLike, mode: Mode) -> Self {
        GramOracle {
            factor: &f.factors[mode.index()],
            gram: CoreGram::new(&f.core, mode),
        }
    }

    pub fn size(&self) -> usize {
        self.factor.nrows()
    }

    /// Diagonal of `A`, `O(n r^3)` for Kron pairs.
    pub fn diag(&self) -> Vec<f64> {
        let u = self.factor;
        let n = u.nrows();
        match &self.gram {
            CoreGram::KronPair { ghat, hhat } => {
                let (r1, p1) = (ghat.nrows(), hhat.nrows());
                // rows (i, a), columns p
                let stacked = Matrix::from_column_slice(n * p1, r1, u.as_slice());
                let ug = stacked * ghat;
                let ug = Matrix::from_column_slice(n, p1 * r1, ug.as_slice());
                let mut d = vec![0.0; n];
                for p in 0..r1 {
                    let block = ug.columns(p * p1, p1) * hhat;
                    let ublock = u.columns(p * p1, p1);
                    for (i, di) in d.iter_mut().enumerate() {
                        *di += block.row(i).dot(&ublock.row(i));
                    }
                }
                d
            }
            CoreGram::DenseG(g) => {
                let ug = u * g;
                (0..n).map(|i| ug.row(i).dot(&u.row(i))).collect()
            }
            CoreGram::DiagonalG(w) => (0..n)
                .map(|i| w.iter().enumerate().map(|(s, ws)| ws * u[(i, s)].powi(2)).sum())
                .collect(),
        }
    }

    /// Column `i` of `A` (0-based), `O(n r^2 + r^3)` for Kron pairs.
    pub fn column(&self, i: usize) -> Result<DVector<f64>> {
        let u = self.factor;
        if i >= u.nrows() {
            return usage(format!("column {i} out of range 0..{}", u.nrows()));
        }
        let row = u.row(i).transpose();
        let coeffs = match &self.gram {
            CoreGram::KronPair { ghat, hhat } => {
                let (r1, p1) = (ghat.nrows(), hhat.nrows());
                let ui = Matrix::from_column_slice(p1, r1, row.as_slice());
                let m = hhat * ui * ghat;
                DVector::from_column_slice(m.as_slice())
            }
            CoreGram::DenseG(g) => g * row,
            CoreGram::DiagonalG(w) => {
                DVector::from_iterator(w.len(), w.iter().zip(row.iter()).map(|(a, b)| a * b))
            }
        };
        Ok(u * coeffs)
    }
}

/// Why [`run_cross`] stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// `err <= eps * nrm`.
    Tolerance,
    /// Rank reached `r_max`.
    RankCap,
    /// Remaining residual is roundoff.
    PrecisionFloor,
    /// Trailing eigenvalues fell below `eps * λ_max`.
    EigenSplit,
    /// The Gram matrix is zero.
    ZeroNorm,
}

/// Stopping rule of the cross iteration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopRule {
    /// Residual trace: `‖d‖_1 <= eps * nrm`.
    #[default]
    Frobenius,
    /// Also stop once the last `window` eigenvalues are below `eps * λ_max`.
    EigenSplit { window: usize },
}

/// Running eigen-form approximation `X Λ Xᵀ` of a Gram matrix.
#[derive(Clone, Debug)]
pub struct CrossState {
    /// Orthonormal basis, `n x p`.
    pub x: Matrix,
    /// Eigenvalues, descending.
    pub lambda: Vec<f64>,
    /// Diagonal of the residual.
    pub d: Vec<f64>,
    /// Initial trace `‖d‖_1`.
    pub nrm: f64,
    /// Current residual trace.
    pub err: f64,
    pub pivots: Vec<usize>,
    /// `err` after each step.
    pub err_history: Vec<f64>,
    pub stop: StopReason,
}

impl CrossState {
    pub fn rank(&self) -> usize {
        self.x.ncols()
    }
}

/// Eigendecomposition of `diag(lambda, 0) + b bᵀ`, eigenvalues descending.
pub fn rediagonalize(lambda: &[f64], b: &DVector<f64>) -> (Matrix, Vec<f64>) {
    let p = lambda.len();
    assert_eq!(b.len(), p + 1, "b must have length p + 1");
    let mut m = b * b.transpose();
    for (i, &l) in lambda.iter().enumerate() {
        m[(i, i)] += l;
    }
    let (vals, vecs) = sym_eig_desc(&m);
    (vecs, vals)
}

/// `true` when the last `window` eigenvalues are all below `eps * λ_max`.
pub fn eigensplit_stop(state: &CrossState, eps: f64, window: usize) -> bool {
    eigensplit_hit(&state.lambda, eps, window)
}

fn eigensplit_hit(lambda: &[f64], eps: f64, window: usize) -> bool {
    let window = window.max(1);
    let p = lambda.len();
    if p <= window {
        return false;
    }
    let top = lambda[0];
    top > 0.0 && lambda[p - window..].iter().all(|&l| l < eps * top)
}

/// Cross approximation with the residual-trace stopping rule.
pub fn run_cross(o: &GramOracle<'_>, eps: f64, r_max: usize) -> Result<CrossState> {
    run_cross_with(o, eps, r_max, StopRule::Frobenius)
}

/// Lowest index of the largest positive entry.
fn pivot(d: &[f64]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in d.iter().enumerate() {
        if v > 0.0 && best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best
}

fn positive_sum(d: &[f64]) -> f64 {
    d.iter().map(|&v| v.max(0.0)).sum()
}

pub fn run_cross_with(
    o: &GramOracle<'_>,
    eps: f64,
    r_max: usize,
    rule: StopRule,
) -> Result<CrossState> {
    if !(eps > 0.0) {
        return usage(format!("eps must be positive, got {eps}"));
    }
    if r_max == 0 {
        return usage("r_max must be at least 1");
    }
    let n = o.size();
    let mut d = o.diag();
    let nrm = positive_sum(&d);
    let mut state = CrossState {
        x: Matrix::zeros(n, 0),
        lambda: Vec::new(),
        d: Vec::new(),
        nrm,
        err: nrm,
        pivots: Vec::new(),
        err_history: Vec::new(),
        stop: StopReason::ZeroNorm,
    };
    if nrm <= 0.0 {
        state.err = 0.0;
        state.d = d;
        return Ok(state);
    }

    let stop = loop {
        if state.err <= eps * nrm {
            break StopReason::Tolerance;
        }
        if state.rank() >= r_max {
            break StopReason::RankCap;
        }
        let Some((istar, dmax)) = pivot(&d) else {
            break StopReason::PrecisionFloor;
        };
        if dmax <= PRECISION_FLOOR * nrm {
            break StopReason::PrecisionFloor;
        }

        // residual column at the pivot
        let column = o.column(istar)?;
        let x = &state.x;
        let weighted = DVector::from_iterator(
            state.lambda.len(),
            state.lambda.iter().enumerate().map(|(k, l)| l * x[(istar, k)]),
        );
        let resid = column - x * weighted;
        let piv = resid[istar];
        if piv <= 0.0 {
            break StopReason::PrecisionFloor;
        }
        let xstar = resid / piv.sqrt();

        // two passes of classical Gram-Schmidt against span X
        let mut coef = x.tr_mul(&xstar);
        let mut fresh = &xstar - x * &coef;
        let again = x.tr_mul(&fresh);
        fresh -= x * &again;
        coef += again;
        let beta = fresh.norm();
        if beta <= 1e-14 * xstar.norm() {
            break StopReason::PrecisionFloor;
        }
        fresh /= beta;

        for (di, xi) in d.iter_mut().zip(xstar.iter()) {
            *di -= xi * xi;
        }
        d[istar] = 0.0;

        let p = state.rank();
        let mut b = DVector::zeros(p + 1);
        b.rows_mut(0, p).copy_from(&coef);
        b[p] = beta;
        let (v, vals) = rediagonalize(&state.lambda, &b);
        let mut ext = state.x.clone().resize_horizontally(p + 1, 0.0);
        ext.set_column(p, &fresh);
        state.x = ext * v;
        state.lambda = vals;
        state.pivots.push(istar);
        state.err = positive_sum(&d);
        state.err_history.push(state.err);

        if let StopRule::EigenSplit { window } = rule {
            if eigensplit_hit(&state.lambda, eps, window) {
                let top = state.lambda[0];
                let keep = state.lambda.iter().take_while(|&&l| l >= eps * top).count();
                state.x = state.x.columns(0, keep).into_owned();
                state.lambda.truncate(keep);
                break StopReason::EigenSplit;
            }
        }
    };
    state.stop = stop;
    state.d = d;
    Ok(state)
}

/// Approximate dominant mode subspace of `f` via the splitting factor `U'`.
pub fn mode_subspace(
    f: &TuckerLike,
    mode: Mode,
    eps: f64,
    r_max: usize,
    rule: StopRule,
) -> Result<(Matrix, CrossState)> {
    let oracle = GramOracle::for_mode(f, mode);
    let state = run_cross_with(&oracle, eps, r_max, rule)?;
    Ok((state.x.clone(), state))
}
