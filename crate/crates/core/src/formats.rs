//! Canonical, Tucker and Kron-core ("Tucker-like") representations, the
//! bilinear constructors that produce them, and structured inner products
//! that never materialize an `n`-sized tensor.

use crate::error::{usage, Error, Result};
use crate::gram_cross::CoreGram;
use crate::linalg::{gram_2norm, orthonormality_defect, row_kron, Matrix};
use crate::tensor::{Dense3, Mode};

/// Size and work caps for operations whose cost is not linear in `n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Limits {
    /// Largest number of elements a dense tensor may be materialized with.
    pub max_dense_elements: usize,
    /// Largest estimated flop count of one structured contraction.
    pub max_contraction_work: f64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_dense_elements: 20_000_000,
            max_contraction_work: 2.0e11,
        }
    }
}

/// Tucker core variants.
#[derive(Clone, Debug, PartialEq)]
pub enum Core {
    Dense(Dense3),
    /// Superdiagonal core of a canonical decomposition: `g(s,s,s) = weights[s]`.
    Diagonal(Vec<f64>),
    /// `Kron(G,H)[ap,bq,cs] = g(p,q,s) * h(a,b,c)`, `a` varying fastest in `ap`.
    Kron { g: Dense3, h: Dense3 },
}

/// Borrowed view of a core, shared by [`TuckerLike`] and [`TuckerOrtho`].
#[derive(Clone, Copy, Debug)]
pub enum CoreRef<'a> {
    Dense(&'a Dense3),
    Diagonal(&'a [f64]),
    Kron { g: &'a Dense3, h: &'a Dense3 },
}

impl Core {
    pub fn as_ref(&self) -> CoreRef<'_> {
        match self {
            Core::Dense(c) => CoreRef::Dense(c),
            Core::Diagonal(w) => CoreRef::Diagonal(w),
            Core::Kron { g, h } => CoreRef::Kron { g, h },
        }
    }

    pub fn ranks(&self) -> [usize; 3] {
        self.as_ref().ranks()
    }

    /// Cyclic rotation of the core axes, consistent with [`Dense3::rotate`].
    pub fn rotate_by(&self, times: usize) -> Core {
        match self {
            Core::Dense(c) => Core::Dense(c.rotate_by(times)),
            Core::Diagonal(w) => Core::Diagonal(w.clone()),
            Core::Kron { g, h } => Core::Kron {
                g: g.rotate_by(times),
                h: h.rotate_by(times),
            },
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Core::Dense(_) => "dense",
            Core::Diagonal(_) => "diagonal",
            Core::Kron { .. } => "kron",
        }
    }
}

impl<'a> CoreRef<'a> {
    /// Effective mode ranks.
    pub fn ranks(&self) -> [usize; 3] {
        match self {
            CoreRef::Dense(c) => c.dims(),
            CoreRef::Diagonal(w) => [w.len(); 3],
            CoreRef::Kron { g, h } => {
                let (gd, hd) = (g.dims(), h.dims());
                [gd[0] * hd[0], gd[1] * hd[1], gd[2] * hd[2]]
            }
        }
    }

    /// Explicit dense core.
    pub fn to_dense(&self, limits: &Limits) -> Result<Dense3> {
        let ranks = self.ranks();
        check_dense_cap(ranks, limits)?;
        Ok(match *self {
            CoreRef::Dense(c) => c.clone(),
            CoreRef::Diagonal(w) => {
                let mut out = Dense3::zeros(ranks);
                for (s, &ws) in w.iter().enumerate() {
                    out.set(s, s, s, ws);
                }
                out
            }
            CoreRef::Kron { g, h } => {
                let hd = h.dims();
                Dense3::from_fn(ranks, |x, y, z| {
                    let (a, p) = (x % hd[0], x / hd[0]);
                    let (b, q) = (y % hd[1], y / hd[1]);
                    let (c, s) = (z % hd[2], z / hd[2]);
                    g.get(p, q, s) * h.get(a, b, c)
                })
            }
        })
    }

    /// `Σ_β coeffs[β] core(β, :, :)` as an `R2 x R3` matrix.
    ///
    /// For Kron cores the sum over `β = (a, p)` is split in two stages, first
    /// over `a` against `H`, then over `p` against `G`, so the cost is
    /// `O(p1 r1 p2 p3 + r1 r2 r3 p2 p3)` instead of touching every core element.
    pub fn project_mode1(&self, coeffs: &[f64]) -> Matrix {
        let [r1, r2, r3] = self.ranks();
        debug_assert_eq!(coeffs.len(), r1);
        match *self {
            CoreRef::Dense(c) => {
                let data = c.as_slice();
                let mut out = Matrix::zeros(r2, r3);
                for (col, dst) in out.as_mut_slice().iter_mut().enumerate() {
                    let fibre = &data[col * r1..(col + 1) * r1];
                    *dst = fibre.iter().zip(coeffs).map(|(x, y)| x * y).sum();
                }
                out
            }
            CoreRef::Diagonal(w) => {
                let mut out = Matrix::zeros(r2, r3);
                for (s, (&ws, &cs)) in w.iter().zip(coeffs).enumerate() {
                    out[(s, s)] = ws * cs;
                }
                out
            }
            CoreRef::Kron { g, h } => {
                let [g1, g2, g3] = g.dims();
                let [h1, h2, h3] = h.dims();
                let cmat = Matrix::from_column_slice(h1, g1, coeffs);
                let hunf = Matrix::from_column_slice(h1, h2 * h3, h.as_slice());
                // z(p, bc) = Σ_a c(a,p) h(a,b,c)
                let z = cmat.tr_mul(&hunf);
                let gunf = Matrix::from_column_slice(g1, g2 * g3, g.as_slice());
                // y(qs, bc) = Σ_p g(p,q,s) z(p,bc)
                let y = gunf.tr_mul(&z);
                let mut out = Matrix::zeros(r2, r3);
                for s in 0..g3 {
                    for c in 0..h3 {
                        let col = c + s * h3;
                        for q in 0..g2 {
                            for b in 0..h2 {
                                out[(b + q * h2, col)] = y[(q + s * g2, b + c * h2)];
                            }
                        }
                    }
                }
                out
            }
        }
    }

    /// Mode-1 slice `core(alpha, :, :)`.
    pub fn slice_mode1(&self, alpha: usize) -> Matrix {
        let [r1, r2, r3] = self.ranks();
        match *self {
            CoreRef::Dense(c) => {
                Matrix::from_fn(r2, r3, |q, s| c.as_slice()[alpha + r1 * (q + r2 * s)])
            }
            CoreRef::Diagonal(w) => {
                let mut out = Matrix::zeros(r2, r3);
                out[(alpha, alpha)] = w[alpha];
                out
            }
            CoreRef::Kron { g, h } => {
                let hd = h.dims();
                let (a, p) = (alpha % hd[0], alpha / hd[0]);
                Matrix::from_fn(r2, r3, |y, z| {
                    let (b, q) = (y % hd[1], y / hd[1]);
                    let (c, s) = (z % hd[2], z / hd[2]);
                    g.get(p, q, s) * h.get(a, b, c)
                })
            }
        }
    }

    /// Estimated flops of one [`CoreRef::project_mode1`] call.
    pub fn projection_work(&self) -> f64 {
        let [r1, r2, r3] = self.ranks().map(|r| r as f64);
        match *self {
            CoreRef::Dense(_) => r1 * r2 * r3,
            CoreRef::Diagonal(w) => w.len() as f64,
            CoreRef::Kron { g, h } => {
                let [g1, g2, g3] = g.dims().map(|r| r as f64);
                let [h1, h2, h3] = h.dims().map(|r| r as f64);
                h1 * g1 * h2 * h3 + g1 * g2 * g3 * h2 * h3 + r2 * r3
            }
        }
    }
}

fn check_dense_cap(dims: [usize; 3], limits: &Limits) -> Result<()> {
    let len = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .unwrap_or(usize::MAX);
    if len > limits.max_dense_elements {
        return Err(Error::Resource(format!(
            "materializing {:?} needs {} elements, cap is {}",
            dims, len, limits.max_dense_elements
        )));
    }
    Ok(())
}

/// Contracts `core ×1 c1 ×2 c2 ×3 c3` slice by slice along mode 1.
///
/// `c1 = None` stands for the identity. Memory stays at one `R2 x R3` slice
/// plus the output.
pub fn contract_core(
    core: CoreRef<'_>,
    c1: Option<&Matrix>,
    c2: &Matrix,
    c3: &Matrix,
    limits: &Limits,
) -> Result<Dense3> {
    let [r1, r2, r3] = core.ranks();
    if c2.ncols() != r2 || c3.ncols() != r3 || c1.is_some_and(|c| c.ncols() != r1) {
        return usage("contract_core: factor widths do not match core ranks");
    }
    let m1 = c1.map_or(r1, |c| c.nrows());
    let (m2, m3) = (c2.nrows(), c3.nrows());
    let per_slice = match c1 {
        Some(_) => core.projection_work(),
        None => (r2 * r3) as f64,
    } + (m2 * r2 * r3) as f64
        + (m2 * r3 * m3) as f64;
    check_work(m1 as f64 * per_slice, limits)?;
    check_dense_cap([m1, m2, m3], limits)?;

    let mut out = vec![0.0; m1 * m2 * m3];
    let mut coeffs = vec![0.0; r1];
    for alpha in 0..m1 {
        let slice = match c1 {
            Some(c) => {
                for (beta, dst) in coeffs.iter_mut().enumerate() {
                    *dst = c[(alpha, beta)];
                }
                core.project_mode1(&coeffs)
            }
            None => core.slice_mode1(alpha),
        };
        let m = c2 * slice * c3.transpose();
        for z in 0..m3 {
            for y in 0..m2 {
                out[alpha + m1 * (y + m2 * z)] = m[(y, z)];
            }
        }
    }
    Dense3::new([m1, m2, m3], out)
}

fn check_work(work: f64, limits: &Limits) -> Result<()> {
    if work > limits.max_contraction_work {
        return Err(Error::Resource(format!(
            "structured contraction needs ~{work:.3e} flops, cap is {:.3e}",
            limits.max_contraction_work
        )));
    }
    Ok(())
}

/// Common read access to Tucker-structured tensors.
pub trait Tucker {
    fn core_ref(&self) -> CoreRef<'_>;
    fn factors(&self) -> &[Matrix; 3];

    /// Mode sizes `(n1, n2, n3)`.
    fn dims(&self) -> [usize; 3] {
        let f = self.factors();
        [f[0].nrows(), f[1].nrows(), f[2].nrows()]
    }

    /// Effective mode ranks (factor column counts).
    fn ranks(&self) -> [usize; 3] {
        self.core_ref().ranks()
    }
}

/// Core plus three factor matrices without any orthonormality requirement.
#[derive(Clone, Debug, PartialEq)]
pub struct TuckerLike {
    pub core: Core,
    pub factors: [Matrix; 3],
}

impl TuckerLike {
    pub fn new(core: Core, factors: [Matrix; 3]) -> Result<Self> {
        let ranks = core.ranks();
        for (l, f) in factors.iter().enumerate() {
            if f.ncols() != ranks[l] {
                return usage(format!(
                    "factor {} has {} columns, core rank is {}",
                    l + 1,
                    f.ncols(),
                    ranks[l]
                ));
            }
        }
        Ok(TuckerLike { core, factors })
    }

    /// Cyclic rotation so that `mode` becomes the first mode.
    pub fn rotated(&self, mode: Mode) -> TuckerLike {
        let r = mode.rotations();
        let [u, v, w] = &self.factors;
        let factors = match r {
            0 => [u.clone(), v.clone(), w.clone()],
            1 => [v.clone(), w.clone(), u.clone()],
            _ => [w.clone(), u.clone(), v.clone()],
        };
        TuckerLike {
            core: self.core.rotate_by(r),
            factors,
        }
    }

    /// Same tensor with a Dense core (Diagonal and Kron cores are expanded).
    pub fn with_dense_core(&self, limits: &Limits) -> Result<TuckerLike> {
        Ok(TuckerLike {
            core: Core::Dense(self.core.as_ref().to_dense(limits)?),
            factors: self.factors.clone(),
        })
    }
}

impl Tucker for TuckerLike {
    fn core_ref(&self) -> CoreRef<'_> {
        self.core.as_ref()
    }

    fn factors(&self) -> &[Matrix; 3] {
        &self.factors
    }
}

/// Tucker triple with orthonormal factors.
#[derive(Clone, Debug, PartialEq)]
pub struct TuckerOrtho {
    pub core: Dense3,
    pub factors: [Matrix; 3],
}

impl TuckerOrtho {
    /// Tolerance on `‖XᵀX − I‖_F` accepted by [`TuckerOrtho::new`].
    pub const ORTHO_TOL: f64 = 1e-10;

    pub fn new(core: Dense3, factors: [Matrix; 3]) -> Result<Self> {
        let dims = core.dims();
        for (l, f) in factors.iter().enumerate() {
            if f.ncols() != dims[l] {
                return usage(format!(
                    "factor {} has {} columns, core size is {}",
                    l + 1,
                    f.ncols(),
                    dims[l]
                ));
            }
            let defect = orthonormality_defect(f);
            if defect > Self::ORTHO_TOL {
                return usage(format!(
                    "factor {} is not orthonormal (defect {defect:.2e})",
                    l + 1
                ));
            }
        }
        Ok(TuckerOrtho { core, factors })
    }

    /// Rank-0 Tucker tensor (the zero tensor) with the given mode sizes.
    pub fn zero(dims: [usize; 3]) -> Self {
        TuckerOrtho {
            core: Dense3::zeros([0, 0, 0]),
            factors: dims.map(|n| Matrix::zeros(n, 0)),
        }
    }

    pub fn to_tucker_like(&self) -> TuckerLike {
        TuckerLike {
            core: Core::Dense(self.core.clone()),
            factors: self.factors.clone(),
        }
    }
}

impl Tucker for TuckerOrtho {
    fn core_ref(&self) -> CoreRef<'_> {
        CoreRef::Dense(&self.core)
    }

    fn factors(&self) -> &[Matrix; 3] {
        &self.factors
    }
}

impl From<&TuckerOrtho> for TuckerLike {
    fn from(t: &TuckerOrtho) -> Self {
        t.to_tucker_like()
    }
}

/// Canonical decomposition `Σ_s u_s ⊗ v_s ⊗ w_s` as a Diagonal-core tensor.
pub fn from_canonical(u: Matrix, v: Matrix, w: Matrix) -> Result<TuckerLike> {
    let r = u.ncols();
    if v.ncols() != r || w.ncols() != r {
        return usage(format!(
            "canonical factors have {}, {}, {} columns",
            u.ncols(),
            v.ncols(),
            w.ncols()
        ));
    }
    TuckerLike::new(Core::Diagonal(vec![1.0; r]), [u, v, w])
}

/// Hadamard (pointwise) product as a Kron-core tensor.
///
/// `g` is the core of `a`, `h` the core of `b`; factor columns are
/// `row_kron(a_l, b_l)`, so `u(i, ap) = u_b(i, a) u_a(i, p)`.
pub fn hadamard(a: &impl Tucker, b: &impl Tucker, limits: &Limits) -> Result<TuckerLike> {
    if a.dims() != b.dims() {
        return usage(format!(
            "hadamard: mode sizes {:?} and {:?} differ",
            a.dims(),
            b.dims()
        ));
    }
    let dense_core = |c: CoreRef<'_>| -> Result<Dense3> {
        match c {
            CoreRef::Kron { .. } => {
                usage("hadamard: Kron-core arguments must be truncated first")
            }
            other => other.to_dense(limits),
        }
    };
    let g = dense_core(a.core_ref())?;
    let h = dense_core(b.core_ref())?;
    let (fa, fb) = (a.factors(), b.factors());
    let factors = [
        row_kron(&fa[0], &fb[0])?,
        row_kron(&fa[1], &fb[1])?,
        row_kron(&fa[2], &fb[2])?,
    ];
    TuckerLike::new(Core::Kron { g, h }, factors)
}

/// `Σ_m coef_m t_m` with a block-diagonal Dense core and concatenated factors.
pub fn linear_combine(terms: &[(f64, &TuckerLike)], limits: &Limits) -> Result<TuckerLike> {
    let Some((_, first)) = terms.first() else {
        return usage("linear_combine: no terms");
    };
    let dims = first.dims();
    if let Some((_, t)) = terms.iter().find(|(_, t)| t.dims() != dims) {
        return usage(format!(
            "linear_combine: mode sizes {:?} and {:?} differ",
            dims,
            t.dims()
        ));
    }
    let total: [usize; 3] = {
        let mut acc = [0; 3];
        for (_, t) in terms {
            let r = t.ranks();
            for l in 0..3 {
                acc[l] += r[l];
            }
        }
        acc
    };
    check_dense_cap(total, limits)?;
    let mut core = Dense3::zeros(total);
    let mut factors = dims.map(|n| Matrix::zeros(n, 0));
    let mut offset = [0usize; 3];
    for &(coef, t) in terms {
        let block = t.core.as_ref().to_dense(limits)?;
        let [b1, b2, b3] = block.dims();
        for k in 0..b3 {
            for j in 0..b2 {
                for i in 0..b1 {
                    core.set(
                        offset[0] + i,
                        offset[1] + j,
                        offset[2] + k,
                        coef * block.get(i, j, k),
                    );
                }
            }
        }
        for l in 0..3 {
            let f = &t.factors[l];
            let cur = std::mem::replace(&mut factors[l], Matrix::zeros(0, 0));
            let mut grown = cur.resize_horizontally(offset[l] + f.ncols(), 0.0);
            grown.columns_mut(offset[l], f.ncols()).copy_from(f);
            factors[l] = grown;
            offset[l] += f.ncols();
        }
    }
    TuckerLike::new(Core::Dense(core), factors)
}

/// Elementwise evaluation as a dense tensor (subject to `limits`).
pub fn to_dense(t: &impl Tucker, limits: &Limits) -> Result<Dense3> {
    let dims = t.dims();
    check_dense_cap(dims, limits)?;
    let [u, v, w] = t.factors();
    match t.core_ref() {
        CoreRef::Dense(c) => c
            .mode_mul(u, Mode::One)?
            .mode_mul(v, Mode::Two)?
            .mode_mul(w, Mode::Three),
        CoreRef::Diagonal(weights) => {
            // A[i,jk] = U diag(weights) (w_s ⊗ v_s)ᵀ
            let r = weights.len();
            let mut kr = Matrix::zeros(dims[1] * dims[2], r);
            for s in 0..r {
                for k in 0..dims[2] {
                    for j in 0..dims[1] {
                        kr[(j + dims[1] * k, s)] = weights[s] * v[(j, s)] * w[(k, s)];
                    }
                }
            }
            Dense3::new(dims, (u * kr.transpose()).as_slice().to_vec())
        }
        core @ CoreRef::Kron { .. } => {
            let partial = contract_core(core, None, v, w, limits)?;
            partial.mode_mul(u, Mode::One)
        }
    }
}

/// Single element `t(i, j, k)` (0-based) without materializing the tensor.
pub fn element(t: &impl Tucker, i: usize, j: usize, k: usize) -> Result<f64> {
    let dims = t.dims();
    if i >= dims[0] || j >= dims[1] || k >= dims[2] {
        return usage(format!("index ({i}, {j}, {k}) outside {dims:?}"));
    }
    let [u, v, w] = t.factors();
    let row: Vec<f64> = u.row(i).iter().copied().collect();
    let slice = t.core_ref().project_mode1(&row);
    Ok((v.row(j) * slice * w.row(k).transpose())[(0, 0)])
}

/// `⟨a, b⟩_F` from per-mode cross-Gram matrices and slice-wise core
/// contractions; never forms an `n`-sized object.
pub fn structured_inner(a: &impl Tucker, b: &impl Tucker, limits: &Limits) -> Result<f64> {
    if a.dims() != b.dims() {
        return usage(format!(
            "structured_inner: mode sizes {:?} and {:?} differ",
            a.dims(),
            b.dims()
        ));
    }
    let (fa, fb) = (a.factors(), b.factors());
    let cross = [0, 1, 2].map(|l| fa[l].tr_mul(&fb[l]));
    core_inner(a.core_ref(), b.core_ref(), &cross, limits)
}

/// Factor Gram matrices `UᵀU`, `VᵀV`, `WᵀW`.
pub fn factor_grams(t: &impl Tucker) -> [Matrix; 3] {
    t.factors().each_ref().map(|f| f.tr_mul(f))
}

/// `⟨core_a, core_b ×1 C1 ×2 C2 ×3 C3⟩` for given cross-Gram matrices
/// `C_l = U_aᵀ U_b`; slices along the side whose loop is cheaper.
pub fn core_inner(ca: CoreRef<'_>, cb: CoreRef<'_>, cross: &[Matrix; 3], limits: &Limits) -> Result<f64> {
    if slice_loop_work(ca, cb) <= slice_loop_work(cb, ca) {
        inner_by_slices(ca, cb, cross, limits)
    } else {
        let crossed = cross.each_ref().map(|c| c.transpose());
        inner_by_slices(cb, ca, &crossed, limits)
    }
}

fn slice_loop_work(outer: CoreRef<'_>, inner: CoreRef<'_>) -> f64 {
    let [a1, a2, a3] = outer.ranks().map(|r| r as f64);
    let [_, b2, b3] = inner.ranks().map(|r| r as f64);
    a1 * (inner.projection_work() + a2 * b2 * b3 + a2 * b3 * a3 + a2 * a3)
}

/// `⟨core_a, core_b ×1 C1 ×2 C2 ×3 C3⟩` with `C_l = U_aᵀ U_b`, one mode-1
/// slice of `core_a` at a time.
fn inner_by_slices(
    ca: CoreRef<'_>,
    cb: CoreRef<'_>,
    cross: &[Matrix; 3],
    limits: &Limits,
) -> Result<f64> {
    check_work(slice_loop_work(ca, cb), limits)?;
    let [r1, _, _] = ca.ranks();
    let rb1 = cb.ranks()[0];
    let mut coeffs = vec![0.0; rb1];
    let c3t = cross[2].transpose();
    let mut acc = 0.0;
    for alpha in 0..r1 {
        for (beta, dst) in coeffs.iter_mut().enumerate() {
            *dst = cross[0][(alpha, beta)];
        }
        let projected = cb.project_mode1(&coeffs);
        let m = &cross[1] * projected * &c3t;
        let slice = ca.slice_mode1(alpha);
        acc += slice.dot(&m);
    }
    Ok(acc)
}

pub fn frob_norm(t: &impl Tucker, limits: &Limits) -> Result<f64> {
    Ok(structured_inner(t, t, limits)?.max(0.0).sqrt())
}

/// `‖a − b‖_F = sqrt(max(0, ⟨a,a⟩ − 2⟨a,b⟩ + ⟨b,b⟩))`.
///
/// The radicand is clamped at zero; cancellation limits the attainable
/// relative accuracy to roughly `1e-8`.
pub fn frob_distance(a: &impl Tucker, b: &impl Tucker, limits: &Limits) -> Result<f64> {
    let aa = structured_inner(a, a, limits)?;
    let ab = structured_inner(a, b, limits)?;
    let bb = structured_inner(b, b, limits)?;
    Ok((aa - 2.0 * ab + bb).max(0.0).sqrt())
}

/// `‖U'‖_F` of the splitting `F = U' ×2 V ×3 W` along `mode`, from
/// `trace((UᵀU) · Gram(core unfolding))`.
pub fn split_factor_norm(f: &TuckerLike, mode: Mode) -> f64 {
    let u = &f.factors[mode.index()];
    split_norm_from_gram(f, mode, &u.tr_mul(u))
}

fn split_norm_from_gram(f: &TuckerLike, mode: Mode, utu: &Matrix) -> f64 {
    CoreGram::new(&f.core, mode).weighted_trace(utu).max(0.0).sqrt()
}

/// Accuracy constant `c_F = ‖U'‖_F ‖V‖_2 ‖W‖_2 / ‖F‖_F` for `mode`.
pub fn accuracy_constant_cf(f: &TuckerLike, mode: Mode, limits: &Limits) -> Result<f64> {
    let norm = frob_norm(f, limits)?;
    Ok(accuracy_constant_cf_with_norm(f, mode, norm))
}

/// [`accuracy_constant_cf`] with a precomputed `‖F‖_F`.
pub fn accuracy_constant_cf_with_norm(f: &TuckerLike, mode: Mode, fnorm: f64) -> f64 {
    accuracy_constants_from_grams(f, &factor_grams(f), fnorm)[mode.index()]
}

/// `c_F` for all three modes from the factor Gram matrices.
pub fn accuracy_constants_from_grams(f: &TuckerLike, grams: &[Matrix; 3], fnorm: f64) -> [f64; 3] {
    if fnorm <= 0.0 {
        return [0.0; 3];
    }
    let spectral = grams.each_ref().map(gram_2norm);
    Mode::ALL.map(|m| {
        let l = m.index();
        split_norm_from_gram(f, m, &grams[l]) * spectral[(l + 1) % 3] * spectral[(l + 2) % 3] / fnorm
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{random_matrix, random_orthonormal};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_tucker(n: usize, r: [usize; 3], rng: &mut ChaCha8Rng) -> TuckerLike {
        TuckerLike::new(
            Core::Dense(Dense3::random(r, rng)),
            [
                random_matrix(n, r[0], rng),
                random_matrix(n, r[1], rng),
                random_matrix(n, r[2], rng),
            ],
        )
        .unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn canonical_unit_and_zero() {
        let e1 = Matrix::from_column_slice(2, 1, &[1.0, 0.0]);
        let t = from_canonical(e1.clone(), e1.clone(), e1).unwrap();
        let d = to_dense(&t, &Limits::default()).unwrap();
        assert_eq!(d.get(0, 0, 0), 1.0);
        assert_eq!(d.frob_norm(), 1.0);
        let z = from_canonical(Matrix::zeros(3, 2), Matrix::zeros(3, 2), Matrix::zeros(3, 2))
            .unwrap();
        assert_eq!(to_dense(&z, &Limits::default()).unwrap().frob_norm(), 0.0);
        assert!(from_canonical(Matrix::zeros(3, 2), Matrix::zeros(3, 1), Matrix::zeros(3, 2))
            .is_err());
    }

    #[test]
    fn canonical_matches_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (u, v, w) = (
            random_matrix(4, 2, &mut rng),
            random_matrix(3, 2, &mut rng),
            random_matrix(5, 2, &mut rng),
        );
        let t = from_canonical(u.clone(), v.clone(), w.clone()).unwrap();
        let d = to_dense(&t, &Limits::default()).unwrap();
        for k in 0..5 {
            for j in 0..3 {
                for i in 0..4 {
                    let s: f64 = (0..2).map(|s| u[(i, s)] * v[(j, s)] * w[(k, s)]).sum();
                    assert!((d.get(i, j, k) - s).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn hadamard_rank_one_and_ones() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let lim = Limits::default();
        let a = random_tucker(6, [2, 2, 2], &mut rng);
        let ones = from_canonical(
            Matrix::from_element(6, 1, 1.0),
            Matrix::from_element(6, 1, 1.0),
            Matrix::from_element(6, 1, 1.0),
        )
        .unwrap();
        let p = hadamard(&a, &ones, &lim).unwrap();
        let (dp, da) = (to_dense(&p, &lim).unwrap(), to_dense(&a, &lim).unwrap());
        assert!(dp.sub(&da).unwrap().frob_norm() <= 1e-13 * da.frob_norm());
        let kron = hadamard(&p, &a, &lim);
        assert!(kron.is_err());
    }

    #[test]
    fn linear_combination_cancels() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let lim = Limits::default();
        let a = random_tucker(5, [2, 3, 2], &mut rng);
        let single = linear_combine(&[(1.0, &a)], &lim).unwrap();
        let (ds, da) = (to_dense(&single, &lim).unwrap(), to_dense(&a, &lim).unwrap());
        assert!(ds.sub(&da).unwrap().frob_norm() <= 1e-14 * da.frob_norm());
        let zero = linear_combine(&[(1.0, &a), (-1.0, &a)], &lim).unwrap();
        assert!(to_dense(&zero, &lim).unwrap().frob_norm() <= 1e-13 * da.frob_norm());
        let other = random_tucker(4, [1, 1, 1], &mut rng);
        assert!(linear_combine(&[(1.0, &a), (1.0, &other)], &lim).is_err());
    }

    #[test]
    fn structured_inner_of_orthonormal_tucker_is_core_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let core = Dense3::random([3, 2, 4], &mut rng);
        let t = TuckerOrtho::new(
            core.clone(),
            [
                random_orthonormal(10, 3, &mut rng),
                random_orthonormal(9, 2, &mut rng),
                random_orthonormal(8, 4, &mut rng),
            ],
        )
        .unwrap();
        let ip = structured_inner(&t, &t, &Limits::default()).unwrap();
        assert!(rel(ip, core.frob_norm().powi(2)) < 1e-13);
    }

    #[test]
    fn disjoint_support_is_orthogonal() {
        let e = |n: usize, i: usize| {
            let mut m = Matrix::zeros(n, 1);
            m[(i, 0)] = 1.0;
            m
        };
        let a = from_canonical(e(4, 0), e(4, 1), e(4, 2)).unwrap();
        let b = from_canonical(e(4, 3), e(4, 1), e(4, 2)).unwrap();
        assert_eq!(structured_inner(&a, &b, &Limits::default()).unwrap(), 0.0);
    }

    #[test]
    fn distance_to_zero_and_self() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let lim = Limits::default();
        let a = random_tucker(6, [2, 3, 2], &mut rng);
        let zero = TuckerOrtho::zero([6, 6, 6]);
        let na = to_dense(&a, &lim).unwrap().frob_norm();
        assert!(rel(frob_distance(&a, &zero, &lim).unwrap(), na) < 1e-12);
        assert!(frob_distance(&a, &a, &lim).unwrap() <= 1e-7 * na);
    }

    #[test]
    fn cf_is_one_for_orthonormal_identity_cores() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let n = 12;
        let id = Dense3::from_fn([2, 2, 2], |i, j, k| if i == j && j == k { 1.0 } else { 0.0 });
        let one = Dense3::from_fn([1, 1, 1], |_, _, _| 1.0);
        let f = TuckerLike::new(
            Core::Kron { g: one, h: id.clone() },
            [
                random_orthonormal(n, 2, &mut rng),
                random_orthonormal(n, 2, &mut rng),
                random_orthonormal(n, 2, &mut rng),
            ],
        )
        .unwrap();
        for mode in Mode::ALL {
            let c = accuracy_constant_cf(&f, mode, &Limits::default()).unwrap();
            assert!((c - 1.0).abs() < 1e-12, "mode {mode}: {c}");
        }
    }

    #[test]
    fn resource_caps_are_enforced() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_tucker(30, [2, 2, 2], &mut rng);
        let tight = Limits {
            max_dense_elements: 1000,
            max_contraction_work: 10.0,
        };
        assert!(matches!(to_dense(&a, &tight), Err(Error::Resource(_))));
        assert!(matches!(structured_inner(&a, &a, &tight), Err(Error::Resource(_))));
    }
}
