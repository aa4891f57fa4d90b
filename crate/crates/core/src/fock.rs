//! Truncated Fock-space operators and the convention ledger.
//!
//! # Conventions
//!
//! Every module reads its conventions from here:
//!
//! * `Q = s (a + a†)`, `P = s (a − a†) / i` with `s = QUADRATURE_SCALE = 1/2`,
//!   so `a = Q + iP` and `[Q, P] = i/2`.
//! * Phase-space points are `α = q + ip` and the measure is `d²α = dq dp`.
//! * `D(α) = exp(α a† − α* a)`, `Π = e^{iπN}`, and the Wigner point operator
//!   is `D(α) Π D(α)† = D(2α) Π`.
//! * Fourier transforms use the kernel `e^{+iqp}`: `f̃(p) = ∫ f(q) e^{iqp} dq`.
//! * `e^{2iaP} = D(−a)`, hence `⟨n|e^{2iaP}|n⟩ = e^{−a²/2} L_n(a²)`.
//! * `e^{−icQ}` translates momentum eigenkets by `−c/2`.
//!
//! Truncation corrupts the last rows and columns of every ladder-built
//! matrix, so analytic-versus-numeric comparisons are made on the leading
//! [`central_block`] of size `dim / 2`.

use std::ops::{Add, Mul, Sub};

use nalgebra::linalg::SymmetricEigen;
use nalgebra::{ComplexField, DMatrix};
use serde::Serialize;

use crate::error::{OvmError, Result};
use crate::scalar::{cis, cx, re, CMatrix, CVector, Cx, Real};
use crate::special::{assoc_laguerre_scaled_row, hermite_functions, ln_factorials};

/// Scale `s` in `Q = s(a + a†)`, `P = s(a − a†)/i`.
pub const QUADRATURE_SCALE: f64 = 0.5;

/// `[Q, P] = i · QP_COMMUTATOR`.
pub const QP_COMMUTATOR: f64 = 2.0 * QUADRATURE_SCALE * QUADRATURE_SCALE;

/// Leading block size used for truncation-sensitive comparisons.
pub fn central_block(dim: usize) -> usize {
    (dim / 2).max(1)
}

/// Dense complex matrix over the truncated basis `|0⟩ … |dim−1⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator<T: Real> {
    m: CMatrix<T>,
}

impl<T: Real> FockOperator<T> {
    pub fn new(m: CMatrix<T>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(OvmError::InvalidDimension {
                dim: m.nrows(),
                reason: "operator matrix must be square",
            });
        }
        if m.nrows() == 0 {
            return Err(OvmError::InvalidDimension {
                dim: 0,
                reason: "empty operator",
            });
        }
        Ok(Self { m })
    }

    pub fn zeros(dim: usize) -> Self {
        Self { m: DMatrix::zeros(dim, dim) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { m: DMatrix::identity(dim, dim) }
    }

    pub fn from_diagonal(diag: impl IntoIterator<Item = Cx<T>>) -> Self {
        let d: Vec<Cx<T>> = diag.into_iter().collect();
        let n = d.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, v) in d.into_iter().enumerate() {
            m[(i, i)] = v;
        }
        Self { m }
    }

    /// `|u⟩⟨v|`.
    pub fn outer(u: &CVector<T>, v: &CVector<T>) -> Self {
        Self { m: u * v.adjoint() }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.m
    }

    pub fn get(&self, row: usize, col: usize) -> Cx<T> {
        self.m[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        Self { m: self.m.adjoint() }
    }

    pub fn scale(&self, c: Cx<T>) -> Self {
        Self { m: &self.m * c }
    }

    pub fn trace(&self) -> Cx<T> {
        self.m.trace()
    }

    pub fn diagonal(&self) -> Vec<Cx<T>> {
        self.m.diagonal().iter().copied().collect()
    }

    /// `A B − B A`.
    pub fn commutator(&self, other: &Self) -> Self {
        Self {
            m: &self.m * &other.m - &other.m * &self.m,
        }
    }

    /// `U X U†`.
    pub fn conjugate_by(&self, u: &Self) -> Self {
        Self {
            m: &u.m * &self.m * u.m.adjoint(),
        }
    }

    /// `max |M − M†|`.
    pub fn hermiticity_defect(&self) -> T {
        max_abs(&(&self.m - self.m.adjoint()))
    }

    /// `max |M†M − 1|`.
    pub fn unitarity_defect(&self) -> T {
        let n = self.dim();
        max_abs(&(self.m.adjoint() * &self.m - DMatrix::identity(n, n)))
    }

    /// Unitarity defect restricted to the leading `k × k` block of `M†M`.
    pub fn unitarity_defect_block(&self, k: usize) -> T {
        let prod = self.m.adjoint() * &self.m;
        let k = k.min(self.dim());
        max_abs(&(prod.view((0, 0), (k, k)) - DMatrix::<Cx<T>>::identity(k, k)))
    }

    pub fn max_abs(&self) -> T {
        max_abs(&self.m)
    }

    /// Largest off-diagonal magnitude.
    pub fn off_diagonal_max(&self) -> T {
        let mut best = T::zero();
        for c in 0..self.dim() {
            for r in 0..self.dim() {
                if r != c {
                    let v = self.m[(r, c)].modulus();
                    if v > best {
                        best = v;
                    }
                }
            }
        }
        best
    }

    /// Leading `k × k` block.
    pub fn block(&self, k: usize) -> CMatrix<T> {
        let k = k.min(self.dim());
        self.m.view((0, 0), (k, k)).into_owned()
    }

    /// Max entrywise deviation on the leading `k × k` block.
    pub fn max_abs_diff_block(&self, other: &Self, k: usize) -> T {
        let k = k.min(self.dim()).min(other.dim());
        max_abs(&(self.m.view((0, 0), (k, k)) - other.m.view((0, 0), (k, k))))
    }

    /// Frobenius deviation on the leading `k × k` block.
    pub fn frobenius_diff_block(&self, other: &Self, k: usize) -> T {
        let k = k.min(self.dim()).min(other.dim());
        (self.m.view((0, 0), (k, k)) - other.m.view((0, 0), (k, k))).norm()
    }

    /// Leading `k × k` block as a new operator.
    pub fn compress(&self, k: usize) -> Self {
        Self { m: self.block(k) }
    }

    /// Zero-padded copy of dimension `dim ≥ self.dim()`.
    pub fn embed(&self, dim: usize) -> Self {
        let mut m = DMatrix::zeros(dim, dim);
        let k = self.dim().min(dim);
        m.view_mut((0, 0), (k, k)).copy_from(&self.m.view((0, 0), (k, k)));
        Self { m }
    }

    /// `M Π`: flips the sign of odd columns.
    pub fn times_parity(&self) -> Self {
        let mut m = self.m.clone();
        for n in (1..self.dim()).step_by(2) {
            m.column_mut(n).neg_mut();
        }
        Self { m }
    }

    /// `Π M`: flips the sign of odd rows.
    pub fn parity_times(&self) -> Self {
        let mut m = self.m.clone();
        for n in (1..self.dim()).step_by(2) {
            m.row_mut(n).neg_mut();
        }
        Self { m }
    }

    pub fn apply(&self, v: &CVector<T>) -> CVector<T> {
        &self.m * v
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<T> {
        let h = (&self.m + self.m.adjoint()) * re(T::lit(0.5));
        let mut vals: Vec<T> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        vals
    }

    /// Casts entries to `f64`.
    pub fn to_f64(&self) -> FockOperator<f64> {
        FockOperator {
            m: self.m.map(|z| num_complex::Complex::new(z.re.as_f64(), z.im.as_f64())),
        }
    }
}

pub(crate) fn max_abs<T: Real, R: nalgebra::Dim, C: nalgebra::Dim, S>(m: &nalgebra::Matrix<Cx<T>, R, C, S>) -> T
where
    S: nalgebra::RawStorage<Cx<T>, R, C>,
{
    m.iter().fold(T::zero(), |acc, z| {
        let v = z.modulus();
        if v > acc {
            v
        } else {
            acc
        }
    })
}

impl<T: Real> Mul for &FockOperator<T> {
    type Output = FockOperator<T>;
    fn mul(self, rhs: Self) -> FockOperator<T> {
        FockOperator { m: &self.m * &rhs.m }
    }
}

impl<T: Real> Add for &FockOperator<T> {
    type Output = FockOperator<T>;
    fn add(self, rhs: Self) -> FockOperator<T> {
        FockOperator { m: &self.m + &rhs.m }
    }
}

impl<T: Real> Sub for &FockOperator<T> {
    type Output = FockOperator<T>;
    fn sub(self, rhs: Self) -> FockOperator<T> {
        FockOperator { m: &self.m - &rhs.m }
    }
}

/// Number, ladder, quadrature and parity operators of one truncation.
#[derive(Debug, Clone)]
pub struct BasicOperators<T: Real> {
    pub number: FockOperator<T>,
    pub a: FockOperator<T>,
    pub a_dag: FockOperator<T>,
    pub q: FockOperator<T>,
    pub p: FockOperator<T>,
    pub parity: FockOperator<T>,
}

fn check_dim(dim: usize, min: usize) -> Result<()> {
    if dim < min {
        return Err(OvmError::InvalidDimension {
            dim,
            reason: "truncation dimension too small",
        });
    }
    Ok(())
}

pub fn make_basic_operators<T: Real>(dim: usize) -> Result<BasicOperators<T>> {
    check_dim(dim, 2)?;
    let a = annihilation(dim);
    Ok(BasicOperators {
        number: number(dim),
        a_dag: a.adjoint(),
        q: position(dim),
        p: momentum(dim),
        parity: parity(dim),
        a,
    })
}

/// `a|n⟩ = √n |n−1⟩`.
pub fn annihilation<T: Real>(dim: usize) -> FockOperator<T> {
    let mut m = DMatrix::zeros(dim, dim);
    for n in 1..dim {
        m[(n - 1, n)] = re(T::of(n).sqrt());
    }
    FockOperator { m }
}

pub fn number<T: Real>(dim: usize) -> FockOperator<T> {
    FockOperator::from_diagonal((0..dim).map(|n| re(T::of(n))))
}

/// `Π = diag((−1)^n)`.
pub fn parity<T: Real>(dim: usize) -> FockOperator<T> {
    FockOperator::from_diagonal((0..dim).map(|n| re(if n % 2 == 0 { T::one() } else { -T::one() })))
}

pub fn position<T: Real>(dim: usize) -> FockOperator<T> {
    let s = T::lit(QUADRATURE_SCALE);
    let mut m = DMatrix::zeros(dim, dim);
    for n in 1..dim {
        let v = re(s * T::of(n).sqrt());
        m[(n - 1, n)] = v;
        m[(n, n - 1)] = v;
    }
    FockOperator { m }
}

pub fn momentum<T: Real>(dim: usize) -> FockOperator<T> {
    let s = T::lit(QUADRATURE_SCALE);
    let mut m = DMatrix::zeros(dim, dim);
    for n in 1..dim {
        // (a − a†)/i: −i√n above the diagonal, +i√n below.
        let v = s * T::of(n).sqrt();
        m[(n - 1, n)] = cx(T::zero(), -v);
        m[(n, n - 1)] = cx(T::zero(), v);
    }
    FockOperator { m }
}

/// Eigen-decomposition of a Hermitian matrix, used as the single mechanism
/// for scalar functions of `P` and `Q`.
#[derive(Debug, Clone)]
pub struct HermitianSpectrum<T: Real> {
    values: Vec<T>,
    vectors: CMatrix<T>,
}

impl<T: Real> HermitianSpectrum<T> {
    pub fn new(h: &FockOperator<T>) -> Self {
        let eig = SymmetricEigen::new(h.m.clone());
        Self {
            values: eig.eigenvalues.iter().copied().collect(),
            vectors: eig.eigenvectors,
        }
    }

    pub fn of_momentum(dim: usize) -> Self {
        Self::new(&momentum(dim))
    }

    pub fn of_position(dim: usize) -> Self {
        Self::new(&position(dim))
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `U diag(f(λ)) U†`.
    pub fn apply(&self, f: impl Fn(T) -> Cx<T>) -> FockOperator<T> {
        let mut scaled = self.vectors.clone();
        for (j, &lam) in self.values.iter().enumerate() {
            let fj = f(lam);
            scaled.column_mut(j).scale_mut_complex(fj);
        }
        FockOperator {
            m: scaled * self.vectors.adjoint(),
        }
    }
}

trait ScaleComplex<T: Real> {
    fn scale_mut_complex(&mut self, c: Cx<T>);
}

impl<T: Real, S> ScaleComplex<T> for nalgebra::Matrix<Cx<T>, nalgebra::Dyn, nalgebra::U1, S>
where
    S: nalgebra::StorageMut<Cx<T>, nalgebra::Dyn, nalgebra::U1>,
{
    fn scale_mut_complex(&mut self, c: Cx<T>) {
        for z in self.iter_mut() {
            *z *= c;
        }
    }
}

/// `f(P)` on the truncated momentum operator.
pub fn function_of_momentum<T: Real>(dim: usize, f: impl Fn(T) -> Cx<T>) -> FockOperator<T> {
    HermitianSpectrum::of_momentum(dim).apply(f)
}

/// `f(Q)` on the truncated position operator.
pub fn function_of_position<T: Real>(dim: usize, f: impl Fn(T) -> Cx<T>) -> FockOperator<T> {
    HermitianSpectrum::of_position(dim).apply(f)
}

/// Exact matrix elements `⟨m|D(β)|n⟩`, `m < rows`, `n < cols`, from the
/// associated-Laguerre closed form.
///
/// These are entries of the untruncated operator, so any rectangular block
/// is exact; only products of such blocks suffer truncation.
pub fn displacement_block<T: Real>(beta: Cx<T>, rows: usize, cols: usize) -> CMatrix<T> {
    let mut out = DMatrix::zeros(rows, cols);
    let x = beta.norm_sqr();
    if x == T::zero() {
        for i in 0..rows.min(cols) {
            out[(i, i)] = re(T::one());
        }
        return out;
    }
    let ln_abs = beta.modulus().ln();
    let arg_lower = beta.argument();
    // −β* has argument π − arg β.
    let arg_upper = T::pi() - beta.argument();
    let lf: Vec<T> = ln_factorials(rows.max(cols) + 1);
    let half = T::lit(0.5);

    // Upper triangle including the diagonal: n = m + k.
    for k in 0..cols {
        let count = rows.min(cols - k);
        if count == 0 {
            break;
        }
        let lag = assoc_laguerre_scaled_row(k, count, x);
        let kk = T::of(k);
        for (m, &(mant, scale)) in lag.iter().enumerate() {
            let n = m + k;
            out[(m, n)] = laguerre_entry(mant, scale, half * (lf[m] - lf[n]) + kk * ln_abs - half * x, kk * arg_upper);
        }
    }
    // Strict lower triangle: m = n + k.
    for k in 1..rows {
        let count = cols.min(rows - k);
        if count == 0 {
            break;
        }
        let lag = assoc_laguerre_scaled_row(k, count, x);
        let kk = T::of(k);
        for (n, &(mant, scale)) in lag.iter().enumerate() {
            let m = n + k;
            out[(m, n)] = laguerre_entry(mant, scale, half * (lf[n] - lf[m]) + kk * ln_abs - half * x, kk * arg_lower);
        }
    }
    out
}

#[inline]
fn laguerre_entry<T: Real>(mant: T, scale: T, ln_pref: T, phase: T) -> Cx<T> {
    if mant == T::zero() {
        return re(T::zero());
    }
    let mag = (mant.abs().ln() + scale + ln_pref).exp();
    let sign = if mant < T::zero() { -T::one() } else { T::one() };
    cis(phase) * (mag * sign)
}

/// Rows needed so that every column `D(α)|n⟩`, `n < dim`, of the
/// rectangular closed-form block keeps all but `1e-16` of its norm.
///
/// The tail is measured directly on rows `k..2k`; the weight beyond `2k`
/// is negligible next to it.
pub fn displacement_padding<T: Real>(alpha: Cx<T>, dim: usize) -> usize {
    let mut k = dim + 8;
    loop {
        let block = displacement_block(alpha, 2 * k, dim);
        let tail = (0..dim)
            .map(|c| block.view((k, c), (k, 1)).norm_squared().as_f64())
            .fold(0.0, f64::max);
        if tail <= 1e-16 || k >= 2048 {
            if tail > 1e-16 {
                log::warn!("displacement padding capped at {k} rows (tail {tail:.2e})");
            }
            return k;
        }
        k += k / 2;
    }
}

/// Closed-form `D(α)` compressed onto `dim` levels.
pub fn displacement_closed_form<T: Real>(alpha: Cx<T>, dim: usize) -> FockOperator<T> {
    FockOperator {
        m: displacement_block(alpha, dim, dim),
    }
}

/// `exp(α a† − α* a)` of the truncated generator.
pub fn displacement_expm<T: Real>(alpha: Cx<T>, dim: usize) -> FockOperator<T> {
    let a = annihilation::<T>(dim);
    let g = a.m.adjoint() * alpha - &a.m * alpha.conj();
    FockOperator { m: g.exp() }
}

/// Displacement operator `D(α)`.
///
/// Returns the matrix exponential of the truncated generator, which is
/// unitary to machine precision, after checking it against the Laguerre
/// closed form on the central block. The two agree to `1e-9` only when `dim`
/// is large enough for `|α|`.
pub fn displacement<T: Real>(alpha: Cx<T>, dim: usize) -> Result<FockOperator<T>> {
    check_dim(dim, 2)?;
    if !(alpha.re.is_finite() && alpha.im.is_finite()) {
        return Err(OvmError::Parameter("non-finite displacement".into()));
    }
    let closed = displacement_closed_form(alpha, dim);
    let expm = displacement_expm(alpha, dim);
    let dev = closed.max_abs_diff_block(&expm, central_block(dim));
    let tol = T::tolerance(1e-9);
    if !(dev <= tol) {
        return Err(OvmError::truncation("displacement", dev.as_f64(), tol.as_f64()));
    }
    Ok(expm)
}

/// Wigner point operator `D(α) Π D(α)† = D(2α) Π`, exact on the block.
pub fn displaced_parity<T: Real>(alpha: Cx<T>, dim: usize) -> FockOperator<T> {
    let mut m = displacement_block(alpha * T::lit(2.0), dim, dim);
    for n in (1..dim).step_by(2) {
        m.column_mut(n).neg_mut();
    }
    FockOperator { m }
}

/// `S(ζ) = exp(ζ a†² − ζ* a²)` of the truncated generator.
pub fn squeeze<T: Real>(zeta: Cx<T>, dim: usize) -> FockOperator<T> {
    let a = annihilation::<T>(dim);
    let a2 = &a.m * &a.m;
    let g = a2.adjoint() * zeta - a2 * zeta.conj();
    FockOperator { m: g.exp() }
}

/// `e^{iθN}`, exactly diagonal.
pub fn rotation<T: Real>(theta: T, dim: usize) -> FockOperator<T> {
    FockOperator::from_diagonal((0..dim).map(|n| cis(theta * T::of(n))))
}

/// Largest momentum for which truncated momentum kets are trustworthy.
pub fn momentum_band(dim: usize) -> f64 {
    let c = std::f64::consts::SQRT_2 * QUADRATURE_SCALE;
    c * (2.0 * dim as f64).sqrt()
}

/// Truncated momentum eigenket: `v[n] = ⟨n|p⟩` with `⟨p|p'⟩ = δ(p − p')`.
///
/// Components are Hermite functions evaluated by recurrence; `Π v_p = v_{−p}`
/// holds exactly and `(P − p) v_p` vanishes except in the last row.
pub fn momentum_ket<T: Real>(p: T, dim: usize) -> CVector<T> {
    if p.abs().as_f64() > momentum_band(dim) {
        log::warn!("momentum {} outside reliable band of dim {}", p.as_f64(), dim);
    }
    let c = T::lit(std::f64::consts::SQRT_2 * QUADRATURE_SCALE);
    let norm = T::one() / c.sqrt();
    let phi = hermite_functions(dim, p / c);
    let phases = [
        cx(T::one(), T::zero()),
        cx(T::zero(), T::one()),
        cx(-T::one(), T::zero()),
        cx(T::zero(), -T::one()),
    ];
    CVector::from_iterator(dim, phi.into_iter().enumerate().map(|(n, f)| phases[n % 4] * (f * norm)))
}

/// [`momentum_ket`] that refuses momenta outside the reliable band.
pub fn momentum_ket_checked<T: Real>(p: T, dim: usize) -> Result<CVector<T>> {
    let band = momentum_band(dim);
    if p.abs().as_f64() > band {
        return Err(OvmError::OutsideReliableBand { p: p.as_f64(), band, dim });
    }
    Ok(momentum_ket(p, dim))
}

/// `‖(P − p) v‖ / ‖v‖` with both norms taken over the first `k` rows.
pub fn momentum_residual<T: Real>(p: T, v: &CVector<T>, k: usize) -> T {
    let dim = v.len();
    let pv = momentum::<T>(dim).apply(v) - v * re(p);
    let k = k.min(dim);
    pv.rows(0, k).norm() / v.rows(0, k).norm()
}

/// Convention summary carried by serialized outputs.
#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct ConventionTag {
    pub quadrature_scale: f64,
    pub qp_commutator: f64,
    pub alpha_mapping: &'static str,
    pub fourier_kernel: &'static str,
}

pub const CONVENTIONS: ConventionTag = ConventionTag {
    quadrature_scale: QUADRATURE_SCALE,
    qp_commutator: QP_COMMUTATOR,
    alpha_mapping: "alpha = q + i p, d2alpha = dq dp",
    fourier_kernel: "f~(p) = int f(q) exp(+i q p) dq",
};
