//! Pure and mixed states on the truncated Fock space.

use nalgebra::{ComplexField, DMatrix};
use rand::Rng;

use crate::error::{OvmError, Result};
use crate::fock::FockOperator;
use crate::scalar::{cis, cx, re, CVector, Cx, Real};
use crate::special::ln_factorials;

/// Weight a generated state may lose to the truncation before it is refused.
const TRUNCATION_LOSS: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum QuantumState<T: Real> {
    Pure(CVector<T>),
    Mixed(FockOperator<T>),
}

impl<T: Real> QuantumState<T> {
    /// Pure state; the vector must already have unit norm.
    pub fn pure(v: CVector<T>) -> Result<Self> {
        if v.len() < 2 {
            return Err(OvmError::InvalidDimension {
                dim: v.len(),
                reason: "state needs at least two levels",
            });
        }
        let dev = (v.norm() - T::one()).abs();
        if !(dev <= T::tolerance(1e-12)) {
            return Err(OvmError::InvalidState(format!(
                "pure state norm deviates from 1 by {:.3e}",
                dev.as_f64()
            )));
        }
        Ok(Self::Pure(v))
    }

    /// Pure state from unnormalized amplitudes.
    pub fn pure_normalized(v: CVector<T>) -> Result<Self> {
        let n = v.norm();
        if !(n > T::zero()) || !n.is_finite() {
            return Err(OvmError::InvalidState("zero or non-finite amplitude vector".into()));
        }
        Self::pure(v / re(n))
    }

    /// Density matrix: Hermitian, unit trace, eigenvalues ≥ −1e−10.
    pub fn mixed(rho: FockOperator<T>) -> Result<Self> {
        let tol = T::tolerance(1e-10);
        let herm = rho.hermiticity_defect();
        if !(herm <= tol) {
            return Err(OvmError::InvalidState(format!(
                "density matrix not Hermitian (defect {:.3e})",
                herm.as_f64()
            )));
        }
        let tr = rho.trace();
        if !((tr - re(T::one())).modulus() <= tol) {
            return Err(OvmError::InvalidState(format!(
                "density matrix trace {} != 1",
                tr.re.as_f64()
            )));
        }
        let min = rho.hermitian_eigenvalues().first().copied().unwrap_or_else(T::zero);
        if min < -tol {
            return Err(OvmError::InvalidState(format!(
                "density matrix has negative eigenvalue {:.3e}",
                min.as_f64()
            )));
        }
        Ok(Self::Mixed(rho))
    }

    /// Fock state `|n⟩`.
    pub fn fock(n: usize, dim: usize) -> Result<Self> {
        if n >= dim {
            return Err(OvmError::InvalidState(format!("|{n}> does not fit in dimension {dim}")));
        }
        let mut v = CVector::zeros(dim);
        v[n] = re(T::one());
        Self::pure(v)
    }

    pub fn vacuum(dim: usize) -> Result<Self> {
        Self::fock(0, dim)
    }

    /// Superposition `Σ c_n |n⟩`, normalized.
    pub fn from_coefficients(coeffs: &[Cx<T>], dim: usize) -> Result<Self> {
        if coeffs.len() > dim {
            return Err(OvmError::DimensionMismatch {
                expected: dim,
                got: coeffs.len(),
            });
        }
        let mut v = CVector::zeros(dim);
        for (i, &c) in coeffs.iter().enumerate() {
            v[i] = c;
        }
        Self::pure_normalized(v)
    }

    /// Coherent state `D(α)|0⟩`, renormalized after checking that the
    /// truncation drops less than `1e-10` of its weight.
    pub fn coherent(alpha: Cx<T>, dim: usize) -> Result<Self> {
        let x = alpha.norm_sqr();
        let lf: Vec<T> = ln_factorials(dim);
        let ln_abs = alpha.modulus().ln();
        let half = T::lit(0.5);
        let v = CVector::from_iterator(
            dim,
            (0..dim).map(|n| {
                if n == 0 {
                    return re((-half * x).exp());
                }
                if x == T::zero() {
                    return re(T::zero());
                }
                let nn = T::of(n);
                let mag = (nn * ln_abs - half * lf[n] - half * x).exp();
                cis(nn * alpha.argument()) * mag
            }),
        );
        Self::check_generated("coherent state", v)
    }

    /// Squeezed vacuum `S(r/2)|0⟩` with `S(ζ) = exp(ζa†² − ζ*a²)`, from the
    /// closed-form even-Fock expansion.
    pub fn squeezed_vacuum(r: T, dim: usize) -> Result<Self> {
        let t = r.tanh();
        let pref = T::one() / r.cosh().sqrt();
        let lf: Vec<T> = ln_factorials(dim);
        let ln2 = T::lit(2.0).ln();
        let half = T::lit(0.5);
        let mut v = CVector::zeros(dim);
        for k in 0..dim.div_ceil(2) {
            let n = 2 * k;
            if n >= dim {
                break;
            }
            // √((2k)!) / (2^k k!) · tanh^k r
            let kk = T::of(k);
            let ln_c = half * lf[n] - kk * ln2 - lf[k];
            let val = if k == 0 {
                pref
            } else if t == T::zero() {
                T::zero()
            } else {
                let sign = if t < T::zero() && k % 2 == 1 { -T::one() } else { T::one() };
                sign * pref * (ln_c + kk * t.abs().ln()).exp()
            };
            v[n] = re(val);
        }
        Self::check_generated("squeezed vacuum", v)
    }

    fn check_generated(what: &str, v: CVector<T>) -> Result<Self> {
        let norm = v.norm();
        let loss = (T::one() - norm * norm).abs();
        let tol = T::tolerance(TRUNCATION_LOSS);
        if !(loss <= tol) {
            return Err(OvmError::truncation(what, loss.as_f64(), tol.as_f64()));
        }
        Self::pure(v / re(norm))
    }

    /// Random pure state with uniform real and imaginary amplitudes in
    /// `[−1, 1)` on the first `support` levels.
    pub fn random_pure<R: Rng + ?Sized>(dim: usize, support: usize, rng: &mut R) -> Result<Self> {
        let support = support.clamp(1, dim);
        let mut v = CVector::zeros(dim);
        for i in 0..support {
            v[i] = cx(T::lit(rng.random_range(-1.0..1.0)), T::lit(rng.random_range(-1.0..1.0)));
        }
        Self::pure_normalized(v)
    }

    /// Random density matrix `G G† / Tr(G G†)` with `G` of the given rank,
    /// supported on the first `support` levels.
    pub fn random_mixed<R: Rng + ?Sized>(dim: usize, support: usize, rank: usize, rng: &mut R) -> Result<Self> {
        let support = support.clamp(1, dim);
        let rank = rank.max(1);
        let mut g = DMatrix::<Cx<T>>::zeros(dim, rank);
        for c in 0..rank {
            for r in 0..support {
                g[(r, c)] = cx(T::lit(rng.random_range(-1.0..1.0)), T::lit(rng.random_range(-1.0..1.0)));
            }
        }
        let mut rho = &g * g.adjoint();
        let tr = rho.trace();
        rho /= tr;
        // Symmetrize away round-off so the Hermiticity check is exact.
        let rho = (&rho + rho.adjoint()) * re(T::lit(0.5));
        Self::mixed(FockOperator::new(rho)?)
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Pure(v) => v.len(),
            Self::Mixed(r) => r.dim(),
        }
    }

    pub fn as_pure(&self) -> Option<&CVector<T>> {
        match self {
            Self::Pure(v) => Some(v),
            Self::Mixed(_) => None,
        }
    }

    /// `ρ` as an operator.
    pub fn density(&self) -> FockOperator<T> {
        match self {
            Self::Pure(v) => FockOperator::outer(v, v),
            Self::Mixed(r) => r.clone(),
        }
    }

    /// `Tr(ρ X)`.
    pub fn expectation(&self, x: &FockOperator<T>) -> Result<Cx<T>> {
        if x.dim() != self.dim() {
            return Err(OvmError::DimensionMismatch {
                expected: self.dim(),
                got: x.dim(),
            });
        }
        Ok(match self {
            Self::Pure(v) => v.dotc(&x.apply(v)),
            Self::Mixed(r) => (r.matrix() * x.matrix()).trace(),
        })
    }

    /// Population of the odd Fock levels plus, for mixed states, the
    /// magnitude of even/odd coherences.
    pub fn odd_parity_weight(&self) -> T {
        match self {
            Self::Pure(v) => v.iter().skip(1).step_by(2).fold(T::zero(), |a, z| a + z.norm_sqr()),
            Self::Mixed(r) => {
                let mut w = T::zero();
                for i in 0..r.dim() {
                    for j in 0..r.dim() {
                        if i % 2 == 1 || j % 2 == 1 {
                            w += r.get(i, j).modulus();
                        }
                    }
                }
                w
            }
        }
    }

    /// The same state zero-padded to a larger dimension.
    pub fn embed(&self, dim: usize) -> Result<Self> {
        if dim < self.dim() {
            return Err(OvmError::DimensionMismatch {
                expected: self.dim(),
                got: dim,
            });
        }
        Ok(match self {
            Self::Pure(v) => {
                let mut w = CVector::zeros(dim);
                w.rows_mut(0, v.len()).copy_from(v);
                Self::Pure(w)
            }
            Self::Mixed(r) => Self::Mixed(r.embed(dim)),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{displacement_closed_form, squeeze};
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pure_state_norm_is_enforced() {
        let v = CVector::<f64>::from_vec(vec![re(1.0), re(1.0)]);
        assert!(QuantumState::pure(v.clone()).is_err());
        assert!(QuantumState::pure_normalized(v).is_ok());
    }

    #[test]
    fn coherent_matches_displaced_vacuum() {
        let alpha = Complex64::new(0.7, -0.2);
        let s = QuantumState::coherent(alpha, 40).unwrap();
        let d = displacement_closed_form(alpha, 40);
        let col = d.matrix().column(0).into_owned();
        assert!((s.as_pure().unwrap() - col).norm() < 1e-12);
        assert!(QuantumState::<f64>::coherent(Complex64::new(4.0, 0.0), 8).is_err());
    }

    #[test]
    fn squeezed_vacuum_matches_squeeze_operator() {
        let s = QuantumState::squeezed_vacuum(0.3f64, 60).unwrap();
        let op = squeeze(Complex64::new(0.15, 0.0), 60);
        let col = op.matrix().column(0).into_owned();
        assert!((s.as_pure().unwrap() - col).rows(0, 30).norm() < 1e-10);
        assert_eq!(s.odd_parity_weight(), 0.0);
    }

    #[test]
    fn random_mixed_is_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let s = QuantumState::<f64>::random_mixed(6, 6, 3, &mut rng).unwrap();
        let rho = s.density();
        assert!((rho.trace().re - 1.0).abs() < 1e-12);
        assert!(rho.hermiticity_defect() == 0.0);
    }

    #[test]
    fn mixed_rejects_bad_trace() {
        let rho = FockOperator::<f64>::identity(3);
        assert!(matches!(QuantumState::mixed(rho), Err(OvmError::InvalidState(_))));
    }

    #[test]
    fn expectation_of_number() {
        let s = QuantumState::<f64>::fock(3, 8).unwrap();
        let n = crate::fock::number::<f64>(8);
        assert_eq!(s.expectation(&n).unwrap(), re(3.0));
    }
}
