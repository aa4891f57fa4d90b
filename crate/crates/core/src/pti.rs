//! Kraus maps, their duals, and the two-mode parity-sum construction with
//! its dilation.
//!
//! Two-mode operators act on `|n₁⟩ ⊗ |n₂⟩` with index `n₁·dim + n₂`; the
//! dilation's auxiliary qubit is the leftmost factor, index `a·dim² + i`.

use std::f64::consts::PI;

use nalgebra::{ComplexField, DMatrix};
use serde::Serialize;

use crate::error::{OvmError, Result};
use crate::fock::{
    annihilation, displaced_parity, displacement_block, displacement_padding, parity, FockOperator, HermitianSpectrum,
};
use crate::scalar::{cis, cx, re, CMatrix, Cx, Real};
use crate::state::QuantumState;

/// A positive trace-increasing map `X ↦ Σ A X A†`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausMap<T: Real> {
    generators: Vec<FockOperator<T>>,
    label: String,
}

impl<T: Real> KrausMap<T> {
    pub fn new(generators: Vec<FockOperator<T>>, label: impl Into<String>) -> Result<Self> {
        let first = generators
            .first()
            .ok_or_else(|| OvmError::Parameter("a Kraus map needs at least one generator".into()))?;
        let dim = first.dim();
        if let Some(bad) = generators.iter().find(|g| g.dim() != dim) {
            return Err(OvmError::DimensionMismatch {
                expected: dim,
                got: bad.dim(),
            });
        }
        Ok(Self {
            generators,
            label: label.into(),
        })
    }

    /// `{√(2π/K) e^{−iφ_k N}}`, `φ_k = 2πk/K`: the trapezoid discretization
    /// of the phase average.
    pub fn phase_averaging(dim: usize, nodes: usize) -> Result<Self> {
        if nodes == 0 {
            return Err(OvmError::InvalidQuadrature("phase averaging needs nodes".into()));
        }
        let w = T::lit((2.0 * PI / nodes as f64).sqrt());
        let gens = (0..nodes)
            .map(|k| {
                let phi = T::lit(2.0 * PI * k as f64 / nodes as f64);
                FockOperator::from_diagonal((0..dim).map(|n| cis(-phi * T::of(n)) * w))
            })
            .collect();
        Self::new(gens, format!("phase average, {nodes} nodes"))
    }

    pub fn generators(&self) -> &[FockOperator<T>] {
        &self.generators
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.generators[0].dim()
    }

    /// `Σ A X A†`.
    pub fn apply(&self, x: &FockOperator<T>) -> Result<FockOperator<T>> {
        if x.dim() != self.dim() {
            return Err(OvmError::DimensionMismatch {
                expected: self.dim(),
                got: x.dim(),
            });
        }
        let mut acc = CMatrix::<T>::zeros(self.dim(), self.dim());
        for g in &self.generators {
            acc += g.matrix() * x.matrix() * g.matrix().adjoint();
        }
        FockOperator::new(acc)
    }

    /// The dual map `ρ ↦ Σ A† ρ A`.
    pub fn dual(&self) -> Self {
        Self {
            generators: self.generators.iter().map(FockOperator::adjoint).collect(),
            label: format!("dual of {}", self.label),
        }
    }

    /// `Σ A†A`.
    pub fn gram(&self) -> FockOperator<T> {
        let mut acc = CMatrix::<T>::zeros(self.dim(), self.dim());
        for g in &self.generators {
            acc += g.matrix().adjoint() * g.matrix();
        }
        FockOperator::new(acc).expect("square")
    }

    /// Whether `Σ A†A ≥ 1` up to `tol`, i.e. the map never decreases trace.
    pub fn is_trace_increasing(&self, tol: f64) -> bool {
        let g = &self.gram() - &FockOperator::identity(self.dim());
        g.hermitian_eigenvalues()
            .first()
            .map(|v| v.as_f64() >= -tol)
            .unwrap_or(false)
    }
}

/// Two copies of the truncated Fock space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TwoModeSystem {
    pub dim: usize,
}

impl TwoModeSystem {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(OvmError::InvalidDimension {
                dim,
                reason: "two-mode system needs at least two levels per mode",
            });
        }
        Ok(Self { dim })
    }

    pub fn composite_dim(&self) -> usize {
        self.dim * self.dim
    }

    pub fn index(&self, n1: usize, n2: usize) -> usize {
        n1 * self.dim + n2
    }

    /// `A ⊗ B`.
    pub fn kron<T: Real>(a: &FockOperator<T>, b: &FockOperator<T>) -> FockOperator<T> {
        FockOperator::new(a.matrix().kronecker(b.matrix())).expect("square")
    }

    pub fn mode1<T: Real>(&self, x: &FockOperator<T>) -> FockOperator<T> {
        Self::kron(x, &FockOperator::identity(self.dim))
    }

    pub fn mode2<T: Real>(&self, x: &FockOperator<T>) -> FockOperator<T> {
        Self::kron(&FockOperator::identity(self.dim), x)
    }

    /// `Π¹ = Π ⊗ 1`.
    pub fn parity1<T: Real>(&self) -> FockOperator<T> {
        self.mode1(&parity(self.dim))
    }

    /// `Π² = 1 ⊗ Π`.
    pub fn parity2<T: Real>(&self) -> FockOperator<T> {
        self.mode2(&parity(self.dim))
    }

    /// `J = (a₁†a₂ − a₂†a₁)/(2i)` from Kronecker products of ladders.
    pub fn j<T: Real>(&self) -> FockOperator<T> {
        let a = annihilation::<T>(self.dim);
        let a1 = self.mode1(&a);
        let a2 = self.mode2(&a);
        let x = &a1.adjoint() * &a2;
        let d = &x - &x.adjoint();
        d.scale(cx(T::zero(), -T::lit(0.5)))
    }

    /// Levels `(n₁, N − n₁)` of the sector with `N` total excitations.
    pub fn sector(&self, total: usize) -> Vec<(usize, usize)> {
        let lo = total.saturating_sub(self.dim - 1);
        let hi = total.min(self.dim - 1);
        (lo..=hi).map(|n1| (n1, total - n1)).collect()
    }

    /// Block of `exp(−iθJ)` on one sector, in the order of [`Self::sector`].
    pub fn sector_rotation<T: Real>(&self, total: usize, theta: f64) -> CMatrix<T> {
        let states = self.sector(total);
        let n = states.len();
        let mut jb = CMatrix::<T>::zeros(n, n);
        let half = T::lit(0.5);
        for (c, &(n1, n2)) in states.iter().enumerate() {
            // a₁†a₂ moves (n1, n2) to (n1 + 1, n2 − 1), the next state.
            if n2 > 0 && c + 1 < n {
                let amp = (T::of(n1 + 1) * T::of(n2)).sqrt() * half;
                jb[(c + 1, c)] = cx(T::zero(), -amp);
                jb[(c, c + 1)] = cx(T::zero(), amp);
            }
        }
        let th = T::lit(theta);
        HermitianSpectrum::new(&FockOperator::new(jb).expect("square"))
            .apply(|l| cis(-th * l))
            .into_matrix()
    }

    fn assemble_sectors<T: Real>(&self, theta: f64) -> FockOperator<T> {
        let n = self.composite_dim();
        let mut m = CMatrix::<T>::zeros(n, n);
        for total in 0..=2 * (self.dim - 1) {
            let states = self.sector(total);
            let block = self.sector_rotation::<T>(total, theta);
            for (r, &(r1, r2)) in states.iter().enumerate() {
                for (c, &(c1, c2)) in states.iter().enumerate() {
                    m[(self.index(r1, r2), self.index(c1, c2))] = block[(r, c)];
                }
            }
        }
        FockOperator::new(m).expect("square")
    }

    /// `V = exp(−iπJ/2)`, exponentiated sector by sector; `J` conserves the
    /// total excitation even after truncation, so `V` is exactly unitary.
    pub fn permutation_v<T: Real>(&self) -> Result<FockOperator<T>> {
        if self.dim < 4 {
            return Err(OvmError::InvalidDimension {
                dim: self.dim,
                reason: "permutation V needs at least four levels per mode",
            });
        }
        Ok(self.assemble_sectors(PI / 2.0))
    }

    /// `max |Π² − V²Π¹V†²|` over levels with `n₁ + n₂ ≤ max_total`.
    pub fn swap_deviation<T: Real>(&self, max_total: usize) -> Result<f64> {
        let v = self.permutation_v::<T>()?;
        let v2 = &v * &v;
        let moved = self.parity1::<T>().conjugate_by(&v2);
        let diff = &self.parity2::<T>() - &moved;
        let mut worst = 0.0f64;
        for r1 in 0..self.dim {
            for r2 in 0..self.dim {
                for c1 in 0..self.dim {
                    for c2 in 0..self.dim {
                        if r1 + r2 <= max_total && c1 + c2 <= max_total {
                            let z = diff.get(self.index(r1, r2), self.index(c1, c2));
                            worst = worst.max(z.modulus().as_f64());
                        }
                    }
                }
            }
        }
        Ok(worst)
    }

    /// The map `ε = {1, V²}` with `ε(Π¹) = Π¹ + Π²` on complete sectors.
    pub fn parity_sum_map<T: Real>(&self) -> Result<KrausMap<T>> {
        let v = self.permutation_v::<T>()?;
        KrausMap::new(vec![FockOperator::identity(self.composite_dim()), &v * &v], "{1, V^2}")
    }

    /// `W = [[1, −V²], [V†², 1]]` on auxiliary ⊗ mode 1 ⊗ mode 2.
    pub fn dilation_w<T: Real>(&self) -> Result<FockOperator<T>> {
        let v = self.permutation_v::<T>()?;
        let v2 = (&v * &v).into_matrix();
        let n = self.composite_dim();
        let mut w = CMatrix::<T>::zeros(2 * n, 2 * n);
        w.view_mut((0, 0), (n, n)).fill_with_identity();
        w.view_mut((n, n), (n, n)).fill_with_identity();
        w.view_mut((0, n), (n, n)).copy_from(&(-&v2));
        w.view_mut((n, 0), (n, n)).copy_from(&v2.adjoint());
        FockOperator::new(w)
    }

    /// `Tr_A M` for an operator on auxiliary ⊗ two modes.
    pub fn partial_trace_aux<T: Real>(&self, m: &FockOperator<T>) -> Result<FockOperator<T>> {
        let n = self.composite_dim();
        if m.dim() != 2 * n {
            return Err(OvmError::DimensionMismatch {
                expected: 2 * n,
                got: m.dim(),
            });
        }
        let mm = m.matrix();
        FockOperator::new(mm.view((0, 0), (n, n)) + mm.view((n, n), (n, n)))
    }

    /// `|a⟩⟨a| ⊗ ρ`.
    pub fn with_aux<T: Real>(&self, a: usize, rho: &FockOperator<T>) -> Result<FockOperator<T>> {
        let n = self.composite_dim();
        if rho.dim() != n || a > 1 {
            return Err(OvmError::DimensionMismatch {
                expected: n,
                got: rho.dim(),
            });
        }
        let mut m = CMatrix::<T>::zeros(2 * n, 2 * n);
        m.view_mut((a * n, a * n), (n, n)).copy_from(rho.matrix());
        FockOperator::new(m)
    }

    /// `Tr_A W†(|0⟩⟨0| ⊗ ρ)W` for a given dilation operator.
    pub fn dilate_with<T: Real>(&self, w: &FockOperator<T>, rho: &FockOperator<T>) -> Result<FockOperator<T>> {
        let x = self.with_aux(0, rho)?;
        self.partial_trace_aux(&(&(&w.adjoint() * &x) * w))
    }

    /// `Tr_A W†(|0⟩⟨0| ⊗ ρ)W` with the literal `W`.
    pub fn dilate<T: Real>(&self, rho: &FockOperator<T>) -> Result<FockOperator<T>> {
        self.dilate_with(&self.dilation_w()?, rho)
    }

    /// Random two-mode density matrix.
    pub fn random_density<T: Real, R: rand::Rng + ?Sized>(&self, rank: usize, rng: &mut R) -> Result<FockOperator<T>> {
        let n = self.composite_dim();
        Ok(QuantumState::<T>::random_mixed(n, n, rank, rng)?.density())
    }
}

/// The three evaluations of `⟨Π¹_α + Π²_β⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParitySumReport {
    /// `Tr(ρ (D_αΠD_α† ⊗ 1 + 1 ⊗ D_βΠD_β†))` with exact point operators.
    pub point_operators: f64,
    /// `Tr(σ ε(Π¹))` with `σ = (D_α ⊗ D_β)† ρ (D_α ⊗ D_β)`.
    pub map_on_observable: f64,
    /// `Tr(ε*(σ) Π¹)`.
    pub dual_on_state: f64,
    pub max_route_deviation: f64,
    /// Trace of `ρ` not captured by the padded displaced state.
    pub leakage: f64,
    pub padded_dim: usize,
}

impl ParitySumReport {
    pub fn value(&self) -> f64 {
        self.point_operators
    }
}

/// `⟨Π¹_α + Π²_β⟩` by three independent routes that must agree to `1e-10`.
pub fn parity_sum_expectation<T: Real>(
    sys: &TwoModeSystem,
    rho: &FockOperator<T>,
    alpha: Cx<T>,
    beta: Cx<T>,
) -> Result<ParitySumReport> {
    let dim = sys.dim;
    let n = sys.composite_dim();
    if rho.dim() != n {
        return Err(OvmError::DimensionMismatch {
            expected: n,
            got: rho.dim(),
        });
    }

    let point = &sys.mode1(&displaced_parity(alpha, dim)) + &sys.mode2(&displaced_parity(beta, dim));
    let route1 = (rho.matrix() * point.matrix()).trace();

    // σ on the box k₁ < K₁, k₂ < K₂ of the displaced frame.
    let k1 = displacement_padding(alpha, dim);
    let k2 = displacement_padding(beta, dim);
    let a = displacement_block(alpha, dim, k1);
    let b = displacement_block(beta, dim, k2);
    let ab = a.kronecker(&b);
    let sigma = ab.adjoint() * rho.matrix() * &ab;
    let tr_rho = rho.trace().re;
    let leakage = (tr_rho - sigma.trace().re).abs().as_f64();
    let tol = T::tolerance(1e-11).as_f64();
    if !(leakage <= tol) {
        return Err(OvmError::truncation("displaced two-mode state", leakage, tol));
    }

    // Every box state lies in a complete sector of the K₁ + K₂ truncation,
    // where V² swaps the parities exactly.
    let big = TwoModeSystem::new(k1 + k2)?;
    let mut route2 = re(T::zero());
    let mut route3 = re(T::zero());
    for total in 0..(k1 + k2 - 1) {
        let states: Vec<(usize, usize)> = big.sector(total);
        let len = states.len();
        let mut s = CMatrix::<T>::zeros(len, len);
        let mut any = false;
        for (r, &(r1, r2)) in states.iter().enumerate() {
            if r1 >= k1 || r2 >= k2 {
                continue;
            }
            for (c, &(c1, c2)) in states.iter().enumerate() {
                if c1 >= k1 || c2 >= k2 {
                    continue;
                }
                s[(r, c)] = sigma[(r1 * k2 + r2, c1 * k2 + c2)];
                any = true;
            }
        }
        if !any {
            continue;
        }
        let v = big.sector_rotation::<T>(total, PI / 2.0);
        let v2 = &v * &v;
        let p1 = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            len,
            states.iter().map(|&(n1, _)| re(if n1 % 2 == 0 { T::one() } else { -T::one() })),
        ));
        let eps_p1 = &p1 + &v2 * &p1 * v2.adjoint();
        route2 += (&s * eps_p1).trace();
        let eps_star = &s + v2.adjoint() * &s * &v2;
        route3 += (eps_star * &p1).trace();
    }

    let vals = [route1, route2, route3];
    let imag = vals.iter().map(|z| z.im.abs().as_f64()).fold(0.0, f64::max);
    if imag > 1e-10 {
        return Err(OvmError::NonReal {
            what: "parity-sum expectation".into(),
            residue: imag,
        });
    }
    let r: Vec<f64> = vals.iter().map(|z| z.re.as_f64()).collect();
    let dev = (r[0] - r[1]).abs().max((r[0] - r[2]).abs()).max((r[1] - r[2]).abs());
    let tol = T::tolerance(1e-10).as_f64();
    if !(dev <= tol) {
        return Err(OvmError::truncation("parity-sum routes", dev, tol));
    }
    Ok(ParitySumReport {
        point_operators: r[0],
        map_on_observable: r[1],
        dual_on_state: r[2],
        max_route_deviation: dev,
        leakage,
        padded_dim: k1.max(k2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn identity_map_is_identity() {
        let x = crate::fock::position::<f64>(5);
        let m = KrausMap::new(vec![FockOperator::identity(5)], "id").unwrap();
        assert_eq!(m.apply(&x).unwrap(), x);
        assert!(m.is_trace_increasing(1e-12));
        assert!(KrausMap::<f64>::new(vec![], "none").is_err());
        assert!(KrausMap::new(vec![FockOperator::<f64>::identity(3), FockOperator::identity(4)], "mixed").is_err());
    }

    #[test]
    fn phase_average_kills_coherences() {
        let m = KrausMap::<f64>::phase_averaging(6, 256).unwrap();
        let mut x = FockOperator::<f64>::zeros(6);
        let mut xm = x.clone().into_matrix();
        xm[(0, 1)] = re(1.0);
        x = FockOperator::new(xm).unwrap();
        assert!(m.apply(&x).unwrap().max_abs() < 1e-10);
    }

    #[test]
    fn j_is_hermitian_and_block_diagonal() {
        let sys = TwoModeSystem::new(5).unwrap();
        let j = sys.j::<f64>();
        assert!(j.hermiticity_defect() < 1e-12);
        for r in 0..25 {
            for c in 0..25 {
                if j.get(r, c).norm() > 0.0 {
                    assert_eq!(r / 5 + r % 5, c / 5 + c % 5);
                }
            }
        }
        // Sector assembly reproduces the Kronecker-built J.
        let from_sectors: FockOperator<f64> = {
            let n = sys.composite_dim();
            let mut m = CMatrix::<f64>::zeros(n, n);
            let rot = |t| sys.sector_rotation::<f64>(t, 1e-6);
            for total in 0..=8 {
                let st = sys.sector(total);
                let b = rot(total);
                for (r, &(r1, r2)) in st.iter().enumerate() {
                    for (c, &(c1, c2)) in st.iter().enumerate() {
                        // exp(−iεJ) ≈ 1 − iεJ
                        let v = (b[(r, c)] - if r == c { re(1.0) } else { re(0.0) }) / cx(0.0, -1e-6);
                        m[(sys.index(r1, r2), sys.index(c1, c2))] = v;
                    }
                }
            }
            FockOperator::new(m).unwrap()
        };
        assert!(from_sectors.max_abs_diff_block(&j, 25) < 1e-5);
    }

    #[test]
    fn vacuum_parity_examples() {
        let sys = TwoModeSystem::new(6).unwrap();
        let mut rho = CMatrix::<f64>::zeros(36, 36);
        rho[(0, 0)] = re(1.0);
        let rho = FockOperator::new(rho).unwrap();
        let z = Complex64::new(0.0, 0.0);
        let r = parity_sum_expectation(&sys, &rho, z, z).unwrap();
        assert!((r.value() - 2.0).abs() < 1e-12);
        let r = parity_sum_expectation(&sys, &rho, Complex64::new(1.0, 0.0), z).unwrap();
        assert!((r.value() - (1.0 + (-2.0f64).exp())).abs() < 1e-8);
    }

    #[test]
    fn v_needs_four_levels() {
        assert!(TwoModeSystem::new(3).unwrap().permutation_v::<f64>().is_err());
    }
}
