//! s-ordered quasi-probability functions `F(α; s)` and their masses.
//!
//! `F(α; s) = c · Tr(ρ D(α)Π(s)D(α)†)` with `Π(s) = (1+s)^N/(1−s)^{N+1} Π`
//! and `c = 1` (bare) or `c = 2/π`. At `s = 0` this is the Wigner function,
//! at `s = −1` the Husimi function.

use std::f64::consts::PI;

use nalgebra::ComplexField;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{OvmError, Result};
use crate::fock::{displacement_block, displacement_expm, displacement_padding, FockOperator};
use crate::regions2d::{region_cells, PhaseGrid, Region2D};
use crate::scalar::{cx, re, CMatrix, CVector, Cx, Real};
use crate::state::QuantumState;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WignerConvention {
    /// `W(α) = Tr(ρ D(α)ΠD(α)†)`, vacuum peak 1.
    Bare,
    /// `(2/π)` times the bare value; integrates to 1.
    TwoOverPi,
}

impl WignerConvention {
    pub fn prefactor(self) -> f64 {
        match self {
            Self::Bare => 1.0,
            Self::TwoOverPi => 2.0 / PI,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Bare => "bare",
            Self::TwoOverPi => "two_over_pi",
        }
    }
}

impl std::str::FromStr for WignerConvention {
    type Err = OvmError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bare" => Ok(Self::Bare),
            "two_over_pi" | "2/pi" => Ok(Self::TwoOverPi),
            other => Err(OvmError::Parameter(format!("unknown convention '{other}'"))),
        }
    }
}

/// Name of the ordering: P, Wigner, Q or generic.
pub fn ordering_label(s: f64) -> &'static str {
    if s == 1.0 {
        "glauber_sudarshan_p"
    } else if s == 0.0 {
        "wigner"
    } else if s == -1.0 {
        "husimi_q"
    } else {
        "s_ordered"
    }
}

fn check_s(s: f64) -> Result<()> {
    if !s.is_finite() || s >= 1.0 - 1e-9 {
        return Err(OvmError::SingularParameter { s });
    }
    Ok(())
}

/// Diagonal of `Π(s)`: `(1+s)ⁿ/(1−s)^{n+1}·(−1)ⁿ`.
pub fn parity_s_weights(s: f64, count: usize) -> Result<Vec<f64>> {
    check_s(s)?;
    let ratio = -(1.0 + s) / (1.0 - s);
    let mut w = Vec::with_capacity(count);
    let mut e = 1.0 / (1.0 - s);
    for _ in 0..count {
        w.push(e);
        e *= ratio;
    }
    Ok(w)
}

/// The s-parametrized parity operator.
#[derive(Debug, Clone, PartialEq)]
pub struct SParity<T: Real> {
    pub s: f64,
    pub op: FockOperator<T>,
}

pub fn parity_s<T: Real>(s: f64, dim: usize) -> Result<SParity<T>> {
    if dim < 2 {
        return Err(OvmError::InvalidDimension {
            dim,
            reason: "s-parity needs at least two levels",
        });
    }
    let w = parity_s_weights(s, dim)?;
    Ok(SParity {
        s,
        op: FockOperator::from_diagonal(w.into_iter().map(|x| re(T::lit(x)))),
    })
}

/// `F(α; s)` by two routes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuasiValue {
    pub value: f64,
    /// `c · Tr(ρ D Π(s) D†)` from exact rectangular displacement blocks.
    pub kernel: f64,
    /// `c · Σ_{k<dim} w_k ⟨k|D†ρD|k⟩` with `D` from the matrix exponential.
    pub series: f64,
    pub deviation: f64,
    pub s: f64,
    pub convention: WignerConvention,
}

/// `F(α; s)` in the `2/π` convention.
pub fn quasiprob_value<T: Real>(state: &QuantumState<T>, alpha: Cx<T>, s: f64) -> Result<QuasiValue> {
    quasiprob_value_with(state, alpha, s, WignerConvention::TwoOverPi)
}

pub fn quasiprob_value_with<T: Real>(
    state: &QuantumState<T>,
    alpha: Cx<T>,
    s: f64,
    convention: WignerConvention,
) -> Result<QuasiValue> {
    let dim = state.dim();
    let reliable = (dim as f64).sqrt();
    if alpha.modulus().as_f64() > reliable {
        return Err(OvmError::OutsideReliableBand {
            p: alpha.modulus().as_f64(),
            band: reliable,
            dim,
        });
    }
    let k = displacement_padding(alpha, dim);
    let w = parity_s_weights(s, k)?;
    let rho = state.density();

    // Kernel: the dim × dim compression of D(α)Π(s)D(α)† is exact from the
    // rows n < dim of D(α) over k < K columns.
    let a = displacement_block(alpha, dim, k);
    let weighted = CMatrix::from_fn(dim, k, |r, c| a[(r, c)] * T::lit(w[c]));
    let kernel_op = &weighted * a.adjoint();
    let kernel = (rho.matrix() * kernel_op).trace();

    // Series on D†ρD with D the truncated exponential at 2K levels.
    let big = 2 * k;
    let d = displacement_expm(alpha, big);
    let rho_big = rho.embed(big);
    let sigma = d.adjoint().matrix() * rho_big.matrix() * d.matrix();
    let series = (0..dim).fold(re(T::zero()), |acc, n| acc + sigma[(n, n)] * T::lit(w[n]));

    let imag = kernel.im.abs().max(series.im.abs()).as_f64();
    if imag > T::tolerance(1e-10).as_f64() {
        return Err(OvmError::NonReal {
            what: "quasi-probability value".into(),
            residue: imag,
        });
    }
    let c = convention.prefactor();
    let kv = c * kernel.re.as_f64();
    let sv = c * series.re.as_f64();
    let deviation = (kv - sv).abs();
    let tol = T::tolerance(1e-8).as_f64();
    if !(deviation <= tol) {
        return Err(OvmError::truncation("quasi-probability kernel vs series", deviation, tol));
    }
    Ok(QuasiValue {
        value: kv,
        kernel: kv,
        series: sv,
        deviation,
        s,
        convention,
    })
}

/// A sampled quasi-probability field, row-major with `p` rows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuasiField {
    pub grid: PhaseGrid,
    pub values: Vec<f64>,
    pub s: f64,
    pub convention: WignerConvention,
    pub ordering: &'static str,
    pub state: String,
    pub dim: usize,
    /// Largest norm fraction of `D(α)†|ψ⟩` lost beyond the padded rows.
    pub max_leakage: f64,
}

impl QuasiField {
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Cell with the largest value.
    pub fn argmax(&self) -> (usize, usize) {
        let (idx, _) = self
            .values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best });
        (idx % self.grid.nq, idx / self.grid.nq)
    }

    /// `Σ F · dq dp` over the whole grid.
    pub fn total_mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_area()
    }
}

/// Weighted pure components of a state: `ρ = Σ λ_j |ψ_j⟩⟨ψ_j|`.
fn components<T: Real>(state: &QuantumState<T>) -> Vec<(T, CVector<T>)> {
    match state {
        QuantumState::Pure(v) => vec![(T::one(), v.clone())],
        QuantumState::Mixed(rho) => {
            let eig = rho.matrix().clone().symmetric_eigen();
            let floor = T::tolerance(1e-15);
            eig.eigenvalues
                .iter()
                .enumerate()
                .filter(|(_, l)| l.abs() > floor)
                .map(|(i, &l)| (l, eig.eigenvectors.column(i).into_owned()))
                .collect()
        }
    }
}

/// Padding needed for every `|α| ≤ r`, tabulated on a radial grid.
struct PaddingTable {
    step: f64,
    rows: Vec<usize>,
}

impl PaddingTable {
    fn new<T: Real>(r_max: f64, dim: usize) -> Self {
        let step = 0.25;
        let n = (r_max / step).ceil() as usize + 1;
        let rows = (0..=n)
            .map(|i| displacement_padding::<T>(cx(T::lit(i as f64 * step), T::zero()), dim))
            .collect();
        Self { step, rows }
    }

    fn rows_for(&self, r: f64) -> usize {
        let i = ((r / self.step).ceil() as usize).min(self.rows.len() - 1);
        self.rows[i]
    }
}

/// Columns of `Π(s)` that matter: once `|w_k|` drops below `1e-17 |w_0|`
/// the remaining terms are negligible for any normalized state.
fn effective_columns(w: &[f64]) -> usize {
    let floor = 1e-17 * w[0].abs();
    w.iter().position(|x| x.abs() < floor).unwrap_or(w.len()).max(1)
}

/// `Σ_j λ_j Σ_k w_k |⟨k|D(α)†|ψ_j⟩|²` at each point, with its leakage.
pub(crate) fn field_at_points<T: Real>(state: &QuantumState<T>, points: &[C64], s: f64) -> Result<(Vec<f64>, f64)> {
    let dim = state.dim();
    let comps = components(state);
    let r_max = points.iter().map(|a| a.norm()).fold(0.0, f64::max);
    let table = PaddingTable::new::<T>(r_max, dim);
    let w = parity_s_weights(s, *table.rows.iter().max().unwrap_or(&dim))?;
    let cut = effective_columns(&w);
    let out: Vec<(f64, f64)> = points
        .par_iter()
        .map(|a| {
            let alpha = cx(T::lit(a.re), T::lit(a.im));
            let padded = table.rows_for(a.norm());
            let k = padded.min(cut);
            // Rows n < dim of D(α) over columns k < K; D(α)†ψ = A†ψ.
            let block = displacement_block(alpha, dim, k);
            let mut value = T::zero();
            let mut leak = 0.0f64;
            for (lambda, psi) in &comps {
                let phi = block.ad_mul(psi);
                let mut acc = T::zero();
                let mut norm = T::zero();
                for (kk, z) in phi.iter().enumerate() {
                    let m = z.modulus_squared();
                    acc += m * T::lit(w[kk]);
                    norm += m;
                }
                value += *lambda * acc;
                if k == padded {
                    leak = leak.max((psi.norm_squared() - norm).abs().as_f64());
                }
            }
            (value.as_f64(), leak)
        })
        .collect();
    let leakage = out.iter().map(|x| x.1).fold(0.0, f64::max);
    Ok((out.into_iter().map(|x| x.0).collect(), leakage))
}

/// `F(α; s)` sampled at every cell midpoint of `grid`.
pub fn quasi_field<T: Real>(
    state: &QuantumState<T>,
    grid: &PhaseGrid,
    s: f64,
    convention: WignerConvention,
) -> Result<QuasiField> {
    grid.validate()?;
    check_s(s)?;
    if s > 0.0 {
        log::warn!("s = {s} > 0: the s-ordered series is not absolutely convergent");
    }
    let points: Vec<C64> = (0..grid.np)
        .flat_map(|j| (0..grid.nq).map(move |i| (i, j)))
        .map(|(i, j)| grid.alpha(i, j))
        .collect();
    let (raw, max_leakage) = field_at_points(state, &points, s)?;
    check_leakage(max_leakage)?;
    let c = convention.prefactor();
    let values: Vec<f64> = raw.into_iter().map(|v| v * c).collect();
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(OvmError::truncation("quasi-probability field", *bad, 0.0));
    }
    Ok(QuasiField {
        grid: *grid,
        values,
        s,
        convention,
        ordering: ordering_label(s),
        state: String::new(),
        dim: state.dim(),
        max_leakage,
    })
}

/// The Wigner function (`s = 0`) on `grid`.
pub fn wigner_field<T: Real>(state: &QuantumState<T>, grid: &PhaseGrid, convention: WignerConvention) -> Result<QuasiField> {
    quasi_field(state, grid, 0.0, convention)
}

fn check_leakage(leak: f64) -> Result<()> {
    if leak > 1e-10 {
        return Err(OvmError::truncation("displaced state padding", leak, 1e-10));
    }
    Ok(())
}

/// `Σ_{cells in X} F(α; s) dq dp`.
pub fn quasiprob_mass<T: Real>(
    state: &QuantumState<T>,
    region: &Region2D,
    grid: &PhaseGrid,
    s: f64,
    convention: WignerConvention,
) -> Result<f64> {
    check_s(s)?;
    let cells = region_cells(region, grid)?;
    if cells.is_empty() {
        return Ok(0.0);
    }
    let points: Vec<C64> = cells.iter().map(|&(i, j)| grid.alpha(i, j)).collect();
    let (raw, leak) = field_at_points(state, &points, s)?;
    check_leakage(leak)?;
    // Fixed-order sum so that masses of disjoint regions add exactly up to
    // round-off.
    Ok(raw.iter().sum::<f64>() * grid.cell_area() * convention.prefactor())
}
