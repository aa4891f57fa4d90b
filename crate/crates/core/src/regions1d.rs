//! Region operators `K_q = χ̃(P) Π` for regions on the position axis.
//!
//! The cfun `χ(q)` of a region is smeared against the point operator,
//! `K_q = ∫ χ(q) e^{iqP} dq Π`, and `e^{iqP} = D(−q/2)` moves the point
//! operator to `α = q/4`. Both construction paths live here: the analytic
//! one applies `χ̃` to the spectrum of the truncated `P`, the smeared one
//! integrates exact displacement matrix elements by Gauss–Legendre.

use std::f64::consts::PI;

use nalgebra::ComplexField;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{OvmError, Result};
use crate::fock::{
    central_block, displacement_block, function_of_momentum, momentum_band, momentum_ket, rotation, squeeze,
    FockOperator, HermitianSpectrum,
};
use crate::pti::KrausMap;
use crate::region::{ConstructionPath, RegionDescriptor, RegionOperator, ShiftMode, Transform};
use crate::scalar::{cis, cx, cx_lit, re, CMatrix, CVector, Cx, Real};
use crate::special::GaussLegendre;
use crate::state::QuantumState;
use crate::C64;

/// Characteristic function of a region on the position axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CharacteristicFunction1D {
    Interval {
        lo: f64,
        hi: f64,
    },
    Union {
        intervals: Vec<[f64; 2]>,
    },
    /// `χ(q) = a0/2 + Σ a_m cos(mπq/L) + b_m sin(mπq/L)`.
    FourierPeriodic {
        a0: f64,
        a: Vec<f64>,
        b: Vec<f64>,
        #[serde(rename = "L")]
        l: f64,
    },
    /// The integers `1..=n` on the axis of the `e^{2ixP}` kernel, so that
    /// `K = Σ_m e^{2imP} Π`.
    IntegerComb {
        n: usize,
    },
}

impl CharacteristicFunction1D {
    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        let r = Self::Interval { lo, hi };
        r.validate()?;
        Ok(r)
    }

    /// Union of intervals, sorted and with overlapping pieces merged.
    pub fn union(intervals: &[(f64, f64)]) -> Result<Self> {
        for &(lo, hi) in intervals {
            Self::interval(lo, hi)?;
        }
        let mut v: Vec<[f64; 2]> = intervals.iter().map(|&(lo, hi)| [lo, hi]).collect();
        v.sort_by(|x, y| x[0].total_cmp(&y[0]));
        let mut merged: Vec<[f64; 2]> = Vec::with_capacity(v.len());
        for iv in v {
            match merged.last_mut() {
                Some(last) if iv[0] <= last[1] => last[1] = last[1].max(iv[1]),
                _ => merged.push(iv),
            }
        }
        let r = Self::Union { intervals: merged };
        r.validate()?;
        Ok(r)
    }

    /// Fourier-series region; a shorter `b` is padded with zeros.
    pub fn fourier(a0: f64, a: Vec<f64>, mut b: Vec<f64>, l: f64) -> Result<Self> {
        if b.len() < a.len() {
            b.resize(a.len(), 0.0);
        }
        let r = Self::FourierPeriodic { a0, a, b, l };
        r.validate()?;
        Ok(r)
    }

    pub fn integer_comb(n: usize) -> Result<Self> {
        let r = Self::IntegerComb { n };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(OvmError::InvalidRegion(m));
        match self {
            Self::Interval { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
                    return bad(format!("interval needs finite lo < hi, got [{lo}, {hi}]"));
                }
            }
            Self::Union { intervals } => {
                if intervals.is_empty() {
                    return bad("empty union".into());
                }
                for w in intervals.windows(2) {
                    if w[1][0] <= w[0][1] {
                        return bad("union intervals overlap or are unsorted".into());
                    }
                }
                for iv in intervals {
                    if !(iv[0].is_finite() && iv[1].is_finite()) || iv[0] >= iv[1] {
                        return bad(format!("bad union member [{}, {}]", iv[0], iv[1]));
                    }
                }
            }
            Self::FourierPeriodic { a0, a, b, l } => {
                if !(l.is_finite() && *l > 0.0) {
                    return bad(format!("period parameter L must be positive, got {l}"));
                }
                if a.len() != b.len() {
                    return bad(format!("{} cosine but {} sine coefficients", a.len(), b.len()));
                }
                if !a0.is_finite() || a.iter().chain(b).any(|x| !x.is_finite()) {
                    return bad("non-finite Fourier coefficient".into());
                }
            }
            Self::IntegerComb { n } => {
                if *n == 0 {
                    return bad("integer comb needs n >= 1".into());
                }
            }
        }
        Ok(())
    }

    /// True when `χ(−q) = χ(q)`.
    pub fn is_symmetric(&self) -> bool {
        match self {
            Self::Interval { lo, hi } => (lo + hi).abs() <= 1e-14 * hi.abs().max(1.0),
            Self::Union { intervals } => {
                let n = intervals.len();
                (0..n).all(|i| {
                    let x = intervals[i];
                    let y = intervals[n - 1 - i];
                    (x[0] + y[1]).abs() <= 1e-14 && (x[1] + y[0]).abs() <= 1e-14
                })
            }
            Self::FourierPeriodic { b, .. } => b.iter().all(|&x| x == 0.0),
            Self::IntegerComb { .. } => false,
        }
    }

    /// `χ(q)`; the comb has no pointwise values.
    pub fn value(&self, q: f64) -> Option<f64> {
        match self {
            Self::Interval { lo, hi } => Some(if q >= *lo && q <= *hi { 1.0 } else { 0.0 }),
            Self::Union { intervals } => Some(if intervals.iter().any(|iv| q >= iv[0] && q <= iv[1]) {
                1.0
            } else {
                0.0
            }),
            Self::FourierPeriodic { a0, a, b, l } => Some(
                a0 / 2.0
                    + a.iter()
                        .zip(b)
                        .enumerate()
                        .map(|(i, (am, bm))| {
                            let k = (i + 1) as f64 * PI / l;
                            am * (k * q).cos() + bm * (k * q).sin()
                        })
                        .sum::<f64>(),
            ),
            Self::IntegerComb { .. } => None,
        }
    }

    /// The region translated by `c`, i.e. `χ(q − c)`.
    pub fn translated(&self, c: f64) -> Result<Self> {
        Ok(match self {
            Self::Interval { lo, hi } => Self::Interval { lo: lo + c, hi: hi + c },
            Self::Union { intervals } => Self::Union {
                intervals: intervals.iter().map(|iv| [iv[0] + c, iv[1] + c]).collect(),
            },
            Self::FourierPeriodic { a0, a, b, l } => {
                let (mut na, mut nb) = (Vec::with_capacity(a.len()), Vec::with_capacity(b.len()));
                for (i, (am, bm)) in a.iter().zip(b).enumerate() {
                    let kc = (i + 1) as f64 * PI / l * c;
                    na.push(am * kc.cos() - bm * kc.sin());
                    nb.push(am * kc.sin() + bm * kc.cos());
                }
                Self::FourierPeriodic { a0: *a0, a: na, b: nb, l: *l }
            }
            Self::IntegerComb { .. } => {
                return Err(OvmError::InvalidRegion("integer comb is not closed under translation".into()))
            }
        })
    }

    /// `χ̃(p) = ∫ χ(q) e^{iqp} dq` for the regions with a bounded transform.
    ///
    /// Fourier-series regions have a purely atomic transform and yield `None`.
    pub fn transform_at<T: Real>(&self, p: T) -> Option<Cx<T>> {
        match self {
            Self::Interval { lo, hi } => Some(interval_transform(T::lit(*lo), T::lit(*hi), p)),
            Self::Union { intervals } => Some(
                intervals
                    .iter()
                    .fold(re(T::zero()), |acc, iv| acc + interval_transform(T::lit(iv[0]), T::lit(iv[1]), p)),
            ),
            Self::IntegerComb { n } => {
                Some((1..=*n).fold(re(T::zero()), |acc, m| acc + cis(T::lit(2.0) * T::of(m) * p)))
            }
            Self::FourierPeriodic { .. } => None,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Interval { lo, hi } => format!("interval[{lo},{hi}]"),
            Self::Union { intervals } => format!("union of {} intervals", intervals.len()),
            Self::FourierPeriodic { a0, a, l, .. } => format!("fourier a0={a0} harmonics={} L={l}", a.len()),
            Self::IntegerComb { n } => format!("integers 1..={n}"),
        }
    }
}

/// `∫_lo^hi e^{iqp} dq = e^{ip(lo+hi)/2} (hi − lo) sinc(p(hi − lo)/2)`.
fn interval_transform<T: Real>(lo: T, hi: T, p: T) -> Cx<T> {
    let half = T::lit(0.5);
    let width = hi - lo;
    let mid = (hi + lo) * half;
    cis(p * mid) * (width * sinc(p * width * half))
}

pub(crate) fn sinc<T: Real>(x: T) -> T {
    if x.abs() < T::lit(1e-4) {
        let x2 = x * x;
        T::one() - x2 / T::lit(6.0) + x2 * x2 / T::lit(120.0)
    } else {
        x.sin() / x
    }
}

/// One delta of an atomic transform: `weight · δ(w − p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub p: f64,
    pub weight: C64,
    /// Harmonic index `m` (0 for the constant term).
    pub harmonic: usize,
    /// `r_m = |a_m + i b_m|`.
    pub r: f64,
    /// `φ_m = arg(a_m + i b_m)`.
    pub phi: f64,
}

/// Fourier transform of a cfun: atoms, a bounded density, or both absent
/// pieces as appropriate.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMeasure1D {
    /// Sorted by momentum.
    pub atoms: Vec<Atom>,
    continuous: Option<CharacteristicFunction1D>,
}

impl SpectralMeasure1D {
    pub fn is_continuous(&self) -> bool {
        self.continuous.is_some()
    }

    /// Bounded part `χ̃(p)`; zero for purely atomic measures.
    pub fn density(&self, p: f64) -> C64 {
        self.continuous
            .as_ref()
            .and_then(|c| c.transform_at(p))
            .unwrap_or(C64::new(0.0, 0.0))
    }
}

/// `χ̃` of a region. Fourier-series regions give the delta comb
/// `a0 π δ(w) + π Σ (a_m ± i b_m) δ(w ∓ mπ/L)`.
pub fn cfun_fourier_transform(region: &CharacteristicFunction1D) -> SpectralMeasure1D {
    match region {
        CharacteristicFunction1D::FourierPeriodic { a0, a, b, l } => {
            let mut atoms = Vec::with_capacity(2 * a.len() + 1);
            if *a0 != 0.0 {
                atoms.push(Atom {
                    p: 0.0,
                    weight: C64::new(PI * a0, 0.0),
                    harmonic: 0,
                    r: a0.abs(),
                    phi: if *a0 < 0.0 { PI } else { 0.0 },
                });
            }
            for (i, (&am, &bm)) in a.iter().zip(b).enumerate() {
                if am == 0.0 && bm == 0.0 {
                    continue;
                }
                let m = i + 1;
                let k = m as f64 * PI / l;
                let z = C64::new(am, bm);
                let (r, phi) = (z.norm(), z.arg());
                atoms.push(Atom { p: k, weight: z * PI, harmonic: m, r, phi });
                atoms.push(Atom { p: -k, weight: z.conj() * PI, harmonic: m, r, phi });
            }
            atoms.sort_by(|x, y| x.p.total_cmp(&y.p));
            SpectralMeasure1D { atoms, continuous: None }
        }
        other => SpectralMeasure1D {
            atoms: Vec::new(),
            continuous: Some(other.clone()),
        },
    }
}

fn check_region_dim(region: &CharacteristicFunction1D, dim: usize) -> Result<()> {
    region.validate()?;
    if dim < 8 {
        return Err(OvmError::InvalidDimension {
            dim,
            reason: "region operators need dim >= 8",
        });
    }
    Ok(())
}

/// `Σ w |v_p⟩⟨v_p| Π` over the atoms, with δ-normalized momentum kets.
fn atomic_operator<T: Real>(atoms: &[Atom], dim: usize) -> Result<FockOperator<T>> {
    let band = momentum_band(dim);
    let mut m = CMatrix::<T>::zeros(dim, dim);
    for atom in atoms {
        if atom.p.abs() > band {
            return Err(OvmError::truncation(
                format!("Fourier atom at p = {} (reliable band {band:.3})", atom.p),
                atom.p.abs(),
                band,
            ));
        }
        let v: CVector<T> = momentum_ket(T::lit(atom.p), dim);
        m += (&v * v.adjoint()) * cx_lit::<T>(atom.weight);
    }
    Ok(FockOperator::new(m)?.times_parity())
}

/// Analytic region operator `χ̃(P) Π`.
pub fn build_region_operator_1d<T: Real>(region: &CharacteristicFunction1D, dim: usize) -> Result<RegionOperator<T>> {
    check_region_dim(region, dim)?;
    let op = match region {
        CharacteristicFunction1D::FourierPeriodic { .. } => {
            atomic_operator(&cfun_fourier_transform(region).atoms, dim)?
        }
        other => function_of_momentum::<T>(dim, |p| other.transform_at(p).expect("bounded transform")).times_parity(),
    };
    Ok(RegionOperator::new(op, RegionDescriptor::line(region.clone()), ConstructionPath::Analytic))
}

/// Options of the smeared construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmearingOptions {
    /// Gauss–Legendre nodes per panel; panels are at most 2 wide.
    pub quadrature_points: usize,
    /// Periods integrated on each side of the origin for Fourier-series
    /// regions; `None` picks enough to resolve the central block.
    pub windows: Option<usize>,
}

impl SmearingOptions {
    pub fn new(quadrature_points: usize) -> Self {
        Self {
            quadrature_points,
            windows: None,
        }
    }
}

const MAX_PANEL: f64 = 2.0;

/// Composite Gauss–Legendre nodes over `[a, b]` with panels at most
/// `MAX_PANEL` wide.
pub(crate) fn panel_nodes(a: f64, b: f64, points: usize) -> Result<Vec<(f64, f64)>> {
    let gl = GaussLegendre::<f64>::new(points)?;
    let panels = ((b - a) / MAX_PANEL).ceil().max(1.0) as usize;
    Ok(gl.composite(a, b, panels))
}

/// `Σ_j w_j D(−q_j/2)` from exact matrix elements.
fn smear<T: Real>(nodes: &[(f64, C64)], dim: usize) -> CMatrix<T> {
    nodes
        .par_iter()
        .map(|&(q, w)| displacement_block::<T>(cx(T::lit(-q / 2.0), T::zero()), dim, dim) * cx_lit::<T>(w))
        .reduce(|| CMatrix::<T>::zeros(dim, dim), |a, b| a + b)
}

/// Smeared region operator `∫ χ(q) e^{iqP} dq Π` with `e^{iqP} = D(−q/2)`
/// evaluated from the Laguerre closed form.
pub fn build_region_operator_smeared<T: Real>(
    region: &CharacteristicFunction1D,
    dim: usize,
    quadrature_points: usize,
) -> Result<RegionOperator<T>> {
    build_region_operator_smeared_with(region, dim, SmearingOptions::new(quadrature_points))
}

pub fn build_region_operator_smeared_with<T: Real>(
    region: &CharacteristicFunction1D,
    dim: usize,
    opts: SmearingOptions,
) -> Result<RegionOperator<T>> {
    check_region_dim(region, dim)?;
    if opts.quadrature_points < 8 {
        return Err(OvmError::InvalidQuadrature(format!(
            "{} quadrature points; at least 8 are required",
            opts.quadrature_points
        )));
    }
    let weighted: Vec<(f64, C64)> = match region {
        CharacteristicFunction1D::Interval { lo, hi } => panel_nodes(*lo, *hi, opts.quadrature_points)?
            .into_iter()
            .map(|(q, w)| (q, C64::new(w, 0.0)))
            .collect(),
        CharacteristicFunction1D::Union { intervals } => {
            let mut all = Vec::new();
            for iv in intervals {
                all.extend(
                    panel_nodes(iv[0], iv[1], opts.quadrature_points)?
                        .into_iter()
                        .map(|(q, w)| (q, C64::new(w, 0.0))),
                );
            }
            all
        }
        CharacteristicFunction1D::FourierPeriodic { l, .. } => {
            let period = 2.0 * l;
            let windows = opts.windows.unwrap_or_else(|| default_windows(dim, period));
            let half = windows as f64 * period;
            panel_nodes(-half, half, opts.quadrature_points)?
                .into_iter()
                .map(|(q, w)| (q, C64::new(w * region.value(q).expect("pointwise cfun"), 0.0)))
                .collect()
        }
        // Delta masses at x = m on the e^{2ixP} axis, i.e. q = 2m.
        CharacteristicFunction1D::IntegerComb { n } => (1..=*n).map(|m| (2.0 * m as f64, C64::new(1.0, 0.0))).collect(),
    };
    let m = smear::<T>(&weighted, dim);
    let op = FockOperator::new(m)?.times_parity();
    Ok(RegionOperator::new(op, RegionDescriptor::line(region.clone()), ConstructionPath::Smeared))
}

/// Half-width of the window, in periods, that resolves the central block:
/// the matrix elements there are Gaussian-localized within a few `√dim`.
fn default_windows(dim: usize, period: f64) -> usize {
    let reach = 4.0 * (dim as f64).sqrt() + 12.0;
    (reach / period).ceil().max(1.0) as usize
}

/// `(p, λ+, λ−)` with `λ± = ±χ̃(p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenPair {
    pub p: f64,
    pub lambda_plus: C64,
    pub lambda_minus: C64,
}

/// Eigenvalues `±χ̃(p)` of `K_q` on `|p⟩ ± |−p⟩`, evaluated from the
/// transform; atomic regions report the atom weights at the atom momenta and
/// zero elsewhere.
pub fn eigensystem_region_operator(region: &CharacteristicFunction1D, momenta: &[f64]) -> Vec<EigenPair> {
    let spec = cfun_fourier_transform(region);
    momenta
        .iter()
        .map(|&p| {
            let chi = if spec.is_continuous() {
                spec.density(p)
            } else {
                spec.atoms
                    .iter()
                    .filter(|a| (a.p - p).abs() <= 1e-12)
                    .map(|a| a.weight)
                    .sum()
            };
            EigenPair {
                p,
                lambda_plus: chi,
                lambda_minus: -chi,
            }
        })
        .collect()
}

/// Relative residuals `‖K(v_p ± v_{−p}) ∓ χ̃(p)(v_p ± v_{−p})‖ / ‖v_p ± v_{−p}‖`
/// over the central block, for regions with a bounded transform.
pub fn residual_check<T: Real>(region: &CharacteristicFunction1D, p: f64, dim: usize) -> Result<(f64, f64)> {
    let chi = region
        .transform_at(p)
        .ok_or_else(|| OvmError::InvalidRegion("residual check needs a bounded transform".into()))?;
    let k = build_region_operator_1d::<T>(region, dim)?;
    let vp: CVector<T> = momentum_ket(T::lit(p), dim);
    let vm: CVector<T> = momentum_ket(T::lit(-p), dim);
    let rows = central_block(dim);
    let lam = cx_lit::<T>(chi);
    let res = |u: CVector<T>, l: Cx<T>| -> f64 {
        let r = k.op.apply(&u) - &u * l;
        (r.rows(0, rows).norm() / u.rows(0, rows).norm()).as_f64()
    };
    Ok((res(&vp + &vm, lam), res(&vp - &vm, -lam)))
}

/// Both evaluations of the occupation probability.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OccupationReport {
    /// `Tr(K_q ρ)`.
    pub operator: C64,
    /// `∫ χ̃(p) |Ψ(p)|² dp`, or the atom sum of a periodic region; absent when refused.
    pub formula: Option<f64>,
    /// Why the formula path was not evaluated.
    pub refused: Option<String>,
}

impl OccupationReport {
    pub fn value(&self) -> f64 {
        self.formula.unwrap_or(self.operator.re)
    }
}

/// Occupation probability of a region, by `Tr(K_q ρ)` and, for pure
/// even-parity states, by the momentum-space formula.
pub fn occupation_probability<T: Real>(
    state: &QuantumState<T>,
    region: &CharacteristicFunction1D,
) -> Result<OccupationReport> {
    let dim = state.dim();
    let k = build_region_operator_1d::<T>(region, dim)?;
    let tr = state.expectation(&k.op)?;
    let operator = C64::new(tr.re.as_f64(), tr.im.as_f64());
    let psi = match state.as_pure() {
        None => {
            return Ok(OccupationReport {
                operator,
                formula: None,
                refused: Some("formula path needs a pure state".into()),
            })
        }
        Some(v) => v,
    };
    let odd = state.odd_parity_weight().as_f64();
    if odd > 1e-12 {
        return Ok(OccupationReport {
            operator,
            formula: None,
            refused: Some(OvmError::OddParity { odd_weight: odd }.to_string()),
        });
    }
    let amp2 = |p: f64| -> f64 {
        let v: CVector<T> = momentum_ket(T::lit(p), dim);
        v.dotc(psi).modulus_squared().as_f64()
    };
    let spec = cfun_fourier_transform(region);
    let formula = if spec.is_continuous() {
        let reach = momentum_band(dim) + 6.0;
        panel_nodes(-reach, reach, 24)?
            .into_iter()
            .map(|(p, w)| w * (spec.density(p) * amp2(p)).re)
            .sum::<f64>()
    } else if let (true, CharacteristicFunction1D::FourierPeriodic { a0, a, l, .. }) = (region.is_symmetric(), region) {
        a0 * PI * amp2(0.0)
            + 2.0 * PI * a.iter().enumerate().map(|(i, am)| am * amp2((i + 1) as f64 * PI / l)).sum::<f64>()
    } else {
        spec.atoms.iter().map(|at| (at.weight * amp2(at.p)).re).sum()
    };
    let dev = (formula - operator.re).abs().max(operator.im.abs());
    let tol = T::tolerance(1e-6).as_f64() * formula.abs().max(1.0);
    if !(dev <= tol) {
        return Err(OvmError::truncation("occupation probability", dev, tol));
    }
    Ok(OccupationReport {
        operator,
        formula: Some(formula),
        refused: None,
    })
}

fn kraus_weights(region: &CharacteristicFunction1D) -> Result<(f64, &[f64], f64)> {
    match region {
        CharacteristicFunction1D::FourierPeriodic { a0, a, b, l } => {
            if *a0 < 0.0 || a.iter().any(|&x| x < 0.0) {
                return Err(OvmError::NotRepresentable("negative Fourier weight".into()));
            }
            if b.iter().any(|&x| x != 0.0) {
                return Err(OvmError::NotRepresentable("sine coefficients must vanish".into()));
            }
            Ok((*a0, a.as_slice(), *l))
        }
        _ => Err(OvmError::NotRepresentable(
            "only Fourier-series regions have a Kraus generator set".into(),
        )),
    }
}

fn kraus_generators<T: Real>(
    region: &CharacteristicFunction1D,
    dim: usize,
    harmonic_weight: f64,
    generator_scale: f64,
) -> Result<Vec<FockOperator<T>>> {
    let (a0, a, l) = kraus_weights(region)?;
    let mut gens = Vec::new();
    if a0 > 0.0 {
        gens.push(FockOperator::identity(dim).scale(re(T::lit((a0 * PI).sqrt()))));
    }
    let q = HermitianSpectrum::<T>::of_position(dim);
    for (i, &am) in a.iter().enumerate() {
        if am == 0.0 {
            continue;
        }
        let k = generator_scale * (i + 1) as f64 * PI / l;
        let amp = T::lit((am * harmonic_weight).sqrt());
        for sign in [-1.0, 1.0] {
            let kk = T::lit(sign * k);
            gens.push(q.apply(|x| cis(kk * x) * amp));
        }
    }
    Ok(gens)
}

/// The generator set `{√(a0 π) 1, √a_m e^{∓imπQ/L}}` taken literally.
pub fn region_kraus_map<T: Real>(region: &CharacteristicFunction1D, dim: usize) -> Result<KrausMap<T>> {
    check_region_dim(region, dim)?;
    let gens = kraus_generators(region, dim, 1.0, 1.0)?;
    KrausMap::new(gens, format!("kraus generators of {}", region.label()))
}

/// One way of reading the Kraus representation of `K_q`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KrausCandidate {
    pub name: String,
    pub description: String,
    /// Max entrywise deviation from the momentum-ket form of `K_q` on the central block.
    pub max_deviation: f64,
    pub frobenius_deviation: f64,
    pub matches: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KrausReconciliation {
    pub region: CharacteristicFunction1D,
    pub dim: usize,
    pub block: usize,
    pub tolerance: f64,
    pub candidates: Vec<KrausCandidate>,
    /// Names of the candidates within tolerance, in report order.
    pub matching: Vec<String>,
}

/// Compares readings of `K_q = ε_q(|p=0⟩⟨p=0|)` against the operator
/// `a0π|0⟩⟨0| + π Σ a_m (|−k⟩⟨k| + |k⟩⟨−k|)` built from momentum kets.
pub fn kraus_reconciliation_report<T: Real>(region: &CharacteristicFunction1D, dim: usize) -> Result<KrausReconciliation> {
    check_region_dim(region, dim)?;
    let (a0, a, l) = kraus_weights(region)?;
    let ket = |p: f64| momentum_ket::<T>(T::lit(p), dim);
    let v0 = ket(0.0);
    let mut target = FockOperator::<T>::outer(&v0, &v0).scale(re(T::lit(a0 * PI)));
    for (i, &am) in a.iter().enumerate() {
        let k = (i + 1) as f64 * PI / l;
        if k > momentum_band(dim) {
            return Err(OvmError::truncation("Kraus harmonic beyond reliable band", k, momentum_band(dim)));
        }
        let (vp, vm) = (ket(k), ket(-k));
        let cross = &FockOperator::outer(&vm, &vp) + &FockOperator::outer(&vp, &vm);
        target = &target + &cross.scale(re(T::lit(PI * am)));
    }
    let seed = FockOperator::outer(&v0, &v0);
    let block = central_block(dim);
    let tolerance = 1e-8;
    // The generator scale 2 maps e^{∓ikQ} to momentum shifts of ±k under [Q, P] = i/2.
    let readings: [(&str, &str, f64, f64, bool); 3] = [
        (
            "literal",
            "{sqrt(a0 pi) 1, sqrt(a_m) exp(-+ i m pi Q / L)} applied to |p=0><p=0|, no parity",
            1.0,
            1.0,
            false,
        ),
        (
            "pi_weights_with_parity",
            "{sqrt(a0 pi) 1, sqrt(a_m pi) exp(-+ i m pi Q / L)}, K_q = Pi eps(|p=0><p=0|)",
            PI,
            1.0,
            true,
        ),
        (
            "pi_weights_with_parity_momentum_shift",
            "{sqrt(a0 pi) 1, sqrt(a_m pi) exp(-+ 2 i m pi Q / L)}, K_q = Pi eps(|p=0><p=0|); generators shift momentum by -+ m pi / L",
            PI,
            2.0,
            true,
        ),
    ];
    let mut candidates = Vec::new();
    for (name, description, weight, scale, with_parity) in readings {
        let map = KrausMap::new(kraus_generators::<T>(region, dim, weight, scale)?, name.to_string())?;
        let mut image = map.apply(&seed)?;
        if with_parity {
            image = image.parity_times();
        }
        let max_deviation = image.max_abs_diff_block(&target, block).as_f64();
        let frobenius_deviation = image.frobenius_diff_block(&target, block).as_f64();
        candidates.push(KrausCandidate {
            name: name.into(),
            description: description.into(),
            max_deviation,
            frobenius_deviation,
            matches: max_deviation <= tolerance,
        });
    }
    let matching = candidates.iter().filter(|c| c.matches).map(|c| c.name.clone()).collect();
    Ok(KrausReconciliation {
        region: region.clone(),
        dim,
        block,
        tolerance,
        candidates,
        matching,
    })
}

/// `e^{iθN} K e^{−iθN}`.
pub fn rotate_operator<T: Real>(k: &RegionOperator<T>, theta: f64) -> RegionOperator<T> {
    let r = rotation::<T>(T::lit(theta), k.op.dim());
    k.transformed(k.op.conjugate_by(&r), Transform::Rotation { theta })
}

/// `χ̃(cos θ P − sin θ Q) Π` from the spectrum of the rotated quadrature;
/// this is what [`rotate_operator`] produces from `K_q`.
pub fn build_rotated_direct<T: Real>(region: &CharacteristicFunction1D, theta: f64, dim: usize) -> Result<RegionOperator<T>> {
    check_region_dim(region, dim)?;
    if region.transform_at(0.0).is_none() {
        return Err(OvmError::InvalidRegion(
            "direct rotated construction needs a bounded transform".into(),
        ));
    }
    let (c, s) = (T::lit(theta.cos()), T::lit(theta.sin()));
    let x = &crate::fock::momentum::<T>(dim).scale(re(c)) - &crate::fock::position::<T>(dim).scale(re(s));
    let op = HermitianSpectrum::new(&x)
        .apply(|p| region.transform_at(p).expect("bounded transform"))
        .times_parity();
    let mut out = RegionOperator::new(op, RegionDescriptor::line(region.clone()), ConstructionPath::Analytic);
    out.transforms.push(Transform::Rotation { theta });
    Ok(out)
}

/// Shift transforms by `e^{icP}`: `Left` is `e^{icP} K`, `Right` is
/// `K e^{icP}`, `Conjugate` is `e^{icP/2} K e^{−icP/2}`.
///
/// `Left` and `Conjugate` give the operator of the region translated by
/// `+c`, `Right` the one translated by `−c`.
pub fn shift_operator<T: Real>(k: &RegionOperator<T>, c: f64, mode: ShiftMode) -> RegionOperator<T> {
    let dim = k.op.dim();
    let spec = HermitianSpectrum::<T>::of_momentum(dim);
    let cc = T::lit(c);
    let op = match mode {
        ShiftMode::Left => &spec.apply(|p| cis(cc * p)) * &k.op,
        ShiftMode::Right => &k.op * &spec.apply(|p| cis(cc * p)),
        ShiftMode::Conjugate => {
            let half = T::lit(0.5);
            let u = spec.apply(|p| cis(half * cc * p));
            &(&u * &k.op) * &u.adjoint()
        }
    };
    k.transformed(op, Transform::Shift { c, mode })
}

/// Translation of the region that [`shift_operator`] implements.
pub fn shift_translation(c: f64, mode: ShiftMode) -> f64 {
    match mode {
        ShiftMode::Left | ShiftMode::Conjugate => c,
        ShiftMode::Right => -c,
    }
}

/// `S(r/2)† K S(r/2)` with `S(ζ) = exp(ζa†² − ζ*a²)`.
pub fn squeeze_operator<T: Real>(k: &RegionOperator<T>, r: f64) -> Result<RegionOperator<T>> {
    if !(r.abs() <= 1.0) {
        return Err(OvmError::TruncationRisk { r });
    }
    let s = squeeze::<T>(cx(T::lit(r / 2.0), T::zero()), k.op.dim());
    let op = &(&s.adjoint() * &k.op) * &s;
    Ok(k.transformed(op, Transform::Squeeze { r }))
}

/// `χ̃(P e^{−r}) Π`.
pub fn build_squeezed_direct<T: Real>(region: &CharacteristicFunction1D, r: f64, dim: usize) -> Result<RegionOperator<T>> {
    check_region_dim(region, dim)?;
    if region.transform_at(0.0).is_none() {
        return Err(OvmError::InvalidRegion(
            "direct squeezed construction needs a bounded transform".into(),
        ));
    }
    let scale = T::lit((-r).exp());
    let op = function_of_momentum::<T>(dim, |p| region.transform_at(p * scale).expect("bounded transform")).times_parity();
    let mut out = RegionOperator::new(op, RegionDescriptor::line(region.clone()), ConstructionPath::Analytic);
    out.transforms.push(Transform::Squeeze { r });
    Ok(out)
}

/// `Σ_{m=1}^{n} e^{2imP} Π` from the finite sum.
pub fn integer_comb_operator<T: Real>(n: usize, dim: usize) -> Result<RegionOperator<T>> {
    build_region_operator_1d(&CharacteristicFunction1D::integer_comb(n)?, dim)
}

/// Largest `|Σ_{m=1}^n e^{2imp} − (e^{i(2n+1)p} − e^{ip}) / (2i sin p)|` over
/// the eigenvalues of the truncated `P` with `|sin p| > 1e-6`, and the
/// number of eigenvalues tested.
pub fn comb_closed_form_deviation<T: Real>(n: usize, dim: usize) -> Result<(f64, usize)> {
    if n == 0 {
        return Err(OvmError::InvalidRegion("integer comb needs n >= 1".into()));
    }
    let spec = HermitianSpectrum::<T>::of_momentum(dim);
    let mut worst = 0.0f64;
    let mut tested = 0;
    for &p in spec.values() {
        let sp = p.sin();
        if sp.abs().as_f64() <= 1e-6 {
            continue;
        }
        tested += 1;
        let sum = (1..=n).fold(re(T::zero()), |acc, m| acc + cis(T::lit(2.0) * T::of(m) * p));
        let closed = (cis(T::of(2 * n + 1) * p) - cis(p)) / cx(T::zero(), T::lit(2.0) * sp);
        worst = worst.max((sum - closed).modulus().as_f64());
    }
    Ok((worst, tested))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructors_validate() {
        assert!(CharacteristicFunction1D::interval(1.0, 1.0).is_err());
        assert!(CharacteristicFunction1D::integer_comb(0).is_err());
        assert!(CharacteristicFunction1D::fourier(1.0, vec![], vec![], 0.0).is_err());
        let u = CharacteristicFunction1D::union(&[(2.0, 3.0), (-1.0, 0.5), (0.0, 1.0)]).unwrap();
        assert_eq!(
            u,
            CharacteristicFunction1D::Union {
                intervals: vec![[-1.0, 1.0], [2.0, 3.0]]
            }
        );
    }

    #[test]
    fn fourier_atoms() {
        let r = CharacteristicFunction1D::fourier(1.0, vec![], vec![], 1.0).unwrap();
        let s = cfun_fourier_transform(&r);
        assert_eq!(s.atoms.len(), 1);
        assert_eq!(s.atoms[0].p, 0.0);
        assert!((s.atoms[0].weight - C64::new(PI, 0.0)).norm() < 1e-15);

        let r = CharacteristicFunction1D::fourier(0.0, vec![1.0], vec![0.0], PI).unwrap();
        let s = cfun_fourier_transform(&r);
        assert_eq!(s.atoms.len(), 2);
        assert_eq!((s.atoms[0].p, s.atoms[1].p), (-1.0, 1.0));
        for at in &s.atoms {
            assert!((at.weight - C64::new(PI, 0.0)).norm() < 1e-15);
        }
        assert!(!s.is_continuous());
    }

    #[test]
    fn interval_transform_matches_quadrature() {
        let a = 1.3;
        let r = CharacteristicFunction1D::interval(-a / 2.0, a / 2.0).unwrap();
        assert!((r.transform_at(0.0).unwrap() - C64::new(a, 0.0)).norm() < 1e-15);
        let gl = GaussLegendre::<f64>::new(40).unwrap();
        for p in [0.3, 1.7, -4.0] {
            let numeric = C64::new(
                gl.integrate(-a / 2.0, a / 2.0, |q| (q * p).cos()),
                gl.integrate(-a / 2.0, a / 2.0, |q| (q * p).sin()),
            );
            let closed = 2.0 * (p * a / 2.0).sin() / p;
            assert!((r.transform_at(p).unwrap() - C64::new(closed, 0.0)).norm() < 1e-14);
            assert!((numeric - r.transform_at(p).unwrap()).norm() < 1e-13);
        }
        // Hermitian symmetry for a real but asymmetric cfun.
        let r = CharacteristicFunction1D::interval(0.0, 1.0).unwrap();
        let (x, y) = (r.transform_at(0.8f64).unwrap(), r.transform_at(-0.8f64).unwrap());
        assert!((x - y.conj()).norm() < 1e-15);
    }

    #[test]
    fn translated_fourier_matches_pointwise() {
        let r = CharacteristicFunction1D::fourier(0.4, vec![0.3, -0.2], vec![0.1, 0.5], 1.7).unwrap();
        let t = r.translated(0.6).unwrap();
        for q in [-2.0, -0.3, 0.0, 1.1] {
            assert!((t.value(q).unwrap() - r.value(q - 0.6).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn eigenvalues_of_interval() {
        let a = 2.0;
        let r = CharacteristicFunction1D::interval(-a / 2.0, a / 2.0).unwrap();
        let e = eigensystem_region_operator(&r, &[0.0, PI]);
        assert!((e[0].lambda_plus - C64::new(a, 0.0)).norm() < 1e-15);
        assert!((e[0].lambda_minus + C64::new(a, 0.0)).norm() < 1e-15);
        // χ̃(π) = 2 sin(π)/π vanishes: degenerate pair.
        assert!(e[1].lambda_plus.norm() < 1e-15 && e[1].lambda_minus.norm() < 1e-15);
    }

    #[test]
    fn quadrature_points_are_checked() {
        let r = CharacteristicFunction1D::interval(-1.0, 1.0).unwrap();
        assert!(matches!(
            build_region_operator_smeared::<f64>(&r, 16, 7),
            Err(OvmError::InvalidQuadrature(_))
        ));
    }

    #[test]
    fn kraus_rejects_negative_weights() {
        let r = CharacteristicFunction1D::fourier(1.0, vec![-0.5], vec![0.0], 1.0).unwrap();
        assert!(matches!(region_kraus_map::<f64>(&r, 16), Err(OvmError::NotRepresentable(_))));
        let r = CharacteristicFunction1D::fourier(1.0, vec![0.5], vec![0.2], 1.0).unwrap();
        assert!(matches!(region_kraus_map::<f64>(&r, 16), Err(OvmError::NotRepresentable(_))));
    }

    #[test]
    fn single_kraus_generator_scales_by_pi() {
        let r = CharacteristicFunction1D::fourier(1.0, vec![], vec![], 1.0).unwrap();
        let map = region_kraus_map::<f64>(&r, 8).unwrap();
        assert_eq!(map.generators().len(), 1);
        let x = crate::fock::number::<f64>(8);
        let y = map.apply(&x).unwrap();
        assert!(y.max_abs_diff_block(&x.scale(re(PI)), 8) < 1e-13);
    }

    #[test]
    fn squeeze_refuses_large_r() {
        let r = CharacteristicFunction1D::interval(-1.0, 1.0).unwrap();
        let k = build_region_operator_1d::<f64>(&r, 16).unwrap();
        assert!(matches!(squeeze_operator(&k, 1.5), Err(OvmError::TruncationRisk { .. })));
    }
}
