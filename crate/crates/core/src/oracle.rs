//! Dual-path verification of region operators and the transform
//! identities, reported as JSON-serializable [`OracleReport`]s.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{OvmError, Result};
use crate::fock::{central_block, displaced_parity, FockOperator};
use crate::pti::{parity_sum_expectation, TwoModeSystem};
use crate::quasiprob::{quasi_field, quasiprob_mass, quasiprob_value, WignerConvention};
use crate::region::{RegionDescriptor, ShiftMode};
use crate::regions1d::{
    build_region_operator_1d, build_region_operator_smeared, build_rotated_direct, build_squeezed_direct,
    comb_closed_form_deviation, kraus_reconciliation_report, rotate_operator, shift_operator, shift_translation,
    squeeze_operator, CharacteristicFunction1D,
};
use crate::regions2d::{
    circle_ovm, circle_ovm_phase_averaged, disc_ovm, phase_average, region_ovm_oracle, segment_ovm,
    segment_ovm_quadrature, PhaseGrid, Region2D,
};
use crate::special::GaussLegendre;
use crate::state::QuantumState;

/// Outcome of one dual-path comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub label: String,
    /// What `abs_deviation` measures.
    pub metric: String,
    pub analytic: Vec<f64>,
    pub oracle: Vec<f64>,
    pub abs_deviation: f64,
    pub rel_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub params: BTreeMap<String, Value>,
    /// Set when a path refused to run; the report then fails.
    pub error: Option<String>,
}

impl OracleReport {
    fn new(label: impl Into<String>, metric: impl Into<String>, tolerance: f64) -> Self {
        Self {
            label: label.into(),
            metric: metric.into(),
            analytic: Vec::new(),
            oracle: Vec::new(),
            abs_deviation: f64::NAN,
            rel_deviation: f64::NAN,
            tolerance,
            pass: false,
            params: BTreeMap::new(),
            error: None,
        }
    }

    fn param(mut self, key: &str, v: impl Into<Value>) -> Self {
        self.params.insert(key.into(), v.into());
        self
    }

    /// Records the deviation against a scale for the relative figure.
    fn finish(mut self, abs: f64, scale: f64) -> Self {
        self.abs_deviation = abs;
        self.rel_deviation = if scale > 0.0 { abs / scale } else { abs };
        self.pass = abs <= self.tolerance;
        self
    }

    fn failed(mut self, e: &OvmError) -> Self {
        self.error = Some(e.to_string());
        self.pass = false;
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

fn diag_re(op: &FockOperator<f64>, k: usize) -> Vec<f64> {
    op.diagonal().iter().take(k).map(|z| z.re).collect()
}

fn block_norm(op: &FockOperator<f64>, k: usize) -> f64 {
    op.block(k).norm()
}

/// Knobs shared by the verifications.
#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub grid: PhaseGrid,
    /// Gauss–Legendre points of 1D smearing and the disc integral.
    pub quadrature_points: usize,
    /// Test state of mass comparisons; vacuum when unset.
    pub state: Option<QuantumState<f64>>,
    /// Overrides the per-type default tolerance.
    pub tolerance: Option<f64>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            grid: PhaseGrid::default(),
            quadrature_points: 64,
            state: None,
            tolerance: None,
        }
    }
}

/// Default tolerance of the comparison run for a region type.
pub fn default_tolerance(region: &RegionDescriptor) -> f64 {
    match region {
        RegionDescriptor::Line(_) => 1e-6,
        RegionDescriptor::Plane(Region2D::Circle { .. }) => 1e-8,
        RegionDescriptor::Plane(Region2D::Disc { .. }) => 1e-7,
        RegionDescriptor::Plane(_) => 1e-3,
    }
}

/// Runs the comparison that fits the region:
///
/// * 1D regions: `χ̃(P)Π` against Gauss–Legendre smearing of displacements,
///   Frobenius norm on the central block;
/// * circles: the Laguerre diagonal against the phase average of `Πe^{2iaP}`,
///   levels `n ≤ dim/2`;
/// * discs: the Gauss–Legendre disc operator against the phase average of the
///   segment operator, central block;
/// * area regions: `Tr(ρK(X))` from the grid oracle against the grid integral
///   of the Wigner function.
pub fn verify_region_operator(region: &RegionDescriptor, dim: usize, opts: &VerifyOptions) -> OracleReport {
    let tol = opts.tolerance.unwrap_or_else(|| default_tolerance(region));
    let k = central_block(dim);
    let base = OracleReport::new(region.label(), "", tol)
        .param("dim", dim)
        .param("region", serde_json::to_value(region).unwrap_or(Value::Null))
        .param("central_block", k);
    let run = || -> Result<OracleReport> {
        match region {
            RegionDescriptor::Line(c) => {
                let analytic = build_region_operator_1d::<f64>(c, dim)?;
                let smeared = build_region_operator_smeared::<f64>(c, dim, opts.quadrature_points)?;
                let dev = analytic.op.frobenius_diff_block(&smeared.op, k);
                let mut r = base.clone().param("quadrature_points", opts.quadrature_points);
                r.metric = "frobenius norm of (analytic - smeared) on the central block".into();
                r.analytic = diag_re(&analytic.op, k);
                r.oracle = diag_re(&smeared.op, k);
                Ok(r.finish(dev, block_norm(&analytic.op, k)))
            }
            RegionDescriptor::Plane(Region2D::Circle { a }) => {
                let analytic = circle_ovm::<f64>(*a, dim)?;
                let averaged = circle_ovm_phase_averaged::<f64>(*a, dim)?;
                let levels = dim / 2 + 1;
                let x = diag_re(&analytic.op, levels);
                let y = diag_re(&averaged.op, levels);
                let dev = x.iter().zip(&y).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
                let mut r = base.clone().param("levels", levels);
                r.metric = "max diagonal deviation for n <= dim/2".into();
                let scale = x.iter().map(|v| v.abs()).fold(0.0, f64::max);
                r.analytic = x;
                r.oracle = y;
                Ok(r.finish(dev, scale))
            }
            RegionDescriptor::Plane(Region2D::Disc { a }) => {
                let analytic = disc_ovm::<f64>(*a, dim, opts.quadrature_points.max(16))?;
                let averaged = phase_average(&segment_ovm::<f64>(*a, dim)?.op);
                let dev = analytic.op.max_abs_diff_block(&averaged, k);
                let mut r = base.clone().param("quadrature_points", opts.quadrature_points.max(16));
                r.metric = "max entry deviation from the phase-averaged segment on the central block".into();
                r.analytic = diag_re(&analytic.op, k);
                r.oracle = diag_re(&averaged, k);
                Ok(r.finish(dev, analytic.op.block(k).camax()))
            }
            RegionDescriptor::Plane(area) => {
                let state = match &opts.state {
                    Some(s) => s.clone(),
                    None => QuantumState::vacuum(dim)?,
                };
                let k_oracle = region_ovm_oracle::<f64>(area, dim, &opts.grid)?;
                let trace = state.expectation(&k_oracle.op)?.re;
                let mass = quasiprob_mass(&state, area, &opts.grid, 0.0, WignerConvention::Bare)?;
                let mut r = base.clone().param("grid", serde_json::to_value(opts.grid).unwrap_or(Value::Null));
                r.metric = "|Tr(rho K(X)) - grid integral of W over X|, bare convention".into();
                r.analytic = vec![trace];
                r.oracle = vec![mass];
                Ok(r.finish((trace - mass).abs(), trace.abs()))
            }
        }
    };
    run().unwrap_or_else(|e| base.clone().failed(&e))
}

/// Parameter swept by [`convergence_sweep`].
#[derive(Debug, Clone, PartialEq)]
pub enum SweepAxis {
    Dims(Vec<usize>),
    /// Gauss–Legendre points at fixed `dim`.
    Quadrature { dim: usize, points: Vec<usize> },
    /// Grids at fixed `dim`; the reference is a 2D Gauss–Legendre integral.
    Grids { dim: usize, grids: Vec<PhaseGrid> },
}

/// Reports along a sweep, in order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    pub reports: Vec<OracleReport>,
    /// Every step satisfies `dev[i+1] <= 1.1 dev[i] + 1e-13`.
    pub monotone: bool,
}

pub fn convergence_sweep(region: &RegionDescriptor, axis: &SweepAxis, opts: &VerifyOptions) -> Result<Sweep> {
    let reports: Vec<OracleReport> = match axis {
        SweepAxis::Dims(dims) => {
            ascending(dims)?;
            dims.iter().map(|&d| verify_region_operator(region, d, opts)).collect()
        }
        SweepAxis::Quadrature { dim, points } => {
            ascending(points)?;
            points
                .iter()
                .map(|&p| {
                    let o = VerifyOptions {
                        quadrature_points: p,
                        ..opts.clone()
                    };
                    verify_region_operator(region, *dim, &o)
                })
                .collect()
        }
        SweepAxis::Grids { dim, grids } => {
            let cells: Vec<usize> = grids.iter().map(|g| g.len()).collect();
            ascending(&cells)?;
            let RegionDescriptor::Plane(Region2D::Rectangle { q0, q1, p0, p1 }) = region else {
                return Err(OvmError::InvalidRegion("grid sweeps need a rectangle".into()));
            };
            let state = match &opts.state {
                Some(s) => s.clone(),
                None => QuantumState::vacuum(*dim)?,
            };
            let reference = rectangle_mass_reference(&state, [*q0, *q1, *p0, *p1], 48)?;
            grids
                .iter()
                .map(|g| {
                    let base = OracleReport::new(region.label(), "|grid mass - Gauss-Legendre mass|", opts.tolerance.unwrap_or(1e-3))
                        .param("dim", *dim)
                        .param("grid", serde_json::to_value(g).unwrap_or(Value::Null));
                    match quasiprob_mass(&state, &Region2D::Rectangle { q0: *q0, q1: *q1, p0: *p0, p1: *p1 }, g, 0.0, WignerConvention::Bare) {
                        Ok(m) => {
                            let mut r = base;
                            r.analytic = vec![reference];
                            r.oracle = vec![m];
                            r.finish((m - reference).abs(), reference.abs())
                        }
                        Err(e) => base.failed(&e),
                    }
                })
                .collect()
        }
    };
    let monotone = reports
        .windows(2)
        .all(|w| w[1].abs_deviation <= 1.1 * w[0].abs_deviation + 1e-13);
    Ok(Sweep { reports, monotone })
}

fn ascending<T: PartialOrd>(xs: &[T]) -> Result<()> {
    if xs.is_empty() || xs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(OvmError::Parameter("sweep values must be nonempty and ascending".into()));
    }
    Ok(())
}

/// `∫∫ W(q + ip) dq dp` over a rectangle with tensor Gauss–Legendre and the
/// point operator `D(2α)Π`.
pub fn rectangle_mass_reference(state: &QuantumState<f64>, rect: [f64; 4], points: usize) -> Result<f64> {
    let gl = GaussLegendre::<f64>::new(points)?;
    let dim = state.dim();
    let mut total = 0.0;
    for (q, wq) in gl.mapped(rect[0], rect[1]) {
        for (p, wp) in gl.mapped(rect[2], rect[3]) {
            let w = state.expectation(&displaced_parity(Complex64::new(q, p), dim))?.re;
            total += wq * wp * w;
        }
    }
    Ok(total)
}

/// Named checks exposed by the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerifyTarget {
    Circle,
    Disc,
    Segment,
    Interval,
    Kraus,
    Dilation,
    ParitySum,
    Quasiprob,
    Rotation,
    Shift,
    Squeeze,
    Comb,
}

impl std::str::FromStr for VerifyTarget {
    type Err = OvmError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "circle" => Self::Circle,
            "disc" => Self::Disc,
            "segment" => Self::Segment,
            "interval" => Self::Interval,
            "kraus" => Self::Kraus,
            "dilation" => Self::Dilation,
            "parity-sum" => Self::ParitySum,
            "quasiprob" => Self::Quasiprob,
            "rotation" => Self::Rotation,
            "shift" => Self::Shift,
            "squeeze" => Self::Squeeze,
            "comb" => Self::Comb,
            other => return Err(OvmError::Parameter(format!("unknown verification target '{other}'"))),
        })
    }
}

/// Parameters of [`verify_target`]; unset values take per-target defaults.
#[derive(Debug, Clone, Default)]
pub struct TargetParams {
    pub dim: Option<usize>,
    pub a: Option<f64>,
    pub a0: Option<f64>,
    pub b: Option<f64>,
    pub l: Option<f64>,
    pub n: Option<usize>,
    pub theta: Option<f64>,
    pub c: Option<f64>,
    pub r: Option<f64>,
    pub seed: Option<u64>,
    pub draws: Option<usize>,
    pub tolerance: Option<f64>,
    pub quadrature_points: Option<usize>,
}

impl VerifyTarget {
    pub fn default_dim(self) -> usize {
        match self {
            Self::Dilation => 6,
            Self::ParitySum => 10,
            Self::Quasiprob => 32,
            Self::Kraus => 64,
            Self::Squeeze => 96,
            _ => 48,
        }
    }
}

/// Runs a named check. Refusals from the core are returned as errors, not
/// as failing reports.
pub fn verify_target(target: VerifyTarget, p: &TargetParams) -> Result<OracleReport> {
    let dim = p.dim.unwrap_or(target.default_dim());
    let opts = VerifyOptions {
        quadrature_points: p.quadrature_points.unwrap_or(64),
        tolerance: p.tolerance,
        ..VerifyOptions::default()
    };
    let seed = p.seed.unwrap_or(2024);
    let report = match target {
        VerifyTarget::Circle => {
            verify_region_operator(&RegionDescriptor::plane(Region2D::Circle { a: p.a.unwrap_or(1.0) }), dim, &opts)
        }
        VerifyTarget::Disc => {
            verify_region_operator(&RegionDescriptor::plane(Region2D::Disc { a: p.a.unwrap_or(1.0) }), dim, &opts)
        }
        VerifyTarget::Interval => {
            let a = p.a.unwrap_or(1.0);
            verify_region_operator(&RegionDescriptor::line(CharacteristicFunction1D::interval(-a, a)?), dim, &opts)
        }
        VerifyTarget::Segment => verify_segment(p.a.unwrap_or(2.0), dim, opts.quadrature_points, p.tolerance.unwrap_or(1e-8))?,
        VerifyTarget::Kraus => verify_kraus(p, dim)?,
        VerifyTarget::Dilation => verify_dilation(dim, p.draws.unwrap_or(5), seed, p.tolerance.unwrap_or(1e-12))?,
        VerifyTarget::ParitySum => verify_parity_sum(dim, p.draws.unwrap_or(10), seed, p.tolerance.unwrap_or(1e-10))?,
        VerifyTarget::Quasiprob => verify_quasiprob(dim, p.draws.unwrap_or(20), seed, p.tolerance.unwrap_or(1e-8))?,
        VerifyTarget::Rotation => verify_rotation(p.a.unwrap_or(1.0), p.theta.unwrap_or(0.3), dim, p.tolerance.unwrap_or(1e-9))?,
        VerifyTarget::Shift => verify_shift(p.a.unwrap_or(1.0), p.c.unwrap_or(0.4), dim, p.tolerance.unwrap_or(1e-6))?,
        VerifyTarget::Squeeze => verify_squeeze(p.a.unwrap_or(1.0), p.r.unwrap_or(0.2), dim, p.tolerance.unwrap_or(1e-4))?,
        VerifyTarget::Comb => verify_comb(p.n.unwrap_or(3), dim, p.tolerance.unwrap_or(1e-10))?,
    };
    Ok(report.param("target", serde_json::to_value(target).unwrap_or(Value::Null)))
}

/// `sin(Pa)/P Π` against Gauss–Legendre of `∫ e^{2ixP} dx Π`.
pub fn verify_segment(a: f64, dim: usize, points: usize, tol: f64) -> Result<OracleReport> {
    let k = central_block(dim);
    let analytic = segment_ovm::<f64>(a, dim)?;
    let quad = segment_ovm_quadrature::<f64>(a, dim, points)?;
    let dev = analytic.op.max_abs_diff_block(&quad.op, k);
    let mut r = OracleReport::new(format!("segment a={a}"), "max entry deviation on the central block", tol)
        .param("dim", dim)
        .param("a", a)
        .param("quadrature_points", points);
    r.analytic = diag_re(&analytic.op, k);
    r.oracle = diag_re(&quad.op, k);
    Ok(r.finish(dev, analytic.op.block(k).camax()))
}

/// The Kraus reconciliation report. It never fails: the candidates are
/// data, and `pass` only records whether the report could be produced.
pub fn verify_kraus(p: &TargetParams, dim: usize) -> Result<OracleReport> {
    let a0 = p.a0.unwrap_or(1.0);
    let a = p.a.unwrap_or(1.0);
    let b = p.b.unwrap_or(0.0);
    let l = p.l.unwrap_or(PI);
    let region = CharacteristicFunction1D::fourier(a0, vec![a], vec![b], l)?;
    let rep = kraus_reconciliation_report::<f64>(&region, dim)?;
    let mut r = OracleReport::new(
        format!("kraus reconciliation of {}", region.label()),
        "smallest candidate deviation from the momentum-ket operator",
        rep.tolerance,
    )
    .param("dim", dim)
    .param("report", serde_json::to_value(&rep).unwrap_or(Value::Null))
    .param("matching", json!(rep.matching));
    r.oracle = rep.candidates.iter().map(|c| c.max_deviation).collect();
    let best = r.oracle.iter().copied().fold(f64::INFINITY, f64::min);
    let mut r = r.finish(best, 1.0);
    r.pass = true;
    Ok(r)
}

/// `Tr_A W†(|0⟩⟨0| ⊗ ρ)W = ρ + V†²ρV²` on random states and `W†W = 2`.
pub fn verify_dilation(dim: usize, draws: usize, seed: u64, tol: f64) -> Result<OracleReport> {
    let sys = TwoModeSystem::new(dim)?;
    let w = sys.dilation_w::<f64>()?;
    let eps_star = sys.parity_sum_map::<f64>()?.dual();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut devs = Vec::with_capacity(draws);
    for _ in 0..draws {
        let rho = sys.random_density::<f64, _>(3, &mut rng)?;
        let lhs = sys.dilate_with(&w, &rho)?;
        let rhs = eps_star.apply(&rho)?;
        devs.push((&lhs - &rhs).max_abs());
    }
    let wtw = &(&w.adjoint() * &w) - &FockOperator::identity(w.dim()).scale(Complex64::new(2.0, 0.0));
    let gram = wtw.max_abs();
    let mut r = OracleReport::new(
        format!("dilation, {dim} levels per mode"),
        "max entry deviation of the partial-trace identity and of W†W - 2",
        tol,
    )
    .param("dim", dim)
    .param("draws", draws)
    .param("seed", seed)
    .param("gram_deviation", gram);
    let worst = devs.iter().copied().fold(gram, f64::max);
    r.oracle = devs;
    Ok(r.finish(worst, 1.0))
}

/// Random draws of the three parity-sum routes plus the vacuum spot value.
pub fn verify_parity_sum(dim: usize, draws: usize, seed: u64, tol: f64) -> Result<OracleReport> {
    let sys = TwoModeSystem::new(dim)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut values = Vec::new();
    for _ in 0..draws {
        // Random state on the low levels of each mode so that the displaced
        // state stays inside the padded frame.
        let support = (dim / 2).max(2);
        let rho = low_two_mode_state(&sys, support, &mut rng)?;
        let alpha = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let beta = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let rep = parity_sum_expectation(&sys, &rho, alpha, beta)?;
        worst = worst.max(rep.max_route_deviation);
        values.push(rep.point_operators);
    }
    let mut vac = FockOperator::<f64>::zeros(sys.composite_dim()).into_matrix();
    vac[(0, 0)] = Complex64::new(1.0, 0.0);
    let spot = parity_sum_expectation(&sys, &FockOperator::new(vac)?, Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))?;
    let expected = 1.0 + (-2.0f64).exp();
    let spot_dev = (spot.value() - expected).abs();
    let mut r = OracleReport::new(
        format!("parity sum, {dim} levels per mode"),
        "max spread between the three routes",
        tol,
    )
    .param("dim", dim)
    .param("draws", draws)
    .param("seed", seed)
    .param("spot_value", spot.value())
    .param("spot_expected", expected)
    .param("spot_deviation", spot_dev);
    r.analytic = vec![expected];
    r.oracle = values;
    let mut r = r.finish(worst, 1.0);
    r.pass = r.pass && spot_dev <= 1e-8;
    Ok(r)
}

fn low_two_mode_state<R: Rng + ?Sized>(sys: &TwoModeSystem, support: usize, rng: &mut R) -> Result<FockOperator<f64>> {
    let n = sys.composite_dim();
    let mut g = FockOperator::<f64>::zeros(n).into_matrix();
    for c in 0..2 {
        for n1 in 0..support {
            for n2 in 0..support {
                g[(sys.index(n1, n2), c)] = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            }
        }
    }
    let mut rho = &g * g.adjoint();
    let tr = rho.trace();
    rho /= tr;
    let rho = (&rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    Ok(QuantumState::mixed(FockOperator::new(rho)?)?.density())
}

/// Kernel against series for random `(state, α, s)` and Husimi positivity
/// on the default grid.
pub fn verify_quasiprob(dim: usize, draws: usize, seed: u64, tol: f64) -> Result<OracleReport> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut values = Vec::new();
    for i in 0..draws {
        let state = if i % 2 == 0 {
            QuantumState::<f64>::random_pure(dim, 5, &mut rng)?
        } else {
            QuantumState::<f64>::random_mixed(dim, 5, 3, &mut rng)?
        };
        let r = rng.random_range(0.0..1.5);
        let phi = rng.random_range(0.0..2.0 * PI);
        let s = rng.random_range(-1.0..0.0);
        let v = quasiprob_value(&state, Complex64::from_polar(r, phi), s)?;
        worst = worst.max(v.deviation);
        values.push(v.value);
    }
    let q_min = husimi_minimum(dim, &PhaseGrid::default())?;
    let mut r = OracleReport::new("quasi-probability kernel vs series", "max |kernel - series|", tol)
        .param("dim", dim)
        .param("draws", draws)
        .param("seed", seed)
        .param("husimi_minimum", q_min);
    r.oracle = values;
    let mut r = r.finish(worst, 1.0);
    r.pass = r.pass && q_min >= -1e-12;
    Ok(r)
}

/// Test states of the Husimi positivity check: vacuum, Fock states up to 4,
/// a coherent state and the squeezed vacuum with `r = 0.3`.
pub fn husimi_test_states(dim: usize) -> Result<Vec<(String, QuantumState<f64>)>> {
    let mut out = vec![("vacuum".to_string(), QuantumState::vacuum(dim)?)];
    for n in 1..=4 {
        out.push((format!("fock {n}"), QuantumState::fock(n, dim)?));
    }
    out.push(("coherent 0.7".into(), QuantumState::coherent(Complex64::new(0.7, 0.0), dim)?));
    out.push(("squeezed 0.3".into(), QuantumState::squeezed_vacuum(0.3, dim)?));
    Ok(out)
}

/// Smallest Husimi value over the test states.
pub fn husimi_minimum(dim: usize, grid: &PhaseGrid) -> Result<f64> {
    let mut m = f64::INFINITY;
    for (_, st) in husimi_test_states(dim)? {
        m = m.min(quasi_field(&st, grid, -1.0, WignerConvention::TwoOverPi)?.min());
    }
    Ok(m)
}

fn symmetric_interval(a: f64) -> Result<CharacteristicFunction1D> {
    CharacteristicFunction1D::interval(-a, a)
}

/// Group law of rotations and `K_p^θ = rotate(K_q^θ, π/2)` against the
/// direct spectral construction on the rotated quadrature.
pub fn verify_rotation(a: f64, theta: f64, dim: usize, tol: f64) -> Result<OracleReport> {
    let region = symmetric_interval(a)?;
    let kq = build_region_operator_1d::<f64>(&region, dim)?;
    let t2 = 0.7;
    let twice = rotate_operator(&rotate_operator(&kq, theta), t2);
    let once = rotate_operator(&kq, theta + t2);
    let group = twice.op.max_abs_diff_block(&once.op, dim);
    let kq_theta = build_rotated_direct::<f64>(&region, theta, dim)?;
    let kp_theta = build_rotated_direct::<f64>(&region, theta + PI / 2.0, dim)?;
    let quarter = rotate_operator(&kq_theta, PI / 2.0);
    let quarter_dev = quarter.op.max_abs_diff_block(&kp_theta.op, dim);
    let direct_dev = rotate_operator(&kq, theta).op.max_abs_diff_block(&kq_theta.op, dim);
    let ev_a = kq.op.hermitian_eigenvalues();
    let ev_b = rotate_operator(&kq, theta).op.hermitian_eigenvalues();
    let spectrum = ev_a.iter().zip(&ev_b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let worst = group.max(quarter_dev).max(direct_dev).max(spectrum);
    let r = OracleReport::new(
        format!("rotation of interval [-{a}, {a}] by {theta}"),
        "max of group-law, quarter-turn, direct-construction and spectrum deviations",
        tol,
    )
    .param("dim", dim)
    .param("group_law", group)
    .param("quarter_turn", quarter_dev)
    .param("direct", direct_dev)
    .param("spectrum", spectrum);
    Ok(r.finish(worst, 1.0))
}

/// Each shift mode against the analytic operator of the translated region.
pub fn verify_shift(a: f64, c: f64, dim: usize, tol: f64) -> Result<OracleReport> {
    let region = symmetric_interval(a)?;
    let k = central_block(dim);
    let kq = build_region_operator_1d::<f64>(&region, dim)?;
    let mut r = OracleReport::new(
        format!("shift of interval [-{a}, {a}] by {c}"),
        "max entry deviation from the translated region's operator on the central block",
        tol,
    )
    .param("dim", dim)
    .param("c", c);
    let mut worst = 0.0f64;
    for mode in [ShiftMode::Left, ShiftMode::Right, ShiftMode::Conjugate] {
        let shifted = shift_operator(&kq, c, mode);
        let target = build_region_operator_1d::<f64>(&region.translated(shift_translation(c, mode))?, dim)?;
        let dev = shifted.op.max_abs_diff_block(&target.op, k);
        r.oracle.push(dev);
        worst = worst.max(dev);
    }
    r = r.param("modes", json!(["left", "right", "conjugate"]));
    Ok(r.finish(worst, 1.0))
}

/// `S(r/2)† K S(r/2)` against `χ̃(Pe^{−r})Π` on the central quarter.
pub fn verify_squeeze(a: f64, r: f64, dim: usize, tol: f64) -> Result<OracleReport> {
    let region = symmetric_interval(a)?;
    let k = (dim / 4).max(1);
    let kq = build_region_operator_1d::<f64>(&region, dim)?;
    let squeezed = squeeze_operator(&kq, r)?;
    let direct = build_squeezed_direct::<f64>(&region, r, dim)?;
    let dev = squeezed.op.max_abs_diff_block(&direct.op, k);
    let mut rep = OracleReport::new(
        format!("squeeze of interval [-{a}, {a}] by r={r}"),
        "max entry deviation on the central quarter",
        tol,
    )
    .param("dim", dim)
    .param("r", r)
    .param("block", k);
    rep.analytic = diag_re(&direct.op, k);
    rep.oracle = diag_re(&squeezed.op, k);
    Ok(rep.finish(dev, direct.op.block(k).camax()))
}

/// Finite sum against the geometric closed form on the spectrum of `P`.
pub fn verify_comb(n: usize, dim: usize, tol: f64) -> Result<OracleReport> {
    let (dev, tested) = comb_closed_form_deviation::<f64>(n, dim)?;
    let r = OracleReport::new(format!("integer comb n={n}"), "max scalar deviation over P eigenvalues", tol)
        .param("dim", dim)
        .param("eigenvalues_tested", tested);
    Ok(r.finish(dev, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_flags_follow_tolerance() {
        let r = OracleReport::new("x", "m", 1e-3).finish(2e-3, 1.0);
        assert!(!r.pass);
        let r = OracleReport::new("x", "m", 1e-3).finish(5e-4, 0.0);
        assert!(r.pass);
        assert!(r.rel_deviation >= 0.0);
        let v: Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["pass"], Value::Bool(true));
    }

    #[test]
    fn refusals_become_failed_reports() {
        let tiny = RegionDescriptor::plane(Region2D::Rectangle {
            q0: 0.0,
            q1: 0.05,
            p0: 0.0,
            p1: 0.05,
        });
        let rep = verify_region_operator(&tiny, 16, &VerifyOptions::default());
        assert!(!rep.pass);
        assert!(rep.error.unwrap().contains("cells"));
    }

    #[test]
    fn targets_parse() {
        assert_eq!("parity-sum".parse::<VerifyTarget>().unwrap(), VerifyTarget::ParitySum);
        assert!("nope".parse::<VerifyTarget>().is_err());
    }

    #[test]
    fn comb_target_passes() {
        let r = verify_target(VerifyTarget::Comb, &TargetParams::default()).unwrap();
        assert!(r.pass, "{}", r.to_json());
    }
}
