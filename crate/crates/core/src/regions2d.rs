//! Phase averaging, the circle, segment and disc operators, and the
//! grid oracle `K(X) = ∫_X D(α)ΠD(α)† d²α` for arbitrary regions.
//!
//! Phase-space points are `α = q + ip` with `d²α = dq dp`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{OvmError, Result};
use crate::fock::{displaced_parity, displacement_block, function_of_momentum, FockOperator};
use crate::pti::KrausMap;
use crate::region::{ConstructionPath, RegionDescriptor, RegionOperator, Transform};
use crate::regions1d::{panel_nodes, sinc};
use crate::scalar::{cx, re, CMatrix, Real};
use crate::special::{laguerre, GaussLegendre};
use crate::C64;

/// Uniform midpoint grid over a rectangle of the phase plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub q_min: f64,
    pub q_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub nq: usize,
    pub np: usize,
}

impl Default for PhaseGrid {
    /// 200 × 200 cells over `[−6, 6]²`.
    fn default() -> Self {
        Self {
            q_min: -6.0,
            q_max: 6.0,
            p_min: -6.0,
            p_max: 6.0,
            nq: 200,
            np: 200,
        }
    }
}

impl PhaseGrid {
    pub const MIN_CELLS: usize = 32;

    pub fn new(q_min: f64, q_max: f64, p_min: f64, p_max: f64, nq: usize, np: usize) -> Result<Self> {
        let g = Self {
            q_min,
            q_max,
            p_min,
            p_max,
            nq,
            np,
        };
        g.validate()?;
        Ok(g)
    }

    /// Square grid `[−half, half]²` with `n` cells per axis.
    pub fn square(half: f64, n: usize) -> Result<Self> {
        Self::new(-half, half, -half, half, n, n)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.q_min, self.q_max, self.p_min, self.p_max].iter().all(|x| x.is_finite());
        if !finite || self.q_min >= self.q_max || self.p_min >= self.p_max {
            return Err(OvmError::InvalidGrid(format!(
                "ranges must be finite and increasing: q [{}, {}], p [{}, {}]",
                self.q_min, self.q_max, self.p_min, self.p_max
            )));
        }
        if self.nq < Self::MIN_CELLS || self.np < Self::MIN_CELLS {
            return Err(OvmError::InvalidGrid(format!(
                "{} x {} cells; at least {} per axis",
                self.nq,
                self.np,
                Self::MIN_CELLS
            )));
        }
        Ok(())
    }

    /// Parses `qmin,qmax,pmin,pmax,nq,np`.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 6 {
            return Err(OvmError::InvalidGrid(format!("expected qmin,qmax,pmin,pmax,nq,np, got '{s}'")));
        }
        let f = |x: &str| {
            x.parse::<f64>()
                .map_err(|_| OvmError::InvalidGrid(format!("bad number '{x}'")))
        };
        let n = |x: &str| {
            x.parse::<usize>()
                .map_err(|_| OvmError::InvalidGrid(format!("bad count '{x}'")))
        };
        Self::new(f(parts[0])?, f(parts[1])?, f(parts[2])?, f(parts[3])?, n(parts[4])?, n(parts[5])?)
    }

    pub fn dq(&self) -> f64 {
        (self.q_max - self.q_min) / self.nq as f64
    }

    pub fn dp(&self) -> f64 {
        (self.p_max - self.p_min) / self.np as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.dq() * self.dp()
    }

    pub fn len(&self) -> usize {
        self.nq * self.np
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Midpoint of column `i`.
    pub fn q(&self, i: usize) -> f64 {
        self.q_min + (i as f64 + 0.5) * self.dq()
    }

    /// Midpoint of row `j`.
    pub fn p(&self, j: usize) -> f64 {
        self.p_min + (j as f64 + 0.5) * self.dp()
    }

    pub fn alpha(&self, i: usize, j: usize) -> C64 {
        C64::new(self.q(i), self.p(j))
    }

    /// Row-major (`p` rows) index of cell `(i, j)`.
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nq + i
    }

    /// Cell containing `(q, p)`, if any.
    pub fn locate(&self, q: f64, p: f64) -> Option<(usize, usize)> {
        if q < self.q_min || q > self.q_max || p < self.p_min || p > self.p_max {
            return None;
        }
        let i = (((q - self.q_min) / self.dq()) as usize).min(self.nq - 1);
        let j = (((p - self.p_min) / self.dp()) as usize).min(self.np - 1);
        Some((i, j))
    }

    /// Cells `(i, j)` whose midpoints satisfy `pred`, row-major.
    pub fn cells_where(&self, pred: impl Fn(f64, f64) -> bool) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for j in 0..self.np {
            for i in 0..self.nq {
                if pred(self.q(i), self.p(j)) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Whether the grid contains the disk `|α| ≤ r`.
    pub fn covers_disk(&self, r: f64) -> bool {
        self.q_min <= -r && self.q_max >= r && self.p_min <= -r && self.p_max >= r
    }
}

/// Region of the phase plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Region2D {
    /// The ring `|α| = a/2` traced by the circle operator `K_C(a)`.
    Circle { a: f64 },
    /// The disc operator `K_D(a)`; its support is `|α| ≤ a/4`.
    Disc { a: f64 },
    /// Filled disk `|α| ≤ radius` with the area measure.
    Disk { radius: f64 },
    Rectangle { q0: f64, q1: f64, p0: f64, p1: f64 },
    /// Grid-sampled indicator; `mask` holds one `0`/`1` per cell, row-major.
    Indicator {
        grid: PhaseGrid,
        #[serde(with = "mask_string")]
        mask: Vec<bool>,
    },
    Empty,
}

mod mask_string {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(mask: &[bool], s: S) -> Result<S::Ok, S::Error> {
        let text: String = mask.iter().map(|&b| if b { '1' } else { '0' }).collect();
        s.serialize_str(&text)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<bool>, D::Error> {
        let text = String::deserialize(d)?;
        text.chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(serde::de::Error::custom(format!("mask character '{other}'"))),
            })
            .collect()
    }
}

impl Region2D {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(OvmError::InvalidRegion(m));
        match self {
            Self::Circle { a } if !(a.is_finite() && *a >= 0.0) => bad(format!("circle needs a >= 0, got {a}")),
            Self::Disc { a } if !(a.is_finite() && *a > 0.0) => bad(format!("disc needs a > 0, got {a}")),
            Self::Disk { radius } if !(radius.is_finite() && *radius > 0.0) => {
                bad(format!("disk needs radius > 0, got {radius}"))
            }
            Self::Rectangle { q0, q1, p0, p1 } if !(q0 < q1 && p0 < p1) || ![q0, q1, p0, p1].iter().all(|x| x.is_finite()) => {
                bad(format!("rectangle needs q0 < q1 and p0 < p1, got ({q0}, {q1}, {p0}, {p1})"))
            }
            Self::Indicator { grid, mask } => {
                grid.validate()?;
                if mask.len() != grid.len() {
                    return bad(format!("mask has {} cells, grid has {}", mask.len(), grid.len()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Whether the point `α = q + ip` lies in the region's area support.
    pub fn contains(&self, q: f64, p: f64) -> bool {
        match self {
            Self::Circle { .. } | Self::Empty => false,
            Self::Disc { a } => q.hypot(p) <= a / 4.0,
            Self::Disk { radius } => q.hypot(p) <= *radius,
            Self::Rectangle { q0, q1, p0, p1 } => q >= *q0 && q <= *q1 && p >= *p0 && p <= *p1,
            Self::Indicator { grid, mask } => grid.locate(q, p).map(|(i, j)| mask[grid.index(i, j)]).unwrap_or(false),
        }
    }

    /// Smallest length the oracle grid has to resolve with ten cells.
    fn smallest_feature(&self) -> Option<f64> {
        match self {
            Self::Circle { .. } | Self::Empty | Self::Indicator { .. } => None,
            Self::Disc { a } => Some(a / 2.0),
            Self::Disk { radius } => Some(2.0 * radius),
            Self::Rectangle { q0, q1, p0, p1 } => Some((q1 - q0).min(p1 - p0)),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Circle { a } => format!("circle a={a}"),
            Self::Disc { a } => format!("disc a={a}"),
            Self::Disk { radius } => format!("disk r={radius}"),
            Self::Rectangle { q0, q1, p0, p1 } => format!("rectangle q[{q0},{q1}] p[{p0},{p1}]"),
            Self::Indicator { grid, mask } => {
                format!("indicator {}x{} ({} cells set)", grid.nq, grid.np, mask.iter().filter(|&&b| b).count())
            }
            Self::Empty => "empty".into(),
        }
    }
}

/// Checks that `grid` resolves `region`, returning the cells inside it.
pub fn region_cells(region: &Region2D, grid: &PhaseGrid) -> Result<Vec<(usize, usize)>> {
    region.validate()?;
    grid.validate()?;
    if let Region2D::Circle { .. } = region {
        return Err(OvmError::InvalidRegion(
            "a circle has zero area; use the circle operator instead of the grid oracle".into(),
        ));
    }
    let cell = grid.dq().max(grid.dp());
    if let Some(feature) = region.smallest_feature() {
        if feature < 10.0 * cell * (1.0 - 1e-9) {
            return Err(OvmError::GridTooCoarse(format!(
                "smallest feature {feature} spans {:.1} cells; 10 are required",
                feature / cell
            )));
        }
    }
    if let Region2D::Indicator { grid: own, .. } = region {
        if grid.dq() > own.dq() * (1.0 + 1e-9) || grid.dp() > own.dp() * (1.0 + 1e-9) {
            return Err(OvmError::GridTooCoarse(
                "grid is coarser than the indicator's own grid".into(),
            ));
        }
    }
    Ok(grid.cells_where(|q, p| region.contains(q, p)))
}

/// `ε_{2π}(X) = ∫₀^{2π} e^{−iφN} X e^{iφN} dφ = 2π Σ X_nn |n⟩⟨n|`.
pub fn phase_average<T: Real>(x: &FockOperator<T>) -> FockOperator<T> {
    let two_pi = T::two_pi();
    FockOperator::from_diagonal(x.diagonal().into_iter().map(|z| z * two_pi))
}

/// Trapezoid rule of the phase average with `nodes` angles.
pub fn phase_average_quadrature<T: Real>(x: &FockOperator<T>, nodes: usize) -> Result<FockOperator<T>> {
    KrausMap::phase_averaging(x.dim(), nodes)?.apply(x)
}

/// `K_C(a) = 2πΠ Σ e^{−a²/2} L_n(a²) |n⟩⟨n|`.
pub fn circle_ovm<T: Real>(a: f64, dim: usize) -> Result<RegionOperator<T>> {
    let region = Region2D::Circle { a };
    region.validate()?;
    let x = T::lit(a * a);
    let g = (-x / T::lit(2.0)).exp() * T::two_pi();
    let op = FockOperator::from_diagonal((0..dim).map(|n| {
        let sign = if n % 2 == 0 { T::one() } else { -T::one() };
        re(sign * g * laguerre(n, x))
    }));
    Ok(RegionOperator::new(op, RegionDescriptor::plane(region), ConstructionPath::Analytic))
}

/// `ε_{2π}(Π e^{2iaP})` with `e^{2iaP}` from the truncated momentum
/// spectrum; the numerical route to the circle operator.
pub fn circle_ovm_phase_averaged<T: Real>(a: f64, dim: usize) -> Result<RegionOperator<T>> {
    let region = Region2D::Circle { a };
    region.validate()?;
    let two_a = T::lit(2.0 * a);
    let shifted = function_of_momentum::<T>(dim, |p| crate::scalar::cis(two_a * p)).parity_times();
    let mut out = RegionOperator::new(phase_average(&shifted), RegionDescriptor::plane(region), ConstructionPath::Smeared);
    out.transforms.push(Transform::PhaseAverage);
    Ok(out)
}

/// Segment operator `K_L(a) = sin(Pa)/P Π = ∫_{−a/2}^{a/2} e^{2ixP} dx Π`.
///
/// This is half the interval operator of `[−a, a]` on the `e^{iqP}` axis.
pub fn segment_ovm<T: Real>(a: f64, dim: usize) -> Result<RegionOperator<T>> {
    if !(a.is_finite() && a > 0.0) {
        return Err(OvmError::InvalidRegion(format!("segment needs a > 0, got {a}")));
    }
    let aa = T::lit(a);
    let op = function_of_momentum::<T>(dim, |p| re(aa * sinc(p * aa))).times_parity();
    let region = crate::regions1d::CharacteristicFunction1D::interval(-a, a)?;
    Ok(RegionOperator::new(op, RegionDescriptor::line(region), ConstructionPath::Analytic))
}

/// Gauss–Legendre evaluation of `∫_{−a/2}^{a/2} e^{2ixP} dx Π` with
/// `e^{2ixP} = D(−x)` from exact matrix elements.
pub fn segment_ovm_quadrature<T: Real>(a: f64, dim: usize, points: usize) -> Result<RegionOperator<T>> {
    if !(a.is_finite() && a > 0.0) {
        return Err(OvmError::InvalidRegion(format!("segment needs a > 0, got {a}")));
    }
    if points < 8 {
        return Err(OvmError::InvalidQuadrature(format!("{points} points; at least 8 are required")));
    }
    let nodes = panel_nodes(-a / 2.0, a / 2.0, points)?;
    let m = nodes
        .par_iter()
        .map(|&(x, w)| displacement_block::<T>(cx(T::lit(-x), T::zero()), dim, dim) * re(T::lit(w)))
        .reduce(|| CMatrix::<T>::zeros(dim, dim), |a, b| a + b);
    let region = crate::regions1d::CharacteristicFunction1D::interval(-a, a)?;
    Ok(RegionOperator::new(
        FockOperator::new(m)?.times_parity(),
        RegionDescriptor::line(region),
        ConstructionPath::Smeared,
    ))
}

/// `K_D(a) = 2πΠ Σ (∫_{−a/2}^{a/2} e^{−x²/2} L_n(x²) dx) |n⟩⟨n|`.
pub fn disc_ovm<T: Real>(a: f64, dim: usize, quadrature_points: usize) -> Result<RegionOperator<T>> {
    let region = Region2D::Disc { a };
    region.validate()?;
    if quadrature_points < 16 {
        return Err(OvmError::InvalidQuadrature(format!(
            "{quadrature_points} points; the disc needs at least 16"
        )));
    }
    let gl = GaussLegendre::<T>::new(quadrature_points)?;
    let half = T::lit(a / 2.0);
    let two_pi = T::two_pi();
    let op = FockOperator::from_diagonal((0..dim).map(|n| {
        let v = gl.integrate(-half, half, |x| (-x * x / T::lit(2.0)).exp() * laguerre(n, x * x));
        let sign = if n % 2 == 0 { T::one() } else { -T::one() };
        re(sign * two_pi * v)
    }));
    Ok(RegionOperator::new(op, RegionDescriptor::plane(region), ConstructionPath::Analytic))
}

/// `K(X) ≈ Σ_{cells in X} D(2α)Π dq dp`, the midpoint rule of
/// `∫_X D(α)ΠD(α)† d²α` with exact point operators.
pub fn region_ovm_oracle<T: Real>(region: &Region2D, dim: usize, grid: &PhaseGrid) -> Result<RegionOperator<T>> {
    let cells = region_cells(region, grid)?;
    let reliable = (dim as f64).sqrt();
    if !grid.covers_disk(reliable) {
        log::warn!("grid does not cover the reliable disk |alpha| <= {reliable:.3} of dim {dim}");
    }
    let area = T::lit(grid.cell_area());
    let m = cells
        .par_iter()
        .map(|&(i, j)| {
            let a = grid.alpha(i, j);
            displaced_parity::<T>(cx(T::lit(a.re), T::lit(a.im)), dim).into_matrix()
        })
        .reduce(|| CMatrix::<T>::zeros(dim, dim), |a, b| a + b);
    let op = FockOperator::new(m * re(area))?;
    Ok(RegionOperator::new(op, RegionDescriptor::plane(region.clone()), ConstructionPath::Oracle))
}

/// The rotated-segment disc operator next to the area-measure operator of the same
/// disk, whose difference is the missing radial Jacobian.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscComparison {
    pub a: f64,
    pub support_radius: f64,
    /// Diagonal of `K_D(a)`.
    pub rotated_segment: Vec<f64>,
    /// Diagonal of the oracle `∫_{|α| ≤ a/4} D(α)ΠD(α)† d²α`.
    pub area_measure: Vec<f64>,
    pub max_difference: f64,
}

pub fn compare_disc_forms(a: f64, dim: usize, grid: &PhaseGrid, quadrature_points: usize) -> Result<DiscComparison> {
    let disc = disc_ovm::<f64>(a, dim, quadrature_points)?;
    let area = region_ovm_oracle::<f64>(&Region2D::Disk { radius: a / 4.0 }, dim, grid)?;
    let rotated_segment: Vec<f64> = disc.op.diagonal().iter().map(|z| z.re).collect();
    let area_measure: Vec<f64> = area.op.diagonal().iter().map(|z| z.re).collect();
    let max_difference = rotated_segment
        .iter()
        .zip(&area_measure)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    Ok(DiscComparison {
        a,
        support_radius: a / 4.0,
        rotated_segment,
        area_measure,
        max_difference,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn grid_parsing_and_geometry() {
        let g = PhaseGrid::parse("-6,6,-6,6,200,200").unwrap();
        assert_eq!(g, PhaseGrid::default());
        assert!((g.cell_area() - 0.0036).abs() < 1e-15);
        assert!(PhaseGrid::parse("-6,6,-6,6,10,200").is_err());
        assert!(PhaseGrid::parse("6,-6,-6,6,200,200").is_err());
        assert!(PhaseGrid::parse("1,2,3").is_err());
        assert_eq!(g.locate(-6.0, -6.0), Some((0, 0)));
        assert_eq!(g.locate(6.0, 6.0), Some((199, 199)));
        assert_eq!(g.locate(7.0, 0.0), None);
    }

    #[test]
    fn phase_average_examples() {
        let d = FockOperator::<f64>::from_diagonal((0..5).map(|n| re(n as f64)));
        let avg = phase_average(&d);
        assert!(avg.max_abs_diff_block(&d.scale(re(2.0 * PI)), 5) < 1e-14);
        let mut m = CMatrix::<f64>::zeros(5, 5);
        m[(0, 1)] = re(1.0);
        let x = FockOperator::new(m).unwrap();
        assert_eq!(phase_average(&x).max_abs(), 0.0);
        let q = phase_average_quadrature(&x, 256).unwrap();
        assert!(q.max_abs() < 1e-10);
    }

    #[test]
    fn circle_examples() {
        let c = circle_ovm::<f64>(0.0, 6).unwrap();
        for n in 0..6 {
            let expect = if n % 2 == 0 { 2.0 * PI } else { -2.0 * PI };
            assert!((c.op.get(n, n).re - expect).abs() < 1e-14);
        }
        let c = circle_ovm::<f64>(1.0, 6).unwrap();
        assert!((c.op.get(0, 0).re - 2.0 * PI * (-0.5f64).exp()).abs() < 1e-14);
        assert!(circle_ovm::<f64>(-1.0, 6).is_err());
    }

    #[test]
    fn disc_small_a_limit() {
        let a = 1e-4;
        let d = disc_ovm::<f64>(a, 8, 32).unwrap();
        for n in 0..8 {
            let expect = if n % 2 == 0 { 2.0 * PI } else { -2.0 * PI };
            assert!((d.op.get(n, n).re / a - expect).abs() < 1e-6);
        }
        assert!(disc_ovm::<f64>(1.0, 8, 15).is_err());
        let d = disc_ovm::<f64>(1.0, 8, 64).unwrap();
        let gl = GaussLegendre::<f64>::new(64).unwrap();
        let n0 = 2.0 * PI * gl.integrate(-0.5, 0.5, |x| (-x * x / 2.0).exp());
        assert!((d.op.get(0, 0).re - n0).abs() < 1e-14);
    }

    #[test]
    fn oracle_refuses_bad_regions() {
        let g = PhaseGrid::default();
        assert!(matches!(
            region_ovm_oracle::<f64>(&Region2D::Circle { a: 1.0 }, 8, &g),
            Err(OvmError::InvalidRegion(_))
        ));
        let tiny = Region2D::Rectangle {
            q0: 0.0,
            q1: 0.1,
            p0: 0.0,
            p1: 0.1,
        };
        assert!(matches!(region_ovm_oracle::<f64>(&tiny, 8, &g), Err(OvmError::GridTooCoarse(_))));
        let e = region_ovm_oracle::<f64>(&Region2D::Empty, 8, &g).unwrap();
        assert_eq!(e.op.max_abs(), 0.0);
    }

    #[test]
    fn indicator_mask_json() {
        let grid = PhaseGrid::square(1.0, 32).unwrap();
        let mut mask = vec![false; grid.len()];
        mask[grid.index(3, 4)] = true;
        let r = Region2D::Indicator { grid, mask };
        let s = serde_json::to_string(&r).unwrap();
        let back: Region2D = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
        assert!(r.contains(grid.q(3), grid.p(4)));
        assert!(!r.contains(grid.q(4), grid.p(4)));
    }
}
