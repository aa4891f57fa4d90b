//! File formats: provenance headers, quasi-probability rasters (CSV and
//! binary), operator dumps and indicator grid files.
//!
//! Binary raster, little-endian:
//!
//! ```text
//! b"POVMRAST"  u32 version=1  u32 nq  u32 np
//! f64 q_min  f64 q_max  f64 p_min  f64 p_max  f64 s  u32 convention (0 bare, 1 two_over_pi)
//! u32 n  n bytes of provenance JSON
//! nq*np f64 values, row-major with p rows
//! ```
//!
//! Binary operator: `b"POVMOPER"`, `u32` version, `u32` dim, provenance as
//! above, then `dim²` pairs `(re, im)` of `f64` in row-major order.
//!
//! Indicator grid file: the line `PHASE-OVM-INDICATOR 1`, the line
//! `qmin qmax pmin pmax nq np`, then `nq*np` bytes, `0` or `1` (raw or
//! ASCII digits), row-major with `p` rows.

use std::collections::BTreeMap;
use std::io::{BufRead, Read, Write};

use serde::Serialize;
use serde_json::Value;

use crate::error::{OvmError, Result};
use crate::fock::{ConventionTag, FockOperator, CONVENTIONS};
use crate::quasiprob::{QuasiField, WignerConvention};
use crate::region::ConstructionPath;
use crate::regions2d::{PhaseGrid, Region2D};

pub const RASTER_MAGIC: &[u8; 8] = b"POVMRAST";
pub const OPERATOR_MAGIC: &[u8; 8] = b"POVMOPER";
pub const INDICATOR_HEADER: &str = "PHASE-OVM-INDICATOR 1";
const FORMAT_VERSION: u32 = 1;

fn io(e: std::io::Error) -> OvmError {
    OvmError::Io(e.to_string())
}

/// Context written at the top of every output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub conventions: ConventionTag,
    pub dim: Option<usize>,
    pub grid: Option<PhaseGrid>,
    pub tolerances: BTreeMap<String, f64>,
    pub path: Option<ConstructionPath>,
    pub extra: BTreeMap<String, Value>,
}

impl Provenance {
    pub fn new(dim: Option<usize>) -> Self {
        Self {
            tool: "phase-ovm",
            version: env!("CARGO_PKG_VERSION"),
            conventions: CONVENTIONS,
            dim,
            grid: None,
            tolerances: BTreeMap::new(),
            path: None,
            extra: BTreeMap::new(),
        }
    }

    pub fn grid(mut self, g: PhaseGrid) -> Self {
        self.grid = Some(g);
        self
    }

    pub fn path(mut self, p: ConstructionPath) -> Self {
        self.path = Some(p);
        self
    }

    pub fn tolerance(mut self, name: &str, v: f64) -> Self {
        self.tolerances.insert(name.into(), v);
        self
    }

    pub fn extra(mut self, key: &str, v: impl Into<Value>) -> Self {
        self.extra.insert(key.into(), v.into());
        self
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("provenance serializes")
    }
}

/// Field provenance: the given context plus the field's own parameters.
fn field_provenance(field: &QuasiField, prov: &Provenance) -> Provenance {
    let mut p = prov.clone().grid(field.grid);
    p.dim = Some(field.dim);
    p.extra("s", field.s)
        .extra("convention", field.convention.name())
        .extra("ordering", field.ordering)
        .extra("state", field.state.clone())
        .extra("max_leakage", field.max_leakage)
}

/// One JSON document `{provenance, field}`.
pub fn write_field_json<W: Write>(field: &QuasiField, prov: &Provenance, mut w: W) -> Result<()> {
    let doc = serde_json::json!({ "provenance": field_provenance(field, prov).to_value(), "field": field });
    serde_json::to_writer_pretty(&mut w, &doc).map_err(|e| OvmError::Io(e.to_string()))?;
    writeln!(w).map_err(io)
}

/// `# {provenance}` then `q,p,value` rows in raster order.
pub fn write_field_csv<W: Write>(field: &QuasiField, prov: &Provenance, mut w: W) -> Result<()> {
    let header = serde_json::to_string(&field_provenance(field, prov).to_value()).expect("json");
    writeln!(w, "# {header}").map_err(io)?;
    writeln!(w, "q,p,value").map_err(io)?;
    let g = &field.grid;
    for j in 0..g.np {
        for i in 0..g.nq {
            writeln!(w, "{},{},{}", g.q(i), g.p(j), field.value(i, j)).map_err(io)?;
        }
    }
    Ok(())
}

fn put_u32<W: Write>(w: &mut W, x: u32) -> Result<()> {
    w.write_all(&x.to_le_bytes()).map_err(io)
}

fn put_f64<W: Write>(w: &mut W, x: f64) -> Result<()> {
    w.write_all(&x.to_le_bytes()).map_err(io)
}

fn get_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(io)?;
    Ok(u32::from_le_bytes(b))
}

fn get_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(io)?;
    Ok(f64::from_le_bytes(b))
}

fn put_json<W: Write>(w: &mut W, v: &Value) -> Result<()> {
    let bytes = serde_json::to_vec(v).expect("json");
    put_u32(w, bytes.len() as u32)?;
    w.write_all(&bytes).map_err(io)
}

fn get_json<R: Read>(r: &mut R) -> Result<Value> {
    let n = get_u32(r)? as usize;
    let mut bytes = vec![0u8; n];
    r.read_exact(&mut bytes).map_err(io)?;
    serde_json::from_slice(&bytes).map_err(|e| OvmError::Io(format!("bad provenance: {e}")))
}

fn check_magic<R: Read>(r: &mut R, magic: &[u8; 8]) -> Result<()> {
    let mut m = [0u8; 8];
    r.read_exact(&mut m).map_err(io)?;
    if &m != magic {
        return Err(OvmError::Io(format!("bad magic {:?}", String::from_utf8_lossy(&m))));
    }
    let v = get_u32(r)?;
    if v != FORMAT_VERSION {
        return Err(OvmError::Io(format!("unsupported format version {v}")));
    }
    Ok(())
}

pub fn write_field_raster<W: Write>(field: &QuasiField, prov: &Provenance, mut w: W) -> Result<()> {
    let g = &field.grid;
    w.write_all(RASTER_MAGIC).map_err(io)?;
    put_u32(&mut w, FORMAT_VERSION)?;
    put_u32(&mut w, g.nq as u32)?;
    put_u32(&mut w, g.np as u32)?;
    for x in [g.q_min, g.q_max, g.p_min, g.p_max, field.s] {
        put_f64(&mut w, x)?;
    }
    put_u32(
        &mut w,
        match field.convention {
            WignerConvention::Bare => 0,
            WignerConvention::TwoOverPi => 1,
        },
    )?;
    put_json(&mut w, &field_provenance(field, prov).to_value())?;
    for &v in &field.values {
        put_f64(&mut w, v)?;
    }
    w.flush().map_err(io)
}

/// Contents of a binary raster.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub grid: PhaseGrid,
    pub s: f64,
    pub convention: WignerConvention,
    pub provenance: Value,
    pub values: Vec<f64>,
}

pub fn read_field_raster<R: Read>(mut r: R) -> Result<Raster> {
    check_magic(&mut r, RASTER_MAGIC)?;
    let nq = get_u32(&mut r)? as usize;
    let np = get_u32(&mut r)? as usize;
    let q_min = get_f64(&mut r)?;
    let q_max = get_f64(&mut r)?;
    let p_min = get_f64(&mut r)?;
    let p_max = get_f64(&mut r)?;
    let s = get_f64(&mut r)?;
    let convention = match get_u32(&mut r)? {
        0 => WignerConvention::Bare,
        1 => WignerConvention::TwoOverPi,
        c => return Err(OvmError::Io(format!("unknown convention code {c}"))),
    };
    let provenance = get_json(&mut r)?;
    let grid = PhaseGrid::new(q_min, q_max, p_min, p_max, nq, np)?;
    let mut values = Vec::with_capacity(grid.len());
    for _ in 0..grid.len() {
        values.push(get_f64(&mut r)?);
    }
    Ok(Raster {
        grid,
        s,
        convention,
        provenance,
        values,
    })
}

/// An operator with its checks, as written by `build`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatorDump {
    pub provenance: Value,
    pub region: Value,
    pub dim: usize,
    pub hermitian: bool,
    pub hermiticity_defect: f64,
    pub parity_commutator: f64,
    /// Sorted eigenvalues, present for Hermitian operators.
    pub eigenvalues: Option<Vec<f64>>,
    pub diagonal: Vec<[f64; 2]>,
    /// Rows of `[re, im]` pairs.
    pub matrix: Vec<Vec<[f64; 2]>>,
}

impl OperatorDump {
    pub fn new(op: &FockOperator<f64>, region: Value, prov: &Provenance, hermitian_tol: f64) -> Self {
        let dim = op.dim();
        let defect = op.hermiticity_defect();
        let hermitian = defect <= hermitian_tol;
        let parity_commutator = (&op.times_parity() - &op.parity_times()).max_abs();
        let matrix = (0..dim)
            .map(|r| (0..dim).map(|c| [op.get(r, c).re, op.get(r, c).im]).collect())
            .collect();
        Self {
            provenance: prov.to_value(),
            region,
            dim,
            hermitian,
            hermiticity_defect: defect,
            parity_commutator,
            eigenvalues: hermitian.then(|| op.hermitian_eigenvalues()),
            diagonal: op.diagonal().iter().map(|z| [z.re, z.im]).collect(),
            matrix,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("json")
    }
}

pub fn write_operator_binary<W: Write>(op: &FockOperator<f64>, prov: &Provenance, mut w: W) -> Result<()> {
    w.write_all(OPERATOR_MAGIC).map_err(io)?;
    put_u32(&mut w, FORMAT_VERSION)?;
    put_u32(&mut w, op.dim() as u32)?;
    put_json(&mut w, &prov.to_value())?;
    for r in 0..op.dim() {
        for c in 0..op.dim() {
            let z = op.get(r, c);
            put_f64(&mut w, z.re)?;
            put_f64(&mut w, z.im)?;
        }
    }
    w.flush().map_err(io)
}

pub fn read_operator_binary<R: Read>(mut r: R) -> Result<(FockOperator<f64>, Value)> {
    check_magic(&mut r, OPERATOR_MAGIC)?;
    let dim = get_u32(&mut r)? as usize;
    let prov = get_json(&mut r)?;
    let mut m = FockOperator::<f64>::zeros(dim).into_matrix();
    for row in 0..dim {
        for col in 0..dim {
            let re = get_f64(&mut r)?;
            let im = get_f64(&mut r)?;
            m[(row, col)] = crate::C64::new(re, im);
        }
    }
    Ok((FockOperator::new(m)?, prov))
}

/// `# {provenance}` then `row,col,re,im` for the nonzero entries.
pub fn write_operator_csv<W: Write>(op: &FockOperator<f64>, prov: &Provenance, mut w: W) -> Result<()> {
    let header = serde_json::to_string(&prov.to_value()).expect("json");
    writeln!(w, "# {header}").map_err(io)?;
    writeln!(w, "row,col,re,im").map_err(io)?;
    for r in 0..op.dim() {
        for c in 0..op.dim() {
            let z = op.get(r, c);
            if z.re != 0.0 || z.im != 0.0 {
                writeln!(w, "{r},{c},{},{}", z.re, z.im).map_err(io)?;
            }
        }
    }
    Ok(())
}

/// Writes an indicator region's grid and mask.
pub fn write_indicator<W: Write>(grid: &PhaseGrid, mask: &[bool], mut w: W) -> Result<()> {
    if mask.len() != grid.len() {
        return Err(OvmError::InvalidRegion(format!("mask has {} cells, grid has {}", mask.len(), grid.len())));
    }
    writeln!(w, "{INDICATOR_HEADER}").map_err(io)?;
    writeln!(
        w,
        "{} {} {} {} {} {}",
        grid.q_min, grid.q_max, grid.p_min, grid.p_max, grid.nq, grid.np
    )
    .map_err(io)?;
    let body: Vec<u8> = mask.iter().map(|&b| b as u8).collect();
    w.write_all(&body).map_err(io)?;
    w.flush().map_err(io)
}

/// Reads an indicator grid file into an [`Region2D::Indicator`].
pub fn read_indicator<R: BufRead>(mut r: R) -> Result<Region2D> {
    let mut line = String::new();
    r.read_line(&mut line).map_err(io)?;
    if line.trim_end() != INDICATOR_HEADER {
        return Err(OvmError::InvalidRegion(format!("not an indicator file: header '{}'", line.trim_end())));
    }
    line.clear();
    r.read_line(&mut line).map_err(io)?;
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() != 6 {
        return Err(OvmError::InvalidRegion("indicator ranges line needs 6 fields".into()));
    }
    let grid = PhaseGrid::parse(&fields.join(","))?;
    let mut body = Vec::new();
    r.read_to_end(&mut body).map_err(io)?;
    // Trailing whitespace after an ASCII body is tolerated.
    while body.len() > grid.len() && body.last().is_some_and(|b| b.is_ascii_whitespace()) {
        body.pop();
    }
    if body.len() != grid.len() {
        return Err(OvmError::InvalidRegion(format!(
            "indicator body has {} bytes, grid has {} cells",
            body.len(),
            grid.len()
        )));
    }
    let mask = body
        .iter()
        .map(|&b| match b {
            0 | b'0' => Ok(false),
            1 | b'1' => Ok(true),
            other => Err(OvmError::InvalidRegion(format!("indicator byte {other}"))),
        })
        .collect::<Result<Vec<bool>>>()?;
    let region = Region2D::Indicator { grid, mask };
    region.validate()?;
    Ok(region)
}

/// Samples `region` on `grid` into an indicator.
pub fn rasterize(region: &Region2D, grid: &PhaseGrid) -> Result<Region2D> {
    region.validate()?;
    grid.validate()?;
    let mut mask = vec![false; grid.len()];
    for (i, j) in grid.cells_where(|q, p| region.contains(q, p)) {
        mask[grid.index(i, j)] = true;
    }
    Ok(Region2D::Indicator { grid: *grid, mask })
}
