use std::fs::File;
use std::io::{BufWriter, Write};

use phase_ovm::export::{
    write_field_csv, write_field_json, write_field_raster, write_operator_binary, write_operator_csv, OperatorDump,
    Provenance,
};
use phase_ovm::oracle::{verify_target, TargetParams};
use phase_ovm::quasiprob::{ordering_label, quasi_field, quasiprob_mass};
use phase_ovm::regions1d::{
    build_region_operator_1d, build_region_operator_smeared, rotate_operator, shift_operator, squeeze_operator,
};
use phase_ovm::regions2d::{
    circle_ovm, circle_ovm_phase_averaged, disc_ovm, region_ovm_oracle, segment_ovm, segment_ovm_quadrature,
};
use phase_ovm::{
    ConstructionPath, PhaseGrid, Region2D, RegionDescriptor, RegionOperator, ShiftMode, VerifyTarget, WignerConvention,
};

use crate::parse::{parse_region, parse_state, RegionSpec};
use crate::{BuildArgs, Failure, FieldArgs, Format, MassArgs, Output, PathArg, ShiftArg, VerifyArgs};

const HERMITIAN_TOL: f64 = 1e-10;

fn grid(s: &Option<String>) -> Result<PhaseGrid, Failure> {
    Ok(match s {
        Some(g) => PhaseGrid::parse(g)?,
        None => PhaseGrid::default(),
    })
}

fn convention(s: &str) -> Result<WignerConvention, Failure> {
    Ok(s.parse::<WignerConvention>()?)
}

/// Runs `body` against the output file or standard output.
fn emit(out: &Output, binary: bool, body: impl FnOnce(&mut dyn Write) -> phase_ovm::Result<()>) -> Result<(), Failure> {
    match &out.output {
        Some(path) => {
            let f = File::create(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
            let mut w = BufWriter::new(f);
            body(&mut w)?;
            w.flush().map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
            log::info!("wrote {}", path.display());
            Ok(())
        }
        None if binary => Err(Failure::usage("binary output needs --output")),
        None => {
            let stdout = std::io::stdout();
            let mut w = stdout.lock();
            match body(&mut w) {
                // Reader went away, e.g. `| head`.
                Err(phase_ovm::OvmError::Io(m)) if m.contains("Broken pipe") => Ok(()),
                r => Ok(r?),
            }
        }
    }
}

fn write_json(out: &Output, v: &serde_json::Value) -> Result<(), Failure> {
    emit(out, false, |w| {
        serde_json::to_writer_pretty(&mut *w, v).map_err(|e| phase_ovm::OvmError::Io(e.to_string()))?;
        writeln!(w).map_err(phase_ovm::OvmError::from)
    })
}

fn plane(spec: &RegionSpec) -> Option<&Region2D> {
    match spec {
        RegionSpec::Descriptor(RegionDescriptor::Plane(r)) => Some(r),
        _ => None,
    }
}

fn construct(a: &BuildArgs, spec: &RegionSpec, g: &PhaseGrid) -> Result<RegionOperator<f64>, Failure> {
    let (dim, pts) = (a.dim, a.quadrature);
    let refuse = |what: &str| Err(Failure::usage(format!("{what} has no {:?} construction", a.path.unwrap())));
    let k = match spec {
        RegionSpec::Segment { a: len } => match a.path.unwrap_or(PathArg::Analytic) {
            PathArg::Analytic => segment_ovm(*len, dim)?,
            PathArg::Smeared => segment_ovm_quadrature(*len, dim, pts)?,
            PathArg::Oracle => return refuse("segment"),
        },
        RegionSpec::Descriptor(RegionDescriptor::Line(c)) => match a.path.unwrap_or(PathArg::Analytic) {
            PathArg::Analytic => build_region_operator_1d(c, dim)?,
            PathArg::Smeared => build_region_operator_smeared(c, dim, pts)?,
            PathArg::Oracle => return refuse("a 1D region"),
        },
        RegionSpec::Descriptor(RegionDescriptor::Plane(r)) => match (r, a.path) {
            (Region2D::Circle { a: radius }, None | Some(PathArg::Analytic)) => circle_ovm(*radius, dim)?,
            (Region2D::Circle { a: radius }, Some(PathArg::Smeared)) => circle_ovm_phase_averaged(*radius, dim)?,
            (Region2D::Disc { a: radius }, None | Some(PathArg::Analytic | PathArg::Smeared)) => {
                disc_ovm(*radius, dim, pts)?
            }
            (_, None | Some(PathArg::Oracle)) => region_ovm_oracle(r, dim, g)?,
            _ => return refuse("this area region"),
        },
    };
    let mut k = k;
    if let Some(theta) = a.theta {
        k = rotate_operator(&k, theta);
    }
    if let Some(c) = a.c {
        let mode = match a.shift_mode {
            ShiftArg::Left => ShiftMode::Left,
            ShiftArg::Right => ShiftMode::Right,
            ShiftArg::Conjugate => ShiftMode::Conjugate,
        };
        k = shift_operator(&k, c, mode);
    }
    if let Some(r) = a.r {
        k = squeeze_operator(&k, r)?;
    }
    Ok(k)
}

pub fn build(a: BuildArgs) -> Result<u8, Failure> {
    let spec = parse_region(&a.region)?;
    let g = grid(&a.grid)?;
    let k = construct(&a, &spec, &g)?;
    let mut prov = Provenance::new(Some(a.dim))
        .path(k.path)
        .tolerance("hermitian", HERMITIAN_TOL)
        .extra("region", spec.label())
        .extra("transforms", serde_json::to_value(&k.transforms).expect("json"));
    if k.path == ConstructionPath::Oracle {
        prov = prov.grid(g);
    }
    if matches!(k.path, ConstructionPath::Smeared) || matches!(plane(&spec), Some(Region2D::Disc { .. })) {
        prov = prov.extra("quadrature_points", a.quadrature);
    }
    match a.format {
        Format::Json => {
            let dump = OperatorDump::new(&k.op, spec.to_json(), &prov, HERMITIAN_TOL);
            emit(&a.out, false, |w| {
                writeln!(w, "{}", dump.to_json()).map_err(phase_ovm::OvmError::from)
            })?
        }
        Format::Csv => emit(&a.out, false, |w| write_operator_csv(&k.op, &prov, w))?,
        Format::Bin => emit(&a.out, true, |w| write_operator_binary(&k.op, &prov, w))?,
    }
    Ok(0)
}

pub fn mass(a: MassArgs) -> Result<u8, Failure> {
    let spec = parse_region(&a.region)?;
    let region = plane(&spec).ok_or_else(|| Failure::usage("mass needs a phase-plane region"))?;
    let g = grid(&a.grid)?;
    let conv = convention(&a.convention)?;
    let state = parse_state(&a.state, a.dim)?;
    let field_mass = quasiprob_mass(&state, region, &g, a.s, conv)?;
    // The operator route exists for the Wigner kernel only.
    let trace = if a.s == 0.0 {
        let k = region_ovm_oracle::<f64>(region, a.dim, &g)?;
        Some(state.expectation(&k.op)?.re * conv.prefactor())
    } else {
        None
    };
    let prov = Provenance::new(Some(a.dim))
        .grid(g)
        .path(ConstructionPath::Oracle)
        .extra("state", a.state.clone());
    let report = serde_json::json!({
        "provenance": prov.to_value(),
        "region": spec.to_json(),
        "state": a.state,
        "s": a.s,
        "ordering": ordering_label(a.s),
        "convention": conv.name(),
        "field_mass": field_mass,
        "operator_trace": trace,
        "deviation": trace.map(|t| (t - field_mass).abs()),
    });
    write_json(&a.out, &report)?;
    Ok(0)
}

pub fn verify(a: VerifyArgs) -> Result<u8, Failure> {
    let target: VerifyTarget = a.target.parse()?;
    if let Some(d) = a.dim {
        let lo = match target {
            VerifyTarget::Dilation | VerifyTarget::ParitySum => 4,
            _ => 8,
        };
        if !(lo..=256).contains(&d) {
            return Err(Failure::usage(format!("dim must lie in [{lo}, 256], got {d}")));
        }
    }
    let params = TargetParams {
        dim: a.dim,
        a: a.a,
        a0: a.a0,
        b: a.b,
        l: a.l,
        n: a.n,
        theta: a.theta,
        c: a.c,
        r: a.r,
        seed: a.seed,
        draws: a.draws,
        tolerance: a.tolerance,
        quadrature_points: a.quadrature,
    };
    let report = verify_target(target, &params)?;
    let prov = Provenance::new(Some(a.dim.unwrap_or(target.default_dim()))).tolerance("verify", report.tolerance);
    let mut v = serde_json::to_value(&report).expect("json");
    v["provenance"] = prov.to_value();
    write_json(&a.out, &v)?;
    if let Some(e) = &report.error {
        eprintln!("phase-ovm: {e}");
    }
    Ok(if report.pass { 0 } else { crate::NUMERICAL })
}

pub fn field(a: FieldArgs) -> Result<u8, Failure> {
    let g = grid(&a.grid)?;
    let conv = convention(&a.convention)?;
    let state = parse_state(&a.state, a.dim)?;
    let mut f = quasi_field(&state, &g, a.s, conv)?;
    f.state = a.state.clone();
    let prov = Provenance::new(Some(a.dim)).tolerance("leakage", 1e-10);
    match a.format {
        Format::Csv => emit(&a.out, false, |w| write_field_csv(&f, &prov, w))?,
        Format::Json => emit(&a.out, false, |w| write_field_json(&f, &prov, w))?,
        Format::Bin => emit(&a.out, true, |w| write_field_raster(&f, &prov, w))?,
    }
    Ok(0)
}
