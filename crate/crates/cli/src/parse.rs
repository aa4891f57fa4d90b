//! Region and state descriptors as written on the command line.
//!
//! Regions: `circle:a=1`, `disc:a=1`, `segment:a=2`, `interval:-1,1`,
//! `union:-2,-1,0.5,1`, `fourier:a0=1,a=1;0.5,b=0;0,L=3`, `integers:n=3`,
//! `disk:r=2`, `rect:q0,q1,p0,p1`, `empty`, inline JSON, or `@file` holding
//! JSON or an indicator grid.
//!
//! States: `vacuum`, `fock:n`, `coherent:re,im`, `squeezed:r`,
//! `coeffs:c0,c1,...` with complex entries such as `0.6+0.8i`.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader};

use phase_ovm::export::{read_indicator, INDICATOR_HEADER};
use phase_ovm::{CharacteristicFunction1D, OvmError, QuantumState, Region2D, RegionDescriptor, Result, C64};

/// A region as given; the 2D operator forms with dedicated constructors keep
/// their own variants.
#[derive(Debug, Clone, PartialEq)]
pub enum RegionSpec {
    Descriptor(RegionDescriptor),
    Segment { a: f64 },
}

impl RegionSpec {
    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Self::Descriptor(d) => serde_json::from_str(&d.to_json()).expect("descriptor JSON"),
            Self::Segment { a } => serde_json::json!({ "type": "segment", "a": a }),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Descriptor(d) => d.label(),
            Self::Segment { a } => format!("segment a={a}"),
        }
    }
}

fn bad(msg: impl Into<String>) -> OvmError {
    OvmError::Parameter(msg.into())
}

fn number(s: &str, what: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| bad(format!("{what}: '{s}' is not a number")))
}

fn numbers(s: &str, sep: char, what: &str) -> Result<Vec<f64>> {
    s.split(sep).filter(|t| !t.trim().is_empty()).map(|t| number(t, what)).collect()
}

/// `k=v,k=v` into a map; list values use `;`.
fn keyed(body: &str, kind: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for part in body.split(',').filter(|p| !p.trim().is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| bad(format!("{kind}: expected key=value, got '{part}'")))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

fn take(map: &BTreeMap<String, String>, key: &str, kind: &str) -> Result<f64> {
    let v = map.get(key).ok_or_else(|| bad(format!("{kind}: missing {key}=")))?;
    number(v, &format!("{kind} {key}"))
}

fn only_keys(map: &BTreeMap<String, String>, allowed: &[&str], kind: &str) -> Result<()> {
    match map.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(bad(format!("{kind}: unknown key '{k}'"))),
        None => Ok(()),
    }
}

pub fn parse_region(s: &str) -> Result<RegionSpec> {
    let s = s.trim();
    if let Some(path) = s.strip_prefix('@') {
        return region_file(path);
    }
    if s.starts_with('{') {
        return Ok(RegionSpec::Descriptor(RegionDescriptor::from_json(s)?));
    }
    let (kind, body) = s.split_once(':').unwrap_or((s, ""));
    let line = |c: CharacteristicFunction1D| Ok(RegionSpec::Descriptor(RegionDescriptor::line(c)));
    let plane = |r: Region2D| -> Result<RegionSpec> {
        r.validate()?;
        Ok(RegionSpec::Descriptor(RegionDescriptor::plane(r)))
    };
    match kind {
        "circle" | "disc" | "segment" => {
            let map = keyed(body, kind)?;
            only_keys(&map, &["a"], kind)?;
            let a = take(&map, "a", kind)?;
            match kind {
                "circle" => plane(Region2D::Circle { a }),
                "disc" => plane(Region2D::Disc { a }),
                _ => {
                    if !(a.is_finite() && a > 0.0) {
                        return Err(OvmError::InvalidRegion(format!("segment needs a > 0, got {a}")));
                    }
                    Ok(RegionSpec::Segment { a })
                }
            }
        }
        "interval" => match numbers(body, ',', kind)?.as_slice() {
            [lo, hi] => line(CharacteristicFunction1D::interval(*lo, *hi)?),
            _ => Err(bad("interval: expected interval:lo,hi")),
        },
        "union" => {
            let v = numbers(body, ',', kind)?;
            if v.is_empty() || v.len() % 2 != 0 {
                return Err(bad("union: expected an even list lo,hi,lo,hi,..."));
            }
            let pairs: Vec<(f64, f64)> = v.chunks(2).map(|c| (c[0], c[1])).collect();
            line(CharacteristicFunction1D::union(&pairs)?)
        }
        "fourier" => {
            let map = keyed(body, kind)?;
            only_keys(&map, &["a0", "a", "b", "L"], kind)?;
            let list = |k: &str| map.get(k).map(|v| numbers(v, ';', kind)).transpose();
            line(CharacteristicFunction1D::fourier(
                map.get("a0").map(|v| number(v, "fourier a0")).transpose()?.unwrap_or(0.0),
                list("a")?.unwrap_or_default(),
                list("b")?.unwrap_or_default(),
                take(&map, "L", kind)?,
            )?)
        }
        "integers" => {
            let map = keyed(body, kind)?;
            only_keys(&map, &["n"], kind)?;
            let n = map
                .get("n")
                .ok_or_else(|| bad("integers: missing n="))?
                .parse::<usize>()
                .map_err(|_| bad("integers: n must be a positive integer"))?;
            line(CharacteristicFunction1D::integer_comb(n)?)
        }
        "disk" => {
            let map = keyed(body, kind)?;
            only_keys(&map, &["r"], kind)?;
            plane(Region2D::Disk {
                radius: take(&map, "r", kind)?,
            })
        }
        "rect" => match numbers(body, ',', kind)?.as_slice() {
            [q0, q1, p0, p1] => plane(Region2D::Rectangle {
                q0: *q0,
                q1: *q1,
                p0: *p0,
                p1: *p1,
            }),
            _ => Err(bad("rect: expected rect:q0,q1,p0,p1")),
        },
        "empty" => plane(Region2D::Empty),
        other => Err(bad(format!("unknown region kind '{other}'"))),
    }
}

fn region_file(path: &str) -> Result<RegionSpec> {
    let mut r = BufReader::new(File::open(path).map_err(|e| bad(format!("{path}: {e}")))?);
    let head = r.fill_buf().map_err(|e| bad(format!("{path}: {e}")))?;
    if head.starts_with(INDICATOR_HEADER.as_bytes()) {
        let region = read_indicator(r)?;
        return Ok(RegionSpec::Descriptor(RegionDescriptor::plane(region)));
    }
    let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{path}: {e}")))?;
    Ok(RegionSpec::Descriptor(RegionDescriptor::from_json(&text)?))
}

pub fn parse_state(s: &str, dim: usize) -> Result<QuantumState<f64>> {
    let s = s.trim();
    let (kind, body) = s.split_once(':').unwrap_or((s, ""));
    match kind {
        "vacuum" if body.is_empty() => QuantumState::vacuum(dim),
        "fock" => {
            let n = body.trim().parse::<usize>().map_err(|_| bad("fock: expected fock:n"))?;
            QuantumState::fock(n, dim)
        }
        "coherent" => match numbers(body, ',', kind)?.as_slice() {
            [re] => QuantumState::coherent(C64::new(*re, 0.0), dim),
            [re, im] => QuantumState::coherent(C64::new(*re, *im), dim),
            _ => Err(bad("coherent: expected coherent:re,im")),
        },
        "squeezed" => QuantumState::squeezed_vacuum(number(body, "squeezed r")?, dim),
        "coeffs" => {
            let coeffs: Vec<C64> = body
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<C64>()
                        .map_err(|_| bad(format!("coeffs: '{t}' is not a complex number")))
                })
                .collect::<Result<_>>()?;
            QuantumState::from_coefficients(&coeffs, dim)
        }
        other => Err(bad(format!("unknown state '{other}'"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn region_strings() {
        assert_eq!(
            parse_region("circle:a=1").unwrap(),
            RegionSpec::Descriptor(RegionDescriptor::plane(Region2D::Circle { a: 1.0 }))
        );
        assert_eq!(parse_region("segment:a=2").unwrap(), RegionSpec::Segment { a: 2.0 });
        match parse_region("fourier:a0=1,a=1;0.5,L=3").unwrap() {
            RegionSpec::Descriptor(RegionDescriptor::Line(CharacteristicFunction1D::FourierPeriodic { a, b, l, .. })) => {
                assert_eq!(a, vec![1.0, 0.5]);
                assert_eq!(b, vec![0.0, 0.0]);
                assert_eq!(l, 3.0);
            }
            other => panic!("{other:?}"),
        }
        assert!(parse_region("union:-2,-1,0,1").is_ok());
        assert!(parse_region(r#"{"type":"disk","radius":1.5}"#).is_ok());
        assert!(parse_region("interval:1,-1").is_err());
        assert!(parse_region("circle:b=1").is_err());
        assert!(parse_region("hexagon").is_err());
    }

    #[test]
    fn state_strings() {
        assert_eq!(parse_state("fock:2", 8).unwrap(), QuantumState::fock(2, 8).unwrap());
        let st = parse_state("coeffs:0.6,0+0.8i", 8).unwrap();
        assert!((st.as_pure().unwrap()[1].im - 0.8).abs() < 1e-15);
        assert!(parse_state("coherent:0.5,0.1", 16).is_ok());
        assert!(parse_state("fock:x", 8).is_err());
        assert!(parse_state("thermal", 8).is_err());
    }
}
