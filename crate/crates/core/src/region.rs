//! Region descriptors and the operators built from them.

use serde::{Deserialize, Serialize};

use crate::error::{OvmError, Result};
use crate::fock::FockOperator;
use crate::regions1d::CharacteristicFunction1D;
use crate::regions2d::Region2D;
use crate::scalar::Real;

/// A region on an axis or in the phase plane, in its canonical JSON form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RegionDescriptor {
    Line(CharacteristicFunction1D),
    Plane(Region2D),
}

impl RegionDescriptor {
    pub fn line(c: CharacteristicFunction1D) -> Self {
        Self::Line(c)
    }

    pub fn plane(r: Region2D) -> Self {
        Self::Plane(r)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Line(c) => c.validate(),
            Self::Plane(r) => r.validate(),
        }
    }

    /// Parses and validates the canonical JSON form.
    pub fn from_json(s: &str) -> Result<Self> {
        let d: Self = serde_json::from_str(s).map_err(|e| OvmError::InvalidRegion(format!("bad region JSON: {e}")))?;
        d.validate()?;
        Ok(d)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("region descriptors serialize")
    }

    pub fn label(&self) -> String {
        match self {
            Self::Line(c) => c.label(),
            Self::Plane(r) => r.label(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstructionPath {
    Analytic,
    Smeared,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftMode {
    Left,
    Right,
    Conjugate,
}

/// Transformations applied after construction, in order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Transform {
    Rotation { theta: f64 },
    Shift { c: f64, mode: ShiftMode },
    Squeeze { r: f64 },
    PhaseAverage,
}

/// An operator tagged with the region and construction path behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionOperator<T: Real> {
    pub op: FockOperator<T>,
    pub region: RegionDescriptor,
    pub path: ConstructionPath,
    pub transforms: Vec<Transform>,
}

impl<T: Real> RegionOperator<T> {
    pub fn new(op: FockOperator<T>, region: RegionDescriptor, path: ConstructionPath) -> Self {
        Self {
            op,
            region,
            path,
            transforms: Vec::new(),
        }
    }

    pub(crate) fn transformed(&self, op: FockOperator<T>, t: Transform) -> Self {
        let mut transforms = self.transforms.clone();
        transforms.push(t);
        Self {
            op,
            region: self.region.clone(),
            path: self.path,
            transforms,
        }
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.op.hermiticity_defect().as_f64() <= tol
    }

    /// `max |KΠ − ΠK|`.
    pub fn parity_commutator(&self) -> f64 {
        (&self.op.times_parity() - &self.op.parity_times()).max_abs().as_f64()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        for s in [
            r#"{"type":"interval","lo":-1.0,"hi":1.0}"#,
            r#"{"type":"fourier_periodic","a0":1.0,"a":[1.0],"b":[0.0],"L":3.0}"#,
            r#"{"type":"integer_comb","n":3}"#,
            r#"{"type":"circle","a":1.0}"#,
            r#"{"type":"rectangle","q0":-1.0,"q1":1.0,"p0":-1.0,"p1":1.0}"#,
            r#"{"type":"empty"}"#,
        ] {
            let d = RegionDescriptor::from_json(s).unwrap();
            assert_eq!(RegionDescriptor::from_json(&d.to_json()).unwrap(), d);
        }
        assert!(RegionDescriptor::from_json(r#"{"type":"interval","lo":1.0,"hi":-1.0}"#).is_err());
        assert!(RegionDescriptor::from_json(r#"{"type":"blob"}"#).is_err());
    }
}
