//! Operator-valued measures over phase-space regions in a truncated Fock
//! basis, with independent numerical oracles for every analytic form.
//!
//! The algebra is generic over [`Real`] (`f32` or `f64`); the aliases at the
//! crate root fix the scalar to `f64`.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod export;
pub mod fock;
pub mod oracle;
pub mod pti;
pub mod quasiprob;
pub mod region;
pub mod regions1d;
pub mod regions2d;
pub mod scalar;
pub mod special;
pub mod state;

pub use error::{OvmError, Result};
pub use fock::{FockOperator, CONVENTIONS, QP_COMMUTATOR, QUADRATURE_SCALE};
pub use scalar::{CMatrix, CVector, Cx, Real};
pub use state::QuantumState;
pub use oracle::{OracleReport, VerifyTarget};
pub use pti::{KrausMap, TwoModeSystem};
pub use quasiprob::{QuasiField, WignerConvention};
pub use region::{ConstructionPath, RegionDescriptor, RegionOperator, ShiftMode, Transform};
pub use regions1d::CharacteristicFunction1D;
pub use regions2d::{PhaseGrid, Region2D};

pub type C64 = num_complex::Complex<f64>;
pub type FockOperatorF64 = FockOperator<f64>;
pub type FockOperatorF32 = FockOperator<f32>;
pub type QuantumStateF64 = QuantumState<f64>;
pub type RegionOperatorF64 = RegionOperator<f64>;
pub type KrausMapF64 = KrausMap<f64>;
