//! Conformal hypersurface invariants computed from truncated metric jets.
//!
//! The crate is layered bottom-up: [`jet`] provides truncated Taylor
//! arithmetic, [`tensor`] and [`curvature`] build the bulk curvature stack,
//! [`hypersurface`] extracts the extrinsic geometry of `{s = 0}`, and
//! [`conformal`] checks weight laws, transverse orders and the candidate
//! enumeration. [`scenario`], [`report`] and [`suite`] drive the command line
//! tool.

pub mod cli;
pub mod conformal;
pub mod curvature;
pub mod error;
pub mod hypersurface;
pub mod jet;
pub mod report;
pub mod residual;
pub mod scalar;
pub mod scenario;
pub mod suite;
pub mod tensor;

pub use error::{Error, Result};
pub use jet::{Jet, JetContext, JetMap};
pub use scalar::{CoefficientMode, Dual, Rational, Scalar};
pub use tensor::{MetricJet, TensorJet, Variance};
