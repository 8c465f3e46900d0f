//! Residual magnitudes of identity and law checks at the base point.

use crate::scalar::{format_rational, CoefficientMode, Rational, Scalar};
use num_traits::{Signed, Zero};

/// How far an identity is from holding at the base point.
#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    /// Largest absolute component of `lhs − rhs`.
    pub magnitude: f64,
    /// Largest absolute component among the terms, for relative tolerances.
    pub scale: f64,
    /// Exact value of `magnitude` in exact mode.
    pub exact: Option<Rational>,
}

impl Residual {
    pub fn zero() -> Self {
        Residual {
            magnitude: 0.0,
            scale: 0.0,
            exact: Some(<Rational as Zero>::zero()),
        }
    }

    /// Residual of `diff`, with `terms` supplying the scale.
    pub fn from_values<'a, S: Scalar>(
        diff: impl IntoIterator<Item = &'a S>,
        terms: impl IntoIterator<Item = &'a S>,
    ) -> Self {
        let mut magnitude: f64 = 0.0;
        let mut exact: Option<Rational> = (S::MODE == CoefficientMode::Exact).then(<Rational as Zero>::zero);
        for v in diff {
            let m = v.magnitude();
            magnitude = if m.is_nan() { f64::NAN } else { magnitude.max(m) };
            if let Some(e) = exact.as_mut() {
                match v.to_rational() {
                    Some(r) => {
                        let r = r.abs();
                        if r > *e {
                            *e = r;
                        }
                    }
                    None => exact = None,
                }
            }
        }
        let scale = terms.into_iter().map(Scalar::magnitude).fold(0.0, f64::max);
        Residual {
            magnitude,
            scale,
            exact,
        }
    }

    pub fn combine(&self, other: &Residual) -> Residual {
        let exact = match (&self.exact, &other.exact) {
            (Some(a), Some(b)) => Some(if a > b { a.clone() } else { b.clone() }),
            _ => None,
        };
        Residual {
            magnitude: self.magnitude.max(other.magnitude),
            scale: self.scale.max(other.scale),
            exact,
        }
    }

    /// Exact residuals must vanish; float residuals must be below
    /// `rel_tol · max(scale, 1)`.
    pub fn passes(&self, rel_tol: f64) -> bool {
        match &self.exact {
            Some(e) => Zero::is_zero(e),
            None => self.magnitude.is_finite() && self.magnitude <= rel_tol * self.scale.max(1.0),
        }
    }

    /// `p/q` in exact mode, otherwise a float with 17 significant digits.
    pub fn display_value(&self) -> String {
        match &self.exact {
            Some(e) => format_rational(e),
            None => format!("{:.16e}", self.magnitude),
        }
    }
}

/// Default relative tolerance for float-mode identity checks.
pub const FLOAT_TOLERANCE: f64 = 1e-8;
