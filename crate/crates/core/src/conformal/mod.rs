//! Conformal rescaling, weight laws, transverse-order probes and the
//! candidate enumeration for conformal fundamental forms.

pub mod candidates;
pub mod probe;

use std::fmt;
use std::str::FromStr;

use crate::curvature::{gradient, CurvaturePack};
use crate::error::{Error, Result};
use crate::hypersurface::ExtrinsicPack;
use crate::jet::Jet;
use crate::residual::Residual;
use crate::scalar::{CoefficientMode, Rational, Scalar};
use crate::tensor::MetricJet;

pub use candidates::{enumerate_form_candidates, CandidateSet, CandidateSolution, LinearConstraint};
pub use probe::{probe_invariants, reduce_to_probe, transverse_order_probe, ProbeOptions, ProbeReport};

/// Hypersurface invariants the harness knows how to extract.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Invariant {
    /// Unit conormal `n̂`.
    UnitConormal,
    /// Second fundamental form `II`.
    SecondForm,
    /// Mean curvature `H`.
    MeanCurvature,
    /// `I̊I`.
    SecondFormTf,
    /// `III̊`.
    ThirdForm,
    /// `IV̊`.
    FourthForm,
}

impl Invariant {
    pub const ALL: [Invariant; 6] = [
        Invariant::UnitConormal,
        Invariant::SecondForm,
        Invariant::MeanCurvature,
        Invariant::SecondFormTf,
        Invariant::ThirdForm,
        Invariant::FourthForm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Invariant::UnitConormal => "n",
            Invariant::SecondForm => "II",
            Invariant::MeanCurvature => "H",
            Invariant::SecondFormTf => "IIo",
            Invariant::ThirdForm => "III",
            Invariant::FourthForm => "IV",
        }
    }

    /// Conformal weight `w` in `I^{Ω²g} = Ω^w I^g`, for the conformally
    /// covariant forms.
    pub fn weight(self) -> Option<i64> {
        match self {
            Invariant::SecondFormTf => Some(1),
            Invariant::ThirdForm => Some(0),
            Invariant::FourthForm => Some(-1),
            _ => None,
        }
    }

    /// Number of normal derivatives of the metric the invariant depends on.
    pub fn transverse_order(self) -> usize {
        match self {
            Invariant::UnitConormal => 0,
            Invariant::SecondForm | Invariant::MeanCurvature | Invariant::SecondFormTf => 1,
            Invariant::ThirdForm => 2,
            Invariant::FourthForm => 3,
        }
    }

    /// Order of the adapted metric jet needed for the value at the base point.
    pub fn required_order(self) -> usize {
        match self {
            Invariant::FourthForm => 3,
            _ => 2,
        }
    }

    /// Components at the base point.
    pub fn values<S: Scalar>(self, pack: &ExtrinsicPack<S>) -> Result<Vec<S>> {
        Ok(match self {
            Invariant::UnitConormal => pack.n_low.iter().map(|c| c.value().clone()).collect(),
            Invariant::SecondForm => pack.second.values(),
            Invariant::MeanCurvature => vec![pack.mean.value().clone()],
            Invariant::SecondFormTf => pack.second_tf.values(),
            Invariant::ThirdForm => pack.third.values(),
            Invariant::FourthForm => pack.fourth()?.values(),
        })
    }
}

impl fmt::Display for Invariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Invariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace(['_', '-'], "");
        Ok(match key.as_str() {
            "n" | "nhat" | "conormal" => Invariant::UnitConormal,
            "ii" => Invariant::SecondForm,
            "h" | "mean" => Invariant::MeanCurvature,
            "iio" | "iitf" | "ii0" => Invariant::SecondFormTf,
            "iii" | "iiio" => Invariant::ThirdForm,
            "iv" | "ivo" => Invariant::FourthForm,
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "unknown invariant `{s}` (expected one of n, II, H, IIo, III, IV)"
                )))
            }
        })
    }
}

/// A conformal factor `Ω` with `Υ = d log Ω = dΩ/Ω`.
#[derive(Debug, Clone)]
pub struct ConformalScale<S> {
    pub omega: Jet<S>,
    pub upsilon: Vec<Jet<S>>,
}

impl<S: Scalar> ConformalScale<S> {
    pub fn new(omega: Jet<S>) -> Result<Self> {
        if !omega.value().is_positive() {
            return Err(Error::NonPositiveConformalFactor);
        }
        let inv = omega.reciprocal()?;
        let upsilon = gradient(&omega)?
            .iter()
            .map(|g| g.checked_mul(&inv))
            .collect::<Result<_>>()?;
        Ok(ConformalScale { omega, upsilon })
    }

    pub fn rescale(&self, m: &MetricJet<S>) -> Result<MetricJet<S>> {
        m.conformal_rescale(&self.omega)
    }

    /// `Ω^w` at the base point.
    pub fn base_power(&self, w: i64) -> Result<S> {
        self.omega
            .value()
            .powi(w as i32)
            .ok_or_else(|| Error::NotInvertible(" (conformal factor)".into()))
    }
}

/// `Ω²g`.
pub fn rescale<S: Scalar>(m: &MetricJet<S>, scale: &ConformalScale<S>) -> Result<MetricJet<S>> {
    scale.rescale(m)
}

/// Outcome of one transformation-law check.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightLawReport {
    pub name: String,
    pub weight: Rational,
    pub residual: Residual,
    pub mode: CoefficientMode,
}

impl WeightLawReport {
    pub fn passes(&self, rel_tol: f64) -> bool {
        self.residual.passes(rel_tol)
    }
}

fn law_report<S: Scalar>(name: &str, weight: i64, diff: &[S], terms: &[S]) -> WeightLawReport {
    WeightLawReport {
        name: name.into(),
        weight: Rational::from_integer(weight.into()),
        residual: Residual::from_values(diff.iter(), terms.iter()),
        mode: S::MODE,
    }
}

/// `‖I^{Ω²g} − Ω^w I^g‖` at the base point. Both packs must share the
/// adapted chart (same defining function); `scale` is in adapted coordinates.
pub fn weight_law_from_packs<S: Scalar>(
    invariant: Invariant,
    original: &ExtrinsicPack<S>,
    rescaled: &ExtrinsicPack<S>,
    scale: &ConformalScale<S>,
    weight: i64,
) -> Result<WeightLawReport> {
    let a = invariant.values(original)?;
    let b = invariant.values(rescaled)?;
    let factor = scale.base_power(weight)?;
    let scaled: Vec<S> = a.iter().map(|x| x.mul_ref(&factor)).collect();
    let diff: Vec<S> = b.iter().zip(&scaled).map(|(x, y)| x.sub_ref(y)).collect();
    let terms: Vec<S> = b.into_iter().chain(scaled).collect();
    Ok(law_report(invariant.name(), weight, &diff, &terms))
}

/// Computes both packs and checks the weight law of one invariant.
pub fn check_weight_law<S: Scalar>(
    invariant: Invariant,
    metric: &MetricJet<S>,
    s: &Jet<S>,
    omega: &Jet<S>,
    weight: i64,
) -> Result<WeightLawReport> {
    let pair = RescaledPair::compute(metric, s, omega, invariant == Invariant::FourthForm)?;
    weight_law_from_packs(invariant, &pair.original, &pair.rescaled, &pair.scale, weight)
}

/// Extrinsic packs of `(g, s)` and `(Ω²g, s)` on one adapted chart, with
/// the conformal factor expressed in adapted coordinates.
#[derive(Debug, Clone)]
pub struct RescaledPair<S> {
    pub original: ExtrinsicPack<S>,
    pub rescaled: ExtrinsicPack<S>,
    pub scale: ConformalScale<S>,
}

impl<S: Scalar> RescaledPair<S> {
    pub fn compute(metric: &MetricJet<S>, s: &Jet<S>, omega: &Jet<S>, fourth_form: bool) -> Result<Self> {
        use crate::hypersurface::{ExtrinsicOptions, HypersurfaceChart};
        let chart = HypersurfaceChart::adapt(metric, s)?;
        let scale = ConformalScale::new(chart.to_adapted(omega)?)?;
        let options = ExtrinsicOptions { fourth_form };
        let original = ExtrinsicPack::compute(&chart, options)?;
        let rescaled_chart = chart.with_metric(scale.rescale(chart.metric())?);
        let rescaled = ExtrinsicPack::compute(&rescaled_chart, options)?;
        Ok(RescaledPair {
            original,
            rescaled,
            scale,
        })
    }

    pub fn weight_law(&self, invariant: Invariant, weight: i64) -> Result<WeightLawReport> {
        weight_law_from_packs(invariant, &self.original, &self.rescaled, &self.scale, weight)
    }

    /// `H^{Ω²g} = Ω^{-1}(H^g + n̂^a Υ_a)` at the base point.
    pub fn mean_curvature_law(&self) -> Result<WeightLawReport> {
        let n_dot_u = contract(&self.original.n_up, &self.scale.upsilon)?;
        let inv = self.scale.base_power(-1)?;
        let expected = self.original.mean.value().add_ref(&n_dot_u).mul_ref(&inv);
        let got = self.rescaled.mean.value().clone();
        Ok(law_report("H", -1, &[got.sub_ref(&expected)], &[got, expected]))
    }

    /// The pure weight law `H^{Ω²g} = Ω^{-1} H^g`, which fails for
    /// non-constant `Ω`: a negative control for the harness.
    pub fn naive_mean_curvature_law(&self) -> Result<WeightLawReport> {
        let inv = self.scale.base_power(-1)?;
        let expected = self.original.mean.value().mul_ref(&inv);
        let got = self.rescaled.mean.value().clone();
        Ok(law_report("H_naive", -1, &[got.sub_ref(&expected)], &[got, expected]))
    }

    /// `J^{Ω²g} = Ω^{-2}(J − ∇·Υ + (1 − d/2)|Υ|²)`, compared as jets.
    pub fn schouten_trace_law(&self) -> Result<WeightLawReport> {
        j_law(&self.original.bulk, &self.rescaled.bulk, &self.scale)
    }
}

fn contract<S: Scalar>(v: &[Jet<S>], w: &[Jet<S>]) -> Result<S> {
    let mut acc = S::zero();
    for (a, b) in v.iter().zip(w) {
        acc.mul_acc(a.value(), b.value());
    }
    Ok(acc)
}

/// Residual of the `J` transformation law over all jet coefficients both
/// sides know.
pub fn j_law<S: Scalar>(
    original: &CurvaturePack<S>,
    rescaled: &CurvaturePack<S>,
    scale: &ConformalScale<S>,
) -> Result<WeightLawReport> {
    let m = &original.metric;
    let d = m.dim();
    let u = &scale.upsilon;
    let mut div = Jet::zero(m.context());
    for a in 0..d {
        for b in 0..d {
            let gi = m.g_inv(a, b);
            if gi.is_zero() {
                continue;
            }
            let mut h = u[b].differentiate(a)?;
            for (c, uc) in u.iter().enumerate() {
                h.add_product(&-original.christoffel.second_kind(c, a, b), uc);
            }
            div.add_product(gi, &h);
        }
    }
    let u_sq = m.inner_covectors(u, u);
    let inner = original
        .j
        .checked_sub(&div)?
        .checked_add(&u_sq.scale(&S::from_ratio(2 - d as i64, 2)))?;
    let omega_sq_inv = scale.omega.checked_mul(&scale.omega)?.reciprocal()?;
    let expected = inner.checked_mul(&omega_sq_inv)?;
    let got = &rescaled.j;
    let k = expected.order().min(got.order());
    let (e, g) = (expected.truncate(k), got.truncate(k));
    let diff = g.checked_sub(&e)?;
    let terms: Vec<S> = e.coeffs().iter().chain(g.coeffs()).cloned().collect();
    Ok(law_report("J", -2, diff.coeffs(), &terms))
}

#[cfg(test)]
mod tests;
