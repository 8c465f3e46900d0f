//! Verification suites that fill a [`ResidualReport`].

use crate::conformal::{
    enumerate_form_candidates, probe_invariants, reduce_to_probe, Invariant, ProbeOptions, RescaledPair,
};
use crate::curvature::CurvaturePack;
use crate::error::{Error, Result};
use crate::hypersurface::identities;
use crate::hypersurface::normalize::normalize_asymptotic_unit;
use crate::hypersurface::{ExtrinsicOptions, ExtrinsicPack, HypersurfaceChart};
use crate::jet::Jet;
use crate::report::{ReportValue, ResidualReport};
use crate::residual::FLOAT_TOLERANCE;
use crate::scalar::{CoefficientMode, Rational, Scalar};
use crate::scenario::{Instance, ScenarioSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteOptions {
    pub trials: usize,
    pub seed: u64,
    /// Largest perturbation order for probes; defaults to the adapted order.
    pub max_order: Option<usize>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            trials: 8,
            seed: 0,
            max_order: None,
        }
    }
}

fn tolerance<S: Scalar>() -> f64 {
    match S::MODE {
        CoefficientMode::Exact => 0.0,
        CoefficientMode::Float => FLOAT_TOLERANCE,
    }
}

fn int(v: usize) -> ReportValue {
    ReportValue::Exact(Rational::from_integer((v as i64).into()))
}

fn new_report(spec: &ScenarioSpec, mode: CoefficientMode) -> ResidualReport {
    let mut r = ResidualReport::new(spec.label.clone(), spec.seed, mode);
    r.insert("scenario.dimension", int(spec.dimension));
    r.insert("scenario.order", int(spec.order));
    r
}

/// The scenario's conformal factor, or `1 + x_1/2 + x_d/3` when it has none.
pub fn conformal_factor<S: Scalar>(spec: &ScenarioSpec, inst: &Instance<S>) -> Result<Jet<S>> {
    if let Some(o) = &inst.conformal_factor {
        return Ok(o.clone());
    }
    let ctx = spec.context()?;
    let d = spec.dimension;
    let mut o = Jet::one(&ctx);
    o.add_scaled(&S::from_ratio(1, 2), &Jet::variable(&ctx, 0)?);
    o.add_scaled(&S::from_ratio(1, 3), &Jet::variable(&ctx, d - 1)?);
    Ok(o)
}

fn fourth_available(d: usize, order: usize) -> Option<&'static str> {
    if d == 5 {
        Some("formula excluded for d=5")
    } else if order < 4 {
        Some("needs jet order 4")
    } else {
        None
    }
}

/// Base-point values of the extrinsic invariants and the curvature stack.
pub fn summary<S: Scalar>(spec: &ScenarioSpec) -> Result<ResidualReport> {
    let inst = spec.instantiate::<S>()?;
    let mut r = new_report(spec, S::MODE);
    let chart = HypersurfaceChart::adapt(&inst.metric, &inst.defining_function)?;
    let pack = ExtrinsicPack::compute(&chart, ExtrinsicOptions::default())?;
    r.insert("chart.replaced_axis", int(chart.replaced_axis()));
    for inv in Invariant::ALL {
        match inv.values(&pack) {
            Ok(v) if inv == Invariant::MeanCurvature => {
                r.insert("value.H", ReportValue::from_scalar(&v[0]));
            }
            Ok(_) if inv == Invariant::UnitConormal => {
                r.record_values("n", &pack.n_low.iter().map(|c| c.value().clone()).collect::<Vec<_>>())
            }
            Ok(_) => {
                let t = match inv {
                    Invariant::SecondForm => &pack.second,
                    Invariant::SecondFormTf => &pack.second_tf,
                    Invariant::ThirdForm => &pack.third,
                    _ => pack.fourth()?,
                };
                r.record_tensor(inv.name(), t);
            }
            Err(e) => r.insert(format!("value.{}.unavailable", inv.name()), ReportValue::Text(e.to_string())),
        }
    }
    let bulk = CurvaturePack::compute(&inst.metric, inst.metric.order() >= 3)?;
    r.record_tensor("Riemann", &bulk.riemann);
    r.record_tensor("Ricci", &bulk.ricci);
    r.insert("value.Sc", ReportValue::from_scalar(bulk.scalar.value()));
    r.record_tensor("P", &bulk.schouten);
    r.insert("value.J", ReportValue::from_scalar(bulk.j.value()));
    r.record_tensor("W", &bulk.weyl);
    match bulk.cotton() {
        Ok(c) => r.record_tensor("Cotton", c),
        Err(e) => r.insert("value.Cotton.unavailable", ReportValue::Text(e.to_string())),
    }
    Ok(r)
}

/// Gauss, Codazzi–Mainardi, theorema egregium and Fialkow–Gauss residuals,
/// plus the extended-form and trace-freeness properties.
pub fn identity_suite<S: Scalar>(pack: &ExtrinsicPack<S>, r: &mut ResidualReport) -> Result<()> {
    let tol = tolerance::<S>();
    r.record_residual("identity.gauss", &identities::gauss(pack)?, tol);
    r.record_residual("identity.codazzi", &identities::codazzi(pack)?, tol);
    r.record_residual("identity.egregium", &identities::theorema_egregium(pack)?, tol);
    r.record_residual("identity.fialkow_gauss", &identities::fialkow_gauss(pack)?, tol);
    r.record_residual("identity.extended_form", &identities::extended_form_property(pack)?, tol);
    r.record_residual("identity.trace_free_forms", &identities::trace_free_forms(pack)?, tol);
    Ok(())
}

/// Weight laws of `I̊I`, `III̊`, `IV̊`, the `H` and `J` laws, and the naive
/// `H` law as a negative control.
pub fn weight_law_suite<S: Scalar>(spec: &ScenarioSpec, inst: &Instance<S>, r: &mut ResidualReport) -> Result<()> {
    let tol = tolerance::<S>();
    let omega = conformal_factor(spec, inst)?;
    let skip_fourth = fourth_available(spec.dimension, spec.order);
    let pair = RescaledPair::compute(&inst.metric, &inst.defining_function, &omega, skip_fourth.is_none())?;
    for inv in [Invariant::SecondFormTf, Invariant::ThirdForm, Invariant::FourthForm] {
        if inv == Invariant::FourthForm {
            if let Some(why) = skip_fourth {
                r.insert("weight_law.IV.skipped", ReportValue::Text(why.into()));
                continue;
            }
        }
        let w = inv.weight().expect("covariant form");
        r.record_weight_law(&pair.weight_law(inv, w)?, tol);
    }
    r.record_weight_law(&pair.mean_curvature_law()?, tol);
    r.record_weight_law(&pair.schouten_trace_law()?, tol);

    let naive = pair.naive_mean_curvature_law()?;
    r.insert("control.naive_H.residual", ReportValue::from_residual(&naive.residual));
    let mut n_dot_u = S::zero();
    for (n, u) in pair.original.n_up.iter().zip(&pair.scale.upsilon) {
        n_dot_u.mul_acc(n.value(), u.value());
    }
    if n_dot_u.magnitude() > tol {
        // the control passes when the naive law is seen to fail
        r.record_check("control.naive_H", !naive.residual.passes(tol));
    } else {
        r.insert(
            "control.naive_H.skipped",
            ReportValue::Text("conformal factor has no normal derivative at the base point".into()),
        );
    }
    Ok(())
}

/// Probes the reduce-to combinations for every `m ∈ {0, 1}` the jet order
/// allows and checks `detected_order ≤ m + 1`.
pub fn reduce_to_suite<S: Scalar>(
    adapted: &crate::tensor::MetricJet<S>,
    opts: &SuiteOptions,
    r: &mut ResidualReport,
) -> Result<()> {
    let order = adapted.order();
    let ms: Vec<usize> = [0, 1].into_iter().filter(|m| m + 2 <= order).collect();
    if ms.is_empty() {
        r.insert("reduce_to.skipped", ReportValue::Text("needs jet order 4".into()));
        return Ok(());
    }
    let probe = ProbeOptions {
        max_order: opts.max_order.unwrap_or(order).min(order),
        trials: opts.trials,
        seed: opts.seed,
    };
    for rep in reduce_to_probe(adapted, &ms, &probe)? {
        let m: usize = rep.name[1..2].parse().expect("m prefix");
        let mut rep = rep;
        rep.name = format!("reduce_to.{}", rep.name);
        r.record_probe_bound(&rep, m + 1);
    }
    Ok(())
}

/// Identities, weight laws and reduce-to bounds.
pub fn verify<S: Scalar>(spec: &ScenarioSpec, opts: &SuiteOptions) -> Result<ResidualReport> {
    let inst = spec.instantiate::<S>()?;
    let mut r = new_report(spec, S::MODE);
    let chart = HypersurfaceChart::adapt(&inst.metric, &inst.defining_function)?;
    let pack = ExtrinsicPack::compute(&chart, ExtrinsicOptions { fourth_form: false })?;
    identity_suite(&pack, &mut r)?;
    weight_law_suite(spec, &inst, &mut r)?;
    reduce_to_suite(chart.metric(), opts, &mut r)?;
    Ok(r)
}

/// Transverse-order probes of `invariants`, checked against their known
/// orders. With a conformal factor the covariant forms are also probed
/// under `Ω²g` and must agree.
pub fn probe<S: Scalar>(spec: &ScenarioSpec, invariants: &[Invariant], opts: &SuiteOptions) -> Result<ResidualReport> {
    if spec.dimension == 5 && invariants.contains(&Invariant::FourthForm) {
        return Err(Error::FourthFormExcluded);
    }
    let inst = spec.instantiate::<S>()?;
    let mut r = new_report(spec, S::MODE);
    let chart = HypersurfaceChart::adapt(&inst.metric, &inst.defining_function)?;
    let g = chart.metric();
    let probe = ProbeOptions {
        max_order: opts.max_order.unwrap_or(g.order()),
        trials: opts.trials,
        seed: opts.seed,
    };
    let reports = probe_invariants(g, invariants, &probe)?;
    for (inv, rep) in invariants.iter().zip(&reports) {
        r.record_probe(rep, Some(Some(inv.transverse_order())));
    }
    let covariant: Vec<Invariant> = invariants.iter().copied().filter(|i| i.weight().is_some()).collect();
    if let (Some(omega), false) = (&inst.conformal_factor, covariant.is_empty()) {
        let rescaled = g.conformal_rescale(&chart.to_adapted(omega)?)?;
        let again = probe_invariants(&rescaled, &covariant, &probe)?;
        for (inv, mut rep) in covariant.iter().zip(again) {
            let original = &reports[invariants.iter().position(|i| i == inv).expect("present")];
            rep.name = format!("rescaled.{}", rep.name);
            r.record_probe(&rep, Some(original.detected_order));
        }
    }
    Ok(r)
}

/// Runs the asymptotic-unit improver and reports the residual profile; the
/// check is vanishing through `t^{d−1}`, under `g` and under `Ω²g`.
pub fn improve<S: Scalar>(spec: &ScenarioSpec) -> Result<ResidualReport> {
    let inst = spec.instantiate::<S>()?;
    let d = spec.dimension;
    let mut r = new_report(spec, S::MODE);
    let imp = normalize_asymptotic_unit(&inst.metric, &inst.defining_function)?;
    r.insert("improve.residual_order", int(imp.residual_order()));
    r.insert("improve.vanishing_degrees", int(imp.vanishing_degrees()));
    for (k, v) in imp.profile().iter().enumerate() {
        r.insert(format!("improve.profile[{k}]"), ReportValue::Float(*v));
    }
    for sweep in &imp.sweeps {
        r.insert(format!("improve.sweep[{}].before", sweep.k), ReportValue::Float(sweep.before));
    }
    for (e, c) in imp.defining_function.terms() {
        if !c.is_zero() {
            let key: Vec<String> = e.iter().map(|x| x.to_string()).collect();
            r.insert(format!("improve.s[{}]", key.join(",")), ReportValue::from_scalar(c));
        }
    }
    r.record_check("improve.vanishing", imp.vanishing_degrees() >= d);

    let omega = conformal_factor(spec, &inst)?;
    let rescaled = inst.metric.conformal_rescale(&omega)?;
    let imp2 = normalize_asymptotic_unit(&rescaled, &inst.defining_function)?;
    r.insert("improve.rescaled.vanishing_degrees", int(imp2.vanishing_degrees()));
    r.record_check(
        "improve.conformal_invariance",
        imp2.vanishing_degrees() == imp.vanishing_degrees(),
    );
    Ok(r)
}

/// Candidate terms of the `m`-th conformal fundamental form, one entry per
/// candidate; each `m` must give exactly two and no flagged extras.
pub fn enumerate(ms: &[u32], bound: u32) -> Result<ResidualReport> {
    let mut r = ResidualReport::new("enumerate", 0, CoefficientMode::Exact);
    for &m in ms {
        if m < 3 {
            return Err(Error::InvalidArgument(format!("candidate enumeration needs m ≥ 3, got {m}")));
        }
        let set = enumerate_form_candidates(m, bound);
        let line = |s: &crate::conformal::CandidateSolution| {
            let e: Vec<String> = s.exponents.iter().map(|x| x.to_string()).collect();
            ReportValue::Text(format!("({}) {}", e.join(","), s.description))
        };
        for (i, s) in set.solutions.iter().enumerate() {
            r.insert(format!("candidate.m{m}[{i}]"), line(s));
        }
        for (i, s) in set.flagged.iter().enumerate() {
            r.insert(format!("flagged.m{m}[{i}]"), line(s));
        }
        r.record_check(&format!("enumerate.m{m}.count"), set.solutions.len() == 2);
        r.record_check(&format!("enumerate.m{m}.no_extra"), set.flagged.is_empty());
    }
    Ok(r)
}

/// Evaluates `body` with the type alias `S` bound to the scalar type of
/// `mode`: `with_mode!(mode, S => verify::<S>(&spec, &opts))`.
#[macro_export]
macro_rules! with_mode {
    ($mode:expr, $S:ident => $body:expr) => {
        match $mode {
            $crate::scalar::CoefficientMode::Exact => {
                type $S = $crate::scalar::Rational;
                $body
            }
            $crate::scalar::CoefficientMode::Float => {
                type $S = f64;
                $body
            }
        }
    };
}
