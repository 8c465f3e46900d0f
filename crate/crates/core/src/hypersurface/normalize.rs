//! Normalized defining functions: geodesic-unit (`|ds|² = 1`) and
//! asymptotically unit (`|ds|² − (2/d)(sΔs + Js²) = 1 + O(s^d)`).
//!
//! Both solvers work in adapted coordinates `(y, t)` with `t` the original
//! defining function, where the new function is `t·u(y, t)` and each
//! `t`-degree of the residual is linear in one unknown tangential jet.

use crate::curvature::{compute_christoffel, gradient, Christoffel, CurvaturePack};
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::residual::FLOAT_TOLERANCE;
use crate::scalar::{CoefficientMode, Scalar};
use crate::tensor::MetricJet;

use super::chart::HypersurfaceChart;

/// `Δf = g^{ab}(∂_a∂_b f − Γ^c_ab ∂_c f)`.
pub fn laplacian<S: Scalar>(f: &Jet<S>, m: &MetricJet<S>, chr: &Christoffel<S>) -> Result<Jet<S>> {
    let d = m.dim();
    let df = gradient(f)?;
    let mut out = Jet::zero(m.context());
    for a in 0..d {
        for b in 0..d {
            let gi = m.g_inv(a, b);
            if gi.is_zero() {
                continue;
            }
            let mut h = df[b].differentiate(a)?;
            for (c, dc) in df.iter().enumerate() {
                if !dc.is_zero() {
                    h.add_product(&-chr.second_kind(c, a, b), dc);
                }
            }
            out.add_product(gi, &h);
        }
    }
    Ok(out)
}

/// `|ds|²_g − 1`.
pub fn unit_residual<S: Scalar>(m: &MetricJet<S>, s: &Jet<S>) -> Result<Jet<S>> {
    let ds = gradient(s)?;
    Ok(&m.inner_covectors(&ds, &ds) - &Jet::one(m.context()))
}

/// `|ds|²_g − (2/d)(sΔs + Js²) − 1`. The Schouten trace is computed from `m`;
/// pass `j` to reuse an existing one.
pub fn asymptotic_residual<S: Scalar>(m: &MetricJet<S>, s: &Jet<S>, j: Option<&Jet<S>>) -> Result<Jet<S>> {
    let d = m.dim();
    let owned;
    let j = match j {
        Some(j) => j,
        None => {
            owned = CurvaturePack::compute(m, false)?.j;
            &owned
        }
    };
    let chr = compute_christoffel(m)?;
    let lap = laplacian(s, m, &chr)?;
    let mut inner = lap.checked_add(&j.checked_mul(s)?)?;
    inner = inner.checked_mul(s)?;
    let base = unit_residual(m, s)?;
    base.checked_sub(&inner.scale(&S::from_ratio(2, d as i64)))
}

/// Coefficient of `t^k` in a bulk jet, as a bulk jet independent of `t`.
fn normal_slice<S: Scalar>(f: &Jet<S>, axis: usize, k: usize) -> Jet<S> {
    if k > f.order() {
        return Jet::zero(f.context()).with_order(0);
    }
    f.strip_axis_power(axis, k as u8)
}

/// Largest coefficient magnitude of the `t^k` part of `f`, for each `k` up
/// to the order of `f`.
pub fn normal_profile<S: Scalar>(f: &Jet<S>, axis: usize) -> Vec<f64> {
    (0..=f.order())
        .map(|k| {
            normal_slice(f, axis, k)
                .coeffs()
                .iter()
                .map(Scalar::magnitude)
                .fold(0.0, f64::max)
        })
        .collect()
}

/// Number of leading `t`-degrees of `f` that vanish (exactly in exact mode,
/// below the float tolerance otherwise).
pub fn vanishing_degrees<S: Scalar>(f: &Jet<S>, axis: usize) -> usize {
    let zero = |k: usize| match S::MODE {
        CoefficientMode::Exact => normal_slice(f, axis, k).is_zero(),
        CoefficientMode::Float => normal_slice(f, axis, k)
            .coeffs()
            .iter()
            .all(|c| c.magnitude() <= FLOAT_TOLERANCE),
    };
    (0..=f.order()).take_while(|&k| zero(k)).count()
}

/// `(g^{tt}(y, 0))^{-1/2}`, extended constantly in `t`.
fn unit_scale<S: Scalar>(g: &MetricJet<S>, axis: usize) -> Result<Jet<S>> {
    normal_slice(g.g_inv(axis, axis), axis, 0).sqrt()?.reciprocal()
}

/// Geodesic-unit defining function for the zero locus of `s`, in the source
/// coordinates: `s̃ = s·u` with `|ds̃|²_g = 1` to the available order.
pub fn normalize_geodesic<S: Scalar>(m: &MetricJet<S>, s: &Jet<S>) -> Result<Jet<S>> {
    let chart = HypersurfaceChart::adapt(m, s)?;
    let adapted = geodesic_in_chart(chart.metric())?;
    chart.to_source(&adapted)
}

/// Geodesic normalization for a metric in adapted coordinates; returns `t·u`.
pub fn geodesic_in_chart<S: Scalar>(g: &MetricJet<S>) -> Result<Jet<S>> {
    let n = g.dim() - 1;
    let ctx = g.context().clone();
    if g.order() < 1 {
        return Err(Error::OrderUnderflow("geodesic normalization needs order at least 1".into()));
    }
    let t = Jet::variable(&ctx, n)?;
    let u0 = unit_scale(g, n)?;
    let mut u = u0.clone();
    for k in 1..=g.order() {
        let rho = unit_residual(g, &t.checked_mul(&u)?)?;
        // d/du_k of the t^k coefficient is 2(k+1) g^{tt} u0 = 2(k+1)/u0
        let step = normal_slice(&rho, n, k)
            .checked_mul(&u0)?
            .scale(&S::from_ratio(-1, 2 * (k as i64 + 1)));
        u = u.checked_add(&step.checked_mul(&t.powi(k as u32))?)?;
    }
    t.checked_mul(&u)
}

/// One improvement step `s ← s(1 + λ_k s^k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub k: usize,
    /// Largest coefficient of the `t^k` part of the residual before the step.
    pub before: f64,
}

/// Result of [`normalize_asymptotic_unit`].
#[derive(Debug, Clone)]
pub struct Improvement<S> {
    /// The improved defining function in source coordinates.
    pub defining_function: Jet<S>,
    /// The same function in adapted coordinates.
    pub adapted: Jet<S>,
    /// Residual `|ds|² − (2/d)(sΔs + Js²) − 1` in adapted coordinates.
    pub residual: Jet<S>,
    pub sweeps: Vec<Sweep>,
    pub normal_axis: usize,
}

impl<S: Scalar> Improvement<S> {
    /// Per-`t`-degree residual magnitudes after the final step.
    pub fn profile(&self) -> Vec<f64> {
        normal_profile(&self.residual, self.normal_axis)
    }

    /// Number of leading `t`-degrees at which the residual vanishes; the
    /// condition `O(s^d)` holds when this is at least `d`.
    pub fn vanishing_degrees(&self) -> usize {
        vanishing_degrees(&self.residual, self.normal_axis)
    }

    /// Highest `t`-degree at which the residual is known at all.
    pub fn residual_order(&self) -> usize {
        self.residual.order()
    }
}

/// Improves `s` to an asymptotically unit defining function with the same
/// zero locus. Needs `K ≥ d` so that the residual is known through `s^{d−1}`.
pub fn normalize_asymptotic_unit<S: Scalar>(m: &MetricJet<S>, s: &Jet<S>) -> Result<Improvement<S>> {
    let d = m.dim();
    if d < 4 {
        return Err(Error::DimensionTooSmall(d, "asymptotic-unit improvement".into()));
    }
    if m.order() < d {
        return Err(Error::OrderUnderflow(format!(
            "asymptotic-unit improvement in d={d} needs jet order at least {d}, got {}",
            m.order()
        )));
    }
    let chart = HypersurfaceChart::adapt(m, s)?;
    let (adapted, residual, sweeps) = asymptotic_in_chart(chart.metric())?;
    Ok(Improvement {
        defining_function: chart.to_source(&adapted)?,
        adapted,
        residual,
        sweeps,
        normal_axis: chart.normal_axis(),
    })
}

/// The improvement sweep for a metric in adapted coordinates.
pub fn asymptotic_in_chart<S: Scalar>(g: &MetricJet<S>) -> Result<(Jet<S>, Jet<S>, Vec<Sweep>)> {
    let d = g.dim();
    let n = d - 1;
    let ctx = g.context().clone();
    let j = CurvaturePack::compute(g, false)?.j;
    let t = Jet::variable(&ctx, n)?;
    let u0 = unit_scale(g, n)?;
    let mut s = t.checked_mul(&u0)?;
    let mut sweeps = Vec::new();
    for k in 1..d {
        let rho = asymptotic_residual(g, &s, Some(&j))?;
        let rho_k = normal_slice(&rho, n, k);
        sweeps.push(Sweep {
            k,
            before: rho_k.coeffs().iter().map(Scalar::magnitude).fold(0.0, f64::max),
        });
        if k > rho.order() {
            break;
        }
        // the t^k coefficient moves by 2(k+1)(d−k)/d · λ u0^k
        let c = S::from_ratio(2 * (k as i64 + 1) * (d - k) as i64, d as i64);
        let denom = u0.powi(k as u32).scale(&c).reciprocal()?;
        let lambda = -&rho_k.checked_mul(&denom)?;
        let correction = lambda.checked_mul(&s.powi(k as u32 + 1))?;
        s = s.checked_add(&correction)?;
    }
    let residual = asymptotic_residual(g, &s, Some(&j))?;
    Ok((s, residual, sweeps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::JetContext;
    use crate::scalar::Rational;
    use crate::scenario::generate_random;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn geodesic_normalization() {
        let ctx = JetContext::new(4, 4).unwrap();
        let flat = MetricJet::<Rational>::flat(&ctx);
        let x4 = Jet::variable(&ctx, 3).unwrap();
        assert_eq!(normalize_geodesic(&flat, &x4).unwrap(), x4);
        let twice = x4.scale(&q(2, 1));
        let out = normalize_geodesic(&flat, &twice).unwrap();
        assert_eq!(out.truncate(3), x4.truncate(3));

        for seed in 0..3 {
            let spec = generate_random(4, 4, seed, CoefficientMode::Exact).unwrap();
            let inst = spec.instantiate::<Rational>().unwrap();
            let s = normalize_geodesic(&inst.metric, &inst.defining_function).unwrap();
            let rho = unit_residual(&inst.metric, &s).unwrap();
            assert!(rho.is_zero(), "seed {seed}: {rho}");
            // same zero locus: s̃ / s is a unit
            let chart = HypersurfaceChart::adapt(&inst.metric, &inst.defining_function).unwrap();
            let adapted = chart.to_adapted(&s).unwrap();
            assert!(normal_slice(&adapted, 3, 0).is_zero());
            assert!(normal_slice(&adapted, 3, 1).value().is_positive());
        }
    }

    #[test]
    fn flat_hyperplane_is_already_asymptotically_unit() {
        let ctx = JetContext::new(4, 5).unwrap();
        let flat = MetricJet::<Rational>::flat(&ctx);
        let x4 = Jet::variable(&ctx, 3).unwrap();
        let imp = normalize_asymptotic_unit(&flat, &x4).unwrap();
        assert_eq!(imp.defining_function.truncate(4), x4.truncate(4));
        assert!(imp.residual.is_zero());
    }

    #[test]
    fn quadratic_defining_function() {
        // s = x_4(1 + x_4): the first sweep has work to do
        let ctx = JetContext::new(4, 5).unwrap();
        let flat = MetricJet::<Rational>::flat(&ctx);
        let x4 = Jet::variable(&ctx, 3).unwrap();
        let s = &x4 + &(&x4 * &x4);
        let before = asymptotic_residual(&flat, &s, None).unwrap();
        assert_eq!(vanishing_degrees(&before, 3), 1);
        let imp = normalize_asymptotic_unit(&flat, &s).unwrap();
        assert!(imp.sweeps[0].before > 0.0);
        assert!(imp.vanishing_degrees() >= 4);
    }

    #[test]
    fn random_scenarios_reach_order_d() {
        for seed in 0..3 {
            let spec = generate_random(4, 5, seed, CoefficientMode::Exact).unwrap();
            let inst = spec.instantiate::<Rational>().unwrap();
            let imp = normalize_asymptotic_unit(&inst.metric, &inst.defining_function).unwrap();
            assert_eq!(imp.residual_order(), 4);
            assert!(imp.vanishing_degrees() >= 4, "seed {seed}: {:?}", imp.profile());
            // and the returned source-coordinate function satisfies it too
            let rho = asymptotic_residual(&inst.metric, &imp.defining_function, None).unwrap();
            let chart = HypersurfaceChart::adapt(&inst.metric, &inst.defining_function).unwrap();
            let adapted = chart.to_adapted(&rho).unwrap();
            assert!(vanishing_degrees(&adapted, 3) >= 4);
        }
    }

    #[test]
    fn condition_is_conformally_invariant() {
        let spec = generate_random(4, 5, 7, CoefficientMode::Exact).unwrap();
        let inst = spec.instantiate::<Rational>().unwrap();
        let omega = inst.conformal_factor.clone().unwrap();
        let rescaled = inst.metric.conformal_rescale(&omega).unwrap();
        let imp = normalize_asymptotic_unit(&inst.metric, &inst.defining_function).unwrap();
        let imp2 = normalize_asymptotic_unit(&rescaled, &inst.defining_function).unwrap();
        assert_eq!(imp.vanishing_degrees(), imp2.vanishing_degrees());
        // I[Ω²g, Ωs] = I[g, s] as jets
        let s = &imp.defining_function;
        let a = asymptotic_residual(&inst.metric, s, None).unwrap();
        let b = asymptotic_residual(&rescaled, &(&omega * s), None).unwrap();
        let k = a.order().min(b.order());
        assert_eq!(a.truncate(k), b.truncate(k));
    }

    #[test]
    fn float_mode_matches() {
        let spec = generate_random(4, 5, 3, CoefficientMode::Float).unwrap();
        let inst = spec.instantiate::<f64>().unwrap();
        let imp = normalize_asymptotic_unit(&inst.metric, &inst.defining_function).unwrap();
        assert!(imp.vanishing_degrees() >= 4, "{:?}", imp.profile());
    }

    #[test]
    fn needs_enough_order() {
        let ctx = JetContext::new(5, 4).unwrap();
        let flat = MetricJet::<Rational>::flat(&ctx);
        let x = Jet::variable(&ctx, 4).unwrap();
        assert!(matches!(normalize_asymptotic_unit(&flat, &x), Err(Error::OrderUnderflow(_))));
    }
}
