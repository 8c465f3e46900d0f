//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 when
//! any criterion fails. Tolerances are pinned below.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use confhyp::conformal::{
    enumerate_form_candidates, probe_invariants, reduce_to_probe, Invariant, ProbeOptions, RescaledPair,
};
use confhyp::curvature::CurvaturePack;
use confhyp::hypersurface::identities;
use confhyp::hypersurface::normalize::{asymptotic_residual, normalize_asymptotic_unit, vanishing_degrees};
use confhyp::hypersurface::{ExtrinsicOptions, ExtrinsicPack, HypersurfaceChart};
use confhyp::residual::Residual;
use confhyp::scenario::generate_random;
use confhyp::{CoefficientMode, Jet, JetContext, MetricJet, Rational, Scalar, TensorJet};

/// Float-mode identity residuals, relative to the largest term.
const FLOAT_REL_TOL: f64 = 1e-8;
/// Wall-clock budget of criterion 1.
const IDENTITY_BUDGET: Duration = Duration::from_secs(60);
const IDENTITY_SCENARIOS: u64 = 20;
const WEIGHT_SCENARIOS: u64 = 20;
const PROBE_TRIALS: usize = 8;
const REDUCE_TO_SCENARIOS: u64 = 10;
/// Trials per reduce-to probe; the bound is an upper bound, so extra trials
/// only make the check stricter.
const REDUCE_TO_TRIALS: usize = 2;
const IMPROVER_SCENARIOS: u64 = 10;

struct Outcome {
    passed: bool,
    detail: String,
}

fn pass_if(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

fn exact_zero(r: &Residual) -> bool {
    r.exact.as_ref().is_some_and(num_traits::Zero::is_zero)
}

fn all_zero<S: Scalar>(t: &TensorJet<S>) -> bool {
    t.components().iter().all(Jet::is_zero)
}

fn pack<S: Scalar>(m: &MetricJet<S>, s: &Jet<S>, fourth: bool) -> confhyp::Result<ExtrinsicPack<S>> {
    let chart = HypersurfaceChart::adapt(m, s)?;
    ExtrinsicPack::compute(&chart, ExtrinsicOptions { fourth_form: fourth })
}

type Check<S> = fn(&ExtrinsicPack<S>) -> confhyp::Result<Residual>;

fn classical<S: Scalar>() -> [(&'static str, Check<S>); 4] {
    [
        ("gauss", identities::gauss),
        ("codazzi", identities::codazzi),
        ("egregium", identities::theorema_egregium),
        ("fialkow_gauss", identities::fialkow_gauss),
    ]
}

fn criterion_1() -> confhyp::Result<Outcome> {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut worst_float: f64 = 0.0;
    for d in [4, 5, 6] {
        for seed in 0..IDENTITY_SCENARIOS {
            let spec = generate_random(d, 4, seed, CoefficientMode::Exact)?;
            let inst = spec.instantiate::<Rational>()?;
            let p = pack(&inst.metric, &inst.defining_function, false)?;
            for (name, f) in classical::<Rational>() {
                if !exact_zero(&f(&p)?) {
                    failures.push(format!("exact {name} d={d} seed={seed}"));
                }
            }
            let inst = spec.instantiate::<f64>()?;
            let p = pack(&inst.metric, &inst.defining_function, false)?;
            for (name, f) in classical::<f64>() {
                let r = f(&p)?;
                worst_float = worst_float.max(r.magnitude / r.scale.max(1.0));
                if !r.passes(FLOAT_REL_TOL) {
                    failures.push(format!("float {name} d={d} seed={seed}"));
                }
            }
        }
    }
    let elapsed = start.elapsed();
    let in_budget = elapsed <= IDENTITY_BUDGET;
    Ok(pass_if(
        failures.is_empty() && in_budget,
        format!(
            "{} scenarios x 4 identities, exact residuals 0, worst float relative residual {worst_float:.2e} \
             (tol {FLOAT_REL_TOL:e}), {:.1}s (budget {}s){}",
            3 * IDENTITY_SCENARIOS,
            elapsed.as_secs_f64(),
            IDENTITY_BUDGET.as_secs(),
            if failures.is_empty() { String::new() } else { format!("; failed: {failures:?}") }
        ),
    ))
}

/// Criteria 2 and 8 share the rescaled packs.
fn criteria_2_and_8() -> confhyp::Result<(Outcome, Outcome)> {
    let mut failures = Vec::new();
    let mut controls = 0;
    let mut control_failures = Vec::new();
    let mut smallest_control = f64::INFINITY;
    for d in [4, 5, 6] {
        for seed in 0..WEIGHT_SCENARIOS {
            let spec = generate_random(d, 4, 100 + seed, CoefficientMode::Exact)?;
            let inst = spec.instantiate::<Rational>()?;
            let omega = inst.conformal_factor.clone().expect("generated scenarios carry Ω");
            let pair = RescaledPair::compute(&inst.metric, &inst.defining_function, &omega, d != 5)?;
            let mut laws = vec![
                pair.weight_law(Invariant::SecondFormTf, 1)?,
                pair.weight_law(Invariant::ThirdForm, 0)?,
                pair.mean_curvature_law()?,
                pair.schouten_trace_law()?,
            ];
            if d != 5 {
                laws.push(pair.weight_law(Invariant::FourthForm, -1)?);
            }
            for law in laws {
                if !exact_zero(&law.residual) {
                    failures.push(format!("{} d={d} seed={}", law.name, 100 + seed));
                }
            }
            let naive = pair.naive_mean_curvature_law()?;
            controls += 1;
            smallest_control = smallest_control.min(naive.residual.magnitude);
            if exact_zero(&naive.residual) {
                control_failures.push(format!("d={d} seed={}", 100 + seed));
            }
        }
    }
    let c2 = pass_if(
        failures.is_empty(),
        format!(
            "IIo (w=1), III (w=0), H, J exact-zero on {} scenarios d in 4,5,6; IV (w=-1) on d in 4,6{}",
            3 * WEIGHT_SCENARIOS,
            if failures.is_empty() { String::new() } else { format!("; failed: {failures:?}") }
        ),
    );
    let c8 = pass_if(
        control_failures.is_empty(),
        format!(
            "naive H law nonzero on {}/{controls} non-constant conformal factors, smallest residual {smallest_control:.3e}",
            controls - control_failures.len()
        ),
    );
    Ok((c2, c8))
}

fn criterion_3() -> confhyp::Result<Outcome> {
    let spec = generate_random(4, 5, 1, CoefficientMode::Exact)?;
    let inst = spec.instantiate::<Rational>()?;
    let chart = HypersurfaceChart::adapt(&inst.metric, &inst.defining_function)?;
    let opts = ProbeOptions {
        max_order: 4,
        trials: PROBE_TRIALS,
        seed: 2024,
    };
    let invariants = [
        Invariant::UnitConormal,
        Invariant::MeanCurvature,
        Invariant::SecondFormTf,
        Invariant::ThirdForm,
        Invariant::FourthForm,
    ];
    let reports = probe_invariants(chart.metric(), &invariants, &opts)?;
    let mut ok = true;
    let mut seen = Vec::new();
    for (inv, r) in invariants.iter().zip(&reports) {
        ok &= r.detected_order == Some(inv.transverse_order());
        seen.push(format!("{}->{}", inv, r.detected_order.map_or("none".into(), |k| k.to_string())));
    }
    let omega = chart.to_adapted(inst.conformal_factor.as_ref().expect("Ω"))?;
    let rescaled = chart.metric().conformal_rescale(&omega)?;
    let covariant = [Invariant::SecondFormTf, Invariant::ThirdForm, Invariant::FourthForm];
    let again = probe_invariants(&rescaled, &covariant, &opts)?;
    let mut agree = true;
    for (inv, r) in covariant.iter().zip(&again) {
        let i = invariants.iter().position(|x| x == inv).expect("probed");
        agree &= r.detected_order == reports[i].detected_order;
    }
    Ok(pass_if(
        ok && agree,
        format!(
            "d=4 K=5 N={PROBE_TRIALS} exact: {}; g vs Omega^2 g agree for IIo, III, IV: {agree}",
            seen.join(" ")
        ),
    ))
}

fn criterion_4() -> confhyp::Result<Outcome> {
    let mut violations = Vec::new();
    let mut worst = [0usize; 2];
    for d in [4, 5] {
        for seed in 0..REDUCE_TO_SCENARIOS {
            let spec = generate_random(d, 4, 200 + seed, CoefficientMode::Exact)?;
            let inst = spec.instantiate::<Rational>()?;
            let chart = HypersurfaceChart::adapt(&inst.metric, &inst.defining_function)?;
            let opts = ProbeOptions {
                max_order: 3,
                trials: REDUCE_TO_TRIALS,
                seed: 200 + seed,
            };
            for r in reduce_to_probe(chart.metric(), &[0, 1], &opts)? {
                let m: usize = r.name[1..2].parse().expect("m prefix");
                let k = r.detected_order.unwrap_or(0);
                worst[m] = worst[m].max(k);
                if k > m + 1 {
                    violations.push(format!("{} d={d} seed={}", r.name, 200 + seed));
                }
            }
        }
    }
    Ok(pass_if(
        violations.is_empty(),
        format!(
            "7 combinations x m in 0,1 on {} scenarios d in 4,5 (N={REDUCE_TO_TRIALS}, k<=3): max detected order m=0 -> {}, m=1 -> {}{}",
            2 * REDUCE_TO_SCENARIOS,
            worst[0],
            worst[1],
            if violations.is_empty() { String::new() } else { format!("; violations: {violations:?}") }
        ),
    ))
}

fn criterion_5() -> confhyp::Result<Outcome> {
    let mut failures = Vec::new();
    for seed in 0..IMPROVER_SCENARIOS {
        let spec = generate_random(4, 5, 300 + seed, CoefficientMode::Exact)?;
        let inst = spec.instantiate::<Rational>()?;
        let imp = normalize_asymptotic_unit(&inst.metric, &inst.defining_function)?;
        // coefficients of t^0 .. t^3 vanish exactly
        if imp.vanishing_degrees() < 4 {
            failures.push(format!("seed={} vanishing {:?}", 300 + seed, imp.profile()));
        }
        let omega = inst.conformal_factor.clone().expect("Ω");
        let rescaled = inst.metric.conformal_rescale(&omega)?;
        let imp2 = normalize_asymptotic_unit(&rescaled, &inst.defining_function)?;
        if imp2.vanishing_degrees() != imp.vanishing_degrees() || imp2.residual_order() != imp.residual_order() {
            failures.push(format!("seed={} rescaled order differs", 300 + seed));
        }
        // the improved s, rescaled to Ωs, satisfies the condition for Ω²g too
        let s2 = omega.checked_mul(&imp.defining_function)?;
        let rho = asymptotic_residual(&rescaled, &s2, None)?;
        let chart = HypersurfaceChart::adapt(&rescaled, &s2)?;
        if vanishing_degrees(&chart.to_adapted(&rho)?, 3) < 4 {
            failures.push(format!("seed={} Omega s not asymptotic unit for Omega^2 g", 300 + seed));
        }
    }
    Ok(pass_if(
        failures.is_empty(),
        format!(
            "{IMPROVER_SCENARIOS} scenarios d=4 K=5: residual coefficients through s^3 exactly 0, same order under Omega^2 g{}",
            if failures.is_empty() { String::new() } else { format!("; failed: {failures:?}") }
        ),
    ))
}

fn criterion_6() -> Outcome {
    let mut bad = Vec::new();
    for m in 3..=8 {
        let set = enumerate_form_candidates(m, 8);
        let exps: Vec<[u32; 6]> = set.solutions.iter().map(|s| s.exponents).collect();
        if exps != [[1, 0, 0, 0, m - 3, 1], [2, 0, 0, 2, m - 3, 1]] || !set.flagged.is_empty() {
            bad.push(m);
        }
    }
    let m3 = enumerate_form_candidates(3, 8);
    let names: Vec<&str> = m3.solutions.iter().map(|s| s.description.as_str()).collect();
    let shapes = names == ["Ric_ab", "n^c n^d R_cabd"];
    pass_if(
        bad.is_empty() && shapes,
        format!("2 solutions for each m in 3..=8, none flagged; m=3: {names:?}"),
    )
}

fn unit_sphere(ctx: &JetContext) -> confhyp::Result<Jet<Rational>> {
    let d = ctx.dim();
    let mut inner = Jet::one(ctx);
    inner.add_scaled(&q(2, 1), &Jet::variable(ctx, d - 1)?);
    for i in 0..d {
        let x = Jet::variable(ctx, i)?;
        inner.add_product(&x, &x);
    }
    inner.sqrt()?.checked_sub(&Jet::one(ctx))
}

fn criterion_7() -> confhyp::Result<Outcome> {
    let mut notes = Vec::new();
    let ctx = JetContext::new(4, 4)?;
    let flat = MetricJet::<Rational>::flat(&ctx);

    let p = pack(&flat, &unit_sphere(&ctx)?, true)?;
    let ii_is_gbar = all_zero(&p.second.checked_sub(p.g_bar.metric())?);
    let h_one = *p.mean.value() == q(1, 1);
    let sphere = ii_is_gbar && h_one && all_zero(&p.second_tf) && all_zero(&p.third) && all_zero(p.fourth()?);
    notes.push(format!("sphere II=gbar {ii_is_gbar} H=1 {h_one}"));

    // x_1² + (x_4 + 1)² = 1
    let mut inner = Jet::one(&ctx);
    let x1 = Jet::variable(&ctx, 0)?;
    let x4 = Jet::variable(&ctx, 3)?;
    inner.add_scaled(&q(2, 1), &x4);
    inner.add_product(&x4, &x4);
    inner.add_product(&x1, &x1);
    let cyl = pack(&flat, &inner.sqrt()?.checked_sub(&Jet::one(&ctx))?, false)?;
    let h = cyl.mean.value().clone();
    let expected_tf = |i: usize, j: usize| match (i, j) {
        (0, 0) => q(2, 3),
        (a, b) if a == b => q(-1, 3),
        _ => q(0, 1),
    };
    let tf_ok = cyl.second_tf.indices().all(|ix| *cyl.second_tf.get(&ix).value() == expected_tf(ix[0], ix[1]));
    let cylinder = h == q(1, 3) && tf_ok;
    notes.push(format!("cylinder H={h} IIo=diag(2/3,-1/3,-1/3) {tf_ok}"));

    // Ω²δ with a generic polynomial Ω and a random hypersurface
    let spec = generate_random(4, 4, 7, CoefficientMode::Exact)?;
    let inst = spec.instantiate::<Rational>()?;
    let omega = inst.conformal_factor.clone().expect("Ω");
    let cf = flat.conformal_rescale(&omega)?;
    let bulk = CurvaturePack::compute(&cf, true)?;
    let cp = pack(&cf, &inst.defining_function, true)?;
    let weyl = all_zero(&bulk.weyl);
    let cotton = all_zero(bulk.cotton()?);
    let forms = all_zero(&cp.third) && all_zero(cp.fourth()?);
    let nontrivial = !all_zero(&bulk.riemann);
    notes.push(format!("conformally flat W=0 {weyl} C=0 {cotton} III=IV=0 {forms}"));

    Ok(pass_if(
        sphere && cylinder && weyl && cotton && forms && nontrivial,
        format!("exact rational: {}", notes.join("; ")),
    ))
}

fn report(n: usize, name: &str, result: confhyp::Result<Outcome>) -> bool {
    match result {
        Ok(o) => {
            println!("criterion {n} [{name}]: {} - {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
            o.passed
        }
        Err(e) => {
            println!("criterion {n} [{name}]: FAIL - error: {e}");
            false
        }
    }
}

fn main() -> ExitCode {
    // `cargo test -- --list` and filters come through as arguments
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return ExitCode::SUCCESS;
    }
    let start = Instant::now();
    let mut ok = true;
    ok &= report(1, "classical identities", criterion_1());
    let (c2, c8) = match criteria_2_and_8() {
        Ok((a, b)) => (Ok(a), Ok(b)),
        Err(e) => (Err(e.clone()), Err(e)),
    };
    ok &= report(2, "weight laws", c2);
    ok &= report(3, "transverse-order probes", criterion_3());
    ok &= report(4, "reduce-to bounds", criterion_4());
    ok &= report(5, "defining-function improver", criterion_5());
    ok &= report(6, "candidate enumeration", Ok(criterion_6()));
    ok &= report(7, "closed-form oracles", criterion_7());
    ok &= report(8, "negative control", c8);
    println!(
        "acceptance: {} in {:.1}s",
        if ok { "all criteria pass" } else { "FAILED" },
        start.elapsed().as_secs_f64()
    );
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
