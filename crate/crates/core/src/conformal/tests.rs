use super::*;
use crate::hypersurface::HypersurfaceChart;
use crate::scenario::generate_random;

fn pair(d: usize, order: usize, seed: u64) -> RescaledPair<Rational> {
    let spec = generate_random(d, order, seed, CoefficientMode::Exact).unwrap();
    let inst = spec.instantiate::<Rational>().unwrap();
    // a normal component in Ω makes the naive H law fail
    let ctx = inst.metric.context().clone();
    let omega = inst
        .conformal_factor
        .unwrap()
        .checked_add(&Jet::variable(&ctx, d - 1).unwrap().scale(&Rational::new(1.into(), 3.into())))
        .unwrap();
    RescaledPair::compute(&inst.metric, &inst.defining_function, &omega, order >= 4).unwrap()
}

#[test]
fn weight_laws_hold_exactly() {
    for (d, seed) in [(4, 1), (5, 2), (6, 3)] {
        let p = pair(d, 3, seed);
        for inv in [Invariant::SecondFormTf, Invariant::ThirdForm] {
            let r = p.weight_law(inv, inv.weight().unwrap()).unwrap();
            assert_eq!(r.residual.exact, Some(Rational::from_integer(0.into())), "d={d} {inv}");
        }
        assert!(p.mean_curvature_law().unwrap().residual.magnitude == 0.0);
        assert!(p.schouten_trace_law().unwrap().residual.magnitude == 0.0);
        assert!(p.naive_mean_curvature_law().unwrap().residual.magnitude > 0.0);
        // a wrong weight is caught
        let wrong = p.weight_law(Invariant::SecondFormTf, 0).unwrap();
        assert!(wrong.residual.magnitude > 0.0, "d={d}");
    }
}

#[test]
fn fourth_form_has_weight_minus_one() {
    let p = pair(4, 4, 7);
    let r = p.weight_law(Invariant::FourthForm, -1).unwrap();
    assert!(r.passes(0.0), "{r:?}");
    // the untracefree second form is not covariant
    let r = p.weight_law(Invariant::SecondForm, 1).unwrap();
    assert!(r.residual.magnitude > 0.0);
}

#[test]
fn invariant_names_roundtrip() {
    for inv in Invariant::ALL {
        assert_eq!(inv.name().parse::<Invariant>().unwrap(), inv);
    }
    assert_eq!("II_tf".parse::<Invariant>().unwrap(), Invariant::SecondFormTf);
    assert!("V".parse::<Invariant>().is_err());
}

fn adapted(d: usize, order: usize, seed: u64) -> crate::tensor::MetricJet<Rational> {
    let spec = generate_random(d, order, seed, CoefficientMode::Exact).unwrap();
    let inst = spec.instantiate::<Rational>().unwrap();
    HypersurfaceChart::adapt(&inst.metric, &inst.defining_function)
        .unwrap()
        .metric()
        .clone()
}

#[test]
fn probes_detect_transverse_orders() {
    let g = adapted(4, 5, 11);
    let opts = ProbeOptions {
        max_order: 4,
        trials: 2,
        seed: 5,
    };
    let reports = probe_invariants(&g, &Invariant::ALL, &opts).unwrap();
    for (inv, rep) in Invariant::ALL.iter().zip(&reports) {
        assert_eq!(rep.detected_order, Some(inv.transverse_order()), "{inv}: {rep:?}");
    }
    // scheduling does not matter
    let again = transverse_order_probe(Invariant::ThirdForm, &g, &opts).unwrap();
    assert_eq!(again, reports[4]);
}

#[test]
fn probe_rejects_orders_beyond_the_jet() {
    let g = adapted(4, 3, 1);
    let opts = ProbeOptions {
        max_order: 3,
        trials: 1,
        seed: 0,
    };
    assert!(matches!(
        transverse_order_probe(Invariant::SecondForm, &g, &opts),
        Err(Error::OrderUnderflow(_))
    ));
}

#[test]
fn reduce_to_combinations_stay_within_bound() {
    let g = adapted(4, 4, 2);
    let opts = ProbeOptions {
        max_order: 3,
        trials: 1,
        seed: 9,
    };
    let reports = reduce_to_probe(&g, &[0, 1], &opts).unwrap();
    assert_eq!(reports.len(), 14);
    for rep in &reports {
        let m: usize = rep.name[1..2].parse().unwrap();
        assert!(rep.detected_order.map_or(true, |k| k <= m + 1), "{rep:?}");
    }
    // every combination reaches the bound except Sc − 2(d−1)J, which is zero
    let orders: Vec<_> = reports.iter().map(|r| r.detected_order).collect();
    let expect = |m: usize| [Some(m + 1); 6].into_iter().chain([None]);
    assert_eq!(orders, expect(0).chain(expect(1)).collect::<Vec<_>>());
}

#[test]
fn probes_work_in_float_mode() {
    let spec = generate_random(4, 4, 3, CoefficientMode::Float).unwrap();
    let inst = spec.instantiate::<f64>().unwrap();
    let g = HypersurfaceChart::adapt(&inst.metric, &inst.defining_function)
        .unwrap()
        .metric()
        .clone();
    let opts = ProbeOptions {
        max_order: 3,
        trials: 2,
        seed: 1,
    };
    let reports = probe_invariants(&g, &[Invariant::SecondForm, Invariant::ThirdForm], &opts).unwrap();
    assert_eq!(reports[0].detected_order, Some(1));
    assert_eq!(reports[1].detected_order, Some(2));
}
