//! Transverse-order probes: perturb the adapted metric by `ε h(y) t^k` with
//! `ε² = 0` and read off which invariants feel the perturbation at `t = 0`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::Invariant;
use crate::curvature::CurvaturePack;
use crate::error::{Error, Result};
use crate::hypersurface::{normal_derivative, ExtrinsicOptions, ExtrinsicPack, HypersurfaceChart};
use crate::jet::{Jet, JetContext};
use crate::scalar::{CoefficientMode, Dual, Scalar};
use crate::tensor::{multi_indices, MetricJet, TensorJet};

/// Relative threshold for calling a float sensitivity nonzero.
pub const FLOAT_SENSITIVITY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProbeOptions {
    /// Largest normal power `k` perturbed.
    pub max_order: usize,
    pub trials: usize,
    pub seed: u64,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions {
            max_order: 4,
            trials: 5,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport {
    pub name: String,
    /// Largest `k` with a nonzero sensitivity in some trial.
    pub detected_order: Option<usize>,
    /// Largest sensitivity over trials, indexed by `k`.
    pub sensitivities: Vec<f64>,
    pub nonzero: Vec<bool>,
    pub trials: usize,
    pub seed: u64,
    pub max_order: usize,
    pub mode: CoefficientMode,
}

/// Seed of trial `trial`, independent of scheduling.
pub fn subseed(seed: u64, trial: usize) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ (trial as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `g + ε h(y) t^k` with a random symmetric `h` of tangential degree ≤ 2.
fn perturbed<S: Scalar>(
    g: &MetricJet<S>,
    k: usize,
    order: usize,
    rng: &mut ChaCha8Rng,
) -> Result<MetricJet<Dual<S>>> {
    let base = g.truncate(order).map_scalars(|x| Dual::real(x.clone()))?;
    let ctx = base.context().clone();
    let d = ctx.dim();
    let n = d - 1;
    let mut exps: Vec<Vec<u8>> = Vec::new();
    let wide = JetContext::new(d, k + 2)?;
    for e in wide.exponents() {
        let tangential: usize = e[..n].iter().map(|&x| x as usize).sum();
        if e[n] as usize == k && tangential <= 2 {
            exps.push(e.to_vec());
        }
    }
    // the draws do not depend on `order`, only which of them survive
    MetricJet::from_upper(&ctx, |i, j| {
        let mut h = Jet::zero(&ctx);
        for e in &exps {
            let c: i64 = rng.gen_range(-3..=3);
            if c != 0 && e.iter().map(|&x| x as usize).sum::<usize>() <= order {
                let eps = Dual::new(S::zero(), S::from_i64(c));
                h = h.checked_add(&Jet::monomial(&ctx, e, eps).expect("valid exponent")).expect("same context");
            }
        }
        base.g(i, j).checked_add(&h).expect("same context")
    })
}

/// Size of the `ε` part of `v` and whether it counts as nonzero relative to
/// the size of the real parts.
fn sensitivity<S: Scalar>(values: &[Dual<S>]) -> (f64, bool) {
    let eps = values.iter().map(|v| v.eps.magnitude()).fold(0.0, f64::max);
    let nonzero = match S::MODE {
        CoefficientMode::Exact => values.iter().any(|v| !v.eps.is_zero()),
        CoefficientMode::Float => {
            let scale = values.iter().map(|v| v.re.magnitude()).fold(1.0, f64::max);
            eps > FLOAT_SENSITIVITY_TOLERANCE * scale
        }
    };
    (eps, nonzero)
}

fn check_options(adapted_order: usize, opts: &ProbeOptions, needed: usize) -> Result<()> {
    if opts.trials == 0 {
        return Err(Error::InvalidArgument("probe needs at least one trial".into()));
    }
    if opts.max_order > adapted_order {
        return Err(Error::OrderUnderflow(format!(
            "probe order {} exceeds the adapted metric order {adapted_order}",
            opts.max_order
        )));
    }
    if needed > adapted_order {
        return Err(Error::OrderUnderflow(format!(
            "probe needs an adapted metric of order {needed}, got {adapted_order}"
        )));
    }
    Ok(())
}

/// Runs `eval` on every `(trial, k)` perturbation and aggregates one report
/// per returned value group.
fn run_probe<S, F>(
    adapted: &MetricJet<S>,
    names: &[String],
    needed: usize,
    opts: &ProbeOptions,
    eval: F,
) -> Result<Vec<ProbeReport>>
where
    S: Scalar,
    F: Fn(&MetricJet<Dual<S>>) -> Result<Vec<Vec<Dual<S>>>> + Sync,
{
    check_options(adapted.order(), opts, needed)?;
    let jobs: Vec<(usize, usize)> = (0..opts.trials)
        .flat_map(|t| (0..=opts.max_order).map(move |k| (t, k)))
        .collect();
    let results: Vec<Result<Vec<(f64, bool)>>> = jobs
        .par_iter()
        .map(|&(trial, k)| {
            let mut rng = ChaCha8Rng::seed_from_u64(subseed(subseed(opts.seed, trial), k));
            let order = k.max(needed).min(adapted.order());
            let g = perturbed(adapted, k, order, &mut rng)?;
            Ok(eval(&g)?.iter().map(|v| sensitivity(v)).collect())
        })
        .collect();

    let mut reports: Vec<ProbeReport> = names
        .iter()
        .map(|name| ProbeReport {
            name: name.clone(),
            detected_order: None,
            sensitivities: vec![0.0; opts.max_order + 1],
            nonzero: vec![false; opts.max_order + 1],
            trials: opts.trials,
            seed: opts.seed,
            max_order: opts.max_order,
            mode: S::MODE,
        })
        .collect();
    for (&(_, k), res) in jobs.iter().zip(results) {
        for (rep, (mag, nz)) in reports.iter_mut().zip(res?) {
            rep.sensitivities[k] = rep.sensitivities[k].max(mag);
            rep.nonzero[k] |= nz;
        }
    }
    for rep in &mut reports {
        rep.detected_order = rep.nonzero.iter().rposition(|&b| b);
    }
    Ok(reports)
}

/// Probes several invariants, sharing one perturbed pack per `(trial, k)`.
/// `adapted` is a metric in adapted coordinates (`Σ = {x_d = 0}`).
pub fn probe_invariants<S: Scalar>(
    adapted: &MetricJet<S>,
    invariants: &[Invariant],
    opts: &ProbeOptions,
) -> Result<Vec<ProbeReport>> {
    let fourth = invariants.contains(&Invariant::FourthForm);
    if fourth && adapted.dim() == 5 {
        return Err(Error::FourthFormExcluded);
    }
    let needed = invariants.iter().map(|i| i.required_order()).max().unwrap_or(2);
    let names: Vec<String> = invariants.iter().map(|i| i.name().to_string()).collect();
    run_probe(adapted, &names, needed, opts, |g| {
        let chart = HypersurfaceChart::from_adapted(g.clone());
        let pack = ExtrinsicPack::compute(&chart, ExtrinsicOptions { fourth_form: fourth })?;
        invariants.iter().map(|i| i.values(&pack)).collect()
    })
}

pub fn transverse_order_probe<S: Scalar>(
    invariant: Invariant,
    adapted: &MetricJet<S>,
    opts: &ProbeOptions,
) -> Result<ProbeReport> {
    Ok(probe_invariants(adapted, &[invariant], opts)?.remove(0))
}

/// Names of the reduce-to combinations, in the order returned by
/// [`reduce_to_values`].
pub const REDUCE_TO_COMBOS: [&str; 7] = [
    "T(R)",
    "T(n.R)",
    "T(nn.R)+(d-2)To(P)+gbar.J",
    "T(Ric)-(d-2)To(P)-gbar.J",
    "T(n.Ric)",
    "nn.Ric-(d-1)J",
    "Sc-2(d-1)J",
];

/// Base-point values of the seven reduce-to combinations with `m` normal
/// derivatives, for a bulk pack in adapted coordinates.
pub fn reduce_to_values<S: Scalar>(bulk: &CurvaturePack<S>, m: usize) -> Result<Vec<Vec<S>>> {
    let metric = &bulk.metric;
    let d = metric.dim();
    let n = d - 1;
    let norm = metric.g_inv(n, n).sqrt()?.reciprocal()?;
    let n_up: Vec<Jet<S>> = (0..d)
        .map(|a| metric.g_inv(a, n).checked_mul(&norm))
        .collect::<Result<_>>()?;
    let nd = |t: &TensorJet<S>| -> Result<Vec<S>> {
        if m == 0 {
            return Ok(t.values());
        }
        Ok(normal_derivative(t, &n_up, &bulk.christoffel, m)?.values())
    };
    let riem = nd(&bulk.riemann)?;
    let ric = nd(&bulk.ricci)?;
    let p = nd(&bulk.schouten)?;
    let j = nd(&TensorJet::scalar(bulk.j.clone()))?.remove(0);
    let sc = nd(&TensorJet::scalar(bulk.scalar.clone()))?.remove(0);
    let nv: Vec<S> = n_up.iter().map(|x| x.value().clone()).collect();

    let at = |vals: &[S], idx: &[usize]| -> S {
        let pos = idx.iter().fold(0, |acc, &i| acc * d + i);
        vals[pos].clone()
    };
    let gbar: Vec<Vec<S>> = (0..n)
        .map(|i| (0..n).map(|k| metric.g(i, k).value().clone()).collect())
        .collect();
    let gbar_inv = invert_small(&gbar)?;
    let mut p_trace = S::zero();
    for i in 0..n {
        for k in 0..n {
            p_trace.mul_acc(&gbar_inv[i][k], &at(&p, &[i, k]));
        }
    }
    let p_tr_part = p_trace.mul_ref(&S::from_ratio(1, n as i64));
    let p_tf = |i: usize, k: usize| at(&p, &[i, k]).sub_ref(&p_tr_part.mul_ref(&gbar[i][k]));
    let dm2 = S::from_i64(d as i64 - 2);
    let dm1 = S::from_i64(d as i64 - 1);

    let c1: Vec<S> = multi_indices(4, n).map(|idx| at(&riem, &idx)).collect();
    let c2: Vec<S> = multi_indices(3, n)
        .map(|idx| {
            let mut acc = S::zero();
            for (a, na) in nv.iter().enumerate() {
                acc.mul_acc(na, &at(&riem, &[a, idx[0], idx[1], idx[2]]));
            }
            acc
        })
        .collect();
    let nn_r = |i: usize, k: usize| {
        let mut acc = S::zero();
        for (a, na) in nv.iter().enumerate() {
            for (b, nb) in nv.iter().enumerate() {
                acc.mul_acc(&na.mul_ref(nb), &at(&riem, &[a, i, k, b]));
            }
        }
        acc
    };
    let c3: Vec<S> = multi_indices(2, n)
        .map(|ix| {
            nn_r(ix[0], ix[1])
                .add_ref(&dm2.mul_ref(&p_tf(ix[0], ix[1])))
                .add_ref(&gbar[ix[0]][ix[1]].mul_ref(&j))
        })
        .collect();
    let c4: Vec<S> = multi_indices(2, n)
        .map(|ix| {
            at(&ric, &ix)
                .sub_ref(&dm2.mul_ref(&p_tf(ix[0], ix[1])))
                .sub_ref(&gbar[ix[0]][ix[1]].mul_ref(&j))
        })
        .collect();
    let c5: Vec<S> = (0..n)
        .map(|i| {
            let mut acc = S::zero();
            for (b, nb) in nv.iter().enumerate() {
                acc.mul_acc(nb, &at(&ric, &[i, b]));
            }
            acc
        })
        .collect();
    let mut nn_ric = S::zero();
    for (a, na) in nv.iter().enumerate() {
        for (b, nb) in nv.iter().enumerate() {
            nn_ric.mul_acc(&na.mul_ref(nb), &at(&ric, &[a, b]));
        }
    }
    let c6 = vec![nn_ric.sub_ref(&dm1.mul_ref(&j))];
    let c7 = vec![sc.sub_ref(&S::from_i64(2 * (d as i64 - 1)).mul_ref(&j))];
    Ok(vec![c1, c2, c3, c4, c5, c6, c7])
}

fn invert_small<S: Scalar>(a: &[Vec<S>]) -> Result<Vec<Vec<S>>> {
    let n = a.len();
    let mut m: Vec<Vec<S>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { S::one() } else { S::zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .filter(|&r| m[r][col].recip().is_some())
            .max_by(|&x, &y| m[x][col].to_f64().abs().total_cmp(&m[y][col].to_f64().abs()))
            .ok_or(Error::NotPositiveDefinite)?;
        m.swap(col, pivot);
        let inv = m[col][col].recip().ok_or(Error::NotPositiveDefinite)?;
        for x in m[col].iter_mut() {
            *x = x.mul_ref(&inv);
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in 0..2 * n {
                    let v = m[r][c].sub_ref(&f.mul_ref(&m[col][c]));
                    m[r][c] = v;
                }
            }
        }
    }
    Ok(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Probes the reduce-to combinations for each `m` in `ms`. Report names are
/// `m{m}:{combination}`.
pub fn reduce_to_probe<S: Scalar>(
    adapted: &MetricJet<S>,
    ms: &[usize],
    opts: &ProbeOptions,
) -> Result<Vec<ProbeReport>> {
    let top = ms.iter().copied().max().unwrap_or(0);
    let needed = top + 2;
    let names: Vec<String> = ms
        .iter()
        .flat_map(|m| REDUCE_TO_COMBOS.iter().map(move |c| format!("m{m}:{c}")))
        .collect();
    run_probe(adapted, &names, needed, opts, |g| {
        let bulk = CurvaturePack::compute(g, false)?;
        let mut out = Vec::new();
        for &m in ms {
            out.extend(reduce_to_values(&bulk, m)?);
        }
        Ok(out)
    })
}
