//! Levi-Civita connection and the curvature stack of a metric jet.
//!
//! Conventions: `R_{ab}{}^c{}_d z^d = [∇_a, ∇_b] z^c`, lowered on the third
//! slot, so the round sphere has `R_{abcd} = g_ac g_bd − g_ad g_bc`.
//! `Ric_{bd} = g^{ac} R_{abcd}`, `P = (Ric − Sc g / (2(d−1))) / (d−2)`,
//! `J = tr P`, `W = R − (g ⊙ P)` and `C_{abc} = ∇^d W_{dcab} / (d−3)`.

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::scalar::Scalar;
use crate::tensor::{MetricJet, TensorJet, Variance};

use Variance::{Co, Contra};

/// Sign relating the divergence form of the Cotton tensor to the Schouten
/// form, `C_{abc} = σ (∇_a P_{bc} − ∇_b P_{ac})`. Fixed by evaluating both
/// sides on a seeded random metric (see the `cotton_sign_is_frozen` test).
pub const COTTON_SIGN: i64 = 1;

/// Christoffel symbols, stored as plain arrays: they are not tensors and
/// must never be fed to [`covariant_derivative`].
#[derive(Clone, Debug)]
pub struct Christoffel<S> {
    dim: usize,
    /// `Γ_{c,ab}` at `[c][a][b]`.
    first: Vec<Jet<S>>,
    /// `Γ^a_{bc}` at `[a][b][c]`.
    second: Vec<Jet<S>>,
}

impl<S: Scalar> Christoffel<S> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `Γ_{c,ab} = ½(∂_a g_bc + ∂_b g_ac − ∂_c g_ab)`.
    pub fn first_kind(&self, c: usize, a: usize, b: usize) -> &Jet<S> {
        &self.first[(c * self.dim + a) * self.dim + b]
    }

    /// `Γ^a_{bc}`.
    pub fn second_kind(&self, a: usize, b: usize, c: usize) -> &Jet<S> {
        &self.second[(a * self.dim + b) * self.dim + c]
    }
}

pub fn compute_christoffel<S: Scalar>(m: &MetricJet<S>) -> Result<Christoffel<S>> {
    if m.order() < 1 {
        return Err(Error::OrderUnderflow(
            "Christoffel symbols need a metric jet of order at least 1".into(),
        ));
    }
    let d = m.dim();
    // dg[k][i][j] = ∂_k g_ij
    let mut dg = Vec::with_capacity(d * d * d);
    for k in 0..d {
        for i in 0..d {
            for j in 0..d {
                dg.push(m.g(i, j).differentiate(k)?);
            }
        }
    }
    let dgi = |k: usize, i: usize, j: usize| &dg[(k * d + i) * d + j];
    let half = S::from_ratio(1, 2);
    let mut first = Vec::with_capacity(d * d * d);
    for c in 0..d {
        for a in 0..d {
            for b in 0..d {
                let s = dgi(a, b, c).checked_add(dgi(b, a, c))?.checked_sub(dgi(c, a, b))?;
                first.push(s.scale(&half));
            }
        }
    }
    let mut second = Vec::with_capacity(d * d * d);
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                let mut acc = Jet::zero(m.context());
                for e in 0..d {
                    acc.add_product(m.g_inv(a, e), &first[(e * d + b) * d + c]);
                }
                second.push(acc);
            }
        }
    }
    Ok(Christoffel {
        dim: d,
        first,
        second,
    })
}

/// `∇T` with the new covariant slot prepended.
pub fn covariant_derivative<S: Scalar>(t: &TensorJet<S>, chr: &Christoffel<S>) -> Result<TensorJet<S>> {
    if t.order() < 1 {
        return Err(Error::OrderUnderflow(
            "covariant derivative of a tensor of effective order 0".into(),
        ));
    }
    let d = t.extent();
    if chr.dim() != d {
        return Err(Error::IncompatibleContexts);
    }
    let mut variance = vec![Co];
    variance.extend_from_slice(t.variance());
    let slots: Vec<Variance> = t.variance().to_vec();
    TensorJet::from_fn(t.context(), &variance, |idx| {
        let a = idx[0];
        let rest = &idx[1..];
        let mut acc = t.get(rest).differentiate(a)?;
        let mut src = rest.to_vec();
        for (s, v) in slots.iter().enumerate() {
            let orig = rest[s];
            for e in 0..d {
                src[s] = e;
                let term = t.get(&src);
                match v {
                    Co => {
                        let gamma = chr.second_kind(e, a, orig);
                        if !gamma.is_zero() && !term.is_zero() {
                            let neg = -gamma;
                            acc.add_product(&neg, term);
                        }
                    }
                    Contra => {
                        let gamma = chr.second_kind(orig, a, e);
                        if !gamma.is_zero() && !term.is_zero() {
                            acc.add_product(gamma, term);
                        }
                    }
                }
            }
            src[s] = orig;
        }
        Ok(acc)
    })
}

/// Gradient of a scalar jet as a covector field.
pub fn gradient<S: Scalar>(f: &Jet<S>) -> Result<Vec<Jet<S>>> {
    (0..f.dim()).map(|a| f.differentiate(a)).collect()
}

/// The curvature stack of one metric.
#[derive(Clone, Debug)]
pub struct CurvaturePack<S> {
    pub metric: MetricJet<S>,
    pub christoffel: Christoffel<S>,
    pub riemann: TensorJet<S>,
    pub ricci: TensorJet<S>,
    pub scalar: Jet<S>,
    pub schouten: TensorJet<S>,
    pub j: Jet<S>,
    pub weyl: TensorJet<S>,
    /// Present when requested at construction (needs `d ≥ 4` and order ≥ 3).
    pub cotton: Option<TensorJet<S>>,
}

impl<S: Scalar> CurvaturePack<S> {
    pub fn compute(m: &MetricJet<S>, with_cotton: bool) -> Result<Self> {
        let d = m.dim();
        if d < 3 {
            return Err(Error::DimensionTooSmall(d, "Schouten tensor needs d ≥ 3".into()));
        }
        if with_cotton && d < 4 {
            return Err(Error::CottonUndefined);
        }
        if m.order() < 2 {
            return Err(Error::OrderUnderflow("curvature needs a metric jet of order at least 2".into()));
        }
        if with_cotton && m.order() < 3 {
            return Err(Error::OrderUnderflow("Cotton tensor needs a metric jet of order at least 3".into()));
        }
        let ctx = m.context().clone();
        let christoffel = compute_christoffel(m)?;
        let riemann = riemann_from(&christoffel, &ctx)?;

        let ricci = TensorJet::from_fn(&ctx, &[Co, Co], |idx| {
            let mut acc = Jet::zero(&ctx);
            for a in 0..d {
                for c in 0..d {
                    let gi = m.g_inv(a, c);
                    if !gi.is_zero() {
                        acc.add_product(gi, riemann.get(&[a, idx[0], c, idx[1]]));
                    }
                }
            }
            Ok(acc)
        })?;
        let ricci = symmetrize_float(ricci);
        let scalar = trace2(&ricci, m);

        let inv_dm2 = S::from_ratio(1, d as i64 - 2);
        let sc_coeff = scalar.scale(&S::from_ratio(1, 2 * (d as i64 - 1)));
        let schouten = TensorJet::from_fn(&ctx, &[Co, Co], |idx| {
            let t = sc_coeff.checked_mul(m.g(idx[0], idx[1]))?;
            Ok(ricci.get(idx).checked_sub(&t)?.scale(&inv_dm2))
        })?;
        let j = trace2(&schouten, m);

        let weyl = TensorJet::from_fn(&ctx, &[Co, Co, Co, Co], |idx| {
            let (a, b, c, e) = (idx[0], idx[1], idx[2], idx[3]);
            let mut acc = riemann.get(idx).clone();
            let neg = |x: &Jet<S>| -x;
            acc.add_product(&neg(m.g(a, c)), schouten.get(&[b, e]));
            acc.add_product(m.g(b, c), schouten.get(&[a, e]));
            acc.add_product(m.g(a, e), schouten.get(&[b, c]));
            acc.add_product(&neg(m.g(b, e)), schouten.get(&[a, c]));
            Ok(acc)
        })?;

        let cotton = if with_cotton {
            Some(cotton_from(&weyl, m, &christoffel)?)
        } else {
            None
        };

        Ok(CurvaturePack {
            metric: m.clone(),
            christoffel,
            riemann,
            ricci,
            scalar,
            schouten,
            j,
            weyl,
            cotton,
        })
    }

    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    pub fn cotton(&self) -> Result<&TensorJet<S>> {
        if self.dim() < 4 {
            return Err(Error::CottonUndefined);
        }
        self.cotton.as_ref().ok_or_else(|| {
            Error::InvalidArgument("curvature pack was computed without the Cotton tensor".into())
        })
    }

    pub fn covariant_derivative(&self, t: &TensorJet<S>) -> Result<TensorJet<S>> {
        covariant_derivative(t, &self.christoffel)
    }

    /// Reassembles `W + g ⊙ P`, which must reproduce the Riemann tensor.
    pub fn reassembled_riemann(&self) -> Result<TensorJet<S>> {
        let m = &self.metric;
        TensorJet::from_fn(m.context(), &[Co, Co, Co, Co], |idx| {
            let (a, b, c, e) = (idx[0], idx[1], idx[2], idx[3]);
            let p = &self.schouten;
            let mut acc = self.weyl.get(idx).clone();
            acc.add_product(m.g(a, c), p.get(&[b, e]));
            acc.add_product(&-m.g(b, c), p.get(&[a, e]));
            acc.add_product(&-m.g(a, e), p.get(&[b, c]));
            acc.add_product(m.g(b, e), p.get(&[a, c]));
            Ok(acc)
        })
    }
}

fn symmetrize_float<S: Scalar>(t: TensorJet<S>) -> TensorJet<S> {
    if S::MODE == crate::scalar::CoefficientMode::Float {
        t.symmetrize(0, 1)
    } else {
        t
    }
}

/// `g^{ab} T_ab` for a (0,2) tensor.
pub fn trace2<S: Scalar>(t: &TensorJet<S>, m: &MetricJet<S>) -> Jet<S> {
    let d = m.dim();
    let mut acc = Jet::zero(m.context());
    for a in 0..d {
        for b in 0..d {
            let gi = m.g_inv(a, b);
            if !gi.is_zero() {
                acc.add_product(gi, t.get(&[a, b]));
            }
        }
    }
    acc
}

/// `R_{abcd} = ∂_a Γ_{c,bd} − ∂_b Γ_{c,ad} − Γ_{e,ac} Γ^e_{bd} + Γ_{e,bc} Γ^e_{ad}`,
/// evaluated on index pairs `a < b`, `c < d`, `(a,b) ≤ (c,d)` and filled in by
/// the algebraic symmetries.
fn riemann_from<S: Scalar>(chr: &Christoffel<S>, ctx: &crate::jet::JetContext) -> Result<TensorJet<S>> {
    let d = chr.dim();
    let mut r = TensorJet::zeros(ctx, &[Co, Co, Co, Co]);
    let pairs: Vec<(usize, usize)> = (0..d).flat_map(|a| (a + 1..d).map(move |b| (a, b))).collect();
    for (p, &(a, b)) in pairs.iter().enumerate() {
        for &(c, e) in &pairs[p..] {
            let value = riemann_component(chr, a, b, c, e)?;
            let neg = -&value;
            r.set(&[a, b, c, e], value.clone());
            r.set(&[b, a, c, e], neg.clone());
            r.set(&[a, b, e, c], neg.clone());
            r.set(&[b, a, e, c], value.clone());
            r.set(&[c, e, a, b], value.clone());
            r.set(&[e, c, a, b], neg.clone());
            r.set(&[c, e, b, a], neg);
            r.set(&[e, c, b, a], value);
        }
    }
    // pairs of equal indices vanish; the zeros already carry full order, so
    // cap them at the curvature order for consistent bookkeeping
    let order = chr.first_kind(0, 0, 0).order().saturating_sub(1);
    Ok(r.map(|j| if j.order() > order { j.truncate(order) } else { j.clone() }))
}

pub(crate) fn riemann_component<S: Scalar>(
    chr: &Christoffel<S>,
    a: usize,
    b: usize,
    c: usize,
    e: usize,
) -> Result<Jet<S>> {
    let d = chr.dim();
    let mut acc = chr
        .first_kind(c, b, e)
        .differentiate(a)?
        .checked_sub(&chr.first_kind(c, a, e).differentiate(b)?)?;
    for f in 0..d {
        acc.add_product(&-chr.first_kind(f, a, c), chr.second_kind(f, b, e));
        acc.add_product(chr.first_kind(f, b, c), chr.second_kind(f, a, e));
    }
    Ok(acc)
}

/// `C_{abc} = (1/(d−3)) g^{de} ∇_e W_{dcab}`, computed as the divergence of
/// the Weyl tensor with its first slot raised.
fn cotton_from<S: Scalar>(
    weyl: &TensorJet<S>,
    m: &MetricJet<S>,
    chr: &Christoffel<S>,
) -> Result<TensorJet<S>> {
    let d = m.dim();
    let ctx = m.context();
    let up = weyl.raise(0, m)?;
    let inv = S::from_ratio(1, d as i64 - 3);
    // div[c][a][b] = ∇_e U^e_{cab}
    let div = TensorJet::from_fn(ctx, &[Co, Co, Co], |idx| {
        let (c, a, b) = (idx[0], idx[1], idx[2]);
        let mut acc = Jet::zero(ctx);
        for e in 0..d {
            acc = acc.checked_add(&up.get(&[e, c, a, b]).differentiate(e)?)?;
        }
        for e in 0..d {
            for f in 0..d {
                let u = |x: usize, y: usize, z: usize, w: usize| up.get(&[x, y, z, w]);
                acc.add_product(chr.second_kind(e, e, f), u(f, c, a, b));
                acc.add_product(&-chr.second_kind(f, e, c), u(e, f, a, b));
                acc.add_product(&-chr.second_kind(f, e, a), u(e, c, f, b));
                acc.add_product(&-chr.second_kind(f, e, b), u(e, c, a, f));
            }
        }
        Ok(acc)
    })?;
    TensorJet::from_fn(ctx, &[Co, Co, Co], |idx| {
        Ok(div.get(&[idx[2], idx[0], idx[1]]).scale(&inv))
    })
}

/// `‖C_{abc} − σ(∇_a P_{bc} − ∇_b P_{ac})‖` at the base point, with the frozen
/// sign [`COTTON_SIGN`].
pub fn cotton_crosscheck<S: Scalar>(pack: &CurvaturePack<S>) -> Result<f64> {
    cotton_schouten_residual(pack, COTTON_SIGN)
}

pub(crate) fn cotton_schouten_residual<S: Scalar>(pack: &CurvaturePack<S>, sign: i64) -> Result<f64> {
    let c = pack.cotton()?;
    let dp = pack.covariant_derivative(&pack.schouten)?;
    let sigma = S::from_i64(sign);
    let mut worst: f64 = 0.0;
    for idx in c.indices() {
        let (a, b, cc) = (idx[0], idx[1], idx[2]);
        let rhs = dp.get(&[a, b, cc]).value().sub_ref(dp.get(&[b, a, cc]).value());
        let diff = c.get(&idx).value().sub_ref(&sigma.mul_ref(&rhs));
        worst = worst.max(diff.magnitude());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::JetContext;
    use crate::scalar::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    /// Deterministic "random" metric: δ plus small polynomial perturbations.
    pub(crate) fn wobbly_metric(d: usize, k: usize, seed: u64) -> MetricJet<Rational> {
        let ctx = JetContext::new(d, k).unwrap();
        let mut state = seed.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        MetricJet::from_upper(&ctx, |i, j| {
            let mut coeffs = Vec::new();
            for n in 0..ctx.monomial_count(k) {
                let r = next();
                let v = if n == 0 {
                    if i == j {
                        q(1, 1)
                    } else {
                        q((r % 3) as i64 - 1, 8)
                    }
                } else if r % 3 == 0 {
                    q(0, 1)
                } else {
                    q(((r >> 8) % 9) as i64 - 4, 16)
                };
                coeffs.push(v);
            }
            Jet::from_coeffs(&ctx, k, coeffs).unwrap()
        })
        .unwrap()
    }

    fn conformally_flat(omega: &Jet<Rational>) -> MetricJet<Rational> {
        let ctx = omega.context().clone();
        MetricJet::flat(&ctx).conformal_rescale(omega).unwrap()
    }

    fn all_zero<S: Scalar>(t: &TensorJet<S>) -> bool {
        t.components().iter().all(|c| c.is_zero())
    }

    #[test]
    fn flat_metric_has_no_curvature() {
        let ctx = JetContext::new(4, 3).unwrap();
        let m = MetricJet::<Rational>::flat(&ctx);
        let p = CurvaturePack::compute(&m, true).unwrap();
        assert!(all_zero(&p.riemann) && all_zero(&p.weyl) && all_zero(p.cotton().unwrap()));
        assert!(p.scalar.is_zero() && p.j.is_zero());
        assert_eq!(cotton_crosscheck(&p).unwrap(), 0.0);
    }

    #[test]
    fn exponential_conformal_factor_christoffel() {
        // g = e^{2x} δ in d = 3: Γ^1_11 = ∂_1 log Ω = 1
        let ctx = JetContext::new(3, 3).unwrap();
        let x = Jet::<f64>::variable(&ctx, 0).unwrap();
        let mut e2x = Jet::one(&ctx);
        let mut term = Jet::one(&ctx);
        for n in 1..=3 {
            term = term.checked_mul(&x.scale(&(2.0 / n as f64))).unwrap();
            e2x = &e2x + &term;
        }
        let m = MetricJet::new(MetricJet::flat(&ctx).metric().mul_jet(&e2x).unwrap()).unwrap();
        let chr = compute_christoffel(&m).unwrap();
        assert!((chr.second_kind(0, 0, 0).value() - 1.0).abs() < 1e-14);
        assert!((chr.second_kind(0, 1, 1).value() + 1.0).abs() < 1e-14);
        assert!(chr.second_kind(1, 1, 1).value().abs() < 1e-14);
    }

    #[test]
    fn round_sphere_curvature() {
        // stereographic metric 4/(1+|x|²)² δ has sectional curvature 1
        let d = 4;
        let ctx = JetContext::new(d, 4).unwrap();
        let mut r2 = Jet::one(&ctx);
        for i in 0..d {
            let xi = Jet::<Rational>::variable(&ctx, i).unwrap();
            r2 = &r2 + &(&xi * &xi);
        }
        let omega = r2.reciprocal().unwrap().scale(&q(2, 1));
        let m = conformally_flat(&omega);
        let p = CurvaturePack::compute(&m, true).unwrap();
        let ric00 = p.ricci.get(&[0, 0]).value().clone();
        assert_eq!(ric00, q(3 * 4, 1));
        assert_eq!(p.scalar.value(), &q(12, 1));
        assert_eq!(p.j.value(), &q(2, 1));
        // R_0101 = g_00 g_11 = 16
        assert_eq!(p.riemann.get(&[0, 1, 0, 1]).value(), &q(16, 1));
        assert!(all_zero(&p.weyl));
        assert!(all_zero(p.cotton().unwrap()));
    }

    #[test]
    fn riemann_symmetries_and_bianchi() {
        for seed in 0..3 {
            let m = wobbly_metric(4, 3, seed);
            let p = CurvaturePack::compute(&m, false).unwrap();
            let r = &p.riemann;
            for idx in r.indices() {
                let (a, b, c, e) = (idx[0], idx[1], idx[2], idx[3]);
                // the stored tensor is built from symmetric pairs, so compare
                // against direct evaluation of the coordinate formula
                let direct = riemann_component(&p.christoffel, a, b, c, e).unwrap();
                assert_eq!(r.get(&idx), &direct, "component {idx:?}");
                let cyc = r
                    .get(&[a, b, c, e])
                    .checked_add(r.get(&[b, c, a, e]))
                    .unwrap()
                    .checked_add(r.get(&[c, a, b, e]))
                    .unwrap();
                assert!(cyc.is_zero(), "first Bianchi identity at {idx:?}");
            }
        }
    }

    #[test]
    fn weyl_is_trace_free_and_reassembles() {
        let m = wobbly_metric(5, 3, 11);
        let p = CurvaturePack::compute(&m, false).unwrap();
        for (s, t) in [(0, 2), (0, 3), (1, 2), (1, 3), (0, 1), (2, 3)] {
            let tr = p.weyl.trace(s, t, &m).unwrap();
            assert!(all_zero(&tr), "trace over ({s},{t})");
        }
        let back = p.reassembled_riemann().unwrap();
        assert_eq!(back, p.riemann);
        assert_eq!(trace2(&p.ricci, &m), p.scalar);
    }

    #[test]
    fn metric_compatibility_and_second_bianchi() {
        let m = wobbly_metric(4, 4, 5);
        let p = CurvaturePack::compute(&m, false).unwrap();
        let dg = p.covariant_derivative(m.metric()).unwrap();
        assert!(all_zero(&dg));
        let dr = p.covariant_derivative(&p.riemann).unwrap();
        for idx in crate::tensor::multi_indices(5, 4) {
            let (e, a, b, c, f) = (idx[0], idx[1], idx[2], idx[3], idx[4]);
            let s = dr
                .get(&[e, a, b, c, f])
                .checked_add(dr.get(&[a, b, e, c, f]))
                .unwrap()
                .checked_add(dr.get(&[b, e, a, c, f]))
                .unwrap();
            assert!(s.is_zero(), "second Bianchi at {idx:?}");
        }
    }

    #[test]
    fn weyl_is_conformally_covariant() {
        let m = wobbly_metric(4, 3, 2);
        let ctx = m.context().clone();
        let omega = Jet::from_terms(
            &ctx,
            [
                (&[0u8, 0, 0, 0][..], q(3, 2)),
                (&[1, 0, 0, 0][..], q(1, 3)),
                (&[0, 1, 1, 0][..], q(-1, 5)),
            ],
        )
        .unwrap();
        let p = CurvaturePack::compute(&m, false).unwrap();
        let m2 = m.conformal_rescale(&omega).unwrap();
        let p2 = CurvaturePack::compute(&m2, false).unwrap();
        let w2 = omega.checked_mul(&omega).unwrap();
        let expected = p.weyl.mul_jet(&w2).unwrap();
        assert_eq!(p2.weyl, expected);
    }

    #[test]
    fn conformally_flat_d4_has_vanishing_weyl_and_cotton() {
        let ctx = JetContext::new(4, 4).unwrap();
        let omega = &Jet::one(&ctx) + &Jet::<Rational>::variable(&ctx, 0).unwrap();
        let m = conformally_flat(&omega);
        let p = CurvaturePack::compute(&m, true).unwrap();
        assert!(all_zero(&p.weyl));
        assert!(all_zero(p.cotton().unwrap()));
        assert_eq!(cotton_crosscheck(&p).unwrap(), 0.0);
    }

    #[test]
    fn cotton_sign_is_frozen() {
        let m = wobbly_metric(5, 3, 2024);
        let p = CurvaturePack::compute(&m, true).unwrap();
        let kept = cotton_schouten_residual(&p, COTTON_SIGN).unwrap();
        let flipped = cotton_schouten_residual(&p, -COTTON_SIGN).unwrap();
        assert_eq!(kept, 0.0);
        assert!(flipped > 0.0);
    }

    #[test]
    fn preconditions_are_enforced() {
        let ctx = JetContext::new(3, 3).unwrap();
        let m = MetricJet::<f64>::flat(&ctx);
        assert_eq!(CurvaturePack::compute(&m, true).err(), Some(Error::CottonUndefined));
        let ctx = JetContext::new(4, 2).unwrap();
        let m = MetricJet::<f64>::flat(&ctx);
        assert!(matches!(
            CurvaturePack::compute(&m, true),
            Err(Error::OrderUnderflow(_))
        ));
        let m = MetricJet::<f64>::flat(&ctx).truncate(1);
        assert!(matches!(CurvaturePack::compute(&m, false), Err(Error::OrderUnderflow(_))));
    }
}
