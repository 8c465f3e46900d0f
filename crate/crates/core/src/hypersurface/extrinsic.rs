use crate::curvature::{covariant_derivative, trace2, Christoffel, CurvaturePack};
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::scalar::Scalar;
use crate::tensor::{MetricJet, TensorJet, Variance};

use super::chart::HypersurfaceChart;
use Variance::{Co, Contra};

/// Which of the more expensive outputs to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExtrinsicOptions {
    /// Compute the fourth fundamental form. It is skipped for `d = 5` and
    /// when the adapted metric has order below 3.
    pub fourth_form: bool,
}

impl Default for ExtrinsicOptions {
    fn default() -> Self {
        ExtrinsicOptions { fourth_form: true }
    }
}

/// Extrinsic geometry of `Σ = {s = 0}`. Bulk fields live in adapted
/// coordinates; fields on `Σ` are jets in the `d − 1` tangential coordinates.
#[derive(Clone, Debug)]
pub struct ExtrinsicPack<S> {
    pub chart: HypersurfaceChart<S>,
    pub bulk: CurvaturePack<S>,
    /// `|ds|_g` (bulk).
    pub unit_norm: Jet<S>,
    /// `n̂_a = ∂_a s / |ds|_g` (bulk).
    pub n_low: Vec<Jet<S>>,
    /// `n̂^a` (bulk).
    pub n_up: Vec<Jet<S>>,
    /// `δ^a_b − n̂^a n̂_b` (bulk).
    pub projector: TensorJet<S>,
    pub g_bar: MetricJet<S>,
    /// Curvature of the induced metric.
    pub intrinsic: CurvaturePack<S>,
    pub second: TensorJet<S>,
    pub mean: Jet<S>,
    pub second_tf: TensorJet<S>,
    pub third: TensorJet<S>,
    /// Absent for `d = 5`, where the formula does not apply, or when not requested.
    pub fourth: Option<TensorJet<S>>,
    /// `I̊I^e` for the chart's defining function (bulk).
    pub extended: TensorJet<S>,
}

impl<S: Scalar> ExtrinsicPack<S> {
    pub fn compute(chart: &HypersurfaceChart<S>, options: ExtrinsicOptions) -> Result<Self> {
        let m = chart.metric();
        let d = m.dim();
        if d < 4 {
            return Err(Error::WeylDimension);
        }
        let n = chart.normal_axis();
        let ctx = m.context().clone();
        let want_fourth = options.fourth_form && d != 5 && m.order() >= 3;
        let bulk = CurvaturePack::compute(m, want_fourth)?;

        let norm_sq = m.g_inv(n, n).clone();
        let unit_norm = norm_sq.sqrt()?;
        let inv_norm = unit_norm.reciprocal()?;
        let n_low: Vec<Jet<S>> = (0..d)
            .map(|a| if a == n { inv_norm.clone() } else { Jet::zero(&ctx) })
            .collect();
        let n_up: Vec<Jet<S>> = (0..d)
            .map(|a| m.g_inv(a, n).checked_mul(&inv_norm))
            .collect::<Result<_>>()?;
        let projector = TensorJet::from_fn(&ctx, &[Contra, Co], |idx| {
            let mut p = if idx[0] == idx[1] { Jet::one(&ctx) } else { Jet::zero(&ctx) };
            p.add_product(&-&n_up[idx[0]], &n_low[idx[1]]);
            Ok(p)
        })?;

        let g_bar = MetricJet::new(m.metric().tangential_restriction(n)?)?;
        let intrinsic = CurvaturePack::compute(&g_bar, false)?;

        // II_ab = ∇_a n̂_b = ∂_a n̂_b − Γ^c_ab n̂_c; tangentially only the
        // Christoffel term survives
        let chr = &bulk.christoffel;
        let neg_inv = -&inv_norm;
        let second_bulk = TensorJet::from_fn(&ctx, &[Co, Co], |idx| {
            chr.second_kind(n, idx[0], idx[1]).checked_mul(&neg_inv)
        })?;
        let second = second_bulk.tangential_restriction(n)?;
        let mean = trace2(&second, &g_bar).scale(&S::from_ratio(1, d as i64 - 1));
        let second_tf = second.checked_sub(&g_bar.metric().mul_jet(&mean)?)?;

        let third = normal_sandwich(&bulk.weyl, &n_up)?.tangential_restriction(n)?;

        let fourth = if want_fourth {
            Some(fourth_form(&bulk, &n_up, &g_bar, &intrinsic.christoffel, &mean, &third, n)?)
        } else {
            None
        };

        let t = Jet::variable(&ctx, n)?;
        let extended = extended_form(&bulk, &t)?;

        Ok(ExtrinsicPack {
            chart: chart.clone(),
            bulk,
            unit_norm,
            n_low,
            n_up,
            projector,
            g_bar,
            intrinsic,
            second,
            mean,
            second_tf,
            third,
            fourth,
            extended,
        })
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn fourth(&self) -> Result<&TensorJet<S>> {
        if self.dim() == 5 {
            return Err(Error::FourthFormExcluded);
        }
        self.fourth.as_ref().ok_or_else(|| {
            if self.chart.metric().order() < 3 {
                Error::OrderUnderflow("fourth fundamental form needs an adapted metric of order at least 3".into())
            } else {
                Error::InvalidArgument("fourth fundamental form was not requested".into())
            }
        })
    }

    /// Restriction of a bulk tensor to `Σ` with all slots projected
    /// tangentially (in adapted coordinates: drop the normal index values).
    pub fn tangential(&self, t: &TensorJet<S>) -> Result<TensorJet<S>> {
        t.tangential_restriction(self.chart.normal_axis())
    }

    /// `|ds|_g` restricted to `Σ`.
    pub fn unit_norm_on_sigma(&self) -> Result<Jet<S>> {
        self.unit_norm.restrict_to_slice(self.chart.normal_axis())
    }
}

/// `n̂^c n̂^d T_{c a b d}` for a bulk (0,4) tensor.
pub fn normal_sandwich<S: Scalar>(t: &TensorJet<S>, n_up: &[Jet<S>]) -> Result<TensorJet<S>> {
    let d = t.extent();
    TensorJet::from_fn(t.context(), &[Co, Co], |idx| {
        let mut acc = Jet::zero(t.context());
        for c in 0..d {
            if n_up[c].is_zero() {
                continue;
            }
            for e in 0..d {
                if n_up[e].is_zero() {
                    continue;
                }
                let nn = n_up[c].checked_mul(&n_up[e])?;
                acc.add_product(&nn, t.get(&[c, idx[0], idx[1], e]));
            }
        }
        Ok(acc)
    })
}

/// Trace-free part of a (0,2) tensor with respect to `m`.
pub fn trace_free<S: Scalar>(t: &TensorJet<S>, m: &MetricJet<S>) -> Result<TensorJet<S>> {
    let tr = trace2(t, m).scale(&S::from_ratio(1, m.dim() as i64));
    t.checked_sub(&m.metric().mul_jet(&tr)?)
}

/// `IV̊ = ⊤̊( C_{n̂(ab)} + H W_{n̂abn̂} + (1/(d−5)) ∇̄^c W_{c(ab)n̂}^⊤ )`.
fn fourth_form<S: Scalar>(
    bulk: &CurvaturePack<S>,
    n_up: &[Jet<S>],
    g_bar: &MetricJet<S>,
    bar_chr: &Christoffel<S>,
    mean: &Jet<S>,
    third: &TensorJet<S>,
    n: usize,
) -> Result<TensorJet<S>> {
    let d = bulk.dim();
    let cotton = bulk.cotton()?;
    let c_n = cotton.contract_vector(0, n_up)?.symmetrize(0, 1);
    let c_top = c_n.tangential_restriction(n)?;

    // V_{cab} = W_{cabe} n̂^e, projected to Σ and differentiated intrinsically
    let v = bulk.weyl.contract_vector(3, n_up)?.tangential_restriction(n)?;
    let dv = covariant_derivative(&v, bar_chr)?;
    let dbar = g_bar.dim();
    let bar_ctx = g_bar.context().clone();
    let div = TensorJet::from_fn(&bar_ctx, &[Co, Co], |idx| {
        let mut acc = Jet::zero(&bar_ctx);
        for c in 0..dbar {
            for e in 0..dbar {
                let gi = g_bar.g_inv(c, e);
                if !gi.is_zero() {
                    acc.add_product(gi, dv.get(&[e, c, idx[0], idx[1]]));
                }
            }
        }
        Ok(acc)
    })?
    .symmetrize(0, 1);

    let coeff = S::from_ratio(1, d as i64 - 5);
    let assembled = c_top
        .checked_add(&third.mul_jet(mean)?)?
        .checked_add(&div.scale(&coeff))?;
    trace_free(&assembled, g_bar)
}

/// `I̊I^e_ab = ∇_(a ∇_b)∘ s + s P̊_ab` for a bulk defining function `s`.
pub fn extended_form<S: Scalar>(bulk: &CurvaturePack<S>, s: &Jet<S>) -> Result<TensorJet<S>> {
    let m = &bulk.metric;
    let d = m.dim();
    let ctx = m.context().clone();
    let ds: Vec<Jet<S>> = (0..d).map(|a| s.differentiate(a)).collect::<Result<_>>()?;
    let hess = TensorJet::from_fn(&ctx, &[Co, Co], |idx| {
        let mut h = ds[idx[1]].differentiate(idx[0])?;
        for (c, dc) in ds.iter().enumerate() {
            if dc.is_zero() {
                continue;
            }
            h.add_product(&-bulk.christoffel.second_kind(c, idx[0], idx[1]), dc);
        }
        Ok(h)
    })?
    .symmetrize(0, 1);
    let hess_tf = trace_free(&hess, m)?;
    let p_tf = trace_free(&bulk.schouten, m)?;
    hess_tf.checked_add(&p_tf.mul_jet(s)?)
}

/// `:∇^m_n̂: T = n̂^{a_1} ⋯ n̂^{a_m} ∇_{a_1} ⋯ ∇_{a_m} T`: all derivatives are
/// taken first and the normal contracted afterwards.
pub fn normal_derivative<S: Scalar>(
    t: &TensorJet<S>,
    n_up: &[Jet<S>],
    chr: &Christoffel<S>,
    m: usize,
) -> Result<TensorJet<S>> {
    if m == 1 {
        return contracted_derivative(t, n_up, chr);
    }
    let mut out = t.clone();
    for _ in 0..m {
        out = covariant_derivative(&out, chr)?;
    }
    for _ in 0..m {
        out = out.contract_vector(0, n_up)?;
    }
    Ok(out)
}

/// `n̂^a ∇_a T` without materializing `∇T`.
fn contracted_derivative<S: Scalar>(
    t: &TensorJet<S>,
    n_up: &[Jet<S>],
    chr: &Christoffel<S>,
) -> Result<TensorJet<S>> {
    if t.order() < 1 {
        return Err(Error::OrderUnderflow("normal derivative of an order-0 tensor".into()));
    }
    let d = t.extent();
    let slots = t.variance().to_vec();
    TensorJet::from_fn(t.context(), t.variance(), |idx| {
        let mut acc = Jet::zero(t.context());
        let mut src = idx.to_vec();
        for (a, na) in n_up.iter().enumerate() {
            if na.is_zero() {
                continue;
            }
            let mut da = t.get(idx).differentiate(a)?;
            for (s, v) in slots.iter().enumerate() {
                let orig = idx[s];
                for e in 0..d {
                    src[s] = e;
                    let term = t.get(&src);
                    if term.is_zero() {
                        continue;
                    }
                    match v {
                        Co => da.add_product(&-chr.second_kind(e, a, orig), term),
                        Contra => da.add_product(chr.second_kind(orig, a, e), term),
                    }
                }
                src[s] = orig;
            }
            acc.add_product(na, &da);
        }
        Ok(acc)
    })
}

/// `n̂^a n̂^b T_ab` for a bulk (0,2) tensor.
pub fn normal_pair<S: Scalar>(t: &TensorJet<S>, n_up: &[Jet<S>]) -> Result<Jet<S>> {
    let d = t.extent();
    let mut acc = Jet::zero(t.context());
    for a in 0..d {
        for b in 0..d {
            if n_up[a].is_zero() || n_up[b].is_zero() {
                continue;
            }
            let nn = n_up[a].checked_mul(&n_up[b])?;
            acc.add_product(&nn, t.get(&[a, b]));
        }
    }
    Ok(acc)
}
