//! Classical hypersurface identities at the base point.
//!
//! The theorema egregium and the Fialkow–Gauss equation are checked in the
//! forms that hold for the curvature conventions of this crate; the
//! `*_variant` functions evaluate alternative sign/factor forms so tests can
//! show that they do not hold.

use crate::curvature::covariant_derivative;
use crate::error::Result;
use crate::residual::Residual;
use crate::scalar::Scalar;

use super::extrinsic::ExtrinsicPack;

type Matrix<S> = Vec<Vec<S>>;

fn values2<S: Scalar>(t: &crate::tensor::TensorJet<S>) -> Matrix<S> {
    let d = t.extent();
    (0..d)
        .map(|i| (0..d).map(|j| t.get(&[i, j]).value().clone()).collect())
        .collect()
}

fn bar_inverse<S: Scalar>(p: &ExtrinsicPack<S>) -> Matrix<S> {
    values2(p.g_bar.inverse())
}

/// `A_{ac} B^c_b = A_{ac} ḡ^{ce} B_{eb}`.
fn mat_contract<S: Scalar>(a: &Matrix<S>, ginv: &Matrix<S>, b: &Matrix<S>) -> Matrix<S> {
    let n = a.len();
    let mut out = vec![vec![S::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = S::zero();
            for c in 0..n {
                for e in 0..n {
                    if ginv[c][e].is_zero() {
                        continue;
                    }
                    acc.mul_acc(&a[i][c], &ginv[c][e].mul_ref(&b[e][j]));
                }
            }
            out[i][j] = acc;
        }
    }
    out
}

fn full_trace<S: Scalar>(ginv: &Matrix<S>, a: &Matrix<S>) -> S {
    let mut acc = S::zero();
    for (gi, ai) in ginv.iter().zip(a) {
        for (g, x) in gi.iter().zip(ai) {
            acc.mul_acc(g, x);
        }
    }
    acc
}

/// `R^⊤_{abcd} = R̄_{abcd} − II_ac II_bd + II_ad II_bc`.
pub fn gauss<S: Scalar>(p: &ExtrinsicPack<S>) -> Result<Residual> {
    let r_top = p.tangential(&p.bulk.riemann)?;
    let rbar = &p.intrinsic.riemann;
    let ii = values2(&p.second);
    let mut diffs = Vec::new();
    let mut terms = Vec::new();
    for idx in r_top.indices() {
        let (a, b, c, e) = (idx[0], idx[1], idx[2], idx[3]);
        let lhs = r_top.get(&idx).value().clone();
        let mut rhs = rbar.get(&idx).value().clone();
        rhs -= ii[a][c].mul_ref(&ii[b][e]);
        rhs += ii[a][e].mul_ref(&ii[b][c]);
        diffs.push(lhs.sub_ref(&rhs));
        terms.push(lhs);
        terms.push(rhs);
    }
    Ok(Residual::from_values(diffs.iter(), terms.iter()))
}

/// `R^⊤_{abcn̂} = ∇̄_a II_bc − ∇̄_b II_ac`.
pub fn codazzi<S: Scalar>(p: &ExtrinsicPack<S>) -> Result<Residual> {
    let r_n = p.bulk.riemann.contract_vector(3, &p.n_up)?;
    let r_top = p.tangential(&r_n)?;
    let dii = covariant_derivative(&p.second, &p.intrinsic.christoffel)?;
    let mut diffs = Vec::new();
    let mut terms = Vec::new();
    for idx in r_top.indices() {
        let (a, b, c) = (idx[0], idx[1], idx[2]);
        let lhs = r_top.get(&idx).value().clone();
        let rhs = dii.get(&[a, b, c]).value().sub_ref(dii.get(&[b, a, c]).value());
        diffs.push(lhs.sub_ref(&rhs));
        terms.push(lhs);
        terms.push(rhs);
    }
    Ok(Residual::from_values(diffs.iter(), terms.iter()))
}

/// `Sc − c·Ric_{n̂n̂} = S̄c + II² − (tr II)²` with `c` the coefficient of the
/// normal Ricci term.
fn egregium_with<S: Scalar>(p: &ExtrinsicPack<S>, ric_coeff: i64) -> Result<Residual> {
    let ric_nn = super::extrinsic::normal_pair(&p.bulk.ricci, &p.n_up)?;
    let n = p.chart.normal_axis();
    let lhs = p
        .bulk
        .scalar
        .restrict_to_slice(n)?
        .value()
        .sub_ref(&S::from_i64(ric_coeff).mul_ref(ric_nn.restrict_to_slice(n)?.value()));
    let ginv = bar_inverse(p);
    let ii = values2(&p.second);
    let ii_sq = full_trace(&ginv, &mat_contract(&ii, &ginv, &ii));
    let tr = full_trace(&ginv, &ii);
    let rhs = p.intrinsic.scalar.value().add_ref(&ii_sq).sub_ref(&tr.mul_ref(&tr));
    let diff = lhs.sub_ref(&rhs);
    Ok(Residual::from_values([&diff], [&lhs, &rhs]))
}

/// `Sc − 2 Ric_{n̂n̂} = S̄c + II² − (tr II)²`.
pub fn theorema_egregium<S: Scalar>(p: &ExtrinsicPack<S>) -> Result<Residual> {
    egregium_with(p, 2)
}

/// The same identity with a single normal Ricci term, which does not hold
/// in general (it fails on an equator of the round sphere).
pub fn theorema_egregium_variant<S: Scalar>(p: &ExtrinsicPack<S>) -> Result<Residual> {
    egregium_with(p, 1)
}

/// `W_{n̂abn̂} + (d−3)P^⊤_ab = I̊I²_ab − I̊I² ḡ_ab/(2(d−2))
///  + (d−3)(P̄_ab + σ(H I̊I_ab + ½H² ḡ_ab))` with `σ = −1` for the
/// identity and `σ = +1` for the variant.
fn fialkow_with<S: Scalar>(p: &ExtrinsicPack<S>, sigma: i64) -> Result<Residual> {
    let d = p.dim() as i64;
    let ginv = bar_inverse(p);
    let gbar = values2(p.g_bar.metric());
    let iitf = values2(&p.second_tf);
    let sq = mat_contract(&iitf, &ginv, &iitf);
    let sq_full = full_trace(&ginv, &sq);
    let p_top = values2(&p.tangential(&p.bulk.schouten)?);
    let pbar = values2(&p.intrinsic.schouten);
    let third = values2(&p.third);
    let h = p.mean.value().clone();
    let dm3 = S::from_i64(d - 3);
    let half = S::from_ratio(1, 2);
    let k = S::from_ratio(1, 2 * (d - 2));
    let sig = S::from_i64(sigma);
    let mut diffs = Vec::new();
    let mut terms = Vec::new();
    for a in 0..gbar.len() {
        for b in 0..gbar.len() {
            let lhs = third[a][b].add_ref(&dm3.mul_ref(&p_top[a][b]));
            let inner = pbar[a][b].add_ref(
                &sig.mul_ref(&h.mul_ref(&iitf[a][b]).add_ref(&half.mul_ref(&h).mul_ref(&h).mul_ref(&gbar[a][b]))),
            );
            let rhs = sq[a][b]
                .sub_ref(&k.mul_ref(&sq_full).mul_ref(&gbar[a][b]))
                .add_ref(&dm3.mul_ref(&inner));
            diffs.push(lhs.sub_ref(&rhs));
            terms.push(lhs);
            terms.push(rhs);
        }
    }
    Ok(Residual::from_values(diffs.iter(), terms.iter()))
}

pub fn fialkow_gauss<S: Scalar>(p: &ExtrinsicPack<S>) -> Result<Residual> {
    fialkow_with(p, -1)
}

/// Fialkow–Gauss with `+H I̊I + ½H² ḡ`, which fails already for a round
/// sphere in flat space.
pub fn fialkow_gauss_variant<S: Scalar>(p: &ExtrinsicPack<S>) -> Result<Residual> {
    fialkow_with(p, 1)
}

/// `⊤̊(I̊I^e)|_Σ − |ds|_g I̊I`.
pub fn extended_form_property<S: Scalar>(p: &ExtrinsicPack<S>) -> Result<Residual> {
    let top = p.tangential(&p.extended)?;
    let top_tf = super::extrinsic::trace_free(&top, &p.g_bar)?;
    let norm = p.unit_norm_on_sigma()?;
    let rhs = p.second_tf.mul_jet(&norm)?;
    let diff = top_tf.checked_sub(&rhs)?;
    let dv = diff.values();
    let tv: Vec<S> = top_tf.values().into_iter().chain(rhs.values()).collect();
    Ok(Residual::from_values(dv.iter(), tv.iter()))
}

/// Trace-freeness of `I̊I`, `III̊` and (when present) `IV̊` at the base point.
pub fn trace_free_forms<S: Scalar>(p: &ExtrinsicPack<S>) -> Result<Residual> {
    let ginv = bar_inverse(p);
    let mut forms = vec![values2(&p.second_tf), values2(&p.third)];
    if let Some(iv) = &p.fourth {
        forms.push(values2(iv));
    }
    let traces: Vec<S> = forms.iter().map(|f| full_trace(&ginv, f)).collect();
    let scale: Vec<S> = forms.iter().flatten().flatten().cloned().collect();
    Ok(Residual::from_values(traces.iter(), scale.iter()))
}
