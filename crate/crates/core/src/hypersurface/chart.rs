use crate::error::{Error, Result};
use crate::jet::{Jet, JetMap};
use crate::scalar::{CoefficientMode, Scalar};
use crate::tensor::MetricJet;

/// Adapted coordinates `u = (y¹, …, y^{d−1}, s)` around the base point.
///
/// The tangential coordinates are the source coordinates with one axis
/// removed (the one along which `ds` is largest), so on the hypersurface
/// they agree with the source coordinates. The last coordinate is the
/// defining function itself.
#[derive(Clone, Debug)]
pub struct HypersurfaceChart<S> {
    replaced_axis: usize,
    /// source → adapted
    forward: JetMap<S>,
    /// adapted → source
    inverse: JetMap<S>,
    metric: MetricJet<S>,
}

/// Checks `s(0) = 0 ≠ ds(0)` and returns the axis with the largest `|∂_k s(0)|`.
pub fn check_defining_function<S: Scalar>(s: &Jet<S>) -> Result<usize> {
    if !s.value().is_zero() {
        return Err(Error::NotADefiningFunction(
            "s does not vanish at the base point".into(),
        ));
    }
    if s.order() < 1 {
        return Err(Error::OrderUnderflow("defining function needs order at least 1".into()));
    }
    let grad: Vec<f64> = (0..s.dim())
        .map(|k| s.differentiate(k).map(|g| g.value().magnitude()))
        .collect::<Result<_>>()?;
    let (axis, largest) = grad
        .iter()
        .copied()
        .enumerate()
        .fold((0, 0.0), |best, (k, v)| if v > best.1 { (k, v) } else { best });
    if largest == 0.0 {
        return Err(Error::NotADefiningFunction("ds vanishes at the base point".into()));
    }
    if S::MODE == CoefficientMode::Float && largest < 1e-12 {
        return Err(Error::DegenerateConormal);
    }
    Ok(axis)
}

impl<S: Scalar> HypersurfaceChart<S> {
    /// Builds adapted coordinates for `{s = 0}` and pulls the metric back.
    pub fn adapt(metric: &MetricJet<S>, s: &Jet<S>) -> Result<Self> {
        if s.context() != metric.context() {
            return Err(Error::IncompatibleContexts);
        }
        let axis = check_defining_function(s)?;
        let ctx = metric.context().clone();
        let d = ctx.dim();
        let mut comps: Vec<Jet<S>> = (0..d)
            .filter(|&i| i != axis)
            .map(|i| Jet::variable(&ctx, i))
            .collect::<Result<_>>()?;
        comps.push(s.clone());
        let forward = JetMap::new(comps)?;
        let inverse = forward.invert()?;
        let adapted = pull_back_metric(metric, &inverse)?;
        Ok(HypersurfaceChart {
            replaced_axis: axis,
            forward,
            inverse,
            metric: adapted,
        })
    }

    /// A chart for data already given in adapted coordinates (`s = x_d`).
    pub fn from_adapted(metric: MetricJet<S>) -> Self {
        let ctx = metric.context().clone();
        HypersurfaceChart {
            replaced_axis: ctx.dim() - 1,
            forward: JetMap::identity(&ctx),
            inverse: JetMap::identity(&ctx),
            metric,
        }
    }

    /// The same chart carrying another metric already expressed in adapted
    /// coordinates.
    pub fn with_metric(&self, metric: MetricJet<S>) -> Self {
        HypersurfaceChart {
            replaced_axis: self.replaced_axis,
            forward: self.forward.clone(),
            inverse: self.inverse.clone(),
            metric,
        }
    }

    pub fn metric(&self) -> &MetricJet<S> {
        &self.metric
    }

    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    /// Index of the defining-function coordinate in adapted coordinates.
    pub fn normal_axis(&self) -> usize {
        self.dim() - 1
    }

    /// Source axis that was replaced by the defining function.
    pub fn replaced_axis(&self) -> usize {
        self.replaced_axis
    }

    pub fn forward(&self) -> &JetMap<S> {
        &self.forward
    }

    pub fn inverse(&self) -> &JetMap<S> {
        &self.inverse
    }

    /// Expresses a source-coordinate scalar in adapted coordinates.
    pub fn to_adapted(&self, f: &Jet<S>) -> Result<Jet<S>> {
        self.inverse.pull_back(f)
    }

    /// Expresses an adapted-coordinate scalar in source coordinates.
    pub fn to_source(&self, f: &Jet<S>) -> Result<Jet<S>> {
        self.forward.pull_back(f)
    }

    /// Pulls another source metric back along the same chart.
    pub fn adapt_metric(&self, m: &MetricJet<S>) -> Result<MetricJet<S>> {
        pull_back_metric(m, &self.inverse)
    }
}

/// `(ψ*g)_ab = ∂_a ψ^c ∂_b ψ^e (g_ce ∘ ψ)`.
pub fn pull_back_metric<S: Scalar>(g: &MetricJet<S>, psi: &JetMap<S>) -> Result<MetricJet<S>> {
    let ctx = g.context().clone();
    let d = ctx.dim();
    let mut composed = vec![vec![None; d]; d];
    for c in 0..d {
        for e in c..d {
            composed[c][e] = Some(psi.pull_back(g.g(c, e))?);
        }
    }
    let gc = |c: usize, e: usize| composed[c.min(e)][c.max(e)].as_ref().expect("filled");
    let jac: Vec<Vec<Jet<S>>> = psi
        .components()
        .iter()
        .map(|comp| (0..d).map(|a| comp.differentiate(a)).collect::<Result<_>>())
        .collect::<Result<_>>()?;
    MetricJet::from_upper(&ctx, |a, b| {
        let mut acc = Jet::zero(&ctx);
        for c in 0..d {
            if jac[c][a].is_zero() {
                continue;
            }
            for e in 0..d {
                if jac[e][b].is_zero() {
                    continue;
                }
                let t = jac[c][a].checked_mul(&jac[e][b]).expect("same context");
                acc.add_product(&t, gc(c, e));
            }
        }
        acc
    })
}
