//! Tensor fields as arrays of jets.

use crate::error::{Error, Result};
use crate::jet::{Jet, JetContext};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variance {
    /// Lower index.
    Co,
    /// Upper index.
    Contra,
}

/// A tensor field near the base point: one jet per component, every slot
/// ranging over the `ctx.dim()` coordinate directions. Components are stored
/// row-major with the first slot most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorJet<S> {
    ctx: JetContext,
    variance: Vec<Variance>,
    comps: Vec<Jet<S>>,
}

/// Iterator over all multi-indices of a given rank and extent.
pub fn multi_indices(rank: usize, extent: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = extent.pow(rank as u32);
    (0..total).map(move |mut flat| {
        let mut idx = vec![0; rank];
        for slot in (0..rank).rev() {
            idx[slot] = flat % extent;
            flat /= extent;
        }
        idx
    })
}

impl<S: Scalar> TensorJet<S> {
    pub fn zeros(ctx: &JetContext, variance: &[Variance]) -> Self {
        let n = ctx.dim().pow(variance.len() as u32);
        TensorJet {
            ctx: ctx.clone(),
            variance: variance.to_vec(),
            comps: vec![Jet::zero(ctx); n],
        }
    }

    /// Builds a tensor component by component.
    pub fn from_fn(
        ctx: &JetContext,
        variance: &[Variance],
        mut f: impl FnMut(&[usize]) -> Result<Jet<S>>,
    ) -> Result<Self> {
        let comps = multi_indices(variance.len(), ctx.dim())
            .map(|idx| {
                let j = f(&idx)?;
                if j.context() != ctx {
                    return Err(Error::IncompatibleContexts);
                }
                Ok(j)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TensorJet {
            ctx: ctx.clone(),
            variance: variance.to_vec(),
            comps,
        })
    }

    pub fn scalar(value: Jet<S>) -> Self {
        TensorJet {
            ctx: value.context().clone(),
            variance: Vec::new(),
            comps: vec![value],
        }
    }

    pub fn context(&self) -> &JetContext {
        &self.ctx
    }

    pub fn variance(&self) -> &[Variance] {
        &self.variance
    }

    pub fn rank(&self) -> usize {
        self.variance.len()
    }

    pub fn extent(&self) -> usize {
        self.ctx.dim()
    }

    pub fn components(&self) -> &[Jet<S>] {
        &self.comps
    }

    fn flat(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank());
        let d = self.extent();
        idx.iter().fold(0, |acc, &i| {
            debug_assert!(i < d);
            acc * d + i
        })
    }

    pub fn get(&self, idx: &[usize]) -> &Jet<S> {
        &self.comps[self.flat(idx)]
    }

    pub fn set(&mut self, idx: &[usize], value: Jet<S>) {
        let f = self.flat(idx);
        self.comps[f] = value;
    }

    /// Lowest effective order over all components.
    pub fn order(&self) -> usize {
        self.comps.iter().map(Jet::order).min().unwrap_or(0)
    }

    pub fn indices(&self) -> impl Iterator<Item = Vec<usize>> {
        multi_indices(self.rank(), self.extent())
    }

    pub fn map(&self, f: impl Fn(&Jet<S>) -> Jet<S>) -> Self {
        TensorJet {
            ctx: self.ctx.clone(),
            variance: self.variance.clone(),
            comps: self.comps.iter().map(f).collect(),
        }
    }

    pub fn try_map<T: Scalar>(&self, f: impl Fn(&Jet<S>) -> Result<Jet<T>>) -> Result<TensorJet<T>> {
        let comps = self.comps.iter().map(f).collect::<Result<Vec<_>>>()?;
        let ctx = comps.first().map(|c| c.context().clone()).unwrap_or_else(|| self.ctx.clone());
        Ok(TensorJet {
            ctx,
            variance: self.variance.clone(),
            comps,
        })
    }

    fn check_shape(&self, other: &Self) -> Result<()> {
        if self.ctx != other.ctx || self.variance != other.variance {
            Err(Error::IncompatibleContexts)
        } else {
            Ok(())
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let comps = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| a.checked_add(b))
            .collect::<Result<_>>()?;
        Ok(TensorJet {
            ctx: self.ctx.clone(),
            variance: self.variance.clone(),
            comps,
        })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let comps = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| a.checked_sub(b))
            .collect::<Result<_>>()?;
        Ok(TensorJet {
            ctx: self.ctx.clone(),
            variance: self.variance.clone(),
            comps,
        })
    }

    pub fn scale(&self, c: &S) -> Self {
        self.map(|j| j.scale(c))
    }

    /// Multiplies every component by a scalar field.
    pub fn mul_jet(&self, f: &Jet<S>) -> Result<Self> {
        self.try_map(|j| j.checked_mul(f))
    }

    pub fn truncate(&self, order: usize) -> Self {
        self.map(|j| j.truncate(order))
    }

    /// Component values at the base point.
    pub fn values(&self) -> Vec<S> {
        self.comps.iter().map(|j| j.value().clone()).collect()
    }

    /// Largest component magnitude at the base point.
    pub fn max_abs_value(&self) -> f64 {
        self.comps
            .iter()
            .map(|j| j.value().magnitude())
            .fold(0.0, f64::max)
    }

    /// Whether swapping slots `a` and `b` leaves the tensor unchanged through
    /// the effective order.
    pub fn is_symmetric_in(&self, a: usize, b: usize) -> bool {
        self.indices().all(|idx| {
            let mut sw = idx.clone();
            sw.swap(a, b);
            jets_agree(self.get(&idx), self.get(&sw))
        })
    }

    /// Symmetrization over slots `a` and `b`, `T_(ab) = (T_ab + T_ba)/2`.
    pub fn symmetrize(&self, a: usize, b: usize) -> Self {
        let half = S::from_ratio(1, 2);
        let mut out = self.clone();
        for idx in self.indices() {
            let mut sw = idx.clone();
            sw.swap(a, b);
            let sum = self.get(&idx).checked_add(self.get(&sw)).expect("same context");
            out.set(&idx, sum.scale(&half));
        }
        out
    }

    /// Contracts slot `slot` with the matching slot of the (inverse) metric,
    /// flipping its variance.
    pub fn raise(&self, slot: usize, metric: &MetricJet<S>) -> Result<Self> {
        if self.variance[slot] != Variance::Co {
            return Err(Error::InvalidArgument(format!("slot {slot} is already raised")));
        }
        self.contract_slot_with(slot, metric.inverse(), Variance::Contra)
    }

    pub fn lower(&self, slot: usize, metric: &MetricJet<S>) -> Result<Self> {
        if self.variance[slot] != Variance::Contra {
            return Err(Error::InvalidArgument(format!("slot {slot} is already lowered")));
        }
        self.contract_slot_with(slot, metric.metric(), Variance::Co)
    }

    fn contract_slot_with(&self, slot: usize, m: &TensorJet<S>, v: Variance) -> Result<Self> {
        let d = self.extent();
        let mut variance = self.variance.clone();
        variance[slot] = v;
        TensorJet::from_fn(&self.ctx, &variance, |idx| {
            let mut acc = Jet::zero(&self.ctx);
            let mut src = idx.to_vec();
            for e in 0..d {
                src[slot] = e;
                acc.add_product(m.get(&[idx[slot], e]), self.get(&src));
            }
            Ok(acc)
        })
    }

    /// Metric trace over two lower slots `a < b`.
    pub fn trace(&self, a: usize, b: usize, metric: &MetricJet<S>) -> Result<Self> {
        if a >= b || self.variance[a] != Variance::Co || self.variance[b] != Variance::Co {
            return Err(Error::InvalidArgument("trace needs two distinct lower slots".into()));
        }
        let d = self.extent();
        let inv = metric.inverse();
        let variance: Vec<Variance> = self
            .variance
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != a && *i != b)
            .map(|(_, v)| *v)
            .collect();
        TensorJet::from_fn(&self.ctx, &variance, |rest| {
            let mut full = Vec::with_capacity(rest.len() + 2);
            let mut acc = Jet::zero(&self.ctx);
            for i in 0..d {
                for j in 0..d {
                    let gij = inv.get(&[i, j]);
                    if gij.is_zero() {
                        continue;
                    }
                    full.clear();
                    let mut it = rest.iter();
                    for s in 0..rest.len() + 2 {
                        full.push(if s == a {
                            i
                        } else if s == b {
                            j
                        } else {
                            *it.next().expect("rank")
                        });
                    }
                    acc.add_product(gij, self.get(&full));
                }
            }
            Ok(acc)
        })
    }

    /// Contracts a vector `v^a` into slot `slot` (which must be lower).
    pub fn contract_vector(&self, slot: usize, v: &[Jet<S>]) -> Result<Self> {
        if self.variance[slot] != Variance::Co || v.len() != self.extent() {
            return Err(Error::InvalidArgument("vector contraction needs a lower slot".into()));
        }
        let mut variance = self.variance.clone();
        variance.remove(slot);
        TensorJet::from_fn(&self.ctx, &variance, |rest| {
            let mut full = rest.to_vec();
            full.insert(slot, 0);
            let mut acc = Jet::zero(&self.ctx);
            for (e, ve) in v.iter().enumerate() {
                if ve.is_zero() {
                    continue;
                }
                full[slot] = e;
                acc.add_product(ve, self.get(&full));
            }
            Ok(acc)
        })
    }

    /// Restriction of every component to `x_axis = 0`, keeping only index
    /// values `< extent - 1` when `axis` is the last direction. Used to pass
    /// from adapted bulk coordinates to tangential tensors on the slice.
    pub fn tangential_restriction(&self, axis: usize) -> Result<Self> {
        let lower = self
            .ctx
            .lower()
            .ok_or_else(|| Error::InvalidArgument("cannot restrict a one-dimensional tensor".into()))?;
        let keep: Vec<usize> = (0..self.extent()).filter(|&i| i != axis).collect();
        TensorJet::from_fn(&lower, &self.variance, |idx| {
            let src: Vec<usize> = idx.iter().map(|&i| keep[i]).collect();
            self.get(&src).restrict_to_slice(axis)
        })
    }
}

fn jets_agree<S: Scalar>(a: &Jet<S>, b: &Jet<S>) -> bool {
    let n = a.coeffs().len().min(b.coeffs().len());
    a.coeffs()[..n] == b.coeffs()[..n]
}

/// Inverse of a square matrix of jets by Gauss–Jordan elimination with
/// pivots chosen among entries invertible at the base point.
pub fn invert_jet_matrix<S: Scalar>(m: &[Vec<Jet<S>>]) -> Result<Vec<Vec<Jet<S>>>> {
    let n = m.len();
    let ctx = m
        .first()
        .and_then(|r| r.first())
        .map(|j| j.context().clone())
        .ok_or_else(|| Error::InvalidArgument("empty matrix".into()))?;
    let mut a: Vec<Vec<Jet<S>>> = m.to_vec();
    let mut inv: Vec<Vec<Jet<S>>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { Jet::one(&ctx) } else { Jet::zero(&ctx) })
                .collect()
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .filter(|&r| a[r][col].value().recip().is_some())
            .max_by(|&r, &s| {
                a[r][col]
                    .value()
                    .magnitude()
                    .partial_cmp(&a[s][col].value().magnitude())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .ok_or_else(|| Error::NotInvertible(" (singular matrix)".into()))?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col].reciprocal()?;
        for j in 0..n {
            a[col][j] = a[col][j].checked_mul(&p)?;
            inv[col][j] = inv[col][j].checked_mul(&p)?;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = -&a[r][col];
            for j in 0..n {
                let (top, rest) = if r < col {
                    let (lo, hi) = a.split_at_mut(col);
                    (&hi[0], &mut lo[r])
                } else {
                    let (lo, hi) = a.split_at_mut(r);
                    (&lo[col], &mut hi[0])
                };
                rest[j].add_product(&factor, &top[j]);
                let (top, rest) = if r < col {
                    let (lo, hi) = inv.split_at_mut(col);
                    (&hi[0], &mut lo[r])
                } else {
                    let (lo, hi) = inv.split_at_mut(r);
                    (&lo[col], &mut hi[0])
                };
                rest[j].add_product(&factor, &top[j]);
            }
        }
    }
    Ok(inv)
}

/// Whether a symmetric scalar matrix is positive definite, by symmetric
/// Gaussian elimination (every pivot must be positive).
pub fn is_positive_definite<S: Scalar>(m: &[Vec<S>]) -> bool {
    let n = m.len();
    let mut a = m.to_vec();
    for k in 0..n {
        if !a[k][k].is_positive() {
            return false;
        }
        let inv = match a[k][k].recip() {
            Some(v) => v,
            None => return false,
        };
        for i in k + 1..n {
            let f = a[i][k].mul_ref(&inv);
            for j in k + 1..n {
                let t = f.mul_ref(&a[k][j]);
                a[i][j] -= t;
            }
        }
    }
    true
}

/// A Riemannian metric jet together with its inverse.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricJet<S> {
    g: TensorJet<S>,
    inv: TensorJet<S>,
}

impl<S: Scalar> MetricJet<S> {
    /// Validates symmetry and positive definiteness at the base point, then
    /// inverts.
    pub fn new(g: TensorJet<S>) -> Result<Self> {
        if g.variance() != [Variance::Co, Variance::Co] {
            return Err(Error::InvalidArgument("metric must be a (0,2) tensor".into()));
        }
        if !g.is_symmetric_in(0, 1) {
            return Err(Error::NotSymmetric);
        }
        let d = g.extent();
        let base: Vec<Vec<S>> = (0..d)
            .map(|i| (0..d).map(|j| g.get(&[i, j]).value().clone()).collect())
            .collect();
        if !is_positive_definite(&base) {
            return Err(Error::NotPositiveDefinite);
        }
        let rows: Vec<Vec<Jet<S>>> = (0..d)
            .map(|i| (0..d).map(|j| g.get(&[i, j]).clone()).collect())
            .collect();
        let inv_rows = invert_jet_matrix(&rows)?;
        let mut inv = TensorJet::from_fn(g.context(), &[Variance::Contra, Variance::Contra], |idx| {
            Ok(inv_rows[idx[0]][idx[1]].clone())
        })?;
        // elimination rounding can break exact symmetry in float mode
        if S::MODE == crate::scalar::CoefficientMode::Float {
            inv = inv.symmetrize(0, 1);
        }
        Ok(MetricJet { g, inv })
    }

    /// Builds a metric from a component function that is only consulted for
    /// `i <= j`.
    pub fn from_upper(ctx: &JetContext, mut f: impl FnMut(usize, usize) -> Jet<S>) -> Result<Self> {
        let d = ctx.dim();
        let mut upper = vec![vec![None; d]; d];
        for i in 0..d {
            for j in i..d {
                upper[i][j] = Some(f(i, j));
            }
        }
        let g = TensorJet::from_fn(ctx, &[Variance::Co, Variance::Co], |idx| {
            let (i, j) = (idx[0].min(idx[1]), idx[0].max(idx[1]));
            Ok(upper[i][j].clone().expect("filled"))
        })?;
        MetricJet::new(g)
    }

    pub fn flat(ctx: &JetContext) -> Self {
        MetricJet::from_upper(ctx, |i, j| if i == j { Jet::one(ctx) } else { Jet::zero(ctx) })
            .expect("identity metric")
    }

    pub fn metric(&self) -> &TensorJet<S> {
        &self.g
    }

    pub fn inverse(&self) -> &TensorJet<S> {
        &self.inv
    }

    pub fn g(&self, i: usize, j: usize) -> &Jet<S> {
        self.g.get(&[i, j])
    }

    pub fn g_inv(&self, i: usize, j: usize) -> &Jet<S> {
        self.inv.get(&[i, j])
    }

    pub fn context(&self) -> &JetContext {
        self.g.context()
    }

    pub fn dim(&self) -> usize {
        self.g.extent()
    }

    pub fn order(&self) -> usize {
        self.g.order()
    }

    /// `Ω² g` for a scalar jet `Ω`.
    pub fn conformal_rescale(&self, omega: &Jet<S>) -> Result<Self> {
        if !omega.value().is_positive() {
            return Err(Error::NonPositiveConformalFactor);
        }
        let w2 = omega.checked_mul(omega)?;
        MetricJet::new(self.g.mul_jet(&w2)?)
    }

    /// `g(u, v)` for two covectors, using the inverse metric.
    pub fn inner_covectors(&self, u: &[Jet<S>], v: &[Jet<S>]) -> Jet<S> {
        let mut acc = Jet::zero(self.context());
        let d = self.dim();
        for i in 0..d {
            for j in 0..d {
                if u[i].is_zero() || v[j].is_zero() {
                    continue;
                }
                let t = u[i].checked_mul(&v[j]).expect("same context");
                acc.add_product(self.g_inv(i, j), &t);
            }
        }
        acc
    }

    /// Raises a covector.
    pub fn sharp(&self, u: &[Jet<S>]) -> Vec<Jet<S>> {
        let d = self.dim();
        (0..d)
            .map(|a| {
                let mut acc = Jet::zero(self.context());
                for (b, ub) in u.iter().enumerate() {
                    acc.add_product(self.g_inv(a, b), ub);
                }
                acc
            })
            .collect()
    }

    /// Converts to another scalar type (for example to duals for probes).
    pub fn map_scalars<T: Scalar>(&self, f: impl Fn(&S) -> T + Copy) -> Result<MetricJet<T>> {
        MetricJet::new(self.g.try_map(|j| Ok(j.map_coeffs(f)))?)
    }

    /// Truncates every component to the given order and re-inverts.
    pub fn truncate(&self, order: usize) -> Self {
        MetricJet {
            g: self.g.truncate(order),
            inv: self.inv.truncate(order),
        }
    }
}
