//! Truncated multivariate Taylor series ("jets") at the coordinate origin.
//!
//! A [`Jet`] stores the coefficients of a polynomial in `d` variables up to
//! its *effective order*: the total degree through which its coefficients
//! are trustworthy. Differentiation lowers the effective order by one and
//! binary operations take the minimum, so information truncated away at the
//! context order can never leak into a result.

mod basis;
mod map;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::{Rational, Scalar};

pub(crate) use basis::Basis;
pub use map::JetMap;

/// Shape shared by all jets in one computation: the number of variables and
/// the truncation order `K`.
#[derive(Clone)]
pub struct JetContext {
    basis: Arc<Basis>,
}

impl JetContext {
    pub fn new(dim: usize, order: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("jet dimension must be positive".into()));
        }
        if order > 24 {
            return Err(Error::InvalidArgument(format!("jet order {order} is too large")));
        }
        Ok(JetContext {
            basis: Basis::get(dim, order),
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.dim
    }

    pub fn order(&self) -> usize {
        self.basis.max_order
    }

    /// Context with one fewer variable and the same order.
    pub fn lower(&self) -> Option<JetContext> {
        self.basis.lower.clone().map(|basis| JetContext { basis })
    }

    /// Number of monomials of total degree `<= order`.
    pub fn monomial_count(&self, order: usize) -> usize {
        self.basis.count(order.min(self.order()))
    }

    /// Exponent vectors in storage order.
    pub fn exponents(&self) -> impl Iterator<Item = &[u8]> + '_ {
        self.basis.exponents.iter().map(|e| e.as_slice())
    }

    pub(crate) fn basis(&self) -> &Basis {
        &self.basis
    }
}

impl PartialEq for JetContext {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.basis, &other.basis)
            || (self.dim() == other.dim() && self.order() == other.order())
    }
}

impl Eq for JetContext {}

impl fmt::Debug for JetContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "JetContext(d={}, K={})", self.dim(), self.order())
    }
}

#[derive(Clone, PartialEq)]
pub struct Jet<S> {
    ctx: JetContext,
    order: usize,
    coeffs: Vec<S>,
}

impl<S: Scalar> Jet<S> {
    pub fn zero(ctx: &JetContext) -> Self {
        Jet {
            ctx: ctx.clone(),
            order: ctx.order(),
            coeffs: vec![S::zero(); ctx.monomial_count(ctx.order())],
        }
    }

    pub fn constant(ctx: &JetContext, value: S) -> Self {
        let mut j = Jet::zero(ctx);
        j.coeffs[0] = value;
        j
    }

    pub fn one(ctx: &JetContext) -> Self {
        Jet::constant(ctx, S::one())
    }

    /// The coordinate function `x_axis` (zero-based axis).
    pub fn variable(ctx: &JetContext, axis: usize) -> Result<Self> {
        check_axis(ctx, axis)?;
        let mut j = Jet::zero(ctx);
        if ctx.order() >= 1 {
            let idx = ctx.basis().raised(axis, 0).expect("degree-1 monomial");
            j.coeffs[idx] = S::one();
        }
        Ok(j)
    }

    pub fn monomial(ctx: &JetContext, exponents: &[u8], coeff: S) -> Result<Self> {
        let mut j = Jet::zero(ctx);
        j.add_term(exponents, coeff)?;
        Ok(j)
    }

    /// Sum of terms; terms above the context order are truncated away.
    pub fn from_terms<'a, I>(ctx: &JetContext, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a [u8], S)>,
    {
        let mut j = Jet::zero(ctx);
        for (e, c) in terms {
            j.add_term(e, c)?;
        }
        Ok(j)
    }

    fn add_term(&mut self, exponents: &[u8], coeff: S) -> Result<()> {
        if exponents.len() != self.ctx.dim() {
            return Err(Error::InvalidArgument(format!(
                "exponent vector has {} entries, expected {}",
                exponents.len(),
                self.ctx.dim()
            )));
        }
        let degree: usize = exponents.iter().map(|&e| e as usize).sum();
        if degree > self.order {
            return Ok(());
        }
        let idx = self.ctx.basis().index_of(exponents).expect("in-range monomial");
        self.coeffs[idx] += coeff;
        Ok(())
    }

    /// Builds a jet from raw coefficients in storage order.
    pub fn from_coeffs(ctx: &JetContext, order: usize, coeffs: Vec<S>) -> Result<Self> {
        if order > ctx.order() || coeffs.len() != ctx.monomial_count(order) {
            return Err(Error::InvalidArgument("coefficient vector does not match jet shape".into()));
        }
        Ok(Jet {
            ctx: ctx.clone(),
            order,
            coeffs,
        })
    }

    pub fn context(&self) -> &JetContext {
        &self.ctx
    }

    pub fn dim(&self) -> usize {
        self.ctx.dim()
    }

    /// Effective order: coefficients of total degree up to this are exact.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    /// Value at the base point.
    pub fn value(&self) -> &S {
        &self.coeffs[0]
    }

    pub fn coeff(&self, exponents: &[u8]) -> Option<&S> {
        let idx = self.ctx.basis().index_of(exponents)?;
        self.coeffs.get(idx)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Scalar::is_zero)
    }

    /// Iterator over `(exponents, coefficient)` for the stored terms.
    pub fn terms(&self) -> impl Iterator<Item = (&[u8], &S)> + '_ {
        self.ctx.exponents().zip(self.coeffs.iter())
    }

    fn same_context(&self, other: &Self) -> Result<()> {
        if self.ctx == other.ctx {
            Ok(())
        } else {
            Err(Error::IncompatibleContexts)
        }
    }

    pub fn truncate(&self, order: usize) -> Self {
        let order = order.min(self.order);
        Jet {
            ctx: self.ctx.clone(),
            order,
            coeffs: self.coeffs[..self.ctx.monomial_count(order)].to_vec(),
        }
    }

    pub fn with_order(mut self, order: usize) -> Self {
        let order = order.min(self.order);
        self.coeffs.truncate(self.ctx.monomial_count(order));
        self.order = order;
        self
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.same_context(other)?;
        let order = self.order.min(other.order);
        let n = self.ctx.monomial_count(order);
        let coeffs = self.coeffs[..n]
            .iter()
            .zip(&other.coeffs[..n])
            .map(|(a, b)| a.add_ref(b))
            .collect();
        Ok(Jet {
            ctx: self.ctx.clone(),
            order,
            coeffs,
        })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.same_context(other)?;
        let order = self.order.min(other.order);
        let n = self.ctx.monomial_count(order);
        let coeffs = self.coeffs[..n]
            .iter()
            .zip(&other.coeffs[..n])
            .map(|(a, b)| a.sub_ref(b))
            .collect();
        Ok(Jet {
            ctx: self.ctx.clone(),
            order,
            coeffs,
        })
    }

    /// Lowest degree carrying a nonzero coefficient (`order + 1` for a zero jet).
    pub fn valuation(&self) -> usize {
        let basis = self.ctx.basis();
        self.coeffs
            .iter()
            .position(|c| !c.is_zero())
            .map(|i| basis.degree[i])
            .unwrap_or(self.order + 1)
    }

    /// Effective order of `self * other`: the unknown tail of one factor is
    /// multiplied by the other, which starts at its valuation.
    fn product_order(&self, other: &Self) -> usize {
        (self.order + other.valuation())
            .min(other.order + self.valuation())
            .min(self.ctx.order())
    }

    fn accumulate_product(out: &mut [S], basis: &Basis, order: usize, a: &Self, b: &Self) {
        let limits: Vec<usize> = a
            .coeffs
            .iter()
            .enumerate()
            .map_while(|(i, _)| {
                let di = basis.degree[i];
                (di <= order).then(|| basis.count((order - di).min(b.order)))
            })
            .collect();
        S::convolve(out, &a.coeffs, &b.coeffs, &limits, &|i, j| basis.product(i, j));
    }

    /// Truncated Cauchy product.
    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.same_context(other)?;
        let basis = self.ctx.basis();
        let order = self.product_order(other);
        let mut out = vec![S::zero(); basis.count(order)];
        Self::accumulate_product(&mut out, basis, order, self, other);
        Ok(Jet {
            ctx: self.ctx.clone(),
            order,
            coeffs: out,
        })
    }

    pub fn scale(&self, c: &S) -> Self {
        Jet {
            ctx: self.ctx.clone(),
            order: self.order,
            coeffs: self.coeffs.iter().map(|a| a.mul_ref(c)).collect(),
        }
    }

    /// `self += c * other`, truncating to the lower effective order.
    pub fn add_scaled(&mut self, c: &S, other: &Self) {
        assert!(self.ctx == other.ctx, "incompatible jet contexts");
        if other.order < self.order {
            self.coeffs.truncate(self.ctx.monomial_count(other.order));
            self.order = other.order;
        }
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            a.mul_acc(c, b);
        }
    }

    /// `self += a * b`, truncating to the lowest effective order involved.
    pub fn add_product(&mut self, a: &Self, b: &Self) {
        assert!(self.ctx == a.ctx && self.ctx == b.ctx, "incompatible jet contexts");
        let order = self.order.min(a.product_order(b));
        if order < self.order {
            self.coeffs.truncate(self.ctx.monomial_count(order));
            self.order = order;
        }
        let ctx = self.ctx.clone();
        Self::accumulate_product(&mut self.coeffs, ctx.basis(), order, a, b);
    }

    /// Formal partial derivative along a zero-based axis.
    pub fn differentiate(&self, axis: usize) -> Result<Self> {
        check_axis(&self.ctx, axis)?;
        if self.order == 0 {
            return Err(Error::OrderUnderflow(
                "cannot differentiate a jet of effective order 0".into(),
            ));
        }
        let basis = self.ctx.basis();
        let order = self.order - 1;
        let n = basis.count(order);
        let coeffs = (0..n)
            .map(|i| {
                let up = basis.raised(axis, i).expect("raised monomial within order");
                let factor = basis.exponents[i][axis] as i64 + 1;
                let c = &self.coeffs[up];
                if c.is_zero() {
                    S::zero()
                } else {
                    c.mul_ref(&S::from_i64(factor))
                }
            })
            .collect();
        Ok(Jet {
            ctx: self.ctx.clone(),
            order,
            coeffs,
        })
    }

    /// Multiplies by the coordinate `x_axis`; the product is known one order higher.
    pub fn mul_variable(&self, axis: usize) -> Result<Self> {
        check_axis(&self.ctx, axis)?;
        let basis = self.ctx.basis();
        let order = (self.order + 1).min(self.ctx.order());
        let mut coeffs = vec![S::zero(); basis.count(order)];
        for (i, c) in self.coeffs.iter().enumerate() {
            if let Some(up) = basis.raised(axis, i) {
                coeffs[up] = c.clone();
            }
        }
        Ok(Jet {
            ctx: self.ctx.clone(),
            order,
            coeffs,
        })
    }

    /// Keeps only the terms whose exponent along `axis` equals `power`.
    pub fn slice_power(&self, axis: usize, power: u8) -> Result<Self> {
        check_axis(&self.ctx, axis)?;
        let basis = self.ctx.basis();
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                if basis.exponents[i][axis] == power {
                    c.clone()
                } else {
                    S::zero()
                }
            })
            .collect();
        Ok(Jet {
            ctx: self.ctx.clone(),
            order: self.order,
            coeffs,
        })
    }

    /// For the terms with `x_axis^power`, divides out that factor. The result
    /// is known to `order - power`.
    pub(crate) fn strip_axis_power(&self, axis: usize, power: u8) -> Self {
        let basis = self.ctx.basis();
        let order = self.order - power as usize;
        let mut coeffs = vec![S::zero(); basis.count(order)];
        let mut reduced = vec![0u8; self.ctx.dim()];
        for (i, c) in self.coeffs.iter().enumerate() {
            if basis.exponents[i][axis] != power || c.is_zero() {
                continue;
            }
            reduced.copy_from_slice(&basis.exponents[i]);
            reduced[axis] = 0;
            coeffs[basis.index_of(&reduced).expect("in range")] = c.clone();
        }
        Jet {
            ctx: self.ctx.clone(),
            order,
            coeffs,
        }
    }

    /// Restriction to the slice `x_axis = 0`, as a jet in the remaining variables.
    pub fn restrict_to_slice(&self, axis: usize) -> Result<Self> {
        check_axis(&self.ctx, axis)?;
        let lower = self
            .ctx
            .lower()
            .ok_or_else(|| Error::InvalidArgument("cannot restrict a one-variable jet".into()))?;
        let basis = self.ctx.basis();
        let mut coeffs = vec![S::zero(); lower.monomial_count(self.order)];
        for (i, c) in self.coeffs.iter().enumerate() {
            if let Some(j) = basis.restricted(axis, i) {
                coeffs[j] = c.clone();
            }
        }
        Ok(Jet {
            ctx: lower,
            order: self.order,
            coeffs,
        })
    }

    /// Inverse of [`Jet::restrict_to_slice`]: the jet in one more variable
    /// that does not depend on `axis`.
    pub fn extend_constant_along(&self, upper: &JetContext, axis: usize) -> Result<Self> {
        check_axis(upper, axis)?;
        if upper.lower().as_ref() != Some(&self.ctx) {
            return Err(Error::IncompatibleContexts);
        }
        let basis = upper.basis();
        let mut out = Jet::zero(upper).with_order(self.order);
        for i in 0..basis.count(self.order) {
            if let Some(j) = basis.restricted(axis, i) {
                out.coeffs[i] = self.coeffs[j].clone();
            }
        }
        Ok(out)
    }

    /// `Σ c_k u^k` with `u = self / value - 1`, evaluated by Horner's rule.
    /// Requires `coeff(k)` for `k` up to the effective order.
    fn series_in_relative_increment(&self, value_inv: &S, coeff: impl Fn(usize) -> S) -> Self {
        let mut u = self.scale(value_inv);
        u.coeffs[0] = S::zero();
        let order = self.order;
        let mut acc = Jet::constant(&self.ctx, coeff(order)).with_order(order);
        for k in (0..order).rev() {
            acc = u.checked_mul(&acc).expect("same context");
            acc.coeffs[0] += coeff(k);
        }
        acc
    }

    pub fn reciprocal(&self) -> Result<Self> {
        let c = self.value();
        let inv = c
            .recip()
            .ok_or_else(|| Error::NotInvertible(" (zero constant term)".into()))?;
        let series = self.series_in_relative_increment(&inv, |k| {
            if k % 2 == 0 {
                S::one()
            } else {
                -S::one()
            }
        });
        Ok(series.scale(&inv))
    }

    pub fn sqrt(&self) -> Result<Self> {
        let c = self.value();
        if !c.is_positive() {
            return Err(Error::NotInvertible(" (non-positive constant term)".into()));
        }
        let root = c.sqrt().ok_or_else(|| {
            Error::NotInvertible(" (constant term has no exact square root)".into())
        })?;
        let inv = c.recip().expect("positive");
        // binom(1/2, k)
        let mut binoms = vec![Rational::from_integer(1.into())];
        for k in 1..=self.order {
            let prev = binoms[k - 1].clone();
            let num = Rational::new(1.into(), 2.into()) - Rational::from_integer((k as i64 - 1).into());
            binoms.push(prev * num / Rational::from_integer((k as i64).into()));
        }
        let series = self.series_in_relative_increment(&inv, |k| S::from_rational(&binoms[k]));
        Ok(series.scale(&root))
    }

    pub fn ln(&self) -> Result<Self> {
        let c = self.value();
        if !c.is_positive() {
            return Err(Error::NotInvertible(" (non-positive constant term)".into()));
        }
        let log_c = c
            .ln()
            .ok_or_else(|| Error::NotInvertible(" (logarithm of constant term not representable)".into()))?;
        let inv = c.recip().expect("positive");
        let mut series = self.series_in_relative_increment(&inv, |k| {
            if k == 0 {
                S::zero()
            } else {
                let sign = if k % 2 == 1 { 1 } else { -1 };
                S::from_ratio(sign, k as i64)
            }
        });
        series.coeffs[0] = log_c;
        Ok(series)
    }

    pub fn powi(&self, exp: u32) -> Self {
        let mut out = Jet::one(&self.ctx).with_order(self.order);
        for _ in 0..exp {
            out = out.checked_mul(self).expect("same context");
        }
        out
    }

    /// Substitutes the coordinate functions of `map` into `self`.
    pub fn compose(&self, map: &JetMap<S>) -> Result<Self> {
        map.pull_back(self)
    }

    /// Converts coefficients into another scalar type.
    pub fn map_coeffs<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Jet<T> {
        Jet {
            ctx: self.ctx.clone(),
            order: self.order,
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }

    /// If this jet is exactly the coordinate function `x_axis`, returns the axis.
    pub(crate) fn as_variable(&self) -> Option<usize> {
        if self.order < 1 || self.ctx.order() < 1 {
            return None;
        }
        let mut found = None;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let e = &self.ctx.basis().exponents[i];
            let deg: usize = e.iter().map(|&x| x as usize).sum();
            if deg != 1 || *c != S::one() || found.is_some() {
                return None;
            }
            found = e.iter().position(|&x| x == 1);
        }
        // a variable is exact to all orders only if the effective order is full
        if self.order < self.ctx.order() {
            return None;
        }
        found
    }

    /// Relabels variables: `x_i ↦ x_{perm[i]}`.
    pub(crate) fn relabel(&self, perm: &[usize]) -> Self {
        let basis = self.ctx.basis();
        let mut coeffs = vec![S::zero(); self.coeffs.len()];
        let mut target = vec![0u8; self.ctx.dim()];
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (axis, &e) in basis.exponents[i].iter().enumerate() {
                target[perm[axis]] = e;
            }
            let j = basis.index_of(&target).expect("same degree");
            coeffs[j] = c.clone();
        }
        Jet {
            ctx: self.ctx.clone(),
            order: self.order,
            coeffs,
        }
    }
}

fn check_axis(ctx: &JetContext, axis: usize) -> Result<()> {
    if axis < ctx.dim() {
        Ok(())
    } else {
        Err(Error::InvalidAxis {
            axis,
            dim: ctx.dim(),
        })
    }
}

impl<'a, S: Scalar> Add<&'a Jet<S>> for &'a Jet<S> {
    type Output = Jet<S>;
    fn add(self, rhs: &'a Jet<S>) -> Jet<S> {
        self.checked_add(rhs).expect("incompatible jet contexts")
    }
}

impl<'a, S: Scalar> Sub<&'a Jet<S>> for &'a Jet<S> {
    type Output = Jet<S>;
    fn sub(self, rhs: &'a Jet<S>) -> Jet<S> {
        self.checked_sub(rhs).expect("incompatible jet contexts")
    }
}

impl<'a, S: Scalar> Mul<&'a Jet<S>> for &'a Jet<S> {
    type Output = Jet<S>;
    fn mul(self, rhs: &'a Jet<S>) -> Jet<S> {
        self.checked_mul(rhs).expect("incompatible jet contexts")
    }
}

impl<S: Scalar> Neg for &Jet<S> {
    type Output = Jet<S>;
    fn neg(self) -> Jet<S> {
        Jet {
            ctx: self.ctx.clone(),
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| -c.clone()).collect(),
        }
    }
}

impl<S: Scalar + fmt::Display> fmt::Display for Jet<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (e, c) in self.terms() {
            if c.is_zero() {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            for (axis, &p) in e.iter().enumerate() {
                match p {
                    0 => {}
                    1 => write!(f, "·x{}", axis + 1)?,
                    _ => write!(f, "·x{}^{}", axis + 1, p)?,
                }
            }
        }
        if first {
            f.write_str("0")?;
        }
        write!(f, " + O({})", self.order + 1)
    }
}

impl<S: fmt::Debug> fmt::Debug for Jet<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("ctx", &self.ctx)
            .field("order", &self.order)
            .field("coeffs", &self.coeffs)
            .finish()
    }
}
