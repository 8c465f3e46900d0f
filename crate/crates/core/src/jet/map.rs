use super::{Jet, JetContext};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A jet of a map `R^d → R^d` fixing the origin: component `i` is the
/// `i`-th target coordinate as a function of the source coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct JetMap<S> {
    components: Vec<Jet<S>>,
}

impl<S: Scalar> JetMap<S> {
    pub fn new(components: Vec<Jet<S>>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidArgument("jet map needs components".into()))?;
        let ctx = first.context().clone();
        if components.len() != ctx.dim() || components.iter().any(|c| *c.context() != ctx) {
            return Err(Error::IncompatibleContexts);
        }
        Ok(JetMap { components })
    }

    pub fn identity(ctx: &JetContext) -> Self {
        JetMap {
            components: (0..ctx.dim())
                .map(|i| Jet::variable(ctx, i).expect("axis in range"))
                .collect(),
        }
    }

    pub fn components(&self) -> &[Jet<S>] {
        &self.components
    }

    pub fn context(&self) -> &JetContext {
        self.components[0].context()
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn order(&self) -> usize {
        self.components.iter().map(Jet::order).min().unwrap_or(0)
    }

    /// Image of the base point.
    pub fn base_image(&self) -> Vec<S> {
        self.components.iter().map(|c| c.value().clone()).collect()
    }

    /// `jacobian[i][j] = ∂ component_i / ∂ x_j` at the base point.
    pub fn jacobian(&self) -> Vec<Vec<S>> {
        let ctx = self.context();
        let basis = ctx.basis();
        self.components
            .iter()
            .map(|c| {
                (0..ctx.dim())
                    .map(|j| {
                        if c.order() == 0 {
                            return S::zero();
                        }
                        let idx = basis.raised(j, 0).expect("degree one");
                        c.coeffs()[idx].clone()
                    })
                    .collect()
            })
            .collect()
    }

    fn check_fixes_origin(&self) -> Result<()> {
        if self.components.iter().all(|c| c.value().is_zero()) {
            Ok(())
        } else {
            Err(Error::MapMovesBasePoint)
        }
    }

    /// `f ∘ self`, truncated at the context order.
    pub fn pull_back(&self, f: &Jet<S>) -> Result<Jet<S>> {
        if f.context() != self.context() {
            return Err(Error::IncompatibleContexts);
        }
        self.check_fixes_origin()?;
        let dim = self.dim();
        let variables: Vec<Option<usize>> = self.components.iter().map(Jet::as_variable).collect();
        let free: Vec<usize> = (0..dim).filter(|&i| variables[i].is_none()).collect();
        let mut hit = vec![false; dim];
        let mut injective = true;
        for v in variables.iter().flatten() {
            injective &= !std::mem::replace(&mut hit[*v], true);
        }
        match free.as_slice() {
            [] if injective => {
                let perm: Vec<usize> = variables.iter().map(|v| v.unwrap()).collect();
                Ok(f.relabel(&perm))
            }
            [k] if injective => Ok(self.pull_back_one_curved(f, *k, &variables, &hit)),
            _ => Ok(self.pull_back_general(f)),
        }
    }

    /// All components but `k` are distinct coordinate variables: expand `f`
    /// in powers of `x_k` and run Horner's rule in the curved component.
    fn pull_back_one_curved(
        &self,
        f: &Jet<S>,
        k: usize,
        variables: &[Option<usize>],
        hit: &[bool],
    ) -> Jet<S> {
        let spare = hit.iter().position(|h| !h).expect("one target axis unused");
        let perm: Vec<usize> = variables.iter().map(|v| v.unwrap_or(spare)).collect();
        let curved = &self.components[k];
        let top = f.order();
        let mut acc = f.strip_axis_power(k, top as u8).relabel(&perm);
        for p in (0..top).rev() {
            let mut next = curved.checked_mul(&acc).expect("same context");
            let coefficient = f.strip_axis_power(k, p as u8).relabel(&perm);
            next = next.checked_add(&coefficient).expect("same context");
            acc = next;
        }
        acc
    }

    pub(crate) fn pull_back_general(&self, f: &Jet<S>) -> Jet<S> {
        let ctx = self.context();
        let basis = ctx.basis();
        let n = basis.count(f.order());
        // images[i] = (monomial i) ∘ self, built by peeling one variable at a time
        let mut images: Vec<Jet<S>> = Vec::with_capacity(n);
        images.push(Jet::one(ctx));
        for i in 1..n {
            let e = &basis.exponents[i];
            let axis = e.iter().position(|&p| p > 0).expect("nonconstant monomial");
            let mut prev = e.clone();
            prev[axis] -= 1;
            let prev_idx = basis.index_of(&prev).expect("lower monomial");
            let img = images[prev_idx]
                .checked_mul(&self.components[axis])
                .expect("same context");
            images.push(img);
        }
        let mut out = Jet::zero(ctx).with_order(f.order());
        for (c, img) in f.coeffs().iter().zip(&images) {
            if !c.is_zero() {
                out.add_scaled(c, img);
            }
        }
        // every image starts at its monomial degree, so the sum is exact to
        // the smaller of f's order and the map's order
        out.with_order(f.order().min(self.order()))
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &JetMap<S>) -> Result<JetMap<S>> {
        let components = self
            .components
            .iter()
            .map(|c| inner.pull_back(c))
            .collect::<Result<Vec<_>>>()?;
        JetMap::new(components)
    }

    /// Local inverse, by fixed-point iteration `ψ ← L⁻¹(u − N∘ψ)` where `L`
    /// is the linear part and `N` the nonlinear remainder of the map. Each
    /// sweep fixes one more order.
    pub fn invert(&self) -> Result<JetMap<S>> {
        self.check_fixes_origin()?;
        let ctx = self.context().clone();
        let dim = self.dim();
        let lin_inv = invert_matrix(&self.jacobian()).ok_or(Error::MapNotInvertible)?;
        let basis = ctx.basis();
        let nonlinear: Vec<Jet<S>> = self
            .components
            .iter()
            .map(|c| {
                let mut c = c.clone();
                for j in 0..dim {
                    if c.order() >= 1 {
                        let idx = basis.raised(j, 0).expect("degree one");
                        c = zero_coeff(c, idx);
                    }
                }
                c
            })
            .collect();
        let vars: Vec<Jet<S>> = (0..dim)
            .map(|i| Jet::variable(&ctx, i).expect("axis"))
            .collect();
        let apply_linear = |v: &[Jet<S>]| -> Vec<Jet<S>> {
            (0..dim)
                .map(|i| {
                    let mut acc = Jet::zero(&ctx);
                    for (j, vj) in v.iter().enumerate() {
                        if !lin_inv[i][j].is_zero() {
                            acc.add_scaled(&lin_inv[i][j], vj);
                        }
                    }
                    acc
                })
                .collect()
        };
        let mut psi = JetMap {
            components: apply_linear(&vars),
        };
        for _ in 1..ctx.order().max(1) {
            let correction: Vec<Jet<S>> = nonlinear
                .iter()
                .zip(&vars)
                .map(|(n, v)| Ok(v.checked_sub(&psi.pull_back(n)?)?))
                .collect::<Result<_>>()?;
            psi = JetMap {
                components: apply_linear(&correction),
            };
        }
        let order = self.order();
        Ok(JetMap {
            components: psi.components.into_iter().map(|c| c.with_order(order)).collect(),
        })
    }
}

fn zero_coeff<S: Scalar>(jet: Jet<S>, idx: usize) -> Jet<S> {
    let ctx = jet.context().clone();
    let order = jet.order();
    let mut coeffs = jet.coeffs().to_vec();
    coeffs[idx] = S::zero();
    Jet::from_coeffs(&ctx, order, coeffs).expect("same shape")
}

/// Gauss–Jordan inverse of a square scalar matrix; `None` when singular.
pub(crate) fn invert_matrix<S: Scalar>(m: &[Vec<S>]) -> Option<Vec<Vec<S>>> {
    let n = m.len();
    let mut a: Vec<Vec<S>> = m.to_vec();
    let mut inv: Vec<Vec<S>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { S::one() } else { S::zero() }).collect())
        .collect();
    for col in 0..n {
        // prefer the largest pivot for float stability; any nonzero works exactly
        let pivot = (col..n)
            .filter(|&r| a[r][col].recip().is_some())
            .max_by(|&r, &s| {
                a[r][col]
                    .magnitude()
                    .partial_cmp(&a[s][col].magnitude())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col].recip()?;
        for j in 0..n {
            a[col][j] = a[col][j].mul_ref(&p);
            inv[col][j] = inv[col][j].mul_ref(&p);
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            for j in 0..n {
                let t = factor.mul_ref(&a[col][j]);
                a[r][j] -= t;
                let t = factor.mul_ref(&inv[col][j]);
                inv[r][j] -= t;
            }
        }
    }
    Some(inv)
}
