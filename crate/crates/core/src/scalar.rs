//! Coefficient fields for jets.
//!
//! Three implementations ship with the crate: `f64` for fast numerics,
//! [`Rational`] for exact identity checks, and [`Dual`] which adjoins a
//! nilpotent `ε` (with `ε² = 0`) to any other scalar. The probe harness runs
//! the whole pipeline over `Dual` to read off linear sensitivities.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary precision rational number.
pub type Rational = num_rational::BigRational;

/// Coefficient mode selected at run time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CoefficientMode {
    Float,
    Exact,
}

impl CoefficientMode {
    pub fn as_str(self) -> &'static str {
        match self {
            CoefficientMode::Float => "float",
            CoefficientMode::Exact => "exact",
        }
    }
}

impl fmt::Display for CoefficientMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for CoefficientMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "float" | "float64" => Ok(CoefficientMode::Float),
            "exact" | "exact-rational" | "rational" => Ok(CoefficientMode::Exact),
            other => Err(format!("unknown coefficient mode `{other}`")),
        }
    }
}

/// A commutative field (or ring, for [`Dual`]) usable as jet coefficients.
///
/// The `*_ref` methods exist so hot loops can avoid cloning big rationals.
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
{
    const MODE: CoefficientMode;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn is_zero(&self) -> bool;

    fn add_ref(&self, other: &Self) -> Self;
    fn sub_ref(&self, other: &Self) -> Self;
    fn mul_ref(&self, other: &Self) -> Self;
    /// `self += a * b`
    fn mul_acc(&mut self, a: &Self, b: &Self);

    /// Multiplicative inverse, `None` when not invertible.
    fn recip(&self) -> Option<Self>;
    /// Square root of a positive value, `None` when it does not exist in the field.
    fn sqrt(&self) -> Option<Self>;
    /// Natural logarithm of a positive value, `None` when it does not exist in the field.
    fn ln(&self) -> Option<Self>;
    fn is_positive(&self) -> bool;

    /// Leading numeric value (the real part for duals).
    fn to_f64(&self) -> f64;
    /// Magnitude used for residual norms; for duals this covers both parts.
    fn magnitude(&self) -> f64;
    /// Exact value of the leading part, when it is finite.
    fn to_rational(&self) -> Option<Rational>;

    fn from_i64(v: i64) -> Self {
        Self::from_rational(&Rational::from_integer(BigInt::from(v)))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_rational(&Rational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// `out[index(i, j)] += a[i]·b[j]` for `j < limits[i]` (indices past the
    /// end of `limits` are skipped). This is the inner loop of jet products.
    fn convolve(out: &mut [Self], a: &[Self], b: &[Self], limits: &[usize], index: &dyn Fn(usize, usize) -> usize) {
        for ((i, x), &m) in a.iter().enumerate().zip(limits) {
            if m == 0 || x.is_zero() {
                continue;
            }
            for (j, y) in b[..m].iter().enumerate() {
                if !y.is_zero() {
                    out[index(i, j)].mul_acc(x, y);
                }
            }
        }
    }

    fn powi(&self, exp: i32) -> Option<Self> {
        let base = if exp < 0 { self.recip()? } else { self.clone() };
        let mut out = Self::one();
        for _ in 0..exp.unsigned_abs() {
            out = out.mul_ref(&base);
        }
        Some(out)
    }
}

impl Scalar for f64 {
    const MODE: CoefficientMode = CoefficientMode::Float;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_rational(r: &Rational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn add_ref(&self, other: &Self) -> Self {
        self + other
    }
    fn sub_ref(&self, other: &Self) -> Self {
        self - other
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
    fn mul_acc(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }
    fn recip(&self) -> Option<Self> {
        (*self != 0.0).then(|| 1.0 / self)
    }
    fn sqrt(&self) -> Option<Self> {
        (*self > 0.0).then(|| f64::sqrt(*self))
    }
    fn ln(&self) -> Option<Self> {
        (*self > 0.0).then(|| f64::ln(*self))
    }
    fn is_positive(&self) -> bool {
        *self > 0.0
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn to_rational(&self) -> Option<Rational> {
        Rational::from_float(*self)
    }
}

/// Exact square root of a non-negative integer, if it is a perfect square.
fn exact_isqrt(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

impl Scalar for Rational {
    const MODE: CoefficientMode = CoefficientMode::Exact;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add_ref(&self, other: &Self) -> Self {
        self + other
    }
    fn sub_ref(&self, other: &Self) -> Self {
        self - other
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
    fn mul_acc(&mut self, a: &Self, b: &Self) {
        if Zero::is_zero(a) || Zero::is_zero(b) {
            return;
        }
        *self += a * b;
    }
    fn recip(&self) -> Option<Self> {
        (!Zero::is_zero(self)).then(|| num_traits::Inv::inv(self))
    }
    /// Brings both factors over a common denominator and accumulates integer
    /// products, so only one gcd is taken per output coefficient.
    fn convolve(out: &mut [Self], a: &[Self], b: &[Self], limits: &[usize], index: &dyn Fn(usize, usize) -> usize) {
        let na = limits.iter().rposition(|&m| m > 0).map_or(0, |i| i + 1).min(a.len());
        let nb = limits.iter().copied().max().unwrap_or(0);
        let (an, ad) = integer_numerators(&a[..na]);
        let (bn, bd) = integer_numerators(&b[..nb]);
        let den = ad * bd;
        if convolve_small(out, &an, &bn, &den, limits, index) {
            return;
        }
        let mut acc: Vec<Option<BigInt>> = vec![None; out.len()];
        for (i, x) in an.iter().enumerate() {
            let Some(x) = x else { continue };
            for (j, y) in bn[..limits[i]].iter().enumerate() {
                let Some(y) = y else { continue };
                let p = x * y;
                match &mut acc[index(i, j)] {
                    Some(v) => *v += p,
                    slot => *slot = Some(p),
                }
            }
        }
        for (o, v) in out.iter_mut().zip(acc) {
            if let Some(v) = v {
                if !Zero::is_zero(&v) {
                    *o += Rational::new(v, den.clone());
                }
            }
        }
    }
    fn sqrt(&self) -> Option<Self> {
        if !Signed::is_positive(self) {
            return None;
        }
        let num = exact_isqrt(self.numer())?;
        let den = exact_isqrt(self.denom())?;
        Some(Rational::new(num, den))
    }
    fn ln(&self) -> Option<Self> {
        // log of a rational is rational only at 1
        One::is_one(self).then(Zero::zero)
    }
    fn is_positive(&self) -> bool {
        Signed::is_positive(self)
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn magnitude(&self) -> f64 {
        ToPrimitive::to_f64(&Signed::abs(self)).unwrap_or(f64::INFINITY)
    }
    fn to_rational(&self) -> Option<Rational> {
        Some(self.clone())
    }
}

/// The integer accumulation of [`Scalar::convolve`] in `i128` when every
/// numerator fits in 60 bits; returns `false` (leaving `out` untouched) when
/// the inputs are too large or a sum overflows.
fn convolve_small(
    out: &mut [Rational],
    an: &[Option<BigInt>],
    bn: &[Option<BigInt>],
    den: &BigInt,
    limits: &[usize],
    index: &dyn Fn(usize, usize) -> usize,
) -> bool {
    let small = |xs: &[Option<BigInt>]| -> Option<Vec<i64>> {
        xs.iter()
            .map(|x| match x {
                None => Some(0),
                Some(v) if v.bits() <= 60 => v.to_i64(),
                Some(_) => None,
            })
            .collect()
    };
    let (Some(a), Some(b), Some(den)) = (small(an), small(bn), den.to_i128()) else {
        return false;
    };
    let mut acc = vec![0i128; out.len()];
    let mut touched = vec![false; out.len()];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b[..limits[i]].iter().enumerate() {
            if y == 0 {
                continue;
            }
            let k = index(i, j);
            match acc[k].checked_add(x as i128 * y as i128) {
                Some(v) => acc[k] = v,
                None => return false,
            }
            touched[k] = true;
        }
    }
    for ((o, v), t) in out.iter_mut().zip(acc).zip(touched) {
        if t && v != 0 {
            let g = num_integer::Integer::gcd(&v, &den);
            *o += Rational::new_raw(BigInt::from(v / g), BigInt::from(den / g));
        }
    }
    true
}

/// Numerators over the least common denominator; zero entries become `None`.
fn integer_numerators(xs: &[Rational]) -> (Vec<Option<BigInt>>, BigInt) {
    let mut den = BigInt::one();
    for x in xs {
        if !Zero::is_zero(x) && !One::is_one(x.denom()) {
            den = num_integer::Integer::lcm(&den, x.denom());
        }
    }
    let nums = xs
        .iter()
        .map(|x| {
            (!Zero::is_zero(x)).then(|| {
                if One::is_one(x.denom()) {
                    x.numer() * &den
                } else {
                    x.numer() * (&den / x.denom())
                }
            })
        })
        .collect();
    (nums, den)
}

/// `re + eps·ε` with `ε² = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dual<S> {
    pub re: S,
    pub eps: S,
}

impl<S: Scalar> Dual<S> {
    pub fn new(re: S, eps: S) -> Self {
        Dual { re, eps }
    }

    pub fn real(re: S) -> Self {
        Dual { re, eps: S::zero() }
    }
}

impl<S: Scalar> Add for Dual<S> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Dual::new(self.re + rhs.re, self.eps + rhs.eps)
    }
}

impl<S: Scalar> Sub for Dual<S> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Dual::new(self.re - rhs.re, self.eps - rhs.eps)
    }
}

impl<S: Scalar> Mul for Dual<S> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.mul_ref(&rhs)
    }
}

impl<S: Scalar> Div for Dual<S> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let inv = rhs.recip().expect("division of dual by non-invertible value");
        self.mul_ref(&inv)
    }
}

impl<S: Scalar> Neg for Dual<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual::new(-self.re, -self.eps)
    }
}

impl<S: Scalar> AddAssign for Dual<S> {
    fn add_assign(&mut self, rhs: Self) {
        self.re += rhs.re;
        self.eps += rhs.eps;
    }
}

impl<S: Scalar> SubAssign for Dual<S> {
    fn sub_assign(&mut self, rhs: Self) {
        self.re -= rhs.re;
        self.eps -= rhs.eps;
    }
}

impl<S: Scalar> Scalar for Dual<S> {
    const MODE: CoefficientMode = S::MODE;

    fn zero() -> Self {
        Dual::new(S::zero(), S::zero())
    }
    fn one() -> Self {
        Dual::new(S::one(), S::zero())
    }
    fn from_rational(r: &Rational) -> Self {
        Dual::real(S::from_rational(r))
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.eps.is_zero()
    }
    fn add_ref(&self, other: &Self) -> Self {
        Dual::new(self.re.add_ref(&other.re), self.eps.add_ref(&other.eps))
    }
    fn sub_ref(&self, other: &Self) -> Self {
        Dual::new(self.re.sub_ref(&other.re), self.eps.sub_ref(&other.eps))
    }
    fn mul_ref(&self, other: &Self) -> Self {
        let mut eps = self.re.mul_ref(&other.eps);
        eps.mul_acc(&self.eps, &other.re);
        Dual::new(self.re.mul_ref(&other.re), eps)
    }
    fn mul_acc(&mut self, a: &Self, b: &Self) {
        self.re.mul_acc(&a.re, &b.re);
        self.eps.mul_acc(&a.re, &b.eps);
        self.eps.mul_acc(&a.eps, &b.re);
    }
    fn convolve(out: &mut [Self], a: &[Self], b: &[Self], limits: &[usize], index: &dyn Fn(usize, usize) -> usize) {
        let split = |xs: &[Self]| -> (Vec<S>, Vec<S>) {
            xs.iter().map(|x| (x.re.clone(), x.eps.clone())).unzip()
        };
        let (are, aeps) = split(a);
        let (bre, beps) = split(b);
        let mut re = vec![S::zero(); out.len()];
        let mut eps = vec![S::zero(); out.len()];
        S::convolve(&mut re, &are, &bre, limits, index);
        S::convolve(&mut eps, &are, &beps, limits, index);
        S::convolve(&mut eps, &aeps, &bre, limits, index);
        for ((o, r), e) in out.iter_mut().zip(re).zip(eps) {
            o.re += r;
            o.eps += e;
        }
    }
    fn recip(&self) -> Option<Self> {
        let inv = self.re.recip()?;
        let eps = -(self.eps.mul_ref(&inv).mul_ref(&inv));
        Some(Dual::new(inv, eps))
    }
    fn sqrt(&self) -> Option<Self> {
        let root = self.re.sqrt()?;
        let two_root = root.add_ref(&root);
        let eps = self.eps.mul_ref(&two_root.recip()?);
        Some(Dual::new(root, eps))
    }
    fn ln(&self) -> Option<Self> {
        let re = self.re.ln()?;
        let eps = self.eps.mul_ref(&self.re.recip()?);
        Some(Dual::new(re, eps))
    }
    fn is_positive(&self) -> bool {
        self.re.is_positive()
    }
    fn to_f64(&self) -> f64 {
        self.re.to_f64()
    }
    fn magnitude(&self) -> f64 {
        self.re.magnitude().max(self.eps.magnitude())
    }
    fn to_rational(&self) -> Option<Rational> {
        self.re.to_rational()
    }
}

/// Scalars that can be lifted from a base field `B`.
pub trait Lift<B: Scalar>: Scalar {
    fn lift(b: &B) -> Self;
}

impl<S: Scalar> Lift<S> for S {
    fn lift(b: &S) -> Self {
        b.clone()
    }
}

impl<S: Scalar> Lift<S> for Dual<S> {
    fn lift(b: &S) -> Self {
        Dual::real(b.clone())
    }
}

/// Parses `p/q`, an integer, or a decimal literal (optionally with an
/// exponent) into an exact rational.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let t = text.trim();
    if t.is_empty() {
        return None;
    }
    if let Some((p, q)) = t.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if Zero::is_zero(&q) {
            return None;
        }
        return Some(Rational::new(p, q));
    }
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(pos) => (&t[..pos], t[pos + 1..].parse::<i32>().ok()?),
        None => (t, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut num: BigInt = all_digits.parse().ok()?;
    if negative {
        num = -num;
    }
    let scale = exponent - frac_part.len() as i32;
    if exponent.unsigned_abs() > 4096 {
        return None;
    }
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        Rational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(num, num_traits::pow(ten, scale.unsigned_abs() as usize))
    };
    Some(value)
}

/// Formats a rational as `p/q`, or `p` when the denominator is one.
pub fn format_rational(r: &Rational) -> String {
    if One::is_one(r.denom()) {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn exact_sqrt_requires_perfect_squares() {
        assert_eq!(Scalar::sqrt(&q(9, 4)), Some(q(3, 2)));
        assert_eq!(Scalar::sqrt(&q(2, 1)), None);
        assert_eq!(Scalar::sqrt(&q(-1, 1)), None);
    }

    #[test]
    fn dual_arithmetic_is_first_order() {
        let a = Dual::new(3.0, 1.0);
        let b = Dual::new(2.0, -4.0);
        let p = a.mul_ref(&b);
        assert_eq!(p, Dual::new(6.0, -10.0));
        let r = a.recip().unwrap();
        assert!((r.eps + 1.0 / 9.0).abs() < 1e-15);
        let s = Dual::new(4.0, 1.0).sqrt().unwrap();
        assert_eq!(s, Dual::new(2.0, 0.25));
    }

    #[test]
    fn parses_rationals_and_decimals() {
        assert_eq!(parse_rational("3/4"), Some(q(3, 4)));
        assert_eq!(parse_rational("-0.25"), Some(q(-1, 4)));
        assert_eq!(parse_rational("1.5e2"), Some(q(150, 1)));
        assert_eq!(parse_rational("2e-3"), Some(q(1, 500)));
        assert_eq!(parse_rational("7"), Some(q(7, 1)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
        assert_eq!(parse_rational("."), None);
        assert_eq!(format_rational(&q(6, -4)), "-3/2");
        assert_eq!(format_rational(&q(8, 2)), "4");
    }

    #[test]
    fn powi_handles_negative_exponents() {
        assert_eq!(q(2, 3).powi(-2), Some(q(9, 4)));
        assert_eq!(q(0, 1).powi(-1), None);
    }
}
