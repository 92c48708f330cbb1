//! Rational functions `num(s)/den(s)` with explicit, opt-in cancellation.

use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::scalar::{Scalar, C};
use num_traits::{One, Zero};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Ratio of polynomials with a monic, nonzero denominator.
///
/// Arithmetic never removes common factors; equal denominators are merged only
/// when they are coefficient-wise identical.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalFunction<T: Scalar> {
    num: Polynomial<T>,
    den: Polynomial<T>,
}

/// A zero/pole pair removed by [`RationalFunction::cancel`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CancelledPair<T: Scalar> {
    pub zero: C<T>,
    pub pole: C<T>,
}

impl<T: Scalar> RationalFunction<T> {
    pub fn new(num: Polynomial<T>, den: Polynomial<T>) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::Parameter("denominator is identically zero".into()));
        }
        let lead = den.leading();
        let inv = C::<T>::one() / lead;
        Ok(Self { num: num.scale(inv), den: den.scale(inv) })
    }

    pub fn from_poly(p: Polynomial<T>) -> Self {
        Self { num: p, den: Polynomial::one() }
    }

    pub fn constant(c: C<T>) -> Self {
        Self::from_poly(Polynomial::constant(c))
    }

    pub fn real(x: T) -> Self {
        Self::constant(crate::scalar::re(x))
    }

    pub fn zero() -> Self {
        Self::from_poly(Polynomial::zero())
    }

    pub fn one() -> Self {
        Self::constant(C::<T>::one())
    }

    /// `(n0 + n1 s)/(d0 + d1 s)`, the shape of every single-mode cavity entry.
    pub fn first_order(n0: C<T>, n1: C<T>, d0: C<T>, d1: C<T>) -> Result<Self> {
        Self::new(Polynomial::linear(n0, n1), Polynomial::linear(d0, d1))
    }

    pub fn num(&self) -> &Polynomial<T> {
        &self.num
    }

    pub fn den(&self) -> &Polynomial<T> {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// `deg num ≤ deg den`.
    pub fn is_proper(&self) -> bool {
        self.num.degree().unwrap_or(0) <= self.den.degree().unwrap_or(0)
    }

    /// Value as `s → ∞` for proper functions.
    pub fn at_infinity(&self) -> Option<C<T>> {
        match (self.num.degree(), self.den.degree()) {
            (None, _) => Some(C::<T>::zero()),
            (Some(n), Some(d)) if n < d => Some(C::<T>::zero()),
            (Some(n), Some(d)) if n == d => Some(self.num.leading() / self.den.leading()),
            _ => None,
        }
    }

    /// Horner evaluation; errors when `|den(s)|` is at or below the pole floor.
    pub fn eval(&self, s: C<T>) -> Result<C<T>> {
        let d = self.den.eval(s);
        if d.norm() <= T::pole_floor() {
            return Err(Error::Pole { re: s.re.to_f(), im: s.im.to_f() });
        }
        Ok(self.num.eval(s) / d)
    }

    /// `r~(s) = conj(r)(−s)`; equals `conj(r(iω))` on the imaginary axis.
    pub fn para_conjugate(&self) -> Self {
        Self::new(self.num.para_conjugate(), self.den.para_conjugate())
            .expect("para-conjugation preserves a nonzero denominator")
    }

    pub fn scale(&self, k: C<T>) -> Self {
        Self { num: self.num.scale(k), den: self.den.clone() }
    }

    pub fn recip(&self) -> Result<Self> {
        Self::new(self.den.clone(), self.num.clone())
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self> {
        if rhs.is_zero() {
            return Err(Error::SingularInterconnection("division by zero function".into()));
        }
        Ok(self * &rhs.recip()?)
    }

    pub fn poles(&self) -> Result<Vec<C<T>>> {
        self.den.roots()
    }

    pub fn zeros(&self) -> Result<Vec<C<T>>> {
        self.num.roots()
    }

    pub fn cast<U: Scalar>(&self) -> RationalFunction<U> {
        RationalFunction::new(self.num.cast(), self.den.cast())
            .expect("cast keeps the denominator nonzero")
    }

    /// Removes zero/pole pairs closer than `tol · scale`, with `scale = max(1, |pole|)`.
    ///
    /// Greedy nearest matching; the removed pairs are returned alongside the result.
    pub fn cancel(&self, tol: T) -> Result<(Self, Vec<CancelledPair<T>>)> {
        if self.num.is_zero() || self.num.degree() == Some(0) || self.den.degree() == Some(0) {
            return Ok((self.clone(), Vec::new()));
        }
        let mut zeros = self.num.roots()?;
        let mut poles = self.den.roots()?;
        let mut pairs = Vec::new();
        loop {
            let mut best: Option<(usize, usize, T)> = None;
            for (i, z) in zeros.iter().enumerate() {
                for (j, p) in poles.iter().enumerate() {
                    let d = (*z - *p).norm() / p.norm().max(T::one());
                    if d <= tol && best.is_none_or(|b| d < b.2) {
                        best = Some((i, j, d));
                    }
                }
            }
            match best {
                Some((i, j, _)) => pairs.push(CancelledPair { zero: zeros.remove(i), pole: poles.remove(j) }),
                None => break,
            }
        }
        if pairs.is_empty() {
            return Ok((self.clone(), pairs));
        }
        let num = Polynomial::from_roots(self.num.leading(), &zeros);
        let den = Polynomial::from_roots(C::<T>::one(), &poles);
        Ok((Self::new(num, den)?, pairs))
    }

    /// Folds a constant denominator into the numerator.
    fn constant_den(&self) -> Option<C<T>> {
        (self.den.degree() == Some(0)).then(|| self.den.coeffs()[0])
    }

    fn combine(&self, rhs: &Self, sign: C<T>) -> Self {
        let b = rhs.num.scale(sign);
        if self.den == rhs.den {
            return Self { num: &self.num + &b, den: self.den.clone() };
        }
        if let Some(c) = self.constant_den() {
            let num = &(&self.num.scale(C::<T>::one() / c) * &rhs.den) + &b;
            return Self { num, den: rhs.den.clone() };
        }
        if let Some(c) = rhs.constant_den() {
            let num = &self.num + &(&b.scale(C::<T>::one() / c) * &self.den);
            return Self { num, den: self.den.clone() };
        }
        let num = &(&self.num * &rhs.den) + &(&b * &self.den);
        Self::new(num, &self.den * &rhs.den).expect("product of nonzero polynomials")
    }
}

impl<T: Scalar> Add for &RationalFunction<T> {
    type Output = RationalFunction<T>;
    fn add(self, rhs: Self) -> RationalFunction<T> {
        self.combine(rhs, C::<T>::one())
    }
}

impl<T: Scalar> Sub for &RationalFunction<T> {
    type Output = RationalFunction<T>;
    fn sub(self, rhs: Self) -> RationalFunction<T> {
        self.combine(rhs, -C::<T>::one())
    }
}

impl<T: Scalar> Neg for &RationalFunction<T> {
    type Output = RationalFunction<T>;
    fn neg(self) -> RationalFunction<T> {
        RationalFunction { num: -&self.num, den: self.den.clone() }
    }
}

impl<T: Scalar> Mul for &RationalFunction<T> {
    type Output = RationalFunction<T>;
    fn mul(self, rhs: Self) -> RationalFunction<T> {
        if let Some(c) = self.constant_den() {
            return RationalFunction { num: &self.num.scale(C::<T>::one() / c) * &rhs.num, den: rhs.den.clone() };
        }
        if let Some(c) = rhs.constant_den() {
            return RationalFunction { num: &self.num * &rhs.num.scale(C::<T>::one() / c), den: self.den.clone() };
        }
        RationalFunction::new(&self.num * &rhs.num, &self.den * &rhs.den)
            .expect("product of nonzero polynomials")
    }
}

/// Panics when dividing by the zero function; use [`RationalFunction::checked_div`] otherwise.
impl<T: Scalar> Div for &RationalFunction<T> {
    type Output = RationalFunction<T>;
    fn div(self, rhs: Self) -> RationalFunction<T> {
        self.checked_div(rhs).expect("division by the zero rational function")
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl<T: Scalar> $tr for RationalFunction<T> {
            type Output = RationalFunction<T>;
            fn $f(self, rhs: Self) -> RationalFunction<T> {
                (&self).$f(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl<T: Scalar> Neg for RationalFunction<T> {
    type Output = RationalFunction<T>;
    fn neg(self) -> RationalFunction<T> {
        -&self
    }
}

impl<T: Scalar> fmt::Display for RationalFunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] / [{}]", self.num, self.den)
    }
}
