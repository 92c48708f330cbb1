//! Complex-coefficient polynomials in the Laplace variable `s`.

use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, CMatrix};
use crate::scalar::{re, Scalar, C};
use num_traits::{One, Zero};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Polynomial with ascending complex coefficients.
///
/// Exactly-zero trailing coefficients are dropped on construction, so a nonzero
/// polynomial always has a nonzero leading coefficient. Addition additionally drops
/// leading coefficients that are cancellation noise relative to the operands at the
/// same degree. Trimming is never relative to the largest coefficient: a monic
/// polynomial with huge middle coefficients keeps its degree.
/// The zero polynomial has no coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial<T: Scalar> {
    coeffs: Vec<C<T>>,
}

impl<T: Scalar> Polynomial<T> {
    pub fn new(mut coeffs: Vec<C<T>>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[T]) -> Self {
        Self::new(coeffs.iter().map(|&x| re(x)).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(C::<T>::one())
    }

    pub fn constant(c: C<T>) -> Self {
        Self::new(vec![c])
    }

    /// `c0 + c1·s`.
    pub fn linear(c0: C<T>, c1: C<T>) -> Self {
        Self::new(vec![c0, c1])
    }

    /// The monomial `s`.
    pub fn s() -> Self {
        Self::linear(C::<T>::zero(), C::<T>::one())
    }

    /// `lead · Π (s − rᵢ)`.
    pub fn from_roots(lead: C<T>, roots: &[C<T>]) -> Self {
        roots.iter().fold(Self::constant(lead), |p, &r| {
            p * Self::linear(-r, C::<T>::one())
        })
    }

    pub fn coeffs(&self) -> &[C<T>] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> C<T> {
        self.coeffs.last().copied().unwrap_or_else(C::zero)
    }

    pub fn max_abs_coeff(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |m, c| m.max(c.norm()))
    }

    /// True when every imaginary part is at most `tol · max|c|`.
    pub fn is_real(&self, tol: T) -> bool {
        let cut = tol * self.max_abs_coeff();
        self.coeffs.iter().all(|c| c.im.abs() <= cut)
    }

    /// Horner evaluation.
    pub fn eval(&self, s: C<T>) -> C<T> {
        self.coeffs
            .iter()
            .rev()
            .fold(C::<T>::zero(), |acc, &c| acc * s + c)
    }

    pub fn scale(&self, k: C<T>) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * k).collect())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * T::of(k as f64))
                .collect(),
        )
    }

    /// `p~(s) = conj(p)(−s)`, so that `p~(iω) = conj(p(iω))`.
    pub fn para_conjugate(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| if k % 2 == 0 { c.conj() } else { -c.conj() })
                .collect(),
        )
    }

    /// Long division `self = q·d + r` with `deg r < deg d`.
    pub fn div_rem(&self, d: &Self) -> Result<(Self, Self)> {
        let dn = d.degree().ok_or_else(|| Error::Parameter("division by the zero polynomial".into()))?;
        let Some(n) = self.degree() else {
            return Ok((Self::zero(), Self::zero()));
        };
        if n < dn {
            return Ok((Self::zero(), self.clone()));
        }
        let lead = d.leading();
        let mut rem = self.coeffs.clone();
        let mut q = vec![C::<T>::zero(); n - dn + 1];
        for k in (0..=n - dn).rev() {
            let c = rem[k + dn] / lead;
            q[k] = c;
            for (j, &dj) in d.coeffs.iter().enumerate() {
                rem[k + j] -= c * dj;
            }
            rem[k + dn] = C::<T>::zero();
        }
        rem.truncate(dn);
        Ok((Self::new(q), Self::new(rem)))
    }

    /// Quotient `self / d` when the remainder is at most `tol · max|c|`.
    pub fn exact_div(&self, d: &Self, tol: T) -> Option<Self> {
        let (q, r) = self.div_rem(d).ok()?;
        (r.max_abs_coeff() <= tol * self.max_abs_coeff()).then_some(q)
    }

    /// Converts coefficients to another scalar type.
    pub fn cast<U: Scalar>(&self) -> Polynomial<U> {
        Polynomial::new(self.coeffs.iter().map(|&c| crate::scalar::cast_c(c)).collect())
    }

    /// Companion-matrix roots, Newton-polished and residual-checked.
    ///
    /// Every returned root satisfies
    /// `|p(r)| / (max|c| · max(1,|r|)^deg) ≤ max(1e-8, 1000ε)`.
    pub fn roots(&self) -> Result<Vec<C<T>>> {
        let n = match self.degree() {
            None => return Err(Error::UndefinedRoots),
            Some(0) => return Ok(Vec::new()),
            Some(n) => n,
        };
        let lead = self.leading();
        // Exact zero roots are split off so the companion matrix stays nonsingular.
        let zeros = self.coeffs.iter().take_while(|c| c.is_zero()).count();
        let mut roots = vec![C::<T>::zero(); zeros];
        let m = n - zeros;
        if m > 0 {
            let monic: Vec<C<T>> = self.coeffs[zeros..].iter().map(|&c| c / lead).collect();
            let mut comp = CMatrix::zeros(m, m);
            for j in 0..m {
                comp[(0, j)] = -monic[m - 1 - j];
            }
            for i in 1..m {
                comp[(i, i - 1)] = C::<T>::one();
            }
            roots.extend(eigenvalues(&comp)?);
        }
        let dp = self.derivative();
        let tol = T::of(1e-8).max(T::eps() * T::of(1000.0));
        let scale = self.max_abs_coeff();
        let rel = |r: C<T>, v: C<T>| v.norm() / (scale * r.norm().max(T::one()).powi(n as i32));
        for r in roots.iter_mut() {
            let mut best = rel(*r, self.eval(*r));
            for _ in 0..3 {
                let d = dp.eval(*r);
                if d.is_zero() {
                    break;
                }
                let cand = *r - self.eval(*r) / d;
                let res = rel(cand, self.eval(cand));
                if res < best {
                    *r = cand;
                    best = res;
                } else {
                    break;
                }
            }
            if !(best <= tol) {
                return Err(Error::RootResidual { residual: best.to_f() });
            }
        }
        Ok(roots)
    }
}

impl<T: Scalar> Add for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn add(self, rhs: Self) -> Polynomial<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let get = |v: &[C<T>], k: usize| v.get(k).copied().unwrap_or_else(C::zero);
        let mut out: Vec<C<T>> = (0..n).map(|k| get(&self.coeffs, k) + get(&rhs.coeffs, k)).collect();
        // A leading sum far below its addends is rounding left over from cancellation.
        while let Some(k) = out.len().checked_sub(1) {
            let scale = get(&self.coeffs, k).norm() + get(&rhs.coeffs, k).norm();
            if out[k].norm() <= T::trim_tol() * scale {
                out.pop();
            } else {
                break;
            }
        }
        Polynomial::new(out)
    }
}

impl<T: Scalar> Sub for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn sub(self, rhs: Self) -> Polynomial<T> {
        self + &(-rhs)
    }
}

impl<T: Scalar> Neg for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn neg(self) -> Polynomial<T> {
        Polynomial { coeffs: self.coeffs.iter().map(|&c| -c).collect() }
    }
}

impl<T: Scalar> Mul for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn mul(self, rhs: Self) -> Polynomial<T> {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![C::<T>::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl<T: Scalar> $tr for Polynomial<T> {
            type Output = Polynomial<T>;
            fn $f(self, rhs: Self) -> Polynomial<T> {
                (&self).$f(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl<T: Scalar> Neg for Polynomial<T> {
    type Output = Polynomial<T>;
    fn neg(self) -> Polynomial<T> {
        -&self
    }
}

impl<T: Scalar> fmt::Display for Polynomial<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| match k {
                0 => format!("({c})"),
                1 => format!("({c})s"),
                _ => format!("({c})s^{k}"),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}
