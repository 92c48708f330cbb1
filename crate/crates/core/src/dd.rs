//! Double-double scalar with correctly rounded-to-working-precision division.
//!
//! Storage, addition, multiplication and elementary functions come from [`TwoFloat`].
//! Its `TwoFloat / TwoFloat` and `recip` lose the low word (the reciprocal correction
//! `1 − b·(1/b)` is formed without a fused multiply-add), so both are replaced here by
//! three-term long division, which keeps ~104 significant bits.

use num_traits::{Float, FloatConst, FromPrimitive, Num, NumCast, One, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;
use std::num::FpCategory;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, RemAssign, Sub, SubAssign};
use twofloat::TwoFloat;

/// Unevaluated sum `hi + lo` of two `f64` with `|lo| ≤ ulp(hi)/2`.
#[derive(Clone, Copy, Default, PartialEq)]
pub struct DoubleDouble(pub TwoFloat);

impl DoubleDouble {
    pub fn new(hi: f64, lo: f64) -> Self {
        Self(TwoFloat::new_add(hi, lo))
    }

    pub fn hi(self) -> f64 {
        self.0.hi()
    }

    pub fn lo(self) -> f64 {
        self.0.lo()
    }
}

fn quotient(a: TwoFloat, b: TwoFloat) -> TwoFloat {
    let bh = b.hi();
    if bh == 0.0 || !bh.is_finite() || !a.hi().is_finite() {
        return TwoFloat::from_f64(a.hi() / bh);
    }
    let q1 = a.hi() / bh;
    let r = a - b * q1;
    let q2 = r.hi() / bh;
    let r = r - b * q2;
    let q3 = r.hi() / bh;
    TwoFloat::new_add(q1, q2) + q3
}

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        Self(TwoFloat::from_f64(x))
    }
}

impl From<DoubleDouble> for f64 {
    fn from(x: DoubleDouble) -> f64 {
        x.hi() + x.lo()
    }
}

impl fmt::Debug for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DoubleDouble({:e} + {:e})", self.hi(), self.lo())
    }
}

impl fmt::Display for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl PartialOrd for DoubleDouble {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $atr:ident, $am:ident, |$a:ident, $b:ident| $e:expr) => {
        impl $tr for DoubleDouble {
            type Output = Self;
            #[inline]
            fn $m(self, rhs: Self) -> Self {
                let ($a, $b) = (self.0, rhs.0);
                Self($e)
            }
        }
        impl $atr for DoubleDouble {
            #[inline]
            fn $am(&mut self, rhs: Self) {
                *self = $tr::$m(*self, rhs);
            }
        }
    };
}

binop!(Add, add, AddAssign, add_assign, |a, b| a + b);
binop!(Sub, sub, SubAssign, sub_assign, |a, b| a - b);
binop!(Mul, mul, MulAssign, mul_assign, |a, b| a * b);
binop!(Div, div, DivAssign, div_assign, |a, b| quotient(a, b));
binop!(Rem, rem, RemAssign, rem_assign, |a, b| a - b * Float::trunc(quotient(a, b)));

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        Self(-self.0)
    }
}

impl Zero for DoubleDouble {
    fn zero() -> Self {
        Self(TwoFloat::from_f64(0.0))
    }
    fn is_zero(&self) -> bool {
        self.hi() == 0.0
    }
}

impl One for DoubleDouble {
    fn one() -> Self {
        Self(TwoFloat::from_f64(1.0))
    }
}

impl Num for DoubleDouble {
    type FromStrRadixErr = num_traits::ParseFloatError;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        f64::from_str_radix(s, radix).map(<Self as From<f64>>::from)
    }
}

impl ToPrimitive for DoubleDouble {
    fn to_i64(&self) -> Option<i64> {
        self.0.to_i64()
    }
    fn to_u64(&self) -> Option<u64> {
        self.0.to_u64()
    }
    fn to_f64(&self) -> Option<f64> {
        Some(self.hi() + self.lo())
    }
}

impl FromPrimitive for DoubleDouble {
    fn from_i64(n: i64) -> Option<Self> {
        TwoFloat::from_i64(n).map(Self)
    }
    fn from_u64(n: u64) -> Option<Self> {
        TwoFloat::from_u64(n).map(Self)
    }
    fn from_f64(n: f64) -> Option<Self> {
        Some(<Self as From<f64>>::from(n))
    }
}

impl NumCast for DoubleDouble {
    fn from<N: ToPrimitive>(n: N) -> Option<Self> {
        n.to_f64().map(<Self as From<f64>>::from)
    }
}

macro_rules! consts {
    ($($name:ident),*) => {
        impl FloatConst for DoubleDouble {
            $(fn $name() -> Self { Self(<TwoFloat as FloatConst>::$name()) })*
        }
    };
}

consts!(
    E, FRAC_1_PI, FRAC_1_SQRT_2, FRAC_2_PI, FRAC_2_SQRT_PI, FRAC_PI_2, FRAC_PI_3, FRAC_PI_4,
    FRAC_PI_6, FRAC_PI_8, LN_10, LN_2, LOG10_E, LOG2_E, PI, SQRT_2, TAU, LOG10_2, LOG2_10
);

macro_rules! unary {
    ($($m:ident),*) => { $(#[inline] fn $m(self) -> Self { Self(Float::$m(self.0)) })* };
}
macro_rules! nullary {
    ($($m:ident),*) => { $(#[inline] fn $m() -> Self { Self(<TwoFloat as Float>::$m()) })* };
}
macro_rules! predicate {
    ($($m:ident),*) => { $(#[inline] fn $m(self) -> bool { Float::$m(self.0) })* };
}
macro_rules! binary {
    ($($m:ident),*) => { $(#[inline] fn $m(self, o: Self) -> Self { Self(Float::$m(self.0, o.0)) })* };
}

impl Float for DoubleDouble {
    nullary!(nan, infinity, neg_infinity, neg_zero, min_value, min_positive_value, max_value);
    unary!(
        floor, ceil, round, trunc, fract, abs, signum, sqrt, exp, exp2, ln, log2, log10, cbrt,
        sin, cos, tan, asin, acos, atan, exp_m1, ln_1p, sinh, cosh, tanh, asinh, acosh, atanh
    );
    predicate!(is_nan, is_infinite, is_finite, is_normal, is_sign_positive, is_sign_negative);
    binary!(max, min, abs_sub, hypot, atan2);

    fn epsilon() -> Self {
        <Self as From<f64>>::from(EPS)
    }
    fn classify(self) -> FpCategory {
        Float::classify(self.0)
    }
    fn mul_add(self, a: Self, b: Self) -> Self {
        self * a + b
    }
    fn recip(self) -> Self {
        Self::one() / self
    }
    fn powi(self, n: i32) -> Self {
        let mut base = if n < 0 { self.recip() } else { self };
        let mut e = n.unsigned_abs();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc *= base;
            }
            base *= base;
            e >>= 1;
        }
        acc
    }
    fn powf(self, n: Self) -> Self {
        (n * self.ln()).exp()
    }
    fn log(self, base: Self) -> Self {
        self.ln() / base.ln()
    }
    fn sin_cos(self) -> (Self, Self) {
        (self.sin(), self.cos())
    }
    fn integer_decode(self) -> (u64, i16, i8) {
        Float::integer_decode(self.0)
    }
}

/// `2⁻¹⁰⁴`, the unit roundoff of two 53-bit significands.
pub const EPS: f64 = 4.930380657631324e-32;
