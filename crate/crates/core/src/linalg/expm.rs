//! Matrix exponential by scaling and squaring with a degree-13 Padé approximant.

use super::CMatrix;
use crate::error::Result;
use crate::scalar::{re, Scalar};

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Largest 1-norm for which the unscaled [13/13] approximant meets unit roundoff in f64.
const THETA13: f64 = 5.371920351148152;

pub fn expm<T: Scalar>(a: &CMatrix<T>) -> Result<CMatrix<T>> {
    let n = a.rows();
    let norm = a.norm_1().to_f();
    let s = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    let a = a.scale(re(T::of(2f64.powi(-s))));
    let b = |k: usize| re(T::of(PADE13[k]));
    let id = CMatrix::identity(n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let lin = |c6: usize, c4: usize, c2: usize| -> CMatrix<T> {
        &(&a6.scale(b(c6)) + &a4.scale(b(c4))) + &a2.scale(b(c2))
    };
    let u_inner = &(&a6 * &lin(13, 11, 9)) + &(&lin(7, 5, 3) + &id.scale(b(1)));
    let u = &a * &u_inner;
    let v = &(&a6 * &lin(12, 10, 8)) + &(&lin(6, 4, 2) + &id.scale(b(0)));
    let mut r = (&v - &u).solve(&(&v + &u))?;
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}
