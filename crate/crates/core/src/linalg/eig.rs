//! Balancing, Hessenberg reduction and the complex Schur decomposition.

use super::CMatrix;
use crate::error::{Error, Result};
use crate::scalar::{re, Scalar, C};
use num_traits::{One, Zero};

/// Complex Schur form `A = Z T Zᴴ` with `T` upper triangular and `Z` unitary.
#[derive(Clone, Debug)]
pub struct Schur<T: Scalar> {
    pub t: CMatrix<T>,
    pub z: CMatrix<T>,
}

/// Parlett–Reinsch diagonal balancing with radix 2.
///
/// Returns `(D⁻¹ A D, diag(D))`; the spectrum is unchanged and the rounding is exact.
pub fn balance<T: Scalar>(a: &CMatrix<T>) -> (CMatrix<T>, Vec<T>) {
    let n = a.rows();
    let mut b = a.clone();
    let mut d = vec![T::one(); n];
    let radix = T::of(2.0);
    let radix2 = radix * radix;
    let mut converged = false;
    while !converged {
        converged = true;
        for i in 0..n {
            let mut c = T::zero();
            let mut r = T::zero();
            for j in 0..n {
                if j != i {
                    c += b[(j, i)].norm();
                    r += b[(i, j)].norm();
                }
            }
            if c.is_zero() || r.is_zero() {
                continue;
            }
            let total = c + r;
            let mut f = T::one();
            let mut g = r / radix;
            while c < g {
                f *= radix;
                c *= radix2;
            }
            g = r * radix;
            while c > g {
                f /= radix;
                c /= radix2;
            }
            if (c + r) / f < T::of(0.95) * total {
                converged = false;
                d[i] *= f;
                for j in 0..n {
                    b[(i, j)] = b[(i, j)] / f;
                    b[(j, i)] = b[(j, i)] * f;
                }
            }
        }
    }
    (b, d)
}

/// Householder reduction `A = Q H Qᴴ` with `H` upper Hessenberg.
pub fn hessenberg<T: Scalar>(a: &CMatrix<T>) -> (CMatrix<T>, CMatrix<T>) {
    assert!(a.is_square(), "Hessenberg reduction needs a square matrix");
    let n = a.rows();
    let mut h = a.clone();
    let mut q = CMatrix::identity(n);
    let two = T::of(2.0);
    for k in 0..n.saturating_sub(2) {
        let mut v: Vec<C<T>> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let alpha = v.iter().fold(T::zero(), |a, z| a + z.norm_sqr()).sqrt();
        if alpha.is_zero() {
            continue;
        }
        let x0 = v[0];
        let phase = if x0.norm().is_zero() { C::<T>::one() } else { x0 / re(x0.norm()) };
        v[0] += phase * re(alpha);
        let vn = v.iter().fold(T::zero(), |a, z| a + z.norm_sqr());
        if vn.is_zero() {
            continue;
        }
        let f = two / vn;
        for j in k..n {
            let s = v.iter().enumerate().fold(C::<T>::zero(), |a, (i, vi)| a + vi.conj() * h[(k + 1 + i, j)]);
            for (i, vi) in v.iter().enumerate() {
                h[(k + 1 + i, j)] -= *vi * s * re(f);
            }
        }
        for m in [&mut h, &mut q] {
            for i in 0..n {
                let s = v.iter().enumerate().fold(C::<T>::zero(), |a, (j, vj)| a + m[(i, k + 1 + j)] * *vj);
                for (j, vj) in v.iter().enumerate() {
                    m[(i, k + 1 + j)] -= s * vj.conj() * re(f);
                }
            }
        }
        for i in k + 2..n {
            h[(i, k)] = C::<T>::zero();
        }
    }
    (h, q)
}

/// Rotation `[c s; −s̄ c]` mapping `(f, g)` to `(r, 0)`.
fn givens<T: Scalar>(f: C<T>, g: C<T>) -> (T, C<T>) {
    let (fa, ga) = (f.norm(), g.norm());
    if ga.is_zero() {
        (T::one(), C::<T>::zero())
    } else if fa.is_zero() {
        (T::zero(), g.conj() / re(ga))
    } else {
        let r = fa.hypot(ga);
        (fa / r, (f / re(fa)) * g.conj() / re(r))
    }
}

/// Single-shift complex QR iteration on a Hessenberg matrix, in place.
fn hqr<T: Scalar>(h: &mut CMatrix<T>, mut z: Option<&mut CMatrix<T>>) -> Result<()> {
    let n = h.rows();
    if n < 2 {
        return Ok(());
    }
    let eps = T::eps();
    let hnorm = h.max_abs().max(T::min_positive_value());
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let mut s = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            if s.is_zero() {
                s = hnorm;
            }
            if h[(l, l - 1)].norm() <= eps * s {
                h[(l, l - 1)] = C::<T>::zero();
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if iter > 60 || total > 100 * n {
            return Err(Error::NoConvergence);
        }
        let mu = if iter % 11 == 10 {
            h[(hi, hi)] + re(h[(hi, hi - 1)].re.abs() + h[(hi, hi - 1)].im.abs()) * C::new(T::of(0.75), T::of(0.5))
        } else {
            let (a, b) = (h[(hi - 1, hi - 1)], h[(hi - 1, hi)]);
            let (c, d) = (h[(hi, hi - 1)], h[(hi, hi)]);
            let half = re(T::of(0.5));
            let m = (a + d) * half;
            let disc = (((a - d) * half) * ((a - d) * half) + b * c).sqrt();
            let (m1, m2) = (m + disc, m - disc);
            if (m1 - d).norm() <= (m2 - d).norm() { m1 } else { m2 }
        };
        for k in l..=hi {
            h[(k, k)] -= mu;
        }
        let mut rots = Vec::with_capacity(hi - l);
        for k in l..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            for j in k..n {
                let (x, y) = (h[(k, j)], h[(k + 1, j)]);
                h[(k, j)] = x * re(c) + s * y;
                h[(k + 1, j)] = y * re(c) - s.conj() * x;
            }
            h[(k + 1, k)] = C::<T>::zero();
            rots.push((k, c, s));
        }
        for &(k, c, s) in &rots {
            let top = k + 1;
            for i in 0..=top {
                let (x, y) = (h[(i, k)], h[(i, k + 1)]);
                h[(i, k)] = x * re(c) + y * s.conj();
                h[(i, k + 1)] = y * re(c) - x * s;
            }
            if let Some(zm) = z.as_deref_mut() {
                for i in 0..n {
                    let (x, y) = (zm[(i, k)], zm[(i, k + 1)]);
                    zm[(i, k)] = x * re(c) + y * s.conj();
                    zm[(i, k + 1)] = y * re(c) - x * s;
                }
            }
        }
        for k in l..=hi {
            h[(k, k)] += mu;
        }
    }
    Ok(())
}

/// Complex Schur decomposition.
pub fn schur<T: Scalar>(a: &CMatrix<T>) -> Result<Schur<T>> {
    let (mut t, mut z) = hessenberg(a);
    hqr(&mut t, Some(&mut z))?;
    let n = t.rows();
    for i in 0..n {
        for j in 0..i {
            t[(i, j)] = C::<T>::zero();
        }
    }
    Ok(Schur { t, z })
}

/// Eigenvalues of a square matrix (balanced, Hessenberg, shifted QR).
pub fn eigenvalues<T: Scalar>(a: &CMatrix<T>) -> Result<Vec<C<T>>> {
    if !a.is_square() {
        return Err(Error::Dimension("eigenvalues of a non-square matrix".into()));
    }
    let (b, _) = balance(a);
    let (mut h, _) = hessenberg(&b);
    hqr(&mut h, None)?;
    Ok((0..h.rows()).map(|i| h[(i, i)]).collect())
}

/// Reorders a Schur form so that selected eigenvalues lead the diagonal.
///
/// Returns the number of selected eigenvalues. `A = Z T Zᴴ` is preserved.
pub fn schur_reorder<T: Scalar>(s: &mut Schur<T>, select: impl Fn(C<T>) -> bool) -> usize {
    let n = s.t.rows();
    let mut next = 0;
    for j in 0..n {
        if !select(s.t[(j, j)]) {
            continue;
        }
        for k in (next..j).rev() {
            swap_adjacent(s, k);
        }
        next += 1;
    }
    next
}

/// Exchanges the diagonal entries `k` and `k+1` of a triangular Schur factor.
fn swap_adjacent<T: Scalar>(s: &mut Schur<T>, k: usize) {
    let n = s.t.rows();
    let (t11, t22) = (s.t[(k, k)], s.t[(k + 1, k + 1)]);
    let (c, sn) = givens(s.t[(k, k + 1)], t22 - t11);
    for j in k + 2..n {
        let (x, y) = (s.t[(k, j)], s.t[(k + 1, j)]);
        s.t[(k, j)] = x * re(c) + sn * y;
        s.t[(k + 1, j)] = y * re(c) - sn.conj() * x;
    }
    for i in 0..k {
        let (x, y) = (s.t[(i, k)], s.t[(i, k + 1)]);
        s.t[(i, k)] = x * re(c) + sn.conj() * y;
        s.t[(i, k + 1)] = y * re(c) - sn * x;
    }
    s.t[(k, k)] = t22;
    s.t[(k + 1, k + 1)] = t11;
    for i in 0..n {
        let (x, y) = (s.z[(i, k)], s.z[(i, k + 1)]);
        s.z[(i, k)] = x * re(c) + sn.conj() * y;
        s.z[(i, k + 1)] = y * re(c) - sn * x;
    }
}
