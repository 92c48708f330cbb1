//! Numerical Krylov-subspace dimension by Arnoldi with reorthogonalization.

use super::CMatrix;
use crate::scalar::{re, Scalar, C};
use num_traits::Zero;

/// Dimension of `span{b, Ab, A²b, …}` as seen by Arnoldi.
///
/// Iteration stops when the new direction has norm `≤ tol · ‖A‖_F`. Each candidate is
/// orthogonalized twice against the accumulated basis.
pub fn krylov_dimension<T: Scalar>(a: &CMatrix<T>, b: &[C<T>], tol: T) -> usize {
    let n = a.rows();
    let norm = |v: &[C<T>]| v.iter().fold(T::zero(), |s, z| s + z.norm_sqr()).sqrt();
    let bn = norm(b);
    if bn.is_zero() {
        return 0;
    }
    let cut = tol * a.norm_fro();
    let mut basis: Vec<Vec<C<T>>> = vec![b.iter().map(|&z| z / re(bn)).collect()];
    while basis.len() < n {
        let mut w = a.mul_vec(basis.last().expect("basis is nonempty"));
        for _ in 0..2 {
            for q in &basis {
                let h = q.iter().zip(&w).fold(C::<T>::zero(), |s, (qi, wi)| s + qi.conj() * *wi);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= h * *qi;
                }
            }
        }
        let hn = norm(&w);
        if hn <= cut || hn.is_zero() {
            break;
        }
        basis.push(w.iter().map(|&z| z / re(hn)).collect());
    }
    basis.len()
}
