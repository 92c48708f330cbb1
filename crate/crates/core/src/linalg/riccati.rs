//! Continuous-time algebraic Riccati and Lyapunov equations.

use super::{schur, schur_reorder, CMatrix};
use crate::error::{Error, Result};
use crate::scalar::{Scalar, C};

/// Stabilizing CARE solution together with its achieved residual.
#[derive(Clone, Debug)]
pub struct CareSolution<T: Scalar> {
    /// Hermitian (real symmetric for real data) solution.
    pub p: CMatrix<T>,
    /// `‖PA + AᴴP − PGP + Q‖_F` evaluated in `T`.
    pub residual: T,
    /// Newton correction steps applied after the Schur solve.
    pub newton_steps: usize,
}

/// `PA + AᴴP − PGP + Q`.
pub fn care_residual<T: Scalar>(
    a: &CMatrix<T>,
    g: &CMatrix<T>,
    q: &CMatrix<T>,
    p: &CMatrix<T>,
) -> CMatrix<T> {
    let pa = p * a;
    let pgp = &(p * g) * p;
    &(&(&pa + &pa.adjoint()) - &pgp) + q
}

/// Solves `AᴴX + XA + W = 0` by the Bartels–Stewart method on the complex Schur form of `A`.
pub fn lyapunov<T: Scalar>(a: &CMatrix<T>, w: &CMatrix<T>) -> Result<CMatrix<T>> {
    let n = a.rows();
    let s = schur(a)?;
    let (t, u) = (&s.t, &s.z);
    let wh = &(&u.adjoint() * w) * u;
    let floor = T::eps() * t.max_abs();
    let mut y = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = -wh[(i, j)];
            for k in 0..i {
                acc -= t[(k, i)].conj() * y[(k, j)];
            }
            for k in 0..j {
                acc -= y[(i, k)] * t[(k, j)];
            }
            let d = t[(i, i)].conj() + t[(j, j)];
            if d.norm() <= floor {
                return Err(Error::Singular);
            }
            y[(i, j)] = acc / d;
        }
    }
    Ok(&(u * &y) * &u.adjoint())
}

fn is_real<T: Scalar>(ms: &[&CMatrix<T>]) -> bool {
    ms.iter().all(|m| m.max_imag().is_zero())
}

fn symmetrize<T: Scalar>(p: &CMatrix<T>, real: bool) -> CMatrix<T> {
    let h = p.hermitian_part();
    if real {
        h.real_part()
    } else {
        h
    }
}

/// Stabilizing solution of `PA + AᴴP − P B R⁻¹ Bᴴ P + Q = 0`.
///
/// The stable invariant subspace of the Hamiltonian `[[A, −G], [−Q, −Aᴴ]]` gives the
/// initial solution, which is then polished by Newton's method in the same precision.
pub fn solve_care<T: Scalar>(
    a: &CMatrix<T>,
    b: &CMatrix<T>,
    q: &CMatrix<T>,
    r: &CMatrix<T>,
) -> Result<CareSolution<T>> {
    let n = a.rows();
    if !a.is_square() || b.rows() != n || q.rows() != n || !q.is_square() || r.rows() != b.cols()
    {
        return Err(Error::Dimension("CARE operands".into()));
    }
    let g = &(b * &r.inverse()?) * &b.adjoint();
    let mut h = CMatrix::zeros(2 * n, 2 * n);
    h.set_block(0, 0, a);
    h.set_block(0, n, &-&g);
    h.set_block(n, 0, &-q);
    h.set_block(n, n, &-&a.adjoint());
    let mut s = schur(&h)?;
    let stable = schur_reorder(&mut s, |l| l.re < T::zero());
    if stable != n {
        return Err(Error::CareNotSolvable(format!(
            "stable Hamiltonian subspace has dimension {stable}, expected {n}"
        )));
    }
    let u11 = s.z.block(0, 0, n, n);
    let u21 = s.z.block(n, 0, n, n);
    let p = (u11.adjoint().solve(&u21.adjoint()).map_err(|_| {
        Error::CareNotSolvable("stable subspace is not a graph".into())
    })?)
    .adjoint();
    let real = is_real(&[a, &g, q]);
    refine_care(a, &g, q, &symmetrize(&p, real), 60)
}

/// Newton refinement of an approximate stabilizing CARE solution with `G = B R⁻¹ Bᴴ`.
///
/// Each step solves `(A − GP)ᴴ Δ + Δ (A − GP) = −Res(P)`. The iterate with the smallest
/// residual is returned.
pub fn refine_care<T: Scalar>(
    a: &CMatrix<T>,
    g: &CMatrix<T>,
    q: &CMatrix<T>,
    p0: &CMatrix<T>,
    max_steps: usize,
) -> Result<CareSolution<T>> {
    let real = is_real(&[a, g, q]);
    let mut p = symmetrize(p0, real);
    let mut res = care_residual(a, g, q, &p);
    let mut best = CareSolution { p: p.clone(), residual: res.norm_fro(), newton_steps: 0 };
    let mut stalls = 0;
    for step in 1..=max_steps {
        let acl = a - &(g * &p);
        let delta = match lyapunov(&acl, &res) {
            Ok(d) => d,
            Err(_) => break,
        };
        p = symmetrize(&(&p + &delta), real);
        res = care_residual(a, g, q, &p);
        let rn = res.norm_fro();
        if rn < best.residual {
            best = CareSolution { p: p.clone(), residual: rn, newton_steps: step };
            stalls = 0;
        } else {
            stalls += 1;
        }
        let tiny = delta.norm_fro() <= T::eps() * T::of(4.0) * p.norm_fro();
        if tiny || stalls >= 3 || !rn.is_finite() {
            break;
        }
    }
    let acl = a - &(g * &best.p);
    let worst = super::eigenvalues(&acl)?
        .into_iter()
        .map(|l: C<T>| l.re)
        .fold(T::neg_infinity(), T::max);
    if !(worst < T::zero()) {
        return Err(Error::CareNotSolvable(format!(
            "closed loop A − GP not stable (max Re = {})",
            worst.to_f()
        )));
    }
    Ok(best)
}
