//! Physical building blocks as transfer matrices, and commutator-preservation checks.

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::poly::Polynomial;
use crate::rational::RationalFunction;
use crate::scalar::{re, Scalar, C};
use crate::transfer::{Port, TransferMatrix};
use num_traits::One;

const A: Port = Port::Annihilation;
const CR: Port = Port::Creation;

/// Non-degenerate parametric amplifier: mirror rate `gamma`, pump strength `lambda`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NdpaParams<T> {
    pub gamma: T,
    pub lambda: T,
}

/// Two-port cavity: port rates `kappa1`, `kappa2` and signed detuning `delta`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CavityParams<T> {
    pub kappa1: T,
    pub kappa2: T,
    pub delta: T,
}

impl<T: Scalar> NdpaParams<T> {
    pub fn new(gamma: T, lambda: T) -> Result<Self> {
        if !(gamma > T::zero()) || !(lambda >= T::zero()) {
            return Err(Error::Parameter(format!(
                "NDPA needs gamma > 0 and lambda >= 0 (got {gamma}, {lambda})"
            )));
        }
        Ok(Self { gamma, lambda })
    }

    /// High-gain family member `γ = (2 + ε)λ`.
    pub fn high_gain(lambda: T, epsilon: T) -> Result<Self> {
        Self::new((T::of(2.0) + epsilon) * lambda, lambda)
    }

    /// Stable iff `γ > 2λ`.
    pub fn is_stable(&self) -> bool {
        self.gamma > T::of(2.0) * self.lambda
    }
}

impl<T: Scalar> CavityParams<T> {
    pub fn new(kappa1: T, kappa2: T, delta: T) -> Result<Self> {
        if !(kappa1 >= T::zero()) || !(kappa2 >= T::zero()) || !(kappa1 + kappa2 > T::zero()) {
            return Err(Error::Parameter(format!(
                "cavity needs kappa1, kappa2 >= 0 with positive sum (got {kappa1}, {kappa2})"
            )));
        }
        if !delta.is_finite() {
            return Err(Error::Parameter("cavity detuning must be finite".into()));
        }
        Ok(Self { kappa1, kappa2, delta })
    }

    /// Symmetric, resonant cavity `κ₁ = κ₂ = κ`, `Δ = 0`.
    pub fn symmetric(kappa: T) -> Result<Self> {
        Self::new(kappa, kappa, T::zero())
    }
}

fn lin<T: Scalar>(c0: C<T>) -> Polynomial<T> {
    Polynomial::linear(c0, C::<T>::one())
}

fn over<T: Scalar>(num: Polynomial<T>, den: &Polynomial<T>) -> RationalFunction<T> {
    RationalFunction::new(num, den.clone()).expect("factory denominators are nonzero")
}

/// NDPA transfer matrix `(b₁, b₂†) → (b̃₁, b̃₂†)`.
///
/// Diagonal `(s² − λ² − γ²/4)/d`, off-diagonal `−γλ/d`, `d = (s + γ/2)² − λ²`.
pub fn make_ndpa<T: Scalar>(p: NdpaParams<T>) -> Result<TransferMatrix<T>> {
    let p = NdpaParams::new(p.gamma, p.lambda)?;
    let (g, l) = (p.gamma, p.lambda);
    let h = g / T::of(2.0);
    let den = Polynomial::from_real(&[h * h - l * l, g, T::one()]);
    let diag = over(Polynomial::from_real(&[-l * l - h * h, T::zero(), T::one()]), &den);
    let off = over(Polynomial::constant(re(-g * l)), &den);
    Ok(TransferMatrix::from_2x2([[diag.clone(), off.clone()], [off, diag]], [A, CR], [A, CR]))
}

/// Cavity transmission (asymmetric low-pass) on creation-mode ports.
///
/// `[[s + (κ₂−κ₁)/2 − iΔ, −√(κ₁κ₂)], [−√(κ₁κ₂), s + (κ₁−κ₂)/2 − iΔ]] / (s + (κ₁+κ₂)/2 − iΔ)`.
pub fn make_cavity_transmission<T: Scalar>(p: CavityParams<T>) -> Result<TransferMatrix<T>> {
    let p = CavityParams::new(p.kappa1, p.kappa2, p.delta)?;
    let half = T::of(0.5);
    let (k1, k2, d) = (p.kappa1, p.kappa2, p.delta);
    let den = lin(C::new((k1 + k2) * half, -d));
    let cross = over(Polynomial::constant(re(-(k1 * k2).sqrt())), &den);
    let a = over(lin(C::new((k2 - k1) * half, -d)), &den);
    let b = over(lin(C::new((k1 - k2) * half, -d)), &den);
    Ok(TransferMatrix::from_2x2([[a, cross.clone()], [cross, b]], [CR, CR], [CR, CR]))
}

/// Cavity reflection (asymmetric high-pass) on creation-mode ports.
///
/// `[[−√(κ₁κ₂), s + (κ₁−κ₂)/2 − iΔ], [s + (κ₂−κ₁)/2 − iΔ, −√(κ₁κ₂)]] / (s + (κ₁+κ₂)/2 − iΔ)`.
/// A single-port cavity is the `κ₂ = 0` member of this family.
pub fn make_cavity_reflection<T: Scalar>(p: CavityParams<T>) -> Result<TransferMatrix<T>> {
    let p = CavityParams::new(p.kappa1, p.kappa2, p.delta)?;
    let half = T::of(0.5);
    let (k1, k2, d) = (p.kappa1, p.kappa2, p.delta);
    let den = lin(C::new((k1 + k2) * half, -d));
    let cross = over(Polynomial::constant(re(-(k1 * k2).sqrt())), &den);
    let b12 = over(lin(C::new((k1 - k2) * half, -d)), &den);
    let b21 = over(lin(C::new((k2 - k1) * half, -d)), &den);
    Ok(TransferMatrix::from_2x2([[cross.clone(), b12], [b21, cross]], [CR, CR], [CR, CR]))
}

/// Beam splitter `[[√T, −√(1−T)], [√(1−T), √T]]` with power transmissivity `0 < T ≤ 1`.
pub fn make_beam_splitter<T: Scalar>(t: T) -> Result<TransferMatrix<T>> {
    if !(t > T::zero() && t <= T::one()) {
        return Err(Error::Parameter(format!("beam splitter transmissivity {t} outside (0, 1]")));
    }
    let (a, b) = (t.sqrt(), (T::one() - t).sqrt());
    let m = CMatrix::from_real(2, 2, &[a, -b, b, a]);
    TransferMatrix::constant(&m, vec![CR, CR], vec![CR, CR])
}

/// Constant phase factor `e^{iφ}`.
pub fn make_phase_shifter<T: Scalar>(phi: T) -> RationalFunction<T> {
    RationalFunction::constant(C::from_polar(T::one(), phi))
}

/// Two cascaded cavities with a π phase shift: `K_r · [[0, −1], [1, 0]] · K_l`.
///
/// `K_l` is the transmission of `p`; `K_r` is its mirror image with detuning `+iΔ`
/// in the denominator. The second-order Butterworth response needs `Δ = (κ₁+κ₂)/2`,
/// which is left to the caller.
pub fn make_butterworth_controller<T: Scalar>(p: CavityParams<T>) -> Result<TransferMatrix<T>> {
    let kl = make_cavity_transmission(p)?;
    let half = T::of(0.5);
    let (k1, k2, d) = (p.kappa1, p.kappa2, p.delta);
    let den = lin(C::new((k1 + k2) * half, d));
    let cross = over(Polynomial::constant(re(-(k1 * k2).sqrt())), &den);
    let r11 = over(lin(C::new((k1 - k2) * half, d)), &den);
    let r22 = over(lin(C::new((k2 - k1) * half, d)), &den);
    // J·K_l = [[−K_l21, −K_l22], [K_l11, K_l12]].
    let m = [
        [-kl.get(1, 0), -kl.get(1, 1)],
        [kl.get(0, 0).clone(), kl.get(0, 1).clone()],
    ];
    let e = |i: usize, j: usize| {
        let (ri0, ri1) = if i == 0 { (&r11, &cross) } else { (&cross, &r22) };
        &(ri0 * &m[0][j]) + &(ri1 * &m[1][j])
    };
    Ok(TransferMatrix::from_2x2([[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]], [CR, CR], [CR, CR]))
}

/// Worst deviation found by a sampled commutator check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Violation<T> {
    pub value: T,
    pub omega: T,
}

impl<T: Scalar> Violation<T> {
    fn none() -> Self {
        Self { value: T::zero(), omega: T::nan() }
    }

    fn absorb(&mut self, value: T, omega: T) {
        if value > self.value || value.is_nan() {
            self.value = value;
            self.omega = omega;
        }
    }
}

/// Sampled check of the phase-preserving amplifier conditions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AmplifierReport<T> {
    /// `max | |G11|² − |G12|² − 1 |`.
    pub signal: Violation<T>,
    /// `max | |G22|² − |G21|² − 1 |`.
    pub idler: Violation<T>,
    /// `max | G21·conj(G11) − G22·conj(G12) |`.
    pub cross: Violation<T>,
    pub tol: T,
}

impl<T: Scalar> AmplifierReport<T> {
    pub fn max_violation(&self) -> T {
        self.signal.value.max(self.idler.value).max(self.cross.value)
    }

    pub fn passed(&self) -> bool {
        self.max_violation() < self.tol
    }
}

/// Sampled check of `K(iω) K(iω)ᴴ = I`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitarityReport<T> {
    pub deviation: Violation<T>,
    pub tol: T,
}

impl<T: Scalar> UnitarityReport<T> {
    pub fn passed(&self) -> bool {
        self.deviation.value < self.tol
    }
}

/// Sampled check of `G(iω) J_in G(iω)ᴴ = J_out` for arbitrary port tags.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CommutationReport<T> {
    pub deviation: Violation<T>,
    pub tol: T,
}

impl<T: Scalar> CommutationReport<T> {
    pub fn passed(&self) -> bool {
        self.deviation.value < self.tol
    }
}

/// Checks the three amplifier conditions at `s = iω` for each `ω`.
///
/// Each violation is divided by `max(1, max_ij |Gij|²)`, the rounding scale of the
/// squared moduli, so high-gain points are held to the same relative accuracy.
pub fn check_amplifier_realizable<T: Scalar>(
    g: &TransferMatrix<T>,
    omegas: &[T],
    tol: T,
) -> Result<AmplifierReport<T>> {
    if g.rows() != 2 || g.cols() != 2 || g.sig_in() != [A, CR] || g.sig_out() != [A, CR] {
        return Err(Error::Signature("amplifier check needs a 2x2 (b, b†) -> (b, b†) matrix".into()));
    }
    let mut rep = AmplifierReport {
        signal: Violation::none(),
        idler: Violation::none(),
        cross: Violation::none(),
        tol,
    };
    for &w in omegas {
        let m = g.eval(C::new(T::zero(), w))?;
        let (g11, g12, g21, g22) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
        let scale = T::one().max(m.max_abs().powi(2));
        rep.signal.absorb((g11.norm_sqr() - g12.norm_sqr() - T::one()).abs() / scale, w);
        rep.idler.absorb((g22.norm_sqr() - g21.norm_sqr() - T::one()).abs() / scale, w);
        rep.cross.absorb((g21 * g11.conj() - g22 * g12.conj()).norm() / scale, w);
    }
    Ok(rep)
}

/// Checks `K(iω) K(iω)ᴴ = I` entrywise for each `ω`.
pub fn check_passive_unitary<T: Scalar>(
    k: &TransferMatrix<T>,
    omegas: &[T],
    tol: T,
) -> Result<UnitarityReport<T>> {
    if k.rows() != k.cols() {
        return Err(Error::Dimension("unitarity check needs a square matrix".into()));
    }
    let id = CMatrix::identity(k.rows());
    let mut dev = Violation::none();
    for &w in omegas {
        let m = k.eval(C::new(T::zero(), w))?;
        dev.absorb((&(&m * &m.adjoint()) - &id).max_abs(), w);
    }
    Ok(UnitarityReport { deviation: dev, tol })
}

/// Checks commutator preservation `G J_in Gᴴ = J_out` with `J = diag(±1)` from the port tags.
pub fn check_commutation<T: Scalar>(
    g: &TransferMatrix<T>,
    omegas: &[T],
    tol: T,
) -> Result<CommutationReport<T>> {
    let (jin, jout) = (g.metric_in(), g.metric_out());
    let mut dev = Violation::none();
    for &w in omegas {
        let m = g.eval(C::new(T::zero(), w))?;
        dev.absorb((&(&(&m * &jin) * &m.adjoint()) - &jout).max_abs(), w);
    }
    Ok(CommutationReport { deviation: dev, tol })
}

/// `n` logarithmically spaced points on `[lo, hi]`.
pub fn log_grid<T: Scalar>(lo: T, hi: T, n: usize) -> Vec<T> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            let step = (b - a) / T::of((n - 1) as f64);
            (0..n)
                .map(|k| match k {
                    0 => lo,
                    k if k == n - 1 => hi,
                    k => (a + step * T::of(k as f64)).exp(),
                })
                .collect()
        }
    }
}

/// `n` evenly spaced points on `[lo, hi]`.
pub fn linear_grid<T: Scalar>(lo: T, hi: T, n: usize) -> Vec<T> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / T::of((n - 1) as f64);
            (0..n).map(|k| if k == n - 1 { hi } else { lo + step * T::of(k as f64) }).collect()
        }
    }
}
