//! Stability oracles: Nyquist encirclement, the Routh-Hurwitz quartic test, and roots.

use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::rational::RationalFunction;
use crate::scalar::{jw, Scalar, C};
use num_traits::Zero;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Stable,
    Unstable,
    /// A root lies within the marginal band around the imaginary axis.
    Marginal,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Stable => "stable",
            Verdict::Unstable => "unstable",
            Verdict::Marginal => "marginal",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Minimum distance from the Nyquist curve to `−1` below which the verdict is marginal.
pub const NYQUIST_MARGIN: f64 = 1e-6;
/// Chord turn angle (rad) above which the frequency grid is refined.
pub const NYQUIST_TURN: f64 = 0.2;

#[derive(Clone, Debug, PartialEq)]
pub struct NyquistResult<T: Scalar> {
    /// `(ω, L(iω))`, ω increasing over `[−ω_max, ω_max]`.
    pub samples: Vec<(T, C<T>)>,
    /// Closure point joining `L(iω_max)` back to `L(−iω_max)`.
    pub closure: C<T>,
    /// Net counter-clockwise encirclements of `−1`.
    pub winding_number: i64,
    /// Minimum distance of the closed curve to `−1`.
    pub min_distance: T,
    pub verdict: Verdict,
}

impl<T: Scalar> NyquistResult<T> {
    /// CSV with header `omega,re,im`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("omega,re,im\n");
        for (w, l) in &self.samples {
            out.push_str(&format!(
                "{},{},{}\n",
                crate::fmt_sig17(w.to_f()),
                crate::fmt_sig17(l.re.to_f()),
                crate::fmt_sig17(l.im.to_f())
            ));
        }
        out
    }
}

fn midpoint<T: Scalar>(a: T, b: T) -> T {
    if a > T::zero() && b > T::zero() {
        (a * b).sqrt()
    } else if a < T::zero() && b < T::zero() {
        -(a * b).sqrt()
    } else {
        (a + b) / T::of(2.0)
    }
}

fn angle_between<T: Scalar>(u: C<T>, v: C<T>) -> T {
    if u.norm() == T::zero() || v.norm() == T::zero() {
        return T::zero();
    }
    (v * u.conj()).arg().abs()
}

/// Distance from `p` to the segment `[a, b]`.
fn segment_distance<T: Scalar>(p: C<T>, a: C<T>, b: C<T>) -> T {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == T::zero() {
        return (p - a).norm();
    }
    let t = ((p - a) * d.conj()).re / len2;
    let t = t.max(T::zero()).min(T::one());
    (p - (a + d * t)).norm()
}

/// Nyquist test of `1 + L` for an open loop `L` with all poles in the open left half-plane.
///
/// Samples `L(iω)` on `[−ω_max, ω_max]` (log-spaced outside `[−ω_min, ω_min]`), refining
/// wherever the chord turns by more than [`NYQUIST_TURN`] or a segment sweeps more than
/// that angle about `−1`, then closes the curve through `L(∞)`.
pub fn nyquist<T: Scalar>(l: &RationalFunction<T>, omega_min: T, omega_max: T) -> Result<NyquistResult<T>> {
    nyquist_with(l, omega_min, omega_max, NyquistOptions::default())
}

/// Sampling knobs for [`nyquist_with`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NyquistOptions {
    /// Initial log-spaced samples per decade on each side.
    pub per_decade: usize,
    /// Refinement threshold in radians.
    pub turn: f64,
}

impl Default for NyquistOptions {
    fn default() -> Self {
        Self { per_decade: 8, turn: NYQUIST_TURN }
    }
}

/// [`nyquist`] with explicit sampling density.
pub fn nyquist_with<T: Scalar>(
    l: &RationalFunction<T>,
    omega_min: T,
    omega_max: T,
    opts: NyquistOptions,
) -> Result<NyquistResult<T>> {
    if opts.per_decade == 0 || !(opts.turn > 0.0) {
        return Err(Error::Parameter("nyquist needs per_decade >= 1 and turn > 0".into()));
    }
    if !(omega_min > T::zero() && omega_max > omega_min) {
        return Err(Error::Parameter("nyquist needs 0 < omega_min < omega_max".into()));
    }
    if !l.is_proper() {
        return Err(Error::NyquistPrecondition("open loop is not proper".into()));
    }
    if !l.is_zero() {
        for p in l.poles()? {
            if p.re >= T::zero() {
                return Err(Error::NyquistPrecondition(format!(
                    "open-loop pole {} + {}i is not in the open left half-plane",
                    p.re, p.im
                )));
            }
        }
    }
    let closure = l.at_infinity().unwrap_or_else(C::zero);
    let minus_one = C::new(-T::one(), T::zero());

    let decades = (omega_max / omega_min).log10().to_f().ceil().max(1.0) as usize;
    let per_side = opts.per_decade * decades + 1;
    let mut ws: Vec<T> = Vec::with_capacity(2 * per_side + 3);
    let pos: Vec<T> = (0..per_side)
        .map(|k| omega_min * (omega_max / omega_min).powf(T::of(k as f64 / (per_side - 1) as f64)))
        .collect();
    ws.extend(pos.iter().rev().map(|&w| -w));
    ws.push(T::zero());
    ws.extend(pos.iter().copied());
    let mut vals = ws.iter().map(|&w| l.eval(jw(w))).collect::<Result<Vec<_>>>()?;

    let turn = T::of(opts.turn);
    const MAX_SAMPLES: usize = 400_000;
    for _pass in 0..60 {
        let n = ws.len();
        let mut split = vec![false; n - 1];
        for i in 0..n - 1 {
            if angle_between(vals[i] - minus_one, vals[i + 1] - minus_one) > turn {
                split[i] = true;
            }
            if i + 2 < n && angle_between(vals[i + 1] - vals[i], vals[i + 2] - vals[i + 1]) > turn {
                split[i] = true;
                split[i + 1] = true;
            }
        }
        // Intervals already at floating-point resolution cannot be refined further.
        for i in 0..n - 1 {
            let m = midpoint(ws[i], ws[i + 1]);
            if !(m > ws[i] && m < ws[i + 1]) {
                split[i] = false;
            }
        }
        let count = split.iter().filter(|&&x| x).count();
        if count == 0 || n + count > MAX_SAMPLES {
            break;
        }
        let mut nw = Vec::with_capacity(n + count);
        let mut nv = Vec::with_capacity(n + count);
        for i in 0..n {
            nw.push(ws[i]);
            nv.push(vals[i]);
            if i + 1 < n && split[i] {
                let m = midpoint(ws[i], ws[i + 1]);
                nw.push(m);
                nv.push(l.eval(jw(m))?);
            }
        }
        ws = nw;
        vals = nv;
    }

    let mut total = T::zero();
    let mut min_distance = T::infinity();
    let mut path: Vec<C<T>> = vals.clone();
    path.push(closure);
    path.push(vals[0]);
    for w in path.windows(2) {
        let (a, b) = (w[0] - minus_one, w[1] - minus_one);
        if a.norm() > T::zero() && b.norm() > T::zero() {
            total += (b * a.conj()).arg();
        }
        min_distance = min_distance.min(segment_distance(minus_one, w[0], w[1]));
    }
    let winding_number = (total / T::TAU()).round().to_f() as i64;
    let verdict = if min_distance <= T::of(NYQUIST_MARGIN) {
        Verdict::Marginal
    } else if winding_number == 0 {
        Verdict::Stable
    } else {
        Verdict::Unstable
    };
    Ok(NyquistResult {
        samples: ws.into_iter().zip(vals).collect(),
        closure,
        winding_number,
        min_distance,
        verdict,
    })
}

/// Numerator of `1 + L` over the denominator of `L`; its roots are the closed-loop poles.
pub fn loop_characteristic<T: Scalar>(l: &RationalFunction<T>) -> Polynomial<T> {
    l.den() + l.num()
}

/// Routh-Hurwitz test for the real monic quartic `s⁴ + β₃s³ + β₂s² + β₁s + β₀`.
///
/// Stable iff `β₃ > 0`, `(β₂β₃ − β₁)/β₃ > 0`, `β₃²β₀/(β₁ − β₂β₃) + β₁ > 0` and `β₀ > 0`.
/// `β₀ = 0` with a Hurwitz cubic cofactor is marginal.
pub fn routh_hurwitz_quartic<T: Scalar>(beta: [T; 4]) -> Result<Verdict> {
    let [b3, b2, b1, b0] = beta;
    if beta.iter().any(|b| !b.is_finite()) {
        return Err(Error::Parameter("quartic coefficients must be finite".into()));
    }
    if b0 == T::zero() {
        let cubic_stable = b3 > T::zero() && b1 > T::zero() && b3 * b2 > b1;
        return Ok(if cubic_stable { Verdict::Marginal } else { Verdict::Unstable });
    }
    let c1 = b3 > T::zero();
    let c2 = c1 && (b2 * b3 - b1) / b3 > T::zero();
    let c3 = c2 && b3 * b3 * b0 / (b1 - b2 * b3) + b1 > T::zero();
    Ok(if c3 && b0 > T::zero() { Verdict::Stable } else { Verdict::Unstable })
}

/// [`routh_hurwitz_quartic`] on a polynomial, which must be a real quartic.
pub fn routh_hurwitz_poly<T: Scalar>(p: &Polynomial<T>) -> Result<Verdict> {
    if p.degree() != Some(4) {
        return Err(Error::Parameter(format!("expected a quartic, got degree {:?}", p.degree())));
    }
    if !p.is_real(T::eps() * T::of(64.0) * p.max_abs_coeff()) {
        return Err(Error::NonReal);
    }
    let lead = p.leading().re;
    let c = p.coeffs();
    Ok(routh_hurwitz_quartic([c[3].re / lead, c[2].re / lead, c[1].re / lead, c[0].re / lead])?)
}

/// Root-magnitude scale of `p`: `max_k |c_k/c_n|^{1/(n−k)}`.
pub fn root_scale<T: Scalar>(p: &Polynomial<T>) -> T {
    let Some(n) = p.degree() else { return T::one() };
    let lead = p.leading().norm();
    let mut scale = T::zero();
    for (k, c) in p.coeffs()[..n].iter().enumerate() {
        let r = c.norm() / lead;
        if r > T::zero() {
            scale = scale.max(r.powf(T::one() / T::of((n - k) as f64)));
        }
    }
    if scale == T::zero() {
        T::one()
    } else {
        scale
    }
}

/// Marginal band `1e-9 · root_scale(p)`.
pub fn default_margin<T: Scalar>(p: &Polynomial<T>) -> T {
    T::of(1e-9) * root_scale(p)
}

/// Stable iff every root has `Re < −margin`; marginal if the largest real part is within `±margin`.
pub fn stable_by_roots<T: Scalar>(den: &Polynomial<T>, margin: T) -> Result<Verdict> {
    match den.degree() {
        None | Some(0) => return Err(Error::Parameter("stable_by_roots needs degree >= 1".into())),
        _ => {}
    }
    let max_re = den
        .roots()?
        .iter()
        .map(|r| r.re)
        .fold(T::neg_infinity(), |a, b| a.max(b));
    Ok(if max_re < -margin {
        Verdict::Stable
    } else if max_re <= margin {
        Verdict::Marginal
    } else {
        Verdict::Unstable
    })
}
