//! Amplifier/controller interconnections: the 2-port loop, its high-gain limit, the
//! cascaded open-loop system, and the 3-port directional loop.

use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::rational::RationalFunction;
use crate::scalar::{Scalar, C};
use crate::transfer::{expect_signature, Port, TransferMatrix};

const A: Port = Port::Annihilation;
const CR: Port = Port::Creation;

type Rf<T> = RationalFunction<T>;

/// Result of closing a feedback loop.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosedLoop<T: Scalar> {
    pub gfb: TransferMatrix<T>,
    /// Open-loop transfer `L = −K21·G22` for the 2-port loop.
    pub open_loop: Option<Rf<T>>,
    /// Which interconnection and which operands produced `gfb`.
    pub provenance: String,
}

fn is_passive_2x2<T: Scalar>(k: &TransferMatrix<T>) -> bool {
    k.rows() == 2
        && k.cols() == 2
        && k.sig_in()[0] == k.sig_in()[1]
        && k.sig_out() == k.sig_in()
}

fn is_amplifier_2x2<T: Scalar>(g: &TransferMatrix<T>) -> bool {
    g.rows() == 2 && g.cols() == 2 && g.sig_in()[0] != g.sig_in()[1] && g.sig_out() == g.sig_in()
}

fn describe<T: Scalar>(m: &TransferMatrix<T>) -> String {
    let deg = m.entries().iter().filter_map(|e| e.den().degree()).max().unwrap_or(0);
    format!("{}x{} {:?}->{:?} (max den degree {deg})", m.rows(), m.cols(), m.sig_in(), m.sig_out())
}

fn require_nonzero<T: Scalar>(r: &Rf<T>, what: &str) -> Result<()> {
    if r.is_zero() {
        return Err(Error::SingularInterconnection(format!("{what} is identically zero")));
    }
    Ok(())
}

/// Amplifier `G` with controller `K` in the loop `b̃₂† → K → b₂†`.
///
/// With `Δ = 1 − K21·G22`:
/// `[[ (G11 − K21 det G)/Δ, G12 K22/Δ ], [ G21 K11/Δ, (K12 + G22 det K)/Δ ]]`.
pub fn close_loop<T: Scalar>(g: &TransferMatrix<T>, k: &TransferMatrix<T>) -> Result<ClosedLoop<T>> {
    expect_signature(g, "amplifier G", &[A, CR], &[A, CR])?;
    if !is_passive_2x2(k) {
        return Err(Error::Signature(format!("controller K must be 2x2 single-kind, got {}", describe(k))));
    }
    let provenance = format!("close_loop(G: {}, K: {})", describe(g), describe(k));
    if let (Some(gc), Some(kc)) = (common_den(g), common_den(k)) {
        let (gfb, open_loop) = close_loop_common(&gc, &kc)?;
        return Ok(ClosedLoop { gfb, open_loop: Some(open_loop), provenance });
    }
    let (g11, g12, g21, g22) = (g.get(0, 0), g.get(0, 1), g.get(1, 0), g.get(1, 1));
    let (k11, k12, k21, k22) = (k.get(0, 0), k.get(0, 1), k.get(1, 0), k.get(1, 1));
    let det_g = g.det2()?;
    let det_k = k.det2()?;
    let open_loop = -&(k21 * g22);
    let den = &Rf::one() + &open_loop;
    require_nonzero(&den, "1 - K21*G22")?;
    let e11 = &(g11 - &(k21 * &det_g)) / &den;
    let e12 = &(g12 * k22) / &den;
    let e21 = &(g21 * k11) / &den;
    let e22 = &(k12 + &(g22 * &det_k)) / &den;
    Ok(ClosedLoop {
        gfb: TransferMatrix::from_2x2([[e11, e12], [e21, e22]], [A, CR], [A, CR]),
        open_loop: Some(open_loop),
        provenance,
    })
}

/// 2x2 numerators `[n11, n12, n21, n22]` over one shared monic denominator.
struct CommonDen<T: Scalar> {
    num: [Polynomial<T>; 4],
    den: Polynomial<T>,
}

fn common_den<T: Scalar>(m: &TransferMatrix<T>) -> Option<CommonDen<T>> {
    let den = m.entries().iter().map(|e| e.den()).max_by_key(|d| d.degree().unwrap_or(0))?.clone();
    let lift = |e: &Rf<T>| -> Option<Polynomial<T>> {
        if e.den() == &den {
            Some(e.num().clone())
        } else if e.den().degree() == Some(0) {
            Some(e.num() * &den)
        } else {
            None
        }
    };
    Some(CommonDen {
        num: [lift(m.get(0, 0))?, lift(m.get(0, 1))?, lift(m.get(1, 0))?, lift(m.get(1, 1))?],
        den,
    })
}

/// Polynomial form of [`close_loop`] for operands with shared entry denominators.
///
/// Keeps the loop polynomial `P = dK·dG − M21·N22` as the only new factor, and
/// divides `det N` by `dG` (`det M` by `dK`) when that division is exact, so
/// all-pass determinants do not raise the degree.
fn close_loop_common<T: Scalar>(g: &CommonDen<T>, k: &CommonDen<T>) -> Result<(TransferMatrix<T>, Rf<T>)> {
    let [n11, n12, n21, n22] = &g.num;
    let [m11, m12, m21, m22] = &k.num;
    let (dg, dk) = (&g.den, &k.den);
    let tol = T::eps() * T::of(1e4);
    let p = &(dk * dg) - &(m21 * n22);
    if p.is_zero() {
        return Err(Error::SingularInterconnection("1 - K21*G22 is identically zero".into()));
    }
    let det_n = &(n11 * n22) - &(n12 * n21);
    let det_m = &(m11 * m22) - &(m12 * m21);
    let e11 = match det_n.exact_div(dg, tol) {
        Some(q) => Rf::new(&(n11 * dk) - &(m21 * &q), p.clone())?,
        None => Rf::new(&(&(n11 * dg) * dk) - &(m21 * &det_n), dg * &p)?,
    };
    let e12 = Rf::new(n12 * m22, p.clone())?;
    let e21 = Rf::new(n21 * m11, p.clone())?;
    let e22 = match det_m.exact_div(dk, tol) {
        Some(q) => Rf::new(&(m12 * dg) + &(n22 * &q), p.clone())?,
        None => Rf::new(&(&(m12 * dg) * dk) + &(n22 * &det_m), dk * &p)?,
    };
    let open_loop = Rf::new(-&(m21 * n22), dk * dg)?;
    Ok((TransferMatrix::from_2x2([[e11, e12], [e21, e22]], [A, CR], [A, CR]), open_loop))
}

/// High-gain limit of [`close_loop`]: `(−1/K21)·[[1, K22], [K11, det K]]`.
pub fn ideal_closed_loop<T: Scalar>(k: &TransferMatrix<T>) -> Result<TransferMatrix<T>> {
    if !is_passive_2x2(k) {
        return Err(Error::Signature(format!("controller K must be 2x2 single-kind, got {}", describe(k))));
    }
    let k21 = k.get(1, 0);
    if k21.is_zero() {
        return Err(Error::IdealUndefined("K21 is identically zero".into()));
    }
    let f = -&k21.recip()?;
    let e = [
        [f.clone(), &f * k.get(1, 1)],
        [&f * k.get(0, 0), &f * &k.det2()?],
    ];
    Ok(TransferMatrix::from_2x2(e, [A, CR], [A, CR]))
}

/// Cascade of `G` and `K` with the loop cut:
/// `(b₁, b₂†, b₄†) → (b̃₁, b̃₃†, b̃₄†)`.
pub fn open_loop_system<T: Scalar>(g: &TransferMatrix<T>, k: &TransferMatrix<T>) -> Result<TransferMatrix<T>> {
    expect_signature(g, "amplifier G", &[A, CR], &[A, CR])?;
    if !is_passive_2x2(k) {
        return Err(Error::Signature(format!("controller K must be 2x2 single-kind, got {}", describe(k))));
    }
    let (g11, g12, g21, g22) = (g.get(0, 0), g.get(0, 1), g.get(1, 0), g.get(1, 1));
    let (k11, k12, k21, k22) = (k.get(0, 0), k.get(0, 1), k.get(1, 0), k.get(1, 1));
    let entries = vec![
        g11.clone(),
        g12.clone(),
        Rf::zero(),
        k11 * g21,
        k11 * g22,
        k12.clone(),
        k21 * g21,
        k21 * g22,
        k22.clone(),
    ];
    TransferMatrix::new(3, 3, entries, vec![A, CR, CR], vec![A, CR, CR])
}

/// One sample of a high-gain convergence study.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceSample<T> {
    pub s: C<T>,
    pub gain_param: T,
    /// `max_ij |close_loop − ideal|` at `s`.
    pub error: T,
    /// `1/|G11(s)|`.
    pub inverse_gain: T,
    /// `|G11(s)| ≥ 10`.
    pub in_domain: bool,
}

/// Per-sample-point verdict of a convergence study.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceTrace<T> {
    pub s: C<T>,
    pub samples: Vec<ConvergenceSample<T>>,
    /// Every sample along the family lies in the high-gain domain.
    pub in_domain: bool,
    /// Error shrinks at least in proportion to the gain parameter.
    pub linear: bool,
    /// Inverse gain stops shrinking along the family.
    pub gain_ceiling: bool,
}

/// Compares `close_loop(G(p), K)` with `ideal_closed_loop(K)` along an amplifier family.
///
/// `params` should decrease towards the ideal limit (for the NDPA family, `ε` in
/// `γ = (2+ε)λ`). `linear` requires `error(pᵢ₊₁)/error(pᵢ) ≤ slack · pᵢ₊₁/pᵢ` for
/// every consecutive pair.
pub fn high_gain_convergence<T: Scalar>(
    family: impl Fn(T) -> Result<TransferMatrix<T>>,
    params: &[T],
    k: &TransferMatrix<T>,
    s_samples: &[C<T>],
    slack: T,
) -> Result<Vec<ConvergenceTrace<T>>> {
    let ideal = ideal_closed_loop(k)?;
    let members = params
        .iter()
        .map(|&p| Ok((p, family(p)?)))
        .collect::<Result<Vec<_>>>()?;
    let loops = members
        .iter()
        .map(|(p, g)| Ok((*p, g.clone(), close_loop(g, k)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut traces = Vec::with_capacity(s_samples.len());
    for &s in s_samples {
        let want = ideal.eval(s)?;
        let mut samples = Vec::with_capacity(loops.len());
        for (p, g, cl) in &loops {
            let got = cl.gfb.eval(s)?;
            let g11 = g.get(0, 0).eval(s)?.norm();
            samples.push(ConvergenceSample {
                s,
                gain_param: *p,
                error: (&got - &want).max_abs(),
                inverse_gain: T::one() / g11,
                in_domain: g11 >= T::of(10.0),
            });
        }
        let pairs = || samples.windows(2);
        let linear = pairs().all(|w| w[1].error <= slack * w[0].error * (w[1].gain_param / w[0].gain_param));
        let gain_ceiling = pairs().any(|w| w[1].inverse_gain >= T::of(0.5) * w[0].inverse_gain);
        traces.push(ConvergenceTrace {
            s,
            in_domain: samples.iter().all(|x| x.in_domain),
            linear,
            gain_ceiling,
            samples,
        });
    }
    Ok(traces)
}

fn require_nonreciprocal_operands<T: Scalar>(
    g: &TransferMatrix<T>,
    gbar: &TransferMatrix<T>,
    k: &TransferMatrix<T>,
) -> Result<()> {
    if !is_amplifier_2x2(g) || !is_amplifier_2x2(gbar) {
        return Err(Error::Signature("G and Gbar must be 2x2 mixed-signature amplifiers".into()));
    }
    if !is_passive_2x2(k) {
        return Err(Error::Signature(format!("controller K must be 2x2 single-kind, got {}", describe(k))));
    }
    Ok(())
}

/// Forward stage of the directional loop: `G`, `Ḡ` and `K` closed through `K22`,
/// mapping `(b₁†, b₂, b₃) → (b̃₁, b̃₂†, b̃₃)` with common denominator `1 − Ḡ21 G21 K22`.
///
/// `H11 = (G12 + Ḡ21 K22 det G)/Δ`; the remaining entries follow the same loop algebra.
pub fn nonreciprocal_h<T: Scalar>(
    g: &TransferMatrix<T>,
    gbar: &TransferMatrix<T>,
    k: &TransferMatrix<T>,
) -> Result<[[Rf<T>; 3]; 3]> {
    require_nonreciprocal_operands(g, gbar, k)?;
    let (g11, g12, g21, g22) = (g.get(0, 0), g.get(0, 1), g.get(1, 0), g.get(1, 1));
    let (b11, b12, b21, b22) = (gbar.get(0, 0), gbar.get(0, 1), gbar.get(1, 0), gbar.get(1, 1));
    let (k11, k12, k21, k22) = (k.get(0, 0), k.get(0, 1), k.get(1, 0), k.get(1, 1));
    let det_g = g.det2()?;
    let det_b = gbar.det2()?;
    let det_k = k.det2()?;
    let den = &Rf::one() - &(&(b21 * g21) * k22);
    require_nonzero(&den, "1 - Gbar21*G21*K22")?;
    let over = |n: Rf<T>| &n / &den;
    Ok([
        [
            over(g12 + &(&(b21 * k22) * &det_g)),
            over(&(g11 * b22) * k22),
            over(g11 * k21),
        ],
        [
            over(b11 * g22),
            over(b12 + &(&(g21 * k22) * &det_b)),
            over(&(b11 * g21) * k21),
        ],
        [
            over(&(k12 * b21) * g22),
            over(k12 * b22),
            over(k11 - &(&(b21 * g21) * &det_k)),
        ],
    ])
}

/// Directional 3-port loop `(b₁†, b₃, b₄) → (b̃₂†, b̃₃, b̃₄)`.
///
/// [`nonreciprocal_h`] closed through the para-conjugated reverse controller
/// `[[K11~, K21~], [K12~, K22~]]` with denominator `1 − H12 K22~`.
pub fn nonreciprocal_close<T: Scalar>(
    g: &TransferMatrix<T>,
    gbar: &TransferMatrix<T>,
    k: &TransferMatrix<T>,
) -> Result<ClosedLoop<T>> {
    let h = nonreciprocal_h(g, gbar, k)?;
    let (s11, s12, s21, s22) = (
        k.get(0, 0).para_conjugate(),
        k.get(0, 1).para_conjugate(),
        k.get(1, 0).para_conjugate(),
        k.get(1, 1).para_conjugate(),
    );
    let den2 = &Rf::one() - &(&h[0][1] * &s22);
    require_nonzero(&den2, "1 - H12*K22~")?;
    let over2 = |n: Rf<T>| &n / &den2;
    // Output rows 1 and 2 read H rows 2 and 3; inputs map to H columns 1 and 3, then
    // to the reverse-path port.
    let row = |r: usize| -> [Rf<T>; 3] {
        let hr = &h[r + 1];
        let cross = |c: usize| &(&h[0][c] * &hr[1]) - &(&h[0][1] * &hr[c]);
        [
            over2(&hr[0] + &(&cross(0) * &s22)),
            over2(&hr[2] + &(&cross(2) * &s22)),
            over2(&hr[1] * &s12),
        ]
    };
    let [e11, e12, e13] = row(0);
    let [e21, e22, e23] = row(1);
    let e31 = over2(&h[0][0] * &s21);
    let e32 = over2(&h[0][2] * &s21);
    let e33 = over2(&s11 + &(&h[0][1] * &(&(&s12 * &s21) - &(&s11 * &s22))));
    let gfb = TransferMatrix::new(
        3,
        3,
        vec![e11, e12, e13, e21, e22, e23, e31, e32, e33],
        vec![CR, A, A],
        vec![CR, A, A],
    )?;
    Ok(ClosedLoop {
        gfb,
        open_loop: None,
        provenance: format!(
            "nonreciprocal_close(G: {}, Gbar: {}, K: {})",
            describe(g),
            describe(gbar),
            describe(k)
        ),
    })
}

/// High-gain limit of [`nonreciprocal_close`]:
/// `[[−1/K22, −K21/K22, 0], [−K12/K22, det K/K22, 0], [0, 0, (K11~ + det(K)~)/(1 + K22~)]]`.
pub fn nonreciprocal_ideal<T: Scalar>(k: &TransferMatrix<T>) -> Result<TransferMatrix<T>> {
    if !is_passive_2x2(k) {
        return Err(Error::Signature(format!("controller K must be 2x2 single-kind, got {}", describe(k))));
    }
    let k22 = k.get(1, 1);
    if k22.is_zero() {
        return Err(Error::IdealUndefined("K22 is identically zero".into()));
    }
    let inv = k22.recip()?;
    let det_k = k.det2()?;
    let kt = k.para_conjugate();
    let num33 = kt.get(0, 0) + &det_k.para_conjugate();
    let den33 = &Rf::one() + kt.get(1, 1);
    require_nonzero(&den33, "1 + K22~")?;
    let entries = vec![
        -&inv,
        -&(k.get(1, 0) * &inv),
        Rf::zero(),
        -&(k.get(0, 1) * &inv),
        &det_k * &inv,
        Rf::zero(),
        Rf::zero(),
        Rf::zero(),
        &num33 / &den33,
    ];
    TransferMatrix::new(3, 3, entries, vec![CR, A, A], vec![CR, A, A])
}
