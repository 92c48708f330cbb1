//! State-space models `ẋ = Ax + Bu`, `y = Cx + Du` for loop-cavity realizations.

use crate::error::{Error, Result};
use crate::linalg::{expm, CMatrix};
use crate::poly::Polynomial;
use crate::rational::RationalFunction;
use crate::scalar::{jw, re, Scalar, C};
use crate::transfer::{Port, TransferMatrix};
use num_traits::{One, Zero};
use std::collections::HashSet;

/// Speed of light used by every loop-length conversion (m/s).
pub const SPEED_OF_LIGHT: f64 = 3e8;

#[derive(Clone, Debug, PartialEq)]
pub struct StateSpaceModel<T: Scalar> {
    a: CMatrix<T>,
    b: CMatrix<T>,
    c: CMatrix<T>,
    d: CMatrix<T>,
    states: Vec<String>,
    inputs: Vec<String>,
    outputs: Vec<String>,
    input_ports: Vec<Port>,
    output_ports: Vec<Port>,
}

fn labels(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|k| format!("{prefix}{}", k + 1)).collect()
}

fn check_unique(what: &str, l: &[String]) -> Result<()> {
    let set: HashSet<&String> = l.iter().collect();
    if set.len() != l.len() {
        return Err(Error::Parameter(format!("{what} labels are not unique")));
    }
    Ok(())
}

impl<T: Scalar> StateSpaceModel<T> {
    /// Model with default labels `x1…`, `u1…`, `y1…` and annihilation-type ports.
    pub fn new(a: CMatrix<T>, b: CMatrix<T>, c: CMatrix<T>, d: CMatrix<T>) -> Result<Self> {
        let n = a.rows();
        if !a.is_square() || b.rows() != n || c.cols() != n || d.rows() != c.rows() || d.cols() != b.cols() {
            return Err(Error::Dimension(format!(
                "A {}x{}, B {}x{}, C {}x{}, D {}x{}",
                a.rows(),
                a.cols(),
                b.rows(),
                b.cols(),
                c.rows(),
                c.cols(),
                d.rows(),
                d.cols()
            )));
        }
        let (m, p) = (b.cols(), c.rows());
        Ok(Self {
            states: labels("x", n),
            inputs: labels("u", m),
            outputs: labels("y", p),
            input_ports: vec![Port::Annihilation; m],
            output_ports: vec![Port::Annihilation; p],
            a,
            b,
            c,
            d,
        })
    }

    pub fn with_labels(mut self, states: &[&str], inputs: &[&str], outputs: &[&str]) -> Result<Self> {
        let own = |l: &[&str]| l.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        let (s, i, o) = (own(states), own(inputs), own(outputs));
        if s.len() != self.states.len() || i.len() != self.inputs.len() || o.len() != self.outputs.len() {
            return Err(Error::Dimension("label counts do not match model dimensions".into()));
        }
        check_unique("state", &s)?;
        check_unique("input", &i)?;
        check_unique("output", &o)?;
        self.states = s;
        self.inputs = i;
        self.outputs = o;
        Ok(self)
    }

    pub fn with_ports(mut self, inputs: Vec<Port>, outputs: Vec<Port>) -> Result<Self> {
        if inputs.len() != self.inputs.len() || outputs.len() != self.outputs.len() {
            return Err(Error::Dimension("port counts do not match model dimensions".into()));
        }
        self.input_ports = inputs;
        self.output_ports = outputs;
        Ok(self)
    }

    pub fn a(&self) -> &CMatrix<T> {
        &self.a
    }
    pub fn b(&self) -> &CMatrix<T> {
        &self.b
    }
    pub fn c(&self) -> &CMatrix<T> {
        &self.c
    }
    pub fn d(&self) -> &CMatrix<T> {
        &self.d
    }
    pub fn states(&self) -> &[String] {
        &self.states
    }
    pub fn inputs(&self) -> &[String] {
        &self.inputs
    }
    pub fn outputs(&self) -> &[String] {
        &self.outputs
    }
    pub fn order(&self) -> usize {
        self.a.rows()
    }

    /// `C(sI − A)⁻¹B + D` by a linear solve.
    pub fn response_at(&self, s: C<T>) -> Result<CMatrix<T>> {
        let n = self.order();
        if n == 0 {
            return Ok(self.d.clone());
        }
        let m = &CMatrix::identity(n).scale(s) - &self.a;
        let x = m.lu().map_err(|_| Error::Pole { re: s.re.to_f(), im: s.im.to_f() })?.solve_mat(&self.b)?;
        Ok(&(&self.c * &x) + &self.d)
    }

    /// [`Self::response_at`] on the imaginary axis.
    pub fn freq_response(&self, omega: T) -> Result<CMatrix<T>> {
        self.response_at(jw(omega))
    }

    /// Characteristic polynomial `det(sI − A)` and the adjugate coefficients
    /// `adj(sI − A) = Σ_k M_k s^{n−k}` by the Faddeev–LeVerrier recursion.
    fn leverrier(&self) -> (Polynomial<T>, Vec<CMatrix<T>>) {
        let n = self.order();
        let mut coeffs = vec![C::<T>::zero(); n + 1];
        coeffs[n] = C::<T>::one();
        let mut ms = Vec::with_capacity(n);
        let mut m = CMatrix::zeros(n, n);
        for k in 1..=n {
            let mut next = &self.a * &m;
            for i in 0..n {
                next[(i, i)] += coeffs[n - k + 1];
            }
            let am = &self.a * &next;
            let tr = (0..n).fold(C::<T>::zero(), |acc, i| acc + am[(i, i)]);
            coeffs[n - k] = -tr / re(T::of(k as f64));
            ms.push(next.clone());
            m = next;
        }
        (Polynomial::new(coeffs), ms)
    }

    /// Symbolic transfer matrix, verified against [`Self::response_at`] at 8 points.
    pub fn to_transfer_matrix(&self) -> Result<TransferMatrix<T>> {
        let n = self.order();
        if n > 16 {
            return Err(Error::Parameter(format!("to_transfer_matrix supports n <= 16, got {n}")));
        }
        let (p, m) = (self.c.rows(), self.b.cols());
        let (chi, ms) = self.leverrier();
        let cmb: Vec<CMatrix<T>> = ms.iter().map(|mk| &(&self.c * mk) * &self.b).collect();
        let mut entries = Vec::with_capacity(p * m);
        for i in 0..p {
            for j in 0..m {
                // adj term M_k multiplies s^{n−k}.
                let mut num = vec![C::<T>::zero(); n + 1];
                for (k, cm) in cmb.iter().enumerate() {
                    num[n - 1 - k] = cm[(i, j)];
                }
                let num = &Polynomial::new(num) + &chi.scale(self.d[(i, j)]);
                entries.push(RationalFunction::new(num, chi.clone())?);
            }
        }
        let tm = TransferMatrix::new(p, m, entries, self.input_ports.clone(), self.output_ports.clone())?;
        self.verify(&tm, &chi)?;
        Ok(tm)
    }

    fn verify(&self, tm: &TransferMatrix<T>, chi: &Polynomial<T>) -> Result<()> {
        let scale = crate::stability::root_scale(chi).max(T::one());
        const PROBES: [f64; 8] = [0.013, 0.071, 0.29, 0.63, 1.37, 2.9, 7.3, 19.0];
        let tol = T::of(1e-8).max(T::eps() * T::of(1e4));
        let mut checked = 0;
        for (k, &w) in PROBES.iter().enumerate() {
            let s = C::new(T::of(0.1 * (k as f64 - 3.5)) * scale, T::of(w) * scale);
            let (Ok(direct), Ok(sym)) = (self.response_at(s), tm.eval(s)) else { continue };
            let err = (&direct - &sym).max_abs();
            if err > tol * direct.max_abs().max(T::one()) {
                return Err(Error::Internal(format!(
                    "symbolic transfer matrix disagrees with direct evaluation by {:e}",
                    err.to_f()
                )));
            }
            checked += 1;
        }
        if checked == 0 && self.order() > 0 {
            return Err(Error::Internal("no probe point could be evaluated".into()));
        }
        Ok(())
    }
}

/// Amplifier, controller-cavity and loop-length parameters of a loop-cavity network.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LoopCavityParams<T> {
    pub gamma: T,
    pub lambda: T,
    pub kappa: T,
    /// Round-trip length of the amplifier–controller loop (m).
    pub l4: T,
}

impl<T: Scalar> LoopCavityParams<T> {
    pub fn new(gamma: T, lambda: T, kappa: T, l4: T) -> Result<Self> {
        let p = Self { gamma, lambda, kappa, l4 };
        if [gamma, lambda, kappa, l4].iter().any(|x| !(x.is_finite() && *x > T::zero())) {
            return Err(Error::Parameter(format!(
                "loop-cavity rates and length must be positive: {p:?}"
            )));
        }
        Ok(p)
    }

    /// `√(cγ/L₄)`.
    pub fn g24(&self) -> T {
        (T::of(SPEED_OF_LIGHT) * self.gamma / self.l4).sqrt()
    }

    /// `√(cκ/L₄)`.
    pub fn g34(&self) -> T {
        (T::of(SPEED_OF_LIGHT) * self.kappa / self.l4).sqrt()
    }
}

fn loop_a<T: Scalar>(p: &LoopCavityParams<T>, a33: C<T>) -> CMatrix<T> {
    let h = T::of(0.5);
    let (g24, g34) = (C::new(T::zero(), p.g24()), C::new(T::zero(), p.g34()));
    let z = C::<T>::zero();
    let l = re(p.lambda);
    CMatrix::from_rows(
        4,
        4,
        vec![
            re(-p.gamma * h), l, z, z,
            l, z, z, g24,
            z, z, a33, g34,
            z, g24, g34, z,
        ],
    )
}

const LOOP_STATES: [&str; 4] = ["a1", "a2_dag", "a3_dag", "a4_dag"];

/// Amplifier, controller cavity and loop cavity over `(a₁, a₂†, a₃†, a₄†)` with
/// inputs `(b₁, b₄†)` and outputs `(b̃₁, b̃₃†)`.
pub fn build_integrator_model<T: Scalar>(p: &LoopCavityParams<T>) -> Result<StateSpaceModel<T>> {
    let a = loop_a(p, re(-p.kappa * T::of(0.5)));
    let (sg, sk) = (p.gamma.sqrt(), p.kappa.sqrt());
    let o = T::zero();
    let b = CMatrix::from_real(4, 2, &[-sg, o, o, o, o, -sk, o, o]);
    let c = CMatrix::from_real(2, 4, &[sg, o, o, o, o, o, sk, o]);
    StateSpaceModel::new(a, b, c, CMatrix::identity(2))?
        .with_labels(&LOOP_STATES, &["b1", "b4_dag"], &["b1_out", "b3_dag_out"])?
        .with_ports(vec![Port::Annihilation, Port::Creation], vec![Port::Annihilation, Port::Creation])
}

/// `(α₀, [β₃, β₂, β₁, β₀])` of the closed-form `G21 = α₀/(s⁴ + β₃s³ + β₂s² + β₁s + β₀)`.
pub fn integrator_g21_coefficients<T: Scalar>(p: &LoopCavityParams<T>) -> (T, [T; 4]) {
    let (g, l, k) = (p.gamma, p.lambda, p.kappa);
    let (g24, g34) = (p.g24(), p.g34());
    let (g24s, g34s) = (g24 * g24, g34 * g34);
    let h = T::of(0.5);
    let q = T::of(0.25);
    let alpha0 = (g * k).sqrt() * l * g24 * g34;
    let b0 = g * k * g24s * q - l * l * g34s;
    let b1 = (g * g24s + k * g24s + g * g34s - k * l * l) * h;
    let b2 = g * k * q - l * l + g24s + g34s;
    let b3 = (g + k) * h;
    (alpha0, [b3, b2, b1, b0])
}

/// The closed-form `G21` of the integrator model as a rational function.
pub fn integrator_g21<T: Scalar>(p: &LoopCavityParams<T>) -> RationalFunction<T> {
    let (alpha0, [b3, b2, b1, b0]) = integrator_g21_coefficients(p);
    let den = Polynomial::from_real(&[b0, b1, b2, b3, T::one()]);
    RationalFunction::new(Polynomial::from_real(&[alpha0]), den).expect("monic quartic")
}

/// Integrator network with detuning `Δ` on the controller mode; output `√κ a₃†`.
pub fn build_self_oscillator<T: Scalar>(p: &LoopCavityParams<T>, delta: T) -> Result<StateSpaceModel<T>> {
    let a = loop_a(p, C::new(-p.kappa * T::of(0.5), delta));
    let b = CMatrix::zeros(4, 0);
    let o = T::zero();
    let c = CMatrix::from_real(1, 4, &[o, o, p.kappa.sqrt(), o]);
    StateSpaceModel::new(a, b, c, CMatrix::zeros(1, 0))?
        .with_labels(&LOOP_STATES, &[], &["b3_dag_out"])?
        .with_ports(vec![], vec![Port::Creation])
}

/// Phase-cancellation filter: the controller cavity couples only to the loop cavity,
/// with a single port `b_in → b_out` on the amplifier. `κ` plays the role of `κ₁`.
///
/// Returns the model and the closed form `Z(s) = N(s)/D(s)`.
pub fn build_phase_filter<T: Scalar>(p: &LoopCavityParams<T>) -> Result<(StateSpaceModel<T>, RationalFunction<T>)> {
    let a = loop_a(p, C::<T>::zero());
    let sg = p.gamma.sqrt();
    let o = T::zero();
    let b = CMatrix::from_real(4, 1, &[-sg, o, o, o]);
    let c = CMatrix::from_real(1, 4, &[sg, o, o, o]);
    let model = StateSpaceModel::new(a, b, c, CMatrix::identity(1))?
        .with_labels(&LOOP_STATES, &["b_in"], &["b_out"])?;
    let (g24, g34) = (p.g24(), p.g34());
    let gs = g24 * g24 + g34 * g34;
    let (g, l) = (p.gamma, p.lambda);
    let h = T::of(0.5);
    let c0 = -l * l * g34 * g34;
    let num = Polynomial::from_real(&[c0, -gs * g * h, gs - l * l, -g * h, T::one()]);
    let den = Polynomial::from_real(&[c0, gs * g * h, gs - l * l, g * h, T::one()]);
    Ok((model, RationalFunction::new(num, den)?))
}

/// Mean trajectory sampled on a time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T: Scalar> {
    pub t: Vec<T>,
    pub states: Vec<Vec<C<T>>>,
    /// `C x(t)`; inputs are held at zero mean.
    pub outputs: Vec<Vec<C<T>>>,
    pub output_labels: Vec<String>,
}

impl<T: Scalar> Trajectory<T> {
    /// CSV with header `t` followed by `<label>_re,<label>_im` per output.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for l in &self.output_labels {
            out.push_str(&format!(",{l}_re,{l}_im"));
        }
        out.push('\n');
        for (t, y) in self.t.iter().zip(&self.outputs) {
            out.push_str(&crate::fmt_sig17(t.to_f()));
            for v in y {
                out.push(',');
                out.push_str(&crate::fmt_sig17(v.re.to_f()));
                out.push(',');
                out.push_str(&crate::fmt_sig17(v.im.to_f()));
            }
            out.push('\n');
        }
        out
    }
}

/// Largest `‖A‖₁·dt` accepted by [`simulate_mean`].
pub const EXPM_GUARD: f64 = 50.0;

/// `x(t) = exp(A(t − t₀)) x₀` with `x₀` given at `t_grid[0]`, stepping between grid points.
pub fn simulate_mean<T: Scalar>(m: &StateSpaceModel<T>, x0: &[C<T>], t_grid: &[T]) -> Result<Trajectory<T>> {
    let n = m.order();
    if x0.len() != n {
        return Err(Error::Dimension(format!("x0 has {} entries, model has {n} states", x0.len())));
    }
    if t_grid.is_empty() {
        return Err(Error::Parameter("empty time grid".into()));
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Parameter("time grid must be strictly increasing".into()));
    }
    let norm = m.a.norm_1();
    let mut states = Vec::with_capacity(t_grid.len());
    states.push(x0.to_vec());
    let mut cache: Option<(T, CMatrix<T>)> = None;
    for w in t_grid.windows(2) {
        let dt = w[1] - w[0];
        if norm * dt > T::of(EXPM_GUARD) {
            return Err(Error::ConditioningGuard(format!(
                "|A|_1 dt = {:e} exceeds {EXPM_GUARD}",
                (norm * dt).to_f()
            )));
        }
        let reuse = matches!(&cache, Some((d, _)) if (*d - dt).abs() <= T::eps() * T::of(4.0) * dt);
        if !reuse {
            cache = Some((dt, expm(&m.a.scale(re(dt)))?));
        }
        let (_, e) = cache.as_ref().expect("cache filled above");
        let next = e.mul_vec(states.last().expect("non-empty"));
        states.push(next);
    }
    let outputs = states.iter().map(|x| m.c.mul_vec(x)).collect();
    Ok(Trajectory { t: t_grid.to_vec(), states, outputs, output_labels: m.outputs.clone() })
}

/// Mean quadratures `(q₁, q₃)` of the qubit emission `q₁` and the integrated readout `q₃`
/// at time `t` for qubit state `σₓ = ±1`.
pub fn qubit_readout_mean<T: Scalar>(gamma: T, kappa: T, t: T, sigma_x: i8) -> Result<(T, T)> {
    if !(gamma > T::zero() && kappa > T::zero() && t >= T::zero()) {
        return Err(Error::Parameter("need Gamma > 0, kappa > 0, t >= 0".into()));
    }
    if sigma_x != 1 && sigma_x != -1 {
        return Err(Error::Parameter(format!("sigma_x must be +1 or -1, got {sigma_x}")));
    }
    let sx = T::of(sigma_x as f64);
    let decay = (-gamma * t * T::of(0.5)).exp();
    let q1 = (gamma * T::of(0.5)).sqrt() * decay * sx;
    let q3 = kappa * (T::of(2.0) / gamma).sqrt() * (T::one() - decay) * sx;
    Ok((q1, q3))
}
