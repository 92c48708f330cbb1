//! Twelve-state detector + feedback-filter model and its rank tests.

use crate::params::GwParams;
use num_complex::Complex64;
use qfb_core::linalg::{balance, krylov_dimension};
use qfb_core::{CMatrix64, StateSpaceModel64};

pub const STATES: [&str; 12] = ["X_M", "P_M", "q_d", "p_d", "q1", "p1", "q2", "p2", "q3", "p3", "q4", "p4"];
pub const INPUTS: [&str; 9] = ["F_GW", "Q_d_in", "P_d_in", "Q1_loss", "P1_loss", "Q3_loss", "P3_loss", "Q4_loss", "P4_loss"];
pub const OUTPUTS: [&str; 2] = ["Q_d_out", "P_d_out"];
/// Index of the measured output (`P_d^out`) and of the actuated state (`P_M`).
pub const MEASURED: usize = 1;
pub const ACTUATED: usize = 1;
/// Relative Arnoldi breakdown threshold used by [`ctrb_obsv`].
pub const RANK_TOL: f64 = 1e-10;

/// Real `(A, B_w, C, D)` over the states, noise inputs and quadrature outputs above.
pub fn build_full_system(p: &GwParams) -> StateSpaceModel64 {
    let n = 12;
    let mut a = vec![0.0; n * n];
    let mut set = |i: usize, j: usize, v: f64| a[i * n + j] = v;
    let (om, gm, gi, dd) = (p.omega_m, p.g_m(), p.gamma_ifo, p.delta_d);
    let (gni, g24, g34, l) = (p.g_ni(), p.g24(), p.g34(), p.lambda);
    let (g1, k3, k4) = (p.gamma_1loss, p.kappa_3loss, p.kappa_4loss);
    let r2 = std::f64::consts::SQRT_2;
    // Test mass.
    set(0, 1, om);
    set(1, 2, r2 * gm);
    // Arm cavity quadratures.
    set(2, 2, -gi / 2.0);
    set(2, 3, dd);
    set(2, 5, gni);
    set(3, 0, r2 * gm);
    set(3, 2, -dd);
    set(3, 3, -gi / 2.0);
    set(3, 4, -gni);
    // Amplifier signal mode.
    set(4, 3, gni);
    set(4, 4, -g1 / 2.0);
    set(4, 6, l);
    set(5, 2, -gni);
    set(5, 5, -g1 / 2.0);
    set(5, 7, -l);
    // Amplifier idler mode.
    set(6, 4, l);
    set(6, 11, g24);
    set(7, 5, -l);
    set(7, 10, -g24);
    // Controller cavity.
    set(8, 8, -k3 / 2.0);
    set(8, 11, g34);
    set(9, 9, -k3 / 2.0);
    set(9, 10, -g34);
    // Loop cavity.
    set(10, 7, g24);
    set(10, 9, g34);
    set(10, 10, -k4 / 2.0);
    set(11, 6, -g24);
    set(11, 8, -g34);
    set(11, 11, -k4 / 2.0);

    let mut b = vec![0.0; n * 9];
    let mut setb = |i: usize, j: usize, v: f64| b[i * 9 + j] = v;
    setb(1, 0, 1.0 / (p.hbar * p.m * p.omega_m).sqrt());
    setb(2, 1, -gi.sqrt());
    setb(3, 2, -gi.sqrt());
    setb(4, 3, -g1.sqrt());
    setb(5, 4, -g1.sqrt());
    setb(8, 5, -k3.sqrt());
    setb(9, 6, -k3.sqrt());
    setb(10, 7, -k4.sqrt());
    setb(11, 8, -k4.sqrt());

    let mut c = vec![0.0; 2 * n];
    c[2] = gi.sqrt();
    c[n + 3] = gi.sqrt();
    let mut d = vec![0.0; 2 * 9];
    d[1] = 1.0;
    d[9 + 2] = 1.0;

    StateSpaceModel64::new(
        CMatrix64::from_real(n, n, &a),
        CMatrix64::from_real(n, 9, &b),
        CMatrix64::from_real(2, n, &c),
        CMatrix64::from_real(2, 9, &d),
    )
    .and_then(|m| m.with_labels(&STATES, &INPUTS, &OUTPUTS))
    .expect("fixed dimensions and unique labels")
}

/// `(B_u, C_m, D_m)`: force on `P_M`, and the `P_d^out` row of `C` and `D`.
pub fn control_channels(m: &StateSpaceModel64) -> (CMatrix64, CMatrix64, CMatrix64) {
    let n = m.order();
    let mut bu = CMatrix64::zeros(n, 1);
    bu[(ACTUATED, 0)] = Complex64::new(1.0, 0.0);
    let cm = m.c().block(MEASURED, 0, 1, n);
    let dm = m.d().block(MEASURED, 0, 1, m.d().cols());
    (bu, cm, dm)
}

/// Numerical controllability and observability ranks of `(A, b)` and `(A, c)`.
///
/// `A` is first diagonally balanced (`D⁻¹AD`, `D⁻¹b`, `cD`); each rank is the dimension
/// of the Arnoldi basis before a new direction falls below `RANK_TOL · ‖A‖_F`.
pub fn ctrb_obsv(a: &CMatrix64, b: &CMatrix64, c: &CMatrix64) -> (usize, usize) {
    let (ab, d) = balance(a);
    let bb: Vec<Complex64> = b.col(0).iter().zip(&d).map(|(x, s)| x / s).collect();
    let cb: Vec<Complex64> = c.row(0).iter().zip(&d).map(|(x, s)| (x * s).conj()).collect();
    let rank_c = krylov_dimension(&ab, &bb, RANK_TOL);
    let rank_o = krylov_dimension(&ab.adjoint(), &cb, RANK_TOL);
    (rank_c, rank_o)
}
