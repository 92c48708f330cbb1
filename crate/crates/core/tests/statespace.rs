use num_complex::Complex64 as Cx;
use proptest::prelude::*;
use qfb_core::components::log_grid;
use qfb_core::linalg::eigenvalues;
use qfb_core::stability::{routh_hurwitz_quartic, stable_by_roots};
use qfb_core::statespace::*;
use qfb_core::{CMatrix64, Error, StateSpaceModel64, Verdict};
use std::f64::consts::PI;

const C_LIGHT: f64 = SPEED_OF_LIGHT;

fn cx(re: f64, im: f64) -> Cx {
    Cx::new(re, im)
}

fn rel(a: Cx, b: Cx) -> f64 {
    (a - b).norm() / b.norm()
}

/// `c/L₄ = ratio·κ`.
fn loop_params(gamma: f64, lambda: f64, kappa: f64, ratio: f64) -> LoopCavityParams<f64> {
    LoopCavityParams::new(gamma, lambda, kappa, C_LIGHT / (ratio * kappa)).unwrap()
}

#[test]
fn single_port_reflection_vanishes_at_dc() {
    let k = 0.7f64;
    let m = StateSpaceModel64::new(
        CMatrix64::from_real(1, 1, &[-k]),
        CMatrix64::from_real(1, 1, &[-k.sqrt()]),
        CMatrix64::from_real(1, 1, &[k.sqrt()]),
        CMatrix64::identity(1),
    )
    .unwrap();
    assert!(m.freq_response(0.0).unwrap()[(0, 0)].norm() < 1e-15);
    let w = 0.3;
    let want = cx(0.0, w) / (cx(0.0, w) + k);
    assert!(rel(m.freq_response(w).unwrap()[(0, 0)], want) < 1e-14);
    let tm = m.to_transfer_matrix().unwrap();
    assert!(rel(tm.get(0, 0).eval(cx(0.0, w)).unwrap(), want) < 1e-14);
}

#[test]
fn feedthrough_only_model() {
    let d = CMatrix64::from_real(2, 2, &[1.0, 0.0, 0.0, 1.0]);
    let m = StateSpaceModel64::new(CMatrix64::zeros(0, 0), CMatrix64::zeros(0, 2), CMatrix64::zeros(2, 0), d.clone()).unwrap();
    assert_eq!(m.freq_response(3.0).unwrap(), d);
    let tm = m.to_transfer_matrix().unwrap();
    assert_eq!(tm.eval(cx(0.0, 1.0)).unwrap(), d);
}

#[test]
fn model_validation() {
    let bad = StateSpaceModel64::new(CMatrix64::zeros(2, 2), CMatrix64::zeros(3, 1), CMatrix64::zeros(1, 2), CMatrix64::zeros(1, 1));
    assert!(matches!(bad, Err(Error::Dimension(_))));
    let m = StateSpaceModel64::new(CMatrix64::zeros(1, 1), CMatrix64::zeros(1, 1), CMatrix64::zeros(1, 1), CMatrix64::zeros(1, 1)).unwrap();
    assert!(m.clone().with_labels(&["x"], &["u"], &["u"]).is_ok());
    assert!(m.with_labels(&["x"], &["u", "v"], &["y"]).is_err());
    let pole = StateSpaceModel64::new(CMatrix64::from_real(1, 1, &[0.0]), CMatrix64::identity(1), CMatrix64::identity(1), CMatrix64::zeros(1, 1)).unwrap();
    assert!(matches!(pole.freq_response(0.0), Err(Error::Pole { .. })));
    assert!(LoopCavityParams::new(1.0, 1.0, -1.0, 1.0).is_err());
}

#[test]
fn couplings_are_derived_from_loop_length() {
    let p = LoopCavityParams::new(2.0, 1.0, 0.5, 0.5).unwrap();
    assert!((p.g24() - (C_LIGHT * 2.0 / 0.5).sqrt()).abs() < 1e-9);
    assert!((p.g34() - (C_LIGHT * 0.5 / 0.5).sqrt()).abs() < 1e-9);
}

#[test]
fn integrator_model_matches_closed_form_pointwise() {
    let p = loop_params(2.01 * 9.0, 9.0, 1.0, 1e3);
    let m = build_integrator_model(&p).unwrap();
    let g21 = integrator_g21(&p);
    let w = 0.1;
    let got = m.freq_response(w).unwrap()[(1, 0)];
    assert!(rel(got, g21.eval(cx(0.0, w)).unwrap()) < 1e-10);
    assert_eq!(m.states(), ["a1", "a2_dag", "a3_dag", "a4_dag"]);
    assert_eq!(m.inputs(), ["b1", "b4_dag"]);
    assert_eq!(m.outputs(), ["b1_out", "b3_dag_out"]);
}

#[test]
fn integrator_denominator_is_characteristic_polynomial() {
    let p = loop_params(4.02, 2.0, 1.0, 50.0);
    let tm = build_integrator_model(&p).unwrap().to_transfer_matrix().unwrap();
    let (_, [b3, b2, b1, b0]) = integrator_g21_coefficients(&p);
    let den = tm.get(1, 0).den().coeffs();
    for (got, want) in den.iter().zip([b0, b1, b2, b3, 1.0]) {
        assert!((got.re - want).abs() <= 1e-10 * want.abs().max(b0.abs()), "{got} vs {want}");
    }
}

#[test]
fn integrator_tracks_its_high_gain_closed_form() {
    // κ/((1 + κ/λ − L₄κ/4c)s) absorbs the finite-gain correction that pure κ/s omits.
    let kappa = 1.0;
    for lambda in [5.0, 9.0] {
        let p = loop_params(2.01 * lambda, lambda, kappa, 1e3);
        let m = build_integrator_model(&p).unwrap();
        let factor = 1.0 + kappa / lambda - p.l4 * kappa / (4.0 * C_LIGHT);
        let mut dev_closed: f64 = 0.0;
        let mut dev_plain: f64 = 0.0;
        for w in log_grid(0.1 * kappa, kappa, 41) {
            let g = m.freq_response(w).unwrap()[(1, 0)].norm();
            dev_closed = dev_closed.max((g * factor * w / kappa - 1.0).abs());
            dev_plain = dev_plain.max((g * w / kappa - 1.0).abs());
        }
        assert!(dev_closed < 0.03, "lambda={lambda}: {dev_closed}");
        assert!(dev_plain > 0.1, "lambda={lambda}: {dev_plain}");
    }
}

#[test]
fn integrator_dc_value_is_finite() {
    let p = loop_params(2.01 * 9.0, 9.0, 1.0, 1e3);
    let (alpha0, beta) = integrator_g21_coefficients(&p);
    let dc = build_integrator_model(&p).unwrap().freq_response(0.0).unwrap()[(1, 0)];
    assert!(rel(dc, cx(alpha0 / beta[3], 0.0)) < 1e-10);
}

#[test]
fn phase_filter_cancels_arm_delay() {
    let (lambda, l_arm) = (3e6, 4000.0);
    let kappa1 = 2.0 * C_LIGHT / l_arm;
    let p = LoopCavityParams::new(2.01 * lambda, lambda, kappa1, 0.5).unwrap();
    let (m, z) = build_phase_filter(&p).unwrap();
    let w = 2.0 * PI * 1e3;
    let target = 2.0 * w * l_arm / C_LIGHT;
    assert!((target - 0.1676).abs() < 1e-4);
    let zw = z.eval(cx(0.0, w)).unwrap();
    assert!((zw.arg() / target - 1.0).abs() < 0.05, "{}", zw.arg());
    assert!(rel(m.freq_response(w).unwrap()[(0, 0)], zw) < 1e-8);
    for f in log_grid(10.0, 1e4, 64) {
        let v = z.eval(cx(0.0, 2.0 * PI * f)).unwrap();
        assert!((v.norm() - 1.0).abs() < 1e-6);
    }
    // Single-cavity reflection with the arm rate c/L_arm.
    for f in [10.0, 100.0, 1e3] {
        let s = cx(0.0, 2.0 * PI * f);
        let reduced = -(s + C_LIGHT / l_arm) / (s - C_LIGHT / l_arm);
        assert!((z.eval(s).unwrap() - reduced).norm() < 0.01);
    }
}

#[test]
fn phase_filter_roots_pair_across_axis() {
    let lambda = 1.0;
    let p = loop_params((2.0 + 1e-6) * lambda, lambda, 0.1, 100.0);
    let (_, z) = build_phase_filter(&p).unwrap();
    let zeros = z.zeros().unwrap();
    let poles = z.poles().unwrap();
    for pole in &poles {
        let mirror = -pole.conj();
        let best = zeros.iter().map(|z| (z - mirror).norm()).fold(f64::INFINITY, f64::min);
        assert!(best < 1e-3 * lambda, "pole {pole}: nearest mirrored zero {best}");
    }
}

#[test]
fn rotation_is_exact() {
    let delta = 1.3;
    let m = StateSpaceModel64::new(
        CMatrix64::from_rows(1, 1, vec![cx(0.0, -delta)]),
        CMatrix64::zeros(1, 0),
        CMatrix64::identity(1),
        CMatrix64::zeros(1, 0),
    )
    .unwrap();
    let ts: Vec<f64> = (0..=100).map(|k| 0.1 * k as f64).collect();
    let tr = simulate_mean(&m, &[cx(1.0, 0.0)], &ts).unwrap();
    for (t, y) in tr.t.iter().zip(&tr.outputs) {
        assert!((y[0] - cx(0.0, -delta * t).exp()).norm() < 1e-12);
    }
}

#[test]
fn zero_dynamics_hold_state() {
    let m = StateSpaceModel64::new(CMatrix64::zeros(2, 2), CMatrix64::zeros(2, 0), CMatrix64::identity(2), CMatrix64::zeros(2, 0)).unwrap();
    let x0 = [cx(0.3, -1.0), cx(2.0, 0.5)];
    let tr = simulate_mean(&m, &x0, &[0.0, 1.0, 5.0, 7.5]).unwrap();
    assert!(tr.states.iter().all(|x| x.as_slice() == x0));
}

#[test]
fn simulation_guards() {
    let m = StateSpaceModel64::new(CMatrix64::from_real(1, 1, &[-100.0]), CMatrix64::zeros(1, 0), CMatrix64::identity(1), CMatrix64::zeros(1, 0))
        .unwrap();
    assert!(matches!(simulate_mean(&m, &[cx(1.0, 0.0)], &[0.0, 1.0]), Err(Error::ConditioningGuard(_))));
    assert!(simulate_mean(&m, &[cx(1.0, 0.0)], &[0.0, 0.0]).is_err());
    assert!(simulate_mean(&m, &[], &[0.0]).is_err());
}

#[test]
fn trajectory_csv_layout() {
    let p = loop_params(0.0201, 0.01, 0.01, 10.0);
    let m = build_self_oscillator(&p, 1.0).unwrap();
    let tr = simulate_mean(&m, &[cx(0.5f64.sqrt(), 0.0); 4], &[0.0, 0.5, 1.0]).unwrap();
    let csv = tr.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,b3_dag_out_re,b3_dag_out_im"));
    assert_eq!(lines.count(), 3);
}

fn quadrature_phase_rate(kappa: f64) -> (f64, f64, f64) {
    // Δ = 1, λ = 0.01Δ, γ = 2.01λ, c/L₄ = 0.1Δ, all means start at 1/√2.
    let p = LoopCavityParams::new(0.0201, 0.01, kappa, C_LIGHT / 0.1).unwrap();
    let m = build_self_oscillator(&p, 1.0).unwrap();
    let ts: Vec<f64> = (0..=2000).map(|k| 0.01 * k as f64).collect();
    let tr = simulate_mean(&m, &[cx(0.5f64.sqrt(), 0.0); 4], &ts).unwrap();
    let ys: Vec<Cx> = tr.outputs.iter().map(|y| y[0]).collect();
    let mut unwrapped = 0.0;
    for w in ys.windows(2) {
        unwrapped += (w[1] * w[0].conj()).arg();
    }
    let rate = unwrapped / (ts.last().unwrap() - ts[0]);
    let first = ys[..100].iter().map(|y| y.norm()).fold(0.0, f64::max);
    let last = ys[ys.len() - 100..].iter().map(|y| y.norm()).fold(0.0, f64::max);
    (rate, first, last)
}

#[test]
fn self_oscillation_tradeoff() {
    let (rate_small, amp_small, end_small) = quadrature_phase_rate(0.01);
    let (rate_large, amp_large, end_large) = quadrature_phase_rate(0.1);
    // ⟨b̃₃†⟩ rotates at +Δ, i.e. the two quadratures are π/2 apart.
    assert!((rate_small - 1.0).abs() < 0.02, "{rate_small}");
    assert!((rate_large - 1.0).abs() < 0.05, "{rate_large}");
    assert!(amp_large > amp_small);
    assert!(end_large / amp_large < end_small / amp_small);
}

#[test]
fn detuning_free_oscillator_stays_real() {
    let p = loop_params(0.0201, 0.01, 0.01, 10.0);
    let m = build_self_oscillator(&p, 0.0).unwrap();
    // With zero detuning the only imaginary entries are the i·g couplings to a₄†, so
    // a real start on (a₁, a₂†, a₃†) keeps a₁…a₃† real and a₄† imaginary.
    let ts: Vec<f64> = (0..=50).map(|k| 0.2 * k as f64).collect();
    let tr = simulate_mean(&m, &[cx(0.7, 0.0), cx(0.7, 0.0), cx(0.7, 0.0), cx(0.0, 0.0)], &ts).unwrap();
    for x in &tr.states {
        assert!(x[0].im.abs() < 1e-12 && x[1].im.abs() < 1e-12 && x[2].im.abs() < 1e-12 && x[3].re.abs() < 1e-12);
    }
}

#[test]
fn oscillator_mode_sits_near_detuning() {
    let delta = 1.0;
    for kappa in [0.01, 0.1] {
        let p = LoopCavityParams::new(0.0201, 0.01, kappa, C_LIGHT / 0.1).unwrap();
        let eig = eigenvalues(build_self_oscillator(&p, delta).unwrap().a()).unwrap();
        let mode = eig.iter().copied().min_by(|a, b| (a - cx(0.0, delta)).norm().total_cmp(&(b - cx(0.0, delta)).norm())).unwrap();
        assert!((mode.im - delta).abs() < 0.02 && mode.re < 0.0 && mode.re > -kappa, "{mode}");
    }
}

#[test]
fn qubit_readout_values() {
    let (q1, q3) = qubit_readout_mean(1.0, 0.5, 2.0, 1).unwrap();
    assert!((q1 - 0.5f64.sqrt() * (-1.0f64).exp()).abs() < 1e-15 && (q1 - 0.2601).abs() < 1e-4);
    assert!((q3 - 0.5 * 2f64.sqrt() * (1.0 - (-1.0f64).exp())).abs() < 1e-15 && (q3 - 0.44697).abs() < 1e-5);
    let (q1, q3) = qubit_readout_mean(1.0, 0.5, 0.0, -1).unwrap();
    assert!((q1 + 0.5f64.sqrt()).abs() < 1e-15 && q3 == 0.0);
    let (_, q3) = qubit_readout_mean(2.0f64, 1.0, 200.0, -1).unwrap();
    assert!((q3 + 1.0).abs() < 1e-12);
    assert!(qubit_readout_mean(1.0, 0.5, 1.0, 0).is_err());
    assert!(qubit_readout_mean(-1.0, 0.5, 1.0, 1).is_err());
}

fn integrator_params() -> impl Strategy<Value = LoopCavityParams<f64>> {
    (0.5f64..2.0, 2.0f64..10.0, 0.005f64..0.5, 1e2f64..1e4)
        .prop_map(|(kappa, lr, eps, ratio)| loop_params((2.0 + eps) * lr * kappa, lr * kappa, kappa, ratio))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn integrator_transfer_matrix_matches_coefficients(p in integrator_params()) {
        let tm = build_integrator_model(&p).unwrap().to_transfer_matrix().unwrap();
        let g21 = integrator_g21(&p);
        let e = tm.get(1, 0);
        let scale = e.num().max_abs_coeff();
        let want_num = g21.num().coeffs();
        for (k, c) in e.num().coeffs().iter().enumerate() {
            let w = want_num.get(k).copied().unwrap_or_default();
            prop_assert!((c - w).norm() <= 1e-10 * scale, "num[{}]: {} vs {}", k, c, w);
        }
        let dscale = e.den().max_abs_coeff();
        for (c, w) in e.den().coeffs().iter().zip(g21.den().coeffs()) {
            prop_assert!((c - w).norm() <= 1e-10 * dscale);
        }
    }

    #[test]
    fn integrator_response_matches_closed_form(p in integrator_params()) {
        let m = build_integrator_model(&p).unwrap();
        let g21 = integrator_g21(&p);
        for w in log_grid(1e-2 * p.kappa, 1e2 * p.kappa, 32) {
            let want = g21.eval(cx(0.0, w)).unwrap();
            prop_assert!(rel(m.freq_response(w).unwrap()[(1, 0)], want) < 1e-10);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn routh_hurwitz_agrees_with_eigenvalues(
        kappa in 0.1f64..2.0, lambda in 0.1f64..10.0, gamma_ratio in 1.5f64..3.0, ratio in 1.0f64..1e4,
    ) {
        let p = loop_params(gamma_ratio * lambda, lambda, kappa, ratio);
        let eig = eigenvalues(build_integrator_model(&p).unwrap().a()).unwrap();
        let max_re = eig.iter().map(|e| e.re).fold(f64::NEG_INFINITY, f64::max);
        let (_, beta) = integrator_g21_coefficients(&p);
        let chi = qfb_core::Polynomial64::from_real(&[beta[3], beta[2], beta[1], beta[0], 1.0]);
        let scale = qfb_core::stability::root_scale(&chi);
        prop_assume!(max_re.abs() > 1e-9 * scale);
        let want = if max_re < 0.0 { Verdict::Stable } else { Verdict::Unstable };
        prop_assert_eq!(routh_hurwitz_quartic(beta).unwrap(), want);
        prop_assert_eq!(stable_by_roots(&chi, 1e-9 * scale).unwrap(), want);
    }

    #[test]
    fn skew_hermitian_dynamics_conserve_norm(
        re_part in prop::collection::vec(-1.0f64..1.0, 9), im_part in prop::collection::vec(-1.0f64..1.0, 9),
        x0 in prop::collection::vec(-1.0f64..1.0, 3),
    ) {
        let h = CMatrix64::from_fn(3, 3, |i, j| cx(re_part[3 * i + j], im_part[3 * i + j]));
        let a = (&h - &h.adjoint()).scale(cx(0.5, 0.0));
        let m = StateSpaceModel64::new(a, CMatrix64::zeros(3, 0), CMatrix64::identity(3), CMatrix64::zeros(3, 0)).unwrap();
        let x0: Vec<Cx> = x0.iter().map(|&v| cx(v, 0.5 * v)).collect();
        let ts: Vec<f64> = (0..=20).map(|k| 0.5 * k as f64).collect();
        let tr = simulate_mean(&m, &x0, &ts).unwrap();
        let n0: f64 = x0.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        for (t, x) in tr.t.iter().zip(&tr.states) {
            let n: f64 = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            prop_assert!((n - n0).abs() <= 1e-10 * n0.max(1.0) * t.max(1.0));
        }
    }
}
