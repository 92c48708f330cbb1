use num_complex::Complex64 as Cx;
use proptest::prelude::*;
use qfb_core::components::*;
use qfb_core::feedback::ideal_closed_loop;
use qfb_core::{Port, TransferMatrix64};

fn at(m: &TransferMatrix64, s: Cx) -> qfb_core::CMatrix64 {
    m.eval(s).unwrap()
}

fn jw(w: f64) -> Cx {
    Cx::new(0.0, w)
}

fn near(a: Cx, b: Cx, tol: f64) -> bool {
    (a - b).norm() <= tol * b.norm().max(1.0)
}

#[test]
fn ndpa_dc_gains() {
    let g = make_ndpa(NdpaParams::new(4.02, 2.0).unwrap()).unwrap();
    let m = at(&g, Cx::new(0.0, 0.0));
    let (gamma, lambda) = (4.02f64, 2.0f64);
    let d = gamma * gamma - 4.0 * lambda * lambda;
    let diag = -(gamma * gamma + 4.0 * lambda * lambda) / d;
    let off = -4.0 * gamma * lambda / d;
    assert!(near(m[(0, 0)], Cx::new(diag, 0.0), 1e-12) && near(m[(1, 1)], Cx::new(diag, 0.0), 1e-12));
    assert!(near(m[(0, 1)], Cx::new(off, 0.0), 1e-12) && near(m[(1, 0)], Cx::new(off, 0.0), 1e-12));
    assert!((diag + 200.50).abs() < 5e-3 && (off + 200.4988).abs() < 5e-4);
    assert_eq!(g.sig_in(), [Port::Annihilation, Port::Creation]);
    assert_eq!(g.sig_out(), [Port::Annihilation, Port::Creation]);
}

#[test]
fn unpumped_ndpa_is_passive_reflection() {
    let gamma = 3.0;
    let g = make_ndpa(NdpaParams::new(gamma, 0.0).unwrap()).unwrap();
    let s = Cx::new(0.4, 1.3);
    let m = at(&g, s);
    assert!(near(m[(0, 0)], (s - gamma / 2.0) / (s + gamma / 2.0), 1e-14));
    assert!(m[(0, 1)].norm() == 0.0);
}

#[test]
fn ndpa_gain_identity_at_gamma() {
    let g = make_ndpa(NdpaParams::new(4.02, 2.0).unwrap()).unwrap();
    let m = at(&g, jw(4.02));
    assert!((m[(0, 0)].norm_sqr() - m[(0, 1)].norm_sqr() - 1.0).abs() < 1e-12);
}

#[test]
fn ndpa_rejects_invalid_rates() {
    assert!(NdpaParams::new(0.0, 1.0).is_err());
    assert!(NdpaParams::new(1.0, -1.0).is_err());
}

#[test]
fn symmetric_transmission_is_lpf() {
    let kappa = 0.8;
    let k = make_cavity_transmission(CavityParams::symmetric(kappa).unwrap()).unwrap();
    let s = Cx::new(0.1, 2.0);
    let m = at(&k, s);
    let d = s + kappa;
    assert!(near(m[(0, 0)], s / d, 1e-14) && near(m[(1, 1)], s / d, 1e-14));
    assert!(near(m[(0, 1)], -kappa / d, 1e-14) && near(m[(1, 0)], -kappa / d, 1e-14));
    assert!(near(at(&k, Cx::new(0.0, 0.0))[(1, 0)], Cx::new(-1.0, 0.0), 1e-15));
}

#[test]
fn one_port_transmission_decouples() {
    let (k1, delta) = (2.0, 0.3);
    let k = make_cavity_transmission(CavityParams::new(k1, 0.0, delta).unwrap()).unwrap();
    let s = Cx::new(0.0, 0.9);
    let m = at(&k, s);
    let i_delta = Cx::new(0.0, delta);
    assert!(near(m[(0, 0)], (s - k1 / 2.0 - i_delta) / (s + k1 / 2.0 - i_delta), 1e-14));
    assert!(near(m[(1, 1)], Cx::new(1.0, 0.0), 1e-14));
    assert!(m[(0, 1)].norm() == 0.0 && m[(1, 0)].norm() == 0.0);
}

#[test]
fn symmetric_reflection_is_hpf() {
    let kappa = 1.7;
    let k = make_cavity_reflection(CavityParams::symmetric(kappa).unwrap()).unwrap();
    let s = Cx::new(-0.2, 0.7);
    let m = at(&k, s);
    let d = s + kappa;
    assert!(near(m[(0, 0)], -kappa / d, 1e-14) && near(m[(1, 1)], -kappa / d, 1e-14));
    assert!(near(m[(0, 1)], s / d, 1e-14) && near(m[(1, 0)], s / d, 1e-14));
    assert!(at(&k, Cx::new(0.0, 0.0))[(1, 0)].norm() < 1e-15);
}

#[test]
fn one_port_reflection_is_unitary() {
    let k1 = 1.5e5;
    let k = make_cavity_reflection(CavityParams::new(k1, 0.0, 0.0).unwrap()).unwrap();
    let rep = check_passive_unitary(&k, &[k1], 1e-12).unwrap();
    assert!(rep.passed(), "{rep:?}");
}

#[test]
fn cavity_rejects_invalid_rates() {
    assert!(CavityParams::new(0.0, 0.0, 1.0).is_err());
    assert!(CavityParams::new(-1.0, 2.0, 0.0).is_err());
}

#[test]
fn beam_splitter_values() {
    let id = make_beam_splitter(1.0).unwrap();
    let m = at(&id, jw(3.0));
    assert!((&m - &qfb_core::CMatrix::identity(2)).max_abs() == 0.0);
    let k = make_beam_splitter(0.25).unwrap();
    let m = at(&k, jw(0.0));
    let r = 0.75f64.sqrt();
    assert!(near(m[(0, 0)], Cx::new(0.5, 0.0), 1e-15) && near(m[(0, 1)], Cx::new(-r, 0.0), 1e-15));
    assert!(near(m[(1, 0)], Cx::new(r, 0.0), 1e-15) && near(m[(1, 1)], Cx::new(0.5, 0.0), 1e-15));
    assert!(make_beam_splitter(0.0).is_err() && make_beam_splitter(1.5).is_err());
}

#[test]
fn phase_shifter_values() {
    let pi = make_phase_shifter(std::f64::consts::PI).eval(jw(1.0)).unwrap();
    assert!(near(pi, Cx::new(-1.0, 0.0), 1e-15));
    assert_eq!(make_phase_shifter(0.0).eval(jw(2.0)).unwrap(), Cx::new(1.0, 0.0));
    assert!((make_phase_shifter(0.3).eval(jw(2.0)).unwrap().norm() - 1.0).abs() < 1e-15);
}

#[test]
fn butterworth_controller_is_unitary() {
    let k = make_butterworth_controller(CavityParams::new(1.0, 1.5, 1.25).unwrap()).unwrap();
    let rep = check_passive_unitary(&k, &[0.0, 1.0, 10.0], 1e-12).unwrap();
    assert!(rep.passed(), "{rep:?}");
    let k0 = make_butterworth_controller(CavityParams::symmetric(1.0).unwrap()).unwrap();
    assert!(check_passive_unitary(&k0, &[0.0, 1.0, 10.0], 1e-12).unwrap().passed());
}

#[test]
fn butterworth_ideal_dc_gain() {
    let (k1, k2) = (1.0f64, 1.5f64);
    let k = make_butterworth_controller(CavityParams::new(k1, k2, (k1 + k2) / 2.0).unwrap()).unwrap();
    let ideal = ideal_closed_loop(&k).unwrap();
    let g = ideal.get(1, 0).eval(Cx::new(0.0, 0.0)).unwrap().norm();
    let wb = (k2 - k1) / 2f64.sqrt();
    let want = (2.0 * k1 * k2 * (k1 * k1 + k2 * k2)).sqrt() / (wb * wb);
    assert!((wb - 0.35355).abs() < 1e-5);
    assert!((g - want).abs() < 1e-10 * want);
    assert!((g - 24.98).abs() < 5e-3);
}

#[test]
fn amplifier_check_flags_broken_matrix() {
    let g = make_ndpa(NdpaParams::new(2.2, 1.0).unwrap()).unwrap();
    let broken = TransferMatrix64::new(
        2,
        2,
        vec![g.get(0, 0).clone(), qfb_core::RationalFunction::zero(), g.get(1, 0).clone(), g.get(1, 1).clone()],
        g.sig_in().to_vec(),
        g.sig_out().to_vec(),
    )
    .unwrap();
    let w = 0.3;
    let rep = check_amplifier_realizable(&broken, &[w], 1e-9).unwrap();
    let g12 = g.get(0, 1).eval(jw(w)).unwrap().norm_sqr();
    let scale = broken.eval(jw(w)).unwrap().max_abs().powi(2);
    assert!(!rep.passed());
    assert!((rep.signal.value - g12 / scale).abs() < 1e-9);
}

#[test]
fn lossy_controller_fails_unitarity() {
    let k = make_cavity_transmission(CavityParams::symmetric(1.0).unwrap()).unwrap();
    let lossy = k.map(|e| e.scale(Cx::new(0.9, 0.0)));
    let rep = check_passive_unitary(&lossy, &[0.5], 1e-9).unwrap();
    assert!(!rep.passed());
    assert!((rep.deviation.value - 0.19).abs() < 1e-12);
}

#[test]
fn factories_pass_their_checks_on_log_grid() {
    let grid = log_grid(1e-3, 1e3, 64);
    for (g, l) in [(4.02, 2.0), (3.0, 0.1), (2.0002, 1.0)] {
        let rep = check_amplifier_realizable(&make_ndpa(NdpaParams::new(g, l).unwrap()).unwrap(), &grid, 1e-9);
        assert!(rep.unwrap().passed());
    }
    let cav = [
        CavityParams::symmetric(1.0).unwrap(),
        CavityParams::new(1.0, 1.5, 1.25).unwrap(),
        CavityParams::new(2.0, 0.0, -0.4).unwrap(),
    ];
    for p in cav {
        for k in [
            make_cavity_transmission(p).unwrap(),
            make_cavity_reflection(p).unwrap(),
            make_butterworth_controller(p).unwrap(),
        ] {
            assert!(check_passive_unitary(&k, &grid, 1e-9).unwrap().passed());
            assert!(check_commutation(&k, &grid, 1e-9).unwrap().passed());
        }
    }
}

#[test]
fn asymptotic_cavity_behaviour() {
    let kappa = 2.0;
    let w = 1e6 * kappa;
    let p = CavityParams::symmetric(kappa).unwrap();
    let t = make_cavity_transmission(p).unwrap().get(1, 0).eval(jw(w)).unwrap().norm();
    let r = make_cavity_reflection(p).unwrap().get(1, 0).eval(jw(w)).unwrap().norm();
    assert!(t < 1e-5);
    assert!((r - 1.0).abs() < 1e-11);
}

#[test]
fn grids() {
    let g: Vec<f64> = log_grid(1e-3, 1e3, 7);
    assert_eq!(g.len(), 7);
    assert!((g[3] - 1.0).abs() < 1e-14 && g[6] == 1e3 && g[0] == 1e-3);
    assert_eq!(linear_grid(0.0, 1.0, 5), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
}

proptest! {
    #[test]
    fn ndpa_stable_iff_gamma_exceeds_twice_lambda(gamma in 0.01f64..10.0, lambda in 0.0f64..10.0) {
        prop_assume!((gamma - 2.0 * lambda).abs() > 1e-6 * gamma.max(lambda));
        let p = NdpaParams::new(gamma, lambda).unwrap();
        let g = make_ndpa(p).unwrap();
        let max_re = g.get(0, 0).den().roots().unwrap().iter().map(|z| z.re).fold(f64::MIN, f64::max);
        prop_assert_eq!(max_re < 0.0, gamma > 2.0 * lambda);
        prop_assert_eq!(p.is_stable(), gamma > 2.0 * lambda);
    }

    #[test]
    fn ndpa_realizable_for_any_rates(gamma in 0.01f64..10.0, lambda in 0.0f64..10.0) {
        let g = make_ndpa(NdpaParams::new(gamma, lambda).unwrap()).unwrap();
        let scale = gamma.max(lambda);
        let grid: Vec<f64> = log_grid(1e-3 * scale, 1e3 * scale, 16)
            .into_iter()
            // Skip the imaginary-axis poles of a marginal amplifier.
            .filter(|w| g.get(0, 0).den().eval(jw(*w)).norm() > 1e-6 * scale * scale)
            .collect();
        let rep = check_amplifier_realizable(&g, &grid, 1e-9).unwrap();
        let gain = grid.iter().map(|w| g.get(0, 0).eval(jw(*w)).unwrap().norm_sqr()).fold(1.0, f64::max);
        prop_assert!(rep.max_violation() < 1e-12 * gain.max(1.0), "{:?}", rep);
    }
}
