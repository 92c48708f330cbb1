//! End-to-end acceptance run. Prints one `PASS`/`FAIL` line per criterion on the real
//! stdout (bypassing test capture) and asserts every criterion that is attainable.
//! Criteria 2 and 3b are known to be unattainable as stated; they print `FAIL` with the
//! measured value and are not asserted.

use num_complex::Complex64 as Cx;
use qfb_core::components::*;
use qfb_core::feedback::*;
use qfb_core::stability::*;
use qfb_core::statespace::*;
use qfb_core::{CMatrix64, Polynomial64, Port, StateSpaceModel64, TransferMatrix64, Verdict};
use qfb_gw::noise::{spread_decades, xi_p, xi_q};
use qfb_gw::{baseline_noise, default_grid, loss_sweep, mizuno_integral, synthesize_for, GwParams, LossChannel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::io::Write;
use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

const TP: f64 = 2.0 * PI;
const A: Port = Port::Annihilation;
const CR: Port = Port::Creation;

struct Outcome {
    id: &'static str,
    passed: bool,
    /// False for criteria whose stated bound is unattainable; these are reported only.
    asserted: bool,
    detail: String,
}

fn report(o: &Outcome) {
    let line = format!(
        "acceptance {:>3}: {} {}{}\n",
        o.id,
        if o.passed { "PASS" } else { "FAIL" },
        o.detail,
        if o.asserted { "" } else { " [reported, not asserted]" }
    );
    let mut out = std::io::stdout().lock();
    out.write_all(line.as_bytes()).unwrap();
    out.flush().unwrap();
}

fn jw(w: f64) -> Cx {
    Cx::new(0.0, w)
}

fn ndpa(gamma: f64, lambda: f64) -> TransferMatrix64 {
    make_ndpa(NdpaParams::new(gamma, lambda).unwrap()).unwrap()
}

fn conj_amp(g: &TransferMatrix64) -> TransferMatrix64 {
    g.with_signature(vec![CR, A], vec![CR, A]).unwrap()
}

fn metric(p: &[Port]) -> CMatrix64 {
    CMatrix64::diag(&p.iter().map(|q| Cx::new(q.sign(), 0.0)).collect::<Vec<_>>())
}

/// `max |M J Mᴴ − J| / max(1, max|M|²)`; the scale matches the amplifier check so
/// high-gain points are held to relative accuracy.
fn commutation(eval: impl Fn(Cx) -> CMatrix64, jin: &CMatrix64, jout: &CMatrix64, grid: &[f64]) -> f64 {
    grid.iter()
        .map(|&w| {
            let m = eval(jw(w));
            let scale = m.max_abs().powi(2).max(1.0);
            (&(&(&m * jin) * &m.adjoint()) - jout).max_abs() / scale
        })
        .fold(0.0, f64::max)
}

fn tm_commutation(t: &TransferMatrix64, grid: &[f64]) -> f64 {
    commutation(|s| t.eval(s).unwrap(), &t.metric_in(), &t.metric_out(), grid)
}

fn ss_commutation(m: &StateSpaceModel64, ports: &[Port], grid: &[f64]) -> f64 {
    let j = metric(ports);
    commutation(|s| m.response_at(s).unwrap(), &j, &j, grid)
}

fn controllers(kappa: f64) -> Vec<(&'static str, TransferMatrix64)> {
    vec![
        ("LPF", make_cavity_transmission(CavityParams::symmetric(kappa).unwrap()).unwrap()),
        ("HPF", make_cavity_reflection(CavityParams::symmetric(kappa).unwrap()).unwrap()),
        ("asymmetric HPF", make_cavity_reflection(CavityParams::new(kappa, 1.5 * kappa, 0.0).unwrap()).unwrap()),
        (
            "Butterworth",
            make_butterworth_controller(CavityParams::new(kappa, 1.5 * kappa, 1.25 * kappa).unwrap()).unwrap(),
        ),
    ]
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let grid = log_grid(1e-3, 1e3, 64);
    let mut worst: (f64, String) = (0.0, String::new());
    let mut note = |v: f64, what: String| {
        if v > worst.0 || v.is_nan() {
            worst = (v, what);
        }
    };
    let amps = [(4.02, 2.0), (2.01, 1.0), (2.0002, 1.0), (3.0, 0.1)];
    for &(g, l) in &amps {
        let amp = ndpa(g, l);
        let r = check_amplifier_realizable(&amp, &grid, 1e-9).unwrap();
        note(r.max_violation(), format!("NDPA({g},{l}) amplifier"));
        note(tm_commutation(&amp, &grid), format!("NDPA({g},{l}) commutation"));
    }
    let mut passive: Vec<(String, TransferMatrix64)> =
        controllers(1.0).into_iter().map(|(n, k)| (n.to_string(), k)).collect();
    for t in [0.01, 0.25, 0.5, 0.9, 1.0] {
        passive.push((format!("beam splitter T={t}"), make_beam_splitter(t).unwrap()));
    }
    let phase = make_phase_shifter(0.7);
    let ps = TransferMatrix64::new(1, 1, vec![phase], vec![A], vec![A]).unwrap();
    passive.push(("phase shifter".into(), ps));
    for (name, k) in &passive {
        note(check_passive_unitary(k, &grid, 1e-9).unwrap().deviation.value, format!("{name} unitarity"));
        note(tm_commutation(k, &grid), format!("{name} commutation"));
    }
    for &(g, l) in &amps[..3] {
        let amp = ndpa(g, l);
        for (name, k) in controllers(1.0) {
            let cl = close_loop(&amp, &k).unwrap().gfb;
            note(check_amplifier_realizable(&cl, &grid, 1e-9).unwrap().max_violation(), format!("finite {name}"));
            note(tm_commutation(&cl, &grid), format!("finite {name} commutation"));
        }
        for t in [0.25, 0.5, 0.9] {
            let cl = nonreciprocal_close(&amp, &conj_amp(&amp), &make_beam_splitter(t).unwrap()).unwrap().gfb;
            note(tm_commutation(&cl, &grid), format!("finite 3-port NDPA({g},{l}) T={t}"));
        }
        let lpf = &controllers(1.0)[0].1;
        let cl = nonreciprocal_close(&amp, &conj_amp(&amp), lpf).unwrap().gfb;
        note(tm_commutation(&cl, &grid), format!("finite 3-port NDPA({g},{l}) LPF"));
    }
    for (name, k) in controllers(1.0) {
        // The ideal HPF loop has its integrator pole at s = 0, off the grid.
        let ideal = ideal_closed_loop(&k).unwrap();
        note(check_amplifier_realizable(&ideal, &grid, 1e-9).unwrap().max_violation(), format!("ideal {name}"));
        note(tm_commutation(&ideal, &grid), format!("ideal {name} commutation"));
        let nr = nonreciprocal_ideal(&k).unwrap();
        note(tm_commutation(&nr, &grid), format!("ideal 3-port {name}"));
    }
    for t in [0.25, 0.5, 0.9] {
        note(tm_commutation(&nonreciprocal_ideal(&make_beam_splitter(t).unwrap()).unwrap(), &grid), format!("ideal 3-port T={t}"));
    }
    let lp = LoopCavityParams::new(2.01 * 9.0, 9.0, 1.0, SPEED_OF_LIGHT / 1e3).unwrap();
    note(ss_commutation(&build_integrator_model(&lp).unwrap(), &[A, CR], &grid), "integrator model".into());
    let (pf, _) = build_phase_filter(&lp).unwrap();
    note(ss_commutation(&pf, &[A], &grid), "phase filter".into());
    let secs = start.elapsed().as_secs_f64();
    let passed = worst.0 < 1e-9 && secs < 5.0;
    Outcome {
        id: "1",
        passed,
        asserted: true,
        detail: format!("realizability: max violation {:.3e} ({}), runtime {secs:.2}s", worst.0, worst.1),
    }
}

fn criterion_2() -> Outcome {
    let lambda = 1.0;
    let mut parts = Vec::new();
    let mut all_linear = true;
    for (name, k) in controllers(0.1 * lambda) {
        let traces = high_gain_convergence(
            |e: f64| make_ndpa(NdpaParams::high_gain(lambda, e)?),
            &[1e-1, 1e-2, 1e-3],
            &k,
            &[jw(0.05 * lambda)],
            1.0,
        )
        .unwrap();
        let t = &traces[0];
        all_linear &= t.linear;
        let errs: Vec<String> = t.samples.iter().map(|x| format!("{:.3}", x.error)).collect();
        parts.push(format!("{name} [{}]", errs.join(", ")));
    }
    Outcome {
        id: "2",
        passed: all_linear,
        asserted: false,
        detail: format!(
            "high-gain convergence at s=0.05λi, errors for ε=1e-1,1e-2,1e-3: {}; gain saturates near λ/|s|",
            parts.join("; ")
        ),
    }
}

fn criterion_3() -> (Outcome, Outcome) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let kappa = rng.gen_range(0.5..2.0);
        let lr = rng.gen_range(2.0..10.0);
        let eps = rng.gen_range(0.005..0.5);
        let ratio = rng.gen_range(1e2..1e4);
        let p = LoopCavityParams::new((2.0 + eps) * lr * kappa, lr * kappa, kappa, SPEED_OF_LIGHT / (ratio * kappa))
            .unwrap();
        let m = build_integrator_model(&p).unwrap();
        let g21 = integrator_g21(&p);
        for w in log_grid(1e-2 * kappa, 1e2 * kappa, 32) {
            let want = g21.eval(jw(w)).unwrap();
            let got = m.freq_response(w).unwrap()[(1, 0)];
            worst = worst.max((got - want).norm() / want.norm());
        }
    }
    let a = Outcome {
        id: "3",
        passed: worst < 1e-10,
        asserted: true,
        detail: format!("integrator state space vs closed form: max relative error {worst:.3e} (20 sets x 32 ω)"),
    };
    let kappa = 1.0;
    let lambda = 9.0 * kappa;
    let p = LoopCavityParams::new(2.01 * lambda, lambda, kappa, SPEED_OF_LIGHT / (1e3 * kappa)).unwrap();
    let m = build_integrator_model(&p).unwrap();
    let factor = 1.0 + kappa / lambda - p.l4 * kappa / (4.0 * SPEED_OF_LIGHT);
    let (mut plain, mut corrected): (f64, f64) = (0.0, 0.0);
    for w in log_grid(0.1 * kappa, kappa, 41) {
        let g = m.freq_response(w).unwrap()[(1, 0)] * jw(w) / kappa;
        plain = plain.max((g - 1.0).norm());
        corrected = corrected.max((g * factor - 1.0).norm());
    }
    let b = Outcome {
        id: "3b",
        passed: plain < 0.1,
        asserted: false,
        detail: format!(
            "max |G21·iω/κ − 1| over [0.1κ, κ] at λ=9κ: {plain:.4} (bound 0.1); with the κ/λ gain correction {corrected:.4}"
        ),
    };
    (a, b)
}

fn random_passive(rng: &mut ChaCha8Rng) -> TransferMatrix64 {
    let p = CavityParams::new(rng.gen_range(0.05..5.0), rng.gen_range(0.05..5.0), rng.gen_range(-2.0..2.0)).unwrap();
    match rng.gen_range(0..3) {
        0 => make_cavity_transmission(p).unwrap(),
        1 => make_cavity_reflection(p).unwrap(),
        _ => make_butterworth_controller(p).unwrap(),
    }
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut nyq_checked, mut nyq_skipped, mut nyq_bad) = (0, 0, 0);
    let mut verdicts = [0usize; 2];
    while nyq_checked < 100 {
        let lambda = rng.gen_range(0.1..5.0);
        let gamma = 2.0 * lambda / rng.gen_range(0.05..0.99);
        let l = close_loop(&ndpa(gamma, lambda), &random_passive(&mut rng)).unwrap().open_loop.unwrap();
        let ny = nyquist(&l, 1e-4, 1e4).unwrap();
        let chi = loop_characteristic(&l);
        let roots = stable_by_roots(&chi, default_margin(&chi)).unwrap();
        if ny.min_distance < 1e-4 || roots == Verdict::Marginal {
            nyq_skipped += 1;
            continue;
        }
        nyq_checked += 1;
        verdicts[(roots == Verdict::Stable) as usize] += 1;
        nyq_bad += (ny.verdict != roots) as usize;
    }
    let (mut rh_checked, mut rh_bad) = (0, 0);
    while rh_checked < 1000 {
        let mut pair = || {
            let x = rng.gen_range(1e-3..3.0) * if rng.gen_bool(0.5) { -1.0 } else { 1.0 };
            if rng.gen_bool(0.5) {
                let y = rng.gen_range(1e-3..3.0) * if rng.gen_bool(0.5) { -1.0 } else { 1.0 };
                [-(x + y), x * y]
            } else {
                let im: f64 = rng.gen_range(0.0..3.0);
                [-2.0 * x, x * x + im * im]
            }
        };
        let ([p1, q1], [p2, q2]) = (pair(), pair());
        let beta = [p1 + p2, q1 + q2 + p1 * p2, p1 * q2 + p2 * q1, q1 * q2];
        let poly = Polynomial64::from_real(&[beta[3], beta[2], beta[1], beta[0], 1.0]);
        let by_roots = stable_by_roots(&poly, 1e-9).unwrap();
        if by_roots == Verdict::Marginal {
            continue;
        }
        rh_checked += 1;
        rh_bad += (routh_hurwitz_quartic(beta).unwrap() != by_roots) as usize;
    }
    Outcome {
        id: "4",
        passed: nyq_bad == 0 && rh_bad == 0,
        asserted: true,
        detail: format!(
            "Nyquist vs roots: {nyq_bad} disagreements in {nyq_checked} loops ({} stable, {} unstable, {nyq_skipped} near-marginal skipped); Routh-Hurwitz vs roots: {rh_bad} in {rh_checked} quartics",
            verdicts[1], verdicts[0]
        ),
    }
}

fn criterion_5() -> Outcome {
    let lambda = 1.0;
    let g = make_ndpa(NdpaParams::high_gain(lambda, 1e-4).unwrap()).unwrap();
    let s = jw(0.01 * lambda);
    let (mut worst, mut g33_dev, mut forward) = (0.0f64, 0.0f64, 0.0);
    for t in [0.25, 0.5, 0.9] {
        let k = make_beam_splitter(t).unwrap();
        let got = nonreciprocal_close(&g, &conj_amp(&g), &k).unwrap().gfb.eval(s).unwrap();
        let want = nonreciprocal_ideal(&k).unwrap().eval(s).unwrap();
        let big = want.max_abs();
        for i in 0..3 {
            for j in 0..3 {
                let d = (got[(i, j)] - want[(i, j)]).norm();
                // Ideally-zero entries are measured against the largest ideal entry.
                let rel = if want[(i, j)].norm() > 1e-12 { d / want[(i, j)].norm() } else { d / big };
                worst = worst.max(rel);
            }
        }
        g33_dev = g33_dev.max((got[(2, 2)].norm() - 1.0).abs());
        if t == 0.25 {
            forward = got[(1, 1)].norm();
        }
    }
    let passed = worst < 0.01 && g33_dev < 1e-3 && (forward / 2.0 - 1.0).abs() < 0.01;
    Outcome {
        id: "5",
        passed,
        asserted: true,
        detail: format!(
            "non-reciprocal limit: max entry deviation {:.3}%, max ||G33|−1| {g33_dev:.2e}, forward gain at T=0.25 {forward:.5}",
            100.0 * worst
        ),
    }
}

fn criterion_6() -> Outcome {
    let p = GwParams::filtered();
    let lp = LoopCavityParams::new(p.gamma, p.lambda, p.kappa1, p.l4).unwrap();
    let (_, z) = build_phase_filter(&lp).unwrap();
    let mut worst: f64 = 0.0;
    for w in log_grid(TP * 10.0, TP * 3000.0, 200) {
        let target = 2.0 * w * p.l_arm / p.c;
        worst = worst.max(((z.eval(jw(w)).unwrap().arg() - target) / target).abs());
    }
    Outcome {
        id: "6",
        passed: worst < 0.05,
        asserted: true,
        detail: format!("phase cancellation: max |arg Z − 2ΩL/c|/(2ΩL/c) = {worst:.4} over 2π·[10, 3000]"),
    }
}

fn criterion_7() -> Outcome {
    let p = GwParams::baseline();
    let grid = default_grid();
    let nb = baseline_noise(&p, &grid).unwrap();
    let mut closed: f64 = 0.0;
    let mut min_ratio = f64::INFINITY;
    for (i, &w) in grid.iter().enumerate() {
        let s = jw(w);
        let direct = (xi_q(&p, s).norm_sqr() + xi_p(&p, s).norm_sqr()) / 2.0;
        closed = closed.max((nb.total[i] / direct - 1.0).abs());
        min_ratio = min_ratio.min(nb.total[i] / nb.sql[i]);
    }
    let m = mizuno_integral(&p).unwrap();
    let invariance = [0.1, 0.5, 2.0, 10.0]
        .iter()
        .map(|f| {
            let q = GwParams { gamma_ifo: f * p.gamma_ifo, ..p.clone() };
            (mizuno_integral(&q).unwrap().numeric / m.numeric - 1.0).abs()
        })
        .fold(0.0, f64::max);
    let passed = closed < 1e-12 && min_ratio >= 1.0 && m.rel_diff < 1e-3 && invariance < 1e-3;
    Outcome {
        id: "7",
        passed,
        asserted: true,
        detail: format!(
            "baseline: closed-form deviation {closed:.1e}, min S/SQL {min_ratio:.6}, Mizuno rel diff {:.1e}, γ invariance {invariance:.1e}",
            m.rel_diff
        ),
    }
}

fn criterion_8() -> Outcome {
    let (_, d) = synthesize_for(&GwParams::filtered()).unwrap();
    let reg = d.regulator.residual / d.regulator.q_norm;
    let fil = d.filter.residual / d.filter.q_norm;
    let passed =
        d.rank_c == 12 && d.rank_o == 12 && reg < 1e-8 && fil < 1e-8 && d.max_re_total < 0.0 && d.max_re_open > 0.0;
    Outcome {
        id: "8",
        passed,
        asserted: true,
        detail: format!(
            "LQG: ranks {}/{}, CARE residual/‖Q‖ {reg:.1e} (regulator) {fil:.1e} (filter), max Re eig open {:.1} closed {:.4}",
            d.rank_c, d.rank_o, d.max_re_open, d.max_re_total
        ),
    }
}

fn criterion_9() -> Outcome {
    let p = GwParams::filtered();
    let grid = default_grid();
    let spread = |ch, values: &[f64]| {
        let runs = loss_sweep(&p, ch, values, &grid);
        let budgets: Vec<_> = runs.into_iter().map(|(_, r)| r.unwrap()).collect();
        spread_decades(&budgets.iter().collect::<Vec<_>>(), TP * 1e2, TP * 1e3)
    };
    let k3 = spread(LossChannel::Kappa3, &[1e2, 1e4, 1e6]);
    let k4 = spread(LossChannel::Kappa4, &[6e3, 6e4, 6e5]);
    Outcome {
        id: "9",
        passed: k3 > 3.0 * k4,
        asserted: true,
        detail: format!("loss sensitivity in 2π·[1e2, 1e3]: κ3loss spread {k3:.3} decades, κ4loss spread {k4:.2e} decades"),
    }
}

fn criterion_10() -> Outcome {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let runs: [&[&str]; 8] = [
        &["check", "--network", "nonreciprocal"],
        &["bode", "--network", "butterworth", "--kappa1", "1", "--kappa2", "1.5", "--mode", "ideal"],
        &["bode", "--network", "integrator", "--mode", "finite", "--lambda", "5"],
        &["nyquist", "--network", "differentiator"],
        &["simulate", "--model", "self-oscillator", "--compare-kappa", "0.1"],
        &["gw", "--mode", "baseline"],
        &["gw", "--mode", "controlled"],
        &["gw", "--mode", "sweep", "--channel", "kappa_3loss", "--values", "1e2,1e4,1e6"],
    ];
    let mut mismatched = Vec::new();
    for (k, args) in runs.iter().enumerate() {
        let mut got = Vec::new();
        for r in 0..2 {
            let path = dir.join(format!("acceptance_{k}_{r}.csv"));
            let mut cmd = Command::new(env!("CARGO_BIN_EXE_qfb"));
            cmd.args(*args);
            if args[0] != "check" {
                cmd.arg("--output").arg(&path);
            }
            let out = cmd.output().unwrap();
            let csv = if args[0] == "check" { Vec::new() } else { std::fs::read(&path).unwrap_or_default() };
            got.push((out.status.code(), out.stdout, csv));
        }
        if got[0] != got[1] || got[0].0 != Some(0) || (args[0] != "check" && got[0].2.is_empty()) {
            mismatched.push(args.join(" "));
        }
    }
    Outcome {
        id: "10",
        passed: mismatched.is_empty(),
        asserted: true,
        detail: format!("determinism: {} CLI configurations run twice, mismatches {:?}", runs.len(), mismatched),
    }
}

#[test]
fn acceptance_criteria() {
    let (c3, c3b) = criterion_3();
    let all = [
        criterion_1(),
        criterion_2(),
        c3,
        c3b,
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
        criterion_9(),
        criterion_10(),
    ];
    for o in &all {
        report(o);
    }
    let failed: Vec<&str> = all.iter().filter(|o| o.asserted && !o.passed).map(|o| o.id).collect();
    assert!(failed.is_empty(), "attainable criteria failed: {failed:?}");
}
