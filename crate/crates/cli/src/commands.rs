use crate::args::*;
use crate::network::{build, Built, Network};
use crate::textfile::parse_blocks;
use crate::{CliError, Outcome};
use qfb_core::components::{
    check_amplifier_realizable, check_commutation, check_passive_unitary, linear_grid, log_grid, Violation,
};
use qfb_core::stability::{nyquist_with, NyquistOptions, NYQUIST_TURN};
use qfb_core::statespace::{build_integrator_model, build_self_oscillator, simulate_mean, LoopCavityParams, SPEED_OF_LIGHT};
use qfb_core::{fmt_sig17, CMatrix64, Complex64, Port, StateSpaceModel64, TransferMatrix64};
use qfb_gw::noise::spread_decades;
use qfb_gw::{
    baseline_noise, build_full_system, controlled_noise, lqg_synthesize, loss_sweep, GwParams, LossChannel, LqgWeights,
    NoiseBudget,
};
use serde_json::{json, Value};
use std::path::{Path, PathBuf};

pub fn run(cli: Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Check(a) => check(a),
        Command::Bode(a) => bode(a),
        Command::Nyquist(a) => nyquist(a),
        Command::Simulate(a) => simulate(a),
        Command::Gw(a) => gw(a),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Routes CSV to `output` (summary on stdout) or to stdout (no summary).
fn emit(output: &Option<PathBuf>, csv: String, summary: Value) -> Result<Outcome, CliError> {
    match output {
        Some(p) => {
            std::fs::write(p, csv).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            Ok(Outcome { stdout: format!("{summary}\n"), code: 0 })
        }
        None => Ok(Outcome { stdout: csv, code: 0 }),
    }
}

fn grid(g: &GridArgs, min: f64, max: f64, points: usize) -> Result<Vec<f64>, CliError> {
    let f = g.unit.factor();
    let (lo, hi) = (g.min.map_or(min, |x| x * f), g.max.map_or(max, |x| x * f));
    let n = g.points.unwrap_or(points);
    if !(lo < hi) || n < 2 || !lo.is_finite() || !hi.is_finite() {
        return Err(CliError::Config(format!("grid needs min < max and points >= 2 (got {lo}, {hi}, {n})")));
    }
    match g.scale {
        Scale::Log if lo <= 0.0 => Err(CliError::Config("log grid needs min > 0".into())),
        Scale::Log => Ok(log_grid(lo, hi, n)),
        Scale::Linear => Ok(linear_grid(lo, hi, n)),
    }
}

fn num(x: f64) -> Value {
    json!(x)
}

fn violation(v: Violation<f64>) -> Value {
    json!({ "max": num(v.value), "omega": num(v.omega) })
}

fn name<T: clap::ValueEnum>(v: &T) -> String {
    v.to_possible_value().map(|p| p.get_name().to_string()).unwrap_or_default()
}

fn parse_signature(s: &str, n: usize) -> Result<Vec<Port>, CliError> {
    let ports = s
        .split(',')
        .map(|t| match t.trim() {
            "a" => Ok(Port::Annihilation),
            "c" => Ok(Port::Creation),
            o => Err(CliError::Config(format!("port kind {o:?} is not `a` or `c`"))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    if ports.len() != n {
        return Err(CliError::Config(format!("signature has {} ports, matrix has {n}", ports.len())));
    }
    Ok(ports)
}

/// `max |M J_in Mᴴ − J_out|` over the grid for a state-space network.
fn commutation_direct(b: &Built, omegas: &[f64]) -> Result<Violation<f64>, CliError> {
    let metric = |p: &[Port]| CMatrix64::diag(&p.iter().map(|q| Complex64::new(q.sign(), 0.0)).collect::<Vec<_>>());
    let (jin, jout) = (metric(&b.ports_in), metric(&b.ports_out));
    let mut worst = Violation { value: 0.0, omega: f64::NAN };
    for &w in omegas {
        let m = b.network.eval(Complex64::new(0.0, w))?;
        let d = (&(&(&m * &jin) * &m.adjoint()) - &jout).max_abs();
        if d > worst.value || d.is_nan() {
            worst = Violation { value: d, omega: w };
        }
    }
    Ok(worst)
}

fn check(a: CheckArgs) -> Result<Outcome, CliError> {
    let omegas = grid(&a.grid, 1e-3, 1e3, 64)?;
    let (label, mode, built) = match (&a.net, &a.matrix_file) {
        (Some(n), None) => (name(&n.network), n.mode, build(n, a.grid.unit.factor())?),
        (None, Some(path)) => {
            let blocks = parse_blocks(&read(path)?)?;
            let mut it = blocks.into_values();
            let (Some(m), None) = (it.next(), it.next()) else {
                return Err(CliError::Config("matrix file must hold exactly one block".into()));
            };
            if !m.is_square() {
                return Err(CliError::Config("matrix file block must be square".into()));
            }
            let sig = match &a.signature {
                Some(s) => parse_signature(s, m.rows())?,
                None => vec![Port::Creation; m.rows()],
            };
            let t = TransferMatrix64::constant(&m, sig.clone(), sig.clone())?;
            let b = Built {
                network: Network::Transfer(t),
                open_loop: None,
                mode: Mode::Element,
                ports_in: sig.clone(),
                ports_out: sig,
            };
            (path.display().to_string(), Some(Mode::Element), b)
        }
        _ => return Err(CliError::Config("check needs exactly one of --network or --matrix-file".into())),
    };
    let mut conditions = serde_json::Map::new();
    match &built.network {
        Network::Transfer(t) => {
            let c = check_commutation(t, &omegas, a.tol)?;
            conditions.insert("commutation".into(), violation(c.deviation));
            let amp = [Port::Annihilation, Port::Creation];
            if t.rows() == 2 && t.cols() == 2 && t.sig_in() == amp && t.sig_out() == amp {
                let r = check_amplifier_realizable(t, &omegas, a.tol)?;
                conditions.insert("signal".into(), violation(r.signal));
                conditions.insert("idler".into(), violation(r.idler));
                conditions.insert("cross".into(), violation(r.cross));
            }
            if t.rows() == t.cols() && t.sig_in().iter().all(|&p| p == t.sig_in()[0]) && t.sig_out() == t.sig_in() {
                let u = check_passive_unitary(t, &omegas, a.tol)?;
                conditions.insert("unitarity".into(), violation(u.deviation));
            }
        }
        Network::StateSpace(_) => {
            conditions.insert("commutation".into(), violation(commutation_direct(&built, &omegas)?));
        }
    }
    let max = conditions
        .values()
        .filter_map(|v| v["max"].as_f64())
        .fold(0.0f64, f64::max);
    let nan = conditions.values().any(|v| v["max"].is_null());
    let passed = !nan && max < a.tol;
    let summary = json!({
        "command": "check",
        "network": label,
        "mode": mode.map(|m| name(&m)).unwrap_or_else(|| name(&built.mode)),
        "points": omegas.len(),
        "tol": a.tol,
        "max_violation": max,
        "passed": passed,
        "conditions": conditions,
    });
    Ok(Outcome { stdout: format!("{summary}\n"), code: if passed { 0 } else { 1 } })
}

fn parse_entries(e: &[String], (rows, cols): (usize, usize)) -> Result<Vec<(usize, usize)>, CliError> {
    if e.is_empty() {
        return Ok((0..rows).flat_map(|i| (0..cols).map(move |j| (i, j))).collect());
    }
    e.iter()
        .map(|s| {
            let d: Vec<usize> = s.trim().chars().map(|c| c.to_digit(10).map(|d| d as usize)).collect::<Option<_>>().unwrap_or_default();
            match d[..] {
                [i, j] if (1..=rows).contains(&i) && (1..=cols).contains(&j) => Ok((i - 1, j - 1)),
                _ => Err(CliError::Config(format!("entry {s:?} is not a 1-based `ij` inside {rows}x{cols}"))),
            }
        })
        .collect()
}

fn bode(a: BodeArgs) -> Result<Outcome, CliError> {
    let omegas = grid(&a.grid, 1e-3, 1e3, 200)?;
    let b = build(&a.net, a.grid.unit.factor())?;
    let entries = parse_entries(&a.entries, b.network.shape())?;
    let mut csv = String::from("omega");
    for (i, j) in &entries {
        csv.push_str(&format!(",abs_{0}{1},arg_{0}{1}", i + 1, j + 1));
    }
    csv.push('\n');
    let mut poles = 0;
    for &w in &omegas {
        csv.push_str(&fmt_sig17(w));
        let m = b.network.eval(Complex64::new(0.0, w)).ok();
        let row = m.filter(|m| entries.iter().all(|&(i, j)| m[(i, j)].is_finite()));
        match row {
            Some(m) => {
                for &(i, j) in &entries {
                    csv.push_str(&format!(",{},{}", fmt_sig17(m[(i, j)].norm()), fmt_sig17(m[(i, j)].arg())));
                }
            }
            None => {
                poles += 1;
                csv.push_str(&",pole".repeat(2 * entries.len()));
            }
        }
        csv.push('\n');
    }
    let summary = json!({
        "command": "bode",
        "network": name(&a.net.network),
        "mode": name(&b.mode),
        "points": omegas.len(),
        "pole_rows": poles,
    });
    emit(&a.output, csv, summary)
}

fn nyquist(a: NyquistArgs) -> Result<Outcome, CliError> {
    let f = a.unit.factor();
    let b = build(&a.net, f)?;
    let l = b.open_loop.ok_or_else(|| {
        CliError::Config(format!("{} in mode {} has no scalar open loop", name(&a.net.network), name(&b.mode)))
    })?;
    let (lo, hi) = (a.min.map_or(1e-4, |x| x * f), a.max.map_or(1e4, |x| x * f));
    let r = nyquist_with(&l, lo, hi, NyquistOptions { per_decade: a.points, turn: NYQUIST_TURN })?;
    let summary = json!({
        "command": "nyquist",
        "network": name(&a.net.network),
        "mode": name(&b.mode),
        "verdict": r.verdict.as_str(),
        "winding_number": r.winding_number,
        "min_distance": r.min_distance,
        "samples": r.samples.len(),
    });
    match &a.output {
        Some(_) => emit(&a.output, r.to_csv(), summary),
        // Without a CSV file the verdict is the useful output.
        None => Ok(Outcome { stdout: format!("{summary}\n"), code: 0 }),
    }
}

fn parse_x0(s: &str, n: usize) -> Result<Vec<Complex64>, CliError> {
    let v = s
        .split(';')
        .map(|t| {
            let bad = || CliError::Config(format!("x0 entry {t:?} is not `re,im` or `re`"));
            let (r, i) = t.trim().split_once(',').unwrap_or((t.trim(), "0"));
            Ok(Complex64::new(r.trim().parse().map_err(|_| bad())?, i.trim().parse().map_err(|_| bad())?))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    if v.len() != n {
        return Err(CliError::Config(format!("x0 has {} entries, model has {n} states", v.len())));
    }
    Ok(v)
}

fn custom_model(path: &Path) -> Result<StateSpaceModel64, CliError> {
    let mut blocks = parse_blocks(&read(path)?)?;
    let a = blocks.remove("A").ok_or_else(|| CliError::Config("model file needs an `A` block".into()))?;
    let n = a.rows();
    let c = blocks.remove("C").unwrap_or_else(|| CMatrix64::identity(n));
    if let Some(k) = blocks.keys().next() {
        return Err(CliError::Config(format!("unexpected block {k}; model files hold A and optional C")));
    }
    let p = c.rows();
    Ok(StateSpaceModel64::new(a, CMatrix64::zeros(n, 0), c, CMatrix64::zeros(p, 0))?)
}

fn simulate(a: SimulateArgs) -> Result<Outcome, CliError> {
    let f = a.unit.factor();
    let lambda = a.lambda * f;
    let gamma = a.gamma.map_or(a.gamma_ratio * lambda, |g| g * f);
    let l4 = SPEED_OF_LIGHT / (a.c_over_l4 * f);
    let make = |kappa: f64| -> Result<StateSpaceModel64, CliError> {
        let p = LoopCavityParams::new(gamma, lambda, kappa, l4)?;
        Ok(match a.model {
            ModelKind::SelfOscillator => build_self_oscillator(&p, a.delta * f)?,
            ModelKind::Integrator => build_integrator_model(&p)?,
            ModelKind::CustomFile => {
                let path = a.model_file.as_ref().ok_or_else(|| CliError::Config("custom-file needs --model-file".into()))?;
                custom_model(path)?
            }
        })
    };
    if a.t_points == 0 || !(a.t_max >= a.t_min) || (a.t_points > 1 && !(a.t_max > a.t_min)) {
        return Err(CliError::Config("time grid needs t_points >= 1 and t_max > t_min".into()));
    }
    let ts = if a.t_points == 1 { vec![a.t_min] } else { linear_grid(a.t_min, a.t_max, a.t_points) };
    let m = make(a.kappa * f)?;
    let x0 = match &a.x0 {
        Some(s) => parse_x0(s, m.order())?,
        None => vec![Complex64::new(0.5f64.sqrt(), 0.0); m.order()],
    };
    let tr = simulate_mean(&m, &x0, &ts)?;
    let mut csv = tr.to_csv();
    if let Some(k2) = a.compare_kappa {
        let m2 = make(k2 * f)?;
        let tr2 = simulate_mean(&m2, &x0, &ts)?;
        let mut out = String::with_capacity(2 * csv.len());
        for (k, line) in csv.lines().enumerate() {
            out.push_str(line);
            if k == 0 {
                for l in &tr2.output_labels {
                    out.push_str(&format!(",cmp_{l}_re,cmp_{l}_im"));
                }
            } else {
                for v in &tr2.outputs[k - 1] {
                    out.push_str(&format!(",{},{}", fmt_sig17(v.re), fmt_sig17(v.im)));
                }
            }
            out.push('\n');
        }
        csv = out;
    }
    let max_re = qfb_gw::lqg::max_real_eig(m.a()).map_err(CliError::from)?;
    let summary = json!({
        "command": "simulate",
        "model": name(&a.model),
        "points": ts.len(),
        "states": m.order(),
        "max_re_eig": max_re,
    });
    emit(&a.output, csv, summary)
}

fn gw_csv(budgets: &[(f64, &NoiseBudget)], with_value: bool) -> String {
    let mut out = String::new();
    for (k, (v, b)) in budgets.iter().enumerate() {
        for (i, line) in b.to_csv().lines().enumerate() {
            if i == 0 && k > 0 {
                continue;
            }
            if with_value {
                if i == 0 {
                    out.push_str("value,");
                } else {
                    out.push_str(&fmt_sig17(*v));
                    out.push(',');
                }
            }
            out.push_str(line);
            out.push('\n');
        }
    }
    out
}

fn gw(a: GwArgs) -> Result<Outcome, CliError> {
    let f = a.grid.unit.factor();
    let base = match a.mode {
        GwMode::Baseline => GwParams::baseline(),
        _ => GwParams::filtered(),
    };
    let p = match &a.params {
        Some(path) => GwParams::parse_config_scaled(&read(path)?, &base, f)?,
        None => base,
    };
    let tau = std::f64::consts::TAU;
    let omegas = grid(&a.grid, tau * 10.0, tau * 1e4, 400)?;
    match a.mode {
        GwMode::Baseline => {
            let b = baseline_noise(&p, &omegas)?;
            let ratio = b.total.iter().zip(&b.sql).map(|(s, q)| s / q).fold(f64::INFINITY, f64::min);
            let summary = json!({
                "command": "gw",
                "mode": "baseline",
                "points": omegas.len(),
                "flagged": b.flagged.iter().filter(|&&x| x).count(),
                "min_S_over_SQL": ratio,
            });
            emit(&a.output, b.to_csv(), summary)
        }
        GwMode::Controlled => {
            let m = build_full_system(&p);
            let d = lqg_synthesize(&m, &LqgWeights::from_params(&p))?;
            let b = controlled_noise(&d, &p, &omegas)?;
            let summary = json!({
                "command": "gw",
                "mode": "controlled",
                "points": omegas.len(),
                "flagged": b.flagged.iter().filter(|&&x| x).count(),
                "stable": d.is_stable(),
                "rank_c": d.rank_c,
                "rank_o": d.rank_o,
                "max_re_eig_open": d.max_re_open,
                "max_re_eig_regulator": d.max_re_regulator,
                "max_re_eig_filter": d.max_re_filter,
                "max_re_eig_total": d.max_re_total,
                "care_residual_regulator": d.regulator.relative(),
                "care_residual_filter": d.filter.relative(),
            });
            emit(&a.output, b.to_csv(), summary)
        }
        GwMode::Sweep => {
            let ch: LossChannel = a
                .channel
                .as_deref()
                .ok_or_else(|| CliError::Config("sweep needs --channel".into()))?
                .parse()?;
            if a.values.is_empty() {
                return Err(CliError::Config("sweep needs --values".into()));
            }
            let values: Vec<f64> = a.values.iter().map(|v| v * f).collect();
            let results = loss_sweep(&p, ch, &values, &omegas);
            let ok: Vec<(f64, &NoiseBudget)> =
                results.iter().filter_map(|(v, r)| r.as_ref().ok().map(|b| (*v, b))).collect();
            if ok.is_empty() {
                let (_, first) = &results[0];
                return Err(first.clone().expect_err("no successful entries").into());
            }
            let entries: Vec<Value> = results
                .iter()
                .map(|(v, r)| match r {
                    Ok(b) => json!({ "value": v, "ok": true, "max_re_eig_total": b.max_re_total }),
                    Err(e) => json!({ "value": v, "ok": false, "error": e.to_string() }),
                })
                .collect();
            let refs: Vec<&NoiseBudget> = ok.iter().map(|(_, b)| *b).collect();
            let summary = json!({
                "command": "gw",
                "mode": "sweep",
                "channel": ch.key(),
                "points": omegas.len(),
                "spread_decades": spread_decades(&refs, omegas[0], omegas[omegas.len() - 1]),
                "entries": entries,
            });
            emit(&a.output, gw_csv(&ok, true), summary)
        }
    }
}
