//! Strain-referred quantum-noise spectra, the SQL and the Mizuno sum rule.

use crate::error::{GwError, GwResult};
use crate::lqg::{lqg_synthesize, LqgDesign, LqgWeights};
use crate::model::{build_full_system, control_channels};
use crate::params::GwParams;
use num_complex::Complex64;
use qfb_core::{fmt_sig17, StateSpaceModel64};
use std::f64::consts::PI;
use std::str::FromStr;

/// Noise channels in input order after `F_GW`.
pub const CHANNELS: [&str; 8] = ["Qd", "Pd", "Q1", "P1", "Q3", "P3", "Q4", "P4"];

/// Power spectra on a frequency grid. Unevaluable points carry NaN and `flagged = true`.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseBudget {
    pub omega: Vec<f64>,
    /// `S(Ω)`, the sum of `channels` at each point.
    pub total: Vec<f64>,
    /// `|Ψ_•|² / (2|Ψ_h|²)` per channel.
    pub channels: Vec<[f64; 8]>,
    pub sql: Vec<f64>,
    pub flagged: Vec<bool>,
    /// `max Re eig(A_tot)` when the spectrum comes from an LQG loop.
    pub max_re_total: Option<f64>,
}

impl NoiseBudget {
    fn with_capacity(n: usize) -> Self {
        Self {
            omega: Vec::with_capacity(n),
            total: Vec::with_capacity(n),
            channels: Vec::with_capacity(n),
            sql: Vec::with_capacity(n),
            flagged: Vec::with_capacity(n),
            max_re_total: None,
        }
    }

    fn push(&mut self, omega: f64, ch: Option<[f64; 8]>, sql: f64) {
        self.omega.push(omega);
        self.sql.push(sql);
        match ch {
            Some(c) => {
                self.total.push(c.iter().sum());
                self.channels.push(c);
                self.flagged.push(false);
            }
            None => {
                self.total.push(f64::NAN);
                self.channels.push([f64::NAN; 8]);
                self.flagged.push(true);
            }
        }
    }

    pub fn sqrt_total(&self) -> Vec<f64> {
        self.total.iter().map(|s| s.sqrt()).collect()
    }

    /// CSV of amplitude spectral densities, one row per grid point.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("omega,sqrtS_total");
        for c in CHANNELS {
            out.push_str(",sqrtS_");
            out.push_str(c);
        }
        out.push_str(",sqrtSQL\n");
        for i in 0..self.omega.len() {
            out.push_str(&fmt_sig17(self.omega[i]));
            out.push(',');
            out.push_str(&fmt_sig17(self.total[i].sqrt()));
            for c in self.channels[i] {
                out.push(',');
                out.push_str(&fmt_sig17(c.sqrt()));
            }
            out.push(',');
            out.push_str(&fmt_sig17(self.sql[i].sqrt()));
            out.push('\n');
        }
        out
    }
}

/// `n` logarithmically spaced points over `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n).map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp()).collect()
        }
    }
}

/// 400 points over `2π·[10, 10⁴]` s⁻¹.
pub fn default_grid() -> Vec<f64> {
    log_grid(2.0 * PI * 10.0, 2.0 * PI * 1e4, 400)
}

/// `ħ / (M L² Ω²)`.
pub fn sql(p: &GwParams, omega: f64) -> f64 {
    p.hbar / (p.m * p.l_arm * p.l_arm * omega * omega)
}

/// `Ξ_Q(s) = −√(2γ) ħ G / (M L s² (s + γ/2))`.
pub fn xi_q(p: &GwParams, s: Complex64) -> Complex64 {
    let g = p.gamma_ifo;
    -(2.0 * g).sqrt() * p.hbar * p.g_arm() / (p.m * p.l_arm * s * s * (s + g / 2.0))
}

/// `Ξ_P(s) = (s − γ/2) / (√(2γ) G L)`.
pub fn xi_p(p: &GwParams, s: Complex64) -> Complex64 {
    let g = p.gamma_ifo;
    (s - g / 2.0) / ((2.0 * g).sqrt() * p.g_arm() * p.l_arm)
}

/// Unfiltered detector: `S = (|Ξ_Q|² + |Ξ_P|²)/2`, reported in the `Qd` and `Pd` channels.
///
/// Requires `Δ_d = 0`. Points with `Ω ≤ 0` are flagged.
pub fn baseline_noise(p: &GwParams, grid: &[f64]) -> GwResult<NoiseBudget> {
    p.validate()?;
    if p.delta_d != 0.0 {
        return Err(GwError::Config(format!("baseline spectra assume Delta_d = 0, got {}", p.delta_d)));
    }
    let mut nb = NoiseBudget::with_capacity(grid.len());
    for &w in grid {
        if !(w > 0.0 && w.is_finite()) {
            nb.push(w, None, f64::NAN);
            continue;
        }
        let s = Complex64::new(0.0, w);
        let mut ch = [0.0; 8];
        ch[0] = xi_q(p, s).norm_sqr() / 2.0;
        ch[1] = xi_p(p, s).norm_sqr() / 2.0;
        nb.push(w, Some(ch), sql(p, w));
    }
    Ok(nb)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MizunoResult {
    pub numeric: f64,
    /// `2π G² L²`.
    pub closed_form: f64,
    pub rel_diff: f64,
    pub evaluations: u32,
}

/// `∫₀^∞ dΩ / |Ξ_P(iΩ)|²` by double-exponential quadrature.
///
/// The range is split at decades of `γ_IFO` up to `X = 10⁶ γ_IFO`; the tail uses
/// `|Ξ_P|⁻² → 2γG²L²/Ω²`, so `∫_X^∞ ≈ X·f(X)` with relative error `O(γ²/X²)`.
pub fn mizuno_integral(p: &GwParams) -> GwResult<MizunoResult> {
    p.validate()?;
    let g = p.gamma_ifo;
    let f = |w: f64| 1.0 / xi_p(p, Complex64::new(0.0, w)).norm_sqr();
    let closed_form = 2.0 * PI * p.g_arm().powi(2) * p.l_arm.powi(2);
    let mut edges = vec![0.0];
    edges.extend((-3..=6).map(|k| g * 10f64.powi(k)));
    let mut numeric = 0.0;
    let mut evaluations = 0;
    for w in edges.windows(2) {
        let scale = f(w[0]) * (w[1] - w[0]);
        let out = quadrature::double_exponential::integrate(f, w[0], w[1], 1e-14 * scale);
        numeric += out.integral;
        evaluations += out.num_function_evaluations;
    }
    let x = *edges.last().expect("nonempty");
    numeric += x * f(x);
    Ok(MizunoResult { numeric, closed_form, rel_diff: (numeric / closed_form - 1.0).abs(), evaluations })
}

fn budget_from_rows(
    p: &GwParams,
    grid: &[f64],
    row: impl Fn(f64) -> Option<Vec<Complex64>>,
) -> NoiseBudget {
    let mut nb = NoiseBudget::with_capacity(grid.len());
    for &w in grid {
        let ch = (w > 0.0 && w.is_finite()).then(|| row(w)).flatten().and_then(|y| {
            let s = Complex64::new(0.0, w);
            let psi_h = y[0] * p.m * p.l_arm * s * s;
            let d = 2.0 * psi_h.norm_sqr();
            let mut ch = [0.0; 8];
            for (c, yk) in ch.iter_mut().zip(&y[1..]) {
                *c = yk.norm_sqr() / d;
            }
            ch.iter().all(|c| c.is_finite()).then_some(ch)
        });
        nb.push(w, ch, if w > 0.0 { sql(p, w) } else { f64::NAN });
    }
    nb
}

fn measured_row(m: &StateSpaceModel64, w: f64) -> Option<Vec<Complex64>> {
    m.freq_response(w).ok().map(|r| r.row(0))
}

/// Spectrum seen on `y_m` through the LQG loop `[C_tot (sI − A_tot)⁻¹ B_tot + D_tot]`.
pub fn controlled_noise(design: &LqgDesign, p: &GwParams, grid: &[f64]) -> GwResult<NoiseBudget> {
    if !design.is_stable() {
        return Err(GwError::Unstable(design.max_re_total));
    }
    let m = design.total_model();
    let mut nb = budget_from_rows(p, grid, |w| measured_row(&m, w));
    nb.max_re_total = Some(design.max_re_total);
    Ok(nb)
}

/// Spectrum from the open-loop map `C_m (sI − A)⁻¹ B_w + D_m`.
///
/// Output feedback multiplies every input-to-`y_m` transfer by the same loop factor, so
/// the ratios `|Ψ_•|²/|Ψ_h|²` agree with [`controlled_noise`] wherever both are defined.
pub fn open_loop_noise(m: &StateSpaceModel64, p: &GwParams, grid: &[f64]) -> NoiseBudget {
    let (_, cm, dm) = control_channels(m);
    let mm = StateSpaceModel64::new(m.a().clone(), m.b().clone(), cm, dm).expect("row of a valid model");
    budget_from_rows(p, grid, |w| measured_row(&mm, w))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LossChannel {
    Gamma1,
    Kappa3,
    Kappa4,
}

impl LossChannel {
    pub fn key(self) -> &'static str {
        match self {
            Self::Gamma1 => "gamma_1loss",
            Self::Kappa3 => "kappa_3loss",
            Self::Kappa4 => "kappa_4loss",
        }
    }
}

impl FromStr for LossChannel {
    type Err = GwError;
    fn from_str(s: &str) -> GwResult<Self> {
        match s {
            "gamma_1loss" => Ok(Self::Gamma1),
            "kappa_3loss" => Ok(Self::Kappa3),
            "kappa_4loss" => Ok(Self::Kappa4),
            _ => Err(GwError::Config(format!("unknown loss channel {s:?}"))),
        }
    }
}

/// One LQG design and controlled spectrum per loss value; failures stay in their entry.
pub fn loss_sweep(
    p: &GwParams,
    channel: LossChannel,
    values: &[f64],
    grid: &[f64],
) -> Vec<(f64, GwResult<NoiseBudget>)> {
    values
        .iter()
        .map(|&v| {
            let run = || {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(GwError::Config(format!("{} must be positive, got {v}", channel.key())));
                }
                let mut q = p.clone();
                q.set(channel.key(), v)?;
                q.validate()?;
                let m = build_full_system(&q);
                let d = lqg_synthesize(&m, &LqgWeights::from_params(&q))?;
                controlled_noise(&d, &q, grid)
            };
            (v, run())
        })
        .collect()
}

/// Largest `log₁₀(max √S / min √S)` across budgets over grid points in `[lo, hi]`.
///
/// Budgets must share a grid; flagged points are skipped.
pub fn spread_decades(budgets: &[&NoiseBudget], lo: f64, hi: f64) -> f64 {
    let Some(first) = budgets.first() else { return 0.0 };
    let mut worst: f64 = 0.0;
    for (i, &w) in first.omega.iter().enumerate() {
        if w < lo || w > hi || budgets.iter().any(|b| b.flagged[i]) {
            continue;
        }
        let vals = budgets.iter().map(|b| b.total[i].sqrt());
        let (mn, mx) = vals.fold((f64::INFINITY, 0.0f64), |(a, b), x| (a.min(x), b.max(x)));
        worst = worst.max((mx / mn).log10());
    }
    worst
}
