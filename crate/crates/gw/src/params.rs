//! Detector and filter parameters, with the flat `key = value` config format.

use crate::error::{GwError, GwResult};
use std::f64::consts::PI;

/// Reduced Planck constant (J·s).
pub const HBAR: f64 = 1.054571817e-34;
/// Speed of light used throughout (m/s).
pub const C_LIGHT: f64 = 3e8;
/// Default amplifier decay as a multiple of the pump rate.
pub const GAMMA_RATIO: f64 = 2.01;

/// Interferometer, feedback filter and loss parameters.
///
/// Rates are angular (s⁻¹). Zero filter couplings and zero losses are accepted so the
/// decoupled detector can be expressed; only `delta_d` may be negative.
#[derive(Clone, Debug, PartialEq)]
pub struct GwParams {
    pub m: f64,
    pub l_arm: f64,
    pub p_arm: f64,
    pub lambda_laser: f64,
    pub delta_d: f64,
    pub gamma_ifo: f64,
    pub omega_m: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub kappa1: f64,
    pub l4: f64,
    pub gamma_1loss: f64,
    pub kappa_3loss: f64,
    pub kappa_4loss: f64,
    pub hbar: f64,
    pub c: f64,
    /// Regulator weight `Q = q_scale · I`.
    pub q_scale: f64,
    /// Scalar control weight.
    pub r: f64,
    /// Variance assigned to the force input; the other eight inputs have 1/2.
    pub v_fgw: f64,
}

impl Default for GwParams {
    fn default() -> Self {
        Self::filtered()
    }
}

/// Config keys in file order; rates among them are marked for `--unit hertz`.
pub const CONFIG_KEYS: [(&str, bool); 17] = [
    ("M", false),
    ("L_arm", false),
    ("P_arm", false),
    ("lambda_laser", false),
    ("Delta_d", true),
    ("gamma_IFO", true),
    ("Omega_M", true),
    ("lambda", true),
    ("gamma", true),
    ("kappa1", true),
    ("L4", false),
    ("gamma_1loss", true),
    ("kappa_3loss", true),
    ("kappa_4loss", true),
    ("Q_scale", false),
    ("R", false),
    ("V_FGW", false),
];

impl GwParams {
    /// The filtered-detector parameter set; numbers are used verbatim.
    pub fn filtered() -> Self {
        let lambda = 3e6;
        let l_arm = 4000.0;
        Self {
            m: 40.0,
            l_arm,
            p_arm: 8e5,
            lambda_laser: 1064e-9,
            delta_d: -63.0,
            gamma_ifo: 1062.0,
            omega_m: 1.0,
            lambda,
            gamma: GAMMA_RATIO * lambda,
            kappa1: 2.0 * C_LIGHT / l_arm,
            l4: 0.5,
            gamma_1loss: 1e6,
            kappa_3loss: 100.0,
            kappa_4loss: 6e5,
            hbar: HBAR,
            c: C_LIGHT,
            q_scale: 1.0,
            r: 0.01,
            v_fgw: 1e-22,
        }
    }

    /// Unfiltered detector with detector bandwidth `2π·200` and no detuning.
    pub fn baseline() -> Self {
        Self { gamma_ifo: 2.0 * PI * 200.0, delta_d: 0.0, ..Self::filtered() }
    }

    /// Removes the filter and every loss channel, leaving the bare detector.
    pub fn decoupled(&self) -> Self {
        Self {
            lambda: 0.0,
            gamma: 0.0,
            kappa1: 0.0,
            gamma_1loss: 0.0,
            kappa_3loss: 0.0,
            kappa_4loss: 0.0,
            ..self.clone()
        }
    }

    /// Laser angular frequency `2πc/λ_laser`.
    pub fn omega0(&self) -> f64 {
        2.0 * PI * self.c / self.lambda_laser
    }

    /// Arm optomechanical coupling `√(2Pω₀/(ħcL))`.
    pub fn g_arm(&self) -> f64 {
        (2.0 * self.p_arm * self.omega0() / (self.hbar * self.c * self.l_arm)).sqrt()
    }

    /// `G_arm √(ħ/(MΩ_M))`.
    pub fn g_m(&self) -> f64 {
        self.g_arm() * (self.hbar / (self.m * self.omega_m)).sqrt()
    }

    /// Input-mirror coupling `√(cγ/(2L_arm))`.
    pub fn g_ni(&self) -> f64 {
        (self.c * self.gamma / (2.0 * self.l_arm)).sqrt()
    }

    /// `√(cγ/L₄)`.
    pub fn g24(&self) -> f64 {
        (self.c * self.gamma / self.l4).sqrt()
    }

    /// `√(cκ₁/L₄)`.
    pub fn g34(&self) -> f64 {
        (self.c * self.kappa1 / self.l4).sqrt()
    }

    pub fn validate(&self) -> GwResult<()> {
        let strictly = [
            ("M", self.m),
            ("L_arm", self.l_arm),
            ("P_arm", self.p_arm),
            ("lambda_laser", self.lambda_laser),
            ("gamma_IFO", self.gamma_ifo),
            ("Omega_M", self.omega_m),
            ("L4", self.l4),
            ("hbar", self.hbar),
            ("c", self.c),
            ("R", self.r),
            ("V_FGW", self.v_fgw),
        ];
        for (k, v) in strictly {
            if !(v.is_finite() && v > 0.0) {
                return Err(GwError::Config(format!("{k} must be positive, got {v}")));
            }
        }
        let nonneg = [
            ("lambda", self.lambda),
            ("gamma", self.gamma),
            ("kappa1", self.kappa1),
            ("gamma_1loss", self.gamma_1loss),
            ("kappa_3loss", self.kappa_3loss),
            ("kappa_4loss", self.kappa_4loss),
            ("Q_scale", self.q_scale),
        ];
        for (k, v) in nonneg {
            if !(v.is_finite() && v >= 0.0) {
                return Err(GwError::Config(format!("{k} must be non-negative, got {v}")));
            }
        }
        if !self.delta_d.is_finite() {
            return Err(GwError::Config("Delta_d must be finite".into()));
        }
        Ok(())
    }

    fn field_mut(&mut self, key: &str) -> Option<&mut f64> {
        Some(match key {
            "M" => &mut self.m,
            "L_arm" => &mut self.l_arm,
            "P_arm" => &mut self.p_arm,
            "lambda_laser" => &mut self.lambda_laser,
            "Delta_d" => &mut self.delta_d,
            "gamma_IFO" => &mut self.gamma_ifo,
            "Omega_M" => &mut self.omega_m,
            "lambda" => &mut self.lambda,
            "gamma" => &mut self.gamma,
            "kappa1" => &mut self.kappa1,
            "L4" => &mut self.l4,
            "gamma_1loss" => &mut self.gamma_1loss,
            "kappa_3loss" => &mut self.kappa_3loss,
            "kappa_4loss" => &mut self.kappa_4loss,
            "Q_scale" => &mut self.q_scale,
            "R" => &mut self.r,
            "V_FGW" => &mut self.v_fgw,
            _ => return None,
        })
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.clone().field_mut(key).map(|v| *v)
    }

    pub fn set(&mut self, key: &str, value: f64) -> GwResult<()> {
        let slot = self.field_mut(key).ok_or_else(|| GwError::Config(format!("unknown key {key:?}")))?;
        *slot = value;
        Ok(())
    }

    /// Multiplies every rate key by `factor` (2π converts hertz to angular).
    pub fn scale_rates(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for (k, is_rate) in CONFIG_KEYS {
            if is_rate {
                let v = out.get(k).expect("listed key");
                out.set(k, v * factor).expect("listed key");
            }
        }
        out
    }

    /// Parses `key = value` lines over `base`. `#` starts a comment.
    ///
    /// Unset `gamma` follows `GAMMA_RATIO · lambda`, and unset `kappa1` follows `2c/L_arm`.
    pub fn parse_config(text: &str, base: &Self) -> GwResult<Self> {
        Self::parse_config_scaled(text, base, 1.0)
    }

    /// [`Self::parse_config`] with every rate key read from the file multiplied by
    /// `rate_factor`; values inherited from `base` are left alone.
    pub fn parse_config_scaled(text: &str, base: &Self, rate_factor: f64) -> GwResult<Self> {
        let mut p = base.clone();
        let mut seen = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| GwError::Config(format!("line {}: expected key = value", n + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            let value: f64 = v
                .parse()
                .map_err(|_| GwError::Config(format!("line {}: {k}: cannot parse {v:?}", n + 1)))?;
            if seen.contains(&k) {
                return Err(GwError::Config(format!("line {}: duplicate key {k}", n + 1)));
            }
            let is_rate = CONFIG_KEYS.iter().any(|&(key, rate)| rate && key == k);
            let value = if is_rate { value * rate_factor } else { value };
            p.set(k, value).map_err(|e| GwError::Config(format!("line {}: {e}", n + 1)))?;
            seen.push(k);
        }
        if seen.contains(&"lambda") && !seen.contains(&"gamma") {
            p.gamma = GAMMA_RATIO * p.lambda;
        }
        if seen.contains(&"L_arm") && !seen.contains(&"kappa1") {
            p.kappa1 = 2.0 * p.c / p.l_arm;
        }
        p.validate()?;
        Ok(p)
    }

    /// Inverse of [`Self::parse_config`] for every key.
    pub fn to_config(&self) -> String {
        CONFIG_KEYS
            .iter()
            .map(|(k, _)| format!("{k} = {}\n", qfb_core::fmt_sig17(self.get(k).expect("listed key"))))
            .collect()
    }
}
