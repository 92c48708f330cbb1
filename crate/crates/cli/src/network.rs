//! Named networks built from command-line parameters.

use crate::args::{Mode, NetworkArgs, NetworkKind};
use crate::CliError;
use qfb_core::components::{
    make_beam_splitter, make_butterworth_controller, make_cavity_reflection, make_cavity_transmission, make_ndpa,
    CavityParams, NdpaParams,
};
use qfb_core::feedback::{close_loop, ideal_closed_loop, nonreciprocal_close, nonreciprocal_ideal};
use qfb_core::statespace::{build_integrator_model, build_phase_filter, LoopCavityParams, SPEED_OF_LIGHT};
use qfb_core::{CMatrix64, Complex64, Port, RationalFunction64, StateSpaceModel64, TransferMatrix64};

/// A network evaluated either symbolically or through its state-space realization.
pub enum Network {
    Transfer(TransferMatrix64),
    StateSpace(StateSpaceModel64),
}

pub struct Built {
    pub network: Network,
    /// Scalar open loop `L` when the network is a closed 2-port loop (or the zero stub).
    pub open_loop: Option<RationalFunction64>,
    pub mode: Mode,
    pub ports_in: Vec<Port>,
    pub ports_out: Vec<Port>,
}

impl Network {
    pub fn shape(&self) -> (usize, usize) {
        match self {
            Network::Transfer(t) => (t.rows(), t.cols()),
            Network::StateSpace(m) => (m.c().rows(), m.b().cols()),
        }
    }

    pub fn eval(&self, s: Complex64) -> qfb_core::Result<CMatrix64> {
        match self {
            Network::Transfer(t) => t.eval(s),
            Network::StateSpace(m) => m.response_at(s),
        }
    }
}

/// Scaled rate parameters of a network specification.
struct Rates {
    gamma: f64,
    lambda: f64,
    kappa: f64,
    kappa1: f64,
    kappa2: f64,
    delta: Option<f64>,
    c_over_l4: f64,
}

impl Rates {
    fn from_args(a: &NetworkArgs, factor: f64) -> Self {
        let lambda = a.lambda * factor;
        let kappa = a.kappa * factor;
        Self {
            gamma: a.gamma.map_or(a.gamma_ratio * lambda, |g| g * factor),
            lambda,
            kappa,
            kappa1: a.kappa1.map_or(kappa, |k| k * factor),
            kappa2: a.kappa2.map_or(kappa, |k| k * factor),
            delta: a.delta.map(|d| d * factor),
            c_over_l4: a.c_over_l4.map_or(1e3 * kappa, |c| c * factor),
        }
    }

    fn ndpa(&self) -> qfb_core::Result<TransferMatrix64> {
        make_ndpa(NdpaParams::new(self.gamma, self.lambda)?)
    }

    fn cavity(&self, k1: f64, k2: f64, default_delta: f64) -> qfb_core::Result<CavityParams<f64>> {
        CavityParams::new(k1, k2, self.delta.unwrap_or(default_delta))
    }

    fn loop_params(&self) -> qfb_core::Result<LoopCavityParams<f64>> {
        LoopCavityParams::new(self.gamma, self.lambda, self.kappa, SPEED_OF_LIGHT / self.c_over_l4)
    }
}

const A: Port = Port::Annihilation;
const CR: Port = Port::Creation;

fn default_mode(kind: NetworkKind) -> Mode {
    match kind {
        NetworkKind::Differentiator
        | NetworkKind::Integrator
        | NetworkKind::ActiveFilter
        | NetworkKind::Nonreciprocal => Mode::Finite,
        _ => Mode::Element,
    }
}

/// Builds the named network at `factor`-scaled rates (2π for `--unit hertz`).
pub fn build(a: &NetworkArgs, factor: f64) -> Result<Built, CliError> {
    let r = Rates::from_args(a, factor);
    let mode = a.mode.unwrap_or_else(|| default_mode(a.network));
    let bad_mode = || CliError::Config(format!("{:?} does not support mode {:?}", a.network, mode));
    let controller = match a.network {
        NetworkKind::Lpf | NetworkKind::Differentiator => {
            Some(make_cavity_transmission(r.cavity(r.kappa1, r.kappa2, 0.0)?)?)
        }
        NetworkKind::Hpf | NetworkKind::Integrator | NetworkKind::ActiveFilter => {
            let (k1, k2) = match (a.network, a.kappa1, a.kappa2) {
                // Asymmetric by default: κ₂ = 3κ₁.
                (NetworkKind::ActiveFilter, _, None) => (r.kappa1, 3.0 * r.kappa1),
                _ => (r.kappa1, r.kappa2),
            };
            Some(make_cavity_reflection(r.cavity(k1, k2, 0.0)?)?)
        }
        NetworkKind::Butterworth => {
            Some(make_butterworth_controller(r.cavity(r.kappa1, r.kappa2, (r.kappa1 + r.kappa2) / 2.0)?)?)
        }
        _ => None,
    };
    let transfer = |t: TransferMatrix64, open_loop| Built {
        ports_in: t.sig_in().to_vec(),
        ports_out: t.sig_out().to_vec(),
        network: Network::Transfer(t),
        open_loop,
        mode,
    };
    if let Some(k) = controller {
        return Ok(match mode {
            Mode::Element => transfer(k, None),
            Mode::Finite => {
                let cl = close_loop(&r.ndpa()?, &k)?;
                transfer(cl.gfb, cl.open_loop)
            }
            Mode::Ideal => transfer(ideal_closed_loop(&k)?, None),
        });
    }
    match a.network {
        NetworkKind::Ndpa if mode == Mode::Element => Ok(transfer(r.ndpa()?, None)),
        NetworkKind::BeamSplitter if mode == Mode::Element => {
            Ok(transfer(make_beam_splitter(a.transmissivity)?, None))
        }
        NetworkKind::Nonreciprocal => {
            let k = make_beam_splitter(a.transmissivity)?;
            match mode {
                Mode::Finite => {
                    let g = r.ndpa()?;
                    let gbar = g.with_signature(vec![CR, A], vec![CR, A])?;
                    Ok(transfer(nonreciprocal_close(&g, &gbar, &k)?.gfb, None))
                }
                Mode::Ideal => Ok(transfer(nonreciprocal_ideal(&k)?, None)),
                Mode::Element => Err(bad_mode()),
            }
        }
        NetworkKind::IntegratorModel if mode == Mode::Element => {
            let m = build_integrator_model(&r.loop_params()?)?;
            Ok(Built { network: Network::StateSpace(m), open_loop: None, mode, ports_in: vec![A, CR], ports_out: vec![A, CR] })
        }
        NetworkKind::PhaseFilter if mode == Mode::Element => {
            let (m, _) = build_phase_filter(&r.loop_params()?)?;
            Ok(Built { network: Network::StateSpace(m), open_loop: None, mode, ports_in: vec![A], ports_out: vec![A] })
        }
        NetworkKind::Zero if mode == Mode::Element => {
            let z = TransferMatrix64::new(1, 1, vec![RationalFunction64::zero()], vec![A], vec![A])?;
            Ok(Built { open_loop: Some(RationalFunction64::zero()), ..transfer(z, None) })
        }
        _ => Err(bad_mode()),
    }
}
