//! Interferometric gravitational-wave detector with a coherent-feedback amplifier filter:
//! the twelve-state model, LQG stabilization and quantum-noise spectra.

pub mod error;
pub mod lqg;
pub mod model;
pub mod noise;
pub mod params;

pub use error::{GwError, GwResult};
pub use lqg::{lqg_synthesize, synthesize_for, CareReport, LqgDesign, LqgWeights};
pub use model::{build_full_system, control_channels, ctrb_obsv};
pub use noise::{
    baseline_noise, controlled_noise, default_grid, log_grid, loss_sweep, mizuno_integral, open_loop_noise,
    LossChannel, MizunoResult, NoiseBudget,
};
pub use params::GwParams;
