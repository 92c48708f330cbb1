//! Transfer-function synthesis and analysis for coherent-feedback amplifier networks.
//!
//! Every numeric type is generic over [`Scalar`] (`f32`, `f64`, [`DoubleDouble`]);
//! the `*64` aliases below fix the scalar to `f64`.

pub mod components;
pub mod dd;
pub mod error;
pub mod feedback;
pub mod linalg;
pub mod poly;
pub mod rational;
pub mod scalar;
pub mod stability;
pub mod statespace;
pub mod transfer;

pub use error::{Error, Result};
pub use linalg::CMatrix;
pub use poly::Polynomial;
pub use rational::RationalFunction;
pub use scalar::{Scalar, C};
pub use stability::Verdict;
pub use statespace::StateSpaceModel;
pub use transfer::{Port, TransferMatrix};
pub use dd::DoubleDouble;

pub type Complex64 = C<f64>;
pub type Polynomial64 = Polynomial<f64>;
pub type RationalFunction64 = RationalFunction<f64>;
pub type TransferMatrix64 = TransferMatrix<f64>;
pub type CMatrix64 = CMatrix<f64>;
pub type StateSpaceModel64 = StateSpaceModel<f64>;

pub type Polynomial32 = Polynomial<f32>;
pub type RationalFunction32 = RationalFunction<f32>;
pub type TransferMatrix32 = TransferMatrix<f32>;

pub type PolynomialDD = Polynomial<DoubleDouble>;
pub type RationalFunctionDD = RationalFunction<DoubleDouble>;
pub type CMatrixDD = CMatrix<DoubleDouble>;

/// Fixed 17-significant-digit scientific formatting used by every CSV writer.
pub fn fmt_sig17(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}
