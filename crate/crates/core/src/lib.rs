//! Random multiplicative cascades on `[0, 1]` and the dimensions of the
//! images of sets under the cascade function `f(x) = μ([0, x))`.

pub mod boxdim;
pub mod cascade;
pub mod error;
pub mod exec;
pub mod oracle;
pub mod path;
pub mod rng;
pub mod sets;
pub mod solve;
pub mod table;
pub mod theory;
pub mod verify;
pub mod weights;

pub use error::{Error, Regime, Result};
pub use exec::Exec;
pub use path::DyadicPath;
pub use weights::{RegimeReport, SigmaConvention, WeightModel};
