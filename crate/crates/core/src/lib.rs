// `!(x > 0)` is used throughout on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod barriers;
pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod io;
mod quad;
pub mod scalar;
pub mod section;
pub mod waves;

pub use error::{Error, Result};
pub use scalar::{Exponent, Real};

/// Double-precision instances of the generic types.
pub type Grid = section::SectionGrid<f64>;
pub type Profile = section::SectionProfile<f64>;
pub type Tube = dynamics::TubeGrid<f64>;
pub type Field = dynamics::TubeField<f64>;
pub type Wave = waves::WaveProfile<f64>;
pub type Params = barriers::BarrierParams<f64>;
pub type Barrier = barriers::BarrierPath<f64>;
pub type Fronts = diagnostics::FrontSeries<f64>;
pub type Errors = diagnostics::ErrorSeries<f64>;
