//! Forward solver and late-time reconstruction toolkit for time-fractional
//! diffusion-wave equations d_t^α u = −Au + μ(t) f(x) with 0 < α < 2.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod error;
pub mod forward;
pub mod inverse;
pub mod linalg;
pub mod ode_lab;
pub mod quadrature;
pub mod source_profile;
pub mod special;
pub mod spectrum;

pub use error::{Error, Result};
pub use source_profile::{FractionalOrder, Piece, Regime, SourceProfile};
pub use spectrum::{SpatialField, SpectralOperator};
