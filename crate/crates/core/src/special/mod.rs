//! Special functions used by the solver and the asymptotic machinery.

pub mod gamma;
pub mod mittag_leffler;

pub use gamma::{gamma, gamma_recip, ln_gamma_abs, recip_gamma_parts};
pub use mittag_leffler::{ml_asym_neg, ml_eval, Branch, MittagLeffler, MlEvaluation, MlOrderPair};
