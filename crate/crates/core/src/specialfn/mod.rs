//! Gamma and Mittag-Leffler functions, the closed-form references for the
//! rest of the crate.

mod gamma;
mod mittag_leffler;

pub use gamma::{gamma, ln_gamma, rgamma, sin_pi, GAMMA_REL_ERR};
pub use mittag_leffler::{mittag_leffler, ml_zero_spacing, MittagLeffler, MlEvalResult, MlMethod};

pub(crate) use gamma::gamma_unchecked;
