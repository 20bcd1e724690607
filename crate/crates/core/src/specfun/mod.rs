//! Special functions: Gamma, incomplete Gamma, Mittag-Leffler.

mod gamma;
mod matrix;
mod mittag_leffler;

pub use gamma::{
    gamma, ln_abs_gamma, rgamma, upper_incomplete_gamma, upper_incomplete_gamma_scaled,
    upper_incomplete_gamma_scaled_complex,
};
pub use matrix::ml_matrix;
pub use mittag_leffler::{mittag_leffler, mittag_leffler_real, regime, MLParams, MLRegime};
