#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod hill;
pub mod history;
pub mod integrator;
pub mod io;
pub mod quadrature;
pub mod reproduce;
pub mod specfun;
pub mod spectral;
pub mod system;

pub use error::{Error, Result};
