//! Exact counts of finite-field elements with prescribed traces and of
//! irreducible polynomials with prescribed leading coefficients.

pub mod artin_schreier;
pub mod error;
pub mod engine_main;
pub mod engine_smallchar;
pub mod expr;
pub mod ff_core;
pub mod formula;
pub mod moebius;
pub mod oracle;
pub mod trace_lab;
pub mod transforms;

pub use error::{Error, Result};
