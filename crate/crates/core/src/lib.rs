// Negated comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod expr;
pub mod family;
pub mod grid;
pub mod hamiltonian;
pub mod operator;
pub mod reference;
pub mod run;
pub mod selector;
pub mod validate;

pub use error::{Error, Result};
