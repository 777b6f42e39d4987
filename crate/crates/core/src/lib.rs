//! Homogeneous quasideviation means, concave envelopes of class-Φ
//! generators, and Hardy constants.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod envelope;
pub mod error;
mod extreal;
pub mod generator;
pub mod hardy;
pub mod harness;
pub mod mean;
pub mod poly;
pub mod presets;
pub mod quadrature;
pub mod roots;
pub mod validate;

pub use error::{Error, Result};
pub use generator::{Declared, DiniSide, GeneratorSpec, Kind};
pub use poly::Piecewise;
