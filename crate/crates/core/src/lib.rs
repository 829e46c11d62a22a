#![allow(clippy::neg_cmp_op_on_partial_ord)]
//! Sharp seasonal thresholds for periodic, piecewise-autonomous,
//! cooperative and concave population dynamics.
//!
//! The central object is the monodromy matrix of the linearization at zero,
//! `M(theta) = exp((1 - theta) T DF2(0)) exp(theta T DF1(0))`, whose Perron
//! root `rho(theta)` decides between extinction (`rho <= 1`) and convergence
//! to a unique positive periodic orbit (`rho > 1`).

pub mod cli;
pub mod conditions;
pub mod error;
pub mod floquet;
pub mod insect;
pub mod linalg;
pub mod scenario;
pub mod seasonal;
pub mod simulate;
pub mod split;
pub mod verify;

pub use error::{Error, Result};
