//! Tappings: declarative index maps from an agent's sensorimotor matrix to
//! supervised training sets.
//!
//! The numeric containers are generic over [`Scalar`] (`f32` or `f64`); the
//! `*F64` / `*F32` aliases below pin the common choices.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod demo;
pub mod engine;
pub mod error;
pub mod models;
pub mod render;
pub mod rlbridge;
pub mod rng;
pub mod scalar;
pub mod sim;
pub mod smcore;
pub mod tapdsl;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use smcore::{ChannelRef, Group, Kind, SensorimotorMatrix, SensorimotorSpace};
pub use tapdsl::{compose, Causality, CausalityReport, Role, Tap, Tapping, Template};
pub use engine::{apply, Anchor, Dataset, StreamState};

pub type SensorimotorMatrixF64 = SensorimotorMatrix<f64>;
pub type SensorimotorMatrixF32 = SensorimotorMatrix<f32>;
pub type DatasetF64 = Dataset<f64>;
pub type DatasetF32 = Dataset<f32>;
pub type LinearModelF64 = models::LinearModel<f64>;
pub type LinearModelF32 = models::LinearModel<f32>;
pub type ValueTableF64 = rlbridge::ValueTable<f64>;
pub type ValueTableF32 = rlbridge::ValueTable<f32>;
