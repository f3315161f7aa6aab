//! Multi-moment connectedness networks and the transmission of monetary-policy
//! shocks into them.
//!
//! The stages run in order: [`timeseries`] ingests prices, [`damm`] filters
//! per-series mixture moments, [`tvpvar`] decomposes forecast-error variance
//! per moment layer, [`connectedness`] and [`network`] summarise the
//! spillovers, and [`shocks`] with [`localproj`] relate them to policy
//! surprises. [`synth`] generates datasets with known answers.
//!
//! The numerical core of the first four stages is generic over [`Real`]
//! (`f32` or `f64`); the aliases below fix the scalar.

// `!(x > 0)` style checks reject NaN on purpose.
#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::needless_range_loop,
    clippy::type_complexity
)]

pub mod connectedness;
pub mod damm;
pub mod linalg;
pub mod localproj;
pub mod network;
pub mod optim;
pub mod scalar;
pub mod shocks;
pub mod synth;
pub mod timeseries;
pub mod tvpvar;

pub use scalar::Real;

pub type MomentPanelF64 = damm::MomentPanel<f64>;
pub type MomentPanelF32 = damm::MomentPanel<f32>;
pub type TvpVarOutputF64 = tvpvar::TvpVarOutput<f64>;
pub type TvpVarOutputF32 = tvpvar::TvpVarOutput<f32>;
pub type GfevdTableF64 = tvpvar::GfevdTable<f64>;
pub type GfevdTableF32 = tvpvar::GfevdTable<f32>;
pub type ConnectednessTableF64 = connectedness::ConnectednessTable<f64>;
pub type ConnectednessTableF32 = connectedness::ConnectednessTable<f32>;
pub type MultiLayerNetworkF64 = network::MultiLayerNetwork<f64>;
pub type MultiLayerNetworkF32 = network::MultiLayerNetwork<f32>;
