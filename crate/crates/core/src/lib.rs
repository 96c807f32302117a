//! Core models for a simulator of information transfer embedded in wireless
//! power delivery: a transmitter varies which antennas radiate a constant-
//! envelope power signal so that receivers that know the codebook decode
//! bits from the activation pattern while energy harvesters see unchanged
//! harvested power.
//!
//! The numeric layers ([`geometry`], [`channel`], [`phy`]) are generic over
//! the [`scalar::Scalar`] float type; the frame-clocked [`protocol`]
//! simulator and the aliases at the crate root pin `f64`.

pub mod channel;
pub mod geometry;
pub mod phy;
pub mod protocol;
pub mod rng;
pub mod scalar;
pub mod units;

pub use num_complex::Complex64;
pub use scalar::Scalar;

/// `f64` instantiations used by the protocol simulator and the CLI harness.
pub type Point3 = geometry::Point3<f64>;
pub type ObstacleSpec = geometry::ObstacleSpec<f64>;
pub type ObstacleField = geometry::ObstacleField<f64>;
pub type LinkGeometry = channel::LinkGeometry<f64>;
pub type ChannelConfig = channel::ChannelConfig<f64>;
pub type ChannelRealization = channel::ChannelRealization<f64>;
pub type ChannelSampler = channel::ChannelSampler<f64>;
pub type SignalConfig = phy::SignalConfig<f64>;
pub type TxVector = phy::TxVector<f64>;
pub type MiEstimate = phy::MiEstimate<f64>;
