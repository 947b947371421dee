//! Link-level models for SPAD-array optical receivers driven by DCO-OFDM.
//!
//! The crate is split along the signal path:
//!
//! * [`ofdm`]: QAM mapping, Hermitian framing, transforms, clipping and bias.
//! * [`spad`]: dead-time-distorted photon count statistics of a passively
//!   quenched SPAD array.
//! * [`channel`]: FSO and VLC channel loss, Gamma-Gamma turbulence.
//! * [`analytics`]: closed-form Bussgang gain, distortion and shot noise,
//!   SNR, BER and spectral-efficiency bound.
//! * [`experiments`]: Monte Carlo transmission chain, sweeps and clipping
//!   optimization.
//!
//! Grid points and OFDM frames are evaluated data-parallel with rayon when the
//! `parallel` feature is enabled (the default). Every random stream is keyed
//! by seed and work-item index, so serial and parallel runs are bit-identical.

// Range checks are written `!(x > 0.0)` so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod bessel;
pub mod channel;
pub mod dd;
mod error;
pub mod experiments;
pub mod ofdm;
pub mod parallel;
pub mod quad;
pub mod spad;
pub mod special;

pub use error::{Error, Result};
