//! Synchrosqueezing transforms built on the continuous wavelet transform and
//! the modified short-time Fourier transform.
//!
//! The pipeline is: transform a signal ([`transform`]), estimate the local
//! frequency of every cell with the phase transform and reassign the
//! transform's mass onto those frequencies ([`squeeze`]), trace the
//! instantaneous-frequency curves ([`ridge`]), and integrate narrow bands
//! around them to recover the individual components ([`reconstruct`]).
//! [`signal`] synthesizes test signals with known ground truth.

pub mod error;
pub mod io;
pub mod pipeline;
pub mod quadrature;
pub mod reconstruct;
pub mod ridge;
pub mod signal;
pub mod squeeze;
pub mod transform;

pub use error::{Error, Result};
