//! Models for the capacity of fractal device-to-device social networks.
//!
//! The crate is `no_std` (it needs `alloc`) and covers the whole analytic and
//! simulation pipeline:
//!
//! * [`sympoly`]: log-domain elementary symmetric polynomials and the contact
//!   selection probabilities built on them.
//! * [`socialgraph`]: power-law degree sampling and the hub-repulsive
//!   descending-rank graph construction.
//! * [`hierarchy`]: breadth-first level-L contact profiles and closed-form
//!   hierarchy analytics.
//! * [`boxcover`]: box covering, renormalization and fractal exponent fits.
//! * [`wireless`]: unit-square deployment, grid routing, TDMA scheduling,
//!   hop and capacity estimation.
//!
//! All randomness is explicit: every randomized operation takes a `u64` seed
//! and derives independent streams from it with [`rng::derive_seed`].

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod boxcover;
pub mod error;
pub mod graph;
pub mod hierarchy;
pub mod math;
pub mod rng;
pub mod socialgraph;
pub mod sympoly;
pub mod wireless;

pub use error::{Error, Result};
pub use graph::Graph;
