//! Downlink spectrum-sharing simulator for an outdoor licensed network and an
//! indoor unlicensed network coordinated through a radio environment map.

// `!(x > 0.0)` rejects NaN along with the out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// dense numeric kernels index several parallel arrays at once
#![allow(clippy::needless_range_loop)]

pub mod cli;
pub mod config;
pub mod controllers;
pub mod error;
pub mod fading;
pub mod geometry;
pub mod link;
pub mod optim;
pub mod propagation;
pub mod rem;
pub mod scenario;
pub mod scheduler;
pub mod sim;
pub mod units;

use rand::SeedableRng;

pub use error::{Error, Result};

/// Random stream used everywhere in the simulator.
pub type SimRng = rand_chacha::ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}
