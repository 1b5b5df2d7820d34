#![no_std]
extern crate alloc;

pub mod coulomb;
pub mod cumulants;
pub mod denoise;
pub mod ensembles;
pub mod error;
pub mod freeprob;
pub mod hciz;
pub mod linalg;
pub mod math;
pub mod rng;

pub use error::{Error, Result};
