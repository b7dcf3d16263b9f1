//! Test images, noise models, file formats and experiment drivers for the
//! `adrt` crate, plus the command-line front end.

pub mod cli;
pub mod error;
pub mod experiments;
pub mod generate;
pub mod io;
pub mod noise;

pub use adrt::inversion::{metrics, Metrics};
pub use error::{HarnessError, Result};
