//! Approximate discrete Radon transform (ADRT) written as a product of
//! per-level operators, with closed-form spectral factorizations of every
//! level and the fast explicit pseudo-inverse built from them.

pub mod cross_level;
pub mod data;
pub mod error;
pub mod forward;
pub mod inversion;
pub mod level_svd;
pub mod trig;

pub use data::{column_height, AdrtData, Image, Quadrant, QuadrantData};
pub use error::{Error, Result};
pub use forward::{adrt_adjoint, adrt_forward};
pub use inversion::{alg_exact, cg_normal, spife, spife_sq, Method};
