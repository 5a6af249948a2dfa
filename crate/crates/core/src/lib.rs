//! Forward and inverse spectral problems for the Laplacian on a star graph
//! of `m` edges of length `pi`, with Robin conditions at the pendant
//! vertices and a nonlocal integral matching condition at the centre.
//!
//! Start with [`forward::GraphProblem`], compute its spectrum with
//! [`forward::eigenvalues`], and recover the densities with
//! [`inverse_easy::reconstruct_method2`] or
//! [`inverse_riesz::reconstruct_method1`].

pub mod asymptotics;
pub mod characterize;
pub mod config;
pub mod error;
pub mod forward;
pub mod inverse_easy;
pub mod inverse_riesz;
pub mod io;
pub mod kernel;
pub mod linalg;
pub mod products;
pub mod quadrature;
pub mod roots;
pub mod series;
pub mod spectrum;

pub use config::Config;
pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use series::CosineSeries;
