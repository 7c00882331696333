//! Lorenz-type behavioural feedback model.
//!
//! The system couples social transmission `T`, perceived infection `I` and
//! social memory `M`:
//!
//! ```text
//! dT/dt = sigma (I - T)
//! dI/dt = T (r0 - M) - I
//! dM/dt = T I - beta M
//! ```
//!
//! The crate provides closed-form equilibria and characteristic polynomials,
//! stability classification (eigenvalues and Routh-Hurwitz), fixed-step and
//! adaptive integration, bifurcation scans over `r0`, Lyapunov spectra and a
//! dissipativity audit built on the absorbing-ball certificate.

pub mod analysis;
pub mod error;
pub mod integrate;
pub mod model;
pub mod stability;

pub use error::{Error, Result};
pub use model::{Branch, Equilibrium, ParamSet, State};
