//! Numerical differential geometry at desk scale.
//!
//! The crate has five parts:
//!
//! * [`groups`] — finite subgroups of `SO(n)`, their double covers in
//!   `Spin(n)`, lift enumeration, and fixed subspaces of half-spinor
//!   representations;
//! * [`metric`] — metric charts with exact derivatives, curvature tensors,
//!   geodesics, and the explicit example metrics (flat, round sphere,
//!   quotients, Eguchi-Hanson);
//! * [`conformal`] — coordinate inversion, pushforward of asymptotically
//!   locally Euclidean metrics to a punctured ball, decay-order estimation,
//!   and the one-point compactification regularity probe;
//! * [`spin`] — Clifford algebra, spin connections, the twistor equation as
//!   parallel transport in a doubled spinor bundle, and zero-locus analysis;
//! * [`volume`] — geodesic ball volumes and the relative volume function
//!   `psi(r) = vol B(p, r) / (omega_n r^n)` with its two limits.
//!
//! A companion guide with worked examples lives in `book/`; its code listings
//! are compiled and run as part of this crate's doc-tests.

pub mod conformal;
pub mod error;
pub mod groups;
pub mod jet;
pub mod metric;
pub mod sampling;
pub mod spin;
pub mod volume;

mod book;

pub use error::{Result, TaleError};
