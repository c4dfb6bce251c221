//! Exact and certified numerics for the cusp domain bounded by the graph of
//! `psi(x) = d(x, C)^alpha` over the middle-third Cantor set `C`.
//!
//! The crate covers the Cantor geometry, the profile and its derivative, the
//! reflection across the graph, the exponent thresholds for Sobolev
//! extension, the Jacobian-quotient series, grid-level extension
//! experiments, and the counterexample functions showing the thresholds are
//! sharp.

pub mod error;
pub mod exponents;
pub mod geometry;
pub mod grid;
pub mod integrals;
pub mod interval;
pub mod profile;
pub mod quadrature;
pub mod reflection;
pub mod triadic;
pub mod verify;
pub mod witness;

pub use error::{Error, Result};
pub use geometry::{dist_to_cantor, locate, removed_intervals, CantorInterval, LocateResult};
pub use interval::Interval;
pub use profile::{CuspProfile, PlanePoint, RegionTag};
pub use reflection::{reflect, reflect_jet, AffineJet, ReflectionZone};
pub use triadic::TriadicRational;
