//! Command-line front end for the `catflip-core` engine.
//!
//! Four subcommands: `rate` (one grid point), `sweep` (a full α² grid via
//! a work pool), `leakage` (time-domain probe of the cat manifold), and
//! `validate` (pass/fail suites).  Every rate and strength is expressed in
//! units of the two-photon dissipation rate `κ2`; the engine is normalized
//! to `κ2 = 1` throughout and no option reintroduces it.

pub mod config;
pub mod engine;
pub mod error;
pub mod rows;
pub mod validate;
