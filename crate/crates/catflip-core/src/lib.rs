//! Numerics for the bit-flip channel of a dissipative cat qubit.
//!
//! A cat qubit stores its logical states in the two coherent-state
//! superpositions stabilized by two-photon dissipation.  Noise processes
//! that respect the stabilization only flip the logical bit at a rate that
//! is exponentially small in the mean photon number `alpha^2`, and this
//! crate computes that rate by three routes that check each other:
//!
//! 1. **Closed-form perturbation theory** ([`analytic_rates`]): first- and
//!    second-order logical rates expressed through cancellation-stable
//!    special functions — fast, exact to roundoff, valid to large photon
//!    number.
//! 2. **Operator-space sums** ([`kerr_spectrum`]): the same second-order
//!    quantities assembled from the inverse of an auxiliary quartic
//!    Hamiltonian acting on coherent states, term by term.
//! 3. **Brute-force spectral analysis** ([`spectral_extraction`]): the
//!    slowest decaying eigenmode of the full truncated generator, located
//!    by overlap with the conserved bit-flip invariant.
//!
//! Supporting layers: [`fock_core`] (truncated oscillator operators and
//!    states), [`special_functions`] (stable scalar kernels),
//!    [`liouville`] (the dissipator, its invariants, and the slow-manifold
//!    projector), and [`error`] (shared error type).

pub mod analytic_rates;
pub mod error;
pub mod fock_core;
pub mod kerr_spectrum;
pub mod liouville;
pub mod special_functions;
pub mod spectral_extraction;

pub use error::{CoreError, Result};

/// Complex double-precision scalar used throughout the crate.
pub type C64 = num_complex::Complex64;
