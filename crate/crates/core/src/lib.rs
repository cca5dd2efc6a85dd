//! Bayesian dynamic equilibria of parallel Vickrey fluid queues with
//! stochastic travel times, and (approximately) optimal public signaling.
//!
//! A system of `m` parallel links with deterministic capacities and
//! scenario-dependent travel times receives flow at a constant rate.
//! Users hold a common belief over the `d` scenarios and split across
//! links in a dynamic equilibrium with respect to expected travel times.
//! A system operator who knows the realized scenario commits to a public
//! signaling scheme (equivalently, a convex decomposition of the prior)
//! to steer the induced beliefs.
//!
//! The crate computes, in exact rational arithmetic:
//!
//! * the canonical equilibrium (entry times, inflows, queue lengths),
//! * throughput and makespan objectives as functions of the belief,
//! * hyperplane arrangements on the belief simplex and their cells,
//! * a multiplicative FPTAS for throughput signaling (exact LP over a
//!   non-uniform net) returning an explicit scheme,
//! * an additive PTAS via a Lagrangian dual, the ellipsoid method and an
//!   exact separation oracle,
//! * an independent concave-envelope oracle for two-scenario instances.
//!
//! Floating point is confined to the ellipsoid iteration and to envelope
//! tangency roots (which can be irrational); every oracle verdict and
//! every objective value at a rational belief is exact.

// index loops mirror the matrix algebra throughout the numeric kernels
#![allow(clippy::needless_range_loop)]

pub mod arrangement;
pub mod cli;
pub mod dualptas;
pub mod equilibrium;
pub mod fptas;
pub mod model;
pub mod objectives;
pub mod oracle;
pub mod simplex;

pub use model::{Belief, Instance, Rational};
