//! Exact-arithmetic simulation of unipotent torus skew products, segmented
//! multiplicative sieves, and the correlation/decay statistics built on top
//! of them.
//!
//! The numeric ground rules, shared by every module:
//!
//! * **Torus coordinates are exact.** Points live on the dyadic grid
//!   `2^-64 Z / Z` ([`torus::Frac64`]); the skew-product dynamics uses only
//!   wrapping integer arithmetic, so stepping, jumping ahead via binomial
//!   coefficients, and powers of the map agree bit-for-bit. Real inputs are
//!   rounded exactly once, on construction.
//! * **Arithmetic weights are reproducible.** Multiplicative functions are
//!   sieved per segment with factors combined in ascending-prime order, so a
//!   value never depends on how a range was cut ([`arith`]).
//! * **Floating-point reductions are deterministic.** Averages accumulate in
//!   fixed 1024-term chunks combined pairwise; parallel workers own
//!   contiguous chunk runs, so every statistic is byte-identical for every
//!   worker count ([`reduce`], [`stats`]).
//!
//! On top sit the symbolic quasi-eigenfunction calculus ([`quasi`]) and the
//! orbit-switching counterexample streams ([`models`]).

pub mod arith;
pub mod models;
pub mod quasi;
pub mod real;
pub mod reduce;
pub mod stats;
pub mod torus;
