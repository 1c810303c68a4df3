//! Exact computation of both sides of the degree/Fourier-coefficient identity
//! for special divisors on CM moduli attached to biquadratic CM fields
//! `K = Q(√D, √Δ)`.
//!
//! - [`numberfield`]: exact field, ideal and character arithmetic.
//! - [`arithmetic`]: the geometric side (ideal counts, Diff sets, degrees).
//! - [`analytic`]: the Eisenstein side (Whittaker factors, Fourier coefficients).
//! - [`verify`]: brute-force oracles and the identity harness.
//! - [`cli`]: configuration and batch output.

pub mod analytic;
pub mod arithmetic;
pub mod cli;
pub mod error;
pub mod numberfield;
pub mod verify;

pub use error::{Error, Result};
