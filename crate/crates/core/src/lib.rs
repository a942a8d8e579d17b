//! First Robin eigenvalue of the p-Laplacian and its `p → 1` limit.
//!
//! For a domain Ω, `p > 1` and a Robin parameter β the crate computes
//!
//! ```text
//! λ(Ω,p,β) = min  (∫_Ω |∇u|^p + β ∫_∂Ω |u|^p) / ∫_Ω |u|^p
//! Λ(Ω,β)   = inf  (|Du|(Ω) + min(β,1) ∫_∂Ω |u|) / ∫_Ω |u|      (u ∈ BV)
//! ```
//!
//! together with Cheeger constants and the set functional
//! `R(E,β) = (P_Ω(E) + min(β,1) H¹(∂E ∩ ∂Ω)) / |E|`.
//!
//! * [`geometry`]: parametric domains, exact measures, rasterization.
//! * [`radial`]: balls in any dimension (shooting for `p > 1`, closed forms at `p = 1`).
//! * [`eigensolver`]: grid minimization of the p-Rayleigh quotient.
//! * [`bvlimit`]: the `p = 1` problem, level sets, Cheeger constants, blow-up for `β < -1`.
//! * [`analysis`]: sweeps and inequality checks built on the above.
//! * [`io`]: text formats (masks, CSV dumps).

pub mod analysis;
pub mod bvlimit;
pub mod eigensolver;
pub mod error;
mod flow;
pub mod geometry;
pub mod io;
pub mod radial;

pub use error::{Error, Result};
pub use geometry::{rasterize, DomainSpec, GridDomain};

/// `min(β, 1)`, the effective boundary weight in the `p = 1` functional.
pub fn beta_hat(beta: f64) -> f64 {
    beta.min(1.0)
}

/// `max(1, β)`.
pub fn beta_tilde(beta: f64) -> f64 {
    beta.max(1.0)
}
