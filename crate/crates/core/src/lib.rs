//! Surfaces with prescribed mean curvature from the generalized Weierstrass
//! system, the sigma model for ρ = ψ₁/ψ̄₂, and residual checks of their
//! conservation laws, integrability structure and closed-form solutions.
//!
//! Fields live on rectangular grids ([`grid::GridSpec`]). Closed-form inputs
//! ([`closed_form::ClosedForm`]) carry exact Wirtinger derivatives through
//! Taylor jets; sampled inputs use second-order finite differences. Every
//! check returns a [`report::ResidualReport`] whose interior max-norm is
//! compared against `scale · h²` ([`tolerance`]).
//!
//! ```
//! use weierstrass_sigma::calculus::DerivativeMode::Analytic;
//! use weierstrass_sigma::grid::GridSpec;
//! use weierstrass_sigma::solutions::family_rational;
//! use weierstrass_sigma::weierstrass::weierstrass_residual;
//!
//! let family = family_rational(1.0).unwrap();
//! let grid = GridSpec::square(1.0, 21).unwrap();
//! let (psi, h) = (family.spinor(&grid).unwrap(), family.mean_curvature(&grid).unwrap());
//! assert!(weierstrass_residual(&psi, &h, Analytic).unwrap().max_norm < 1e-12);
//! ```

pub mod calculus;
pub mod closed_form;
pub mod error;
pub mod field;
pub mod grid;
pub mod jet;
pub mod report;
pub mod tolerance;
pub mod weierstrass;
pub mod sigma;
pub mod integrability;
pub mod solutions;
pub mod mesh;
pub mod inducer;
pub mod suites;
pub mod config;
pub mod cli;
