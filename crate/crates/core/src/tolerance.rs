//! Residual tolerances.
//!
//! Analytic residuals are held to [`EXACT`]. Finite-difference residuals
//! are held to `tol(h) = scale · h²`. Each suite has its own scale, ten
//! times the largest `residual / h²` measured for it over the calibration
//! set on a 101×101 grid (see the `calibrate_tolerance` example).
//! [`TOL_SCALE`] is the largest of these and serves residuals without an
//! entry.

use serde::{Deserialize, Serialize};

/// Bound for residuals evaluated with exact derivatives.
pub const EXACT: f64 = 1e-12;

/// Default `tol(h) / h²`.
pub const TOL_SCALE: f64 = 50.0;

/// Pinned `tol(h) / h²` per suite.
pub const SUITE_SCALES: &[(&str, f64)] = &[
    ("conservation_laws", 21.0),
    ("dbar_current_defect", 7.3),
    ("deformed_landau_lifshitz", 320.0),
    ("gauss_curvature_consistency", 27.0),
    ("landau_lifshitz", 320.0),
    ("linear_system", 30.0),
    ("linearization_constraints", 11.0),
    ("mean_curvature_closure", 54.0),
    ("modified_current", 54.0),
    ("multisoliton_product", 13000.0),
    ("path_independence", 1.0),
    ("potential_compatibility", 80.0),
    ("sigma_model", 160.0),
    ("sinh_gordon", 20.0),
    // a variance, zero for every solution pair; any O(1) spread fails
    ("unimodular_h_constancy", 1.0),
    ("weierstrass_system", 20.0),
];

/// The pinned scale for a suite, or [`TOL_SCALE`] if it has none.
pub fn suite_scale(name: &str) -> f64 {
    SUITE_SCALES.iter().find(|(n, _)| *n == name).map_or(TOL_SCALE, |(_, s)| *s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub scale: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { scale: TOL_SCALE }
    }
}

impl Tolerance {
    pub fn new(scale: f64) -> Self {
        Tolerance { scale }
    }

    pub fn for_suite(name: &str) -> Self {
        Tolerance { scale: suite_scale(name) }
    }

    /// `10 · c_est`, with `c_est = residual / h²` measured on a coarse grid.
    pub fn calibrated(residual: f64, h: f64) -> Self {
        Tolerance { scale: 10.0 * residual / (h * h) }
    }

    /// Multiplies the scale, as the CLI's `--tol-scale` does.
    pub fn scaled(self, factor: f64) -> Self {
        Tolerance { scale: self.scale * factor }
    }

    pub fn at(&self, h: f64) -> f64 {
        self.scale * h * h
    }
}

/// `tol(h)` with the default scale.
pub fn tol(h: f64) -> f64 {
    Tolerance::default().at(h)
}

/// Observed convergence ratio `coarse / fine`; `None` when both are at
/// rounding level and the ratio carries no information.
pub fn convergence_ratio(coarse: f64, fine: f64) -> Option<f64> {
    if coarse < 1e-13 && fine < 1e-13 {
        None
    } else {
        Some(coarse / fine)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_scaling() {
        let t = Tolerance::new(2.0);
        assert!((t.at(0.1) - 0.02).abs() < 1e-15);
        assert!((t.at(0.05) * 4.0 - t.at(0.1)).abs() < 1e-15);
        assert!((Tolerance::calibrated(0.01, 0.1).scale - 10.0).abs() < 1e-12);
    }

    #[test]
    fn ratio_at_rounding_level_is_none() {
        assert_eq!(convergence_ratio(1e-16, 2e-16), None);
        assert_eq!(convergence_ratio(4e-3, 1e-3), Some(4.0));
    }
}
