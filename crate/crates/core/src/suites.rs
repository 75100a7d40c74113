//! Verification suites over a solution family.
//!
//! A suite is one named residual. Finite-difference suites run on every
//! refinement level and must stay within `tol(h)` while shrinking by at
//! least [`MIN_RATIO`] per halving of `h`; exact suites use analytic
//! derivatives on the base grid; informational suites record a value
//! without a verdict.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calculus::DerivativeMode::{self, Analytic, FiniteDifference};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::inducer::{fundamental_forms, gauss_curvature_consistency, induce_surface, mean_curvature_closure, path_independence_report};
use crate::integrability::{current_modulus_identity, h_integrability_residual, linear_system_residual, linearization_constraint_residual, sinh_gordon_residual};
use crate::report::{Component, GridMeta, ResidualReport};
use crate::sigma::{
    deformed_ll_residual, landau_lifshitz_residual, multisoliton_product, prop10_compatibility_residual, psi_from_rho, rho_from_psi,
    sigma_residual, spin_matrix, unimodular_h_constancy_check, RhoField,
};
use crate::solutions::{family_unimodular, FamilyKind, SolutionFamily};
use crate::tolerance::{Tolerance, EXACT};
use crate::weierstrass::{dbar_j_defect, density_p, modified_current, potential_conservation_residual, weierstrass_residual, MeanCurvature, SpinorField};

/// Smallest acceptable `coarse / fine` ratio for an `O(h²)` residual.
pub const MIN_RATIO: f64 = 2.5;

/// Residuals below this are treated as rounding noise and exempt from the
/// ratio test.
pub const RATIO_FLOOR: f64 = 1e-9;

/// Bound for the algebraic identity `|J|² = p⁴H²`, whose terms are quartic.
pub const IDENTITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "bound")]
pub enum Check {
    FiniteDifference,
    Exact(f64),
    Info,
}

/// The samples and closed forms a suite reads on one grid.
pub struct SuiteInput<'a> {
    pub family: &'a SolutionFamily,
    pub grid: GridSpec,
    pub basepoint: (usize, usize),
    pub spinor: SpinorField,
    pub h: MeanCurvature,
    pub rho: RhoField,
}

impl<'a> SuiteInput<'a> {
    pub fn new(family: &'a SolutionFamily, grid: GridSpec, basepoint: Option<(f64, f64)>) -> Result<Self> {
        let basepoint = match basepoint {
            None => grid.center(),
            Some((x, y)) => grid.nearest(x, y).ok_or_else(|| Error::Domain(format!("basepoint ({x}, {y}) outside the domain")))?,
        };
        Ok(SuiteInput { family, grid, basepoint, spinor: family.spinor(&grid)?, h: family.mean_curvature(&grid)?, rho: family.rho(&grid)? })
    }
}

type SuiteFn = fn(&SuiteInput, DerivativeMode) -> Result<ResidualReport>;

pub struct Suite {
    pub name: &'static str,
    pub check: Check,
    run: SuiteFn,
}

impl Suite {
    pub fn run(&self, input: &SuiteInput, mode: DerivativeMode) -> Result<ResidualReport> {
        (self.run)(input, mode)
    }
}

fn fd(name: &'static str, run: SuiteFn) -> Suite {
    Suite { name, check: Check::FiniteDifference, run }
}

fn summary(name: &str, grid: &GridSpec, parts: Vec<ResidualReport>) -> ResidualReport {
    let masked = parts.iter().map(|r| r.masked_points).max().unwrap_or(0);
    let comps = parts.into_iter().map(|r| Component { name: r.name, max_norm: r.max_norm, l2_norm: r.l2_norm }).collect();
    ResidualReport::from_components(name, grid, comps, masked)
}

fn exact_identities(i: &SuiteInput, _: DerivativeMode) -> Result<ResidualReport> {
    let parts = vec![
        weierstrass_residual(&i.spinor, &i.h, Analytic)?,
        sigma_residual(&i.rho, &i.h, Analytic)?,
        potential_conservation_residual(&i.spinor, Analytic)?,
        dbar_j_defect(&i.spinor, &i.h, Analytic)?,
    ];
    Ok(summary("exact_identities", &i.grid, parts))
}

fn transform_round_trip(i: &SuiteInput, _: DerivativeMode) -> Result<ResidualReport> {
    let back = psi_from_rho(&i.rho, &i.h)?;
    let rho = rho_from_psi(&i.spinor)?;
    let diff = |a: &crate::field::ComplexField, b: &crate::field::ComplexField| a.zip_with(b, |x, y| x - y);
    let d1 = diff(back.psi1().samples(), i.spinor.psi1().samples())?;
    let d2 = diff(back.psi2().samples(), i.spinor.psi2().samples())?;
    let dr = diff(rho.values(), i.rho.values())?;
    let mut r = ResidualReport::from_fields("transform_round_trip", &[("psi1_from_rho", &d1), ("psi2_from_rho", &d2), ("rho_from_psi", &dr)]);
    let sig = sigma_residual(&rho, &i.h, Analytic)?;
    r = r.with_scalar("sigma_of_rho_from_psi", sig.max_norm, true);
    Ok(r.with_scalar("system_of_psi_from_rho", weierstrass_residual(&back, &i.h, Analytic)?.max_norm, true))
}

fn require_density(i: &SuiteInput) -> Result<f64> {
    i.family.constant_density().ok_or_else(|| Error::Precondition("family has no constant density".into()))
}

fn path_target(g: &GridSpec) -> (usize, usize) {
    g.nearest(g.x_max, g.y_min + 0.75 * (g.y_max - g.y_min)).expect("inside")
}

/// The suites that apply to a family.
pub fn suites_for(family: &SolutionFamily) -> Vec<Suite> {
    let mut v = vec![
        Suite { name: "exact_identities", check: Check::Exact(EXACT), run: exact_identities },
        Suite { name: "transform_round_trip", check: Check::Exact(EXACT), run: transform_round_trip },
        fd("weierstrass_system", |i, m| weierstrass_residual(&i.spinor, &i.h, m)),
        fd("sigma_model", |i, m| sigma_residual(&i.rho, &i.h, m)),
        fd("conservation_laws", |i, m| potential_conservation_residual(&i.spinor, m)),
        fd("dbar_current_defect", |i, m| dbar_j_defect(&i.spinor, &i.h, m)),
        fd("modified_current", |i, m| Ok(modified_current(&i.spinor, &i.h, i.grid.x(i.basepoint.0), m)?.report)),
        fd("sinh_gordon", |i, m| sinh_gordon_residual(&i.spinor, &i.h, m)),
        fd("deformed_landau_lifshitz", |i, m| deformed_ll_residual(&i.rho, &i.h, m)),
        fd("path_independence", |i, _| path_independence_report(&i.spinor, i.basepoint, path_target(&i.grid))),
        fd("mean_curvature_closure", |i, _| {
            let srf = induce_surface(&i.spinor, i.basepoint)?;
            mean_curvature_closure(&fundamental_forms(&srf)?, &i.h)
        }),
        fd("gauss_curvature_consistency", |i, _| {
            let srf = induce_surface(&i.spinor, i.basepoint)?;
            gauss_curvature_consistency(&fundamental_forms(&srf)?, &density_p(&i.spinor))
        }),
        Suite { name: "h_integrability", check: Check::Info, run: |i, _| h_integrability_residual(&i.h, Analytic) },
    ];
    if family.constant_density().is_some() {
        v.push(Suite {
            name: "current_modulus_identity",
            check: Check::Exact(IDENTITY_TOL),
            run: |i, _| current_modulus_identity(&i.spinor, &i.h, Analytic),
        });
        v.push(fd("linearization_constraints", |i, m| {
            require_density(i)?;
            linearization_constraint_residual(&i.spinor, m)
        }));
        v.push(fd("linear_system", |i, m| linear_system_residual(&i.spinor, &i.h, require_density(i)?, m)));
    }
    if family.kind() == FamilyKind::Unimodular {
        v.push(fd("landau_lifshitz", |i, m| Ok(landau_lifshitz_residual(&spin_matrix(&i.rho, m)?))));
        v.push(fd("unimodular_h_constancy", |i, m| unimodular_h_constancy_check(&i.rho, &i.h, m)));
        v.push(fd("multisoliton_product", |i, m| {
            let p = i.family.params();
            let other = family_unimodular(2.0 * p.lambda, p.h0)?.rho(&i.grid)?;
            let prod = multisoliton_product(&i.rho, &other)?;
            Ok(sigma_residual(&prod, &i.h, m)?.with_scalar("unimodularity", prod.unimodularity_defect(), true))
        }));
        v.push(fd("potential_compatibility", |i, m| prop10_compatibility_residual(&i.rho, &i.h, m)));
    }
    v
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelResult {
    pub grid: GridMeta,
    pub h: f64,
    pub max_norm: f64,
    pub l2_norm: f64,
    pub tolerance: Option<f64>,
    pub passed: bool,
    pub report: ResidualReport,
}

/// The outcome of one suite across refinement levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteOutcome {
    pub suite: String,
    pub family: String,
    pub check: Check,
    pub levels: Vec<LevelResult>,
    pub convergence_ratios: Vec<Option<f64>>,
    pub passed: bool,
    pub failure: Option<String>,
}

impl SuiteOutcome {
    pub fn finest(&self) -> Option<&LevelResult> {
        self.levels.last()
    }
}

/// A verification run: a family on a base grid and its refinements.
#[derive(Debug, Clone)]
pub struct VerifyPlan {
    pub family: SolutionFamily,
    pub grid: GridSpec,
    pub levels: usize,
    /// Multiplies every suite's tolerance scale.
    pub tol_multiplier: f64,
    pub basepoint: Option<(f64, f64)>,
}

impl VerifyPlan {
    pub fn new(family: SolutionFamily, grid: GridSpec) -> Self {
        VerifyPlan { family, grid, levels: 2, tol_multiplier: 1.0, basepoint: None }
    }

    pub fn grids(&self) -> Vec<GridSpec> {
        std::iter::successors(Some(self.grid), |g| Some(g.refined())).take(self.levels.max(1)).collect()
    }
}

fn evaluate(suite: &Suite, plan: &VerifyPlan, inputs: &[SuiteInput]) -> SuiteOutcome {
    let mut levels = Vec::new();
    let mut failure = None;
    let used: &[SuiteInput] = match suite.check {
        Check::FiniteDifference => inputs,
        _ => &inputs[..1],
    };
    for input in used {
        match suite.run(input, FiniteDifference) {
            Ok(report) => {
                let h = input.grid.h();
                let tolerance = match suite.check {
                    Check::FiniteDifference => Some(Tolerance::for_suite(suite.name).scaled(plan.tol_multiplier).at(h)),
                    Check::Exact(b) => Some(b),
                    Check::Info => None,
                };
                let passed = tolerance.is_none_or(|t| report.passes(t));
                if !passed && failure.is_none() {
                    failure = Some(format!("residual {:.3e} exceeds tolerance {:.3e} on {}x{}", report.max_norm, tolerance.unwrap_or(0.0), input.grid.nx, input.grid.ny));
                }
                levels.push(LevelResult { grid: (&input.grid).into(), h, max_norm: report.max_norm, l2_norm: report.l2_norm, tolerance, passed, report });
            }
            Err(e) => {
                failure.get_or_insert_with(|| format!("{e} on {}x{}", input.grid.nx, input.grid.ny));
                break;
            }
        }
    }
    let convergence_ratios: Vec<Option<f64>> = levels
        .windows(2)
        .map(|w| if w[0].max_norm < RATIO_FLOOR && w[1].max_norm < RATIO_FLOOR { None } else { Some(w[0].max_norm / w[1].max_norm) })
        .collect();
    if failure.is_none() && suite.check == Check::FiniteDifference {
        if let Some(r) = convergence_ratios.iter().flatten().find(|r| !(**r >= MIN_RATIO)) {
            failure = Some(format!("convergence ratio {r:.2} below {MIN_RATIO}"));
        }
    }
    SuiteOutcome {
        suite: suite.name.to_string(),
        family: plan.family.name().to_string(),
        check: suite.check,
        passed: failure.is_none(),
        levels,
        convergence_ratios,
        failure,
    }
}

/// Runs every applicable suite on every level. Suites run in parallel on
/// the current rayon pool; the result order matches [`suites_for`].
pub fn run_verification(plan: &VerifyPlan) -> Result<Vec<SuiteOutcome>> {
    let inputs: Vec<SuiteInput> = plan.grids().into_iter().map(|g| SuiteInput::new(&plan.family, g, plan.basepoint)).collect::<Result<_>>()?;
    let suites = suites_for(&plan.family);
    Ok(suites.par_iter().map(|s| evaluate(s, plan, &inputs)).collect())
}

/// Writes one pretty-printed JSON file per suite into `dir`.
pub fn write_outcomes(outcomes: &[SuiteOutcome], dir: &Path, meta: &serde_json::Value) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for o in outcomes {
        let mut doc = serde_json::to_value(o).map_err(|e| Error::Parse(e.to_string()))?;
        if let (Some(obj), Some(m)) = (doc.as_object_mut(), meta.as_object()) {
            for (k, v) in m {
                obj.insert(k.clone(), v.clone());
            }
        }
        let text = serde_json::to_string_pretty(&doc).map_err(|e| Error::Parse(e.to_string()))?;
        std::fs::write(dir.join(format!("{}.json", o.suite)), text + "\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solutions::{family_by_kind, FamilyParams};

    #[test]
    fn every_family_has_ten_suites_and_passes_on_a_small_grid() {
        for kind in FamilyKind::ALL {
            let f = family_by_kind(kind, &FamilyParams::default()).unwrap();
            let g = f.default_domain(41, 41).unwrap();
            let plan = VerifyPlan::new(f, g);
            let out = run_verification(&plan).unwrap();
            assert!(out.len() >= 10, "{kind}: {}", out.len());
            for o in &out {
                assert!(o.passed, "{kind} {}: {:?}", o.suite, o.failure);
            }
        }
    }

    #[test]
    fn degenerate_family_fails_by_name() {
        let f = family_unimodular(0.0, 1.0).unwrap();
        let plan = VerifyPlan::new(f, GridSpec::square(1.0, 21).unwrap());
        let out = run_verification(&plan).unwrap();
        assert!(out.iter().any(|o| !o.passed && o.suite == "transform_round_trip"));
    }
}
