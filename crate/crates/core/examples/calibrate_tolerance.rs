//! Measures `residual / h²` for every finite-difference suite over the
//! calibration set (each family at default parameters, plus the
//! unimodular family at λ = 2) and prints the per-suite scale, ten times
//! the largest constant seen.
//!
//!     cargo run --release --example calibrate_tolerance [n]

use std::collections::BTreeMap;

use weierstrass_sigma::solutions::{family_by_kind, FamilyKind, FamilyParams};
use weierstrass_sigma::suites::{run_verification, Check, VerifyPlan};
use weierstrass_sigma::tolerance::suite_scale;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(101);
    let mut set: Vec<(FamilyKind, FamilyParams)> = FamilyKind::ALL.iter().map(|&k| (k, FamilyParams::default())).collect();
    set.push((FamilyKind::Unimodular, FamilyParams { lambda: 2.0, ..Default::default() }));
    let mut worst: BTreeMap<String, (f64, String)> = BTreeMap::new();
    for (kind, params) in set {
        let family = family_by_kind(kind, &params)?;
        let grid = family.default_domain(n, n)?;
        let mut plan = VerifyPlan::new(family, grid);
        plan.levels = 1;
        for o in run_verification(&plan)? {
            if o.check != Check::FiniteDifference {
                continue;
            }
            let Some(level) = o.finest() else {
                println!("{kind} λ={} {:<28} error: {}", params.lambda, o.suite, o.failure.unwrap_or_default());
                continue;
            };
            let c = level.max_norm / (level.h * level.h);
            let entry = worst.entry(o.suite.clone()).or_insert((0.0, String::new()));
            if c >= entry.0 {
                *entry = (c, format!("{kind} λ={}", params.lambda));
            }
        }
    }
    println!("{:<28} {:>12} {:>12} {:>12}  worst case", "suite", "c_max", "10 c_max", "pinned");
    for (suite, (c, at)) in &worst {
        println!("{suite:<28} {c:>12.4e} {:>12.4e} {:>12.4e}  {at}", 10.0 * c, suite_scale(suite));
    }
    Ok(())
}
