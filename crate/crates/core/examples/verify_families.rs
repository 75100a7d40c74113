//! Runs every verification suite on every family at two refinement levels
//! and prints the finest residual, its tolerance and the convergence ratio.
//!
//!     cargo run --release --example verify_families [n]

use weierstrass_sigma::solutions::{family_by_kind, FamilyKind, FamilyParams};
use weierstrass_sigma::suites::{run_verification, VerifyPlan};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(51);
    let mut failures = 0;
    for kind in FamilyKind::ALL {
        let family = family_by_kind(kind, &FamilyParams::default())?;
        let grid = family.default_domain(n, n)?;
        println!("{kind}: {}x{} on [{}, {}] x [{}, {}]", grid.nx, grid.ny, grid.x_min, grid.x_max, grid.y_min, grid.y_max);
        for o in run_verification(&VerifyPlan::new(family, grid))? {
            let level = o.finest();
            let ratio = o.convergence_ratios.iter().flatten().last().map_or("-".to_string(), |r| format!("{r:.2}"));
            println!(
                "  {} {:<28} {:>10.3e}  tol {:>9}  ratio {ratio}",
                if o.passed { "ok  " } else { "FAIL" },
                o.suite,
                level.map_or(f64::NAN, |l| l.max_norm),
                level.and_then(|l| l.tolerance).map_or("-".to_string(), |t| format!("{t:.2e}")),
            );
            failures += usize::from(!o.passed);
        }
    }
    println!("{failures} failing suites");
    Ok(())
}
