//! Evaluates the rigid string Euler-Lagrange expression
//! −2γH + α(ΔH + 2H³ + RH) on induced surfaces. A sphere solves it with
//! γ = 0 for any α; the rational family's cylinder-like surface does not.
//!
//!     cargo run --release --example rigid_string

use weierstrass_sigma::inducer::{fundamental_forms, gauss_curvature_numeric, induce_surface, mean_curvature_numeric, rigid_string_residual};
use weierstrass_sigma::solutions::{family_by_kind, FamilyKind, FamilyParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for kind in [FamilyKind::Holomorphic, FamilyKind::Rational] {
        let family = family_by_kind(kind, &FamilyParams::default())?;
        let grid = family.default_domain(101, 101)?;
        let ff = fundamental_forms(&induce_surface(&family.spinor(&grid)?, grid.center())?)?;
        let h = family.mean_curvature(&grid)?.values();
        let k = gauss_curvature_numeric(&ff);
        println!("{kind}: |H_num| in [{:.3}, {:.3}]", mean_curvature_numeric(&ff).min(), mean_curvature_numeric(&ff).max());
        for (gamma, alpha) in [(0.0, 1.0), (1.0, 1.0), (1.0, 0.0)] {
            let r = rigid_string_residual(&h, &k, gamma, alpha, &ff)?;
            println!("  gamma={gamma} alpha={alpha}: residual {:.2e}", r.max_norm);
        }
    }
    Ok(())
}
