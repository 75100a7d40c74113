//! The current J = ψ̄₁∂ψ₂ − ψ₂∂ψ̄₁: its ∂̄ defect, the conserved modified
//! current, the sinh-Gordon equation for p and the linear system of the
//! constant-density families.
//!
//!     cargo run --release --example currents

use weierstrass_sigma::calculus::DerivativeMode::{Analytic, FiniteDifference};
use weierstrass_sigma::integrability::{current_modulus_identity, linear_system_residual, linearization_constraint_residual, sinh_gordon_residual};
use weierstrass_sigma::solutions::{family_by_kind, FamilyKind, FamilyParams};
use weierstrass_sigma::weierstrass::{dbar_j_defect, modified_current, potential_conservation_residual};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for kind in FamilyKind::ALL {
        let family = family_by_kind(kind, &FamilyParams::default())?;
        let grid = family.default_domain(101, 101)?;
        let (s, h) = (family.spinor(&grid)?, family.mean_curvature(&grid)?);
        println!("{kind}");
        println!("  conservation laws      {:.2e}", potential_conservation_residual(&s, FiniteDifference)?.max_norm);
        println!("  dbar J defect          {:.2e}", dbar_j_defect(&s, &h, FiniteDifference)?.max_norm);
        let x0 = grid.x(grid.center().0);
        println!("  modified current       {:.2e}", modified_current(&s, &h, x0, FiniteDifference)?.report.max_norm);
        println!("  sinh-Gordon            {:.2e}", sinh_gordon_residual(&s, &h, FiniteDifference)?.max_norm);
        if let Some(p0) = family.constant_density() {
            println!("  |J|^2 - p^4 H^2        {:.2e}", current_modulus_identity(&s, &h, Analytic)?.max_norm);
            println!("  constraints            {:.2e}", linearization_constraint_residual(&s, FiniteDifference)?.max_norm);
            println!("  linear system (p0={p0}) {:.2e}", linear_system_residual(&s, &h, p0, FiniteDifference)?.max_norm);
        }
    }
    Ok(())
}
