//! Spin-matrix form of the sigma model: the Landau-Lifshitz equation for
//! unimodular solutions, its deformation for varying H, and products of
//! unimodular solutions.
//!
//!     cargo run --release --example landau_lifshitz

use weierstrass_sigma::calculus::DerivativeMode::FiniteDifference;
use weierstrass_sigma::grid::GridSpec;
use weierstrass_sigma::sigma::{
    deformed_ll_residual, landau_lifshitz_residual, multisoliton_product, sigma_residual, spin_matrix, unimodular_h_constancy_check,
};
use weierstrass_sigma::solutions::{family_rational, family_unimodular};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = GridSpec::square(1.0, 101)?;
    let one = family_unimodular(1.0, 1.0)?;
    let two = family_unimodular(2.0, 1.0)?;
    let s = spin_matrix(&one.rho(&grid)?, FiniteDifference)?;
    println!("unimodular: S algebra defect {:.1e}, [S, ddS] {:.2e}", s.algebra_defect(), landau_lifshitz_residual(&s).max_norm);

    let product = multisoliton_product(&one.rho(&grid)?, &two.rho(&grid)?)?;
    let h0 = one.mean_curvature(&grid)?;
    println!(
        "product of lambda = 1 and 2: sigma residual {:.2e}, ||rho| - 1| {:.1e}",
        sigma_residual(&product, &h0, FiniteDifference)?.max_norm,
        product.unimodularity_defect()
    );

    let rational = family_rational(1.0)?;
    let (r, h) = (rational.rho(&grid)?, rational.mean_curvature(&grid)?);
    println!("rational: deformed residual {:.2e}", deformed_ll_residual(&r, &h, FiniteDifference)?.max_norm);
    println!("rational: undeformed residual {:.2e}", landau_lifshitz_residual(&spin_matrix(&r, FiniteDifference)?).max_norm);
    println!(
        "unimodular rho with varying H: H variance {:.3}",
        unimodular_h_constancy_check(&one.rho(&grid)?, &h, FiniteDifference)?.max_norm
    );
    Ok(())
}
