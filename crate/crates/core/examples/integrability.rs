//! Classifies mean curvature profiles: H built from a holomorphic Q passes
//! ∂∂̄(1/H) = 0 and admits Riccati coefficients with small zero-curvature
//! defect; the rational family's H does not.
//!
//!     cargo run --release --example integrability

use weierstrass_sigma::calculus::DerivativeMode::{Analytic, FiniteDifference};
use weierstrass_sigma::grid::GridSpec;
use weierstrass_sigma::integrability::{fit_riccati, h_from_q, h_integrability_residual, riccati_residual, zero_curvature_residual, HolomorphicProfile};
use weierstrass_sigma::sigma::psi_from_rho;
use weierstrass_sigma::solutions::family_rational;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = GridSpec::square(1.0, 81)?;
    let profiles: [(&str, HolomorphicProfile); 3] = [
        ("1 + z^2/4", HolomorphicProfile::from_fn(|z| 1.0 + *z * *z * 0.25)?),
        ("exp z", HolomorphicProfile::from_fn(|z| z.exp())?),
        ("cosh z", HolomorphicProfile::from_fn(|z| z.cosh())?),
    ];
    for (name, q) in &profiles {
        let h = h_from_q(q, &grid)?;
        println!("Q = {name:<10} d dbar(1/H): analytic {:.1e}, fd {:.1e}", h_integrability_residual(&h, Analytic)?.max_norm, h_integrability_residual(&h.sampled_only(), FiniteDifference)?.max_norm);
    }
    let rational = family_rational(1.0)?;
    let h = rational.mean_curvature(&grid)?;
    println!("rational H      d dbar(1/H): {:.3}", h_integrability_residual(&h, Analytic)?.max_norm);

    let rho = rational.rho(&grid)?;
    let coeffs = fit_riccati(&rho, Analytic)?;
    println!(
        "rational rho: Riccati fit defect {:.1e}, zero-curvature defect {:.1e}",
        riccati_residual(&rho, &coeffs, Analytic)?.max_norm,
        zero_curvature_residual(&coeffs, FiniteDifference)?.max_norm
    );
    let spinor = psi_from_rho(&rho, &h)?;
    println!("psi(rho) density at the centre {:.6}", spinor.psi1().samples().get(40, 40).norm_sqr() + spinor.psi2().samples().get(40, 40).norm_sqr());
    Ok(())
}
