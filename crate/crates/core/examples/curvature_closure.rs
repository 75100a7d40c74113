//! Recovers H and K from the induced surface's fundamental forms and
//! compares them with the prescribed H and with K = −∂∂̄ ln p / p² under
//! grid refinement.
//!
//!     cargo run --release --example curvature_closure

use weierstrass_sigma::inducer::{fundamental_forms, gauss_curvature_consistency, induce_surface, mean_curvature_closure};
use weierstrass_sigma::solutions::{family_by_kind, FamilyKind, FamilyParams};
use weierstrass_sigma::weierstrass::density_p;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for kind in FamilyKind::ALL {
        let family = family_by_kind(kind, &FamilyParams::default())?;
        let mut previous: Option<f64> = None;
        for n in [51, 101, 201] {
            let grid = family.default_domain(n, n)?;
            let spinor = family.spinor(&grid)?;
            let ff = fundamental_forms(&induce_surface(&spinor, grid.center())?)?;
            let h = mean_curvature_closure(&ff, &family.mean_curvature(&grid)?)?.max_norm;
            let k = gauss_curvature_consistency(&ff, &density_p(&spinor))?.max_norm;
            let ratio = previous.map_or(String::new(), |p| format!("  ratio {:.2}", p / h));
            println!("{kind:<12} n={n:<4} |H_num - H| {h:.2e}  |K_num - K| {k:.2e}{ratio}");
            previous = Some(h);
        }
    }
    Ok(())
}
