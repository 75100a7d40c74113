//! Integrates the inducing one-forms for a family and writes the surface
//! as an OBJ mesh plus a per-vertex CSV.
//!
//!     cargo run --release --example induce_mesh [family] [out-dir]

use std::path::PathBuf;

use weierstrass_sigma::inducer::{export_mesh, fundamental_forms, induce_surface, write_surface_csv};
use weierstrass_sigma::solutions::{family_by_name, FamilyParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "holomorphic".into());
    let dir = args.next().map(PathBuf::from).unwrap_or_else(std::env::temp_dir);
    let family = family_by_name(&name, &FamilyParams::default())?;
    let grid = family.default_domain(81, 81)?;
    let spinor = family.spinor(&grid)?;
    let surface = induce_surface(&spinor, grid.center())?;
    let obj = dir.join(format!("{name}.obj"));
    let mesh = export_mesh(&surface, &obj)?;
    write_surface_csv(&surface, &fundamental_forms(&surface)?, dir.join(format!("{name}.csv")))?;
    let (lo, hi) = mesh.vertices.iter().fold(([f64::INFINITY; 3], [f64::NEG_INFINITY; 3]), |(mut lo, mut hi), v| {
        for k in 0..3 {
            lo[k] = lo[k].min(v[k]);
            hi[k] = hi[k].max(v[k]);
        }
        (lo, hi)
    });
    println!("{} vertices, {} triangles -> {}", mesh.vertices.len(), mesh.faces.len(), obj.display());
    println!("bounding box {lo:.3?} .. {hi:.3?}");
    println!("imaginary residue {:.2e}, branch consistency {:.2e}", surface.imaginary_residue(), surface.branch_consistency());
    Ok(())
}
