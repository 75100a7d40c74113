//! Surfaces induced by a spinor, and their curvature.
//!
//! The coordinates come from line integrals of the closed one-forms
//!
//! ```text
//! d(X₁+iX₂) = 2i(ψ̄₁² dz − ψ̄₂² dz̄)
//! d(X₁−iX₂) = 2i(ψ₂² dz − ψ₁² dz̄)
//! dX₃       = −2(ψ̄₁ψ₂ dz + ψ₁ψ̄₂ dz̄)
//! ```
//!
//! integrated by the trapezoid rule along grid lines. A form `a dz + b dz̄`
//! contributes `(a + b) dx` along a row and `i(a − b) dy` along a column.
//! The induced metric is `4p²|dz|²`.

use std::io::Write as _;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::calculus::{partial_x, partial_xx, partial_xy, partial_y, partial_yy};
use crate::error::{Error, Result};
use crate::field::{ComplexField, RealField};
use crate::grid::GridSpec;
use crate::mesh::TriangleMesh;
use crate::report::{Component, ResidualReport};
use crate::weierstrass::{gaussian_curvature_from_p, MeanCurvature, SpinorField};

type C = Complex64;
type Triple = [C; 3];

const I: C = C::new(0.0, 1.0);
const ZERO: C = C::new(0.0, 0.0);

/// Order in which an L-shaped path visits the two axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathOrder {
    /// Along the basepoint's row, then up the target's column.
    RowFirst,
    /// Along the basepoint's column, then across the target's row.
    ColumnFirst,
}

/// An induced surface on a grid.
#[derive(Debug, Clone)]
pub struct Surface {
    grid: GridSpec,
    coords: [RealField; 3],
    basepoint: (usize, usize),
    imaginary_residue: f64,
    branch_consistency: f64,
    degenerate: bool,
}

impl Surface {
    /// Wraps explicit coordinate fields, for surfaces not built from a spinor.
    pub fn from_coordinates(coords: [RealField; 3], basepoint: (usize, usize)) -> Result<Self> {
        let grid = *coords[0].grid();
        if coords.iter().any(|c| c.grid() != &grid) {
            return Err(Error::GridMismatch);
        }
        Ok(Surface { grid, coords, basepoint, imaginary_residue: 0.0, branch_consistency: 0.0, degenerate: false })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn x1(&self) -> &RealField {
        &self.coords[0]
    }

    pub fn x2(&self) -> &RealField {
        &self.coords[1]
    }

    pub fn x3(&self) -> &RealField {
        &self.coords[2]
    }

    pub fn coordinates(&self) -> &[RealField; 3] {
        &self.coords
    }

    pub fn basepoint(&self) -> (usize, usize) {
        self.basepoint
    }

    /// Largest imaginary part left in any coordinate integral.
    pub fn imaginary_residue(&self) -> f64 {
        self.imaginary_residue
    }

    /// Largest `|(X₁+iX₂) − conj(X₁−iX₂)|`: the two determinations of `X₁, X₂`.
    pub fn branch_consistency(&self) -> f64 {
        self.branch_consistency
    }

    /// Set when the spinor vanishes identically and the surface is a point.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn mask(&self) -> Vec<bool> {
        (0..self.grid.len()).map(|k| self.coords.iter().any(|c| c.mask()[k])).collect()
    }

    pub fn points(&self) -> Vec<[f64; 3]> {
        (0..self.grid.len()).map(|k| self.coords.clone().map(|c| c.values()[k])).collect()
    }

    pub fn to_mesh(&self) -> Result<TriangleMesh> {
        TriangleMesh::from_grid(&self.grid, &self.points(), &self.mask())
    }
}

/// Row and column integrands of the three one-forms, `None` where masked.
struct Integrands {
    grid: GridSpec,
    along_x: Vec<Option<Triple>>,
    along_y: Vec<Option<Triple>>,
}

impl Integrands {
    fn new(s: &SpinorField) -> Self {
        let grid = *s.grid();
        let (f1, f2) = (s.psi1().samples(), s.psi2().samples());
        let pairs: Vec<Option<(Triple, Triple)>> = (0..grid.len())
            .into_par_iter()
            .map(|k| {
                if f1.is_masked(k) || f2.is_masked(k) {
                    return None;
                }
                let (p1, p2) = (f1.values()[k], f2.values()[k]);
                let a = [2.0 * I * p1.conj() * p1.conj(), 2.0 * I * p2 * p2, -2.0 * p1.conj() * p2];
                let b = [-2.0 * I * p2.conj() * p2.conj(), -2.0 * I * p1 * p1, -2.0 * p1 * p2.conj()];
                let gx = [0, 1, 2].map(|n| a[n] + b[n]);
                let gy = [0, 1, 2].map(|n| I * (a[n] - b[n]));
                Some((gx, gy))
            })
            .collect();
        let along_x = pairs.iter().map(|p| p.map(|(x, _)| x)).collect();
        let along_y = pairs.iter().map(|p| p.map(|(_, y)| y)).collect();
        Integrands { grid, along_x, along_y }
    }

    /// Trapezoid prefix sums along one grid line, outward from `start`.
    fn sweep(n: usize, start: usize, h: f64, init: Option<Triple>, at: impl Fn(usize) -> Option<Triple>) -> Vec<Option<Triple>> {
        let mut out = vec![None; n];
        out[start] = init.filter(|_| at(start).is_some());
        let step = |acc: Option<Triple>, from: usize, to: usize, sign: f64| -> Option<Triple> {
            let (acc, u, v) = (acc?, at(from)?, at(to)?);
            Some([0, 1, 2].map(|c| acc[c] + sign * 0.5 * h * (u[c] + v[c])))
        };
        for t in start + 1..n {
            out[t] = step(out[t - 1], t - 1, t, 1.0);
        }
        for t in (0..start).rev() {
            out[t] = step(out[t + 1], t + 1, t, -1.0);
        }
        out
    }

    fn integrate(&self, base: (usize, usize), order: PathOrder) -> Vec<Option<Triple>> {
        let g = self.grid;
        let (i0, j0) = base;
        let zero = Some([ZERO; 3]);
        let mut out = vec![None; g.len()];
        match order {
            PathOrder::RowFirst => {
                let row = Self::sweep(g.nx, i0, g.hx(), zero, |i| self.along_x[g.index(i, j0)]);
                let cols: Vec<Vec<Option<Triple>>> =
                    (0..g.nx).into_par_iter().map(|i| Self::sweep(g.ny, j0, g.hy(), row[i], |j| self.along_y[g.index(i, j)])).collect();
                for (i, col) in cols.into_iter().enumerate() {
                    for (j, v) in col.into_iter().enumerate() {
                        out[g.index(i, j)] = v;
                    }
                }
            }
            PathOrder::ColumnFirst => {
                let col = Self::sweep(g.ny, j0, g.hy(), zero, |j| self.along_y[g.index(i0, j)]);
                let rows: Vec<Vec<Option<Triple>>> =
                    (0..g.ny).into_par_iter().map(|j| Self::sweep(g.nx, i0, g.hx(), col[j], |i| self.along_x[g.index(i, j)])).collect();
                for (j, row) in rows.into_iter().enumerate() {
                    for (i, v) in row.into_iter().enumerate() {
                        out[g.index(i, j)] = v;
                    }
                }
            }
        }
        out
    }
}

fn check_point(grid: &GridSpec, p: (usize, usize), what: &str) -> Result<()> {
    if p.0 >= grid.nx || p.1 >= grid.ny {
        return Err(Error::Domain(format!("{what} ({}, {}) lies outside the {}x{} grid", p.0, p.1, grid.nx, grid.ny)));
    }
    Ok(())
}

/// `(X₁, X₂, X₃)` from the three complex integrals `(W, V, X₃)`.
fn coordinates_of(t: &Triple) -> Triple {
    [(t[0] + t[1]) / 2.0, (t[0] - t[1]) / (2.0 * I), t[2]]
}

/// Integrates the coordinate one-forms along L-paths from `basepoint`.
///
/// Points whose path crosses a masked sample are masked; if that leaves
/// only the basepoint, the call fails. The spinor is not checked against
/// the system here: a non-solution gives path-dependent coordinates.
pub fn induce_surface(s: &SpinorField, basepoint: (usize, usize)) -> Result<Surface> {
    induce_surface_along(s, basepoint, PathOrder::RowFirst)
}

pub fn induce_surface_along(s: &SpinorField, basepoint: (usize, usize), order: PathOrder) -> Result<Surface> {
    let grid = *s.grid();
    check_point(&grid, basepoint, "basepoint")?;
    let integrals = Integrands::new(s).integrate(basepoint, order);
    let reached = integrals.iter().filter(|v| v.is_some()).count();
    if reached == 0 || (reached == 1 && grid.len() > 1) {
        return Err(Error::Domain("every integration path from the basepoint crosses a masked point".into()));
    }
    let mut imaginary_residue = 0.0f64;
    let mut branch_consistency = 0.0f64;
    let mut vals: [Vec<f64>; 3] = Default::default();
    let mask: Vec<bool> = integrals.iter().map(Option::is_none).collect();
    for t in &integrals {
        let x = t.map(|t| {
            branch_consistency = branch_consistency.max((t[0] - t[1].conj()).norm());
            coordinates_of(&t)
        });
        for c in 0..3 {
            let v = x.map_or(0.0, |x| x[c].re);
            imaginary_residue = imaginary_residue.max(x.map_or(0.0, |x| x[c].im.abs()));
            vals[c].push(v);
        }
    }
    let coords = vals.map(|v| RealField::with_mask(grid, v, mask.clone()).expect("finite coordinates"));
    Ok(Surface { grid, coords, basepoint, imaginary_residue, branch_consistency, degenerate: s.is_zero() })
}

/// `|X(row-first path) − X(column-first path)|` at `target`, per coordinate.
pub fn path_independence_report(s: &SpinorField, basepoint: (usize, usize), target: (usize, usize)) -> Result<ResidualReport> {
    let grid = *s.grid();
    check_point(&grid, basepoint, "basepoint")?;
    check_point(&grid, target, "target")?;
    let forms = Integrands::new(s);
    let k = grid.index(target.0, target.1);
    let a = forms.integrate(basepoint, PathOrder::RowFirst)[k];
    let b = forms.integrate(basepoint, PathOrder::ColumnFirst)[k];
    let (a, b) = match (a, b) {
        (Some(a), Some(b)) => (coordinates_of(&a), coordinates_of(&b)),
        _ => return Err(Error::Domain("a path to the target crosses a masked point".into())),
    };
    let components = ["X1", "X2", "X3"]
        .iter()
        .zip(0..3)
        .map(|(name, c)| {
            let d = (a[c] - b[c]).norm();
            Component { name: name.to_string(), max_norm: d, l2_norm: d }
        })
        .collect();
    Ok(ResidualReport::from_components("path_independence", &grid, components, 0))
}

/// First and second fundamental forms and the unit normal, from finite
/// differences of the coordinates in `(x, y)`.
#[derive(Debug, Clone)]
pub struct FundamentalForms {
    grid: GridSpec,
    first: [RealField; 3],
    second: [RealField; 3],
    normal: [RealField; 3],
    degenerate_points: usize,
}

impl FundamentalForms {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// `E`, `F`, `G`.
    pub fn first(&self) -> &[RealField; 3] {
        &self.first
    }

    /// `e`, `f`, `g`, taken against [`normal`](Self::normal).
    pub fn second(&self) -> &[RealField; 3] {
        &self.second
    }

    pub fn normal(&self) -> &[RealField; 3] {
        &self.normal
    }

    /// Unmasked points where `EG − F² ≤ 0`; they are masked in every output.
    pub fn degenerate_points(&self) -> usize {
        self.degenerate_points
    }

    fn combine(&self, f: impl Fn([f64; 3], [f64; 3]) -> f64 + Sync) -> RealField {
        let g = self.grid;
        let at = |fields: &[RealField; 3], k: usize| [0, 1, 2].map(|c| fields[c].values()[k]);
        let mask: Vec<bool> = (0..g.len()).map(|k| self.first.iter().chain(&self.second).any(|c| c.mask()[k])).collect();
        let vals: Vec<f64> = (0..g.len()).into_par_iter().map(|k| if mask[k] { 0.0 } else { f(at(&self.first, k), at(&self.second, k)) }).collect();
        RealField::with_mask(g, vals, mask).expect("finite on unmasked points")
    }
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub fn fundamental_forms(srf: &Surface) -> Result<FundamentalForms> {
    let g = srf.grid;
    let xs = srf.coords.clone().map(|c| c.to_complex());
    let ops: [fn(&ComplexField) -> ComplexField; 5] = [partial_x, partial_y, partial_xx, partial_xy, partial_yy];
    let d: Vec<[ComplexField; 3]> = ops.iter().map(|op| [op(&xs[0]), op(&xs[1]), op(&xs[2])]).collect();
    let vec_at = |n: usize, k: usize| -> Option<[f64; 3]> {
        let f = &d[n];
        (!f.iter().any(|c| c.is_masked(k))).then(|| [f[0].values()[k].re, f[1].values()[k].re, f[2].values()[k].re])
    };
    let per_point: Vec<Option<([f64; 3], [f64; 3], [f64; 3])>> = (0..g.len())
        .into_par_iter()
        .map(|k| {
            let (xu, xv, xuu, xuv, xvv) = (vec_at(0, k)?, vec_at(1, k)?, vec_at(2, k)?, vec_at(3, k)?, vec_at(4, k)?);
            let (e, f, gg) = (dot(xu, xu), dot(xu, xv), dot(xv, xv));
            let det = e * gg - f * f;
            let cr = cross(xu, xv);
            let len = dot(cr, cr).sqrt();
            if !(det > 0.0) || !(len > 0.0) {
                return Some(([f64::NAN; 3], [0.0; 3], [0.0; 3]));
            }
            let n = cr.map(|v| v / len);
            Some(([e, f, gg], [dot(xuu, n), dot(xuv, n), dot(xvv, n)], n))
        })
        .collect();
    let mut degenerate_points = 0;
    let mask: Vec<bool> = per_point
        .iter()
        .map(|p| match p {
            None => true,
            Some((first, _, _)) if first[0].is_nan() => {
                degenerate_points += 1;
                true
            }
            _ => false,
        })
        .collect();
    let field = |pick: &dyn Fn(&([f64; 3], [f64; 3], [f64; 3])) -> f64| {
        let vals = per_point.iter().zip(&mask).map(|(p, &m)| if m { 0.0 } else { pick(p.as_ref().expect("unmasked")) }).collect();
        RealField::with_mask(g, vals, mask.clone()).expect("finite forms")
    };
    let first = [field(&|p| p.0[0]), field(&|p| p.0[1]), field(&|p| p.0[2])];
    let second = [field(&|p| p.1[0]), field(&|p| p.1[1]), field(&|p| p.1[2])];
    let normal = [field(&|p| p.2[0]), field(&|p| p.2[1]), field(&|p| p.2[2])];
    Ok(FundamentalForms { grid: g, first, second, normal, degenerate_points })
}

/// `(eG − 2fF + gE) / (2(EG − F²))`; its sign follows the normal.
pub fn mean_curvature_numeric(ff: &FundamentalForms) -> RealField {
    ff.combine(|[e, f, g], [l, m, n]| (l * g - 2.0 * m * f + n * e) / (2.0 * (e * g - f * f)))
}

/// `(eg − f²) / (EG − F²)`.
pub fn gauss_curvature_numeric(ff: &FundamentalForms) -> RealField {
    ff.combine(|[e, f, g], [l, m, n]| (l * n - m * m) / (e * g - f * f))
}

/// Compares `|H_num|` with `|H|`; the signed difference is attached as a
/// non-counting component since the normal's orientation is a convention.
pub fn mean_curvature_closure(ff: &FundamentalForms, h: &MeanCurvature) -> Result<ResidualReport> {
    let num = mean_curvature_numeric(ff).to_complex();
    let want = h.values().to_complex();
    let abs = num.zip_with(&want, |a, b| C::new(a.re.abs() - b.re.abs(), 0.0))?;
    let signed = num.zip_with(&want, |a, b| a - b)?;
    let signed_max = ResidualReport::from_fields("", &[("", &signed)]).max_norm;
    Ok(ResidualReport::from_fields("mean_curvature_closure", &[("abs_difference", &abs)]).with_scalar("signed_difference", signed_max, false))
}

/// `K_num − K` against a supplied Gaussian curvature.
pub fn gauss_curvature_difference(ff: &FundamentalForms, k: &RealField) -> Result<ResidualReport> {
    let diff = gauss_curvature_numeric(ff).to_complex().zip_with(&k.to_complex(), |a, b| a - b)?;
    Ok(ResidualReport::from_fields("gauss_curvature_consistency", &[("k_difference", &diff)]))
}

/// `K_num` against `−∂∂̄ ln p / p²` evaluated from the density samples.
pub fn gauss_curvature_consistency(ff: &FundamentalForms, p: &RealField) -> Result<ResidualReport> {
    gauss_curvature_difference(ff, &gaussian_curvature_from_p(p)?)
}

/// Surface Laplace–Beltrami operator `(1/√g) ∂ᵢ(√g gⁱʲ ∂ⱼ f)` with
/// central differences in `(x, y)`.
pub fn laplace_beltrami(ff: &FundamentalForms, f: &RealField) -> Result<RealField> {
    if f.grid() != &ff.grid {
        return Err(Error::GridMismatch);
    }
    let fc = f.to_complex();
    let (fx, fy) = (partial_x(&fc), partial_y(&fc));
    let [e, fm, g] = ff.first.clone().map(|c| c.to_complex());
    let sqrt_det = e.zip_with(&g, |e, g| e * g)?.zip_with(&fm, |eg, f| (eg - f * f).sqrt())?;
    // √g gⁱʲ = [[G, −F], [−F, E]] / √g
    let flux_x = g.zip_with(&fx, |g, fx| g * fx)?.zip_with(&fm.zip_with(&fy, |f, fy| f * fy)?, |a, b| a - b)?.zip_with(&sqrt_det, |a, s| a / s)?;
    let flux_y = e.zip_with(&fy, |e, fy| e * fy)?.zip_with(&fm.zip_with(&fx, |f, fx| f * fx)?, |a, b| a - b)?.zip_with(&sqrt_det, |a, s| a / s)?;
    let div = partial_x(&flux_x).zip_with(&partial_y(&flux_y), |a, b| a + b)?;
    Ok(div.zip_with(&sqrt_det, |d, s| d / s)?.real_part())
}

/// `−2γH + α(ΔH + 2H³ + RH)` with `R = −2K`.
pub fn rigid_string_residual(h: &RealField, k: &RealField, gamma: f64, alpha: f64, ff: &FundamentalForms) -> Result<ResidualReport> {
    let lap = laplace_beltrami(ff, h)?;
    let hc = h.to_complex();
    let res = hc
        .zip_with(&k.to_complex(), |h, k| -2.0 * gamma * h + alpha * (2.0 * h * h * h - 2.0 * k * h))?
        .zip_with(&lap.to_complex(), |r, l| r + alpha * l)?;
    Ok(ResidualReport::from_fields("rigid_string", &[("euler_lagrange", &res)]))
}

/// Writes the surface as an OBJ mesh and returns it.
pub fn export_mesh(srf: &Surface, path: impl AsRef<Path>) -> Result<TriangleMesh> {
    let mesh = srf.to_mesh()?;
    mesh.write_obj(path)?;
    Ok(mesh)
}

/// CSV rows `x,y,X1,X2,X3,H_num,K_num` for points unmasked in every column.
pub fn write_surface_csv(srf: &Surface, ff: &FundamentalForms, path: impl AsRef<Path>) -> Result<()> {
    let h = mean_curvature_numeric(ff);
    let k = gauss_curvature_numeric(ff);
    let g = srf.grid;
    let mask = srf.mask();
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "x,y,X1,X2,X3,H_num,K_num")?;
    for kk in 0..g.len() {
        if mask[kk] || h.mask()[kk] || k.mask()[kk] {
            continue;
        }
        let z = g.z(kk);
        let [a, b, c] = srf.coords.each_ref().map(|f| f.values()[kk]);
        writeln!(out, "{},{},{a},{b},{c},{},{}", z.re, z.im, h.values()[kk], k.values()[kk])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::DerivativeMode::Analytic;
    use crate::solutions::{family_exponential, family_rational, family_trigonometric};
    use crate::tolerance::convergence_ratio;
    use crate::weierstrass::{density_p, gaussian_curvature};

    fn sphere(r: f64, n: usize) -> Surface {
        let g = GridSpec::square(0.5, n).unwrap();
        let c = [
            RealField::from_fn(g, |u, v| r * u.cos() * v.cos()).unwrap(),
            RealField::from_fn(g, |u, v| r * u.sin() * v.cos()).unwrap(),
            RealField::from_fn(g, |_, v| r * v.sin()).unwrap(),
        ];
        Surface::from_coordinates(c, g.center()).unwrap()
    }

    fn plane(n: usize) -> Surface {
        let g = GridSpec::square(1.0, n).unwrap();
        let c = [RealField::from_fn(g, |x, _| x).unwrap(), RealField::from_fn(g, |_, y| y).unwrap(), RealField::constant(g, 0.0).unwrap()];
        Surface::from_coordinates(c, g.center()).unwrap()
    }

    #[test]
    fn zero_spinor_gives_a_point() {
        let g = GridSpec::square(1.0, 11).unwrap();
        let s = induce_surface(&SpinorField::zeros(&g), g.center()).unwrap();
        assert!(s.is_degenerate());
        assert!(s.coordinates().iter().all(|c| c.unmasked().all(|v| v == 0.0)));
        assert!(fundamental_forms(&s).unwrap().degenerate_points() > 0);
    }

    #[test]
    fn rational_height_matches_antiderivative() {
        let err = |n: usize| {
            let g = GridSpec::square(1.0, n).unwrap();
            let f = family_rational(1.0).unwrap();
            let srf = induce_surface(&f.spinor(&g).unwrap(), g.center()).unwrap();
            assert!(srf.imaginary_residue() < 1e-10);
            assert!(srf.branch_consistency() < 1e-12);
            let j = g.center().1;
            (0..g.nx)
                .map(|i| {
                    let s = 2.0 * g.x(i);
                    (srf.x3().get(i, j) + (1.0 + s * s).ln()).abs()
                })
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(51), err(101));
        assert!(e2 < 1e-3, "{e2}");
        let r = convergence_ratio(e1, e2).unwrap();
        assert!((3.5..4.5).contains(&r), "{r}");
    }

    #[test]
    fn paths_agree_for_solutions_and_not_for_perturbations() {
        let f = family_rational(1.0).unwrap();
        let disc = |n: usize| {
            // ρ = λz has path errors that do not cancel by symmetry
            let g = GridSpec::square(1.0, n).unwrap();
            let hol = crate::solutions::family_by_name("holomorphic", &Default::default()).unwrap();
            let target = g.nearest(1.0, 0.5).unwrap();
            path_independence_report(&hol.spinor(&g).unwrap(), g.center(), target).unwrap().max_norm
        };
        let r = convergence_ratio(disc(41), disc(81)).unwrap();
        assert!((3.5..4.5).contains(&r), "{r}");
        let g = GridSpec::square(1.0, 101).unwrap();
        let s = f.spinor(&g).unwrap();
        let target = (g.nx - 1, g.ny - 1);
        assert!(path_independence_report(&s, (0, 0), target).unwrap().max_norm < 1e-3);
        assert_eq!(path_independence_report(&s, (3, 4), (3, 4)).unwrap().max_norm, 0.0);
        let bad = s.perturbed(Complex64::new(0.01, 0.0)).unwrap();
        assert!(path_independence_report(&bad, (0, 0), target).unwrap().max_norm > 1e-2);
    }

    #[test]
    fn plane_and_sphere_oracles() {
        let ff = fundamental_forms(&plane(21)).unwrap();
        for k in 0..ff.grid().len() {
            assert!((ff.first()[0].values()[k] - 1.0).abs() < 1e-12 && ff.first()[1].values()[k].abs() < 1e-12);
            assert!(ff.second().iter().all(|s| s.values()[k].abs() < 1e-12));
        }
        assert!(mean_curvature_numeric(&ff).unmasked().all(|v| v.abs() < 1e-12));
        let ff = fundamental_forms(&sphere(2.0, 81)).unwrap();
        let h = mean_curvature_numeric(&ff);
        let k = gauss_curvature_numeric(&ff);
        assert!(h.unmasked().all(|v| (v.abs() - 0.5).abs() < 1e-3));
        assert!(k.unmasked().all(|v| (v - 0.25).abs() < 2e-3));
        let unit = fundamental_forms(&sphere(1.0, 81)).unwrap();
        assert!(gauss_curvature_numeric(&unit).unmasked().all(|v| (v - 1.0).abs() < 5e-3));
    }

    #[test]
    fn rigid_string_controls() {
        let ff = fundamental_forms(&plane(21)).unwrap();
        let zero = RealField::constant(*ff.grid(), 0.0).unwrap();
        for (gamma, alpha) in [(1.0, 1.0), (0.0, 2.0), (3.0, 0.0)] {
            assert!(rigid_string_residual(&zero, &zero, gamma, alpha, &ff).unwrap().max_norm < 1e-12);
        }
        // sphere of radius 2: residual = −2γH = ±1 for γ = α = 1
        let ff = fundamental_forms(&sphere(2.0, 81)).unwrap();
        let h = mean_curvature_numeric(&ff);
        let k = gauss_curvature_numeric(&ff);
        let r = rigid_string_residual(&h, &k, 1.0, 1.0, &ff).unwrap();
        assert!((r.max_norm - 1.0).abs() < 1e-2, "{}", r.max_norm);
    }

    #[test]
    fn rational_curvature_closes() {
        let g = GridSpec::square(1.0, 101).unwrap();
        let f = family_rational(1.0).unwrap();
        let s = f.spinor(&g).unwrap();
        let ff = fundamental_forms(&induce_surface(&s, g.center()).unwrap()).unwrap();
        assert_eq!(ff.degenerate_points(), 0);
        let h = f.mean_curvature(&g).unwrap();
        assert!(mean_curvature_closure(&ff, &h).unwrap().max_norm < 4e-3);
        assert!(gaussian_curvature(&s, Analytic).unwrap().unmasked().all(|v| v.abs() < 1e-12));
        assert!(gauss_curvature_consistency(&ff, &density_p(&s)).unwrap().max_norm < 4e-3);
    }

    #[test]
    fn trig_curvature_converges() {
        let err = |n: usize| {
            let f = family_trigonometric(1.0).unwrap();
            let g = GridSpec::new(0.05, 0.6, -0.5, 0.5, n, n).unwrap();
            let s = f.spinor(&g).unwrap();
            let ff = fundamental_forms(&induce_surface(&s, g.center()).unwrap()).unwrap();
            let k = gaussian_curvature(&s, Analytic).unwrap();
            (gauss_curvature_difference(&ff, &k).unwrap().max_norm, mean_curvature_closure(&ff, &f.mean_curvature(&g).unwrap()).unwrap().max_norm)
        };
        // p ≡ |A| makes both curvatures vanish; the mean curvature carries the rate
        let ((k1, h1), (k2, h2)) = (err(41), err(81));
        assert!(k1 < 1e-10 && k2 < 1e-10, "{k1} {k2}");
        let r = convergence_ratio(h1, h2).unwrap();
        assert!((3.5..4.5).contains(&r), "{r}");
    }

    #[test]
    fn exponential_mesh_round_trip() {
        let g = GridSpec::square(1.0, 101).unwrap();
        let srf = induce_surface(&family_exponential(1.0).unwrap().spinor(&g).unwrap(), g.center()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.obj");
        let mesh = export_mesh(&srf, &path).unwrap();
        assert_eq!(mesh.vertices.len(), 10201);
        assert_eq!(mesh.faces.len(), 2 * 100 * 100);
        let back = TriangleMesh::read_obj(&path).unwrap();
        assert_eq!(back, mesh);
        let again = dir.path().join("t.obj");
        export_mesh(&srf, &again).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&again).unwrap());
        let ff = fundamental_forms(&srf).unwrap();
        let csv = dir.path().join("s.csv");
        write_surface_csv(&srf, &ff, &csv).unwrap();
        assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 10202);
    }
}
