//! The ρ-representation of the spinor system.
//!
//! `ρ = ψ₁/ψ̄₂` turns the first-order system into the modified sigma model
//!
//! ```text
//! ∂∂̄ρ − 2ρ̄(1+|ρ|²)⁻¹ ∂ρ ∂̄ρ = ∂̄(ln H) ∂ρ
//! ```
//!
//! and back again through
//! `ψ₂ = ε(∂ρ)^{1/2} / (H^{1/2}(1+|ρ|²))`, `ψ₁ = ρ·conj((∂ρ)^{1/2}) / (H^{1/2}(1+|ρ|²))·ε`.
//! Taking the conjugate root in `ψ₁` keeps `ψ₁/ψ̄₂ = ρ` exact on every branch.
//!
//! The spin matrix `S` built from ρ solves `[S, ∂∂̄S] = 0` for constant `H`
//! and the deformed equation `[S, ∂∂̄S] + ℛℋ = 0` in general, with
//!
//! ```text
//! ℛ = 4/(1+|ρ|²)² [[−ρ̄∂ρ, ρ∂̄ρ̄], [∂ρ, ρ²∂̄ρ̄]]
//! ℋ = [[∂̄ln H, ρ̄∂̄ln H], [∂ln H, −ρ⁻¹∂ln H]]
//! ```

use std::collections::VecDeque;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::calculus::{self, map_jets, DerivativeMode, Field, JetField};
use crate::closed_form::ClosedForm;
use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::grid::GridSpec;
use crate::jet::Jet;
use crate::report::ResidualReport;
use crate::weierstrass::{MeanCurvature, SpinorField};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `|ρ|` below which `1/ρ` is treated as singular.
pub const RHO_FLOOR: f64 = 1e-8;
/// `|∂ρ|` below which the root in the inverse transform is masked.
const DRHO_FLOOR: f64 = 1e-14;
/// Allowed deviation of `|ρ|` from one for unimodular inputs.
pub const UNIMODULAR_TOL: f64 = 1e-10;

pub type Mat2 = [[Complex64; 2]; 2];

/// ρ together with the branch sign ε of the inverse transform.
#[derive(Debug, Clone)]
pub struct RhoField {
    field: Field,
    eps: f64,
}

impl RhoField {
    pub fn new(field: Field) -> Self {
        RhoField { field, eps: 1.0 }
    }

    pub fn from_closed_form(cf: ClosedForm, grid: &GridSpec) -> Result<Self> {
        Ok(Self::new(Field::from_closed_form(cf, grid)?))
    }

    pub fn from_samples(samples: ComplexField) -> Self {
        Self::new(Field::from_samples(samples))
    }

    /// Sets ε; only the sign of `eps` is used.
    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = if eps < 0.0 { -1.0 } else { 1.0 };
        self
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn values(&self) -> &ComplexField {
        self.field.samples()
    }

    pub fn grid(&self) -> &GridSpec {
        self.field.grid()
    }

    pub fn jets(&self, mode: DerivativeMode) -> Result<JetField> {
        self.field.jets(mode)
    }

    pub fn sampled_only(&self) -> Self {
        RhoField { field: self.field.sampled_only(), eps: self.eps }
    }

    /// Largest `||ρ| − 1|` over unmasked samples.
    pub fn unimodularity_defect(&self) -> f64 {
        self.values()
            .values()
            .iter()
            .zip(self.values().mask())
            .filter(|(_, m)| !**m)
            .map(|(v, _)| (v.norm() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    fn require_unimodular(&self) -> Result<()> {
        let d = self.unimodularity_defect();
        if d > UNIMODULAR_TOL {
            return Err(Error::Precondition(format!("ρ is not unimodular: max ||ρ| − 1| = {d:e}")));
        }
        Ok(())
    }
}

fn combine_closed_forms(
    a: &ClosedForm,
    b: &ClosedForm,
    depth: usize,
    f: impl Fn(Jet, Jet) -> Jet + Send + Sync + 'static,
) -> Result<ClosedForm> {
    let (fa, fb) = (a.jet_fn()?, b.jet_fn()?);
    Ok(ClosedForm::derived(depth, move |z| f(fa(z), fb(z))).with_guard_of(a).with_guard_of(b))
}

/// `ρ = ψ₁/ψ̄₂`; zeros of `ψ₂` are masked.
pub fn rho_from_psi(s: &SpinorField) -> Result<RhoField> {
    if s.psi2().samples().max_abs() == 0.0 {
        return Err(Error::Domain("ψ₂ vanishes identically; ρ undefined".into()));
    }
    let samples = s.psi1().samples().zip_with(s.psi2().samples(), |a, b| a / b.conj())?;
    let exact = match (s.psi1().exact(), s.psi2().exact()) {
        (Some(a), Some(b)) if a.has_derivatives() && b.has_derivatives() => {
            let depth = a.depth().max(b.depth());
            let b_val = b.clone();
            let cf = combine_closed_forms(a, b, depth, |a, b| a / b.conj())?
                .with_guard(move |z| b_val.value(z).norm() > 0.0);
            Some(cf)
        }
        _ => None,
    };
    Ok(RhoField::new(Field::from_parts(samples, exact)))
}

/// Flips signs of `roots` along a breadth-first sweep from the unmasked
/// point nearest the grid centre so that neighbouring roots stay close.
/// Returns the sign applied at every point.
fn continue_branch(grid: &GridSpec, roots: &[Complex64], mask: &[bool]) -> Vec<f64> {
    let mut sign = vec![1.0; grid.len()];
    let mut seen = mask.to_vec();
    let (ci, cj) = grid.center();
    let start = (0..grid.len())
        .filter(|&k| !mask[k])
        .min_by_key(|&k| {
            let (i, j) = grid.coords(k);
            i.abs_diff(ci) + j.abs_diff(cj)
        });
    let Some(start) = start else { return sign };
    // single sequential pass; later components start fresh
    let mut order: Vec<usize> = vec![start];
    order.extend((0..grid.len()).filter(|&k| !mask[k] && k != start));
    for seed in order {
        if seen[seed] {
            continue;
        }
        seen[seed] = true;
        let mut queue = VecDeque::from([seed]);
        while let Some(k) = queue.pop_front() {
            let (i, j) = grid.coords(k);
            let here = roots[k] * sign[k];
            let mut nbrs = [None; 4];
            if i > 0 {
                nbrs[0] = Some(grid.index(i - 1, j));
            }
            if i + 1 < grid.nx {
                nbrs[1] = Some(grid.index(i + 1, j));
            }
            if j > 0 {
                nbrs[2] = Some(grid.index(i, j - 1));
            }
            if j + 1 < grid.ny {
                nbrs[3] = Some(grid.index(i, j + 1));
            }
            for nb in nbrs.into_iter().flatten() {
                if seen[nb] {
                    continue;
                }
                seen[nb] = true;
                if (roots[nb] + here).norm() < (roots[nb] - here).norm() {
                    sign[nb] = -1.0;
                }
                queue.push_back(nb);
            }
        }
    }
    sign
}

/// The inverse transform from ρ and `H` to the spinor.
///
/// With closed forms for both inputs the result carries exact derivatives;
/// otherwise `∂ρ` comes from finite differences. In both cases the sampled
/// root is branch-continued across the grid. Differencing the sampled result
/// again is first order in the rows next to the edge.
pub fn psi_from_rho(r: &RhoField, h: &MeanCurvature) -> Result<SpinorField> {
    if r.grid() != h.grid() {
        return Err(Error::GridMismatch);
    }
    h.require_positive()?;
    let grid = *r.grid();
    let eps = r.eps;
    let (drho, exact) = match (r.field.exact(), h.field().exact()) {
        (Some(rc), Some(hc)) if rc.has_derivatives() && hc.has_derivatives() => {
            let drho_cf = rc.dz()?;
            let drho = drho_cf.sample(&grid)?.masked_where(r.values().mask());
            let depth = (rc.depth() + 1).max(hc.depth());
            let guard_d = drho_cf.clone();
            let guard_h = hc.clone();
            let guard = move |z: Complex64| guard_d.value(z).norm() > DRHO_FLOOR && guard_h.value(z).re > 0.0;
            let scale = move |rho: &Jet, h: &Jet| h.sqrt() * (1.0 + rho.norm_sqr());
            let guard2 = guard.clone();
            let psi2 = combine_closed_forms(rc, hc, depth, move |rho, h| eps * rho.dz().sqrt() / scale(&rho, &h))?
                .with_guard(guard);
            let psi1 = combine_closed_forms(rc, hc, depth, move |rho, h| eps * rho * rho.dz().sqrt().conj() / scale(&rho, &h))?
                .with_guard(guard2);
            (drho, Some((psi1, psi2)))
        }
        _ => (calculus::d_z(r.values()), None),
    };
    let hv = h.field().samples();
    let (mut p1, mut p2) = (Vec::with_capacity(grid.len()), Vec::with_capacity(grid.len()));
    let mut roots = Vec::with_capacity(grid.len());
    let mut mask = Vec::with_capacity(grid.len());
    for k in 0..grid.len() {
        let masked = drho.is_masked(k) || hv.is_masked(k) || r.values().is_masked(k) || drho.values()[k].norm() <= DRHO_FLOOR;
        mask.push(masked);
        roots.push(if masked { ZERO } else { drho.values()[k].sqrt() });
    }
    let sign = continue_branch(&grid, &roots, &mask);
    for k in 0..grid.len() {
        if mask[k] {
            p1.push(ZERO);
            p2.push(ZERO);
            continue;
        }
        let rho = r.values().values()[k];
        let root = roots[k] * sign[k];
        let denom = hv.values()[k].re.sqrt() * (1.0 + rho.norm_sqr());
        p2.push(eps * root / denom);
        p1.push(eps * rho * root.conj() / denom);
    }
    let p1 = ComplexField::with_mask(grid, p1, mask.clone())?;
    let p2 = ComplexField::with_mask(grid, p2, mask)?;
    let (e1, e2) = match exact {
        Some((a, b)) => (Some(a), Some(b)),
        None => (None, None),
    };
    SpinorField::new(Field::from_parts(p1, e1), Field::from_parts(p2, e2))
}

fn sigma_lhs(rho: &Jet, h: &Jet) -> Complex64 {
    let r = rho.value();
    let (d, db) = (rho.d(), rho.dbar());
    rho.d_dbar() - 2.0 * r.conj() / (1.0 + r.norm_sqr()) * d * db - h.dbar() / h.value() * d
}

/// Residual of the sigma-model equation and its conjugate.
pub fn sigma_residual_fields(r: &RhoField, h: &MeanCurvature, mode: DerivativeMode) -> Result<[ComplexField; 2]> {
    if r.grid() != h.grid() {
        return Err(Error::GridMismatch);
    }
    h.require_positive()?;
    let rho = r.jets(mode)?;
    let hj = h.jets(mode)?;
    map_jets([&rho, &hj], |[rho, h]| [sigma_lhs(rho, h), sigma_lhs(&rho.conj(), h)])
}

pub fn sigma_residual(r: &RhoField, h: &MeanCurvature, mode: DerivativeMode) -> Result<ResidualReport> {
    let [a, b] = sigma_residual_fields(r, h, mode)?;
    Ok(ResidualReport::from_fields("sigma_model", &[("rho_equation", &a), ("conj_rho_equation", &b)]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Symmetry {
    /// `ρ → −ρ`
    Z2,
    /// `ρ → 1/ρ`
    Inversion,
}

/// Applies a discrete symmetry of the sigma model. Under inversion the
/// zeros of ρ (`|ρ| < RHO_FLOOR`) are masked.
pub fn apply_discrete_symmetry(r: &RhoField, which: Symmetry) -> Result<RhoField> {
    let (samples, exact) = match which {
        Symmetry::Z2 => {
            let exact = r.field.exact().map(|cf| {
                let f = cf.clone();
                ClosedForm::derived(cf.depth(), move |z| -f.apply(z)).with_guard_of(cf)
            });
            (r.values().map(|v| -v), exact)
        }
        Symmetry::Inversion => {
            let small: Vec<bool> = r.values().values().iter().map(|v| v.norm() < RHO_FLOOR).collect();
            let samples = r.values().clone().masked_where(&small).map(|v| 1.0 / v);
            let exact = r.field.exact().map(|cf| {
                let f = cf.clone();
                let g = cf.clone();
                ClosedForm::derived(cf.depth(), move |z| f.apply(z).recip())
                    .with_guard_of(cf)
                    .with_guard(move |z| g.admits(z) && g.value(z).norm() >= RHO_FLOOR)
            });
            (samples, exact)
        }
    };
    Ok(RhoField { field: Field::from_parts(samples, exact), eps: r.eps })
}

/// `S` and `∂∂̄S` at every grid point.
#[derive(Debug, Clone)]
pub struct SpinMatrix {
    grid: GridSpec,
    s: Vec<Mat2>,
    dd: Vec<Mat2>,
    mask: Vec<bool>,
}

fn spin_entries(rho: &Jet) -> [Jet; 4] {
    let n = 1.0 + rho.norm_sqr();
    let m = rho.norm_sqr();
    let s11 = (1.0 - m) / n;
    let s12 = 2.0 * rho.conj() / n;
    let s21 = 2.0 * *rho / n;
    [s11, s12, s21, -s11]
}

impl SpinMatrix {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn at(&self, k: usize) -> Option<Mat2> {
        (!self.mask[k]).then(|| self.s[k])
    }

    pub fn dd_at(&self, k: usize) -> Option<Mat2> {
        (!self.mask[k]).then(|| self.dd[k])
    }

    /// Largest deviation from Hermiticity, tracelessness and `S² = I`.
    pub fn algebra_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for k in (0..self.s.len()).filter(|&k| !self.mask[k]) {
            let s = self.s[k];
            let herm = (s[0][1] - s[1][0].conj())
                .norm()
                .max(s[0][0].im.abs())
                .max(s[1][1].im.abs());
            let trace = (s[0][0] + s[1][1]).norm();
            let sq = mat_mul(&s, &s);
            let inv = (sq[0][0] - ONE).norm().max((sq[1][1] - ONE).norm()).max(sq[0][1].norm()).max(sq[1][0].norm());
            worst = worst.max(herm).max(trace).max(inv);
        }
        worst
    }

    /// `[S, ∂∂̄S]` entry fields.
    pub fn commutator(&self) -> [ComplexField; 4] {
        let mats: Vec<Mat2> = (0..self.s.len()).map(|k| mat_commutator(&self.s[k], &self.dd[k])).collect();
        entry_fields(&self.grid, &mats, &self.mask)
    }
}

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut c = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

fn mat_commutator(a: &Mat2, b: &Mat2) -> Mat2 {
    let (ab, ba) = (mat_mul(a, b), mat_mul(b, a));
    [[ab[0][0] - ba[0][0], ab[0][1] - ba[0][1]], [ab[1][0] - ba[1][0], ab[1][1] - ba[1][1]]]
}

fn entry_fields(grid: &GridSpec, mats: &[Mat2], mask: &[bool]) -> [ComplexField; 4] {
    std::array::from_fn(|e| {
        let (i, j) = (e / 2, e % 2);
        let vals = mats.iter().map(|m| m[i][j]).collect();
        ComplexField::with_mask(*grid, vals, mask.to_vec()).expect("finite entries")
    })
}

/// `S = (1+|ρ|²)⁻¹ [[1−|ρ|², 2ρ̄], [2ρ, −1+|ρ|²]]` with `∂∂̄S`.
pub fn spin_matrix(r: &RhoField, mode: DerivativeMode) -> Result<SpinMatrix> {
    let rho = r.jets(mode)?;
    let [a, b, c, d, da, db, dc, dd] = map_jets([&rho], |[rho]| {
        let e = spin_entries(rho);
        [e[0].value(), e[1].value(), e[2].value(), e[3].value(), e[0].d_dbar(), e[1].d_dbar(), e[2].d_dbar(), e[3].d_dbar()]
    })?;
    let grid = *r.grid();
    let mask = a.mask().to_vec();
    let s = (0..grid.len()).map(|k| [[a.values()[k], b.values()[k]], [c.values()[k], d.values()[k]]]).collect();
    let dd = (0..grid.len()).map(|k| [[da.values()[k], db.values()[k]], [dc.values()[k], dd.values()[k]]]).collect();
    Ok(SpinMatrix { grid, s, dd, mask })
}

const ENTRY_NAMES: [&str; 4] = ["entry_11", "entry_12", "entry_21", "entry_22"];

/// Max-norm of `[S, ∂∂̄S]` over the grid.
pub fn landau_lifshitz_residual(s: &SpinMatrix) -> ResidualReport {
    let c = s.commutator();
    let named: Vec<(&str, &ComplexField)> = ENTRY_NAMES.iter().copied().zip(c.iter()).collect();
    ResidualReport::from_fields("landau_lifshitz", &named)
}

/// `ℛ` and `ℋ` at one point. `ℋ` needs `|ρ| ≥ RHO_FLOOR`.
pub fn deformation_matrices(rho: &Jet, h: &Jet) -> Option<(Mat2, Mat2)> {
    let r = rho.value();
    if r.norm() < RHO_FLOOR {
        return None;
    }
    let n = 1.0 + r.norm_sqr();
    let k = 4.0 / (n * n);
    let (d, dbb) = (rho.d(), rho.conj().dbar());
    let big_r = [[-k * r.conj() * d, k * r * dbb], [k * d, k * r * r * dbb]];
    let (a, b) = (h.dbar() / h.value(), h.d() / h.value());
    let big_h = [[a, r.conj() * a], [b, -b / r]];
    Some((big_r, big_h))
}

/// `[S, ∂∂̄S] + ℛℋ`; points with `|ρ| < RHO_FLOOR` are masked.
pub fn deformed_ll_fields(r: &RhoField, h: &MeanCurvature, mode: DerivativeMode) -> Result<[ComplexField; 4]> {
    if r.grid() != h.grid() {
        return Err(Error::GridMismatch);
    }
    h.require_positive()?;
    let rho = r.jets(mode)?;
    let hj = h.jets(mode)?;
    map_jets([&rho, &hj], |[rho, h]| {
        let Some((big_r, big_h)) = deformation_matrices(rho, h) else {
            return [Complex64::new(f64::NAN, 0.0); 4];
        };
        let e = spin_entries(rho);
        let s = [[e[0].value(), e[1].value()], [e[2].value(), e[3].value()]];
        let dd = [[e[0].d_dbar(), e[1].d_dbar()], [e[2].d_dbar(), e[3].d_dbar()]];
        let c = mat_commutator(&s, &dd);
        let rh = mat_mul(&big_r, &big_h);
        [c[0][0] + rh[0][0], c[0][1] + rh[0][1], c[1][0] + rh[1][0], c[1][1] + rh[1][1]]
    })
}

pub fn deformed_ll_residual(r: &RhoField, h: &MeanCurvature, mode: DerivativeMode) -> Result<ResidualReport> {
    let c = deformed_ll_fields(r, h, mode)?;
    let named: Vec<(&str, &ComplexField)> = ENTRY_NAMES.iter().copied().zip(c.iter()).collect();
    Ok(ResidualReport::from_fields("deformed_landau_lifshitz", &named))
}

/// Pointwise product of two unimodular solutions.
pub fn multisoliton_product(r1: &RhoField, r2: &RhoField) -> Result<RhoField> {
    if r1.grid() != r2.grid() {
        return Err(Error::GridMismatch);
    }
    r1.require_unimodular()?;
    r2.require_unimodular()?;
    let samples = r1.values().zip_with(r2.values(), |a, b| a * b)?;
    let exact = match (r1.field.exact(), r2.field.exact()) {
        (Some(a), Some(b)) if a.has_derivatives() && b.has_derivatives() => {
            Some(combine_closed_forms(a, b, a.depth().max(b.depth()), |a, b| a * b)?)
        }
        _ => None,
    };
    Ok(RhoField { field: Field::from_parts(samples, exact), eps: r1.eps })
}

/// For a unimodular ρ: the grid variance of `H` (the top-level norm) and
/// the sigma-model residual as a diagnostic component. A solution pair
/// must have constant `H`, so a variance above tolerance flags the pair
/// as inconsistent.
pub fn unimodular_h_constancy_check(r: &RhoField, h: &MeanCurvature, mode: DerivativeMode) -> Result<ResidualReport> {
    r.require_unimodular()?;
    let variance = h.values().variance();
    let sigma = sigma_residual(r, h, mode)?;
    let grid = *r.grid();
    Ok(ResidualReport::from_components("unimodular_h_constancy", &grid, vec![], sigma.masked_points)
        .with_scalar("h_variance", variance, true)
        .with_scalar("sigma_model", sigma.max_norm, false))
}

/// `∂̄q/q − ∂H/H` with `q = ∂ρ/ρ`, the cross-derivative condition for a
/// potential φ with `∂φ = ln(∂ ln ρ)`, `∂̄φ = ln H`. Points where `|q|` is
/// tiny are masked.
pub fn prop10_compatibility_residual(r: &RhoField, h: &MeanCurvature, mode: DerivativeMode) -> Result<ResidualReport> {
    r.require_unimodular()?;
    h.require_positive()?;
    let rho = r.jets(mode)?;
    let hj = h.jets(mode)?;
    let [res] = map_jets([&rho, &hj], |[rho, h]| {
        let q = rho.dz() / rho.truncate(rho.order() - 1);
        if q.value().norm() < RHO_FLOOR {
            return [Complex64::new(f64::NAN, 0.0)];
        }
        [q.dbar() / q.value() - h.d() / h.value()]
    })?;
    Ok(ResidualReport::from_fields("potential_compatibility", &[("compatibility", &res)]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tolerance::EXACT;
    use crate::weierstrass::weierstrass_residual;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn grid(n: usize) -> GridSpec {
        GridSpec::square(1.0, n).unwrap()
    }

    fn s_of(lam: f64) -> impl Fn(&Jet) -> Jet + Clone {
        move |z: &Jet| (*z + z.conj()) * lam
    }

    fn rational(lam: f64, g: &GridSpec) -> (RhoField, MeanCurvature) {
        let s = s_of(lam);
        let s2 = s.clone();
        let rho = RhoField::from_closed_form(ClosedForm::new(move |z| s(z)), g).unwrap();
        let h = MeanCurvature::from_closed_form(ClosedForm::new(move |z| (1.0 + s2(z) * s2(z)).recip()), g).unwrap();
        (rho, h)
    }

    fn unimodular(lam: f64, g: &GridSpec) -> RhoField {
        RhoField::from_closed_form(ClosedForm::new(move |z| ((*z + z.conj()) * c(0.0, lam)).exp()), g).unwrap()
    }

    #[test]
    fn psi_from_rho_point_values() {
        let g = GridSpec::new(-1.0, 1.0, -1.0, 1.0, 3, 3).unwrap();
        let (rho, h) = rational(1.0, &g);
        for eps in [1.0, -1.0] {
            let s = psi_from_rho(&rho.clone().with_eps(eps), &h).unwrap();
            let k0 = g.index(1, 1);
            assert!(s.psi1().samples().values()[k0].norm() < 1e-15);
            assert!((s.psi2().samples().values()[k0] - eps).norm() < 1e-15);
            let k1 = g.index(2, 1);
            let r5 = 5f64.sqrt();
            assert!((s.psi1().samples().values()[k1] - 2.0 * eps / r5).norm() < 1e-15);
            assert!((s.psi2().samples().values()[k1] - eps / r5).norm() < 1e-15);
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let g = grid(41);
        let (rho, h) = rational(1.0, &g);
        let s = psi_from_rho(&rho, &h).unwrap();
        let back = rho_from_psi(&s).unwrap();
        let diff = back.values().zip_with(rho.values(), |a, b| a - b).unwrap();
        assert!(diff.max_abs() < EXACT);
        assert!(weierstrass_residual(&s, &h, DerivativeMode::Analytic).unwrap().max_norm < EXACT);
    }

    #[test]
    fn equal_real_spinor_gives_unit_rho() {
        let g = grid(5);
        let f = ComplexField::from_fn(g, |z| c(1.0 + z.re * z.re, 0.0)).unwrap();
        let r = rho_from_psi(&SpinorField::from_samples(f.clone(), f).unwrap()).unwrap();
        assert!(r.values().values().iter().all(|v| (v - 1.0).norm() < 1e-15));
        let zero = ComplexField::zeros(g);
        assert!(rho_from_psi(&SpinorField::from_samples(zero.clone(), zero).unwrap()).is_err());
    }

    #[test]
    fn fd_inverse_transform_follows_a_rotating_root() {
        // ρ = e^{2i z}·z̄-free: ∂ρ winds around the origin, so the principal
        // root jumps; the sweep must remove the jump
        let g = grid(81);
        let rho = RhoField::from_samples(ComplexField::from_fn(g, |z| (c(0.0, 2.0) * z).exp()).unwrap());
        let h = MeanCurvature::constant(1.0, &g).unwrap();
        let s = psi_from_rho(&rho, &h).unwrap();
        let v = s.psi2().samples();
        let mut jump = 0.0f64;
        for j in 0..g.ny {
            for i in 1..g.nx {
                jump = jump.max((v.get(i, j) - v.get(i - 1, j)).norm());
            }
        }
        assert!(jump < 0.2, "{jump}");
        let r = weierstrass_residual(&s, &h, DerivativeMode::FiniteDifference).unwrap();
        assert!(r.max_norm < 0.05, "{}", r.max_norm);
    }

    #[test]
    fn non_positive_h_is_rejected() {
        let g = grid(5);
        let (rho, _) = rational(1.0, &g);
        let h = MeanCurvature::constant(-1.0, &g).unwrap();
        assert!(psi_from_rho(&rho, &h).is_err());
        assert!(sigma_residual(&rho, &h, DerivativeMode::Analytic).is_err());
    }

    #[test]
    fn sigma_model_rational_and_holomorphic() {
        let g = grid(41);
        let (rho, h) = rational(1.0, &g);
        assert!(sigma_residual(&rho, &h, DerivativeMode::Analytic).unwrap().max_norm < EXACT);
        let z2 = RhoField::from_closed_form(ClosedForm::new(|z| *z * *z), &g).unwrap();
        let h0 = MeanCurvature::constant(0.5, &g).unwrap();
        assert!(sigma_residual(&z2, &h0, DerivativeMode::Analytic).unwrap().max_norm < EXACT);
        let z1 = RhoField::from_closed_form(ClosedForm::new(|z| *z), &g).unwrap();
        assert!(sigma_residual(&z1, &h, DerivativeMode::Analytic).unwrap().max_norm > 0.1);
    }

    #[test]
    fn discrete_symmetries_preserve_solutions() {
        let g = grid(40); // even count keeps ρ = 0 off the grid
        let (rho, h) = rational(1.0, &g);
        let z2 = apply_discrete_symmetry(&rho, Symmetry::Z2).unwrap();
        assert!(sigma_residual(&z2, &h, DerivativeMode::Analytic).unwrap().max_norm < EXACT);
        let inv = apply_discrete_symmetry(&rho, Symmetry::Inversion).unwrap();
        let r = sigma_residual(&inv, &h, DerivativeMode::Analytic).unwrap();
        assert!(r.max_norm < 1e-9, "{}", r.max_norm);
        let twice = apply_discrete_symmetry(&inv, Symmetry::Inversion).unwrap();
        let d = twice.values().zip_with(rho.values(), |a, b| a - b).unwrap();
        assert!(d.max_abs() < 1e-14);
    }

    #[test]
    fn inversion_masks_zeros() {
        let g = grid(41);
        let (rho, _) = rational(1.0, &g);
        let inv = apply_discrete_symmetry(&rho, Symmetry::Inversion).unwrap();
        assert_eq!(inv.values().masked_count(), g.ny);
    }

    #[test]
    fn spin_matrix_special_values_and_algebra() {
        let g = grid(9);
        for (v, want) in [(c(0.0, 0.0), [[1.0, 0.0], [0.0, -1.0]]), (c(1.0, 0.0), [[0.0, 1.0], [1.0, 0.0]])] {
            let r = RhoField::from_closed_form(ClosedForm::constant(v), &g).unwrap();
            let s = spin_matrix(&r, DerivativeMode::Analytic).unwrap();
            let m = s.at(0).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    assert!((m[i][j] - want[i][j]).norm() < 1e-15);
                }
            }
            assert_eq!(landau_lifshitz_residual(&s).max_norm, 0.0);
        }
        let r = RhoField::from_closed_form(ClosedForm::new(|z| (*z * z.conj() + *z * 3.0).sin()), &g).unwrap();
        assert!(spin_matrix(&r, DerivativeMode::Analytic).unwrap().algebra_defect() < 1e-12);
    }

    #[test]
    fn commutator_matches_closed_expression() {
        // [S, ∂∂̄S] = 4/n² [[ρ̄f − ρf̄, ρ̄²f + f̄], [−(f + ρ²f̄), −(ρ̄f − ρf̄)]]
        // with f = ∂∂̄ρ − 2ρ̄/n ∂ρ∂̄ρ
        let g = grid(7);
        let cf = ClosedForm::new(|z| (*z * 0.7 + z.conj() * z.conj() * 0.3).exp() * 0.4);
        let r = RhoField::from_closed_form(cf.clone(), &g).unwrap();
        let comm = spin_matrix(&r, DerivativeMode::Analytic).unwrap().commutator();
        for k in 0..g.len() {
            let j = cf.jet_at(g.z(k), 2).unwrap();
            let rv = j.value();
            let n = 1.0 + rv.norm_sqr();
            let f = j.d_dbar() - 2.0 * rv.conj() / n * j.d() * j.dbar();
            let fb = f.conj();
            let k4 = 4.0 / (n * n);
            let want = [
                k4 * (rv.conj() * f - rv * fb),
                k4 * (rv.conj() * rv.conj() * f + fb),
                -k4 * (f + rv * rv * fb),
                -k4 * (rv.conj() * f - rv * fb),
            ];
            for e in 0..4 {
                assert!((comm[e].values()[k] - want[e]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn landau_lifshitz_unimodular_and_control() {
        let g = grid(41);
        let r = unimodular(1.0, &g);
        let s = spin_matrix(&r, DerivativeMode::Analytic).unwrap();
        assert!(landau_lifshitz_residual(&s).max_norm < EXACT);
        let (rho, h) = rational(1.0, &g);
        let s = spin_matrix(&rho, DerivativeMode::Analytic).unwrap();
        assert!(landau_lifshitz_residual(&s).max_norm > 0.1);
        assert!(deformed_ll_residual(&rho, &h, DerivativeMode::Analytic).unwrap().max_norm < EXACT);
        let h0 = MeanCurvature::constant(1.0, &g).unwrap();
        let a = deformed_ll_residual(&r, &h0, DerivativeMode::Analytic).unwrap();
        assert!(a.max_norm < EXACT);
    }

    #[test]
    fn printed_deformation_signs_leave_a_defect() {
        // ℛ₂₂ = −ρ²∂̄ρ̄ with ℋ₂₂ = +ρ⁻¹∂ln H
        let g = grid(40);
        let (rho, h) = rational(1.0, &g);
        let rj = rho.jets(DerivativeMode::Analytic).unwrap();
        let hj = h.jets(DerivativeMode::Analytic).unwrap();
        let [off] = map_jets([&rj, &hj], |[rho, h]| {
            let (mut big_r, mut big_h) = deformation_matrices(rho, h).unwrap();
            big_r[1][1] = -big_r[1][1];
            big_h[1][1] = -big_h[1][1];
            let e = spin_entries(rho);
            let s = [[e[0].value(), e[1].value()], [e[2].value(), e[3].value()]];
            let dd = [[e[0].d_dbar(), e[1].d_dbar()], [e[2].d_dbar(), e[3].d_dbar()]];
            let c = mat_commutator(&s, &dd);
            [c[1][0] + mat_mul(&big_r, &big_h)[1][0]]
        })
        .unwrap();
        assert!(off.max_abs() > 0.1);
    }

    #[test]
    fn multisoliton_products() {
        let g = grid(41);
        let (r1, r2) = (unimodular(1.0, &g), unimodular(2.0, &g));
        let h0 = MeanCurvature::constant(1.0, &g).unwrap();
        let p = multisoliton_product(&r1, &r2).unwrap();
        assert!(p.unimodularity_defect() < UNIMODULAR_TOL);
        assert!(sigma_residual(&p, &h0, DerivativeMode::Analytic).unwrap().max_norm < EXACT);
        let three = unimodular(3.0, &g);
        let d = p.values().zip_with(three.values(), |a, b| a - b).unwrap();
        assert!(d.max_abs() < 1e-14);
        let one = RhoField::from_closed_form(ClosedForm::constant(1.0), &g).unwrap();
        let same = multisoliton_product(&r1, &one).unwrap();
        assert_eq!(same.values(), r1.values());
        let (rho, _) = rational(1.0, &g);
        assert!(matches!(multisoliton_product(&r1, &rho), Err(Error::Precondition(_))));
    }

    #[test]
    fn unimodular_constancy() {
        let g = grid(41);
        let r = unimodular(1.0, &g);
        let h0 = MeanCurvature::constant(1.0, &g).unwrap();
        let ok = unimodular_h_constancy_check(&r, &h0, DerivativeMode::Analytic).unwrap();
        assert_eq!(ok.max_norm, 0.0);
        let (rho, h) = rational(1.0, &g);
        let bad = unimodular_h_constancy_check(&r, &h, DerivativeMode::Analytic).unwrap();
        assert!(bad.max_norm > 1e-2);
        assert!(bad.component("sigma_model").unwrap().max_norm > 1e-2);
        assert!(unimodular_h_constancy_check(&rho, &h, DerivativeMode::Analytic).is_err());
    }

    #[test]
    fn compatibility_condition() {
        let g = grid(41);
        let h0 = MeanCurvature::constant(1.0, &g).unwrap();
        let r = unimodular(1.5, &g);
        assert!(prop10_compatibility_residual(&r, &h0, DerivativeMode::Analytic).unwrap().max_norm < EXACT);
        let p = multisoliton_product(&r, &unimodular(-0.5, &g)).unwrap();
        assert!(prop10_compatibility_residual(&p, &h0, DerivativeMode::Analytic).unwrap().max_norm < EXACT);
        let one = RhoField::from_closed_form(ClosedForm::constant(1.0), &g).unwrap();
        let masked = prop10_compatibility_residual(&one, &h0, DerivativeMode::Analytic).unwrap();
        assert_eq!(masked.masked_points, g.len());
    }
}
