//! The generalized Weierstrass system
//!
//! ```text
//! ∂ψ₁ = pHψ₂,   ∂̄ψ₂ = −pHψ₁,   p = |ψ₁|² + |ψ₂|²
//! ```
//!
//! together with its two conjugate equations, the density `p`, the
//! conservation laws, the current `J = ψ̄₁∂ψ₂ − ψ₂∂ψ̄₁` and its
//! `∂̄`-conserved modification.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::calculus::{self, map_jets, DerivativeMode, Field, JetField};
use crate::closed_form::ClosedForm;
use crate::error::{Error, Result};
use crate::field::{ComplexField, RealField};
use crate::grid::GridSpec;
use crate::jet::Jet;
use crate::report::ResidualReport;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// The spinor pair `(ψ₁, ψ₂)` on a shared grid.
#[derive(Debug, Clone)]
pub struct SpinorField {
    psi1: Field,
    psi2: Field,
}

impl SpinorField {
    pub fn new(psi1: Field, psi2: Field) -> Result<Self> {
        if psi1.grid() != psi2.grid() {
            return Err(Error::GridMismatch);
        }
        Ok(SpinorField { psi1, psi2 })
    }

    pub fn from_closed_forms(psi1: ClosedForm, psi2: ClosedForm, grid: &GridSpec) -> Result<Self> {
        Self::new(Field::from_closed_form(psi1, grid)?, Field::from_closed_form(psi2, grid)?)
    }

    pub fn from_samples(psi1: ComplexField, psi2: ComplexField) -> Result<Self> {
        Self::new(Field::from_samples(psi1), Field::from_samples(psi2))
    }

    pub fn zeros(grid: &GridSpec) -> Self {
        let zero = ClosedForm::constant(0.0);
        Self::from_closed_forms(zero.clone(), zero, grid).expect("zero spinor is finite")
    }

    pub fn psi1(&self) -> &Field {
        &self.psi1
    }

    pub fn psi2(&self) -> &Field {
        &self.psi2
    }

    pub fn grid(&self) -> &GridSpec {
        self.psi1.grid()
    }

    /// Both components reduced to samples (finite differences only).
    pub fn sampled_only(&self) -> Self {
        SpinorField { psi1: self.psi1.sampled_only(), psi2: self.psi2.sampled_only() }
    }

    /// `(ψ₁ + δ, ψ₂)`, a non-solution used as a negative control.
    pub fn perturbed(&self, delta: Complex64) -> Result<Self> {
        let samples = self.psi1.samples().map(|v| v + delta);
        let exact = self.psi1.exact().map(|cf| {
            let f = cf.clone();
            ClosedForm::derived(cf.depth(), move |z| f.apply(z) + delta).with_guard_of(cf)
        });
        Self::new(Field::from_parts(samples, exact), self.psi2.clone())
    }

    pub fn jets(&self, mode: DerivativeMode) -> Result<(JetField, JetField)> {
        Ok((self.psi1.jets(mode)?, self.psi2.jets(mode)?))
    }

    /// True when both components vanish at every unmasked point.
    pub fn is_zero(&self) -> bool {
        self.psi1.samples().max_abs() == 0.0 && self.psi2.samples().max_abs() == 0.0
    }
}

/// A real mean curvature function. Zeros are masked.
#[derive(Debug, Clone)]
pub struct MeanCurvature {
    field: Field,
}

/// Largest imaginary part tolerated in a mean curvature sample.
const MAX_IMAG: f64 = 1e-12;

impl MeanCurvature {
    pub fn from_closed_form(cf: ClosedForm, grid: &GridSpec) -> Result<Self> {
        Self::from_field(Field::from_closed_form(cf, grid)?)
    }

    pub fn from_real(h: &RealField) -> Result<Self> {
        Self::from_field(Field::from_samples(h.to_complex()))
    }

    pub fn constant(h0: f64, grid: &GridSpec) -> Result<Self> {
        Self::from_closed_form(ClosedForm::constant(h0), grid)
    }

    fn from_field(field: Field) -> Result<Self> {
        let im = field.samples().max_imag();
        if im > MAX_IMAG {
            return Err(Error::Domain(format!("mean curvature has imaginary part {im:e}")));
        }
        let zeros: Vec<bool> = field.samples().values().iter().map(|v| v.re.abs() < 1e-300).collect();
        let samples = field.samples().clone().masked_where(&zeros);
        Ok(MeanCurvature { field: Field::from_parts(samples, field.exact().cloned()) })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn grid(&self) -> &GridSpec {
        self.field.grid()
    }

    pub fn values(&self) -> RealField {
        self.field.samples().real_part()
    }

    pub fn jets(&self, mode: DerivativeMode) -> Result<JetField> {
        self.field.jets(mode)
    }

    pub fn sampled_only(&self) -> Self {
        MeanCurvature { field: self.field.sampled_only() }
    }

    /// Errors unless `H > 0` at every unmasked point.
    pub fn require_positive(&self) -> Result<()> {
        let h = self.values();
        if h.unmasked().any(|v| v <= 0.0) {
            return Err(Error::Domain(format!("H must be positive; minimum {}", h.min())));
        }
        Ok(())
    }
}

/// `J` and the report for its conservation defect.
#[derive(Debug, Clone)]
pub struct Current {
    pub j: ComplexField,
}

/// The modified current and the norm of its `∂̄` derivative.
#[derive(Debug, Clone)]
pub struct ModifiedCurrent {
    pub current: ComplexField,
    pub dbar_residual: ComplexField,
    pub report: ResidualReport,
}

fn check_grids(s: &SpinorField, h: &MeanCurvature) -> Result<()> {
    if s.grid() != h.grid() {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

#[inline]
pub(crate) fn density_jet(a: &Jet, b: &Jet) -> Jet {
    a.norm_sqr() + b.norm_sqr()
}

/// `p = |ψ₁|² + |ψ₂|²`.
pub fn density_p(s: &SpinorField) -> RealField {
    s.psi1
        .samples()
        .zip_with(s.psi2.samples(), |a, b| Complex64::new(a.norm_sqr() + b.norm_sqr(), 0.0))
        .expect("shared grid")
        .real_part()
}

/// The four residuals `∂ψ₁ − pHψ₂`, `∂̄ψ₂ + pHψ₁` and their conjugates.
pub fn weierstrass_residual_fields(s: &SpinorField, h: &MeanCurvature, mode: DerivativeMode) -> Result<[ComplexField; 4]> {
    check_grids(s, h)?;
    let (a, b) = s.jets(mode)?;
    let hj = h.jets(mode)?;
    map_jets([&a, &b, &hj], |[a, b, h]| {
        let p = a.value().norm_sqr() + b.value().norm_sqr();
        let ph = p * h.value();
        let (ac, bc) = (a.conj(), b.conj());
        [
            a.d() - ph * b.value(),
            b.dbar() + ph * a.value(),
            ac.dbar() - ph * bc.value(),
            bc.d() + ph * ac.value(),
        ]
    })
}

pub fn weierstrass_residual(s: &SpinorField, h: &MeanCurvature, mode: DerivativeMode) -> Result<ResidualReport> {
    let [r1, r2, r3, r4] = weierstrass_residual_fields(s, h, mode)?;
    Ok(ResidualReport::from_fields(
        "weierstrass_system",
        &[("d_psi1", &r1), ("dbar_psi2", &r2), ("dbar_conj_psi1", &r3), ("d_conj_psi2", &r4)],
    ))
}

/// `∂(ψ₁²) + ∂̄(ψ₂²)` and `∂(ψ₁ψ̄₂) − ∂̄(ψ̄₁ψ₂)`.
///
/// The second law is the closedness of the `X₃` one-form; it holds with
/// the relative minus sign, not with a sum.
pub fn potential_conservation_fields(s: &SpinorField, mode: DerivativeMode) -> Result<[ComplexField; 2]> {
    let (a, b) = s.jets(mode)?;
    map_jets([&a, &b], |[a, b]| {
        let first = (*a * *a).d() + (*b * *b).dbar();
        let second = (*a * b.conj()).d() - (a.conj() * *b).dbar();
        [first, second]
    })
}

pub fn potential_conservation_residual(s: &SpinorField, mode: DerivativeMode) -> Result<ResidualReport> {
    let [c1, c2] = potential_conservation_fields(s, mode)?;
    Ok(ResidualReport::from_fields("potential_conservation", &[("squares", &c1), ("mixed", &c2)]))
}

pub(crate) fn current_jet(a: &Jet, b: &Jet) -> Jet {
    let ac = a.conj();
    ac * b.dz() - *b * ac.dz()
}

/// `J = ψ̄₁∂ψ₂ − ψ₂∂ψ̄₁`.
pub fn current_j(s: &SpinorField, mode: DerivativeMode) -> Result<Current> {
    let (a, b) = s.jets(mode)?;
    let [j] = map_jets([&a, &b], |[a, b]| [current_jet(a, b).value()])?;
    Ok(Current { j })
}

/// `∂̄J + p²∂H`, which vanishes for solutions.
pub fn dbar_j_defect_field(s: &SpinorField, h: &MeanCurvature, mode: DerivativeMode) -> Result<ComplexField> {
    check_grids(s, h)?;
    let (a, b) = s.jets(mode)?;
    let hj = h.jets(mode)?;
    let [r] = map_jets([&a, &b, &hj], |[a, b, h]| {
        let p = a.value().norm_sqr() + b.value().norm_sqr();
        [current_jet(a, b).dbar() + p * p * h.d()]
    })?;
    Ok(r)
}

pub fn dbar_j_defect(s: &SpinorField, h: &MeanCurvature, mode: DerivativeMode) -> Result<ResidualReport> {
    let r = dbar_j_defect_field(s, h, mode)?;
    Ok(ResidualReport::from_fields("dbar_current_defect", &[("dbar_j_plus_p2_dh", &r)]))
}

/// `2∫_{x₀}^{x} g(t, y) dt` along every grid row by the trapezoid rule.
/// Rows are independent; masked samples break the row (the integral is
/// masked beyond them on the far side of the anchor).
fn row_antiderivative(g: &ComplexField, anchor: usize) -> ComplexField {
    let grid = *g.grid();
    let hx = grid.hx();
    let rows: Vec<(Vec<Complex64>, Vec<bool>)> = (0..grid.ny)
        .into_par_iter()
        .map(|j| {
            let mut vals = vec![Complex64::new(0.0, 0.0); grid.nx];
            let mut mask = vec![true; grid.nx];
            let k0 = grid.index(anchor, j);
            if g.is_masked(k0) {
                return (vals, mask);
            }
            mask[anchor] = false;
            let mut acc = Complex64::new(0.0, 0.0);
            for i in anchor + 1..grid.nx {
                let (k_prev, k) = (grid.index(i - 1, j), grid.index(i, j));
                if g.is_masked(k) {
                    break;
                }
                acc += hx * (g.values()[k_prev] + g.values()[k]);
                vals[i] = acc;
                mask[i] = false;
            }
            acc = Complex64::new(0.0, 0.0);
            for i in (0..anchor).rev() {
                let (k_next, k) = (grid.index(i + 1, j), grid.index(i, j));
                if g.is_masked(k) {
                    break;
                }
                acc -= hx * (g.values()[k_next] + g.values()[k]);
                vals[i] = acc;
                mask[i] = false;
            }
            (vals, mask)
        })
        .collect();
    let mut values = Vec::with_capacity(grid.len());
    let mut mask = Vec::with_capacity(grid.len());
    for (v, m) in rows {
        values.extend(v);
        mask.extend(m);
    }
    ComplexField::with_mask(grid, values, mask).expect("finite prefix sums")
}

/// `𝒥 = J + ∂̄⁻¹(p²∂H)`.
///
/// The `∂̄`-antiderivative of `g = p²∂H` is realised as `2∫ g dx` along grid
/// rows from the column nearest `x = zbar0`. This is exact for integrands
/// independent of `Im z`; in general the report shows the leftover
/// `i∫∂_y g dx`. `∂̄J` comes from the jets in either mode; the integral
/// term is differentiated exactly (analytic) or by finite differences.
pub fn modified_current(s: &SpinorField, h: &MeanCurvature, zbar0: f64, mode: DerivativeMode) -> Result<ModifiedCurrent> {
    check_grids(s, h)?;
    let grid = *s.grid();
    let (anchor, _) = grid
        .nearest(zbar0, grid.y_min)
        .ok_or_else(|| Error::Domain(format!("basepoint abscissa {zbar0} outside [{}, {}]", grid.x_min, grid.x_max)))?;
    let (a, b) = s.jets(mode)?;
    let hj = h.jets(mode)?;
    let [j, g, gy] = map_jets([&a, &b, &hj], |[a, b, h]| {
        let p = density_jet(a, b);
        let g = p * p * h.dz();
        [current_jet(a, b).value(), g.value(), I * (g.d() - g.dbar())]
    })?;
    let integral = row_antiderivative(&g, anchor);
    let current = j.zip_with(&integral, |a, b| a + b)?;
    let dbar_j = {
        let [d] = map_jets([&a, &b], |[a, b]| [current_jet(a, b).dbar()])?;
        d
    };
    let dbar_integral = match mode {
        DerivativeMode::FiniteDifference => calculus::d_zbar(&integral),
        DerivativeMode::Analytic => g.zip_with(&row_antiderivative(&gy, anchor), |g, l| g + 0.5 * I * l)?,
    };
    let dbar_residual = dbar_j.zip_with(&dbar_integral, |a, b| a + b)?;
    let report = ResidualReport::from_fields("modified_current", &[("dbar_modified_current", &dbar_residual)]);
    Ok(ModifiedCurrent { current, dbar_residual, report })
}

/// `K = −∂∂̄ ln p / p²` from sampled `p`.
pub fn gaussian_curvature_from_p(p: &RealField) -> Result<RealField> {
    if p.unmasked().any(|v| v <= 0.0) {
        return Err(Error::Domain("density p must be positive".into()));
    }
    let ln_p = p.map(f64::ln);
    let lap = calculus::mixed_dzbar_dz_real(&ln_p);
    let k = lap.to_complex().zip_with(&p.to_complex(), |l, p| -l / (p * p)).expect("same grid");
    Ok(k.real_part())
}

/// `K = −∂∂̄ ln p / p²` with `p` built from the spinor's jets.
pub fn gaussian_curvature(s: &SpinorField, mode: DerivativeMode) -> Result<RealField> {
    let (a, b) = s.jets(mode)?;
    let [k] = map_jets([&a, &b], |[a, b]| {
        let p = density_jet(a, b);
        let pv = p.value();
        if pv.re <= 0.0 {
            return [Complex64::new(f64::NAN, 0.0)];
        }
        [-p.ln().d_dbar() / (pv * pv)]
    })?;
    Ok(k.real_part())
}
