//! Wirtinger calculus on grids.
//!
//! `∂ = ½(∂x − i∂y)` and `∂̄ = ½(∂x + i∂y)` are discretised with second
//! order central differences in the interior and second order one-sided
//! stencils at edges and next to masked points. A point whose every
//! admissible stencil touches a masked sample is itself masked.
//!
//! [`JetField`] packages value and derivatives up to second order at every
//! grid point, produced either from exact [`ClosedForm`] jets or from the
//! finite-difference operators here. Every residual in the crate is written
//! once against jets and evaluated on either path.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::closed_form::ClosedForm;
use crate::error::{Error, Result};
use crate::field::{ComplexField, RealField};
use crate::grid::GridSpec;
use crate::jet::Jet;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const HALF_I: Complex64 = Complex64::new(0.0, 0.5);

/// How derivatives are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeMode {
    /// Exact derivatives from closed forms.
    Analytic,
    /// Finite differences of sampled values.
    FiniteDifference,
}

/// First derivative at position `i` of a line of `n` samples.
fn first_at(n: usize, i: usize, h: f64, get: &impl Fn(usize) -> Option<Complex64>) -> Option<Complex64> {
    let f0 = get(i)?;
    if i >= 1 && i + 1 < n {
        if let (Some(a), Some(b)) = (get(i - 1), get(i + 1)) {
            return Some((b - a) / (2.0 * h));
        }
    }
    if i + 2 < n {
        if let (Some(f1), Some(f2)) = (get(i + 1), get(i + 2)) {
            return Some((-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * h));
        }
    }
    if i >= 2 {
        if let (Some(f1), Some(f2)) = (get(i - 1), get(i - 2)) {
            return Some((3.0 * f0 - 4.0 * f1 + f2) / (2.0 * h));
        }
    }
    None
}

/// Second derivative at position `i`; one-sided four-point stencils are
/// second order, the three-point fallback only first order.
fn second_at(n: usize, i: usize, h: f64, get: &impl Fn(usize) -> Option<Complex64>) -> Option<Complex64> {
    let f0 = get(i)?;
    let h2 = h * h;
    if i >= 1 && i + 1 < n {
        if let (Some(a), Some(b)) = (get(i - 1), get(i + 1)) {
            return Some((a - 2.0 * f0 + b) / h2);
        }
    }
    let fwd = |m: usize| (1..=m).map(|d| if i + d < n { get(i + d) } else { None }).collect::<Option<Vec<_>>>();
    let bwd = |m: usize| (1..=m).map(|d| if i >= d { get(i - d) } else { None }).collect::<Option<Vec<_>>>();
    if let Some(f) = fwd(3) {
        return Some((2.0 * f0 - 5.0 * f[0] + 4.0 * f[1] - f[2]) / h2);
    }
    if let Some(f) = bwd(3) {
        return Some((2.0 * f0 - 5.0 * f[0] + 4.0 * f[1] - f[2]) / h2);
    }
    if let Some(f) = fwd(2) {
        return Some((f0 - 2.0 * f[0] + f[1]) / h2);
    }
    if let Some(f) = bwd(2) {
        return Some((f0 - 2.0 * f[0] + f[1]) / h2);
    }
    None
}

#[derive(Clone, Copy)]
enum Axis {
    X,
    Y,
}

fn stencil_field(f: &ComplexField, axis: Axis, second: bool) -> ComplexField {
    let g = *f.grid();
    let vals = f.values();
    let mask = f.mask();
    let out: Vec<Option<Complex64>> = (0..g.len())
        .into_par_iter()
        .map(|k| {
            let (i, j) = g.coords(k);
            match axis {
                Axis::X => {
                    let get = |ii: usize| {
                        let kk = g.index(ii, j);
                        (!mask[kk]).then(|| vals[kk])
                    };
                    if second {
                        second_at(g.nx, i, g.hx(), &get)
                    } else {
                        first_at(g.nx, i, g.hx(), &get)
                    }
                }
                Axis::Y => {
                    let get = |jj: usize| {
                        let kk = g.index(i, jj);
                        (!mask[kk]).then(|| vals[kk])
                    };
                    if second {
                        second_at(g.ny, j, g.hy(), &get)
                    } else {
                        first_at(g.ny, j, g.hy(), &get)
                    }
                }
            }
        })
        .collect();
    let mask: Vec<bool> = out.iter().map(|v| v.is_none()).collect();
    let values = out.into_iter().map(|v| v.unwrap_or(ZERO)).collect();
    ComplexField::with_mask(g, values, mask).expect("stencil output is finite wherever unmasked")
}

pub fn partial_x(f: &ComplexField) -> ComplexField {
    stencil_field(f, Axis::X, false)
}

pub fn partial_y(f: &ComplexField) -> ComplexField {
    stencil_field(f, Axis::Y, false)
}

pub fn partial_xx(f: &ComplexField) -> ComplexField {
    stencil_field(f, Axis::X, true)
}

pub fn partial_yy(f: &ComplexField) -> ComplexField {
    stencil_field(f, Axis::Y, true)
}

pub fn partial_xy(f: &ComplexField) -> ComplexField {
    partial_y(&partial_x(f))
}

/// `∂f = ½(∂x − i∂y) f`.
pub fn d_z(f: &ComplexField) -> ComplexField {
    partial_x(f).zip_with(&partial_y(f), |a, b| 0.5 * a - HALF_I * b).expect("same grid")
}

/// `∂̄f = ½(∂x + i∂y) f`.
pub fn d_zbar(f: &ComplexField) -> ComplexField {
    partial_x(f).zip_with(&partial_y(f), |a, b| 0.5 * a + HALF_I * b).expect("same grid")
}

/// `∂̄∂f`, discretised as a quarter of the compact five-point Laplacian.
pub fn mixed_dzbar_dz(f: &ComplexField) -> ComplexField {
    partial_xx(f).zip_with(&partial_yy(f), |a, b| 0.25 * (a + b)).expect("same grid")
}

pub fn d_z_real(f: &RealField) -> ComplexField {
    d_z(&f.to_complex())
}

pub fn mixed_dzbar_dz_real(f: &RealField) -> RealField {
    mixed_dzbar_dz(&f.to_complex()).real_part()
}

/// Order-2 jets at every grid point plus the combined mask.
#[derive(Debug, Clone)]
pub struct JetField {
    grid: GridSpec,
    jets: Vec<Jet>,
    mask: Vec<bool>,
}

impl JetField {
    /// Exact jets of `cf` carrying `need` derivative orders.
    pub fn from_closed_form(cf: &ClosedForm, grid: &GridSpec, need: usize) -> Result<Self> {
        grid.validate()?;
        let out: Vec<Result<Option<Jet>>> = (0..grid.len())
            .into_par_iter()
            .map(|k| {
                let z = grid.z(k);
                if !cf.admits(z) {
                    return Ok(None);
                }
                let j = cf.jet_at(z, need)?;
                if !j.is_finite() {
                    return Err(Error::Singular { x: z.re, y: z.im });
                }
                Ok(Some(j))
            })
            .collect();
        let mut jets = Vec::with_capacity(grid.len());
        let mut mask = Vec::with_capacity(grid.len());
        for r in out {
            match r? {
                Some(j) => {
                    jets.push(j);
                    mask.push(false);
                }
                None => {
                    jets.push(Jet::constant(ZERO, need));
                    mask.push(true);
                }
            }
        }
        Ok(JetField { grid: *grid, jets, mask })
    }

    /// Second-order jets from finite differences of sampled values.
    pub fn from_samples(f: &ComplexField) -> Self {
        let g = *f.grid();
        let fx = partial_x(f);
        let fy = partial_y(f);
        let fxx = partial_xx(f);
        let fyy = partial_yy(f);
        let fxy = partial_y(&fx);
        let i = Complex64::new(0.0, 1.0);
        let (jets, mask): (Vec<_>, Vec<_>) = (0..g.len())
            .into_par_iter()
            .map(|k| {
                let masked = f.is_masked(k)
                    || fx.is_masked(k)
                    || fy.is_masked(k)
                    || fxx.is_masked(k)
                    || fyy.is_masked(k)
                    || fxy.is_masked(k);
                if masked {
                    return (Jet::constant(ZERO, 2), true);
                }
                let (ax, ay) = (fx.values()[k], fy.values()[k]);
                let (axx, ayy, axy) = (fxx.values()[k], fyy.values()[k], fxy.values()[k]);
                let jet = Jet::from_second_order(
                    f.values()[k],
                    0.5 * (ax - i * ay),
                    0.5 * (ax + i * ay),
                    0.25 * (axx - ayy - 2.0 * i * axy),
                    0.25 * (axx + ayy),
                    0.25 * (axx - ayy + 2.0 * i * axy),
                );
                (jet, false)
            })
            .unzip();
        JetField { grid: g, jets, mask }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn jets(&self) -> &[Jet] {
        &self.jets
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    #[inline]
    pub fn at(&self, k: usize) -> Option<&Jet> {
        (!self.mask[k]).then(|| &self.jets[k])
    }
}

/// Evaluates `f` pointwise on the jets of `N` fields, producing `M` output
/// fields. A point masked in any input, or where `f` is not finite, is masked.
pub fn map_jets<const N: usize, const M: usize>(
    fields: [&JetField; N],
    f: impl Fn([&Jet; N]) -> [Complex64; M] + Sync,
) -> Result<[ComplexField; M]> {
    let g = *fields[0].grid();
    if fields.iter().any(|jf| *jf.grid() != g) {
        return Err(Error::GridMismatch);
    }
    let rows: Vec<Option<[Complex64; M]>> = (0..g.len())
        .into_par_iter()
        .map(|k| {
            if fields.iter().any(|jf| jf.mask[k]) {
                return None;
            }
            let out = f(std::array::from_fn(|n| &fields[n].jets[k]));
            out.iter().all(|v| v.re.is_finite() && v.im.is_finite()).then_some(out)
        })
        .collect();
    let mask: Vec<bool> = rows.iter().map(|r| r.is_none()).collect();
    let out = std::array::from_fn(|m| {
        let values = rows.iter().map(|r| r.map_or(ZERO, |v| v[m])).collect();
        ComplexField::with_mask(g, values, mask.clone()).expect("finite by construction")
    });
    Ok(out)
}

/// A sampled complex field optionally backed by its closed form.
#[derive(Debug, Clone)]
pub struct Field {
    samples: ComplexField,
    exact: Option<ClosedForm>,
}

impl Field {
    pub fn from_closed_form(cf: ClosedForm, grid: &GridSpec) -> Result<Self> {
        let samples = cf.sample(grid)?;
        Ok(Field { samples, exact: Some(cf) })
    }

    pub fn from_samples(samples: ComplexField) -> Self {
        Field { samples, exact: None }
    }

    pub(crate) fn from_parts(samples: ComplexField, exact: Option<ClosedForm>) -> Self {
        Field { samples, exact }
    }

    pub fn samples(&self) -> &ComplexField {
        &self.samples
    }

    pub fn exact(&self) -> Option<&ClosedForm> {
        self.exact.as_ref()
    }

    pub fn grid(&self) -> &GridSpec {
        self.samples.grid()
    }

    /// Drops the closed form so only finite differences apply.
    pub fn sampled_only(&self) -> Self {
        Field { samples: self.samples.clone(), exact: None }
    }

    /// Second-order jets on the requested path.
    pub fn jets(&self, mode: DerivativeMode) -> Result<JetField> {
        match mode {
            DerivativeMode::FiniteDifference => Ok(JetField::from_samples(&self.samples)),
            DerivativeMode::Analytic => {
                let cf = self.exact.as_ref().ok_or_else(|| Error::NoClosedForm("field".into()))?;
                let jf = JetField::from_closed_form(cf, self.grid(), 2)?;
                // keep any extra masking applied to the samples
                let mask = jf.mask.iter().zip(self.samples.mask()).map(|(a, b)| *a || *b).collect();
                Ok(JetField { mask, ..jf })
            }
        }
    }

    /// `∂f`: the exact callable when available in analytic mode, else finite differences.
    pub fn d_z(&self, mode: DerivativeMode) -> Result<ComplexField> {
        match (mode, &self.exact) {
            (DerivativeMode::Analytic, Some(cf)) => {
                Ok(cf.dz()?.sample(self.grid())?.masked_where(self.samples.mask()))
            }
            (DerivativeMode::Analytic, None) => Err(Error::NoClosedForm("field".into())),
            (DerivativeMode::FiniteDifference, _) => Ok(d_z(&self.samples)),
        }
    }

    pub fn d_zbar(&self, mode: DerivativeMode) -> Result<ComplexField> {
        match (mode, &self.exact) {
            (DerivativeMode::Analytic, Some(cf)) => {
                Ok(cf.dzbar()?.sample(self.grid())?.masked_where(self.samples.mask()))
            }
            (DerivativeMode::Analytic, None) => Err(Error::NoClosedForm("field".into())),
            (DerivativeMode::FiniteDifference, _) => Ok(d_zbar(&self.samples)),
        }
    }
}
