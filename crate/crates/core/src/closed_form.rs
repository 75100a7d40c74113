//! Pure functions of `z` with exact Wirtinger derivatives.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::grid::GridSpec;
use crate::jet::{Jet, MAX_ORDER};

type JetFn = dyn Fn(&Jet) -> Jet + Send + Sync;
type ValueFn = dyn Fn(Complex64) -> Complex64 + Send + Sync;
type Guard = dyn Fn(Complex64) -> bool + Send + Sync;

#[derive(Clone)]
enum Repr {
    /// Evaluated on the coordinate jet; derivatives come for free.
    Jet(Arc<JetFn>),
    /// Values only; no analytic derivatives.
    Value(Arc<ValueFn>),
}

/// A function `z ↦ f(z, z̄)`.
///
/// The usual constructor takes a closure over [`Jet`]s: the closure receives
/// the jet of the coordinate `z` (use [`Jet::conj`] to get `z̄`) and its
/// result carries `∂`, `∂̄` and higher derivatives exactly.
///
/// `depth` is the number of derivative orders the closure consumes
/// internally (for instance a form built from `∂ρ` has depth one more than
/// `ρ`). `domain_guard`, when present, returns `false` at points that must
/// be masked rather than evaluated.
#[derive(Clone)]
pub struct ClosedForm {
    repr: Repr,
    depth: usize,
    guard: Option<Arc<Guard>>,
}

impl fmt::Debug for ClosedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.repr {
            Repr::Jet(_) => "jet",
            Repr::Value(_) => "value",
        };
        f.debug_struct("ClosedForm")
            .field("kind", &kind)
            .field("depth", &self.depth)
            .field("guarded", &self.guard.is_some())
            .finish()
    }
}

impl ClosedForm {
    pub fn new(f: impl Fn(&Jet) -> Jet + Send + Sync + 'static) -> Self {
        ClosedForm { repr: Repr::Jet(Arc::new(f)), depth: 0, guard: None }
    }

    /// A closure that differentiates internally `depth` times.
    pub fn derived(depth: usize, f: impl Fn(&Jet) -> Jet + Send + Sync + 'static) -> Self {
        ClosedForm { repr: Repr::Jet(Arc::new(f)), depth, guard: None }
    }

    /// A value-only form: sampling works, analytic derivatives do not.
    pub fn value_only(f: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static) -> Self {
        ClosedForm { repr: Repr::Value(Arc::new(f)), depth: 0, guard: None }
    }

    pub fn constant(c: impl Into<Complex64>) -> Self {
        let c = c.into();
        Self::new(move |z| Jet::constant(c, z.order()))
    }

    pub fn with_guard(mut self, guard: impl Fn(Complex64) -> bool + Send + Sync + 'static) -> Self {
        self.guard = Some(Arc::new(guard));
        self
    }

    /// Keeps the guard of `other` (intersected with our own).
    pub fn with_guard_of(self, other: &ClosedForm) -> Self {
        match (&self.guard, &other.guard) {
            (_, None) => self,
            (None, Some(g)) => ClosedForm { guard: Some(g.clone()), ..self },
            (Some(a), Some(b)) => {
                let (a, b) = (a.clone(), b.clone());
                ClosedForm { guard: Some(Arc::new(move |z| a(z) && b(z))), ..self }
            }
        }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn has_derivatives(&self) -> bool {
        matches!(self.repr, Repr::Jet(_))
    }

    /// `true` where the guard admits the point (always, without a guard).
    pub fn admits(&self, z: Complex64) -> bool {
        self.guard.as_ref().map_or(true, |g| g(z))
    }

    /// Applies the closure to an arbitrary input jet (for composing forms).
    pub fn apply(&self, z: &Jet) -> Jet {
        match &self.repr {
            Repr::Jet(f) => f(z),
            Repr::Value(f) => Jet::constant(f(z.value()), 0),
        }
    }

    pub fn value(&self, z: Complex64) -> Complex64 {
        match &self.repr {
            Repr::Jet(f) => f(&Jet::z(z, self.depth.min(MAX_ORDER))).value(),
            Repr::Value(f) => f(z),
        }
    }

    /// The jet of the form at `z` carrying at least `need` derivative orders.
    pub fn jet_at(&self, z: Complex64, need: usize) -> Result<Jet> {
        let f = match &self.repr {
            Repr::Jet(f) => f,
            Repr::Value(_) => return Err(Error::InsufficientOrder { needed: need, got: 0 }),
        };
        let input = (need + self.depth).min(MAX_ORDER);
        let out = f(&Jet::z(z, input));
        if out.order() < need {
            return Err(Error::InsufficientOrder { needed: need, got: out.order() });
        }
        Ok(out.truncate(need))
    }

    /// `∂f` as a closed form.
    pub fn dz(&self) -> Result<ClosedForm> {
        let f = self.jet_fn()?;
        Ok(ClosedForm::derived(self.depth + 1, move |z| f(z).dz()).with_guard_of(self))
    }

    /// `∂̄f` as a closed form.
    pub fn dzbar(&self) -> Result<ClosedForm> {
        let f = self.jet_fn()?;
        Ok(ClosedForm::derived(self.depth + 1, move |z| f(z).dzbar()).with_guard_of(self))
    }

    /// `f̄` as a closed form.
    pub fn conj(&self) -> ClosedForm {
        match &self.repr {
            Repr::Jet(f) => {
                let f = f.clone();
                ClosedForm { repr: Repr::Jet(Arc::new(move |z| f(z).conj())), depth: self.depth, guard: self.guard.clone() }
            }
            Repr::Value(f) => {
                let f = f.clone();
                ClosedForm { repr: Repr::Value(Arc::new(move |z| f(z).conj())), depth: 0, guard: self.guard.clone() }
            }
        }
    }

    pub(crate) fn jet_fn(&self) -> Result<Arc<JetFn>> {
        match &self.repr {
            Repr::Jet(f) => Ok(f.clone()),
            Repr::Value(_) => Err(Error::InsufficientOrder { needed: 1, got: 0 }),
        }
    }

    /// Samples the form on a grid. Guard-excluded points are masked; a
    /// non-finite value at an admitted point is an error.
    pub fn sample(&self, grid: &GridSpec) -> Result<ComplexField> {
        sample(self, grid)
    }
}

/// `values[k] = cf(z_k)`; see [`ClosedForm::sample`].
pub fn sample(cf: &ClosedForm, grid: &GridSpec) -> Result<ComplexField> {
    grid.validate()?;
    let evaluated: Vec<(Complex64, bool)> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let z = grid.z(k);
            if cf.admits(z) {
                (cf.value(z), false)
            } else {
                (Complex64::new(0.0, 0.0), true)
            }
        })
        .collect();
    let (values, mask): (Vec<_>, Vec<_>) = evaluated.into_iter().unzip();
    ComplexField::with_mask(*grid, values, mask)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_sampling() {
        let g = GridSpec::square(1.0, 5).unwrap();
        let f = sample(&ClosedForm::new(|z| *z), &g).unwrap();
        for k in 0..g.len() {
            assert_eq!(f.values()[k], g.z(k));
        }
    }

    #[test]
    fn z_plus_zbar_is_twice_x() {
        let cf = ClosedForm::new(|z| *z + z.conj());
        let v = cf.value(Complex64::new(0.3, 0.7));
        assert!((v - Complex64::new(0.6, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn rational_mean_curvature_at_x_one() {
        // 1/(1+(z+z̄)²) at x = 1 is 1/5 for every y.
        let cf = ClosedForm::new(|z| {
            let s = *z + z.conj();
            1.0 / (1.0 + s * s)
        });
        for y in [-3.0, 0.0, 0.4, 11.0] {
            let v = cf.value(Complex64::new(1.0, y));
            assert!((v - Complex64::new(0.2, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn singular_point_without_guard_is_an_error() {
        let g = GridSpec::square(1.0, 5).unwrap();
        let cf = ClosedForm::new(|z| 1.0 / *z);
        assert!(matches!(sample(&cf, &g), Err(Error::Singular { .. })));
        let guarded = cf.with_guard(|z| z.norm() > 1e-12);
        let f = sample(&guarded, &g).unwrap();
        assert_eq!(f.masked_count(), 1);
    }

    #[test]
    fn derived_forms_compose() {
        let f = ClosedForm::new(|z| {
            let s = *z + z.conj();
            (s * 1.5).exp()
        });
        let df = f.dz().unwrap();
        let z0 = Complex64::new(0.2, -0.4);
        let want = 1.5 * (1.5 * 0.4f64).exp();
        assert!((df.value(z0) - Complex64::new(want, 0.0)).norm() < 1e-13);
        let j = df.jet_at(z0, 2).unwrap();
        assert!((j.d_dbar() - Complex64::new(1.5f64.powi(3) * (0.6f64).exp(), 0.0)).norm() < 1e-12);
        assert!(ClosedForm::value_only(|z| z).dz().is_err());
    }
}
