//! Closed-form solution families.
//!
//! Every family supplies `H`, `ρ` and the spinor `(ψ₁, ψ₂)` as closed forms
//! with exact derivatives, plus an admissibility predicate that becomes the
//! guard of each form. With `s = z + z̄`:
//!
//! | name          | `H`                        | `ρ`          | `p`          |
//! |---------------|----------------------------|--------------|--------------|
//! | `rational`    | `1/(1+λ²s²)`               | `λs`         | `|λ|`        |
//! | `exponential` | `e^{λs}/(1+e^{2λs})`       | `e^{λs}`     | `|λ|`        |
//! | `trig`        | `cos(As)/(1+sin²(As))`     | `sin(As)`    | `|A|`        |
//! | `unimodular`  | `H₀`                       | `e^{iλs}`    | `|λ|/(2H₀)`  |
//! | `holomorphic` | `H₀`                       | `f(z)`       | varies       |
//!
//! The trigonometric family is admissible where `cos(As) > 0`, minus a
//! guard band of width [`TRIG_GUARD`] in `s` at each end of the strip.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::calculus::Field;
use crate::closed_form::ClosedForm;
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::jet::Jet;
use crate::sigma::RhoField;
use crate::weierstrass::{MeanCurvature, SpinorField};

/// Width in `s = 2x` of the excluded band at each end of the trigonometric strip.
pub const TRIG_GUARD: f64 = 0.05;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Rational,
    Exponential,
    Trig,
    Unimodular,
    Holomorphic,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 5] =
        [FamilyKind::Rational, FamilyKind::Exponential, FamilyKind::Trig, FamilyKind::Unimodular, FamilyKind::Holomorphic];

    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::Rational => "rational",
            FamilyKind::Exponential => "exponential",
            FamilyKind::Trig => "trig",
            FamilyKind::Unimodular => "unimodular",
            FamilyKind::Holomorphic => "holomorphic",
        }
    }

    pub fn constant_h(self) -> bool {
        matches!(self, FamilyKind::Unimodular | FamilyKind::Holomorphic)
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FamilyKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        FamilyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown family `{s}` (expected rational, exponential, trig, unimodular or holomorphic)")))
    }
}

/// Parameters for building a family by name.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyParams {
    pub lambda: f64,
    pub a: f64,
    pub h0: f64,
}

impl Default for FamilyParams {
    fn default() -> Self {
        FamilyParams { lambda: 1.0, a: 1.0, h0: 1.0 }
    }
}

type Predicate = Arc<dyn Fn(Complex64) -> bool + Send + Sync>;

/// One member of a solution family.
#[derive(Clone)]
pub struct SolutionFamily {
    kind: FamilyKind,
    params: FamilyParams,
    h: ClosedForm,
    rho: ClosedForm,
    psi1: ClosedForm,
    psi2: ClosedForm,
    admissible: Predicate,
    eps: f64,
    density: Option<f64>,
}

impl fmt::Debug for SolutionFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SolutionFamily").field("kind", &self.kind).field("params", &self.params).field("eps", &self.eps).finish()
    }
}

fn s_jet(z: &Jet) -> Jet {
    *z + z.conj()
}

fn everywhere() -> Predicate {
    Arc::new(|_| true)
}

fn nonzero(name: &str, v: f64) -> Result<()> {
    if v == 0.0 || !v.is_finite() {
        return Err(Error::InvalidParameter(format!("{name} must be a finite nonzero real, got {v}")));
    }
    Ok(())
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v <= 0.0 || !v.is_finite() {
        return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

impl SolutionFamily {
    #[allow(clippy::too_many_arguments)]
    fn assemble(
        kind: FamilyKind,
        params: FamilyParams,
        h: ClosedForm,
        rho: ClosedForm,
        psi1: ClosedForm,
        psi2: ClosedForm,
        admissible: Predicate,
        density: Option<f64>,
    ) -> Self {
        let guard = |cf: ClosedForm| {
            let a = admissible.clone();
            cf.with_guard(move |z| a(z))
        };
        SolutionFamily {
            kind,
            params,
            h: guard(h),
            rho: guard(rho),
            psi1: guard(psi1),
            psi2: guard(psi2),
            admissible,
            eps: 1.0,
            density,
        }
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn params(&self) -> FamilyParams {
        self.params
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// The `ε = ±1` branch; flips both spinor components.
    pub fn with_eps(mut self, eps: f64) -> Self {
        let target = if eps < 0.0 { -1.0 } else { 1.0 };
        if target != self.eps {
            let flip = |cf: &ClosedForm| {
                let f = cf.clone();
                ClosedForm::derived(cf.depth(), move |z| -f.apply(z)).with_guard_of(cf)
            };
            self.psi1 = flip(&self.psi1);
            self.psi2 = flip(&self.psi2);
            self.eps = target;
        }
        self
    }

    pub fn h_form(&self) -> &ClosedForm {
        &self.h
    }

    pub fn rho_form(&self) -> &ClosedForm {
        &self.rho
    }

    pub fn psi_forms(&self) -> (&ClosedForm, &ClosedForm) {
        (&self.psi1, &self.psi2)
    }

    pub fn is_admissible(&self, z: Complex64) -> bool {
        (self.admissible)(z)
    }

    pub fn constant_h(&self) -> bool {
        self.kind.constant_h()
    }

    /// The constant value of `p`, when the family has one.
    pub fn constant_density(&self) -> Option<f64> {
        self.density
    }

    pub fn mean_curvature(&self, grid: &GridSpec) -> Result<MeanCurvature> {
        MeanCurvature::from_closed_form(self.h.clone(), grid)
    }

    pub fn rho(&self, grid: &GridSpec) -> Result<RhoField> {
        Ok(RhoField::new(Field::from_closed_form(self.rho.clone(), grid)?).with_eps(self.eps))
    }

    pub fn spinor(&self, grid: &GridSpec) -> Result<SpinorField> {
        SpinorField::from_closed_forms(self.psi1.clone(), self.psi2.clone(), grid)
    }

    /// A rectangle inside the admissible set: `[−1, 1]²` except for the
    /// trigonometric family, whose strip is `|x| ≤ 0.9·π/(4|A|)`.
    pub fn default_domain(&self, nx: usize, ny: usize) -> Result<GridSpec> {
        match self.kind {
            FamilyKind::Trig => {
                let w = 0.9 * std::f64::consts::FRAC_PI_4 / self.params.a.abs();
                GridSpec::new(-w, w, -1.0, 1.0, nx, ny)
            }
            _ => GridSpec::new(-1.0, 1.0, -1.0, 1.0, nx, ny),
        }
    }
}

/// `H = 1/(1+λ²s²)`, `ρ = λs`,
/// `ψ₁ = ελs·conj(λ^{1/2})/(1+λ²s²)^{1/2}`, `ψ₂ = ελ^{1/2}/(1+λ²s²)^{1/2}`.
/// For `λ > 0` the roots are real and `ψ₁ = ελ^{3/2}s/(1+λ²s²)^{1/2}`.
pub fn family_rational(lambda: f64) -> Result<SolutionFamily> {
    nonzero("lambda", lambda)?;
    let root = Complex64::new(lambda, 0.0).sqrt();
    let h = ClosedForm::new(move |z| {
        let s = s_jet(z) * lambda;
        (1.0 + s * s).recip()
    });
    let rho = ClosedForm::new(move |z| s_jet(z) * lambda);
    let psi1 = ClosedForm::new(move |z| {
        let s = s_jet(z) * lambda;
        s * root.conj() * (1.0 + s * s).powf(-0.5)
    });
    let psi2 = ClosedForm::new(move |z| {
        let s = s_jet(z) * lambda;
        root * (1.0 + s * s).powf(-0.5)
    });
    let params = FamilyParams { lambda, ..Default::default() };
    Ok(SolutionFamily::assemble(FamilyKind::Rational, params, h, rho, psi1, psi2, everywhere(), Some(lambda.abs())))
}

/// `H = e^{λs}/(1+e^{2λs})`, `ρ = e^{λs}`,
/// `ψ₁ = εe^{λs}conj(λ^{1/2})/(1+e^{2λs})^{1/2}`, `ψ₂ = ελ^{1/2}/(1+e^{2λs})^{1/2}`.
pub fn family_exponential(lambda: f64) -> Result<SolutionFamily> {
    nonzero("lambda", lambda)?;
    let root = Complex64::new(lambda, 0.0).sqrt();
    let h = ClosedForm::new(move |z| {
        let e = (s_jet(z) * lambda).exp();
        e / (1.0 + e * e)
    });
    let rho = ClosedForm::new(move |z| (s_jet(z) * lambda).exp());
    let psi1 = ClosedForm::new(move |z| {
        let e = (s_jet(z) * lambda).exp();
        e * root.conj() * (1.0 + e * e).powf(-0.5)
    });
    let psi2 = ClosedForm::new(move |z| {
        let e = (s_jet(z) * lambda).exp();
        root * (1.0 + e * e).powf(-0.5)
    });
    let params = FamilyParams { lambda, ..Default::default() };
    Ok(SolutionFamily::assemble(FamilyKind::Exponential, params, h, rho, psi1, psi2, everywhere(), Some(lambda.abs())))
}

/// `H = cos(As)/(1+sin²(As))`, `ρ = sin(As)`,
/// `ψ₂ = εA^{1/2}/(1+sin²(As))^{1/2}`, `ψ₁ = ε sin(As)·conj(A^{1/2})/(1+sin²(As))^{1/2}`.
pub fn family_trigonometric(a: f64) -> Result<SolutionFamily> {
    nonzero("A", a)?;
    let root = Complex64::new(a, 0.0).sqrt();
    let h = ClosedForm::new(move |z| {
        let t = s_jet(z) * a;
        let sn = t.sin();
        t.cos() / (1.0 + sn * sn)
    });
    let rho = ClosedForm::new(move |z| (s_jet(z) * a).sin());
    let psi1 = ClosedForm::new(move |z| {
        let sn = (s_jet(z) * a).sin();
        sn * root.conj() * (1.0 + sn * sn).powf(-0.5)
    });
    let psi2 = ClosedForm::new(move |z| {
        let sn = (s_jet(z) * a).sin();
        root * (1.0 + sn * sn).powf(-0.5)
    });
    let half_width = std::f64::consts::FRAC_PI_2 / a.abs() - TRIG_GUARD;
    let admissible: Predicate = Arc::new(move |z: Complex64| (2.0 * z.re).abs() < half_width);
    let params = FamilyParams { a, ..Default::default() };
    Ok(SolutionFamily::assemble(FamilyKind::Trig, params, h, rho, psi1, psi2, admissible, Some(a.abs())))
}

/// The mean curvature `A tan(As)(cos²(As)+2)/(cos²(As)−2)` as printed for
/// the trigonometric family. It equals `∂̄ ln H` of the family's `H` and
/// does not pair with `ρ = sin(As)`; kept as a negative control.
pub fn trig_printed_mean_curvature(a: f64) -> ClosedForm {
    ClosedForm::new(move |z| {
        let t = s_jet(z) * a;
        let c2 = t.cos() * t.cos();
        t.tan() * a * (c2 + 2.0) / (c2 - 2.0)
    })
}

/// `ρ = e^{iλs}` with constant `H₀`; `λ = 0` gives `ρ ≡ 1` and a vanishing spinor.
pub fn family_unimodular(lambda: f64, h0: f64) -> Result<SolutionFamily> {
    if !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!("lambda must be finite, got {lambda}")));
    }
    positive("H0", h0)?;
    let root = (I * lambda).sqrt();
    let scale = 0.5 / h0.sqrt();
    let h = ClosedForm::constant(h0);
    let rho = ClosedForm::new(move |z| (s_jet(z) * (I * lambda)).exp());
    // √(∂ρ) = √(iλ)·e^{iλs/2} keeps the root smooth in s
    let psi2 = ClosedForm::new(move |z| (s_jet(z) * (0.5 * I * lambda)).exp() * (root * scale));
    let psi1 = ClosedForm::new(move |z| (s_jet(z) * (0.5 * I * lambda)).exp() * (root.conj() * scale));
    let params = FamilyParams { lambda, h0, ..Default::default() };
    let density = lambda.abs() / (2.0 * h0);
    Ok(SolutionFamily::assemble(FamilyKind::Unimodular, params, h, rho, psi1, psi2, everywhere(), Some(density)))
}

/// `ρ = f(z)` holomorphic with constant `H₀`. The root of `f′` is taken on
/// the principal branch at each point.
pub fn family_holomorphic(f: ClosedForm, h0: f64) -> Result<SolutionFamily> {
    positive("H0", h0)?;
    for (x, y) in [(0.21, 0.33), (-0.48, -0.12), (0.6, -0.55)] {
        let z = Complex64::new(x, y);
        if f.admits(z) && f.jet_at(z, 1)?.dbar().norm() > 1e-12 {
            return Err(Error::InvalidParameter("ρ must be holomorphic (∂̄ρ ≠ 0)".into()));
        }
    }
    let inv = 1.0 / h0.sqrt();
    let depth = f.depth() + 1;
    let (f1, f2) = (f.clone(), f.clone());
    let psi2 = ClosedForm::derived(depth, move |z| {
        let r = f2.apply(z);
        r.dz().sqrt() * inv / (1.0 + r.norm_sqr())
    })
    .with_guard_of(&f);
    let psi1 = ClosedForm::derived(depth, move |z| {
        let r = f1.apply(z);
        r * r.dz().sqrt().conj() * inv / (1.0 + r.norm_sqr())
    })
    .with_guard_of(&f);
    let params = FamilyParams { h0, ..Default::default() };
    Ok(SolutionFamily::assemble(FamilyKind::Holomorphic, params, ClosedForm::constant(h0), f, psi1, psi2, everywhere(), None))
}

/// Builds a family by name. The holomorphic family uses `ρ = λz`, whose
/// surface is a sphere of radius `1/H₀`.
pub fn family_by_kind(kind: FamilyKind, p: &FamilyParams) -> Result<SolutionFamily> {
    match kind {
        FamilyKind::Rational => family_rational(p.lambda),
        FamilyKind::Exponential => family_exponential(p.lambda),
        FamilyKind::Trig => family_trigonometric(p.a),
        FamilyKind::Unimodular => family_unimodular(p.lambda, p.h0),
        FamilyKind::Holomorphic => {
            nonzero("lambda", p.lambda)?;
            let lam = p.lambda;
            let fam = family_holomorphic(ClosedForm::new(move |z| *z * lam), p.h0)?;
            Ok(SolutionFamily { params: FamilyParams { lambda: lam, ..fam.params }, ..fam })
        }
    }
}

pub fn family_by_name(name: &str, p: &FamilyParams) -> Result<SolutionFamily> {
    family_by_kind(name.parse()?, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::DerivativeMode::Analytic;
    use crate::sigma::{psi_from_rho, rho_from_psi, sigma_residual};
    use crate::tolerance::EXACT;
    use crate::weierstrass::{density_p, weierstrass_residual};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn rational_point_values() {
        let f = family_rational(1.0).unwrap();
        let (p1, p2) = f.psi_forms();
        let z0 = c(0.0, 0.4);
        assert!(close(f.h_form().value(z0), c(1.0, 0.0), 1e-15));
        assert!(close(f.rho_form().value(z0), c(0.0, 0.0), 1e-15));
        assert!(close(p1.value(z0), c(0.0, 0.0), 1e-15));
        assert!(close(p2.value(z0), c(1.0, 0.0), 1e-15));
        let z1 = c(1.0, -0.3);
        let r5 = 5f64.sqrt();
        assert!(close(f.h_form().value(z1), c(0.2, 0.0), 1e-15));
        assert!(close(f.rho_form().value(z1), c(2.0, 0.0), 1e-15));
        assert!(close(p1.value(z1), c(2.0 / r5, 0.0), 1e-15));
        assert!(close(p2.value(z1), c(1.0 / r5, 0.0), 1e-15));
        let neg = f.with_eps(-1.0);
        assert!(close(neg.psi_forms().1.value(z1), c(-1.0 / r5, 0.0), 1e-15));
    }

    #[test]
    fn exponential_point_values() {
        let f = family_exponential(1.0).unwrap();
        let z0 = c(0.0, 0.7);
        assert!(close(f.h_form().value(z0), c(0.5, 0.0), 1e-15));
        assert!(close(f.rho_form().value(z0), c(1.0, 0.0), 1e-15));
        assert!(close(f.psi_forms().1.value(z0), c(0.5f64.sqrt(), 0.0), 1e-15));
        // ∂ρ = λe^{λs}
        let g = family_exponential(2.0).unwrap();
        let z = c(0.1, 0.2);
        assert!(close(g.rho_form().dz().unwrap().value(z), c(2.0 * (0.4f64).exp(), 0.0), 1e-14));
    }

    #[test]
    fn trig_point_values_against_substitution() {
        // s = π/6: ρ = 1/2, ∂ρ = √3/2; H = (√3/2)/(5/4); ψ₂ = ε(∂ρ)^{1/2}/(H^{1/2}(1+ρ²))
        let f = family_trigonometric(1.0).unwrap();
        let z = c(std::f64::consts::PI / 12.0, 0.0);
        let drho = 3f64.sqrt() / 2.0;
        let h = drho / 1.25;
        assert!(close(f.rho_form().value(z), c(0.5, 0.0), 1e-15));
        assert!(close(f.rho_form().dz().unwrap().value(z), c(drho, 0.0), 1e-15));
        assert!(close(f.h_form().value(z), c(h, 0.0), 1e-15));
        let psi2 = drho.sqrt() / (h.sqrt() * 1.25);
        assert!(close(f.psi_forms().1.value(z), c(psi2, 0.0), 1e-14));
        assert!(close(f.psi_forms().0.value(z), c(0.5 * psi2, 0.0), 1e-14));
        assert!(close(f.h_form().value(c(0.0, 0.3)), c(1.0, 0.0), 1e-15));
        assert!(!f.is_admissible(c(0.77, 0.0)));
        assert!(f.is_admissible(c(0.75, 0.0)));
    }

    #[test]
    fn printed_trig_h_fails_the_sigma_model() {
        let g = GridSpec::new(0.05, 0.6, -0.5, 0.5, 31, 31).unwrap();
        let f = family_trigonometric(1.0).unwrap();
        let rho = f.rho(&g).unwrap();
        let printed = MeanCurvature::from_closed_form(trig_printed_mean_curvature(1.0), &g).unwrap();
        // printed H is negative on the strip, so take its modulus for ln H
        let abs = MeanCurvature::from_real(&printed.values().map(f64::abs)).unwrap();
        let printed_abs = MeanCurvature::from_closed_form(
            {
                let p = trig_printed_mean_curvature(1.0);
                ClosedForm::new(move |z| -p.apply(z))
            },
            &g,
        )
        .unwrap();
        assert!(abs.values().min() > 0.0);
        assert!(sigma_residual(&rho, &printed_abs, Analytic).unwrap().max_norm > 0.1);
        // it is ∂̄ ln H of the corrected H
        let dlog = f.h_form().dzbar().unwrap();
        for k in (0..g.len()).step_by(37) {
            let z = g.z(k);
            let want = dlog.value(z) / f.h_form().value(z);
            assert!(close(printed.field().exact().unwrap().value(z), want, 1e-12));
        }
    }

    #[test]
    fn unimodular_and_holomorphic() {
        let g = GridSpec::square(1.0, 31).unwrap();
        let f = family_unimodular(2.0, 1.0).unwrap();
        let rho = f.rho(&g).unwrap();
        assert!(rho.unimodularity_defect() < 1e-14);
        let h = f.mean_curvature(&g).unwrap();
        assert!(sigma_residual(&rho, &h, Analytic).unwrap().max_norm < EXACT);
        let trivial = family_unimodular(0.0, 1.0).unwrap();
        assert!(trivial.spinor(&g).unwrap().is_zero());
        let hol = family_holomorphic(ClosedForm::new(|z| *z * *z), 0.5).unwrap();
        assert!(sigma_residual(&hol.rho(&g).unwrap(), &hol.mean_curvature(&g).unwrap(), Analytic).unwrap().max_norm < EXACT);
        assert!(family_holomorphic(ClosedForm::new(|z| z.conj()), 1.0).is_err());
        let ratio_h = family_rational(1.0).unwrap().mean_curvature(&g).unwrap();
        let z = family_by_name("holomorphic", &FamilyParams::default()).unwrap();
        assert!(sigma_residual(&z.rho(&g).unwrap(), &ratio_h, Analytic).unwrap().max_norm > 0.1);
    }

    #[test]
    fn parameter_errors() {
        assert!(family_rational(0.0).is_err());
        assert!(family_exponential(0.0).is_err());
        assert!(family_trigonometric(0.0).is_err());
        assert!(family_unimodular(1.0, 0.0).is_err());
        assert!("spiral".parse::<FamilyKind>().is_err());
        for k in FamilyKind::ALL {
            assert_eq!(k.name().parse::<FamilyKind>().unwrap(), k);
        }
    }

    /// Both transform directions, the system and constant density for every
    /// family and both branches.
    #[test]
    fn every_family_passes_both_transform_directions() {
        let params = FamilyParams { lambda: 1.0, a: 1.0, h0: 1.0 };
        for kind in FamilyKind::ALL {
            for eps in [1.0, -1.0] {
                let f = family_by_kind(kind, &params).unwrap().with_eps(eps);
                let g = f.default_domain(41, 41).unwrap();
                let (s, h, rho) = (f.spinor(&g).unwrap(), f.mean_curvature(&g).unwrap(), f.rho(&g).unwrap());
                let ws = weierstrass_residual(&s, &h, Analytic).unwrap().max_norm;
                assert!(ws < EXACT, "{kind} system {ws}");
                let from_psi = rho_from_psi(&s).unwrap();
                assert!(sigma_residual(&from_psi, &h, Analytic).unwrap().max_norm < EXACT, "{kind}");
                let from_rho = psi_from_rho(&rho, &h).unwrap();
                assert!(weierstrass_residual(&from_rho, &h, Analytic).unwrap().max_norm < EXACT, "{kind}");
                let d1 = from_rho.psi1().samples().zip_with(s.psi1().samples(), |a, b| a - b).unwrap();
                let d2 = from_rho.psi2().samples().zip_with(s.psi2().samples(), |a, b| a - b).unwrap();
                assert!(d1.max_abs() < EXACT && d2.max_abs() < EXACT, "{kind} eps {eps}");
                if let Some(p0) = f.constant_density() {
                    assert!(density_p(&s).unmasked().all(|v| (v - p0).abs() < EXACT), "{kind}");
                }
            }
        }
    }

    #[test]
    fn parameter_sweep_stays_exact() {
        for lam in [0.25, 0.5, 1.0, 2.0, 4.0, -1.5] {
            for f in [family_rational(lam).unwrap(), family_exponential(lam).unwrap()] {
                let g = f.default_domain(21, 21).unwrap();
                let r = weierstrass_residual(&f.spinor(&g).unwrap(), &f.mean_curvature(&g).unwrap(), Analytic).unwrap();
                let scale = (lam.abs()).powf(1.5).max(1.0);
                assert!(r.max_norm < EXACT * 10.0 * scale, "{} {lam} {}", f.name(), r.max_norm);
            }
        }
        for a in [0.5, 1.0, 2.0] {
            let f = family_trigonometric(a).unwrap();
            let g = f.default_domain(21, 21).unwrap();
            let r = sigma_residual(&f.rho(&g).unwrap(), &f.mean_curvature(&g).unwrap(), Analytic).unwrap();
            assert!(r.max_norm < EXACT, "{a}");
        }
    }
}
