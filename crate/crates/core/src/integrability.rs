//! Riccati constraints, zero curvature, the `H`-integrability criterion,
//! the sinh-Gordon identity for `p` and the constrained linearization.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::calculus::{map_jets, DerivativeMode, Field, JetField};
use crate::closed_form::ClosedForm;
use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::grid::GridSpec;
use crate::jet::Jet;
use crate::report::ResidualReport;
use crate::sigma::RhoField;
use crate::weierstrass::{current_jet, density_jet, density_p, MeanCurvature, SpinorField};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `∂∂̄(1/H)`; zero exactly for the Riccati-integrable class.
pub fn h_integrability_field(h: &MeanCurvature, mode: DerivativeMode) -> Result<ComplexField> {
    let hj = h.jets(mode)?;
    let [r] = map_jets([&hj], |[h]| [h.recip().d_dbar()])?;
    Ok(r)
}

pub fn h_integrability_residual(h: &MeanCurvature, mode: DerivativeMode) -> Result<ResidualReport> {
    let r = h_integrability_field(h, mode)?;
    Ok(ResidualReport::from_fields("h_integrability", &[("d_dbar_inverse_h", &r)]))
}

/// A function `Q` of one complex variable, real on the real axis.
#[derive(Debug, Clone)]
pub struct HolomorphicProfile {
    q: ClosedForm,
}

const PROBES: [(f64, f64); 4] = [(0.31, 0.27), (-0.62, 0.45), (0.13, -0.58), (0.77, -0.21)];
const REAL_PROBES: [f64; 4] = [-0.9, -0.35, 0.2, 0.85];

impl HolomorphicProfile {
    /// Validates `q` at probe points: `∂̄Q` must vanish and `Q(x)` must be real.
    pub fn new(q: ClosedForm) -> Result<Self> {
        if !q.has_derivatives() {
            return Err(Error::InvalidParameter("Q needs a differentiable closed form".into()));
        }
        for (x, y) in PROBES {
            let z = Complex64::new(x, y);
            if !q.admits(z) {
                continue;
            }
            let j = q.jet_at(z, 1)?;
            if j.dbar().norm() > 1e-12 * (1.0 + j.d().norm()) {
                return Err(Error::InvalidParameter(format!("Q depends on z̄ (∂̄Q = {} at {z})", j.dbar())));
            }
        }
        for x in REAL_PROBES {
            let z = Complex64::new(x, 0.0);
            if !q.admits(z) {
                continue;
            }
            let v = q.value(z);
            if v.im.abs() > 1e-12 * (1.0 + v.re.abs()) {
                return Err(Error::InvalidParameter(format!("Q({x}) = {v} is not real")));
            }
        }
        Ok(HolomorphicProfile { q })
    }

    pub fn from_fn(q: impl Fn(&Jet) -> Jet + Send + Sync + 'static) -> Result<Self> {
        Self::new(ClosedForm::new(q))
    }

    pub fn q(&self) -> &ClosedForm {
        &self.q
    }

    /// `H = 1/(Q(z) + Q(z̄))` as a closed form.
    pub fn mean_curvature_form(&self) -> ClosedForm {
        let (qa, qb) = (self.q.clone(), self.q.clone());
        let guard = self.q.clone();
        ClosedForm::derived(self.q.depth(), move |z| (qa.apply(z) + qb.apply(&z.conj())).recip())
            .with_guard(move |z| {
                guard.admits(z) && guard.admits(z.conj()) && (guard.value(z) + guard.value(z.conj())).norm() > 1e-12
            })
    }
}

/// `H = 1/(Q(z) + Q(z̄))` sampled on `grid`; zeros of the denominator are masked.
pub fn h_from_q(q: &HolomorphicProfile, grid: &GridSpec) -> Result<MeanCurvature> {
    MeanCurvature::from_closed_form(q.mean_curvature_form(), grid)
}

/// The coefficients `A₁ = (A₁⁰, A₁¹, A₁²)` of the `∂ρ` equation and `A₂`
/// of the `∂̄ρ` equation.
#[derive(Debug, Clone)]
pub struct RiccatiCoeffs {
    pub a1: [Field; 3],
    pub a2: [Field; 3],
}

impl RiccatiCoeffs {
    pub fn new(a1: [Field; 3], a2: [Field; 3]) -> Result<Self> {
        let g = *a1[0].grid();
        if a1.iter().chain(a2.iter()).any(|f| *f.grid() != g) {
            return Err(Error::GridMismatch);
        }
        Ok(RiccatiCoeffs { a1, a2 })
    }

    pub fn constant(a1: [Complex64; 3], a2: [Complex64; 3], grid: &GridSpec) -> Result<Self> {
        let mk = |c: Complex64| Field::from_closed_form(ClosedForm::constant(c), grid);
        Self::new([mk(a1[0])?, mk(a1[1])?, mk(a1[2])?], [mk(a2[0])?, mk(a2[1])?, mk(a2[2])?])
    }

    pub fn zeros(grid: &GridSpec) -> Result<Self> {
        Self::constant([ZERO; 3], [ZERO; 3], grid)
    }

    pub fn grid(&self) -> &GridSpec {
        self.a1[0].grid()
    }

    fn jets(&self, mode: DerivativeMode) -> Result<[JetField; 6]> {
        let get = |f: &Field| match (mode, f.exact()) {
            (DerivativeMode::Analytic, None) => f.jets(DerivativeMode::FiniteDifference),
            _ => f.jets(mode),
        };
        Ok([get(&self.a1[0])?, get(&self.a1[1])?, get(&self.a1[2])?, get(&self.a2[0])?, get(&self.a2[1])?, get(&self.a2[2])?])
    }
}

/// The three compatibility conditions of the Riccati pair.
/// Sampled coefficients without a closed form always use finite differences.
pub fn zero_curvature_residual(c: &RiccatiCoeffs, mode: DerivativeMode) -> Result<ResidualReport> {
    let j = c.jets(mode)?;
    let [z0, z1, z2] = map_jets([&j[0], &j[1], &j[2], &j[3], &j[4], &j[5]], |[a10, a11, a12, a20, a21, a22]| {
        let (a10v, a11v, a12v) = (a10.value(), a11.value(), a12.value());
        let (a20v, a21v, a22v) = (a20.value(), a21.value(), a22.value());
        [
            a10.dbar() - a20.d() + a11v * a20v - a21v * a10v,
            a11.dbar() - a21.d() + 2.0 * a12v * a20v - 2.0 * a22v * a10v,
            a12.dbar() - a22.d() + a12v * a21v - a11v * a22v,
        ]
    })?;
    Ok(ResidualReport::from_fields("zero_curvature", &[("order_0", &z0), ("order_1", &z1), ("order_2", &z2)]))
}

/// Defects of `∂ρ = A₁⁰ + A₁¹ρ + A₁²ρ²` and the `∂̄ρ` equation.
pub fn riccati_residual(r: &RhoField, c: &RiccatiCoeffs, mode: DerivativeMode) -> Result<ResidualReport> {
    if r.grid() != c.grid() {
        return Err(Error::GridMismatch);
    }
    let rho = r.jets(mode)?;
    let j = c.jets(mode)?;
    let [d1, d2] = map_jets([&rho, &j[0], &j[1], &j[2], &j[3], &j[4], &j[5]], |[rho, a10, a11, a12, a20, a21, a22]| {
        let v = rho.value();
        [
            rho.d() - (a10.value() + a11.value() * v + a12.value() * v * v),
            rho.dbar() - (a20.value() + a21.value() * v + a22.value() * v * v),
        ]
    })?;
    Ok(ResidualReport::from_fields("riccati_constraints", &[("d_rho", &d1), ("dbar_rho", &d2)]))
}

/// Least-squares Riccati coefficients for a sampled ρ.
///
/// Coefficients are taken constant over the 3×3 neighbourhood of each
/// point (clipped at edges), and each equation's three coefficients are the
/// minimum-norm least-squares solution of its nine samples.
pub fn fit_riccati(r: &RhoField, mode: DerivativeMode) -> Result<RiccatiCoeffs> {
    let g = *r.grid();
    let rho = r.jets(mode)?;
    let fits: Vec<Option<[Complex64; 6]>> = (0..g.len())
        .into_par_iter()
        .map(|k| {
            rho.at(k)?;
            let (i, j) = g.coords(k);
            let mut rows = Vec::with_capacity(9);
            for jj in j.saturating_sub(1)..=(j + 1).min(g.ny - 1) {
                for ii in i.saturating_sub(1)..=(i + 1).min(g.nx - 1) {
                    if let Some(jet) = rho.at(g.index(ii, jj)) {
                        rows.push((jet.value(), jet.d(), jet.dbar()));
                    }
                }
            }
            let n = rows.len();
            let m = DMatrix::from_fn(n, 3, |row, col| rows[row].0.powu(col as u32));
            let b1 = DVector::from_fn(n, |row, _| rows[row].1);
            let b2 = DVector::from_fn(n, |row, _| rows[row].2);
            let svd = m.svd(true, true);
            let eps = 1e-10 * svd.singular_values.max().max(1e-300);
            let x1 = svd.solve(&b1, eps).ok()?;
            let x2 = svd.solve(&b2, eps).ok()?;
            Some([x1[0], x1[1], x1[2], x2[0], x2[1], x2[2]])
        })
        .collect();
    let mask: Vec<bool> = fits.iter().map(|f| f.is_none()).collect();
    let field = |c: usize| -> Result<Field> {
        let vals = fits.iter().map(|f| f.map_or(ZERO, |v| v[c])).collect();
        Ok(Field::from_samples(ComplexField::with_mask(g, vals, mask.clone())?))
    };
    RiccatiCoeffs::new([field(0)?, field(1)?, field(2)?], [field(3)?, field(4)?, field(5)?])
}

fn require_positive_density(s: &SpinorField) -> Result<()> {
    let p = density_p(s);
    if p.unmasked().any(|v| v <= 0.0) {
        return Err(Error::Precondition("density p must be positive".into()));
    }
    Ok(())
}

/// `∂∂̄ ln p − |J|²/p² + p²H²`.
pub fn sinh_gordon_residual(s: &SpinorField, h: &MeanCurvature, mode: DerivativeMode) -> Result<ResidualReport> {
    require_positive_density(s)?;
    let (a, b) = s.jets(mode)?;
    let hj = h.jets(mode)?;
    let [r] = map_jets([&a, &b, &hj], |[a, b, h]| {
        let p = density_jet(a, b);
        let pv = p.value();
        let j = current_jet(a, b).value();
        let hv = h.value();
        [p.ln().d_dbar() - j.norm_sqr() / (pv * pv) + pv * pv * hv * hv]
    })?;
    Ok(ResidualReport::from_fields("sinh_gordon", &[("sinh_gordon", &r)]))
}

/// `|J|² − p⁴H²`, which the sinh-Gordon identity forces to vanish when `p`
/// is constant.
pub fn current_modulus_identity(s: &SpinorField, h: &MeanCurvature, mode: DerivativeMode) -> Result<ResidualReport> {
    let (a, b) = s.jets(mode)?;
    let hj = h.jets(mode)?;
    let [r] = map_jets([&a, &b, &hj], |[a, b, h]| {
        let p = a.value().norm_sqr() + b.value().norm_sqr();
        let hv = h.value();
        [current_jet(a, b).value().norm_sqr() - p.powi(4) * hv * hv]
    })?;
    Ok(ResidualReport::from_fields("current_modulus_identity", &[("j2_minus_p4h2", &r)]))
}

/// The differential constraints `ψ̄₁∂̄ψ₁ + ψ₂∂̄ψ̄₂` and `ψ̄₂∂ψ₂ + ψ₁∂ψ̄₁`,
/// with the grid variance of `p` as a diagnostic component.
pub fn linearization_constraint_residual(s: &SpinorField, mode: DerivativeMode) -> Result<ResidualReport> {
    let (a, b) = s.jets(mode)?;
    let [c1, c2] = map_jets([&a, &b], |[a, b]| {
        let (ac, bc) = (a.conj(), b.conj());
        [ac.value() * a.dbar() + b.value() * bc.dbar(), bc.value() * b.d() + a.value() * ac.d()]
    })?;
    let var = density_p(s).variance();
    Ok(ResidualReport::from_fields("linearization_constraints", &[("dbar_constraint", &c1), ("d_constraint", &c2)])
        .with_scalar("p_variance", var, false))
}

/// The decoupled second-order system for `p ≡ p₀`, with conjugates.
pub fn linear_system_residual(s: &SpinorField, h: &MeanCurvature, p0: f64, mode: DerivativeMode) -> Result<ResidualReport> {
    h.require_positive()?;
    let (a, b) = s.jets(mode)?;
    let hj = h.jets(mode)?;
    let eq1 = |psi: &Jet, h: &Jet| {
        let hv = h.value();
        psi.d_dbar() - h.dbar() / hv * psi.d() + p0 * p0 * hv * hv * psi.value()
    };
    let eq2 = |psi: &Jet, h: &Jet| {
        let hv = h.value();
        psi.d_dbar() - h.d() / hv * psi.dbar() + p0 * p0 * hv * hv * psi.value()
    };
    let [r1, r2, r3, r4] = map_jets([&a, &b, &hj], |[a, b, h]| {
        // conjugate equations swap ∂ and ∂̄
        [eq1(a, h), eq2(b, h), eq2(&a.conj(), h), eq1(&b.conj(), h)]
    })?;
    Ok(ResidualReport::from_fields(
        "linear_system",
        &[("psi1", &r1), ("psi2", &r2), ("conj_psi1", &r3), ("conj_psi2", &r4)],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tolerance::EXACT;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn grid(n: usize) -> GridSpec {
        GridSpec::square(1.0, n).unwrap()
    }

    fn rational_h(lam: f64, g: &GridSpec) -> MeanCurvature {
        MeanCurvature::from_closed_form(
            ClosedForm::new(move |z| {
                let s = (*z + z.conj()) * lam;
                (1.0 + s * s).recip()
            }),
            g,
        )
        .unwrap()
    }

    fn rational_spinor(lam: f64, g: &GridSpec) -> SpinorField {
        let psi2 = ClosedForm::new(move |z| {
            let s = (*z + z.conj()) * lam;
            lam.sqrt() * (1.0 + s * s).powf(-0.5)
        });
        let psi1 = ClosedForm::new(move |z| {
            let s = (*z + z.conj()) * lam;
            lam.sqrt() * s * (1.0 + s * s).powf(-0.5)
        });
        SpinorField::from_closed_forms(psi1, psi2, g).unwrap()
    }

    #[test]
    fn rational_h_is_not_integrable_class() {
        // 1/H = 1 + λ²(z+z̄)², so ∂∂̄(1/H) = 2λ²
        let g = grid(21);
        for lam in [1.0, 0.5] {
            let r = h_integrability_field(&rational_h(lam, &g), DerivativeMode::Analytic).unwrap();
            assert!(r.values().iter().all(|v| (v - 2.0 * lam * lam).norm() < 1e-12));
        }
        let h0 = MeanCurvature::constant(2.0, &g).unwrap();
        assert_eq!(h_integrability_residual(&h0, DerivativeMode::Analytic).unwrap().max_norm, 0.0);
    }

    #[test]
    fn q_class_is_integrable() {
        let g = grid(41);
        let q = HolomorphicProfile::from_fn(|z| z.cosh()).unwrap();
        let h = h_from_q(&q, &g).unwrap();
        assert!(h_integrability_residual(&h, DerivativeMode::Analytic).unwrap().max_norm < EXACT);
        let (i, j) = g.nearest(0.3, 0.0).unwrap();
        let k = g.index(i, j);
        let want = 1.0 / (2.0 * g.z(k).re.cosh());
        assert!((h.values().values()[k] - want).abs() < 1e-14);
        let fd = h_integrability_residual(&h.sampled_only(), DerivativeMode::FiniteDifference).unwrap();
        assert!(fd.max_norm < 1e-2);
        let c = HolomorphicProfile::from_fn(|z| Jet::constant(1.5, z.order())).unwrap();
        let hc = h_from_q(&c, &g).unwrap();
        assert!(hc.values().unmasked().all(|v| (v - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn q_profile_contract() {
        assert!(HolomorphicProfile::from_fn(|z| *z * z.conj()).is_err());
        assert!(HolomorphicProfile::from_fn(|z| *z * c(0.0, 1.0)).is_err());
        assert!(HolomorphicProfile::from_fn(|z| *z * *z + 1.0).is_ok());
    }

    #[test]
    fn zero_curvature_basic_cases() {
        let g = grid(11);
        let zero = RiccatiCoeffs::zeros(&g).unwrap();
        assert_eq!(zero_curvature_residual(&zero, DerivativeMode::Analytic).unwrap().max_norm, 0.0);
        // A₁ = (1, 2, 3), A₂ = (2, 4, 6) satisfies all three algebraic relations
        let ok = RiccatiCoeffs::constant([c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)], [c(2.0, 0.0), c(4.0, 0.0), c(6.0, 0.0)], &g).unwrap();
        assert!(zero_curvature_residual(&ok, DerivativeMode::Analytic).unwrap().max_norm < 1e-14);
        let bad = RiccatiCoeffs::constant([c(1.0, 0.0), c(2.0, 0.0), ZERO], [c(1.0, 0.0), ZERO, ZERO], &g).unwrap();
        assert!(zero_curvature_residual(&bad, DerivativeMode::Analytic).unwrap().max_norm > 1.0);
    }

    #[test]
    fn riccati_for_known_rho() {
        let g = grid(21);
        let lam = 0.7;
        let rho = RhoField::from_closed_form(ClosedForm::new(move |z| (*z + z.conj()) * lam), &g).unwrap();
        let co = RiccatiCoeffs::constant([c(lam, 0.0), ZERO, ZERO], [c(lam, 0.0), ZERO, ZERO], &g).unwrap();
        assert!(riccati_residual(&rho, &co, DerivativeMode::Analytic).unwrap().max_norm < 1e-15);
        let ex = RhoField::from_closed_form(ClosedForm::new(move |z| ((*z + z.conj()) * lam).exp()), &g).unwrap();
        let co = RiccatiCoeffs::constant([ZERO, c(lam, 0.0), ZERO], [ZERO, c(lam, 0.0), ZERO], &g).unwrap();
        assert!(riccati_residual(&ex, &co, DerivativeMode::Analytic).unwrap().max_norm < 1e-14);
        let zero = RhoField::from_closed_form(ClosedForm::constant(0.0), &g).unwrap();
        assert_eq!(riccati_residual(&zero, &RiccatiCoeffs::zeros(&g).unwrap(), DerivativeMode::Analytic).unwrap().max_norm, 0.0);
    }

    #[test]
    fn fitted_coefficients_satisfy_zero_curvature() {
        let g = grid(41);
        let rho = RhoField::from_closed_form(ClosedForm::new(|z| (*z + z.conj()).exp()), &g).unwrap();
        let co = fit_riccati(&rho, DerivativeMode::Analytic).unwrap();
        assert!(riccati_residual(&rho, &co, DerivativeMode::Analytic).unwrap().max_norm < 1e-10);
        let k = g.index(20, 20);
        assert!((co.a1[1].samples().values()[k] - 1.0).norm() < 1e-8);
        let zc = zero_curvature_residual(&co, DerivativeMode::FiniteDifference).unwrap();
        assert!(zc.max_norm < 1e-6, "{}", zc.max_norm);
    }

    #[test]
    fn sinh_gordon_and_current_identity() {
        let g = grid(41);
        let (s, h) = (rational_spinor(1.0, &g), rational_h(1.0, &g));
        assert!(sinh_gordon_residual(&s, &h, DerivativeMode::Analytic).unwrap().max_norm < EXACT);
        assert!(current_modulus_identity(&s, &h, DerivativeMode::Analytic).unwrap().max_norm < 1e-12);
        let fd = sinh_gordon_residual(&s, &h, DerivativeMode::FiniteDifference).unwrap();
        assert!(fd.max_norm < 0.05, "{}", fd.max_norm);
        assert!(matches!(sinh_gordon_residual(&SpinorField::zeros(&g), &h, DerivativeMode::Analytic), Err(Error::Precondition(_))));
    }

    #[test]
    fn linearization() {
        let g = grid(41);
        let lam = 2.0;
        let (s, h) = (rational_spinor(lam, &g), rational_h(lam, &g));
        let r = linearization_constraint_residual(&s, DerivativeMode::Analytic).unwrap();
        assert!(r.max_norm < EXACT);
        assert!(r.component("p_variance").unwrap().max_norm < 1e-20);
        assert!(linear_system_residual(&s, &h, lam, DerivativeMode::Analytic).unwrap().max_norm < 1e-11);
        assert!(linear_system_residual(&s, &h, 1.0, DerivativeMode::Analytic).unwrap().max_norm > 0.1);
        let zero = SpinorField::zeros(&g);
        assert_eq!(linearization_constraint_residual(&zero, DerivativeMode::Analytic).unwrap().max_norm, 0.0);
        assert_eq!(linear_system_residual(&zero, &h, lam, DerivativeMode::Analytic).unwrap().max_norm, 0.0);
        let noisy = ComplexField::from_fn(g, |z| (z * 3.1).sin() + z.conj()).unwrap();
        let rnd = SpinorField::from_samples(noisy.clone(), noisy.map(|v| v * v)).unwrap();
        assert!(linearization_constraint_residual(&rnd, DerivativeMode::FiniteDifference).unwrap().max_norm > 0.1);
    }
}
