//! Truncated bivariate Taylor series in `(dz, dz̄)`.
//!
//! A [`Jet`] of order `n` carries every Wirtinger derivative
//! `∂^j ∂̄^k f` with `j + k ≤ n` at one base point. `z` and `z̄` are treated
//! as independent variables, which is exact for the real-analytic functions
//! used throughout the crate. Arithmetic and the elementary functions follow
//! the usual forward-mode rules, so a closed-form expression evaluated on
//! [`Jet::z`] yields its exact derivatives up to rounding.
//!
//! Coefficients are stored Taylor-normalised: slot `(j, k)` holds
//! `∂^j ∂̄^k f / (j! k!)`.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use num_complex::Complex64;

/// Highest total derivative order a jet can carry.
pub const MAX_ORDER: usize = 5;
const LEN: usize = (MAX_ORDER + 1) * (MAX_ORDER + 2) / 2;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[inline]
const fn slot(j: usize, k: usize) -> usize {
    let d = j + k;
    d * (d + 1) / 2 + k
}

#[inline]
const fn len_for(order: usize) -> usize {
    (order + 1) * (order + 2) / 2
}

const FACT: [f64; MAX_ORDER + 1] = [1.0, 1.0, 2.0, 6.0, 24.0, 120.0];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    order: u8,
    c: [Complex64; LEN],
}

impl Jet {
    pub fn constant(v: impl Into<Complex64>, order: usize) -> Self {
        assert!(order <= MAX_ORDER, "jet order {order} exceeds {MAX_ORDER}");
        let mut c = [ZERO; LEN];
        c[0] = v.into();
        Jet { order: order as u8, c }
    }

    /// The coordinate function `z` expanded at `z0`.
    pub fn z(z0: Complex64, order: usize) -> Self {
        let mut j = Self::constant(z0, order);
        if order > 0 {
            j.c[slot(1, 0)] = ONE;
        }
        j
    }

    /// The coordinate function `z̄` expanded at `z0`.
    pub fn zbar(z0: Complex64, order: usize) -> Self {
        let mut j = Self::constant(z0.conj(), order);
        if order > 0 {
            j.c[slot(0, 1)] = ONE;
        }
        j
    }

    /// Order-2 jet from value, first derivatives and the three second derivatives
    /// `∂², ∂∂̄, ∂̄²`.
    pub fn from_second_order(
        value: Complex64,
        dz: Complex64,
        dzbar: Complex64,
        dzz: Complex64,
        dzdzbar: Complex64,
        dzbarzbar: Complex64,
    ) -> Self {
        let mut j = Self::constant(value, 2);
        j.c[slot(1, 0)] = dz;
        j.c[slot(0, 1)] = dzbar;
        j.c[slot(2, 0)] = dzz * 0.5;
        j.c[slot(1, 1)] = dzdzbar;
        j.c[slot(0, 2)] = dzbarzbar * 0.5;
        j
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order as usize
    }

    /// `∂^j ∂̄^k f` at the base point.
    pub fn derivative(&self, j: usize, k: usize) -> Complex64 {
        assert!(j + k <= self.order(), "derivative ({j},{k}) beyond jet order {}", self.order);
        self.c[slot(j, k)] * (FACT[j] * FACT[k])
    }

    #[inline]
    pub fn value(&self) -> Complex64 {
        self.c[0]
    }

    pub fn d(&self) -> Complex64 {
        self.derivative(1, 0)
    }

    pub fn dbar(&self) -> Complex64 {
        self.derivative(0, 1)
    }

    pub fn d_dbar(&self) -> Complex64 {
        self.derivative(1, 1)
    }

    pub fn is_finite(&self) -> bool {
        self.c[..len_for(self.order())].iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// Same expansion truncated to a lower order.
    pub fn truncate(&self, order: usize) -> Self {
        let order = order.min(self.order());
        let mut out = *self;
        out.order = order as u8;
        for v in out.c[len_for(order)..].iter_mut() {
            *v = ZERO;
        }
        out
    }

    /// The jet of `∂f`; one order is lost.
    pub fn dz(&self) -> Self {
        assert!(self.order > 0, "cannot differentiate an order-0 jet");
        let order = self.order() - 1;
        let mut out = Self::constant(ZERO, order);
        for d in 0..=order {
            for k in 0..=d {
                let j = d - k;
                out.c[slot(j, k)] = self.c[slot(j + 1, k)] * (j + 1) as f64;
            }
        }
        out
    }

    /// The jet of `∂̄f`; one order is lost.
    pub fn dzbar(&self) -> Self {
        assert!(self.order > 0, "cannot differentiate an order-0 jet");
        let order = self.order() - 1;
        let mut out = Self::constant(ZERO, order);
        for d in 0..=order {
            for k in 0..=d {
                let j = d - k;
                out.c[slot(j, k)] = self.c[slot(j, k + 1)] * (k + 1) as f64;
            }
        }
        out
    }

    /// Complex conjugate function: `∂(f̄) = conj(∂̄f)`, so slots swap.
    pub fn conj(&self) -> Self {
        let mut out = *self;
        for d in 0..=self.order() {
            for k in 0..=d {
                let j = d - k;
                out.c[slot(j, k)] = self.c[slot(k, j)].conj();
            }
        }
        out
    }

    /// `|f|²` as the jet of `f f̄`.
    pub fn norm_sqr(&self) -> Self {
        *self * self.conj()
    }

    fn mul_jet(&self, other: &Jet) -> Jet {
        let order = self.order().min(other.order());
        let mut out = Self::constant(ZERO, order);
        for d1 in 0..=order {
            for k1 in 0..=d1 {
                let a = self.c[slot(d1 - k1, k1)];
                if a == ZERO {
                    continue;
                }
                for d2 in 0..=(order - d1) {
                    for k2 in 0..=d2 {
                        let b = other.c[slot(d2 - k2, k2)];
                        out.c[slot(d1 - k1 + d2 - k2, k1 + k2)] += a * b;
                    }
                }
            }
        }
        out
    }

    /// `φ(f)` for a holomorphic `φ` given its derivatives `φ^(k)(f(z0))`.
    fn compose(&self, derivs: &[Complex64]) -> Jet {
        let order = self.order();
        debug_assert!(derivs.len() > order);
        let mut delta = *self;
        delta.c[0] = ZERO;
        let mut out = Self::constant(derivs[0], order);
        let mut power = Self::constant(ONE, order);
        for (k, dk) in derivs.iter().enumerate().take(order + 1).skip(1) {
            power = power.mul_jet(&delta);
            let scale = *dk / FACT[k];
            for s in 0..len_for(order) {
                out.c[s] += power.c[s] * scale;
            }
        }
        out
    }

    pub fn recip(&self) -> Jet {
        let v = self.value();
        let mut d = [ZERO; MAX_ORDER + 1];
        let inv = ONE / v;
        let mut p = inv;
        for (k, slot) in d.iter_mut().enumerate() {
            // (-1)^k k! / v^(k+1)
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            *slot = p * (sign * FACT[k]);
            p *= inv;
        }
        self.compose(&d)
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        self.compose(&[e; MAX_ORDER + 1])
    }

    /// Principal branch at the base value.
    pub fn ln(&self) -> Jet {
        let v = self.value();
        let mut d = [ZERO; MAX_ORDER + 1];
        d[0] = v.ln();
        let inv = ONE / v;
        let mut p = inv;
        for (k, slot) in d.iter_mut().enumerate().skip(1) {
            // (-1)^(k-1) (k-1)! / v^k
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            *slot = p * (sign * FACT[k - 1]);
            p *= inv;
        }
        self.compose(&d)
    }

    /// `f^a` on the principal branch at the base value.
    pub fn powf(&self, a: f64) -> Jet {
        let v = self.value();
        let base = v.powf(a);
        let mut d = [ZERO; MAX_ORDER + 1];
        let inv = ONE / v;
        let mut coeff = 1.0;
        let mut p = base;
        for (k, slot) in d.iter_mut().enumerate() {
            *slot = p * coeff;
            coeff *= a - k as f64;
            p *= inv;
        }
        self.compose(&d)
    }

    /// Principal square root at the base value.
    pub fn sqrt(&self) -> Jet {
        let v = self.value();
        let r = v.sqrt();
        let mut d = [ZERO; MAX_ORDER + 1];
        let inv = ONE / v;
        let mut coeff = 1.0;
        let mut p = r;
        for (k, slot) in d.iter_mut().enumerate() {
            *slot = p * coeff;
            coeff *= 0.5 - k as f64;
            p *= inv;
        }
        self.compose(&d)
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = (self.value().sin(), self.value().cos());
        self.compose(&[s, c, -s, -c, s, c])
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = (self.value().sin(), self.value().cos());
        self.compose(&[c, -s, -c, s, c, -s])
    }

    pub fn tan(&self) -> Jet {
        self.sin() / self.cos()
    }

    pub fn sinh(&self) -> Jet {
        let (s, c) = (self.value().sinh(), self.value().cosh());
        self.compose(&[s, c, s, c, s, c])
    }

    pub fn cosh(&self) -> Jet {
        let (s, c) = (self.value().sinh(), self.value().cosh());
        self.compose(&[c, s, c, s, c, s])
    }

    pub fn powi(&self, n: u32) -> Jet {
        let mut out = Self::constant(ONE, self.order());
        for _ in 0..n {
            out = out.mul_jet(self);
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Jet {
        let mut out = *self;
        for v in out.c[..len_for(self.order())].iter_mut() {
            *v *= s;
        }
        out
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        let order = self.order().min(rhs.order());
        let mut out = self.truncate(order);
        for s in 0..len_for(order) {
            out.c[s] += rhs.c[s];
        }
        out
    }
}

impl AddAssign for Jet {
    fn add_assign(&mut self, rhs: Jet) {
        *self = *self + rhs;
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        self + (-rhs)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        self.mul_jet(&rhs)
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, rhs: Jet) -> Jet {
        self.mul_jet(&rhs.recip())
    }
}

macro_rules! scalar_ops {
    ($t:ty, $conv:expr) => {
        impl Add<$t> for Jet {
            type Output = Jet;
            fn add(self, rhs: $t) -> Jet {
                let mut out = self;
                out.c[0] += $conv(rhs);
                out
            }
        }
        impl Add<Jet> for $t {
            type Output = Jet;
            fn add(self, rhs: Jet) -> Jet {
                rhs + self
            }
        }
        impl Sub<$t> for Jet {
            type Output = Jet;
            fn sub(self, rhs: $t) -> Jet {
                let mut out = self;
                out.c[0] -= $conv(rhs);
                out
            }
        }
        impl Sub<Jet> for $t {
            type Output = Jet;
            fn sub(self, rhs: Jet) -> Jet {
                (-rhs) + self
            }
        }
        impl Mul<$t> for Jet {
            type Output = Jet;
            fn mul(self, rhs: $t) -> Jet {
                self.scale($conv(rhs))
            }
        }
        impl Mul<Jet> for $t {
            type Output = Jet;
            fn mul(self, rhs: Jet) -> Jet {
                rhs.scale($conv(self))
            }
        }
        impl Div<$t> for Jet {
            type Output = Jet;
            fn div(self, rhs: $t) -> Jet {
                self.scale(ONE / $conv(rhs))
            }
        }
        impl Div<Jet> for $t {
            type Output = Jet;
            fn div(self, rhs: Jet) -> Jet {
                rhs.recip().scale($conv(self))
            }
        }
    };
}

scalar_ops!(f64, |v: f64| Complex64::new(v, 0.0));
scalar_ops!(Complex64, |v: Complex64| v);

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn coordinate_derivatives() {
        let z0 = c(0.3, 0.7);
        let z = Jet::z(z0, 3);
        let zb = Jet::zbar(z0, 3);
        assert_eq!(z.d(), ONE);
        assert_eq!(z.dbar(), ZERO);
        assert_eq!(zb.dbar(), ONE);
        // z + z̄ = 2x
        assert!(close((z + zb).value(), c(0.6, 0.0), 1e-15));
        // ∂∂̄ |z|² = 1
        assert!(close((z * zb).d_dbar(), ONE, 1e-15));
        assert!(close((z * z).d_dbar(), ZERO, 1e-15));
    }

    #[test]
    fn product_and_quotient_rules() {
        let z0 = c(0.4, -0.2);
        let z = Jet::z(z0, 5);
        let zb = Jet::zbar(z0, 5);
        // f = z² z̄³ : ∂∂̄ f = 6 z z̄²
        let f = z.powi(2) * zb.powi(3);
        assert!(close(f.d_dbar(), 6.0 * z0 * z0.conj().powi(2), 1e-13));
        assert!(close(f.derivative(2, 3), c(12.0, 0.0), 1e-12));
        // 1 / (1 + z z̄) : ∂ = -z̄/(1+|z|²)²
        let g = 1.0 / (1.0 + z * zb);
        let n = 1.0 + z0.norm_sqr();
        assert!(close(g.d(), -z0.conj() / (n * n), 1e-14));
        // ∂∂̄ of the same: (2|z|²-1)... check against the closed form -1/n² + 2|z|²/n³
        assert!(close(g.d_dbar(), c(-1.0 / (n * n) + 2.0 * z0.norm_sqr() / (n * n * n), 0.0), 1e-13));
    }

    #[test]
    fn elementary_functions_match_hand_derivatives() {
        let z0 = c(0.21, 0.13);
        let z = Jet::z(z0, 5);
        let zb = Jet::zbar(z0, 5);
        let s = z + zb;
        let lam = 1.3;
        let e = (s * lam).exp();
        let sv = 2.0 * z0.re;
        assert!(close(e.dbar(), c(lam * (lam * sv).exp(), 0.0), 1e-14));
        assert!(close(e.derivative(2, 3), c(lam.powi(5) * (lam * sv).exp(), 0.0), 1e-12));
        let l = (1.0 + s * s).ln();
        // ∂∂̄ ln(1+s²) = 2(1-s²)/(1+s²)²
        assert!(close(l.d_dbar(), c(2.0 * (1.0 - sv * sv) / (1.0 + sv * sv).powi(2), 0.0), 1e-13));
        let r = (1.0 + s * s).sqrt();
        assert!(close(r.d(), c(sv / (1.0 + sv * sv).sqrt(), 0.0), 1e-14));
        let t = s.tan();
        assert!(close(t.d(), c(1.0 / sv.cos().powi(2), 0.0), 1e-13));
        assert!(close(s.sin().d_dbar(), c(-sv.sin(), 0.0), 1e-14));
        assert!(close(s.cosh().d(), c(sv.sinh(), 0.0), 1e-14));
        let p = (1.0 + s * s).powf(-1.5);
        assert!(close(p.d(), c(-1.5 * 2.0 * sv * (1.0 + sv * sv).powf(-2.5), 0.0), 1e-13));
    }

    #[test]
    fn conjugation_swaps_derivatives() {
        let z0 = c(0.5, 0.25);
        let z = Jet::z(z0, 3);
        let zb = Jet::zbar(z0, 3);
        let f = z * z * zb + c(0.0, 2.0) * zb;
        let g = f.conj();
        assert!(close(g.d(), f.dbar().conj(), 1e-15));
        assert!(close(g.dbar(), f.d().conj(), 1e-15));
        assert!(close(g.d_dbar(), f.d_dbar().conj(), 1e-15));
        assert!(close(g.value(), f.value().conj(), 1e-15));
    }

    #[test]
    fn differentiation_lowers_order() {
        let z = Jet::z(c(0.1, 0.2), 3);
        let f = z.powi(3);
        let df = f.dz();
        assert_eq!(df.order(), 2);
        assert!(close(df.value(), 3.0 * c(0.1, 0.2).powi(2), 1e-15));
        assert!(close(df.d(), 6.0 * c(0.1, 0.2), 1e-15));
        assert_eq!(f.dzbar().value(), ZERO);
    }

    #[test]
    fn mixed_order_arithmetic_truncates() {
        let z0 = c(0.1, 0.0);
        let a = Jet::z(z0, 4);
        let b = Jet::z(z0, 2);
        assert_eq!((a * b).order(), 2);
        assert_eq!((a + b).order(), 2);
    }
}
