//! Sampled complex and real fields with an exclusion mask.

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::GridSpec;

/// Complex samples on a [`GridSpec`]. `mask[k] == true` excludes point `k`
/// from stencils and norms; masked values are stored as zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    grid: GridSpec,
    values: Vec<Complex64>,
    mask: Vec<bool>,
}

impl ComplexField {
    /// All values must be finite.
    pub fn new(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        let mask = vec![false; grid.len()];
        Self::with_mask(grid, values, mask)
    }

    /// Values at masked points are ignored (and zeroed); everything else must be finite.
    pub fn with_mask(grid: GridSpec, mut values: Vec<Complex64>, mask: Vec<bool>) -> Result<Self> {
        grid.validate()?;
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch { expected: grid.len(), got: values.len() });
        }
        if mask.len() != grid.len() {
            return Err(Error::MaskMismatch(format!("mask has {} entries, grid {}", mask.len(), grid.len())));
        }
        for (k, v) in values.iter_mut().enumerate() {
            if mask[k] {
                *v = Complex64::new(0.0, 0.0);
            } else if !(v.re.is_finite() && v.im.is_finite()) {
                let z = grid.z(k);
                return Err(Error::Singular { x: z.re, y: z.im });
            }
        }
        Ok(ComplexField { grid, values, mask })
    }

    /// Builds a field from a pointwise function of `z`; non-finite results are masked.
    pub fn from_fn_masked(grid: GridSpec, f: impl Fn(Complex64) -> Complex64 + Sync) -> Result<Self> {
        let values: Vec<Complex64> = (0..grid.len()).into_par_iter().map(|k| f(grid.z(k))).collect();
        let mask = values.iter().map(|v| !(v.re.is_finite() && v.im.is_finite())).collect();
        Self::with_mask(grid, values, mask)
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(Complex64) -> Complex64 + Sync) -> Result<Self> {
        let values = (0..grid.len()).into_par_iter().map(|k| f(grid.z(k))).collect();
        Self::new(grid, values)
    }

    pub fn zeros(grid: GridSpec) -> Self {
        ComplexField { grid, values: vec![Complex64::new(0.0, 0.0); grid.len()], mask: vec![false; grid.len()] }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.values[self.grid.index(i, j)]
    }

    #[inline]
    pub fn is_masked(&self, k: usize) -> bool {
        self.mask[k]
    }

    pub fn masked_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    /// Pointwise map; results that are not finite become masked.
    pub fn map(&self, f: impl Fn(Complex64) -> Complex64 + Sync) -> Self {
        let mut out = self.clone();
        out.values.par_iter_mut().zip(out.mask.par_iter_mut()).for_each(|(v, m)| {
            if !*m {
                let w = f(*v);
                if w.re.is_finite() && w.im.is_finite() {
                    *v = w;
                } else {
                    *v = Complex64::new(0.0, 0.0);
                    *m = true;
                }
            }
        });
        out
    }

    /// Pointwise combination of two fields on the same grid; masks are united.
    pub fn zip_with(&self, other: &ComplexField, f: impl Fn(Complex64, Complex64) -> Complex64 + Sync) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let n = self.grid.len();
        let (values, mask): (Vec<_>, Vec<_>) = (0..n)
            .into_par_iter()
            .map(|k| {
                if self.mask[k] || other.mask[k] {
                    return (Complex64::new(0.0, 0.0), true);
                }
                let w = f(self.values[k], other.values[k]);
                if w.re.is_finite() && w.im.is_finite() {
                    (w, false)
                } else {
                    (Complex64::new(0.0, 0.0), true)
                }
            })
            .unzip();
        Ok(ComplexField { grid: self.grid, values, mask })
    }

    /// Adds points to the mask.
    pub fn masked_where(mut self, extra: &[bool]) -> Self {
        for (k, &m) in extra.iter().enumerate() {
            if m {
                self.mask[k] = true;
                self.values[k] = Complex64::new(0.0, 0.0);
            }
        }
        self
    }

    pub fn real_part(&self) -> RealField {
        RealField { grid: self.grid, values: self.values.iter().map(|v| v.re).collect(), mask: self.mask.clone() }
    }

    /// Largest `|Im v|` over unmasked points.
    pub fn max_imag(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.mask)
            .filter(|(_, m)| !**m)
            .map(|(v, _)| v.im.abs())
            .fold(0.0, f64::max)
    }

    /// Max of `|v|` over unmasked points.
    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.mask)
            .filter(|(_, m)| !**m)
            .map(|(v, _)| v.norm())
            .fold(0.0, f64::max)
    }

    /// CSV snapshot with header `x,y,re,im`; masked rows are skipped.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "x,y,re,im")?;
        for k in 0..self.grid.len() {
            if self.mask[k] {
                continue;
            }
            let z = self.grid.z(k);
            let v = self.values[k];
            writeln!(out, "{},{},{},{}", z.re, z.im, v.re, v.im)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Real samples on a [`GridSpec`], same masking rules as [`ComplexField`].
#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    grid: GridSpec,
    values: Vec<f64>,
    mask: Vec<bool>,
}

impl RealField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        let mask = vec![false; grid.len()];
        Self::with_mask(grid, values, mask)
    }

    pub fn with_mask(grid: GridSpec, mut values: Vec<f64>, mask: Vec<bool>) -> Result<Self> {
        grid.validate()?;
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch { expected: grid.len(), got: values.len() });
        }
        if mask.len() != grid.len() {
            return Err(Error::MaskMismatch(format!("mask has {} entries, grid {}", mask.len(), grid.len())));
        }
        for (k, v) in values.iter_mut().enumerate() {
            if mask[k] {
                *v = 0.0;
            } else if !v.is_finite() {
                let z = grid.z(k);
                return Err(Error::Singular { x: z.re, y: z.im });
            }
        }
        Ok(RealField { grid, values, mask })
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64) -> f64 + Sync) -> Result<Self> {
        let values = (0..grid.len())
            .into_par_iter()
            .map(|k| {
                let z = grid.z(k);
                f(z.re, z.im)
            })
            .collect();
        Self::new(grid, values)
    }

    pub fn constant(grid: GridSpec, c: f64) -> Result<Self> {
        Self::new(grid, vec![c; grid.len()])
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn masked_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn to_complex(&self) -> ComplexField {
        ComplexField {
            grid: self.grid,
            values: self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
            mask: self.mask.clone(),
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64 + Sync) -> Self {
        self.to_complex().map(|v| Complex64::new(f(v.re), 0.0)).real_part()
    }

    pub fn masked_where(mut self, extra: &[bool]) -> Self {
        for (k, &m) in extra.iter().enumerate() {
            if m {
                self.mask[k] = true;
                self.values[k] = 0.0;
            }
        }
        self
    }

    /// Unmasked samples.
    pub fn unmasked(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().zip(&self.mask).filter(|(_, m)| !**m).map(|(v, _)| *v)
    }

    /// Population variance over unmasked samples.
    pub fn variance(&self) -> f64 {
        let n = self.unmasked().count();
        if n == 0 {
            return 0.0;
        }
        let mean = self.unmasked().sum::<f64>() / n as f64;
        self.unmasked().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64
    }

    pub fn min(&self) -> f64 {
        self.unmasked().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.unmasked().fold(f64::NEG_INFINITY, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> GridSpec {
        GridSpec::square(1.0, 5).unwrap()
    }

    #[test]
    fn rejects_non_finite_without_mask() {
        let mut v = vec![Complex64::new(1.0, 0.0); 25];
        v[7] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(ComplexField::new(grid(), v.clone()), Err(Error::Singular { .. })));
        let mut mask = vec![false; 25];
        mask[7] = true;
        let f = ComplexField::with_mask(grid(), v, mask).unwrap();
        assert_eq!(f.masked_count(), 1);
        assert_eq!(f.values()[7], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn from_fn_masked_catches_poles() {
        let f = ComplexField::from_fn_masked(grid(), |z| 1.0 / z).unwrap();
        assert_eq!(f.masked_count(), 1);
        assert!(f.is_masked(12));
    }

    #[test]
    fn zip_unites_masks() {
        let a = ComplexField::from_fn_masked(grid(), |z| 1.0 / z).unwrap();
        let b = ComplexField::from_fn_masked(grid(), |z| 1.0 / (z - 1.0)).unwrap();
        let c = a.zip_with(&b, |u, v| u + v).unwrap();
        assert_eq!(c.masked_count(), 2);
    }

    #[test]
    fn variance_of_constant_is_zero() {
        let r = RealField::constant(grid(), 3.5).unwrap();
        assert_eq!(r.variance(), 0.0);
        let s = RealField::from_fn(grid(), |x, _| x).unwrap();
        assert!((s.variance() - 0.5).abs() < 1e-14);
    }
}
