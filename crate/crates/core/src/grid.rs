//! Uniform rectangular sampling of the complex coordinate `z = x + iy`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A uniform `nx × ny` grid over `[x_min, x_max] × [y_min, y_max]`.
///
/// Samples are stored row-major: index `j * nx + i` holds the point
/// `(x_i, y_j)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64, nx: usize, ny: usize) -> Result<Self> {
        let g = GridSpec { x_min, x_max, y_min, y_max, nx, ny };
        g.validate()?;
        Ok(g)
    }

    /// Square grid `[-a, a]²` with `n` samples per side.
    pub fn square(a: f64, n: usize) -> Result<Self> {
        Self::new(-a, a, -a, a, n, n)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x_max > self.x_min) || !(self.y_max > self.y_min) {
            return Err(Error::InvalidGrid(format!(
                "empty domain [{}, {}] x [{}, {}]",
                self.x_min, self.x_max, self.y_min, self.y_max
            )));
        }
        if self.nx < 2 || self.ny < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2x2 samples, got {}x{}",
                self.nx, self.ny
            )));
        }
        let (hx, hy) = (self.hx(), self.hy());
        if !(hx.is_finite() && hx > 0.0 && hy.is_finite() && hy > 0.0) {
            return Err(Error::InvalidGrid(format!("bad spacing hx={hx}, hy={hy}")));
        }
        Ok(())
    }

    #[inline]
    pub fn hx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    #[inline]
    pub fn hy(&self) -> f64 {
        (self.y_max - self.y_min) / (self.ny - 1) as f64
    }

    /// The larger of the two spacings; the `h` in `O(h²)` statements.
    pub fn h(&self) -> f64 {
        self.hx().max(self.hy())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.nx {
            self.x_max
        } else {
            self.x_min + i as f64 * self.hx()
        }
    }

    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        if j + 1 == self.ny {
            self.y_max
        } else {
            self.y_min + j as f64 * self.hy()
        }
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn coords(&self, k: usize) -> (usize, usize) {
        (k % self.nx, k / self.nx)
    }

    #[inline]
    pub fn z(&self, k: usize) -> Complex64 {
        let (i, j) = self.coords(k);
        Complex64::new(self.x(i), self.y(j))
    }

    /// True for points off the outermost ring of samples.
    #[inline]
    pub fn is_interior(&self, k: usize) -> bool {
        let (i, j) = self.coords(k);
        i > 0 && j > 0 && i + 1 < self.nx && j + 1 < self.ny
    }

    /// Same domain with the spacing halved (`2(n-1)+1` samples per side).
    pub fn refined(&self) -> Self {
        GridSpec { nx: 2 * (self.nx - 1) + 1, ny: 2 * (self.ny - 1) + 1, ..*self }
    }

    /// Grid index closest to the point `(x, y)`; `None` when outside the domain.
    pub fn nearest(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let tol = 1e-9 * self.h();
        if x < self.x_min - tol || x > self.x_max + tol || y < self.y_min - tol || y > self.y_max + tol {
            return None;
        }
        let i = ((x - self.x_min) / self.hx()).round().clamp(0.0, (self.nx - 1) as f64) as usize;
        let j = ((y - self.y_min) / self.hy()).round().clamp(0.0, (self.ny - 1) as f64) as usize;
        Some((i, j))
    }

    /// The sample nearest the centre of the domain.
    pub fn center(&self) -> (usize, usize) {
        ((self.nx - 1) / 2, (self.ny - 1) / 2)
    }
}
