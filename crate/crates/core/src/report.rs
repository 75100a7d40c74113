//! Named residual norms with grid metadata.

use serde::{Deserialize, Serialize};

use crate::field::{ComplexField, RealField};
use crate::grid::GridSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub nx: usize,
    pub ny: usize,
    pub hx: f64,
    pub hy: f64,
}

impl From<&GridSpec> for GridMeta {
    fn from(g: &GridSpec) -> Self {
        GridMeta { nx: g.nx, ny: g.ny, hx: g.hx(), hy: g.hy() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub name: String,
    pub max_norm: f64,
    pub l2_norm: f64,
}

/// Max-norm and grid-weighted L² norm of one or more residual fields.
///
/// Norms run over unmasked interior points; the boundary ring is skipped.
/// The top-level norms are the largest over all components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub name: String,
    pub grid: GridMeta,
    pub max_norm: f64,
    pub l2_norm: f64,
    pub masked_points: usize,
    #[serde(default)]
    pub components: Vec<Component>,
}

fn norms(grid: &GridSpec, values: impl Iterator<Item = (f64, bool)>) -> (f64, f64) {
    let w = grid.hx() * grid.hy();
    let mut max = 0.0f64;
    let mut sum = 0.0;
    for (k, (v, masked)) in values.enumerate() {
        if masked || !grid.is_interior(k) {
            continue;
        }
        max = max.max(v);
        sum += v * v * w;
    }
    (max, sum.sqrt())
}

impl ResidualReport {
    /// Report over complex residual fields sharing one grid.
    pub fn from_fields(name: impl Into<String>, fields: &[(&str, &ComplexField)]) -> Self {
        assert!(!fields.is_empty(), "report needs at least one field");
        let grid = *fields[0].1.grid();
        let components = fields
            .iter()
            .map(|(n, f)| {
                let (max_norm, l2_norm) = norms(&grid, f.values().iter().zip(f.mask()).map(|(v, m)| (v.norm(), *m)));
                Component { name: n.to_string(), max_norm, l2_norm }
            })
            .collect();
        let masked_points = (0..grid.len()).filter(|&k| fields.iter().any(|(_, f)| f.is_masked(k))).count();
        Self::from_components(name, &grid, components, masked_points)
    }

    pub fn from_real(name: impl Into<String>, fields: &[(&str, &RealField)]) -> Self {
        let complex: Vec<(String, ComplexField)> = fields.iter().map(|(n, f)| (n.to_string(), f.to_complex())).collect();
        let refs: Vec<(&str, &ComplexField)> = complex.iter().map(|(n, f)| (n.as_str(), f)).collect();
        Self::from_fields(name, &refs)
    }

    pub fn from_components(name: impl Into<String>, grid: &GridSpec, components: Vec<Component>, masked_points: usize) -> Self {
        let max_norm = components.iter().map(|c| c.max_norm).fold(0.0, f64::max);
        let l2_norm = components.iter().map(|c| c.l2_norm).fold(0.0, f64::max);
        ResidualReport { name: name.into(), grid: grid.into(), max_norm, l2_norm, masked_points, components }
    }

    /// Appends a scalar diagnostic (such as a variance) as a component.
    /// It enters the top-level norms only if `counts` is set.
    pub fn with_scalar(mut self, name: &str, value: f64, counts: bool) -> Self {
        self.components.push(Component { name: name.into(), max_norm: value, l2_norm: value });
        if counts {
            self.max_norm = self.max_norm.max(value);
            self.l2_norm = self.l2_norm.max(value);
        }
        self
    }

    pub fn component(&self, name: &str) -> Option<&Component> {
        self.components.iter().find(|c| c.name == name)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_norm.is_finite() && self.max_norm <= tol
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}
