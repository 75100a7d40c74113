//! Triangle meshes in Wavefront OBJ form.
//!
//! Vertices are the unmasked grid points in row-major order, written as
//! `v x y z` with Rust's shortest round-trip float formatting, so reading a
//! written file back gives bitwise-equal coordinates. Each grid cell whose
//! four corners are unmasked becomes two triangles `(a, b, c)` and `(a, c, d)`
//! with `a = (i, j)`, `b = (i+1, j)`, `c = (i+1, j+1)`, `d = (i, j+1)`.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::GridSpec;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TriangleMesh {
    pub vertices: Vec<[f64; 3]>,
    /// Zero-based vertex indices.
    pub faces: Vec<[usize; 3]>,
}

impl TriangleMesh {
    /// Triangulates a grid surface given per-point coordinates and a mask.
    pub fn from_grid(grid: &GridSpec, points: &[[f64; 3]], mask: &[bool]) -> Result<Self> {
        if points.len() != grid.len() || mask.len() != grid.len() {
            return Err(Error::LengthMismatch { expected: grid.len(), got: points.len().min(mask.len()) });
        }
        let mut index = vec![usize::MAX; grid.len()];
        let mut vertices = Vec::new();
        for k in 0..grid.len() {
            if !mask[k] {
                index[k] = vertices.len();
                vertices.push(points[k]);
            }
        }
        if vertices.is_empty() {
            return Err(Error::Domain("every grid point is masked; nothing to export".into()));
        }
        let mut faces = Vec::new();
        for j in 0..grid.ny.saturating_sub(1) {
            for i in 0..grid.nx.saturating_sub(1) {
                let corners = [grid.index(i, j), grid.index(i + 1, j), grid.index(i + 1, j + 1), grid.index(i, j + 1)];
                if corners.iter().any(|&k| mask[k]) {
                    continue;
                }
                let [a, b, c, d] = corners.map(|k| index[k]);
                faces.push([a, b, c]);
                faces.push([a, c, d]);
            }
        }
        Ok(TriangleMesh { vertices, faces })
    }

    pub fn to_obj(&self) -> String {
        let mut out = String::with_capacity(self.vertices.len() * 48 + self.faces.len() * 24);
        for [x, y, z] in &self.vertices {
            writeln!(out, "v {x} {y} {z}").expect("string write");
        }
        for [a, b, c] in &self.faces {
            writeln!(out, "f {} {} {}", a + 1, b + 1, c + 1).expect("string write");
        }
        out
    }

    /// Reads `v` and `f` records; comments, blank lines and other record
    /// types are skipped. Face entries may carry `/vt/vn` suffixes.
    pub fn parse_obj(text: &str) -> Result<Self> {
        let mut mesh = TriangleMesh::default();
        for (n, line) in text.lines().enumerate() {
            let bad = |what: &str| Error::Parse(format!("line {}: {what}", n + 1));
            let mut parts = line.split_whitespace();
            match parts.next() {
                Some("v") => {
                    let xs: Vec<f64> = parts.map(str::parse).collect::<std::result::Result<_, _>>().map_err(|_| bad("bad vertex coordinate"))?;
                    if xs.len() < 3 {
                        return Err(bad("vertex needs three coordinates"));
                    }
                    mesh.vertices.push([xs[0], xs[1], xs[2]]);
                }
                Some("f") => {
                    let ids: Vec<usize> = parts
                        .map(|p| p.split('/').next().unwrap_or("").parse::<usize>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| bad("bad face index"))?;
                    if ids.len() != 3 || ids.iter().any(|&v| v == 0) {
                        return Err(bad("faces must be triangles with 1-based indices"));
                    }
                    mesh.faces.push([ids[0] - 1, ids[1] - 1, ids[2] - 1]);
                }
                _ => {}
            }
        }
        if let Some(bad) = mesh.faces.iter().flatten().find(|&&v| v >= mesh.vertices.len()) {
            return Err(Error::Parse(format!("face references vertex {} of {}", bad + 1, mesh.vertices.len())));
        }
        Ok(mesh)
    }

    pub fn write_obj(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_obj())?;
        Ok(())
    }

    pub fn read_obj(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse_obj(&std::fs::read_to_string(path)?)
    }
}
