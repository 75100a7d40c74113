//! Run configuration and its `key = value` text form.
//!
//! One setting per line; blank lines and lines starting with `#` are
//! ignored. Keys match the command-line flags without the leading dashes:
//!
//! ```text
//! family    = rational | exponential | trig | unimodular | holomorphic
//! lambda    = <real>
//! A         = <real>
//! H0        = <real>
//! grid      = <NX>x<NY>
//! domain    = <xmin>,<xmax>,<ymin>,<ymax>
//! basepoint = <x>,<y>
//! tol-scale = <real>      multiplies every pinned tolerance scale
//! levels    = <count>     refinement levels, each halving h
//! jobs      = <count>     worker threads, 0 for one per core
//! out       = <directory>
//! format    = json | csv
//! ```
//!
//! Unknown and repeated keys are errors.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::solutions::{family_by_kind, FamilyKind, FamilyParams, SolutionFamily};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    #[default]
    Json,
    Csv,
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportFormat::Json => "json",
            ReportFormat::Csv => "csv",
        })
    }
}

impl FromStr for ReportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            _ => Err(Error::Parse(format!("format must be json or csv, got `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub family: FamilyKind,
    pub lambda: f64,
    pub a: f64,
    pub h0: f64,
    pub grid: (usize, usize),
    pub domain: Option<[f64; 4]>,
    pub basepoint: Option<(f64, f64)>,
    pub tol_scale: f64,
    pub levels: usize,
    pub jobs: usize,
    pub out: PathBuf,
    pub format: ReportFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            family: FamilyKind::Rational,
            lambda: 1.0,
            a: 1.0,
            h0: 1.0,
            grid: (101, 101),
            domain: None,
            basepoint: None,
            tol_scale: 1.0,
            levels: 2,
            jobs: 0,
            out: PathBuf::from("wsl-out"),
            format: ReportFormat::Json,
        }
    }
}

pub const KEYS: [&str; 12] = ["family", "lambda", "A", "H0", "grid", "domain", "basepoint", "tol-scale", "levels", "jobs", "out", "format"];

fn number(key: &str, v: &str) -> Result<f64> {
    let x: f64 = v.parse().map_err(|_| Error::Parse(format!("{key}: `{v}` is not a number")))?;
    if !x.is_finite() {
        return Err(Error::Parse(format!("{key}: `{v}` is not finite")));
    }
    Ok(x)
}

fn count(key: &str, v: &str) -> Result<usize> {
    v.parse().map_err(|_| Error::Parse(format!("{key}: `{v}` is not a non-negative integer")))
}

fn numbers<const N: usize>(key: &str, v: &str) -> Result<[f64; N]> {
    let parts: Vec<f64> = v.split(',').map(|p| number(key, p.trim())).collect::<Result<_>>()?;
    parts.try_into().map_err(|_| Error::Parse(format!("{key}: expected {N} comma-separated numbers, got `{v}`")))
}

pub fn parse_grid(v: &str) -> Result<(usize, usize)> {
    let (a, b) = v.split_once(['x', 'X']).ok_or_else(|| Error::Parse(format!("grid: expected NXxNY, got `{v}`")))?;
    Ok((count("grid", a.trim())?, count("grid", b.trim())?))
}

pub fn parse_domain(v: &str) -> Result<[f64; 4]> {
    numbers::<4>("domain", v)
}

pub fn parse_basepoint(v: &str) -> Result<(f64, f64)> {
    let [x, y] = numbers::<2>("basepoint", v)?;
    Ok((x, y))
}

impl RunConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "family" => self.family = v.parse().map_err(|e: Error| Error::Parse(e.to_string()))?,
            "lambda" => self.lambda = number(key, v)?,
            "A" => self.a = number(key, v)?,
            "H0" => self.h0 = number(key, v)?,
            "grid" => self.grid = parse_grid(v)?,
            "domain" => self.domain = Some(parse_domain(v)?),
            "basepoint" => self.basepoint = Some(parse_basepoint(v)?),
            "tol-scale" => self.tol_scale = number(key, v)?,
            "levels" => self.levels = count(key, v)?,
            "jobs" => self.jobs = count(key, v)?,
            "out" => {
                if v.is_empty() {
                    return Err(Error::Parse("out: empty path".into()));
                }
                self.out = PathBuf::from(v)
            }
            "format" => self.format = v.parse()?,
            _ => return Err(Error::Parse(format!("unknown key `{key}` (known: {})", KEYS.join(", ")))),
        }
        Ok(())
    }

    /// Parses the text form on top of the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut seen = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse(format!("line {}: expected key = value", n + 1)))?;
            let k = k.trim();
            if seen.contains(&k) {
                return Err(Error::Parse(format!("line {}: `{k}` given twice", n + 1)));
            }
            seen.push(k);
            cfg.set(k, v).map_err(|e| Error::Parse(format!("line {}: {e}", n + 1)))?;
        }
        Ok(cfg)
    }

    pub fn to_text(&self) -> String {
        let mut lines = vec![
            format!("family = {}", self.family),
            format!("lambda = {}", self.lambda),
            format!("A = {}", self.a),
            format!("H0 = {}", self.h0),
            format!("grid = {}x{}", self.grid.0, self.grid.1),
        ];
        if let Some([a, b, c, d]) = self.domain {
            lines.push(format!("domain = {a},{b},{c},{d}"));
        }
        if let Some((x, y)) = self.basepoint {
            lines.push(format!("basepoint = {x},{y}"));
        }
        lines.extend([
            format!("tol-scale = {}", self.tol_scale),
            format!("levels = {}", self.levels),
            format!("jobs = {}", self.jobs),
            format!("out = {}", self.out.display()),
            format!("format = {}", self.format),
        ]);
        lines.join("\n") + "\n"
    }

    pub fn params(&self) -> FamilyParams {
        FamilyParams { lambda: self.lambda, a: self.a, h0: self.h0 }
    }

    pub fn family(&self) -> Result<SolutionFamily> {
        family_by_kind(self.family, &self.params())
    }

    /// The configured domain, or the family's default rectangle.
    pub fn grid_spec(&self, family: &SolutionFamily) -> Result<GridSpec> {
        let (nx, ny) = self.grid;
        match self.domain {
            Some([x0, x1, y0, y1]) => GridSpec::new(x0, x1, y0, y1, nx, ny),
            None => family.default_domain(nx, ny),
        }
    }

    /// Checks everything that does not need a grid evaluation.
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_scale > 0.0) {
            return Err(Error::InvalidParameter(format!("tol-scale must be positive, got {}", self.tol_scale)));
        }
        if self.levels == 0 {
            return Err(Error::InvalidParameter("levels must be at least 1".into()));
        }
        let family = self.family()?;
        let grid = self.grid_spec(&family)?;
        if grid.nx < 5 || grid.ny < 5 {
            return Err(Error::InvalidGrid(format!("need at least 5x5 samples, got {}x{}", grid.nx, grid.ny)));
        }
        if let Some((x, y)) = self.basepoint {
            grid.nearest(x, y).ok_or_else(|| Error::InvalidParameter(format!("basepoint ({x}, {y}) lies outside the domain")))?;
        }
        Ok(())
    }
}
