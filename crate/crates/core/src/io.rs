//! JSON file formats for problems and spectra, and CSV emission.
//!
//! Complex numbers are stored as `[re, im]` pairs. Writing is
//! deterministic, so write-read-write reproduces the same bytes.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::forward::GraphProblem;
use crate::series::CosineSeries;
use crate::spectrum::{NumberingSource, Spectrum, SpectrumEntry};

pub const SCHEMA_VERSION: u32 = 1;

pub type Pair = [f64; 2];

pub fn to_pair(z: Complex64) -> Pair {
    [z.re, z.im]
}

pub fn from_pair(p: Pair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

fn pairs(v: &[Complex64]) -> Vec<Pair> {
    v.iter().map(|&z| to_pair(z)).collect()
}

fn complexes(v: &[Pair]) -> Vec<Complex64> {
    v.iter().map(|&p| from_pair(p)).collect()
}

fn check_finite(what: &str, v: &[Pair]) -> Result<()> {
    if v.iter().flatten().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::Schema(format!("{what} contains a non-finite number")))
    }
}

fn check_version(v: u32) -> Result<()> {
    if v == SCHEMA_VERSION {
        Ok(())
    } else {
        Err(Error::Schema(format!(
            "unsupported schema version {v}, expected {SCHEMA_VERSION}"
        )))
    }
}

/// Densities sampled at the midpoints `x_i = (i + 1/2) pi / size`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledDensities {
    pub size: usize,
    pub values: Vec<Vec<Pair>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    pub schema_version: u32,
    pub m: usize,
    pub h: Vec<Pair>,
    /// Cosine coefficients of each `p_j`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<Vec<Pair>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_grid: Option<SampledDensities>,
    /// RMS misfit of the cosine projection of `p_grid` at the samples.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projection_residual: Option<f64>,
}

/// Midpoint cosine projection of samples onto `cos(l x)`, `l < modes`,
/// with the RMS misfit at the samples.
pub fn project_samples(samples: &[Complex64], modes: usize) -> (CosineSeries, f64) {
    let n = samples.len();
    let modes = modes.min(n);
    let xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) * PI / n as f64).collect();
    let coeffs: Vec<Complex64> = (0..modes)
        .map(|l| {
            let w = if l == 0 { 1.0 } else { 2.0 } / n as f64;
            w * samples
                .iter()
                .zip(&xs)
                .map(|(f, x)| f * (l as f64 * x).cos())
                .sum::<Complex64>()
        })
        .collect();
    let series = CosineSeries::new(coeffs);
    let misfit = samples
        .iter()
        .zip(&xs)
        .map(|(f, &x)| (series.eval(x) - f).norm_sqr())
        .sum::<f64>();
    (series, (misfit / n.max(1) as f64).sqrt())
}

impl ProblemFile {
    pub fn from_problem(problem: &GraphProblem) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            m: problem.m(),
            h: pairs(problem.h()),
            p: Some(problem.p.iter().map(|s| pairs(&s.coeffs)).collect()),
            p_grid: None,
            projection_residual: None,
        }
    }

    pub fn from_parts(h: &[Complex64], p: &[CosineSeries]) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            m: h.len(),
            h: pairs(h),
            p: Some(p.iter().map(|s| pairs(&s.coeffs)).collect()),
            p_grid: None,
            projection_residual: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_version(self.schema_version)?;
        if self.m < 2 {
            return Err(Error::Schema(format!("m = {} but a star needs at least two edges", self.m)));
        }
        if self.h.len() != self.m {
            return Err(Error::Schema(format!("h has {} entries, expected {}", self.h.len(), self.m)));
        }
        check_finite("h", &self.h)?;
        if let Some(p) = &self.p {
            if p.len() != self.m {
                return Err(Error::Schema(format!("p has {} edges, expected {}", p.len(), self.m)));
            }
            for e in p {
                check_finite("p", e)?;
            }
        }
        if let Some(g) = &self.p_grid {
            if g.size == 0 || g.values.len() != self.m || g.values.iter().any(|v| v.len() != g.size) {
                return Err(Error::Schema(format!(
                    "p_grid must hold {} edges of {} samples",
                    self.m, g.size
                )));
            }
            for e in &g.values {
                check_finite("p_grid", e)?;
            }
            if self.p.is_some() {
                return Err(Error::Schema("give either p or p_grid, not both".into()));
            }
        }
        Ok(())
    }

    pub fn h(&self) -> Vec<Complex64> {
        complexes(&self.h)
    }

    /// The densities as cosine series; sampled densities are projected onto
    /// `modes` cosines and the misfit is recorded in the file.
    pub fn densities(&mut self, modes: usize) -> Result<Vec<CosineSeries>> {
        self.validate()?;
        if let Some(p) = &self.p {
            return Ok(p.iter().map(|e| CosineSeries::new(complexes(e))).collect());
        }
        match &self.p_grid {
            Some(g) => {
                let mut worst: f64 = 0.0;
                let out = g
                    .values
                    .iter()
                    .map(|e| {
                        let (s, r) = project_samples(&complexes(e), modes);
                        worst = worst.max(r);
                        s
                    })
                    .collect();
                self.projection_residual = Some(worst);
                Ok(out)
            }
            None => Ok(vec![CosineSeries::zero(1); self.m]),
        }
    }

    pub fn to_problem(&mut self, modes: usize) -> Result<GraphProblem> {
        let p = self.densities(modes)?;
        GraphProblem::new(self.h(), p)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: Self = serde_json::from_str(text)?;
        f.validate()?;
        Ok(f)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        Ok(std::fs::write(path, self.to_json()?)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntryRecord {
    pub n: usize,
    pub k: usize,
    pub re: f64,
    pub im: f64,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub generator: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shells: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<Vec<Pair>>,
    /// Largest `|Delta(lambda)| / scale` over the entries.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_relative_residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<Config>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumFile {
    pub schema_version: u32,
    pub m: usize,
    pub numbering_source: NumberingSource,
    pub entries: Vec<EntryRecord>,
    pub provenance: Provenance,
}

impl SpectrumFile {
    pub fn from_spectrum(s: &Spectrum, provenance: Provenance) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            m: s.m,
            numbering_source: s.numbering_source,
            entries: s
                .entries
                .iter()
                .map(|e| EntryRecord {
                    n: e.n,
                    k: e.k,
                    re: e.lambda.re,
                    im: e.lambda.im,
                    multiplicity: e.multiplicity,
                })
                .collect(),
            provenance,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_version(self.schema_version)?;
        if self.m < 2 {
            return Err(Error::Schema(format!("m = {} but a star needs at least two edges", self.m)));
        }
        if self.entries.is_empty() || self.entries.len() % self.m != 0 {
            return Err(Error::Schema(format!(
                "{} entries do not form complete shells of {}",
                self.entries.len(),
                self.m
            )));
        }
        let shells = self.entries.len() / self.m;
        let mut seen = vec![false; self.entries.len()];
        for e in &self.entries {
            if e.k == 0 || e.k > self.m || e.n >= shells {
                return Err(Error::Schema(format!("entry (n = {}, k = {}) is out of range", e.n, e.k)));
            }
            if !(e.re.is_finite() && e.im.is_finite()) || e.multiplicity == 0 {
                return Err(Error::Schema(format!("entry (n = {}, k = {}) is malformed", e.n, e.k)));
            }
            let slot = e.n * self.m + e.k - 1;
            if std::mem::replace(&mut seen[slot], true) {
                return Err(Error::Schema(format!("entry (n = {}, k = {}) is repeated", e.n, e.k)));
            }
        }
        Ok(())
    }

    pub fn to_spectrum(&self) -> Result<Spectrum> {
        self.validate()?;
        let mut s = Spectrum {
            m: self.m,
            entries: self
                .entries
                .iter()
                .map(|e| SpectrumEntry {
                    n: e.n,
                    k: e.k,
                    lambda: Complex64::new(e.re, e.im),
                    multiplicity: e.multiplicity,
                })
                .collect(),
            numbering_source: self.numbering_source,
        };
        s.sort();
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: Self = serde_json::from_str(text)?;
        f.validate()?;
        Ok(f)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        Ok(std::fs::write(path, self.to_json()?)?)
    }
}

/// Comma-separated table with a header line.
pub fn csv(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        let line: Vec<String> = r.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}
