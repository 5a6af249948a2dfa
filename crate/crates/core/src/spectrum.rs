//! Indexed eigenvalue multisets.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NumberingSource {
    Computed,
    UserAssigned,
    Template,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    /// Shell index, `n >= 0`.
    pub n: usize,
    /// Branch index, `1..=m`.
    pub k: usize,
    pub lambda: Complex64,
    pub multiplicity: usize,
}

/// One entry per `(n, k)`; a multiple eigenvalue occupies several slots
/// and each of them carries the multiplicity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub m: usize,
    pub entries: Vec<SpectrumEntry>,
    pub numbering_source: NumberingSource,
}

impl Spectrum {
    /// Builds a spectrum from shell-major values `values[n * m + (k - 1)]`.
    pub fn from_shells(m: usize, values: &[Complex64], source: NumberingSource) -> Result<Self> {
        if m == 0 || values.len() % m != 0 {
            return Err(Error::IncompleteShells {
                len: values.len(),
                m,
            });
        }
        let entries = values
            .iter()
            .enumerate()
            .map(|(i, &lambda)| SpectrumEntry {
                n: i / m,
                k: i % m + 1,
                lambda,
                multiplicity: 1,
            })
            .collect();
        let mut s = Self {
            m,
            entries,
            numbering_source: source,
        };
        s.sort();
        Ok(s)
    }

    pub fn sort(&mut self) {
        self.entries.sort_by_key(|e| (e.n, e.k));
    }

    pub fn shells(&self) -> usize {
        self.entries.len() / self.m.max(1)
    }

    /// Eigenvalue at `(n, k)`, `k` one-based.
    pub fn get(&self, n: usize, k: usize) -> Complex64 {
        self.entries[n * self.m + k - 1].lambda
    }

    pub fn values(&self) -> Vec<Complex64> {
        self.entries.iter().map(|e| e.lambda).collect()
    }

    pub fn shell(&self, n: usize) -> &[SpectrumEntry] {
        &self.entries[n * self.m..(n + 1) * self.m]
    }

    /// The first `n` shells.
    pub fn truncate(&self, n: usize) -> Self {
        let mut s = self.clone();
        s.entries.truncate(n * self.m);
        s
    }

    pub fn conj(&self) -> Self {
        let mut s = self.clone();
        for e in &mut s.entries {
            e.lambda = e.lambda.conj();
        }
        s
    }

    /// Recomputes multiplicities by clustering values within
    /// `radius * (1 + |lambda|)`.
    pub fn recount_multiplicities(&mut self, radius: f64) {
        let vals = self.values();
        for (i, e) in self.entries.iter_mut().enumerate() {
            let tol = radius * (1.0 + vals[i].norm());
            e.multiplicity = vals.iter().filter(|v| (*v - vals[i]).norm() <= tol).count();
        }
    }

    /// Distinct values with their multiplicities, in numbering order.
    pub fn distinct(&self, radius: f64) -> Vec<(Complex64, usize)> {
        let mut out: Vec<(Complex64, usize)> = Vec::new();
        for e in &self.entries {
            let tol = radius * (1.0 + e.lambda.norm());
            match out.iter_mut().find(|(v, _)| (*v - e.lambda).norm() <= tol) {
                Some(slot) => slot.1 += 1,
                None => out.push((e.lambda, 1)),
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shell_major_layout() {
        let v: Vec<Complex64> = (0..6).map(|i| Complex64::new(i as f64, 0.0)).collect();
        let s = Spectrum::from_shells(2, &v, NumberingSource::UserAssigned).unwrap();
        assert_eq!(s.shells(), 3);
        assert_eq!(s.get(2, 1).re, 4.0);
        assert_eq!(s.get(1, 2).re, 3.0);
    }

    #[test]
    fn incomplete_shell_is_rejected() {
        let v = vec![Complex64::default(); 5];
        assert!(matches!(
            Spectrum::from_shells(2, &v, NumberingSource::UserAssigned),
            Err(Error::IncompleteShells { len: 5, m: 2 })
        ));
    }

    #[test]
    fn multiplicity_counting() {
        let v = vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0 + 1e-10, 0.0),
            Complex64::new(4.0, 0.0),
            Complex64::new(5.0, 0.0),
        ];
        let mut s = Spectrum::from_shells(2, &v, NumberingSource::UserAssigned).unwrap();
        s.recount_multiplicities(1e-7);
        assert_eq!(s.entries[0].multiplicity, 2);
        assert_eq!(s.entries[2].multiplicity, 1);
        assert_eq!(s.distinct(1e-7).len(), 3);
    }
}
