//! The characteristic function rebuilt from its zeros.
//!
//! Each branch contributes `base_k(lambda) * prod_n (lambda_nk - lambda) / (r_nk - lambda)`
//! where `r_nk` are the zeros of the classical factor `base_k`
//! (`-rho sin(pi rho)` with zeros `n^2`, or `cos(pi rho)` with zeros
//! `(n + 1/2)^2`). The product is taken exactly for `n < n_direct`, with
//! template values for `n_direct <= n < n_tail`, and the remainder is summed
//! analytically from the leading template term. Template values carry an
//! `O(n^-2)` correction fitted to the last direct shells.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{AsymptoticTemplate, BranchKind};
use crate::error::{Error, Result};
use crate::kernel::{sinc_pi, SpectralPoint};
use crate::spectrum::Spectrum;

#[derive(Clone, Debug)]
struct BranchTable {
    kind: BranchKind,
    /// Exact values for `n < n_direct`, template values up to `n_tail`.
    values: Vec<Complex64>,
    /// `2 z / pi`, the coefficient of the template tail.
    tail_c: Complex64,
}

#[derive(Clone, Debug)]
pub struct ProductCharFn {
    factor: f64,
    n_direct: usize,
    n_tail: usize,
    branches: Vec<BranchTable>,
}

fn reference(kind: BranchKind, n: usize) -> f64 {
    let a = match kind {
        BranchKind::Integer => n as f64,
        BranchKind::HalfInteger => n as f64 + 0.5,
    };
    a * a
}

/// Least-squares fit of `n^2 (lambda_nk - lambda0_nk) = a + b (-1)^n` over
/// the last quarter of the direct shells; zero when there are too few.
fn remainder_fit(spectrum: &Spectrum, template: &AsymptoticTemplate, k: usize, n_direct: usize) -> (Complex64, Complex64) {
    let zero = Complex64::default();
    if n_direct < 16 {
        return (zero, zero);
    }
    let (mut s0, mut s1, mut y0, mut y1) = (0.0, 0.0, zero, zero);
    for n in (n_direct - n_direct / 4)..n_direct {
        let nf = n as f64;
        let y = (spectrum.get(n, k) - template.lambda0(n, k)) * nf * nf;
        let s = if n % 2 == 0 { 1.0 } else { -1.0 };
        s0 += 1.0;
        s1 += s;
        y0 += y;
        y1 += y * s;
    }
    // normal equations [[s0, s1], [s1, s0]] [a, b] = [y0, y1]
    let det = s0 * s0 - s1 * s1;
    ((y0 * s0 - y1 * s1) / det, (y1 * s0 - y0 * s1) / det)
}

impl ProductCharFn {
    /// `n_tail` is raised to `n_direct` if smaller. The leading factor is
    /// `template.m`.
    pub fn new(spectrum: &Spectrum, template: &AsymptoticTemplate, n_direct: usize, n_tail: usize) -> Result<Self> {
        if spectrum.m != template.branches.len() {
            return Err(Error::InvalidInput(format!(
                "spectrum has {} branches, template {}",
                spectrum.m,
                template.branches.len()
            )));
        }
        if n_direct == 0 || spectrum.shells() < n_direct {
            return Err(Error::InsufficientShells {
                available: spectrum.shells(),
                required: n_direct.max(1),
            });
        }
        let n_tail = n_tail.max(n_direct);
        let branches = template
            .branches
            .iter()
            .enumerate()
            .map(|(i, b)| {
                let k = i + 1;
                let (a, bb) = remainder_fit(spectrum, template, k, n_direct);
                let values = (0..n_tail)
                    .map(|n| {
                        if n < n_direct {
                            spectrum.get(n, k)
                        } else {
                            let nf = n as f64;
                            let s = if n % 2 == 0 { 1.0 } else { -1.0 };
                            template.lambda0(n, k) + (a + bb * s) / (nf * nf)
                        }
                    })
                    .collect();
                BranchTable {
                    kind: b.kind,
                    values,
                    tail_c: 2.0 * b.z / std::f64::consts::PI,
                }
            })
            .collect();
        Ok(Self {
            factor: template.m as f64,
            n_direct,
            n_tail,
            branches,
        })
    }

    pub fn n_direct(&self) -> usize {
        self.n_direct
    }

    pub fn n_tail(&self) -> usize {
        self.n_tail
    }

    /// The normalized factor of branch `k` (one-based).
    pub fn branch_factor(&self, k: usize, lambda: Complex64) -> Complex64 {
        let b = &self.branches[k - 1];
        let sp = SpectralPoint::new(lambda);
        let rho = sp.rho();
        let n0f = match b.kind {
            BranchKind::Integer => rho.re.round(),
            BranchKind::HalfInteger => (rho.re - 0.5).round().max(0.0),
        };
        let n0 = n0f as usize;
        let sign = if n0 % 2 == 0 { 1.0 } else { -1.0 };
        let deflate = n0 < self.n_tail;
        let mut prod = if deflate {
            // base / (r_{n0} - lambda) through sin(pi d) / d
            let deflated = match b.kind {
                BranchKind::Integer if n0 == 0 => sinc_pi(rho),
                BranchKind::Integer => sign * rho * sinc_pi(rho - n0f) / (n0f + rho),
                BranchKind::HalfInteger => sign * sinc_pi(rho - n0f - 0.5) / (n0f + 0.5 + rho),
            };
            deflated * (b.values[n0] - lambda)
        } else {
            match b.kind {
                BranchKind::Integer => -lambda * sp.sinc_at(std::f64::consts::PI),
                BranchKind::HalfInteger => sp.cos_at(std::f64::consts::PI),
            }
        };
        for (n, v) in b.values.iter().enumerate() {
            if deflate && n == n0 {
                continue;
            }
            prod *= (v - lambda) / (reference(b.kind, n) - lambda);
        }
        prod * self.tail(b, rho)
    }

    /// `prod_{n >= n_tail}` of the template ratios, from the sum of their
    /// leading logarithms `c / (a_n^2 - lambda)` by the midpoint rule.
    fn tail(&self, b: &BranchTable, rho: Complex64) -> Complex64 {
        let a = match b.kind {
            BranchKind::Integer => self.n_tail as f64 - 0.5,
            BranchKind::HalfInteger => self.n_tail as f64,
        };
        let w = rho / a;
        let s = if w.norm() < 1e-4 {
            (1.0 + w * w / 3.0) / a
        } else {
            w.atanh() / rho
        };
        (b.tail_c * s).exp()
    }

    pub fn delta(&self, lambda: Complex64) -> Complex64 {
        (1..=self.branches.len()).fold(Complex64::new(self.factor, 0.0), |acc, k| {
            acc * self.branch_factor(k, lambda)
        })
    }
}

pub fn delta_from_spectrum(pcf: &ProductCharFn, lambda: Complex64) -> Complex64 {
    pcf.delta(lambda)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeadingFormReport {
    pub probes: Vec<f64>,
    /// `|Delta_1 + rho sin(rho pi) - z_1 cos(rho pi)|` per probe.
    pub integer_residuals: Vec<f64>,
    /// `|rho^2 (Delta_k - cos(rho pi)) - z_k rho sin(rho pi)|` per half-integer branch and probe.
    pub half_integer_residuals: Vec<Vec<f64>>,
    pub max_integer: f64,
    pub max_half_integer: f64,
}

/// Residuals of the leading asymptotic forms of the branch factors at real
/// `rho` probes.
pub fn leading_form_check(pcf: &ProductCharFn, template: &AsymptoticTemplate, probes: &[f64]) -> LeadingFormReport {
    let pi = std::f64::consts::PI;
    let mut integer_residuals = Vec::new();
    let mut half_integer_residuals = Vec::new();
    for (i, b) in template.branches.iter().enumerate() {
        let res: Vec<f64> = probes
            .iter()
            .map(|&r| {
                let lam = Complex64::new(r * r, 0.0);
                let d = pcf.branch_factor(i + 1, lam);
                let (s, c) = ((r * pi).sin(), (r * pi).cos());
                match b.kind {
                    BranchKind::Integer => (d + r * s - b.z * c).norm(),
                    BranchKind::HalfInteger => (r * r * (d - c) - b.z * r * s).norm(),
                }
            })
            .collect();
        match b.kind {
            BranchKind::Integer => integer_residuals = res,
            BranchKind::HalfInteger => half_integer_residuals.push(res),
        }
    }
    let max_integer = integer_residuals.iter().copied().fold(0.0, f64::max);
    let max_half_integer = half_integer_residuals.iter().flatten().copied().fold(0.0, f64::max);
    LeadingFormReport {
        probes: probes.to_vec(),
        integer_residuals,
        half_integer_residuals,
        max_integer,
        max_half_integer,
    }
}
