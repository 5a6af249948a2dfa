//! Stationary roots of the vertex polynomial, admissibility classes of the
//! Robin coefficients, the exclusion set `Z_h`, and eigenvalue templates.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::{NumberingSource, Spectrum};

/// Coefficients closer than this are treated as equal when grouping.
const EQUAL_TOL: f64 = 1e-12;
/// Residual tolerance for polished polynomial roots, relative to
/// `sum_i |c_i| |z|^i`.
const ROOT_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HClass {
    /// All `h_j` and all stationary roots are pairwise distinct.
    Star,
    /// Repeated `h_j`; representatives and deflated roots are distinct.
    Bullet,
    Inadmissible,
}

/// A block of equal Robin coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Group {
    /// Zero-based index of the first edge carrying this value.
    pub rep: usize,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HConfiguration {
    pub h: Vec<Complex64>,
    pub class: HClass,
    pub groups: Vec<Group>,
    /// Multiplicity-weighted mean of `h`.
    pub z1: Complex64,
    /// Roots of the (deflated) stationary polynomial.
    pub zk: Vec<Complex64>,
    pub reason: Option<String>,
}

impl HConfiguration {
    pub fn m(&self) -> usize {
        self.h.len()
    }

    /// Edges grouped with `groups[g]`.
    pub fn group_edges(&self, g: usize) -> Vec<usize> {
        let hv = self.h[self.groups[g].rep];
        (0..self.m())
            .filter(|&j| (self.h[j] - hv).norm() <= EQUAL_TOL * (1.0 + hv.norm()))
            .collect()
    }

    /// Index of the group holding edge `j`.
    pub fn group_of(&self, j: usize) -> usize {
        (0..self.groups.len())
            .find(|&g| self.group_edges(g).contains(&j))
            .unwrap_or(0)
    }

    pub fn require_star(&self) -> Result<()> {
        match self.class {
            HClass::Star => Ok(()),
            _ => Err(Error::Inadmissible(self.describe())),
        }
    }

    pub fn describe(&self) -> String {
        match (&self.class, &self.reason) {
            (_, Some(r)) => r.clone(),
            (HClass::Bullet, None) => {
                "repeated Robin coefficients: only the sums over equal groups are determined".into()
            }
            _ => format!("{:?}", self.class),
        }
    }
}

fn same(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() <= EQUAL_TOL * (1.0 + a.norm().max(b.norm()))
}

/// Groups equal coefficients; representatives are first occurrences.
pub fn group_h(h: &[Complex64]) -> Vec<Group> {
    let mut groups: Vec<Group> = Vec::new();
    for (j, &hj) in h.iter().enumerate() {
        match groups.iter_mut().find(|g| same(h[g.rep], hj)) {
            Some(g) => g.multiplicity += 1,
            None => groups.push(Group {
                rep: j,
                multiplicity: 1,
            }),
        }
    }
    groups
}

fn poly_mul_linear(p: &[Complex64], root: Complex64) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); p.len() + 1];
    for (i, c) in p.iter().enumerate() {
        out[i + 1] += c;
        out[i] -= c * root;
    }
    out
}

/// Ascending coefficients of `sum_s m_s prod_{k != s} (z - h_k)` over groups.
pub fn stationary_polynomial(h: &[Complex64]) -> Vec<Complex64> {
    let groups = group_h(h);
    let mut total = vec![Complex64::default(); groups.len()];
    for (s, gs) in groups.iter().enumerate() {
        let mut p = vec![Complex64::new(gs.multiplicity as f64, 0.0)];
        for (k, gk) in groups.iter().enumerate() {
            if k != s {
                p = poly_mul_linear(&p, h[gk.rep]);
            }
        }
        for (i, c) in p.iter().enumerate() {
            total[i] += c;
        }
    }
    total
}

pub fn poly_eval(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(Complex64::default(), |acc, c| acc * z + c)
}

fn poly_deriv(coeffs: &[Complex64]) -> Vec<Complex64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * i as f64)
        .collect()
}

fn poly_scale(coeffs: &[Complex64], z: Complex64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| c.norm() * z.norm().powi(i as i32))
        .sum()
}

/// Roots of a polynomial with ascending coefficients by companion-matrix
/// eigenvalues and one Newton step each.
pub fn poly_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut c = coeffs.to_vec();
    while c.len() > 1 && c.last().is_some_and(|x| x.norm() == 0.0) {
        c.pop();
    }
    let d = c.len().saturating_sub(1);
    if d == 0 {
        return Ok(Vec::new());
    }
    let lead = c[d];
    let mut comp = DMatrix::<Complex64>::zeros(d, d);
    for i in 1..d {
        comp[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..d {
        comp[(i, d - 1)] = -c[i] / lead;
    }
    let eig = comp
        .schur()
        .eigenvalues()
        .ok_or(Error::RootFindingFailure {
            residual: f64::INFINITY,
            tolerance: ROOT_TOL,
        })?;
    let dc = poly_deriv(&c);
    let mut roots = Vec::with_capacity(d);
    for &z0 in eig.iter() {
        let dp = poly_eval(&dc, z0);
        let z = if dp.norm() > 0.0 {
            z0 - poly_eval(&c, z0) / dp
        } else {
            z0
        };
        let z = if poly_eval(&c, z).norm() <= poly_eval(&c, z0).norm() {
            z
        } else {
            z0
        };
        let residual = poly_eval(&c, z).norm() / poly_scale(&c, z).max(f64::MIN_POSITIVE);
        if !(residual <= ROOT_TOL * d as f64) {
            return Err(Error::RootFindingFailure {
                residual,
                tolerance: ROOT_TOL,
            });
        }
        roots.push(z);
    }
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(roots)
}

/// Roots of the stationary polynomial (deflated when coefficients repeat).
pub fn stationary_roots(h: &[Complex64]) -> Result<Vec<Complex64>> {
    poly_roots(&stationary_polynomial(h))
}

/// Computes grouping, stationary roots and the admissibility class.
pub fn classify_h(h: &[Complex64]) -> Result<HConfiguration> {
    if h.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "a star graph needs at least two edges, got {}",
            h.len()
        )));
    }
    if h.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
        return Err(Error::InvalidInput("Robin coefficients must be finite".into()));
    }
    let groups = group_h(h);
    let m = h.len() as f64;
    let z1 = groups
        .iter()
        .map(|g| h[g.rep] * g.multiplicity as f64)
        .sum::<Complex64>()
        / m;
    let zk = stationary_roots(h)?;
    let reps: Vec<Complex64> = groups.iter().map(|g| h[g.rep]).collect();
    let mut pool = reps.clone();
    pool.extend(&zk);
    let distinct = (0..pool.len()).all(|i| (0..i).all(|j| !same(pool[i], pool[j])));
    let repeated = groups.len() < h.len();

    let (class, reason) = if !distinct {
        (
            HClass::Inadmissible,
            Some("Robin coefficients and stationary roots are not pairwise distinct".to_string()),
        )
    } else if !repeated {
        (HClass::Star, None)
    } else if pool.iter().any(|&p| same(p, z1)) {
        (
            HClass::Inadmissible,
            Some("the mean coefficient coincides with a Robin coefficient or a stationary root".to_string()),
        )
    } else {
        (HClass::Bullet, None)
    };
    Ok(HConfiguration {
        h: h.to_vec(),
        class,
        groups,
        z1,
        zk,
        reason,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BranchKind {
    /// `sqrt(lambda) ~ n + z / (pi n)`.
    Integer,
    /// `sqrt(lambda) ~ n + 1/2 + z / (pi (n + 1/2))`.
    HalfInteger,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub kind: BranchKind,
    pub z: Complex64,
    /// For the zeros of `phi_j(pi, .)` forced by repeated coefficients.
    pub mu_edge: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticTemplate {
    pub m: usize,
    pub z1: Complex64,
    pub zk: Vec<Complex64>,
    /// `branches[k - 1]` generates `lambda_{nk}`.
    pub branches: Vec<Branch>,
}

impl AsymptoticTemplate {
    pub fn new(hconf: &HConfiguration) -> Self {
        let mut branches = vec![Branch {
            kind: BranchKind::Integer,
            z: hconf.z1,
            mu_edge: None,
        }];
        branches.extend(hconf.zk.iter().map(|&z| Branch {
            kind: BranchKind::HalfInteger,
            z,
            mu_edge: None,
        }));
        for g in 0..hconf.groups.len() {
            let edges = hconf.group_edges(g);
            for &j in &edges[1..] {
                branches.push(Branch {
                    kind: BranchKind::HalfInteger,
                    z: hconf.h[j],
                    mu_edge: Some(j),
                });
            }
        }
        Self {
            m: hconf.m(),
            z1: hconf.z1,
            zk: hconf.zk.clone(),
            branches,
        }
    }

    /// Template `sqrt(lambda_{nk})`, `k` one-based. The `n = 0` value of the
    /// integer branch is a placeholder (zero).
    pub fn sqrt_value(&self, n: usize, k: usize) -> Complex64 {
        branch_sqrt(&self.branches[k - 1], n)
    }

    pub fn lambda0(&self, n: usize, k: usize) -> Complex64 {
        let r = self.sqrt_value(n, k);
        r * r
    }
}

pub fn branch_sqrt(b: &Branch, n: usize) -> Complex64 {
    let nf = n as f64;
    match b.kind {
        BranchKind::Integer if n == 0 => Complex64::default(),
        BranchKind::Integer => nf + b.z / (PI * nf),
        BranchKind::HalfInteger => nf + 0.5 + b.z / (PI * (nf + 0.5)),
    }
}

/// Template eigenvalues for shells `0..n_shells`.
pub fn asymptotic_spectrum(template: &AsymptoticTemplate, n_shells: usize) -> Spectrum {
    let m = template.branches.len();
    let vals: Vec<Complex64> = (0..n_shells)
        .flat_map(|n| (1..=m).map(move |k| (n, k)))
        .map(|(n, k)| template.lambda0(n, k))
        .collect();
    Spectrum::from_shells(m, &vals, NumberingSource::Template).expect("whole shells")
}

/// Remainder sequence of one branch with its cumulative sum of squares.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemainderProfile {
    pub k: usize,
    pub kappa: Vec<Complex64>,
    pub partial_sums: Vec<f64>,
    /// Growth over the last tenth of the sequence relative to the total.
    pub plateau_ratio: f64,
}

/// Plateau heuristic for square-summability of a finite sequence.
pub fn plateau_ratio(partial_sums: &[f64]) -> f64 {
    let n = partial_sums.len();
    if n == 0 {
        return 0.0;
    }
    let total = partial_sums[n - 1];
    if total <= 0.0 {
        return 0.0;
    }
    let start = (n * 9) / 10;
    let before = if start == 0 { 0.0 } else { partial_sums[start - 1] };
    (total - before) / total
}

/// Normalized remainders `kappa_{nk}` of a numbered spectrum.
pub fn fit_remainders(spectrum: &Spectrum, template: &AsymptoticTemplate) -> Vec<RemainderProfile> {
    let shells = spectrum.shells();
    (1..=template.branches.len())
        .map(|k| {
            let b = template.branches[k - 1];
            let kappa: Vec<Complex64> = (0..shells)
                .map(|n| {
                    let r = spectrum.get(n, k).sqrt();
                    let nf = n as f64;
                    match b.kind {
                        BranchKind::Integer if n == 0 => Complex64::default(),
                        BranchKind::Integer => nf * (r - nf) - b.z / PI,
                        BranchKind::HalfInteger => nf * nf * (r - branch_sqrt(&b, n)),
                    }
                })
                .collect();
            let mut acc = 0.0;
            let partial_sums: Vec<f64> = kappa
                .iter()
                .map(|x| {
                    acc += x.norm_sqr();
                    acc
                })
                .collect();
            RemainderProfile {
                k,
                plateau_ratio: plateau_ratio(&partial_sums),
                kappa,
                partial_sums,
            }
        })
        .collect()
}

/// Elements of `Z_h` closest to the real axis, `2 * depth` of them
/// including conjugates.
pub fn zh_elements(depth: usize) -> Result<Vec<Complex64>> {
    let mut out = Vec::with_capacity(2 * depth);
    for k in 1..=depth {
        let x = (2.0 * k as f64 + 0.5) * PI;
        let mut rho = Complex64::new(x, x.acosh());
        let seed = rho;
        let mut converged = false;
        for _ in 0..50 {
            let step = (rho.sin() - rho) / (rho.cos() - 1.0);
            rho -= step;
            if step.norm() < 1e-15 * rho.norm() {
                converged = true;
                break;
            }
        }
        if !converged || !rho.re.is_finite() {
            return Err(Error::NewtonDivergence {
                seed,
                reason: "sin(rho) = rho".into(),
            });
        }
        let z = -(1.0 + rho.cos()) / (2.0 * PI);
        out.push(z);
        out.push(z.conj());
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZhReport {
    pub member: bool,
    /// Distance from `h` to the nearest computed element.
    pub margin: f64,
}

pub fn zh_member(h: Complex64, depth: usize, tol: f64) -> Result<ZhReport> {
    if depth == 0 {
        return Err(Error::InvalidInput("Z_h depth must be at least 1".into()));
    }
    let margin = zh_elements(depth)?
        .iter()
        .map(|z| (z - h).norm())
        .fold(f64::INFINITY, f64::min);
    Ok(ZhReport {
        member: margin < tol,
        margin,
    })
}
