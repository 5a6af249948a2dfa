//! Joint reconstruction from root-function chains: every eigenvalue yields
//! vector functions `y_nk` with `(p, y_nk) = -sum_j y_nk,j'(pi)`, and the
//! moment system is solved over a cosine dictionary on all edges at once.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{plateau_ratio, HConfiguration};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::kernel::{self, SpectralPoint, NU_MAX};
use crate::linalg;
use crate::quadrature;
use crate::series::CosineSeries;
use crate::spectrum::Spectrum;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "kebab-case")]
pub enum ChainCase {
    /// No `phi_j(pi, lambda)` vanishes.
    Regular,
    /// `phi_s(pi, lambda) = 0` for the zero-based edge `edge`.
    Vertex { edge: usize },
}

/// Chain of root functions attached to one distinct eigenvalue.
///
/// Element `nu` on edge `j` is `sum_i coeffs[nu][j][i] * T_i phi_j(x)`,
/// where `T_i` is the `i`-th Taylor coefficient in lambda at `lambda`.
/// The elements are the Taylor coefficients of
/// `lambda -> phi_j(x, lambda) / phi_j(pi, lambda)` (regular case) or of
/// `(lambda - lambda_0) phi_j(x, lambda) / phi_j(pi, lambda)` (vertex case).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootChain {
    pub lambda: Complex64,
    pub multiplicity: usize,
    pub case: ChainCase,
    /// `(n, k)` slots of the elements, in numbering order.
    pub slots: Vec<(usize, usize)>,
    pub h: Vec<Complex64>,
    pub coeffs: Vec<Vec<Vec<Complex64>>>,
}

impl RootChain {
    fn sp(&self) -> SpectralPoint {
        SpectralPoint::new(self.lambda)
    }

    fn combine(&self, nu: usize, j: usize, taylor: &[Complex64]) -> Complex64 {
        self.coeffs[nu][j].iter().zip(taylor).map(|(c, t)| c * t).sum()
    }

    /// `y^<nu>_j(x)`.
    pub fn eval(&self, nu: usize, j: usize, x: f64) -> Complex64 {
        let t = kernel::phi_taylor(x, &self.sp(), self.h[j], nu);
        self.combine(nu, j, &t)
    }

    /// `d/dx y^<nu>_j(x)`.
    pub fn eval_x(&self, nu: usize, j: usize, x: f64) -> Complex64 {
        let t = kernel::phi_x_taylor(x, &self.sp(), self.h[j], nu);
        self.combine(nu, j, &t)
    }

    /// `∫_0^pi cos(l x) y^<nu>_j(x) dx` for `l = 0..k`.
    pub fn cos_moments(&self, nu: usize, j: usize, k: usize, cauchy_points: usize) -> Vec<Complex64> {
        let sp = self.sp();
        (0..k)
            .map(|l| {
                let t = moment_taylor(l, &sp, self.h[j], nu, cauchy_points);
                self.combine(nu, j, &t)
            })
            .collect()
    }
}

fn moment_taylor(l: usize, sp: &SpectralPoint, h: Complex64, order: usize, points: usize) -> Vec<Complex64> {
    let mut t = if order >= 2 {
        kernel::cos_moment_taylor(l, sp, h, order, points)
    } else {
        vec![Complex64::default(); order + 1]
    };
    t[0] = kernel::cos_moment_at(l, sp, h);
    if order >= 1 {
        let (dc, ds) = kernel::cos_moment_parts_dlambda(l, sp);
        t[1] = dc + h * ds;
    }
    t
}

/// Taylor coefficients of `1 / a(lambda)` up to `order`.
fn reciprocal(a: &[Complex64], order: usize) -> Vec<Complex64> {
    let mut b = Vec::with_capacity(order + 1);
    b.push(1.0 / a[0]);
    for k in 1..=order {
        let s: Complex64 = (1..=k.min(a.len() - 1)).map(|i| a[i] * b[k - i]).sum();
        b.push(-s / a[0]);
    }
    b
}

/// Distance from `lambda` to the nearest zero of `phi_j(pi, .)`, relative
/// to `1 + |lambda|`, estimated by one Newton step.
fn vertex_distance(a: &[Complex64], lambda: Complex64) -> f64 {
    let d = a[1].norm() * (1.0 + lambda.norm());
    if d > 0.0 {
        a[0].norm() / d
    } else {
        a[0].norm()
    }
}

fn detect_case(lambda: Complex64, taylor_pi: &[Vec<Complex64>], cfg: &Config) -> Result<ChainCase> {
    let mut best: Option<(usize, f64)> = None;
    for (j, a) in taylor_pi.iter().enumerate() {
        let r = vertex_distance(a, lambda);
        if best.is_none_or(|(_, b)| r < b) {
            best = Some((j, r));
        }
    }
    match best {
        Some((j, r)) if r < cfg.case_zero_tol => Ok(ChainCase::Vertex { edge: j }),
        Some((j, r)) if r < cfg.case_ambiguous_tol => Err(Error::CaseDetectionAmbiguous {
            lambda,
            edge: j + 1,
            value: r,
        }),
        _ => Ok(ChainCase::Regular),
    }
}

/// Builds the chain of `lambda` with the given slots.
pub fn build_chain(lambda: Complex64, slots: Vec<(usize, usize)>, h: &[Complex64], cfg: &Config) -> Result<RootChain> {
    let mult = slots.len();
    if mult == 0 {
        return Err(Error::InvalidInput("empty chain".into()));
    }
    if mult > NU_MAX + 1 {
        return Err(Error::OrderTooHigh {
            order: mult - 1,
            max: NU_MAX,
        });
    }
    let sp = SpectralPoint::new(lambda);
    let taylor_pi: Vec<Vec<Complex64>> = h
        .iter()
        .map(|&hj| kernel::phi_taylor(PI, &sp, hj, mult))
        .collect();
    let case = detect_case(lambda, &taylor_pi, cfg)?;
    let m = h.len();
    let mut coeffs = vec![vec![Vec::new(); m]; mult];
    for j in 0..m {
        match case {
            ChainCase::Vertex { edge } if edge == j => {
                let b = reciprocal(&taylor_pi[j][1..], mult - 1);
                for (nu, row) in coeffs.iter_mut().enumerate() {
                    row[j] = (0..=nu).map(|i| b[nu - i]).collect();
                }
            }
            ChainCase::Vertex { .. } => {
                let b = reciprocal(&taylor_pi[j], mult - 1);
                for (nu, row) in coeffs.iter_mut().enumerate() {
                    row[j] = (0..=nu)
                        .map(|i| if i < nu { b[nu - 1 - i] } else { Complex64::default() })
                        .collect();
                }
            }
            ChainCase::Regular => {
                let b = reciprocal(&taylor_pi[j], mult - 1);
                for (nu, row) in coeffs.iter_mut().enumerate() {
                    row[j] = (0..=nu).map(|i| b[nu - i]).collect();
                }
            }
        }
    }
    Ok(RootChain {
        lambda,
        multiplicity: mult,
        case,
        slots,
        h: h.to_vec(),
        coeffs,
    })
}

/// Groups equal values of the spectrum and builds one chain per group.
pub fn root_chains(spectrum: &Spectrum, hconf: &HConfiguration, cfg: &Config) -> Result<Vec<RootChain>> {
    hconf.require_star()?;
    if spectrum.m != hconf.m() {
        return Err(Error::InvalidInput(format!(
            "spectrum has {} branches but h has {} entries",
            spectrum.m,
            hconf.m()
        )));
    }
    let mut entries = spectrum.entries.clone();
    entries.sort_by_key(|e| (e.n, e.k));
    let mut groups: Vec<(Complex64, Vec<Complex64>, Vec<(usize, usize)>)> = Vec::new();
    for e in &entries {
        let tol = cfg.cluster_radius * (1.0 + e.lambda.norm());
        match groups.iter_mut().find(|g| (g.0 - e.lambda).norm() <= tol) {
            Some(g) => {
                g.1.push(e.lambda);
                g.2.push((e.n, e.k));
            }
            None => groups.push((e.lambda, vec![e.lambda], vec![(e.n, e.k)])),
        }
    }
    groups
        .into_par_iter()
        .map(|(_, vals, slots)| {
            let mean = vals.iter().sum::<Complex64>() / vals.len() as f64;
            build_chain(mean, slots, &hconf.h, cfg)
        })
        .collect()
}

/// `v_nk = factor * y^<nu>` of chain `chain`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaledElement {
    pub n: usize,
    pub k: usize,
    pub chain: usize,
    pub nu: usize,
    pub factor: f64,
}

/// `v_n1 = (-1)^n y_n1`, `v_nk = (-1)^n y_nk / (n + 1/2)` for `k >= 2`,
/// sorted by `(n, k)`.
pub fn v_scaled(chains: &[RootChain]) -> Vec<ScaledElement> {
    let mut out: Vec<ScaledElement> = chains
        .iter()
        .enumerate()
        .flat_map(|(c, chain)| {
            chain.slots.iter().enumerate().map(move |(nu, &(n, k))| {
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                let factor = if k == 1 { sign } else { sign / (n as f64 + 0.5) };
                ScaledElement {
                    n,
                    k,
                    chain: c,
                    nu,
                    factor,
                }
            })
        })
        .collect();
    out.sort_by_key(|e| (e.n, e.k));
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EtaSequence {
    pub m: usize,
    /// `eta_nk`, shell-major.
    pub values: Vec<Complex64>,
    /// Running sums of `|eta_nk|^2` over `n`, one list per branch `k`.
    pub partial_sums: Vec<Vec<f64>>,
    pub plateau_ratio: Vec<f64>,
}

impl EtaSequence {
    pub fn get(&self, n: usize, k: usize) -> Complex64 {
        self.values[n * self.m + k - 1]
    }
}

fn eta_of(chain: &RootChain, el: &ScaledElement) -> Complex64 {
    let s: Complex64 = (0..chain.h.len()).map(|j| chain.eval_x(el.nu, j, PI)).sum();
    -el.factor * s
}

/// `eta_nk = -sum_j v_nk,j'(pi)`.
pub fn eta(chains: &[RootChain], m: usize) -> EtaSequence {
    let elements = v_scaled(chains);
    let values: Vec<Complex64> = elements
        .iter()
        .map(|el| eta_of(&chains[el.chain], el))
        .collect();
    let shells = values.len() / m.max(1);
    let partial_sums: Vec<Vec<f64>> = (0..m)
        .map(|k| {
            let mut acc = 0.0;
            (0..shells)
                .map(|n| {
                    acc += values[n * m + k].norm_sqr();
                    acc
                })
                .collect()
        })
        .collect();
    EtaSequence {
        m,
        plateau_ratio: partial_sums.iter().map(|p| plateau_ratio(p)).collect(),
        values,
        partial_sums,
    }
}

/// `(u, v) = sum_j ∫ conj(u_j) v_j` for two scaled elements.
pub fn inner(chains: &[RootChain], a: &ScaledElement, b: &ScaledElement) -> Complex64 {
    let ca = &chains[a.chain];
    let cb = &chains[b.chain];
    let simple = a.nu == 0 && b.nu == 0 && ca.case == ChainCase::Regular && cb.case == ChainCase::Regular;
    let mut total = Complex64::default();
    for j in 0..ca.h.len() {
        total += if simple {
            let wa = ca.coeffs[0][j][0].conj();
            let wb = cb.coeffs[0][j][0];
            wa * wb * kernel::phi_cross_inner(ca.lambda.conj(), ca.h[j].conj(), cb.lambda, cb.h[j])
        } else {
            let panel = 2.0 / (1.0 + ca.lambda.sqrt().norm() + cb.lambda.sqrt().norm());
            quadrature::integrate(|x| ca.eval(a.nu, j, x).conj() * cb.eval(b.nu, j, x), 0.0, PI, panel)
        };
    }
    total * a.factor * b.factor
}

/// Condition number of the Gram matrix of the first `count` scaled elements.
pub fn gram_condition(chains: &[RootChain], count: usize) -> f64 {
    let els: Vec<ScaledElement> = v_scaled(chains).into_iter().take(count).collect();
    let n = els.len();
    let rows: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|r| (0..n).map(|c| inner(chains, &els[r], &els[c])).collect())
        .collect();
    let g = DMatrix::from_fn(n, n, |r, c| rows[r][c]);
    let sv = g.singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RieszReport {
    pub method: String,
    pub n_equations: usize,
    pub dictionary: usize,
    pub condition: f64,
    pub relative_residual: f64,
    pub vertex_chains: usize,
    pub multiple_chains: usize,
    pub eta_plateau_ratio: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Solves `(p, v_nk) = eta_nk`, `n < n_eq`, for `p_j` in the span of
/// `cos(l x)`, `l = 0..=k_dict`.
pub fn reconstruct_method1(
    spectrum: &Spectrum,
    hconf: &HConfiguration,
    n_eq: usize,
    k_dict: usize,
    cfg: &Config,
) -> Result<(Vec<CosineSeries>, RieszReport)> {
    hconf.require_star()?;
    if spectrum.shells() < n_eq {
        return Err(Error::InsufficientShells {
            required: n_eq,
            available: spectrum.shells(),
        });
    }
    let m = hconf.m();
    let kd = k_dict + 1;
    let chains = root_chains(&spectrum.truncate(n_eq), hconf, cfg)?;
    let elements = v_scaled(&chains);
    let eta_seq = eta(&chains, m);
    let rows: Vec<Vec<Complex64>> = elements
        .par_iter()
        .map(|el| {
            let chain = &chains[el.chain];
            let mut row = Vec::with_capacity(m * kd);
            for j in 0..m {
                row.extend(
                    chain
                        .cos_moments(el.nu, j, kd, cfg.cauchy_points)
                        .into_iter()
                        .map(|v| v * el.factor),
                );
            }
            row
        })
        .collect();
    let a = DMatrix::from_fn(rows.len(), m * kd, |r, c| rows[r][c]);
    let b = DVector::from_vec(eta_seq.values.clone());
    let ls = linalg::lstsq(&a, &b, 1e-14);
    let p: Vec<CosineSeries> = (0..m)
        .map(|j| CosineSeries::new(ls.solution.iter().skip(j * kd).take(kd).copied().collect()))
        .collect();
    let mut warnings = Vec::new();
    if n_eq < 2 * kd {
        warnings.push(format!(
            "{} shells give fewer than twice the {} unknowns per edge",
            n_eq, kd
        ));
    }
    if ls.condition > cfg.condition_limit {
        warnings.push(format!("ill-conditioned moment system: condition number {:e}", ls.condition));
    }
    let report = RieszReport {
        method: "riesz".into(),
        n_equations: rows.len(),
        dictionary: kd,
        condition: ls.condition,
        relative_residual: ls.relative_residual,
        vertex_chains: chains.iter().filter(|c| c.case != ChainCase::Regular).count(),
        multiple_chains: chains.iter().filter(|c| c.multiplicity > 1).count(),
        eta_plateau_ratio: eta_seq.plateau_ratio.clone(),
        warnings,
    };
    Ok((p, report))
}
