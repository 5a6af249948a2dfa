//! Edge-by-edge reconstruction: the characteristic function rebuilt from the
//! spectrum is sampled at the zeros of `phi_j(pi, .)`, which isolates the
//! moments of `p_j` against `phi_j(x, mu_n)`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{plateau_ratio, zh_member, AsymptoticTemplate, HClass, HConfiguration};
use crate::characterize::DegenerateSplit;
use crate::config::Config;
use crate::error::{Error, Result};
use crate::forward::{self, delta0};
use crate::kernel::{self, SpectralPoint};
use crate::linalg;
use crate::products::ProductCharFn;
use crate::series::CosineSeries;
use crate::spectrum::Spectrum;

/// `chi_n = ∫ p_j phi_j(x, mu_n) dx` recovered from the spectrum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSequence {
    pub j: usize,
    pub nodes: Vec<Complex64>,
    pub values: Vec<Complex64>,
    pub partial_sums: Vec<f64>,
    pub plateau_ratio: f64,
}

fn profile(values: &[Complex64]) -> Vec<f64> {
    let mut acc = 0.0;
    values
        .iter()
        .map(|v| {
            acc += v.norm_sqr();
            acc
        })
        .collect()
}

/// Zeros `mu_n` of `phi_j(pi, .)` and normalizers `alpha_n = ∫ phi_j(x, mu_n)^2 dx`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiorthoSystem {
    pub j: usize,
    pub h: Complex64,
    pub nodes: Vec<Complex64>,
    pub alphas: Vec<Complex64>,
    /// Distance from `h` to the exclusion set `Z_h`.
    pub zh_margin: f64,
}

impl BiorthoSystem {
    /// `w_n(x) = conj(phi_j(x, mu_n)) / conj(alpha_n)`.
    pub fn w(&self, n: usize, x: f64) -> Complex64 {
        (kernel::phi(x, self.nodes[n], self.h) / self.alphas[n]).conj()
    }

    /// `∫ conj(w_n) phi_j(x, mu_l) dx` in closed form.
    pub fn pairing(&self, n: usize, l: usize) -> Complex64 {
        if n == l {
            return Complex64::new(1.0, 0.0);
        }
        kernel::phi_cross_inner(self.nodes[n], self.h, self.nodes[l], self.h) / self.alphas[n]
    }

    /// Largest off-diagonal entry of the pairing matrix over the first `n` nodes.
    pub fn max_off_diagonal(&self, n: usize) -> f64 {
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                if a != b {
                    worst = worst.max(self.pairing(a, b).norm());
                }
            }
        }
        worst
    }
}

pub fn biortho(hconf: &HConfiguration, j: usize, n: usize, cfg: &Config) -> Result<BiorthoSystem> {
    biortho_for(j, hconf.h[j], n, cfg)
}

fn biortho_for(j: usize, h: Complex64, n: usize, cfg: &Config) -> Result<BiorthoSystem> {
    let zh = zh_member(h, cfg.zh_depth, cfg.zh_tol)?;
    let nodes = forward::mu_for(h, n, cfg)?;
    let alphas: Vec<Complex64> = nodes.iter().map(|&mu| kernel::phi_self_inner(mu, h)).collect();
    if let Some(i) = alphas.iter().position(|a| a.norm() < 1e-12) {
        return Err(Error::SmallDenominator {
            edge: j + 1,
            node: i,
            value: alphas[i].norm(),
            guard: 1e-12,
        });
    }
    Ok(BiorthoSystem {
        j,
        h,
        nodes,
        alphas,
        zh_margin: zh.margin,
    })
}

/// Samples `(D - D_0) / prod_{s in others} phi_s(pi, .)` at the nodes.
fn chi_at_nodes<F: Fn(Complex64) -> Complex64 + Sync>(
    j: usize,
    nodes: &[Complex64],
    dhat: F,
    others: &[Complex64],
    cfg: &Config,
) -> Result<ChiSequence> {
    let values = nodes
        .par_iter()
        .enumerate()
        .map(|(i, &mu)| {
            let sp = SpectralPoint::new(mu);
            let mut den = Complex64::new(1.0, 0.0);
            for &hs in others {
                let v = sp.phi(PI, hs);
                if v.norm() < cfg.denominator_guard {
                    return Err(Error::SmallDenominator {
                        edge: j + 1,
                        node: i,
                        value: v.norm(),
                        guard: cfg.denominator_guard,
                    });
                }
                den *= v;
            }
            Ok(dhat(mu) / den)
        })
        .collect::<Result<Vec<_>>>()?;
    let partial_sums = profile(&values);
    Ok(ChiSequence {
        j,
        nodes: nodes.to_vec(),
        plateau_ratio: plateau_ratio(&partial_sums),
        values,
        partial_sums,
    })
}

fn star_pcf(spectrum: &Spectrum, hconf: &HConfiguration, cfg: &Config) -> Result<ProductCharFn> {
    ProductCharFn::new(spectrum, &AsymptoticTemplate::new(hconf), cfg.n_direct, cfg.n_tail)
}

fn chi_with(pcf: &ProductCharFn, hconf: &HConfiguration, j: usize, nodes: &[Complex64], cfg: &Config) -> Result<ChiSequence> {
    let others: Vec<Complex64> = (0..hconf.m()).filter(|&s| s != j).map(|s| hconf.h[s]).collect();
    chi_at_nodes(j, nodes, |mu| pcf.delta(mu) - delta0(hconf, mu), &others, cfg)
}

/// Moments `chi_n^{(j)}`, `n < n`, from a numbered spectrum.
pub fn chi(spectrum: &Spectrum, hconf: &HConfiguration, j: usize, n: usize, cfg: &Config) -> Result<ChiSequence> {
    hconf.require_star()?;
    let pcf = star_pcf(spectrum, hconf, cfg)?;
    let nodes = forward::mu(hconf, j, n, cfg)?;
    chi_with(&pcf, hconf, j, &nodes, cfg)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method2Solver {
    /// Weighted least squares of the moment equations over the output dictionary.
    LeastSquares,
    /// Truncated biorthogonal series `sum_n chi_n phi_j(x, mu_n) / alpha_n`,
    /// projected onto the output dictionary.
    Series,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeDiagnostics {
    pub edge: usize,
    pub chi_plateau_ratio: f64,
    /// `max_n |∫ p_j phi_j(x, mu_n) - chi_n|` for the reconstructed `p_j`.
    pub moment_residual: f64,
    pub condition: f64,
    pub zh_margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub method: String,
    pub n_equations: usize,
    pub dictionary: usize,
    pub n_direct: usize,
    pub n_tail: usize,
    pub edges: Vec<EdgeDiagnostics>,
    pub warnings: Vec<String>,
}

/// Solves `∫ p phi(x, mu_n) = chi_n` for a cosine series of `k_out` terms.
fn solve_edge(sys: &BiorthoSystem, chi: &ChiSequence, k_out: usize, solver: Method2Solver) -> (CosineSeries, f64) {
    let n = chi.values.len();
    match solver {
        Method2Solver::LeastSquares => {
            let a = DMatrix::from_fn(n, k_out, |i, l| {
                kernel::cos_moment(l, sys.nodes[i], sys.h) / sys.alphas[i].norm().sqrt()
            });
            let b = DVector::from_fn(n, |i, _| chi.values[i] / sys.alphas[i].norm().sqrt());
            let ls = linalg::lstsq(&a, &b, 1e-14);
            (CosineSeries::new(ls.solution.iter().copied().collect()), ls.condition)
        }
        Method2Solver::Series => {
            let coeffs = (0..k_out)
                .map(|l| {
                    let norm = if l == 0 { 1.0 / PI } else { 2.0 / PI };
                    norm * (0..n)
                        .map(|i| chi.values[i] / sys.alphas[i] * kernel::cos_moment(l, sys.nodes[i], sys.h))
                        .sum::<Complex64>()
                })
                .collect();
            (CosineSeries::new(coeffs), 1.0)
        }
    }
}

fn moment_residual(p: &CosineSeries, sys: &BiorthoSystem, chi: &ChiSequence) -> f64 {
    sys.nodes
        .iter()
        .zip(&chi.values)
        .map(|(&mu, &c)| (p.moment(&SpectralPoint::new(mu), sys.h) - c).norm())
        .fold(0.0, f64::max)
}

/// Recovers every `p_j` separately from `n` moments.
pub fn reconstruct_method2(
    spectrum: &Spectrum,
    hconf: &HConfiguration,
    n: usize,
    k_out: usize,
    solver: Method2Solver,
    cfg: &Config,
) -> Result<(Vec<CosineSeries>, ReconstructionReport)> {
    hconf.require_star()?;
    let pcf = star_pcf(spectrum, hconf, cfg)?;
    let results = (0..hconf.m())
        .into_par_iter()
        .map(|j| {
            let sys = biortho(hconf, j, n, cfg)?;
            let chi = chi_with(&pcf, hconf, j, &sys.nodes, cfg)?;
            let (p, cond) = solve_edge(&sys, &chi, k_out, solver);
            let diag = EdgeDiagnostics {
                edge: j + 1,
                chi_plateau_ratio: chi.plateau_ratio,
                moment_residual: moment_residual(&p, &sys, &chi),
                condition: cond,
                zh_margin: sys.zh_margin,
            };
            Ok((p, diag))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = ReconstructionReport {
        method: format!("edge-wise ({solver:?})"),
        n_equations: n,
        dictionary: k_out,
        n_direct: pcf.n_direct(),
        n_tail: pcf.n_tail(),
        edges: Vec::new(),
        warnings: Vec::new(),
    };
    let mut out = Vec::new();
    for (p, d) in results {
        if d.condition > cfg.condition_limit {
            report
                .warnings
                .push(format!("edge {}: condition number {:e}", d.edge, d.condition));
        }
        if d.zh_margin < 1e-3 {
            report
                .warnings
                .push(format!("edge {}: h is within {:e} of Z_h", d.edge, d.zh_margin));
        }
        out.push(p);
        report.edges.push(d);
    }
    Ok((out, report))
}

/// Recovers the sums of `p_j` over groups of equal Robin coefficients,
/// indexed like `hconf.groups`.
pub fn reconstruct_sums_degenerate(
    split: &DegenerateSplit,
    hconf: &HConfiguration,
    n: usize,
    k_out: usize,
    cfg: &Config,
) -> Result<(Vec<CosineSeries>, ReconstructionReport)> {
    if hconf.class != HClass::Bullet {
        return Err(Error::InvalidInput(
            "group sums apply only to repeated Robin coefficients".into(),
        ));
    }
    let mut deflated = AsymptoticTemplate::new(hconf);
    deflated.branches.retain(|b| b.mu_edge.is_none());
    let pcf = ProductCharFn::new(&split.lambda_part, &deflated, cfg.n_direct, cfg.n_tail)?;
    let reps: Vec<(Complex64, f64)> = hconf
        .groups
        .iter()
        .map(|g| (hconf.h[g.rep], g.multiplicity as f64))
        .collect();
    // D_0 = sum_s m_s phi_s' prod_{k != s} phi_k over group representatives
    let d0 = |mu: Complex64| {
        let sp = SpectralPoint::new(mu);
        let a: Vec<_> = reps.iter().map(|&(h, ms)| (ms * sp.phi_x(PI, h), Complex64::default())).collect();
        let b: Vec<_> = reps.iter().map(|&(h, _)| (sp.phi(PI, h), Complex64::default())).collect();
        forward::star_sum(&a, &b).0
    };
    let mut report = ReconstructionReport {
        method: "group sums".into(),
        n_equations: n,
        dictionary: k_out,
        n_direct: pcf.n_direct(),
        n_tail: pcf.n_tail(),
        edges: Vec::new(),
        warnings: Vec::new(),
    };
    let mut out = Vec::new();
    for (g, group) in hconf.groups.iter().enumerate() {
        let sys = biortho_for(group.rep, reps[g].0, n, cfg)?;
        let others: Vec<Complex64> = reps
            .iter()
            .enumerate()
            .filter(|&(s, _)| s != g)
            .map(|(_, &(h, _))| h)
            .collect();
        let chi = chi_at_nodes(group.rep, &sys.nodes, |mu| pcf.delta(mu) - d0(mu), &others, cfg)?;
        let (p, cond) = solve_edge(&sys, &chi, k_out, Method2Solver::LeastSquares);
        report.edges.push(EdgeDiagnostics {
            edge: group.rep + 1,
            chi_plateau_ratio: chi.plateau_ratio,
            moment_residual: moment_residual(&p, &sys, &chi),
            condition: cond,
            zh_margin: sys.zh_margin,
        });
        out.push(p);
    }
    Ok((out, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::classify_h;

    #[test]
    fn zero_coefficient_nodes_and_normalizers() {
        let hc = classify_h(&[Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]).unwrap();
        let sys = biortho(&hc, 0, 10, &Config::default()).unwrap();
        for n in 0..10 {
            assert!((sys.nodes[n] - (n as f64 + 0.5).powi(2)).norm() < 1e-10);
            assert!((sys.alphas[n] - PI / 2.0).norm() < 1e-10);
            let x = 0.77;
            let want = 2.0 / PI * ((n as f64 + 0.5) * x).cos();
            assert!((sys.w(n, x) - want).norm() < 1e-10);
        }
        assert!(sys.max_off_diagonal(10) < 1e-12);
    }
}
