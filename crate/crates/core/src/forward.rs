//! Characteristic functions of the forward problem and of its adjoint, and
//! their zeros.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{self, AsymptoticTemplate, Branch, BranchKind, HConfiguration};
use crate::characterize;
use crate::config::Config;
use crate::error::{Error, Result};
use crate::kernel::{self, SpectralPoint};
use crate::roots;
use crate::series::CosineSeries;
use crate::spectrum::Spectrum;

/// Robin coefficients and per-edge densities of the matching condition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphProblem {
    pub hconf: HConfiguration,
    pub p: Vec<CosineSeries>,
}

impl GraphProblem {
    pub fn new(h: Vec<Complex64>, p: Vec<CosineSeries>) -> Result<Self> {
        let hconf = asymptotics::classify_h(&h)?;
        if p.len() != h.len() {
            return Err(Error::InvalidInput(format!(
                "{} densities given for {} edges",
                p.len(),
                h.len()
            )));
        }
        if p.iter().flat_map(|s| &s.coeffs).any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidInput("density coefficients must be finite".into()));
        }
        Ok(Self { hconf, p })
    }

    /// The problem with all densities zero.
    pub fn unperturbed(h: Vec<Complex64>) -> Result<Self> {
        let m = h.len();
        Self::new(h, vec![CosineSeries::default(); m])
    }

    pub fn m(&self) -> usize {
        self.hconf.m()
    }

    pub fn h(&self) -> &[Complex64] {
        &self.hconf.h
    }

    pub fn template(&self) -> AsymptoticTemplate {
        AsymptoticTemplate::new(&self.hconf)
    }
}

/// `sum_j a_j prod_{s != j} b_s` and its derivative, from values and
/// derivatives of `a_j`, `b_j`.
pub(crate) fn star_sum(a: &[(Complex64, Complex64)], b: &[(Complex64, Complex64)]) -> (Complex64, Complex64) {
    let m = a.len();
    let mut value = Complex64::default();
    let mut deriv = Complex64::default();
    for j in 0..m {
        let mut prod = Complex64::new(1.0, 0.0);
        let mut dprod = Complex64::default();
        for s in (0..m).filter(|&s| s != j) {
            dprod = dprod * b[s].0 + prod * b[s].1;
            prod *= b[s].0;
        }
        value += a[j].0 * prod;
        deriv += a[j].1 * prod + a[j].0 * dprod;
    }
    (value, deriv)
}

fn edge_values(sp: &SpectralPoint, h: Complex64) -> ((Complex64, Complex64), (Complex64, Complex64)) {
    let f = kernel::phi_derivatives(PI, sp, h, 1);
    let fx = kernel::phi_x_derivatives(PI, sp, h, 1);
    ((fx[0], fx[1]), (f[0], f[1]))
}

/// Characteristic function and its lambda-derivative.
pub fn delta_with_derivative(problem: &GraphProblem, lambda: Complex64) -> (Complex64, Complex64) {
    let sp = SpectralPoint::new(lambda);
    let m = problem.m();
    let mut a = Vec::with_capacity(m);
    let mut b = Vec::with_capacity(m);
    for (j, pj) in problem.p.iter().enumerate() {
        let h = problem.hconf.h[j];
        let (fx, f) = edge_values(&sp, h);
        let (mv, md) = pj.moment_with_derivative(&sp, h);
        a.push((fx.0 + mv, fx.1 + md));
        b.push(f);
    }
    star_sum(&a, &b)
}

/// `sum_j (phi_j'(pi) + ∫ p_j phi_j) prod_{s != j} phi_s(pi)`.
pub fn delta(problem: &GraphProblem, lambda: Complex64) -> Complex64 {
    let sp = SpectralPoint::new(lambda);
    let m = problem.m();
    let mut a = Vec::with_capacity(m);
    let mut b = Vec::with_capacity(m);
    for (j, pj) in problem.p.iter().enumerate() {
        let h = problem.hconf.h[j];
        a.push((sp.phi_x(PI, h) + pj.moment(&sp, h), Complex64::default()));
        b.push((sp.phi(PI, h), Complex64::default()));
    }
    star_sum(&a, &b).0
}

/// Characteristic function with all densities zero.
pub fn delta0(hconf: &HConfiguration, lambda: Complex64) -> Complex64 {
    let sp = SpectralPoint::new(lambda);
    let a: Vec<_> = hconf.h.iter().map(|&h| (sp.phi_x(PI, h), Complex64::default())).collect();
    let b: Vec<_> = hconf.h.iter().map(|&h| (sp.phi(PI, h), Complex64::default())).collect();
    star_sum(&a, &b).0
}

/// Characteristic function of the adjoint problem (frozen argument) and
/// its lambda-derivative.
pub fn lstar_delta_with_derivative(problem: &GraphProblem, lambda: Complex64) -> (Complex64, Complex64) {
    let sp = SpectralPoint::new(lambda);
    let m = problem.m();
    let mut a = Vec::with_capacity(m);
    let mut b = Vec::with_capacity(m);
    for (j, pj) in problem.p.iter().enumerate() {
        let h = problem.hconf.h[j].conj();
        let (fx, f) = edge_values(&sp, h);
        // g_j(pi) and g_j'(pi) for g_j(x) = ∫_0^x sin(rho (x - t))/rho conj(p_j(t)) dt
        let mut g = (Complex64::default(), Complex64::default());
        let mut gx = (Complex64::default(), Complex64::default());
        for (l, c) in pj.coeffs.iter().enumerate() {
            if *c == Complex64::default() {
                continue;
            }
            let w = c.conj() * if l % 2 == 0 { 1.0 } else { -1.0 };
            let (ic, is) = kernel::cos_moment_parts(l, &sp);
            let (dc, ds) = kernel::cos_moment_parts_dlambda(l, &sp);
            g.0 += w * is;
            g.1 += w * ds;
            gx.0 += w * ic;
            gx.1 += w * dc;
        }
        let one_minus = 1.0 - g.0;
        a.push((
            one_minus * fx.0 + gx.0 * f.0,
            -g.1 * fx.0 + one_minus * fx.1 + gx.1 * f.0 + gx.0 * f.1,
        ));
        b.push(f);
    }
    star_sum(&a, &b)
}

pub fn lstar_delta(problem: &GraphProblem, lambda: Complex64) -> Complex64 {
    lstar_delta_with_derivative(problem, lambda).0
}

/// Largest `|f|` at four points around `lambda` at a distance comparable to
/// the local zero spacing.
pub fn local_scale<F: Fn(Complex64) -> Complex64>(f: F, lambda: Complex64) -> f64 {
    let r = 0.5 * (1.0 + lambda.sqrt().norm());
    [1.0, -1.0]
        .iter()
        .flat_map(|&s| [Complex64::new(s * r, 0.0), Complex64::new(0.0, s * r)])
        .map(|d| f(lambda + d).norm())
        .fold(0.0, f64::max)
}

/// `|Delta(lambda)|` relative to [`local_scale`].
pub fn relative_residual(problem: &GraphProblem, lambda: Complex64) -> f64 {
    delta(problem, lambda).norm() / local_scale(|z| delta(problem, z), lambda)
}

fn spectrum_of(
    f: &roots::EntireFn<'_>,
    template: &AsymptoticTemplate,
    n_shells: usize,
    cfg: &Config,
) -> Result<Spectrum> {
    if n_shells == 0 {
        return Err(Error::InvalidInput("at least one shell is required".into()));
    }
    let m = template.branches.len();
    let seeds = |n: usize| (1..=m).map(|k| template.lambda0(n, k)).collect::<Vec<_>>();
    let (low, shells, n_low) = roots::search_shells(f, m, n_shells, &seeds, cfg)?;
    let mut s = characterize::number_bins(&low, &shells, template, n_low)?;
    s = s.truncate(n_shells);
    s.recount_multiplicities(cfg.cluster_radius);
    Ok(s)
}

/// The first `n_shells` shells of the spectrum, numbered by template
/// proximity.
pub fn eigenvalues(problem: &GraphProblem, n_shells: usize, cfg: &Config) -> Result<Spectrum> {
    let f = |z: Complex64| delta_with_derivative(problem, z);
    spectrum_of(&f, &problem.template(), n_shells, cfg)
}

/// Spectrum of the adjoint problem.
pub fn lstar_eigenvalues(problem: &GraphProblem, n_shells: usize, cfg: &Config) -> Result<Spectrum> {
    let mut t = problem.template();
    t.z1 = t.z1.conj();
    for z in &mut t.zk {
        *z = z.conj();
    }
    for b in &mut t.branches {
        b.z = b.z.conj();
    }
    let f = |z: Complex64| lstar_delta_with_derivative(problem, z);
    spectrum_of(&f, &t, n_shells, cfg)
}

/// The first `n` zeros of `phi_j(pi, .)`, `j` zero-based.
pub fn mu(hconf: &HConfiguration, j: usize, n: usize, cfg: &Config) -> Result<Vec<Complex64>> {
    mu_for(hconf.h[j], n, cfg)
}

pub(crate) fn mu_for(h: Complex64, n: usize, cfg: &Config) -> Result<Vec<Complex64>> {
    let template = AsymptoticTemplate {
        m: 1,
        z1: h,
        zk: Vec::new(),
        branches: vec![Branch {
            kind: BranchKind::HalfInteger,
            z: h,
            mu_edge: None,
        }],
    };
    let f = |z: Complex64| {
        let d = kernel::phi_derivatives(PI, &SpectralPoint::new(z), h, 1);
        (d[0], d[1])
    };
    Ok(spectrum_of(&f, &template, n, cfg)?.values())
}
