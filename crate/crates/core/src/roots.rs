//! Zeros of entire functions of `lambda`: Newton iteration, argument-principle
//! counting on rectangles in `rho = sqrt(lambda)`, and recursive subdivision.
//!
//! The search works on `G(rho) = F(rho^2)`. Shells `n >= n_low` are windows
//! `n - 1/4 <= Re rho <= n + 3/4`; everything below is one rectangle
//! symmetric about `rho = 0`, whose zeros come in `±rho` pairs.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::config::Config;
use crate::error::{Error, Result};

/// Value and lambda-derivative of an entire function.
pub type EntireFn<'a> = dyn Fn(Complex64) -> (Complex64, Complex64) + Sync + 'a;

/// Largest principal argument increment accepted between samples.
const ARG_STEP: f64 = 0.6;
const ARG_DEPTH: usize = 48;
const SAMPLES_PER_UNIT: f64 = 32.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub re0: f64,
    pub re1: f64,
    pub im0: f64,
    pub im1: f64,
}

impl Rect {
    pub fn new(re0: f64, re1: f64, im0: f64, im1: f64) -> Self {
        Self { re0, re1, im0, im1 }
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.re0 + self.re1), 0.5 * (self.im0 + self.im1))
    }

    pub fn diameter(&self) -> f64 {
        (self.re1 - self.re0).hypot(self.im1 - self.im0)
    }

    pub fn contains(&self, z: Complex64, pad: f64) -> bool {
        z.re >= self.re0 - pad && z.re <= self.re1 + pad && z.im >= self.im0 - pad && z.im <= self.im1 + pad
    }

    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re0, self.im0),
            Complex64::new(self.re1, self.im0),
            Complex64::new(self.re1, self.im1),
            Complex64::new(self.re0, self.im1),
        ]
    }

    /// Splits across the longer side at `fraction` of its length.
    fn split(&self, fraction: f64) -> (Rect, Rect) {
        if self.re1 - self.re0 >= self.im1 - self.im0 {
            let x = self.re0 + fraction * (self.re1 - self.re0);
            (
                Rect::new(self.re0, x, self.im0, self.im1),
                Rect::new(x, self.re1, self.im0, self.im1),
            )
        } else {
            let y = self.im0 + fraction * (self.im1 - self.im0);
            (
                Rect::new(self.re0, self.re1, self.im0, y),
                Rect::new(self.re0, self.re1, y, self.im1),
            )
        }
    }
}

fn finite(z: Complex64) -> bool {
    z.re.is_finite() && z.im.is_finite() && z != Complex64::default()
}

fn arg_increment<G: Fn(Complex64) -> Complex64>(
    g: &G,
    a: Complex64,
    b: Complex64,
    ga: Complex64,
    gb: Complex64,
    depth: usize,
) -> Option<f64> {
    let d = (gb / ga).arg();
    if d.abs() <= ARG_STEP {
        return Some(d);
    }
    if depth == 0 {
        return None;
    }
    let mid = 0.5 * (a + b);
    let gm = g(mid);
    if !finite(gm) {
        return None;
    }
    Some(arg_increment(g, a, mid, ga, gm, depth - 1)? + arg_increment(g, mid, b, gm, gb, depth - 1)?)
}

/// Number of zeros of `g` inside `rect`, or `None` when a zero lies on (or
/// numerically at) the boundary.
pub fn winding<G: Fn(Complex64) -> Complex64>(g: &G, rect: &Rect) -> Option<usize> {
    let corners = rect.corners();
    let mut total = 0.0;
    for i in 0..4 {
        let a = corners[i];
        let b = corners[(i + 1) % 4];
        let samples = ((b - a).norm() * SAMPLES_PER_UNIT).ceil().max(8.0) as usize;
        let mut prev = a;
        let mut gprev = g(a);
        if !finite(gprev) {
            return None;
        }
        for s in 1..=samples {
            let z = a + (b - a) * (s as f64 / samples as f64);
            let gz = g(z);
            if !finite(gz) {
                return None;
            }
            total += arg_increment(g, prev, z, gprev, gz, ARG_DEPTH)?;
            prev = z;
            gprev = gz;
        }
    }
    let w = total / (2.0 * PI);
    let r = w.round();
    if (w - r).abs() > 0.05 || r < 0.0 {
        return None;
    }
    Some(r as usize)
}

/// Newton iteration for a zero of multiplicity `mult`. Steps are clipped to
/// `clip` and convergence is declared at the relative step `step_tol` or at
/// the rounding floor.
pub fn newton<F: Fn(Complex64) -> (Complex64, Complex64) + ?Sized>(
    f: &F,
    seed: Complex64,
    mult: f64,
    clip: f64,
    max_iter: usize,
    step_tol: f64,
) -> Result<Complex64> {
    let mut z = seed;
    let mut prev_step = f64::INFINITY;
    let mut last_step = f64::INFINITY;
    for _ in 0..max_iter {
        let (v, d) = f(z);
        if v == Complex64::default() {
            return Ok(z);
        }
        if !finite(d) || !v.re.is_finite() {
            return Err(Error::NewtonDivergence {
                seed,
                reason: "non-finite derivative".into(),
            });
        }
        let mut step = mult * v / d;
        if step.norm() > clip {
            step *= clip / step.norm();
        }
        z -= step;
        let s = step.norm();
        let scale = 1.0 + z.norm();
        last_step = s / scale;
        if last_step <= step_tol || (last_step < 1e-12 && s >= 0.5 * prev_step) {
            return Ok(z);
        }
        prev_step = s;
    }
    if last_step < 1e-10 {
        Ok(z)
    } else {
        Err(Error::NewtonDivergence {
            seed,
            reason: format!("relative step {last_step:e} after {max_iter} iterations"),
        })
    }
}

/// A zero of `G` in the rho-plane with its multiplicity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RhoRoot {
    pub rho: Complex64,
    pub multiplicity: usize,
}

struct RhoSearch<'a, 'b> {
    f: &'a EntireFn<'b>,
    cfg: &'a Config,
}

impl RhoSearch<'_, '_> {
    fn g(&self, rho: Complex64) -> Complex64 {
        (self.f)(rho * rho).0
    }

    fn g_with_derivative(&self, rho: Complex64) -> (Complex64, Complex64) {
        let (v, d) = (self.f)(rho * rho);
        (v, 2.0 * rho * d)
    }

    fn count(&self, rect: &Rect) -> Option<usize> {
        winding(&|z| self.g(z), rect)
    }

    fn polish(&self, rect: &Rect, mult: usize) -> Option<Complex64> {
        let clip = 0.5 * rect.diameter().max(1e-12);
        let z = newton(
            &|z| self.g_with_derivative(z),
            rect.center(),
            mult as f64,
            clip,
            self.cfg.newton_max_iter,
            self.cfg.newton_step_tol,
        )
        .ok()?;
        rect.contains(z, 1e-12 * (1.0 + z.norm())).then_some(z)
    }

    fn subdivide(&self, rect: Rect, count: usize, depth: usize, out: &mut Vec<RhoRoot>) -> Result<()> {
        if count == 0 {
            return Ok(());
        }
        if count == 1 {
            if let Some(z) = self.polish(&rect, 1) {
                out.push(RhoRoot {
                    rho: z,
                    multiplicity: 1,
                });
                return Ok(());
            }
        }
        let scale = 1.0 + rect.center().norm();
        if count > 1 && rect.diameter() < 1e-5 * scale {
            // Counts stop resolving a multiple zero at about sqrt(eps).
            if let Some(rho) = self.polish(&rect, count) {
                out.push(RhoRoot {
                    rho,
                    multiplicity: count,
                });
                return Ok(());
            }
        }
        if rect.diameter() < 1e-7 * scale || depth == 0 {
            let rho = self.polish(&rect, count).unwrap_or(rect.center());
            out.push(RhoRoot {
                rho,
                multiplicity: count,
            });
            return Ok(());
        }
        for attempt in 0..12 {
            let fraction = 0.5 + 0.0371 * attempt as f64 * if attempt % 2 == 0 { 1.0 } else { -1.0 } + 0.0123;
            let (a, b) = rect.split(fraction);
            let (Some(ca), Some(cb)) = (self.count(&a), self.count(&b)) else {
                continue;
            };
            if ca + cb != count {
                continue;
            }
            self.subdivide(a, ca, depth - 1, out)?;
            self.subdivide(b, cb, depth - 1, out)?;
            return Ok(());
        }
        if rect.diameter() < 1e-5 * scale {
            out.push(RhoRoot {
                rho: rect.center(),
                multiplicity: count,
            });
            return Ok(());
        }
        Err(Error::RootCountMismatch {
            region: format!(
                "rho rectangle [{}, {}] x [{}, {}]",
                rect.re0, rect.re1, rect.im0, rect.im1
            ),
            expected: count,
            found: 0,
        })
    }
}

/// All zeros of `F(rho^2)` inside `rect` (in the rho-plane).
pub fn rho_roots_in(f: &EntireFn<'_>, rect: Rect, cfg: &Config) -> Result<(usize, Vec<RhoRoot>)> {
    let s = RhoSearch { f, cfg };
    let count = s.count(&rect).ok_or_else(|| Error::RootCountMismatch {
        region: "search rectangle boundary".into(),
        expected: 0,
        found: 0,
    })?;
    let mut out = Vec::new();
    s.subdivide(rect, count, 64, &mut out)?;
    Ok((count, out))
}

fn expand(roots: &[RhoRoot]) -> Vec<Complex64> {
    roots
        .iter()
        .flat_map(|r| std::iter::repeat_n(r.rho * r.rho, r.multiplicity))
        .collect()
}

/// Zeros of `f` with `Re sqrt(lambda) < n_low - 1/4`, with multiplicity.
/// Exactly `expected` values are required.
pub fn low_region(f: &EntireFn<'_>, n_low: usize, expected: usize, cfg: &Config) -> Result<Vec<Complex64>> {
    let mut last_err = None;
    for attempt in 0..4 {
        let edge = n_low as f64 - 0.25 + 1e-3 * attempt as f64;
        let ext = cfg.low_im_extent * (1.0 + 1e-3 * attempt as f64);
        let rect = Rect::new(-edge, edge, -ext, ext);
        match rho_roots_in(f, rect, cfg) {
            Ok((count, roots)) => {
                if count != 2 * expected {
                    return Err(Error::RootCountMismatch {
                        region: "low shells".into(),
                        expected,
                        found: count / 2,
                    });
                }
                let tol = 1e-7;
                let mut out = Vec::new();
                for r in &roots {
                    if r.rho.norm() <= tol {
                        out.extend(std::iter::repeat_n(r.rho * r.rho, r.multiplicity / 2));
                    } else if r.rho.re > tol || (r.rho.re.abs() <= tol && r.rho.im > 0.0) {
                        out.extend(std::iter::repeat_n(r.rho * r.rho, r.multiplicity));
                    }
                }
                if out.len() != expected {
                    return Err(Error::RootCountMismatch {
                        region: "low shells (after pairing rho and -rho)".into(),
                        expected,
                        found: out.len(),
                    });
                }
                return Ok(out);
            }
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.expect("at least one attempt"))
}

/// Window of shell `n` in the rho-plane.
pub fn shell_rect(n: usize, cfg: &Config) -> Rect {
    let nf = n as f64;
    Rect::new(nf - 0.25, nf + 0.75, -cfg.shell_im_extent, cfg.shell_im_extent)
}

fn cluster_distinct(vals: &[Complex64], radius: f64) -> usize {
    let mut reps: Vec<Complex64> = Vec::new();
    for &v in vals {
        if !reps.iter().any(|r| (r - v).norm() <= radius * (1.0 + v.norm())) {
            reps.push(v);
        }
    }
    reps.len()
}

/// The `per_shell` zeros of `f` in the window of shell `n`, Newton-seeded.
pub fn shell_roots(f: &EntireFn<'_>, n: usize, seeds: &[Complex64], per_shell: usize, cfg: &Config) -> Result<Vec<Complex64>> {
    let rect = shell_rect(n, cfg);
    let clip = 0.5 * (1.0 + n as f64);
    let mut found = Vec::with_capacity(per_shell);
    for &seed in seeds {
        let Ok(z) = newton(f, seed, 1.0, clip, cfg.newton_max_iter, cfg.newton_step_tol) else {
            break;
        };
        if !rect.contains(z.sqrt(), 0.0) {
            break;
        }
        found.push(z);
    }
    let newton_ok = found.len() == per_shell && cluster_distinct(&found, cfg.cluster_radius) == per_shell;
    if newton_ok && !cfg.verify_shell_counts {
        return Ok(found);
    }
    let s = RhoSearch { f, cfg };
    let count = s.count(&rect).ok_or_else(|| Error::RootCountMismatch {
        region: format!("shell {n} window boundary"),
        expected: per_shell,
        found: 0,
    })?;
    if count != per_shell {
        return Err(Error::RootCountMismatch {
            region: format!("shell {n}"),
            expected: per_shell,
            found: count,
        });
    }
    if newton_ok {
        return Ok(found);
    }
    let mut roots = Vec::new();
    s.subdivide(rect, count, 64, &mut roots)?;
    Ok(expand(&roots))
}

/// Shells the low region may grow by when the windows of the first
/// shells do not hold exactly `per_shell` zeros.
pub const MAX_LOW_GROWTH: usize = 16;

/// Raw zeros of `f`: the low region followed by one vector per shell from
/// the returned low-region size up to `n_shells`.
///
/// The low region starts at `cfg.n_low` shells and grows past any shell
/// whose window count fails, since separation into windows is only
/// guaranteed for large `n`.
pub fn search_shells(
    f: &EntireFn<'_>,
    per_shell: usize,
    n_shells: usize,
    seeds: &(dyn Fn(usize) -> Vec<Complex64> + Sync),
    cfg: &Config,
) -> Result<(Vec<Complex64>, Vec<Vec<Complex64>>, usize)> {
    let first = cfg.n_low.max(1);
    let cap = first + MAX_LOW_GROWTH;
    let mut shells: Vec<Result<Vec<Complex64>>> = (first..n_shells.max(first))
        .into_par_iter()
        .map(|n| shell_roots(f, n, &seeds(n), per_shell, cfg))
        .collect();
    let mut n_low = first;
    if let Some(bad) = shells.iter().rposition(|r| r.is_err()) {
        let n = first + bad;
        if n >= cap {
            return Err(shells.swap_remove(bad).unwrap_err());
        }
        n_low = n + 1;
    }
    loop {
        match low_region(f, n_low, per_shell * n_low, cfg) {
            Ok(low) => {
                let rest = shells
                    .into_iter()
                    .skip(n_low - first)
                    .collect::<Result<Vec<_>>>()?;
                return Ok((low, rest, n_low));
            }
            Err(e @ Error::RootCountMismatch { .. }) if n_low < cap => {
                let _ = e;
                n_low += 1;
            }
            Err(e) => return Err(e),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn winding_counts_polynomial_zeros() {
        let g = |z: Complex64| (z - c(0.3, 0.1)) * (z - c(-0.2, 0.4)) * (z - c(2.0, 0.0));
        assert_eq!(winding(&g, &Rect::new(-1.0, 1.0, -1.0, 1.0)), Some(2));
        assert_eq!(winding(&g, &Rect::new(-3.0, 3.0, -1.0, 1.0)), Some(3));
        assert_eq!(winding(&g, &Rect::new(1.0, 1.5, -1.0, 1.0)), Some(0));
    }

    #[test]
    fn winding_detects_zero_on_boundary() {
        let g = |z: Complex64| z - c(1.0, 0.0);
        assert_eq!(winding(&g, &Rect::new(0.0, 1.0, -1.0, 1.0)), None);
    }

    #[test]
    fn newton_converges_for_cosine() {
        let f = |z: Complex64| (z.cos(), -z.sin());
        let z = newton(&f, c(1.4, 0.1), 1.0, 0.5, 60, 1e-15).unwrap();
        assert!((z - c(PI / 2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn subdivision_finds_double_and_simple_zeros() {
        // F(lambda) = (lambda - 1)^2 (lambda - 4i); low region up to Re rho < 2.75
        let f = |l: Complex64| {
            let a = l - 1.0;
            let b = l - c(0.0, 4.0);
            (a * a * b, 2.0 * a * b + a * a)
        };
        let cfg = Config::default();
        let mut got = low_region(&f, 3, 3, &cfg).unwrap();
        got.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
        assert!((got[0] - 1.0).norm() < 1e-6);
        assert!((got[1] - 1.0).norm() < 1e-6);
        assert!((got[2] - c(0.0, 4.0)).norm() < 1e-10);
    }

    #[test]
    fn zero_at_origin_is_counted_once_per_lambda_multiplicity() {
        let f = |l: Complex64| (l * (l - 2.0), 2.0 * l - 2.0);
        let got = low_region(&f, 3, 2, &Config::default()).unwrap();
        assert!(got.iter().any(|z| z.norm() < 1e-10));
        assert!(got.iter().any(|z| (z - 2.0).norm() < 1e-10));
    }

    #[test]
    fn shell_search_on_cosine() {
        // zeros of cos(pi rho) at rho = n + 1/2
        let f = |l: Complex64| {
            let r = l.sqrt();
            let d = if r.norm() > 0.0 { -PI * (PI * r).sin() / (2.0 * r) } else { Complex64::new(-PI * PI / 2.0, 0.0) };
            ((PI * r).cos(), d)
        };
        let cfg = Config::default();
        let seeds = |n: usize| vec![Complex64::new((n as f64 + 0.5).powi(2) + 0.3, 0.1)];
        let (low, shells, _) = search_shells(&f, 1, 8, &seeds, &cfg).unwrap();
        assert_eq!(low.len(), 3);
        for (i, s) in shells.iter().enumerate() {
            let n = i + 3;
            assert!((s[0] - (n as f64 + 0.5).powi(2)).norm() < 1e-10);
        }
    }
}
