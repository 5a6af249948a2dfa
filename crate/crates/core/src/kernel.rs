//! Entire functions of the spectral parameter built from the edge solutions
//! `phi(x, lambda) = cos(rho x) + h sin(rho x) / rho`, `rho^2 = lambda`.
//!
//! All exposed quantities are even in `rho`, so the branch of the square
//! root never matters. The removable singularity at `lambda = 0` is handled
//! with Taylor series in `lambda`, and integrals against `cos(l x)` are
//! evaluated in closed form.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature;

/// Highest lambda-derivative order supported by [`phi_dlambda`].
pub const NU_MAX: usize = 4;

/// Taylor branch for `|rho| * pi` below this value.
const SERIES_RHO_PI: f64 = 1e-3;
/// Below this `|lambda|` derivatives are summed from the power series; the
/// downward recurrence divides by `lambda`.
const SERIES_DERIV_LAMBDA: f64 = 1.0;
const SERIES_TERMS: usize = 40;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// A spectral parameter together with the square root used to evaluate it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralPoint {
    lambda: Complex64,
    rho: Complex64,
}

impl SpectralPoint {
    pub fn new(lambda: Complex64) -> Self {
        Self {
            lambda,
            rho: lambda.sqrt(),
        }
    }

    /// Uses `rho` as given; `from_rho(r)` and `from_rho(-r)` describe the
    /// same lambda.
    pub fn from_rho(rho: Complex64) -> Self {
        Self {
            lambda: rho * rho,
            rho,
        }
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    pub fn rho(&self) -> Complex64 {
        self.rho
    }

    fn is_small(&self) -> bool {
        self.rho.norm() * PI < SERIES_RHO_PI
    }

    /// `cos(rho x)`.
    pub fn cos_at(&self, x: f64) -> Complex64 {
        if self.is_small() {
            let t = self.lambda * x * x;
            1.0 - t / 2.0 + t * t / 24.0 - t * t * t / 720.0
        } else {
            (self.rho * x).cos()
        }
    }

    /// `sin(rho x) / rho`, equal to `x` at `lambda = 0`.
    pub fn sinc_at(&self, x: f64) -> Complex64 {
        if self.is_small() {
            let t = self.lambda * x * x;
            x * (1.0 - t / 6.0 + t * t / 120.0 - t * t * t / 5040.0)
        } else {
            (self.rho * x).sin() / self.rho
        }
    }

    pub fn phi(&self, x: f64, h: Complex64) -> Complex64 {
        self.cos_at(x) + h * self.sinc_at(x)
    }

    pub fn phi_x(&self, x: f64, h: Complex64) -> Complex64 {
        -self.lambda * self.sinc_at(x) + h * self.cos_at(x)
    }
}

/// `phi(x, lambda, h) = cos(sqrt(lambda) x) + h sin(sqrt(lambda) x) / sqrt(lambda)`.
pub fn phi(x: f64, lambda: Complex64, h: Complex64) -> Complex64 {
    SpectralPoint::new(lambda).phi(x, h)
}

/// x-derivative of [`phi`].
pub fn phi_x(x: f64, lambda: Complex64, h: Complex64) -> Complex64 {
    SpectralPoint::new(lambda).phi_x(x, h)
}

/// The `order`-th lambda-derivative of [`phi`].
pub fn phi_dlambda(x: f64, lambda: Complex64, h: Complex64, order: usize) -> Result<Complex64> {
    if order > NU_MAX {
        return Err(Error::OrderTooHigh {
            order,
            max: NU_MAX,
        });
    }
    Ok(phi_derivatives(x, &SpectralPoint::new(lambda), h, order)[order])
}

/// Lambda-derivatives of order `0..=order` of `cos(rho x)` and `sin(rho x)/rho`.
pub fn cs_derivatives(x: f64, sp: &SpectralPoint, order: usize) -> (Vec<Complex64>, Vec<Complex64>) {
    let lambda = sp.lambda;
    if lambda.norm() <= SERIES_DERIV_LAMBDA {
        return cs_derivatives_series(x, lambda, order);
    }
    let mut cd = Vec::with_capacity(order + 1);
    let mut sd = Vec::with_capacity(order + 1);
    cd.push(sp.cos_at(x));
    sd.push(sp.sinc_at(x));
    for nu in 0..order {
        let next_c = -0.5 * x * sd[nu];
        let next_s = (x * cd[nu] - (2 * nu + 1) as f64 * sd[nu]) / (2.0 * lambda);
        cd.push(next_c);
        sd.push(next_s);
    }
    (cd, sd)
}

fn cs_derivatives_series(x: f64, lambda: Complex64, order: usize) -> (Vec<Complex64>, Vec<Complex64>) {
    // cos(rho x)      = sum_k (-1)^k lambda^k x^{2k}   / (2k)!
    // sin(rho x)/rho  = sum_k (-1)^k lambda^k x^{2k+1} / (2k+1)!
    let mut a = [0.0f64; SERIES_TERMS];
    let mut b = [0.0f64; SERIES_TERMS];
    let mut term = 1.0;
    for k in 0..SERIES_TERMS {
        if k > 0 {
            term *= -x * x / ((2 * k - 1) as f64 * (2 * k) as f64);
        }
        a[k] = term;
        b[k] = term * x / (2 * k + 1) as f64;
    }
    let mut cd = vec![Complex64::default(); order + 1];
    let mut sd = vec![Complex64::default(); order + 1];
    for nu in 0..=order {
        let mut pow = c(1.0, 0.0);
        for k in nu..SERIES_TERMS {
            let falling: f64 = ((k - nu + 1)..=k).map(|i| i as f64).product();
            cd[nu] += pow * (a[k] * falling);
            sd[nu] += pow * (b[k] * falling);
            pow *= lambda;
        }
    }
    (cd, sd)
}

/// Lambda-derivatives of order `0..=order` of `phi(x, ., h)` at `sp`.
pub fn phi_derivatives(x: f64, sp: &SpectralPoint, h: Complex64, order: usize) -> Vec<Complex64> {
    let (cd, sd) = cs_derivatives(x, sp, order);
    cd.iter().zip(&sd).map(|(c, s)| c + h * s).collect()
}

/// Lambda-derivatives of order `0..=order` of `phi_x(x, ., h)` at `sp`.
pub fn phi_x_derivatives(x: f64, sp: &SpectralPoint, h: Complex64, order: usize) -> Vec<Complex64> {
    let (cd, sd) = cs_derivatives(x, sp, order);
    (0..=order)
        .map(|nu| {
            let mut v = -sp.lambda * sd[nu] + h * cd[nu];
            if nu > 0 {
                v -= nu as f64 * sd[nu - 1];
            }
            v
        })
        .collect()
}

/// Taylor coefficients (derivative / nu!) of `phi(x, ., h)` about `sp`.
pub fn phi_taylor(x: f64, sp: &SpectralPoint, h: Complex64, order: usize) -> Vec<Complex64> {
    to_taylor(phi_derivatives(x, sp, h, order))
}

/// Taylor coefficients of `phi_x(x, ., h)` about `sp`.
pub fn phi_x_taylor(x: f64, sp: &SpectralPoint, h: Complex64, order: usize) -> Vec<Complex64> {
    to_taylor(phi_x_derivatives(x, sp, h, order))
}

fn to_taylor(mut d: Vec<Complex64>) -> Vec<Complex64> {
    let mut fact = 1.0;
    for (nu, v) in d.iter_mut().enumerate() {
        if nu > 0 {
            fact *= nu as f64;
        }
        *v /= fact;
    }
    d
}

/// `sin(pi a) / a`, entire and even.
pub(crate) fn sinc_pi(a: Complex64) -> Complex64 {
    let t = a * PI;
    if t.norm() < 1e-6 {
        PI * (1.0 - t * t / 6.0)
    } else {
        t.sin() / a
    }
}

/// `(1 - cos(pi a)) / a`, entire and odd.
pub(crate) fn vers_pi(a: Complex64) -> Complex64 {
    let t = a * PI;
    if t.norm() < 1e-6 {
        0.5 * PI * t * (1.0 - t * t / 12.0)
    } else {
        let s = (0.5 * t).sin();
        2.0 * s * s / a
    }
}

/// `(∫ cos(l x) cos(rho x) dx, ∫ cos(l x) sin(rho x)/rho dx)` over (0, pi).
pub fn cos_moment_parts(l: usize, sp: &SpectralPoint) -> (Complex64, Complex64) {
    if l == 0 {
        let half = sp.sinc_at(0.5 * PI);
        return (sp.sinc_at(PI), 2.0 * half * half);
    }
    let lf = l as f64;
    let rho = sp.rho;
    if rho.norm() >= 0.5 {
        // Regular at rho = ±l, which covers the confluent case lambda = l^2.
        let ic = 0.5 * (sinc_pi(rho - lf) + sinc_pi(rho + lf));
        let is = (vers_pi(rho + lf) + vers_pi(rho - lf)) / (2.0 * rho);
        (ic, is)
    } else {
        let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
        let d = sp.lambda - lf * lf;
        let ic = sign * sp.lambda * sp.sinc_at(PI) / d;
        let is = (1.0 - sign * sp.cos_at(PI)) / d;
        (ic, is)
    }
}

/// Derivative of [`sinc_pi`].
fn sinc_pi_prime(a: Complex64) -> Complex64 {
    let t = a * PI;
    if t.norm() < 1.0 {
        // sum_{k>=1} (-1)^k 2k pi^{2k+1} a^{2k-1} / (2k+1)!
        let t2 = t * t;
        let mut term = -PI * PI * t / 3.0;
        let mut sum = term;
        for k in 2..25 {
            let kf = k as f64;
            term *= -t2 * kf / ((kf - 1.0) * 2.0 * kf * (2.0 * kf + 1.0));
            sum += term;
        }
        sum
    } else {
        (t * t.cos() - t.sin()) / (a * a)
    }
}

/// Derivative of [`vers_pi`].
fn vers_pi_prime(a: Complex64) -> Complex64 {
    let t = a * PI;
    if t.norm() < 1.0 {
        // sum_{k>=1} (-1)^{k+1} (2k-1) pi^{2k} a^{2k-2} / (2k)!
        let t2 = t * t;
        let mut term = Complex64::new(PI * PI / 2.0, 0.0);
        let mut sum = term;
        for k in 2..25 {
            let kf = k as f64;
            term *= -t2 * (2.0 * kf - 1.0) / ((2.0 * kf - 3.0) * (2.0 * kf - 1.0) * 2.0 * kf);
            sum += term;
        }
        sum
    } else {
        PI * t.sin() / a - vers_pi(a) / a
    }
}

/// Lambda-derivatives of the two parts returned by [`cos_moment_parts`].
pub fn cos_moment_parts_dlambda(l: usize, sp: &SpectralPoint) -> (Complex64, Complex64) {
    if l == 0 {
        let (_, s_pi) = cs_derivatives(PI, sp, 1);
        let (_, s_half) = cs_derivatives(0.5 * PI, sp, 1);
        return (s_pi[1], 4.0 * s_half[0] * s_half[1]);
    }
    let lf = l as f64;
    let rho = sp.rho;
    if rho.norm() >= 0.5 {
        let two_rho = 2.0 * rho;
        let ic = 0.5 * (sinc_pi_prime(rho - lf) + sinc_pi_prime(rho + lf)) / two_rho;
        let is0 = (vers_pi(rho + lf) + vers_pi(rho - lf)) / two_rho;
        let is = ((vers_pi_prime(rho + lf) + vers_pi_prime(rho - lf)) / two_rho - is0 / rho) / two_rho;
        (ic, is)
    } else {
        let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
        let lam = sp.lambda;
        let d = lam - lf * lf;
        let (cd, sd) = cs_derivatives(PI, sp, 1);
        let ic = sign * ((sd[0] + lam * sd[1]) * d - lam * sd[0]) / (d * d);
        let is = (-sign * cd[1] * d - (1.0 - sign * cd[0])) / (d * d);
        (ic, is)
    }
}

/// `∫_0^pi cos(l x) phi(x, lambda, h) dx` in closed form.
pub fn cos_moment(l: usize, lambda: Complex64, h: Complex64) -> Complex64 {
    cos_moment_at(l, &SpectralPoint::new(lambda), h)
}

pub fn cos_moment_at(l: usize, sp: &SpectralPoint, h: Complex64) -> Complex64 {
    let (ic, is) = cos_moment_parts(l, sp);
    ic + h * is
}

/// `(pi - sin(pi z)/z) / z^2`.
fn e_fn(z: Complex64) -> Complex64 {
    let t = z * PI;
    if t.norm() < 1.0 {
        // sum_{k>=1} (-1)^{k+1} pi^{2k+1} z^{2k-2} / (2k+1)!
        let t2 = t * t;
        let mut term = c(PI * PI * PI / 6.0, 0.0);
        let mut sum = term;
        for k in 2..30 {
            term *= -t2 / ((2 * k) as f64 * (2 * k + 1) as f64);
            sum += term;
            if term.norm() < 1e-18 * sum.norm() {
                break;
            }
        }
        sum
    } else {
        (PI - t.sin() / z) / (z * z)
    }
}

/// `∫_0^pi phi(x, lambda, h)^2 dx` (bilinear, no conjugation).
pub fn phi_self_inner(lambda: Complex64, h: Complex64) -> Complex64 {
    let sp = SpectralPoint::new(lambda);
    let s = sp.sinc_at(PI);
    0.5 * (PI + 0.5 * sp.sinc_at(2.0 * PI)) + h * s * s + 2.0 * h * h * e_fn(2.0 * sp.rho)
}

/// `∫_0^pi phi(x, lambda_a, h_a) phi(x, lambda_b, h_b) dx` (bilinear).
pub fn phi_cross_inner(lambda_a: Complex64, h_a: Complex64, lambda_b: Complex64, h_b: Complex64) -> Complex64 {
    let a = lambda_a.sqrt();
    let b = lambda_b.sqrt();
    if a.norm() >= 0.5 && b.norm() >= 0.5 {
        let cc = 0.5 * (sinc_pi(a - b) + sinc_pi(a + b));
        let cs = (vers_pi(b + a) + vers_pi(b - a)) / (2.0 * b);
        let sc = (vers_pi(a + b) + vers_pi(a - b)) / (2.0 * a);
        let ss = (sinc_pi(a - b) - sinc_pi(a + b)) / (2.0 * a * b);
        cc + h_b * cs + h_a * sc + h_a * h_b * ss
    } else {
        let pa = SpectralPoint::from_rho(a);
        let pb = SpectralPoint::from_rho(b);
        let panel = 2.0 / (1.0 + a.norm() + b.norm());
        quadrature::integrate(|x| pa.phi(x, h_a) * pb.phi(x, h_b), 0.0, PI, panel)
    }
}

/// A radius for Cauchy circles matched to the lambda-scale of the kernel
/// functions near `lambda`.
pub fn taylor_radius(lambda: Complex64) -> f64 {
    0.25 * lambda.sqrt().norm().max(1.0)
}

/// Taylor coefficients `f^(k)(center)/k!`, `k = 0..=order`, by the
/// trapezoidal rule on a circle.
pub fn contour_taylor<F: Fn(Complex64) -> Complex64>(
    f: F,
    center: Complex64,
    radius: f64,
    order: usize,
    points: usize,
) -> Vec<Complex64> {
    let samples: Vec<(Complex64, Complex64)> = (0..points)
        .map(|j| {
            let w = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / points as f64);
            (w, f(center + radius * w))
        })
        .collect();
    (0..=order)
        .map(|k| {
            let sum: Complex64 = samples
                .iter()
                .map(|(w, v)| v * w.conj().powu(k as u32))
                .sum();
            sum / (points as f64 * radius.powi(k as i32))
        })
        .collect()
}

/// Taylor coefficients of `lambda -> cos_moment(l, lambda, h)`.
pub fn cos_moment_taylor(l: usize, sp: &SpectralPoint, h: Complex64, order: usize, points: usize) -> Vec<Complex64> {
    let mut t = if order == 0 {
        vec![Complex64::default()]
    } else {
        contour_taylor(
            |z| cos_moment(l, z, h),
            sp.lambda,
            taylor_radius(sp.lambda),
            order,
            points,
        )
    };
    t[0] = cos_moment_at(l, sp, h);
    t
}
