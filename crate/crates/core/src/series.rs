//! Finite cosine series on (0, pi).

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::kernel::{self, SpectralPoint};

/// `p(x) = sum_l coeffs[l] cos(l x)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CosineSeries {
    pub coeffs: Vec<Complex64>,
}

impl CosineSeries {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        Self { coeffs }
    }

    pub fn zero(len: usize) -> Self {
        Self {
            coeffs: vec![Complex64::default(); len],
        }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(l, c)| c * (l as f64 * x).cos())
            .sum()
    }

    pub fn conj(&self) -> Self {
        Self::new(self.coeffs.iter().map(|c| c.conj()).collect())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.len().max(other.len());
        Self::new(
            (0..n)
                .map(|l| {
                    self.coeffs.get(l).copied().unwrap_or_default()
                        + other.coeffs.get(l).copied().unwrap_or_default()
                })
                .collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// L2(0, pi) norm via Parseval.
    pub fn l2_norm(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(l, c)| if l == 0 { PI } else { 0.5 * PI } * c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `||self - truth|| / ||truth||`, or the absolute distance when `truth` is zero.
    pub fn relative_l2_error(&self, truth: &Self) -> f64 {
        let d = self.sub(truth).l2_norm();
        let t = truth.l2_norm();
        if t > 0.0 {
            d / t
        } else {
            d
        }
    }

    /// `∫_0^pi p(x) phi(x, lambda, h) dx` (bilinear).
    pub fn moment(&self, sp: &SpectralPoint, h: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(l, c)| c * kernel::cos_moment_at(l, sp, h))
            .sum()
    }

    /// [`CosineSeries::moment`] and its lambda-derivative.
    pub fn moment_with_derivative(&self, sp: &SpectralPoint, h: Complex64) -> (Complex64, Complex64) {
        let mut v = Complex64::default();
        let mut d = Complex64::default();
        for (l, c) in self.coeffs.iter().enumerate() {
            if *c == Complex64::default() {
                continue;
            }
            let (ic, is) = kernel::cos_moment_parts(l, sp);
            let (dc, ds) = kernel::cos_moment_parts_dlambda(l, sp);
            v += c * (ic + h * is);
            d += c * (dc + h * ds);
        }
        (v, d)
    }

    /// Taylor coefficients in lambda of [`CosineSeries::moment`] about `sp`.
    pub fn moment_taylor(&self, sp: &SpectralPoint, h: Complex64, order: usize, points: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); order + 1];
        if order == 0 {
            out[0] = self.moment(sp, h);
            return out;
        }
        let t = kernel::contour_taylor(
            |z| self.moment(&SpectralPoint::new(z), h),
            sp.lambda(),
            kernel::taylor_radius(sp.lambda()),
            order,
            points,
        );
        out.copy_from_slice(&t);
        out[0] = self.moment(sp, h);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parseval_norm() {
        let s = CosineSeries::new(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 2.0)]);
        assert!((s.l2_norm() - (PI + 2.0 * PI).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn relative_error_of_identical_series_is_zero() {
        let s = CosineSeries::new(vec![Complex64::new(0.3, -0.1); 4]);
        assert_eq!(s.relative_l2_error(&s), 0.0);
    }

    #[test]
    fn moment_of_constant_at_zero() {
        let s = CosineSeries::new(vec![Complex64::new(2.0, 0.0)]);
        let v = s.moment(&SpectralPoint::new(Complex64::default()), Complex64::default());
        assert!((v.re - 2.0 * PI).abs() < 1e-14);
    }
}
