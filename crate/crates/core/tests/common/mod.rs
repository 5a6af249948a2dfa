//! Independent numerical oracles shared by the integration tests.
#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use star_spectral::asymptotics::{classify_h, HClass};
use star_spectral::inverse_riesz::RootChain;
use star_spectral::CosineSeries;

pub fn cx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for i in 0..7 {
        let v = f(c - h * XGK[i]) + f(c + h * XGK[i]);
        k += v * WGK[i];
        if i % 2 == 1 {
            g += v * WG[i / 2];
        }
    }
    (k * h, ((k - g) * h).norm())
}

/// Globally adaptive Gauss-Kronrod (7, 15) quadrature: the interval with
/// the largest error estimate is bisected until the total estimate drops
/// below `rel * (1 + |I|)`.
pub fn adaptive<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, rel: f64) -> Complex64 {
    let mut parts = vec![(a, b, gk15(&f, a, b))];
    for _ in 0..4000 {
        let total: Complex64 = parts.iter().map(|p| p.2 .0).sum();
        let err: f64 = parts.iter().map(|p| p.2 .1).sum();
        if err <= rel * (1.0 + total.norm()) {
            break;
        }
        let (i, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2 .1.total_cmp(&y.1 .2 .1))
            .unwrap();
        let (lo, hi, _) = parts.swap_remove(i);
        let mid = 0.5 * (lo + hi);
        parts.push((lo, mid, gk15(&f, lo, mid)));
        parts.push((mid, hi, gk15(&f, mid, hi)));
    }
    parts.iter().map(|p| p.2 .0).sum()
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn central(f: &dyn Fn(Complex64) -> Complex64, z: Complex64, order: usize, h: f64) -> Complex64 {
    if order == 0 {
        return f(z);
    }
    let mut s = Complex64::default();
    for i in 0..=order {
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        let off = (order as f64 / 2.0 - i as f64) * h;
        s += sign * binomial(order, i) * f(z + off);
    }
    s / h.powi(order as i32)
}

/// `order`-th derivative along the real direction by central differences
/// with Richardson extrapolation over four halvings of `h`.
pub fn richardson(f: &dyn Fn(Complex64) -> Complex64, z: Complex64, order: usize, h: f64) -> Complex64 {
    let levels = 4;
    let mut table: Vec<Complex64> = (0..levels)
        .map(|i| central(f, z, order, h / 2f64.powi(i as i32)))
        .collect();
    for j in 1..levels {
        let factor = 4f64.powi(j as i32);
        for i in (j..levels).rev() {
            table[i] = (factor * table[i] - table[i - 1]) / (factor - 1.0);
        }
    }
    table[levels - 1]
}

/// Root of a sign-changing real function on `[a, b]`.
pub fn bisection<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    assert!(fa * f(b) <= 0.0, "no sign change on [{a}, {b}]");
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 || (b - a) < 1e-15 * (1.0 + m.abs()) {
            return m;
        }
        if fa * fm < 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    0.5 * (a + b)
}

/// Cosine series with `modes` coefficients drawn from the unit disk.
pub fn random_series(rng: &mut ChaCha8Rng, modes: usize, radius: f64) -> CosineSeries {
    CosineSeries::new(
        (0..modes)
            .map(|_| {
                let r = radius * rng.gen::<f64>().sqrt();
                let t = rng.gen_range(0.0..std::f64::consts::TAU);
                Complex64::from_polar(r, t)
            })
            .collect(),
    )
}

/// Distinct Robin coefficients of a pairwise admissible configuration.
pub fn random_star_h(rng: &mut ChaCha8Rng, m: usize, complex: bool) -> Vec<Complex64> {
    loop {
        let h: Vec<Complex64> = (0..m)
            .map(|j| {
                let im = if complex { rng.gen_range(-0.5..0.5) } else { 0.0 };
                cx(j as f64 * 1.1 + rng.gen_range(-0.3..0.3), im)
            })
            .collect();
        if classify_h(&h).map(|c| c.class == HClass::Star).unwrap_or(false) {
            return h;
        }
    }
}

/// `max_j |y''_j + lambda y_j + y^<nu-1>_j|` by fourth-order differences,
/// with the scale of the local oscillation amplitude.
pub fn chain_residual(c: &RootChain, nu: usize, x: f64) -> (f64, f64) {
    let rho = c.lambda.sqrt().norm().max(1.0);
    let s = 0.02 / rho;
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for j in 0..c.h.len() {
        let f = |t: f64| c.eval(nu, j, t);
        let d2 = (-f(x + 2.0 * s) + 16.0 * f(x + s) - 30.0 * f(x) + 16.0 * f(x - s) - f(x - 2.0 * s)) / (12.0 * s * s);
        let prev = if nu == 0 { Complex64::default() } else { c.eval(nu - 1, j, x) };
        worst = worst.max((d2 + c.lambda * f(x) + prev).norm());
        let amp = (f(x).norm_sqr() + (c.eval_x(nu, j, x) / rho).norm_sqr()).sqrt();
        scale = scale.max(1.0 + c.lambda.norm() * amp + prev.norm());
    }
    (worst, scale)
}
