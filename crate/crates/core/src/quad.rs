//! Quadrature primitives: Gauss–Legendre rules, adaptive Gauss–Kronrod
//! (7/15 points), half-line mappings and oscillatory power tails.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Values that can be integrated: reals and complex numbers.
pub trait QValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(self) -> f64;
}

impl QValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl QValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

/// Gauss–Legendre rule on [-1, 1].
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        if n == 1 {
            return GaussLegendre { nodes: vec![0.0], weights: vec![2.0] };
        }
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn integrate<V: QValue>(&self, f: impl Fn(f64) -> V, a: f64, b: f64) -> V {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut acc = V::zero();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + f(c + h * x) * (w * h);
        }
        acc
    }

    /// Composite rule over `panels` equal sub-intervals of [a, b].
    pub fn composite<V: QValue>(&self, f: impl Fn(f64) -> V, a: f64, b: f64, panels: usize) -> V {
        let h = (b - a) / panels as f64;
        let mut acc = V::zero();
        for k in 0..panels {
            let lo = a + k as f64 * h;
            acc = acc + self.integrate(&f, lo, lo + h);
        }
        acc
    }
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
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<V: QValue>(f: &impl Fn(f64) -> V, a: f64, b: f64) -> (V, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron = kron + s * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + s * WG[j / 2];
        }
    }
    let kron = kron * h;
    let gauss = gauss * h;
    (kron, (kron - gauss).magnitude())
}

/// Tolerances for [`adaptive`].
#[derive(Clone, Copy, Debug)]
pub struct Tol {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tol {
    fn default() -> Self {
        Tol { abs: 1e-14, rel: 1e-12, max_intervals: 4000 }
    }
}

impl Tol {
    pub fn new(abs: f64, rel: f64) -> Self {
        Tol { abs, rel, ..Default::default() }
    }
}

/// Globally adaptive Gauss–Kronrod integration over [a, b].
/// Returns the estimate and its error bound.
pub fn adaptive<V: QValue>(f: impl Fn(f64) -> V, a: f64, b: f64, tol: Tol) -> Result<(V, f64)> {
    let (v, e, ok) = adaptive_best(f, a, b, tol);
    if ok {
        Ok((v, e))
    } else {
        Err(Error::Numeric { what: "adaptive quadrature".into(), achieved: e })
    }
}

/// Like [`adaptive`] but always returns the best estimate, its error bound,
/// and whether the tolerance was met.
pub fn adaptive_best<V: QValue>(f: impl Fn(f64) -> V, a: f64, b: f64, tol: Tol) -> (V, f64, bool) {
    if a == b {
        return (V::zero(), 0.0, true);
    }
    let (v0, e0) = gk15(&f, a, b);
    let mut segs: Vec<(f64, f64, V, f64)> = vec![(a, b, v0, e0)];
    let mut total = v0;
    let mut err = e0;
    loop {
        if err <= tol.abs.max(tol.rel * total.magnitude()) {
            return (total, err, true);
        }
        if segs.len() >= tol.max_intervals {
            // Recompute sums to avoid drift before judging.
            let t = segs.iter().fold(V::zero(), |acc, s| acc + s.2);
            let e: f64 = segs.iter().map(|s| s.3).sum();
            return (t, e, e <= 10.0 * tol.abs.max(tol.rel * t.magnitude()));
        }
        let (imax, _) = segs
            .iter()
            .enumerate()
            .fold((0, -1.0), |best, (i, s)| if s.3 > best.1 { (i, s.3) } else { best });
        let (lo, hi, v, e) = segs.swap_remove(imax);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            segs.push((lo, hi, v, e));
            let t = segs.iter().fold(V::zero(), |acc, s| acc + s.2);
            return (t, err, false);
        }
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        total = total - v + v1 + v2;
        err = err - e + e1 + e2;
        segs.push((lo, mid, v1, e1));
        segs.push((mid, hi, v2, e2));
    }
}

/// Adaptive integration over [a, ∞) with the map x = a + t/(1-t).
pub fn adaptive_half_line<V: QValue>(f: impl Fn(f64) -> V, a: f64, tol: Tol) -> Result<(V, f64)> {
    adaptive(
        |t| {
            let s = 1.0 - t;
            f(a + t / s) * (1.0 / (s * s))
        },
        0.0,
        1.0,
        tol,
    )
}

/// Adaptive integration over a piecewise interval with interior breakpoints.
pub fn adaptive_pieces<V: QValue>(f: impl Fn(f64) -> V, pts: &[f64], tol: Tol) -> Result<(V, f64)> {
    let mut acc = V::zero();
    let mut err = 0.0;
    for w in pts.windows(2) {
        let (v, e) = adaptive(&f, w[0], w[1], tol)?;
        acc = acc + v;
        err += e;
    }
    Ok((acc, err))
}

/// ∫_s^∞ e^{iωy} y^{-p} dy for s > 0, p > 0, ω ≠ 0.
///
/// The contour is rotated onto y = s + it/ω, which turns the oscillatory
/// tail into an exponentially damped integral.
pub fn osc_power_tail(p: f64, omega: f64, s: f64) -> Result<Complex64> {
    if omega < 0.0 {
        return osc_power_tail(p, -omega, s).map(|z| z.conj());
    }
    if !(s > 0.0 && p > 0.0 && omega > 0.0) {
        return Err(Error::Domain(format!("osc_power_tail needs s, p, ω > 0 (s={s}, p={p}, ω={omega})")));
    }
    let g = |t: f64| {
        let z = Complex64::new(s, t / omega);
        (-p * z.ln()).exp() * (-t).exp()
    };
    let (v, _) = adaptive(g, 0.0, 60.0, Tol::new(1e-16 * s.powf(-p), 1e-13))?;
    Ok(Complex64::new(0.0, 1.0 / omega) * Complex64::from_polar(1.0, omega * s) * v)
}

/// Neumaier compensated sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}
