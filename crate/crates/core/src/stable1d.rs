//! Distribution function, density and quantile of one-dimensional strictly
//! stable laws with exponent −c|t|^α(1 − iβ tan(πα/2) sgn t).
//!
//! Values come from the one-dimensional integral representation over
//! θ ∈ (−θ₀, π/2); quantiles use a cubic Hermite table in z = asinh(y)
//! refined by bisection on the exact function outside the table.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use statrs::function::gamma::gamma;

use crate::error::{domain, Result};
use crate::quad::{adaptive_best, Tol};
use crate::spectral::StableLaw;

const Z_MAX: f64 = 14.508_658_238_524_095; // asinh(1e6)
const CELLS: usize = 4096;

/// Standardized law (c = 1) with index α ≠ 1 and skewness β.
#[derive(Clone, Copy, Debug)]
struct Standard {
    alpha: f64,
    beta: f64,
}

impl Standard {
    fn theta0(&self) -> f64 {
        (self.beta * (FRAC_PI_2 * self.alpha).tan()).atan() / self.alpha
    }

    fn flipped(&self) -> Standard {
        Standard { alpha: self.alpha, beta: -self.beta }
    }

    /// ln g(θ) with g = y^{α/(α−1)}V(θ).
    fn log_g(&self, ln_y: f64, t0: f64, th: f64) -> f64 {
        let a = self.alpha;
        let e = a / (a - 1.0);
        let s = (a * (t0 + th)).sin().max(1e-300);
        let c = th.cos().max(1e-300);
        let k = (a * t0 + (a - 1.0) * th).cos().max(1e-300);
        e * ln_y + (a * t0).cos().ln() / (a - 1.0) + e * (c.ln() - s.ln()) + k.ln() - c.ln()
    }

    /// Breakpoints where g crosses 10^k for k = −4..=3, so each panel holds
    /// one regime of the integrands e^{−g} and g·e^{−g}.
    fn breakpoints(&self, ln_y: f64, t0: f64) -> Vec<f64> {
        let (a, b) = (-t0, FRAC_PI_2);
        // g decreases in θ for α > 1 and increases for α < 1
        let decreasing = self.alpha > 1.0;
        let mut pts = vec![a];
        for k in -4..=3 {
            let target = k as f64 * std::f64::consts::LN_10;
            let (mut lo, mut hi) = (a, b);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                let above = self.log_g(ln_y, t0, mid) > target;
                if above == decreasing {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let m = 0.5 * (lo + hi);
            if m > a && m < b {
                pts.push(m);
            }
        }
        pts.push(b);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// (F(y), 1 − F(y), p(y)) for y > 0.
    fn positive(&self, y: f64) -> (f64, f64, f64) {
        let a = self.alpha;
        let t0 = self.theta0();
        let ln_y = y.ln();
        let pts = self.breakpoints(ln_y, t0);
        // panels are resolved to near machine precision; a missed tolerance at
        // that level only reflects rounding in g, so the best estimate is kept
        let tol = Tol { abs: 1e-300, rel: 1e-11, max_intervals: 60 };
        let quad = |f: &dyn Fn(f64) -> f64| pts.windows(2).map(|w| adaptive_best(f, w[0], w[1], tol).0).sum::<f64>();
        let pdf_int = quad(&|th| {
            let lg = self.log_g(ln_y, t0, th);
            (lg - lg.exp()).exp()
        });
        let pdf = a / (PI * (a - 1.0).abs() * y) * pdf_int;
        if a > 1.0 {
            let upper = quad(&|th| (-self.log_g(ln_y, t0, th).exp()).exp()) / PI;
            (1.0 - upper, upper, pdf)
        } else {
            // 1 − F = (1/π)∫(1 − e^{−g}) avoids cancellation in the right tail
            let upper = -quad(&|th| (-self.log_g(ln_y, t0, th).exp()).exp_m1()) / PI;
            (1.0 - upper, upper, pdf)
        }
    }

    fn at_zero(&self) -> (f64, f64) {
        let t0 = self.theta0();
        let a = self.alpha;
        let f0 = (FRAC_PI_2 - t0) / PI;
        let p0 = gamma(1.0 + 1.0 / a) * t0.cos() * (a * t0).cos().powf(1.0 / a) / PI;
        (f0, p0)
    }

    /// (F(y), 1 − F(y), p(y)).
    fn eval(&self, y: f64) -> (f64, f64, f64) {
        if y > 0.0 {
            self.positive(y)
        } else if y < 0.0 {
            let (f, u, p) = self.flipped().positive(-y);
            (u, f, p)
        } else {
            let (f0, p0) = self.at_zero();
            (f0, 1.0 - f0, p0)
        }
    }
}

/// Tail mass T(z) = P(±Y ≥ sinh z) with dT/dz on a uniform z grid.
#[derive(Clone, Debug)]
struct TailTable {
    h: f64,
    mass: Vec<f64>,
    slope: Vec<f64>,
}

impl TailTable {
    fn build(law: Standard, sign: f64) -> Self {
        let h = Z_MAX / CELLS as f64;
        let rows: Vec<(f64, f64)> = (0..=CELLS)
            .into_par_iter()
            .map(|k| {
                let z = k as f64 * h;
                let (f, u, p) = law.eval(sign * z.sinh());
                let mass = if sign > 0.0 { u } else { f };
                (mass, -p * z.cosh())
            })
            .collect();
        TailTable { h, mass: rows.iter().map(|r| r.0).collect(), slope: rows.iter().map(|r| r.1).collect() }
    }

    /// z with T(z) = v, or None when v lies below the tabulated range.
    fn solve(&self, v: f64) -> Option<f64> {
        let last = *self.mass.last().expect("table");
        if v < last {
            return None;
        }
        // mass is non-increasing; find k with mass[k] ≥ v > mass[k+1]
        let k = self.mass.partition_point(|m| *m >= v).saturating_sub(1).min(CELLS - 1);
        let (m0, m1) = (self.mass[k], self.mass[k + 1]);
        let (g0, g1) = (self.slope[k] * self.h, self.slope[k + 1] * self.h);
        // Hermite data on ln T where both ends are positive, else on T
        let (t0, t1, d0, d1, target) = if m1 > 0.0 {
            (m0.ln(), m1.ln(), g0 / m0, g1 / m1, v.ln())
        } else {
            (m0, m1, g0, g1, v)
        };
        let herm = |s: f64| {
            let s2 = s * s;
            let s3 = s2 * s;
            (2.0 * s3 - 3.0 * s2 + 1.0) * t0 + (s3 - 2.0 * s2 + s) * d0 + (-2.0 * s3 + 3.0 * s2) * t1 + (s3 - s2) * d1
        };
        let (mut lo, mut hi) = (0.0, 1.0);
        let mut s = if t0 > t1 { ((t0 - target) / (t0 - t1)).clamp(0.0, 1.0) } else { 0.5 };
        for _ in 0..60 {
            let r = herm(s) - target;
            if r.abs() <= 1e-15 * target.abs().max(1e-300) {
                break;
            }
            if r > 0.0 {
                lo = s;
            } else {
                hi = s;
            }
            let s2 = s * s;
            let dh = (6.0 * s2 - 6.0 * s) * t0 + (3.0 * s2 - 4.0 * s + 1.0) * d0 + (-6.0 * s2 + 6.0 * s) * t1 + (3.0 * s2 - 2.0 * s) * d1;
            let next = s - r / dh;
            s = if dh < 0.0 && next > lo && next < hi { next } else { 0.5 * (lo + hi) };
            if hi - lo < 1e-15 {
                break;
            }
        }
        Some((k as f64 + s) * self.h)
    }
}

#[derive(Clone, Debug)]
enum Repr {
    Cauchy,
    Table { law: Standard, left: TailTable, right: TailTable, f0: f64 },
}

/// Distribution of a one-dimensional strictly stable law.
#[derive(Clone, Debug)]
pub struct StableCdf {
    pub alpha: f64,
    pub beta: f64,
    /// Y = scale · Z with Z standardized (c = 1).
    pub scale: f64,
    repr: Repr,
}

impl StableCdf {
    pub fn new(law: &StableLaw) -> Result<Self> {
        let (wp, wm) = match law.skew_weights() {
            Some(w) if law.dim() == 1 => w,
            _ => return domain("stable distribution function needs a one-dimensional law"),
        };
        Self::from_params(law.alpha(), wp, wm)
    }

    /// Law with spectral weights w₊ on +1 and w₋ on −1.
    pub fn from_params(alpha: f64, w_plus: f64, w_minus: f64) -> Result<Self> {
        let c = w_plus + w_minus;
        if !(alpha > 0.0 && alpha < 2.0) || !(c > 0.0) || w_plus < 0.0 || w_minus < 0.0 {
            return domain(format!("invalid stable parameters α={alpha}, w₊={w_plus}, w₋={w_minus}"));
        }
        let beta = (w_plus - w_minus) / c;
        let scale = c.powf(1.0 / alpha);
        if alpha == 1.0 {
            if beta != 0.0 {
                return domain("α = 1 distribution function is only available for symmetric laws");
            }
            return Ok(StableCdf { alpha, beta, scale, repr: Repr::Cauchy });
        }
        let law = Standard { alpha, beta };
        let (f0, _) = law.at_zero();
        let left = TailTable::build(law, -1.0);
        let right = TailTable::build(law, 1.0);
        Ok(StableCdf { alpha, beta, scale, repr: Repr::Table { law, left, right, f0 } })
    }

    /// (F(y), 1 − F(y), p(y)) evaluated directly.
    pub fn eval(&self, y: f64) -> (f64, f64, f64) {
        let z = y / self.scale;
        match &self.repr {
            Repr::Cauchy => {
                let a = z.atan() / PI;
                // tails via atan(1/z) keep relative accuracy
                let (f, u) = if z > 1.0 {
                    (1.0 - (1.0 / z).atan() / PI, (1.0 / z).atan() / PI)
                } else if z < -1.0 {
                    ((-1.0 / z).atan() / PI, 1.0 - (-1.0 / z).atan() / PI)
                } else {
                    (0.5 + a, 0.5 - a)
                };
                (f, u, 1.0 / (PI * (1.0 + z * z)) / self.scale)
            }
            Repr::Table { law, .. } => {
                let (f, u, p) = law.eval(z);
                (f, u, p / self.scale)
            }
        }
    }

    pub fn cdf(&self, y: f64) -> f64 {
        self.eval(y).0
    }

    pub fn density(&self, y: f64) -> f64 {
        self.eval(y).2
    }

    /// Quantile at u ∈ (0, 1); `upper = 1 − u` may be passed for accuracy in the right tail.
    pub fn quantile_split(&self, u: f64, upper: f64) -> f64 {
        match &self.repr {
            Repr::Cauchy => {
                let z = if u < 0.5 { -1.0 / (PI * u).tan() } else { 1.0 / (PI * upper).tan() };
                self.scale * z
            }
            Repr::Table { law, left, right, f0 } => {
                let (table, v, sign) = if u < *f0 { (left, u, -1.0) } else { (right, upper, 1.0) };
                let z = table.solve(v).unwrap_or_else(|| {
                    // bisection in z on the exact tail beyond the table
                    let mass = |z: f64| {
                        let (f, up, _) = law.eval(sign * f64::sinh(z));
                        if sign > 0.0 {
                            up
                        } else {
                            f
                        }
                    };
                    let (mut lo, mut hi) = (Z_MAX, Z_MAX + 1.0);
                    while mass(hi) > v && hi < 700.0 {
                        lo = hi;
                        hi *= 2.0;
                    }
                    for _ in 0..60 {
                        let mid = 0.5 * (lo + hi);
                        if mass(mid) > v {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    0.5 * (lo + hi)
                });
                self.scale * sign * z.sinh()
            }
        }
    }

    pub fn quantile(&self, u: f64) -> f64 {
        self.quantile_split(u, 1.0 - u)
    }
}
