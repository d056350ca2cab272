//! Test functions with analytic derivative oracles and declared norms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A registered test function f: ℝ^d → ℝ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunction {
    /// cos(⟨λ, x⟩ + phase).
    Cos { freq: Vec<f64>, phase: f64 },
    /// ⟨a, x⟩ + b.
    Linear { coef: Vec<f64>, offset: f64 },
    Constant { value: f64 },
    /// |x₁|^p e^{−x₁²}, an even function that is C² but not C³ at 0 when 2 < p < 3.
    HolderPower { p: f64 },
    /// tanh(x₁ / eps), a smooth but steep step.
    Tanh { eps: f64 },
}

impl TestFunction {
    pub fn cos_1d() -> Self {
        TestFunction::Cos { freq: vec![1.0], phase: 0.0 }
    }

    pub fn id(&self) -> String {
        match self {
            TestFunction::Cos { freq, phase } => format!("cos(freq={freq:?},phase={phase})"),
            TestFunction::Linear { coef, offset } => format!("linear(coef={coef:?},offset={offset})"),
            TestFunction::Constant { value } => format!("constant({value})"),
            TestFunction::HolderPower { p } => format!("holder_power(p={p})"),
            TestFunction::Tanh { eps } => format!("tanh(eps={eps})"),
        }
    }

    /// Parses `cos`, `cos:2.0`, `sin`, `linear:1.0`, `constant:3`, `holder:2.1`, `tanh:0.001`.
    pub fn parse(spec: &str, dim: usize) -> Result<Self> {
        let (name, arg) = match spec.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a.trim())),
            None => (spec.trim(), None),
        };
        let num = |default: f64| -> Result<f64> {
            arg.map(|a| a.parse::<f64>().map_err(|e| Error::Parse(format!("'{a}': {e}"))))
                .unwrap_or(Ok(default))
        };
        let along_first = |v: f64| {
            let mut f = vec![0.0; dim];
            f[0] = v;
            f
        };
        Ok(match name {
            "cos" => TestFunction::Cos { freq: along_first(num(1.0)?), phase: 0.0 },
            "sin" => TestFunction::Cos { freq: along_first(num(1.0)?), phase: -std::f64::consts::FRAC_PI_2 },
            "linear" => TestFunction::Linear { coef: along_first(num(1.0)?), offset: 0.0 },
            "constant" => TestFunction::Constant { value: num(1.0)? },
            "holder" => TestFunction::HolderPower { p: num(2.1)? },
            "tanh" => TestFunction::Tanh { eps: num(1e-3)? },
            other => return Err(Error::Parse(format!("unknown test function '{other}'"))),
        })
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            TestFunction::Cos { freq, phase } => (dot(freq, x) + phase).cos(),
            TestFunction::Linear { coef, offset } => dot(coef, x) + offset,
            TestFunction::Constant { value } => *value,
            TestFunction::HolderPower { p } => {
                let a = x[0].abs();
                if a == 0.0 {
                    0.0
                } else {
                    a.powf(*p) * (-a * a).exp()
                }
            }
            TestFunction::Tanh { eps } => (x[0] / eps).tanh(),
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let d = x.len();
        let first = |g: f64| {
            let mut v = vec![0.0; d];
            v[0] = g;
            v
        };
        Some(match self {
            TestFunction::Cos { freq, phase } => {
                let s = -(dot(freq, x) + phase).sin();
                freq.iter().map(|l| l * s).collect()
            }
            TestFunction::Linear { coef, .. } => coef.clone(),
            TestFunction::Constant { .. } => vec![0.0; d],
            TestFunction::HolderPower { .. } => first(self.derivative_1d(x[0], 1)?),
            TestFunction::Tanh { .. } => first(self.derivative_1d(x[0], 1)?),
        })
    }

    fn derivative_1d(&self, t: f64, k: usize) -> Option<f64> {
        match self {
            TestFunction::HolderPower { p } => {
                let a = t.abs();
                let s = t.signum();
                let e = (-a * a).exp();
                match k {
                    0 => Some(self.value(&[t])),
                    1 => {
                        if a == 0.0 {
                            return Some(0.0);
                        }
                        Some((p * a.powf(p - 1.0) - 2.0 * a.powf(p + 1.0)) * s * e)
                    }
                    2 => {
                        if a == 0.0 {
                            return Some(if *p > 2.0 { 0.0 } else { f64::INFINITY });
                        }
                        Some((p * (p - 1.0) * a.powf(p - 2.0) - (2.0 + 4.0 * p) * a.powf(*p) + 4.0 * a.powf(p + 2.0)) * e)
                    }
                    _ => None,
                }
            }
            TestFunction::Tanh { eps } => {
                let u = (t / eps).tanh();
                let s2 = 1.0 - u * u;
                match k {
                    0 => Some(u),
                    1 => Some(s2 / eps),
                    2 => Some(-2.0 * u * s2 / (eps * eps)),
                    3 => Some(s2 * (6.0 * u * u - 2.0) / eps.powi(3)),
                    4 => Some(8.0 * u * s2 * (2.0 - 3.0 * u * u) / eps.powi(4)),
                    _ => None,
                }
            }
            _ => None,
        }
    }

    /// k-th derivative of t ↦ f(x + t v) at t = 0, when an oracle exists.
    pub fn directional(&self, x: &[f64], v: &[f64], k: usize) -> Option<f64> {
        match self {
            TestFunction::Cos { freq, phase } => {
                let lv = dot(freq, v);
                let arg = dot(freq, x) + phase + k as f64 * std::f64::consts::FRAC_PI_2;
                Some(lv.powi(k as i32) * arg.cos())
            }
            TestFunction::Linear { coef, offset } => match k {
                0 => Some(dot(coef, x) + offset),
                1 => Some(dot(coef, v)),
                _ => Some(0.0),
            },
            TestFunction::Constant { value } => Some(if k == 0 { *value } else { 0.0 }),
            TestFunction::HolderPower { .. } | TestFunction::Tanh { .. } => {
                Some(self.derivative_1d(x[0], k)? * v[0].powi(k as i32))
            }
        }
    }

    pub(crate) fn second_directional(&self, x: &[f64], v: &[f64]) -> f64 {
        self.directional(x, v, 2).unwrap_or_else(|| {
            let h = 1e-4;
            let p: Vec<f64> = x.iter().zip(v).map(|(a, b)| a + h * b).collect();
            let m: Vec<f64> = x.iter().zip(v).map(|(a, b)| a - h * b).collect();
            (self.value(&p) - 2.0 * self.value(x) + self.value(&m)) / (h * h)
        })
    }

    /// f(x + rθ) − f(x) − k·r·⟨∇f(x), θ⟩, evaluated without cancellation
    /// for small r.
    pub fn increment(&self, x: &[f64], theta: &[f64], r: f64, k: f64) -> f64 {
        match self {
            TestFunction::Cos { freq, phase } => {
                let a = dot(freq, x) + phase;
                let b = r * dot(freq, theta);
                // cos(a+b) − cos a + k b sin a
                let sh = (0.5 * b).sin();
                let sin_minus = if b.abs() < 1e-2 {
                    let b2 = b * b;
                    -b * b2 / 6.0 * (1.0 - b2 / 20.0 * (1.0 - b2 / 42.0 * (1.0 - b2 / 72.0)))
                } else {
                    b.sin() - b
                };
                // sin(a+b) = sin a cos b + cos a sin b
                -2.0 * sh * sh * a.cos() - a.sin() * sin_minus + (k - 1.0) * b * a.sin()
            }
            TestFunction::Linear { coef, .. } => (1.0 - k) * r * dot(coef, theta),
            TestFunction::Constant { .. } => 0.0,
            _ => {
                // the expansion is only valid on segments that stay clear of the kink at 0
                let scale = match self {
                    TestFunction::Tanh { eps } => *eps,
                    TestFunction::HolderPower { .. } => x[0].abs().min(1.0),
                    _ => 1.0,
                };
                if r < 1e-3 * scale {
                    let d1 = self.directional(x, theta, 1).unwrap_or(0.0);
                    let d2 = self.directional(x, theta, 2).unwrap_or(0.0);
                    let d3 = self.directional(x, theta, 3).filter(|v| v.is_finite()).unwrap_or(0.0);
                    let d4 = self.directional(x, theta, 4).filter(|v| v.is_finite()).unwrap_or(0.0);
                    (1.0 - k) * r * d1 + r * r * (0.5 * d2 + r * (d3 / 6.0 + r * d4 / 24.0))
                } else {
                    let p: Vec<f64> = x.iter().zip(theta).map(|(a, t)| a + r * t).collect();
                    let d1 = if k != 0.0 { self.directional(x, theta, 1).unwrap_or(0.0) } else { 0.0 };
                    self.value(&p) - self.value(x) - k * r * d1
                }
            }
        }
    }

    /// Declared sup norms ‖∇^κ f‖ for κ = 0..4 (None when unbounded or unknown).
    pub fn norms(&self) -> [Option<f64>; 5] {
        match self {
            TestFunction::Cos { freq, .. } => {
                let l = dot(freq, freq).sqrt();
                [Some(1.0), Some(l), Some(l * l), Some(l.powi(3)), Some(l.powi(4))]
            }
            TestFunction::Linear { coef, offset } => {
                let l = dot(coef, coef).sqrt();
                let sup = if l == 0.0 { Some(offset.abs()) } else { None };
                [sup, Some(l), Some(0.0), Some(0.0), Some(0.0)]
            }
            TestFunction::Constant { value } => [Some(value.abs()), Some(0.0), Some(0.0), Some(0.0), Some(0.0)],
            TestFunction::HolderPower { .. } => {
                let mut m = [0.0f64; 3];
                for i in 0..=20_000 {
                    let t = i as f64 * 5e-4;
                    for (k, mk) in m.iter_mut().enumerate() {
                        if let Some(v) = self.derivative_1d(t, k) {
                            *mk = mk.max(v.abs());
                        }
                    }
                }
                [Some(m[0] * 1.001), Some(m[1] * 1.001), Some(m[2] * 1.001), None, None]
            }
            TestFunction::Tanh { eps } => {
                [Some(1.0), Some(1.0 / eps), Some(4.0 / (3.0 * 3f64.sqrt()) / (eps * eps)), Some(2.0 / eps.powi(3)), Some(16.0 / eps.powi(4))]
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
