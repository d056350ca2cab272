//! Monte Carlo realizations of the operators
//! P_m f(x) = E f(x + n^{−1/α}Σᵢ₌₁^m Yᵢ) and
//! Q_m f(x) = E f(x + (n^{1/α}σ)⁻¹Σᵢ₌₁^m (Xᵢ − ω_{n,α})),
//! the one-step gap (Q₁ − P₁)f, its bound D(n, α, γ, f), and probes of the
//! gradient-decay and generator-error estimates.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::quad::KahanSum;
use crate::rate::{fit_loglog, RateFit};
use crate::rng::{mc_mean, RngStream, SHARD};
use crate::sampling::{ModelSampler, Sampler, StableSampler};
use crate::spectral::{generator_apply, QuadConfig, StableLaw};
use crate::stable1d::StableCdf;
use crate::tail::TailModel;
use crate::testfn::TestFunction;

/// Global normalization n, the model, its limit law and the Monte Carlo budget.
#[derive(Clone, Debug)]
pub struct OperatorConfig {
    pub n: u64,
    pub model: TailModel,
    pub law: StableLaw,
    pub mc_samples: usize,
    pub seed: u64,
}

impl OperatorConfig {
    /// The law is the model's stable limit, so both share α and ν.
    pub fn new(model: &TailModel, n: u64, mc_samples: usize, seed: u64) -> Result<Self> {
        if n == 0 {
            return domain("n must be at least 1");
        }
        if mc_samples < 1000 {
            return domain(format!("mc_samples must be at least 10³, got {mc_samples}"));
        }
        Ok(OperatorConfig { n, model: model.clone(), law: model.limit_law()?, mc_samples, seed })
    }

    pub fn with_n(&self, n: u64) -> Result<Self> {
        Self::new(&self.model, n, self.mc_samples, self.seed)
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    fn stream(&self, label: &str) -> RngStream {
        RngStream::new(self.seed, self.n).derive(label)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_err: f64,
}

/// One factor of an operator product.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Op {
    P(u64),
    Q(u64),
}

struct Increments {
    stable: StableSampler,
    model: ModelSampler,
    n: f64,
    alpha: f64,
    q_scale: f64,
    omega: Vec<f64>,
    /// ∫θν(dθ), for the α = 1 shift of a sum of m stable variables.
    nu_mean: Vec<f64>,
}

impl Increments {
    fn new(cfg: &OperatorConfig) -> Result<Self> {
        let alpha = cfg.model.alpha();
        let n = cfg.n as f64;
        Ok(Increments {
            stable: StableSampler::new(&cfg.law)?,
            model: ModelSampler::new(&cfg.model),
            n,
            alpha,
            q_scale: 1.0 / (n.powf(1.0 / alpha) * cfg.model.sigma_scale()?),
            omega: cfg.model.omega_shift(cfg.n)?,
            nu_mean: cfg.law.nu().mean_direction(),
        })
    }

    /// n^{−1/α}ΣY has the law of (m/n)^{1/α}Y, plus (2/π)(m/n)ln m·∫θν when α = 1.
    fn add_p(&self, m: u64, rng: &mut ChaCha8Rng, acc: &mut [f64], tmp: &mut [f64]) {
        let r = m as f64 / self.n;
        self.stable.draw(rng, tmp);
        let s = r.powf(1.0 / self.alpha);
        let shift = if self.alpha == 1.0 { 2.0 / PI * r * (m as f64).ln() } else { 0.0 };
        for ((a, y), mu) in acc.iter_mut().zip(tmp.iter()).zip(&self.nu_mean) {
            *a += s * y + shift * mu;
        }
    }

    fn add_q(&self, m: u64, rng: &mut ChaCha8Rng, acc: &mut [f64], tmp: &mut [f64]) {
        let d = acc.len();
        let mut sums = vec![KahanSum::new(); d];
        for _ in 0..m {
            self.model.draw(rng, tmp);
            for ((s, x), w) in sums.iter_mut().zip(tmp.iter()).zip(&self.omega) {
                s.add(x - w);
            }
        }
        for (a, s) in acc.iter_mut().zip(&sums) {
            *a += s.value() * self.q_scale;
        }
    }

    fn add(&self, op: Op, rng: &mut ChaCha8Rng, acc: &mut [f64], tmp: &mut [f64]) {
        match op {
            Op::P(m) => self.add_p(m, rng, acc, tmp),
            Op::Q(m) => self.add_q(m, rng, acc, tmp),
        }
    }
}

fn check_point(cfg: &OperatorConfig, x: &[f64]) -> Result<()> {
    if x.len() != cfg.dim() {
        return domain(format!("point has dimension {}, model has {}", x.len(), cfg.dim()));
    }
    Ok(())
}

/// Estimate of (O₁ ⋯ O_k f)(x) for a product of P and Q factors.
pub fn apply_ops(cfg: &OperatorConfig, f: &TestFunction, ops: &[Op], x: &[f64]) -> Result<Estimate> {
    check_point(cfg, x)?;
    for op in ops {
        let (Op::P(m) | Op::Q(m)) = *op;
        if m == 0 || m > cfg.n {
            return domain(format!("operator index m = {m} must lie in 1..={}", cfg.n));
        }
    }
    if let TestFunction::Constant { value } = f {
        return Ok(Estimate { value: *value, std_err: 0.0 });
    }
    let inc = Increments::new(cfg)?;
    let d = cfg.dim();
    let m = mc_mean(cfg.stream(&format!("ops:{ops:?}")), cfg.mc_samples, |rng| {
        let mut acc = x.to_vec();
        let mut tmp = vec![0.0; d];
        for op in ops {
            inc.add(*op, rng, &mut acc, &mut tmp);
        }
        f.value(&acc)
    });
    Ok(Estimate { value: m.mean(), std_err: m.std_err() })
}

pub fn apply_p(cfg: &OperatorConfig, f: &TestFunction, m: u64, x: &[f64]) -> Result<Estimate> {
    apply_ops(cfg, f, &[Op::P(m)], x)
}

pub fn apply_q(cfg: &OperatorConfig, f: &TestFunction, m: u64, x: &[f64]) -> Result<Estimate> {
    apply_ops(cfg, f, &[Op::Q(m)], x)
}

/// Mean of g over N jittered strata u ∈ ((j + v)/N), with the standard error
/// from differences within adjacent stratum pairs. `g` receives (u, 1 − u).
pub fn stratified_mean<G>(stream: RngStream, strata: usize, g: G) -> Estimate
where
    G: Fn(f64, f64) -> f64 + Sync,
{
    let total = strata + strata % 2;
    let nf = total as f64;
    let shards = total.div_ceil(SHARD);
    let parts: Vec<(KahanSum, KahanSum)> = (0..shards)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream.shard(k as u64).rng();
            let (start, end) = (k * SHARD, ((k + 1) * SHARD).min(total));
            let mut sum = KahanSum::new();
            let mut pairs = KahanSum::new();
            let mut prev = 0.0;
            for j in start..end {
                let v: f64 = rng.random();
                let u = (j as f64 + v) / nf;
                let upper = ((total - j) as f64 - v) / nf;
                let y = g(u.max(f64::MIN_POSITIVE), upper.max(f64::MIN_POSITIVE));
                sum.add(y);
                if (j - start) % 2 == 1 {
                    pairs.add((y - prev) * (y - prev));
                }
                prev = y;
            }
            (sum, pairs)
        })
        .collect();
    let (mut s, mut p) = (KahanSum::new(), KahanSum::new());
    for (a, b) in &parts {
        s.add(a.value());
        p.add(b.value());
    }
    Estimate { value: s.value() / nf, std_err: p.value().sqrt() / nf }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Coupling {
    /// X and Y driven by one uniform through both inverse distribution functions.
    Quantile,
    Independent,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapEstimate {
    pub value: f64,
    pub std_err: f64,
    pub n: u64,
    pub m: u64,
    pub f_id: String,
    pub coupling: Coupling,
    /// Set when the standard error exceeds |value|.
    pub inconclusive: bool,
}

/// Distribution function of the limit law when quantile coupling is available.
pub fn coupling_cdf(cfg: &OperatorConfig) -> Option<StableCdf> {
    if cfg.dim() != 1 {
        return None;
    }
    StableCdf::new(&cfg.law).ok()
}

/// Paired estimate of Q₁f(x) − P₁f(x) from `mc_samples` pairs. In d = 1 with a
/// limit distribution function the pair is quantile-coupled, otherwise independent.
pub fn one_step_gap(cfg: &OperatorConfig, f: &TestFunction, x: &[f64], cdf: Option<&StableCdf>) -> Result<GapEstimate> {
    check_point(cfg, x)?;
    let inc = Increments::new(cfg)?;
    let d = cfg.dim();
    let p_scale = (cfg.n as f64).powf(-1.0 / inc.alpha);
    let (m, coupling) = match cdf {
        Some(cdf) if d == 1 => {
            let omega = inc.omega[0];
            let model = &cfg.model;
            let m = mc_mean(cfg.stream("gap:quantile"), cfg.mc_samples, |rng| {
                let v: f64 = rng.random();
                let u = v.max(f64::MIN_POSITIVE);
                let xq = model.quantile_1d(u).unwrap_or(f64::NAN);
                let yq = cdf.quantile_split(u, 1.0 - u);
                f.value(&[x[0] + (xq - omega) * inc.q_scale]) - f.value(&[x[0] + p_scale * yq])
            });
            (m, Coupling::Quantile)
        }
        _ => {
            let m = mc_mean(cfg.stream("gap:independent"), cfg.mc_samples, |rng| {
                let mut a = x.to_vec();
                let mut b = x.to_vec();
                let mut tmp = vec![0.0; d];
                inc.add_q(1, rng, &mut a, &mut tmp);
                inc.add_p(1, rng, &mut b, &mut tmp);
                f.value(&a) - f.value(&b)
            });
            (m, Coupling::Independent)
        }
    };
    let (value, std_err) = (m.mean(), m.std_err());
    Ok(GapEstimate { value, std_err, n: cfg.n, m: 1, f_id: f.id(), coupling, inconclusive: std_err > value.abs() })
}

fn critical_log(n: f64, gamma: f64, c: f64) -> f64 {
    if (gamma - c).abs() < 1e-12 {
        n.ln()
    } else {
        1.0
    }
}

/// D(n, α, γ, f) with per-order sup norms ‖∇^κ f‖ for κ = 0..=4.
/// The n^{−1/α} term for α < 1 is dropped when the model is symmetric.
pub fn d_bound(n: f64, alpha: f64, gamma: f64, norms: &[Option<f64>; 5], symmetric: bool) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 2.0) || !(gamma > 0.0) || !(n >= 1.0) {
        return domain(format!("D needs α ∈ (0, 2), γ > 0, n ≥ 1 (α={alpha}, γ={gamma}, n={n})"));
    }
    let need = |orders: std::ops::RangeInclusive<usize>| -> Result<f64> {
        let mut s = 0.0;
        for k in orders {
            s += norms[k].ok_or_else(|| crate::Error::Domain(format!("norm of order {k} is required")))?;
        }
        Ok(s)
    };
    Ok(if alpha > 1.0 {
        need(1..=2)? * (n.powf(-2.0 / alpha) + n.powf(-1.0 - gamma / alpha) * critical_log(n, gamma, 2.0 - alpha))
    } else if alpha == 1.0 {
        need(0..=4)? * (n.powi(-2) + n.powf(-1.0 - gamma) * critical_log(n, gamma, 1.0))
    } else {
        let log = critical_log(n, gamma, 1.0 - alpha);
        let main = need(0..=2)? * (n.powi(-2) + n.powf(-1.0 - gamma / alpha.max(1.0 - gamma)) * log);
        if symmetric {
            main
        } else {
            main + need(1..=1)? * n.powf(-1.0 / alpha) * log
        }
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayRow {
    pub m: u64,
    pub ratio: f64,
    pub estimate: f64,
    pub std_err: f64,
    pub step: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayProbe {
    pub kappa: usize,
    pub rows: Vec<DecayRow>,
    pub fit: Option<RateFit>,
    pub inconclusive: bool,
}

/// Relative finite-difference step by derivative order, in units of (m/n)^{1/α}.
const FD_STEP: [f64; 3] = [0.0, 1e-3, 5e-2];

/// max over probe points of |∇^κ P_m f| along e₁, for each m, and the fitted
/// exponent in m/n. Probe points are given in units of (m/n)^{1/α}; the
/// difference quotients use common random numbers.
pub fn gradient_decay_probe(cfg: &OperatorConfig, f: &TestFunction, ms: &[u64], kappa: usize, points: &[f64]) -> Result<DecayProbe> {
    if kappa > 2 {
        return domain("gradient probe supports κ ≤ 2");
    }
    if points.is_empty() {
        return domain("gradient probe needs at least one probe point");
    }
    let inc = Increments::new(cfg)?;
    let d = cfg.dim();
    let mut rows = Vec::with_capacity(ms.len());
    for &m in ms {
        if m == 0 || m > cfg.n {
            return domain(format!("m = {m} must lie in 1..={}", cfg.n));
        }
        let ratio = m as f64 / cfg.n as f64;
        let s = ratio.powf(1.0 / inc.alpha);
        let h = FD_STEP[kappa] * s;
        let ests = crate::rng::mc_means(cfg.stream(&format!("grad:{m}:{kappa}")), cfg.mc_samples, points.len(), |rng, out| {
            let mut y = vec![0.0; d];
            let mut tmp = vec![0.0; d];
            inc.add_p(m, rng, &mut y, &mut tmp);
            for (o, t) in out.iter_mut().zip(points) {
                let mut z = y.clone();
                z[0] += t * s;
                let at = |dx: f64| {
                    let mut w = z.clone();
                    w[0] += dx;
                    f.value(&w)
                };
                *o = match kappa {
                    0 => at(0.0),
                    1 => (at(h) - at(-h)) / (2.0 * h),
                    _ => (at(h) - 2.0 * at(0.0) + at(-h)) / (h * h),
                };
            }
        });
        let best = ests
            .iter()
            .max_by(|a, b| a.mean().abs().total_cmp(&b.mean().abs()))
            .expect("non-empty probe set");
        rows.push(DecayRow { m, ratio, estimate: best.mean().abs(), std_err: best.std_err(), step: h });
    }
    let inconclusive = rows.iter().any(|r| r.estimate <= 3.0 * r.std_err);
    let fit = if rows.len() >= 4 {
        let xs: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r.estimate).collect();
        fit_loglog(&xs, &ys, false, cfg.seed).ok()
    } else {
        None
    };
    Ok(DecayProbe { kappa, rows, fit, inconclusive })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeneratorProbe {
    pub n: u64,
    /// E f(x + Ŷ_{1/n}) − f(x) − L f(x)/n, which equals E∫₀^{1/n}[Lf(x + Ŷ_s) − Lf(x)]ds.
    pub value: f64,
    pub std_err: f64,
    /// The order-of-magnitude bound with unit constant.
    pub bound: f64,
    pub generator: f64,
    pub stratified: bool,
}

/// Generator-error probe through the Dynkin identity. In d = 1 with a limit
/// distribution function the expectation uses quantile-stratified sampling.
pub fn generator_error_probe(
    cfg: &OperatorConfig,
    f: &TestFunction,
    x: &[f64],
    cdf: Option<&StableCdf>,
    quad: &QuadConfig,
) -> Result<GeneratorProbe> {
    check_point(cfg, x)?;
    let alpha = cfg.model.alpha();
    let nf = cfg.n as f64;
    let norms = f.norms();
    let norm = |k: usize| norms[k].ok_or_else(|| crate::Error::Domain(format!("norm of order {k} is required")));
    let bound = if alpha > 1.0 {
        norm(2)? * nf.powf(-2.0 / alpha)
    } else if alpha == 1.0 {
        (norm(0)? + norm(2)? + norm(4)?) * nf.powi(-2)
    } else {
        (norm(0)? + norm(1)? + norm(2)?) * nf.powi(-2)
    };
    if let TestFunction::Constant { .. } = f {
        return Ok(GeneratorProbe { n: cfg.n, value: 0.0, std_err: 0.0, bound, generator: 0.0, stratified: false });
    }
    let lf = generator_apply(&cfg.law, f, x, quad)?.value;
    let fx = f.value(x);
    let s = nf.powf(-1.0 / alpha);
    let (est, stratified) = match cdf {
        Some(cdf) if cfg.dim() == 1 => {
            let e = stratified_mean(cfg.stream("generator:strata"), cfg.mc_samples, |u, up| {
                f.value(&[x[0] + s * cdf.quantile_split(u, up)]) - fx
            });
            (e, true)
        }
        _ => {
            let inc = Increments::new(cfg)?;
            let d = cfg.dim();
            let m = mc_mean(cfg.stream("generator:mc"), cfg.mc_samples, |rng| {
                let mut acc = x.to_vec();
                let mut tmp = vec![0.0; d];
                inc.add_p(1, rng, &mut acc, &mut tmp);
                f.value(&acc) - fx
            });
            (Estimate { value: m.mean(), std_err: m.std_err() }, false)
        }
    };
    Ok(GeneratorProbe { n: cfg.n, value: est.value - lf / nf, std_err: est.std_err, bound, generator: lf, stratified })
}
