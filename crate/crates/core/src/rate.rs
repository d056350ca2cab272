//! Theoretical rates, distance sweeps over n, and log–log slope fits.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::rng::RngStream;
use crate::sampling::{NormalizedSum, SampleBatch, StableSampler};
use crate::tail::TailModel;
use crate::tv::{tv_1d_exact, tv_histogram_lb, DistanceEstimate, DistanceMeta, InversionConfig, Partition};

fn is_critical(gamma: f64, c: f64) -> bool {
    (gamma - c).abs() < 1e-12
}

fn check_rate_args(alpha: f64, gamma: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return domain(format!("α must lie in (0, 2), got {alpha}"));
    }
    if !(gamma > 0.0) {
        return domain(format!("γ must be positive, got {gamma}"));
    }
    Ok(())
}

/// ρ_{α,γ} for α ∈ (0, 1); the symmetric variant is γ/(α ∨ (1 − γ)).
pub fn rho(alpha: f64, gamma: f64, symmetric: bool) -> Result<f64> {
    check_rate_args(alpha, gamma)?;
    if alpha >= 1.0 {
        return domain("ρ is defined for α < 1");
    }
    Ok(if symmetric {
        gamma / alpha.max(1.0 - gamma)
    } else if gamma > 1.0 - alpha {
        (1.0 - alpha) / alpha
    } else {
        gamma / (1.0 - gamma)
    })
}

/// Λ(n, α, γ), the upper-bound rate including log factors at critical γ.
pub fn lambda_rate(n: f64, alpha: f64, gamma: f64, symmetric: bool) -> Result<f64> {
    check_rate_args(alpha, gamma)?;
    if !(n >= 2.0) {
        return domain(format!("Λ needs n ≥ 2, got {n}"));
    }
    let ln = n.ln();
    Ok(if alpha > 1.0 {
        let log = if is_critical(gamma, 2.0 - alpha) { ln } else { 1.0 };
        n.powf(-(2.0 - alpha) / alpha) + n.powf(-gamma / alpha) * log
    } else if alpha == 1.0 {
        let log = if is_critical(gamma, 1.0) { ln } else { 1.0 };
        1.0 / n + n.powf(-gamma) * log
    } else {
        let log = if is_critical(gamma, 1.0 - alpha) { ln } else { 1.0 };
        1.0 / n + n.powf(-rho(alpha, gamma, symmetric)?) * log
    })
}

/// Smallest n from which Λ is non-increasing. At critical γ the term
/// n^{−c} ln n rises until ln n = 1/c, otherwise Λ decreases on n ≥ 3.
pub fn monotone_from(alpha: f64, gamma: f64, symmetric: bool) -> Result<f64> {
    check_rate_args(alpha, gamma)?;
    let c = if alpha > 1.0 {
        is_critical(gamma, 2.0 - alpha).then(|| gamma / alpha)
    } else if alpha == 1.0 {
        is_critical(gamma, 1.0).then_some(gamma)
    } else {
        is_critical(gamma, 1.0 - alpha).then(|| rho(alpha, gamma, symmetric)).transpose()?
    };
    Ok(c.map_or(3.0, |c| (1.0 / c).exp().max(3.0)))
}

/// Power-law exponent of Λ (log factors ignored), as a negative number.
pub fn upper_exponent(alpha: f64, gamma: f64, symmetric: bool) -> Result<f64> {
    check_rate_args(alpha, gamma)?;
    Ok(-if alpha > 1.0 {
        ((2.0 - alpha) / alpha).min(gamma / alpha)
    } else if alpha == 1.0 {
        gamma.min(1.0)
    } else {
        rho(alpha, gamma, symmetric)?.min(1.0)
    })
}

/// Two-sided TV exponent −((2 − α) ∧ α)/α for the Pareto family.
pub fn pareto_exponent(alpha: f64) -> Result<f64> {
    check_rate_args(alpha, 1.0)?;
    Ok(-(2.0 - alpha).min(alpha) / alpha)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SweepMethod {
    CfInversion { nodes: usize },
    Histogram { samples: usize, bins: usize },
}

#[derive(Clone, Debug)]
pub struct RateScenario {
    pub model: TailModel,
    pub n_grid: Vec<u64>,
    pub method: SweepMethod,
    pub seed: u64,
}

impl RateScenario {
    pub fn new(model: TailModel, n_grid: Vec<u64>, method: SweepMethod, seed: u64) -> Result<Self> {
        if n_grid.len() < 2 {
            return domain("an n-grid needs at least two points");
        }
        if n_grid[0] == 0 || n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return domain("n-grid must be positive and strictly increasing");
        }
        if matches!(method, SweepMethod::CfInversion { .. }) && model.dim() != 1 {
            return domain("characteristic-function inversion is one-dimensional");
        }
        Ok(RateScenario { model, n_grid, method, seed })
    }

    pub fn symmetric(&self) -> bool {
        self.model.is_symmetric()
    }
}

/// Dyadic grid 2^lo..=2^hi.
pub fn dyadic(lo: u32, hi: u32) -> Vec<u64> {
    (lo..=hi).map(|k| 1u64 << k).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: u64,
    pub estimate: Option<DistanceEstimate>,
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sweep {
    pub model: String,
    pub rows: Vec<SweepRow>,
}

impl Sweep {
    /// (n, value) for rows that produced an estimate.
    pub fn points(&self) -> (Vec<f64>, Vec<f64>) {
        self.rows
            .iter()
            .filter_map(|r| r.estimate.as_ref().map(|e| (r.n as f64, e.value)))
            .unzip()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["n", "value", "error", "method", "failure"]).map_err(csv_err)?;
        for r in &self.rows {
            let (v, e, m) = match &r.estimate {
                Some(est) => (format!("{:e}", est.value), format!("{:e}", est.error), serde_json::to_string(&est.method)?.replace('"', "")),
                None => (String::new(), String::new(), String::new()),
            };
            out.write_record([r.n.to_string(), v, e, m, r.failure.clone().unwrap_or_default()]).map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Runs one distance estimate per n; failures are recorded and the sweep continues.
pub fn run_sweep(s: &RateScenario) -> Sweep {
    let one = |(k, &n): (usize, &u64)| -> Result<DistanceEstimate> {
        match &s.method {
            SweepMethod::CfInversion { nodes } => {
                Ok(tv_1d_exact(&s.model, n, InversionConfig { nodes: *nodes, x_half: None })?.tv)
            }
            SweepMethod::Histogram { samples, bins } => {
                let sum = NormalizedSum::new(&s.model, n)?;
                let lim = StableSampler::new(&s.model.limit_law()?)?;
                let base = RngStream::new(s.seed, 0x5357_0000 + k as u64);
                let a = SampleBatch::generate(&sum, *samples, base.derive("sum"));
                let b = SampleBatch::generate(&lim, *samples, base.derive("limit"));
                let p = Partition::from_batches(&a, &b, *bins);
                let meta = DistanceMeta { n, alpha: s.model.alpha(), model: s.model.to_text() };
                tv_histogram_lb(&a, &b, &p, meta)
            }
        }
    };
    let rows = s
        .n_grid
        .par_iter()
        .enumerate()
        .map(|kn| {
            let n = *kn.1;
            match one(kn) {
                Ok(e) => SweepRow { n, estimate: Some(e), failure: None },
                Err(e) => SweepRow { n, estimate: None, failure: Some(e.to_string()) },
            }
        })
        .collect();
    Sweep { model: s.model.to_text(), rows }
}

/// Least-squares fit of ln d = a + b ln n (+ c ln ln n).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub ci95: (f64, f64),
    pub r2: f64,
    pub residuals: Vec<f64>,
    /// Coefficient of ln ln n and its interval, when requested.
    pub log_exponent: Option<(f64, (f64, f64))>,
    pub points_used: usize,
    pub warning: Option<String>,
}

const BOOTSTRAP: usize = 200;

/// Ordinary least squares for y on the columns of `xs` plus an intercept.
fn ols(xs: &[Vec<f64>], y: &[f64]) -> Result<Vec<f64>> {
    let p = xs.len() + 1;
    let row = |i: usize| -> Vec<f64> {
        let mut r = vec![1.0];
        r.extend(xs.iter().map(|c| c[i]));
        r
    };
    let mut a = vec![vec![0.0; p + 1]; p];
    for (i, yi) in y.iter().enumerate() {
        let r = row(i);
        for j in 0..p {
            for k in 0..p {
                a[j][k] += r[j] * r[k];
            }
            a[j][p] += r[j] * yi;
        }
    }
    // Gaussian elimination with partial pivoting on the normal equations
    for c in 0..p {
        let piv = (c..p).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap_or(c);
        a.swap(c, piv);
        if a[c][c].abs() < 1e-300 {
            return Err(Error::Numeric { what: "singular regression".into(), achieved: a[c][c] });
        }
        for r in 0..p {
            if r != c {
                let f = a[r][c] / a[c][c];
                for k in c..=p {
                    a[r][k] -= f * a[c][k];
                }
            }
        }
    }
    Ok((0..p).map(|j| a[j][p] / a[j][j]).collect())
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let (i, f) = (pos.floor() as usize, pos.fract());
    if i + 1 < sorted.len() {
        sorted[i] * (1.0 - f) + sorted[i + 1] * f
    } else {
        sorted[i]
    }
}

/// Log–log slope fit with a residual-bootstrap 95% interval (200 resamples).
/// `log_factor` adds the ln ln n regressor.
pub fn fit_loglog(ns: &[f64], ds: &[f64], log_factor: bool, seed: u64) -> Result<RateFit> {
    if ns.len() != ds.len() {
        return domain("n and distance columns differ in length");
    }
    let (n, d): (Vec<f64>, Vec<f64>) = ns.iter().zip(ds).filter(|(_, d)| **d > 0.0 && d.is_finite()).map(|(a, b)| (*a, *b)).unzip();
    let dropped = ns.len() - n.len();
    let need = if log_factor { 5 } else { 4 };
    if n.len() < need {
        return domain(format!("slope fit needs at least {need} positive values, got {}", n.len()));
    }
    if log_factor && n.iter().any(|v| *v <= 1.0) {
        return domain("ln ln n regressor needs n > 1");
    }
    let x: Vec<f64> = n.iter().map(|v| v.ln()).collect();
    let mut cols = vec![x.clone()];
    if log_factor {
        cols.push(x.iter().map(|v| v.ln()).collect());
    }
    let y: Vec<f64> = d.iter().map(|v| v.ln()).collect();
    let beta = ols(&cols, &y)?;
    let fitted: Vec<f64> = (0..y.len()).map(|i| beta[0] + cols.iter().zip(&beta[1..]).map(|(c, b)| b * c[i]).sum::<f64>()).collect();
    let residuals: Vec<f64> = y.iter().zip(&fitted).map(|(a, b)| a - b).collect();
    let ybar = y.iter().sum::<f64>() / y.len() as f64;
    let sst: f64 = y.iter().map(|v| (v - ybar).powi(2)).sum();
    let sse: f64 = residuals.iter().map(|r| r * r).sum();
    let r2 = if sst > 0.0 { (1.0 - sse / sst).clamp(0.0, 1.0) } else { 1.0 };
    let mut rng = RngStream::new(seed, 0xF17).rng();
    // residuals rescaled by √(m/(m − p)) so resamples carry the unshrunk error variance
    let (m, p) = (y.len() as f64, beta.len() as f64);
    let inflate = (m / (m - p)).sqrt();
    let boot_res: Vec<f64> = residuals.iter().map(|r| r * inflate).collect();
    let mut slopes = Vec::with_capacity(BOOTSTRAP);
    let mut logs = Vec::with_capacity(BOOTSTRAP);
    for _ in 0..BOOTSTRAP {
        let yb: Vec<f64> = fitted.iter().map(|f| f + boot_res[rng.random_range(0..boot_res.len())]).collect();
        let b = ols(&cols, &yb)?;
        slopes.push(b[1]);
        if log_factor {
            logs.push(b[2]);
        }
    }
    let interval = |v: &mut Vec<f64>, centre: f64| {
        v.sort_by(f64::total_cmp);
        let (lo, hi) = (percentile(v, 0.025), percentile(v, 0.975));
        (lo.min(centre), hi.max(centre))
    };
    let ci95 = interval(&mut slopes, beta[1]);
    let log_exponent = if log_factor { Some((beta[2], interval(&mut logs, beta[2]))) } else { None };
    Ok(RateFit {
        slope: beta[1],
        intercept: beta[0],
        ci95,
        r2,
        residuals,
        log_exponent,
        points_used: n.len(),
        warning: (dropped > 0).then(|| format!("{dropped} nonpositive values dropped")),
    })
}

/// The α = 1 discrimination between d_n ≍ n⁻¹ and d_n ≍ n⁻¹(ln n)².
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HeadlineReport {
    pub n: Vec<f64>,
    pub distance: Vec<f64>,
    /// n·d_n over the grid.
    pub ratio: Vec<f64>,
    pub ratio_spread: f64,
    pub rss_inverse: f64,
    pub rss_log_squared: f64,
    /// Coefficient c in ln(n·d_n) = a + c ln ln n with its 95% interval.
    pub log_exponent: f64,
    pub log_exponent_ci: (f64, f64),
    /// `Some(true)` means "n⁻¹", `None` inconclusive.
    pub verdict: Option<bool>,
    pub verdict_text: String,
    pub sweep: Option<Sweep>,
}

fn rss_fixed_shape(y: &[f64]) -> f64 {
    let m = y.iter().sum::<f64>() / y.len() as f64;
    y.iter().map(|v| (v - m).powi(2)).sum()
}

/// Verdict from a table of (n, d_n).
pub fn headline_from(ns: &[f64], ds: &[f64], seed: u64) -> Result<HeadlineReport> {
    let pos: Vec<(f64, f64)> = ns.iter().zip(ds).filter(|(n, d)| **d > 0.0 && **n > 1.0).map(|(a, b)| (*a, *b)).collect();
    let (n, d): (Vec<f64>, Vec<f64>) = pos.into_iter().unzip();
    let span = if n.is_empty() { 0.0 } else { (n[n.len() - 1] / n[0]).log10() };
    let ratio: Vec<f64> = n.iter().zip(&d).map(|(a, b)| a * b).collect();
    if n.len() < 4 || span < 2.0 {
        return Ok(HeadlineReport {
            n,
            distance: d,
            ratio,
            ratio_spread: f64::NAN,
            rss_inverse: f64::NAN,
            rss_log_squared: f64::NAN,
            log_exponent: f64::NAN,
            log_exponent_ci: (f64::NAN, f64::NAN),
            verdict: None,
            verdict_text: "inconclusive: need at least 4 positive points spanning 2 decades of n, e.g. 2^4..2^14".into(),
            sweep: None,
        });
    }
    let max = ratio.iter().cloned().fold(f64::MIN, f64::max);
    let min = ratio.iter().cloned().fold(f64::MAX, f64::min);
    let ln_ratio: Vec<f64> = ratio.iter().map(|r| r.ln()).collect();
    let shifted: Vec<f64> = ln_ratio.iter().zip(&n).map(|(r, n)| r - 2.0 * n.ln().ln()).collect();
    // ln(n d_n) = a + c ln ln n is the ln ln n regression with the power fixed at −1
    let ln_n: Vec<f64> = n.iter().map(|v| v.ln()).collect();
    let fit = fit_loglog(&ln_n, &ratio, false, seed)?;
    let spread = max / min;
    let bounded = spread < 4.0;
    let excludes_two = !(fit.ci95.0 <= 2.0 && 2.0 <= fit.ci95.1);
    let verdict = bounded && excludes_two;
    let text = if verdict {
        "n^-1".to_string()
    } else {
        format!("not n^-1 (ratio spread {spread:.3}, ln-exponent interval [{:.3}, {:.3}])", fit.ci95.0, fit.ci95.1)
    };
    Ok(HeadlineReport {
        n,
        distance: d,
        ratio,
        ratio_spread: spread,
        rss_inverse: rss_fixed_shape(&ln_ratio),
        rss_log_squared: rss_fixed_shape(&shifted),
        log_exponent: fit.slope,
        log_exponent_ci: fit.ci95,
        verdict: Some(verdict),
        verdict_text: text,
        sweep: None,
    })
}

/// Runs the exact sweep for symmetric Pareto d = 1, α = 1 and reports the verdict.
pub fn headline_alpha1(n_grid: &[u64], nodes: usize, seed: u64) -> Result<HeadlineReport> {
    let model = TailModel::pareto(1, 1.0)?;
    let s = RateScenario::new(model, n_grid.to_vec(), SweepMethod::CfInversion { nodes }, seed)?;
    let sweep = run_sweep(&s);
    let (n, d) = sweep.points();
    let mut rep = headline_from(&n, &d, seed)?;
    rep.sweep = Some(sweep);
    Ok(rep)
}
