//! Distances between the law of S_n and its stable limit: exact 1-D total
//! variation by characteristic-function inversion, histogram lower bounds,
//! Kolmogorov distance, and the normalized log-CF gap Δ_n of the Pareto family.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::Poisson;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;
use statrs::function::gamma::gamma;

use crate::error::{domain, Error, Result};
use crate::rng::RngStream;
use crate::sampling::SampleBatch;
use crate::spectral::{cos_head_series, cos_moment, cos_tail, SpectralMeasure, StableLaw};
use crate::tail::TailModel;

/// Uniform mesh x_j = x_min + j·dx, j < len.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Grid {
    pub x_min: f64,
    pub dx: f64,
    pub len: usize,
}

impl Grid {
    pub fn x(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx
    }

    pub fn x_max(&self) -> f64 {
        self.x(self.len - 1)
    }
}

/// A density sampled on a grid. Negative values from inversion are kept;
/// `min_value` records the most negative one.
#[derive(Clone, Debug, Serialize)]
pub struct GridDensity {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub tail_mass_bound: f64,
    pub min_value: f64,
}

impl GridDensity {
    pub fn integral(&self) -> f64 {
        let s: f64 = self.values.iter().sum();
        let ends = 0.5 * (self.values[0] + self.values[self.values.len() - 1]);
        (s - ends) * self.grid.dx
    }

    /// Linear interpolation; zero off the grid.
    pub fn at(&self, x: f64) -> f64 {
        let t = (x - self.grid.x_min) / self.grid.dx;
        if t < 0.0 || t > (self.grid.len - 1) as f64 {
            return 0.0;
        }
        let j = (t.floor() as usize).min(self.grid.len - 2);
        let f = t - j as f64;
        self.values[j] * (1.0 - f) + self.values[j + 1] * f
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,density")?;
        for (j, v) in self.values.iter().enumerate() {
            writeln!(w, "{:e},{:e}", self.grid.x(j), v)?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    CfInversion,
    HistogramLb,
    Kolmogorov,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistanceMeta {
    pub n: u64,
    pub alpha: f64,
    pub model: String,
}

/// A distance with its standard error (Monte Carlo) or numeric error bound.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistanceEstimate {
    pub value: f64,
    pub error: f64,
    pub method: Method,
    pub meta: DistanceMeta,
}

/// Grid settings for inversion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InversionConfig {
    pub nodes: usize,
    /// Half-width X of the x-grid [−X, X); `None` picks it from the limit law.
    pub x_half: Option<f64>,
}

impl Default for InversionConfig {
    fn default() -> Self {
        InversionConfig { nodes: 1 << 18, x_half: None }
    }
}

const NEGLIGIBLE: f64 = 1e-17;
const CHUNK: usize = 2048;

/// Evaluates a Hermitian spectrum g on λ_k = (k − N/2)·π/X and returns
/// p_j = (2π)⁻¹ Σ_k g(λ_k) e^{−iλ_k x_j} h_λ on x_j = −X + 2jX/N, together
/// with max |g| near the band edge.
fn invert_hermitian<F>(g: F, nodes: usize, x_half: f64) -> Result<(Grid, Vec<f64>, f64)>
where
    F: Fn(f64) -> Result<Complex64> + Sync,
{
    if !nodes.is_power_of_two() || nodes < 16 {
        return domain(format!("node count {nodes} must be a power of two ≥ 16"));
    }
    let half = nodes / 2;
    let h_lambda = PI / x_half;
    let mut vals: Vec<Complex64> = Vec::with_capacity(half);
    let mut cut = false;
    while vals.len() < half {
        let start = vals.len();
        let end = (start + CHUNK).min(half);
        let chunk: Vec<Complex64> = (start..end)
            .into_par_iter()
            .map(|m| g(m as f64 * h_lambda))
            .collect::<Result<_>>()?;
        let peak = chunk.iter().map(|z| z.norm()).fold(0.0, f64::max);
        vals.extend(chunk);
        if peak < NEGLIGIBLE && start > 0 {
            cut = true;
            break;
        }
    }
    let edge = if cut { 0.0 } else { vals[half - (half / 64).max(1)..].iter().map(|z| z.norm()).fold(0.0, f64::max) };
    let mut buf = vec![Complex64::new(0.0, 0.0); nodes];
    for (k, b) in buf.iter_mut().enumerate() {
        let m = k as isize - half as isize;
        let v = if m >= 0 {
            vals.get(m as usize).copied().unwrap_or_default()
        } else {
            vals.get((-m) as usize).map(|z| z.conj()).unwrap_or_default()
        };
        *b = if k % 2 == 0 { v } else { -v };
    }
    FftPlanner::<f64>::new().plan_fft_forward(nodes).process(&mut buf);
    let scale = h_lambda / (2.0 * PI);
    let values: Vec<f64> = buf
        .iter()
        .enumerate()
        .map(|(j, z)| if j % 2 == 0 { z.re * scale } else { -z.re * scale })
        .collect();
    let grid = Grid { x_min: -x_half, dx: 2.0 * x_half / nodes as f64, len: nodes };
    Ok((grid, values, edge))
}

/// Density of a law from its characteristic function on [−X, X).
pub fn invert_cf_to_density<F>(cf: F, nodes: usize, x_half: f64) -> Result<GridDensity>
where
    F: Fn(f64) -> Complex64 + Sync,
{
    let (grid, values, edge) = invert_hermitian(|l| Ok(cf(l)), nodes, x_half)?;
    let lambda_max = (nodes / 2) as f64 * PI / x_half;
    // ∫_{|λ|>Λ}|cf| ≈ 2Λ·|cf(Λ)| for the stretched-exponential decay of stable CFs
    if 2.0 * lambda_max * edge > 1e-6 {
        return Err(Error::Accuracy { what: "CF cutoff".into(), suggested: (2 * nodes) as f64 });
    }
    let min_value = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mut d = GridDensity { grid, values, tail_mass_bound: 0.0, min_value };
    d.tail_mass_bound = (1.0 - d.integral()).max(0.0);
    Ok(d)
}

/// Result of an exact 1-D comparison.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExactComparison {
    pub tv: DistanceEstimate,
    pub kolmogorov: DistanceEstimate,
    pub x_half: f64,
}

/// TV and Kolmogorov distance from the difference spectrum g = φ_P − φ_Q.
///
/// Off-grid mass and aliasing are estimated from the decay of |p − q| on the
/// outer tenth of the grid, assuming |p − q| ≤ C|x|^{−1−α} beyond it.
pub fn compare_from_difference<F>(g: F, tail_index: f64, cfg: InversionConfig, meta: DistanceMeta) -> Result<ExactComparison>
where
    F: Fn(f64) -> Result<Complex64> + Sync,
{
    let x_half = cfg.x_half.unwrap_or(100.0);
    let (grid, diff, edge) = invert_hermitian(g, cfg.nodes, x_half)?;
    let dx = grid.dx;
    let tv_grid = 0.5 * diff.iter().map(|v| v.abs()).sum::<f64>() * dx;
    let mut cum = 0.0;
    let mut ks: f64 = 0.0;
    for v in &diff {
        cum += v * dx;
        ks = ks.max(cum.abs());
    }
    let mut c: f64 = 0.0;
    for (j, v) in diff.iter().enumerate() {
        let x = grid.x(j).abs();
        if x >= 0.9 * x_half {
            c = c.max(v.abs() * x.powf(1.0 + tail_index));
        }
    }
    let tail = c * x_half.powf(-tail_index) / tail_index;
    let lambda_max = (cfg.nodes / 2) as f64 * PI / x_half;
    let cut = edge * lambda_max / PI;
    let error = 2.0 * tail + cut;
    Ok(ExactComparison {
        tv: DistanceEstimate { value: tv_grid, error, method: Method::CfInversion, meta: meta.clone() },
        kolmogorov: DistanceEstimate { value: ks, error, method: Method::Kolmogorov, meta },
        x_half,
    })
}

/// Default half-width: ten times the 99% quantile of the limit law, in [50, 1000].
pub fn default_x_half(alpha: f64) -> Result<f64> {
    // P(|Y| > x) ≈ (d_α/α)·x^{−α} for every A
    let d = 1.0 / cos_moment(alpha)?;
    let q99 = (100.0 * d / alpha).powf(1.0 / alpha);
    Ok((10.0 * q99).clamp(50.0, 1000.0))
}

/// φ_{S_n}(λ) − φ_Y(λ) for a one-dimensional model.
pub struct SumSpectrum {
    model: TailModel,
    law: StableLaw,
    n: f64,
    scale: f64,
    phase: f64,
}

impl SumSpectrum {
    pub fn new(model: &TailModel, n: u64) -> Result<Self> {
        if model.dim() != 1 {
            return domain("exact TV needs a one-dimensional model");
        }
        if n == 0 {
            return domain("n must be at least 1");
        }
        let law = model.limit_law()?;
        let sigma = model.sigma_scale()?;
        let nf = n as f64;
        let scale = 1.0 / (nf.powf(1.0 / model.alpha()) * sigma);
        let omega = model.omega_shift(n)?[0];
        Ok(SumSpectrum { model: model.clone(), law, n: nf, scale, phase: nf * omega * scale })
    }

    /// (ln φ_{S_n}(λ), ln φ_Y(λ)).
    pub fn log_cfs(&self, lambda: f64) -> Result<(Complex64, Complex64)> {
        let d = self.model.cf_deficit(&[lambda * self.scale])?;
        let ln_sn = (Complex64::new(1.0, 0.0) - d).ln() * self.n - Complex64::new(0.0, lambda * self.phase);
        Ok((ln_sn, -self.law.exponent_1d(lambda)))
    }

    pub fn difference(&self, lambda: f64) -> Result<Complex64> {
        if lambda == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let (a, b) = self.log_cfs(lambda)?;
        let z = a - b;
        if z.norm() < 0.5 {
            Ok(b.exp() * expm1(z))
        } else {
            Ok(a.exp() - b.exp())
        }
    }
}

/// e^z − 1 without cancellation for small |z|.
fn expm1(z: Complex64) -> Complex64 {
    let h = (0.5 * z.im).sin();
    let rot_m1 = Complex64::new(-2.0 * h * h, z.im.sin());
    Complex64::from_polar(1.0, z.im) * z.re.exp_m1() + rot_m1
}

/// Exact TV (and Kolmogorov distance) between S_n and its stable limit in 1-D.
pub fn tv_1d_exact(model: &TailModel, n: u64, cfg: InversionConfig) -> Result<ExactComparison> {
    let spec = SumSpectrum::new(model, n)?;
    let x_half = match cfg.x_half {
        Some(x) => x,
        None => default_x_half(model.alpha())?,
    };
    let meta = DistanceMeta { n, alpha: model.alpha(), model: model.to_text() };
    compare_from_difference(|l| spec.difference(l), model.alpha(), InversionConfig { x_half: Some(x_half), ..cfg }, meta)
}

/// Kolmogorov distance between S_n and the limit (cross-check for TV).
pub fn kolmogorov_1d(model: &TailModel, n: u64, cfg: InversionConfig) -> Result<DistanceEstimate> {
    Ok(tv_1d_exact(model, n, cfg)?.kolmogorov)
}

/// Axis-aligned partition: `bins` equal cells per axis on [lo_i, hi_i) plus one overflow cell.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Partition {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub bins: usize,
}

impl Partition {
    /// Cells from the pooled 1% and 99% quantiles of each coordinate.
    pub fn from_batches(a: &SampleBatch, b: &SampleBatch, bins: usize) -> Self {
        let d = a.dim;
        let mut lo = Vec::with_capacity(d);
        let mut hi = Vec::with_capacity(d);
        for i in 0..d {
            let mut v: Vec<f64> = a.points.iter().chain(&b.points).map(|p| p[i]).collect();
            v.sort_by(|x, y| x.total_cmp(y));
            let q = |f: f64| v[((v.len() - 1) as f64 * f) as usize];
            let (l, h) = (q(0.01), q(0.99));
            lo.push(l);
            hi.push(if h > l { h } else { l + 1.0 });
        }
        Partition { lo, hi, bins }
    }

    pub fn cells(&self) -> usize {
        self.bins.pow(self.lo.len() as u32) + 1
    }

    pub fn cell(&self, x: &[f64]) -> usize {
        let mut idx = 0;
        for (i, xi) in x.iter().enumerate() {
            let t = (xi - self.lo[i]) / (self.hi[i] - self.lo[i]);
            if !(0.0..1.0).contains(&t) {
                return self.cells() - 1;
            }
            idx = idx * self.bins + ((t * self.bins as f64) as usize).min(self.bins - 1);
        }
        idx
    }

    pub fn counts(&self, batch: &SampleBatch) -> Vec<f64> {
        let mut c = vec![0.0; self.cells()];
        for p in &batch.points {
            c[self.cell(p)] += 1.0;
        }
        c
    }
}

fn half_l1(a: &[f64], b: &[f64]) -> f64 {
    let na: f64 = a.iter().sum();
    let nb: f64 = b.iter().sum();
    0.5 * a.iter().zip(b).map(|(x, y)| (x / na - y / nb).abs()).sum::<f64>()
}

/// ½Σ|p̂_i − q̂_i| over a partition, with a Poisson-bootstrap standard error.
pub fn tv_histogram_lb(a: &SampleBatch, b: &SampleBatch, partition: &Partition, meta: DistanceMeta) -> Result<DistanceEstimate> {
    if a.dim != b.dim || a.points.len() != b.points.len() || a.points.is_empty() {
        return domain("histogram TV needs equal-size batches of equal dimension");
    }
    let ca = partition.counts(a);
    let cb = partition.counts(b);
    let value = half_l1(&ca, &cb);
    let mut rng = RngStream::new(a.provenance.seed ^ b.provenance.seed, 0xB007).rng();
    let reps = 200;
    let draw = |c: &[f64], rng: &mut rand_chacha::ChaCha8Rng| -> Vec<f64> {
        c.iter().map(|&k| if k > 0.0 { rng.sample(Poisson::new(k).unwrap()) } else { 0.0 }).collect()
    };
    let boots: Vec<f64> = (0..reps)
        .map(|_| {
            let x = draw(&ca, &mut rng);
            let y = draw(&cb, &mut rng);
            half_l1(&x, &y)
        })
        .collect();
    let mean = boots.iter().sum::<f64>() / reps as f64;
    let var = boots.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
    Ok(DistanceEstimate { value, error: var.sqrt(), method: Method::HistogramLb, meta })
}

/// E|θ₁|^α under the uniform probability on S^{d−1}.
pub fn sphere_abs_moment(d: usize, alpha: f64) -> f64 {
    let df = d as f64;
    gamma(df / 2.0) * gamma((alpha + 1.0) / 2.0) / (PI.sqrt() * gamma((df + alpha) / 2.0))
}

fn check_delta_dim(d: usize) -> Result<()> {
    if (1..=3).contains(&d) {
        Ok(())
    } else {
        domain(format!("exact Pareto CF path supports d ∈ {{1, 2, 3}}, got {d}"))
    }
}

/// Helper for the Pareto CF: x(t) = 1 − φ_X(t e₁) = α E[|tθ₁|^α G(t|θ₁|)] and
/// E[|θ₁|^α H(t|θ₁|)], where H + G is the full cosine moment.
struct ParetoCf {
    alpha: f64,
    d: usize,
    moment: f64,
    abs_moment: f64,
    nu: SpectralMeasure,
}

impl ParetoCf {
    fn new(alpha: f64, d: usize) -> Result<Self> {
        check_delta_dim(d)?;
        Ok(ParetoCf {
            alpha,
            d,
            moment: cos_moment(alpha)?,
            abs_moment: sphere_abs_moment(d, alpha),
            nu: SpectralMeasure::uniform(d)?,
        })
    }

    fn head(&self, s: f64) -> Result<f64> {
        if s <= 2.0 {
            Ok(cos_head_series(self.alpha, s))
        } else {
            Ok(self.moment - cos_tail(self.alpha, s)?)
        }
    }

    /// E[|θ₁|^α H(t|θ₁|)].
    fn head_average(&self, t: f64) -> Result<f64> {
        let a = self.alpha;
        if self.d == 1 {
            return self.head(t);
        }
        let err = std::cell::RefCell::new(None);
        let v = self.nu.integrate(
            |th| {
                let u = th[0].abs();
                match self.head(t * u) {
                    Ok(h) => u.powf(a) * h,
                    Err(e) => {
                        err.borrow_mut().get_or_insert(e);
                        f64::NAN
                    }
                }
            },
            &crate::spectral::unit(self.d, 0),
        );
        match err.into_inner() {
            Some(e) => Err(e),
            None => Ok(v),
        }
    }

    /// n·(ln φ_{S_n}(e₁) − ln φ_Y(e₁))/n^{…} pieces: returns (x, difference of logs).
    fn log_gap(&self, n: f64, lambda: f64) -> Result<(f64, f64)> {
        let a = self.alpha;
        let d_alpha = 1.0 / self.moment;
        let sigma = (a * self.moment).powf(1.0 / a);
        let t = lambda / (sigma * n.powf(1.0 / a));
        // n·x = |λ|^α (E|θ₁|^α − d_α E[|θ₁|^α H(t|θ₁|)]) using n t^α σ^α = |λ|^α, σ^α d_α = α
        let la = lambda.powf(a);
        let ha = self.head_average(t)?;
        let nx = la * (self.abs_moment - d_alpha * ha);
        let x = nx / n;
        let gap = la * d_alpha * ha + n * ((-x).ln_1p() + x);
        Ok((x, gap))
    }
}

/// φ_{S_n}(λe₁) for the symmetric Pareto law in d ≤ 3.
pub fn cf_of_sn_pareto(n: u64, alpha: f64, d: usize, lambda_mag: f64) -> Result<Complex64> {
    if lambda_mag == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let p = ParetoCf::new(alpha, d)?;
    let (x, _) = p.log_gap(n as f64, lambda_mag.abs())?;
    if x >= 1.0 {
        return Ok(Complex64::new((1.0 - x).powf(n as f64), 0.0));
    }
    Ok(Complex64::new((n as f64 * (-x).ln_1p()).exp(), 0.0))
}

/// Limits of Δ_n: the printed closed form and the form with the sphere
/// normalization ∫θ₁²dθ = |S^{d−1}|/d carried through.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DeltaLimits {
    pub printed: f64,
    pub corrected: f64,
}

pub fn delta_limits(alpha: f64, d: usize) -> Result<DeltaLimits> {
    check_delta_dim(d)?;
    let m = cos_moment(alpha)?;
    let sigma2 = (alpha * m).powf(2.0 / alpha);
    let df = d as f64;
    let g = gamma(df / 2.0 + 1.0);
    let pd = PI.powf(df / 2.0);
    let e = sphere_abs_moment(d, alpha);
    Ok(if alpha > 1.0 {
        DeltaLimits {
            printed: alpha * g / ((4.0 - 2.0 * alpha) * pd * df * df * sigma2),
            corrected: alpha / (df * (4.0 - 2.0 * alpha) * sigma2),
        }
    } else if alpha < 1.0 {
        let v = -0.5 * e * e;
        DeltaLimits { printed: v, corrected: v }
    } else {
        DeltaLimits {
            printed: g / (2.0 * pd * df * df * sigma2) - 0.5 * e * e,
            corrected: 1.0 / (2.0 * df * sigma2) - 0.5 * e * e,
        }
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeltaRow {
    pub n: u64,
    pub delta: f64,
    pub limit: f64,
    pub rel_gap: f64,
    pub limit_corrected: f64,
    pub rel_gap_corrected: f64,
}

/// Δ_n = n^{((2−α)∧α)/α}(ln φ_{S_n}(e₁) − ln φ_Y(e₁)) for symmetric Pareto.
pub fn delta_n(n: u64, alpha: f64, d: usize) -> Result<f64> {
    if n == 0 {
        return domain("n must be at least 1");
    }
    let p = ParetoCf::new(alpha, d)?;
    let nf = n as f64;
    let (x, gap) = p.log_gap(nf, 1.0)?;
    if x >= 1.0 {
        return Err(Error::Numeric { what: "φ_{S_n}(e₁) ≤ 0".into(), achieved: x });
    }
    Ok(nf.powf((2.0 - alpha).min(alpha) / alpha) * gap)
}

pub fn delta_table(alpha: f64, d: usize, ns: &[u64]) -> Result<Vec<DeltaRow>> {
    let lim = delta_limits(alpha, d)?;
    ns.iter()
        .map(|&n| {
            let delta = delta_n(n, alpha, d)?;
            Ok(DeltaRow {
                n,
                delta,
                limit: lim.printed,
                rel_gap: ((delta - lim.printed) / lim.printed).abs(),
                limit_corrected: lim.corrected,
                rel_gap_corrected: ((delta - lim.corrected) / lim.corrected).abs(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{ModelSampler, StableSampler};
    use crate::tail::EpsFn;
    use approx::assert_relative_eq;

    #[test]
    fn inversion_normal_and_cauchy() {
        let d = invert_cf_to_density(|l| Complex64::new((-0.5 * l * l).exp(), 0.0), 1 << 12, 50.0).unwrap();
        let mut worst: f64 = 0.0;
        for (j, v) in d.values.iter().enumerate() {
            let x = d.grid.x(j);
            if x.abs() <= 8.0 {
                worst = worst.max((v - (-0.5 * x * x).exp() / (2.0 * PI).sqrt()).abs());
            }
        }
        assert!(worst < 1e-8, "normal error {worst}");
        assert!(d.min_value > -1e-9);
        let c = invert_cf_to_density(|l| Complex64::new((-l.abs()).exp(), 0.0), 1 << 16, 1000.0).unwrap();
        let mut worst: f64 = 0.0;
        for (j, v) in c.values.iter().enumerate() {
            let x = c.grid.x(j);
            if x.abs() <= 50.0 {
                worst = worst.max((v - 1.0 / (PI * (1.0 + x * x))).abs());
            }
        }
        assert!(worst < 1e-6, "Cauchy error {worst}");
        assert!(c.integral() <= 1.0 + 1e-6 && c.integral() >= 1.0 - c.tail_mass_bound - 1e-6);
    }

    #[test]
    fn inversion_round_trip() {
        let law = StableLaw::one_dim(1.3, 0.7, 0.3).unwrap();
        let d = invert_cf_to_density(|l| law.cf(&[l]).unwrap(), 1 << 16, 400.0).unwrap();
        for l in [0.3, 1.0, 2.5] {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, v) in d.values.iter().enumerate() {
                acc += Complex64::from_polar(*v * d.grid.dx, l * d.grid.x(j));
            }
            // the grid misses the tail mass beyond ±400, bounded by 2·P(|Y| > 400)
            let exact = law.cf(&[l]).unwrap();
            assert!((acc - exact).norm() < 2e-3, "λ={l}: {acc} vs {exact}");
        }
        let narrow = StableLaw::one_dim(1.8, 0.5, 0.5).unwrap();
        let d = invert_cf_to_density(|l| narrow.cf(&[l]).unwrap(), 1 << 14, 60.0).unwrap();
        for l in [0.3, 1.0] {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, v) in d.values.iter().enumerate() {
                acc += Complex64::from_polar(*v * d.grid.dx, l * d.grid.x(j));
            }
            let exact = narrow.cf(&[l]).unwrap();
            assert!((acc - exact).norm() < 1e-4, "λ={l}: {acc} vs {exact}");
        }
    }

    #[test]
    fn cutoff_failure_suggests_more_nodes() {
        let r = invert_cf_to_density(|l| Complex64::new((-l.abs().powf(0.3)).exp(), 0.0), 1 << 10, 1000.0);
        assert!(matches!(r, Err(Error::Accuracy { .. })));
    }

    #[test]
    fn pareto_cf_matches_model_cf() {
        for (alpha, d) in [(1.5, 1usize), (0.7, 1), (1.0, 2), (1.3, 3)] {
            let m = TailModel::pareto(d, alpha).unwrap();
            let sigma = m.sigma_scale().unwrap();
            let n = 7u64;
            let lam = 1.3;
            let t = lam / (sigma * (n as f64).powf(1.0 / alpha));
            let mut v = vec![0.0; d];
            v[0] = t;
            let phi = m.cf(&v).unwrap();
            let want = phi.powf(n as f64);
            let got = cf_of_sn_pareto(n, alpha, d, lam).unwrap();
            assert_relative_eq!(got.re, want.re, max_relative = 1e-9);
            assert!(want.im.abs() < 1e-12);
        }
        assert_eq!(cf_of_sn_pareto(5, 1.2, 2, 0.0).unwrap(), Complex64::new(1.0, 0.0));
        let big = cf_of_sn_pareto(1 << 30, 1.5, 1, 1.0).unwrap();
        assert_relative_eq!(big.re, (-1f64).exp(), max_relative = 1e-3);
    }

    #[test]
    fn delta_limit_values() {
        let one = delta_limits(1.0, 1).unwrap();
        assert_relative_eq!(one.printed, 1.0 / (PI * PI) - 0.5, max_relative = 1e-12);
        assert_relative_eq!(one.corrected, 2.0 / (PI * PI) - 0.5, max_relative = 1e-12);
        let s = TailModel::pareto(1, 1.5).unwrap().sigma_scale().unwrap();
        let i = delta_limits(1.5, 1).unwrap();
        assert_relative_eq!(i.printed, 0.75 / (s * s), max_relative = 1e-12);
        // α < 1, d = 1: C₀∫(1 − cos x)/|x|^{1+α}dx with C₀ = αΓ(3/2)/(π^{1/2}σ^α)
        let a = 0.5;
        let sa = TailModel::pareto(1, a).unwrap().sigma_scale().unwrap().powf(a);
        // ∫₀^∞ (1 − cos x) x^{−1−α} dx = Γ(2−α)cos(πα/2)/(α(1−α))
        let h = gamma(2.0 - a) * (PI * a / 2.0).cos() / (a * (1.0 - a));
        let c0 = a * gamma(1.5) / (PI.sqrt() * sa);
        let ii = delta_limits(a, 1).unwrap();
        assert_relative_eq!(ii.printed, -0.5 * (c0 * 2.0 * h).powi(2), max_relative = 1e-4);
    }

    #[test]
    fn delta_sequence_settles() {
        for alpha in [0.5, 1.0, 1.5] {
            let a = delta_n(1000, alpha, 1).unwrap();
            let b = delta_n(2000, alpha, 1).unwrap();
            let c = delta_n(4000, alpha, 1).unwrap();
            assert!((c - b).abs() < (b - a).abs() + 1e-12, "α={alpha}: {a} {b} {c}");
        }
        let d = delta_n(1_000_000, 1.5, 1).unwrap();
        let lim = delta_limits(1.5, 1).unwrap();
        assert!((d - lim.corrected).abs() < 0.01 * lim.corrected.abs());
    }

    #[test]
    fn tv_is_symmetric_and_satisfies_triangle_inequality() {
        let m = TailModel::pareto(1, 1.2).unwrap();
        let s8 = SumSpectrum::new(&m, 8).unwrap();
        let s32 = SumSpectrum::new(&m, 32).unwrap();
        let cfg = InversionConfig { nodes: 1 << 16, x_half: Some(300.0) };
        let meta = DistanceMeta { n: 0, alpha: 1.2, model: m.to_text() };
        let phi = |s: &SumSpectrum, l: f64| -> Result<(Complex64, Complex64)> {
            let (a, b) = s.log_cfs(l)?;
            Ok((a.exp(), b.exp()))
        };
        let tv = |g: &(dyn Fn(f64) -> Result<Complex64> + Sync)| {
            compare_from_difference(|l| if l == 0.0 { Ok(Complex64::default()) } else { g(l) }, 1.2, cfg, meta.clone())
                .unwrap()
                .tv
        };
        let ab = tv(&|l| Ok(phi(&s8, l)?.0 - phi(&s32, l)?.0));
        let ba = tv(&|l| Ok(phi(&s32, l)?.0 - phi(&s8, l)?.0));
        let ay = tv(&|l| Ok(phi(&s8, l)?.0 - phi(&s8, l)?.1));
        let by = tv(&|l| Ok(phi(&s32, l)?.0 - phi(&s32, l)?.1));
        assert_relative_eq!(ab.value, ba.value, max_relative = 1e-12);
        assert!(ay.value <= ab.value + by.value + ay.error + ab.error + by.error);
        let zero = tv(&|_| Ok(Complex64::default()));
        assert_eq!(zero.value, 0.0);
    }

    #[test]
    fn tv_pareto_decreases_and_bounds_kolmogorov() {
        let m = TailModel::pareto(1, 1.5).unwrap();
        let cfg = InversionConfig { nodes: 1 << 16, x_half: None };
        let mut prev = f64::INFINITY;
        for n in [16u64, 32, 64] {
            let r = tv_1d_exact(&m, n, cfg).unwrap();
            assert!(r.tv.value > 0.0 && r.tv.value < prev);
            assert!(r.kolmogorov.value <= r.tv.value + r.tv.error);
            assert!(r.tv.error < 0.05 * r.tv.value, "error {} vs {}", r.tv.error, r.tv.value);
            prev = r.tv.value;
        }
    }

    #[test]
    fn tv_against_direct_density_inversion() {
        // invert both laws separately and integrate |p − q| directly
        let eps = EpsFn::Power { c: 0.5, gamma: 1.0 };
        let m = TailModel::dna_1d(1.5, 1.0, 0.5, 0.5, eps, eps, 1.0, 1.0).unwrap();
        let n = 8u64;
        let spec = SumSpectrum::new(&m, n).unwrap();
        let cfg = InversionConfig { nodes: 1 << 16, x_half: Some(200.0) };
        let exact = tv_1d_exact(&m, n, cfg).unwrap().tv;
        let p = invert_cf_to_density(|l| spec.log_cfs(l).unwrap().0.exp(), 1 << 16, 200.0).unwrap();
        let q = invert_cf_to_density(|l| spec.log_cfs(l).unwrap().1.exp(), 1 << 16, 200.0).unwrap();
        let direct = 0.5 * p.values.iter().zip(&q.values).map(|(a, b)| (a - b).abs()).sum::<f64>() * p.grid.dx;
        assert_relative_eq!(exact.value, direct, max_relative = 1e-6);
    }

    #[test]
    fn histogram_lb_sanity() {
        let m = TailModel::pareto(2, 1.5).unwrap();
        let s = ModelSampler::new(&m);
        let a = SampleBatch::generate(&s, 50_000, RngStream::new(1, 1));
        let b = SampleBatch::generate(&s, 50_000, RngStream::new(1, 2));
        let meta = DistanceMeta { n: 1, alpha: 1.5, model: m.to_text() };
        let part = Partition::from_batches(&a, &b, 16);
        let same = tv_histogram_lb(&a, &b, &part, meta.clone()).unwrap();
        assert!(same.value < 0.05, "identical laws gave {}", same.value);
        let shifted = SampleBatch {
            points: b.points.iter().map(|p| vec![p[0] + 1e6, p[1]]).collect(),
            ..b.clone()
        };
        let part = Partition { lo: vec![-50.0, -50.0], hi: vec![50.0, 50.0], bins: 16 };
        let far = tv_histogram_lb(&a, &shifted, &part, meta).unwrap();
        assert!(far.value > 0.95);
    }

    #[test]
    fn histogram_lb_below_exact_tv_in_1d() {
        let m = TailModel::pareto(1, 1.5).unwrap();
        let n = 16u64;
        let exact = tv_1d_exact(&m, n, InversionConfig { nodes: 1 << 16, x_half: None }).unwrap().tv.value;
        let sn = crate::sampling::NormalizedSum::new(&m, n).unwrap();
        let y = StableSampler::new(&m.limit_law().unwrap()).unwrap();
        let a = SampleBatch::generate(&sn, 100_000, RngStream::new(3, 1));
        let b = SampleBatch::generate(&y, 100_000, RngStream::new(3, 2));
        let part = Partition::from_batches(&a, &b, 64);
        let lb = tv_histogram_lb(&a, &b, &part, DistanceMeta { n, alpha: 1.5, model: m.to_text() }).unwrap();
        assert!(lb.value <= exact + 3.0 * lb.error + 0.01, "lb {} ± {} vs exact {exact}", lb.value, lb.error);
    }
}
