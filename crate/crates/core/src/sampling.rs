//! Samplers: strictly stable variates, heavy-tailed source laws and the
//! normalized sums S_n.
//!
//! Stable variates use the Chambers–Mallows–Stuck transform in the
//! S_α(1, β, 0) parametrization, whose characteristic function is
//! exp(−|λ|^α(1 − iβ sgn(λ) tan(πα/2))) for α ≠ 1 and
//! exp(−|λ|(1 + iβ(2/π) sgn(λ) ln|λ|)) for α = 1. With β = w₊ − w₋ both equal
//! exp(−w₊ψ_α(λ) − w₋ψ_α(−λ)), so no rescaling or shift is needed in 1-D.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::quad::KahanSum;
use crate::rng::{mc_collect, RngStream};
use crate::spectral::{check_alpha, Atom, SphereRepr, StableLaw};
use crate::tail::{ModelKind, RadialTail, TailModel};

/// A law that can be sampled into a buffer of length `dim()`.
pub trait Sampler: Sync {
    fn dim(&self) -> usize;
    fn draw(&self, rng: &mut ChaCha8Rng, out: &mut [f64]);
    fn id(&self) -> String;
}

/// One S_α(1, β, 0) variate; `beta` is w₊ − w₋.
pub fn cms<R: Rng + ?Sized>(alpha: f64, beta: f64, rng: &mut R) -> f64 {
    let v = PI * (rng.random::<f64>() - 0.5);
    let w: f64 = rng.sample(Exp1);
    if alpha == 1.0 {
        let a = FRAC_PI_2 + beta * v;
        return (a * v.tan() - beta * (FRAC_PI_2 * w * v.cos() / a).ln()) / FRAC_PI_2;
    }
    let t = beta * (FRAC_PI_2 * alpha).tan();
    let b = t.atan() / alpha;
    let s = (1.0 + t * t).powf(0.5 / alpha);
    let ab = alpha * (v + b);
    s * ab.sin() / v.cos().powf(1.0 / alpha) * ((v - ab).cos() / w).powf((1.0 - alpha) / alpha)
}

/// A variate with characteristic function exp(−w₊ψ_α(λ) − w₋ψ_α(−λ)).
pub fn stable_1d<R: Rng + ?Sized>(alpha: f64, w_plus: f64, w_minus: f64, rng: &mut R) -> Result<f64> {
    check_alpha(alpha)?;
    if w_plus < 0.0 || w_minus < 0.0 || (w_plus + w_minus - 1.0).abs() > 1e-12 {
        return domain(format!("skew weights ({w_plus}, {w_minus}) must be non-negative and sum to 1"));
    }
    if alpha == 1.0 && (w_plus - w_minus).abs() > 1e-12 {
        return domain("α = 1 needs w₊ = w₋");
    }
    Ok(cms(alpha, w_plus - w_minus, rng))
}

/// Uniform direction on S^{d−1}.
pub fn uniform_direction<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    loop {
        let mut n2 = 0.0;
        for x in out.iter_mut() {
            *x = rng.sample(StandardNormal);
            n2 += *x * *x;
        }
        if n2 > 1e-300 {
            let n = n2.sqrt();
            out.iter_mut().for_each(|x| *x /= n);
            return;
        }
    }
}

/// Sampler for S_α(ν) through Y = Σ_j w_j^{1/α} Z_j θ_j with one-sided Z_j.
///
/// For α = 1 the scaled one-sided variate w Z carries the shift
/// −(2/π) w ln w, so the drift +(2/π) Σ w_j ln(w_j) θ_j restores the target.
#[derive(Clone, Debug)]
pub struct StableSampler {
    law: StableLaw,
    atoms: Vec<Atom>,
    scales: Vec<f64>,
    drift: Vec<f64>,
    /// (w₊, w₋) when the law is one-dimensional, drawn directly.
    skew: Option<(f64, f64)>,
}

impl StableSampler {
    pub fn new(law: &StableLaw) -> Result<Self> {
        let m = law.nu().default_atoms();
        Self::with_atoms(law, m)
    }

    pub fn with_atoms(law: &StableLaw, m: usize) -> Result<Self> {
        let alpha = law.alpha();
        let d = law.dim();
        let atoms = law.nu().atomize(m);
        let scales: Vec<f64> = atoms.iter().map(|a| a.weight.powf(1.0 / alpha)).collect();
        let mut drift = vec![0.0; d];
        if alpha == 1.0 {
            for a in &atoms {
                for (di, t) in drift.iter_mut().zip(&a.theta) {
                    *di += 2.0 / PI * a.weight * a.weight.ln() * t;
                }
            }
        }
        let skew = match law.nu().repr() {
            SphereRepr::Atoms(_) if d == 1 && (law.nu().total_mass() - 1.0).abs() < 1e-12 => law.skew_weights(),
            _ => None,
        };
        Ok(StableSampler { law: law.clone(), atoms, scales, drift, skew })
    }

    pub fn law(&self) -> &StableLaw {
        &self.law
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn drift(&self) -> &[f64] {
        &self.drift
    }
}

impl Sampler for StableSampler {
    fn dim(&self) -> usize {
        self.law.dim()
    }

    fn draw(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        let alpha = self.law.alpha();
        if let Some((wp, wm)) = self.skew {
            out[0] = cms(alpha, wp - wm, rng);
            return;
        }
        out.copy_from_slice(&self.drift);
        for (a, s) in self.atoms.iter().zip(&self.scales) {
            let z = s * cms(alpha, 1.0, rng);
            for (o, t) in out.iter_mut().zip(&a.theta) {
                *o += z * t;
            }
        }
    }

    fn id(&self) -> String {
        format!("stable:alpha={},nu={}", self.law.alpha(), self.law.nu().to_text().replace('\n', ";"))
    }
}

/// Sampler for a [`TailModel`].
#[derive(Clone, Debug)]
pub struct ModelSampler {
    model: TailModel,
    radials: Vec<RadialTail>,
    /// Cumulative atom weights for atomic spectral measures.
    atom_cdf: Vec<f64>,
    density_sup: f64,
}

impl ModelSampler {
    pub fn new(model: &TailModel) -> Self {
        let mut atom_cdf = Vec::new();
        let mut density_sup = 1.0;
        if let ModelKind::CustomPolar { nu, .. } = model.kind() {
            match nu.repr() {
                SphereRepr::Atoms(atoms) => {
                    let mut acc = 0.0;
                    for a in atoms {
                        acc += a.weight;
                        atom_cdf.push(acc);
                    }
                }
                SphereRepr::Density(k) => density_sup = k.sup(nu.dim()),
                SphereRepr::UniformSphere => {}
            }
        }
        ModelSampler { model: model.clone(), radials: model.radials().to_vec(), atom_cdf, density_sup }
    }

    pub fn model(&self) -> &TailModel {
        &self.model
    }

    fn direction(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        match self.model.kind() {
            ModelKind::CustomPolar { nu, .. } => match nu.repr() {
                SphereRepr::UniformSphere => uniform_direction(rng, out),
                SphereRepr::Density(k) => loop {
                    uniform_direction(rng, out);
                    if rng.random::<f64>() * self.density_sup <= k.eval(out) {
                        return;
                    }
                },
                SphereRepr::Atoms(atoms) => {
                    let u = rng.random::<f64>() * self.atom_cdf.last().copied().unwrap_or(1.0);
                    let j = self.atom_cdf.partition_point(|c| *c <= u).min(atoms.len() - 1);
                    out.copy_from_slice(&atoms[j].theta);
                }
            },
            _ => uniform_direction(rng, out),
        }
    }
}

impl Sampler for ModelSampler {
    fn dim(&self) -> usize {
        self.model.dim()
    }

    fn draw(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        let u: f64 = 1.0 - rng.random::<f64>();
        match self.model.kind() {
            ModelKind::Dna1D { w_plus, w_minus, .. } => {
                // inverse CDF; the lowest w₋ of probability is the negative branch
                let v = 1.0 - u;
                out[0] = if v < *w_minus {
                    -self.radials[1].inverse_tail(v / w_minus)
                } else {
                    self.radials[0].inverse_tail((1.0 - v) / w_plus)
                };
            }
            _ => {
                let r = self.radials[0].inverse_tail(u);
                self.direction(rng, out);
                out.iter_mut().for_each(|x| *x *= r);
            }
        }
    }

    fn id(&self) -> String {
        self.model.to_text()
    }
}

/// Inverse-CDF draw from a one-dimensional model.
pub fn dna_draw(sampler: &ModelSampler, rng: &mut ChaCha8Rng) -> f64 {
    let mut x = [0.0];
    sampler.draw(rng, &mut x);
    x[0]
}

/// Pareto draw: R = U^{−1/α} with a uniform direction.
pub fn pareto_draw(sampler: &ModelSampler, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut x = vec![0.0; sampler.dim()];
    sampler.draw(rng, &mut x);
    x
}

/// Sampler for S_n = (Σᵢ(Xᵢ − ω_{n,α}))/(n^{1/α}σ).
#[derive(Clone, Debug)]
pub struct NormalizedSum {
    inner: ModelSampler,
    n: u64,
    sigma: f64,
    omega: Vec<f64>,
    scale: f64,
}

impl NormalizedSum {
    pub fn new(model: &TailModel, n: u64) -> Result<Self> {
        if n == 0 {
            return domain("n must be at least 1");
        }
        let sigma = model.sigma_scale()?;
        let omega = model.omega_shift(n)?;
        let scale = 1.0 / ((n as f64).powf(1.0 / model.alpha()) * sigma);
        Ok(NormalizedSum { inner: ModelSampler::new(model), n, sigma, omega, scale })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }
}

impl Sampler for NormalizedSum {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn draw(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        let d = self.dim();
        let mut sums = vec![KahanSum::new(); d];
        let mut x = vec![0.0; d];
        for _ in 0..self.n {
            self.inner.draw(rng, &mut x);
            for ((s, xi), w) in sums.iter_mut().zip(&x).zip(&self.omega) {
                s.add(xi - w);
            }
        }
        for (o, s) in out.iter_mut().zip(&sums) {
            *o = s.value() * self.scale;
        }
    }

    fn id(&self) -> String {
        format!("sum:n={},{}", self.n, self.inner.id())
    }
}

/// Regeneration data for a batch.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub source: String,
    pub n: usize,
    pub seed: u64,
    pub stream: u64,
}

/// A batch of sample points with provenance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleBatch {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
    pub provenance: Provenance,
}

impl SampleBatch {
    /// Draws `n` points deterministically in shard order.
    pub fn generate(sampler: &dyn Sampler, n: usize, stream: RngStream) -> Self {
        let d = sampler.dim();
        let points = mc_collect(stream, n, |rng| {
            let mut x = vec![0.0; d];
            sampler.draw(rng, &mut x);
            x
        });
        SampleBatch {
            dim: d,
            points,
            provenance: Provenance { source: sampler.id(), n, seed: stream.master_seed, stream: stream.stream_id },
        }
    }

    /// First coordinates of every point.
    pub fn first_coords(&self) -> Vec<f64> {
        self.points.iter().map(|p| p[0]).collect()
    }

    /// CSV with a `#` provenance header and one row per point.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let p = &self.provenance;
        writeln!(w, "# source={} n={} seed={} stream={}", p.source, p.n, p.seed, p.stream)?;
        let header: Vec<String> = (1..=self.dim).map(|i| format!("x{i}")).collect();
        writeln!(w, "{}", header.join(","))?;
        for pt in &self.points {
            let row: Vec<String> = pt.iter().map(|x| format!("{x:e}")).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn check(&self) -> Result<()> {
        if self.points.iter().any(|p| p.len() != self.dim) {
            return Err(Error::Numeric { what: "batch point dimension".into(), achieved: f64::NAN });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{mc_means, RngStream};
    use crate::spectral::SpectralMeasure;
    use crate::tail::EpsFn;
    use num_complex::Complex64;

    fn empirical_cf(s: &dyn Sampler, lambdas: &[Vec<f64>], n: usize, seed: u64) -> Vec<Complex64> {
        let k = lambdas.len();
        let d = s.dim();
        let m = mc_means(RngStream::new(seed, 1), n, 2 * k, |rng, out| {
            let mut x = vec![0.0; d];
            s.draw(rng, &mut x);
            for (j, l) in lambdas.iter().enumerate() {
                let t: f64 = l.iter().zip(&x).map(|(a, b)| a * b).sum();
                out[2 * j] = t.cos();
                out[2 * j + 1] = t.sin();
            }
        });
        (0..k).map(|j| Complex64::new(m[2 * j].mean(), m[2 * j + 1].mean())).collect()
    }

    #[test]
    fn stable_1d_matches_cf() {
        let n = 200_000;
        let tol = 4.0 / (n as f64).sqrt();
        for (alpha, wp) in [(1.5, 0.5), (0.7, 0.8), (1.0, 0.5), (1.3, 0.2)] {
            let law = StableLaw::one_dim(alpha, wp, 1.0 - wp).unwrap();
            let s = StableSampler::new(&law).unwrap();
            let ls: Vec<Vec<f64>> = [-2.0, -0.5, 0.5, 1.0, 2.0].iter().map(|x| vec![*x]).collect();
            let emp = empirical_cf(&s, &ls, n, 3);
            for (l, e) in ls.iter().zip(&emp) {
                let exact = law.cf(l).unwrap();
                assert!((e - exact).norm() < tol, "α={alpha} w₊={wp} λ={l:?}: {e} vs {exact}");
            }
        }
    }

    #[test]
    fn one_sided_stable_is_positive() {
        let mut rng = RngStream::new(1, 0).rng();
        for _ in 0..100_000 {
            assert!(stable_1d(0.5, 1.0, 0.0, &mut rng).unwrap() > 0.0);
        }
        assert!(stable_1d(1.0, 0.7, 0.3, &mut rng).is_err());
    }

    #[test]
    fn multivariate_atoms_match_cf_including_alpha_one_drift() {
        // mean-zero but asymmetric atoms, so the α = 1 drift is non-trivial
        let c = (135f64).to_radians().cos();
        let s = (135f64).to_radians().sin();
        let w1 = 2f64.sqrt() - 1.0;
        let w2 = (1.0 - w1) / 2.0;
        let atoms = vec![
            Atom { theta: vec![1.0, 0.0], weight: w1 },
            Atom { theta: vec![c, s], weight: w2 },
            Atom { theta: vec![c, -s], weight: w2 },
        ];
        let nu = SpectralMeasure::atoms(2, atoms).unwrap();
        assert!(nu.mean_direction().iter().all(|x| x.abs() < 1e-12));
        let n = 200_000;
        let tol = 4.0 / (n as f64).sqrt();
        for alpha in [1.0, 1.6] {
            let law = StableLaw::new(alpha, nu.clone()).unwrap();
            let smp = StableSampler::new(&law).unwrap();
            if alpha == 1.0 {
                assert!(smp.drift()[0].abs() > 0.05);
            }
            let ls = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.7, 0.7], vec![-1.5, 0.3], vec![2.0, -1.0]];
            let emp = empirical_cf(&smp, &ls, n, 5);
            for (l, e) in ls.iter().zip(&emp) {
                let exact = law.cf(l).unwrap();
                assert!((e - exact).norm() < tol, "α={alpha} λ={l:?}: {e} vs {exact}");
            }
        }
    }

    #[test]
    fn uniform_sphere_atomization_passes_cf_probes() {
        let n = 100_000;
        let tol = 4.0 / (n as f64).sqrt();
        for (d, alpha) in [(2usize, 1.5), (3, 1.0), (3, 0.8)] {
            let law = StableLaw::new(alpha, SpectralMeasure::uniform(d).unwrap()).unwrap();
            let smp = StableSampler::new(&law).unwrap();
            assert!(smp.drift().iter().all(|x| x.abs() < 1e-12));
            let mut ls = vec![vec![0.0; d]; 3];
            ls[0][0] = 1.0;
            ls[1][d - 1] = 2.0;
            ls[2].iter_mut().for_each(|x| *x = 0.6);
            let emp = empirical_cf(&smp, &ls, n, 9);
            for (l, e) in ls.iter().zip(&emp) {
                let exact = law.cf(l).unwrap();
                assert!((e - exact).norm() < tol, "d={d} α={alpha} λ={l:?}: {e} vs {exact}");
            }
        }
    }

    #[test]
    fn pareto_draws() {
        let m = TailModel::pareto(3, 1.2).unwrap();
        let s = ModelSampler::new(&m);
        let b = SampleBatch::generate(&s, 200_000, RngStream::new(7, 0));
        assert!(b.points.iter().all(|p| p.iter().map(|x| x * x).sum::<f64>() >= 1.0 - 1e-12));
        let frac = b.points.iter().filter(|p| p.iter().map(|x| x * x).sum::<f64>() >= 4.0).count() as f64 / 2e5;
        let exact = 2f64.powf(-1.2);
        let se = (exact * (1.0 - exact) / 2e5).sqrt();
        assert!((frac - exact).abs() < 3.0 * se);
        for i in 0..3 {
            let dir: Vec<f64> = b
                .points
                .iter()
                .map(|p| p[i] / p.iter().map(|x| x * x).sum::<f64>().sqrt())
                .collect();
            let mean = dir.iter().sum::<f64>() / dir.len() as f64;
            let se = (1.0 / 3.0 / dir.len() as f64).sqrt();
            assert!(mean.abs() < 3.0 * se);
        }
    }

    #[test]
    fn dna_draws_follow_cdf() {
        let eps = EpsFn::Power { c: 1.0, gamma: 1.0 };
        let m = TailModel::dna_1d(1.0, 1.0, 0.6, 0.4, eps, EpsFn::Zero, 1.0, 1.0).unwrap();
        let s = ModelSampler::new(&m);
        let mut xs = SampleBatch::generate(&s, 100_000, RngStream::new(11, 0)).first_coords();
        xs.sort_by(|a, b| a.total_cmp(b));
        let n = xs.len() as f64;
        let ks = xs
            .iter()
            .enumerate()
            .map(|(i, x)| {
                let f = m.cdf_1d(*x).unwrap();
                (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks < 1.63 / n.sqrt(), "KS = {ks}");
    }

    #[test]
    fn symmetric_dna_median_is_zero() {
        let m = TailModel::dna_1d(1.5, 1.0, 0.5, 0.5, EpsFn::Zero, EpsFn::Zero, 1.0, 1.0).unwrap();
        assert_eq!(m.quantile_1d(0.5).unwrap(), m.radials()[0].r_sat());
        let s = ModelSampler::new(&m);
        let xs = SampleBatch::generate(&s, 100_000, RngStream::new(2, 0)).first_coords();
        let neg = xs.iter().filter(|x| **x < 0.0).count() as f64 / 1e5;
        assert!((neg - 0.5).abs() < 3.0 * (0.25f64 / 1e5).sqrt());
    }

    #[test]
    fn normalized_sum_n1_is_scaled_draw() {
        let m = TailModel::pareto(1, 1.5).unwrap();
        let s1 = NormalizedSum::new(&m, 1).unwrap();
        let plain = ModelSampler::new(&m);
        let mut r1 = RngStream::new(4, 0).rng();
        let mut r2 = RngStream::new(4, 0).rng();
        let (mut a, mut b) = ([0.0], [0.0]);
        for _ in 0..100 {
            s1.draw(&mut r1, &mut a);
            plain.draw(&mut r2, &mut b);
            approx::assert_relative_eq!(a[0], b[0] / s1.sigma(), max_relative = 1e-14);
        }
    }

    #[test]
    fn normalized_sum_approaches_stable_cf() {
        let m = TailModel::pareto(1, 1.5).unwrap();
        let s = NormalizedSum::new(&m, 256).unwrap();
        let emp = empirical_cf(&s, &[vec![1.0]], 20_000, 6)[0];
        assert!((emp - Complex64::new((-1f64).exp(), 0.0)).norm() < 0.03);
    }

    #[test]
    fn batches_are_reproducible_and_export() {
        let m = TailModel::pareto(2, 0.9).unwrap();
        let s = ModelSampler::new(&m);
        let a = SampleBatch::generate(&s, 1000, RngStream::new(99, 3));
        let b = SampleBatch::generate(&s, 1000, RngStream::new(99, 3));
        assert_eq!(a, b);
        a.check().unwrap();
        let mut buf = Vec::new();
        a.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# source=pareto:d=2,alpha=0.9 n=1000 seed=99 stream=3"));
        assert_eq!(text.lines().count(), 1002);
    }
}
