//! Mixture decompositions of a source law.
//!
//! Light: X = (1 − χ)X̂ + χU with χ ~ B(1, p), X̂ a smooth bump on B(a, τ).
//! Heavy: X = (1 − χ̃)X̃ + χ̃V with χ̃ ~ B(1, q), X̃ the law tilted by
//! |x|^{α−α̃} ∧ 1, which has tail index α̃.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{domain, Error, Result};
use crate::quad::{adaptive, Tol};
use crate::rng::{mc_mean, RngStream};
use crate::sampling::{ModelSampler, SampleBatch, Sampler};
use crate::spectral::dot;
use crate::tail::{sphere_area, LowerBound, TailModel};
use crate::tv::Partition;

fn bump(z2: f64, tau: f64) -> f64 {
    let g = tau * tau - z2;
    if g <= 0.0 {
        0.0
    } else {
        (-1.0 / g).exp()
    }
}

/// c = (∫_{B(a,τ)} e^{−1/(τ² − |z−a|²)} dz)⁻¹, independent of a.
pub fn bump_normalizer(dim: usize, tau: f64) -> Result<f64> {
    if !(tau > 0.0) || dim == 0 {
        return domain(format!("bump needs τ > 0 and d ≥ 1 (τ={tau}, d={dim})"));
    }
    let d = dim as f64;
    let (v, _) = adaptive(|r: f64| bump(r * r, tau) * r.powf(d - 1.0), 0.0, tau, Tol::new(1e-300, 1e-13))?;
    Ok(1.0 / (sphere_area(dim) * v))
}

/// Light-tailed decomposition built from a lower-bound witness.
#[derive(Clone, Debug, Serialize)]
pub struct LightDecomposition {
    pub p: f64,
    pub center: Vec<f64>,
    pub tau: f64,
    pub c: f64,
    pub eps0: f64,
    #[serde(skip)]
    source: ModelSampler,
}

impl LightDecomposition {
    pub fn source(&self) -> &TailModel {
        self.source.model()
    }

    pub fn bump_density(&self, x: &[f64]) -> f64 {
        let z: Vec<f64> = x.iter().zip(&self.center).map(|(a, b)| a - b).collect();
        self.c * bump(dot(&z, &z), self.tau)
    }

    /// X̂ by rejection from the uniform ball.
    pub fn draw_xhat(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        let d = self.center.len();
        let top = bump(0.0, self.tau);
        let mut z = vec![0.0; d];
        loop {
            for zi in z.iter_mut() {
                *zi = self.tau * (2.0 * rng.random::<f64>() - 1.0);
            }
            let z2 = dot(&z, &z);
            if z2 >= self.tau * self.tau {
                continue;
            }
            if rng.random::<f64>() * top < bump(z2, self.tau) {
                for ((o, c), zi) in out.iter_mut().zip(&self.center).zip(&z) {
                    *o = c + zi;
                }
                return;
            }
        }
    }

    /// Acceptance of a source draw into U: 1 − (1−p)p_X̂(x)/p_μ(x).
    fn u_acceptance(&self, x: &[f64]) -> f64 {
        let b = self.bump_density(x);
        if b == 0.0 {
            return 1.0;
        }
        let pm = self.source.model().density(x).unwrap_or(f64::NAN);
        1.0 - (1.0 - self.p) * b / pm
    }

    /// U by rejection from the source law.
    pub fn draw_u(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        loop {
            self.source.draw(rng, out);
            if rng.random::<f64>() < self.u_acceptance(out) {
                return;
            }
        }
    }
}

/// Builds the light decomposition from the model's witness.
pub fn light_decompose(model: &TailModel) -> Result<LightDecomposition> {
    let w: &LowerBound = model
        .llb()
        .ok_or_else(|| Error::Witness("model has no lower-bound witness".into()))?;
    let c = bump_normalizer(model.dim(), w.tau)?;
    let p = 1.0 - w.eps0 / c;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Witness(format!("p = 1 − ε₀/c = {p} is outside (0, 1)")));
    }
    let dec = LightDecomposition {
        p,
        center: w.center.clone(),
        tau: w.tau,
        c,
        eps0: w.eps0,
        source: ModelSampler::new(model),
    };
    // the U acceptance must be a probability on the witness ball
    let d = model.dim();
    let steps: usize = if d == 1 { 4001 } else { 41 };
    let mut idx = vec![0usize; d];
    'grid: loop {
        let z: Vec<f64> = idx.iter().map(|&i| -1.0 + 2.0 * (i as f64 + 0.5) / steps as f64).collect();
        if dot(&z, &z) < 1.0 {
            let x: Vec<f64> = dec.center.iter().zip(&z).map(|(c, zi)| c + dec.tau * zi).collect();
            model.density(&x)?;
            let a = dec.u_acceptance(&x);
            if !(0.0..=1.0).contains(&a) {
                return Err(Error::Witness(format!("U acceptance {a} at {x:?} leaves [0, 1]; ε₀ too large")));
            }
        }
        let mut j = 0;
        loop {
            if j == d {
                break 'grid;
            }
            idx[j] += 1;
            if idx[j] < steps {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
    }
    Ok(dec)
}

/// Heavy-tailed decomposition by tilting with |x|^{α−α̃} ∧ 1.
#[derive(Clone, Debug, Serialize)]
pub struct HeavyDecomposition {
    pub q: f64,
    pub alpha_tilde: f64,
    pub a_tilde: f64,
    /// K̃ with sup|ε̃(r)| ≤ K̃(1 ∧ r^{−γ}).
    pub eps_tilde_bound: f64,
    #[serde(skip)]
    source: ModelSampler,
}

impl HeavyDecomposition {
    pub fn source(&self) -> &TailModel {
        self.source.model()
    }

    fn weight(&self, x: &[f64]) -> f64 {
        let r = dot(x, x).sqrt();
        r.powf(self.source.model().alpha() - self.alpha_tilde).min(1.0)
    }

    pub fn draw_xtilde(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        loop {
            self.source.draw(rng, out);
            if rng.random::<f64>() < self.weight(out) {
                return;
            }
        }
    }

    pub fn draw_v(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        loop {
            self.source.draw(rng, out);
            if rng.random::<f64>() >= self.weight(out) {
                return;
            }
        }
    }

    /// Monte Carlo estimate of q = 1 − E[|X|^{α−α̃} ∧ 1] with its standard error.
    pub fn q_monte_carlo(&self, n: usize, stream: RngStream) -> (f64, f64) {
        let d = self.source.dim();
        let m = mc_mean(stream, n, |rng| {
            let mut x = vec![0.0; d];
            self.source.draw(rng, &mut x);
            1.0 - self.weight(&x)
        });
        (m.mean(), m.std_err())
    }
}

pub fn heavy_decompose(model: &TailModel, alpha_tilde: f64) -> Result<HeavyDecomposition> {
    let alpha = model.alpha();
    if !(alpha_tilde > alpha && alpha_tilde < 2.0) {
        return domain(format!("α̃ must lie in (α, 2) = ({alpha}, 2), got {alpha_tilde}"));
    }
    let q = 1.0 - model.tilt_mean(alpha_tilde - alpha)?;
    if !(q > 1e-12 && q < 1.0 - 1e-12) {
        return Err(Error::Degenerate(format!("q = {q} is numerically 0 or 1")));
    }
    let a = model.a();
    let (k, g) = (model.k(), model.gamma());
    let ratio = if g.is_infinite() { 1.0 } else { (g + 2.0 * alpha_tilde - alpha) / (g + alpha_tilde) };
    Ok(HeavyDecomposition {
        q,
        alpha_tilde,
        a_tilde: a * alpha / ((1.0 - q) * alpha_tilde),
        eps_tilde_bound: 2.0 * a / (1.0 - q) + k * ratio / (1.0 - q),
        source: ModelSampler::new(model),
    })
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Decomposition {
    Light(LightDecomposition),
    Heavy(HeavyDecomposition),
}

impl Decomposition {
    pub fn source(&self) -> &TailModel {
        match self {
            Decomposition::Light(l) => l.source(),
            Decomposition::Heavy(h) => h.source(),
        }
    }

    /// Probability of the second component (p or q).
    pub fn switch_probability(&self) -> f64 {
        match self {
            Decomposition::Light(l) => l.p,
            Decomposition::Heavy(h) => h.q,
        }
    }

    /// Sampler for the mixture with the given switch probability.
    pub fn mixture(&self, switch: f64) -> MixtureSampler<'_> {
        MixtureSampler { decomp: self, switch }
    }
}

/// Draws from (1 − s)·first + s·second, s the switch probability.
pub struct MixtureSampler<'a> {
    decomp: &'a Decomposition,
    switch: f64,
}

impl Sampler for MixtureSampler<'_> {
    fn dim(&self) -> usize {
        self.decomp.source().dim()
    }

    fn draw(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        let second = rng.random::<f64>() < self.switch;
        match (self.decomp, second) {
            (Decomposition::Light(l), false) => l.draw_xhat(rng, out),
            (Decomposition::Light(l), true) => l.draw_u(rng, out),
            (Decomposition::Heavy(h), false) => h.draw_xtilde(rng, out),
            (Decomposition::Heavy(h), true) => h.draw_v(rng, out),
        }
    }

    fn id(&self) -> String {
        let kind = match self.decomp {
            Decomposition::Light(_) => "light",
            Decomposition::Heavy(_) => "heavy",
        };
        format!("mixture:{kind},switch={},{}", self.switch, self.decomp.source().to_text())
    }
}

/// Outcome of a two-sample χ² test.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TestReport {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub passed: bool,
    pub n_samples: usize,
    pub cells_before: usize,
    pub cells_after: usize,
    pub partition: String,
    pub seed: u64,
    pub streams: (u64, u64),
}

const MIN_CELL: f64 = 10.0;
const LEVEL: f64 = 0.01;

/// Two-sample χ² over paired cell counts, merging neighbouring cells until
/// each merged cell holds at least 10 pooled observations.
pub fn chi2_two_sample(a: &[f64], b: &[f64]) -> (f64, usize, usize) {
    let na: f64 = a.iter().sum();
    let nb: f64 = b.iter().sum();
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut sa, mut sb) = (0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sa += x;
        sb += y;
        if sa + sb >= MIN_CELL {
            cells.push((sa, sb));
            sa = 0.0;
            sb = 0.0;
        }
    }
    if sa + sb > 0.0 {
        match cells.last_mut() {
            Some(last) => {
                last.0 += sa;
                last.1 += sb;
            }
            None => cells.push((sa, sb)),
        }
    }
    let (ka, kb) = ((nb / na).sqrt(), (na / nb).sqrt());
    let stat = cells.iter().map(|(x, y)| (ka * x - kb * y).powi(2) / (x + y)).sum();
    (stat, cells.len().saturating_sub(1), cells.len())
}

fn quantile_partition(model: &TailModel, bins: usize) -> Result<Vec<f64>> {
    (0..=bins).map(|k| model.quantile_1d(0.01 + 0.98 * k as f64 / bins as f64)).collect()
}

fn count_1d(edges: &[f64], xs: &[f64]) -> Vec<f64> {
    // cells: one per interval, then a final overflow cell
    let mut c = vec![0.0; edges.len()];
    for x in xs {
        let j = edges.partition_point(|e| e <= x);
        if j == 0 || j == edges.len() {
            c[edges.len() - 1] += 1.0;
        } else {
            c[j - 1] += 1.0;
        }
    }
    c
}

/// Certifies the mixture identity by a two-sample χ² test (level 0.01) of
/// `n` mixture draws against `n` direct draws, `bins` cells per axis plus overflow.
/// `switch` overrides the mixture's switch probability (negative controls).
pub fn certify_mixture(
    decomp: &Decomposition,
    n: usize,
    bins: usize,
    seed: u64,
    switch: Option<f64>,
) -> Result<TestReport> {
    if n < 100_000 {
        return domain("certification needs at least 10⁵ samples");
    }
    let model = decomp.source();
    let s = switch.unwrap_or(decomp.switch_probability());
    if !(0.0..=1.0).contains(&s) {
        return domain(format!("switch probability {s} outside [0, 1]"));
    }
    let mix = decomp.mixture(s);
    let direct = ModelSampler::new(model);
    let (sm, sd) = (RngStream::new(seed, 0x4D49), RngStream::new(seed, 0x4449));
    let a = SampleBatch::generate(&mix, n, sm);
    let b = SampleBatch::generate(&direct, n, sd);
    let (ca, cb, partition) = if model.dim() == 1 {
        let edges = quantile_partition(model, bins)?;
        let desc = format!("1d quantile cells [{:.4}, {:.4}] x{bins} + overflow", edges[0], edges[bins]);
        (count_1d(&edges, &a.first_coords()), count_1d(&edges, &b.first_coords()), desc)
    } else {
        let p = Partition::from_batches(&a, &b, bins);
        let desc = format!("{}d grid {bins}/axis on {:?}..{:?} + overflow", model.dim(), p.lo, p.hi);
        (p.counts(&a), p.counts(&b), desc)
    };
    let (statistic, dof, after) = chi2_two_sample(&ca, &cb);
    let p_value = if dof == 0 {
        1.0
    } else {
        ChiSquared::new(dof as f64)
            .map_err(|e| Error::Numeric { what: format!("χ² law: {e}"), achieved: dof as f64 })?
            .sf(statistic)
    };
    Ok(TestReport {
        statistic,
        dof,
        p_value,
        passed: p_value > LEVEL,
        n_samples: n,
        cells_before: ca.len(),
        cells_after: after,
        partition,
        seed,
        streams: (sm.stream_id, sd.stream_id),
    })
}

/// One row of the tail check r^{α̃}·P̂(|X̃| ≥ r) against Ã ± K̃r^{−γ}.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailCheckRow {
    pub r: f64,
    pub scaled_tail: f64,
    pub std_err: f64,
    pub a_tilde: f64,
    pub bound: f64,
    pub passed: bool,
}

pub fn heavy_tail_check(h: &HeavyDecomposition, radii: &[f64], n: usize, stream: RngStream) -> Vec<TailCheckRow> {
    let d = h.source.dim();
    let batch: Vec<f64> = crate::rng::mc_collect(stream, n, |rng| {
        let mut x = vec![0.0; d];
        h.draw_xtilde(rng, &mut x);
        dot(&x, &x).sqrt()
    });
    let g = h.source().gamma();
    radii
        .iter()
        .map(|&r| {
            let f = batch.iter().filter(|v| **v >= r).count() as f64 / n as f64;
            let scale = r.powf(h.alpha_tilde);
            let se = scale * (f * (1.0 - f) / n as f64).sqrt();
            let bound = h.eps_tilde_bound * r.powf(-g).min(1.0);
            let v = scale * f;
            TailCheckRow { r, scaled_tail: v, std_err: se, a_tilde: h.a_tilde, bound, passed: (v - h.a_tilde).abs() <= bound + 3.0 * se }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::GaussLegendre;
    use crate::tail::EpsFn;
    use approx::assert_relative_eq;

    #[test]
    fn bump_normalizer_examples() {
        // direct composite Gauss–Legendre on [−1, 1]
        let gl = GaussLegendre::new(30);
        let v: f64 = gl.composite(|z: f64| bump(z * z, 1.0), -1.0, 1.0, 400);
        assert_relative_eq!(v, 0.443_993_816_168_079_4, max_relative = 1e-9);
        assert_relative_eq!(bump_normalizer(1, 1.0).unwrap(), 1.0 / v, max_relative = 1e-9);
        let c: Vec<f64> = [0.5, 1.0, 2.0].iter().map(|t| bump_normalizer(1, *t).unwrap()).collect();
        assert!(c[0] > c[1] && c[1] > c[2]);
        // d = 2 by a tensor rule on the square
        let c2 = bump_normalizer(2, 0.8).unwrap();
        let v2: f64 = gl.composite(|x: f64| gl.composite(|y: f64| bump(x * x + y * y, 0.8), -0.8, 0.8, 60), -0.8, 0.8, 60);
        assert_relative_eq!(c2 * v2, 1.0, max_relative = 1e-8);
    }

    #[test]
    fn light_decomposition_of_pareto() {
        let m = TailModel::pareto(1, 1.0).unwrap();
        let l = light_decompose(&m).unwrap();
        assert!(l.p > 0.0 && l.p < 1.0);
        assert_relative_eq!(l.p, 1.0 - 0.0625 / bump_normalizer(1, 0.5).unwrap(), epsilon = 1e-15);
        let mut rng = RngStream::new(5, 0).rng();
        let mut x = [0.0];
        for _ in 0..10_000 {
            l.draw_xhat(&mut rng, &mut x);
            assert!((x[0] - 1.5).abs() < 0.5);
        }
    }

    #[test]
    fn oversized_witness_is_rejected() {
        let m = TailModel::pareto(1, 1.0).unwrap();
        let bad = LowerBound { eps0: 0.5, center: vec![1.5], tau: 0.5 };
        // bypass the model-level check to exercise the decomposition-level one
        let mut forced = m.clone();
        assert!(forced.clone().with_llb(bad.clone()).is_err());
        forced = forced.with_llb(LowerBound { eps0: 0.06, ..bad }).unwrap();
        assert!(light_decompose(&forced).is_ok());
    }

    #[test]
    fn heavy_decomposition_constants() {
        let m = TailModel::pareto(1, 0.5).unwrap();
        let h = heavy_decompose(&m, 1.0).unwrap();
        assert_relative_eq!(h.q, 0.5, epsilon = 1e-14);
        assert_relative_eq!(h.a_tilde, 1.0, epsilon = 1e-14);
        let (qm, se) = h.q_monte_carlo(200_000, RngStream::new(8, 0));
        assert!((qm - 0.5).abs() < 3.0 * se);
        assert!(heavy_decompose(&m, 0.4).is_err());
        assert!(heavy_decompose(&m, 2.0).is_err());
    }

    #[test]
    fn heavy_tail_invariant() {
        let eps = EpsFn::Power { c: 0.3, gamma: 0.8 };
        let m = TailModel::dna_1d(0.8, 1.0, 0.5, 0.5, eps, eps, 0.8, 1.0).unwrap();
        let h = heavy_decompose(&m, 1.4).unwrap();
        for row in heavy_tail_check(&h, &[2.0, 5.0, 10.0, 20.0], 200_000, RngStream::new(2, 2)) {
            assert!(row.passed, "{row:?}");
        }
    }

    #[test]
    fn chi2_null_and_merging() {
        let a = vec![100.0, 3.0, 2.0, 200.0, 0.0];
        let (s, dof, cells) = chi2_two_sample(&a, &a);
        assert_eq!(s, 0.0);
        assert_eq!(cells, 3);
        assert_eq!(dof, 2);
    }

    #[test]
    fn certification_detects_corrupted_switch() {
        let m = TailModel::pareto(1, 0.5).unwrap();
        let h = Decomposition::Heavy(heavy_decompose(&m, 1.0).unwrap());
        let ok = certify_mixture(&h, 200_000, 64, 17, None).unwrap();
        assert!(ok.passed, "{ok:?}");
        let bad = certify_mixture(&h, 200_000, 64, 17, Some(0.6)).unwrap();
        assert!(!bad.passed, "{bad:?}");
    }
}
