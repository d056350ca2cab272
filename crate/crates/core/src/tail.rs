//! Heavy-tailed source laws in the normal domain of attraction.
//!
//! Every model is a mixture of radial laws R with tail
//! T(r) = P(R ≥ r) = min(1, (A + ε(r)) r^{−α}) attached to directions: a
//! uniform direction (Pareto), the two signs on the line (Dna1D) or a
//! spectral measure (CustomPolar). Because every registered ε is a sum of
//! powers, T is piecewise a finite power sum, so moments, truncated means and
//! the characteristic function reduce to closed forms and oscillatory tails.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;
use statrs::function::gamma::gamma;

use crate::error::{domain, Error, Result};
use crate::quad::osc_power_tail;
use crate::spectral::{check_alpha, cos_moment, dot, SpectralMeasure, SphereRepr, StableLaw};

/// Registry of correction terms ε(r).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum EpsFn {
    Zero,
    /// c · min(1, r^{−γ}).
    Power { c: f64, gamma: f64 },
}

impl EpsFn {
    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            EpsFn::Zero => 0.0,
            EpsFn::Power { c, gamma } => c * r.powf(-gamma).min(1.0),
        }
    }

    /// Parses `zero` or `power:c=<c>,gamma=<γ>`.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        if t == "zero" || t == "0" {
            return Ok(EpsFn::Zero);
        }
        let body = t
            .strip_prefix("power:")
            .ok_or_else(|| Error::Parse(format!("unknown ε function '{t}' (expected zero or power:c=..,gamma=..)")))?;
        let (mut c, mut g) = (None, None);
        for kv in body.split(',') {
            let (k, v) = kv.split_once('=').ok_or_else(|| Error::Parse(format!("bad ε parameter '{kv}'")))?;
            let v: f64 = v.trim().parse().map_err(|e| Error::Parse(format!("ε parameter '{kv}': {e}")))?;
            match k.trim() {
                "c" => c = Some(v),
                "gamma" => g = Some(v),
                other => return Err(Error::Parse(format!("unknown ε parameter '{other}'"))),
            }
        }
        match (c, g) {
            (Some(c), Some(gamma)) if gamma > 0.0 => Ok(EpsFn::Power { c, gamma }),
            _ => Err(Error::Parse(format!("ε '{t}' needs c and gamma > 0"))),
        }
    }

    pub fn to_text(&self) -> String {
        match self {
            EpsFn::Zero => "zero".into(),
            EpsFn::Power { c, gamma } => format!("power:c={c},gamma={gamma}"),
        }
    }
}

/// T(r) = Σ coef · r^{−power} on [lo, hi).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
    pub terms: Vec<(f64, f64)>,
}

impl Segment {
    fn tail(&self, r: f64) -> f64 {
        self.terms.iter().map(|(c, p)| c * r.powf(-p)).sum()
    }

    fn is_flat(&self) -> bool {
        self.terms.iter().all(|(_, p)| *p == 0.0)
    }
}

/// Law of a radius R > 0 with tail min(1, (A + ε(r)) r^{−α}).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RadialTail {
    alpha: f64,
    a: f64,
    eps: EpsFn,
    r_sat: f64,
    segments: Vec<Segment>,
}

fn int_pow(e: f64, lo: f64, hi: f64) -> f64 {
    // ∫_lo^hi r^e dr
    if hi <= lo {
        return 0.0;
    }
    if e == -1.0 {
        return (hi / lo).ln();
    }
    if hi.is_infinite() {
        debug_assert!(e < -1.0);
        return -lo.powf(e + 1.0) / (e + 1.0);
    }
    let q = e + 1.0;
    lo.powf(q) * (q * (hi / lo).ln()).exp_m1() / q
}

impl RadialTail {
    pub fn new(alpha: f64, a: f64, eps: EpsFn) -> Result<Self> {
        check_alpha(alpha)?;
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::Model(format!("A must be positive, got {a}")));
        }
        let unsat = |r: f64| (a + eps.eval(r)) * r.powf(-alpha);
        let r_sat = match eps {
            EpsFn::Zero => a.powf(1.0 / alpha),
            EpsFn::Power { c, gamma } => {
                if a + c <= 0.0 {
                    return Err(Error::Model(format!("A + c = {} must be positive", a + c)));
                }
                if a * alpha + c * (alpha + gamma) < 0.0 {
                    return Err(Error::Model("ε makes the tail increase beyond r = 1".into()));
                }
                let inner = (a + c).powf(1.0 / alpha);
                if inner < 1.0 {
                    inner
                } else {
                    let (mut lo, mut hi) = (1.0_f64, 2.0_f64);
                    while unsat(hi) > 1.0 {
                        lo = hi;
                        hi *= 2.0;
                    }
                    for _ in 0..200 {
                        let mid = 0.5 * (lo + hi);
                        if unsat(mid) > 1.0 {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                        if hi - lo <= 4.0 * f64::EPSILON * hi {
                            break;
                        }
                    }
                    hi
                }
            }
        };
        let mut segments = vec![Segment { lo: 0.0, hi: r_sat, terms: vec![(1.0, 0.0)] }];
        match eps {
            EpsFn::Zero => segments.push(Segment { lo: r_sat, hi: f64::INFINITY, terms: vec![(a, alpha)] }),
            EpsFn::Power { c, gamma } => {
                if r_sat < 1.0 {
                    segments.push(Segment { lo: r_sat, hi: 1.0, terms: vec![(a + c, alpha)] });
                }
                segments.push(Segment {
                    lo: r_sat.max(1.0),
                    hi: f64::INFINITY,
                    terms: vec![(a, alpha), (c, alpha + gamma)],
                });
            }
        }
        Ok(RadialTail { alpha, a, eps, r_sat, segments })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn eps(&self) -> EpsFn {
        self.eps
    }

    /// Smallest radius in the support.
    pub fn r_sat(&self) -> f64 {
        self.r_sat
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    fn power_segments(&self) -> impl Iterator<Item = &Segment> {
        self.segments.iter().filter(|s| !s.is_flat())
    }

    fn segment(&self, r: f64) -> &Segment {
        self.segments.iter().find(|s| r < s.hi).unwrap_or(self.segments.last().unwrap())
    }

    /// P(R ≥ r).
    pub fn tail(&self, r: f64) -> f64 {
        if r <= self.r_sat {
            return 1.0;
        }
        self.segment(r).tail(r).clamp(0.0, 1.0)
    }

    /// Lebesgue density of R.
    pub fn density(&self, r: f64) -> f64 {
        if r <= self.r_sat {
            return 0.0;
        }
        self.segment(r).terms.iter().map(|(c, p)| c * p * r.powf(-p - 1.0)).sum()
    }

    /// r^α T(r) − A, the correction actually realised by the law.
    pub fn effective_eps(&self, r: f64) -> f64 {
        r.powf(self.alpha) * self.tail(r) - self.a
    }

    /// The radius with P(R ≥ r) = t, for t ∈ (0, 1].
    pub fn inverse_tail(&self, t: f64) -> f64 {
        if t >= 1.0 {
            return self.r_sat;
        }
        for s in self.power_segments() {
            let at_hi = if s.hi.is_infinite() { 0.0 } else { s.tail(s.hi) };
            if t < at_hi {
                continue;
            }
            if s.terms.len() == 1 {
                let (c, p) = s.terms[0];
                return (c / t).powf(1.0 / p).clamp(s.lo, s.hi);
            }
            let (mut lo, mut hi) = (s.lo, if s.hi.is_finite() { s.hi } else { s.lo.max(1.0) * 2.0 });
            while s.tail(hi) > t {
                lo = hi;
                hi *= 2.0;
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if s.tail(mid) > t {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo <= 2.0 * f64::EPSILON * hi {
                    break;
                }
            }
            return 0.5 * (lo + hi);
        }
        f64::INFINITY
    }

    /// E[R^k · 1{lo ≤ R < hi}] in closed form (k real).
    pub fn partial_moment(&self, k: f64, lo: f64, hi: f64) -> Result<f64> {
        let mut acc = 0.0;
        for s in self.power_segments() {
            let (l, h) = (s.lo.max(lo), s.hi.min(hi));
            if h <= l {
                continue;
            }
            for (c, p) in &s.terms {
                if h.is_infinite() && k - p - 1.0 >= -1.0 {
                    return domain(format!("E[R^{k}] is infinite for tail index {p}"));
                }
                acc += c * p * int_pow(k - p - 1.0, l, h);
            }
        }
        Ok(acc)
    }

    /// E[R].
    pub fn mean(&self) -> Result<f64> {
        self.partial_moment(1.0, 0.0, f64::INFINITY)
    }

    /// E[1 − e^{iωR}].
    pub fn cf_deficit(&self, omega: f64) -> Result<Complex64> {
        if omega == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        if omega < 0.0 {
            return self.cf_deficit(-omega).map(|z| z.conj());
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for s in self.power_segments() {
            for (c, p) in &s.terms {
                let j = osc_deficit(*p, omega * s.lo, omega * s.hi)?;
                acc += j * (c * p * omega.powf(*p));
            }
        }
        Ok(acc)
    }

    /// E[e^{iωR}].
    pub fn cf(&self, omega: f64) -> Result<Complex64> {
        Ok(Complex64::new(1.0, 0.0) - self.cf_deficit(omega)?)
    }
}

/// ∫_a^b (1 − e^{iy}) y^{−p−1} dy for 0 < a < b ≤ ∞.
pub fn osc_deficit(p: f64, a: f64, b: f64) -> Result<Complex64> {
    if b.is_finite() {
        return Ok(osc_deficit(p, a, f64::INFINITY)? - osc_deficit(p, b, f64::INFINITY)?);
    }
    const SPLIT: f64 = 2.0;
    let far = |s: f64| -> Result<Complex64> {
        let z = osc_power_tail(p + 1.0, 1.0, s)?;
        Ok(Complex64::new(s.powf(-p) / p, 0.0) - z)
    };
    if a >= SPLIT {
        return far(a);
    }
    // 1 − e^{iy} = −Σ_{k≥1} (iy)^k / k!, integrated term by term over [a, 2]
    let mut head = Complex64::new(0.0, 0.0);
    let mut fact = 1.0;
    for k in 1..60 {
        fact *= k as f64;
        let m = int_pow(k as f64 - p - 1.0, a, SPLIT) / fact;
        let term = match k % 4 {
            1 => Complex64::new(0.0, -m),
            2 => Complex64::new(m, 0.0),
            3 => Complex64::new(0.0, m),
            _ => Complex64::new(-m, 0.0),
        };
        head += term;
        if m.abs() < 1e-18 * head.norm() {
            break;
        }
    }
    Ok(head + far(SPLIT)?)
}

/// Witness (ε₀, a, τ) that the law dominates ε₀·Lebesgue on B(a, τ).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LowerBound {
    pub eps0: f64,
    pub center: Vec<f64>,
    pub tau: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum ModelKind {
    Pareto { dim: usize },
    Dna1D { w_plus: f64, w_minus: f64, eps_plus: EpsFn, eps_minus: EpsFn },
    CustomPolar { nu: SpectralMeasure, eps: EpsFn },
}

/// A source law satisfying the polar tail assumption with constants (A, γ, K).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailModel {
    kind: ModelKind,
    alpha: f64,
    a: f64,
    gamma: f64,
    k: f64,
    llb: Option<LowerBound>,
    #[serde(skip)]
    radials: Vec<RadialTail>,
}

/// Scale σ and shift ω_{n,α} of the normalized sums.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Normalization {
    pub sigma: f64,
    pub alpha: f64,
    /// E[X] when α > 1.
    pub mean: Option<Vec<f64>>,
}

impl Normalization {
    /// ω_{n,α}; the α = 1 case needs the model for the truncated mean.
    pub fn omega(&self, model: &TailModel, n: u64) -> Result<Vec<f64>> {
        model.omega_shift(n)
    }
}

/// |S^{d−1}| = 2π^{d/2}/Γ(d/2).
pub fn sphere_area(d: usize) -> f64 {
    2.0 * PI.powf(d as f64 / 2.0) / gamma(d as f64 / 2.0)
}

const PROBE_POINTS: usize = 400;

fn probe_radii() -> impl Iterator<Item = f64> {
    (0..=PROBE_POINTS).map(|i| 10f64.powf(-4.0 + 10.0 * i as f64 / PROBE_POINTS as f64))
}

impl TailModel {
    /// Pareto law with P(|X| ≥ r) = r^{−α} for r ≥ 1 and a uniform direction.
    pub fn pareto(dim: usize, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if dim == 0 {
            return domain("dimension must be at least 1");
        }
        let radial = RadialTail::new(alpha, 1.0, EpsFn::Zero)?;
        let mut m = TailModel {
            kind: ModelKind::Pareto { dim },
            alpha,
            a: 1.0,
            gamma: f64::INFINITY,
            k: 1.0,
            llb: None,
            radials: vec![radial],
        };
        let mut center = vec![0.0; dim];
        center[0] = 1.5;
        let eps0 = 0.5 * m.density(&{
            let mut x = vec![0.0; dim];
            x[0] = 2.0;
            x
        })?;
        m.llb = Some(LowerBound { eps0, center, tau: 0.5 });
        Ok(m)
    }

    /// One-dimensional law with F(x) = 1 − w₊T₊(x) for x ≥ 0 and w₋T₋(−x) below.
    #[allow(clippy::too_many_arguments)]
    pub fn dna_1d(
        alpha: f64,
        a: f64,
        w_plus: f64,
        w_minus: f64,
        eps_plus: EpsFn,
        eps_minus: EpsFn,
        gamma: f64,
        k: f64,
    ) -> Result<Self> {
        check_alpha(alpha)?;
        if w_plus < 0.0 || w_minus < 0.0 || (w_plus + w_minus - 1.0).abs() > 1e-12 {
            return Err(Error::Model(format!("weights ({w_plus}, {w_minus}) must be non-negative and sum to 1")));
        }
        let radials = vec![RadialTail::new(alpha, a, eps_plus)?, RadialTail::new(alpha, a, eps_minus)?];
        let m = TailModel {
            kind: ModelKind::Dna1D { w_plus, w_minus, eps_plus, eps_minus },
            alpha,
            a,
            gamma,
            k,
            llb: None,
            radials,
        };
        m.verify_constants()?;
        Ok(m)
    }

    /// X = Rθ with θ ~ ν (a probability measure) independent of R.
    pub fn custom_polar(alpha: f64, a: f64, nu: SpectralMeasure, eps: EpsFn, gamma: f64, k: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if (nu.total_mass() - 1.0).abs() > 1e-9 {
            return Err(Error::Model(format!("ν must be a probability measure, mass {}", nu.total_mass())));
        }
        let radials = vec![RadialTail::new(alpha, a, eps)?];
        let m = TailModel { kind: ModelKind::CustomPolar { nu, eps }, alpha, a, gamma, k, llb: None, radials };
        m.verify_constants()?;
        Ok(m)
    }

    /// Attaches a caller-supplied lower-bound witness after checking it on a probe grid.
    pub fn with_llb(mut self, llb: LowerBound) -> Result<Self> {
        if llb.center.len() != self.dim() || !(llb.tau > 0.0) || !(llb.eps0 > 0.0) {
            return Err(Error::Witness("witness needs matching dimension, τ > 0 and ε₀ > 0".into()));
        }
        let min = self.min_density_on_ball(&llb.center, llb.tau)?;
        if min < llb.eps0 {
            return Err(Error::Witness(format!("density drops to {min} < ε₀ = {} on the witness ball", llb.eps0)));
        }
        self.llb = Some(llb);
        Ok(self)
    }

    /// ½ · (minimum density on B(center, τ)) as a witness.
    pub fn suggest_llb(&self, center: Vec<f64>, tau: f64) -> Result<LowerBound> {
        let min = self.min_density_on_ball(&center, tau)?;
        if !(min > 0.0) {
            return Err(Error::Witness("density vanishes on the proposed ball".into()));
        }
        Ok(LowerBound { eps0: 0.5 * min, center, tau })
    }

    fn min_density_on_ball(&self, center: &[f64], tau: f64) -> Result<f64> {
        let d = self.dim();
        let steps = if d == 1 { 2000 } else { 40 };
        let mut min = f64::INFINITY;
        let mut idx = vec![0usize; d];
        loop {
            let z: Vec<f64> = idx.iter().map(|&i| -1.0 + 2.0 * (i as f64 + 0.5) / steps as f64).collect();
            if dot(&z, &z) < 1.0 {
                let x: Vec<f64> = center.iter().zip(&z).map(|(c, zi)| c + tau * zi).collect();
                min = min.min(self.density(&x)?);
            }
            let mut j = 0;
            loop {
                if j == d {
                    return Ok(min);
                }
                idx[j] += 1;
                if idx[j] < steps {
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
        }
    }

    fn verify_constants(&self) -> Result<()> {
        if !(self.gamma > 0.0) || !(self.k >= 0.0) {
            return Err(Error::Model(format!("need γ > 0 and K ≥ 0 (γ={}, K={})", self.gamma, self.k)));
        }
        for (i, rt) in self.radials.iter().enumerate() {
            let mut prev = 1.0;
            for r in probe_radii() {
                let t = rt.tail(r);
                if t > prev + 1e-14 {
                    return Err(Error::Model(format!("tail {i} is not monotone near r = {r}")));
                }
                prev = t;
                let e = rt.effective_eps(r).abs();
                let bound = self.k * r.powf(-self.gamma).min(1.0);
                if e > bound * (1.0 + 1e-9) + 1e-12 {
                    return Err(Error::Model(format!(
                        "|ε({r})| = {e} exceeds the declared bound K(1∧r^-γ) = {bound}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn llb(&self) -> Option<&LowerBound> {
        self.llb.as_ref()
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            ModelKind::Pareto { dim } => *dim,
            ModelKind::Dna1D { .. } => 1,
            ModelKind::CustomPolar { nu, .. } => nu.dim(),
        }
    }

    /// Radial laws: one for polar models, (+, −) for Dna1D.
    pub fn radials(&self) -> &[RadialTail] {
        &self.radials
    }

    /// The spectral measure ν of the tail (a probability measure).
    pub fn nu(&self) -> Result<SpectralMeasure> {
        match &self.kind {
            ModelKind::Pareto { dim } => SpectralMeasure::uniform(*dim),
            ModelKind::Dna1D { w_plus, w_minus, .. } => SpectralMeasure::two_point(*w_plus, *w_minus),
            ModelKind::CustomPolar { nu, .. } => Ok(nu.clone()),
        }
    }

    /// The stable law S_α(ν) that the normalized sums approach.
    pub fn limit_law(&self) -> Result<StableLaw> {
        StableLaw::new(self.alpha, self.nu()?)
    }

    pub fn is_symmetric(&self) -> bool {
        match &self.kind {
            ModelKind::Pareto { .. } => true,
            ModelKind::Dna1D { w_plus, w_minus, eps_plus, eps_minus } => w_plus == w_minus && eps_plus == eps_minus,
            ModelKind::CustomPolar { nu, .. } => nu.is_symmetric(),
        }
    }

    /// P(|X| ≥ r).
    pub fn tail_prob(&self, r: f64) -> f64 {
        match &self.kind {
            ModelKind::Dna1D { w_plus, w_minus, .. } => {
                w_plus * self.radials[0].tail(r) + w_minus * self.radials[1].tail(r)
            }
            _ => self.radials[0].tail(r),
        }
    }

    /// Lebesgue density at x. Atomic spectral measures in d ≥ 2 have none.
    pub fn density(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return domain(format!("point has dimension {}, model has {}", x.len(), self.dim()));
        }
        let r = dot(x, x).sqrt();
        match &self.kind {
            ModelKind::Dna1D { w_plus, w_minus, .. } => Ok(if x[0] >= 0.0 {
                w_plus * self.radials[0].density(x[0])
            } else {
                w_minus * self.radials[1].density(-x[0])
            }),
            ModelKind::Pareto { dim } => Ok(self.radials[0].density(r) / (sphere_area(*dim) * r.powi(*dim as i32 - 1))),
            ModelKind::CustomPolar { nu, .. } => {
                let d = nu.dim();
                if r == 0.0 {
                    return Ok(0.0);
                }
                let theta: Vec<f64> = x.iter().map(|v| v / r).collect();
                let rho = match nu.repr() {
                    SphereRepr::UniformSphere => 1.0,
                    SphereRepr::Density(k) => k.eval(&theta),
                    SphereRepr::Atoms(atoms) if d == 1 => {
                        atoms.iter().filter(|a| a.theta[0] * x[0] > 0.0).map(|a| a.weight).sum::<f64>() * 2.0
                    }
                    SphereRepr::Atoms(_) => {
                        return Err(Error::Model("atomic spectral measure has no Lebesgue density".into()))
                    }
                };
                Ok(self.radials[0].density(r) * rho / (sphere_area(d) * r.powi(d as i32 - 1)))
            }
        }
    }

    /// F(x) of a one-dimensional model.
    pub fn cdf_1d(&self, x: f64) -> Result<f64> {
        match &self.kind {
            ModelKind::Dna1D { w_plus, w_minus, .. } => Ok(if x >= 0.0 {
                1.0 - w_plus * self.radials[0].tail(x)
            } else {
                w_minus * self.radials[1].tail(-x)
            }),
            _ if self.dim() == 1 => {
                let (wp, wm) = self.sign_weights()?;
                Ok(if x >= 0.0 { 1.0 - wp * self.radials[0].tail(x) } else { wm * self.radials[0].tail(-x) })
            }
            _ => domain("CDF is only defined in one dimension"),
        }
    }

    /// Inverse CDF of a one-dimensional model.
    pub fn quantile_1d(&self, u: f64) -> Result<f64> {
        let (wp, wm) = self.sign_weights()?;
        let (rp, rm) = match &self.kind {
            ModelKind::Dna1D { .. } => (&self.radials[0], &self.radials[1]),
            _ => (&self.radials[0], &self.radials[0]),
        };
        Ok(if u < wm { -rm.inverse_tail(u / wm) } else { rp.inverse_tail((1.0 - u) / wp) })
    }

    /// (P(X > 0), P(X < 0)) in one dimension.
    pub fn sign_weights(&self) -> Result<(f64, f64)> {
        if self.dim() != 1 {
            return domain("sign weights need a one-dimensional model");
        }
        match &self.kind {
            ModelKind::Dna1D { w_plus, w_minus, .. } => Ok((*w_plus, *w_minus)),
            ModelKind::Pareto { .. } => Ok((0.5, 0.5)),
            ModelKind::CustomPolar { nu, .. } => {
                let wp = nu.integrate(|t| if t[0] > 0.0 { 1.0 } else { 0.0 }, &[1.0]);
                Ok((wp, 1.0 - wp))
            }
        }
    }

    /// E[1 − e^{i⟨λ, X⟩}].
    pub fn cf_deficit(&self, lambda: &[f64]) -> Result<Complex64> {
        if lambda.len() != self.dim() {
            return domain(format!("λ has dimension {}, model has {}", lambda.len(), self.dim()));
        }
        match &self.kind {
            ModelKind::Dna1D { w_plus, w_minus, .. } => Ok(self.radials[0].cf_deficit(lambda[0])? * *w_plus
                + self.radials[1].cf_deficit(-lambda[0])? * *w_minus),
            _ => {
                let nu = self.nu()?;
                let rt = &self.radials[0];
                let err = std::cell::RefCell::new(None);
                let v = nu.integrate(
                    |th| match rt.cf_deficit(dot(lambda, th)) {
                        Ok(z) => z,
                        Err(e) => {
                            err.borrow_mut().get_or_insert(e.to_string());
                            Complex64::new(f64::NAN, f64::NAN)
                        }
                    },
                    lambda,
                );
                match err.into_inner() {
                    Some(e) => Err(Error::Numeric { what: format!("model CF: {e}"), achieved: f64::NAN }),
                    None => Ok(v),
                }
            }
        }
    }

    /// E[e^{i⟨λ, X⟩}].
    pub fn cf(&self, lambda: &[f64]) -> Result<Complex64> {
        Ok(Complex64::new(1.0, 0.0) - self.cf_deficit(lambda)?)
    }

    /// σ = (A α ∫₀^∞ (1 − cos y) y^{−1−α} dy)^{1/α}.
    pub fn sigma_scale(&self) -> Result<f64> {
        Ok((self.a * self.alpha * cos_moment(self.alpha)?).powf(1.0 / self.alpha))
    }

    pub fn normalization(&self) -> Result<Normalization> {
        let mean = if self.alpha > 1.0 { Some(self.truncated_mean(f64::INFINITY)?) } else { None };
        Ok(Normalization { sigma: self.sigma_scale()?, alpha: self.alpha, mean })
    }

    /// E[X 1{|X| ≤ t}].
    pub fn truncated_mean(&self, t: f64) -> Result<Vec<f64>> {
        let d = self.dim();
        if self.is_symmetric() {
            return Ok(vec![0.0; d]);
        }
        match &self.kind {
            ModelKind::Dna1D { w_plus, w_minus, .. } => {
                let p = self.radials[0].partial_moment(1.0, 0.0, t)?;
                let m = self.radials[1].partial_moment(1.0, 0.0, t)?;
                Ok(vec![w_plus * p - w_minus * m])
            }
            _ => {
                let m = self.radials[0].partial_moment(1.0, 0.0, t)?;
                Ok(self.nu()?.mean_direction().into_iter().map(|v| v * m).collect())
            }
        }
    }

    /// ω_{n,α}: E[X] for α > 1, E[X 1{|X| ≤ σn}] for α = 1, zero below.
    pub fn omega_shift(&self, n: u64) -> Result<Vec<f64>> {
        if n == 0 {
            return domain("n must be at least 1");
        }
        if self.alpha < 1.0 {
            return Ok(vec![0.0; self.dim()]);
        }
        if self.alpha > 1.0 {
            return self.truncated_mean(f64::INFINITY);
        }
        self.truncated_mean(self.sigma_scale()? * n as f64)
    }

    /// E[|X|^{−δ} ∧ 1] for δ ≥ 0.
    pub fn tilt_mean(&self, delta: f64) -> Result<f64> {
        let one = |rt: &RadialTail| -> Result<f64> {
            Ok(1.0 - rt.tail(1.0) + rt.partial_moment(-delta, 1.0, f64::INFINITY)?)
        };
        match &self.kind {
            ModelKind::Dna1D { w_plus, w_minus, .. } => {
                Ok(w_plus * one(&self.radials[0])? + w_minus * one(&self.radials[1])?)
            }
            _ => one(&self.radials[0]),
        }
    }

    /// Canonical text form, accepted by [`TailModel::parse`].
    pub fn to_text(&self) -> String {
        match &self.kind {
            ModelKind::Pareto { dim } => format!("pareto:d={dim},alpha={}", self.alpha),
            ModelKind::Dna1D { w_plus, w_minus, eps_plus, eps_minus } => format!(
                "dna:alpha={},A={},wp={w_plus},wm={w_minus},eps+={},eps-={},gamma={},K={}",
                self.alpha,
                self.a,
                eps_plus.to_text(),
                eps_minus.to_text(),
                self.gamma,
                self.k
            ),
            ModelKind::CustomPolar { nu, eps } => format!(
                "polar:d={},alpha={},A={},nu={},eps={},gamma={},K={}",
                nu.dim(),
                self.alpha,
                self.a,
                nu.to_text().replace('\n', ";"),
                eps.to_text(),
                self.gamma,
                self.k
            ),
        }
    }

    /// Parses `pareto:d=1,alpha=1.5`,
    /// `dna:alpha=1,A=1,wp=0.5,wm=0.5,eps=zero,gamma=1,K=1` (or separate `eps+`/`eps-`),
    /// `polar:d=2,alpha=1.5,A=1,nu=uniform,eps=zero,gamma=1,K=1`.
    /// Atom lists for `nu` use `;` between rows.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        let (kind, body) = t.split_once(':').ok_or_else(|| Error::Parse(format!("model '{t}' lacks a kind prefix")))?;
        let kv = split_params(body)?;
        let get = |k: &str| kv.iter().find(|(key, _)| key == k).map(|(_, v)| v.as_str());
        let num = |k: &str| -> Result<f64> {
            let v = get(k).ok_or_else(|| Error::Parse(format!("model '{t}' needs {k}")))?;
            v.parse::<f64>().map_err(|e| Error::Parse(format!("{k}='{v}': {e}")))
        };
        let eps_of = |k: &str| -> Result<EpsFn> {
            match get(k).or_else(|| get("eps")) {
                Some(v) => EpsFn::parse(v),
                None => Ok(EpsFn::Zero),
            }
        };
        match kind.trim() {
            "pareto" => TailModel::pareto(num("d")? as usize, num("alpha")?),
            "dna" => TailModel::dna_1d(
                num("alpha")?,
                num("A")?,
                num("wp")?,
                num("wm")?,
                eps_of("eps+")?,
                eps_of("eps-")?,
                num("gamma")?,
                num("K")?,
            ),
            "polar" => {
                let d = num("d")? as usize;
                let nu_text = get("nu").unwrap_or("uniform").replace(';', "\n");
                let nu = SpectralMeasure::parse(&nu_text, d)?;
                TailModel::custom_polar(num("alpha")?, num("A")?, nu, eps_of("eps")?, num("gamma")?, num("K")?)
            }
            other => Err(Error::Parse(format!("unknown model kind '{other}'"))),
        }
    }
}

/// Splits `k=v,k=v` where values may contain `:`, `=` and `,` inside `power:c=..,gamma=..`.
fn split_params(body: &str) -> Result<Vec<(String, String)>> {
    let mut out: Vec<(String, String)> = Vec::new();
    for piece in body.split(',') {
        let piece = piece.trim();
        if piece.is_empty() {
            continue;
        }
        match piece.split_once('=') {
            Some((k, v)) if !k.contains(':') && out.last().is_none_or(|(_, pv)| !pv.starts_with("power:") || pv.contains("gamma=")) => {
                out.push((k.trim().to_string(), v.trim().to_string()));
            }
            _ => match out.last_mut() {
                Some((_, v)) => {
                    v.push(',');
                    v.push_str(piece);
                }
                None => return Err(Error::Parse(format!("bad model parameter '{piece}'"))),
            },
        }
    }
    Ok(out)
}
