//! Spectral measures, strictly α-stable laws and their generator.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quad::{adaptive, osc_power_tail, GaussLegendre, QValue, Tol};
use crate::testfn::TestFunction;
use rand::Rng;
use rand_distr::StandardNormal;

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 2.0 {
        Ok(())
    } else {
        domain(format!("alpha must lie in (0, 2), got {alpha}"))
    }
}

/// ψ_α(t).
pub fn psi_alpha(t: f64, alpha: f64) -> Result<Complex64> {
    check_alpha(alpha)?;
    Ok(psi_unchecked(t, alpha))
}

pub(crate) fn psi_unchecked(t: f64, alpha: f64) -> Complex64 {
    if t == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let a = t.abs();
    let s = t.signum();
    if alpha == 1.0 {
        Complex64::new(a, a * s * 2.0 / PI * a.ln())
    } else {
        let m = a.powf(alpha);
        Complex64::new(m, -m * s * (FRAC_PI_2 * alpha).tan())
    }
}

/// ∫₀^∞ (1 − cos y) / y^{1+α} dy by adaptive quadrature.
///
/// On [0, 1] the substitution u = y^{2−α} removes the endpoint singularity;
/// on [1, ∞) the power part is exact and the cosine part is an oscillatory
/// tail evaluated on a rotated contour.
pub fn cos_moment(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let e = 1.0 / (2.0 - alpha);
    let head = |u: f64| {
        if u == 0.0 {
            return 0.5 * e;
        }
        let y = u.powf(e);
        if y == 0.0 {
            return 0.5 * e;
        }
        let h = 0.5 * y;
        let sinc = h.sin() / h;
        0.5 * sinc * sinc * e
    };
    let (h, _) = adaptive(head, 0.0, 1.0, Tol::new(1e-16, 1e-14))?;
    let tail = 1.0 / alpha - osc_power_tail(1.0 + alpha, 1.0, 1.0)?.re;
    Ok(h + tail)
}

/// d_α = (∫₀^∞ (1 − cos y) / y^{1+α} dy)⁻¹.
pub fn d_alpha(alpha: f64) -> Result<f64> {
    Ok(1.0 / cos_moment(alpha)?)
}

/// H(s) = ∫₀^s (1 − cos v) v^{−1−α} dv.
pub fn cos_head(alpha: f64, s: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if s <= 0.0 {
        return Ok(0.0);
    }
    if s <= 2.0 {
        return Ok(cos_head_series(alpha, s));
    }
    Ok(cos_moment(alpha)? - cos_tail(alpha, s)?)
}

pub(crate) fn cos_head_series(alpha: f64, s: f64) -> f64 {
    let s2 = s * s;
    let mut pow = s2; // s^{2k}
    let mut fact = 2.0; // (2k)!
    let mut acc = 0.0;
    for k in 1..40 {
        let kf = k as f64;
        let term = pow / (fact * (2.0 * kf - alpha));
        acc += if k % 2 == 1 { term } else { -term };
        if term < 1e-18 * acc.abs() {
            break;
        }
        pow *= s2;
        fact *= (2.0 * kf + 1.0) * (2.0 * kf + 2.0);
    }
    acc * s.powf(-alpha)
}

/// G(s) = ∫_s^∞ (1 − cos v) v^{−1−α} dv.
pub fn cos_tail(alpha: f64, s: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if s <= 0.0 {
        return cos_moment(alpha);
    }
    if s <= 2.0 {
        return Ok(cos_moment(alpha)? - cos_head_series(alpha, s));
    }
    Ok(s.powf(-alpha) / alpha - osc_power_tail(1.0 + alpha, 1.0, s)?.re)
}

/// Pointwise densities for spectral measures, relative to the uniform
/// probability measure on the sphere.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DensityKind {
    /// 1 + ½(d θ₁² − 1): symmetric, concentrated along the first axis.
    Axial,
    /// 1 + ½ θ₁: asymmetric.
    Skew,
}

impl DensityKind {
    pub fn name(self) -> &'static str {
        match self {
            DensityKind::Axial => "axial",
            DensityKind::Skew => "skew",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        match s {
            "axial" => Ok(DensityKind::Axial),
            "skew" => Ok(DensityKind::Skew),
            _ => Err(Error::Parse(format!("unknown density '{s}'"))),
        }
    }

    pub fn eval(self, theta: &[f64]) -> f64 {
        let d = theta.len() as f64;
        match self {
            DensityKind::Axial => 1.0 + 0.5 * (d * theta[0] * theta[0] - 1.0),
            DensityKind::Skew => 1.0 + 0.5 * theta[0],
        }
    }

    pub fn sup(self, dim: usize) -> f64 {
        match self {
            DensityKind::Axial => 1.0 + 0.5 * (dim as f64 - 1.0),
            DensityKind::Skew => 1.5,
        }
    }

    fn symmetric(self) -> bool {
        matches!(self, DensityKind::Axial)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub theta: Vec<f64>,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SphereRepr {
    Atoms(Vec<Atom>),
    UniformSphere,
    Density(DensityKind),
}

/// A finite measure on the unit sphere S^{d−1}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralMeasure {
    dim: usize,
    repr: SphereRepr,
    total_mass: f64,
}

const UNIT_TOL: f64 = 1e-12;

impl SpectralMeasure {
    pub fn atoms(dim: usize, atoms: Vec<Atom>) -> Result<Self> {
        if dim == 0 || atoms.is_empty() {
            return domain("atomic spectral measure needs d ≥ 1 and at least one atom");
        }
        let mut total = 0.0;
        for a in &atoms {
            if a.theta.len() != dim {
                return domain(format!("atom direction has dimension {}, expected {dim}", a.theta.len()));
            }
            let norm = a.theta.iter().map(|x| x * x).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > UNIT_TOL {
                return domain(format!("atom direction {:?} is not a unit vector", a.theta));
            }
            if !(a.weight > 0.0 && a.weight.is_finite()) {
                return domain(format!("atom weight {} must be positive", a.weight));
            }
            total += a.weight;
        }
        Ok(SpectralMeasure { dim, repr: SphereRepr::Atoms(atoms), total_mass: total })
    }

    /// Atoms with an explicitly declared total mass, which must match the weights.
    pub fn atoms_with_mass(dim: usize, atoms: Vec<Atom>, total_mass: f64) -> Result<Self> {
        let m = Self::atoms(dim, atoms)?;
        if (m.total_mass - total_mass).abs() > UNIT_TOL {
            return domain(format!("atom weights sum to {}, declared total mass {total_mass}", m.total_mass));
        }
        Ok(m)
    }

    /// w₊δ₊₁ + w₋δ₋₁ on the real line.
    pub fn two_point(w_plus: f64, w_minus: f64) -> Result<Self> {
        let mut atoms = Vec::new();
        if w_plus > 0.0 {
            atoms.push(Atom { theta: vec![1.0], weight: w_plus });
        }
        if w_minus > 0.0 {
            atoms.push(Atom { theta: vec![-1.0], weight: w_minus });
        }
        if w_plus < 0.0 || w_minus < 0.0 {
            return domain("two-point weights must be non-negative");
        }
        Self::atoms(1, atoms)
    }

    pub fn uniform(dim: usize) -> Result<Self> {
        if dim == 0 {
            return domain("dimension must be at least 1");
        }
        Ok(SpectralMeasure { dim, repr: SphereRepr::UniformSphere, total_mass: 1.0 })
    }

    /// A density with respect to the uniform probability measure. The caller
    /// declares the total mass; it is checked, never used to renormalize.
    pub fn density(dim: usize, kind: DensityKind, total_mass: f64) -> Result<Self> {
        if dim < 2 {
            return domain("density representation needs d ≥ 2");
        }
        let m = SpectralMeasure { dim, repr: SphereRepr::Density(kind), total_mass };
        let mass = m.integrate(|_| 1.0, &unit(dim, 0));
        if (mass - total_mass).abs() > 1e-9 {
            return domain(format!("density integrates to {mass}, declared total mass {total_mass}"));
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn repr(&self) -> &SphereRepr {
        &self.repr
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn is_symmetric(&self) -> bool {
        match &self.repr {
            SphereRepr::UniformSphere => true,
            SphereRepr::Density(k) => k.symmetric(),
            SphereRepr::Atoms(atoms) => atoms.iter().all(|a| {
                atoms.iter().any(|b| {
                    (a.weight - b.weight).abs() <= UNIT_TOL
                        && a.theta.iter().zip(&b.theta).all(|(x, y)| (x + y).abs() <= UNIT_TOL)
                })
            }),
        }
    }

    /// ∫ θ ν(dθ).
    pub fn mean_direction(&self) -> Vec<f64> {
        match &self.repr {
            SphereRepr::UniformSphere => vec![0.0; self.dim],
            SphereRepr::Atoms(atoms) => {
                let mut m = vec![0.0; self.dim];
                for a in atoms {
                    for (mi, t) in m.iter_mut().zip(&a.theta) {
                        *mi += a.weight * t;
                    }
                }
                m
            }
            SphereRepr::Density(_) => (0..self.dim)
                .map(|i| self.integrate(|th| th[i], &unit(self.dim, i)))
                .collect(),
        }
    }

    /// ∫ g(θ) ν(dθ). For continuous representations the rule is aligned with
    /// `axis`, so integrands that depend on ⟨axis, θ⟩ through |·|^α are
    /// resolved at their kink.
    pub fn integrate<V: QValue>(&self, g: impl Fn(&[f64]) -> V, axis: &[f64]) -> V {
        match &self.repr {
            SphereRepr::Atoms(atoms) => atoms.iter().fold(V::zero(), |acc, a| acc + g(&a.theta) * a.weight),
            SphereRepr::UniformSphere => sphere_average(self.dim, |th| g(th), axis),
            SphereRepr::Density(k) => {
                let k = *k;
                sphere_average(self.dim, |th| g(th) * k.eval(th), axis)
            }
        }
    }

    /// A discrete approximation used for sampling. Atoms are returned as is;
    /// continuous measures are replaced by `m` symmetric points with weights
    /// ρ(θ_j)/m (not renormalized).
    pub fn atomize(&self, m: usize) -> Vec<Atom> {
        match &self.repr {
            SphereRepr::Atoms(a) => a.clone(),
            SphereRepr::UniformSphere => {
                let pts = symmetric_points(self.dim, m);
                let n = pts.len() as f64;
                pts.into_iter().map(|t| Atom { theta: t, weight: 1.0 / n }).collect()
            }
            SphereRepr::Density(k) => {
                let pts = symmetric_points(self.dim, m);
                let n = pts.len() as f64;
                pts.into_iter()
                    .map(|t| {
                        let w = k.eval(&t) / n;
                        Atom { theta: t, weight: w }
                    })
                    .collect()
            }
        }
    }

    /// Default atomization size, 64·d.
    pub fn default_atoms(&self) -> usize {
        64 * self.dim
    }

    /// Text form: one row "θ_1 … θ_d w" per atom, or `uniform`, or `density:<name>`.
    pub fn to_text(&self) -> String {
        match &self.repr {
            SphereRepr::UniformSphere => "uniform".to_string(),
            SphereRepr::Density(k) => format!("density:{}", k.name()),
            SphereRepr::Atoms(atoms) => atoms
                .iter()
                .map(|a| {
                    let mut row: Vec<String> = a.theta.iter().map(|x| format!("{x:?}")).collect();
                    row.push(format!("{:?}", a.weight));
                    row.join(" ")
                })
                .collect::<Vec<_>>()
                .join("\n"),
        }
    }

    pub fn parse(text: &str, dim: usize) -> Result<Self> {
        let t = text.trim();
        if t == "uniform" {
            return Self::uniform(dim);
        }
        if let Some(name) = t.strip_prefix("density:") {
            return Self::density(dim, DensityKind::from_name(name.trim())?, 1.0);
        }
        let mut atoms = Vec::new();
        for line in t.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let vals: Vec<f64> = line
                .split_whitespace()
                .map(|x| x.parse::<f64>().map_err(|e| Error::Parse(format!("'{x}': {e}"))))
                .collect::<Result<_>>()?;
            if vals.len() != dim + 1 {
                return Err(Error::Parse(format!("atom row '{line}' needs {} numbers", dim + 1)));
            }
            atoms.push(Atom { theta: vals[..dim].to_vec(), weight: vals[dim] });
        }
        Self::atoms(dim, atoms)
    }
}

impl fmt::Display for SpectralMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

pub fn unit(dim: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    v[i] = 1.0;
    v
}

fn orthonormal_complement(a: &[f64]) -> Vec<Vec<f64>> {
    let d = a.len();
    let mut basis: Vec<Vec<f64>> = vec![a.to_vec()];
    for i in 0..d {
        let mut v = unit(d, i);
        for b in &basis {
            let p: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= p * bi;
            }
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-8 {
            v.iter_mut().for_each(|x| *x /= n);
            basis.push(v);
        }
        if basis.len() == d {
            break;
        }
    }
    basis.remove(0);
    basis
}

const SPHERE_TOL: Tol = Tol { abs: 1e-15, rel: 1e-12, max_intervals: 2000 };
const PHI_NODES: usize = 64;
const QMC_POINTS: usize = 20_000;

/// Average of g over the uniform probability measure on S^{d−1}.
fn sphere_average<V: QValue>(dim: usize, g: impl Fn(&[f64]) -> V, axis: &[f64]) -> V {
    let an = axis.iter().map(|x| x * x).sum::<f64>().sqrt();
    let a: Vec<f64> = if an > 0.0 { axis.iter().map(|x| x / an).collect() } else { unit(dim, 0) };
    match dim {
        1 => (g(&[1.0]) + g(&[-1.0])) * 0.5,
        2 => {
            let b = orthonormal_complement(&a).remove(0);
            let h = |phi: f64| {
                let (s, c) = phi.sin_cos();
                let th = [c * a[0] + s * b[0], c * a[1] + s * b[1]];
                g(&th)
            };
            let (v1, _) = adaptive(h, -FRAC_PI_2, FRAC_PI_2, SPHERE_TOL).unwrap_or((V::zero(), f64::NAN));
            let (v2, _) = adaptive(h, FRAC_PI_2, 3.0 * FRAC_PI_2, SPHERE_TOL).unwrap_or((V::zero(), f64::NAN));
            (v1 + v2) * (1.0 / (2.0 * PI))
        }
        3 => {
            let comp = orthonormal_complement(&a);
            let (b, c) = (&comp[0], &comp[1]);
            let inner = |u: f64| {
                let rho = (1.0 - u * u).max(0.0).sqrt();
                let mut acc = V::zero();
                for j in 0..PHI_NODES {
                    let phi = 2.0 * PI * (j as f64 + 0.5) / PHI_NODES as f64;
                    let (s, co) = phi.sin_cos();
                    let th = [
                        u * a[0] + rho * (co * b[0] + s * c[0]),
                        u * a[1] + rho * (co * b[1] + s * c[1]),
                        u * a[2] + rho * (co * b[2] + s * c[2]),
                    ];
                    acc = acc + g(&th);
                }
                acc * (1.0 / PHI_NODES as f64)
            };
            let (v1, _) = adaptive(inner, -1.0, 0.0, SPHERE_TOL).unwrap_or((V::zero(), f64::NAN));
            let (v2, _) = adaptive(inner, 0.0, 1.0, SPHERE_TOL).unwrap_or((V::zero(), f64::NAN));
            (v1 + v2) * 0.5
        }
        _ => {
            let pts = symmetric_points(dim, QMC_POINTS);
            let n = pts.len() as f64;
            pts.iter().fold(V::zero(), |acc, t| acc + g(t)) * (1.0 / n)
        }
    }
}

/// Deterministic, antipodally symmetric point sets of size ≈ m on S^{d−1}.
pub(crate) fn symmetric_points(dim: usize, m: usize) -> Vec<Vec<f64>> {
    let half = (m / 2).max(1);
    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(2 * half);
    match dim {
        1 => return vec![vec![1.0], vec![-1.0]],
        2 => {
            for j in 0..2 * half {
                let phi = PI * j as f64 / half as f64;
                pts.push(vec![phi.cos(), phi.sin()]);
            }
            return pts;
        }
        3 => {
            // Fibonacci lattice on the upper hemisphere, mirrored.
            let golden = PI * (3.0 - 5f64.sqrt());
            for j in 0..half {
                let z = (j as f64 + 0.5) / half as f64;
                let r = (1.0 - z * z).sqrt();
                let phi = golden * j as f64;
                pts.push(vec![r * phi.cos(), r * phi.sin(), z]);
            }
        }
        _ => {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5EED_5EED);
            for _ in 0..half {
                let mut v: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
                let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                v.iter_mut().for_each(|x| *x /= n);
                pts.push(v);
            }
        }
    }
    let mirrored: Vec<Vec<f64>> = pts.iter().map(|p| p.iter().map(|x| -x).collect()).collect();
    pts.extend(mirrored);
    pts
}

/// A strictly α-stable law S_α(ν).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StableLaw {
    alpha: f64,
    nu: SpectralMeasure,
    d_alpha: f64,
}

impl StableLaw {
    pub fn new(alpha: f64, nu: SpectralMeasure) -> Result<Self> {
        check_alpha(alpha)?;
        if alpha == 1.0 {
            let m = nu.mean_direction();
            let norm = m.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-10 {
                return domain(format!("α = 1 requires a mean-zero spectral measure (|∫θ dν| = {norm:e})"));
            }
        }
        let d_alpha = d_alpha(alpha)?;
        Ok(StableLaw { alpha, nu, d_alpha })
    }

    /// The law with ν = w₊δ₊₁ + w₋δ₋₁.
    pub fn one_dim(alpha: f64, w_plus: f64, w_minus: f64) -> Result<Self> {
        Self::new(alpha, SpectralMeasure::two_point(w_plus, w_minus)?)
    }

    pub fn symmetric_1d(alpha: f64) -> Result<Self> {
        Self::one_dim(alpha, 0.5, 0.5)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn nu(&self) -> &SpectralMeasure {
        &self.nu
    }

    pub fn dim(&self) -> usize {
        self.nu.dim
    }

    pub fn d_alpha(&self) -> f64 {
        self.d_alpha
    }

    /// ∫ ψ_α(⟨λ, θ⟩) ν(dθ).
    pub fn exponent(&self, lambda: &[f64]) -> Result<Complex64> {
        if lambda.len() != self.dim() {
            return domain(format!("λ has dimension {}, law has dimension {}", lambda.len(), self.dim()));
        }
        if lambda.iter().all(|x| *x == 0.0) {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let a = self.alpha;
        Ok(self.nu.integrate(|th| psi_unchecked(dot(lambda, th), a), lambda))
    }

    /// The characteristic function exp(−∫ψ_α(⟨λ,θ⟩)ν(dθ)).
    pub fn cf(&self, lambda: &[f64]) -> Result<Complex64> {
        Ok((-self.exponent(lambda)?).exp())
    }

    /// Real 1-D shortcut: ν = w₊δ₊₁ + w₋δ₋₁ exponent at λ.
    pub fn exponent_1d(&self, lambda: f64) -> Complex64 {
        match &self.nu.repr {
            SphereRepr::Atoms(atoms) if self.dim() == 1 => atoms
                .iter()
                .map(|at| psi_unchecked(lambda * at.theta[0], self.alpha) * at.weight)
                .sum(),
            _ => self.exponent(&[lambda]).unwrap_or_default(),
        }
    }

    /// Weights (w₊, w₋) of a one-dimensional law.
    pub fn skew_weights(&self) -> Option<(f64, f64)> {
        if self.dim() != 1 {
            return None;
        }
        match &self.nu.repr {
            SphereRepr::Atoms(atoms) => {
                let wp = atoms.iter().filter(|a| a.theta[0] > 0.0).map(|a| a.weight).sum();
                let wm = atoms.iter().filter(|a| a.theta[0] < 0.0).map(|a| a.weight).sum();
                Some((wp, wm))
            }
            _ => Some((0.5 * self.nu.total_mass, 0.5 * self.nu.total_mass)),
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Radial truncation and node counts for [`generator_apply`].
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct QuadConfig {
    pub r_max: f64,
    pub panel_width: f64,
    pub panel_nodes: usize,
    pub inner_rel_tol: f64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig { r_max: 1000.0, panel_width: 1.0, panel_nodes: 16, inner_rel_tol: 1e-12 }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GeneratorValue {
    pub value: f64,
    /// Bound on the contribution of radii beyond `r_max`.
    pub truncation_bound: f64,
}

/// L^{α,ν} f(x) by radial quadrature.
pub fn generator_apply(law: &StableLaw, f: &TestFunction, x: &[f64], quad: &QuadConfig) -> Result<GeneratorValue> {
    let d = law.dim();
    if x.len() != d {
        return domain("point dimension does not match the law");
    }
    let alpha = law.alpha;
    let gl = GaussLegendre::new(quad.panel_nodes);
    let fx = f.value(x);
    let grad = f.gradient(x);
    let panels = ((quad.r_max - 1.0) / quad.panel_width).ceil().max(1.0) as usize;
    let radial = |th: &[f64]| -> f64 {
        let dg = grad.as_ref().map(|g| dot(g, th)).unwrap_or(0.0);
        let inc = |r: f64, k: f64| f.increment(x, th, r, k);
        let tol = Tol::new(1e-15, quad.inner_rel_tol);
        let inner = if alpha > 1.0 {
            let e = 1.0 / (2.0 - alpha);
            adaptive(
                |u| {
                    if u == 0.0 {
                        return 0.5 * f.second_directional(x, th) * e;
                    }
                    let r = u.powf(e);
                    inc(r, 1.0) / (r * r) * e
                },
                0.0,
                1.0,
                tol,
            )
        } else if alpha == 1.0 {
            adaptive(
                |r| if r == 0.0 { 0.5 * f.second_directional(x, th) } else { inc(r, 1.0) / (r * r) },
                0.0,
                1.0,
                tol,
            )
        } else {
            let e = 1.0 / (1.0 - alpha);
            adaptive(
                |u| {
                    if u == 0.0 {
                        return dg * e;
                    }
                    let r = u.powf(e);
                    inc(r, 0.0) / r * e
                },
                0.0,
                1.0,
                tol,
            )
        };
        let inner = match inner {
            Ok((v, _)) => v,
            Err(_) => return f64::NAN,
        };
        let xs: Vec<f64> = x.to_vec();
        let outer: f64 = gl.composite(
            |r| {
                let p: Vec<f64> = xs.iter().zip(th).map(|(a, t)| a + r * t).collect();
                f.value(&p) * r.powf(-1.0 - alpha)
            },
            1.0,
            quad.r_max,
            panels,
        );
        let tail = match f {
            TestFunction::Cos { freq, phase } => shifted_cos_tail(dot(freq, x) + phase, dot(freq, th), quad.r_max, 1.0 + alpha),
            _ => 0.0,
        };
        let mut v = inner + outer + tail - fx / alpha;
        if alpha > 1.0 {
            v -= dg / (alpha - 1.0);
        }
        v
    };
    let axis = match f {
        TestFunction::Cos { freq, .. } => freq.clone(),
        _ => unit(d, 0),
    };
    let total = law.nu.integrate(radial, &axis);
    if !total.is_finite() {
        return Err(Error::Numeric { what: "generator inner radial quadrature".into(), achieved: f64::NAN });
    }
    let sup = f.norms()[0].unwrap_or(f64::INFINITY);
    let truncation_bound = match f {
        TestFunction::Cos { .. } => 0.0,
        _ => 2.0 * sup * law.d_alpha * law.nu.total_mass * quad.r_max.powf(-alpha) / alpha,
    };
    Ok(GeneratorValue { value: law.d_alpha * total, truncation_bound })
}

/// ∫_R^∞ cos(a + b r) r^{-s} dr for s > 1.
fn shifted_cos_tail(a: f64, b: f64, r0: f64, s: f64) -> f64 {
    if b == 0.0 {
        return a.cos() * r0.powf(1.0 - s) / (s - 1.0);
    }
    osc_power_tail(s, b, r0).map_or(f64::NAN, |z| (Complex64::from_polar(1.0, a) * z).re)
}
