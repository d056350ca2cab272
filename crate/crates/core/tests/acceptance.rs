//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. Positional arguments filter criteria by
//! id prefix, e.g. `cargo test --test acceptance -- AC-4 P-3`.

use std::time::Instant;

use num_complex::Complex64;
use stablerate::decomposition::{certify_mixture, heavy_decompose, light_decompose, Decomposition};
use stablerate::rate::{dyadic, fit_loglog, headline_alpha1, headline_from, lambda_rate, monotone_from, pareto_exponent, run_sweep, upper_exponent, RateScenario, SweepMethod};
use stablerate::rng::{mc_means, RngStream};
use stablerate::sampling::{ModelSampler, NormalizedSum, Sampler, StableSampler};
use stablerate::semigroup::{
    apply_ops, apply_p, apply_q, coupling_cdf, d_bound, generator_error_probe, gradient_decay_probe, one_step_gap, Op, OperatorConfig,
};
use stablerate::spectral::{generator_apply, Atom, QuadConfig, SpectralMeasure, StableLaw};
use stablerate::tail::{EpsFn, TailModel};
use stablerate::testfn::TestFunction;
use stablerate::tv::{delta_limits, delta_n, tv_1d_exact, tv_histogram_lb, DistanceMeta, InversionConfig, Partition};
use stablerate::Result;

const SEED: u64 = 20_240_601;

// AC-1
const AC1_N: u64 = 1_000_000;
const AC1_REL: f64 = 0.01;
const AC1_SECS: f64 = 30.0;
// AC-2 / AC-3
const SWEEP_NODES: usize = 1 << 18;
const AC2_SLOPE_TOL: f64 = 0.1;
const AC2_SECS: f64 = 300.0;
const AC3_SECS: f64 = 300.0;
// AC-4
const AC4_SAMPLES: usize = 10_000_000;
const AC4_SLOPE: f64 = -4.0 / 3.0;
const AC4_SLOPE_TOL: f64 = 0.15;
const AC4_BAND: f64 = 4.0;
const AC4_SECS: f64 = 600.0;
// AC-5
const AC5_SAMPLES: usize = 1_000_000;
const AC5_BINS: usize = 50;
const AC5_SE: f64 = 3.0;
const AC5_QUAD_TOL: f64 = 1e-8;
const AC5_SECS: f64 = 180.0;
// AC-6
const AC6_EIGEN_TOL: f64 = 1e-6;
const AC6_SLOPE_TOL: f64 = 0.3;
const AC6_MC_SE: f64 = 4.0;
const AC6_SECS: f64 = 300.0;
// AC-7
const AC7_SAMPLES: usize = 1_000_000;
const AC7_SECS: f64 = 120.0;
// P-3
const P3_SLOPE_TOL: f64 = 0.2;

struct Line {
    pass: bool,
    text: String,
}

struct Report {
    lines: Vec<Line>,
}

impl Report {
    fn record(&mut self, id: &str, pass: bool, detail: String) {
        let text = format!("{} {id}: {detail}", if pass { "PASS" } else { "FAIL" });
        println!("{text}");
        self.lines.push(Line { pass, text });
    }

    fn error(&mut self, id: &str, e: stablerate::Error) {
        self.record(id, false, format!("error: {e}"));
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed().as_secs_f64())
}

fn ac1(r: &mut Report) -> Result<()> {
    let (delta, secs) = timed(|| delta_n(AC1_N, 1.0, 1));
    let delta = delta?;
    let lim = delta_limits(1.0, 1)?;
    let gap = ((delta - lim.printed) / lim.printed).abs();
    r.record(
        "AC-1",
        gap < AC1_REL && secs < AC1_SECS,
        format!("Δ_n at n=1e6 = {delta:.7}, closed-form limit 1/π² − 1/2 = {:.6}, rel gap {gap:.4} (tol {AC1_REL}), {secs:.2}s", lim.printed),
    );
    let gap_c = ((delta - lim.corrected) / lim.corrected).abs();
    r.record(
        "AC-1c",
        gap_c < AC1_REL,
        format!("same Δ_n against 2/π² − 1/2 = {:.7} (sphere normalization carried through): rel gap {gap_c:.2e}", lim.corrected),
    );
    Ok(())
}

fn ac2(r: &mut Report) -> Result<()> {
    let (out, secs) = timed(|| -> Result<Vec<(f64, f64, f64)>> {
        [1.5, 0.8, 1.0]
            .iter()
            .map(|&alpha| {
                let s = RateScenario::new(TailModel::pareto(1, alpha)?, dyadic(4, 14), SweepMethod::CfInversion { nodes: SWEEP_NODES }, SEED)?;
                let sweep = run_sweep(&s);
                let (n, d) = sweep.points();
                if n.len() != s.n_grid.len() {
                    return Err(stablerate::Error::Numeric { what: format!("α={alpha}: {} sweep points failed", s.n_grid.len() - n.len()), achieved: n.len() as f64 });
                }
                let fit = fit_loglog(&n, &d, false, SEED)?;
                Ok((alpha, fit.slope, pareto_exponent(alpha)?))
            })
            .collect()
    });
    let out = out?;
    let ok = out.iter().all(|(_, s, e)| (s - e).abs() <= AC2_SLOPE_TOL) && secs < AC2_SECS;
    let detail: Vec<String> = out.iter().map(|(a, s, e)| format!("α={a}: slope {s:.4} vs {e:.4}")).collect();
    r.record("AC-2", ok, format!("{} (tol ±{AC2_SLOPE_TOL}), {secs:.1}s", detail.join("; ")));
    Ok(())
}

fn ac3(r: &mut Report) -> Result<()> {
    let (rep, secs) = timed(|| headline_alpha1(&dyadic(4, 14), SWEEP_NODES, SEED));
    let rep = rep?;
    let ns: Vec<f64> = dyadic(4, 14).iter().map(|&n| n as f64).collect();
    let log_sq: Vec<f64> = ns.iter().map(|n| n.ln().powi(2) / n).collect();
    let inverse: Vec<f64> = ns.iter().map(|n| 0.12 / n).collect();
    let neg = headline_from(&ns, &log_sq, SEED)?;
    let pos = headline_from(&ns, &inverse, SEED)?;
    let ok = rep.verdict == Some(true) && neg.verdict == Some(false) && pos.verdict == Some(true) && secs < AC3_SECS;
    r.record(
        "AC-3",
        ok,
        format!(
            "real sweep verdict {:?} ('{}', n·d_n spread {:.3}, ln-exponent {:.3} CI [{:.3}, {:.3}]); synthetic n⁻¹(ln n)² → {:?}; synthetic n⁻¹ → {:?}; {secs:.1}s",
            rep.verdict, rep.verdict_text, rep.ratio_spread, rep.log_exponent, rep.log_exponent_ci.0, rep.log_exponent_ci.1, neg.verdict, pos.verdict
        ),
    );
    Ok(())
}

fn ac4(r: &mut Report) -> Result<()> {
    let t = Instant::now();
    let model = TailModel::pareto(1, 1.5)?;
    let f = TestFunction::cos_1d();
    let norms = f.norms();
    let mut ns = Vec::new();
    let mut gaps = Vec::new();
    let mut ratios = Vec::new();
    let mut conclusive = true;
    for n in dyadic(3, 10) {
        let cfg = OperatorConfig::new(&model, n, AC4_SAMPLES, SEED)?;
        let cdf = coupling_cdf(&cfg);
        let g = one_step_gap(&cfg, &f, &[0.0], cdf.as_ref())?;
        conclusive &= !g.inconclusive;
        let d = d_bound(n as f64, 1.5, model.gamma(), &norms, model.is_symmetric())?;
        ns.push(n as f64);
        gaps.push(g.value.abs());
        ratios.push(g.value.abs() / d);
    }
    let fit = fit_loglog(&ns, &gaps, false, SEED)?;
    let max = ratios.iter().cloned().fold(f64::MIN, f64::max);
    let min = ratios.iter().cloned().fold(f64::MAX, f64::min);
    let secs = t.elapsed().as_secs_f64();
    let ok = (fit.slope - AC4_SLOPE).abs() <= AC4_SLOPE_TOL && max / min <= AC4_BAND && conclusive && secs < AC4_SECS;
    r.record(
        "AC-4",
        ok,
        format!(
            "slope {:.4} (CI [{:.4}, {:.4}]) vs −4/3 ± {AC4_SLOPE_TOL}; |gap|/D in [{min:.3}, {max:.3}], spread {:.3} (band {AC4_BAND}); {AC4_SAMPLES} pairs per n; {secs:.1}s",
            fit.slope,
            fit.ci95.0,
            fit.ci95.1,
            max / min
        ),
    );
    Ok(())
}

fn ac5(r: &mut Report) -> Result<()> {
    let t = Instant::now();
    let light = light_decompose(&TailModel::pareto(1, 1.0)?)?;
    let p = light.p;
    let light = Decomposition::Light(light);
    let l_ok = certify_mixture(&light, AC5_SAMPLES, AC5_BINS, SEED, None)?;
    let l_bad = certify_mixture(&light, AC5_SAMPLES, AC5_BINS, SEED, Some(p - 0.1))?;

    let heavy = heavy_decompose(&TailModel::pareto(1, 0.5)?, 1.0)?;
    let (q_mc, q_se) = heavy.q_monte_carlo(AC5_SAMPLES, RngStream::new(SEED, 0x51));
    let (q, a_tilde) = (heavy.q, heavy.a_tilde);
    let heavy = Decomposition::Heavy(heavy);
    let h_ok = certify_mixture(&heavy, AC5_SAMPLES, AC5_BINS, SEED, None)?;
    let h_bad = certify_mixture(&heavy, AC5_SAMPLES, AC5_BINS, SEED, Some(q - 0.1))?;
    let secs = t.elapsed().as_secs_f64();

    let q_ok = (q_mc - 0.5).abs() <= AC5_SE * q_se && (q - 0.5).abs() <= AC5_QUAD_TOL;
    let a_ok = (a_tilde - 1.0).abs() <= AC5_QUAD_TOL;
    let ok = l_ok.passed && !l_bad.passed && h_ok.passed && !h_bad.passed && q_ok && a_ok && secs < AC5_SECS;
    r.record(
        "AC-5",
        ok,
        format!(
            "light p={p:.5}: χ² p-value {:.3} (control p−0.1: {:.2e}); heavy: χ² p-value {:.3} (control q−0.1: {:.2e}); q={q:.10}, MC {q_mc:.5} ± {q_se:.1e}; Ã={a_tilde:.10}; {secs:.1}s",
            l_ok.p_value, l_bad.p_value, h_ok.p_value, h_bad.p_value
        ),
    );
    Ok(())
}

fn eigen_cases() -> Result<Vec<(String, StableLaw, Vec<f64>, Vec<f64>, f64)>> {
    let c = (135f64).to_radians().cos();
    let s = (135f64).to_radians().sin();
    let w1 = 2f64.sqrt() - 1.0;
    let w2 = (1.0 - w1) / 2.0;
    let tri = SpectralMeasure::atoms(
        2,
        vec![
            Atom { theta: vec![1.0, 0.0], weight: w1 },
            Atom { theta: vec![c, s], weight: w2 },
            Atom { theta: vec![c, -s], weight: w2 },
        ],
    )?;
    Ok(vec![
        ("symmetric α=1.5".into(), StableLaw::symmetric_1d(1.5)?, vec![1.3], vec![0.4], 0.2),
        ("skewed α=1.5".into(), StableLaw::one_dim(1.5, 0.8, 0.2)?, vec![-0.7], vec![1.1], 0.0),
        ("skewed α=0.7".into(), StableLaw::one_dim(0.7, 0.3, 0.7)?, vec![2.0], vec![-0.5], 1.0),
        ("symmetric α=1".into(), StableLaw::symmetric_1d(1.0)?, vec![0.6], vec![0.3], -0.4),
        ("α=1 asymmetric atoms d=2".into(), StableLaw::new(1.0, tri.clone())?, vec![0.8, -0.5], vec![0.1, 0.2], 0.3),
        ("α=1.2 uniform circle".into(), StableLaw::new(1.2, SpectralMeasure::uniform(2)?)?, vec![0.5, 1.0], vec![-0.3, 0.0], 0.0),
    ])
}

fn ac6(r: &mut Report) -> Result<()> {
    let t = Instant::now();
    // L e^{i⟨λ,·⟩} = −Φ(λ) e^{i⟨λ,·⟩}, so L cos(⟨λ,·⟩ + φ)(x) = −Re[Φ(λ) e^{i(⟨λ,x⟩+φ)}]
    let mut worst_eigen: f64 = 0.0;
    for (_, law, lambda, x, phase) in eigen_cases()? {
        let f = TestFunction::Cos { freq: lambda.clone(), phase };
        let v = generator_apply(&law, &f, &x, &QuadConfig::default())?.value;
        let arg: f64 = lambda.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>() + phase;
        let expect = -(law.exponent(&lambda)? * Complex64::from_polar(1.0, arg)).re;
        worst_eigen = worst_eigen.max((v - expect).abs());
    }

    let quad = QuadConfig::default();
    let probe = |alpha: f64, f: &TestFunction, grid: Vec<u64>, strata: usize| -> Result<f64> {
        let model = TailModel::pareto(1, alpha)?;
        let mut ns = Vec::new();
        let mut vs = Vec::new();
        for n in grid {
            let cfg = OperatorConfig::new(&model, n, strata, SEED)?;
            let p = generator_error_probe(&cfg, f, &[0.0], coupling_cdf(&cfg).as_ref(), &quad)?;
            ns.push(n as f64);
            vs.push(p.value.abs());
        }
        Ok(fit_loglog(&ns, &vs, false, SEED)?.slope)
    };
    // |x|^{2.1}e^{−x²} is C² with a Hölder second derivative, so the n^{−2/α} order is attained
    let s15 = probe(1.5, &TestFunction::HolderPower { p: 2.1 }, dyadic(8, 14), 1_000_000)?;
    let s08 = probe(0.8, &TestFunction::cos_1d(), dyadic(3, 8), 4_000_000)?;

    let mut mc_ok = true;
    let mut worst_z: f64 = 0.0;
    let f = TestFunction::Cos { freq: vec![1.1], phase: 0.3 };
    for alpha in [0.8, 1.0, 1.5] {
        let cfg = OperatorConfig::new(&TailModel::pareto(1, alpha)?, 16, 400_000, SEED)?;
        let x = [0.25];
        let pair = apply_ops(&cfg, &f, &[Op::P(3), Op::P(5)], &x)?;
        let single = apply_p(&cfg, &f, 8, &x)?;
        let pq = apply_ops(&cfg, &f, &[Op::P(4), Op::Q(6)], &x)?;
        let qp = apply_ops(&cfg, &f, &[Op::Q(6), Op::P(4)], &x)?;
        let z1 = (pair.value - single.value).abs() / pair.std_err.hypot(single.std_err);
        let z2 = (pq.value - qp.value).abs() / pq.std_err.hypot(qp.std_err);
        worst_z = worst_z.max(z1).max(z2);
        mc_ok &= z1 < AC6_MC_SE && z2 < AC6_MC_SE;
        for m in [1, 7, 16] {
            mc_ok &= apply_p(&cfg, &f, m, &x)?.value.abs() <= 1.0 && apply_q(&cfg, &f, m, &x)?.value.abs() <= 1.0;
        }
        let c = TestFunction::Constant { value: 1.0 };
        mc_ok &= apply_p(&cfg, &c, 5, &x)?.value == 1.0 && apply_q(&cfg, &c, 5, &x)?.value == 1.0;
    }
    let secs = t.elapsed().as_secs_f64();
    let ok = worst_eigen <= AC6_EIGEN_TOL
        && (s15 + 2.0 / 1.5).abs() <= AC6_SLOPE_TOL
        && (s08 + 2.0).abs() <= AC6_SLOPE_TOL
        && mc_ok
        && secs < AC6_SECS;
    r.record(
        "AC-6",
        ok,
        format!(
            "eigen-identity max error {worst_eigen:.2e} (tol {AC6_EIGEN_TOL:.0e}); generator-error slopes {s15:.3} vs −4/3 and {s08:.3} vs −2 (tol ±{AC6_SLOPE_TOL}); composition/commutation max z {worst_z:.2} (< {AC6_MC_SE}), contraction and constants {}; {secs:.1}s",
            if mc_ok { "ok" } else { "violated" }
        ),
    );
    Ok(())
}

fn empirical_cf(s: &dyn Sampler, lambdas: &[Vec<f64>], n: usize, stream: RngStream) -> Vec<Complex64> {
    let k = lambdas.len();
    let d = s.dim();
    let m = mc_means(stream, n, 2 * k, |rng, out| {
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

fn frequencies(d: usize) -> Vec<Vec<f64>> {
    let base = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.5], [0.7, -0.7, 0.2], [-1.5, 0.3, 0.0], [2.0, -1.0, 1.0]];
    base.iter().map(|b| (0..d).map(|i| if d == 1 { b[0] * (1.0 + b[1]) } else { b[i.min(2)] }).collect()).collect()
}

fn normalized_sum_cf(model: &TailModel, n: u64, l: &[f64]) -> Result<Complex64> {
    let c = 1.0 / ((n as f64).powf(1.0 / model.alpha()) * model.sigma_scale()?);
    let omega = model.omega_shift(n)?;
    let scaled: Vec<f64> = l.iter().map(|v| v * c).collect();
    let shift: f64 = scaled.iter().zip(&omega).map(|(a, b)| a * b).sum();
    Ok((model.cf(&scaled)? * Complex64::from_polar(1.0, -shift)).powu(n as u32))
}

fn ac7(r: &mut Report) -> Result<()> {
    let t = Instant::now();
    let tol = 4.0 / (AC7_SAMPLES as f64).sqrt();
    let mut worst: (f64, String) = (0.0, String::new());
    let mut failures = Vec::new();
    let mut check = |name: String, s: &dyn Sampler, exact: &dyn Fn(&[f64]) -> Result<Complex64>, k: u64| -> Result<()> {
        let ls = frequencies(s.dim());
        let emp = empirical_cf(s, &ls, AC7_SAMPLES, RngStream::new(SEED, 0x700 + k));
        for (l, e) in ls.iter().zip(&emp) {
            let err = (e - exact(l)?).norm();
            if err > worst.0 {
                worst = (err, name.clone());
            }
            if err > tol {
                failures.push(format!("{name} at λ={l:?}: {err:.2e}"));
            }
        }
        Ok(())
    };

    let c = (135f64).to_radians().cos();
    let s = (135f64).to_radians().sin();
    let w1 = 2f64.sqrt() - 1.0;
    let w2 = (1.0 - w1) / 2.0;
    let tri = SpectralMeasure::atoms(
        2,
        vec![
            Atom { theta: vec![1.0, 0.0], weight: w1 },
            Atom { theta: vec![c, s], weight: w2 },
            Atom { theta: vec![c, -s], weight: w2 },
        ],
    )?;
    let laws = vec![
        ("stable α=1.5 skewed".to_string(), StableLaw::one_dim(1.5, 0.8, 0.2)?),
        ("stable α=0.7 skewed".to_string(), StableLaw::one_dim(0.7, 0.3, 0.7)?),
        ("stable α=1 symmetric".to_string(), StableLaw::symmetric_1d(1.0)?),
        ("stable α=1 asymmetric atoms d=2 (drift)".to_string(), StableLaw::new(1.0, tri)?),
        ("stable α=1.6 uniform circle".to_string(), StableLaw::new(1.6, SpectralMeasure::uniform(2)?)?),
        ("stable α=0.9 uniform sphere d=3".to_string(), StableLaw::new(0.9, SpectralMeasure::uniform(3)?)?),
    ];
    let mut k = 0;
    for (name, law) in &laws {
        let smp = StableSampler::new(law)?;
        check(name.clone(), &smp, &|l| law.cf(l), k)?;
        k += 1;
    }
    let models = vec![
        TailModel::pareto(1, 1.5)?,
        TailModel::pareto(2, 0.8)?,
        TailModel::pareto(3, 1.0)?,
        TailModel::dna_1d(1.3, 1.0, 0.7, 0.3, EpsFn::Power { c: 0.2, gamma: 1.0 }, EpsFn::Zero, 1.0, 1.0)?,
    ];
    for m in &models {
        let smp = ModelSampler::new(m);
        check(m.to_text(), &smp, &|l| m.cf(l), k)?;
        k += 1;
    }
    for (m, n) in [(TailModel::pareto(1, 1.5)?, 8u64), (TailModel::pareto(1, 0.7)?, 4)] {
        let smp = NormalizedSum::new(&m, n)?;
        check(format!("normalized sum n={n} of {}", m.to_text()), &smp, &|l| normalized_sum_cf(&m, n, l), k)?;
        k += 1;
    }
    let light = Decomposition::Light(light_decompose(&TailModel::pareto(1, 1.0)?)?);
    let heavy = Decomposition::Heavy(heavy_decompose(&TailModel::pareto(1, 0.5)?, 1.0)?);
    for d in [&light, &heavy] {
        let mix = d.mixture(d.switch_probability());
        let src = d.source().clone();
        check(mix.id(), &mix, &|l| src.cf(l), k)?;
        k += 1;
    }
    let secs = t.elapsed().as_secs_f64();
    let ok = failures.is_empty() && secs < AC7_SECS;
    let detail = if failures.is_empty() {
        format!("{k} samplers × 5 frequencies within 4/√N = {tol:.1e}; worst {:.2e} ({}); {secs:.1}s", worst.0, worst.1)
    } else {
        format!("{} probes exceed 4/√N = {tol:.1e}: {}", failures.len(), failures.join("; "))
    };
    r.record("AC-7", ok, detail);
    Ok(())
}

fn p1(r: &mut Report) -> Result<()> {
    let mut ok = true;
    let mut checked = 0;
    let mut critical = 0;
    for &alpha in &[0.3f64, 0.5, 0.8, 1.0, 1.2, 1.5, 1.9] {
        let crit = if alpha > 1.0 { 2.0 - alpha } else if alpha < 1.0 { 1.0 - alpha } else { 1.0 };
        for &gamma in &[0.2, 0.5, crit, 1.0, 2.0, f64::INFINITY] {
            for sym in [false, true] {
                let is_crit = (gamma - crit).abs() < 1e-12;
                let start = monotone_from(alpha, gamma, sym)?;
                let mut prev = f64::INFINITY;
                for k in 0..160 {
                    let v = lambda_rate(start * 1.3f64.powi(k), alpha, gamma, sym)?;
                    ok &= v <= prev * (1.0 + 1e-12);
                    prev = v;
                }
                // far out, the local power of Λ is the registry exponent, shifted by
                // ln(ln b/ln a)/ln(b/a) when the critical log factor is the leading term
                let (a, b) = (1e40, 1e44);
                let e = (lambda_rate(b, alpha, gamma, sym)? / lambda_rate(a, alpha, gamma, sym)?).ln() / (b / a).ln();
                let u = upper_exponent(alpha, gamma, sym)?;
                let log_lead = is_crit && lambda_rate(b, alpha, gamma, sym)? > 1.5 * b.powf(u);
                let expect = if log_lead { u + (b.ln() / a.ln()).ln() / (b / a).ln() } else { u };
                ok &= (e - expect).abs() < 1e-3;
                checked += 1;
                critical += usize::from(is_crit);
            }
        }
        if alpha != 1.0 {
            ok &= (upper_exponent(alpha, f64::INFINITY, true)? - pareto_exponent(alpha)?).abs() < 1e-15;
        }
    }
    r.record(
        "P-1",
        ok,
        format!("Λ non-increasing (from e^{{1/c}} at critical γ) and matching the exponent registry over {checked} (α, γ, symmetry) cases, {critical} critical"),
    );
    Ok(())
}

fn p2(r: &mut Report) -> Result<()> {
    let model = TailModel::pareto(2, 1.5)?;
    let limit = StableSampler::new(&model.limit_law()?)?;
    let samples = 200_000;
    let lb = |n: u64, k: u64| -> Result<(f64, f64)> {
        let sum = NormalizedSum::new(&model, n)?;
        let a = stablerate::sampling::SampleBatch::generate(&sum, samples, RngStream::new(SEED, 0x900 + k));
        let b = stablerate::sampling::SampleBatch::generate(&limit, samples, RngStream::new(SEED, 0x980 + k));
        let part = Partition { lo: vec![-6.0, -6.0], hi: vec![6.0, 6.0], bins: 24 };
        let e = tv_histogram_lb(&a, &b, &part, DistanceMeta { n, alpha: 1.5, model: model.to_text() })?;
        Ok((e.value, e.error))
    };
    let (lo_n, se_lo) = lb(4, 1)?;
    let (hi_n, se_hi) = lb(64, 2)?;
    let exact_1d = tv_1d_exact(&TailModel::pareto(1, 1.5)?, 64, InversionConfig::default())?.tv.value;
    let ok = hi_n <= lo_n + 3.0 * se_lo.hypot(se_hi);
    r.record(
        "P-2",
        ok,
        format!("d=2 histogram lower bound: n=4 {lo_n:.4} ± {se_lo:.4}, n=64 {hi_n:.4} ± {se_hi:.4} (non-increasing); d=1 exact TV at n=64 for reference {exact_1d:.4}"),
    );
    Ok(())
}

fn p3(r: &mut Report) -> Result<()> {
    let ms: Vec<u64> = dyadic(0, 10);
    let mut parts = Vec::new();
    let mut ok = true;
    for alpha in [1.5, 1.0, 0.8] {
        let cfg = OperatorConfig::new(&TailModel::pareto(1, alpha)?, 1024, 400_000, SEED)?;
        // the step must be sharp relative to the smallest smoothing scale (1/1024)^{1/α}
        let eps = 1e-2 * (1.0f64 / 1024.0).powf(1.0 / alpha);
        let f = TestFunction::Tanh { eps };
        let p = gradient_decay_probe(&cfg, &f, &ms, 1, &[-1.0, -0.5, 0.0, 0.5, 1.0])?;
        let slope = p.fit.as_ref().map(|f| f.slope).unwrap_or(f64::NAN);
        let p0 = gradient_decay_probe(&cfg, &f, &ms, 0, &[-1.0, -0.5, 0.0, 0.5, 1.0])?;
        let slope0 = p0.fit.as_ref().map(|f| f.slope).unwrap_or(f64::NAN);
        ok &= (slope + 1.0 / alpha).abs() <= P3_SLOPE_TOL && slope0.abs() <= P3_SLOPE_TOL && !p.inconclusive;
        parts.push(format!("α={alpha}: κ=1 slope {slope:.3} vs {:.3}, κ=0 slope {slope0:.3}", -1.0 / alpha));
    }
    r.record("P-3", ok, format!("{} (tol ±{P3_SLOPE_TOL})", parts.join("; ")));
    Ok(())
}

type Criterion = (&'static str, fn(&mut Report) -> Result<()>);

fn main() {
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let criteria: [Criterion; 10] = [
        ("AC-1", ac1),
        ("AC-2", ac2),
        ("AC-3", ac3),
        ("AC-4", ac4),
        ("AC-5", ac5),
        ("AC-6", ac6),
        ("AC-7", ac7),
        ("P-1", p1),
        ("P-2", p2),
        ("P-3", p3),
    ];
    let mut report = Report { lines: Vec::new() };
    let t = Instant::now();
    for (id, run) in criteria {
        if !filters.is_empty() && !filters.iter().any(|f| id.starts_with(f.as_str())) {
            continue;
        }
        if let Err(e) = run(&mut report) {
            report.error(id, e);
        }
    }
    let failed: Vec<&Line> = report.lines.iter().filter(|l| !l.pass).collect();
    println!(
        "acceptance: {} passed, {} failed, {:.1}s",
        report.lines.len() - failed.len(),
        failed.len(),
        t.elapsed().as_secs_f64()
    );
    for l in &failed {
        println!("  {}", l.text);
    }
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
