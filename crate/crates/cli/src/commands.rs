//! One function per subcommand. Each resolves its config block (flags over
//! file over defaults), stores the resolved block back into the config so the
//! hash covers every effective setting, runs the library operation and writes
//! artifacts.

use std::path::Path;

use serde::Serialize;
use serde_json::json;
use stablerate::decomposition::{certify_mixture, heavy_decompose, heavy_tail_check, light_decompose, Decomposition};
use stablerate::rate::{fit_loglog, headline_from, pareto_exponent, run_sweep, upper_exponent, RateFit, RateScenario, SweepMethod};
use stablerate::rng::RngStream;
use stablerate::sampling::{ModelSampler, NormalizedSum, SampleBatch, StableSampler};
use stablerate::semigroup::{coupling_cdf, d_bound, generator_error_probe, gradient_decay_probe, one_step_gap, OperatorConfig};
use stablerate::spectral::QuadConfig;
use stablerate::tail::{ModelKind, TailModel};
use stablerate::tv::{delta_limits, delta_table, tv_1d_exact, tv_histogram_lb, DistanceMeta, InversionConfig, Partition};

use crate::config::{DecompositionBlock, DeltaBlock, ExperimentConfig, ProbeBlock, SampleBlock, SweepBlock, TvBlock};
use crate::output::{num, Output};
use crate::{CliError, DecomposeArgs, DeltaArgs, ProbeArgs, RateArgs, ReportArgs, SampleArgs, TvArgs, Verdict};

type Run = Result<(Verdict, Output), CliError>;

fn usage<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Usage(msg.into()))
}

/// Flag value if given, else the config value, else the default.
fn pick<T: Clone>(flag: &Option<T>, slot: &mut Option<T>, default: Option<T>) {
    if let Some(v) = flag {
        *slot = Some(v.clone());
    }
    if slot.is_none() {
        *slot = default;
    }
}

fn required<'a, T>(v: &'a Option<T>, what: &str) -> Result<&'a T, CliError> {
    v.as_ref().ok_or_else(|| CliError::Usage(format!("missing --{what}")))
}

/// n_min·2^k for all k with n_min·2^k ≤ n_max.
fn doubling(n_min: u64, n_max: u64) -> Result<Vec<u64>, CliError> {
    if n_min == 0 || n_max < n_min {
        return usage(format!("need 1 ≤ n-min ≤ n-max, got {n_min}..{n_max}"));
    }
    let mut v = vec![n_min];
    while let Some(next) = v.last().unwrap().checked_mul(2).filter(|n| *n <= n_max) {
        v.push(next);
    }
    Ok(v)
}

/// 1–2–5 steps per decade from n_min up to n_max, n_max always included.
fn decades(n_min: u64, n_max: u64) -> Result<Vec<u64>, CliError> {
    if n_min == 0 || n_max < n_min {
        return usage(format!("need 1 ≤ n-min ≤ n-max, got {n_min}..{n_max}"));
    }
    let mut v = Vec::new();
    let mut scale = 1u64;
    'outer: loop {
        for m in [1, 2, 5] {
            let n = m * scale;
            if n > n_max {
                break 'outer;
            }
            if n >= n_min {
                v.push(n);
            }
        }
        scale = match scale.checked_mul(10) {
            Some(s) => s,
            None => break,
        };
    }
    if v.last() != Some(&n_max) {
        v.push(n_max);
    }
    Ok(v)
}

fn fit_row(fit: &Option<RateFit>) -> serde_json::Value {
    match fit {
        Some(f) => json!({ "slope": f.slope, "ci95": [f.ci95.0, f.ci95.1], "r2": f.r2, "points": f.points_used, "warning": f.warning }),
        None => serde_json::Value::Null,
    }
}

pub fn sample(cfg: &mut ExperimentConfig, a: &SampleArgs, dir: &Path) -> Run {
    let mut b = cfg.sample.clone().unwrap_or_default();
    pick(&a.model, &mut b.model, None);
    pick(&a.count, &mut b.count, Some(1000));
    pick(&a.source, &mut b.source, Some("model".into()));
    let source = b.source.clone().unwrap_or_default();
    pick(&a.terms, &mut b.terms, (source == "sum").then_some(16));
    cfg.sample = Some(b.clone());
    let SampleBlock { model, count, terms, .. } = b;
    let model = cfg.model(required(&model, "model")?)?;
    let count = count.unwrap_or(1000);
    let stream = RngStream::new(cfg.seed(), 1).derive("sample");
    let batch = match source.as_str() {
        "model" => SampleBatch::generate(&ModelSampler::new(&model), count, stream),
        "limit" => SampleBatch::generate(&StableSampler::new(&model.limit_law()?)?, count, stream),
        "sum" => SampleBatch::generate(&NormalizedSum::new(&model, terms.unwrap_or(16))?, count, stream),
        other => return usage(format!("unknown --source '{other}' (model, limit, sum)")),
    };
    batch.check()?;
    let mut out = Output::new(dir, cfg)?;
    out.csv("sample.csv", |w| batch.write_csv(w).map_err(CliError::from))?;
    Ok((Verdict::pass(format!("{count} points from {}", batch.provenance.source)), out))
}

fn histogram_tv(model: &TailModel, n: u64, samples: usize, bins: usize, seed: u64) -> Result<stablerate::tv::DistanceEstimate, CliError> {
    let sum = NormalizedSum::new(model, n)?;
    let lim = StableSampler::new(&model.limit_law()?)?;
    let base = RngStream::new(seed, 2);
    let a = SampleBatch::generate(&sum, samples, base.derive("sum"));
    let b = SampleBatch::generate(&lim, samples, base.derive("limit"));
    let p = Partition::from_batches(&a, &b, bins);
    Ok(tv_histogram_lb(&a, &b, &p, DistanceMeta { n, alpha: model.alpha(), model: model.to_text() })?)
}

pub fn tv(cfg: &mut ExperimentConfig, a: &TvArgs, dir: &Path) -> Run {
    let mut b = cfg.tv.clone().unwrap_or_default();
    pick(&a.model, &mut b.model, None);
    let model = cfg.model(required(&b.model, "model")?)?;
    let d = model.dim();
    pick(&a.n, &mut b.n, Some(64));
    pick(&a.method, &mut b.method, Some(if d == 1 { "exact" } else { "histogram" }.into()));
    let exact = match b.method.as_deref() {
        Some("exact") => true,
        Some("histogram") => false,
        other => return usage(format!("unknown --method {other:?} (exact, histogram)")),
    };
    if exact {
        pick(&a.nodes, &mut b.nodes, Some(1 << 18));
    } else {
        pick(&a.samples, &mut b.samples, Some(100_000));
        pick(&a.bins, &mut b.bins, Some(if d == 1 { 64 } else { 16 }));
    }
    cfg.tv = Some(b.clone());
    let TvBlock { n, nodes, samples, bins, .. } = b;
    let n = n.unwrap_or(64);
    let mut out = Output::new(dir, cfg)?;
    let summary = if exact {
        let c = tv_1d_exact(&model, n, InversionConfig { nodes: nodes.unwrap_or(1 << 18), x_half: None })?;
        out.json("tv.json", &json!({ "model": model.to_text(), "n": n, "tv": c.tv, "kolmogorov": c.kolmogorov, "x_half": c.x_half }))?;
        format!("n={n}: TV = {:.6e} (error bound {:.1e}), Kolmogorov = {:.6e}", c.tv.value, c.tv.error, c.kolmogorov.value)
    } else {
        let e = histogram_tv(&model, n, samples.unwrap_or(100_000), bins.unwrap_or(16), cfg.seed())?;
        out.json("tv.json", &json!({ "model": model.to_text(), "n": n, "tv_lower_bound": e }))?;
        format!("n={n}: histogram TV lower bound = {:.4} ± {:.4}", e.value, e.error)
    };
    Ok((Verdict::pass(summary), out))
}

pub fn delta(cfg: &mut ExperimentConfig, a: &DeltaArgs, dir: &Path) -> Run {
    let mut b = cfg.delta.clone().unwrap_or_default();
    pick(&a.alpha, &mut b.alpha, Some(1.0));
    pick(&a.d, &mut b.d, Some(1));
    pick(&a.n_min.map(|v| v as f64), &mut b.n_min, Some(10.0));
    pick(&a.n_max.map(|v| v as f64), &mut b.n_max, Some(1e6));
    pick(&a.limit, &mut b.limit, Some("printed".into()));
    pick(&a.tol, &mut b.tol, Some(0.01));
    cfg.delta = Some(b.clone());
    let DeltaBlock { alpha, d, n_min, n_max, limit, tol } = b;
    let (alpha, d, tol) = (alpha.unwrap_or(1.0), d.unwrap_or(1), tol.unwrap_or(0.01));
    let corrected = match limit.as_deref() {
        Some("printed") => false,
        Some("corrected") => true,
        other => return usage(format!("unknown --limit {other:?} (printed, corrected)")),
    };
    let ns = decades(n_min.unwrap_or(10.0) as u64, n_max.unwrap_or(1e6) as u64)?;
    let rows = delta_table(alpha, d, &ns)?;
    let lim = delta_limits(alpha, d)?;
    let last = rows.last().expect("non-empty grid");
    let gap = if corrected { last.rel_gap_corrected } else { last.rel_gap };
    let passed = gap < tol;
    let mut out = Output::new(dir, cfg)?;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![r.n.to_string(), num(r.delta), num(r.limit), num(r.rel_gap), num(r.limit_corrected), num(r.rel_gap_corrected)])
        .collect();
    out.table("delta.csv", &["n", "delta", "limit", "rel_gap", "limit_corrected", "rel_gap_corrected"], &table)?;
    out.json(
        "delta.json",
        &json!({ "alpha": alpha, "d": d, "limits": lim, "final": last, "checked_limit": if corrected { "corrected" } else { "printed" }, "tol": tol, "passed": passed }),
    )?;
    let target = if corrected { lim.corrected } else { lim.printed };
    Ok((Verdict::check(passed, format!("Δ_{} = {:.7} vs limit {target:.7}: rel gap {gap:.3e} (tol {tol})", last.n, last.delta)), out))
}

fn scenario_model(name: &str) -> Result<String, CliError> {
    Ok(match name {
        "pareto-a1" => "pareto:d=1,alpha=1",
        "pareto-a15" => "pareto:d=1,alpha=1.5",
        "pareto-a08" => "pareto:d=1,alpha=0.8",
        other => return usage(format!("unknown scenario '{other}' (pareto-a1, pareto-a15, pareto-a08)")),
    }
    .to_string())
}

pub fn rate(cfg: &mut ExperimentConfig, a: &RateArgs, dir: &Path) -> Run {
    let mut b = cfg.sweep.clone().unwrap_or_default();
    pick(&a.scenario, &mut b.scenario, None);
    if a.model.is_some() && a.scenario.is_some() {
        return usage("give either --scenario or --model");
    }
    if a.model.is_some() {
        b.scenario = None;
    }
    match &b.scenario {
        Some(s) => b.model = Some(scenario_model(s)?),
        None => pick(&a.model, &mut b.model, None),
    }
    let model = cfg.model(required(&b.model, "model or --scenario")?)?;
    pick(&a.method, &mut b.method, Some(if model.dim() == 1 { "exact" } else { "histogram" }.into()));
    let exact = match b.method.as_deref() {
        Some("exact") => true,
        Some("histogram") => false,
        other => return usage(format!("unknown --method {other:?} (exact, histogram)")),
    };
    pick(&a.n_min, &mut b.n_min, Some(16));
    pick(&a.n_max, &mut b.n_max, Some(if exact { 1 << 14 } else { 1 << 10 }));
    if exact {
        pick(&a.nodes, &mut b.nodes, Some(1 << 18));
    } else {
        pick(&a.samples, &mut b.samples, Some(100_000));
        pick(&a.bins, &mut b.bins, Some(if model.dim() == 1 { 64 } else { 16 }));
    }
    cfg.sweep = Some(b.clone());
    let SweepBlock { n_min, n_max, nodes, samples, bins, .. } = b;
    let grid = doubling(n_min.unwrap_or(16), n_max.unwrap_or(1 << 14))?;
    let method = if exact {
        SweepMethod::CfInversion { nodes: nodes.unwrap_or(1 << 18) }
    } else {
        SweepMethod::Histogram { samples: samples.unwrap_or(100_000), bins: bins.unwrap_or(16) }
    };
    let seed = cfg.seed();
    let scenario = RateScenario::new(model.clone(), grid, method, seed)?;
    let sweep = run_sweep(&scenario);
    let (ns, ds) = sweep.points();
    let failures: Vec<String> = sweep.rows.iter().filter_map(|r| r.failure.clone().map(|f| format!("n={}: {f}", r.n))).collect();
    if ns.len() < 2 {
        return Err(CliError::Numeric(format!("fewer than two sweep points succeeded: {}", failures.join("; "))));
    }
    let fit = fit_loglog(&ns, &ds, false, seed)?;
    let symmetric = model.is_symmetric();
    let registry = upper_exponent(model.alpha(), model.gamma(), symmetric)?;
    let pareto_1d = matches!(model.kind(), ModelKind::Pareto { dim: 1 });
    let headline = if pareto_1d && model.alpha() == 1.0 { Some(headline_from(&ns, &ds, seed)?) } else { None };
    let (passed, check) = if pareto_1d && exact {
        let e = pareto_exponent(model.alpha())?;
        let slope_ok = (fit.slope - e).abs() <= 0.1;
        let verdict_ok = headline.as_ref().is_none_or(|h| h.verdict == Some(true));
        (slope_ok && verdict_ok, format!("slope {:.4} vs {e:.4} ± 0.1", fit.slope))
    } else {
        (true, format!("slope {:.4}, upper-bound exponent {registry:.4}", fit.slope))
    };
    let mut out = Output::new(dir, cfg)?;
    out.csv("rate.csv", |w| sweep.write_csv(w).map_err(CliError::from))?;
    #[derive(Serialize)]
    struct RateReport<'a> {
        model: String,
        fit: &'a RateFit,
        upper_bound_exponent: f64,
        pareto_exponent: Option<f64>,
        headline: Option<serde_json::Value>,
        failures: &'a [String],
        passed: bool,
    }
    let headline_json = headline.as_ref().map(|h| {
        json!({
            "verdict": h.verdict, "verdict_text": h.verdict_text, "ratio": h.ratio, "ratio_spread": h.ratio_spread,
            "log_exponent": h.log_exponent, "log_exponent_ci": [h.log_exponent_ci.0, h.log_exponent_ci.1],
            "rss_inverse": h.rss_inverse, "rss_log_squared": h.rss_log_squared,
        })
    });
    out.json(
        "rate.json",
        &RateReport {
            model: model.to_text(),
            fit: &fit,
            upper_bound_exponent: registry,
            pareto_exponent: if pareto_1d { Some(pareto_exponent(model.alpha())?) } else { None },
            headline: headline_json,
            failures: &failures,
            passed,
        },
    )?;
    let verdict = headline.map(|h| format!("; headline verdict: {}", h.verdict_text)).unwrap_or_default();
    Ok((Verdict::check(passed, format!("{check}{verdict}")), out))
}

pub fn decompose(cfg: &mut ExperimentConfig, a: &DecomposeArgs, dir: &Path) -> Run {
    let mut b = cfg.decomposition.clone().unwrap_or_default();
    pick(&a.model, &mut b.model, None);
    pick(&a.kind, &mut b.kind, None);
    pick(&a.alpha_tilde, &mut b.alpha_tilde, None);
    pick(&a.samples, &mut b.samples, Some(1_000_000));
    pick(&a.bins, &mut b.bins, Some(50));
    pick(&a.switch, &mut b.switch, None);
    cfg.decomposition = Some(b.clone());
    let DecompositionBlock { model, kind, alpha_tilde, samples, bins, switch } = b;
    let model = cfg.model(required(&model, "model")?)?;
    let (samples, bins, seed) = (samples.unwrap_or(1_000_000), bins.unwrap_or(50), cfg.seed());
    let decomp = match required(&kind, "kind")?.as_str() {
        "light" => Decomposition::Light(light_decompose(&model)?),
        "heavy" => Decomposition::Heavy(heavy_decompose(&model, *required(&alpha_tilde, "alpha-tilde")?)?),
        other => return usage(format!("unknown --kind '{other}' (light, heavy)")),
    };
    let report = certify_mixture(&decomp, samples, bins, seed, switch)?;
    let (q_mc, tails) = match &decomp {
        Decomposition::Heavy(h) => {
            let (m, se) = h.q_monte_carlo(samples, RngStream::new(seed, 0x51));
            let rows = heavy_tail_check(h, &[2.0, 4.0, 8.0, 16.0, 32.0], samples, RngStream::new(seed, 0x54));
            (Some(json!({ "mean": m, "std_err": se })), Some(rows))
        }
        Decomposition::Light(_) => (None, None),
    };
    let mut out = Output::new(dir, cfg)?;
    out.json(
        "decompose.json",
        &json!({ "model": model.to_text(), "decomposition": decomp, "certification": report, "q_monte_carlo": q_mc, "tail_check": tails }),
    )?;
    Ok((
        Verdict::check(
            report.passed,
            format!("switch {:.6}: χ² = {:.2} on {} dof, p = {:.4}", switch.unwrap_or(decomp.switch_probability()), report.statistic, report.dof, report.p_value),
        ),
        out,
    ))
}

pub fn probe(cfg: &mut ExperimentConfig, a: &ProbeArgs, dir: &Path) -> Run {
    let mut b = cfg.probe.clone().unwrap_or_default();
    pick(&a.kind, &mut b.kind, Some("gap".into()));
    pick(&a.model, &mut b.model, None);
    let model = cfg.model(required(&b.model, "model")?)?;
    let kind = b.kind.clone().unwrap_or_default();
    let alpha = model.alpha();
    match kind.as_str() {
        "gradient" => {
            pick(&a.n, &mut b.n, Some(1024));
            pick(&a.order, &mut b.order, Some(1));
            pick(&a.samples, &mut b.samples, Some(400_000));
            let eps = 1e-2 * (1.0 / b.n.unwrap_or(1024) as f64).powf(1.0 / alpha);
            pick(&a.f, &mut b.f, Some(format!("tanh:{eps:e}")));
        }
        "gap" | "generator" | "bound" => {
            pick(&a.n_min, &mut b.n_min, Some(8));
            pick(&a.n_max, &mut b.n_max, Some(1024));
            pick(&a.f, &mut b.f, Some("cos".into()));
            if kind != "bound" {
                pick(&a.samples, &mut b.samples, Some(1_000_000));
                pick(&a.x, &mut b.x, Some(0.0));
            }
        }
        other => return usage(format!("unknown --kind '{other}' (gap, gradient, generator, bound)")),
    }
    cfg.probe = Some(b.clone());
    let ProbeBlock { f, n, n_min, n_max, samples, x, order, .. } = b;
    let d = model.dim();
    let f = cfg.test_function(required(&f, "f")?, d)?;
    let seed = cfg.seed();
    let mut point = vec![0.0; d];
    point[0] = x.unwrap_or(0.0);
    let mut out = Output::new(dir, cfg)?;
    let summary = match kind.as_str() {
        "gradient" => {
            let n = n.unwrap_or(1024);
            let cfg_op = OperatorConfig::new(&model, n, samples.unwrap_or(400_000), seed)?;
            let ms = doubling(1, n)?;
            let p = gradient_decay_probe(&cfg_op, &f, &ms, order.unwrap_or(1), &[-1.0, -0.5, 0.0, 0.5, 1.0])?;
            let rows: Vec<Vec<String>> = p.rows.iter().map(|r| vec![r.m.to_string(), num(r.ratio), num(r.estimate), num(r.std_err), num(r.step)]).collect();
            out.table("probe.csv", &["m", "m_over_n", "estimate", "std_err", "fd_step"], &rows)?;
            out.json("probe.json", &json!({ "kind": "gradient", "model": model.to_text(), "f": f.id(), "order": p.kappa, "fit": fit_row(&p.fit), "expected_slope": -(p.kappa as f64) / alpha, "inconclusive": p.inconclusive }))?;
            format!("κ={} decay slope {} (expected {:.3}){}", p.kappa, p.fit.as_ref().map_or("n/a".into(), |f| format!("{:.3}", f.slope)), -(p.kappa as f64) / alpha, if p.inconclusive { ", inconclusive rows present" } else { "" })
        }
        "gap" => {
            let ns = doubling(n_min.unwrap_or(8), n_max.unwrap_or(1024))?;
            let norms = f.norms();
            let mut rows = Vec::new();
            let (mut xs, mut ys) = (Vec::new(), Vec::new());
            let mut inconclusive = false;
            for &n in &ns {
                let c = OperatorConfig::new(&model, n, samples.unwrap_or(1_000_000), seed)?;
                let g = one_step_gap(&c, &f, &point, coupling_cdf(&c).as_ref())?;
                let dn = d_bound(n as f64, alpha, model.gamma(), &norms, model.is_symmetric()).ok();
                inconclusive |= g.inconclusive;
                rows.push(vec![n.to_string(), num(g.value), num(g.std_err), dn.map(num).unwrap_or_default(), dn.map(|v| num(g.value.abs() / v)).unwrap_or_default()]);
                xs.push(n as f64);
                ys.push(g.value.abs());
            }
            let fit = fit_loglog(&xs, &ys, false, seed).ok();
            out.table("probe.csv", &["n", "gap", "std_err", "bound_d", "ratio"], &rows)?;
            out.json("probe.json", &json!({ "kind": "gap", "model": model.to_text(), "f": f.id(), "x": point, "fit": fit_row(&fit), "inconclusive": inconclusive }))?;
            format!("gap slope {}", fit.map_or("n/a".into(), |f| format!("{:.3}", f.slope)))
        }
        "generator" => {
            let ns = doubling(n_min.unwrap_or(8), n_max.unwrap_or(1024))?;
            let mut rows = Vec::new();
            let (mut xs, mut ys) = (Vec::new(), Vec::new());
            for &n in &ns {
                let c = OperatorConfig::new(&model, n, samples.unwrap_or(1_000_000), seed)?;
                let p = generator_error_probe(&c, &f, &point, coupling_cdf(&c).as_ref(), &QuadConfig::default())?;
                rows.push(vec![n.to_string(), num(p.value), num(p.std_err), num(p.bound), num(p.generator)]);
                xs.push(n as f64);
                ys.push(p.value.abs());
            }
            let fit = fit_loglog(&xs, &ys, false, seed).ok();
            out.table("probe.csv", &["n", "value", "std_err", "bound", "generator"], &rows)?;
            out.json("probe.json", &json!({ "kind": "generator", "model": model.to_text(), "f": f.id(), "x": point, "fit": fit_row(&fit) }))?;
            format!("generator-error slope {}", fit.map_or("n/a".into(), |f| format!("{:.3}", f.slope)))
        }
        _ => {
            let ns = doubling(n_min.unwrap_or(8), n_max.unwrap_or(1024))?;
            let norms = f.norms();
            let rows: Vec<Vec<String>> = ns
                .iter()
                .map(|&n| Ok(vec![n.to_string(), num(d_bound(n as f64, alpha, model.gamma(), &norms, model.is_symmetric())?)]))
                .collect::<Result<_, CliError>>()?;
            out.table("probe.csv", &["n", "bound_d"], &rows)?;
            out.json("probe.json", &json!({ "kind": "bound", "model": model.to_text(), "f": f.id(), "rows": rows.len() }))?;
            format!("D(n) over {} values of n", rows.len())
        }
    };
    Ok((Verdict::pass(summary), out))
}

pub fn report(cfg: &mut ExperimentConfig, a: &ReportArgs, dir: &Path) -> Run {
    let src = a.dir.clone().unwrap_or_else(|| dir.to_path_buf());
    let entries = std::fs::read_dir(&src).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", src.display())))?;
    let mut names: Vec<_> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.file_name().and_then(|s| s.to_str()).is_some_and(|s| s.ends_with(".manifest.json") && s != "report.manifest.json"))
        .collect();
    names.sort();
    if names.is_empty() {
        return usage(format!("no run manifests in {}", src.display()));
    }
    let mut rows = Vec::new();
    let mut all_pass = true;
    for p in &names {
        let text = std::fs::read_to_string(p)?;
        let m: serde_json::Value = serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?;
        let status = m["status"].as_str().unwrap_or("unknown").to_string();
        all_pass &= status == "pass";
        rows.push(vec![
            m["command"].as_str().unwrap_or("?").to_string(),
            status,
            m["config_hash"].as_str().unwrap_or("").to_string(),
            m["seed"].to_string(),
            m["wall_time_secs"].as_f64().map(|v| format!("{v:.3}")).unwrap_or_default(),
        ]);
    }
    let mut out = Output::new(dir, cfg)?;
    for r in &rows {
        println!("{:<10} {:<5} {} seed={} {}s", r[0], r[1], &r[2][..r[2].len().min(12)], r[3], r[4]);
    }
    out.table("report.csv", &["command", "status", "config_hash", "seed", "wall_time_secs"], &rows)?;
    Ok((Verdict::check(all_pass, format!("{} runs, {} failing", rows.len(), rows.iter().filter(|r| r[1] != "pass").count())), out))
}
