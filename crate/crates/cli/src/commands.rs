use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use qmac_core::channels::json::{compound_to_json, load_compound};
use qmac_core::channels::{net_cardinality_bound, net_indices};
use qmac_core::codesim::{simulate as run_simulation, SimulationConfig};
use qmac_core::optimizer::{pareto_trace, ParetoConfig, TracedPoint};
use qmac_core::suites::{run_suite, Suite, SuiteConfig, SuiteReport};
use qmac_core::Rect;

use crate::error::CliError;
use crate::{NetArgs, RegionArgs, SimulateArgs, VerifyArgs};

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn write_opt(path: &Option<PathBuf>, text: impl FnOnce() -> Result<String, CliError>) -> Result<(), CliError> {
    match path {
        Some(p) => write(p, &text()?),
        None => Ok(()),
    }
}

pub fn parse_weights(text: &str) -> Result<Vec<(f64, f64)>, CliError> {
    let bad = |s: &str| CliError::Usage(format!("weight pair {s:?} is not of the form a:b with nonnegative a, b"));
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|pair| {
            let (a, b) = pair.split_once(':').ok_or_else(|| bad(pair))?;
            let a = f64::from_str(a.trim()).map_err(|_| bad(pair))?;
            let b = f64::from_str(b.trim()).map_err(|_| bad(pair))?;
            if !(a >= 0.0 && b >= 0.0 && a + b > 0.0) || !a.is_finite() || !b.is_finite() {
                return Err(bad(pair));
            }
            Ok((a, b))
        })
        .collect::<Result<Vec<_>, _>>()
        .and_then(|w| if w.is_empty() { Err(CliError::Usage("no weight pairs given".into())) } else { Ok(w) })
}

fn parse_list<T: FromStr>(text: &str, what: &str) -> Result<Vec<T>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|_| CliError::Usage(format!("bad {what} entry {s:?}"))))
        .collect()
}

fn tag_for(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "region".into())
}

#[derive(Serialize)]
struct RegionOutput<'a> {
    l: usize,
    budget: usize,
    seed: u64,
    weights: &'a [(f64, f64)],
    evaluations: usize,
    truncated: bool,
    corners: &'a [Rect],
    best: &'a [TracedPoint],
}

pub fn region(args: &RegionArgs) -> Result<(), CliError> {
    if args.l == 0 {
        return Err(CliError::Usage("--l must be at least 1".into()));
    }
    let start = Instant::now();
    let set = load_compound(&args.input)?;
    let weights = parse_weights(&args.weights)?;
    let mut config = ParetoConfig::new(args.l, weights, args.budget, args.seed);
    config.alphabet = args.alphabet;
    if let Some(d) = args.dimension_budget {
        config.dimension_budget = d;
    }
    config.max_evaluations = args.max_evaluations;
    let traced = pareto_trace(&set, &config)?;
    let region = match args.timeshare_grid {
        Some(g) if g >= 2 => traced.region.timeshare_closure(g),
        Some(g) => return Err(CliError::Usage(format!("--timeshare-grid must be at least 2, got {g}"))),
        None => traced.region.clone(),
    };
    let tag = tag_for(&args.input);
    write_opt(&args.out_csv, || Ok(region.to_csv(&tag)))?;
    write_opt(&args.out_svg, || Ok(region.to_svg()))?;
    write_opt(&args.out_json, || {
        let out = RegionOutput {
            l: args.l,
            budget: args.budget,
            seed: args.seed,
            weights: &config.weights,
            evaluations: traced.evaluations,
            truncated: traced.truncated,
            corners: region.rects(),
            best: &traced.best,
        };
        Ok(serde_json::to_string_pretty(&out).map_err(qmac_core::Error::from)?)
    })?;
    eprintln!("region: {} members, l = {}, {} evaluations{} in {:.2?}", set.len(), args.l, traced.evaluations, if traced.truncated { " (truncated)" } else { "" }, start.elapsed());
    for r in region.rects() {
        eprintln!("  corner ({:.6}, {:.6})", r.r1_max, r.r2_max);
    }
    Ok(())
}

pub fn simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let set = load_compound(&args.input)?;
    let n_values: Vec<usize> = parse_list(&args.n, "block length")?;
    if n_values.is_empty() || n_values.contains(&0) {
        return Err(CliError::Usage("--n needs positive block lengths".into()));
    }
    let mut config = SimulationConfig::new(n_values, args.m1, args.m2, args.seeds, args.seed);
    if let Some(p) = &args.p {
        config.p = Some(parse_list(p, "probability")?);
    }
    if let Some(k) = args.encoder_samples {
        config.encoder_samples = k;
    }
    let report = run_simulation(&set, &config)?;
    write_opt(&args.out_json, || Ok(report.to_json()?))?;
    write_opt(&args.out_csv, || Ok(report.trend_csv()))?;
    eprintln!("simulate: {} members, {} seeds in {:.2?}", set.len(), args.seeds, start.elapsed());
    for t in &report.trend {
        eprintln!(
            "  n = {}: best {:.6} (seed {}), mean {:.6}, worst {:.6}, chain violations {}",
            t.n, t.best_performance, t.best_seed, t.mean_performance, t.worst_performance, t.chain_violations
        );
    }
    for c in &report.converse {
        if c.violations > 0 {
            eprintln!("  converse: {} cap violations at n = {}", c.violations, c.n);
        }
    }
    Ok(())
}

pub fn verify(args: &VerifyArgs) -> Result<bool, CliError> {
    let suites: Vec<Suite> = if args.suite == "all" { Suite::ALL.to_vec() } else { vec![args.suite.parse::<Suite>().map_err(|e| CliError::Usage(e.to_string()))?] };
    let config = SuiteConfig { seed: args.seed, instances: args.instances, bound_scale: args.tolerance, tolerance: args.slack };
    let mut reports: Vec<SuiteReport> = Vec::with_capacity(suites.len());
    for s in suites {
        let start = Instant::now();
        let r = run_suite(s, &config)?;
        eprintln!(
            "{} {:<26} {:>4} instances, {} violations, worst margin {:.3e} ({:.2?})",
            if r.passed { "PASS" } else { "FAIL" },
            r.suite,
            r.instances,
            r.violations,
            r.worst_margin,
            start.elapsed()
        );
        reports.push(r);
    }
    write_opt(&args.out_json, || Ok(serde_json::to_string_pretty(&reports).map_err(qmac_core::Error::from)?))?;
    Ok(reports.iter().all(|r| r.passed))
}

pub fn net(args: &NetArgs) -> Result<(), CliError> {
    let set = load_compound(&args.input)?;
    let picked = net_indices(&set, args.theta)?;
    let thinned = set.subset(&picked);
    let m = &set.members()[0];
    eprintln!(
        "net: kept {} of {} members at θ = {} (cardinality bound {:.3e})",
        thinned.len(),
        set.len(),
        args.theta,
        net_cardinality_bound(args.theta, m.in_dim(), m.out_dim())
    );
    write_opt(&args.out_json, || Ok(compound_to_json(&thinned)?))
}
