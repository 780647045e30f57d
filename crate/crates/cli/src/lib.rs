//! Command-line driver. Each subcommand writes its artifacts plus a
//! `<command>-manifest.json` into `--out-dir`; the return value of [`run`]
//! is the overall pass/fail verdict.

pub mod args;
pub mod output;
mod verify;

use std::collections::BTreeMap;
use std::fs;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use matexp::counting::{count_gl, count_singular, count_stratum, enumerated_count, stratum_reports, CountReport};
use matexp::digraph::{
    check_normal, mmt_decomposition_audit, AuditReport, PairMismatch, PairScope, SpectralOptions, SumProductDigraph,
};
use matexp::lab::{
    mean_coverage, random_subset, threshold_sweep, Density, Domain, ExperimentConfig, ImageStats, SweepRow,
};
use matexp::seed::derive_seed;
use matexp::{Felt, FieldOptions, FieldSpec, MatRing, MatSet, Stratum};
use serde_json::json;

use args::{AuditArgs, AuditKind, Cli, Command, CountArgs, ExpandArgs, Format, RingArgs, SpectrumArgs, SweepArgs};
use output::{Check, Run};

pub fn build_ring(r: &RingArgs) -> Result<Arc<MatRing>> {
    let opts = FieldOptions { allow_even: r.allow_even, ..FieldOptions::default() };
    let field = FieldSpec::from_order(r.q as u64, opts).with_context(|| format!("q = {}", r.q))?;
    Ok(Arc::new(MatRing::new(Arc::new(field), r.n)?))
}

/// Counterexample CSV rows grouped by relation name.
pub(crate) fn counterexample_rows(report: &AuditReport) -> BTreeMap<String, Vec<String>> {
    let mut out: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for m in &report.counterexamples {
        out.entry(m.relation.to_string()).or_default().push(m.csv_row());
    }
    out
}

pub fn run(cli: Cli) -> Result<bool> {
    if let Some(t) = cli.global.threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().context("configuring the worker pool")?;
    }
    let g = &cli.global;
    let seed = g.seed();
    match &cli.command {
        Command::Verify(a) => {
            let config =
                json!({"n": a.ring.n, "q": a.ring.q, "level": format!("{:?}", a.level).to_lowercase(), "seed": seed});
            verify::run(a, Run::new(&g.out_dir, "verify", config)?, seed)
        }
        Command::Spectrum(a) => {
            spectrum(a, g.format, Run::new(&g.out_dir, "spectrum", spectrum_config(a, seed))?, seed)
        }
        Command::Expand(a) => expand(a, g.format, &g.out_dir, seed),
        Command::Sweep(a) => sweep(a, g.format, &g.out_dir, g.seed),
        Command::Count(a) => count(a, g.format, Run::new(&g.out_dir, "count", json!({"n": a.ring.n, "q": a.ring.q}))?),
        Command::Audit(a) => audit(a, g.format, &g.out_dir, seed),
    }
}

fn spectrum_config(a: &SpectrumArgs, seed: u64) -> serde_json::Value {
    json!({"n": a.ring.n, "q": a.ring.q, "method": a.method, "tol": a.tol, "max_iter": a.max_iter, "seed": seed})
}

fn spectrum(a: &SpectrumArgs, format: Format, mut out: Run, seed: u64) -> Result<bool> {
    let g = SumProductDigraph::new(build_ring(&a.ring)?);
    let opts = SpectralOptions {
        method: a.method,
        tol: a.tol,
        max_iter: a.max_iter,
        seed: derive_seed(seed, "spectrum", 0, 0),
        ..SpectralOptions::default()
    };
    out.seed("power-start", opts.seed);
    let start = std::time::Instant::now();
    let report = g.second_eigenvalue(&opts)?;
    let mut check = Check::default();
    let d = g.degree() as f64;
    check.expect_with(report.lambda2 < d, || format!("lambda {} is not below d = {d}", report.lambda2));
    check.expect_with(report.residual <= a.tol, || format!("residual {} above {}", report.residual, a.tol));
    check.expect_with(report.connected != Some(false), || "digraph is not strongly connected".into());
    out.record("spectral", check, start.elapsed().as_secs_f64());
    match format {
        Format::Json => out.write_json("spectrum.json", &report)?,
        Format::Csv => out.write_csv(
            "spectrum.csv",
            "n,q,N,d,lambda2,residual,iterations,c_measured,method,connected",
            [format!(
                "{},{},{},{},{},{},{},{},{},{}",
                report.n,
                report.q,
                report.vertices,
                report.degree,
                report.lambda2,
                report.residual,
                report.iterations,
                report.c_measured,
                report.method,
                report.connected.map(|c| c.to_string()).unwrap_or_default()
            )],
        )?,
    };
    println!(
        "lambda = {} (d = {}, c = {}, residual {:.3e})",
        report.lambda2, report.degree, report.c_measured, report.residual
    );
    out.finish()
}

fn load_set(ring: &MatRing, path: &std::path::Path) -> Result<MatSet> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    MatSet::from_text(ring, &text).with_context(|| format!("parsing {}", path.display()))
}

fn expand(a: &ExpandArgs, format: Format, dir: &std::path::Path, seed: u64) -> Result<bool> {
    let ring = build_ring(&a.ring)?;
    let arity = a.polynomial.arity();
    let config = json!({
        "n": a.ring.n, "q": a.ring.q, "polynomial": a.polynomial, "sets": a.sets,
        "domains": a.domain, "density": a.density, "seed": seed,
    });
    let mut out = Run::new(dir, "expand", config)?;
    let (sets, label, density, trial_seed): (Vec<MatSet>, String, Density, u64) = if !a.sets.is_empty() {
        if a.sets.len() != 1 && a.sets.len() != arity {
            bail!("{} takes {arity} sets, got {}", a.polynomial, a.sets.len());
        }
        let sets = a.sets.iter().map(|p| load_set(&ring, p)).collect::<Result<Vec<_>>>()?;
        (sets, "EXPLICIT".into(), Density::ONE, seed)
    } else {
        let domains = if a.domain.is_empty() { vec![Domain::All] } else { a.domain.clone() };
        if domains.len() != 1 && domains.len() != arity {
            bail!("{} takes {arity} domains, got {}", a.polynomial, domains.len());
        }
        let s = derive_seed(seed, "expand", 0, 0);
        let sets = domains
            .iter()
            .enumerate()
            .map(|(j, d)| random_subset(&ring, &d.resolve(&ring)?, a.density, derive_seed(s, "argument", j as u64, 0)))
            .collect::<matexp::Result<Vec<_>>>()?;
        let label = domains.iter().map(Domain::to_string).collect::<Vec<_>>().join("|");
        out.seed("draw", s);
        (sets, label, a.density, s)
    };
    let args: Vec<&MatSet> = (0..arity).map(|j| &sets[j.min(sets.len() - 1)]).collect();
    let start = std::time::Instant::now();
    let image = a.polynomial.image(&ring, &args)?;
    let size = ring.size();
    let exponent = a.polynomial.threshold_exponent(a.ring.n, &a.domain);
    let threshold = (a.ring.q as f64).powf(exponent);
    let row = SweepRow {
        n: a.ring.n,
        q: a.ring.q,
        polynomial: a.polynomial,
        domain: label,
        density,
        trial: 0,
        stats: ImageStats {
            sizes: args.iter().map(|s| s.len()).collect(),
            image: image.len(),
            coverage: image.len() as f64 / size as f64,
            covers_all: image.len() == size,
            seed: trial_seed,
        },
        predicted_threshold_size: threshold,
        predicted_threshold_density: threshold / size as f64,
    };
    out.record("image", Check { examined: 1, ..Check::default() }, start.elapsed().as_secs_f64());
    match format {
        Format::Json => out.write_json("expand.json", &row)?,
        Format::Csv => out.write_csv("expand.csv", SweepRow::csv_header(), [row.csv_row()])?,
    };
    if a.save_image {
        out.write("image.txt", image.to_text().as_bytes())?;
    }
    println!("|image| = {} of {size} (coverage {})", row.stats.image, row.stats.coverage);
    out.finish()
}

fn sweep(a: &SweepArgs, format: Format, dir: &std::path::Path, seed: Option<u64>) -> Result<bool> {
    let mut config: ExperimentConfig = match &a.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let mut c: ExperimentConfig =
                serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
            // Set files named in the config are relative to it.
            let base = path.parent().unwrap_or(std::path::Path::new("."));
            for d in &mut c.domains {
                if let Domain::File(f) = d {
                    if f.is_relative() {
                        *f = base.join(&*f);
                    }
                }
            }
            c
        }
        None => ExperimentConfig {
            n: a.n.context("--n is required without --config")?,
            q: a.q.context("--q is required without --config")?,
            polynomial: a.polynomial.context("--polynomial is required without --config")?,
            domains: if a.domain.is_empty() { vec![Domain::All] } else { a.domain.clone() },
            densities: a.densities.clone(),
            trials: a.trials,
            seed: 0,
            allow_even: a.allow_even,
        },
    };
    if let Some(s) = seed {
        config.seed = s;
    }
    config.validate()?;
    let mut out = Run::new(dir, "sweep", serde_json::to_value(&config)?)?;
    out.seed("root", config.seed);
    let start = std::time::Instant::now();
    let rows = threshold_sweep(&config)?;
    let curve = mean_coverage(&rows);
    let monotone = curve.windows(2).all(|w| w[0].1 <= w[1].1);
    let detail =
        format!("{} rows; mean coverage {}non-decreasing in density", rows.len(), if monotone { "" } else { "not " });
    out.record(
        "sweep",
        Check { examined: rows.len() as u64, detail, ..Check::default() },
        start.elapsed().as_secs_f64(),
    );
    let threshold = rows.first().map(|r| r.predicted_threshold_density).unwrap_or(f64::NAN);
    match format {
        Format::Json => {
            out.write_json("sweep.json", &rows)?;
            let curve: Vec<_> = curve
                .iter()
                .map(|(d, m)| json!({"density": d, "mean_coverage": m, "predicted_threshold_density": threshold}))
                .collect();
            out.write_json("sweep-curve.json", &curve)?;
        }
        Format::Csv => {
            out.write_csv("sweep.csv", SweepRow::csv_header(), rows.iter().map(SweepRow::csv_row))?;
            out.write_csv(
                "sweep-curve.csv",
                "density,mean_coverage,predicted_threshold_density",
                curve.iter().map(|(d, m)| format!("{d},{m},{threshold}")),
            )?;
        }
    }
    for (d, m) in &curve {
        println!("{d:>8} {m:.4}");
    }
    out.finish()
}

/// Largest ring for which `count` checks closed forms against a scan.
pub const COUNT_ENUMERATION_MAX: u64 = 20_000;

fn count(a: &CountArgs, format: Format, mut out: Run) -> Result<bool> {
    let (n, q) = (a.ring.n, a.ring.q);
    let ring = build_ring(&a.ring)?;
    let rows = stratum_reports(n, q)?;
    let start = std::time::Instant::now();
    let check = if ring.size() <= COUNT_ENUMERATION_MAX {
        let mut c = Check::default();
        let mut strata = vec![Stratum::All, Stratum::Gl];
        strata.extend((0..q).map(|x| Stratum::Det(Felt(x))));
        strata.extend((0..=n).map(Stratum::Rank));
        for s in strata {
            let (closed, scanned) = (count_stratum(n, q, s)?, enumerated_count(&ring, s)?);
            c.expect_with(closed == scanned, || format!("{s}: {closed} vs {scanned}"));
        }
        let singular = enumerated_count(&ring, Stratum::Det(Felt::ZERO))?;
        c.expect_with(count_singular(n, q) == singular, || "SINGULAR".into());
        c.expect_with(&count_singular(n, q) + count_gl(n, q) == matexp::counting::count_all(n, q), || {
            "GL + SINGULAR".into()
        });
        c.note("closed forms match enumeration")
    } else {
        Check::skipped(format!("{} matrices exceed the enumeration cap", ring.size()))
    };
    out.record("count-enumeration", check, start.elapsed().as_secs_f64());
    match format {
        Format::Json => out.write_json("count.json", &rows)?,
        Format::Csv => out.write_csv("count.csv", CountReport::csv_header(), rows.iter().map(CountReport::csv_row))?,
    };
    for r in &rows {
        println!("{}", r.csv_row());
    }
    out.finish()
}

fn audit(a: &AuditArgs, format: Format, dir: &std::path::Path, seed: u64) -> Result<bool> {
    let g = SumProductDigraph::new(build_ring(&a.ring)?);
    let scope = if a.exhaustive {
        PairScope::Exhaustive
    } else {
        PairScope::Sample { count: a.samples, seed: derive_seed(seed, "audit", 0, 0) }
    };
    let config = json!({"n": a.ring.n, "q": a.ring.q, "kind": format!("{:?}", a.kind).to_lowercase(),
        "exhaustive": a.exhaustive, "samples": a.samples, "seed": seed});
    let mut out = Run::new(dir, "audit", config)?;
    if let PairScope::Sample { seed, .. } = scope {
        out.seed("pairs", seed);
    }
    let mut reports = Vec::new();
    if matches!(a.kind, AuditKind::Normal | AuditKind::Both) {
        let start = std::time::Instant::now();
        let r = check_normal(&g, scope);
        let secs = start.elapsed().as_secs_f64();
        for rel in [matexp::digraph::Relation::OutVsPredicted, matexp::digraph::Relation::InVsPredicted] {
            let f = r.failure_count(rel);
            out.record(
                &rel.to_string(),
                Check { examined: r.examined, failures: f, skipped: false, detail: String::new() },
                secs,
            );
        }
        reports.push(r);
    }
    if matches!(a.kind, AuditKind::Decomposition | AuditKind::Both) {
        let start = std::time::Instant::now();
        let r = mmt_decomposition_audit(&g, scope);
        let f = r.failure_count(matexp::digraph::Relation::OutVsClass);
        let classes = r.classes.iter().map(|(k, v)| format!("{k}:{v}")).collect::<Vec<_>>().join(" ");
        out.record(
            "out-vs-class",
            Check { examined: r.examined, failures: f, skipped: false, detail: classes },
            start.elapsed().as_secs_f64(),
        );
        reports.push(r);
    }
    match format {
        Format::Json => {
            out.write_json("audit.json", &reports)?;
        }
        Format::Csv => {
            let names: Vec<String> = out.suites().iter().map(|s| s.name.clone()).collect();
            let mut rows: BTreeMap<String, Vec<String>> = names.into_iter().map(|n| (n, Vec::new())).collect();
            for r in &reports {
                for (rel, v) in counterexample_rows(r) {
                    rows.entry(rel).or_default().extend(v);
                }
            }
            for (rel, v) in rows {
                out.write_csv(&format!("audit-{rel}.csv"), PairMismatch::csv_header(), v)?;
            }
        }
    }
    for s in out.suites() {
        println!("{:<18} {:?} {} mismatches in {} pairs", s.name, s.status, s.failures, s.examined);
    }
    out.finish()
}
