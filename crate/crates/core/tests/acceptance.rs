//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. Artifacts land in
//! `$CARGO_TARGET_TMPDIR/acceptance/`.
//!
//! Run alone with `cargo test -p matexp --test acceptance`.

use std::cmp::Ordering;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use matexp::counting::{count_det_stratum, count_gl, count_rank, enumerated_count};
use matexp::digraph::{
    check_normal, mixing_check, PairMismatch, PairScope, Relation, SpectralMethod, SpectralOptions, SpectralReport,
    SumProductDigraph, VertexSet,
};
use matexp::lab::{
    embedding_edge_check, image_x_times_y_plus_z, lemma24_check, random_subset, scaled_sum_check, threshold_sweep,
    Density, Domain, EmbeddingInput, EmbeddingTheorem, ExperimentConfig, Polynomial, SweepRow,
};
use matexp::seed::{derive_seed, rng};
use matexp::{Felt, FieldOptions, FieldSpec, MatIndex, MatRing, MatSet, Stratum};
use rand::seq::index::sample;
use rand::Rng;

const SEED: u64 = 20_240_601;

struct Verdict {
    pass: bool,
    detail: String,
}

/// Named text outputs of one criterion, compared byte for byte on re-run.
#[derive(Default, PartialEq)]
struct Artifacts(Vec<(String, String)>);

impl Artifacts {
    fn add(&mut self, name: impl Into<String>, text: String) {
        self.0.push((name.into(), text));
    }
}

type Outcome = (Verdict, Artifacts);

fn ring(n: usize, q: u32) -> Arc<MatRing> {
    let field = FieldSpec::from_order(q as u64, FieldOptions::default()).expect("odd prime power");
    Arc::new(MatRing::new(Arc::new(field), n).expect("ring fits"))
}

fn graph(n: usize, q: u32) -> SumProductDigraph {
    SumProductDigraph::new(ring(n, q))
}

fn quarter() -> Density {
    Density::new(1, 4).unwrap()
}

fn csv(header: &str, rows: impl IntoIterator<Item = String>) -> String {
    let mut s = format!("{header}\n");
    for r in rows {
        s.push_str(&r);
        s.push('\n');
    }
    s
}

fn counting() -> Outcome {
    let start = Instant::now();
    let mut checks = 0;
    let mut bad = Vec::new();
    let mut rows = Vec::new();
    for (n, q) in [(1, 3), (1, 5), (1, 7), (2, 3), (2, 5), (3, 3)] {
        let r = ring(n, q);
        let mut cases = vec![(Stratum::Gl, count_gl(n, q))];
        cases.extend((0..q).map(|a| (Stratum::Det(Felt(a)), count_det_stratum(n, q, Felt(a)).unwrap())));
        cases.extend((0..=n).map(|m| (Stratum::Rank(m), count_rank(n, m, q).unwrap())));
        for (stratum, closed) in cases {
            let brute = enumerated_count(&r, stratum).unwrap();
            checks += 1;
            if closed != brute {
                bad.push(format!("({n},{q}) {stratum}: {closed} vs {brute}"));
            }
            rows.push(format!("{n},{q},{stratum},{closed},{brute}"));
        }
    }
    let secs = start.elapsed();
    let mut art = Artifacts::default();
    art.add("counting.csv", csv("n,q,stratum,closed_form,enumerated", rows));
    let pass = bad.is_empty() && secs < Duration::from_secs(120);
    let detail = format!(
        "{checks} strata, {} mismatches, {:.1}s (limit 120s) {}",
        bad.len(),
        secs.as_secs_f64(),
        bad.join("; ")
    );
    (Verdict { pass, detail }, art)
}

fn oracle() -> Outcome {
    let mut art = Artifacts::default();
    let mut parts = Vec::new();
    let mut pass = true;
    let configs = [
        (1, 3, PairScope::Exhaustive),
        (1, 5, PairScope::Exhaustive),
        (2, 3, PairScope::Sample { count: 10_000, seed: derive_seed(SEED, "oracle", 2, 3) }),
        (2, 5, PairScope::Sample { count: 10_000, seed: derive_seed(SEED, "oracle", 2, 5) }),
    ];
    for (n, q, scope) in configs {
        let g = graph(n, q);
        let report = check_normal(&g, scope);
        let out = report.failure_count(Relation::OutVsPredicted);
        let inn = report.failure_count(Relation::InVsPredicted);
        pass &= report.passed();
        parts.push(format!("({n},{q}) {} pairs: out {out}, in {inn}", report.examined));
        let rows = report.counterexamples.iter().map(|m| format!("{},{}", m.relation, m.csv_row()));
        art.add(format!("oracle-{n}-{q}.csv"), csv(&format!("relation,{}", PairMismatch::csv_header()), rows));
    }
    (Verdict { pass, detail: format!("mismatches vs predicted: {}", parts.join("; ")) }, art)
}

fn spectral_opts(method: SpectralMethod, n: usize, q: u32) -> SpectralOptions {
    SpectralOptions { method, seed: derive_seed(SEED, "spectral", n as u64, q as u64), ..SpectralOptions::default() }
}

/// Returns the outcome and the dense `lambda` at (2, 3) for the mixing audit.
fn spectral() -> (Outcome, f64) {
    let mut reports: Vec<SpectralReport> = Vec::new();
    let mut bad = Vec::new();
    let mut lambda23 = f64::NAN;
    for (n, q) in [(1, 5), (1, 7), (1, 9), (1, 11), (1, 13), (2, 3)] {
        let g = graph(n, q);
        let dense = g.second_eigenvalue(&spectral_opts(SpectralMethod::DenseExact, n, q)).unwrap();
        let power = g.second_eigenvalue(&spectral_opts(SpectralMethod::DeflatedPower, n, q)).unwrap();
        let rel = (dense.lambda2 - power.lambda2).abs() / dense.lambda2;
        if rel > 1e-6 {
            bad.push(format!("({n},{q}) dense {} vs power {} (rel {rel:.2e})", dense.lambda2, power.lambda2));
        }
        if (n, q) == (2, 3) {
            lambda23 = dense.lambda2;
        }
        reports.push(dense);
        reports.push(power);
    }
    let start = Instant::now();
    let big = graph(2, 5).second_eigenvalue(&spectral_opts(SpectralMethod::DeflatedPower, 2, 5));
    let big_secs = start.elapsed();
    match big {
        Ok(r) => {
            if r.residual > 1e-6 || big_secs > Duration::from_secs(900) {
                bad.push(format!("(2,5) residual {:.2e} after {:.1}s", r.residual, big_secs.as_secs_f64()));
            }
            reports.push(r);
        }
        Err(e) => bad.push(format!("(2,5) deflated power failed: {e}")),
    }
    for r in &reports {
        if r.lambda2.partial_cmp(&(r.degree as f64)) != Some(Ordering::Less) {
            bad.push(format!("({},{}) {}: lambda {} not below d = {}", r.n, r.q, r.method, r.lambda2, r.degree));
        }
        if r.connected == Some(false) {
            bad.push(format!("({},{}) not strongly connected", r.n, r.q));
        }
    }
    let mut bands = Vec::new();
    for n in [1, 2] {
        let c: Vec<f64> = reports.iter().filter(|r| r.n == n).map(|r| r.c_measured).collect();
        let (lo, hi) = c.iter().fold((f64::INFINITY, 0f64), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        if hi > 4.0 * lo {
            bad.push(format!("n = {n}: c ranges over [{lo:.4}, {hi:.4}]"));
        }
        bands.push(format!("n={n} c in [{lo:.4}, {hi:.4}]"));
    }
    let mut art = Artifacts::default();
    let rows = reports.iter().map(|r| {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            r.n, r.q, r.vertices, r.degree, r.method, r.lambda2, r.residual, r.iterations, r.c_measured
        )
    });
    art.add("spectrum.csv", csv("n,q,N,d,method,lambda2,residual,iterations,c_measured", rows));
    art.add("spectrum.json", serde_json::to_string_pretty(&reports).unwrap());
    let detail = format!(
        "{} runs, lambda(2,3) = {lambda23:.9}, (2,5) power {:.1}s, {} {}",
        reports.len(),
        big_secs.as_secs_f64(),
        bands.join(", "),
        bad.join("; ")
    );
    ((Verdict { pass: bad.is_empty(), detail }, art), lambda23)
}

fn random_vertex_set(g: &SumProductDigraph, seed: u64) -> VertexSet {
    let n = g.vertex_count();
    let mut r = rng(seed);
    let k = r.random_range(1..=n / 4);
    VertexSet::from_vertices(g, sample(&mut r, n as usize, k as usize).into_iter().map(|p| g.unpack(p as u64)))
}

fn mixing(lambda: f64) -> Outcome {
    let g = graph(2, 3);
    let reports: Vec<_> = (0..100)
        .map(|i| {
            let u = random_vertex_set(&g, derive_seed(SEED, "mixing-u", i, 0));
            let v = random_vertex_set(&g, derive_seed(SEED, "mixing-v", i, 0));
            mixing_check(&g, &u, &v, lambda)
        })
        .collect();
    let violations = reports.iter().filter(|r| !r.holds).count();
    let worst = reports.iter().map(|r| r.discrepancy / r.bound).fold(0.0, f64::max);
    let mut art = Artifacts::default();
    art.add("mixing.json", serde_json::to_string_pretty(&reports).unwrap());
    let detail = format!("100 pairs, {violations} violations, largest discrepancy/bound {worst:.4}");
    (Verdict { pass: violations == 0, detail }, art)
}

fn sharpness() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    let mut rows = Vec::new();
    for (q, expected) in [(3, 33), (5, 145)] {
        let r = ring(2, q);
        let sing = r.stratum_set(Stratum::Det(Felt::ZERO)).unwrap();
        let all = MatSet::full(&r);
        let image = image_x_times_y_plus_z(&r, &sing, &all, &all).unwrap();
        let ok = sing.len() == expected && image.len() == expected;
        pass &= ok;
        parts.push(format!("(2,{q}) |A| = {}, |A(B+C)| = {}", sing.len(), image.len()));
        rows.push(format!("2,{q},{},{}", sing.len(), image.len()));
    }
    let mut art = Artifacts::default();
    art.add("sharpness.csv", csv("n,q,size_a,image", rows));
    (Verdict { pass, detail: parts.join("; ") }, art)
}

fn bijections() -> Outcome {
    let mut lemma = Vec::new();
    let mut sums = Vec::new();
    let r3 = ring(2, 3);
    let strata3: Vec<MatSet> = (0..3).map(|a| r3.stratum_set(Stratum::Det(Felt(a))).unwrap()).collect();
    let all3 = MatSet::full(&r3);
    for a in 1..3u32 {
        for b in 1..3u32 {
            for t in 0..100 {
                let s = derive_seed(SEED, "lemma24-3", (a * 3 + b) as u64, t);
                let da = random_subset(&r3, &strata3[a as usize], quarter(), derive_seed(s, "alpha", 0, 0)).unwrap();
                let db = random_subset(&r3, &strata3[b as usize], quarter(), derive_seed(s, "beta", 0, 0)).unwrap();
                lemma.push(lemma24_check(&r3, &da, &db, Felt(a), Felt(b)).unwrap());
            }
        }
        for t in 0..100 {
            let s = derive_seed(SEED, "scaled-sum-3", a as u64, t);
            let x = random_subset(&r3, &strata3[a as usize], quarter(), derive_seed(s, "x", 0, 0)).unwrap();
            let y = random_subset(&r3, &all3, quarter(), derive_seed(s, "y", 0, 0)).unwrap();
            sums.push(scaled_sum_check(&r3, &x, &y, Felt(a)).unwrap());
        }
    }
    let r5 = ring(2, 5);
    let strata5: Vec<MatSet> = (0..5).map(|a| r5.stratum_set(Stratum::Det(Felt(a))).unwrap()).collect();
    let all5 = MatSet::full(&r5);
    for t in 0..1000 {
        let s = derive_seed(SEED, "bijection-5", t, 0);
        let mut pick = rng(s);
        let (a, b) = (pick.random_range(1..5u32), pick.random_range(1..5u32));
        let da = random_subset(&r5, &strata5[a as usize], quarter(), derive_seed(s, "alpha", 0, 0)).unwrap();
        let db = random_subset(&r5, &strata5[b as usize], quarter(), derive_seed(s, "beta", 0, 0)).unwrap();
        lemma.push(lemma24_check(&r5, &da, &db, Felt(a), Felt(b)).unwrap());
        let y = random_subset(&r5, &all5, quarter(), derive_seed(s, "y", 0, 0)).unwrap();
        sums.push(scaled_sum_check(&r5, &da, &y, Felt(a)).unwrap());
    }
    let bad_lemma = lemma.iter().filter(|r| !r.holds).count();
    let bad_sums = sums.iter().filter(|r| !r.holds).count();
    let mut art = Artifacts::default();
    art.add("lemma24.json", serde_json::to_string(&lemma).unwrap());
    art.add("scaled-sum.json", serde_json::to_string(&sums).unwrap());
    let detail = format!(
        "product identity {} checks, {bad_lemma} violations; scaled sum {} checks, {bad_sums} violations",
        lemma.len(),
        sums.len()
    );
    (Verdict { pass: bad_lemma + bad_sums == 0, detail }, art)
}

fn embeddings() -> Outcome {
    let g = graph(2, 3);
    let r = g.ring();
    let all = MatSet::full(r);
    let gl = r.stratum_set(Stratum::Gl).unwrap();
    let cover = 62;
    let big = Density::new(cover, r.size()).unwrap();
    let mut reports = Vec::new();
    for i in 0..50 {
        let s = derive_seed(SEED, "embeddings", i, 0);
        let a_gl = random_subset(r, &gl, quarter(), derive_seed(s, "a-gl", 0, 0)).unwrap();
        let a = random_subset(r, &all, quarter(), derive_seed(s, "a", 0, 0)).unwrap();
        let b = random_subset(r, &all, quarter(), derive_seed(s, "b", 0, 0)).unwrap();
        let c = random_subset(r, &all, quarter(), derive_seed(s, "c", 0, 0)).unwrap();
        let cases = [
            (EmbeddingTheorem::T1_7, EmbeddingInput { a: &a_gl, b: &b, c: &c, target: MatIndex(0) }),
            (EmbeddingTheorem::T1_8, EmbeddingInput { a: &a, b: &b, c: &c, target: MatIndex(0) }),
            (EmbeddingTheorem::T1_10, EmbeddingInput::single(&a_gl)),
        ];
        for (t, input) in cases {
            reports.push(embedding_edge_check(&g, t, input).unwrap());
        }
        let a_big = random_subset(r, &all, big, derive_seed(s, "a-cover", 0, 0)).unwrap();
        assert!(a_big.len() >= cover);
        let mut pick = rng(derive_seed(s, "targets", 0, 0));
        for _ in 0..10 {
            let target = MatIndex(pick.random_range(0..r.size()) as u32);
            let input = EmbeddingInput { target, ..EmbeddingInput::single(&a_big) };
            reports.push(embedding_edge_check(&g, EmbeddingTheorem::T1_9, input).unwrap());
        }
    }
    let mut parts = Vec::new();
    for t in EmbeddingTheorem::ALL {
        let of_t: Vec<_> = reports.iter().filter(|r| r.theorem == t).collect();
        let failed = of_t.iter().filter(|r| !r.holds).count();
        parts.push(format!("{t} {}/{} hold", of_t.len() - failed, of_t.len()));
    }
    let mut art = Artifacts::default();
    art.add("embeddings.json", serde_json::to_string(&reports).unwrap());
    (Verdict { pass: reports.iter().all(|r| r.holds), detail: parts.join(", ") }, art)
}

fn sweeps() -> Outcome {
    let densities: Vec<Density> = [64, 32, 16, 8, 4, 2, 1].iter().map(|&d| Density::new(1, d).unwrap()).collect();
    let mut art = Artifacts::default();
    let mut parts = Vec::new();
    let mut pass = true;
    let mut curve = Vec::new();
    for poly in [Polynomial::XPlusYz, Polynomial::XTimesYPlusZ, Polynomial::XyPlusZPlusT] {
        let config = ExperimentConfig {
            n: 2,
            q: 3,
            polynomial: poly,
            domains: vec![Domain::All],
            densities: densities.clone(),
            trials: 50,
            seed: derive_seed(SEED, "sweep", 0, 0),
            allow_even: false,
        };
        let rows = threshold_sweep(&config).unwrap();
        // Integer image totals avoid rounding in the monotonicity test.
        let totals: Vec<u64> =
            densities.iter().map(|d| rows.iter().filter(|r| r.density == *d).map(|r| r.stats.image).sum()).collect();
        let monotone = totals.windows(2).all(|w| w[0] <= w[1]);
        let full = *totals.last().unwrap() == 50 * 81;
        pass &= monotone && full;
        let means: Vec<String> = totals.iter().map(|t| format!("{:.4}", *t as f64 / (50.0 * 81.0))).collect();
        parts.push(format!("{poly}: {}{}", means.join(" "), if monotone { "" } else { " NOT MONOTONE" }));
        for (d, t) in densities.iter().zip(&totals) {
            curve.push(format!(
                "{poly},{d},{},{},{}",
                *t as f64 / (50.0 * 81.0),
                rows[0].predicted_threshold_size,
                rows[0].predicted_threshold_density
            ));
        }
        art.add(format!("sweep-{poly}.csv"), csv(SweepRow::csv_header(), rows.iter().map(SweepRow::csv_row)));
    }
    art.add(
        "sweep-curves.csv",
        csv("polynomial,density,mean_coverage,predicted_threshold_size,predicted_threshold_density", curve),
    );
    (Verdict { pass, detail: format!("mean coverage by density 1/64..1: {}", parts.join("; ")) }, art)
}

/// Runs criteria 1 to 8 in order.
fn run_all() -> Vec<(&'static str, Outcome)> {
    let mut out = vec![("counting exactness", counting()), ("M M^t oracle equivalence", oracle())];
    let (spec, lambda) = spectral();
    out.push(("spectral estimate", spec));
    out.push(("mixing audit", mixing(lambda)));
    out.push(("sharpness", sharpness()));
    out.push(("bijection identities", bijections()));
    out.push(("embedding lower bounds", embeddings()));
    out.push(("coverage curves", sweeps()));
    out
}

fn main() -> ExitCode {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    fs::create_dir_all(&dir).expect("artifact directory");
    let first = run_all();
    let mut failed = 0;
    for (i, (name, (verdict, art))) in first.iter().enumerate() {
        for (file, text) in &art.0 {
            fs::write(dir.join(file), text).expect("write artifact");
        }
        failed += !verdict.pass as usize;
        println!(
            "criterion {}: {} {name}: {}",
            i + 1,
            if verdict.pass { "PASS" } else { "FAIL" },
            verdict.detail.trim()
        );
    }

    let second = run_all();
    let differing: Vec<String> = first
        .iter()
        .zip(&second)
        .flat_map(|((_, (_, a)), (_, (_, b)))| {
            a.0.iter().zip(&b.0).filter(|(x, y)| x != y).map(|(x, _)| x.0.clone()).collect::<Vec<_>>()
        })
        .collect();
    let files: usize = first.iter().map(|(_, (_, a))| a.0.len()).sum();
    let same_shape = first.iter().zip(&second).all(|((_, (_, a)), (_, (_, b)))| a.0.len() == b.0.len());
    let pass = differing.is_empty() && same_shape;
    failed += !pass as usize;
    println!(
        "criterion 9: {} reproducibility: {files} artifacts from criteria 1-8 re-run with seed {SEED}, {} differ {}",
        if pass { "PASS" } else { "FAIL" },
        differing.len(),
        differing.join(" ")
    );
    println!("artifacts: {}", dir.display());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
