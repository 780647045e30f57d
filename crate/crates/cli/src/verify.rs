//! `verify`: every exact check for one `(n, q)`, in dependency order.

use anyhow::Result;
use matexp::counting::{
    count_all, count_rank, count_solvable_targets, count_stratum, enumerated_count, solvable_targets_closed_form,
};
use matexp::digraph::{
    check_normal, mmt_decomposition_audit, AuditReport, PairScope, Relation, SumProductDigraph, Vertex,
};
use matexp::lab::{
    embedding_edge_check, image_x_times_y_plus_z, lemma24_check, random_subset, scaled_sum_check, Density,
    EmbeddingInput, EmbeddingTheorem,
};
use matexp::matrix::TABLE_MAX;
use matexp::seed::{derive_seed, rng};
use matexp::{Felt, FieldSpec, MatIndex, MatRing, MatSet, Stratum};
use num_bigint::BigUint;
use rand::Rng;

use crate::args::{Level, VerifyArgs};
use crate::output::{Check, Run};
use crate::{build_ring, counterexample_rows};

/// Largest ring scanned in full by the matrix and counting suites.
const ENUMERATION_MAX: u64 = 20_000;
/// Ordered vertex pairs up to which pair audits are exhaustive.
const EXHAUSTIVE_PAIRS_MAX: u64 = 1_000_000;
/// Neighbour visits allowed for one pair audit.
const PAIR_WORK_MAX: u64 = 50_000_000;

struct Plan {
    level: Level,
    seed: u64,
}

impl Plan {
    fn pick(&self, quick: u64, full: u64) -> u64 {
        match self.level {
            Level::Quick => quick,
            Level::Full => full,
        }
    }

    fn seed(&self, suite: &str) -> u64 {
        derive_seed(self.seed, suite, 0, 0)
    }
}

pub fn run(args: &VerifyArgs, mut out: Run, seed: u64) -> Result<bool> {
    let ring = build_ring(&args.ring)?;
    let plan = Plan { level: args.level, seed };
    out.seed("root", seed);
    let g = SumProductDigraph::new(ring.clone());

    out.suite("field-axioms", || Ok(field_axioms(ring.field(), &plan)))?;
    out.suite("matrix-ring", || matrix_ring(&ring, &plan))?;
    out.suite("exact-counting", || counting(&ring, &plan))?;
    digraph_suites(&g, &plan, &mut out)?;
    out.suite("sharpness", || sharpness(&ring))?;
    out.suite("lemma24", || lemma24(&ring, &plan))?;
    out.suite("scaled-sum", || scaled_sum(&ring, &plan))?;
    out.suite("embeddings", || embeddings(&g, &plan))?;

    for s in out.suites() {
        eprintln!(
            "{:<22} {:?} {}/{} {}",
            s.name,
            s.status,
            s.examined - s.failures.min(s.examined),
            s.examined,
            s.detail
        );
    }
    out.finish()
}

fn field_axioms(f: &FieldSpec, plan: &Plan) -> Check {
    let q = f.q();
    let el: Vec<Felt> = f.elements().collect();
    let mut c = Check::default();
    let triples: Vec<(Felt, Felt, Felt)> = if q <= 9 {
        let el = &el;
        el.iter().flat_map(|&a| el.iter().flat_map(move |&b| el.iter().map(move |&x| (a, b, x)))).collect()
    } else {
        let mut r = rng(plan.seed("field"));
        (0..plan.pick(10_000, 100_000))
            .map(|_| (Felt(r.random_range(0..q)), Felt(r.random_range(0..q)), Felt(r.random_range(0..q))))
            .collect()
    };
    for (a, b, x) in triples {
        let ok = f.add(f.add(a, b), x) == f.add(a, f.add(b, x))
            && f.mul(f.mul(a, b), x) == f.mul(a, f.mul(b, x))
            && f.add(a, b) == f.add(b, a)
            && f.mul(a, b) == f.mul(b, a)
            && f.mul(a, f.add(b, x)) == f.add(f.mul(a, b), f.mul(a, x));
        c.expect_with(ok, || format!("axioms fail at ({a}, {b}, {x})"));
    }
    for &a in &el {
        c.expect_with(f.add(a, f.neg(a)) == Felt::ZERO && f.mul(a, Felt::ONE) == a, || {
            format!("identities fail at {a}")
        });
        if a.is_zero() {
            continue;
        }
        let ok = match f.inv(a) {
            Ok(i) => f.mul(a, i) == Felt::ONE && f.inv(i).ok() == Some(a),
            Err(_) => false,
        };
        c.expect_with(ok, || format!("inverse fails at {a}"));
        c.expect_with(f.pow(a, q as i64 - 1).ok() == Some(Felt::ONE), || format!("{a}^(q-1) != 1"));
    }
    c.expect_with(f.inv(Felt::ZERO).is_err(), || "inv(0) accepted".into());
    c
}

/// Either every index of the ring or a seeded sample of `count`.
fn indices(ring: &MatRing, count: u64, seed: u64) -> Vec<MatIndex> {
    if ring.size() <= count {
        ring.all_indices().collect()
    } else {
        let mut r = rng(seed);
        (0..count).map(|_| MatIndex(r.random_range(0..ring.size()) as u32)).collect()
    }
}

fn matrix_ring(ring: &MatRing, plan: &Plan) -> Result<Check> {
    let n = ring.n();
    let size = ring.size();
    let mut c = Check::default();
    let singles = indices(ring, ENUMERATION_MAX, plan.seed("matrix-singles"));
    for &i in &singles {
        let m = ring.decode(i);
        c.expect_with(ring.encode(&m)? == i, || format!("index {i} does not round-trip"));
        c.expect_with((ring.rank(&m) == n) == !ring.det(&m).is_zero(), || format!("rank/det disagree at {i}"));
    }
    for &i in singles.iter().filter(|&&i| !ring.det_idx(i).is_zero()).take(1000) {
        let m = ring.decode(i);
        c.expect_with(ring.mul(&m, &ring.inverse(&m)?)? == ring.identity(), || format!("inverse fails at {i}"));
    }

    let pairs: Vec<(MatIndex, MatIndex)> = if size * size <= 100_000 {
        ring.all_indices().flat_map(|a| ring.all_indices().map(move |b| (a, b))).collect()
    } else {
        let mut r = rng(plan.seed("matrix-pairs"));
        (0..plan.pick(10_000, 100_000))
            .map(|_| (MatIndex(r.random_range(0..size) as u32), MatIndex(r.random_range(0..size) as u32)))
            .collect()
    };
    let f = ring.field();
    for &(a, b) in &pairs {
        let ok = ring.det_idx(ring.mul_idx(a, b)) == f.mul(ring.det_idx(a), ring.det_idx(b));
        c.expect_with(ok, || format!("det not multiplicative at ({a}, {b})"));
    }

    // Solution counts of A X = C against a scan over X.
    if size <= 625 {
        let take = if plan.level == Level::Full && size <= 81 { pairs.len() } else { plan.pick(100, 1000) as usize };
        for &(a, cc) in pairs.iter().take(take) {
            let brute = ring.all_indices().filter(|&x| ring.mul_idx(a, x) == cc).count() as u64;
            let s = ring.solve_matrix_equation(&ring.decode(a), &ring.decode(cc))?;
            c.expect_with(s.solution_count == BigUint::from(brute) && s.solvable == (brute > 0), || {
                format!("solve({a}, {cc}) counts {} but a scan finds {brute}", s.solution_count)
            });
        }
    }
    Ok(c)
}

fn counting(ring: &MatRing, plan: &Plan) -> Result<Check> {
    let (n, q) = (ring.n(), ring.q());
    if ring.size() > ENUMERATION_MAX {
        return Ok(Check::skipped(format!("{} matrices exceed the enumeration cap of {ENUMERATION_MAX}", ring.size())));
    }
    let mut c = Check::default();
    let mut strata = vec![Stratum::All, Stratum::Gl, Stratum::Sl];
    strata.extend((0..q).map(|a| Stratum::Det(Felt(a))));
    strata.extend((0..=n).map(Stratum::Rank));
    for s in strata {
        let closed = count_stratum(n, q, s)?;
        let scanned = enumerated_count(ring, s)?;
        c.expect_with(closed == scanned, || format!("{s}: closed form {closed}, enumeration {scanned}"));
    }
    let total: BigUint = (0..=n).map(|m| count_rank(n, m, q)).sum::<matexp::Result<BigUint>>()?;
    c.expect_with(total == count_all(n, q), || "rank counts do not sum to q^(n^2)".into());

    if ring.size() <= 625 {
        for a in indices(ring, plan.pick(5, 20), plan.seed("counting-targets")) {
            let a = ring.decode(a);
            let m = ring.rank(&a);
            for k in 0..=n {
                let t = count_solvable_targets(ring, &a, k)?;
                let closed = solvable_targets_closed_form(n, m, k, q);
                c.expect_with(t.count == closed, || format!("N_C for rank {m}, k = {k}: {} vs {closed}", t.count));
            }
        }
    }
    Ok(c)
}

fn pair_scope(g: &SumProductDigraph, plan: &Plan, label: &str) -> (PairScope, String) {
    let n = g.vertex_count();
    if n.checked_mul(n).is_some_and(|p| p <= EXHAUSTIVE_PAIRS_MAX) {
        return (PairScope::Exhaustive, "exhaustive".into());
    }
    let wanted = plan.pick(10_000, 100_000);
    let count = wanted.min((PAIR_WORK_MAX / g.degree()).max(100));
    (PairScope::Sample { count, seed: plan.seed(label) }, format!("{count} sampled pairs"))
}

fn audit_check(report: &AuditReport, relation: Relation, scope: &str) -> Check {
    let failures = report.failure_count(relation);
    Check { examined: report.examined, failures, skipped: false, detail: format!("{scope}, {failures} mismatches") }
}

fn digraph_suites(g: &SumProductDigraph, plan: &Plan, out: &mut Run) -> Result<()> {
    let start = std::time::Instant::now();
    let mut reg = Check::default();
    let d = g.degree();
    let mut r = rng(plan.seed("regularity"));
    let count = if g.vertex_count() <= 100 { g.vertex_count() } else { 100 };
    for k in 0..count {
        let v = if g.vertex_count() <= 100 { g.unpack(k) } else { g.unpack(r.random_range(0..g.vertex_count())) };
        reg.expect_with(g.out_neighbors(v).count() as u64 == d, || format!("out-degree of {v:?}"));
        reg.expect_with(g.in_neighbors(v).count() as u64 == d, || format!("in-degree of {v:?}"));
        let outs: Vec<Vertex> = g.out_neighbors(v).take(3).collect();
        for w in outs {
            reg.expect_with(g.has_edge(v, w) && g.in_neighbors(w).any(|x| x == v), || {
                format!("duality at {v:?} -> {w:?}")
            });
        }
    }
    if g.vertex_count() <= 10_000 {
        reg.expect_with(g.is_strongly_connected(10_000)?, || "not strongly connected".into());
    }
    out.record("digraph-regularity", reg, start.elapsed().as_secs_f64());

    let (scope, label) = pair_scope(g, plan, "normality");
    let start = std::time::Instant::now();
    let normal = check_normal(g, scope);
    let secs = start.elapsed().as_secs_f64();
    out.record("digraph-oracle", audit_check(&normal, Relation::OutVsPredicted, &label), secs);
    out.record("digraph-normality", audit_check(&normal, Relation::InVsPredicted, &label), 0.0);
    let (scope, label) = pair_scope(g, plan, "decomposition");
    let start = std::time::Instant::now();
    let decomposition = mmt_decomposition_audit(g, scope);
    out.record(
        "mmt-decomposition",
        audit_check(&decomposition, Relation::OutVsClass, &label),
        start.elapsed().as_secs_f64(),
    );
    for report in [&normal, &decomposition] {
        if !report.passed() {
            for (relation, rows) in counterexample_rows(report) {
                out.write_csv(
                    &format!("verify-counterexamples-{relation}.csv"),
                    matexp::digraph::PairMismatch::csv_header(),
                    rows,
                )?;
            }
        }
    }
    Ok(())
}

fn sharpness(ring: &MatRing) -> Result<Check> {
    if ring.size() > TABLE_MAX {
        return Ok(Check::skipped("ring too large for full-ring images"));
    }
    let mut c = Check::default();
    let all = MatSet::full(ring);
    let sing = ring.stratum_set(Stratum::Det(Felt::ZERO))?;
    let img = image_x_times_y_plus_z(ring, &sing, &all, &all)?;
    c.expect_with(img == sing, || format!("|A(B+C)| = {} but |A| = {}", img.len(), sing.len()));
    let img = image_x_times_y_plus_z(ring, &sing, &sing, &sing)?;
    c.expect_with(img.len() == sing.len(), || format!("|A(A+A)| = {} but |A| = {}", img.len(), sing.len()));
    Ok(c.note(format!("|A| = {}", sing.len())))
}

fn quarter() -> Density {
    Density::new(1, 4).expect("1/4 is a valid density")
}

fn lemma24(ring: &MatRing, plan: &Plan) -> Result<Check> {
    let q = ring.q();
    let trials = plan.pick(10, 100);
    let mut c = Check::default();
    let strata: Vec<MatSet> = (0..q).map(|a| ring.stratum_set(Stratum::Det(Felt(a)))).collect::<matexp::Result<_>>()?;
    for a in 1..q {
        for b in 1..q {
            for t in 0..trials {
                let s = derive_seed(plan.seed, "lemma24", (a * q + b) as u64, t);
                let da = random_subset(ring, &strata[a as usize], quarter(), derive_seed(s, "alpha", 0, 0))?;
                let db = random_subset(ring, &strata[b as usize], quarter(), derive_seed(s, "beta", 0, 0))?;
                let rep = lemma24_check(ring, &da, &db, Felt(a), Felt(b))?;
                c.expect_with(rep.holds, || format!("{rep:?}"));
            }
        }
    }
    Ok(c)
}

fn scaled_sum(ring: &MatRing, plan: &Plan) -> Result<Check> {
    let q = ring.q();
    let trials = plan.pick(10, 100);
    let all = MatSet::full(ring);
    let mut c = Check::default();
    for a in 1..q {
        let stratum = ring.stratum_set(Stratum::Det(Felt(a)))?;
        for t in 0..trials {
            let s = derive_seed(plan.seed, "scaled-sum", a as u64, t);
            let x = random_subset(ring, &stratum, quarter(), derive_seed(s, "x", 0, 0))?;
            let y = random_subset(ring, &all, quarter(), derive_seed(s, "y", 0, 0))?;
            let rep = scaled_sum_check(ring, &x, &y, Felt(a))?;
            c.expect_with(rep.holds, || format!("{rep:?}"));
        }
    }
    Ok(c)
}

/// `ceil(q^{n^2 - 1/4})`, the set size at which `xy + z + t` is expected
/// to cover.
pub fn cover_size(ring: &MatRing) -> u64 {
    let e = (ring.n() * ring.n()) as f64 - 0.25;
    ((ring.q() as f64).powf(e).ceil() as u64).min(ring.size())
}

fn embeddings(g: &SumProductDigraph, plan: &Plan) -> Result<Check> {
    let ring = g.ring();
    if ring.size() > TABLE_MAX {
        return Ok(Check::skipped("ring too large for embedding edge counts"));
    }
    let instances = plan.pick(5, 50);
    let all = MatSet::full(ring);
    let gl = ring.stratum_set(Stratum::Gl)?;
    let big = Density::new(cover_size(ring), ring.size())?;
    let mut c = Check::default();
    for i in 0..instances {
        let s = derive_seed(plan.seed, "embeddings", i, 0);
        let a_gl = random_subset(ring, &gl, quarter(), derive_seed(s, "a-gl", 0, 0))?;
        let a = random_subset(ring, &all, quarter(), derive_seed(s, "a", 0, 0))?;
        let b = random_subset(ring, &all, quarter(), derive_seed(s, "b", 0, 0))?;
        let cc = random_subset(ring, &all, quarter(), derive_seed(s, "c", 0, 0))?;
        let cases = [
            (EmbeddingTheorem::T1_7, EmbeddingInput { a: &a_gl, b: &b, c: &cc, target: MatIndex(0) }),
            (EmbeddingTheorem::T1_8, EmbeddingInput { a: &a, b: &b, c: &cc, target: MatIndex(0) }),
            (EmbeddingTheorem::T1_10, EmbeddingInput::single(&a_gl)),
        ];
        for (t, input) in cases {
            let rep = embedding_edge_check(g, t, input)?;
            c.expect_with(rep.holds, || format!("{t}: {} edges below {}", rep.edges, rep.lower_bound));
        }
        let a_big = random_subset(ring, &all, big, derive_seed(s, "a-cover", 0, 0))?;
        let mut r = rng(derive_seed(s, "targets", 0, 0));
        for _ in 0..10 {
            let target = MatIndex(r.random_range(0..ring.size()) as u32);
            let rep = embedding_edge_check(
                g,
                EmbeddingTheorem::T1_9,
                EmbeddingInput { target, ..EmbeddingInput::single(&a_big) },
            )?;
            c.expect_with(rep.holds, || format!("T1_9: no edge for target {target} with |A| = {}", a_big.len()));
        }
    }
    Ok(c.note(format!("{instances} instances per theorem, |A| = {} for T1_9", cover_size(ring))))
}
