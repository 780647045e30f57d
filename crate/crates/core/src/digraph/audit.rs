//! Pairwise audits of the common-neighbour structure: normality
//! (`|N+| = |N-|`), the solvability oracle, and the class-by-class
//! decomposition of `M M^t`.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use serde::Serialize;

use super::{SumProductDigraph, Vertex};
use crate::seed;

/// Which vertex pairs an audit examines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairScope {
    /// Every ordered pair.
    Exhaustive,
    /// `count` ordered pairs drawn uniformly with the given seed.
    Sample { count: u64, seed: u64 },
}

impl PairScope {
    fn pairs<'a>(&self, g: &'a SumProductDigraph) -> Box<dyn Iterator<Item = (Vertex, Vertex)> + 'a> {
        let n = g.vertex_count();
        match *self {
            PairScope::Exhaustive => {
                Box::new((0..n).flat_map(move |p| (0..n).map(move |r| (g.unpack(p), g.unpack(r)))))
            }
            PairScope::Sample { count, seed } => {
                let mut rng = seed::rng(seed);
                Box::new((0..count).map(move |_| {
                    let p = rng.random_range(0..n);
                    let r = rng.random_range(0..n);
                    (g.unpack(p), g.unpack(r))
                }))
            }
        }
    }
}

/// Which equality failed for a pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Relation {
    /// `common_out` disagrees with the solvability prediction.
    OutVsPredicted,
    /// `common_in` disagrees with the solvability prediction (normality).
    InVsPredicted,
    /// `common_out` disagrees with the class formula for `M M^t`.
    OutVsClass,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::OutVsPredicted => "out-vs-predicted",
            Relation::InVsPredicted => "in-vs-predicted",
            Relation::OutVsClass => "out-vs-class",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairMismatch {
    pub relation: Relation,
    pub a1: u32,
    pub c1: u32,
    pub a2: u32,
    pub c2: u32,
    pub expected: u64,
    pub actual: u64,
}

impl PairMismatch {
    pub fn csv_header() -> &'static str {
        "a1,c1,a2,c2,expected,actual"
    }

    pub fn csv_row(&self) -> String {
        format!("{},{},{},{},{},{}", self.a1, self.c1, self.a2, self.c2, self.expected, self.actual)
    }
}

/// Where an ordered pair `((A1, C1), (A2, C2))` falls in the decomposition
/// of `M M^t`, with `P = A1 - A2`, `Q = C1 - C2`, `m = rank P`, `k = rank Q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum PairClass {
    Diagonal,
    /// `det P != 0`: only the all-ones term contributes.
    Invertible,
    /// `det P = 0`, `det Q != 0`.
    E0n,
    /// `m < k < n`.
    E {
        m: usize,
        k: usize,
    },
    /// `k <= m < n`, `P X = Q` inconsistent.
    F {
        m: usize,
        k: usize,
    },
    /// `k <= m < n`, `P X = Q` consistent.
    H {
        m: usize,
        k: usize,
    },
}

impl fmt::Display for PairClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PairClass::Diagonal => write!(f, "diagonal"),
            PairClass::Invertible => write!(f, "invertible"),
            PairClass::E0n => write!(f, "E0n"),
            PairClass::E { m, k } => write!(f, "E{m}{k}"),
            PairClass::F { m, k } => write!(f, "F{m}{k}"),
            PairClass::H { m, k } => write!(f, "H{m}{k}"),
        }
    }
}

impl SumProductDigraph {
    pub fn classify_pair(&self, u: Vertex, v: Vertex) -> PairClass {
        if u == v {
            return PairClass::Diagonal;
        }
        let r = self.ring();
        let n = r.n();
        let p = r.sub_idx(u.a, v.a);
        let q = r.sub_idx(u.c, v.c);
        let (m, k) = (r.rank_idx(p), r.rank_idx(q));
        if m == n {
            return PairClass::Invertible;
        }
        if k == n {
            return PairClass::E0n;
        }
        if m < k {
            return PairClass::E { m, k };
        }
        let solvable = r.solve_matrix_equation(&r.decode(p), &r.decode(q)).expect("ring members").solvable;
        if solvable {
            PairClass::H { m, k }
        } else {
            PairClass::F { m, k }
        }
    }

    /// `(M M^t)_{uv}` read off the decomposition
    /// `(d - 1) I + J - E_{0n} - sum E_{mk} - sum F_{mk} + sum (q^{n(n-m)} - 1) H_{mk}`.
    pub fn class_prediction(&self, class: PairClass) -> u64 {
        let d = self.degree();
        let q = self.ring().q() as u64;
        let n = self.ring().n() as u32;
        match class {
            PairClass::Diagonal => (d - 1) + 1,
            PairClass::Invertible => 1,
            PairClass::E0n | PairClass::E { .. } | PairClass::F { .. } => 0, // J cancels the E or F term
            PairClass::H { m, .. } => (q.pow(n * (n - m as u32)) - 1) + 1,
        }
    }
}

/// Outcome of a pairwise audit.
#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub name: String,
    pub examined: u64,
    /// Failures per relation.
    pub failures: BTreeMap<String, u64>,
    /// Pairs examined per class (decomposition audit only).
    pub classes: BTreeMap<String, u64>,
    /// The first few counterexamples, verbatim.
    pub counterexamples: Vec<PairMismatch>,
}

const KEPT_COUNTEREXAMPLES: usize = 1000;

impl AuditReport {
    fn new(name: &str) -> Self {
        AuditReport {
            name: name.to_string(),
            examined: 0,
            failures: BTreeMap::new(),
            classes: BTreeMap::new(),
            counterexamples: Vec::new(),
        }
    }

    fn record(&mut self, relation: Relation, u: Vertex, v: Vertex, expected: u64, actual: u64) {
        *self.failures.entry(relation.to_string()).or_default() += 1;
        if self.counterexamples.len() < KEPT_COUNTEREXAMPLES {
            self.counterexamples.push(PairMismatch {
                relation,
                a1: u.a.0,
                c1: u.c.0,
                a2: v.a.0,
                c2: v.c.0,
                expected,
                actual,
            });
        }
    }

    pub fn failure_count(&self, relation: Relation) -> u64 {
        self.failures.get(&relation.to_string()).copied().unwrap_or(0)
    }

    pub fn total_failures(&self) -> u64 {
        self.failures.values().sum()
    }

    pub fn passed(&self) -> bool {
        self.total_failures() == 0
    }
}

/// Checks `common_out = common_in = predicted_common` on every examined pair.
/// A failure of `in-vs-predicted` with `out-vs-predicted` intact means the
/// adjacency matrix is not normal.
pub fn check_normal(g: &SumProductDigraph, scope: PairScope) -> AuditReport {
    let mut report = AuditReport::new("normality");
    for (u, v) in scope.pairs(g) {
        report.examined += 1;
        let predicted = g.predicted_common(u, v);
        let out = g.common_out(u, v);
        let inn = g.common_in(u, v);
        if out != predicted {
            report.record(Relation::OutVsPredicted, u, v, predicted, out);
        }
        if inn != predicted {
            report.record(Relation::InVsPredicted, u, v, predicted, inn);
        }
    }
    report
}

/// Classifies each examined pair and compares the class formula for
/// `(M M^t)_{uv}` against the streamed `common_out`.
pub fn mmt_decomposition_audit(g: &SumProductDigraph, scope: PairScope) -> AuditReport {
    let mut report = AuditReport::new("mmt-decomposition");
    for (u, v) in scope.pairs(g) {
        report.examined += 1;
        let class = g.classify_pair(u, v);
        *report.classes.entry(class.to_string()).or_default() += 1;
        let expected = g.class_prediction(class);
        let actual = g.common_out(u, v);
        if expected != actual {
            report.record(Relation::OutVsClass, u, v, expected, actual);
        }
    }
    report
}
