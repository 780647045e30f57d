use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::Serialize;

use super::{SumProductDigraph, VertexSet};

/// Both sides of `|e(U, V) - d |U||V| / N| <= lambda sqrt(|U||V|)`.
#[derive(Debug, Clone, Serialize)]
pub struct MixingReport {
    pub size_u: u64,
    pub size_v: u64,
    pub edges: u64,
    /// `d |U||V| / N`.
    pub expected_edges: f64,
    /// `|e(U, V) - d |U||V| / N|`, from an exact rational difference.
    pub discrepancy: f64,
    pub lambda: f64,
    /// `lambda sqrt(|U||V|)`.
    pub bound: f64,
    pub holds: bool,
    /// On a violation: whether the inequality holds with `lambda = d`. It
    /// always should, so `Some(false)` points at the edge count and
    /// `Some(true)` at an underestimated `lambda`.
    pub holds_with_degree: Option<bool>,
}

/// Relative slack for comparing an exact left side with a floating right side.
const SLACK: f64 = 1e-12;

pub fn mixing_check(g: &SumProductDigraph, u: &VertexSet, v: &VertexSet, lambda: f64) -> MixingReport {
    let edges = g.edge_count(u, v);
    report_from_edges(g, u.len(), v.len(), &edges, lambda)
}

pub(crate) fn report_from_edges(
    g: &SumProductDigraph,
    size_u: u64,
    size_v: u64,
    edges: &BigUint,
    lambda: f64,
) -> MixingReport {
    let e = edges.to_u64().expect("edge count fits in u64");
    let n = g.vertex_count() as i128;
    let d = g.degree() as i128;
    // |e N - d |U||V|| / N
    let numer = (e as i128 * n - d * size_u as i128 * size_v as i128).unsigned_abs();
    let discrepancy = numer as f64 / n as f64;
    let expected_edges = (d * size_u as i128 * size_v as i128) as f64 / n as f64;
    let root = ((size_u as f64) * (size_v as f64)).sqrt();
    let bound = lambda * root;
    let holds = discrepancy <= bound * (1.0 + SLACK) + SLACK;
    let holds_with_degree = (!holds).then(|| discrepancy <= g.degree() as f64 * root * (1.0 + SLACK) + SLACK);
    MixingReport { size_u, size_v, edges: e, expected_edges, discrepancy, lambda, bound, holds, holds_with_degree }
}
