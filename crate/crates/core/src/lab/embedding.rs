//! Vertex-set embeddings of the expander images into the sum-product
//! digraph, and exact edge counts between them.
//!
//! | theorem | `U` | `V` | counted | lower bound |
//! |---|---|---|---|---|
//! | T1_7 | `{(a^-1, b)}` | `A(B+C) x C` | `U -> V` | `|A||B||C|` |
//! | T1_8 | `{(b, -a)}` | `C x (A+BC)` | `U -> V` | `|A||B||C|` |
//! | T1_9 | `{(a1, M - a3)}` | `{(a2, -a4)}` | `U -> V` | `1` |
//! | T1_10 | `(A+A) x AA` | `{(a, ab)}` | `V -> U` | `|A|^3` |
//!
//! For T1_10 the neighbours `(c + b, ac)` of `(a, ab)` are out-neighbours,
//! so the edges run from `V` into `U`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::{image_x_plus_yz, image_x_times_y_plus_z, product_set, sum_set};
use crate::digraph::{big_to_u64, SumProductDigraph, Vertex, VertexSet};
use crate::error::{Error, Result};
use crate::field::Felt;
use crate::matrix::{MatIndex, MatRing, MatSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum EmbeddingTheorem {
    #[serde(rename = "T1_7")]
    T1_7,
    #[serde(rename = "T1_8")]
    T1_8,
    #[serde(rename = "T1_9")]
    T1_9,
    #[serde(rename = "T1_10")]
    T1_10,
}

impl EmbeddingTheorem {
    pub const ALL: [EmbeddingTheorem; 4] =
        [EmbeddingTheorem::T1_7, EmbeddingTheorem::T1_8, EmbeddingTheorem::T1_9, EmbeddingTheorem::T1_10];
}

impl fmt::Display for EmbeddingTheorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EmbeddingTheorem::T1_7 => "T1_7",
            EmbeddingTheorem::T1_8 => "T1_8",
            EmbeddingTheorem::T1_9 => "T1_9",
            EmbeddingTheorem::T1_10 => "T1_10",
        })
    }
}

impl FromStr for EmbeddingTheorem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EmbeddingTheorem::ALL
            .into_iter()
            .find(|t| t.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Parse(format!("unknown theorem {s:?}")))
    }
}

/// Sets for one check. T1_9 and T1_10 read only `a`; `target` is used by
/// T1_9 alone.
#[derive(Debug, Clone, Copy)]
pub struct EmbeddingInput<'s> {
    pub a: &'s MatSet,
    pub b: &'s MatSet,
    pub c: &'s MatSet,
    pub target: MatIndex,
}

impl<'s> EmbeddingInput<'s> {
    pub fn single(a: &'s MatSet) -> Self {
        EmbeddingInput { a, b: a, c: a, target: MatIndex(0) }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EmbeddingReport {
    pub theorem: EmbeddingTheorem,
    pub size_a: u64,
    pub size_b: u64,
    pub size_c: u64,
    pub size_u: u64,
    pub size_v: u64,
    /// `"U->V"` or `"V->U"`.
    pub direction: &'static str,
    pub edges: u64,
    pub lower_bound: u64,
    pub target: Option<u32>,
    pub holds: bool,
}

fn require_gl(ring: &MatRing, a: &MatSet, theorem: EmbeddingTheorem) -> Result<()> {
    match a.iter().find(|&i| ring.det_idx(i) == Felt::ZERO) {
        Some(bad) => Err(Error::Precondition(format!("{theorem} needs A inside GL_n; element {bad} is singular"))),
        None => Ok(()),
    }
}

fn product_vertices(g: &SumProductDigraph, first: &MatSet, second: &MatSet) -> VertexSet {
    let seconds = second.to_vec();
    VertexSet::from_vertices(g, first.iter().flat_map(|x| seconds.iter().map(move |&y| Vertex::new(x, y))))
}

/// Builds `U` and `V` for `theorem`, counts the edges between them, and
/// checks the lower bound from the embedding argument.
pub fn embedding_edge_check(
    g: &SumProductDigraph,
    theorem: EmbeddingTheorem,
    input: EmbeddingInput<'_>,
) -> Result<EmbeddingReport> {
    let ring = g.ring();
    let EmbeddingInput { a, b, c, target } = input;
    for s in [a, b, c] {
        s.require(ring)?;
    }
    let (size_a, size_b, size_c) = (a.len(), b.len(), c.len());
    let mut report_target = None;
    let (u, v, from_u, lower_bound) = match theorem {
        EmbeddingTheorem::T1_7 => {
            require_gl(ring, a, theorem)?;
            let inverses =
                a.iter().map(|x| ring.encode(&ring.inverse(&ring.decode(x))?)).collect::<Result<Vec<_>>>()?;
            let bs = b.to_vec();
            let u = VertexSet::from_vertices(
                g,
                inverses.iter().flat_map(|&ai| bs.iter().map(move |&y| Vertex::new(ai, y))),
            );
            let v = product_vertices(g, &image_x_times_y_plus_z(ring, a, b, c)?, c);
            (u, v, true, size_a * size_b * size_c)
        }
        EmbeddingTheorem::T1_8 => {
            let neg_a = MatSet::from_indices(ring, a.iter().map(|x| ring.neg_idx(x)));
            let u = product_vertices(g, b, &neg_a);
            let v = product_vertices(g, c, &image_x_plus_yz(ring, a, b, c)?);
            (u, v, true, size_a * size_b * size_c)
        }
        EmbeddingTheorem::T1_9 => {
            ring.index(target.get())?;
            report_target = Some(target.0);
            let shifted = MatSet::from_indices(ring, a.iter().map(|x| ring.sub_idx(target, x)));
            let neg_a = MatSet::from_indices(ring, a.iter().map(|x| ring.neg_idx(x)));
            (product_vertices(g, a, &shifted), product_vertices(g, a, &neg_a), true, 1)
        }
        EmbeddingTheorem::T1_10 => {
            require_gl(ring, a, theorem)?;
            let u = product_vertices(g, &sum_set(ring, a, a)?, &product_set(ring, a, a)?);
            let as_ = a.to_vec();
            let v = VertexSet::from_vertices(
                g,
                as_.iter().flat_map(|&x| as_.iter().map(move |&y| Vertex::new(x, ring.mul_idx(x, y)))),
            );
            (u, v, false, size_a.pow(3))
        }
    };
    let edges = if from_u { g.edge_count(&u, &v) } else { g.edge_count(&v, &u) };
    let edges = big_to_u64(&edges);
    Ok(EmbeddingReport {
        theorem,
        size_a,
        size_b,
        size_c,
        size_u: u.len(),
        size_v: v.len(),
        direction: if from_u { "U->V" } else { "V->U" },
        edges,
        lower_bound,
        target: report_target,
        holds: edges >= lower_bound,
    })
}
