pub mod bitset;
pub mod counting;
pub mod digraph;
pub mod error;
pub mod field;
pub mod lab;
pub mod matrix;
pub mod seed;

pub use error::{Error, Result};
pub use field::{Felt, FieldOptions, FieldSpec};
pub use matrix::{Mat, MatIndex, MatRing, MatSet, Stratum};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    struct Introduction;
    #[doc = include_str!("../../../book/src/fields.md")]
    struct Fields;
    #[doc = include_str!("../../../book/src/matrices.md")]
    struct Matrices;
    #[doc = include_str!("../../../book/src/counting.md")]
    struct Counting;
    #[doc = include_str!("../../../book/src/digraph.md")]
    struct Digraph;
    #[doc = include_str!("../../../book/src/spectrum.md")]
    struct Spectrum;
    #[doc = include_str!("../../../book/src/experiments.md")]
    struct Experiments;
}
