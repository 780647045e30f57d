//! Image-size experiments: exact images of `x + yz`, `x(y + z)`,
//! `xy + z + t`, sum and product sets, and the determinant-stratum
//! machinery used to move sets into `SL_n`.
//!
//! Every image is built in two passes over bitsets: first the inner binary
//! operation, then the outer one. The work is `|X||Y|` per pass, never the
//! product of all argument sizes.

mod embedding;
mod strata;
mod sweep;

use num_bigint::BigUint;
use rand::seq::index;

use crate::error::{Error, Result};
use crate::matrix::{Mat, MatIndex, MatRing, MatSet};
use crate::seed;

pub use embedding::{embedding_edge_check, EmbeddingInput, EmbeddingReport, EmbeddingTheorem};
pub use strata::{
    det_strata_partition, largest_det_class, lemma24_check, scaled_sum_check, Lemma24Report, ScaledSumReport,
};
pub use sweep::{
    mean_coverage, threshold_sweep, Density, Domain, ExperimentConfig, ImageStats, Polynomial, SweepRow, SWEEP_LABEL,
};

/// Largest `|X||Y|` a single binary pass will attempt.
pub const MAX_PAIR_WORK: u64 = 1 << 36;

#[derive(Clone, Copy)]
enum Op {
    Add,
    Mul,
}

fn binary_image(ring: &MatRing, x: &MatSet, y: &MatSet, op: Op) -> Result<MatSet> {
    x.require(ring)?;
    y.require(ring)?;
    let work = x.len().saturating_mul(y.len());
    if work > MAX_PAIR_WORK {
        return Err(Error::Budget(format!("{work} pair operations exceed the cap of {MAX_PAIR_WORK}")));
    }
    let mut out = MatSet::empty(ring);
    let ys = y.to_vec();
    if let Some((mul, add, _)) = ring.raw_tables() {
        let table = match op {
            Op::Add => add,
            Op::Mul => mul,
        };
        let size = ring.size() as usize;
        for a in x.iter() {
            let row = &table[a.0 as usize * size..][..size];
            for &b in &ys {
                out.insert(MatIndex(row[b.0 as usize]));
            }
        }
    } else {
        let decoded: Vec<Mat> = ys.iter().map(|&b| ring.decode(b)).collect();
        for a in x.iter() {
            let a = ring.decode(a);
            for b in &decoded {
                let r = match op {
                    Op::Add => ring.add(&a, b)?,
                    Op::Mul => ring.mul(&a, b)?,
                };
                out.insert(ring.encode(&r)?);
            }
        }
    }
    Ok(out)
}

/// `X + Y`.
pub fn sum_set(ring: &MatRing, x: &MatSet, y: &MatSet) -> Result<MatSet> {
    binary_image(ring, x, y, Op::Add)
}

/// `X Y`.
pub fn product_set(ring: &MatRing, x: &MatSet, y: &MatSet) -> Result<MatSet> {
    binary_image(ring, x, y, Op::Mul)
}

/// `max(|A + A|, |A A|)`.
pub fn sp_max(ring: &MatRing, a: &MatSet) -> Result<BigUint> {
    let s = sum_set(ring, a, a)?.len();
    let p = product_set(ring, a, a)?.len();
    Ok(BigUint::from(s.max(p)))
}

/// `{a + b c}`. Empty if any argument is empty.
pub fn image_x_plus_yz(ring: &MatRing, a: &MatSet, b: &MatSet, c: &MatSet) -> Result<MatSet> {
    let bc = product_set(ring, b, c)?;
    sum_set(ring, a, &bc)
}

/// `{a (b + c)}`.
pub fn image_x_times_y_plus_z(ring: &MatRing, a: &MatSet, b: &MatSet, c: &MatSet) -> Result<MatSet> {
    let s = sum_set(ring, b, c)?;
    product_set(ring, a, &s)
}

/// `{a1 a2 + a3 + a4}` with every argument drawn from `A`, and whether that
/// covers the whole ring.
pub fn image_xy_plus_z_plus_t(ring: &MatRing, a: &MatSet) -> Result<(MatSet, bool)> {
    let img = image_xy_plus_z_plus_t_sets(ring, a, a, a, a)?;
    let covers = img.len() == ring.size();
    Ok((img, covers))
}

/// `{a b + c + e}` for independent argument sets.
pub fn image_xy_plus_z_plus_t_sets(ring: &MatRing, a: &MatSet, b: &MatSet, c: &MatSet, e: &MatSet) -> Result<MatSet> {
    let ab = product_set(ring, a, b)?;
    let ce = sum_set(ring, c, e)?;
    sum_set(ring, &ab, &ce)
}

/// Number of elements a subset of the given density takes from a domain of
/// `len` elements: `ceil(density * len)`.
pub fn subset_size(len: u64, density: Density) -> Result<u64> {
    density.validate()?;
    let (num, den) = density.parts();
    Ok((len as u128 * num as u128).div_ceil(den as u128) as u64)
}

/// A uniform sample without replacement of `ceil(density |domain|)`
/// elements of `domain`, fixed by `seed`.
pub fn random_subset(ring: &MatRing, domain: &MatSet, density: Density, seed: u64) -> Result<MatSet> {
    domain.require(ring)?;
    let members = domain.to_vec();
    let k = subset_size(members.len() as u64, density)? as usize;
    let mut rng = seed::rng(seed);
    let picked = index::sample(&mut rng, members.len(), k);
    Ok(MatSet::from_indices(ring, picked.iter().map(|i| members[i])))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::field::{Felt, FieldSpec};
    use crate::matrix::Stratum;
    use proptest::prelude::*;
    use std::sync::Arc;

    pub(crate) fn ring(n: usize, q: u32) -> MatRing {
        MatRing::new(Arc::new(FieldSpec::from_order(q as u64, Default::default()).unwrap()), n).unwrap()
    }

    fn set(r: &MatRing, mats: &[Mat]) -> MatSet {
        MatSet::from_indices(r, mats.iter().map(|m| r.encode(m).unwrap()))
    }

    fn brute_triple(r: &MatRing, a: &MatSet, b: &MatSet, c: &MatSet, f: impl Fn(&Mat, &Mat, &Mat) -> Mat) -> MatSet {
        let mut out = MatSet::empty(r);
        for x in a.iter() {
            for y in b.iter() {
                for z in c.iter() {
                    out.insert(r.encode(&f(&r.decode(x), &r.decode(y), &r.decode(z))).unwrap());
                }
            }
        }
        out
    }

    #[test]
    fn zero_sets() {
        let r = ring(2, 3);
        let z = set(&r, &[r.zero()]);
        assert_eq!(image_x_plus_yz(&r, &z, &z, &z).unwrap(), z);
        let (img, covers) = image_xy_plus_z_plus_t(&r, &z).unwrap();
        assert_eq!(img, z);
        assert!(!covers);
    }

    #[test]
    fn empty_argument_gives_empty_image() {
        let r = ring(2, 3);
        let e = MatSet::empty(&r);
        let all = MatSet::full(&r);
        assert!(image_x_plus_yz(&r, &all, &e, &all).unwrap().is_empty());
        assert!(image_x_times_y_plus_z(&r, &e, &all, &all).unwrap().is_empty());
    }

    #[test]
    fn group_closure() {
        let r = ring(2, 3);
        let gl = r.stratum_set(Stratum::Gl).unwrap();
        let z = set(&r, &[r.zero()]);
        assert_eq!(image_x_plus_yz(&r, &z, &gl, &gl).unwrap(), gl);
        assert_eq!(product_set(&r, &gl, &gl).unwrap(), gl);
    }

    #[test]
    fn identity_doubles() {
        let r = ring(2, 3);
        let i = set(&r, &[r.identity()]);
        let two = set(&r, &[r.scalar(Felt(2)).unwrap()]);
        assert_eq!(image_x_times_y_plus_z(&r, &i, &i, &i).unwrap(), two);
    }

    #[test]
    fn sp_max_of_zero_and_identity() {
        let r = ring(2, 3);
        let a = set(&r, &[r.zero(), r.identity()]);
        let sum = sum_set(&r, &a, &a).unwrap();
        assert_eq!(sum, set(&r, &[r.zero(), r.identity(), r.scalar(Felt(2)).unwrap()]));
        assert_eq!(product_set(&r, &a, &a).unwrap(), a);
        assert_eq!(sp_max(&r, &a).unwrap(), BigUint::from(3u32));
    }

    #[test]
    fn sl2_f3_images_match_triple_loop() {
        let r = ring(2, 3);
        let sl = r.stratum_set(Stratum::Sl).unwrap();
        assert_eq!(sl.len(), 24);
        let fast = image_x_plus_yz(&r, &sl, &sl, &sl).unwrap();
        let slow = brute_triple(&r, &sl, &sl, &sl, |x, y, z| r.add(x, &r.mul(y, z).unwrap()).unwrap());
        assert_eq!(fast, slow);
        let fast = image_x_times_y_plus_z(&r, &sl, &sl, &sl).unwrap();
        let slow = brute_triple(&r, &sl, &sl, &sl, |x, y, z| r.mul(x, &r.add(y, z).unwrap()).unwrap());
        assert_eq!(fast, slow);
    }

    #[test]
    fn random_density_third_matches_triple_loop() {
        let r = ring(2, 3);
        let all = MatSet::full(&r);
        let third = Density::new(1, 3).unwrap();
        let a = random_subset(&r, &all, third, 1).unwrap();
        let b = random_subset(&r, &all, third, 2).unwrap();
        let c = random_subset(&r, &all, third, 3).unwrap();
        assert_eq!(a.len(), 27);
        let fast = image_x_times_y_plus_z(&r, &a, &b, &c).unwrap();
        let slow = brute_triple(&r, &a, &b, &c, |x, y, z| r.mul(x, &r.add(y, z).unwrap()).unwrap());
        assert_eq!(fast, slow);
    }

    #[test]
    fn table_free_ring_agrees_with_tables() {
        // (3, 3) has no index tables, so this exercises the decoding path.
        let r = ring(3, 3);
        assert!(!r.has_tables());
        let all = MatSet::full(&r);
        let a = random_subset(&r, &all, Density::new(1, 2000).unwrap(), 9).unwrap();
        let b = random_subset(&r, &all, Density::new(1, 2000).unwrap(), 10).unwrap();
        let fast = product_set(&r, &a, &b).unwrap();
        let mut slow = MatSet::empty(&r);
        for x in a.iter() {
            for y in b.iter() {
                slow.insert(r.encode(&r.mul(&r.decode(x), &r.decode(y)).unwrap()).unwrap());
            }
        }
        assert_eq!(fast, slow);
    }

    #[test]
    fn full_set_covers_for_xy_plus_z_plus_t() {
        let r = ring(2, 3);
        let (_, covers) = image_xy_plus_z_plus_t(&r, &MatSet::full(&r)).unwrap();
        assert!(covers);
    }

    #[test]
    fn singular_set_absorbs() {
        for q in [3, 5] {
            let r = ring(2, q);
            let all = MatSet::full(&r);
            let sing = r.stratum_set(Stratum::Det(Felt::ZERO)).unwrap();
            let img = image_x_times_y_plus_z(&r, &sing, &all, &all).unwrap();
            assert_eq!(img, sing);
            assert_eq!(img.len(), if q == 3 { 33 } else { 145 });
        }
    }

    #[test]
    fn random_subset_sizes() {
        let r = ring(2, 3);
        let gl = r.stratum_set(Stratum::Gl).unwrap();
        assert_eq!(random_subset(&r, &gl, Density::ONE, 4).unwrap(), gl);
        let one = random_subset(&r, &gl, Density::new(1, 48).unwrap(), 4).unwrap();
        assert_eq!(one.len(), 1);
        assert!(one.is_subset(&gl));
        let x = random_subset(&r, &gl, Density::new(1, 2).unwrap(), 4).unwrap();
        assert_eq!(x, random_subset(&r, &gl, Density::new(1, 2).unwrap(), 4).unwrap());
        assert_ne!(x, random_subset(&r, &gl, Density::new(1, 2).unwrap(), 5).unwrap());
        assert_eq!(Density::new(3, 2).unwrap_err(), Error::InvalidDensity(1.5));
    }

    #[test]
    fn mixed_rings_rejected() {
        let r = ring(2, 3);
        let other = MatSet::full(&ring(2, 5));
        assert!(sum_set(&r, &MatSet::full(&r), &other).is_err());
    }

    fn pairs() -> impl Strategy<Value = Vec<(u32, bool)>> {
        proptest::collection::vec((0..81u32, any::<bool>()), 0..40)
    }

    /// A set and a superset of it.
    fn nested(r: &MatRing, v: &[(u32, bool)]) -> (MatSet, MatSet) {
        let small = MatSet::from_indices(r, v.iter().filter(|p| p.1).map(|p| MatIndex(p.0)));
        let big = MatSet::from_indices(r, v.iter().map(|p| MatIndex(p.0)));
        (small, big)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn images_are_monotone(v in pairs()) {
            let r = ring(2, 3);
            let (small, big) = nested(&r, &v);
            let other = MatSet::from_indices(&r, (0..81).step_by(7).map(MatIndex));
            prop_assert!(image_x_plus_yz(&r, &small, &other, &other).unwrap()
                .is_subset(&image_x_plus_yz(&r, &big, &other, &other).unwrap()));
            prop_assert!(image_x_times_y_plus_z(&r, &other, &small, &other).unwrap()
                .is_subset(&image_x_times_y_plus_z(&r, &other, &big, &other).unwrap()));
            prop_assert!(image_xy_plus_z_plus_t(&r, &small).unwrap().0
                .is_subset(&image_xy_plus_z_plus_t(&r, &big).unwrap().0));
            prop_assert!(sum_set(&r, &small, &small).unwrap().is_subset(&sum_set(&r, &big, &big).unwrap()));
        }

        #[test]
        fn singular_first_argument_stays_singular(v in pairs()) {
            let r = ring(2, 3);
            let (_, a) = nested(&r, &v);
            let sing = r.stratum_set(Stratum::Det(Felt::ZERO)).unwrap();
            let a = a.intersection(&sing).unwrap();
            let other = MatSet::from_indices(&r, (0..81).step_by(5).map(MatIndex));
            let img = image_x_times_y_plus_z(&r, &a, &other, &other).unwrap();
            prop_assert!(img.is_subset(&sing));
        }
    }
}
