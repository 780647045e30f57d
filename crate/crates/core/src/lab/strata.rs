//! Determinant strata and the scalings `x -> l_a x` that move a stratum
//! into `SL_n` without changing sum- or product-set sizes.

use std::collections::BTreeMap;

use serde::Serialize;

use super::{product_set, sum_set};
use crate::error::{Error, Result};
use crate::field::Felt;
use crate::matrix::{MatIndex, MatRing, MatSet};

/// Splits `s` by determinant. Every field element gets an entry, empty or not.
pub fn det_strata_partition(ring: &MatRing, s: &MatSet) -> Result<BTreeMap<Felt, MatSet>> {
    s.require(ring)?;
    let mut parts: BTreeMap<Felt, MatSet> = ring.field().elements().map(|a| (a, MatSet::empty(ring))).collect();
    for i in s.iter() {
        parts.get_mut(&ring.det_idx(i)).expect("every determinant is a field element").insert(i);
    }
    Ok(parts)
}

/// The most populous class of `a` with nonzero determinant. Ties go to the
/// smallest determinant index.
pub fn largest_det_class(ring: &MatRing, a: &MatSet) -> Result<(Felt, MatSet)> {
    let parts = det_strata_partition(ring, a)?;
    let mut best: Option<(Felt, MatSet)> = None;
    for (alpha, part) in parts {
        if alpha.is_zero() || part.is_empty() {
            continue;
        }
        if best.as_ref().is_none_or(|(_, b)| part.len() > b.len()) {
            best = Some((alpha, part));
        }
    }
    best.ok_or(Error::NoNonzeroClass)
}

fn require_det(ring: &MatRing, s: &MatSet, alpha: Felt, name: &str) -> Result<()> {
    if alpha.is_zero() {
        return Err(Error::ZeroScale);
    }
    if let Some(bad) = s.iter().find(|&i| ring.det_idx(i) != alpha) {
        return Err(Error::Precondition(format!(
            "{name}: element {bad} has determinant {}, expected {alpha}",
            ring.det_idx(bad)
        )));
    }
    Ok(())
}

fn scale_left(ring: &MatRing, l: MatIndex, s: &MatSet) -> MatSet {
    MatSet::from_indices(ring, s.iter().map(|x| ring.mul_idx(l, x)))
}

fn scale_right(ring: &MatRing, s: &MatSet, l: MatIndex) -> MatSet {
    MatSet::from_indices(ring, s.iter().map(|x| ring.mul_idx(x, l)))
}

fn in_sl(ring: &MatRing, s: &MatSet) -> bool {
    s.iter().all(|i| ring.det_idx(i) == Felt::ONE)
}

#[derive(Debug, Clone, Serialize)]
pub struct Lemma24Report {
    pub alpha: u32,
    pub beta: u32,
    pub size_d_alpha: u64,
    pub size_d_beta: u64,
    /// `|D^r_alpha|`, which must equal `|D_alpha|`.
    pub size_row_scaled: u64,
    pub size_col_scaled: u64,
    pub scaled_in_sl: bool,
    pub product: u64,
    pub scaled_product: u64,
    pub holds: bool,
}

/// Compares `|D_a D_b|` with `|D^r_a D^c_b|`, where `D^r_a = {l_a x}` and
/// `D^c_b = {y l_b}` both lie in `SL_n`.
pub fn lemma24_check(
    ring: &MatRing,
    d_alpha: &MatSet,
    d_beta: &MatSet,
    alpha: Felt,
    beta: Felt,
) -> Result<Lemma24Report> {
    d_alpha.require(ring)?;
    d_beta.require(ring)?;
    require_det(ring, d_alpha, alpha, "D_alpha")?;
    require_det(ring, d_beta, beta, "D_beta")?;
    let la = ring.encode(&ring.l_scale(alpha)?)?;
    let lb = ring.encode(&ring.l_scale(beta)?)?;
    let row = scale_left(ring, la, d_alpha);
    let col = scale_right(ring, d_beta, lb);
    let product = product_set(ring, d_alpha, d_beta)?.len();
    let scaled_product = product_set(ring, &row, &col)?.len();
    let scaled_in_sl = in_sl(ring, &row) && in_sl(ring, &col);
    Ok(Lemma24Report {
        alpha: alpha.0,
        beta: beta.0,
        size_d_alpha: d_alpha.len(),
        size_d_beta: d_beta.len(),
        size_row_scaled: row.len(),
        size_col_scaled: col.len(),
        scaled_in_sl,
        product,
        scaled_product,
        holds: product == scaled_product && scaled_in_sl && row.len() == d_alpha.len() && col.len() == d_beta.len(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ScaledSumReport {
    pub alpha: u32,
    pub size_x: u64,
    pub size_y: u64,
    pub sum: u64,
    pub scaled_sum: u64,
    pub holds: bool,
}

/// Compares `|X + Y|` with `|l_a X + l_a Y|` for `X` inside `DET(a)`.
pub fn scaled_sum_check(ring: &MatRing, x: &MatSet, y: &MatSet, alpha: Felt) -> Result<ScaledSumReport> {
    x.require(ring)?;
    y.require(ring)?;
    require_det(ring, x, alpha, "X")?;
    let l = ring.encode(&ring.l_scale(alpha)?)?;
    let sum = sum_set(ring, x, y)?.len();
    let scaled_sum = sum_set(ring, &scale_left(ring, l, x), &scale_left(ring, l, y))?.len();
    Ok(ScaledSumReport { alpha: alpha.0, size_x: x.len(), size_y: y.len(), sum, scaled_sum, holds: sum == scaled_sum })
}

#[cfg(test)]
mod tests {
    use super::super::tests::ring;
    use super::super::{random_subset, Density};
    use super::*;
    use crate::matrix::Stratum;

    #[test]
    fn partition_of_m2_f3() {
        let r = ring(2, 3);
        let parts = det_strata_partition(&r, &MatSet::full(&r)).unwrap();
        let sizes: Vec<u64> = parts.values().map(MatSet::len).collect();
        assert_eq!(sizes, [33, 24, 24]);
        let mut union = MatSet::empty(&r);
        for p in parts.values() {
            assert!(union.is_disjoint(p));
            union = union.union(p).unwrap();
        }
        assert_eq!(union, MatSet::full(&r));
    }

    #[test]
    fn partition_edge_cases() {
        let r = ring(2, 5);
        let sl = r.stratum_set(Stratum::Sl).unwrap();
        let parts = det_strata_partition(&r, &sl).unwrap();
        assert_eq!(parts[&Felt::ONE], sl);
        assert_eq!(parts.values().filter(|p| !p.is_empty()).count(), 1);
        let parts = det_strata_partition(&r, &MatSet::empty(&r)).unwrap();
        assert_eq!(parts.len(), 5);
        assert!(parts.values().all(MatSet::is_empty));
    }

    #[test]
    fn largest_class() {
        let r = ring(2, 3);
        let gl = r.stratum_set(Stratum::Gl).unwrap();
        let (alpha, part) = largest_det_class(&r, &gl).unwrap();
        // Both classes have 24 elements; the tie goes to the smaller index.
        assert_eq!(alpha, Felt(1));
        assert_eq!(part.len(), 24);
        let sing = r.stratum_set(Stratum::Det(Felt::ZERO)).unwrap();
        assert_eq!(largest_det_class(&r, &sing).unwrap_err(), Error::NoNonzeroClass);
        let sl = r.stratum_set(Stratum::Sl).unwrap();
        assert_eq!(largest_det_class(&r, &sl).unwrap(), (Felt::ONE, sl));
    }

    #[test]
    fn largest_class_meets_pigeonhole() {
        let r = ring(2, 5);
        let all = MatSet::full(&r);
        let gl = r.stratum_set(Stratum::Gl).unwrap();
        for seed in 0..20 {
            let a = random_subset(&r, &all, Density::new(1, 3).unwrap(), seed).unwrap();
            let (_, part) = largest_det_class(&r, &a).unwrap();
            let invertible = a.intersection(&gl).unwrap().len();
            assert!(part.len() * 4 >= invertible);
        }
    }

    #[test]
    fn lemma24_identity_and_scaled() {
        let r = ring(2, 3);
        let sl = r.stratum_set(Stratum::Sl).unwrap();
        let rep = lemma24_check(&r, &sl, &sl, Felt::ONE, Felt::ONE).unwrap();
        assert!(rep.holds);
        assert_eq!(rep.product, 24);
        let d2 = r.stratum_set(Stratum::Det(Felt(2))).unwrap();
        for seed in 0..10 {
            let a = random_subset(&r, &d2, Density::new(1, 4).unwrap(), seed).unwrap();
            let b = random_subset(&r, &d2, Density::new(1, 4).unwrap(), seed + 100).unwrap();
            let rep = lemma24_check(&r, &a, &b, Felt(2), Felt(2)).unwrap();
            assert!(rep.holds, "{rep:?}");
            assert_eq!(rep.size_row_scaled, a.len());
        }
    }

    #[test]
    fn lemma24_preconditions() {
        let r = ring(2, 3);
        let sl = r.stratum_set(Stratum::Sl).unwrap();
        assert!(matches!(lemma24_check(&r, &sl, &sl, Felt(2), Felt::ONE), Err(Error::Precondition(_))));
        assert_eq!(lemma24_check(&r, &sl, &sl, Felt::ZERO, Felt::ONE).unwrap_err(), Error::ZeroScale);
    }

    #[test]
    fn scaled_sums() {
        let r = ring(2, 3);
        let all = MatSet::full(&r);
        let d2 = r.stratum_set(Stratum::Det(Felt(2))).unwrap();
        for seed in 0..10 {
            let x = random_subset(&r, &d2, Density::new(1, 3).unwrap(), seed).unwrap();
            let y = random_subset(&r, &all, Density::new(1, 5).unwrap(), seed + 7).unwrap();
            assert!(scaled_sum_check(&r, &x, &y, Felt(2)).unwrap().holds);
        }
        let x = random_subset(&r, &d2, Density::new(1, 3).unwrap(), 0).unwrap();
        let rep = scaled_sum_check(&r, &x, &MatSet::empty(&r), Felt(2)).unwrap();
        assert_eq!((rep.sum, rep.scaled_sum), (0, 0));
        let sl = r.stratum_set(Stratum::Sl).unwrap();
        let rep = scaled_sum_check(&r, &sl, &all, Felt::ONE).unwrap();
        assert!(rep.holds);
    }
}
