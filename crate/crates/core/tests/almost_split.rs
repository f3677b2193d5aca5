use std::sync::Arc;

use ar_lattice::abar::{decompose, CatalogLabel, Decomposition, Lambda};
use ar_lattice::almost_split::{
    almost_split_ending_at, factors_through, phi, projection_splits, pullback_middle, ranks_add_up,
    reduced_sequence_splits, stat_d, stat_r, ArSequenceJson, StableEnd,
};
use ar_lattice::dvr::matrix::{self as mx};
use ar_lattice::dvr::{Dvr, Fp};
use ar_lattice::lattice::{
    heller_periodic, is_indecomposable, is_isomorphic_lattice, projective_cover, rad_end_spanning, regular, Lattice,
    LatticeMap,
};
use ar_lattice::Error;

const SEED: u64 = 5;

fn ring(p: u32) -> Dvr {
    Dvr::new(p, 16).unwrap()
}

fn z(p: u32, l: Lambda, n: usize) -> Lattice {
    heller_periodic(&ring(p), l, n).unwrap()
}

fn cells() -> Vec<(u32, Lambda, usize)> {
    let mut out = Vec::new();
    for p in [2u32, 5] {
        let mut ls: Vec<Lambda> = (0..p.min(3)).map(Lambda::Finite).collect();
        ls.push(Lambda::Infinity);
        for l in ls {
            for n in 1..=3 {
                out.push((p, l, n));
            }
        }
    }
    out
}

fn band(l: Lambda, n: usize) -> CatalogLabel {
    CatalogLabel::band(l, n)
}

/// Expected `E ⊗ κ` for the middle term of the sequence ending at `Z_n^λ`.
fn expected_middle(f: &Fp, l: Lambda, n: usize) -> Decomposition {
    let mut labels = vec![band(l.neg(f), n), band(l.neg(f), n), band(l, n + 1)];
    if l == Lambda::Infinity {
        labels = vec![band(l, n), band(l, n), band(l, n + 1)];
    }
    if n > 1 {
        labels.push(band(l, n - 1));
    }
    Decomposition::from_labels(labels)
}

#[test]
fn phi_squares_to_zero_and_is_a_map() {
    for (p, l, n) in cells() {
        let zz = z(p, l, n);
        let f = phi(&zz).unwrap();
        let r = f.ring().unwrap();
        assert!(mx::is_zero(&r, &mx::mul(&r, &f.matrix, &f.matrix)));
        assert!(f.is_homomorphism().unwrap());
    }
}

#[test]
fn phi_needs_a_heller_tag() {
    let r = ring(5);
    let untagged = z(5, Lambda::Finite(1), 1).with_tag(None);
    assert!(matches!(phi(&untagged), Err(Error::MissingBasisTag)));
    assert!(matches!(phi(&regular(&r, 1)), Err(Error::MissingBasisTag)));
}

#[test]
fn phi_factoring_pattern() {
    for (p, l, n) in cells().into_iter().filter(|c| c.2 <= 2) {
        let zz = z(p, l, n);
        let cover = projective_cover(&zz);
        let f = phi(&zz).unwrap();
        assert!(!factors_through(&f, &cover).unwrap().factors(), "p={p} {l:?} n={n}");
        for rho in rad_end_spanning(&zz).unwrap() {
            let comp = f.compose(&rho).unwrap();
            let w = factors_through(&comp, &cover).unwrap();
            let lift = w.lift.expect("φρ factors");
            let r = lift.ring().unwrap();
            let back = mx::mul(&r, &mx::truncate(&r, &cover.matrix), &lift.matrix);
            assert_eq!(mx::truncate(&r, &back), mx::truncate(&r, &comp.matrix));
        }
    }
}

#[test]
fn zero_map_factors_with_zero_lift() {
    let zz = z(5, Lambda::Finite(2), 2);
    let r = *zz.ring();
    let a = Arc::new(zz.clone());
    let zero = LatticeMap::new(a.clone(), a, mx::zeros(&r, 8, 8)).unwrap();
    let w = factors_through(&zero, &projective_cover(&zz)).unwrap();
    let lift = w.lift.unwrap();
    assert!(mx::is_zero(&lift.ring().unwrap(), &lift.matrix));
}

#[test]
fn stable_membership_matches_exact_solving() {
    for (p, l, n) in cells().into_iter().filter(|c| c.2 == 1) {
        let zz = z(p, l, n);
        let cover = projective_cover(&zz);
        let se = StableEnd::new(&zz, &cover).unwrap();
        assert_eq!(se.exponent(), 1, "p={p} {l:?}");
        let f = phi(&zz).unwrap();
        assert!(!se.contains(&f.matrix));
        let r = *zz.ring();
        let a = Arc::new(zz.clone());
        let eps = LatticeMap::new(a.clone(), a, mx::scale(&r, r.eps(), &mx::identity(&r, zz.rank()))).unwrap();
        assert!(se.contains(&eps.matrix));
        assert!(factors_through(&eps, &cover).unwrap().factors());
    }
}

#[test]
fn pullback_along_zero_splits() {
    let zz = z(5, Lambda::Finite(1), 1);
    let r = *zz.ring();
    let a = Arc::new(zz.clone());
    let zero = LatticeMap::new(a.clone(), a, mx::zeros(&r, 4, 4)).unwrap();
    let pb = pullback_middle(&projective_cover(&zz), &zero).unwrap();
    assert_eq!(pb.middle.rank(), 8);
    assert!(reduced_sequence_splits(&pb.projection).unwrap());
    let f = zz.field();
    let got = decompose(&pb.middle.reduce(), SEED).unwrap();
    let mut labels = decompose(&pb.kernel.reduce(), SEED).unwrap().labels();
    labels.extend(decompose(&zz.reduce(), SEED).unwrap().labels());
    let want = Decomposition::from_labels(labels);
    assert_eq!(got, want, "{f:?}");
}

#[test]
fn sequences_ending_at_heller_lattices() {
    for (p, l, n) in cells() {
        let zz = z(p, l, n);
        let f = zz.field();
        let seq = almost_split_ending_at(&zz, SEED).unwrap();
        let tag = format!("p={p} {l:?} n={n}");
        assert!(seq.certified, "{tag}: {:?}", seq.checks);
        assert!(seq.checks.explicit_phi);
        assert_eq!(seq.middle.rank(), 8 * n, "{tag}");
        assert_eq!(seq.middle_summands.len(), 1, "{tag}");
        assert_eq!(seq.middle_summands[0].1, 1, "{tag}");
        assert!(is_indecomposable(&seq.middle).unwrap(), "{tag}");
        assert!(ranks_add_up(&seq));
        let got = decompose(&seq.middle.reduce(), SEED).unwrap();
        assert_eq!(got, expected_middle(&f, l, n), "{tag}");
        let left = z(p, l.neg(&f), n);
        assert!(is_isomorphic_lattice(&seq.left, &left, SEED).unwrap(), "{tag}");
        assert!(!reduced_sequence_splits(&seq.projection).unwrap(), "{tag}");
        assert_eq!(stat_d(&zz, SEED).unwrap(), 2);
        // M(λ)_0 = 0, so the middle term of the n = 1 sequence has three summands.
        assert_eq!(stat_d(&seq.middle, SEED).unwrap(), if n == 1 { 3 } else { 4 }, "{tag}");
    }
}

#[test]
fn sequence_json_round_trip() {
    let seq = almost_split_ending_at(&z(2, Lambda::Infinity, 1), SEED).unwrap();
    let j = seq.to_json();
    let s = serde_json::to_string(&j).unwrap();
    let back: ArSequenceJson = serde_json::from_str(&s).unwrap();
    assert_eq!(back, j);
    let v: serde_json::Value = serde_json::from_str(&s).unwrap();
    for k in ["left", "middle", "right", "certified", "checks"] {
        assert!(v.get(k).is_some(), "{k}");
    }
    assert_eq!(v["middle"][0]["mult"], 1);
}

#[test]
fn r_statistic() {
    for (p, l, n) in [(5, Lambda::Infinity, 1), (5, Lambda::Finite(0), 2), (5, Lambda::Finite(1), 1), (2, Lambda::Finite(1), 2)] {
        let zz = z(p, l, n);
        let s = stat_r(&zz, 6, SEED).unwrap();
        let period = if p == 5 && l == Lambda::Finite(1) { 2 } else { 1 };
        assert_eq!(s.period, period, "p={p} {l:?} n={n}");
        assert_eq!(s.ratio(), (4 * n, 1));
    }
    assert_eq!(stat_d(&regular(&ring(5), 2), SEED).unwrap(), 0);
}

#[test]
fn sequences_ending_at_middle_terms() {
    for (p, l, n) in cells() {
        let zz = z(p, l, n);
        let e = almost_split_ending_at(&zz, SEED).unwrap().middle;
        let seq = almost_split_ending_at(&e, SEED).unwrap();
        let tag = format!("p={p} {l:?} n={n}");
        assert!(seq.certified, "{tag}: {:?}", seq.checks);
        assert!(!seq.checks.explicit_phi);
        let mut ranks: Vec<usize> = seq.middle_summands.iter().map(|(l, m)| l.rank() * m).collect();
        ranks.sort();
        assert_eq!(ranks, vec![4 * n, 12 * n], "{tag}");
        assert!(reduced_sequence_splits(&seq.projection).unwrap(), "{tag}");
    }
}

#[test]
fn certified_sequences_have_no_section() {
    for (p, l, n) in cells().into_iter().filter(|c| c.2 <= 2) {
        let seq = almost_split_ending_at(&z(p, l, n), SEED).unwrap();
        assert!(!projection_splits(&seq.projection).unwrap(), "p={p} {l:?} n={n}");
    }
    let zz = z(5, Lambda::Finite(1), 1);
    let r = *zz.ring();
    let a = Arc::new(zz.clone());
    let zero = LatticeMap::new(a.clone(), a, mx::zeros(&r, 4, 4)).unwrap();
    let pb = pullback_middle(&projective_cover(&zz), &zero).unwrap();
    assert!(projection_splits(&pb.projection).unwrap());
}
