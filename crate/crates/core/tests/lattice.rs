use ar_lattice::abar::{decompose, make_catalog, CatalogLabel, Decomposition, Lambda};
use ar_lattice::dvr::intertwine::intertwiners;
use ar_lattice::dvr::matrix::{self as mx};
use ar_lattice::dvr::{algebra::Subspace, Dvr, Ring};
use ar_lattice::hom::HomSpace;
use ar_lattice::lattice::{
    decompose_lattice, direct_sum, end_lattice, heller_from_module, heller_periodic, is_indecomposable,
    is_isomorphic_lattice, projective_cover, rad_end_spanning, regular, strip_projective, syzygy, tau,
    Lattice,
};

const SEED: u64 = 11;

fn ring(p: u32) -> Dvr {
    Dvr::new(p, 16).unwrap()
}

fn grid(p: u32) -> Vec<Lambda> {
    let mut v: Vec<Lambda> = (0..p.min(3)).map(Lambda::Finite).collect();
    v.push(Lambda::Infinity);
    v
}

fn z(p: u32, l: Lambda, n: usize) -> Lattice {
    heller_periodic(&ring(p), l, n).unwrap()
}

/// κ-dimension of the span of the residues of a set of maps.
fn residue_span(p: u32, mats: impl IntoIterator<Item = mx::Mat<u32>>) -> usize {
    let f = ar_lattice::dvr::Fp::new(p).unwrap();
    let mut s: Option<Subspace> = None;
    for m in mats {
        let sub = s.get_or_insert_with(|| Subspace::new(m.data.len()));
        sub.insert(&f, &m.data);
    }
    s.map_or(0, |s| s.dim())
}

#[test]
fn heller_lattices_are_indecomposable() {
    for p in [2, 5] {
        for l in grid(p) {
            for n in 1..=2 {
                assert!(is_indecomposable(&z(p, l, n)).unwrap(), "p={p} {l:?} n={n}");
            }
        }
    }
}

#[test]
fn heller_reductions() {
    for p in [2, 5] {
        let f = ar_lattice::dvr::Fp::new(p).unwrap();
        for l in grid(p) {
            for n in 1..=3 {
                let got = decompose(&z(p, l, n).reduce(), SEED).unwrap();
                let expect = match l {
                    Lambda::Infinity => Decomposition::from_labels([CatalogLabel::band(l, n); 2]),
                    _ => Decomposition::from_labels([CatalogLabel::band(l, n), CatalogLabel::band(l.neg(&f), n)]),
                };
                assert_eq!(got, expect, "p={p} {l:?} n={n}");
            }
        }
    }
}

#[test]
fn tau_permutes_heller_lattices() {
    for p in [2, 5] {
        let f = ar_lattice::dvr::Fp::new(p).unwrap();
        for l in grid(p) {
            for n in 1..=2 {
                let t = tau(&z(p, l, n)).unwrap();
                assert_eq!(t.rank(), 4 * n);
                let target = z(p, l.neg(&f), n);
                assert!(is_isomorphic_lattice(&t, &target, SEED).unwrap(), "p={p} {l:?} n={n}");
            }
        }
    }
}

#[test]
fn distinct_heller_lattices_are_not_isomorphic() {
    let p = 5;
    let a = z(p, Lambda::Finite(1), 1);
    let b = z(p, Lambda::Finite(2), 1);
    let c = z(p, Lambda::Infinity, 1);
    assert!(!is_isomorphic_lattice(&a, &b, SEED).unwrap());
    assert!(!is_isomorphic_lattice(&a, &c, SEED).unwrap());
    assert!(!is_isomorphic_lattice(&a, &z(p, Lambda::Finite(1), 2), SEED).unwrap());
    assert!(is_isomorphic_lattice(&a, &a, SEED).unwrap());
}

#[test]
fn projective_cover_of_heller_lattice() {
    let l = z(5, Lambda::Finite(1), 2);
    let cover = projective_cover(&l);
    assert_eq!(cover.source.rank(), 16);
    assert!(cover.is_homomorphism().unwrap());
    let (core, k) = strip_projective(&direct_sum(l.ring(), &[&l, &regular(l.ring(), 1)])).unwrap();
    assert_eq!((core.rank(), k), (8, 1));
    assert_eq!(syzygy(&regular(l.ring(), 2)).unwrap().rank(), 0);
}

#[test]
fn regular_endomorphisms() {
    let r = ring(5);
    let a = regular(&r, 1);
    let end = end_lattice(&a).unwrap();
    assert_eq!(residue_span(5, end.iter().map(|e| mx::residue(e.source.ring(), &e.matrix))), 4);
    for e in &end {
        assert!(e.is_homomorphism().unwrap());
    }
    assert!(is_indecomposable(&a).unwrap());
    assert!(!is_indecomposable(&regular(&r, 2)).unwrap());
}

/// Frame-based Hom against the sparse intertwiner solver.
#[test]
fn frame_hom_matches_intertwiners() {
    for p in [2, 5] {
        let r = ring(p);
        let cases = [
            (z(p, Lambda::Finite(0), 1), z(p, Lambda::Finite(0), 1)),
            (z(p, Lambda::Finite(1), 1), z(p, Lambda::Infinity, 2)),
            (z(p, Lambda::Infinity, 2), z(p, Lambda::Infinity, 1)),
            (regular(&r, 1), z(p, Lambda::Finite(1), 1)),
            (z(p, Lambda::Finite(0), 2), regular(&r, 1)),
        ];
        for (a, b) in cases {
            let hs = HomSpace::new(&a, &b).unwrap();
            let out = hs.out_ring();
            for h in hs.basis() {
                let m = hs.matrix(h);
                let x = mx::mul(&out, &mx::truncate(&out, b.x()), &m);
                assert_eq!(x, mx::mul(&out, &m, &mx::truncate(&out, a.x())));
                let y = mx::mul(&out, &mx::truncate(&out, b.y()), &m);
                assert_eq!(y, mx::mul(&out, &m, &mx::truncate(&out, a.y())));
                assert_eq!(hs.residue_matrix(h), mx::residue(&out, &m));
            }
            let oracle = intertwiners(&r, &[a.x(), a.y()], &[b.x(), b.y()]).unwrap();
            let ro = r.with_prec(oracle.prec);
            let fast = residue_span(p, hs.basis().iter().map(|h| hs.residue_matrix(h)));
            let slow = residue_span(p, oracle.basis.iter().map(|m| mx::residue(&ro, m)));
            assert_eq!(fast, slow, "p={p} ranks {} -> {}", a.rank(), b.rank());
        }
    }
}

#[test]
fn direct_sums_decompose() {
    for p in [2, 5] {
        let r = ring(p);
        let a = z(p, Lambda::Finite(1), 1);
        let b = z(p, Lambda::Infinity, 2);
        let c = z(p, Lambda::Finite(0), 1);
        let sum = direct_sum(&r, &[&a, &b, &c, &a]);
        assert!(!is_indecomposable(&sum).unwrap());
        let parts = decompose_lattice(&sum, SEED).unwrap();
        let mut ranks: Vec<usize> = parts.iter().map(|l| l.rank()).collect();
        ranks.sort();
        assert_eq!(ranks, vec![4, 4, 4, 8], "p={p}");
        for part in &parts {
            assert!(is_indecomposable(part).unwrap());
            let matches = [&a, &b, &c].iter().filter(|t| is_isomorphic_lattice(part, t, SEED).unwrap()).count();
            assert_eq!(matches, 1);
        }
        // Indecomposables come back unchanged.
        assert_eq!(decompose_lattice(&b, SEED).unwrap(), vec![b.clone()]);
    }
}

#[test]
fn heller_from_strings() {
    for p in [2, 5] {
        let r = ring(p);
        for m in 0..=2i64 {
            let module = make_catalog(CatalogLabel::string(m), p).unwrap();
            let parts = heller_from_module(&module, &r, SEED).unwrap();
            assert_eq!(parts.len(), 1, "p={p} m={m}");
            let zm = &parts[0];
            assert!(is_indecomposable(zm).unwrap());
            let got = decompose(&zm.reduce(), SEED).unwrap();
            let expect = Decomposition::from_labels([CatalogLabel::string(m - 1), CatalogLabel::string(m)]);
            assert_eq!(got, expect, "p={p} m={m}");
            if m > 0 {
                let prev = make_catalog(CatalogLabel::string(m - 1), p).unwrap();
                let zprev = &heller_from_module(&prev, &r, SEED).unwrap()[0];
                let t = tau(zm).unwrap();
                assert!(is_isomorphic_lattice(&t, zprev, SEED).unwrap(), "p={p} m={m}");
            }
        }
    }
}

#[test]
fn radical_elements_are_singular() {
    let p = 5;
    let l = z(p, Lambda::Finite(1), 2);
    let rad = rad_end_spanning(&l).unwrap();
    assert!(rad.len() >= 2);
    let f = ar_lattice::dvr::Fp::new(p).unwrap();
    for g in &rad {
        assert!(g.is_homomorphism().unwrap());
        let res = mx::residue(g.source.ring(), &g.matrix);
        assert!(mx::inverse_field(&f, &res).is_none());
    }
}

#[test]
fn end_rank_is_stable_under_precision() {
    let l = z(5, Lambda::Finite(2), 2);
    let span = |l: &Lattice| {
        let hs = HomSpace::new(l, l).unwrap();
        residue_span(5, hs.basis().iter().map(|h| hs.residue_matrix(h)))
    };
    assert_eq!(span(&l), span(&l.at_prec(12).unwrap()));
}

#[test]
fn lattice_json_round_trip() {
    let l = z(5, Lambda::Infinity, 2);
    let s = serde_json::to_string(&l).unwrap();
    let back: Lattice = serde_json::from_str(&s).unwrap();
    assert_eq!(back, l);
}
