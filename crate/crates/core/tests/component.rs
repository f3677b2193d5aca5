use ar_lattice::abar::{decompose, make_catalog, CatalogLabel, Lambda};
use ar_lattice::component::{boundary_check, build_window, classify, ComponentWindow, ShapeKind, DEFAULT_PERIOD_BOUND};
use ar_lattice::dvr::Dvr;
use ar_lattice::lattice::{heller_from_module, heller_periodic, is_isomorphic_lattice, regular, Lattice};

const SEED: u64 = 5;

fn ring(p: u32) -> Dvr {
    Dvr::new(p, 16).unwrap()
}

fn z(p: u32, l: Lambda, n: usize) -> Lattice {
    heller_periodic(&ring(p), l, n).unwrap()
}

fn window(p: u32, l: Lambda, n: usize, depth: usize) -> ComponentWindow {
    build_window(&z(p, l, n), depth, DEFAULT_PERIOD_BOUND, SEED).unwrap()
}

fn expected_kind(p: u32, l: Lambda) -> ShapeKind {
    let f = ring(p).field();
    if l.neg(&f) == l {
        ShapeKind::ZAInfModTau
    } else {
        ShapeKind::ZAInfModTauSq
    }
}

#[test]
fn depth_two_window_at_lambda_zero() {
    let w = window(5, Lambda::Finite(0), 1, 2);
    assert!(w.failure.is_none());
    assert_eq!(w.vertices.len(), 3);
    assert!(w.vertices.iter().all(|v| v.tau_period == Some(1)));
    let levels: Vec<usize> = w.vertices.iter().map(|v| v.level).collect();
    assert_eq!(levels, vec![0, 1, 2]);
    assert!(boundary_check(&w, 0));
    assert!(!boundary_check(&w, 1));
    assert_eq!(w.vertices[0].label, z(5, Lambda::Finite(0), 1).tag().unwrap().to_string());
    assert!(w.provenance.iter().all(|p| p.checks.all()));
    assert_eq!(classify(&w).kind, ShapeKind::ZAInfModTau);
}

#[test]
fn depth_two_window_with_period_two() {
    let w = window(5, Lambda::Finite(1), 1, 2);
    assert!(w.failure.is_none());
    assert_eq!(w.vertices.len(), 6);
    assert!(w.vertices.iter().all(|v| v.tau_period == Some(2)));
    let tz = w.tau_of(0).unwrap();
    assert!(is_isomorphic_lattice(&w.vertices[tz].lattice, &z(5, Lambda::Finite(4), 1), SEED).unwrap());
    assert_eq!(w.tau_of(tz), Some(0));
    assert!(boundary_check(&w, 0) && boundary_check(&w, tz));
    let v = classify(&w);
    assert_eq!(v.kind, ShapeKind::ZAInfModTauSq, "{:?}", v.problems);
    assert_eq!(v.period, Some(2));
}

#[test]
fn depth_two_window_at_infinity() {
    let w = window(5, Lambda::Infinity, 1, 2);
    assert!(w.vertices.iter().all(|v| v.tau_period == Some(1)));
    assert!(boundary_check(&w, 0));
    assert_eq!(classify(&w).kind, ShapeKind::ZAInfModTau);
}

#[test]
fn depth_three_classification_for_n_one() {
    for p in [2u32, 5] {
        let mut ls: Vec<Lambda> = (0..p.min(3)).map(Lambda::Finite).collect();
        ls.push(Lambda::Infinity);
        for l in ls {
            let w = window(p, l, 1, 3);
            let v = classify(&w);
            let tag = format!("p={p} {l:?}");
            assert_eq!(v.kind, expected_kind(p, l), "{tag}: {:?}", v.problems);
            assert!(v.problems.is_empty(), "{tag}: {:?}", v.problems);
            assert_eq!(v.boundary_orbits, 1, "{tag}");
            let period = v.period.unwrap();
            assert_eq!(w.vertices.len(), 4 * period, "{tag}");
            for x in &w.vertices {
                assert_eq!(x.is_boundary.unwrap_or(x.level == 0), x.level == 0, "{tag}: {}", x.label);
            }
        }
    }
}

#[test]
fn non_periodic_heller_lattices_give_plain_windows() {
    for (p, m) in [(2u32, 2i64), (5, 1), (5, 2)] {
        let r = ring(p);
        let module = make_catalog(CatalogLabel::string(m), p).unwrap();
        let zm = heller_from_module(&module, &r, SEED).unwrap().remove(0);
        let w = build_window(&zm, 2, DEFAULT_PERIOD_BOUND, SEED).unwrap();
        assert!(w.failure.is_none(), "p={p} m={m}: {:?}", w.failure);
        assert!(w.vertices.iter().all(|v| v.tau_period.is_none()));
        let v = classify(&w);
        assert_eq!(v.kind, ShapeKind::ZAInfWindow, "p={p} m={m}: {:?}", v.problems);
        assert!(boundary_check(&w, 0));
        let tz = w.tau_of(0).unwrap();
        let expected = make_catalog(CatalogLabel::string(m - 1), p).unwrap();
        let want = heller_from_module(&expected, &r, SEED).unwrap().remove(0);
        assert!(is_isomorphic_lattice(&w.vertices[tz].lattice, &want, SEED).unwrap(), "p={p} m={m}");
    }
}

#[test]
fn ids_are_deterministic() {
    let a = window(5, Lambda::Finite(2), 2, 2);
    let b = window(5, Lambda::Finite(2), 2, 2);
    let ids = |w: &ComponentWindow| w.vertices.iter().map(|v| v.id.clone()).collect::<Vec<_>>();
    assert_eq!(ids(&a), ids(&b));
    assert_eq!(a, b);
    assert_eq!(classify(&a), classify(&b));
    for id in ids(&a) {
        let (h, k) = id.split_once('#').unwrap();
        assert_eq!(h.len(), 12);
        assert!(h.chars().all(|c| c.is_ascii_hexdigit()));
        assert!(k.parse::<usize>().is_ok());
    }
}

#[test]
fn d_values_add_along_sequences() {
    for (p, l, n) in [(5, Lambda::Finite(0), 1), (5, Lambda::Finite(1), 2), (2, Lambda::Infinity, 2), (5, Lambda::Finite(2), 3)] {
        let w = window(p, l, n, 2);
        for pr in &w.provenance {
            let x = &w.vertices[pr.right];
            let middle: usize = pr.middle.iter().map(|&(i, m)| w.vertices[i].d_value * m).sum();
            assert!(2 * x.d_value >= middle, "{}", x.label);
            if x.level == 0 {
                assert_eq!(x.d_value, 2);
                assert_eq!(middle, if n == 1 { 3 } else { 4 }, "p={p} {l:?} n={n}");
            }
        }
    }
}

#[test]
fn reductions_follow_the_band_pattern() {
    for (p, l, n) in [(5, Lambda::Finite(1), 2), (2, Lambda::Finite(1), 2), (5, Lambda::Infinity, 2)] {
        let f = ring(p).field();
        let w = window(p, l, n, 2);
        for v in &w.vertices {
            let k = v.level;
            for label in decompose(&v.lattice.reduce(), SEED).unwrap().labels() {
                match label {
                    CatalogLabel::Band { lambda, n: m } => {
                        assert!(lambda == l || lambda == l.neg(&f), "{}: {label}", v.label);
                        assert!(m + k >= n && m <= n + k, "{}: {label}", v.label);
                    }
                    other => panic!("{}: unexpected summand {other}", v.label),
                }
            }
        }
    }
}

#[test]
fn window_serialization() {
    let w = window(5, Lambda::Finite(1), 1, 2);
    let s = serde_json::to_string(&w).unwrap();
    let back: ComponentWindow = serde_json::from_str(&s).unwrap();
    assert_eq!(back, w);
    let dot = w.to_dot().unwrap();
    assert!(dot.contains("dashed"));
    assert!(dot.contains(&w.vertices[0].label));
    let tq = w.to_translation_quiver().unwrap();
    assert_eq!(tq.quiver().len(), w.vertices.len());
    assert_eq!(w.orbits().len(), 3);
}

#[test]
fn failures_leave_partial_windows() {
    let w = build_window(&regular(&ring(5), 1), 2, DEFAULT_PERIOD_BOUND, SEED).unwrap();
    assert!(w.failure.is_some());
    assert_eq!(w.vertices.len(), 1);
    let v = classify(&w);
    assert_eq!(v.kind, ShapeKind::Inconclusive);
    assert!(!v.problems.is_empty());
    let shallow = window(5, Lambda::Finite(0), 1, 1);
    assert_eq!(classify(&shallow).kind, ShapeKind::Inconclusive);
}
