use ar_lattice::quiver::{
    a_infinity, cartan_from_valued, catalog_instances, check_subadditive, find_additive, find_strict_subadditive,
    finite_catalog, hpr_classify, infinite_labels, infinite_window, quotient_cyclic, recognize_diagram, zq, Additivity,
    Arrow, CartanMatrix, DiagramClass, QuiverJson, RecognizeMode, TranslationQuiver, ValuedGraph, ValuedQuiver,
};
use ar_lattice::Error;
use num_rational::Rational64;
use proptest::prelude::*;

fn q(n: i64) -> Rational64 {
    Rational64::from_integer(n)
}

fn ls(v: &[i64]) -> Vec<Rational64> {
    v.iter().map(|&x| q(x)).collect()
}

fn names(labels: &[ar_lattice::quiver::DiagramLabel]) -> Vec<String> {
    labels.iter().map(|l| l.to_string()).collect()
}

fn path(m: usize) -> ValuedGraph {
    let mut g = ValuedGraph::empty(m);
    for i in 1..m {
        g.add_edge(i - 1, i, (1, 1));
    }
    g
}

#[test]
fn valued_quiver_invariants() {
    let vs = || vec!["a".to_string(), "b".to_string()];
    assert!(ValuedQuiver::new(vs(), vec![Arrow::trivial(0, 1), Arrow::new(0, 1, 2, 2)]).is_err());
    assert!(ValuedQuiver::new(vs(), vec![Arrow::new(0, 1, 0, 1)]).is_err());
    assert!(ValuedQuiver::new(vs(), vec![Arrow::trivial(0, 2)]).is_err());
    let ok = ValuedQuiver::new(vs(), vec![Arrow::new(0, 1, 1, 2), Arrow::trivial(1, 0)]).unwrap();
    assert_eq!(ok.successors(0), vec![1]);
    assert_eq!(ok.predecessors(0), vec![1]);
}

#[test]
fn zq_of_a_point() {
    let point = ValuedQuiver::from_edges(&["x"], &[]).unwrap();
    let w = zq(&point, &[true], -2, 2).unwrap();
    let t = &w.quiver;
    assert_eq!(t.quiver().len(), 5);
    assert!(t.quiver().arrows().is_empty());
    assert_eq!(t.tau(w.index(0, 0).unwrap()), w.index(-1, 0));
    assert_eq!(t.tau(w.index(-2, 0).unwrap()), None);
    t.check_axioms().unwrap();
}

#[test]
fn zq_of_a_ray() {
    let (tree, complete) = a_infinity(6);
    let w = zq(&tree, &complete, -3, 3).unwrap();
    let t = &w.quiver;
    t.check_axioms().unwrap();
    // Vertex i of the ray is index i − 1.
    for n in -2..=2 {
        for i in 2..=5usize {
            let v = w.index(n, i - 1).unwrap();
            let want = {
                let mut s = vec![w.index(n, i).unwrap(), w.index(n + 1, i - 2).unwrap()];
                s.sort();
                s
            };
            assert_eq!(t.quiver().successors(v), want);
            assert_eq!(t.tau(v), w.index(n - 1, i - 1));
        }
    }
    assert_eq!(t.quiver().successors(w.index(0, 0).unwrap()), vec![w.index(0, 1).unwrap()]);
}

#[test]
fn zq_transports_valuations() {
    let tree = ValuedQuiver::new(vec!["x".into(), "y".into(), "z".into()], vec![Arrow::new(0, 1, 1, 2), Arrow::new(2, 1, 3, 1)])
        .unwrap();
    let w = zq(&tree, &[true; 3], -2, 2).unwrap();
    w.quiver.check_axioms().unwrap();
    let qv = w.quiver.quiver();
    let a = qv.arrow(w.index(-1, 1).unwrap(), w.index(0, 0).unwrap()).unwrap();
    assert_eq!((a.d, a.dprime), (2, 1));
    let b = qv.arrow(w.index(-1, 1).unwrap(), w.index(0, 2).unwrap()).unwrap();
    assert_eq!((b.d, b.dprime), (1, 3));
}

#[test]
fn zq_rejects_loops() {
    let looped = ValuedQuiver::from_edges(&["x"], &[(0, 0)]).unwrap();
    assert!(matches!(zq(&looped, &[true], 0, 2), Err(Error::HasLoops)));
}

#[test]
fn tubes_from_the_ray() {
    let (tree, complete) = a_infinity(6);
    let w = zq(&tree, &complete, -4, 4).unwrap();
    for k in [1, 2, 3] {
        let t = quotient_cyclic(&w, k).unwrap();
        t.quiver.check_axioms().unwrap();
        for v in 0..t.quiver.quiver().len() {
            assert_eq!(t.quiver.tau_period(v), Some(k));
        }
        assert!(!t.quiver.quiver().has_loops());
    }
    let tube = quotient_cyclic(&w, 1).unwrap();
    // The homogeneous tube: i → i+1 → i for every i.
    let qv = tube.quiver.quiver();
    assert!(qv.arrow(0, 1).is_some() && qv.arrow(1, 0).is_some());
    assert!(matches!(quotient_cyclic(&w, 8), Err(Error::WindowTooSmall(_))));
    assert!(matches!(quotient_cyclic(&w, 0), Err(Error::InvalidInput(_))));
}

#[test]
fn two_cycles_are_not_admissible_for_tau() {
    let tree = ValuedQuiver::from_edges(&["x", "y"], &[(0, 1), (1, 0)]).unwrap();
    let w = zq(&tree, &[true, true], -3, 3).unwrap();
    assert!(matches!(quotient_cyclic(&w, 1), Err(Error::NotAdmissible(_))));
    assert!(quotient_cyclic(&w, 2).is_ok());
}

#[test]
fn quiver_json_and_dot() {
    let (tree, complete) = a_infinity(3);
    let w = zq(&tree, &complete, 0, 2).unwrap();
    let j = w.quiver.to_json();
    let s = serde_json::to_string(&j).unwrap();
    let v: serde_json::Value = serde_json::from_str(&s).unwrap();
    assert!(v["arrows"][0].get("dprime").is_some());
    let back: QuiverJson = serde_json::from_str(&s).unwrap();
    assert_eq!(TranslationQuiver::from_json(back).unwrap(), w.quiver);
    let dot = w.quiver.to_dot();
    assert!(dot.starts_with("digraph"));
    assert!(dot.contains("style=dashed"));
}

#[test]
fn cartan_examples() {
    let a2 = ValuedQuiver::from_edges(&["x", "y"], &[(0, 1)]).unwrap();
    assert_eq!(cartan_from_valued(&a2).unwrap().c, vec![vec![2, -1], vec![-1, 2]]);
    let a11 = ValuedQuiver::new(vec!["x".into(), "y".into()], vec![Arrow::new(0, 1, 1, 4)]).unwrap();
    assert_eq!(cartan_from_valued(&a11).unwrap().c, vec![vec![2, -4], vec![-1, 2]]);
    let g2 = ValuedQuiver::new(vec!["x".into(), "y".into()], vec![Arrow::new(0, 1, 3, 1)]).unwrap();
    assert_eq!(cartan_from_valued(&g2).unwrap().c, vec![vec![2, -1], vec![-3, 2]]);
    let looped = ValuedQuiver::from_edges(&["x"], &[(0, 0)]).unwrap();
    assert!(matches!(cartan_from_valued(&looped), Err(Error::HasLoops)));
    assert!(CartanMatrix::new(vec!["x".into(), "y".into()], vec![vec![2, -1], vec![0, 2]]).is_err());
}

#[test]
fn subadditive_examples() {
    let (ray, complete) = a_infinity(8);
    let c = cartan_from_valued(&ray).unwrap();
    let rows: Vec<usize> = (0..8).filter(|&i| complete[i]).collect();
    let lin: Vec<Rational64> = (1..=8).map(q).collect();
    let rep = ar_lattice::quiver::check_subadditive_at(&c, &lin, &rows).unwrap();
    assert_eq!(rep.class, Additivity::Additive);
    let rep = ar_lattice::quiver::check_subadditive_at(&c, &ls(&[1; 8]), &rows).unwrap();
    assert_eq!((rep.class, rep.witness), (Additivity::Subadditive, Some(0)));

    let a11 = ValuedQuiver::new(vec!["x".into(), "y".into()], vec![Arrow::new(0, 1, 1, 4)]).unwrap();
    let c = cartan_from_valued(&a11).unwrap();
    assert_eq!(check_subadditive(&c, &ls(&[2, 1])).unwrap().class, Additivity::Additive);
    let rep = check_subadditive(&c, &ls(&[1, 1])).unwrap();
    assert_eq!((rep.class, rep.witness), (Additivity::Neither, Some(0)));
    assert!(check_subadditive(&c, &ls(&[0, 1])).is_err());
}

#[test]
fn hpr_examples() {
    let (ray, complete) = a_infinity(7);
    let lin: Vec<Rational64> = (1..=7).map(q).collect();
    let rep = hpr_classify(&ray, &lin, Some(&complete)).unwrap();
    assert_eq!(rep.additivity, Additivity::Additive);
    assert!(!rep.bounded_on_window);
    assert_eq!(names(&rep.candidates), vec!["A∞"]);
    assert!(rep.consistent);
    assert!(rep.statements.iter().filter(|s| s.applies).map(|s| s.case).eq([1, 3, 4]));

    let d4 = ValuedQuiver::from_edges(&["a", "b", "c", "d"], &[(0, 1), (2, 1), (3, 1)]).unwrap();
    // ℓ ≡ 1 fails at the branch vertex (2 − 3 < 0).
    assert!(hpr_classify(&d4, &ls(&[1, 1, 1, 1]), None).is_err());
    let rep = hpr_classify(&d4, &ls(&[1, 2, 1, 1]), None).unwrap();
    assert_eq!(rep.additivity, Additivity::Subadditive);
    assert_eq!(names(&rep.candidates), vec!["D_4"]);
    assert!(rep.consistent);

    let a11 = ValuedQuiver::new(vec!["x".into(), "y".into()], vec![Arrow::new(0, 1, 1, 4)]).unwrap();
    let rep = hpr_classify(&a11, &ls(&[2, 1]), None).unwrap();
    assert_eq!(rep.additivity, Additivity::Additive);
    assert_eq!(names(&rep.candidates), vec!["Ã11"]);
    assert!(rep.consistent);
}

#[test]
fn recognize_examples() {
    assert_eq!(names(&recognize_diagram(&path(5), None, RecognizeMode::Exact)), vec!["A_5"]);
    let mut win = names(&recognize_diagram(&path(5), None, RecognizeMode::WindowOfInfinite));
    win.sort();
    assert_eq!(win, vec!["A∞", "A∞^∞"]);
    // A complete end vertex pins the ray.
    let complete = [true, true, false, false, false];
    assert_eq!(names(&recognize_diagram(&path(5), Some(&complete), RecognizeMode::WindowOfInfinite)), vec!["A∞"]);
    // An even path has no centred ball in the line.
    assert_eq!(names(&recognize_diagram(&path(4), None, RecognizeMode::WindowOfInfinite)), vec!["A∞"]);

    let mut b = path(5);
    b.add_edge(0, 1, (1, 2));
    assert_eq!(names(&recognize_diagram(&b, None, RecognizeMode::Exact)), vec!["B_5"]);
    let mut b2 = path(2);
    b2.add_edge(0, 1, (1, 2));
    assert_eq!(names(&recognize_diagram(&b2, None, RecognizeMode::Exact)), vec!["B_2", "C_2"]);

    // Three leaves around a vertex with a tail.
    let mut d = ValuedGraph::empty(6);
    for (u, v) in [(0, 1), (0, 2), (0, 3), (3, 4), (4, 5)] {
        d.add_edge(u, v, (1, 1));
    }
    assert_eq!(names(&recognize_diagram(&d, None, RecognizeMode::Exact)), vec!["D_6"]);

    let mut kron = ValuedGraph::empty(2);
    kron.add_edge(0, 1, (2, 2));
    assert_eq!(names(&recognize_diagram(&kron, None, RecognizeMode::Exact)), vec!["Ã_1", "Ã12"]);
    let mut looped = ValuedGraph::empty(1);
    looped.loops[0] = 1;
    assert_eq!(names(&recognize_diagram(&looped, None, RecognizeMode::Exact)), vec!["Ã_0"]);
}

/// Every finite catalog member: valid Cartan matrix, recognized as itself,
/// positive additive function exactly for the Euclidean ones, strictly
/// subadditive function for the finite Dynkin ones.
#[test]
fn catalog_cartan_and_subadditive_functions() {
    let cat = finite_catalog(12);
    assert!(cat.len() > 100);
    for (label, g) in &cat {
        let found = recognize_diagram(g, None, RecognizeMode::Exact);
        assert!(found.contains(label), "{label}: {:?}", names(&found));
        let Ok(c) = g.cartan() else {
            assert_eq!(label.to_string(), "Ã_0");
            continue;
        };
        c.validate().unwrap();
        assert_eq!(cartan_from_valued(&g.to_quiver().unwrap()).unwrap().c, c.c);
        match label.class {
            DiagramClass::Euclidean => {
                let l = find_additive(&c).unwrap_or_else(|| panic!("{label}: no additive function"));
                assert_eq!(check_subadditive(&c, &l).unwrap().class, Additivity::Additive);
                assert!(find_strict_subadditive(&c).is_none(), "{label}");
            }
            DiagramClass::FiniteDynkin => {
                let l = find_strict_subadditive(&c).unwrap_or_else(|| panic!("{label}: none found"));
                assert_eq!(check_subadditive(&c, &l).unwrap().class, Additivity::Subadditive);
                assert!(find_additive(&c).is_none(), "{label}");
            }
            DiagramClass::InfiniteDynkin => unreachable!(),
        }
    }
    for name in ["E6", "E7", "E8", "F4", "G2", "Ẽ6", "Ẽ7", "Ẽ8", "F̃42", "G̃21", "G̃22", "Ã11", "Ã12"] {
        assert!(cat.iter().any(|(l, _)| l.name == name), "{name}");
    }
    assert_eq!(catalog_instances(9).iter().filter(|(l, _)| l.name == "Ẽ8").count(), 1);
}

/// Additive functions on windows of the infinite diagrams.
#[test]
fn infinite_diagrams_carry_additive_functions() {
    let len = 11;
    for label in infinite_labels() {
        let (g, complete) = infinite_window(&label.name, len).unwrap();
        let l: Vec<i64> = match label.name.as_str() {
            "A∞" => (1..=len as i64).collect(),
            "C∞" => (0..len).map(|i| if i == 0 { 1 } else { 2 }).collect(),
            "D∞" => (0..len).map(|i| if i == 0 || i == len - 1 { 1 } else { 2 }).collect(),
            _ => vec![1; len],
        };
        let qv = g.to_quiver().unwrap();
        let rep = hpr_classify(&qv, &ls(&l), Some(&complete)).unwrap();
        assert_eq!(rep.additivity, Additivity::Additive, "{label}");
        assert!(rep.candidates.contains(&label), "{label}: {:?}", names(&rep.candidates));
    }
}

fn tree_strategy() -> impl Strategy<Value = ValuedQuiver> {
    (1usize..7).prop_flat_map(|n| {
        prop::collection::vec((any::<prop::sample::Index>(), any::<bool>(), 1u32..4, 1u32..4), n - 1).prop_map(
            move |edges| {
                let arrows = edges
                    .iter()
                    .enumerate()
                    .map(|(i, (parent, fwd, d, dp))| {
                        let (child, par) = (i + 1, parent.index(i + 1));
                        if *fwd {
                            Arrow::new(par, child, *d, *dp)
                        } else {
                            Arrow::new(child, par, *d, *dp)
                        }
                    })
                    .collect();
                ValuedQuiver::new((0..n).map(|i| format!("x{i}")).collect(), arrows).unwrap()
            },
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn zq_windows_are_translation_quivers(tree in tree_strategy(), lo in -3i64..0, span in 3i64..6, k in 1usize..4) {
        let complete = vec![true; tree.len()];
        let w = zq(&tree, &complete, lo, lo + span).unwrap();
        w.quiver.check_axioms().unwrap();
        prop_assume!(span >= k as i64 + 1);
        let t = quotient_cyclic(&w, k).unwrap();
        t.quiver.check_axioms().unwrap();
        for v in 0..t.quiver.quiver().len() {
            prop_assert_eq!(t.quiver.tau_period(v), Some(k));
        }
        let c = cartan_from_valued(&tree).unwrap();
        c.validate().unwrap();
    }

    #[test]
    fn subadditivity_is_scale_invariant(tree in tree_strategy(), raw in prop::collection::vec(1i64..6, 7), s in 1i64..7, t in 1i64..7) {
        let c = cartan_from_valued(&tree).unwrap();
        let l: Vec<Rational64> = raw[..c.len()].iter().map(|&x| q(x)).collect();
        let scaled: Vec<Rational64> = l.iter().map(|x| x * Rational64::new(s, t)).collect();
        prop_assert_eq!(check_subadditive(&c, &l).unwrap(), check_subadditive(&c, &scaled).unwrap());
    }
}
