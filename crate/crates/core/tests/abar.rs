use ar_lattice::abar::{
    decompose, decompose_summands, direct_sum, hom_space, is_indecomposable, is_isomorphic,
    isotypic_components,
    known_ar_sequence, make_catalog, syzygy_abar, AbarModule, CatalogLabel, Decomposition, Lambda,
};
use ar_lattice::dvr::matrix::{self as mx, Mat};
use ar_lattice::dvr::{Fp, Ring};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 7;

fn band(l: u32, n: usize) -> CatalogLabel {
    CatalogLabel::band(Lambda::Finite(l), n)
}

fn band_inf(n: usize) -> CatalogLabel {
    CatalogLabel::band(Lambda::Infinity, n)
}

fn cat(l: CatalogLabel, p: u32) -> AbarModule {
    make_catalog(l, p).unwrap()
}

/// All catalog labels of dimension ≤ `dmax` over F_p (bands up to n = dmax/2).
fn labels_up_to(p: u32, dmax: usize) -> Vec<CatalogLabel> {
    let mut out = vec![CatalogLabel::Projective];
    for m in -(dmax as i64)..=(dmax as i64) {
        out.push(CatalogLabel::string(m));
    }
    for n in 1..=dmax / 2 {
        for l in 0..p {
            out.push(band(l, n));
        }
        out.push(band_inf(n));
    }
    out.retain(|l| l.dim() <= dmax);
    out
}

/// Counts `f` with `f·M_i = N_i·f` by enumerating every matrix over F_2.
fn brute_hom_count_f2(m: &AbarModule, n: &AbarModule) -> usize {
    let f = Fp::new(2).unwrap();
    let (r, c) = (n.d, m.d);
    let cells = r * c;
    (0u64..1 << cells)
        .filter(|bits| {
            let h = Mat::from_fn(r, c, |i, j| ((bits >> (i * c + j)) & 1) as u32);
            mx::mul(&f, &h, &m.m1) == mx::mul(&f, &n.m1, &h)
                && mx::mul(&f, &h, &m.m2) == mx::mul(&f, &n.m2, &h)
        })
        .count()
}

#[test]
fn catalog_matrices() {
    let m = cat(band(0, 1), 5);
    assert_eq!(m.d, 2);
    assert_eq!(m.m1, Mat::from_rows(vec![vec![0, 0], vec![1, 0]]));
    assert_eq!(m.m2, Mat::from_rows(vec![vec![0, 0], vec![0, 0]]));

    let m = cat(band_inf(1), 5);
    assert_eq!(m.m1, Mat::from_rows(vec![vec![0, 0], vec![0, 0]]));
    assert_eq!(m.m2, Mat::from_rows(vec![vec![0, 0], vec![1, 0]]));

    let m = cat(CatalogLabel::string(0), 5);
    assert_eq!(m.d, 1);
    assert_eq!(m.m1.data, vec![0]);
    assert_eq!(m.m2.data, vec![0]);

    // M(λ)_2: Y u_2 = λ v_2 + v_1.
    let m = cat(band(3, 2), 5);
    assert_eq!(m.m2.col(1), vec![0, 0, 1, 3]);
    assert_eq!(m.m1.col(1), vec![0, 0, 0, 1]);

    // M(2): X u_i = v_i, Y u_i = v_{i+1}; M(−2): Y u_{i+1} = v_i.
    let m = cat(CatalogLabel::string(2), 5);
    assert_eq!(m.m1.col(0), vec![0, 0, 1, 0, 0]);
    assert_eq!(m.m2.col(0), vec![0, 0, 0, 1, 0]);
    let m = cat(CatalogLabel::string(-2), 5);
    assert_eq!(m.m1.col(1), vec![0, 0, 0, 0, 1]);
    assert_eq!(m.m2.col(1), vec![0, 0, 0, 1, 0]);
    assert_eq!(m.m2.col(2), vec![0, 0, 0, 0, 1]);

    for p in [2, 3, 5] {
        for l in labels_up_to(p, 8) {
            let m = cat(l, p);
            assert_eq!(m.d, l.dim());
            m.validate().unwrap();
        }
    }
}

#[test]
fn label_parsing_round_trips() {
    for l in labels_up_to(5, 6) {
        let s = l.to_string();
        assert_eq!(s.parse::<CatalogLabel>().unwrap(), l, "{s}");
        let j = serde_json::to_string(&l).unwrap();
        assert_eq!(serde_json::from_str::<CatalogLabel>(&j).unwrap(), l);
    }
    assert!("M(1)_0".parse::<CatalogLabel>().is_err());
    assert!("N(1)".parse::<CatalogLabel>().is_err());
}

#[test]
fn hom_examples() {
    let m = cat(band(0, 1), 2);
    assert_eq!(hom_space(&m, &m).unwrap().len(), 2);
    assert_eq!(hom_space(&m, &AbarModule::zero(2)).unwrap().len(), 0);
    let a = cat(CatalogLabel::Projective, 2);
    assert_eq!(hom_space(&a, &a).unwrap().len(), 4);
    assert_eq!(brute_hom_count_f2(&a, &a), 16);
}

#[test]
fn hom_dimensions_match_f2_enumeration() {
    let labels = labels_up_to(2, 3);
    for &l1 in &labels {
        for &l2 in &labels {
            let (m, n) = (cat(l1, 2), cat(l2, 2));
            let dim = hom_space(&m, &n).unwrap().len();
            assert_eq!(1usize << dim, brute_hom_count_f2(&m, &n), "Hom({l1}, {l2})");
        }
    }
}

#[test]
fn isomorphism_examples() {
    for l in labels_up_to(5, 6) {
        let m = cat(l, 5);
        assert!(is_isomorphic(&m, &m, SEED).unwrap());
    }
    assert!(!is_isomorphic(&cat(band(0, 1), 5), &cat(band_inf(1), 5), SEED).unwrap());
    let twice = direct_sum(5, &[&cat(band(1, 1), 5), &cat(band(1, 1), 5)]);
    assert!(!is_isomorphic(&cat(band(1, 2), 5), &twice, SEED).unwrap());
}

#[test]
fn decomposition_examples() {
    let m = direct_sum(5, &[&cat(band(2, 1), 5), &cat(band(2, 1), 5)]);
    assert_eq!(decompose(&m, SEED).unwrap(), Decomposition::from_labels([band(2, 1), band(2, 1)]));
    for p in [2, 5] {
        for l in labels_up_to(p, 6) {
            let d = decompose(&cat(l, p), SEED).unwrap();
            assert_eq!(d, Decomposition::from_labels([l]), "{l}");
            assert!(is_indecomposable(&cat(l, p)).unwrap());
        }
    }
    let m = direct_sum(5, &[&cat(CatalogLabel::Projective, 5), &cat(CatalogLabel::string(-1), 5)]);
    assert!(!is_indecomposable(&m).unwrap());
    assert_eq!(
        decompose(&m, SEED).unwrap().to_string(),
        "M(-1) ⊕ Ā"
    );
}

#[test]
fn syzygy_examples() {
    let f5 = Fp::new(5).unwrap();
    for n in 1..=3 {
        for l in 0..5 {
            let om = syzygy_abar(&cat(band(l, n), 5)).unwrap();
            let neg = cat(band(f5.norm(-(l as i64)), n), 5);
            assert!(is_isomorphic(&om, &neg, SEED).unwrap(), "Ω M({l})_{n}");
        }
        let om = syzygy_abar(&cat(band_inf(n), 5)).unwrap();
        assert!(is_isomorphic(&om, &cat(band_inf(n), 5), SEED).unwrap());
    }
    // Ω of the simple module is the radical of Ā, which is M(−1).
    let om = syzygy_abar(&cat(CatalogLabel::string(0), 5)).unwrap();
    assert_eq!(om.d, 3);
    assert_eq!(decompose(&om, SEED).unwrap(), Decomposition::from_labels([CatalogLabel::string(-1)]));
    // Ω M(m) ≅ M(m − 1).
    for m in -3..=3 {
        let om = syzygy_abar(&cat(CatalogLabel::string(m), 5)).unwrap();
        assert_eq!(
            decompose(&om, SEED).unwrap(),
            Decomposition::from_labels([CatalogLabel::string(m - 1)]),
            "Ω M({m})"
        );
    }
    assert_eq!(syzygy_abar(&cat(CatalogLabel::Projective, 5)).unwrap().d, 0);
}

#[test]
fn known_sequences_are_consistent() {
    // τ = Ω̃² for the symmetric algebra Ā, and dimensions add up.
    for p in [2, 5] {
        let mut labels = labels_up_to(p, 8);
        labels.retain(|l| !l.is_projective());
        for l in labels {
            let s = known_ar_sequence(l).unwrap();
            assert_eq!(s.right, l);
            assert_eq!(s.left.dim() + s.right.dim(), s.middle.dim(), "{l}");
            let tau = syzygy_abar(&syzygy_abar(&cat(l, p)).unwrap()).unwrap();
            assert!(is_isomorphic(&tau, &cat(s.left, p), SEED).unwrap(), "τ {l}");
        }
    }
    let s = known_ar_sequence(band(3, 1)).unwrap();
    assert_eq!(s.middle, Decomposition::from_labels([band(3, 2)]));
    let s = known_ar_sequence(CatalogLabel::string(1)).unwrap();
    assert_eq!(s.left, CatalogLabel::string(-1));
    assert_eq!(
        s.middle,
        Decomposition::from_labels([CatalogLabel::Projective, CatalogLabel::string(0), CatalogLabel::string(0)])
    );
    assert!(known_ar_sequence(CatalogLabel::Projective).is_err());
}

#[test]
fn json_round_trip() {
    let m = cat(band(2, 2), 5);
    let s = serde_json::to_string(&m).unwrap();
    assert!(s.contains("\"M1\""));
    assert_eq!(serde_json::from_str::<AbarModule>(&s).unwrap(), m);
    let d = decompose(&direct_sum(5, &[&m, &cat(band_inf(1), 5)]), SEED).unwrap();
    let s = serde_json::to_string(&d).unwrap();
    assert!(s.starts_with('['));
    assert_eq!(serde_json::from_str::<Decomposition>(&s).unwrap(), d);
}

fn random_invertible(f: &Fp, d: usize, seed: u64) -> Mat<u32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let m = Mat::from_fn(d, d, |_, _| rng.gen_range(0..f.p()));
        if mx::det_field(f, &m) != 0 {
            return m;
        }
    }
}

fn label_strategy(p: u32) -> impl Strategy<Value = CatalogLabel> {
    prop_oneof![
        Just(CatalogLabel::Projective),
        (-3i64..=3).prop_map(CatalogLabel::string),
        (0..p, 1usize..=3).prop_map(|(l, n)| band(l, n)),
        (1usize..=3).prop_map(band_inf),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn decomposition_reassembles(
        p in prop_oneof![Just(2u32), Just(3u32), Just(5u32)],
        picks in prop::collection::vec(any::<u32>(), 1..=4),
        noise in any::<u64>(),
    ) {
        let f = Fp::new(p).unwrap();
        let all = labels_up_to(p, 6);
        let labels: Vec<CatalogLabel> = picks.iter().map(|&k| all[k as usize % all.len()]).collect();
        let mods: Vec<AbarModule> = labels.iter().map(|&l| cat(l, p)).collect();
        let refs: Vec<&AbarModule> = mods.iter().collect();
        let sum = direct_sum(p, &refs);
        let t = random_invertible(&f, sum.d, noise);
        let m = sum.conjugate(&t).unwrap();
        let parts = decompose_summands(&m, 11).unwrap();
        prop_assert_eq!(
            Decomposition::from_labels(parts.iter().map(|s| s.label.unwrap())),
            Decomposition::from_labels(labels)
        );
        for s in &parts {
            prop_assert!(is_indecomposable(s).unwrap());
        }
        let prefs: Vec<&AbarModule> = parts.iter().collect();
        prop_assert!(is_isomorphic(&direct_sum(p, &prefs), &m, 3).unwrap());
    }

    #[test]
    fn pairing_multiplicities_match_fitting(
        p in prop_oneof![Just(2u32), Just(3u32), Just(5u32)],
        picks in prop::collection::vec(any::<u32>(), 1..=8),
        noise in any::<u64>(),
    ) {
        let f = Fp::new(p).unwrap();
        let all = labels_up_to(p, 8);
        let labels: Vec<CatalogLabel> = picks.iter().map(|&k| all[k as usize % all.len()]).collect();
        let mods: Vec<AbarModule> = labels.iter().map(|&l| cat(l, p)).collect();
        let refs: Vec<&AbarModule> = mods.iter().collect();
        let sum = direct_sum(p, &refs);
        let m = sum.conjugate(&random_invertible(&f, sum.d, noise)).unwrap();
        let by_pairing = decompose(&m, 0).unwrap();
        let by_fitting = Decomposition::from_labels(
            decompose_summands(&m, 5).unwrap().iter().map(|s| s.label.unwrap()),
        );
        prop_assert_eq!(&by_pairing, &by_fitting);
        prop_assert_eq!(by_pairing, Decomposition::from_labels(labels));
        for c in isotypic_components(&m).unwrap() {
            let id = mx::identity(&f, m.d);
            prop_assert_eq!(c.image(&f, &id).unwrap(), mx::identity(&f, c.mult));
        }
    }

    #[test]
    fn hom_dimension_is_invariant(
        p in prop_oneof![Just(2u32), Just(5u32)],
        l1 in label_strategy(5),
        l2 in label_strategy(5),
        noise in any::<u64>(),
    ) {
        let fix = |l: CatalogLabel| match l {
            CatalogLabel::Band { lambda: Lambda::Finite(c), n } => band(c % p, n),
            other => other,
        };
        let f = Fp::new(p).unwrap();
        let (m, n) = (cat(fix(l1), p), cat(fix(l2), p));
        let d0 = hom_space(&m, &n).unwrap().len();
        let m2 = m.conjugate(&random_invertible(&f, m.d, noise)).unwrap();
        let n2 = n.conjugate(&random_invertible(&f, n.d, noise ^ 1)).unwrap();
        prop_assert_eq!(hom_space(&m2, &n2).unwrap().len(), d0);
    }
}

#[test]
fn repeated_summands_split_over_small_fields() {
    // End/rad contains M_2(κ), whose elements may have irreducible
    // characteristic polynomials.
    for (p, labels) in [
        (3u32, vec![CatalogLabel::string(-1), CatalogLabel::string(-1), band(1, 3), band(2, 2)]),
        (2, vec![CatalogLabel::string(1), CatalogLabel::string(1), band_inf(1), band_inf(1)]),
    ] {
        let f = Fp::new(p).unwrap();
        let mods: Vec<AbarModule> = labels.iter().map(|&l| cat(l, p)).collect();
        let refs: Vec<&AbarModule> = mods.iter().collect();
        let sum = direct_sum(p, &refs);
        for noise in 0..20 {
            let m = sum.conjugate(&random_invertible(&f, sum.d, noise)).unwrap();
            let parts = decompose_summands(&m, noise).unwrap();
            assert_eq!(
                Decomposition::from_labels(parts.iter().map(|s| s.label.unwrap())),
                Decomposition::from_labels(labels.clone())
            );
        }
    }
}
