use ar_lattice::dvr::matrix::{self as mx, Mat};
use ar_lattice::dvr::dense::{lift_solve, ChainSpan};
use ar_lattice::dvr::snf::{kernel, snf};
use ar_lattice::dvr::sparse::SparseSystem;
use ar_lattice::dvr::{idempotent::lift_idempotent, poly, Dvr, DvrElem, Fp, Ring};
use ar_lattice::Error;
use proptest::prelude::*;

fn o(p: u32, n: usize) -> Dvr {
    Dvr::new(p, n).unwrap()
}

#[test]
fn valuation_examples() {
    let r = o(5, 8);
    assert_eq!(r.val(r.monomial(3, 2)), Some(2));
    assert_eq!(r.val(r.zero()), None);
    assert_eq!(r.val(r.elem(&[1, 1])), Some(0));
}

#[test]
fn inverse_examples() {
    let r = o(5, 8);
    let inv = r.unit_inv(r.elem(&[1, 1])).unwrap();
    let expect: Vec<i64> = (0..8).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
    assert_eq!(inv, r.elem(&expect));
    assert_eq!(r.unit_inv(r.from_i64(2)).unwrap(), r.from_i64(3));
    assert_eq!(r.unit_inv(r.eps()), Err(Error::NotAUnit));
}

#[test]
fn snf_examples() {
    let r = o(5, 16);
    let e = r.eps();
    let diag = Mat::from_rows(vec![vec![e, r.zero()], vec![r.zero(), r.one()]]);
    assert_eq!(snf(&r, &diag).unwrap().pivots, vec![0, 1]);
    let a = Mat::from_rows(vec![vec![e, r.one()], vec![r.zero(), e]]);
    assert_eq!(snf(&r, &a).unwrap().pivots, vec![0, 2]);
    let z = mx::zeros(&r, 2, 2);
    let s = snf(&r, &z).unwrap();
    assert_eq!(s.rank, 0);
    assert!(s.pivots.is_empty());
}

#[test]
fn snf_budget_is_enforced() {
    let r = o(5, 16);
    let a = Mat::from_rows(vec![vec![r.eps_pow(8)]]);
    assert!(matches!(snf(&r, &a), Err(Error::PrecisionExhausted { .. })));
}

#[test]
fn kernel_examples() {
    let r = o(5, 16);
    let a = Mat::from_rows(vec![vec![r.one(), r.zero()]]);
    let k = kernel(&r, &a).unwrap();
    assert_eq!(k.basis, Mat::from_rows(vec![vec![r.zero()], vec![r.one()]]));
    assert_eq!(k.artifacts, 0);

    // (ε): the only O_N-kernel vector is the torsion ε^{N-1}; it is excluded.
    let a = Mat::from_rows(vec![vec![r.eps()]]);
    let k = kernel(&r, &a).unwrap();
    assert_eq!(k.basis.cols, 0);
    assert_eq!(k.artifacts, 1);
}

#[test]
fn lift_idempotent_examples() {
    let r = o(5, 16);
    let id = mx::identity(&r, 3);
    assert_eq!(lift_idempotent(&r, &id).unwrap(), id);
    let z = mx::zeros(&r, 3, 3);
    assert_eq!(lift_idempotent(&r, &z).unwrap(), z);

    let e = r.eps();
    let e0 = Mat::from_rows(vec![vec![r.one(), e], vec![e, r.zero()]]);
    let lifted = lift_idempotent(&r, &e0).unwrap();
    assert_eq!(mx::mul(&r, &lifted, &lifted), lifted);
    assert_eq!(mx::residue(&r, &lifted), mx::residue(&r, &e0));
    // Independent oracle: plain Newton iteration until it stabilizes.
    let mut x = e0.clone();
    for _ in 0..10 {
        let x2 = mx::mul(&r, &x, &x);
        let x3 = mx::mul(&r, &x2, &x);
        x = mx::sub(&r, &mx::scale(&r, r.from_i64(3), &x2), &mx::scale(&r, r.from_i64(2), &x3));
    }
    assert_eq!(x, lifted);

    let bad = Mat::from_rows(vec![vec![r.from_i64(2)]]);
    assert_eq!(lift_idempotent(&r, &bad), Err(Error::NotApproxIdempotent));
}

#[test]
fn charpoly_and_roots() {
    let f = Fp::new(5).unwrap();
    // [[1,1],[0,1]] has char poly (x-1)^2 = x^2 - 2x + 1.
    let a = Mat::from_rows(vec![vec![1, 1], vec![0, 1]]);
    assert_eq!(poly::charpoly(&f, &a), vec![1, 3, 1]);
    let (rts, rest) = poly::roots(&f, &poly::charpoly(&f, &a));
    assert_eq!(rts, vec![(1, 2)]);
    assert_eq!(rest, 0);
    // x^2 - 2 has no roots mod 5.
    let b = Mat::from_rows(vec![vec![0, 2], vec![1, 0]]);
    let (rts, rest) = poly::roots(&f, &poly::charpoly(&f, &b));
    assert!(rts.is_empty());
    assert_eq!(rest, 2);
}

fn elem_strategy(p: u32, n: usize) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(0..p as i64, n)
}

/// Random matrix whose entries have random valuation (biased towards
/// positive valuations so that SNF pivots are nontrivial).
fn mat_strategy(p: u32, prec: usize) -> impl Strategy<Value = (usize, usize, Vec<(usize, Vec<i64>)>)> {
    (1usize..=12, 1usize..=12).prop_flat_map(move |(m, n)| {
        (
            Just(m),
            Just(n),
            prop::collection::vec((0usize..4, elem_strategy(p, prec)), m * n),
        )
    })
}

fn build(r: &Dvr, m: usize, n: usize, entries: &[(usize, Vec<i64>)]) -> Mat<DvrElem> {
    Mat::from_fn(m, n, |i, j| {
        let (shift, c) = &entries[i * n + j];
        let x = r.elem(c);
        if *shift == 3 {
            r.zero()
        } else {
            r.shift_up(x, *shift)
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn snf_round_trip((m, n, entries) in mat_strategy(5, 16)) {
        let r = o(5, 16);
        let a = build(&r, m, n, &entries);
        let s = snf(&r, &a);
        prop_assume!(s.is_ok(), "pivot beyond the precision budget");
        let s = s.unwrap();
        let d = mx::mul(&r, &mx::mul(&r, &s.u, &a), &s.v);
        for i in 0..m {
            for j in 0..n {
                let expect = if i == j && i < s.rank { r.eps_pow(s.pivots[i]) } else { r.zero() };
                prop_assert_eq!(d.get(i, j), expect);
            }
        }
        prop_assert!(s.pivots.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn kernel_sound_and_complete((m, n, entries) in mat_strategy(2, 16)) {
        let r = o(2, 16);
        let a = build(&r, m, n, &entries);
        let s = snf(&r, &a);
        prop_assume!(s.is_ok(), "pivot beyond the precision budget");
        let s = s.unwrap();
        let k = kernel(&r, &a).unwrap();
        prop_assert!(mx::is_zero(&r, &mx::mul(&r, &a, &k.basis)));
        prop_assert_eq!(k.basis.cols, n - s.rank);
        let id = mx::mul(&r, &k.coords, &k.basis);
        prop_assert_eq!(id, mx::identity(&r, n - s.rank));
    }

    #[test]
    fn sparse_kernel_matches_snf((m, n, entries) in mat_strategy(5, 16)) {
        let r = o(5, 16);
        let a = build(&r, m, n, &entries);
        let mut sys = SparseSystem::new(&r, n, 0);
        for i in 0..m {
            sys.push((0..n).map(|j| (j, a.get(i, j))).collect(), vec![]);
        }
        let sol = sys.solve().unwrap();
        let s = snf(&r, &a).unwrap();
        prop_assert_eq!(sol.kernel.len(), n - s.rank);
        let rp = r.with_prec(sol.prec);
        for v in &sol.kernel {
            let av = mx::mul_vec(&rp, &mx::truncate(&rp, &a), v);
            prop_assert!(av.iter().all(|&x| rp.is_zero(x)));
        }
    }

    #[test]
    fn chain_span_matches_solving(
        (m, n, entries) in mat_strategy(3, 3),
        c in prop::collection::vec(elem_strategy(3, 3), 12),
        noise in prop::collection::vec((0usize..4, elem_strategy(3, 3)), 12),
    ) {
        let r = o(3, 3);
        let g = build(&r, m, n, &entries);
        let span = ChainSpan::new(&r, 3, m, (0..n).map(|j| g.col(j)));
        let coeffs: Vec<DvrElem> = c[..n].iter().map(|v| r.elem(v)).collect();
        let inside = mx::mul_vec(&r, &g, &coeffs);
        prop_assert!(span.contains(&inside));
        let noise: Vec<DvrElem> = noise[..m]
            .iter()
            .map(|(s, v)| if *s == 3 { r.zero() } else { r.shift_up(r.elem(v), *s) })
            .collect();
        let v: Vec<DvrElem> = inside.iter().zip(&noise).map(|(&a, &b)| r.add(a, b)).collect();
        prop_assert_eq!(span.contains(&v), lift_solve(&r, &g, &v, 3).is_some());
    }

    #[test]
    fn valuation_laws(a in elem_strategy(5, 16), b in elem_strategy(5, 16), s in 0usize..6, t in 0usize..6) {
        let r = o(5, 16);
        let x = r.shift_up(r.elem(&a), s);
        let y = r.shift_up(r.elem(&b), t);
        let vxy = r.val(r.mul(x, y));
        match (r.val(x), r.val(y)) {
            (Some(vx), Some(vy)) if vx + vy < 16 => prop_assert_eq!(vxy, Some(vx + vy)),
            _ => prop_assert!(vxy.is_none_or(|v| v >= 16)),
        }
        let vs = r.val(r.add(x, y));
        if let (Some(vx), Some(vy)) = (r.val(x), r.val(y)) {
            prop_assert!(vs.is_none_or(|v| v >= vx.min(vy)));
        }
    }
}

#[test]
fn sparse_inhomogeneous() {
    let r = o(5, 16);
    // x0 + ε x1 = 1 ; ε x1 = ε  → x1 = 1, x0 = 1 - ε
    let e = r.eps();
    let mut sys = SparseSystem::new(&r, 2, 2);
    sys.push(vec![(0, r.one()), (1, e)], vec![r.one(), r.zero()]);
    sys.push(vec![(1, e)], vec![e, r.one()]);
    let sol = sys.solve().unwrap();
    let rp = r.with_prec(sol.prec);
    let x = sol.particular[0].as_ref().unwrap();
    assert_eq!(x[1], rp.one());
    assert_eq!(x[0], rp.sub(rp.one(), rp.eps()));
    // second right-hand side demands ε x1 = 1: inconsistent
    assert!(sol.particular[1].is_none());
    assert!(sol.kernel.is_empty());
}
