//! Polynomials over `F_p` (little-endian coefficient vectors) and
//! characteristic polynomials of matrices over `F_p`.

use super::matrix::Mat;
use super::{Fp, Ring};

pub type Poly = Vec<u32>;

pub fn trim(mut a: Poly) -> Poly {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

pub fn degree(a: &Poly) -> Option<usize> {
    a.iter().rposition(|&c| c != 0)
}

pub fn add(f: &Fp, a: &Poly, b: &Poly) -> Poly {
    let n = a.len().max(b.len());
    trim(
        (0..n)
            .map(|i| f.add(*a.get(i).unwrap_or(&0), *b.get(i).unwrap_or(&0)))
            .collect(),
    )
}

pub fn sub(f: &Fp, a: &Poly, b: &Poly) -> Poly {
    let n = a.len().max(b.len());
    trim(
        (0..n)
            .map(|i| f.sub(*a.get(i).unwrap_or(&0), *b.get(i).unwrap_or(&0)))
            .collect(),
    )
}

pub fn mul(f: &Fp, a: &Poly, b: &Poly) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut c = vec![0u32; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            c[i + j] = f.add(c[i + j], f.mul(x, y));
        }
    }
    trim(c)
}

pub fn scale(f: &Fp, s: u32, a: &Poly) -> Poly {
    trim(a.iter().map(|&x| f.mul(s, x)).collect())
}

/// Quotient and remainder; `b` must be nonzero.
pub fn divrem(f: &Fp, a: &Poly, b: &Poly) -> (Poly, Poly) {
    let db = degree(b).expect("division by zero polynomial");
    let inv = f.inv(b[db]).expect("nonzero leading coefficient");
    let mut r = trim(a.clone());
    if r.len() <= db {
        return (Vec::new(), r);
    }
    let mut q = vec![0u32; r.len() - db];
    while let Some(dr) = degree(&r) {
        if dr < db {
            break;
        }
        let c = f.mul(r[dr], inv);
        q[dr - db] = c;
        for i in 0..=db {
            r[dr - db + i] = f.sub(r[dr - db + i], f.mul(c, b[i]));
        }
        r = trim(r);
    }
    (trim(q), r)
}

pub fn rem(f: &Fp, a: &Poly, b: &Poly) -> Poly {
    divrem(f, a, b).1
}

pub fn monic(f: &Fp, a: &Poly) -> Poly {
    match degree(a) {
        None => Vec::new(),
        Some(d) => scale(f, f.inv(a[d]).expect("nonzero"), a),
    }
}

pub fn gcd(f: &Fp, a: &Poly, b: &Poly) -> Poly {
    let (mut x, mut y) = (trim(a.clone()), trim(b.clone()));
    while !y.is_empty() {
        let r = rem(f, &x, &y);
        x = y;
        y = r;
    }
    monic(f, &x)
}

/// Extended gcd: returns `(g, s, t)` with `s·a + t·b = g` monic.
pub fn xgcd(f: &Fp, a: &Poly, b: &Poly) -> (Poly, Poly, Poly) {
    let (mut r0, mut r1) = (trim(a.clone()), trim(b.clone()));
    let (mut s0, mut s1) = (vec![1u32], Vec::new());
    let (mut t0, mut t1) = (Vec::new(), vec![1u32]);
    while !r1.is_empty() {
        let (q, r) = divrem(f, &r0, &r1);
        let s2 = sub(f, &s0, &mul(f, &q, &s1));
        let t2 = sub(f, &t0, &mul(f, &q, &t1));
        r0 = r1;
        r1 = r;
        s0 = s1;
        s1 = s2;
        t0 = t1;
        t1 = t2;
    }
    let d = degree(&r0).expect("gcd of zero polynomials");
    let inv = f.inv(r0[d]).expect("nonzero");
    (scale(f, inv, &r0), scale(f, inv, &s0), scale(f, inv, &t0))
}

pub fn mulmod(f: &Fp, a: &Poly, b: &Poly, m: &Poly) -> Poly {
    rem(f, &mul(f, a, b), m)
}

pub fn powmod(f: &Fp, a: &Poly, mut e: u128, m: &Poly) -> Poly {
    let mut base = rem(f, a, m);
    let mut acc = rem(f, &vec![1], m);
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(f, &acc, &base, m);
        }
        base = mulmod(f, &base, &base, m);
        e >>= 1;
    }
    acc
}

pub fn eval(f: &Fp, a: &Poly, x: u32) -> u32 {
    a.iter().rev().fold(0, |acc, &c| f.add(f.mul(acc, x), c))
}

/// Rabin-style irreducibility test for a monic polynomial of degree `k`.
pub fn is_irreducible(f: &Fp, a: &Poly) -> bool {
    let Some(k) = degree(a) else { return false };
    if k == 0 {
        return false;
    }
    let p = f.p() as u128;
    let x = vec![0, 1];
    // x^{p^k} ≡ x mod a, and gcd(x^{p^{k/q}} − x, a) = 1 for prime q | k.
    let mut xp = x.clone();
    let mut pows = vec![x.clone()];
    for _ in 0..k {
        xp = powmod(f, &xp, p, a);
        pows.push(xp.clone());
    }
    if sub(f, &pows[k], &rem(f, &x, a)) != Vec::<u32>::new() {
        return false;
    }
    for q in 2..=k {
        if k % q == 0 && (2..q).all(|d| q % d != 0) {
            let g = gcd(f, &sub(f, &pows[k / q], &x), a);
            if degree(&g) != Some(0) {
                return false;
            }
        }
    }
    true
}

/// Characteristic polynomial `det(x·I − A)` via Hessenberg reduction.
pub fn charpoly(f: &Fp, a: &Mat<u32>) -> Poly {
    assert!(a.is_square());
    let n = a.rows;
    let mut h = a.clone();
    // Reduce to upper Hessenberg form by similarity transformations.
    for j in 0..n.saturating_sub(2) {
        let Some(piv) = (j + 1..n).find(|&i| h.get(i, j) != 0) else {
            continue;
        };
        if piv != j + 1 {
            h.swap_rows(piv, j + 1);
            h.swap_cols(piv, j + 1);
        }
        let inv = f.inv(h.get(j + 1, j)).expect("nonzero pivot");
        for i in j + 2..n {
            let u = f.mul(h.get(i, j), inv);
            if u == 0 {
                continue;
            }
            // row_i -= u·row_{j+1}; col_{j+1} += u·col_i
            for c in 0..n {
                let v = f.sub(h.get(i, c), f.mul(u, h.get(j + 1, c)));
                h.set(i, c, v);
            }
            for r in 0..n {
                let v = f.add(h.get(r, j + 1), f.mul(u, h.get(r, i)));
                h.set(r, j + 1, v);
            }
        }
    }
    let mut ps: Vec<Poly> = vec![vec![1]];
    for m in 1..=n {
        let mut pm = mul(f, &vec![f.neg(h.get(m - 1, m - 1)), 1], &ps[m - 1]);
        let mut t = 1u32;
        for i in 1..m {
            t = f.mul(t, h.get(m - i, m - i - 1));
            let c = f.mul(t, h.get(m - i - 1, m - 1));
            if c != 0 {
                pm = sub(f, &pm, &scale(f, c, &ps[m - i - 1]));
            }
        }
        ps.push(pm);
    }
    ps.pop().unwrap()
}

/// Roots in `F_p` with multiplicities, plus the degree of the part without
/// roots in `F_p`.
pub fn roots(f: &Fp, a: &Poly) -> (Vec<(u32, usize)>, usize) {
    let mut rest = trim(a.clone());
    let mut out = Vec::new();
    for c in 0..f.p() {
        let mut mult = 0;
        while degree(&rest).is_some_and(|d| d > 0) && eval(f, &rest, c) == 0 {
            rest = divrem(f, &rest, &vec![f.neg(c), 1]).0;
            mult += 1;
        }
        if mult > 0 {
            out.push((c, mult));
        }
    }
    (out, degree(&rest).unwrap_or(0))
}

/// Evaluates a polynomial at a square matrix over any ring, lifting the
/// coefficients constantly.
pub fn eval_matrix<R: Ring>(r: &R, a: &Poly, m: &Mat<R::E>) -> Mat<R::E> {
    use super::matrix as mx;
    let n = m.rows;
    let mut acc = mx::zeros(r, n, n);
    for &c in a.iter().rev() {
        acc = mx::mul(r, &acc, m);
        for i in 0..n {
            let v = r.add(acc.get(i, i), r.lift(c));
            acc.set(i, i, v);
        }
    }
    acc
}
