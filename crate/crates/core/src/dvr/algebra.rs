//! Finite-dimensional matrix algebras over `F_p`: locality certification
//! and Fitting splitting.

use super::matrix::{self as mx, Mat};
use super::poly;
use super::snf;
use super::{Fp, Ring};

/// Outcome of the locality test for a subalgebra `B ⊆ M_d(κ)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Locality {
    /// `B = κ·1 ⊕ J` with `J` a nilpotent ideal: `B` is local with residue field κ.
    Local,
    /// Some element has at least two distinct eigenvalues in κ (or the
    /// candidate radical is not a nilpotent ideal).
    NotLocal,
    /// Some basis element has an irreducible factor of degree > 1.
    NonSplit,
}

/// Unique eigenvalue of `a` if its characteristic polynomial is `(x − c)^d`.
pub fn single_eigenvalue(f: &Fp, a: &Mat<u32>) -> Result<Option<u32>, ()> {
    let cp = poly::charpoly(f, a);
    let (roots, rest) = poly::roots(f, &cp);
    if rest > 0 {
        return Err(());
    }
    Ok((roots.len() == 1).then(|| roots[0].0))
}

/// Row-reduced basis of a subspace of `κ^n`, with pivot positions.
#[derive(Clone, Debug)]
pub struct Subspace {
    n: usize,
    rows: Vec<Vec<u32>>,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn new(n: usize) -> Self {
        Subspace {
            n,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn basis(&self) -> &[Vec<u32>] {
        &self.rows
    }

    /// Reduces `v` modulo the subspace; returns the residual.
    pub fn reduce(&self, f: &Fp, v: &[u32]) -> Vec<u32> {
        let mut w = v.to_vec();
        for (row, &pc) in self.rows.iter().zip(&self.pivots) {
            let c = w[pc];
            if c != 0 {
                for (x, &y) in w.iter_mut().zip(row) {
                    if y != 0 {
                        *x = f.sub(*x, f.mul(c, y));
                    }
                }
            }
        }
        w
    }

    pub fn contains(&self, f: &Fp, v: &[u32]) -> bool {
        self.reduce(f, v).iter().all(|&x| x == 0)
    }

    /// Inserts `v`; returns whether the dimension grew.
    pub fn insert(&mut self, f: &Fp, v: &[u32]) -> bool {
        assert_eq!(v.len(), self.n);
        let mut w = self.reduce(f, v);
        let Some(pc) = w.iter().position(|&x| x != 0) else {
            return false;
        };
        let inv = f.inv(w[pc]).expect("nonzero");
        for x in w.iter_mut() {
            *x = f.mul(*x, inv);
        }
        for row in self.rows.iter_mut() {
            let c = row[pc];
            if c != 0 {
                for (x, &y) in row.iter_mut().zip(&w) {
                    if y != 0 {
                        *x = f.sub(*x, f.mul(c, y));
                    }
                }
            }
        }
        self.rows.push(w);
        self.pivots.push(pc);
        true
    }
}

/// Certifies whether the algebra spanned by `basis` (which must be closed
/// under multiplication and contain the identity) is local with residue
/// field κ.
///
/// With `c_b` the unique eigenvalue of each basis element, the span `I` of
/// the `b − c_b` is the radical exactly when it has codimension one, is
/// closed under multiplication and acts nilpotently.
pub fn locality(f: &Fp, basis: &[Mat<u32>]) -> Locality {
    let Some(first) = basis.first() else {
        return Locality::NotLocal;
    };
    let d = first.rows;
    if d == 0 {
        return Locality::NotLocal;
    }
    let mut shifted = Vec::with_capacity(basis.len());
    for b in basis {
        match single_eigenvalue(f, b) {
            Err(()) => return Locality::NonSplit,
            Ok(None) => return Locality::NotLocal,
            Ok(Some(c)) => {
                let mut s = b.clone();
                for i in 0..d {
                    s.set(i, i, f.sub(s.get(i, i), c));
                }
                shifted.push(s);
            }
        }
    }
    let mut rad = Subspace::new(d * d);
    let mut rad_basis = Vec::new();
    for s in &shifted {
        if rad.insert(f, &s.data) {
            rad_basis.push(s.clone());
        }
    }
    if rad.dim() + 1 != basis.len() {
        return Locality::NotLocal;
    }
    // Closure: products must stay in I.
    for x in &rad_basis {
        for y in &rad_basis {
            if !rad.contains(f, &mx::mul(f, x, y).data) {
                return Locality::NotLocal;
            }
        }
    }
    // Nilpotency: I^k V must reach zero.
    let mut w: Vec<Vec<u32>> = (0..d)
        .map(|i| (0..d).map(|j| u32::from(i == j)).collect())
        .collect();
    loop {
        let mut next = Subspace::new(d);
        for x in &rad_basis {
            for v in &w {
                next.insert(f, &mx::mul_vec(f, x, v));
            }
        }
        if next.dim() == 0 {
            return Locality::Local;
        }
        if next.dim() >= w.len() {
            return Locality::NotLocal;
        }
        w = next.basis().to_vec();
    }
}

/// Column space basis (as columns of the returned matrix).
pub fn column_space(f: &Fp, a: &Mat<u32>) -> Mat<u32> {
    let mut sub = Subspace::new(a.rows);
    let mut cols = Vec::new();
    for j in 0..a.cols {
        let c = a.col(j);
        if sub.insert(f, &c) {
            cols.push(c);
        }
    }
    Mat::from_cols(a.rows, &cols, 0)
}

/// `a^k` by repeated squaring.
pub fn mat_pow<R: Ring>(r: &R, a: &Mat<R::E>, mut k: usize) -> Mat<R::E> {
    let mut acc = mx::identity(r, a.rows);
    let mut base = a.clone();
    while k > 0 {
        if k & 1 == 1 {
            acc = mx::mul(r, &acc, &base);
        }
        base = mx::mul(r, &base, &base);
        k >>= 1;
    }
    acc
}

/// Fitting decomposition of `κ^d` with respect to `θ`: the generalized
/// eigenspaces of the κ-rational eigenvalues, followed by the remaining
/// θ-stable complement (if nonzero). Returns `None` if this yields fewer
/// than two pieces.
pub fn fitting_pieces(f: &Fp, theta: &Mat<u32>) -> Option<Vec<Mat<u32>>> {
    let d = theta.rows;
    let cp = poly::charpoly(f, theta);
    let (roots, rest) = poly::roots(f, &cp);
    if roots.len() + usize::from(rest > 0) < 2 {
        return None;
    }
    let mut pieces = Vec::new();
    let mut prod = mx::identity(f, d);
    for &(c, _) in &roots {
        let mut s = theta.clone();
        for i in 0..d {
            s.set(i, i, f.sub(s.get(i, i), c));
        }
        let n = mat_pow(f, &s, d);
        pieces.push(snf::kernel_basis(f, &n).expect("field kernels never exhaust precision"));
        prod = mx::mul(f, &prod, &n);
    }
    if rest > 0 {
        pieces.push(column_space(f, &prod));
    }
    debug_assert_eq!(pieces.iter().map(|p| p.cols).sum::<usize>(), d);
    Some(pieces)
}
