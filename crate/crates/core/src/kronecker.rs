//! Helpers shared by modules over `R[X,Y]/(X², Y²)` for `R` the residue
//! field or `O_N`: the regular module, projective covers from chosen
//! generators, and splitting off free summands.
//!
//! The regular module has basis `(1, X, Y, XY)` per copy.

use crate::dvr::matrix::{self as mx, Mat};
use crate::dvr::snf;
use crate::dvr::Ring;
use crate::error::Result;

/// `(X, Y)` acting on the free module of rank `n`.
pub fn regular<R: Ring>(r: &R, n: usize) -> (Mat<R::E>, Mat<R::E>) {
    let mut x = mx::zeros(r, 4 * n, 4 * n);
    let mut y = mx::zeros(r, 4 * n, 4 * n);
    for k in 0..n {
        let b = 4 * k;
        x.set(b + 1, b, r.one());
        x.set(b + 3, b + 2, r.one());
        y.set(b + 2, b, r.one());
        y.set(b + 3, b + 1, r.one());
    }
    (x, y)
}

/// The map `R^{4t} → M` sending the `k`-th free generator to `gens[k]`:
/// columns `g, Xg, Yg, XYg` per generator.
pub fn cover_matrix<R: Ring>(r: &R, x: &Mat<R::E>, y: &Mat<R::E>, gens: &[Vec<R::E>]) -> Mat<R::E> {
    let mut cols = Vec::with_capacity(4 * gens.len());
    for g in gens {
        let xg = mx::mul_vec(r, x, g);
        let yg = mx::mul_vec(r, y, g);
        let xyg = mx::mul_vec(r, x, &yg);
        cols.extend([g.clone(), xg, yg, xyg]);
    }
    Mat::from_cols(x.rows, &cols, r.zero())
}

/// The homomorphism `M → R[X,Y]/(X²,Y²)` attached to the linear form `g`:
/// `m ↦ g(XYm)·1 + g(Ym)·X + g(Xm)·Y + g(m)·XY`, as a `4 × d` matrix.
pub fn trace_dual<R: Ring>(r: &R, x: &Mat<R::E>, y: &Mat<R::E>, g: &[R::E]) -> Mat<R::E> {
    let row = |m: &Mat<R::E>| -> Vec<R::E> {
        (0..m.cols)
            .map(|j| {
                (0..m.rows).fold(r.zero(), |acc, i| {
                    let a = m.get(i, j);
                    if r.is_zero(a) || r.is_zero(g[i]) {
                        acc
                    } else {
                        r.add(acc, r.mul(g[i], a))
                    }
                })
            })
            .collect()
    };
    let xy = mx::mul(r, x, y);
    Mat::from_rows(vec![row(&xy), row(y), row(x), g.to_vec()])
}

/// Restriction of an operator to a summand given by a kernel basis and its
/// coordinate map.
pub fn restrict<R: Ring>(r: &R, coords: &Mat<R::E>, op: &Mat<R::E>, basis: &Mat<R::E>) -> Mat<R::E> {
    mx::mul(r, coords, &mx::mul(r, op, basis))
}

/// A complement of one free summand, if `M` has one: `M ≅ A ⊕ M'` exactly
/// when `XY` has a unit entry. Returns the actions on `M'` and its basis
/// inside `M`.
#[allow(clippy::type_complexity)]
pub fn split_free_summand<R: Ring>(
    r: &R,
    x: &Mat<R::E>,
    y: &Mat<R::E>,
) -> Result<Option<(Mat<R::E>, Mat<R::E>, Mat<R::E>)>> {
    let xy = mx::mul(r, x, y);
    let Some(pos) = xy.data.iter().position(|&v| r.is_unit(v)) else {
        return Ok(None);
    };
    let i = pos / xy.cols;
    let mut g = vec![r.zero(); x.rows];
    g[i] = r.one();
    let f = trace_dual(r, x, y, &g);
    let k = snf::kernel(r, &f)?;
    let x2 = restrict(r, &k.coords, x, &k.basis);
    let y2 = restrict(r, &k.coords, y, &k.basis);
    Ok(Some((x2, y2, k.basis)))
}

/// Repeatedly splits off free summands. Returns the actions on the
/// remaining part, its basis inside `M`, and the number of free summands
/// removed.
#[allow(clippy::type_complexity)]
pub fn strip_free<R: Ring>(
    r: &R,
    x: &Mat<R::E>,
    y: &Mat<R::E>,
) -> Result<(Mat<R::E>, Mat<R::E>, Mat<R::E>, usize)> {
    let mut cur = (x.clone(), y.clone(), mx::identity(r, x.rows));
    let mut count = 0;
    while let Some((x2, y2, b)) = split_free_summand(r, &cur.0, &cur.1)? {
        cur = (x2, y2, mx::mul(r, &cur.2, &b));
        count += 1;
    }
    Ok((cur.0, cur.1, cur.2, count))
}
