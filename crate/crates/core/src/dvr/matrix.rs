//! Dense row-major matrices over a [`Ring`].

use serde::{Deserialize, Serialize};

use super::{Dvr, DvrElem, Fp, Ring};
use crate::error::{Error, Result};

/// Dense matrix; `data[i * cols + j]` is entry `(i, j)`. Matrices act on
/// column vectors, so column `j` is the image of the `j`-th basis vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Mat<T> {
    pub rows: usize,
    pub cols: usize,
    #[serde(rename = "entries")]
    pub data: Vec<T>,
}

impl<T: Copy> Mat<T> {
    pub fn filled(rows: usize, cols: usize, v: T) -> Self {
        Mat {
            rows,
            cols,
            data: vec![v; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        Mat {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    /// Matrix whose columns are the given vectors (all of length `rows`).
    pub fn from_cols(rows: usize, cols: &[Vec<T>], fill: T) -> Self {
        let mut m = Mat::filled(rows, cols.len(), fill);
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), rows);
            for (i, &v) in c.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> Self {
        Mat::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn submatrix(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Self {
        Mat::from_fn(rows.len(), cols.len(), |i, j| {
            self.get(rows.start + i, cols.start + j)
        })
    }

    pub fn select_cols(&self, idx: &[usize]) -> Self {
        Mat::from_fn(self.rows, idx.len(), |i, j| self.get(i, idx[j]))
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        Mat::from_fn(idx.len(), self.cols, |i, j| self.get(idx[i], j))
    }

    pub fn hstack(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows);
        Mat::from_fn(self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self.get(i, j)
            } else {
                other.get(i, j - self.cols)
            }
        })
    }

    pub fn vstack(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Mat {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    pub fn map<U: Copy>(&self, f: impl Fn(T) -> U) -> Mat<U> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }
}

pub fn zeros<R: Ring>(r: &R, rows: usize, cols: usize) -> Mat<R::E> {
    Mat::filled(rows, cols, r.zero())
}

pub fn identity<R: Ring>(r: &R, n: usize) -> Mat<R::E> {
    Mat::from_fn(n, n, |i, j| if i == j { r.one() } else { r.zero() })
}

pub fn mul<R: Ring>(r: &R, a: &Mat<R::E>, b: &Mat<R::E>) -> Mat<R::E> {
    assert_eq!(a.cols, b.rows, "dimension mismatch in product");
    let mut c = zeros(r, a.rows, b.cols);
    for i in 0..a.rows {
        for k in 0..a.cols {
            let x = a.get(i, k);
            if r.is_zero(x) {
                continue;
            }
            let brow = b.row(k);
            let crow = &mut c.data[i * b.cols..(i + 1) * b.cols];
            for (cv, &bv) in crow.iter_mut().zip(brow) {
                if !r.is_zero(bv) {
                    *cv = r.add(*cv, r.mul(x, bv));
                }
            }
        }
    }
    c
}

pub fn mul_vec<R: Ring>(r: &R, a: &Mat<R::E>, v: &[R::E]) -> Vec<R::E> {
    assert_eq!(a.cols, v.len());
    (0..a.rows)
        .map(|i| {
            let mut s = r.zero();
            for (j, &x) in a.row(i).iter().enumerate() {
                if !r.is_zero(x) && !r.is_zero(v[j]) {
                    s = r.add(s, r.mul(x, v[j]));
                }
            }
            s
        })
        .collect()
}

pub fn add<R: Ring>(r: &R, a: &Mat<R::E>, b: &Mat<R::E>) -> Mat<R::E> {
    assert_eq!((a.rows, a.cols), (b.rows, b.cols));
    Mat {
        rows: a.rows,
        cols: a.cols,
        data: a.data.iter().zip(&b.data).map(|(&x, &y)| r.add(x, y)).collect(),
    }
}

pub fn sub<R: Ring>(r: &R, a: &Mat<R::E>, b: &Mat<R::E>) -> Mat<R::E> {
    assert_eq!((a.rows, a.cols), (b.rows, b.cols));
    Mat {
        rows: a.rows,
        cols: a.cols,
        data: a.data.iter().zip(&b.data).map(|(&x, &y)| r.sub(x, y)).collect(),
    }
}

pub fn scale<R: Ring>(r: &R, s: R::E, a: &Mat<R::E>) -> Mat<R::E> {
    a.map(|x| r.mul(s, x))
}

pub fn is_zero<R: Ring>(r: &R, a: &Mat<R::E>) -> bool {
    a.data.iter().all(|&x| r.is_zero(x))
}

pub fn truncate<R: Ring>(r: &R, a: &Mat<R::E>) -> Mat<R::E> {
    a.map(|x| r.truncate(x))
}

pub fn block_diag<R: Ring>(r: &R, blocks: &[&Mat<R::E>]) -> Mat<R::E> {
    let rows = blocks.iter().map(|b| b.rows).sum();
    let cols = blocks.iter().map(|b| b.cols).sum();
    let mut m = zeros(r, rows, cols);
    let (mut r0, mut c0) = (0, 0);
    for b in blocks {
        for i in 0..b.rows {
            for j in 0..b.cols {
                m.set(r0 + i, c0 + j, b.get(i, j));
            }
        }
        r0 += b.rows;
        c0 += b.cols;
    }
    m
}

/// Minimal valuation over all entries (`None` for the zero matrix).
pub fn min_val<R: Ring>(r: &R, a: &Mat<R::E>) -> Option<usize> {
    a.data.iter().filter_map(|&x| r.val(x)).min()
}

/// Entrywise reduction `O_N → κ`.
pub fn residue(r: &Dvr, a: &Mat<DvrElem>) -> Mat<u32> {
    a.map(|x| r.residue(x))
}

/// Entrywise constant lift `κ → O_N`.
pub fn lift(r: &Dvr, a: &Mat<u32>) -> Mat<DvrElem> {
    a.map(|x| r.lift(x))
}

/// Converts a matrix to another precision of the same ring.
pub fn reprec(r: &Dvr, a: &Mat<DvrElem>) -> Mat<DvrElem> {
    truncate(r, a)
}

/// Rank over the residue field.
pub fn rank_field(f: &Fp, a: &Mat<u32>) -> usize {
    let mut m = a.clone();
    let mut rank = 0;
    for c in 0..m.cols {
        let Some(piv) = (rank..m.rows).find(|&i| m.get(i, c) != 0) else {
            continue;
        };
        m.swap_rows(rank, piv);
        let inv = f.inv(m.get(rank, c)).expect("nonzero pivot");
        for i in 0..m.rows {
            if i != rank {
                let factor = f.mul(m.get(i, c), inv);
                if factor != 0 {
                    for j in c..m.cols {
                        let v = f.sub(m.get(i, j), f.mul(factor, m.get(rank, j)));
                        m.set(i, j, v);
                    }
                }
            }
        }
        rank += 1;
        if rank == m.rows {
            break;
        }
    }
    rank
}

/// Determinant over a field (Gaussian elimination).
pub fn det_field(f: &Fp, a: &Mat<u32>) -> u32 {
    assert!(a.is_square());
    let n = a.rows;
    let mut m = a.clone();
    let mut det = 1u32;
    for c in 0..n {
        let Some(piv) = (c..n).find(|&i| m.get(i, c) != 0) else {
            return 0;
        };
        if piv != c {
            m.swap_rows(c, piv);
            det = f.neg(det);
        }
        let d = m.get(c, c);
        det = f.mul(det, d);
        let inv = f.inv(d).expect("nonzero pivot");
        for i in c + 1..n {
            let factor = f.mul(m.get(i, c), inv);
            if factor != 0 {
                for j in c..n {
                    let v = f.sub(m.get(i, j), f.mul(factor, m.get(c, j)));
                    m.set(i, j, v);
                }
            }
        }
    }
    det
}

/// Inverse of a square matrix over a field, if it exists.
pub fn inverse_field(f: &Fp, a: &Mat<u32>) -> Option<Mat<u32>> {
    let n = a.rows;
    let mut m = a.hstack(&identity(f, n));
    for c in 0..n {
        let piv = (c..n).find(|&i| m.get(i, c) != 0)?;
        m.swap_rows(c, piv);
        let inv = f.inv(m.get(c, c)).ok()?;
        for j in 0..2 * n {
            let v = f.mul(m.get(c, j), inv);
            m.set(c, j, v);
        }
        for i in 0..n {
            if i != c {
                let factor = m.get(i, c);
                if factor != 0 {
                    for j in 0..2 * n {
                        let v = f.sub(m.get(i, j), f.mul(factor, m.get(c, j)));
                        m.set(i, j, v);
                    }
                }
            }
        }
    }
    Some(m.submatrix(0..n, n..2 * n))
}

/// Inverse over `O_N` of a matrix whose reduction is invertible.
pub fn inverse_dvr(r: &Dvr, a: &Mat<DvrElem>) -> Result<Mat<DvrElem>> {
    let n = a.rows;
    if !a.is_square() {
        return Err(Error::InvalidInput("inverse of a non-square matrix".into()));
    }
    let mut m = a.hstack(&identity(r, n));
    for c in 0..n {
        let piv = (c..n)
            .find(|&i| r.is_unit(m.get(i, c)))
            .ok_or(Error::NotAUnit)?;
        m.swap_rows(c, piv);
        let inv = r.unit_inv(m.get(c, c))?;
        for j in 0..2 * n {
            let v = r.mul(m.get(c, j), inv);
            m.set(c, j, v);
        }
        for i in 0..n {
            if i != c {
                let factor = m.get(i, c);
                if !r.is_zero(factor) {
                    for j in 0..2 * n {
                        let v = r.sub(m.get(i, j), r.mul(factor, m.get(c, j)));
                        m.set(i, j, v);
                    }
                }
            }
        }
    }
    Ok(m.submatrix(0..n, n..2 * n))
}

/// Determinant over `O_N` by fraction-free elimination on unit pivots,
/// falling back to minimal-valuation pivots.
pub fn det_dvr(r: &Dvr, a: &Mat<DvrElem>) -> DvrElem {
    assert!(a.is_square());
    let n = a.rows;
    let mut m = a.clone();
    let mut det = r.one();
    for c in 0..n {
        let piv = (c..n)
            .filter_map(|i| r.val(m.get(i, c)).map(|v| (v, i)))
            .min();
        let Some((_, piv)) = piv else {
            return r.zero();
        };
        if piv != c {
            m.swap_rows(c, piv);
            det = r.neg(det);
        }
        let d = m.get(c, c);
        det = r.mul(det, d);
        for i in c + 1..n {
            let x = m.get(i, c);
            if r.is_zero(x) {
                continue;
            }
            let factor = r.div_exact(x, d).expect("minimal valuation pivot divides");
            for j in c..n {
                let v = r.sub(m.get(i, j), r.mul(factor, m.get(c, j)));
                m.set(i, j, v);
            }
        }
    }
    det
}
