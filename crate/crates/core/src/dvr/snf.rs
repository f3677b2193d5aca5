//! Smith normal form and kernels over a [`Ring`] whose ideals are powers of ε.

use super::matrix::{identity, Mat};
use super::Ring;
use crate::error::{Error, Result};

/// `U · A · V = diag(ε^{v_1}, …, ε^{v_rank}, 0, …)` with `v_1 ≤ v_2 ≤ …`.
#[derive(Clone, Debug)]
pub struct SnfResult<E> {
    pub u: Mat<E>,
    pub v: Mat<E>,
    pub pivots: Vec<usize>,
    pub rank: usize,
}

/// Smith normal form. Among the minimal-valuation entries of the active
/// block the smallest `(row, col)` is chosen as pivot, so the result is
/// deterministic. Pivots of valuation `>= budget` abort.
pub fn snf<R: Ring>(r: &R, a: &Mat<R::E>) -> Result<SnfResult<R::E>> {
    let (m, n) = (a.rows, a.cols);
    let mut w = a.clone();
    let mut u = identity(r, m);
    let mut v = identity(r, n);
    let mut pivots = Vec::new();
    let mut k = 0;
    while k < m.min(n) {
        let mut best: Option<(usize, usize, usize)> = None;
        for i in k..m {
            for j in k..n {
                if let Some(val) = r.val(w.get(i, j)) {
                    if best.is_none_or(|(bv, _, _)| val < bv) {
                        best = Some((val, i, j));
                        if val == 0 {
                            break;
                        }
                    }
                }
            }
            if matches!(best, Some((0, _, _))) {
                break;
            }
        }
        let Some((val, pi, pj)) = best else { break };
        if val >= r.budget() {
            return Err(Error::PrecisionExhausted {
                valuation: val,
                budget: r.budget(),
            });
        }
        w.swap_rows(k, pi);
        u.swap_rows(k, pi);
        w.swap_cols(k, pj);
        v.swap_cols(k, pj);

        // Normalize the pivot to exactly ε^val.
        let unit = r.shift_down(w.get(k, k), val);
        let uinv = r.unit_inv(unit)?;
        scale_row(r, &mut w, k, uinv);
        scale_row(r, &mut u, k, uinv);
        let piv = w.get(k, k);

        for i in k + 1..m {
            let x = w.get(i, k);
            if r.is_zero(x) {
                continue;
            }
            let f = r.div_exact(x, piv)?;
            row_axpy(r, &mut w, i, k, f);
            row_axpy(r, &mut u, i, k, f);
        }
        for j in k + 1..n {
            let x = w.get(k, j);
            if r.is_zero(x) {
                continue;
            }
            let f = r.div_exact(x, piv)?;
            col_axpy(r, &mut w, j, k, f);
            col_axpy(r, &mut v, j, k, f);
        }
        pivots.push(val);
        k += 1;
    }
    Ok(SnfResult {
        u,
        v,
        rank: pivots.len(),
        pivots,
    })
}

fn scale_row<R: Ring>(r: &R, m: &mut Mat<R::E>, i: usize, s: R::E) {
    for j in 0..m.cols {
        let x = m.get(i, j);
        m.set(i, j, r.mul(s, x));
    }
}

/// row_i -= f · row_k
fn row_axpy<R: Ring>(r: &R, m: &mut Mat<R::E>, i: usize, k: usize, f: R::E) {
    for j in 0..m.cols {
        let y = m.get(k, j);
        if !r.is_zero(y) {
            let x = m.get(i, j);
            m.set(i, j, r.sub(x, r.mul(f, y)));
        }
    }
}

/// col_j -= f · col_k
fn col_axpy<R: Ring>(r: &R, m: &mut Mat<R::E>, j: usize, k: usize, f: R::E) {
    for i in 0..m.rows {
        let y = m.get(i, k);
        if !r.is_zero(y) {
            let x = m.get(i, j);
            m.set(i, j, r.sub(x, r.mul(f, y)));
        }
    }
}

/// Saturated kernel of a matrix.
#[derive(Clone, Debug)]
pub struct Kernel<E> {
    /// Columns form a basis of the honest (torsion-free) kernel.
    pub basis: Mat<E>,
    /// Rows `rank..` of `V^{-1}`: a left inverse of `basis`.
    pub coords: Mat<E>,
    /// Largest pivot valuation; induced actions on the kernel are exact
    /// modulo `ε^{N - prec_loss}`.
    pub prec_loss: usize,
    /// Number of truncation-only torsion directions that were excluded.
    pub artifacts: usize,
}

/// Kernel of `A` as a direct summand of the source, together with a
/// coordinate map onto it.
pub fn kernel<R: Ring>(r: &R, a: &Mat<R::E>) -> Result<Kernel<R::E>> {
    let s = snf(r, a)?;
    let n = a.cols;
    let idx: Vec<usize> = (s.rank..n).collect();
    let basis = s.v.select_cols(&idx);
    let vinv = invert_unimodular(r, &s.v)?;
    let coords = vinv.select_rows(&idx);
    Ok(Kernel {
        basis,
        coords,
        prec_loss: s.pivots.iter().copied().max().unwrap_or(0),
        artifacts: s.pivots.iter().filter(|&&v| v > 0).count(),
    })
}

/// Kernel basis only.
pub fn kernel_basis<R: Ring>(r: &R, a: &Mat<R::E>) -> Result<Mat<R::E>> {
    Ok(kernel(r, a)?.basis)
}

/// Inverse of a matrix with unit determinant (Gauss–Jordan on unit pivots).
pub fn invert_unimodular<R: Ring>(r: &R, a: &Mat<R::E>) -> Result<Mat<R::E>> {
    let n = a.rows;
    let mut m = a.clone();
    let mut inv = identity(r, n);
    for c in 0..n {
        let piv = (c..n)
            .find(|&i| r.is_unit(m.get(i, c)))
            .ok_or(Error::NotAUnit)?;
        m.swap_rows(c, piv);
        inv.swap_rows(c, piv);
        let s = r.unit_inv(m.get(c, c))?;
        scale_row(r, &mut m, c, s);
        scale_row(r, &mut inv, c, s);
        for i in 0..n {
            if i != c {
                let f = m.get(i, c);
                if !r.is_zero(f) {
                    row_axpy(r, &mut m, i, c, f);
                    row_axpy(r, &mut inv, i, c, f);
                }
            }
        }
    }
    Ok(inv)
}
