//! Intertwiner spaces `{f : f·S_k = T_k·f}` between two families of
//! square matrices, solved with the sparse eliminator.

use super::matrix::Mat;
use super::sparse::SparseSystem;
use super::Ring;
use crate::error::{Error, Result};

/// Basis of an intertwiner module together with the free coordinates:
/// basis element `k` is 1 at flat position `free[k]` and 0 at the other
/// free positions, so any intertwiner is determined by its entries there.
#[derive(Clone, Debug)]
pub struct Intertwiners<E> {
    pub basis: Vec<Mat<E>>,
    pub free: Vec<usize>,
    pub prec: usize,
}

impl<E: Copy> Intertwiners<E> {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Coordinates of an intertwiner `f` in the basis.
    pub fn coords(&self, f: &Mat<E>) -> Vec<E> {
        self.free.iter().map(|&k| f.data[k]).collect()
    }
}

fn nonzero_cols<R: Ring>(r: &R, m: &Mat<R::E>) -> Vec<Vec<(usize, R::E)>> {
    (0..m.cols)
        .map(|j| {
            (0..m.rows)
                .filter_map(|i| {
                    let v = m.get(i, j);
                    (!r.is_zero(v)).then_some((i, v))
                })
                .collect()
        })
        .collect()
}

fn nonzero_rows<R: Ring>(r: &R, m: &Mat<R::E>) -> Vec<Vec<(usize, R::E)>> {
    (0..m.rows)
        .map(|i| {
            (0..m.cols)
                .filter_map(|j| {
                    let v = m.get(i, j);
                    (!r.is_zero(v)).then_some((j, v))
                })
                .collect()
        })
        .collect()
}

/// All `f : κ^{ds} → κ^{dt}` (over the ring) with `f·src[k] = tgt[k]·f`.
pub fn intertwiners<R: Ring>(
    r: &R,
    src: &[&Mat<R::E>],
    tgt: &[&Mat<R::E>],
) -> Result<Intertwiners<R::E>> {
    if src.len() != tgt.len() {
        return Err(Error::InvalidInput("mismatched operator families".into()));
    }
    let ds = src.first().map_or(0, |m| m.rows);
    let dt = tgt.first().map_or(0, |m| m.rows);
    if ds == 0 || dt == 0 {
        return Ok(Intertwiners {
            basis: Vec::new(),
            free: Vec::new(),
            prec: r.prec(),
        });
    }
    let mut sys = SparseSystem::new(r, ds * dt, 0);
    for (s, t) in src.iter().zip(tgt) {
        let scols = nonzero_cols(r, s);
        let trows = nonzero_rows(r, t);
        for i in 0..dt {
            for j in 0..ds {
                let mut row = Vec::with_capacity(scols[j].len() + trows[i].len());
                for &(l, v) in &scols[j] {
                    row.push((i * ds + l, v));
                }
                for &(l, v) in &trows[i] {
                    row.push((l * ds + j, r.neg(v)));
                }
                if !row.is_empty() {
                    sys.push(row, Vec::new());
                }
            }
        }
    }
    let sol = sys.solve()?;
    let basis = sol
        .kernel
        .into_iter()
        .map(|v| Mat {
            rows: dt,
            cols: ds,
            data: v,
        })
        .collect();
    Ok(Intertwiners {
        basis,
        free: sol.free_cols,
        prec: sol.prec,
    })
}
