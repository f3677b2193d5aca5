//! Sparse elimination for large linear systems over a [`Ring`].
//!
//! Rows are reduced online against unit pivots. When the remaining rows have
//! no unit entry left, each of them is divisible by ε and is divided once;
//! this is an equivalence over the honest valuation ring and costs one digit
//! of precision. The free columns then give a basis of the (saturated)
//! solution module.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::Ring;
use crate::error::{Error, Result};

/// A linear system `A x = B` with `A` sparse and a few dense right-hand sides.
#[derive(Clone, Debug)]
pub struct SparseSystem<R: Ring> {
    ring: R,
    ncols: usize,
    nrhs: usize,
    rows: Vec<(Vec<(usize, R::E)>, Vec<R::E>)>,
}

/// Solutions of a [`SparseSystem`].
#[derive(Clone, Debug)]
pub struct Solution<E> {
    /// Basis of `{x : A x = 0}`, one dense vector per free column.
    pub kernel: Vec<Vec<E>>,
    /// Free column of each kernel vector (that vector is 1 there and 0 at
    /// the other free columns).
    pub free_cols: Vec<usize>,
    /// A particular solution per right-hand side, `None` if inconsistent.
    pub particular: Vec<Option<Vec<E>>>,
    /// Working precision at which the solutions are exact.
    pub prec: usize,
}

struct Pivot<E> {
    col: usize,
    row: Vec<(usize, E)>,
    rhs: Vec<E>,
}

impl<R: Ring> SparseSystem<R> {
    pub fn new(ring: &R, ncols: usize, nrhs: usize) -> Self {
        SparseSystem {
            ring: ring.clone(),
            ncols,
            nrhs,
            rows: Vec::new(),
        }
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    /// Adds the equation `Σ coeff·x_col = rhs`; duplicate columns are summed.
    pub fn push(&mut self, mut entries: Vec<(usize, R::E)>, rhs: Vec<R::E>) {
        assert_eq!(rhs.len(), self.nrhs);
        let r = &self.ring;
        entries.sort_by_key(|e| e.0);
        let mut merged: Vec<(usize, R::E)> = Vec::with_capacity(entries.len());
        for (c, v) in entries {
            assert!(c < self.ncols);
            match merged.last_mut() {
                Some((lc, lv)) if *lc == c => *lv = r.add(*lv, v),
                _ => merged.push((c, v)),
            }
        }
        merged.retain(|(_, v)| !r.is_zero(*v));
        if merged.is_empty() && rhs.iter().all(|&v| r.is_zero(v)) {
            return;
        }
        self.rows.push((merged, rhs));
    }

    pub fn solve(&self) -> Result<Solution<R::E>> {
        let base = &self.ring;
        let n = self.ncols;
        let mut colcount = vec![0usize; n];
        for (row, _) in &self.rows {
            for &(c, _) in row {
                colcount[c] += 1;
            }
        }
        let mut order: Vec<usize> = (0..self.rows.len()).collect();
        order.sort_by_key(|&i| self.rows[i].0.len());

        let mut pivots: Vec<Pivot<R::E>> = Vec::new();
        let mut pivot_of: Vec<Option<usize>> = vec![None; n];
        let mut failed = vec![false; self.nrhs];
        let mut acc = Accumulator::new(base, n, self.nrhs);
        let mut pending: Vec<(Vec<(usize, R::E)>, Vec<R::E>)> =
            order.into_iter().map(|i| self.rows[i].clone()).collect();
        let mut divisions = 0usize;

        loop {
            let ring = base.with_prec(base.prec() - divisions);
            let mut deferred = Vec::new();
            for (row, rhs) in pending.drain(..) {
                acc.load(&ring, &row, &rhs);
                acc.reduce(&ring, &pivots, &pivot_of);
                match acc.choose_unit(&ring, &colcount) {
                    Some(c) => {
                        let k = pivots.len();
                        pivots.push(acc.make_pivot(&ring, c));
                        pivot_of[c] = Some(k);
                    }
                    None => {
                        if acc.is_zero_row() {
                            for (j, f) in failed.iter_mut().enumerate() {
                                if !ring.is_zero(acc.rhs[j]) {
                                    *f = true;
                                }
                            }
                        } else {
                            deferred.push(acc.export());
                        }
                    }
                }
                acc.clear();
            }
            if deferred.is_empty() {
                break;
            }
            divisions += 1;
            if divisions >= base.budget() {
                return Err(Error::PrecisionExhausted {
                    valuation: divisions,
                    budget: base.budget(),
                });
            }
            // Re-reduce against pivots found later in the round, then divide.
            let next = base.with_prec(base.prec() - divisions);
            for (row, rhs) in deferred {
                acc.load(&ring, &row, &rhs);
                acc.reduce(&ring, &pivots, &pivot_of);
                for (j, f) in failed.iter_mut().enumerate() {
                    if ring.val(acc.rhs[j]) == Some(0) {
                        *f = true;
                        acc.rhs[j] = ring.zero();
                    }
                }
                let (row, rhs) = acc.export();
                acc.clear();
                let row: Vec<_> = row
                    .into_iter()
                    .map(|(c, v)| (c, next.truncate(ring.shift_down(v, 1))))
                    .filter(|(_, v)| !next.is_zero(*v))
                    .collect();
                let rhs: Vec<_> = rhs
                    .into_iter()
                    .map(|v| next.truncate(ring.shift_down(v, 1)))
                    .collect();
                pending.push((row, rhs));
            }
        }

        let ring = base.with_prec(base.prec() - divisions);
        let free_cols: Vec<usize> = (0..n).filter(|&c| pivot_of[c].is_none()).collect();
        let mut kernel = Vec::with_capacity(free_cols.len());
        for &f in &free_cols {
            let mut x = vec![ring.zero(); n];
            x[f] = ring.one();
            back_substitute(&ring, &pivots, &mut x, None);
            kernel.push(x);
        }
        let mut particular = Vec::with_capacity(self.nrhs);
        for (j, &bad) in failed.iter().enumerate() {
            if bad {
                particular.push(None);
            } else {
                let mut x = vec![ring.zero(); n];
                back_substitute(&ring, &pivots, &mut x, Some(j));
                particular.push(Some(x));
            }
        }
        Ok(Solution {
            kernel,
            free_cols,
            particular,
            prec: ring.prec(),
        })
    }
}

fn back_substitute<R: Ring>(r: &R, pivots: &[Pivot<R::E>], x: &mut [R::E], rhs: Option<usize>) {
    for p in pivots.iter().rev() {
        let mut s = match rhs {
            Some(j) => r.truncate(p.rhs[j]),
            None => r.zero(),
        };
        for &(c, a) in &p.row {
            let xc = x[c];
            if !r.is_zero(xc) {
                s = r.sub(s, r.mul(a, xc));
            }
        }
        x[p.col] = r.truncate(s);
    }
}

/// Dense scratch row with a touched-index list.
struct Accumulator<E> {
    vals: Vec<E>,
    touched: Vec<usize>,
    mark: Vec<bool>,
    rhs: Vec<E>,
    zero: E,
}

impl<E: Copy + PartialEq> Accumulator<E> {
    fn new<R: Ring<E = E>>(r: &R, n: usize, nrhs: usize) -> Self {
        Accumulator {
            vals: vec![r.zero(); n],
            touched: Vec::new(),
            mark: vec![false; n],
            rhs: vec![r.zero(); nrhs],
            zero: r.zero(),
        }
    }

    fn touch(&mut self, c: usize) {
        if !self.mark[c] {
            self.mark[c] = true;
            self.touched.push(c);
        }
    }

    fn load<R: Ring<E = E>>(&mut self, r: &R, row: &[(usize, E)], rhs: &[E]) {
        for &(c, v) in row {
            self.vals[c] = r.truncate(v);
            self.touch(c);
        }
        for (j, &v) in rhs.iter().enumerate() {
            self.rhs[j] = r.truncate(v);
        }
    }

    fn reduce<R: Ring<E = E>>(&mut self, r: &R, pivots: &[Pivot<E>], pivot_of: &[Option<usize>]) {
        let mut heap = BinaryHeap::new();
        for &c in &self.touched {
            if let Some(k) = pivot_of[c] {
                heap.push(Reverse(k));
            }
        }
        while let Some(Reverse(k)) = heap.pop() {
            let p = &pivots[k];
            let f = self.vals[p.col];
            if r.is_zero(f) {
                continue;
            }
            self.vals[p.col] = self.zero;
            for &(c, a) in &p.row {
                let before = self.vals[c];
                self.vals[c] = r.sub(before, r.mul(f, a));
                if !self.mark[c] {
                    self.mark[c] = true;
                    self.touched.push(c);
                }
                if r.is_zero(before) {
                    if let Some(k2) = pivot_of[c] {
                        heap.push(Reverse(k2));
                    }
                }
            }
            for (j, &b) in p.rhs.iter().enumerate() {
                self.rhs[j] = r.sub(self.rhs[j], r.mul(f, b));
            }
        }
    }

    fn choose_unit<R: Ring<E = E>>(&self, r: &R, colcount: &[usize]) -> Option<usize> {
        self.touched
            .iter()
            .copied()
            .filter(|&c| r.is_unit(self.vals[c]))
            .min_by_key(|&c| (colcount[c], c))
    }

    fn make_pivot<R: Ring<E = E>>(&self, r: &R, col: usize) -> Pivot<E> {
        let inv = r.unit_inv(self.vals[col]).expect("unit pivot");
        let mut row: Vec<(usize, E)> = self
            .touched
            .iter()
            .copied()
            .filter(|&c| c != col && !r.is_zero(self.vals[c]))
            .map(|c| (c, r.mul(inv, self.vals[c])))
            .collect();
        row.sort_by_key(|e| e.0);
        let rhs = self.rhs.iter().map(|&b| r.mul(inv, b)).collect();
        Pivot { col, row, rhs }
    }

    fn is_zero_row(&self) -> bool {
        self.touched.iter().all(|&c| self.vals[c] == self.zero)
    }

    fn export(&self) -> (Vec<(usize, E)>, Vec<E>) {
        let mut row: Vec<(usize, E)> = self
            .touched
            .iter()
            .copied()
            .filter(|&c| self.vals[c] != self.zero)
            .map(|c| (c, self.vals[c]))
            .collect();
        row.sort_by_key(|e| e.0);
        (row, self.rhs.clone())
    }

    fn clear(&mut self) {
        for &c in &self.touched {
            self.vals[c] = self.zero;
            self.mark[c] = false;
        }
        self.touched.clear();
        for v in self.rhs.iter_mut() {
            *v = self.zero;
        }
    }
}
