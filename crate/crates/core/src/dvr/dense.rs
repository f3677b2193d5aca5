//! Dense linear algebra over `F_p` on plain `u32` rows with lazy modular
//! reduction: updates `x += c·y` accumulate unreduced and are folded back
//! only when they could overflow, so inner loops vectorize.

use super::matrix::Mat;

/// Number of `x += c·y` updates (with `c, y < p`) a reduced `u32` absorbs.
fn headroom(p: u32) -> usize {
    let q = (p as u64 - 1).max(1).pow(2);
    ((u32::MAX as u64 - p as u64) / q) as usize
}

#[inline(always)]
fn axpy_body(x: &mut [u32], c: u32, y: &[u32]) {
    for (a, &b) in x.iter_mut().zip(y) {
        *a = a.wrapping_add(c * b);
    }
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2")]
unsafe fn axpy_avx2(x: &mut [u32], c: u32, y: &[u32]) {
    axpy_body(x, c, y)
}

#[inline]
fn axpy(x: &mut [u32], c: u32, y: &[u32]) {
    #[cfg(target_arch = "x86_64")]
    {
        if std::is_x86_feature_detected!("avx2") {
            // SAFETY: the feature was detected at runtime.
            return unsafe { axpy_avx2(x, c, y) };
        }
    }
    axpy_body(x, c, y)
}

fn reduce_all(x: &mut [u32], p: u32) {
    for a in x.iter_mut() {
        *a %= p;
    }
}

/// Incremental row echelon form over `F_p`. Rows are stored reduced
/// against all earlier rows and normalized to 1 at their pivot.
#[derive(Clone, Debug)]
pub struct Echelon {
    p: u32,
    n: usize,
    rows: Vec<Vec<u32>>,
    pivots: Vec<usize>,
}

impl Echelon {
    pub fn new(p: u32, n: usize) -> Self {
        Echelon {
            p,
            n,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.n
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    /// Reduces `v` (entries `< p`) against the stored rows in place.
    pub fn reduce(&self, v: &mut [u32]) {
        let p = self.p;
        let limit = headroom(p);
        let mut pending = 0;
        for (row, &pc) in self.rows.iter().zip(&self.pivots) {
            let c = v[pc] % p;
            if c == 0 {
                continue;
            }
            axpy(v, p - c, row);
            pending += 1;
            if pending == limit {
                reduce_all(v, p);
                pending = 0;
            }
        }
        reduce_all(v, p);
    }

    pub fn contains(&self, v: &[u32]) -> bool {
        let mut w = v.to_vec();
        self.reduce(&mut w);
        w.iter().all(|&x| x == 0)
    }

    /// Inserts `v`; returns its new pivot column if the span grew.
    pub fn insert(&mut self, mut v: Vec<u32>) -> Option<usize> {
        debug_assert_eq!(v.len(), self.n);
        self.reduce(&mut v);
        let pc = v.iter().position(|&x| x != 0)?;
        let inv = inv_mod(v[pc], self.p);
        for x in v.iter_mut() {
            *x = *x * inv % self.p;
        }
        self.rows.push(v);
        self.pivots.push(pc);
        Some(pc)
    }

    /// Fully reduced rows: each row is zero at every other pivot column.
    pub fn rref(&self) -> Vec<Vec<u32>> {
        let p = self.p;
        let mut rows = self.rows.clone();
        for k in (0..rows.len()).rev() {
            let pc = self.pivots[k];
            let (head, tail) = rows.split_at_mut(k);
            let pivot_row = &tail[0];
            for row in head.iter_mut() {
                let c = row[pc];
                if c != 0 {
                    axpy(row, p - c, pivot_row);
                    reduce_all(row, p);
                }
            }
        }
        rows
    }

    /// Basis of the null space `{x : row·x = 0 for all rows}`: one vector
    /// per free column `f`, equal to 1 at `f` and 0 at the other free columns.
    pub fn null_space(&self) -> (Vec<usize>, Vec<Vec<u32>>) {
        let p = self.p;
        let rref = self.rref();
        let mut is_pivot = vec![false; self.n];
        for &pc in &self.pivots {
            is_pivot[pc] = true;
        }
        let free: Vec<usize> = (0..self.n).filter(|&j| !is_pivot[j]).collect();
        let vecs = free
            .iter()
            .map(|&f| {
                let mut v = vec![0u32; self.n];
                v[f] = 1;
                for (row, &pc) in rref.iter().zip(&self.pivots) {
                    v[pc] = (p - row[f]) % p;
                }
                v
            })
            .collect();
        (free, vecs)
    }
}

/// Inverse of a nonzero residue.
pub fn inv_mod(a: u32, p: u32) -> u32 {
    let (mut t, mut nt, mut r, mut nr) = (0i64, 1i64, p as i64, (a % p) as i64);
    while nr != 0 {
        let q = r / nr;
        (t, nt) = (nt, t - q * nt);
        (r, nr) = (nr, r - q * nr);
    }
    debug_assert_eq!(r, 1, "not invertible");
    t.rem_euclid(p as i64) as u32
}

/// `a · b` over `F_p`.
pub fn mat_mul(p: u32, a: &Mat<u32>, b: &Mat<u32>) -> Mat<u32> {
    assert_eq!(a.cols, b.rows);
    let limit = headroom(p);
    let mut out = Mat::filled(a.rows, b.cols, 0u32);
    for i in 0..a.rows {
        let acc = &mut out.data[i * b.cols..(i + 1) * b.cols];
        let mut pending = 0;
        for l in 0..a.cols {
            let c = a.data[i * a.cols + l];
            if c == 0 {
                continue;
            }
            axpy(acc, c, &b.data[l * b.cols..(l + 1) * b.cols]);
            pending += 1;
            if pending == limit {
                reduce_all(acc, p);
                pending = 0;
            }
        }
        reduce_all(acc, p);
    }
    out
}

/// `a · v` over `F_p`.
pub fn mat_vec(p: u32, a: &Mat<u32>, v: &[u32]) -> Vec<u32> {
    (0..a.rows)
        .map(|i| {
            let s: u64 = a.row(i).iter().zip(v).map(|(&x, &y)| (x * y) as u64).sum();
            (s % p as u64) as u32
        })
        .collect()
}

/// `a + c·b` over `F_p`, in place.
pub fn add_scaled(p: u32, a: &mut Mat<u32>, c: u32, b: &Mat<u32>) {
    if c == 0 {
        return;
    }
    for (x, &y) in a.data.iter_mut().zip(&b.data) {
        *x = (*x + c * y) % p;
    }
}

/// Rank over `F_p`.
pub fn rank(p: u32, a: &Mat<u32>) -> usize {
    let mut e = Echelon::new(p, a.cols);
    for i in 0..a.rows {
        e.insert(a.row(i).to_vec());
    }
    e.dim()
}

/// Digit slices `a_0, a_1, …` of a matrix over `O_N` (`a = Σ ε^i a_i`).
pub fn digits(r: &super::Dvr, a: &Mat<super::DvrElem>) -> Vec<Mat<u32>> {
    use super::Ring;
    (0..r.prec()).map(|i| a.map(|x| x.coeff(i))).collect()
}

/// Product over `O_N` computed digit by digit with the κ kernel; faster
/// than entrywise arithmetic for dense matrices.
pub fn dvr_mat_mul(r: &super::Dvr, a: &Mat<super::DvrElem>, b: &Mat<super::DvrElem>) -> Mat<super::DvrElem> {
    use super::Ring;
    assert_eq!(a.cols, b.rows);
    let p = r.p();
    let n = r.prec();
    let da = digits(r, a);
    let db = digits(r, b);
    let nz = |m: &Mat<u32>| m.data.iter().any(|&x| x != 0);
    let za: Vec<bool> = da.iter().map(nz).collect();
    let zb: Vec<bool> = db.iter().map(nz).collect();
    let mut out: Vec<Mat<u32>> = Vec::with_capacity(n);
    for t in 0..n {
        let mut acc = Mat::filled(a.rows, b.cols, 0u32);
        for i in 0..=t {
            if !za[i] || !zb[t - i] {
                continue;
            }
            let prod = mat_mul(p, &da[i], &db[t - i]);
            for (x, &y) in acc.data.iter_mut().zip(&prod.data) {
                *x += y;
                if *x >= p {
                    *x -= p;
                }
            }
        }
        out.push(acc);
    }
    Mat::from_fn(a.rows, b.cols, |i, j| {
        let mut c = [0i64; super::MAX_PREC];
        for (t, m) in out.iter().enumerate() {
            c[t] = m.get(i, j) as i64;
        }
        r.elem(&c[..n])
    })
}

/// Generators of `{c : G·c ≡ 0 (mod ε^t)}` for `G = Σ ε^e g[e]` (`R × n`),
/// digit-sliced: entry `d` of a generator is its ε-digit `d`.
///
/// Digit `s` of `G·B` is `Σ_e g[e]·B_{s−e}` (no carries in `F_p[ε]`); its
/// κ-null space selects the combinations of the current generators that
/// survive one more digit, and the remaining generators are multiplied by ε.
pub fn lift_null(p: u32, g: &[Mat<u32>], n: usize, t: usize) -> Vec<Vec<Vec<u32>>> {
    let gt: Vec<Mat<u32>> = g.iter().map(|m| m.transpose()).collect();
    let rows = g.first().map_or(0, |m| m.rows);
    let mut basis: Vec<Vec<Vec<u32>>> = (0..n)
        .map(|i| {
            let mut v = vec![0u32; n];
            v[i] = 1;
            vec![v]
        })
        .collect();
    for s in 0..t {
        let m = basis.len();
        let mut dt = Mat::filled(m, rows, 0u32);
        for (e, ge) in gt.iter().enumerate().take(s + 1) {
            let d = s - e;
            if basis.iter().all(|b| b.len() <= d || b[d].iter().all(|&x| x == 0)) {
                continue;
            }
            let bd = Mat::from_fn(m, n, |j, i| basis[j].get(d).map_or(0, |v| v[i]));
            let prod = mat_mul(p, &bd, ge);
            for (x, &y) in dt.data.iter_mut().zip(&prod.data) {
                *x = (*x + y) % p;
            }
        }
        let mut ech = Echelon::new(p, m);
        for i in 0..rows {
            let row = dt.col(i);
            if row.iter().all(|&x| x == 0) {
                continue;
            }
            ech.insert(row);
            if ech.dim() == m {
                break;
            }
        }
        if ech.dim() == 0 {
            continue;
        }
        let (free, null) = ech.null_space();
        let pivots = ech.pivots().to_vec();
        let mut next = Vec::with_capacity(m);
        for (f, v) in free.iter().zip(&null) {
            let mut b = basis[*f].clone();
            for &pc in &pivots {
                let c = v[pc];
                if c == 0 {
                    continue;
                }
                for (d, src) in basis[pc].iter().enumerate() {
                    if b.len() <= d {
                        b.resize(d + 1, vec![0u32; n]);
                    }
                    for (x, &y) in b[d].iter_mut().zip(src) {
                        if y != 0 {
                            *x = (*x + c * y) % p;
                        }
                    }
                }
            }
            next.push(b);
        }
        for &pc in &pivots {
            let mut b = vec![vec![0u32; n]];
            b.extend(basis[pc].iter().cloned());
            b.truncate(t);
            next.push(b);
        }
        basis = next;
    }
    basis
}

/// A solution of `G·c ≡ v (mod ε^t)` over `O`, or `None` if there is none.
/// `G` and `v` are given at precision at least `t`; the result is at `t`.
pub fn lift_solve(
    r: &super::Dvr,
    g: &Mat<super::DvrElem>,
    v: &[super::DvrElem],
    t: usize,
) -> Option<Vec<super::DvrElem>> {
    use super::Ring;
    let p = r.p();
    let n = g.cols;
    let rt = r.with_prec(t);
    // Homogenize: [G | −v]·(c, γ) = 0 with γ a unit.
    let digits: Vec<Mat<u32>> = (0..t)
        .map(|d| {
            Mat::from_fn(g.rows, n + 1, |i, j| {
                if j < n {
                    g.get(i, j).coeff(d)
                } else {
                    (p - v[i].coeff(d)) % p
                }
            })
        })
        .collect();
    let basis = lift_null(p, &digits, n + 1, t);
    let sol = basis.iter().find(|b| b[0][n] != 0)?;
    let elem = |j: usize| -> super::DvrElem {
        let c: Vec<i64> = sol.iter().map(|d| d[j] as i64).collect();
        rt.elem(&c)
    };
    let ginv = rt.unit_inv(elem(n)).ok()?;
    Some((0..n).map(|j| rt.mul(elem(j), ginv)).collect())
}

/// Howell form of the submodule of `(O/ε^t)^n` spanned by given vectors:
/// pivot vectors vanish above their pivot row, carry `ε^v` there, and the
/// span is closed under `ε^{t−v}`-saturation, so membership is decided by
/// one reduction pass.
#[derive(Clone, Debug)]
pub struct ChainSpan {
    ring: super::Dvr,
    n: usize,
    /// `(row, valuation, vector)` in increasing row order.
    pivots: Vec<(usize, usize, Vec<super::DvrElem>)>,
}

impl ChainSpan {
    pub fn new(r: &super::Dvr, t: usize, n: usize, gens: impl IntoIterator<Item = Vec<super::DvrElem>>) -> Self {
        use super::Ring;
        let ring = r.with_prec(t);
        let mut pending: Vec<Vec<super::DvrElem>> = gens
            .into_iter()
            .map(|v| v.into_iter().map(|x| ring.truncate(x)).collect::<Vec<_>>())
            .filter(|v| v.iter().any(|x| !ring.is_zero(*x)))
            .collect();
        let mut pivots = Vec::new();
        for i in 0..n {
            let best = pending
                .iter()
                .enumerate()
                .filter_map(|(k, v)| ring.val(v[i]).map(|val| (val, k)))
                .min();
            let Some((v, k)) = best else { continue };
            let mut w = pending.swap_remove(k);
            let u = ring.unit_inv(ring.shift_down(w[i], v)).expect("unit after shift");
            for x in w.iter_mut() {
                *x = ring.mul(*x, u);
            }
            for other in pending.iter_mut() {
                if ring.is_zero(other[i]) {
                    continue;
                }
                let q = ring.neg(ring.shift_down(other[i], v));
                for (o, &wx) in other.iter_mut().zip(&w) {
                    if !ring.is_zero(wx) {
                        *o = ring.add(*o, ring.mul(q, wx));
                    }
                }
            }
            if v > 0 {
                let sat: Vec<super::DvrElem> = w.iter().map(|&x| ring.mul(ring.eps_pow(t - v), x)).collect();
                pending.push(sat);
            }
            pending.retain(|v| v.iter().any(|x| !ring.is_zero(*x)));
            pivots.push((i, v, w));
        }
        ChainSpan { ring, n, pivots }
    }

    pub fn contains(&self, v: &[super::DvrElem]) -> bool {
        use super::Ring;
        let r = &self.ring;
        let mut x: Vec<super::DvrElem> = v.iter().map(|&a| r.truncate(a)).collect();
        let mut next = 0;
        for i in 0..self.n {
            if r.is_zero(x[i]) {
                if self.pivots.get(next).is_some_and(|p| p.0 == i) {
                    next += 1;
                }
                continue;
            }
            let Some((row, val, w)) = self.pivots.get(next) else { return false };
            if *row != i || r.val(x[i]).unwrap() < *val {
                return false;
            }
            let q = r.neg(r.shift_down(x[i], *val));
            for (o, &wx) in x.iter_mut().zip(w) {
                if !r.is_zero(wx) {
                    *o = r.add(*o, r.mul(q, wx));
                }
            }
            next += 1;
        }
        true
    }
}
