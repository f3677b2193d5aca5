//! Hom modules between lattices, computed through a free frame of the source.
//!
//! Pick `w_1, …, w_s ∈ L` such that `L₀ = ⊕ A·w_i` is free of full rank and
//! let `k` be minimal with `ε^k L ⊆ L₀`. A homomorphism `f : L → L'` is
//! determined by the tuple `h = (f(w_i))_i`, and a tuple `h ∈ L'^s` extends
//! to `L` exactly when it satisfies a congruence modulo `ε^k`. With
//! `W = [w_i, Xw_i, Yw_i, XYw_i]` and `C = ε^k W^{-1}` the matrix of `f` is
//! `ε^{-k}·U_h·C`, where column `(i, m)` of `U_h` is `m·h_i`.
//!
//! For `k = 1` the congruence is a linear system over κ whose size does
//! not depend on the precision, which is what makes large Hom modules cheap.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dvr::dense::{self, Echelon};
use crate::dvr::matrix::{self as mx, Mat};
use crate::dvr::{snf, Dvr, DvrElem, Ring};
use crate::error::{Error, Result};
use crate::lattice::{lower_prec, Lattice};

/// A free full-rank `A`-submodule `⊕ A·w_i` of a lattice.
#[derive(Clone, Debug)]
pub struct Frame {
    /// `ε^k L ⊆ ⊕ A·w_i`.
    pub k: usize,
    /// Generators, in the lattice's coordinates.
    pub w: Vec<Vec<DvrElem>>,
    /// `ε^k W^{-1}`; row `4i + m` pairs with `m·w_i`, `m ∈ (1, X, Y, XY)`.
    pub c: Mat<DvrElem>,
    /// Extension conditions `(d, v)`: a tuple `h` extends exactly when
    /// `Σ v[(i,m)]·m·h_i ≡ 0 mod ε^d` for every pair (`v` a column of the
    /// right Smith transform of `W`, `d > 0` its elementary divisor).
    pub conds: Vec<(usize, Vec<DvrElem>)>,
}

const FRAME_TRIES: usize = 4;
/// Further attempts, with ε-digits in the coefficients, when the constant
/// combinations found no frame (small residue fields).
const FRAME_EXTRA_TRIES: usize = 60;

/// A frame with the smallest index found among a few random choices.
pub fn frame(l: &Lattice) -> Result<Frame> {
    let r = *l.ring();
    let n = l.rank();
    if n % 4 != 0 {
        return Err(Error::Unsupported(format!(
            "rank {n} lattice is not generically free"
        )));
    }
    let s = n / 4;
    if s == 0 {
        return Ok(Frame {
            k: 0,
            w: Vec::new(),
            c: Mat::filled(0, 0, r.zero()),
            conds: Vec::new(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x6672_616d ^ n as u64);
    let mut best: Option<Frame> = None;
    for attempt in 0..FRAME_TRIES + FRAME_EXTRA_TRIES {
        if attempt >= FRAME_TRIES && best.is_some() {
            break;
        }
        let digits = if attempt < FRAME_TRIES { 1 } else { 1 + attempt % 3 };
        let w: Vec<Vec<DvrElem>> = (0..s)
            .map(|_| {
                (0..n)
                    .map(|_| {
                        let c: Vec<i64> = (0..digits).map(|_| rng.gen_range(0..r.p()) as i64).collect();
                        r.elem(&c)
                    })
                    .collect()
            })
            .collect();
        let wmat = crate::kronecker::cover_matrix(&r, l.x(), l.y(), &w);
        let Ok(sn) = snf::snf(&r, &wmat) else { continue };
        if sn.rank < n {
            continue;
        }
        let k = sn.pivots.iter().copied().max().unwrap_or(0);
        if best.as_ref().is_some_and(|b| b.k <= k) {
            continue;
        }
        // W^{-1} = V D^{-1} U, so ε^k W^{-1} = V diag(ε^{k - d_i}) U.
        let mut du = sn.u.clone();
        for (i, &d) in sn.pivots.iter().enumerate() {
            for j in 0..n {
                du.set(i, j, r.shift_up(du.get(i, j), k - d));
            }
        }
        let c = mx::mul(&r, &sn.v, &du);
        let conds = sn
            .pivots
            .iter()
            .enumerate()
            .filter(|&(_, &d)| d > 0)
            .map(|(j, &d)| (d, sn.v.col(j)))
            .collect();
        best = Some(Frame { k, w, c, conds });
        if k <= 1 {
            break;
        }
    }
    best.ok_or_else(|| Error::Unsupported("lattice is not generically free".into()))
}

/// `Hom_A(L, L')` as a submodule of `L'^s`, with matrices on demand.
#[derive(Clone, Debug)]
pub struct HomSpace {
    ring: Dvr,
    frame: Frame,
    src_rank: usize,
    tgt_rank: usize,
    /// `(1, X', Y', X'Y')` of the target.
    ops: [Mat<DvrElem>; 4],
    /// Solution vectors; entry `i·r' + a` is coordinate `a` of `f(w_i)`.
    basis: Vec<Vec<DvrElem>>,
    /// Digits `0..=k` of the target actions and of `C`.
    op_digits: Vec<Vec<Mat<u32>>>,
    c_digits: Vec<Mat<u32>>,
}

impl HomSpace {
    pub fn new(l: &Lattice, l2: &Lattice) -> Result<Self> {
        if l.p() != l2.p() {
            return Err(Error::InvalidInput("lattices over different residue fields".into()));
        }
        let ring = if l.prec() <= l2.prec() { *l.ring() } else { *l2.ring() };
        let fr = frame(l)?;
        lower_prec(&ring, fr.k)?;
        let frame = Frame {
            k: fr.k,
            w: fr.w.iter().map(|v| v.iter().map(|&x| ring.truncate(x)).collect()).collect(),
            c: mx::truncate(&ring, &fr.c),
            conds: fr.conds.iter().map(|(d, v)| (*d, v.iter().map(|&x| ring.truncate(x)).collect())).collect(),
        };
        let x2 = mx::truncate(&ring, l2.x());
        let y2 = mx::truncate(&ring, l2.y());
        let xy2 = mx::mul(&ring, &x2, &y2);
        let r2 = l2.rank();
        let ops = [mx::identity(&ring, r2), x2, y2, xy2];
        let kk = frame.k + 1;
        let op_digits = ops.iter().map(|m| dense::digits(&ring, m).into_iter().take(kk).collect()).collect();
        let c_digits = dense::digits(&ring, &frame.c).into_iter().take(kk).collect();
        let mut hs = HomSpace {
            ring,
            frame,
            src_rank: l.rank(),
            tgt_rank: r2,
            ops,
            basis: Vec::new(),
            op_digits,
            c_digits,
        };
        hs.solve()?;
        Ok(hs)
    }

    fn s(&self) -> usize {
        self.frame.w.len()
    }

    /// Row `a` of condition `v` over the unknowns `(i, b)`:
    /// `Σ_m v[(i,m)]·M_m[a, b]`.
    fn condition_rows(&self, rr: &Dvr, v: &[DvrElem]) -> Vec<Vec<DvrElem>> {
        let (s, r2) = (self.s(), self.tgt_rank);
        let ops: Vec<Mat<DvrElem>> = self.ops.iter().map(|m| mx::truncate(rr, m)).collect();
        let mut rows = vec![vec![rr.zero(); s * r2]; r2];
        for i in 0..s {
            for (m, om) in ops.iter().enumerate() {
                let c = rr.truncate(v[4 * i + m]);
                if rr.is_zero(c) {
                    continue;
                }
                for (a, row) in rows.iter_mut().enumerate() {
                    for b in 0..r2 {
                        let x = om.get(a, b);
                        if !rr.is_zero(x) {
                            row[i * r2 + b] = rr.add(row[i * r2 + b], rr.mul(c, x));
                        }
                    }
                }
            }
        }
        rows
    }

    /// Lifts the solution module one ε-adic digit at a time: at stage `t`
    /// the current basis `B` satisfies every condition modulo `ε^{t−1}`,
    /// and the κ-null space of the next digit of `S·B` selects the
    /// combinations that survive modulo `ε^t`. Arithmetic in `F_p[ε]` has
    /// no carries, so that digit is `Σ_{d+e=t−1} S_e·B_d` over κ and the
    /// basis is kept digit-sliced.
    fn solve(&mut self) -> Result<()> {
        let r = self.ring;
        let p = r.p();
        let nunk = self.s() * self.tgt_rank;
        let k = self.frame.k;
        // Stage 1 over κ, starting from the standard basis.
        let r1 = r.with_prec(1);
        let mut ech = Echelon::new(p, nunk);
        'outer: for (_, v) in &self.frame.conds {
            for row in self.condition_rows(&r1, v) {
                ech.insert(row.iter().map(|x| x.coeff(0)).collect());
                if ech.dim() == nunk {
                    break 'outer;
                }
            }
        }
        // basis[b][d] is digit d of basis vector b.
        let (_, null) = ech.null_space();
        let mut basis: Vec<Vec<Vec<u32>>> = null.into_iter().map(|v| vec![v]).collect();
        for &pc in ech.pivots() {
            let mut v = vec![0u32; nunk];
            v[pc] = 1;
            basis.push(vec![vec![0u32; nunk], v]);
        }
        for t in 2..=k {
            let rt = r.with_prec(t);
            let rows: Vec<Vec<DvrElem>> = self
                .frame
                .conds
                .iter()
                .filter(|(d, _)| *d >= t)
                .flat_map(|(_, v)| self.condition_rows(&rt, v))
                .collect();
            if rows.is_empty() {
                break;
            }
            let m = basis.len();
            // Transposed (basis × rows) so the product skips the zeros of
            // the mostly sparse basis vectors.
            let mut digit_t = Mat::filled(m, rows.len(), 0u32);
            for e in 0..t {
                let d = t - 1 - e;
                if basis.iter().all(|b| b.len() <= d) {
                    continue;
                }
                let se_t = Mat::from_fn(nunk, rows.len(), |j, i| rows[i][j].coeff(e));
                let bd_t = Mat::from_fn(m, nunk, |j, i| basis[j].get(d).map_or(0, |v| v[i]));
                let prod = dense::mat_mul(p, &bd_t, &se_t);
                for (x, &y) in digit_t.data.iter_mut().zip(&prod.data) {
                    *x = (*x + y) % p;
                }
            }
            let digit = digit_t.transpose();
            let mut ech = Echelon::new(p, m);
            for i in 0..digit.rows {
                ech.insert(digit.row(i).to_vec());
                if ech.dim() == m {
                    break;
                }
            }
            if ech.dim() == 0 {
                continue;
            }
            let (free, null) = ech.null_space();
            let pivots = ech.pivots().to_vec();
            // Nonzero positions of each pivot vector, per digit.
            let support: Vec<Vec<Vec<usize>>> = pivots
                .iter()
                .map(|&pc| {
                    basis[pc]
                        .iter()
                        .map(|v| (0..nunk).filter(|&i| v[i] != 0).collect())
                        .collect()
                })
                .collect();
            let mut next = Vec::with_capacity(m);
            for (f, v) in free.iter().zip(&null) {
                let mut b = basis[*f].clone();
                for (q, &pc) in pivots.iter().enumerate() {
                    let c = v[pc];
                    if c == 0 {
                        continue;
                    }
                    for (d, sup) in support[q].iter().enumerate() {
                        if b.len() <= d {
                            b.resize(d + 1, vec![0u32; nunk]);
                        }
                        for &i in sup {
                            b[d][i] = (b[d][i] + c * basis[pc][d][i]) % p;
                        }
                    }
                }
                next.push(b);
            }
            for &pc in &pivots {
                let mut b = vec![vec![0u32; nunk]];
                b.extend(basis[pc].iter().cloned());
                next.push(b);
            }
            basis = next;
        }
        let prec = r.prec();
        self.basis = basis
            .into_iter()
            .map(|digits| {
                (0..nunk)
                    .map(|i| {
                        let mut c = [0i64; crate::dvr::MAX_PREC];
                        for (d, v) in digits.iter().enumerate().take(prec) {
                            c[d] = v[i] as i64;
                        }
                        r.elem(&c[..digits.len().min(prec)])
                    })
                    .collect()
            })
            .collect();
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ring(&self) -> &Dvr {
        &self.ring
    }

    pub fn k(&self) -> usize {
        self.frame.k
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    /// Precision at which the matrices of homomorphisms are exact.
    pub fn out_ring(&self) -> Dvr {
        self.ring.with_prec(self.ring.prec() - self.frame.k)
    }

    /// Solution vectors `h` (images of the frame generators).
    pub fn basis(&self) -> &[Vec<DvrElem>] {
        &self.basis
    }

    pub fn src_rank(&self) -> usize {
        self.src_rank
    }

    pub fn tgt_rank(&self) -> usize {
        self.tgt_rank
    }

    /// `Σ c_b·basis_b` for residue coefficients.
    pub fn combine(&self, coeffs: &[u32]) -> Vec<DvrElem> {
        let r = &self.ring;
        let mut h = vec![r.zero(); self.s() * self.tgt_rank];
        for (b, &c) in self.basis.iter().zip(coeffs) {
            if c == 0 {
                continue;
            }
            let cl = r.lift(c);
            for (x, &y) in h.iter_mut().zip(b) {
                if !r.is_zero(y) {
                    *x = r.add(*x, r.mul(cl, y));
                }
            }
        }
        h
    }

    /// A random element of the solution module.
    pub fn random(&self, rng: &mut impl Rng) -> Vec<DvrElem> {
        let coeffs: Vec<u32> = (0..self.dim()).map(|_| rng.gen_range(0..self.ring.p())).collect();
        self.combine(&coeffs)
    }

    /// `U_h` over the given ring.
    fn u_matrix(&self, rr: &Dvr, h: &[DvrElem]) -> Mat<DvrElem> {
        let (s, r2) = (self.s(), self.tgt_rank);
        let mut u = mx::zeros(rr, r2, 4 * s);
        for i in 0..s {
            let hi: Vec<DvrElem> = h[i * r2..(i + 1) * r2].iter().map(|&x| rr.truncate(x)).collect();
            for (m, om) in self.ops.iter().enumerate() {
                let col = if m == 0 { hi.clone() } else { mx::mul_vec(rr, &mx::truncate(rr, om), &hi) };
                for (a, v) in col.into_iter().enumerate() {
                    u.set(a, 4 * i + m, v);
                }
            }
        }
        u
    }

    /// Matrix of the homomorphism with frame images `h`, exact modulo
    /// `ε^{prec}` (`prec ≤ N − k`).
    pub fn matrix_at(&self, h: &[DvrElem], prec: usize) -> Mat<DvrElem> {
        let k = self.frame.k;
        let rr = self.ring.with_prec(prec + k);
        let u = self.u_matrix(&rr, h);
        let uc = mx::mul(&rr, &u, &mx::truncate(&rr, &self.frame.c));
        let out = self.ring.with_prec(prec);
        uc.map(|v| out.truncate(rr.shift_down(v, k)))
    }

    /// Matrix at the full output precision.
    pub fn matrix(&self, h: &[DvrElem]) -> Mat<DvrElem> {
        self.matrix_at(h, self.ring.prec() - self.frame.k)
    }

    /// Reduction modulo ε of the matrix: digit `k` of `U_h·C`, assembled
    /// from digit slices with the κ kernel.
    pub fn residue_matrix(&self, h: &[DvrElem]) -> Mat<u32> {
        let p = self.ring.p();
        let k = self.frame.k;
        let (s, r2) = (self.s(), self.tgt_rank);
        // hd[d]: r' × s matrix whose column i is digit d of h_i.
        let hd: Vec<Mat<u32>> = (0..=k)
            .map(|d| Mat::from_fn(r2, s, |a, i| h[i * r2 + a].coeff(d)))
            .collect();
        let mut out = Mat::filled(r2, self.src_rank, 0u32);
        for a in 0..=k {
            // Digit a of U_h, columns (i, m).
            let mut ua = Mat::filled(r2, 4 * s, 0u32);
            for m in 0..4 {
                for c in 0..=a {
                    let op = &self.op_digits[m][c];
                    if op.data.iter().all(|&x| x == 0) {
                        continue;
                    }
                    let prod = dense::mat_mul(p, op, &hd[a - c]);
                    for row in 0..r2 {
                        for i in 0..s {
                            let v = ua.get(row, 4 * i + m);
                            ua.set(row, 4 * i + m, (v + prod.get(row, i)) % p);
                        }
                    }
                }
            }
            let prod = dense::mat_mul(p, &ua, &self.c_digits[k - a]);
            for (x, &y) in out.data.iter_mut().zip(&prod.data) {
                *x = (*x + y) % p;
            }
        }
        out
    }

    /// Frame images of a homomorphism given by its matrix.
    pub fn images(&self, f: &Mat<DvrElem>) -> Vec<DvrElem> {
        let r = &self.ring;
        let mut h = Vec::with_capacity(self.s() * self.tgt_rank);
        for w in &self.frame.w {
            h.extend(mx::mul_vec(r, f, w));
        }
        h
    }
}

/// Reduction of a vector modulo ε.
pub fn residues(v: &[DvrElem]) -> Vec<u32> {
    v.iter().map(|x| x.coeff(0)).collect()
}
