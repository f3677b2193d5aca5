//! Lattices over `A = O[X,Y]/(X², Y²)`: free `O_N`-modules with commuting
//! square-zero actions of `X` and `Y`.
//!
//! Every lattice remembers the precision at which its action matrices are
//! exact. Operations that divide by ε (saturation, Hom solving) lower it;
//! dropping below the ring's budget raises [`Error::PrecisionExhausted`].

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::abar::{self, AbarModule, Lambda};
use crate::dvr::algebra::{self, Locality, Subspace};
use crate::dvr::matrix::{self as mx, Mat};
use crate::dvr::{dense, poly, snf, Dvr, DvrElem, Fp, Ring};
use crate::error::{Error, Result};
use crate::hom::HomSpace;
use crate::kronecker;

/// Provenance of a lattice's stored basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum BasisTag {
    /// Standard basis `e_i, Xe_i, Ye_i, XYe_i` of `A^n`.
    Regular { n: usize },
    /// The a-basis (finite λ) or b-basis (λ = ∞) of the periodic Heller
    /// lattice `Z_n^λ`.
    Heller { lambda: Lambda, n: usize },
    /// Anything else (computed kernels, summands, …).
    Computed { note: String },
}

impl fmt::Display for BasisTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisTag::Regular { n } => write!(f, "A^{n}"),
            BasisTag::Heller { lambda, n } => write!(f, "Z(λ={lambda},n={n})"),
            BasisTag::Computed { note } => write!(f, "{note}"),
        }
    }
}

/// An `A`-lattice of rank `r` given by its action matrices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lattice {
    ring: Dvr,
    x: Mat<DvrElem>,
    y: Mat<DvrElem>,
    tag: Option<BasisTag>,
}

impl Lattice {
    /// Validates `X² = Y² = 0`, `XY = YX` exactly at the ring's precision.
    pub fn new(ring: Dvr, x: Mat<DvrElem>, y: Mat<DvrElem>, tag: Option<BasisTag>) -> Result<Self> {
        let r = x.rows;
        for m in [&x, &y] {
            if m.rows != r || m.cols != r {
                return Err(Error::InvalidInput(format!("action matrix is not {r}×{r}")));
            }
        }
        let x = mx::truncate(&ring, &x);
        let y = mx::truncate(&ring, &y);
        let l = Lattice { ring, x, y, tag };
        l.check_relations()?;
        Ok(l)
    }

    fn check_relations(&self) -> Result<()> {
        let r = &self.ring;
        if !mx::is_zero(r, &mx::mul(r, &self.x, &self.x)) || !mx::is_zero(r, &mx::mul(r, &self.y, &self.y)) {
            return Err(Error::InvalidInput("actions must square to zero".into()));
        }
        if mx::mul(r, &self.x, &self.y) != mx::mul(r, &self.y, &self.x) {
            return Err(Error::InvalidInput("actions must commute".into()));
        }
        Ok(())
    }

    /// Unchecked constructor for actions known to satisfy the relations.
    fn from_parts(ring: Dvr, x: Mat<DvrElem>, y: Mat<DvrElem>, tag: Option<BasisTag>) -> Self {
        let l = Lattice {
            x: mx::truncate(&ring, &x),
            y: mx::truncate(&ring, &y),
            ring,
            tag,
        };
        debug_assert!(l.check_relations().is_ok());
        l
    }

    pub fn zero(ring: Dvr) -> Self {
        Lattice {
            ring,
            x: Mat::filled(0, 0, DvrElem::ZERO),
            y: Mat::filled(0, 0, DvrElem::ZERO),
            tag: None,
        }
    }

    pub fn rank(&self) -> usize {
        self.x.rows
    }

    pub fn ring(&self) -> &Dvr {
        &self.ring
    }

    pub fn p(&self) -> u32 {
        self.ring.p()
    }

    pub fn prec(&self) -> usize {
        self.ring.prec()
    }

    pub fn field(&self) -> Fp {
        self.ring.field()
    }

    pub fn x(&self) -> &Mat<DvrElem> {
        &self.x
    }

    pub fn y(&self) -> &Mat<DvrElem> {
        &self.y
    }

    pub fn tag(&self) -> Option<&BasisTag> {
        self.tag.as_ref()
    }

    pub fn with_tag(mut self, tag: Option<BasisTag>) -> Self {
        self.tag = tag;
        self
    }

    /// The same lattice viewed at a lower precision.
    pub fn at_prec(&self, prec: usize) -> Result<Self> {
        let ring = lower_prec(&self.ring, self.prec().saturating_sub(prec))?;
        Ok(Lattice::from_parts(ring, self.x.clone(), self.y.clone(), self.tag.clone()))
    }

    /// Conjugates the actions by an invertible change of basis `t`
    /// (columns = new basis vectors in old coordinates).
    pub fn change_basis(&self, t: &Mat<DvrElem>) -> Result<Self> {
        let r = &self.ring;
        let ti = mx::inverse_dvr(r, t)?;
        let c = |m: &Mat<DvrElem>| mx::mul(r, &ti, &mx::mul(r, m, t));
        Ok(Lattice::from_parts(*r, c(&self.x), c(&self.y), None))
    }

    /// Restriction to a direct summand with basis `basis` and coordinate
    /// map `coords` (a left inverse whose kernel is invariant).
    pub fn restrict(&self, coords: &Mat<DvrElem>, basis: &Mat<DvrElem>) -> Self {
        let r = &self.ring;
        Lattice::from_parts(
            *r,
            kronecker::restrict(r, coords, &self.x, basis),
            kronecker::restrict(r, coords, &self.y, basis),
            None,
        )
    }

    /// `M ⊗ κ`.
    pub fn reduce(&self) -> AbarModule {
        AbarModule {
            p: self.p(),
            d: self.rank(),
            m1: mx::residue(&self.ring, &self.x),
            m2: mx::residue(&self.ring, &self.y),
            label: None,
        }
    }
}

/// Lowers a ring's precision by `loss`, refusing to go below the budget.
pub fn lower_prec(r: &Dvr, loss: usize) -> Result<Dvr> {
    if loss == 0 {
        return Ok(*r);
    }
    if r.prec() < r.budget() + loss {
        return Err(Error::PrecisionExhausted {
            valuation: loss,
            budget: r.prec().saturating_sub(r.budget()),
        });
    }
    Ok(r.with_prec(r.prec() - loss))
}

/// The common precision of two lattices over the same residue field.
fn common_ring(a: &Lattice, b: &Lattice) -> Result<Dvr> {
    if a.p() != b.p() {
        return Err(Error::InvalidInput("lattices over different residue fields".into()));
    }
    Ok(if a.prec() <= b.prec() { a.ring } else { b.ring })
}

/// Direct sum with block-diagonal actions, at the lowest precision involved.
pub fn direct_sum(ring: &Dvr, parts: &[&Lattice]) -> Lattice {
    let ring = parts
        .iter()
        .map(|l| l.ring)
        .min_by_key(|r| r.prec())
        .unwrap_or(*ring);
    let xs: Vec<&Mat<DvrElem>> = parts.iter().map(|l| &l.x).collect();
    let ys: Vec<&Mat<DvrElem>> = parts.iter().map(|l| &l.y).collect();
    Lattice::from_parts(ring, mx::block_diag(&ring, &xs), mx::block_diag(&ring, &ys), None)
}

/// A homomorphism of lattices; `matrix` is `rank(target) × rank(source)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeMap {
    pub source: Arc<Lattice>,
    pub target: Arc<Lattice>,
    pub matrix: Mat<DvrElem>,
}

impl LatticeMap {
    /// Validates that `matrix` intertwines the actions.
    pub fn new(source: Arc<Lattice>, target: Arc<Lattice>, matrix: Mat<DvrElem>) -> Result<Self> {
        let m = LatticeMap { source, target, matrix };
        if !m.is_homomorphism()? {
            return Err(Error::InvalidInput("matrix does not intertwine the actions".into()));
        }
        Ok(m)
    }

    pub fn ring(&self) -> Result<Dvr> {
        common_ring(&self.source, &self.target)
    }

    pub fn is_homomorphism(&self) -> Result<bool> {
        let r = self.ring()?;
        let (s, t, f) = (&self.source, &self.target, &self.matrix);
        if f.rows != t.rank() || f.cols != s.rank() {
            return Ok(false);
        }
        let ok = |a: &Mat<DvrElem>, b: &Mat<DvrElem>| {
            mx::truncate(&r, &mx::mul(&r, f, a)) == mx::truncate(&r, &mx::mul(&r, b, f))
        };
        Ok(ok(&s.x, &t.x) && ok(&s.y, &t.y))
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &LatticeMap) -> Result<LatticeMap> {
        let r = common_ring(&self.source, &other.source)?;
        let r = if r.prec() <= self.target.prec() { r } else { self.target.ring };
        Ok(LatticeMap {
            source: other.source.clone(),
            target: self.target.clone(),
            matrix: mx::truncate(&r, &mx::mul(&r, &self.matrix, &other.matrix)),
        })
    }
}

/// The free lattice `A^n` with basis `e_i, Xe_i, Ye_i, XYe_i`.
pub fn regular(ring: &Dvr, n: usize) -> Lattice {
    let (x, y) = kronecker::regular(ring, n);
    Lattice::from_parts(*ring, x, y, Some(BasisTag::Regular { n }))
}

/// The periodic Heller lattice `Z_n^λ` in its a-basis (finite λ) or
/// b-basis (λ = ∞); basis vector `(i, j)` sits at index `4(i−1) + (j−1)`.
pub fn heller_periodic(ring: &Dvr, lambda: Lambda, n: usize) -> Result<Lattice> {
    if n == 0 {
        return Err(Error::InvalidInput("Heller lattices need n >= 1".into()));
    }
    let r = ring;
    let idx = |i: usize, j: usize| 4 * (i - 1) + (j - 1);
    let mut x = mx::zeros(r, 4 * n, 4 * n);
    let mut y = mx::zeros(r, 4 * n, 4 * n);
    let eps = r.eps();
    // Adds `c · target` to the image of `src`.
    let put = |m: &mut Mat<DvrElem>, src: usize, target: usize, c: DvrElem| {
        let v = r.add(m.get(target, src), c);
        m.set(target, src, v);
    };
    match lambda {
        Lambda::Finite(l) => {
            if l >= r.p() {
                return Err(Error::InvalidInput(format!("lambda {l} not reduced mod {}", r.p())));
            }
            let lam = r.from_i64(l as i64);
            for i in 1..=n {
                put(&mut x, idx(i, 1), idx(i, 2), r.one());
                put(&mut x, idx(i, 3), idx(i, 4), r.one());
                put(&mut y, idx(i, 1), idx(i, 3), eps);
                put(&mut y, idx(i, 1), idx(i, 2), lam);
                put(&mut y, idx(i, 2), idx(i, 4), eps);
                put(&mut y, idx(i, 3), idx(i, 4), r.neg(lam));
                if i > 1 {
                    put(&mut y, idx(i, 1), idx(i - 1, 2), r.one());
                    put(&mut y, idx(i, 3), idx(i - 1, 4), r.from_i64(-1));
                }
            }
        }
        Lambda::Infinity if n == 1 => {
            put(&mut x, idx(1, 1), idx(1, 2), eps);
            put(&mut x, idx(1, 3), idx(1, 4), eps);
            put(&mut y, idx(1, 1), idx(1, 3), r.one());
            put(&mut y, idx(1, 2), idx(1, 4), r.one());
        }
        Lambda::Infinity => {
            for i in 1..=n {
                // X
                if i == 1 {
                    put(&mut x, idx(1, 1), idx(1, 2), eps);
                } else {
                    put(&mut x, idx(i, 1), idx(i, 2), r.one());
                }
                if i == n {
                    put(&mut x, idx(n, 3), idx(n, 4), eps);
                } else {
                    put(&mut x, idx(i, 3), idx(i, 4), r.one());
                }
                // Y
                if i == n {
                    put(&mut y, idx(n, 1), idx(n, 3), r.one());
                } else {
                    put(&mut y, idx(i, 1), idx(i, 3), eps);
                    put(&mut y, idx(i, 1), idx(i + 1, 2), r.one());
                    put(&mut y, idx(i, 3), idx(i + 1, 4), r.from_i64(-1));
                }
                if i == 1 {
                    put(&mut y, idx(1, 2), idx(1, 4), r.one());
                } else {
                    put(&mut y, idx(i, 2), idx(i, 4), eps);
                }
            }
        }
    }
    Lattice::new(*ring, x, y, Some(BasisTag::Heller { lambda, n }))
}

/// `L ⊗ κ`.
pub fn reduce_mod_eps(l: &Lattice) -> AbarModule {
    l.reduce()
}

/// Indices of the stored basis vectors chosen greedily as top generators.
pub fn top_generators(l: &Lattice) -> Vec<usize> {
    let m = l.reduce();
    abar::top_generators(&m.field(), &m.m1, &m.m2)
}

/// Minimal projective cover `A^t → L`, sending the `k`-th free generator to
/// the `k`-th greedy top generator.
pub fn projective_cover(l: &Lattice) -> LatticeMap {
    let r = l.ring;
    let gens: Vec<Vec<DvrElem>> = top_generators(l)
        .into_iter()
        .map(|j| (0..l.rank()).map(|i| if i == j { r.one() } else { r.zero() }).collect())
        .collect();
    let matrix = kronecker::cover_matrix(&r, &l.x, &l.y, &gens);
    LatticeMap {
        source: Arc::new(regular(&r, gens.len())),
        target: Arc::new(l.clone()),
        matrix,
    }
}

/// Splits off all free summands; returns the rest and the number removed.
pub fn strip_projective(l: &Lattice) -> Result<(Lattice, usize)> {
    let r = l.ring;
    let (x, y, _, k) = kronecker::strip_free(&r, &l.x, &l.y)?;
    if k == 0 {
        return Ok((l.clone(), 0));
    }
    Ok((Lattice::from_parts(r, x, y, None), k))
}

/// Kernel of a surjective lattice map, as a lattice with its inclusion.
pub fn kernel_lattice(map: &LatticeMap) -> Result<(Lattice, Mat<DvrElem>)> {
    let r = map.ring()?;
    let k = snf::kernel(&r, &map.matrix)?;
    let ring = lower_prec(&r, k.prec_loss)?;
    let s = &map.source;
    let l = Lattice::from_parts(
        ring,
        kronecker::restrict(&r, &k.coords, &s.x, &k.basis),
        kronecker::restrict(&r, &k.coords, &s.y, &k.basis),
        Some(BasisTag::Computed { note: "kernel".into() }),
    );
    Ok((l, mx::truncate(&ring, &k.basis)))
}

/// `Ω(L)`: the kernel of the projective cover, after removing free
/// summands of `L`. For the symmetric order `A` this is the AR translate.
pub fn syzygy(l: &Lattice) -> Result<Lattice> {
    let (core, _) = strip_projective(l)?;
    if core.rank() == 0 {
        return Ok(Lattice::zero(l.ring));
    }
    let cover = projective_cover(&core);
    let (k, _) = kernel_lattice(&cover)?;
    Ok(k.with_tag(Some(BasisTag::Computed { note: "syzygy".into() })))
}

/// `τ(L) ≅ Ω(L)`.
pub fn tau(l: &Lattice) -> Result<Lattice> {
    syzygy(l)
}

/// The kernel of the `A`-projective cover of an `Ā`-module (viewed as an
/// `A`-module killed by ε), split into indecomposable summands.
pub fn heller_from_module(m: &AbarModule, ring: &Dvr, seed: u64) -> Result<Vec<Lattice>> {
    m.validate()?;
    if m.p != ring.p() {
        return Err(Error::InvalidInput("module and ring have different residue fields".into()));
    }
    if m.d == 0 {
        return Ok(Vec::new());
    }
    let f = m.field();
    if kronecker::split_free_summand(&f, &m.m1, &m.m2)?.is_some() {
        return Err(Error::InvalidInput("module has a projective summand".into()));
    }
    let gens: Vec<Vec<u32>> = abar::top_generators(&f, &m.m1, &m.m2)
        .into_iter()
        .map(|j| (0..m.d).map(|i| u32::from(i == j)).collect())
        .collect();
    let t = gens.len();
    let cover = kronecker::cover_matrix(&f, &m.m1, &m.m2, &gens);
    // Basis of ker: lifts of a κ-basis of ker(π̄), then ε times lifts of a
    // complement.
    let kbar = snf::kernel_basis(&f, &cover)?;
    let mut sub = Subspace::new(4 * t);
    let mut cols: Vec<Vec<u32>> = Vec::new();
    for j in 0..kbar.cols {
        sub.insert(&f, &kbar.col(j));
        cols.push(kbar.col(j));
    }
    let nk = cols.len();
    for i in 0..4 * t {
        let e: Vec<u32> = (0..4 * t).map(|k| u32::from(k == i)).collect();
        if sub.insert(&f, &e) {
            cols.push(e);
        }
    }
    let tmat = mx::lift(ring, &Mat::from_cols(4 * t, &cols, 0));
    let tinv = mx::inverse_dvr(ring, &tmat)?;
    let (rx, ry) = kronecker::regular(ring, t);
    // Conjugate by diag(1, …, 1, ε, …, ε): entries from a scaled column to an
    // unscaled row gain ε, the reverse direction is divided by ε.
    let out_ring = lower_prec(ring, 1)?;
    let rescale = |a: &Mat<DvrElem>| -> Result<Mat<DvrElem>> {
        let c = mx::mul(ring, &tinv, &mx::mul(ring, a, &tmat));
        let mut out = c.clone();
        for i in 0..c.rows {
            for j in 0..c.cols {
                let v = c.get(i, j);
                let v = match (i >= nk, j >= nk) {
                    (false, true) => ring.shift_up(v, 1),
                    (true, false) => {
                        if ring.val(v).is_some_and(|k| k == 0) {
                            return Err(Error::Verification("kernel is not A-stable".into()));
                        }
                        ring.shift_down(v, 1)
                    }
                    _ => v,
                };
                out.set(i, j, v);
            }
        }
        Ok(out)
    };
    let z = Lattice::new(out_ring, rescale(&rx)?, rescale(&ry)?, None)?;
    decompose_lattice(&z, seed)
}

/// `Hom_A(L, L')` over the common precision.
pub fn hom(l: &Lattice, l2: &Lattice) -> Result<HomSpace> {
    HomSpace::new(l, l2)
}

/// `O`-spanning set of `End_A(L)` as maps, exact at the output precision of
/// the Hom solver.
pub fn end_lattice(l: &Lattice) -> Result<Vec<LatticeMap>> {
    let hs = hom(l, l)?;
    let src = Arc::new(l.at_prec(hs.out_ring().prec())?);
    Ok(hs
        .basis()
        .iter()
        .map(|h| LatticeMap {
            source: src.clone(),
            target: src.clone(),
            matrix: hs.matrix(h),
        })
        .collect())
}

/// Residue data of `End_A(L)`: reductions of the spanning set and their
/// images in `Π M_{m_c}(κ)` under the isotypic components of `L ⊗ κ`.
///
/// The composite `End(L) → End(L⊗κ) → Π M_{m_c}(κ)` is an algebra map whose
/// kernel is a nil ideal modulo ε, so `End(L)` is local iff the image is.
#[derive(Clone, Debug)]
pub struct EndData {
    pub hom: HomSpace,
    pub residues: Vec<Mat<u32>>,
    pub comps: Vec<abar::Isotypic>,
    pub images: Vec<Mat<u32>>,
}

impl EndData {
    pub fn new(l: &Lattice) -> Result<Self> {
        let hom = hom(l, l)?;
        let comps = abar::isotypic_components(&l.reduce())?;
        let f = l.field();
        let residues: Vec<Mat<u32>> = hom.basis().iter().map(|h| hom.residue_matrix(h)).collect();
        let mut ed = EndData {
            hom,
            residues,
            comps,
            images: Vec::new(),
        };
        ed.images = ed.residues.iter().map(|m| ed.image(&f, m)).collect::<Result<_>>()?;
        Ok(ed)
    }

    /// Total multiplicity `Σ m_c`.
    pub fn size(&self) -> usize {
        self.comps.iter().map(|c| c.mult).sum()
    }

    /// Block-diagonal image of an endomorphism of `L ⊗ κ`.
    pub fn image(&self, f: &Fp, endo: &Mat<u32>) -> Result<Mat<u32>> {
        let n = self.size();
        let mut out = Mat::filled(n, n, 0u32);
        let mut off = 0;
        for c in &self.comps {
            let t = c.image(f, endo)?;
            for i in 0..c.mult {
                for j in 0..c.mult {
                    out.set(off + i, off + j, t.get(i, j));
                }
            }
            off += c.mult;
        }
        Ok(out)
    }

    /// Locality of the image algebra (spanned by `1` and the images).
    pub fn locality(&self, f: &Fp) -> Locality {
        let n = self.size();
        let mut sub = Subspace::new(n * n);
        let mut basis = Vec::new();
        for t in std::iter::once(mx::identity(f, n)).chain(self.images.iter().cloned()) {
            if sub.insert(f, &t.data) {
                basis.push(t);
            }
        }
        algebra::locality(f, &basis)
    }
}

fn not_split() -> Error {
    Error::FieldTooSmall("End(L)/rad is a proper extension of the residue field".into())
}

/// Spanning set of `rad End_A(L)` for indecomposable `L`: `f − c_f·1` for
/// each spanning element `f` (with `c_f` its residue eigenvalue), plus `ε·1`.
pub fn rad_end_spanning(l: &Lattice) -> Result<Vec<LatticeMap>> {
    let ed = EndData::new(l)?;
    let f = l.field();
    match ed.locality(&f) {
        Locality::Local => {}
        Locality::NotLocal => return Err(Error::NotLocal),
        Locality::NonSplit => return Err(not_split()),
    }
    let r = ed.hom.out_ring();
    let src = Arc::new(l.at_prec(r.prec())?);
    let id = mx::identity(&r, l.rank());
    let mut out = Vec::with_capacity(ed.images.len() + 1);
    for (h, t) in ed.hom.basis().iter().zip(&ed.images) {
        let c = match algebra::single_eigenvalue(&f, t) {
            Ok(Some(c)) => c,
            _ => return Err(Error::NotLocal),
        };
        out.push(LatticeMap {
            source: src.clone(),
            target: src.clone(),
            matrix: mx::sub(&r, &ed.hom.matrix(h), &mx::scale(&r, r.lift(c), &id)),
        });
    }
    out.push(LatticeMap {
        source: src.clone(),
        target: src,
        matrix: mx::scale(&r, r.eps(), &id),
    });
    Ok(out)
}

/// Whether `L ≅ L'`: some homomorphism reduces to an invertible matrix
/// over κ. Random elements are tried first; the fallback searches the span
/// of all residue matrices.
pub fn is_isomorphic_lattice(l: &Lattice, l2: &Lattice, seed: u64) -> Result<bool> {
    if l.p() != l2.p() || l.rank() != l2.rank() {
        return Ok(false);
    }
    if l.rank() == 0 {
        return Ok(true);
    }
    let (a, b) = (l.reduce(), l2.reduce());
    if abar::invariants(&a) != abar::invariants(&b) {
        return Ok(false);
    }
    if abar::decompose(&a, seed)? != abar::decompose(&b, seed)? {
        return Ok(false);
    }
    let hs = hom(l, l2)?;
    if hs.dim() == 0 {
        return Ok(false);
    }
    let f = l.field();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..64 {
        let m = hs.residue_matrix(&hs.random(&mut rng));
        if mx::inverse_field(&f, &m).is_some() {
            return Ok(true);
        }
    }
    let reds: Vec<Mat<u32>> = hs.basis().iter().map(|h| hs.residue_matrix(h)).collect();
    Ok(abar::span_has_invertible(&f, &reds, seed))
}

/// Whether `End_A(L)` is local with residue field κ.
pub fn is_indecomposable(l: &Lattice) -> Result<bool> {
    if l.rank() == 0 {
        return Ok(false);
    }
    if kronecker::split_free_summand(&l.field(), &mx::residue(&l.ring, &l.x), &mx::residue(&l.ring, &l.y))?
        .is_some()
    {
        return Ok(l.rank() == 4);
    }
    let comps = abar::isotypic_components(&l.reduce())?;
    if comps.len() == 1 && comps[0].mult == 1 {
        return Ok(true);
    }
    match EndData::new(l)?.locality(&l.field()) {
        Locality::Local => Ok(true),
        Locality::NotLocal => Ok(false),
        Locality::NonSplit => Err(not_split()),
    }
}

/// Splits `L` into indecomposable summands. Each terminal summand is
/// certified indecomposable; a lattice that is already indecomposable is
/// returned unchanged (basis and tag preserved).
pub fn decompose_lattice(l: &Lattice, seed: u64) -> Result<Vec<Lattice>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stack = vec![l.clone()];
    let mut out = Vec::new();
    while let Some(cur) = stack.pop() {
        if cur.rank() == 0 {
            continue;
        }
        let (core, nfree) = strip_projective(&cur)?;
        if nfree > 0 {
            for _ in 0..nfree {
                out.push(regular(&cur.ring, 1));
            }
            stack.push(core);
            continue;
        }
        match split_lattice(&cur, &mut rng)? {
            Some(parts) => stack.extend(parts.into_iter().rev()),
            None => out.push(cur),
        }
    }
    Ok(out)
}

/// Splits `L` along the generalized eigenspaces of a random endomorphism,
/// or returns `None` once `End(L)` is certified local.
fn split_lattice(l: &Lattice, rng: &mut ChaCha8Rng) -> Result<Option<Vec<Lattice>>> {
    let f = l.field();
    let comps = abar::isotypic_components(&l.reduce())?;
    if comps.len() == 1 && comps[0].mult == 1 {
        return Ok(None);
    }
    let ed = EndData::new(l)?;
    match ed.locality(&f) {
        Locality::Local => return Ok(None),
        Locality::NonSplit => return Err(not_split()),
        Locality::NotLocal => {}
    }
    let total = ed.size();
    // Best random θ: the most rational eigenvalues of its image.
    let mut best: Option<(usize, Vec<u32>, Vec<DvrElem>, usize)> = None;
    for _ in 0..64 {
        let coeffs: Vec<u32> = (0..ed.hom.dim()).map(|_| rng.gen_range(0..f.p())).collect();
        let mut t = Mat::filled(total, total, 0u32);
        for (&c, tb) in coeffs.iter().zip(&ed.images) {
            dense::add_scaled(f.p(), &mut t, c, tb);
        }
        let (roots, rest) = poly::roots(&f, &poly::charpoly(&f, &t));
        let pieces = roots.len() + usize::from(rest > 0);
        if roots.is_empty() || pieces < 2 {
            continue;
        }
        // Prefer more pieces, then a split characteristic polynomial.
        if best.as_ref().is_none_or(|b| (pieces, rest == 0) > (b.0, b.3 == 0)) {
            let cs = roots.iter().map(|&(c, _)| c).collect();
            best = Some((pieces, cs, ed.hom.combine(&coeffs), rest));
            if rest == 0 && pieces == total {
                break;
            }
        }
    }
    let Some((_, cs, h, rest)) = best else {
        return Err(Error::FieldTooSmall(format!(
            "no endomorphism of a rank-{} lattice with rational eigenvalues splits it",
            l.rank()
        )));
    };
    let r = ed.hom.out_ring();
    let theta = ed.hom.matrix(&h);
    let n = l.rank();
    let id = mx::identity(&r, n);
    // (θ − c)^M kills the c-part and is 1 elsewhere: M = Π_j (p^j − 1)·p^a
    // over the possible degrees j of the other eigenvalues, with p^a at
    // least the nilpotency index n·N.
    let p = f.p() as u128;
    let mut pa: u128 = 1;
    while pa < (n * r.prec()) as u128 {
        pa *= p;
    }
    let mut factors = vec![pa];
    let mut pj = 1u128;
    for _ in 0..rest.max(1) {
        pj = pj
            .checked_mul(p)
            .ok_or_else(|| Error::FieldTooSmall("eigenvalue extension degree too large".into()))?;
        factors.push(pj - 1);
    }
    let mut idems = Vec::new();
    for &c in &cs {
        let mut x = mx::sub(&r, &theta, &mx::scale(&r, r.lift(c), &id));
        for &m in &factors {
            x = dvr_pow(&r, &x, m);
        }
        let e = mx::sub(&r, &id, &x);
        if dense::dvr_mat_mul(&r, &e, &e) != e {
            return Err(Error::Verification("power idempotent is not idempotent".into()));
        }
        idems.push(e);
    }
    if rest > 0 {
        let mut e = id.clone();
        for ei in &idems {
            e = mx::sub(&r, &e, ei);
        }
        idems.push(e);
    }
    Ok(Some(split_by_idempotents(l, &r, &idems)?))
}

/// `a^e` over `O_N` by repeated squaring.
fn dvr_pow(r: &Dvr, a: &Mat<DvrElem>, mut e: u128) -> Mat<DvrElem> {
    let mut base = a.clone();
    let mut acc: Option<Mat<DvrElem>> = None;
    while e > 0 {
        if e & 1 == 1 {
            acc = Some(match acc {
                None => base.clone(),
                Some(m) => dense::dvr_mat_mul(r, &m, &base),
            });
        }
        e >>= 1;
        if e > 0 {
            base = dense::dvr_mat_mul(r, &base, &base);
        }
    }
    acc.unwrap_or_else(|| mx::identity(r, a.rows))
}

/// Splits `L` along orthogonal idempotents summing to 1.
fn split_by_idempotents(l: &Lattice, r: &Dvr, idems: &[Mat<DvrElem>]) -> Result<Vec<Lattice>> {
    let id = mx::identity(r, l.rank());
    let mut bases = Vec::new();
    for e in idems {
        bases.push(snf::kernel_basis(r, &mx::sub(r, &id, e))?);
    }
    let mut t = bases[0].clone();
    for b in &bases[1..] {
        t = t.hstack(b);
    }
    if t.cols != l.rank() {
        return Err(Error::Verification("idempotent images do not span the lattice".into()));
    }
    let ti = mx::inverse_dvr(r, &t)?;
    let base = l.at_prec(r.prec())?;
    let mut out = Vec::new();
    let mut off = 0;
    for b in &bases {
        if b.cols == 0 {
            continue;
        }
        let idx: Vec<usize> = (off..off + b.cols).collect();
        off += b.cols;
        out.push(
            base.restrict(&ti.select_rows(&idx), b)
                .with_tag(Some(BasisTag::Computed { note: "summand".into() })),
        );
    }
    Ok(out)
}

/// Serialized form `{p, prec, rank, X, Y, basisTag}`; matrix entries are
/// length-`prec` coefficient arrays.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeJson {
    pub p: u32,
    pub prec: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
    pub rank: usize,
    #[serde(rename = "X")]
    pub x: Mat<Vec<u32>>,
    #[serde(rename = "Y")]
    pub y: Mat<Vec<u32>>,
    #[serde(rename = "basisTag", default)]
    pub basis_tag: Option<BasisTag>,
}

impl Serialize for Lattice {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let r = &self.ring;
        let conv = |m: &Mat<DvrElem>| Mat {
            rows: m.rows,
            cols: m.cols,
            data: m.data.iter().map(|&v| r.to_vec(v)).collect(),
        };
        LatticeJson {
            p: r.p(),
            prec: r.prec(),
            budget: Some(r.budget()),
            rank: self.rank(),
            x: conv(&self.x),
            y: conv(&self.y),
            basis_tag: self.tag.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Lattice {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = LatticeJson::deserialize(d)?;
        let ring = match j.budget {
            Some(b) => Dvr::with_budget(j.p, j.prec, b),
            None => Dvr::new(j.p, j.prec),
        }
        .map_err(D::Error::custom)?;
        let conv = |m: &Mat<Vec<u32>>| -> Result<Mat<DvrElem>> {
            if m.rows != j.rank || m.cols != j.rank || m.data.len() != j.rank * j.rank {
                return Err(Error::InvalidInput("matrix shape does not match rank".into()));
            }
            let data = m.data.iter().map(|v| ring.from_vec(v)).collect::<Result<Vec<_>>>()?;
            Ok(Mat { rows: m.rows, cols: m.cols, data })
        };
        let x = conv(&j.x).map_err(D::Error::custom)?;
        let y = conv(&j.y).map_err(D::Error::custom)?;
        Lattice::new(ring, x, y, j.basis_tag).map_err(D::Error::custom)
    }
}
