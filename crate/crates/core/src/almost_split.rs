//! Almost split sequences ending at a lattice, built by pulling back the
//! projective cover along a socle-type endomorphism and certified by the
//! three conditions of the recipe.
//!
//! Maps factoring through projectives form an ideal `𝒫 ⊆ End(Z)`. Since
//! `A` is symmetric, `Hom_A(Z, A) ≅ Hom_O(Z, O)` by the trace-dual map, so
//! `𝒫` is spanned by explicit generators `π ∘ ψ`. Endomorphisms are
//! compared in generator coordinates `f ↦ (f(g_j))_j` (saturated because
//! the `g_j` generate `Z`). Once `ε^e ∈ 𝒫` is certified, `f ∈ 𝒫` is decided
//! modulo `ε^e`, which for `e = 1` is linear algebra over κ.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::abar::{self, AbarModule};
use crate::dvr::dense::{self, ChainSpan, Echelon};
use crate::dvr::matrix::{self as mx, Mat};
use crate::dvr::{snf, Dvr, DvrElem, Ring};
use crate::error::{Error, Result};
use crate::kronecker;
use crate::lattice::{
    decompose_lattice, direct_sum, is_indecomposable, is_isomorphic_lattice, kernel_lattice, lower_prec,
    projective_cover, rad_end_spanning, tau, top_generators, BasisTag, Lattice, LatticeMap,
};

/// Largest exponent `e` tried for `ε^e·End(Z) ⊆ 𝒫`.
const MAX_STABLE_EXPONENT: usize = 4;
/// Longest descent through the radical while searching for φ.
const MAX_DESCENT: usize = 64;

/// `φ = π ∘ lift` when present.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorWitness {
    pub lift: Option<LatticeMap>,
}

impl FactorWitness {
    pub fn factors(&self) -> bool {
        self.lift.is_some()
    }
}

/// The endomorphism of a periodic Heller lattice sending the first basis
/// vector of the last block to the last one (`a_{n,1} ↦ a_{n,4}`, resp.
/// `b_{n,1} ↦ b_{n,4}`) and every other basis vector to 0.
pub fn phi(z: &Lattice) -> Result<LatticeMap> {
    let Some(BasisTag::Heller { n, .. }) = z.tag() else {
        return Err(Error::MissingBasisTag);
    };
    let r = *z.ring();
    let n = *n;
    let mut m = mx::zeros(&r, 4 * n, 4 * n);
    m.set(4 * (n - 1) + 3, 4 * (n - 1), r.one());
    let zz = Arc::new(z.clone());
    LatticeMap::new(zz.clone(), zz, m)
}

/// Entries `f(g_j)` for the chosen generators, concatenated.
fn gen_coords(f: &Mat<DvrElem>, gens: &[usize]) -> Vec<DvrElem> {
    gens.iter().flat_map(|&g| f.col(g)).collect()
}

/// Generator coordinates of `p ∘ ψ` for `ψ` running over an `O`-spanning
/// set of `Hom_A(L, source(p))`, as columns.
fn factoring_generators(r: &Dvr, l: &Lattice, p: &LatticeMap, gens: &[usize]) -> Result<Mat<DvrElem>> {
    let pm = mx::truncate(r, &p.matrix);
    let mut cols: Vec<Vec<DvrElem>> = Vec::new();
    if matches!(p.source.tag(), Some(BasisTag::Regular { .. })) {
        // ψ_{c,i}(m) = e_c ⊗ (m_i^{XY}·1 + (Ym)_i·X + (Xm)_i·Y + m_i·XY).
        let x = mx::truncate(r, l.x());
        let y = mx::truncate(r, l.y());
        let xy = mx::mul(r, &x, &y);
        let t = p.source.rank() / 4;
        for c in 0..t {
            for i in 0..l.rank() {
                let mut col = Vec::with_capacity(pm.rows * gens.len());
                for &g in gens {
                    let s = [
                        xy.get(i, g),
                        y.get(i, g),
                        x.get(i, g),
                        if i == g { r.one() } else { r.zero() },
                    ];
                    for a in 0..pm.rows {
                        let mut acc = r.zero();
                        for (k, &sk) in s.iter().enumerate() {
                            if !r.is_zero(sk) {
                                acc = r.add(acc, r.mul(sk, pm.get(a, 4 * c + k)));
                            }
                        }
                        col.push(acc);
                    }
                }
                cols.push(col);
            }
        }
    } else {
        let hs = crate::lattice::hom(l, &p.source)?;
        let out = hs.out_ring();
        for h in hs.basis() {
            let psi = hs.matrix(h);
            let comp = mx::mul(&out, &mx::truncate(&out, &pm), &psi);
            cols.push(gen_coords(&comp, gens).into_iter().map(|v| r.truncate(v)).collect());
        }
    }
    Ok(Mat::from_cols(pm.rows * gens.len(), &cols, r.zero()))
}

/// The ideal of endomorphisms of `Z` factoring through projectives, with a
/// certified exponent `e` such that `ε^e·End(Z) ⊆ 𝒫`.
#[derive(Clone, Debug)]
pub struct StableEnd {
    ring: Dvr,
    gens: Vec<usize>,
    g: Mat<DvrElem>,
    exponent: usize,
    residues: Echelon,
    span: Option<ChainSpan>,
}

impl StableEnd {
    pub fn new(z: &Lattice, cover: &LatticeMap) -> Result<Self> {
        let ring = *z.ring();
        let gens = top_generators(z);
        let g = factoring_generators(&ring, z, cover, &gens)?;
        let p = ring.p();
        let mut residues = Echelon::new(p, g.rows);
        for j in 0..g.cols {
            residues.insert(g.col(j).iter().map(|v| v.coeff(0)).collect());
        }
        let mut se = StableEnd {
            ring,
            gens,
            g,
            exponent: 0,
            residues,
            span: None,
        };
        let id = mx::identity(&ring, z.rank());
        if se.contains_mod(&id, 1) {
            return Err(Error::InvalidInput("lattice has a projective summand".into()));
        }
        // ε^e·1 ∈ 𝒫 + ε^{e+1}·End gives ε^e·End ⊆ 𝒫 by Nakayama.
        for e in 1..=MAX_STABLE_EXPONENT.min(ring.prec() - 1) {
            if se.contains_mod(&mx::scale(&ring, ring.eps_pow(e), &id), e + 1) {
                se.exponent = e;
                if e > 1 {
                    let cols = (0..se.g.cols).map(|j| se.g.col(j));
                    se.span = Some(ChainSpan::new(&ring, e, se.g.rows, cols));
                }
                return Ok(se);
            }
        }
        Err(Error::PrecisionExhausted {
            valuation: MAX_STABLE_EXPONENT,
            budget: ring.budget(),
        })
    }

    /// `e` with `ε^e·End(Z) ⊆ 𝒫`, minimal.
    pub fn exponent(&self) -> usize {
        self.exponent
    }

    fn contains_mod(&self, f: &Mat<DvrElem>, t: usize) -> bool {
        let v = gen_coords(f, &self.gens);
        if t == 1 {
            let res: Vec<u32> = v.iter().map(|x| x.coeff(0)).collect();
            return self.residues.contains(&res);
        }
        dense::lift_solve(&self.ring, &self.g, &v, t).is_some()
    }

    /// Whether an endomorphism factors through a projective (exact, given
    /// that `f` is an endomorphism known modulo `ε^e` at least).
    pub fn contains(&self, f: &Mat<DvrElem>) -> bool {
        match &self.span {
            Some(span) => span.contains(&gen_coords(f, &self.gens)),
            None => self.contains_mod(f, self.exponent),
        }
    }

    /// The ring in which membership is decided.
    pub fn test_ring(&self) -> Dvr {
        self.ring.with_prec(self.exponent)
    }
}

/// Solves `p ∘ ψ = φ`; the lift is exact at the working precision.
pub fn factors_through(phi: &LatticeMap, p: &LatticeMap) -> Result<FactorWitness> {
    if phi.target.rank() != p.target.rank() || phi.target.p() != p.target.p() {
        return Err(Error::InvalidInput("maps have different targets".into()));
    }
    let l = &phi.source;
    let r0 = [phi.ring()?, p.ring()?].into_iter().min_by_key(|r| r.prec()).unwrap();
    let gens = top_generators(l);
    if gens.is_empty() {
        return Ok(FactorWitness {
            lift: Some(LatticeMap {
                source: l.clone(),
                target: p.source.clone(),
                matrix: mx::zeros(&r0, p.source.rank(), 0),
            }),
        });
    }
    // Hom solutions come back at a lower precision for non-free sources.
    let (g, basis_maps, r) = if matches!(p.source.tag(), Some(BasisTag::Regular { .. })) {
        (factoring_generators(&r0, l, p, &gens)?, None, r0)
    } else {
        let hs = crate::lattice::hom(l, &p.source)?;
        let out = hs.out_ring();
        let r = if out.prec() < r0.prec() { out } else { r0 };
        let psis: Vec<Mat<DvrElem>> = hs.basis().iter().map(|h| mx::truncate(&r, &hs.matrix(h))).collect();
        let pm = mx::truncate(&r, &p.matrix);
        let cols: Vec<Vec<DvrElem>> = psis.iter().map(|psi| gen_coords(&mx::mul(&r, &pm, psi), &gens)).collect();
        (Mat::from_cols(pm.rows * gens.len(), &cols, r.zero()), Some(psis), r)
    };
    let v: Vec<DvrElem> = gen_coords(&mx::truncate(&r, &phi.matrix), &gens);
    let Some(c) = dense::lift_solve(&r, &g, &v, r.prec()) else {
        return Ok(FactorWitness { lift: None });
    };
    let src_rank = p.source.rank();
    let mut lift = mx::zeros(&r, src_rank, l.rank());
    match basis_maps {
        None => {
            let x = mx::truncate(&r, l.x());
            let y = mx::truncate(&r, l.y());
            let xy = mx::mul(&r, &x, &y);
            let t = src_rank / 4;
            for cc in 0..t {
                for i in 0..l.rank() {
                    let a = c[cc * l.rank() + i];
                    if r.is_zero(a) {
                        continue;
                    }
                    for j in 0..l.rank() {
                        let s = [xy.get(i, j), y.get(i, j), x.get(i, j), if i == j { r.one() } else { r.zero() }];
                        for (k, &sk) in s.iter().enumerate() {
                            if !r.is_zero(sk) {
                                let old = lift.get(4 * cc + k, j);
                                lift.set(4 * cc + k, j, r.add(old, r.mul(a, sk)));
                            }
                        }
                    }
                }
            }
        }
        Some(psis) => {
            for (a, psi) in c.iter().zip(&psis) {
                if !r.is_zero(*a) {
                    lift = mx::add(&r, &lift, &mx::scale(&r, *a, psi));
                }
            }
        }
    }
    let check = mx::mul(&r, &mx::truncate(&r, &p.matrix), &lift);
    if check != mx::truncate(&r, &phi.matrix) {
        return Err(Error::Verification("factorization witness does not compose to phi".into()));
    }
    Ok(FactorWitness {
        lift: Some(LatticeMap {
            source: l.clone(),
            target: p.source.clone(),
            matrix: lift,
        }),
    })
}

/// The pullback `E = {(x, y) : p(x) = φ(y)} ⊆ source(p) ⊕ source(φ)` with
/// its inclusion of `ker p` and projection onto `source(φ)`.
#[derive(Clone, Debug)]
pub struct Pullback {
    pub middle: Lattice,
    pub kernel: Lattice,
    pub inclusion: LatticeMap,
    pub projection: LatticeMap,
}

pub fn pullback_middle(p: &LatticeMap, phi: &LatticeMap) -> Result<Pullback> {
    if p.target.rank() != phi.target.rank() {
        return Err(Error::InvalidInput("maps have different targets".into()));
    }
    let r0 = [p.ring()?, phi.ring()?].into_iter().min_by_key(|r| r.prec()).unwrap();
    let (ps, zs) = (p.source.rank(), phi.source.rank());
    let src = direct_sum(&r0, &[&p.source.at_prec(r0.prec())?, &phi.source.at_prec(r0.prec())?]);
    let neg = mx::scale(&r0, r0.from_i64(-1), &mx::truncate(&r0, &phi.matrix));
    let m = mx::truncate(&r0, &p.matrix).hstack(&neg);
    let k = snf::kernel(&r0, &m)?;
    let r = lower_prec(&r0, k.prec_loss)?;
    let middle = Lattice::new(
        r,
        kronecker::restrict(&r0, &k.coords, src.x(), &k.basis),
        kronecker::restrict(&r0, &k.coords, src.y(), &k.basis),
        Some(BasisTag::Computed { note: "pullback".into() }),
    )?;
    let (kernel, kbasis) = kernel_lattice(p)?;
    let r = if kernel.prec() < r.prec() { *kernel.ring() } else { r };
    let middle = middle.at_prec(r.prec())?;
    let kernel = kernel.at_prec(r.prec())?;
    // ker p → E: (x, 0) in E-coordinates.
    let kb = mx::truncate(&r, &kbasis);
    let lifted = Mat::from_fn(ps + zs, kb.cols, |i, j| if i < ps { kb.get(i, j) } else { r.zero() });
    let incl = mx::mul(&r, &mx::truncate(&r, &k.coords), &lifted);
    let idx: Vec<usize> = (ps..ps + zs).collect();
    let proj = mx::truncate(&r, &k.basis.select_rows(&idx));
    let middle = Arc::new(middle);
    let inclusion = LatticeMap {
        source: Arc::new(kernel.clone()),
        target: middle.clone(),
        matrix: incl,
    };
    let projection = LatticeMap {
        source: middle.clone(),
        target: Arc::new(phi.source.at_prec(r.prec())?),
        matrix: proj,
    };
    Ok(Pullback {
        middle: (*middle).clone(),
        kernel,
        inclusion,
        projection,
    })
}

/// Exactness of `0 → K → E → Z → 0` as computed: the composite vanishes,
/// the inclusion is a split mono of `O`-modules, the projection is onto and
/// the ranks add up.
pub fn is_exact(inclusion: &LatticeMap, projection: &LatticeMap) -> Result<bool> {
    let r = inclusion.ring()?;
    let r = if projection.ring()?.prec() < r.prec() { projection.ring()? } else { r };
    let f = r.field();
    let comp = mx::mul(&r, &mx::truncate(&r, &projection.matrix), &mx::truncate(&r, &inclusion.matrix));
    if !mx::is_zero(&r, &comp) {
        return Ok(false);
    }
    let (k, e, z) = (inclusion.source.rank(), inclusion.target.rank(), projection.target.rank());
    let ri = dense::rank(f.p(), &mx::residue(&r, &inclusion.matrix));
    let rp = dense::rank(f.p(), &mx::residue(&r, &projection.matrix));
    Ok(k + z == e && ri == k && rp == z && inclusion.is_homomorphism()? && projection.is_homomorphism()?)
}

/// Outcome of each certification step.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ArChecks {
    /// (i) φ does not factor through the projective cover.
    pub phi_not_factoring: bool,
    /// (ii) the kernel of the cover is indecomposable.
    pub kernel_indecomposable: bool,
    /// (iii) φ∘ρ factors for every element of the radical spanning set.
    pub rad_factoring: bool,
    pub rad_elements_checked: usize,
    /// `e` with `ε^e·End ⊆ 𝒫`.
    pub stable_exponent: usize,
    pub exact: bool,
    /// φ is the explicit Heller endomorphism (otherwise found by search).
    pub explicit_phi: bool,
}

impl ArChecks {
    pub fn all(&self) -> bool {
        self.phi_not_factoring && self.kernel_indecomposable && self.rad_factoring && self.exact
    }
}

/// An almost split sequence `0 → left → middle → right → 0`.
#[derive(Clone, Debug)]
pub struct ArSequence {
    pub left: Lattice,
    pub middle: Lattice,
    pub middle_summands: Vec<(Lattice, usize)>,
    pub right: Lattice,
    pub inclusion: LatticeMap,
    pub projection: LatticeMap,
    pub phi: LatticeMap,
    pub checks: ArChecks,
    pub certified: bool,
}

impl ArSequence {
    /// Summands that are not projective.
    pub fn non_projective_summands(&self) -> impl Iterator<Item = &(Lattice, usize)> {
        self.middle_summands.iter().filter(|(l, _)| !matches!(l.tag(), Some(BasisTag::Regular { .. })))
    }

    pub fn to_json(&self) -> ArSequenceJson {
        ArSequenceJson {
            left: self.left.clone(),
            middle: self
                .middle_summands
                .iter()
                .map(|(l, m)| SummandJson {
                    lattice: l.clone(),
                    mult: *m,
                })
                .collect(),
            right: self.right.clone(),
            certified: self.certified,
            checks: self.checks.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummandJson {
    pub lattice: Lattice,
    pub mult: usize,
}

/// Serialized form `{left, middle: [{lattice, mult}], right, certified, checks}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArSequenceJson {
    pub left: Lattice,
    pub middle: Vec<SummandJson>,
    pub right: Lattice,
    pub certified: bool,
    pub checks: ArChecks,
}

/// Maps with image in the socle `{z : Xz = Yz = 0}`: exactly the
/// `Σ c_ab z_a ⊗ g_b` with `g_b` running over forms vanishing on `XZ + YZ`.
/// The basis is exact, and the space is a right ideal of `End(Z)`.
struct SocleMaps {
    soc: Mat<DvrElem>,
    soc_coords: Mat<DvrElem>,
    top: Mat<DvrElem>,
    top_coords: Mat<DvrElem>,
}

impl SocleMaps {
    fn new(z: &Lattice) -> Result<Self> {
        let r = *z.ring();
        let soc = snf::kernel(&r, &z.x().vstack(z.y()))?;
        let top = snf::kernel(&r, &z.x().transpose().vstack(&z.y().transpose()))?;
        Ok(SocleMaps {
            soc: soc.basis,
            soc_coords: soc.coords,
            top: top.basis,
            top_coords: top.coords,
        })
    }

    /// `z_a ⊗ g_b`, sparsest first.
    fn candidates(&self, r: &Dvr) -> Vec<Mat<DvrElem>> {
        let nnz = |v: &[DvrElem]| v.iter().filter(|x| !r.is_zero(**x)).count();
        let mut out: Vec<(usize, Mat<DvrElem>)> = Vec::new();
        for a in 0..self.soc.cols {
            let zc = self.soc.col(a);
            for b in 0..self.top.cols {
                let gc = self.top.col(b);
                let m = Mat::from_fn(zc.len(), gc.len(), |i, j| r.mul(zc[i], gc[j]));
                out.push((nnz(&zc) * nnz(&gc), m));
            }
        }
        out.sort_by_key(|(w, _)| *w);
        out.into_iter().map(|(_, m)| m).collect()
    }

    /// The element of the span with the coordinates of `f` (a socle-valued
    /// endomorphism known to lower precision), evaluated exactly in `r`.
    fn exact(&self, r: &Dvr, low: &Dvr, f: &Mat<DvrElem>) -> Mat<DvrElem> {
        let c = mx::mul(
            low,
            &mx::mul(low, &mx::truncate(low, &self.soc_coords), f),
            &mx::truncate(low, &self.top_coords).transpose(),
        );
        mx::mul(r, &mx::mul(r, &self.soc, &c), &self.top.transpose())
    }
}

/// Descends from `start ∉ 𝒫` through the radical until `φ·rad ⊆ 𝒫`.
fn descend(
    r: &Dvr,
    se: &StableEnd,
    start: Mat<DvrElem>,
    rad: &[Mat<DvrElem>],
) -> Result<Option<Mat<DvrElem>>> {
    let mut phi = start;
    if se.contains(&phi) {
        return Ok(None);
    }
    for _ in 0..MAX_DESCENT {
        let next = rad
            .iter()
            .map(|rho| mx::mul(r, &phi, rho))
            .find(|m| !se.contains(m));
        match next {
            Some(m) => phi = m,
            None => return Ok(Some(phi)),
        }
    }
    Err(Error::NoValidPhi("radical descent did not terminate".into()))
}

/// Groups summands into isomorphism classes with multiplicities.
pub fn group_summands(parts: Vec<Lattice>, seed: u64) -> Result<Vec<(Lattice, usize)>> {
    let mut out: Vec<(Lattice, usize)> = Vec::new();
    'next: for l in parts {
        for (m, c) in out.iter_mut() {
            if m.rank() == l.rank() && is_isomorphic_lattice(m, &l, seed)? {
                *c += 1;
                continue 'next;
            }
        }
        out.push((l, 1));
    }
    Ok(out)
}

/// The certified almost split sequence ending at an indecomposable
/// non-projective lattice.
pub fn almost_split_ending_at(z: &Lattice, seed: u64) -> Result<ArSequence> {
    if z.rank() == 0 {
        return Err(Error::InvalidInput("zero lattice".into()));
    }
    let cover = projective_cover(z);
    let se = StableEnd::new(z, &cover)?;
    let rad_maps = rad_end_spanning(z)?;
    let rw = *rad_maps[0].source.ring();
    let rad: Vec<Mat<DvrElem>> = rad_maps.iter().map(|m| m.matrix.clone()).collect();
    // Only the class of φ modulo 𝒫 ⊇ ε^e·End matters, so a socle-valued φ
    // found at the precision of End is replaced by an exact representative.
    let (phi_mat, explicit, zz) = match phi(z) {
        Ok(m) => (m.matrix, true, Arc::new(z.clone())),
        Err(Error::MissingBasisTag) => {
            let sm = SocleMaps::new(z)?;
            let te = se.test_ring();
            let rad_e: Vec<Mat<DvrElem>> = rad.iter().map(|m| mx::truncate(&te, m)).collect();
            let mut found = None;
            for c in sm.candidates(z.ring()) {
                if let Some(m) = descend(&te, &se, mx::truncate(&te, &c), &rad_e)? {
                    found = Some(m);
                    break;
                }
            }
            match found {
                Some(m) => (sm.exact(z.ring(), &te, &m), false, Arc::new(z.clone())),
                None => {
                    let m = descend(&rw, &se, mx::identity(&rw, z.rank()), &rad)?
                        .ok_or_else(|| Error::NoValidPhi("identity factors through a projective".into()))?;
                    (m, false, Arc::new(z.at_prec(rw.prec())?))
                }
            }
        }
        Err(e) => return Err(e),
    };
    let phi_map = LatticeMap {
        source: zz.clone(),
        target: zz.clone(),
        matrix: phi_mat.clone(),
    };
    if !phi_map.is_homomorphism()? {
        return Err(Error::Verification("phi is not an endomorphism".into()));
    }
    let phi_mat = mx::truncate(&rw, &phi_mat);
    let phi_not_factoring = !se.contains(&phi_mat);
    let te = se.test_ring();
    let phi_e = mx::truncate(&te, &phi_mat);
    let rad_factoring = rad.iter().all(|rho| se.contains(&mx::mul(&te, &phi_e, &mx::truncate(&te, rho))));
    let pb = pullback_middle(&cover, &phi_map)?;
    let kernel_indecomposable = is_indecomposable(&pb.kernel)?;
    let exact = is_exact(&pb.inclusion, &pb.projection)?;
    let checks = ArChecks {
        phi_not_factoring,
        kernel_indecomposable,
        rad_factoring,
        rad_elements_checked: rad.len(),
        stable_exponent: se.exponent(),
        exact,
        explicit_phi: explicit,
    };
    let certified = checks.all();
    let parts = decompose_lattice(&pb.middle, seed)?;
    let middle_summands = group_summands(parts, seed)?;
    Ok(ArSequence {
        left: pb.kernel.clone(),
        middle: pb.middle,
        middle_summands,
        right: z.clone(),
        inclusion: pb.inclusion,
        projection: pb.projection,
        phi: phi_map,
        checks,
        certified,
    })
}

/// Whether the reduction modulo ε of `0 → K → E → Z → 0` splits: some
/// `Ā`-map `s : Z⊗κ → E⊗κ` has `π̄ ∘ s = 1`.
pub fn reduced_sequence_splits(projection: &LatticeMap) -> Result<bool> {
    let r = projection.ring()?;
    let f = r.field();
    let e = projection.source.reduce();
    let z = projection.target.reduce();
    let pbar = mx::residue(&r, &projection.matrix);
    let homs = abar::hom_space(&z, &e)?;
    let mut ech = Echelon::new(f.p(), z.d * z.d);
    for s in &homs {
        ech.insert(mx::mul(&f, &pbar, s).data);
    }
    Ok(ech.contains(&mx::identity(&f, z.d).data))
}

/// `D(L)`: the number of non-projective indecomposable summands of `L⊗κ`.
pub fn stat_d(l: &Lattice, seed: u64) -> Result<usize> {
    stat_d_module(&l.reduce(), seed)
}

pub fn stat_d_module(m: &AbarModule, seed: u64) -> Result<usize> {
    Ok(abar::decompose(m, seed)?.non_projective_count())
}

/// `R(L)`: the average rank over the τ-orbit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RStat {
    pub period: usize,
    pub rank_sum: usize,
}

impl RStat {
    /// `(numerator, denominator)` in lowest terms.
    pub fn ratio(&self) -> (usize, usize) {
        let g = gcd(self.rank_sum, self.period);
        (self.rank_sum / g, self.period / g)
    }

    pub fn value(&self) -> f64 {
        self.rank_sum as f64 / self.period as f64
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// The least `k ≤ bound` with `τ^k L ≅ L`.
pub fn tau_period(l: &Lattice, bound: usize, seed: u64) -> Result<(usize, Vec<Lattice>)> {
    let mut orbit = vec![l.clone()];
    let mut cur = l.clone();
    for k in 1..=bound {
        cur = tau(&cur)?;
        if is_isomorphic_lattice(&cur, l, seed)? {
            return Ok((k, orbit));
        }
        orbit.push(cur.clone());
    }
    Err(Error::PeriodNotFound(bound))
}

pub fn stat_r(l: &Lattice, bound: usize, seed: u64) -> Result<RStat> {
    let (period, orbit) = tau_period(l, bound, seed)?;
    Ok(RStat {
        period,
        rank_sum: orbit.iter().map(|x| x.rank()).sum(),
    })
}

/// `rank(left) + rank(right) = Σ mult·rank(middle summand)`.
pub fn ranks_add_up(seq: &ArSequence) -> bool {
    let mid: usize = seq.middle_summands.iter().map(|(l, m)| l.rank() * m).sum();
    mid == seq.left.rank() + seq.right.rank()
}

/// Multiplicity of each summand class in the middle term keyed by rank,
/// for reports.
pub fn middle_profile(seq: &ArSequence) -> BTreeMap<usize, usize> {
    let mut out = BTreeMap::new();
    for (l, m) in &seq.middle_summands {
        *out.entry(l.rank()).or_insert(0) += m;
    }
    out
}

/// Whether `projection` has an `A`-linear section over `O_N`.
pub fn projection_splits(projection: &LatticeMap) -> Result<bool> {
    let z = projection.target.clone();
    let r = projection.ring()?;
    let id = LatticeMap {
        source: z.clone(),
        target: z,
        matrix: mx::identity(&r, projection.target.rank()),
    };
    Ok(factors_through(&id, projection)?.factors())
}
