//! Finite-dimensional modules over `Ā = κ[X,Y]/(X²,Y²)`.
//!
//! Indecomposables are the string modules `M(m)`, `m ∈ ℤ`, the band
//! modules `M(λ)_n` for `λ ∈ P¹(κ)`, and the regular module `Ā`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dvr::algebra::{self, Locality, Subspace};
use crate::dvr::gf::{self, Gf};
use crate::dvr::matrix::{self as mx, Mat};
use crate::dvr::{dense, poly, snf, Fp, Ring};
use crate::error::{Error, Result};
use crate::kronecker;

/// A point of `P¹(κ)`: a residue or `∞`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Lambda {
    Finite(u32),
    Infinity,
}

impl Lambda {
    /// `−λ` (with `−∞ = ∞`).
    pub fn neg(self, f: &Fp) -> Lambda {
        match self {
            Lambda::Finite(c) => Lambda::Finite(f.neg(c)),
            Lambda::Infinity => Lambda::Infinity,
        }
    }

    /// Parses an integer (reduced mod `p`) or `inf`/`∞`. The flag reports
    /// whether the integer had to be reduced.
    pub fn parse(s: &str, f: &Fp) -> Result<(Lambda, bool)> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t == "∞" {
            return Ok((Lambda::Infinity, false));
        }
        let v: i64 = t
            .parse()
            .map_err(|_| Error::InvalidInput(format!("lambda must be an integer or 'inf', got {s:?}")))?;
        let c = f.norm(v);
        Ok((Lambda::Finite(c), c as i64 != v))
    }
}

impl fmt::Display for Lambda {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lambda::Finite(c) => write!(f, "{c}"),
            Lambda::Infinity => write!(f, "∞"),
        }
    }
}

impl From<Lambda> for String {
    fn from(l: Lambda) -> String {
        match l {
            Lambda::Finite(c) => c.to_string(),
            Lambda::Infinity => "inf".into(),
        }
    }
}

impl TryFrom<String> for Lambda {
    type Error = String;
    fn try_from(s: String) -> std::result::Result<Self, String> {
        if s == "inf" || s == "∞" {
            return Ok(Lambda::Infinity);
        }
        s.parse::<u32>()
            .map(Lambda::Finite)
            .map_err(|_| format!("invalid lambda {s:?}"))
    }
}

/// Isoclass of an indecomposable `Ā`-module.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum CatalogLabel {
    /// `M(m)`; negative `m` encodes `M(−|m|)`, and `M(0)` is the simple module.
    String { m: i64 },
    /// `M(λ)_n`, `n ≥ 1`.
    Band { lambda: Lambda, n: usize },
    /// The regular module `Ā`.
    Projective,
}

impl CatalogLabel {
    pub fn string(m: i64) -> Self {
        CatalogLabel::String { m }
    }

    pub fn band(lambda: Lambda, n: usize) -> Self {
        CatalogLabel::Band { lambda, n }
    }

    pub fn dim(&self) -> usize {
        match *self {
            CatalogLabel::String { m } => 2 * m.unsigned_abs() as usize + 1,
            CatalogLabel::Band { n, .. } => 2 * n,
            CatalogLabel::Projective => 4,
        }
    }

    pub fn is_projective(&self) -> bool {
        matches!(self, CatalogLabel::Projective)
    }
}

impl fmt::Display for CatalogLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CatalogLabel::String { m } => write!(f, "M({m})"),
            CatalogLabel::Band { lambda, n } => write!(f, "M({lambda})_{n}"),
            CatalogLabel::Projective => write!(f, "Ā"),
        }
    }
}

impl FromStr for CatalogLabel {
    type Err = Error;

    /// Parses `M(m)`, `M(λ)_n` (λ an integer or `inf`/`∞`) or `A`/`Ā`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("cannot parse module label {s:?}"));
        let t = s.trim();
        if t == "A" || t == "Ā" {
            return Ok(CatalogLabel::Projective);
        }
        let inner = t.strip_prefix("M(").ok_or_else(bad)?;
        let close = inner.find(')').ok_or_else(bad)?;
        let (arg, rest) = (&inner[..close], &inner[close + 1..]);
        if rest.is_empty() {
            return Ok(CatalogLabel::string(arg.parse().map_err(|_| bad())?));
        }
        let n: usize = rest.strip_prefix('_').ok_or_else(bad)?.parse().map_err(|_| bad())?;
        if n == 0 {
            return Err(bad());
        }
        let lambda = if arg == "inf" || arg == "∞" {
            Lambda::Infinity
        } else {
            Lambda::Finite(arg.parse().map_err(|_| bad())?)
        };
        Ok(CatalogLabel::band(lambda, n))
    }
}

/// A module `(d, M₁, M₂)`: commuting square-zero actions of `X` and `Y`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbarModule {
    pub p: u32,
    pub d: usize,
    #[serde(rename = "M1")]
    pub m1: Mat<u32>,
    #[serde(rename = "M2")]
    pub m2: Mat<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<CatalogLabel>,
}

impl AbarModule {
    /// Builds and validates a module.
    pub fn new(p: u32, m1: Mat<u32>, m2: Mat<u32>) -> Result<Self> {
        let m = AbarModule {
            p,
            d: m1.rows,
            m1,
            m2,
            label: None,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn field(&self) -> Fp {
        Fp::new(self.p).expect("validated characteristic")
    }

    pub fn zero(p: u32) -> Self {
        AbarModule {
            p,
            d: 0,
            m1: Mat::filled(0, 0, 0),
            m2: Mat::filled(0, 0, 0),
            label: None,
        }
    }

    /// Checks shapes, reduced entries and the relations `M₁² = M₂² = 0`,
    /// `M₁M₂ = M₂M₁`.
    pub fn validate(&self) -> Result<()> {
        let f = Fp::new(self.p)?;
        let d = self.d;
        for m in [&self.m1, &self.m2] {
            if m.rows != d || m.cols != d || m.data.len() != d * d {
                return Err(Error::InvalidInput(format!("action matrix is not {d}×{d}")));
            }
            if m.data.iter().any(|&v| v >= self.p) {
                return Err(Error::InvalidInput("entries must be reduced mod p".into()));
            }
        }
        let z = |a: &Mat<u32>| mx::is_zero(&f, a);
        if !z(&mx::mul(&f, &self.m1, &self.m1)) || !z(&mx::mul(&f, &self.m2, &self.m2)) {
            return Err(Error::InvalidInput("actions must square to zero".into()));
        }
        if mx::mul(&f, &self.m1, &self.m2) != mx::mul(&f, &self.m2, &self.m1) {
            return Err(Error::InvalidInput("actions must commute".into()));
        }
        Ok(())
    }

    pub fn with_label(mut self, label: CatalogLabel) -> Self {
        self.label = Some(label);
        self
    }

    /// Module with the actions conjugated by an invertible `t`: `t⁻¹ M_i t`.
    pub fn conjugate(&self, t: &Mat<u32>) -> Result<Self> {
        let f = self.field();
        let ti = mx::inverse_field(&f, t)
            .ok_or_else(|| Error::InvalidInput("conjugating matrix is singular".into()))?;
        let c = |m: &Mat<u32>| mx::mul(&f, &ti, &mx::mul(&f, m, t));
        Ok(AbarModule {
            p: self.p,
            d: self.d,
            m1: c(&self.m1),
            m2: c(&self.m2),
            label: self.label,
        })
    }

    /// Restriction to a complemented invariant subspace: `coords` is a left
    /// inverse of `basis` whose kernel is invariant.
    fn restrict(&self, coords: &Mat<u32>, basis: &Mat<u32>) -> Self {
        let f = self.field();
        AbarModule {
            p: self.p,
            d: basis.cols,
            m1: kronecker::restrict(&f, coords, &self.m1, basis),
            m2: kronecker::restrict(&f, coords, &self.m2, basis),
            label: None,
        }
    }
}

/// Direct sum of modules (block diagonal actions).
pub fn direct_sum(p: u32, parts: &[&AbarModule]) -> AbarModule {
    let f = Fp::new(p).expect("valid characteristic");
    let m1: Vec<&Mat<u32>> = parts.iter().map(|m| &m.m1).collect();
    let m2: Vec<&Mat<u32>> = parts.iter().map(|m| &m.m2).collect();
    AbarModule {
        p,
        d: parts.iter().map(|m| m.d).sum(),
        m1: mx::block_diag(&f, &m1),
        m2: mx::block_diag(&f, &m2),
        label: None,
    }
}

/// `J(λ, n)`: `λ` on the diagonal and 1 on the superdiagonal.
fn jordan(lambda: u32, n: usize) -> Mat<u32> {
    Mat::from_fn(n, n, |i, j| {
        if i == j {
            lambda
        } else {
            u32::from(j == i + 1)
        }
    })
}

/// `[[0, 0], [B, 0]]` for an `n×n` block `B`.
fn lower_block(b: &Mat<u32>) -> Mat<u32> {
    let n = b.rows;
    Mat::from_fn(2 * n, 2 * n, |i, j| if i >= n && j < n { b.get(i - n, j) } else { 0 })
}

/// The catalog module for a label, in the standard basis `u₁, …, v₁, …`.
pub fn make_catalog(label: CatalogLabel, p: u32) -> Result<AbarModule> {
    let f = Fp::new(p)?;
    let (m1, m2) = match label {
        CatalogLabel::Projective => {
            let (x, y) = kronecker::regular(&f, 1);
            (x, y)
        }
        CatalogLabel::String { m } if m >= 0 => {
            // u_1..u_m, v_1..v_{m+1}: X u_i = v_i, Y u_i = v_{i+1}.
            let m = m as usize;
            let d = 2 * m + 1;
            let mut x = Mat::filled(d, d, 0);
            let mut y = Mat::filled(d, d, 0);
            for i in 0..m {
                x.set(m + i, i, 1);
                y.set(m + i + 1, i, 1);
            }
            (x, y)
        }
        CatalogLabel::String { m } => {
            // u_1..u_{m+1}, v_1..v_m: X u_i = v_i, Y u_{i+1} = v_i.
            let m = m.unsigned_abs() as usize;
            let d = 2 * m + 1;
            let mut x = Mat::filled(d, d, 0);
            let mut y = Mat::filled(d, d, 0);
            for i in 0..m {
                x.set(m + 1 + i, i, 1);
                y.set(m + 1 + i, i + 1, 1);
            }
            (x, y)
        }
        CatalogLabel::Band { n: 0, .. } => {
            return Err(Error::InvalidInput("band modules need n >= 1".into()));
        }
        CatalogLabel::Band { lambda: Lambda::Finite(c), n } => {
            if c >= p {
                return Err(Error::InvalidInput(format!("lambda {c} not reduced mod {p}")));
            }
            (lower_block(&mx::identity(&f, n)), lower_block(&jordan(c, n)))
        }
        CatalogLabel::Band { lambda: Lambda::Infinity, n } => {
            (lower_block(&jordan(0, n)), lower_block(&mx::identity(&f, n)))
        }
    };
    Ok(AbarModule::new(p, m1, m2)?.with_label(label))
}

/// κ-basis of `Hom_Ā(M, N)`, as `dim N × dim M` matrices.
///
/// A homomorphism is determined by the images `n_j` of the top generators
/// `g_j` of `M`; a tuple `(n_j)` extends exactly when every relation
/// `Σ ρ_{j,m}·m·g_j = 0` (`m ∈ 1, X, Y, XY`) also holds for the `n_j`.
pub fn hom_space(m: &AbarModule, n: &AbarModule) -> Result<Vec<Mat<u32>>> {
    if m.p != n.p {
        return Err(Error::InvalidInput("modules over different fields".into()));
    }
    let f = m.field();
    let p = m.p;
    if m.d == 0 || n.d == 0 {
        return Ok(Vec::new());
    }
    let gens: Vec<Vec<u32>> = top_generators(&f, &m.m1, &m.m2)
        .into_iter()
        .map(|j| (0..m.d).map(|i| u32::from(i == j)).collect())
        .collect();
    let t = gens.len();
    let cover = kronecker::cover_matrix(&f, &m.m1, &m.m2, &gens);
    // Relations: the null space of the cover.
    let mut ech = dense::Echelon::new(p, 4 * t);
    for i in 0..m.d {
        ech.insert(cover.row(i).to_vec());
    }
    let (_, relations) = ech.null_space();
    // A right inverse of the cover on a set of independent columns.
    let mut colech = dense::Echelon::new(p, m.d);
    let mut sel = Vec::new();
    for c in 0..4 * t {
        if colech.insert(cover.col(c)).is_some() {
            sel.push(c);
        }
    }
    let sinv = mx::inverse_field(&f, &cover.select_cols(&sel))
        .ok_or_else(|| Error::Verification("cover is not surjective".into()))?;
    let xy = mx::mul(&f, &n.m1, &n.m2);
    let ops = [mx::identity(&f, n.d), n.m1.clone(), n.m2.clone(), xy];
    let dn = n.d;
    let nunk = t * dn;
    let mut sys = dense::Echelon::new(p, nunk);
    'outer: for rho in &relations {
        let mut rows = vec![vec![0u32; nunk]; dn];
        for j in 0..t {
            for (k, op) in ops.iter().enumerate() {
                let c = rho[4 * j + k];
                if c == 0 {
                    continue;
                }
                for (a, row) in rows.iter_mut().enumerate() {
                    for b in 0..dn {
                        let v = op.get(a, b);
                        if v != 0 {
                            row[j * dn + b] = (row[j * dn + b] + c * v) % p;
                        }
                    }
                }
            }
        }
        for row in rows {
            sys.insert(row);
            if sys.dim() == nunk {
                break 'outer;
            }
        }
    }
    let (_, sols) = sys.null_space();
    Ok(sols
        .iter()
        .map(|h| {
            // Columns of U_h on the selected (generator, monomial) slots.
            let mut u = Mat::filled(dn, sel.len(), 0u32);
            for (q, &c) in sel.iter().enumerate() {
                let (j, k) = (c / 4, c % 4);
                let col = dense::mat_vec(p, &ops[k], &h[j * dn..(j + 1) * dn]);
                for (a, v) in col.into_iter().enumerate() {
                    u.set(a, q, v);
                }
            }
            dense::mat_mul(p, &u, &sinv)
        })
        .collect())
}

/// Cheap isomorphism invariants: dimension and the ranks of `M₁`, `M₂`,
/// `M₁M₂` and `M₂ − cM₁` for every `c ∈ κ`.
pub fn invariants(m: &AbarModule) -> Vec<usize> {
    let f = m.field();
    let mut v = vec![
        m.d,
        mx::rank_field(&f, &m.m1),
        mx::rank_field(&f, &m.m2),
        mx::rank_field(&f, &mx::mul(&f, &m.m1, &m.m2)),
    ];
    if m.d > 0 {
        for c in 1..m.p {
            let t = mx::sub(&f, &m.m2, &mx::scale(&f, c, &m.m1));
            v.push(mx::rank_field(&f, &t));
        }
    }
    v
}

/// Whether a family of square matrices spans a matrix with nonzero
/// determinant: random prime-field combinations first, then combinations
/// over an extension field with more than `2·dim` elements. An invertible
/// combination over an extension implies one over κ.
pub fn span_has_invertible(f: &Fp, mats: &[Mat<u32>], seed: u64) -> bool {
    if mats.is_empty() {
        return false;
    }
    if mats[0].rows == 0 {
        return true;
    }
    let refs: Vec<&Mat<u32>> = mats.iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if gf::sample_invertible(f, &refs, 64, &mut rng).is_some() {
        return true;
    }
    let ext = Gf::larger_than(*f, 2 * mats[0].rows);
    (0..32).any(|_| {
        let coeffs: Vec<_> = refs.iter().map(|_| ext.random(&mut rng)).collect();
        ext.combination_invertible(&coeffs, &refs)
    })
}

/// Isomorphism test via an invertible element of `Hom(M, N)`.
pub fn is_isomorphic(m: &AbarModule, n: &AbarModule, seed: u64) -> Result<bool> {
    if m.p != n.p {
        return Err(Error::InvalidInput("modules over different fields".into()));
    }
    if invariants(m) != invariants(n) {
        return Ok(false);
    }
    let hom = hom_space(m, n)?;
    Ok(span_has_invertible(&m.field(), &hom, seed))
}

/// Multiset of indecomposable isoclasses.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Decomposition {
    pub parts: Vec<Part>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Part {
    pub label: CatalogLabel,
    pub mult: usize,
}

impl Decomposition {
    pub fn from_labels(labels: impl IntoIterator<Item = CatalogLabel>) -> Self {
        let mut counts: BTreeMap<CatalogLabel, usize> = BTreeMap::new();
        for l in labels {
            *counts.entry(l).or_default() += 1;
        }
        Decomposition {
            parts: counts
                .into_iter()
                .map(|(label, mult)| Part { label, mult })
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.parts.iter().map(|p| p.label.dim() * p.mult).sum()
    }

    /// Number of indecomposable summands, counted with multiplicity.
    pub fn count(&self) -> usize {
        self.parts.iter().map(|p| p.mult).sum()
    }

    /// Number of non-projective summands, counted with multiplicity.
    pub fn non_projective_count(&self) -> usize {
        self.parts
            .iter()
            .filter(|p| !p.label.is_projective())
            .map(|p| p.mult)
            .sum()
    }

    pub fn labels(&self) -> Vec<CatalogLabel> {
        self.parts
            .iter()
            .flat_map(|p| std::iter::repeat_n(p.label, p.mult))
            .collect()
    }
}

impl fmt::Display for Decomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parts.is_empty() {
            return write!(f, "0");
        }
        let names: Vec<String> = self.labels().iter().map(|l| l.to_string()).collect();
        write!(f, "{}", names.join(" ⊕ "))
    }
}

/// Splits `M` into pieces via generalized eigenspaces of an endomorphism,
/// or returns `None` after certifying that `End(M)` is local.
fn split(m: &AbarModule, seed: u64) -> Result<Option<Vec<AbarModule>>> {
    let f = m.field();
    let end = hom_space(m, m)?;
    if end.len() <= 1 {
        return Ok(None);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nonsplit = false;
    let try_theta = |theta: &Mat<u32>, nonsplit: &mut bool| -> Option<Vec<AbarModule>> {
        match algebra::fitting_pieces(&f, theta) {
            Some(pieces) => Some(cut(m, &pieces)),
            None => {
                if algebra::single_eigenvalue(&f, theta).is_err() {
                    *nonsplit = true;
                }
                None
            }
        }
    };
    for b in &end {
        if let Some(parts) = try_theta(b, &mut nonsplit) {
            return Ok(Some(parts));
        }
    }
    if algebra::locality(&f, &end) == Locality::Local {
        return Ok(None);
    }
    // A non-local ring may still contain elements with irreducible
    // characteristic polynomials (e.g. M_2(κ) for a repeated summand), so
    // only an exhausted search is evidence of a non-split residue field.
    for _ in 0..128 {
        let theta = random_combination(&f, &end, &mut rng);
        if let Some(parts) = try_theta(&theta, &mut nonsplit) {
            return Ok(Some(parts));
        }
    }
    if nonsplit {
        Err(Error::FieldTooSmall(format!(
            "no κ-rational splitting of a {}-dimensional module",
            m.d
        )))
    } else {
        Err(Error::Verification(format!(
            "non-local endomorphism ring without a splitting element (dim {})",
            m.d
        )))
    }
}

fn random_combination(f: &Fp, basis: &[Mat<u32>], rng: &mut ChaCha8Rng) -> Mat<u32> {
    let mut acc = mx::zeros(f, basis[0].rows, basis[0].cols);
    for b in basis {
        let c = rng.gen_range(0..f.p());
        acc = mx::add(f, &acc, &mx::scale(f, c, b));
    }
    acc
}

/// Restricts `m` to each of the complementary invariant subspaces.
fn cut(m: &AbarModule, pieces: &[Mat<u32>]) -> Vec<AbarModule> {
    let f = m.field();
    let mut t = pieces[0].clone();
    for p in &pieces[1..] {
        t = t.hstack(p);
    }
    let ti = mx::inverse_field(&f, &t).expect("Fitting pieces are complementary");
    let mut out = Vec::with_capacity(pieces.len());
    let mut start = 0;
    for p in pieces {
        let idx: Vec<usize> = (start..start + p.cols).collect();
        out.push(m.restrict(&ti.select_rows(&idx), p));
        start += p.cols;
    }
    out
}

/// Candidate label of an indecomposable module from its invariants.
fn candidate_label(m: &AbarModule) -> Option<CatalogLabel> {
    let f = m.field();
    let d = m.d;
    if d == 0 {
        return None;
    }
    let r1 = mx::rank_field(&f, &m.m1);
    if d == 4 && mx::rank_field(&f, &mx::mul(&f, &m.m1, &m.m2)) == 1 {
        return Some(CatalogLabel::Projective);
    }
    if d % 2 == 1 {
        let half = (d - 1) / 2;
        let top = d - mx::rank_field(&f, &m.m1.hstack(&m.m2));
        return match top {
            _ if d == 1 => Some(CatalogLabel::string(0)),
            t if t == half => Some(CatalogLabel::string(half as i64)),
            t if t == half + 1 => Some(CatalogLabel::string(-(half as i64))),
            _ => None,
        };
    }
    let n = d / 2;
    for c in 0..m.p {
        let t = mx::sub(&f, &m.m2, &mx::scale(&f, c, &m.m1));
        if r1 == n && mx::rank_field(&f, &t) < n {
            return Some(CatalogLabel::band(Lambda::Finite(c), n));
        }
    }
    (r1 < n).then_some(CatalogLabel::band(Lambda::Infinity, n))
}

/// Identifies an indecomposable module with its catalog label, confirmed
/// by an explicit isomorphism test.
pub fn identify(m: &AbarModule, seed: u64) -> Result<CatalogLabel> {
    let bad = || Error::UnidentifiedSummand(format!("dimension {} module", m.d));
    let label = candidate_label(m).ok_or_else(bad)?;
    if is_isomorphic(m, &make_catalog(label, m.p)?, seed)? {
        Ok(label)
    } else {
        Err(bad())
    }
}

/// Indecomposable summands, each labelled. Splitting uses Fitting
/// decompositions of endomorphisms; terminal pieces carry a locality
/// certificate of their endomorphism ring and a catalog match.
pub fn decompose_summands(m: &AbarModule, seed: u64) -> Result<Vec<AbarModule>> {
    m.validate()?;
    let mut stack = vec![m.clone()];
    let mut out = Vec::new();
    while let Some(cur) = stack.pop() {
        if cur.d == 0 {
            continue;
        }
        // Free summands are cheap to detect and split off directly.
        let f = cur.field();
        if let Some((x, y, basis)) = kronecker::split_free_summand(&f, &cur.m1, &cur.m2)? {
            if cur.d > 4 {
                let free = complement_of(&cur, &basis)?;
                stack.push(AbarModule { p: cur.p, d: basis.cols, m1: x, m2: y, label: None });
                stack.push(free);
                continue;
            }
        }
        match split(&cur, seed)? {
            Some(parts) => stack.extend(parts),
            None => {
                let label = identify(&cur, seed)?;
                out.push(cur.with_label(label));
            }
        }
    }
    out.sort_by_key(|s| s.label);
    Ok(out)
}

/// A free complement of the kernel `K` of a surjection `M → Ā`: the
/// submodule generated by any basis vector `v` with `XY·v ∉ K`.
fn complement_of(m: &AbarModule, basis: &Mat<u32>) -> Result<AbarModule> {
    let f = m.field();
    let mut sub = Subspace::new(m.d);
    for j in 0..basis.cols {
        sub.insert(&f, &basis.col(j));
    }
    let xy = mx::mul(&f, &m.m1, &m.m2);
    for j in 0..m.d {
        let mut e = vec![0u32; m.d];
        e[j] = 1;
        if !sub.contains(&f, &mx::mul_vec(&f, &xy, &e)) {
            let cols = kronecker::cover_matrix(&f, &m.m1, &m.m2, &[e]);
            let all = basis.hstack(&cols);
            let inv = mx::inverse_field(&f, &all)
                .ok_or_else(|| Error::Verification("free summand is not complemented".into()))?;
            let idx: Vec<usize> = (basis.cols..m.d).collect();
            return Ok(m.restrict(&inv.select_rows(&idx), &cols));
        }
    }
    Err(Error::Verification("free summand has no generator".into()))
}

/// Decomposition into indecomposables as a label multiset, from the
/// isotypic multiplicities.
pub fn decompose(m: &AbarModule, _seed: u64) -> Result<Decomposition> {
    let comps = isotypic_components(m)?;
    Ok(Decomposition {
        parts: comps
            .into_iter()
            .map(|c| (c.label, c.mult))
            .collect::<BTreeMap<_, _>>()
            .into_iter()
            .map(|(label, mult)| Part { label, mult })
            .collect(),
    })
}

/// One isotypic component `N^m` of a module `M`, witnessed by maps
/// `ι_a : N → M` and `π_b : M → N` (`a, b < m`) whose pairing matrix
/// `G[b][a] = eig(π_b ∘ ι_a)` is invertible; `eig` is the residue of an
/// element of the local ring `End(N)`.
///
/// For `f ∈ End(M)` the matrix `(eig(π_b f ι_a))·G^{-1}` is conjugate to the
/// action of `f` on `N^m` modulo the radical, so `f ↦` that matrix is an
/// algebra homomorphism `End(M) → M_m(κ)`.
#[derive(Clone, Debug)]
pub struct Isotypic {
    pub label: CatalogLabel,
    pub mult: usize,
    pub catalog: AbarModule,
    pub inj: Vec<Mat<u32>>,
    pub proj: Vec<Mat<u32>>,
    pub gram_inv: Mat<u32>,
}

impl Isotypic {
    /// The image of `f ∈ End(M)` in `M_m(κ)`.
    pub fn image(&self, f: &Fp, endo: &Mat<u32>) -> Result<Mat<u32>> {
        let m = self.mult;
        let mut a = Mat::filled(m, m, 0u32);
        for (b, pb) in self.proj.iter().enumerate() {
            let pf = mx::mul(f, pb, endo);
            for (j, ia) in self.inj.iter().enumerate() {
                a.set(b, j, residue_eigenvalue(f, &mx::mul(f, &pf, ia))?);
            }
        }
        Ok(mx::mul(f, &a, &self.gram_inv))
    }
}

/// The unique eigenvalue of an endomorphism of an indecomposable module.
fn residue_eigenvalue(f: &Fp, a: &Mat<u32>) -> Result<u32> {
    match algebra::single_eigenvalue(f, a) {
        Ok(Some(c)) => Ok(c),
        _ => Err(Error::Verification("endomorphism of a catalog module has several eigenvalues".into())),
    }
}

/// Multiplicity of the catalog module `n` in `m` with witnesses.
fn isotypic(f: &Fp, m: &AbarModule, n: &AbarModule, label: CatalogLabel) -> Result<Option<Isotypic>> {
    let into = hom_space(n, m)?;
    if into.is_empty() {
        return Ok(None);
    }
    let out = hom_space(m, n)?;
    if out.is_empty() {
        return Ok(None);
    }
    let p = f.p();
    let mut pairing = Mat::filled(out.len(), into.len(), 0u32);
    for (b, pb) in out.iter().enumerate() {
        for (a, ia) in into.iter().enumerate() {
            pairing.set(b, a, residue_eigenvalue(f, &mx::mul(f, pb, ia))?);
        }
    }
    // Rows and columns of a nonsingular maximal minor.
    let mut rows_ech = dense::Echelon::new(p, pairing.cols);
    let mut rows = Vec::new();
    for b in 0..pairing.rows {
        if rows_ech.insert(pairing.row(b).to_vec()).is_some() {
            rows.push(b);
        }
    }
    if rows.is_empty() {
        return Ok(None);
    }
    let sub = pairing.select_rows(&rows);
    let mut cols_ech = dense::Echelon::new(p, sub.rows);
    let mut cols = Vec::new();
    for a in 0..sub.cols {
        if cols_ech.insert(sub.col(a)).is_some() {
            cols.push(a);
        }
    }
    let g = sub.select_cols(&cols);
    let gram_inv = mx::inverse_field(f, &g)
        .ok_or_else(|| Error::Verification("pairing minor is singular".into()))?;
    Ok(Some(Isotypic {
        label,
        mult: rows.len(),
        catalog: n.clone(),
        inj: cols.iter().map(|&a| into[a].clone()).collect(),
        proj: rows.iter().map(|&b| out[b].clone()).collect(),
        gram_inv,
    }))
}

/// All isotypic components of `M`, found by pairing ranks.
///
/// Candidates come from the Kronecker pencil `Y − λX` of the part without
/// free summands (`X = 0` for `λ = ∞`): strings with top larger than
/// socle number `top − r₀`, the others `rad − r₀` (`r₀` the generic rank of
/// the pencil), and bands at `λ` number `r₀ − rank(Y − λX)`. The search
/// stops once the multiplicities account for `dim M`; since each
/// multiplicity is exact, that equality certifies the decomposition.
pub fn isotypic_components(m: &AbarModule) -> Result<Vec<Isotypic>> {
    m.validate()?;
    let f = m.field();
    let p = m.p;
    let mut comps: Vec<Isotypic> = Vec::new();
    if m.d == 0 {
        return Ok(comps);
    }
    let mut found = 0usize;
    let mut tried: Vec<CatalogLabel> = Vec::new();
    let mut attempt = |label: CatalogLabel, comps: &mut Vec<Isotypic>, found: &mut usize| -> Result<usize> {
        if tried.contains(&label) {
            return Ok(0);
        }
        tried.push(label);
        let n = make_catalog(label, p)?;
        Ok(match isotypic(&f, m, &n, label)? {
            Some(c) => {
                let k = c.mult;
                *found += k * label.dim();
                comps.push(c);
                k
            }
            None => 0,
        })
    };
    let (x, y, _, nfree) = kronecker::strip_free(&f, &m.m1, &m.m2)?;
    if nfree > 0 {
        attempt(CatalogLabel::Projective, &mut comps, &mut found)?;
    }
    let d = x.rows;
    if d > 0 {
        let rad = mx::rank_field(&f, &x.hstack(&y));
        let top = d - rad;
        let pencil = |lam: Lambda| match lam {
            Lambda::Finite(c) => mx::sub(&f, &y, &mx::scale(&f, c, &x)),
            Lambda::Infinity => x.clone(),
        };
        let lambdas: Vec<Lambda> = (0..p).map(Lambda::Finite).chain([Lambda::Infinity]).collect();
        let ranks: Vec<usize> = lambdas.iter().map(|&l| dense::rank(p, &pencil(l))).collect();
        let mut r0 = ranks.iter().copied().max().unwrap_or(0);
        if p as usize + 1 <= d / 2 {
            // Every rational point might be an eigenvalue of the regular
            // part: evaluate at a generic point of an extension as well.
            let ext = Gf::larger_than(f, 1 << 16);
            let mut rng = ChaCha8Rng::seed_from_u64(d as u64);
            let lam = ext.random(&mut rng);
            let rows: Vec<Vec<Vec<u32>>> = (0..d)
                .map(|i| {
                    (0..d)
                        .map(|j| {
                            let a = ext.scale(x.get(i, j), &lam);
                            poly::sub(&f, &poly::trim(vec![y.get(i, j)]), &a)
                        })
                        .collect()
                })
                .collect();
            r0 = r0.max(ext.rank(rows));
        }
        let mut want_wide = top.saturating_sub(r0);
        let mut want_tall = rad.saturating_sub(r0);
        let mut j = 0i64;
        while want_wide > 0 && (2 * j as usize) < d {
            let k = attempt(CatalogLabel::string(-j), &mut comps, &mut found)?;
            want_wide = want_wide.saturating_sub(k);
            j += 1;
        }
        let mut j = 1i64;
        while want_tall > 0 && (2 * j as usize) < d {
            let k = attempt(CatalogLabel::string(j), &mut comps, &mut found)?;
            want_tall = want_tall.saturating_sub(k);
            j += 1;
        }
        for (&lam, &rk) in lambdas.iter().zip(&ranks) {
            let mut want = r0.saturating_sub(rk);
            let mut n = 1;
            while want > 0 && 2 * n <= d {
                let k = attempt(CatalogLabel::band(lam, n), &mut comps, &mut found)?;
                want = want.saturating_sub(k);
                n += 1;
            }
        }
        // Exhaustive fallback by dimension.
        if found < m.d {
            for dim in 1..=d {
                if found >= m.d {
                    break;
                }
                let labels: Vec<CatalogLabel> = if dim % 2 == 1 {
                    let h = (dim / 2) as i64;
                    if h == 0 { vec![CatalogLabel::string(0)] } else { vec![CatalogLabel::string(h), CatalogLabel::string(-h)] }
                } else {
                    lambdas.iter().map(|&l| CatalogLabel::band(l, dim / 2)).collect()
                };
                for l in labels {
                    attempt(l, &mut comps, &mut found)?;
                }
            }
        }
    }
    if found != m.d {
        return Err(Error::FieldTooSmall(format!(
            "{} of {} dimensions are not covered by κ-rational catalog modules",
            m.d.saturating_sub(found),
            m.d
        )));
    }
    comps.sort_by_key(|c| c.label);
    Ok(comps)
}

/// Whether `End(M)` is a local algebra with residue field κ.
pub fn is_indecomposable(m: &AbarModule) -> Result<bool> {
    if m.d == 0 {
        return Ok(false);
    }
    let f = m.field();
    let end = hom_space(m, m)?;
    match algebra::locality(&f, &end) {
        Locality::Local => Ok(true),
        Locality::NotLocal => Ok(false),
        Locality::NonSplit => Err(Error::FieldTooSmall("endomorphism ring has a non-split residue field".into())),
    }
}

/// Greedy top generators: standard basis vectors outside `rad M` and the
/// span of those already chosen, in stored order.
pub fn top_generators(f: &Fp, x: &Mat<u32>, y: &Mat<u32>) -> Vec<usize> {
    let d = x.rows;
    let mut sub = Subspace::new(d);
    for j in 0..d {
        sub.insert(f, &x.col(j));
        sub.insert(f, &y.col(j));
    }
    let mut gens = Vec::new();
    for j in 0..d {
        let mut e = vec![0u32; d];
        e[j] = 1;
        if sub.insert(f, &e) {
            gens.push(j);
        }
    }
    gens
}

/// `Ω̃(M)`: the kernel of the projective cover of `M`, with free summands
/// removed.
pub fn syzygy_abar(m: &AbarModule) -> Result<AbarModule> {
    m.validate()?;
    let f = m.field();
    if m.d == 0 {
        return Ok(AbarModule::zero(m.p));
    }
    let gens: Vec<Vec<u32>> = top_generators(&f, &m.m1, &m.m2)
        .into_iter()
        .map(|j| (0..m.d).map(|i| u32::from(i == j)).collect())
        .collect();
    let cover = kronecker::cover_matrix(&f, &m.m1, &m.m2, &gens);
    let k = snf::kernel(&f, &cover)?;
    let (rx, ry) = kronecker::regular(&f, gens.len());
    let kx = kronecker::restrict(&f, &k.coords, &rx, &k.basis);
    let ky = kronecker::restrict(&f, &k.coords, &ry, &k.basis);
    let (x, y, _, _) = kronecker::strip_free(&f, &kx, &ky)?;
    AbarModule::new(m.p, x, y)
}

/// A known almost split sequence of `Ā`-modules: left, middle, right.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbarArSequence {
    pub left: CatalogLabel,
    pub middle: Decomposition,
    pub right: CatalogLabel,
}

/// The almost split sequence ending at a non-projective indecomposable:
///
/// - `0 → M(−1) → Ā ⊕ M(0)² → M(1) → 0`,
/// - `0 → M(n−1) → M(n)² → M(n+1) → 0` for `n ≠ 0`,
/// - `0 → M(λ)_1 → M(λ)_2 → M(λ)_1 → 0`,
/// - `0 → M(λ)_n → M(λ)_{n−1} ⊕ M(λ)_{n+1} → M(λ)_n → 0` for `n > 1`.
pub fn known_ar_sequence(label: CatalogLabel) -> Result<AbarArSequence> {
    use CatalogLabel as L;
    let seq = |left, middle: Vec<CatalogLabel>, right| AbarArSequence {
        left,
        middle: Decomposition::from_labels(middle),
        right,
    };
    Ok(match label {
        L::Projective => {
            return Err(Error::InvalidInput("no almost split sequence ends at a projective".into()))
        }
        L::Band { n: 0, .. } => return Err(Error::InvalidInput("band modules need n >= 1".into())),
        L::String { m: 1 } => seq(L::string(-1), vec![L::Projective, L::string(0), L::string(0)], label),
        L::String { m } => seq(L::string(m - 2), vec![L::string(m - 1); 2], label),
        L::Band { lambda, n: 1 } => seq(label, vec![L::band(lambda, 2)], label),
        L::Band { lambda, n } => seq(label, vec![L::band(lambda, n - 1), L::band(lambda, n + 1)], label),
    })
}
