//! Valued translation quivers, ZQ windows and their cyclic quotients, Cartan
//! matrices, subadditive functions and the Dynkin/Euclidean diagram catalog.
//!
//! Infinite quivers only ever exist as finite windows. Every window vertex
//! carries a `complete` flag: its full neighbourhood is materialized, so the
//! translation-quiver axioms and the subadditivity rows are checked there and
//! nowhere else.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::sync::OnceLock;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A valued arrow `src → dst` with valuation `(d, d')`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Arrow {
    pub src: usize,
    pub dst: usize,
    pub d: u32,
    pub dprime: u32,
}

impl Arrow {
    pub fn new(src: usize, dst: usize, d: u32, dprime: u32) -> Self {
        Self { src, dst, d, dprime }
    }

    pub fn trivial(src: usize, dst: usize) -> Self {
        Self::new(src, dst, 1, 1)
    }

    pub fn is_trivial(&self) -> bool {
        self.d == 1 && self.dprime == 1
    }
}

/// A finite valued quiver: no multiple arrows, nonzero valuations.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValuedQuiver {
    vertices: Vec<String>,
    arrows: Vec<Arrow>,
}

impl ValuedQuiver {
    pub fn new(vertices: Vec<String>, arrows: Vec<Arrow>) -> Result<Self> {
        let n = vertices.len();
        let mut seen = BTreeSet::new();
        for a in &arrows {
            if a.src >= n || a.dst >= n {
                return Err(Error::InvalidInput(format!("arrow {}→{} out of range", a.src, a.dst)));
            }
            if (a.d == 0) != (a.dprime == 0) {
                return Err(Error::InvalidInput(format!("valuation ({}, {}) has exactly one zero", a.d, a.dprime)));
            }
            if a.d == 0 {
                return Err(Error::InvalidInput("arrow with zero valuation".into()));
            }
            if !seen.insert((a.src, a.dst)) {
                return Err(Error::InvalidInput(format!("multiple arrows {}→{}", a.src, a.dst)));
            }
        }
        Ok(Self { vertices, arrows })
    }

    /// Trivially valued quiver from named vertices and index pairs.
    pub fn from_edges(vertices: &[&str], edges: &[(usize, usize)]) -> Result<Self> {
        let vs = vertices.iter().map(|s| s.to_string()).collect();
        Self::new(vs, edges.iter().map(|&(s, t)| Arrow::trivial(s, t)).collect())
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn arrows(&self) -> &[Arrow] {
        &self.arrows
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v == name)
    }

    pub fn arrow(&self, x: usize, y: usize) -> Option<&Arrow> {
        self.arrows.iter().find(|a| a.src == x && a.dst == y)
    }

    /// `x⁺`, sorted.
    pub fn successors(&self, x: usize) -> Vec<usize> {
        let mut v: Vec<usize> = self.arrows.iter().filter(|a| a.src == x).map(|a| a.dst).collect();
        v.sort_unstable();
        v
    }

    /// `x⁻`, sorted.
    pub fn predecessors(&self, x: usize) -> Vec<usize> {
        let mut v: Vec<usize> = self.arrows.iter().filter(|a| a.dst == x).map(|a| a.src).collect();
        v.sort_unstable();
        v
    }

    pub fn has_loops(&self) -> bool {
        self.arrows.iter().any(|a| a.src == a.dst)
    }

    pub fn loops(&self) -> Vec<usize> {
        self.arrows.iter().filter(|a| a.src == a.dst).map(|a| a.src).collect()
    }

    pub fn is_connected(&self) -> bool {
        let n = self.len();
        if n == 0 {
            return true;
        }
        let mut adj = vec![Vec::new(); n];
        for a in &self.arrows {
            adj[a.src].push(a.dst);
            adj[a.dst].push(a.src);
        }
        bfs_order(&adj, 0).len() == n
    }
}

/// A translation quiver window: a valued quiver with a partial injective τ
/// and the set of vertices whose neighbourhoods are complete.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TranslationQuiver {
    quiver: ValuedQuiver,
    tau: Vec<Option<usize>>,
    complete: Vec<bool>,
}

/// Wire form: `{vertices, arrows: [{src, dst, d, dprime}], tau, complete}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuiverJson {
    pub vertices: Vec<String>,
    pub arrows: Vec<Arrow>,
    pub tau: Vec<Option<usize>>,
    #[serde(default)]
    pub complete: Vec<bool>,
}

impl TranslationQuiver {
    pub fn new(quiver: ValuedQuiver, tau: Vec<Option<usize>>, complete: Vec<bool>) -> Result<Self> {
        let n = quiver.len();
        if tau.len() != n || complete.len() != n {
            return Err(Error::InvalidInput("tau and complete must cover every vertex".into()));
        }
        let mut hit = vec![false; n];
        for t in tau.iter().flatten() {
            if *t >= n {
                return Err(Error::InvalidInput(format!("tau target {t} out of range")));
            }
            if std::mem::replace(&mut hit[*t], true) {
                return Err(Error::InvalidInput(format!("tau is not injective at {t}")));
            }
        }
        Ok(Self { quiver, tau, complete })
    }

    pub fn quiver(&self) -> &ValuedQuiver {
        &self.quiver
    }

    pub fn tau(&self, x: usize) -> Option<usize> {
        self.tau[x]
    }

    pub fn taus(&self) -> &[Option<usize>] {
        &self.tau
    }

    pub fn is_complete(&self, x: usize) -> bool {
        self.complete[x]
    }

    pub fn complete(&self) -> &[bool] {
        &self.complete
    }

    /// Least `k ≥ 1` with `τ^k x = x`, if the orbit closes inside the window.
    pub fn tau_period(&self, x: usize) -> Option<usize> {
        let mut y = x;
        for k in 1..=self.quiver.len() {
            y = self.tau[y]?;
            if y == x {
                return Some(k);
            }
        }
        None
    }

    /// Checks `x⁻ = (τx)⁺` and `v(τy → x) = (d'_{xy}, d_{xy})` at every
    /// complete vertex where τ is defined.
    pub fn check_axioms(&self) -> Result<()> {
        let q = &self.quiver;
        for x in 0..q.len() {
            let Some(t) = self.tau[x].filter(|_| self.complete[x]) else { continue };
            if q.predecessors(x) != q.successors(t) {
                return Err(Error::Verification(format!(
                    "{}⁻ ≠ (τ{})⁺",
                    q.vertices[x], q.vertices[x]
                )));
            }
        }
        for a in &q.arrows {
            let (x, y) = (a.src, a.dst);
            let Some(ty) = self.tau[y].filter(|_| self.complete[y]) else { continue };
            match q.arrow(ty, x) {
                Some(b) if b.d == a.dprime && b.dprime == a.d => {}
                _ => {
                    return Err(Error::Verification(format!(
                        "valuation of τ{} → {} does not mirror {} → {}",
                        q.vertices[y], q.vertices[x], q.vertices[x], q.vertices[y]
                    )))
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> QuiverJson {
        QuiverJson {
            vertices: self.quiver.vertices.clone(),
            arrows: self.quiver.arrows.clone(),
            tau: self.tau.clone(),
            complete: self.complete.clone(),
        }
    }

    pub fn from_json(j: QuiverJson) -> Result<Self> {
        let complete = if j.complete.is_empty() { vec![true; j.vertices.len()] } else { j.complete };
        Self::new(ValuedQuiver::new(j.vertices, j.arrows)?, j.tau, complete)
    }

    /// DOT text: solid valued arrows, dashed τ-edges.
    pub fn to_dot(&self) -> String {
        let q = &self.quiver;
        let mut s = String::from("digraph quiver {\n  rankdir=LR;\n");
        for (i, v) in q.vertices.iter().enumerate() {
            let shape = if self.complete[i] { "ellipse" } else { "box" };
            s += &format!("  v{i} [label={}, shape={shape}];\n", dot_quote(v));
        }
        for a in &q.arrows {
            if a.is_trivial() {
                s += &format!("  v{} -> v{};\n", a.src, a.dst);
            } else {
                s += &format!("  v{} -> v{} [label=\"({},{})\"];\n", a.src, a.dst, a.d, a.dprime);
            }
        }
        for (x, t) in self.tau.iter().enumerate() {
            if let Some(t) = t {
                s += &format!("  v{x} -> v{t} [style=dashed, constraint=false];\n");
            }
        }
        s + "}\n"
    }
}

fn dot_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// The trivially valued ray `1 → 2 → … → len`; every vertex but the last is complete.
pub fn a_infinity(len: usize) -> (ValuedQuiver, Vec<bool>) {
    let vs: Vec<String> = (1..=len).map(|i| i.to_string()).collect();
    let arrows = (1..len).map(|i| Arrow::trivial(i - 1, i)).collect();
    let mut complete = vec![true; len];
    if let Some(last) = complete.last_mut() {
        *last = false;
    }
    (ValuedQuiver { vertices: vs, arrows }, complete)
}

/// A finite window `[lo, hi] × Q₀` of `ZQ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZqWindow {
    pub quiver: TranslationQuiver,
    /// `(n, x)` for each window vertex.
    pub coords: Vec<(i64, usize)>,
    pub tree_complete: Vec<bool>,
    pub lo: i64,
    pub hi: i64,
}

impl ZqWindow {
    pub fn index(&self, n: i64, x: usize) -> Option<usize> {
        let m = self.tree_complete.len();
        (self.lo..=self.hi).contains(&n).then(|| (n - self.lo) as usize * m + x)
    }
}

/// Window of `ZQ` over `n ∈ [lo, hi]`: arrows `(n,x) → (n,y)` valued
/// `(d, d')` and `(n,y) → (n+1,x)` valued `(d', d)` for each `x → y`, with
/// `τ(n,x) = (n−1,x)`. `complete` marks the vertices of `Q` whose
/// neighbourhood is fully present in `tree`.
pub fn zq(tree: &ValuedQuiver, complete: &[bool], lo: i64, hi: i64) -> Result<ZqWindow> {
    if tree.has_loops() {
        return Err(Error::HasLoops);
    }
    if complete.len() != tree.len() {
        return Err(Error::InvalidInput("complete flags must cover the tree".into()));
    }
    if hi < lo {
        return Err(Error::InvalidInput("empty window".into()));
    }
    let m = tree.len();
    let idx = |n: i64, x: usize| (n - lo) as usize * m + x;
    let mut vertices = Vec::new();
    let mut coords = Vec::new();
    let mut tau = Vec::new();
    let mut flags = Vec::new();
    for n in lo..=hi {
        for x in 0..m {
            vertices.push(format!("({n},{})", tree.vertices[x]));
            coords.push((n, x));
            tau.push((n > lo).then(|| idx(n - 1, x)));
            flags.push(complete[x] && n > lo && n < hi);
        }
    }
    let mut arrows = Vec::new();
    for n in lo..=hi {
        for a in &tree.arrows {
            arrows.push(Arrow::new(idx(n, a.src), idx(n, a.dst), a.d, a.dprime));
            if n < hi {
                arrows.push(Arrow::new(idx(n, a.dst), idx(n + 1, a.src), a.dprime, a.d));
            }
        }
    }
    let quiver = TranslationQuiver::new(ValuedQuiver::new(vertices, arrows)?, tau, flags)?;
    Ok(ZqWindow { quiver, coords, tree_complete: complete.to_vec(), lo, hi })
}

/// The quotient `ZQ / ⟨τ^k⟩` read off a window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CyclicQuotient {
    pub quiver: TranslationQuiver,
    /// `(n mod k, x)` for each orbit.
    pub coords: Vec<(usize, usize)>,
    pub k: usize,
}

/// Orbit quiver of `⟨τ^k⟩` acting on a ZQ window. Admissibility (every orbit
/// meets `x⁺ ∪ {x}` and `x⁻ ∪ {x}` at most once) is checked at every
/// complete window vertex.
pub fn quotient_cyclic(w: &ZqWindow, k: usize) -> Result<CyclicQuotient> {
    if k == 0 {
        return Err(Error::InvalidInput("k must be at least 1".into()));
    }
    if w.hi - w.lo < k as i64 + 1 {
        return Err(Error::WindowTooSmall(format!(
            "window [{}, {}] cannot decide ⟨τ^{k}⟩-orbits",
            w.lo, w.hi
        )));
    }
    let q = w.quiver.quiver();
    let m = w.tree_complete.len();
    let orbit = |v: usize| {
        let (n, x) = w.coords[v];
        (n.rem_euclid(k as i64) as usize, x)
    };
    for v in 0..q.len() {
        if !w.quiver.is_complete(v) {
            continue;
        }
        for side in [q.successors(v), q.predecessors(v)] {
            let mut seen = BTreeSet::new();
            for u in side.into_iter().chain([v]) {
                if !seen.insert(orbit(u)) {
                    return Err(Error::NotAdmissible(format!(
                        "an orbit of τ^{k} meets the neighbourhood of {} twice",
                        q.vertices[v]
                    )));
                }
            }
        }
    }
    let qidx = |(r, x): (usize, usize)| r * m + x;
    let mut arrows: BTreeMap<(usize, usize), (u32, u32)> = BTreeMap::new();
    for a in q.arrows() {
        let key = (qidx(orbit(a.src)), qidx(orbit(a.dst)));
        if let Some(&old) = arrows.get(&key) {
            if old != (a.d, a.dprime) {
                return Err(Error::NotAdmissible("orbit arrows carry different valuations".into()));
            }
        }
        arrows.insert(key, (a.d, a.dprime));
    }
    let mut vertices = Vec::new();
    let mut coords = Vec::new();
    let mut tau = Vec::new();
    for r in 0..k {
        for x in 0..m {
            vertices.push(format!("({r} mod {k},{x})"));
            coords.push((r, x));
            tau.push(Some(qidx(((r + k - 1) % k, x))));
        }
    }
    let arrows = arrows.into_iter().map(|((s, t), (d, dp))| Arrow::new(s, t, d, dp)).collect();
    let quiver = TranslationQuiver::new(ValuedQuiver::new(vertices, arrows)?, tau, w.tree_complete.repeat(k))?;
    quiver.check_axioms()?;
    Ok(CyclicQuotient { quiver, coords, k })
}

/// A Cartan matrix on a finite index set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CartanMatrix {
    pub index: Vec<String>,
    pub c: Vec<Vec<i64>>,
}

impl CartanMatrix {
    pub fn new(index: Vec<String>, c: Vec<Vec<i64>>) -> Result<Self> {
        let m = Self { index, c };
        m.validate()?;
        Ok(m)
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.index.len();
        if self.c.len() != n || self.c.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput("Cartan matrix must be square over the index set".into()));
        }
        for i in 0..n {
            if self.c[i][i] != 2 {
                return Err(Error::InvalidInput(format!("C({i},{i}) ≠ 2")));
            }
            for j in 0..n {
                if i != j && (self.c[i][j] > 0 || (self.c[i][j] == 0) != (self.c[j][i] == 0)) {
                    return Err(Error::InvalidInput(format!("C({i},{j}) = {} breaks the sign pattern", self.c[i][j])));
                }
            }
        }
        Ok(())
    }

    /// Edge weights `w(u,v) = −C(u,v)` off the diagonal.
    pub fn graph(&self) -> ValuedGraph {
        let n = self.len();
        let w = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 0 } else { (-self.c[i][j]) as u32 }).collect())
            .collect();
        ValuedGraph { w, loops: vec![0; n] }
    }
}

/// `C(x,x) = 2`, `C(x,y) = −d'_{xy}` for `x → y`, `C(x,y) = −d_{yx}` for `y → x`.
pub fn cartan_from_valued(q: &ValuedQuiver) -> Result<CartanMatrix> {
    if q.has_loops() {
        return Err(Error::HasLoops);
    }
    if !q.is_connected() {
        return Err(Error::InvalidInput("quiver is not connected".into()));
    }
    let n = q.len();
    let mut c = vec![vec![0i64; n]; n];
    for (i, row) in c.iter_mut().enumerate() {
        row[i] = 2;
    }
    for a in &q.arrows {
        if q.arrow(a.dst, a.src).is_some() {
            return Err(Error::InvalidInput(format!("arrows in both directions between {} and {}", a.src, a.dst)));
        }
        c[a.src][a.dst] = -(a.dprime as i64);
        c[a.dst][a.src] = -(a.d as i64);
    }
    CartanMatrix::new(q.vertices.clone(), c)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Additivity {
    Additive,
    Subadditive,
    Neither,
}

/// Classification with the first vertex that breaks the stronger property:
/// a negative row for `Neither`, a strictly positive row for `Subadditive`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubadditiveReport {
    pub class: Additivity,
    pub witness: Option<usize>,
}

/// `Σ_y C(x,y) ℓ(y)` for every row.
pub fn row_sums(c: &CartanMatrix, l: &[Rational64]) -> Result<Vec<Rational64>> {
    if l.len() != c.len() {
        return Err(Error::InvalidInput("ℓ must be defined on the whole index set".into()));
    }
    if l.iter().any(|v| *v <= Rational64::from_integer(0)) {
        return Err(Error::InvalidInput("ℓ must be positive".into()));
    }
    Ok(c.c
        .iter()
        .map(|row| row.iter().zip(l).map(|(&a, &v)| v * a).sum())
        .collect())
}

pub fn check_subadditive(c: &CartanMatrix, l: &[Rational64]) -> Result<SubadditiveReport> {
    let all: Vec<usize> = (0..c.len()).collect();
    check_subadditive_at(c, l, &all)
}

/// Subadditivity evaluated on the given rows only (the complete vertices of a window).
pub fn check_subadditive_at(c: &CartanMatrix, l: &[Rational64], rows: &[usize]) -> Result<SubadditiveReport> {
    let sums = row_sums(c, l)?;
    let zero = Rational64::from_integer(0);
    if let Some(&x) = rows.iter().find(|&&x| sums[x] < zero) {
        return Ok(SubadditiveReport { class: Additivity::Neither, witness: Some(x) });
    }
    if let Some(&x) = rows.iter().find(|&&x| sums[x] > zero) {
        return Ok(SubadditiveReport { class: Additivity::Subadditive, witness: Some(x) });
    }
    Ok(SubadditiveReport { class: Additivity::Additive, witness: None })
}

/// Scales a positive rational vector to coprime integers.
fn integral(v: &[Rational64]) -> Vec<Rational64> {
    let den = v.iter().fold(1i64, |acc, x| num_integer::lcm(acc, *x.denom()));
    let ints: Vec<i64> = v.iter().map(|x| (x * den).to_integer()).collect();
    let g = ints.iter().fold(0i64, |acc, &x| num_integer::gcd(acc, x));
    ints.iter().map(|&x| Rational64::from_integer(x / g.max(1))).collect()
}

/// Rational null space of `C` (column vectors with `C v = 0`).
fn null_space(c: &CartanMatrix) -> Vec<Vec<Rational64>> {
    let n = c.len();
    let mut a: Vec<Vec<Rational64>> =
        c.c.iter().map(|r| r.iter().map(|&x| Rational64::from_integer(x)).collect()).collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..n {
        let Some(p) = (row..n).find(|&r| a[r][col] != Rational64::from_integer(0)) else { continue };
        a.swap(row, p);
        let inv = a[row][col].recip();
        for x in a[row].iter_mut() {
            *x *= inv;
        }
        for r in 0..n {
            if r != row && a[r][col] != Rational64::from_integer(0) {
                let f = a[r][col];
                for j in 0..n {
                    let t = a[row][j] * f;
                    a[r][j] -= t;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational64::from_integer(0); n];
            v[f] = Rational64::from_integer(1);
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -a[r][f];
            }
            v
        })
        .collect()
}

/// Solves `C v = b` over ℚ when `C` is nonsingular.
fn solve(c: &CartanMatrix, b: &[Rational64]) -> Option<Vec<Rational64>> {
    let n = c.len();
    let zero = Rational64::from_integer(0);
    let mut a: Vec<Vec<Rational64>> = c
        .c
        .iter()
        .zip(b)
        .map(|(r, &bi)| r.iter().map(|&x| Rational64::from_integer(x)).chain([bi]).collect())
        .collect();
    for col in 0..n {
        let p = (col..n).find(|&r| a[r][col] != zero)?;
        a.swap(col, p);
        let inv = a[col][col].recip();
        for x in a[col].iter_mut() {
            *x *= inv;
        }
        for r in 0..n {
            if r != col && a[r][col] != zero {
                let f = a[r][col];
                for j in 0..=n {
                    let t = a[col][j] * f;
                    a[r][j] -= t;
                }
            }
        }
    }
    Some(a.iter().map(|r| r[n]).collect())
}

/// Searches the rational null space of `C` for a positive additive function.
pub fn find_additive(c: &CartanMatrix) -> Option<Vec<Rational64>> {
    let basis = null_space(c);
    let zero = Rational64::from_integer(0);
    let sum: Vec<Rational64> = (0..c.len()).map(|i| basis.iter().map(|v| v[i]).sum()).collect();
    basis.iter().chain(basis.len().gt(&1).then_some(&sum)).find_map(|v| {
        let sign = if v.iter().all(|x| *x > zero) {
            1
        } else if v.iter().all(|x| *x < zero) {
            -1
        } else {
            return None;
        };
        let pos: Vec<Rational64> = v.iter().map(|x| x * sign).collect();
        let l = integral(&pos);
        (check_subadditive(c, &l).ok()?.class == Additivity::Additive).then_some(l)
    })
}

/// Looks for a positive `ℓ` with `Cℓ` positive in every row (so subadditive,
/// not additive): the solution of `Cℓ = (1, …, 1)` when it is positive.
pub fn find_strict_subadditive(c: &CartanMatrix) -> Option<Vec<Rational64>> {
    let ones = vec![Rational64::from_integer(1); c.len()];
    let v = solve(c, &ones)?;
    if v.iter().any(|x| *x <= Rational64::from_integer(0)) {
        return None;
    }
    let l = integral(&v);
    (check_subadditive(c, &l).ok()?.class == Additivity::Subadditive).then_some(l)
}

/// An undirected graph with edge weights `w(u,v) = −C(u,v) > 0` on edges, plus loop counts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValuedGraph {
    pub w: Vec<Vec<u32>>,
    pub loops: Vec<u32>,
}

impl ValuedGraph {
    pub fn empty(n: usize) -> Self {
        Self { w: vec![vec![0; n]; n], loops: vec![0; n] }
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    /// Adds the edge `u — v` labelled `(a, b)`: `C(u,v) = −b`, `C(v,u) = −a`.
    pub fn add_edge(&mut self, u: usize, v: usize, (a, b): (u32, u32)) {
        self.w[u][v] = b;
        self.w[v][u] = a;
    }

    pub fn neighbours(&self, u: usize) -> Vec<usize> {
        (0..self.len()).filter(|&v| v != u && self.w[u][v] > 0).collect()
    }

    pub fn degree(&self, u: usize) -> usize {
        self.neighbours(u).len()
    }

    pub fn is_connected(&self) -> bool {
        self.is_empty() || bfs_order(&self.adjacency(), 0).len() == self.len()
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        (0..self.len()).map(|u| self.neighbours(u)).collect()
    }

    /// Underlying valued graph of a quiver (loops counted, not weighted).
    pub fn of_quiver(q: &ValuedQuiver) -> Self {
        let mut g = Self::empty(q.len());
        for a in q.arrows() {
            if a.src == a.dst {
                g.loops[a.src] += 1;
            } else {
                g.add_edge(a.src, a.dst, (a.d, a.dprime));
            }
        }
        g
    }

    /// Cartan matrix `2 − w` (loops are not representable).
    pub fn cartan(&self) -> Result<CartanMatrix> {
        if self.loops.iter().any(|&l| l > 0) {
            return Err(Error::HasLoops);
        }
        let n = self.len();
        let c = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 2 } else { -(self.w[i][j] as i64) }).collect())
            .collect();
        CartanMatrix::new((0..n).map(|i| i.to_string()).collect(), c)
    }

    /// Some orientation: `u → v` for `u < v`, valued `(w(v,u), w(u,v))`.
    pub fn to_quiver(&self) -> Result<ValuedQuiver> {
        let n = self.len();
        let mut arrows = Vec::new();
        for u in 0..n {
            for _ in 0..self.loops[u] {
                arrows.push(Arrow::trivial(u, u));
            }
            for v in u + 1..n {
                if self.w[u][v] > 0 {
                    arrows.push(Arrow::new(u, v, self.w[v][u], self.w[u][v]));
                }
            }
        }
        ValuedQuiver::new((0..n).map(|i| i.to_string()).collect(), arrows)
    }

    /// Induced subgraph on `vs` (in that order).
    pub fn induced(&self, vs: &[usize]) -> Self {
        Self {
            w: vs.iter().map(|&u| vs.iter().map(|&v| self.w[u][v]).collect()).collect(),
            loops: vs.iter().map(|&u| self.loops[u]).collect(),
        }
    }

    /// Vertices within distance `r` of `a`, in BFS order.
    fn ball(&self, a: usize, r: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.len()];
        dist[a] = 0;
        let mut out = vec![a];
        let mut q = VecDeque::from([a]);
        while let Some(u) = q.pop_front() {
            if dist[u] == r {
                continue;
            }
            for v in self.neighbours(u) {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    out.push(v);
                    q.push_back(v);
                }
            }
        }
        out
    }
}

fn bfs_order(adj: &[Vec<usize>], start: usize) -> Vec<usize> {
    let mut seen = vec![false; adj.len()];
    seen[start] = true;
    let mut out = vec![start];
    let mut i = 0;
    while i < out.len() {
        for &v in &adj[out[i]] {
            if !std::mem::replace(&mut seen[v], true) {
                out.push(v);
            }
        }
        i += 1;
    }
    out
}

/// Label-preserving isomorphism `g → h`. When `degrees` is given, a vertex
/// `v` of `g` flagged complete must also keep its degree in `full` (the
/// ambient graph `h` was cut from, indexed through `h_to_full`).
fn isomorphic(g: &ValuedGraph, h: &ValuedGraph, constraint: Option<(&[bool], &ValuedGraph, &[usize])>) -> bool {
    let n = g.len();
    if h.len() != n {
        return false;
    }
    let mut gl: Vec<(usize, u32)> = (0..n).map(|u| (g.degree(u), g.loops[u])).collect();
    let mut hl: Vec<(usize, u32)> = (0..n).map(|u| (h.degree(u), h.loops[u])).collect();
    gl.sort_unstable();
    hl.sort_unstable();
    if gl != hl {
        return false;
    }
    if n == 0 {
        return true;
    }
    let order = bfs_order(&g.adjacency(), 0);
    if order.len() != n {
        return false;
    }
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    fn go(
        i: usize,
        order: &[usize],
        g: &ValuedGraph,
        h: &ValuedGraph,
        c: Option<(&[bool], &ValuedGraph, &[usize])>,
        map: &mut [usize],
        used: &mut [bool],
    ) -> bool {
        if i == order.len() {
            return true;
        }
        let v = order[i];
        for cand in 0..h.len() {
            if used[cand] || h.loops[cand] != g.loops[v] || h.degree(cand) != g.degree(v) {
                continue;
            }
            if let Some((complete, full, to_full)) = c {
                if complete[v] && full.degree(to_full[cand]) != g.degree(v) {
                    continue;
                }
            }
            let ok = order[..i].iter().all(|&u| g.w[v][u] == h.w[cand][map[u]] && g.w[u][v] == h.w[map[u]][cand]);
            if !ok {
                continue;
            }
            map[v] = cand;
            used[cand] = true;
            if go(i + 1, order, g, h, c, map, used) {
                return true;
            }
            used[cand] = false;
        }
        map[v] = usize::MAX;
        false
    }
    go(0, &order, g, h, constraint, &mut map, &mut used)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DiagramClass {
    #[serde(rename = "finite")]
    FiniteDynkin,
    #[serde(rename = "infinite")]
    InfiniteDynkin,
    #[serde(rename = "euclidean")]
    Euclidean,
}

/// A catalog diagram, with its parameter for the families.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DiagramLabel {
    pub name: String,
    pub n: Option<usize>,
    pub class: DiagramClass,
}

impl fmt::Display for DiagramLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.n {
            Some(n) => write!(f, "{}_{n}", self.name),
            None => write!(f, "{}", self.name),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Shape {
    Path {
        len: Option<usize>,
        first: Option<(u32, u32)>,
        last: Option<(u32, u32)>,
        #[serde(default)]
        labels: Vec<(usize, u32, u32)>,
        #[serde(default)]
        fork_first: bool,
        #[serde(default)]
        fork_last: bool,
    },
    Cycle,
    Star {
        arms: Vec<usize>,
    },
    Ray {
        first: Option<(u32, u32)>,
        #[serde(default)]
        fork_first: bool,
    },
    Line,
}

#[derive(Clone, Debug, Deserialize)]
struct Entry {
    name: String,
    class: DiagramClass,
    min_n: Option<usize>,
    vertices: Option<String>,
    shape: Shape,
}

#[derive(Deserialize)]
struct CatalogFile {
    diagrams: Vec<Entry>,
}

fn entries() -> &'static [Entry] {
    static CATALOG: OnceLock<Vec<Entry>> = OnceLock::new();
    CATALOG.get_or_init(|| {
        let f: CatalogFile = serde_json::from_str(include_str!("../data/diagrams.json")).expect("bundled diagram catalog");
        f.diagrams
    })
}

/// A path on `m` vertices with optional end labels, inner labels and forks.
fn build_path(
    m: usize,
    first: Option<(u32, u32)>,
    last: Option<(u32, u32)>,
    labels: &[(usize, u32, u32)],
    fork_first: bool,
    fork_last: bool,
) -> ValuedGraph {
    let spine = m - fork_first as usize - fork_last as usize;
    let mut g = ValuedGraph::empty(m);
    for i in 1..spine {
        g.add_edge(i - 1, i, (1, 1));
    }
    if let Some(l) = first {
        g.add_edge(0, 1, l);
    }
    if let Some(l) = last {
        g.add_edge(spine - 2, spine - 1, l);
    }
    for &(e, a, b) in labels {
        g.add_edge(e, e + 1, (a, b));
    }
    let mut extra = spine;
    if fork_first {
        g.add_edge(extra, 1, (1, 1));
        extra += 1;
    }
    if fork_last {
        g.add_edge(spine - 2, extra, (1, 1));
    }
    g
}

impl Entry {
    fn label(&self, n: Option<usize>) -> DiagramLabel {
        DiagramLabel { name: self.name.clone(), n, class: self.class }
    }

    /// Parameter `n` giving `m` vertices, if the family has such a member.
    fn param_for(&self, m: usize) -> Option<Option<usize>> {
        match (&self.vertices, self.min_n) {
            (Some(f), Some(min)) => {
                let n = if f == "n+1" { m.checked_sub(1)? } else { m };
                (n >= min).then_some(Some(n))
            }
            _ => Some(None),
        }
    }

    /// Finite member with `m` vertices.
    fn instance(&self, m: usize) -> Option<ValuedGraph> {
        self.param_for(m)?;
        let g = match &self.shape {
            Shape::Path { len, first, last, labels, fork_first, fork_last } => {
                let size = len.unwrap_or(m);
                if size != m {
                    return None;
                }
                build_path(m, *first, *last, labels, *fork_first, *fork_last)
            }
            Shape::Cycle => {
                let mut g = ValuedGraph::empty(m);
                match m {
                    1 => g.loops[0] = 1,
                    2 => g.add_edge(0, 1, (2, 2)),
                    _ => {
                        for i in 0..m {
                            g.add_edge(i, (i + 1) % m, (1, 1));
                        }
                    }
                }
                g
            }
            Shape::Star { arms } => {
                if 1 + arms.iter().sum::<usize>() != m {
                    return None;
                }
                let mut g = ValuedGraph::empty(m);
                let mut next = 1;
                for &len in arms {
                    let mut prev = 0;
                    for _ in 0..len {
                        g.add_edge(prev, next, (1, 1));
                        prev = next;
                        next += 1;
                    }
                }
                g
            }
            Shape::Ray { .. } | Shape::Line => return None,
        };
        Some(g)
    }

    /// Materializes `m` vertices of an infinite diagram with the anchors to
    /// truncate from: the finite end of a ray, the middle of the line.
    fn materialize(&self, m: usize) -> Option<(ValuedGraph, Vec<usize>)> {
        match &self.shape {
            Shape::Ray { first, fork_first } => {
                let g = build_path(m, *first, None, &[], *fork_first, false);
                let anchors = if *fork_first { vec![0, m - 1] } else { vec![0] };
                Some((g, anchors))
            }
            Shape::Line => Some((build_path(m, None, None, &[], false, false), vec![m / 2])),
            _ => None,
        }
    }
}

/// Every catalog member on `m` vertices.
pub fn catalog_instances(m: usize) -> Vec<(DiagramLabel, ValuedGraph)> {
    entries()
        .iter()
        .filter_map(|e| Some((e.label(e.param_for(m)?), e.instance(m)?)))
        .collect()
}

/// The finite catalog (finite Dynkin and Euclidean) up to `max_vertices`.
pub fn finite_catalog(max_vertices: usize) -> Vec<(DiagramLabel, ValuedGraph)> {
    (1..=max_vertices).flat_map(catalog_instances).collect()
}

/// The infinite Dynkin diagrams of the catalog.
pub fn infinite_labels() -> Vec<DiagramLabel> {
    entries().iter().filter(|e| e.class == DiagramClass::InfiniteDynkin).map(|e| e.label(None)).collect()
}

/// A valued window of an infinite diagram: `len` materialized vertices and
/// its complete flags (everything but the cut ends).
pub fn infinite_window(name: &str, len: usize) -> Option<(ValuedGraph, Vec<bool>)> {
    let e = entries().iter().find(|e| e.name == name && e.class == DiagramClass::InfiniteDynkin)?;
    let (g, _) = e.materialize(len)?;
    let mut complete = vec![true; len];
    match e.shape {
        Shape::Line => {
            complete[0] = false;
            complete[len - 1] = false;
        }
        Shape::Ray { fork_first, .. } => complete[len - 1 - fork_first as usize] = false,
        _ => {}
    }
    Some((g, complete))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum RecognizeMode {
    Exact,
    WindowOfInfinite,
}

/// Catalog diagrams matching `g`.
///
/// `Exact` compares against the finite catalog (labelled edges included).
/// `WindowOfInfinite` returns the infinite diagrams having a ball around an
/// anchor isomorphic to `g`; vertices flagged in `complete` must keep their
/// degree in the infinite diagram.
pub fn recognize_diagram(g: &ValuedGraph, complete: Option<&[bool]>, mode: RecognizeMode) -> Vec<DiagramLabel> {
    let m = g.len();
    if m == 0 || !g.is_connected() {
        return Vec::new();
    }
    let mut out = Vec::new();
    match mode {
        RecognizeMode::Exact => {
            for (label, h) in catalog_instances(m) {
                if isomorphic(g, &h, None) {
                    out.push(label);
                }
            }
        }
        RecognizeMode::WindowOfInfinite => {
            for e in entries().iter().filter(|e| e.class == DiagramClass::InfiniteDynkin) {
                let size = if matches!(e.shape, Shape::Line) { 2 * m + 3 } else { m + 3 };
                let Some((full, anchors)) = e.materialize(size) else { continue };
                let hit = anchors.iter().any(|&a| {
                    (0..m).any(|r| {
                        let ball = full.ball(a, r);
                        ball.len() == m && {
                            let h = full.induced(&ball);
                            isomorphic(g, &h, complete.map(|c| (c, &full, ball.as_slice())))
                        }
                    })
                });
                if hit {
                    out.push(e.label(None));
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HprStatement {
    pub case: u8,
    pub applies: bool,
    pub holds: bool,
}

/// Which statements of the classification apply to `(Q, ℓ)` on the given
/// data, and whether the catalog match agrees with them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct HprReport {
    pub additivity: Additivity,
    pub bounded_on_window: bool,
    pub candidates: Vec<DiagramLabel>,
    pub statements: Vec<HprStatement>,
    pub consistent: bool,
}

/// Evaluates the classification of subadditive functions on `q`.
///
/// With `complete = None` the quiver is the whole graph; otherwise it is a
/// window of an infinite one, subadditivity is read on the complete rows and
/// ℓ counts as unbounded on the window when its maximum sits only on cut
/// vertices.
pub fn hpr_classify(q: &ValuedQuiver, l: &[Rational64], complete: Option<&[bool]>) -> Result<HprReport> {
    let c = cartan_from_valued(q)?;
    let rows: Vec<usize> = (0..q.len()).filter(|&x| complete.is_none_or(|f| f[x])).collect();
    let rep = check_subadditive_at(&c, l, &rows)?;
    if rep.class == Additivity::Neither {
        return Err(Error::InvalidInput(format!(
            "ℓ is not subadditive at {}",
            q.vertices()[rep.witness.unwrap_or(0)]
        )));
    }
    let g = ValuedGraph::of_quiver(q);
    let (candidates, bounded) = match complete {
        None => (recognize_diagram(&g, None, RecognizeMode::Exact), true),
        Some(f) => {
            let max = l.iter().copied().max().unwrap_or_default();
            let bounded = (0..l.len()).any(|x| f[x] && l[x] == max);
            (recognize_diagram(&g, Some(f), RecognizeMode::WindowOfInfinite), bounded)
        }
    };
    let additive = rep.class == Additivity::Additive;
    let all = |p: &dyn Fn(&DiagramLabel) -> bool| !candidates.is_empty() && candidates.iter().all(p);
    let statements = vec![
        HprStatement { case: 1, applies: true, holds: !candidates.is_empty() },
        HprStatement {
            case: 2,
            applies: !additive,
            holds: all(&|d| d.class == DiagramClass::FiniteDynkin || d.name == "A∞"),
        },
        HprStatement { case: 3, applies: additive, holds: all(&|d| d.class != DiagramClass::FiniteDynkin) },
        HprStatement { case: 4, applies: !bounded, holds: all(&|d| d.name == "A∞") },
    ];
    let consistent = statements.iter().all(|s| !s.applies || s.holds);
    Ok(HprReport { additivity: rep.class, bounded_on_window: bounded, candidates, statements, consistent })
}
