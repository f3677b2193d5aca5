//! Finite windows of the stable Auslander–Reiten quiver grown from a lattice
//! by iterated certified almost split sequences, and their classification
//! against the tube shapes `ZA∞/⟨τ^k⟩`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::abar::{self, Decomposition};
use crate::almost_split::{almost_split_ending_at, ArChecks, ArSequence};
use crate::lattice::{is_isomorphic_lattice, tau, BasisTag, Lattice};
use crate::quiver::{
    a_infinity, quotient_cyclic, recognize_diagram, zq, Arrow, DiagramLabel, RecognizeMode, TranslationQuiver,
    ValuedGraph, ValuedQuiver,
};
use crate::{Error, Result};

pub const DEFAULT_PERIOD_BOUND: usize = 6;

/// A vertex of the window: an indecomposable non-projective lattice.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WindowVertex {
    pub id: String,
    pub label: String,
    pub lattice: Lattice,
    pub rank: usize,
    pub d_value: usize,
    pub reduction: String,
    /// Least `k ≤ bound` with `τ^k L ≅ L`; `None` means aperiodic on the window.
    pub tau_period: Option<usize>,
    /// Distance from the start along the ray (τ-orbits share a level).
    pub level: usize,
    /// Number of τ-steps from the start's diagonal; bounds growth along
    /// aperiodic orbits.
    pub tau_steps: usize,
    /// Whether the almost split sequence ending here was computed.
    pub processed: bool,
    /// Middle term has exactly one non-projective indecomposable summand.
    pub is_boundary: Option<bool>,
}

/// One certified almost split sequence, by vertex index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Provenance {
    pub right: usize,
    pub left: usize,
    pub middle: Vec<(usize, usize)>,
    pub projective_summands: usize,
    pub checks: ArChecks,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ComponentWindow {
    pub depth: usize,
    pub seed: u64,
    pub period_bound: usize,
    pub vertices: Vec<WindowVertex>,
    pub arrows: Vec<Arrow>,
    /// `(x, τx)`; from computed sequences, or from `τ` of an unprocessed vertex.
    pub tau_edges: Vec<(usize, usize)>,
    pub provenance: Vec<Provenance>,
    /// The first error met while growing the window; the rest is partial.
    pub failure: Option<String>,
}

struct Builder {
    w: ComponentWindow,
    /// `τL` cached from the period search, per vertex.
    tau_image: Vec<Option<Lattice>>,
}

fn key_hash(rank: usize, reduction: &Decomposition, period: Option<usize>) -> String {
    let mut labels: Vec<String> = reduction.labels().iter().map(|l| l.to_string()).collect();
    labels.sort();
    let period = period.map_or("none".to_string(), |k| k.to_string());
    let digest = Sha256::digest(format!("{rank}|{}|{period}", labels.join(",")).as_bytes());
    digest.iter().take(6).map(|b| format!("{b:02x}")).collect()
}

fn level_letter(level: usize) -> String {
    const LETTERS: &[u8] = b"ZEFGHIJKLMNOPQRSTUVWXY";
    match LETTERS.get(level) {
        Some(&c) => (c as char).to_string(),
        None => format!("L{level}"),
    }
}

/// `(period, τL)`: the period within the bound (if any) and `τL`.
fn period_of(l: &Lattice, bound: usize, seed: u64) -> Result<(Option<usize>, Option<Lattice>)> {
    let mut cur = l.clone();
    let mut first = None;
    for k in 1..=bound {
        cur = tau(&cur)?;
        if first.is_none() {
            first = Some(cur.clone());
        }
        if is_isomorphic_lattice(&cur, l, seed)? {
            return Ok((Some(k), first));
        }
    }
    Ok((None, first))
}

impl Builder {
    fn find_or_insert(&mut self, l: &Lattice, level: usize, tau_steps: usize) -> Result<usize> {
        let seed = self.w.seed;
        let red = abar::decompose(&l.reduce(), seed)?;
        for (i, v) in self.w.vertices.iter().enumerate() {
            if v.rank == l.rank() && v.reduction == red.to_string() && is_isomorphic_lattice(&v.lattice, l, seed)? {
                return Ok(i);
            }
        }
        let (period, image) = period_of(l, self.w.period_bound, seed)?;
        let h = key_hash(l.rank(), &red, period);
        let clash = self.w.vertices.iter().filter(|v| v.id.starts_with(&h)).count();
        let same_level = self.w.vertices.iter().filter(|v| v.level == level).count();
        let label = match l.tag() {
            Some(t @ BasisTag::Heller { .. }) => t.to_string(),
            _ => format!("{}{}", level_letter(level), "'".repeat(same_level)),
        };
        self.w.vertices.push(WindowVertex {
            id: format!("{h}#{clash}"),
            label,
            lattice: l.clone(),
            rank: l.rank(),
            d_value: red.non_projective_count(),
            reduction: red.to_string(),
            tau_period: period,
            level,
            tau_steps,
            processed: false,
            is_boundary: None,
        });
        self.tau_image.push(image);
        Ok(self.w.vertices.len() - 1)
    }

    fn add_arrow(&mut self, src: usize, dst: usize, mult: usize) -> Result<()> {
        let m = mult as u32;
        match self.w.arrows.iter().find(|a| a.src == src && a.dst == dst) {
            Some(a) if (a.d, a.dprime) != (m, m) => Err(Error::Verification(format!(
                "arrow {src}→{dst} seen with valuations ({},{}) and ({m},{m})",
                a.d, a.dprime
            ))),
            Some(_) => Ok(()),
            None => {
                self.w.arrows.push(Arrow::new(src, dst, m, m));
                Ok(())
            }
        }
    }

    fn merge(&mut self, x: usize, seq: ArSequence) -> Result<()> {
        if !seq.certified {
            return Err(Error::Verification(format!(
                "sequence ending at {} is not certified: {:?}",
                self.w.vertices[x].label, seq.checks
            )));
        }
        let (level, steps) = (self.w.vertices[x].level, self.w.vertices[x].tau_steps);
        let left = self.find_or_insert(&seq.left, level, steps + 1)?;
        self.w.tau_edges.push((x, left));
        let mut middle = Vec::new();
        for (m, mult) in seq.non_projective_summands() {
            let idx = self.find_or_insert(m, level + 1, steps)?;
            middle.push((idx, *mult));
        }
        for &(idx, mult) in &middle {
            self.add_arrow(idx, x, mult)?;
            self.add_arrow(left, idx, mult)?;
        }
        let total: usize = middle.iter().map(|&(_, m)| m).sum();
        let v = &mut self.w.vertices[x];
        v.processed = true;
        v.is_boundary = Some(total == 1);
        self.w.provenance.push(Provenance {
            right: x,
            left,
            middle,
            projective_summands: seq.middle_summands.len() - seq.non_projective_summands().count(),
            checks: seq.checks,
        });
        Ok(())
    }

    /// τ-edges for unprocessed vertices whose τ-image is already in the window.
    fn close_tau(&mut self) -> Result<()> {
        let seed = self.w.seed;
        for x in 0..self.w.vertices.len() {
            if self.w.vertices[x].processed || self.w.tau_edges.iter().any(|&(s, _)| s == x) {
                continue;
            }
            let Some(t) = self.tau_image[x].clone() else { continue };
            for y in 0..self.w.vertices.len() {
                let v = &self.w.vertices[y];
                if v.rank == t.rank() && v.tau_period == self.w.vertices[x].tau_period && is_isomorphic_lattice(&v.lattice, &t, seed)? {
                    self.w.tau_edges.push((x, y));
                    break;
                }
            }
        }
        Ok(())
    }
}

/// Breadth-first growth to `depth` levels: every vertex on a level below
/// `depth` and fewer than `depth` τ-steps from the start gets its almost
/// split sequence. Vertices of one round are
/// computed concurrently and merged in index order. Errors end the growth
/// and are recorded in `failure`; the window built so far is returned.
pub fn build_window(z: &Lattice, depth: usize, period_bound: usize, seed: u64) -> Result<ComponentWindow> {
    let mut b = Builder {
        w: ComponentWindow {
            depth,
            seed,
            period_bound,
            vertices: Vec::new(),
            arrows: Vec::new(),
            tau_edges: Vec::new(),
            provenance: Vec::new(),
            failure: None,
        },
        tau_image: Vec::new(),
    };
    b.find_or_insert(z, 0, 0)?;
    loop {
        let todo: Vec<usize> = (0..b.w.vertices.len())
            .filter(|&i| {
                let v = &b.w.vertices[i];
                !v.processed && v.level < depth && v.tau_steps < depth
            })
            .collect();
        if todo.is_empty() {
            break;
        }
        let seqs: Vec<Result<ArSequence>> =
            todo.par_iter().map(|&i| almost_split_ending_at(&b.w.vertices[i].lattice, seed)).collect();
        for (&i, s) in todo.iter().zip(seqs) {
            if let Err(e) = s.and_then(|s| b.merge(i, s)) {
                b.w.failure = Some(format!("at {}: {e}", b.w.vertices[i].label));
                return Ok(b.w);
            }
        }
    }
    if let Err(e) = b.close_tau() {
        b.w.failure = Some(format!("closing τ-orbits: {e}"));
    }
    Ok(b.w)
}

impl ComponentWindow {
    pub fn tau_of(&self, x: usize) -> Option<usize> {
        self.tau_edges.iter().find(|&&(s, _)| s == x).map(|&(_, t)| t)
    }

    pub fn index_of_id(&self, id: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v.id == id)
    }

    /// The window as a translation quiver; processed vertices are complete.
    pub fn to_translation_quiver(&self) -> Result<TranslationQuiver> {
        let names = self.vertices.iter().map(|v| v.label.clone()).collect();
        let q = ValuedQuiver::new(names, self.arrows.clone())?;
        let tau = (0..self.vertices.len()).map(|x| self.tau_of(x)).collect();
        let complete = self.vertices.iter().map(|v| v.processed).collect();
        TranslationQuiver::new(q, tau, complete)
    }

    pub fn to_dot(&self) -> Result<String> {
        Ok(self.to_translation_quiver()?.to_dot())
    }

    /// τ-orbits met by the window: connected components of the τ-edges,
    /// ordered by first member.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let n = self.vertices.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn root(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        for &(x, t) in &self.tau_edges {
            let (a, b) = (root(&mut parent, x), root(&mut parent, t));
            parent[a.max(b)] = a.min(b);
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for x in 0..n {
            let r = root(&mut parent, x);
            groups.entry(r).or_default().push(x);
        }
        groups.into_values().collect()
    }
}

/// True iff the middle term of the sequence ending at `x` has exactly one
/// non-projective indecomposable summand (computed on demand).
pub fn boundary_check(w: &ComponentWindow, x: usize) -> bool {
    match w.vertices.get(x) {
        Some(WindowVertex { is_boundary: Some(b), .. }) => *b,
        Some(v) => almost_split_ending_at(&v.lattice, w.seed)
            .map(|s| s.certified && s.non_projective_summands().map(|(_, m)| m).sum::<usize>() == 1)
            .unwrap_or(false),
        None => false,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShapeKind {
    ZAInfModTau,
    ZAInfModTauSq,
    ZAInfWindow,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ShapeVerdict {
    pub kind: ShapeKind,
    pub period: Option<usize>,
    pub tree: Vec<DiagramLabel>,
    pub boundary_orbits: usize,
    pub evidence: Vec<String>,
    pub problems: Vec<String>,
}

/// Assigns each vertex a coordinate `(n, i)` of `ZA∞` (n taken mod `k`
/// when given), starting from `(0, level)` at vertex 0, and checks that
/// arrows and τ-edges land on arrows and τ-edges of `ZA∞/⟨τ^k⟩`
/// (of `ZA∞` when `k` is `None`), injectively, with the full predecessor
/// set at every processed vertex.
fn embeds(w: &ComponentWindow, k: Option<usize>) -> std::result::Result<(), String> {
    let n = w.vertices.len();
    let norm = |c: i64| k.map_or(c, |k| c.rem_euclid(k as i64));
    let mut coord: Vec<Option<i64>> = vec![None; n];
    coord[0] = Some(0);
    let level = |x: usize| w.vertices[x].level as i64;
    // Constraints as (u, v, offset): coord[v] = coord[u] + offset.
    let mut cons = Vec::new();
    for &(x, t) in &w.tau_edges {
        cons.push((x, t, -1));
    }
    for a in &w.arrows {
        match level(a.dst) - level(a.src) {
            1 => cons.push((a.src, a.dst, 0)),
            -1 => cons.push((a.src, a.dst, 1)),
            _ => return Err(format!("arrow {}→{} skips a level", w.vertices[a.src].label, w.vertices[a.dst].label)),
        }
    }
    let mut changed = true;
    while changed {
        changed = false;
        for &(u, v, off) in &cons {
            match (coord[u], coord[v]) {
                (Some(a), None) => {
                    coord[v] = Some(norm(a + off));
                    changed = true;
                }
                (None, Some(b)) => {
                    coord[u] = Some(norm(b - off));
                    changed = true;
                }
                (Some(a), Some(b)) if norm(a + off) != b => {
                    return Err(format!(
                        "inconsistent coordinates at {} → {}",
                        w.vertices[u].label, w.vertices[v].label
                    ))
                }
                _ => {}
            }
        }
    }
    let coords: Vec<(i64, usize)> = (0..n)
        .map(|x| coord[x].map(|c| (c, w.vertices[x].level)).ok_or_else(|| format!("{} is disconnected", w.vertices[x].label)))
        .collect::<std::result::Result<_, _>>()?;
    let mut seen = BTreeMap::new();
    for (x, c) in coords.iter().enumerate() {
        if let Some(y) = seen.insert(*c, x) {
            return Err(format!("{} and {} share a position", w.vertices[y].label, w.vertices[x].label));
        }
    }
    let max_level = w.vertices.iter().map(|v| v.level).max().unwrap_or(0);
    let (ray, complete) = a_infinity(max_level + 3);
    let span = k.unwrap_or(0) as i64 + 2;
    let lo = coords.iter().map(|c| c.0).min().unwrap_or(0) - span;
    let hi = coords.iter().map(|c| c.0).max().unwrap_or(0) + span;
    let win = zq(&ray, &complete, lo, hi).map_err(|e| e.to_string())?;
    let (target, index): (TranslationQuiver, Box<dyn Fn((i64, usize)) -> usize>) = match k {
        None => {
            let wi = win.clone();
            (win.quiver, Box::new(move |(c, i)| wi.index(c, i).expect("inside window")))
        }
        Some(k) => {
            let q = quotient_cyclic(&win, k).map_err(|e| e.to_string())?;
            let m = ray.len();
            (q.quiver, Box::new(move |(c, i)| c as usize * m + i))
        }
    };
    let tq = target.quiver();
    for a in &w.arrows {
        let (s, t) = (index(coords[a.src]), index(coords[a.dst]));
        match tq.arrow(s, t) {
            Some(b) if (b.d, b.dprime) == (a.d, a.dprime) => {}
            _ => return Err(format!("{} → {} has no image arrow", w.vertices[a.src].label, w.vertices[a.dst].label)),
        }
    }
    for &(x, t) in &w.tau_edges {
        if target.tau(index(coords[x])) != Some(index(coords[t])) {
            return Err(format!("τ-edge at {} does not map to τ", w.vertices[x].label));
        }
    }
    for x in (0..n).filter(|&x| w.vertices[x].processed) {
        let got = w.arrows.iter().filter(|a| a.dst == x).count();
        if got != tq.predecessors(index(coords[x])).len() {
            return Err(format!("{} has {got} predecessors, the model has more", w.vertices[x].label));
        }
    }
    Ok(())
}

/// Classifies a window against `ZA∞/⟨τ⟩`, `ZA∞/⟨τ²⟩` and `ZA∞`.
pub fn classify(w: &ComponentWindow) -> ShapeVerdict {
    let mut problems = Vec::new();
    let mut evidence = Vec::new();
    if w.depth < 2 {
        problems.push(format!("depth {} < 2", w.depth));
    }
    if let Some(f) = &w.failure {
        problems.push(format!("window incomplete: {f}"));
    }
    if w.arrows.iter().any(|a| a.src == a.dst) {
        problems.push("loops observed".into());
    }
    if w.arrows.iter().any(|a| !a.is_trivial()) {
        problems.push("nontrivial valuations".into());
    } else {
        evidence.push("all valuations trivial".into());
    }
    match w.to_translation_quiver().and_then(|t| t.check_axioms()) {
        Ok(()) => evidence.push("translation-quiver axioms hold at processed vertices".into()),
        Err(e) => problems.push(e.to_string()),
    }

    // The orbit graph: one vertex per τ-orbit.
    let orbits = w.orbits();
    let mut orbit_of = vec![0; w.vertices.len()];
    for (o, members) in orbits.iter().enumerate() {
        for &m in members {
            orbit_of[m] = o;
        }
    }
    let mut g = ValuedGraph::empty(orbits.len());
    for a in &w.arrows {
        let (u, v) = (orbit_of[a.src], orbit_of[a.dst]);
        if u == v {
            g.loops[u] = 1;
        } else {
            g.add_edge(u, v, (a.d, a.dprime));
        }
    }
    let complete: Vec<bool> = orbits.iter().map(|m| m.iter().any(|&x| w.vertices[x].processed)).collect();
    let tree = recognize_diagram(&g, Some(&complete), RecognizeMode::WindowOfInfinite);
    if tree.len() == 1 && tree[0].name == "A∞" {
        evidence.push(format!("orbit graph on {} orbits matches A∞ only", orbits.len()));
    } else {
        problems.push(format!("orbit graph matches {:?}", tree.iter().map(|t| t.to_string()).collect::<Vec<_>>()));
    }
    let boundary: Vec<usize> = (0..orbits.len()).filter(|&o| complete[o] && g.degree(o) == 1).collect();
    if boundary == [orbit_of[0]] {
        evidence.push(format!("the orbit of {} is the only boundary orbit", w.vertices[0].label));
    } else {
        problems.push(format!("boundary orbits {boundary:?}"));
    }
    let flagged: Vec<usize> = (0..w.vertices.len()).filter(|&x| w.vertices[x].is_boundary == Some(true)).collect();
    if flagged.iter().any(|&x| orbit_of[x] != orbit_of[0]) || !flagged.contains(&0) {
        problems.push("single-summand middle terms away from the start".into());
    }

    let periods: Vec<Option<usize>> = w.vertices.iter().map(|v| v.tau_period).collect();
    let period = periods.first().copied().flatten();
    if periods.iter().any(|p| *p != period) {
        problems.push(format!("τ-periods not uniform: {periods:?}"));
    }
    for members in &orbits {
        if let Some(p) = period {
            if members.len() != p && members.iter().any(|&x| w.vertices[x].processed) {
                problems.push(format!("orbit of {} has {} members", w.vertices[members[0]].label, members.len()));
            }
        }
    }
    match embeds(w, period) {
        Ok(()) => evidence.push(match period {
            Some(k) => format!("window embeds into ZA∞/⟨τ^{k}⟩"),
            None => "window embeds into ZA∞".into(),
        }),
        Err(e) => problems.push(format!("embedding: {e}")),
    }
    let kind = if !problems.is_empty() {
        ShapeKind::Inconclusive
    } else {
        match period {
            Some(1) => ShapeKind::ZAInfModTau,
            Some(2) => ShapeKind::ZAInfModTauSq,
            None => ShapeKind::ZAInfWindow,
            Some(k) => {
                problems.push(format!("period {k} is outside the expected shapes"));
                ShapeKind::Inconclusive
            }
        }
    };
    ShapeVerdict { kind, period, tree, boundary_orbits: boundary.len(), evidence, problems }
}
