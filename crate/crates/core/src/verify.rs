//! The acceptance driver: every criterion is checked over the grid of
//! Heller lattices `Z_n^λ` and reported as pass/fail with timings.

use std::fmt;
use std::sync::OnceLock;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::abar::{
    decompose, decompose_summands, direct_sum, hom_space, is_isomorphic, make_catalog, syzygy_abar, AbarModule,
    CatalogLabel, Decomposition, Lambda,
};
use crate::almost_split::{almost_split_ending_at, reduced_sequence_splits, stat_d, ArSequence};
use crate::component::{boundary_check, build_window, classify, ShapeKind};
use crate::dvr::matrix::{self as mx, Mat};
use crate::dvr::snf::snf;
use crate::dvr::{Dvr, Fp, Ring};
use crate::lattice::{heller_from_module, heller_periodic, is_indecomposable, is_isomorphic_lattice, tau, Lattice};
use crate::quiver::{
    a_infinity, check_subadditive, find_additive, find_strict_subadditive, finite_catalog, quotient_cyclic, zq,
    Additivity, DiagramClass,
};
use crate::Result;

pub const CRITERIA: usize = 10;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VerifyConfig {
    pub primes: Vec<u32>,
    pub n_max: usize,
    pub depth: usize,
    pub prec: usize,
    pub seed: u64,
    pub period_bound: usize,
    /// Criteria to run (1-based); empty means all.
    pub only: Vec<usize>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            primes: vec![2, 5],
            n_max: 3,
            depth: 3,
            prec: 16,
            seed: 5,
            period_bound: crate::component::DEFAULT_PERIOD_BOUND,
            only: Vec::new(),
        }
    }
}

/// One point `(p, λ, n)` of the grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub p: u32,
    pub lambda: Lambda,
    pub n: usize,
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p={} λ={} n={}", self.p, self.lambda, self.n)
    }
}

/// `λ ∈ {0, 1, 2} ∩ F_p` and `∞`, for `n = 1..=n_max`.
pub fn grid(cfg: &VerifyConfig) -> Vec<Cell> {
    let mut out = Vec::new();
    for &p in &cfg.primes {
        let mut ls: Vec<Lambda> = (0..p.min(3)).map(Lambda::Finite).collect();
        ls.push(Lambda::Infinity);
        for lambda in ls {
            for n in 1..=cfg.n_max {
                out.push(Cell { p, lambda, n });
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CriterionReport {
    pub id: usize,
    pub title: String,
    pub passed: bool,
    pub checked: usize,
    pub failures: Vec<String>,
    pub notes: Vec<String>,
    pub seconds: f64,
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(
            f,
            "{status} {:>2} {} ({} checks, {:.1}s)",
            self.id, self.title, self.checked, self.seconds
        )?;
        for x in &self.failures {
            write!(f, "\n       - {x}")?;
        }
        for x in &self.notes {
            write!(f, "\n       note: {x}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VerifyReport {
    pub config: VerifyConfig,
    pub cells: usize,
    pub criteria: Vec<CriterionReport>,
    pub warnings: Vec<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }
}

/// Per-cell data shared across criteria, computed on first use.
struct Context {
    cfg: VerifyConfig,
    cells: Vec<Cell>,
    lattices: Vec<OnceLock<std::result::Result<Lattice, String>>>,
    sequences: Vec<OnceLock<std::result::Result<ArSequence, String>>>,
}

impl Context {
    fn ring(&self, p: u32) -> Result<Dvr> {
        Dvr::new(p, self.cfg.prec)
    }

    fn z(&self, i: usize) -> std::result::Result<&Lattice, String> {
        let c = self.cells[i];
        self.lattices[i]
            .get_or_init(|| {
                self.ring(c.p)
                    .and_then(|r| heller_periodic(&r, c.lambda, c.n))
                    .map_err(|e| e.to_string())
            })
            .as_ref()
            .map_err(|e| e.clone())
    }

    fn seq(&self, i: usize) -> std::result::Result<&ArSequence, String> {
        self.sequences[i]
            .get_or_init(|| {
                let z = self.z(i)?;
                almost_split_ending_at(z, self.cfg.seed).map_err(|e| e.to_string())
            })
            .as_ref()
            .map_err(|e| e.clone())
    }

    fn field(&self, c: Cell) -> Fp {
        Fp::new(c.p).expect("grid primes are prime")
    }
}

/// Accumulates the outcome of one criterion.
#[derive(Default)]
struct Tally {
    checked: usize,
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Tally {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn run(&mut self, tag: impl fmt::Display, f: impl FnOnce(&mut Tally) -> std::result::Result<(), String>) {
        if let Err(e) = f(self) {
            self.checked += 1;
            self.failures.push(format!("{tag}: error: {e}"));
        }
    }
}

fn err(e: crate::Error) -> String {
    e.to_string()
}

fn band(l: Lambda, n: usize) -> CatalogLabel {
    CatalogLabel::band(l, n)
}

/// `Z_n^λ ⊗ κ`.
pub fn expected_heller_reduction(f: &Fp, l: Lambda, n: usize) -> Decomposition {
    Decomposition::from_labels([band(l, n), band(l.neg(f), n)])
}

/// `E ⊗ κ` for the middle term of the sequence ending at `Z_n^λ`
/// (`M(λ)_0 = 0`).
pub fn expected_middle_reduction(f: &Fp, l: Lambda, n: usize) -> Decomposition {
    let mut labels = vec![band(l.neg(f), n), band(l.neg(f), n), band(l, n + 1)];
    if n > 1 {
        labels.push(band(l, n - 1));
    }
    Decomposition::from_labels(labels)
}

pub fn expected_shape(p: u32, l: Lambda) -> ShapeKind {
    let f = Fp::new(p).expect("prime");
    if l.neg(&f) == l {
        ShapeKind::ZAInfModTau
    } else {
        ShapeKind::ZAInfModTauSq
    }
}

pub fn title(id: usize) -> &'static str {
    match id {
        1 => "reduction identities",
        2 => "indecomposability of Z and E",
        3 => "τ action on Heller lattices",
        4 => "almost split certification",
        5 => "middle-term reductions",
        6 => "component shapes and boundary",
        7 => "splitting modulo ε",
        8 => "D-statistics",
        9 => "Ā-side syzygies and string Heller lattices",
        10 => "property suites",
        _ => "unknown",
    }
}

fn c1(cx: &Context, t: &mut Tally) {
    for (i, &c) in cx.cells.iter().enumerate() {
        t.run(c, |t| {
            let got = decompose(&cx.z(i)?.reduce(), cx.cfg.seed).map_err(err)?;
            let want = expected_heller_reduction(&cx.field(c), c.lambda, c.n);
            t.check(got == want, || format!("{c}: Z⊗κ = {got}, expected {want}"));
            Ok(())
        });
    }
}

fn c2(cx: &Context, t: &mut Tally) {
    for (i, &c) in cx.cells.iter().enumerate() {
        t.run(c, |t| {
            t.check(is_indecomposable(cx.z(i)?).map_err(err)?, || format!("{c}: Z decomposes"));
            let s = cx.seq(i)?;
            t.check(is_indecomposable(&s.middle).map_err(err)?, || format!("{c}: E decomposes"));
            Ok(())
        });
    }
}

fn c3(cx: &Context, t: &mut Tally) {
    for (i, &c) in cx.cells.iter().enumerate() {
        t.run(c, |t| {
            let z = cx.z(i)?;
            let tz = tau(z).map_err(err)?;
            let r = cx.ring(c.p).map_err(err)?;
            let want = heller_periodic(&r, c.lambda.neg(&cx.field(c)), c.n).map_err(err)?;
            let ok = is_isomorphic_lattice(&tz, &want, cx.cfg.seed).map_err(err)?;
            t.check(ok, || format!("{c}: τZ is not Z_n^(−λ)"));
            if c.p == 2 || c.lambda == Lambda::Infinity {
                let fixed = is_isomorphic_lattice(&tz, z, cx.cfg.seed).map_err(err)?;
                t.check(fixed, || format!("{c}: τZ ≇ Z"));
            }
            Ok(())
        });
    }
}

fn c4(cx: &Context, t: &mut Tally) {
    let mut rad = 0;
    for (i, &c) in cx.cells.iter().enumerate() {
        t.run(c, |t| {
            let ch = &cx.seq(i)?.checks;
            t.check(ch.phi_not_factoring, || format!("{c}: Φ factors through the cover"));
            t.check(ch.rad_factoring, || format!("{c}: some Φ∘ρ does not factor"));
            t.check(ch.kernel_indecomposable, || format!("{c}: kernel of the cover decomposes"));
            t.check(ch.exact, || format!("{c}: sequence is not exact"));
            rad += ch.rad_elements_checked;
            Ok(())
        });
    }
    t.notes.push(format!("{rad} radical elements checked"));
}

fn c5(cx: &Context, t: &mut Tally) {
    for (i, &c) in cx.cells.iter().enumerate() {
        t.run(c, |t| {
            let s = cx.seq(i)?;
            let got = decompose(&s.middle.reduce(), cx.cfg.seed).map_err(err)?;
            let want = expected_middle_reduction(&cx.field(c), c.lambda, c.n);
            t.check(got == want, || format!("{c}: E⊗κ = {got}, expected {want}"));
            t.check(s.middle.rank() == 8 * c.n, || format!("{c}: rank E = {}", s.middle.rank()));
            Ok(())
        });
    }
}

fn c6(cx: &Context, t: &mut Tally) {
    for (i, &c) in cx.cells.iter().enumerate() {
        t.run(c, |t| {
            let w = build_window(cx.z(i)?, cx.cfg.depth, cx.cfg.period_bound, cx.cfg.seed).map_err(err)?;
            let v = classify(&w);
            let want = expected_shape(c.p, c.lambda);
            t.check(v.kind == want, || format!("{c}: verdict {:?}, expected {want:?}; {:?}", v.kind, v.problems));
            t.check(boundary_check(&w, 0), || format!("{c}: Z is not on the boundary"));
            Ok(())
        });
    }
}

fn c7(cx: &Context, t: &mut Tally) {
    for (i, &c) in cx.cells.iter().enumerate() {
        t.run(c, |t| {
            let s = cx.seq(i)?;
            let z_splits = reduced_sequence_splits(&s.projection).map_err(err)?;
            t.check(!z_splits, || format!("{c}: reduced sequence ending at Z splits"));
            let e = almost_split_ending_at(&s.middle, cx.cfg.seed).map_err(err)?;
            t.check(e.certified, || format!("{c}: sequence ending at E is not certified"));
            let e_splits = reduced_sequence_splits(&e.projection).map_err(err)?;
            t.check(e_splits, || format!("{c}: reduced sequence ending at E does not split"));
            Ok(())
        });
    }
}

fn c8(cx: &Context, t: &mut Tally) {
    let mut weak = true;
    for (i, &c) in cx.cells.iter().enumerate() {
        t.run(c, |t| {
            let dz = stat_d(cx.z(i)?, cx.cfg.seed).map_err(err)?;
            let de = stat_d(&cx.seq(i)?.middle, cx.cfg.seed).map_err(err)?;
            t.check(dz == 2, || format!("{c}: D(Z) = {dz}"));
            t.check(de == 4 && 2 * dz == de, || {
                let why = if c.n == 1 { " (M(λ)_0 = 0 leaves three summands)" } else { "" };
                format!("{c}: D(E) = {de}, 2·D(Z) = {}{why}", 2 * dz)
            });
            weak &= 2 * dz >= de && de == if c.n == 1 { 3 } else { 4 };
            Ok(())
        });
    }
    if !cx.cells.is_empty() {
        t.notes.push(format!(
            "2·D(Z) ≥ D(E) with D(E) = 3 at n = 1 and 4 otherwise: {}",
            if weak { "holds on every cell" } else { "violated" }
        ));
    }
}

fn c9(cx: &Context, t: &mut Tally) {
    let seed = cx.cfg.seed;
    for &c in &cx.cells {
        t.run(c, |t| {
            let m = make_catalog(band(c.lambda, c.n), c.p).map_err(err)?;
            let want = make_catalog(band(c.lambda.neg(&cx.field(c)), c.n), c.p).map_err(err)?;
            let ok = is_isomorphic(&syzygy_abar(&m).map_err(err)?, &want, seed).map_err(err)?;
            t.check(ok, || format!("{c}: Ω̃(M(λ)_n) ≇ M(−λ)_n"));
            Ok(())
        });
    }
    for &p in &cx.cfg.primes {
        for m in 0..=2i64 {
            t.run(format_args!("p={p} m={m}"), |t| {
                let r = cx.ring(p).map_err(err)?;
                let zm = heller_from_module(&make_catalog(CatalogLabel::string(m), p).map_err(err)?, &r, seed).map_err(err)?;
                t.check(zm.len() == 1, || format!("p={p} m={m}: {} Heller summands", zm.len()));
                let z = &zm[0];
                t.check(is_indecomposable(z).map_err(err)?, || format!("p={p} m={m}: Z_m decomposes"));
                let red = decompose(&z.reduce(), seed).map_err(err)?;
                let want = Decomposition::from_labels([CatalogLabel::string(m - 1), CatalogLabel::string(m)]);
                t.check(red == want, || format!("p={p} m={m}: Z_m⊗κ = {red}"));
                let prev = heller_from_module(&make_catalog(CatalogLabel::string(m - 1), p).map_err(err)?, &r, seed)
                    .map_err(err)?;
                let ok = is_isomorphic_lattice(&tau(z).map_err(err)?, &prev[0], seed).map_err(err)?;
                t.check(ok, || format!("p={p} m={m}: τZ_m ≇ Z_(m−1)"));
                Ok(())
            });
        }
    }
}

/// All catalog labels of dimension at most `dmax` over `F_p`.
pub fn catalog_labels(p: u32, dmax: usize) -> Vec<CatalogLabel> {
    let mut out = vec![CatalogLabel::Projective];
    for m in -(dmax as i64)..=(dmax as i64) {
        out.push(CatalogLabel::string(m));
    }
    for n in 1..=dmax / 2 {
        for l in 0..p {
            out.push(band(Lambda::Finite(l), n));
        }
        out.push(band(Lambda::Infinity, n));
    }
    out.retain(|l| l.dim() <= dmax);
    out
}

/// `|Hom(M, N)|` by enumerating all matrices over `F_2`.
fn brute_hom_count_f2(m: &AbarModule, n: &AbarModule) -> usize {
    let f = Fp::new(2).expect("prime");
    let (r, c) = (n.d, m.d);
    (0u64..1 << (r * c))
        .filter(|bits| {
            let h = Mat::from_fn(r, c, |i, j| ((bits >> (i * c + j)) & 1) as u32);
            mx::mul(&f, &h, &m.m1) == mx::mul(&f, &n.m1, &h) && mx::mul(&f, &h, &m.m2) == mx::mul(&f, &n.m2, &h)
        })
        .count()
}

fn random_invertible(f: &Fp, d: usize, rng: &mut ChaCha8Rng) -> Mat<u32> {
    loop {
        let m = Mat::from_fn(d, d, |_, _| rng.gen_range(0..f.p()));
        if mx::det_field(f, &m) != 0 {
            return m;
        }
    }
}

fn snf_suite(seed: u64, t: &mut Tally) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = Dvr::new(5, 16).expect("valid ring");
    for k in 0..200 {
        let (m, n) = (rng.gen_range(1..=8), rng.gen_range(1..=8));
        let a = Mat::from_fn(m, n, |_, _| {
            let shift = rng.gen_range(0..4);
            let c: Vec<i64> = (0..16).map(|_| rng.gen_range(0..5)).collect();
            if shift == 3 {
                r.zero()
            } else {
                r.shift_up(r.elem(&c), shift)
            }
        });
        t.run(format_args!("snf #{k}"), |t| {
            let s = snf(&r, &a).map_err(err)?;
            let d = mx::mul(&r, &mx::mul(&r, &s.u, &a), &s.v);
            let diag = (0..m).all(|i| {
                (0..n).all(|j| {
                    let want = if i == j && i < s.rank { r.eps_pow(s.pivots[i]) } else { r.zero() };
                    d.get(i, j) == want
                })
            });
            let units = r.is_unit(mx::det_dvr(&r, &s.u)) && r.is_unit(mx::det_dvr(&r, &s.v));
            t.check(diag && units, || format!("snf #{k}: U·A·V is not the normal form"));
            Ok(())
        });
    }
}

fn decomposition_suite(seed: u64, t: &mut Tally) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    for k in 0..100 {
        let p = [2u32, 3, 5][rng.gen_range(0..3)];
        let f = Fp::new(p).expect("prime");
        let all = catalog_labels(p, 6);
        let labels: Vec<CatalogLabel> = (0..rng.gen_range(1..=4)).map(|_| all[rng.gen_range(0..all.len())]).collect();
        let noise = rng.gen::<u64>();
        let tag = format!("sum #{k} (p={p}, {})", Decomposition::from_labels(labels.iter().copied()));
        t.run(tag, |t| {
            let mods: Vec<AbarModule> = labels.iter().map(|&l| make_catalog(l, p)).collect::<Result<_>>().map_err(err)?;
            let refs: Vec<&AbarModule> = mods.iter().collect();
            let sum = direct_sum(p, &refs);
            let mut nrng = ChaCha8Rng::seed_from_u64(noise);
            let m = sum.conjugate(&random_invertible(&f, sum.d, &mut nrng)).map_err(err)?;
            let parts = decompose_summands(&m, seed).map_err(err)?;
            let got = Decomposition::from_labels(parts.iter().filter_map(|s| s.label));
            let want = Decomposition::from_labels(labels.iter().copied());
            t.check(got == want && parts.len() == labels.len(), || format!("sum #{k} (p={p}): {got} vs {want}"));
            let prefs: Vec<&AbarModule> = parts.iter().collect();
            let ok = is_isomorphic(&direct_sum(p, &prefs), &m, seed).map_err(err)?;
            t.check(ok, || format!("sum #{k}: summands do not reassemble"));
            Ok(())
        });
    }
}

fn hom_suite(t: &mut Tally) {
    let labels = catalog_labels(2, 3);
    for &a in &labels {
        for &b in &labels {
            t.run(format_args!("Hom({a}, {b})"), |t| {
                let (m, n) = (make_catalog(a, 2).map_err(err)?, make_catalog(b, 2).map_err(err)?);
                let dim = hom_space(&m, &n).map_err(err)?.len();
                let count = brute_hom_count_f2(&m, &n);
                t.check(1usize << dim == count, || format!("Hom({a}, {b}): dim {dim}, {count} maps"));
                Ok(())
            });
        }
    }
}

fn quiver_suite(t: &mut Tally) {
    for len in 1..=5 {
        let (ray, complete) = a_infinity(len);
        t.run(format_args!("ZA_{len}"), |t| {
            let w = zq(&ray, &complete, -4, 4).map_err(err)?;
            t.check(w.quiver.check_axioms().is_ok(), || format!("ZA window (len {len}) fails the axioms"));
            for k in 1..=3 {
                let q = quotient_cyclic(&w, k).map_err(err)?;
                let ok = q.quiver.check_axioms().is_ok()
                    && (0..q.quiver.quiver().len()).all(|x| q.quiver.tau_period(x) == Some(k));
                t.check(ok, || format!("quotient by τ^{k} (len {len}) fails"));
            }
            Ok(())
        });
    }
}

fn catalog_suite(t: &mut Tally) {
    for (label, g) in finite_catalog(12) {
        let Ok(c) = g.cartan() else {
            // The single loop has no Cartan matrix.
            continue;
        };
        t.run(&label, |t| {
            c.validate().map_err(err)?;
            match label.class {
                DiagramClass::Euclidean => {
                    let ok = match find_additive(&c) {
                        Some(l) => check_subadditive(&c, &l).map_err(err)?.class == Additivity::Additive,
                        None => false,
                    };
                    t.check(ok, || format!("{label}: no additive function"));
                }
                DiagramClass::FiniteDynkin => {
                    let ok = match find_strict_subadditive(&c) {
                        Some(l) => check_subadditive(&c, &l).map_err(err)?.class == Additivity::Subadditive,
                        None => false,
                    };
                    t.check(ok && find_additive(&c).is_none(), || format!("{label}: no strictly subadditive function"));
                }
                DiagramClass::InfiniteDynkin => {}
            }
            Ok(())
        });
    }
}

fn c10(cx: &Context, t: &mut Tally) {
    let seed = cx.cfg.seed;
    let mut step = |name: &str, f: &dyn Fn(&mut Tally)| {
        let before = t.checked;
        f(t);
        t.notes.push(format!("{name}: {} checks", t.checked - before));
    };
    step("Smith normal form", &|t| snf_suite(seed, t));
    step("Ā decomposition", &|t| decomposition_suite(seed, t));
    step("Hom over F_2", &hom_suite);
    step("translation quivers", &quiver_suite);
    step("Cartan catalog", &catalog_suite);
}

/// Runs the selected criteria over the configured grid.
pub fn verify_paper(cfg: &VerifyConfig) -> VerifyReport {
    let cells = grid(cfg);
    let mut warnings = Vec::new();
    if cells.is_empty() {
        warnings.push("the grid is empty; grid criteria pass vacuously".to_string());
    }
    let cx = Context {
        cfg: cfg.clone(),
        lattices: cells.iter().map(|_| OnceLock::new()).collect(),
        sequences: cells.iter().map(|_| OnceLock::new()).collect(),
        cells,
    };
    let run: [fn(&Context, &mut Tally); CRITERIA] = [c1, c2, c3, c4, c5, c6, c7, c8, c9, c10];
    let mut criteria = Vec::new();
    for (k, f) in run.iter().enumerate() {
        let id = k + 1;
        if !cfg.only.is_empty() && !cfg.only.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let mut t = Tally::default();
        f(&cx, &mut t);
        criteria.push(CriterionReport {
            id,
            title: title(id).to_string(),
            passed: t.failures.is_empty(),
            checked: t.checked,
            failures: t.failures,
            notes: t.notes,
            seconds: start.elapsed().as_secs_f64(),
        });
    }
    VerifyReport {
        config: cfg.clone(),
        cells: cx.cells.len(),
        criteria,
        warnings,
    }
}
