use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use ar_lattice::abar::{decompose, Lambda};
use ar_lattice::almost_split::almost_split_ending_at;
use ar_lattice::component::{build_window, classify, ComponentWindow, ShapeVerdict, DEFAULT_PERIOD_BOUND};
use ar_lattice::dvr::Dvr;
use ar_lattice::lattice::{heller_periodic, is_isomorphic_lattice, tau, Lattice};
use ar_lattice::quiver::{a_infinity, quotient_cyclic, recognize_diagram, zq, RecognizeMode, TranslationQuiver, ValuedGraph};
use ar_lattice::verify::{verify_paper, VerifyConfig};

#[derive(Parser, Debug)]
#[command(name = "ar-lattice", version, about = "Almost split sequences and Heller components over the symmetric Kronecker order")]
struct Cli {
    #[command(flatten)]
    opts: Opts,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug)]
struct Opts {
    /// Residue characteristic; `verify-paper` accepts a comma-separated list.
    #[arg(long = "p", global = true, value_delimiter = ',')]
    p: Vec<u32>,
    /// Precision N of O = F_p[ε]/ε^N.
    #[arg(long, global = true, default_value_t = 16)]
    prec: usize,
    #[arg(long, global = true, env = "AR_LATTICE_SEED", default_value_t = 5)]
    seed: u64,
    /// Residue in F_p or `inf`.
    #[arg(long, global = true)]
    lambda: Option<String>,
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true, default_value_t = 3)]
    depth: usize,
    #[arg(long, global = true, default_value_t = DEFAULT_PERIOD_BOUND)]
    period_bound: usize,
    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Dot,
    Text,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Build the Heller lattice Z_n^λ.
    Heller,
    /// Decompose L ⊗ κ into catalog modules.
    Reduce { lattice: PathBuf },
    /// Compute τL = Ω²L.
    Tau { lattice: PathBuf },
    /// Test two lattices for isomorphism.
    Iso { a: PathBuf, b: PathBuf },
    /// Certified almost split sequence ending at a lattice.
    Ass { lattice: PathBuf },
    /// Grow and classify a window of the component of a lattice.
    Component { lattice: PathBuf },
    /// Emit ZA_m windows and their cyclic quotients, or inspect a quiver file.
    Quiver {
        /// Translation quiver JSON to check and recognize.
        input: Option<PathBuf>,
        /// Number of vertices of the A_m tree.
        #[arg(long, default_value_t = 4)]
        len: usize,
        #[arg(long, default_value_t = -3, allow_negative_numbers = true)]
        lo: i64,
        #[arg(long, default_value_t = 3, allow_negative_numbers = true)]
        hi: i64,
        /// Quotient by ⟨τ^k⟩.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Run the acceptance criteria over the grid.
    VerifyPaper {
        #[arg(long, default_value_t = 3)]
        nmax: usize,
        /// Run only these criteria (comma-separated ids).
        #[arg(long, value_delimiter = ',')]
        only: Vec<usize>,
    },
}

/// Bad arguments or unreadable input: exit code 2.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct Usage(String);

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

/// Any uncertified or failed verification step: exit code 1.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct Failed(String);

fn warn(msg: &str) {
    eprintln!("warning: {msg}");
}

fn single_p(opts: &Opts) -> Result<u32> {
    match opts.p.as_slice() {
        [] => Ok(5),
        [p] => Ok(*p),
        _ => Err(usage("this command takes a single --p")),
    }
}

fn ring(p: u32, prec: usize) -> Result<Dvr> {
    Dvr::new(p, prec).map_err(|e| usage(e.to_string()))
}

fn read_lattice(path: &Path) -> Result<Lattice> {
    let s = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&s).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn emit(opts: &Opts, body: &str) -> Result<()> {
    match &opts.out {
        Some(path) => std::fs::write(path, format!("{body}\n")).with_context(|| format!("writing {}", path.display())),
        None => match writeln!(std::io::stdout().lock(), "{body}") {
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
            r => Ok(r?),
        },
    }
}

fn json<T: serde::Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)?)
}

fn format_or(opts: &Opts, default: Format, allowed: &[Format]) -> Result<Format> {
    let f = opts.format.unwrap_or(default);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        Err(usage(format!("format {f:?} is not available for this command")))
    }
}

fn heller(opts: &Opts) -> Result<()> {
    let p = single_p(opts)?;
    let r = ring(p, opts.prec)?;
    let raw = opts.lambda.as_deref().ok_or_else(|| usage("--lambda is required"))?;
    let (lambda, reduced) = Lambda::parse(raw, &r.field()).map_err(|e| usage(e.to_string()))?;
    if reduced {
        warn(&format!("lambda {raw} reduced modulo {p} to {lambda}"));
    }
    let n = opts.n.ok_or_else(|| usage("--n is required"))?;
    if n == 0 {
        return Err(usage("--n must be positive"));
    }
    let z = heller_periodic(&r, lambda, n)?;
    match format_or(opts, Format::Json, &[Format::Json, Format::Text])? {
        Format::Text => {
            let tag = z.tag().map_or(String::new(), |t| t.to_string());
            emit(opts, &format!("{tag}: rank {} over p={p}, N={}", z.rank(), opts.prec))
        }
        _ => emit(opts, &json(&z)?),
    }
}

fn reduce(opts: &Opts, path: &Path) -> Result<()> {
    let l = read_lattice(path)?;
    let d = decompose(&l.reduce(), opts.seed)?;
    match format_or(opts, Format::Text, &[Format::Json, Format::Text])? {
        Format::Json => emit(opts, &json(&d)?),
        _ => emit(opts, &d.to_string()),
    }
}

fn tau_cmd(opts: &Opts, path: &Path) -> Result<()> {
    let l = read_lattice(path)?;
    let t = tau(&l)?;
    match format_or(opts, Format::Json, &[Format::Json, Format::Text])? {
        Format::Text => emit(opts, &format!("τL: rank {}, reduction {}", t.rank(), decompose(&t.reduce(), opts.seed)?)),
        _ => emit(opts, &json(&t)?),
    }
}

fn iso(opts: &Opts, a: &Path, b: &Path) -> Result<()> {
    let (x, y) = (read_lattice(a)?, read_lattice(b)?);
    if x.p() != y.p() {
        return Err(usage("lattices live over different residue fields"));
    }
    let same = is_isomorphic_lattice(&x, &y, opts.seed)?;
    match format_or(opts, Format::Text, &[Format::Json, Format::Text])? {
        Format::Json => emit(opts, &json(&serde_json::json!({ "isomorphic": same }))?),
        _ => emit(opts, &format!("isomorphic: {same}")),
    }
}

fn mark(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}

fn ass(opts: &Opts, path: &Path) -> Result<()> {
    let l = read_lattice(path)?;
    let s = almost_split_ending_at(&l, opts.seed)?;
    match format_or(opts, Format::Text, &[Format::Json, Format::Text])? {
        Format::Json => emit(opts, &json(&s.to_json())?)?,
        _ => {
            let c = &s.checks;
            let mut out = vec![
                format!("(i)   φ does not factor through the projective cover: {}", mark(c.phi_not_factoring)),
                format!(
                    "(ii)  φ∘ρ factors for every radical element ({} checked): {}",
                    c.rad_elements_checked,
                    mark(c.rad_factoring)
                ),
                format!("(iii) the kernel of the cover is indecomposable: {}", mark(c.kernel_indecomposable)),
                format!("exactness: {}", mark(c.exact)),
                format!("left:   rank {}, {}", s.left.rank(), decompose(&s.left.reduce(), opts.seed)?),
            ];
            for (m, mult) in &s.middle_summands {
                out.push(format!("middle: {mult} × rank {}, {}", m.rank(), decompose(&m.reduce(), opts.seed)?));
            }
            out.push(format!("right:  rank {}, {}", s.right.rank(), decompose(&s.right.reduce(), opts.seed)?));
            out.push(format!("certified: {}", s.certified));
            emit(opts, &out.join("\n"))?;
        }
    }
    if s.certified {
        Ok(())
    } else {
        Err(Failed("the sequence is not certified".into()).into())
    }
}

fn window_text(w: &ComponentWindow, v: &ShapeVerdict) -> String {
    let mut out = Vec::new();
    for (i, x) in w.vertices.iter().enumerate() {
        out.push(format!(
            "{i:>3} {:<16} {:<14} level {} rank {:>3} D {} period {} boundary {} τ→ {}",
            x.id,
            x.label,
            x.level,
            x.rank,
            x.d_value,
            x.tau_period.map_or("-".into(), |k| k.to_string()),
            x.is_boundary.map_or("?".into(), |b| b.to_string()),
            w.tau_of(i).map_or("-".into(), |t| w.vertices[t].label.clone()),
        ));
        out.push(format!("      {}", x.reduction));
    }
    for a in &w.arrows {
        out.push(format!("{} → {} ({},{})", w.vertices[a.src].label, w.vertices[a.dst].label, a.d, a.dprime));
    }
    if let Some(f) = &w.failure {
        out.push(format!("failure: {f}"));
    }
    out.push(format!("verdict: {:?}", v.kind));
    out.extend(v.evidence.iter().map(|e| format!("  evidence: {e}")));
    out.extend(v.problems.iter().map(|e| format!("  problem: {e}")));
    out.join("\n")
}

fn component(opts: &Opts, path: &Path) -> Result<()> {
    let l = read_lattice(path)?;
    if opts.depth == 0 {
        return Err(usage("--depth must be positive"));
    }
    let w = build_window(&l, opts.depth, opts.period_bound, opts.seed)?;
    let v = classify(&w);
    match format_or(opts, Format::Text, &[Format::Json, Format::Dot, Format::Text])? {
        Format::Json => emit(opts, &json(&serde_json::json!({ "window": w, "verdict": v }))?)?,
        Format::Dot => emit(opts, &w.to_dot()?)?,
        Format::Text => emit(opts, &window_text(&w, &v))?,
    }
    match &w.failure {
        Some(f) => Err(Failed(format!("window incomplete: {f}")).into()),
        None => Ok(()),
    }
}

fn quiver_report(q: &TranslationQuiver) -> String {
    let g = ValuedGraph::of_quiver(q.quiver());
    let exact = recognize_diagram(&g, None, RecognizeMode::Exact);
    let names = |ls: &[ar_lattice::quiver::DiagramLabel]| ls.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(", ");
    let periods: Vec<String> =
        (0..q.quiver().len()).map(|x| q.tau_period(x).map_or("-".into(), |k| k.to_string())).collect();
    format!(
        "vertices: {}\narrows: {}\naxioms: {}\nτ-periods: {}\nunderlying diagram: {}",
        q.quiver().len(),
        q.quiver().arrows().len(),
        q.check_axioms().map_or_else(|e| e.to_string(), |_| "ok".into()),
        periods.join(" "),
        if exact.is_empty() { "none".into() } else { names(&exact) }
    )
}

fn quiver(opts: &Opts, input: Option<&Path>, len: usize, lo: i64, hi: i64, k: Option<usize>) -> Result<()> {
    let q = match input {
        Some(path) => {
            let s = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            let j = serde_json::from_str(&s).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            TranslationQuiver::from_json(j).map_err(|e| usage(e.to_string()))?
        }
        None => {
            if len == 0 || lo > hi {
                return Err(usage("need --len ≥ 1 and --lo ≤ --hi"));
            }
            let (tree, complete) = a_infinity(len);
            let w = zq(&tree, &complete, lo, hi)?;
            match k {
                Some(k) => quotient_cyclic(&w, k).map_err(|e| usage(e.to_string()))?.quiver,
                None => w.quiver,
            }
        }
    };
    let report = match format_or(opts, Format::Text, &[Format::Json, Format::Dot, Format::Text])? {
        Format::Json => json(&q.to_json())?,
        Format::Dot => q.to_dot(),
        Format::Text => quiver_report(&q),
    };
    emit(opts, &report)?;
    if input.is_some() {
        q.check_axioms().map_err(|e| Failed(e.to_string()))?;
    }
    Ok(())
}

fn verify(opts: &Opts, nmax: usize, only: &[usize]) -> Result<()> {
    let primes = if opts.p.is_empty() { vec![2, 5] } else { opts.p.clone() };
    for &p in &primes {
        ring(p, opts.prec)?;
    }
    if let Some(bad) = only.iter().find(|&&k| k == 0 || k > ar_lattice::verify::CRITERIA) {
        return Err(usage(format!("no criterion {bad}")));
    }
    let cfg = VerifyConfig {
        primes,
        n_max: nmax,
        depth: opts.depth,
        prec: opts.prec,
        seed: opts.seed,
        period_bound: opts.period_bound,
        only: only.to_vec(),
    };
    let report = verify_paper(&cfg);
    for w in &report.warnings {
        warn(w);
    }
    match format_or(opts, Format::Text, &[Format::Json, Format::Text])? {
        Format::Json => emit(opts, &json(&report)?)?,
        _ => {
            let mut lines: Vec<String> = report.criteria.iter().map(|c| c.to_string()).collect();
            let passed = report.criteria.iter().filter(|c| c.passed).count();
            lines.push(format!("{passed}/{} criteria pass over {} cells", report.criteria.len(), report.cells));
            emit(opts, &lines.join("\n"))?;
        }
    }
    if report.passed() {
        Ok(())
    } else {
        Err(Failed("some criteria failed".into()).into())
    }
}

fn run(cli: Cli) -> Result<()> {
    let o = &cli.opts;
    match &cli.cmd {
        Cmd::Heller => heller(o),
        Cmd::Reduce { lattice } => reduce(o, lattice),
        Cmd::Tau { lattice } => tau_cmd(o, lattice),
        Cmd::Iso { a, b } => iso(o, a, b),
        Cmd::Ass { lattice } => ass(o, lattice),
        Cmd::Component { lattice } => component(o, lattice),
        Cmd::Quiver { input, len, lo, hi, k } => quiver(o, input.as_deref(), *len, *lo, *hi, *k),
        Cmd::VerifyPaper { nmax, only } => verify(o, *nmax, only),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<Usage>() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) if e.is::<Failed>() => {
            eprintln!("failed: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
