use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use shiftclass_core::doc;
use shiftclass_core::factor::{build_fibered_product_fm, extract_tilde_xm, minimal_relation, quotient_psi, BowenFailure};
use shiftclass_core::invariants::compute_u_eta;
use shiftclass_core::markers::{synthesize_injective_subsystem, Budget};
use shiftclass_core::pathology::{build_pathology_graph, certify_pathology, search_parameters, Language, PathologySpec};
use shiftclass_core::{
    decide_almost_borel_iso, realize_invariants, summarize_all, Error, InvariantPair, ShiftPresentation, DEFAULT_TOL,
};

const EXIT_FALSE: u8 = 1;
const EXIT_INCONCLUSIVE: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_DATA: u8 = 65;
const EXIT_NO_INPUT: u8 = 66;

#[derive(Parser)]
#[command(name = "shiftclass", version, about = "Almost-Borel invariants of countable-state Markov shifts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Component table and invariant pair of a presentation file.
    Analyze {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Decide almost-Borel isomorphism of two presentation or invariant files.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        /// Emit key=value lines instead of a one-line verdict.
        #[arg(long)]
        kv: bool,
    },
    /// Presentations realizing an invariant pair.
    Realize {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Injective subsystem of a code with entropy above a target.
    Embed {
        code: PathBuf,
        /// Target entropy: a decimal, `log k`, or `c log k`.
        #[arg(long)]
        entropy: String,
        #[arg(long, default_value_t = 64)]
        max_n: usize,
        #[arg(long, default_value_t = 64)]
        max_k: usize,
        #[arg(long, default_value_t = 32)]
        max_ac: usize,
        #[arg(long, default_value_t = 0.25)]
        zeta: f64,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Check a symbol relation against both Bowen conditions.
    Bowen {
        code: PathBuf,
        /// Relation file; the minimal relation is used when omitted.
        relation: Option<PathBuf>,
    },
    /// Fibered product of a graph with itself under a relation, and its quotient.
    Fiberprod {
        code: PathBuf,
        relation: PathBuf,
        m: usize,
        /// Longest word length used for the word-count check.
        #[arg(long, default_value_t = 8)]
        max_len: usize,
    },
    /// Truncated pathology graph over a binary language, with its certification.
    Pathology {
        y: PathBuf,
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        depth: usize,
        #[arg(long, value_delimiter = ',')]
        n: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        m: Option<Vec<usize>>,
        #[arg(long = "M")]
        big_m: Option<usize>,
        #[arg(long, default_value_t = 40)]
        l_max: usize,
        #[arg(long = "max-M", default_value_t = 64)]
        max_big_m: usize,
        /// Print the report only.
        #[arg(long)]
        no_graph: bool,
    },
}

enum Failure {
    Core(Error),
    Usage(String),
    Missing(PathBuf, std::io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

/// What a verb prints and how it exits.
struct Outcome {
    stdout: String,
    code: u8,
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Missing(path.to_path_buf(), e))
}

fn in_file<T>(path: &Path, r: Result<T, Error>) -> Result<T, Failure> {
    r.map_err(|e| match e {
        Error::Parse { line, msg } => Error::Parse { line, msg: format!("{}: {msg}", path.display()) },
        e => e,
    })
    .map_err(Failure::Core)
}

fn first_token(text: &str) -> Option<&str> {
    text.lines()
        .flat_map(|l| l.split(';'))
        .map(|l| l.split('#').next().unwrap_or(""))
        .find_map(|l| l.split_whitespace().next())
}

fn comment(report: &str) -> String {
    report.lines().map(|l| format!("# {l}\n")).collect()
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn load_pair(path: &Path, tol: f64) -> Result<InvariantPair, Failure> {
    let text = read(path)?;
    if matches!(first_token(&text), Some("gen" | "invariants")) {
        return in_file(path, doc::parse_invariants(&text, tol));
    }
    let ps = in_file(path, doc::parse_presentations(&text))?;
    Ok(compute_u_eta(&summarize_all(&ps)?, tol)?)
}

fn analyze(file: &Path, tol: f64) -> Result<Outcome, Failure> {
    let ps: Vec<ShiftPresentation> = in_file(file, doc::parse_presentations(&read(file)?))?;
    let summaries = summarize_all(&ps)?;
    let pair = compute_u_eta(&summaries, tol)?;
    let mut out = String::new();
    let _ = writeln!(out, "components={}", summaries.len());
    for s in &summaries {
        let h = if s.entropy.is_infinite() { "inf".to_string() } else { format!("{:.12}", s.entropy.approx()) };
        let _ = writeln!(
            out,
            "component source={} p={} h={h} mme={} recurrence={} limit={}",
            s.source,
            s.period,
            yes(s.mme),
            s.recurrence,
            yes(s.limit)
        );
    }
    out.push_str(&doc::write_invariants(&pair));
    Ok(Outcome { stdout: out, code: 0 })
}

fn compare(a: &Path, b: &Path, tol: f64, kv: bool) -> Result<Outcome, Failure> {
    let pa = load_pair(a, tol)?;
    let pb = load_pair(b, tol)?;
    let v = decide_almost_borel_iso(&pa, &pb, tol)?;
    let mut out = String::new();
    match (&v.witness, kv) {
        (None, false) => out.push_str("isomorphic\n"),
        (None, true) => out.push_str("verdict=isomorphic\n"),
        (Some(w), false) => {
            let _ = writeln!(
                out,
                "not isomorphic, witness p={} (u={} eta={} versus u={} eta={})",
                w.p, w.u_a, w.eta_a, w.u_b, w.eta_b
            );
        }
        (Some(w), true) => {
            let _ = writeln!(out, "verdict=not-isomorphic");
            let _ = writeln!(out, "witness_p={}", w.p);
            let _ = writeln!(out, "u_a={}", w.u_a.to_doc());
            let _ = writeln!(out, "eta_a={}", w.eta_a);
            let _ = writeln!(out, "u_b={}", w.u_b.to_doc());
            let _ = writeln!(out, "eta_b={}", w.eta_b);
        }
    }
    Ok(Outcome { stdout: out, code: if v.isomorphic { 0 } else { EXIT_FALSE } })
}

fn realize(file: &Path, tol: f64) -> Result<Outcome, Failure> {
    let pair = in_file(file, doc::parse_invariants(&read(file)?, tol))?;
    let ps = realize_invariants(&pair)?;
    let mut out = comment(&format!("presentations={}", ps.len()));
    out.push_str(&doc::write_presentations(&ps));
    Ok(Outcome { stdout: out, code: 0 })
}

fn embed(code_path: &Path, target: &str, budget: Budget, tol: f64) -> Result<Outcome, Failure> {
    let code = in_file(code_path, doc::parse_code(&read(code_path)?))?;
    let target = doc::parse_entropy(target).map_err(|e| Failure::Usage(format!("--entropy: {e}")))?;
    let cert = synthesize_injective_subsystem(&code, &target, &budget, tol)?;
    let domain_period = shiftclass_core::period_of_component(code.domain());
    let valid = cert.is_valid(domain_period, tol);
    let mut out = comment(&cert.report(&code));
    out.push_str(&comment(&format!("valid={valid}")));
    out.push_str(&doc::write_presentation(&ShiftPresentation::FiniteGraph(cert.subsystem.graph.clone())));
    Ok(Outcome { stdout: out, code: if valid { 0 } else { EXIT_FALSE } })
}

fn bowen(code_path: &Path, rel_path: Option<&Path>) -> Result<Outcome, Failure> {
    let code = in_file(code_path, doc::parse_code(&read(code_path)?))?;
    let mut out = String::new();
    let rel = match rel_path {
        Some(p) => in_file(p, doc::parse_relation(&read(p)?))?,
        None => {
            let r = minimal_relation(&code);
            let _ = writeln!(out, "relation=minimal");
            for (a, b) in r.pairs() {
                let _ = writeln!(out, "rel={a},{b}");
            }
            r
        }
    };
    let v = shiftclass_core::factor::verify_bowen_relation(&code, &rel)?;
    let _ = writeln!(out, "bowen={}", v.bowen);
    match &v.failure {
        None => {}
        Some(BowenFailure::UnequalLabels { a, b, label_a, label_b }) => {
            let _ = writeln!(out, "failure=unequal-labels");
            let _ = writeln!(out, "pair={a},{b}");
            let _ = writeln!(out, "labels={label_a},{label_b}");
        }
        Some(BowenFailure::UnrelatedPair { a, b, witness }) => {
            let (x, y, w) = witness.render(&code, &code.whole());
            let _ = writeln!(out, "failure=unrelated-pair");
            let _ = writeln!(out, "pair={a},{b}");
            let _ = writeln!(out, "x={x}");
            let _ = writeln!(out, "y={y}");
            let _ = writeln!(out, "image={w}");
        }
    }
    Ok(Outcome { stdout: out, code: if v.bowen { 0 } else { EXIT_FALSE } })
}

fn fiberprod(code_path: &Path, rel_path: &Path, m: usize, max_len: usize) -> Result<Outcome, Failure> {
    let code = in_file(code_path, doc::parse_code(&read(code_path)?))?;
    let rel = in_file(rel_path, doc::parse_relation(&read(rel_path)?))?;
    let v = shiftclass_core::factor::verify_bowen_relation(&code, &rel)?;
    let fm = build_fibered_product_fm(code.domain(), &rel, m)?;
    let xm = extract_tilde_xm(&fm, code.domain());
    let (q, report) = quotient_psi(&xm, code.domain(), max_len);
    let mut r = String::new();
    let _ = writeln!(r, "bowen={}", v.bowen);
    let _ = writeln!(r, "m={m}");
    let _ = writeln!(r, "fm_vertices={} fm_edges={}", fm.graph.vertex_count(), fm.graph.edge_count());
    let _ = writeln!(r, "xm_vertices={} xm_edges={}", xm.graph.vertex_count(), xm.graph.edge_count());
    let _ = writeln!(r, "quotient_vertices={} quotient_edges={}", q.vertex_count(), q.edge_count());
    let _ = writeln!(r, "right_resolving={}", report.right_resolving);
    let _ = writeln!(r, "left_resolving={}", report.left_resolving);
    let _ = writeln!(r, "preimages_ok={}", report.preimages_ok);
    for (n, t, w) in &report.word_counts {
        let _ = writeln!(r, "words n={n} tuples={t} quotient={w}");
    }
    let _ = writeln!(r, "counts_ok={}", report.counts_ok);
    for p in &report.problems {
        let _ = writeln!(r, "problem={p}");
    }
    let _ = writeln!(r, "verdict={}", if report.passed() { "pass" } else { "fail" });
    let mut out = comment(&r);
    out.push_str(&doc::write_presentation(&ShiftPresentation::FiniteGraph(q)));
    Ok(Outcome { stdout: out, code: if report.passed() { 0 } else { EXIT_FALSE } })
}

#[allow(clippy::too_many_arguments)]
fn pathology(
    y_path: &Path,
    epsilon: f64,
    depth: usize,
    n: Option<Vec<usize>>,
    m: Option<Vec<usize>>,
    big_m: Option<usize>,
    l_max: usize,
    max_big_m: usize,
    no_graph: bool,
) -> Result<Outcome, Failure> {
    let text = read(y_path)?;
    let y = if matches!(first_token(&text), Some("word" | "words")) {
        let words = in_file(y_path, doc::parse_words(&text))?;
        Language::from_words(&words, depth)?
    } else {
        let code = in_file(y_path, doc::parse_code(&text))?;
        Language::from_code(&code, depth)?
    };
    let n_seq = n.unwrap_or_else(|| (1..=depth).collect());
    let spec = match (m, big_m) {
        (Some(m_seq), Some(big_m)) => PathologySpec { epsilon, n_seq, m_seq, big_m, depth },
        (None, None) => search_parameters(&y, epsilon, &n_seq, depth, max_big_m)?,
        _ => return Err(Failure::Usage("--m and --M must be given together".into())),
    };
    let pg = build_pathology_graph(&y, &spec)?;
    let report = certify_pathology(&pg, &y, &spec, l_max);
    let mut r = String::new();
    let _ = writeln!(r, "vertices={}", pg.code.source().vertex_count());
    let _ = writeln!(r, "edges={}", pg.code.source().edge_count());
    r.push_str(&report.render(&spec));
    let mut out = comment(&r);
    if !no_graph {
        out.push_str(&doc::write_code(&pg.code));
    }
    Ok(Outcome { stdout: out, code: if report.passed() { 0 } else { EXIT_FALSE } })
}

fn run(cli: Cli) -> Result<Outcome, Failure> {
    match cli.command {
        Command::Analyze { file, tol } => analyze(&file, tol),
        Command::Compare { a, b, tol, kv } => compare(&a, &b, tol, kv),
        Command::Realize { file, tol } => realize(&file, tol),
        Command::Embed { code, entropy, max_n, max_k, max_ac, zeta, tol } => {
            let budget = Budget { max_n, max_k, max_ac, zeta, ..Budget::default() };
            embed(&code, &entropy, budget, tol)
        }
        Command::Bowen { code, relation } => bowen(&code, relation.as_deref()),
        Command::Fiberprod { code, relation, m, max_len } => fiberprod(&code, &relation, m, max_len),
        Command::Pathology { y, epsilon, depth, n, m, big_m, l_max, max_big_m, no_graph } => {
            pathology(&y, epsilon, depth, n, m, big_m, l_max, max_big_m, no_graph)
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Inconclusive { .. } | Error::Undecidable(_) | Error::BudgetExhausted(_) | Error::NotFound(_) => {
            EXIT_INCONCLUSIVE
        }
        Error::Parse { .. } | Error::Invalid(_) | Error::PreconditionViolated(_) | Error::Unrealizable(_) => EXIT_DATA,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(o) => {
            print!("{}", o.stdout);
            ExitCode::from(o.code)
        }
        Err(Failure::Core(e)) => {
            eprintln!("shiftclass: {e}");
            ExitCode::from(exit_code(&e))
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("shiftclass: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Missing(p, e)) => {
            eprintln!("shiftclass: {}: {e}", p.display());
            ExitCode::from(EXIT_NO_INPUT)
        }
    }
}
