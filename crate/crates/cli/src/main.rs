mod report;

use std::fs;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use qcech_core::cech::{cover_cohomology, element_cohomology, enumerate_covers, make_cover, CechError};
use qcech_core::doc::{load_workspace, validate_document, LoadError, Workspace};
use qcech_core::lattice::{Elem, Quantale};
use qcech_core::limits::Limits;
use qcech_core::presheaf::sheaf_check;
use qcech_core::sources::FiniteRing;
use qcech_core::theorems::corpus::{build_corpus, homotopy_suite, idempotent_census, main_iso_suite, sheaf_suite};
use qcech_core::theorems::{
    verify_change_of_base, verify_cover_iso, verify_main_iso, verify_quotient_direct_image, verify_tau_theta,
    TheoremError, TheoremReport, Verdict,
};

use report::{Output, Report};

const EXIT_VALIDATION: u8 = 2;
const EXIT_CONCLUSION: u8 = 3;
const EXIT_CAP: u8 = 4;

#[derive(Parser)]
#[command(name = "qcech", version, about = "Čech cohomology of finite quantales")]
struct Cli {
    /// Worker threads for parallel sweeps (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Print elapsed time to stderr.
    #[arg(long, global = true)]
    timing: bool,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Validate every object in a document.
    Validate { file: String },
    /// Cohomology of an element with coefficients in a presheaf.
    Cohomology {
        file: String,
        presheaf: String,
        /// Element label (default: the top).
        #[arg(long)]
        element: Option<String>,
        /// Comma-separated cover members; computes this cover's cohomology only.
        #[arg(long)]
        cover: Option<String>,
        /// Highest degree (default: one less than the cover size).
        #[arg(long)]
        max_q: Option<usize>,
    },
    /// Check the sheaf condition on every cover of every element.
    Sheafcheck { file: String, presheaf: String },
    /// Run a theorem verification.
    #[command(subcommand)]
    Verify(Verify),
}

#[derive(Subcommand)]
enum Verify {
    /// Preservation properties of tau and theta on F_q^k.
    TauTheta { q: u64, k: u32 },
    /// Cochain-level comparison for covers of the unit ideal.
    CoverIso {
        file: String,
        /// Ideal quantale of a function ring.
        ideals: String,
        /// Sheaf on the locale of the discrete space.
        presheaf: String,
        /// Comma-separated cover of the unit ideal (default: every cover).
        #[arg(long)]
        cover: Option<String>,
    },
    /// Cohomology of the top is preserved along a strong geometric morphism.
    MainIso {
        file: String,
        morphism: String,
        presheaf: String,
        /// Highest degree compared (default: one less than the larger terminal cover).
        #[arg(long)]
        max_q: Option<usize>,
    },
    /// Pullback of a sheaf along a geometric morphism is a sheaf.
    ChangeOfBase { file: String, morphism: String, presheaf: String },
    /// Direct image along the quotient by the ideal generated by GENS.
    Quotient {
        /// `zmodN`, `funringQ^K`, or a ring name with --file.
        ring: String,
        gens: Vec<String>,
        #[arg(long)]
        file: Option<String>,
    },
    /// Sweep the generated corpus.
    Corpus {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    MainIso,
    Sheaf,
    Homotopy,
    Census,
    All,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn validation(message: impl Into<String>) -> Self {
        Failure { code: EXIT_VALIDATION, message: message.into() }
    }
}

impl From<LoadError> for Failure {
    fn from(e: LoadError) -> Self {
        Failure { code: if e.is_cap() { EXIT_CAP } else { EXIT_VALIDATION }, message: e.to_string() }
    }
}

impl From<TheoremError> for Failure {
    fn from(e: TheoremError) -> Self {
        let code = if e.is_cap() {
            EXIT_CAP
        } else if matches!(e, TheoremError::Cech(CechError::NotDirected { .. })) {
            EXIT_CONCLUSION
        } else {
            EXIT_VALIDATION
        };
        Failure { code, message: e.to_string() }
    }
}

macro_rules! failure_via_theorem {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                TheoremError::from(e).into()
            }
        }
    )*};
}

failure_via_theorem!(CechError, qcech_core::presheaf::PresheafError, qcech_core::sources::RingError);

fn read(file: &str) -> Result<String, Failure> {
    fs::read_to_string(file).map_err(|e| Failure::validation(format!("cannot read {file}: {e}")))
}

fn workspace(file: &str, limits: &Limits) -> Result<Workspace, Failure> {
    Ok(load_workspace(&read(file)?, limits)?)
}

fn element(q: &Quantale, label: &str) -> Result<Elem, Failure> {
    q.index_of(label).ok_or_else(|| Failure::validation(format!("no element '{label}'")))
}

fn members(q: &Quantale, list: &str) -> Result<Vec<Elem>, Failure> {
    list.split(',').map(str::trim).filter(|s| !s.is_empty()).map(|l| element(q, l)).collect()
}

fn theorem_exit(reports: &[TheoremReport]) -> u8 {
    if reports.iter().any(|r| r.verdict == Verdict::Fail) {
        EXIT_CONCLUSION
    } else if reports.iter().any(|r| r.verdict == Verdict::Skipped) {
        EXIT_VALIDATION
    } else {
        0
    }
}

fn ring_spec(spec: &str, file: Option<&str>, limits: &Limits) -> Result<Arc<FiniteRing>, Failure> {
    if let Some(f) = file {
        let ws = workspace(f, limits)?;
        return ws.ring(spec).cloned().map_err(Failure::validation);
    }
    let bad = || Failure::validation(format!("expected zmodN or funringQ^K, found '{spec}'"));
    if let Some(n) = spec.strip_prefix("zmod") {
        return Ok(Arc::new(FiniteRing::zmod(n.parse().map_err(|_| bad())?, limits)?));
    }
    if let Some((q, k)) = spec.strip_prefix("funring").and_then(|r| r.split_once('^')) {
        let (q, k) = (q.parse().map_err(|_| bad())?, k.parse().map_err(|_| bad())?);
        return Ok(Arc::new(FiniteRing::function_ring(q, k, limits)?));
    }
    Err(bad())
}

fn run(cli: &Cli, limits: &Limits) -> Result<(Output, u8), Failure> {
    match &cli.command {
        Command::Validate { file } => {
            let reports = validate_document(&read(file)?, limits).map_err(|e| Failure::validation(e.to_string()))?;
            let code = if reports.iter().any(|r| r.cap) {
                EXIT_CAP
            } else if reports.iter().any(|r| r.result.is_err()) {
                EXIT_VALIDATION
            } else {
                0
            };
            Ok((Report::Validation(reports).into(), code))
        }
        Command::Cohomology { file, presheaf, element: el, cover, max_q } => {
            let ws = workspace(file, limits)?;
            let f = ws.presheaf(presheaf).map_err(Failure::validation)?;
            let q = f.base();
            let u = match el {
                Some(l) => element(q, l)?,
                None => q.top(),
            };
            let (cover, count, result) = match cover {
                Some(list) => {
                    let c = make_cover(q, u, &members(q, list)?)?;
                    let r = cover_cohomology(f, &c, *max_q)?;
                    (c, None, r)
                }
                None => {
                    let h = element_cohomology(f, u, *max_q, limits)?;
                    (h.terminal, Some(h.cover_count), h.result)
                }
            };
            let out = Report::Cohomology {
                presheaf: presheaf.clone(),
                base: f.base().clone(),
                element: u,
                cover,
                cover_count: count,
                groups: result.groups(),
            };
            Ok((out.into(), 0))
        }
        Command::Sheafcheck { file, presheaf } => {
            let ws = workspace(file, limits)?;
            let f = ws.presheaf(presheaf).map_err(Failure::validation)?;
            let r = sheaf_check(f, None, limits)?;
            let code = if r.is_sheaf() { 0 } else { EXIT_CONCLUSION };
            Ok((Report::Sheaf { presheaf: presheaf.clone(), base: f.base().clone(), report: r }.into(), code))
        }
        Command::Verify(v) => {
            let reports = verify(v, limits)?;
            let code = theorem_exit(&reports);
            Ok((Report::Theorems(reports).into(), code))
        }
    }
}

fn verify(v: &Verify, limits: &Limits) -> Result<Vec<TheoremReport>, Failure> {
    Ok(match v {
        Verify::TauTheta { q, k } => vec![verify_tau_theta(*q, *k, limits)?],
        Verify::CoverIso { file, ideals, presheaf, cover } => {
            let ws = workspace(file, limits)?;
            let iq = ws.ideal_quantale(ideals).map_err(Failure::validation)?;
            let f = ws.presheaf(presheaf).map_err(Failure::validation)?;
            let q = &iq.quantale;
            let covers = match cover {
                Some(list) => vec![make_cover(q, q.top(), &members(q, list)?)?],
                None => enumerate_covers(q, q.top(), limits)?,
            };
            covers.iter().map(|c| verify_cover_iso(iq, c, f, limits)).collect::<Result<_, _>>()?
        }
        Verify::MainIso { file, morphism, presheaf, max_q } => {
            let ws = workspace(file, limits)?;
            let m = ws.morphism(morphism).map_err(Failure::validation)?;
            let f = ws.presheaf(presheaf).map_err(Failure::validation)?;
            let mut r = verify_main_iso(m, f, *max_q, limits)?;
            r.instance = format!("{morphism} with {presheaf}");
            vec![r]
        }
        Verify::ChangeOfBase { file, morphism, presheaf } => {
            let ws = workspace(file, limits)?;
            let m = ws.morphism(morphism).map_err(Failure::validation)?;
            let f = ws.presheaf(presheaf).map_err(Failure::validation)?;
            let mut r = verify_change_of_base(f, m, limits)?;
            r.instance = format!("{presheaf} along {morphism}");
            vec![r]
        }
        Verify::Quotient { ring, gens, file } => {
            let r = ring_spec(ring, file.as_deref(), limits)?;
            let gens: Vec<Elem> = gens
                .iter()
                .map(|g| r.index_of(g).ok_or_else(|| Failure::validation(format!("no ring element '{g}'"))))
                .collect::<Result<_, _>>()?;
            let ideal = r.generated_ideal(gens.iter().fold(0, |m, &g| m | (1 << g)));
            vec![verify_quotient_direct_image(&r, ideal, limits)?]
        }
        Verify::Corpus { suite } => {
            let corpus = build_corpus(limits)?;
            let mut out = Vec::new();
            let want = |s: Suite| *suite == s || *suite == Suite::All;
            if want(Suite::MainIso) {
                out.extend(main_iso_suite(&corpus, limits)?);
            }
            if want(Suite::Sheaf) {
                out.extend(sheaf_suite(&corpus, limits)?);
            }
            if want(Suite::Homotopy) {
                out.extend(homotopy_suite(&corpus, limits)?);
            }
            if want(Suite::Census) {
                out.extend(idempotent_census(limits)?);
            }
            out
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_VALIDATION);
        }
    }
    let limits = Limits::from_env();
    let start = Instant::now();
    let result = run(&cli, &limits);
    let code = match result {
        Ok((out, code)) => {
            print!(
                "{}",
                match cli.format {
                    Format::Text => out.text,
                    Format::Json => out.json,
                }
            );
            code
        }
        Err(f) => {
            match cli.format {
                Format::Text => eprintln!("error: {}", f.message),
                Format::Json => println!("{}", report::error_json(&f.message, f.code)),
            }
            f.code
        }
    };
    if cli.timing {
        eprintln!("elapsed: {} ms", start.elapsed().as_millis());
    }
    ExitCode::from(code)
}
