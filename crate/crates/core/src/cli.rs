//! Command-line interface. Exit codes: 0 ok, 1 property failure, 2 usage
//! or input error.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::analysis::liso_search;
use crate::covering::{
    build_patch, classify, curves_through, star_connect, validate, CaseTag, CoverError, CoveringPatch, Evidence,
    StarMode, XChain,
};
use crate::foldseq::{delta_seq, extract_lambda, gen_t, residues_at, FoldSeq, Lambda, PSeq, SeqRecord};
use crate::frontier::{decompose, lemma26_report};
use crate::render::{render_svg, SvgCurve, SvgStyle};
use crate::tcurve::{realize, TCurve};
use crate::trilattice::{Dir6, EPoint, Field, HexWindow};
use crate::verify;

#[derive(Debug, Parser)]
#[command(name = "terdragon", version, about = "Triangular folding curves and their plane coverings")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print T_Λ for a sign string Λ.
    Gen {
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        /// Emit a JSON record instead of the bare sign string.
        #[arg(long)]
        json: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Derive a turn sequence (read from --input or stdin).
    Delta {
        #[arg(long, allow_hyphen_values = true)]
        input: Option<String>,
        /// Residue of the dropped turns; found from the sequence by default.
        #[arg(long)]
        h: Option<i64>,
    },
    /// Recover the Λ prefix of a turn sequence (read from --input or stdin).
    Extract {
        #[arg(long, allow_hyphen_values = true)]
        input: Option<String>,
        #[arg(long)]
        k_max: Option<u32>,
        #[arg(long)]
        json: bool,
    },
    /// Run a property suite and print its JSON report.
    Verify(VerifyArgs),
    /// Build a covering patch.
    Cover(CoverArgs),
    /// Frontier of the curve T_Λ from the origin along u_0.
    Frontier {
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        /// Check the frontier laws; exit 1 if any fails.
        #[arg(long)]
        check: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Case of a covering given by Λ and a chain or P-sequence.
    Classify {
        /// Sign string, `alternating:±1` or `constant:±`.
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        /// P-sequence over I/M/S, repeated periodically up to the horizon.
        #[arg(long, conflicts_with = "chain")]
        pseq: Option<String>,
        /// `a,b;c,d;…`, extended by its last point.
        #[arg(long, allow_hyphen_values = true)]
        chain: Option<String>,
        #[arg(long, default_value_t = 16)]
        horizon: usize,
    },
    /// Search patch B for a copy of H*(x, 3^n) of patch A near y.
    Liso {
        #[arg(long)]
        n: u32,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, allow_hyphen_values = true)]
        y: String,
        #[arg(long)]
        patch: PathBuf,
        #[arg(long)]
        patch_b: Option<PathBuf>,
    },
    /// Draw a patch (or a single curve) as SVG.
    Render {
        #[arg(long, conflicts_with = "lambda")]
        patch: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<String>,
        #[arg(long)]
        svg: PathBuf,
        /// Only the curves through the star point.
        #[arg(long)]
        star_curves: bool,
        #[arg(long)]
        lattice: bool,
        #[arg(long, default_value_t = 20.0)]
        scale: f64,
    },
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// One of the suite names, or `all`.
    pub suite: String,
    #[arg(long)]
    pub n: Option<usize>,
    /// Run every Λ up to --n instead of stopping at 6.
    #[arg(long)]
    pub exhaustive: bool,
    #[arg(long, default_value_t = 0)]
    pub samples: usize,
    #[arg(long, default_value_t = 2024)]
    pub seed: u64,
    /// Covering level for `covering`.
    #[arg(long, default_value_t = 4)]
    pub level: usize,
    #[arg(long)]
    pub radius: Option<i64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CoverArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: String,
    #[arg(long, allow_hyphen_values = true, default_value = "0,0")]
    pub chain: String,
    #[arg(long, default_value_t = 12)]
    pub radius: i64,
    #[arg(long, default_value = "E1")]
    pub orientation: Field,
    #[arg(long, allow_hyphen_values = true)]
    pub star: Option<StarMode>,
    /// Longer Λ used to resolve every junction beyond the linking level.
    #[arg(long, allow_hyphen_values = true)]
    pub limit_lambda: Option<String>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Write the patch as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Usage/input errors map to exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl<E: std::fmt::Display> From<E> for UsageError {
    fn from(e: E) -> Self {
        UsageError(e.to_string())
    }
}

type CmdResult = Result<bool, UsageError>;

fn emit(text: &str, out: Option<&Path>) -> Result<(), UsageError> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| UsageError(format!("{}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

fn read_input(input: Option<String>) -> Result<String, UsageError> {
    match input {
        Some(s) => Ok(s),
        None => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s)?;
            Ok(s)
        }
    }
}

/// A bare sign string or a JSON `SeqRecord`.
fn read_seq(text: &str) -> Result<FoldSeq, UsageError> {
    let t = text.trim();
    if t.starts_with('{') {
        let r: SeqRecord = serde_json::from_str(t)?;
        return Ok(r.seq()?);
    }
    Ok(FoldSeq::new(t.parse::<Lambda>()?.0))
}

pub fn parse_point(s: &str) -> Result<EPoint, UsageError> {
    let (a, b) = s.split_once(',').ok_or_else(|| UsageError(format!("expected `a,b`, got `{s}`")))?;
    Ok(EPoint::new(a.trim().parse()?, b.trim().parse()?))
}

/// `Λ` from an explicit sign string or an infinite rule, to length `n`.
pub fn lambda_rule(s: &str, n: usize) -> Result<Lambda, UsageError> {
    if let Some(first) = s.strip_prefix("alternating:") {
        let first: i8 = match first {
            "+1" | "1" | "+" => 1,
            "-1" | "-" => -1,
            _ => return Err(UsageError(format!("bad alternating start `{first}`"))),
        };
        return Ok(Lambda::alternating(first, n));
    }
    if let Some(sign) = s.strip_prefix("constant:") {
        let sign: i8 = match sign {
            "+" | "+1" | "1" => 1,
            "-" | "-1" => -1,
            _ => return Err(UsageError(format!("bad constant sign `{sign}`"))),
        };
        return Ok(Lambda::constant(sign, n));
    }
    Ok(s.parse::<Lambda>()?)
}

fn cmd_gen(lambda: &str, as_json: bool, out: Option<&Path>) -> CmdResult {
    let l: Lambda = lambda.parse()?;
    let s = gen_t(&l);
    let text = if as_json { json(&SeqRecord::new(&l, &s)) } else { s.to_sign_string() };
    emit(&text, out)?;
    Ok(true)
}

fn cmd_delta(input: Option<String>, h: Option<i64>) -> CmdResult {
    let s = read_seq(&read_input(input)?)?;
    let h = match h {
        Some(h) => h,
        None => match residues_at(&s, 0).admissible[..] {
            [(h, _)] => h,
            _ => return Err(UsageError("residue not determined by the sequence; pass --h".into())),
        },
    };
    println!("{}", delta_seq(&s, h)?.to_sign_string());
    Ok(true)
}

fn cmd_extract(input: Option<String>, k_max: Option<u32>, as_json: bool) -> CmdResult {
    let s = read_seq(&read_input(input)?)?;
    let k = k_max.unwrap_or_else(|| crate::foldseq::default_k_max(s.len()));
    let x = extract_lambda(&s, k)?;
    println!("{}", if as_json { json(&x) } else { x.lambda.clone() });
    Ok(true)
}

fn cmd_verify(a: &VerifyArgs) -> CmdResult {
    let ex = |default: usize| {
        let n = a.n.unwrap_or(default);
        if a.exhaustive {
            n
        } else {
            n.min(6)
        }
    };
    let n = |default: usize| a.n.unwrap_or(default);
    let run = |suite: &str| -> Result<verify::SuiteReport, UsageError> {
        Ok(match suite {
            "sequence" => verify::suite_sequence(n(8)),
            "palindrome" => verify::suite_palindrome(n(8)),
            "residue" => verify::suite_residue(n(6), a.samples, a.seed),
            "self-avoid" => verify::suite_self_avoid(ex(8), n(8), a.samples, a.seed),
            "derivation" => verify::suite_derivation(n(8)),
            "diameter" => verify::suite_diameter(ex(8), n(8), a.samples, a.seed),
            "coverage" => verify::suite_coverage(n(3)),
            "frontier" => verify::suite_frontier(ex(7), n(7), a.samples, a.seed),
            "covering" => verify::suite_covering(a.level, a.radius.unwrap_or(40), a.samples.max(1), a.seed),
            "cases" => verify::suite_cases(a.seed),
            "liso" => verify::suite_liso(a.radius.unwrap_or(60), a.samples.max(1), 200, 0, a.seed),
            other => return Err(UsageError(format!("unknown suite `{other}` (one of {} or all)", verify::SUITES.join(", ")))),
        })
    };
    let reports: Vec<verify::SuiteReport> = if a.suite == "all" {
        verify::SUITES.iter().map(|s| run(s)).collect::<Result<_, _>>()?
    } else {
        vec![run(&a.suite)?]
    };
    let pass = reports.iter().all(|r| r.pass);
    let text = if reports.len() == 1 { reports[0].to_json() } else { json(&reports) };
    emit(&text, a.out.as_deref())?;
    Ok(pass)
}

#[derive(Serialize)]
struct CoverReport {
    lambda: String,
    chain: String,
    radius: i64,
    orientation: Field,
    star: Option<(EPoint, StarMode)>,
    curves_through_star: Option<usize>,
    curves: usize,
    validation: crate::covering::ValidationReport,
}

fn cmd_cover(a: &CoverArgs) -> CmdResult {
    let l: Lambda = a.lambda.parse()?;
    let chain: XChain = a.chain.parse().map_err(UsageError)?;
    let mut chain = if chain.len() < l.len() + 1 {
        let mut pts = chain.points.clone();
        pts.resize(l.len() + 1, *chain.points.last().unwrap());
        XChain::new(pts)
    } else {
        chain
    };
    let mut patch = build_patch(&l, &chain, a.orientation, HexWindow::new(EPoint::ZERO, a.radius))?;
    if let Some(long) = &a.limit_lambda {
        let long: Lambda = long.parse()?;
        if chain.len() < long.len() + 1 {
            let mut pts = chain.points.clone();
            pts.resize(long.len() + 1, *chain.points.last().unwrap());
            chain = XChain::new(pts);
        }
        patch.extend_limit(&long, &chain)?;
    }
    if let Some(mode) = a.star {
        patch = star_connect(&patch, mode)?;
    }
    let v = validate(&patch);
    let pass = v.covering_ok && v.property_p;
    let report = CoverReport {
        lambda: patch.lambda.to_string(),
        chain: patch.chain.to_string(),
        radius: a.radius,
        orientation: a.orientation,
        star: patch.star,
        curves_through_star: patch.star.map(|(x, _)| curves_through(&patch, x).len()),
        curves: patch.curves.len(),
        validation: v,
    };
    emit(&json(&report), a.report.as_deref())?;
    if let Some(p) = &a.out {
        fs::write(p, patch.to_json())?;
    }
    if let Some(p) = &a.svg {
        fs::write(p, render_svg(&patch.svg_curves(), &SvgStyle::default()))?;
    }
    Ok(pass)
}

#[derive(Serialize)]
struct FrontierOut {
    lambda: String,
    left: crate::frontier::FrontierRecord,
    right: crate::frontier::FrontierRecord,
    check: Option<crate::frontier::Lemma26Report>,
}

fn cmd_frontier(lambda: &str, check: bool, out: Option<&Path>) -> CmdResult {
    let l: Lambda = lambda.parse()?;
    let c = realize(&gen_t(&l), EPoint::ZERO, Dir6::new(0));
    let (left, right) = decompose(&c, l.len() as u32)?;
    let rep = check.then(|| lemma26_report(&c, &l));
    let pass = rep.as_ref().is_none_or(|r| r.pass);
    let o = FrontierOut { lambda: l.to_string(), left: left.record(), right: right.record(), check: rep };
    emit(&json(&o), out)?;
    Ok(pass)
}

#[derive(Serialize)]
struct ClassifyOut {
    lambda: String,
    horizon: usize,
    case: Option<CaseTag>,
    error: Option<String>,
}

fn cmd_classify(lambda: &str, pseq: Option<&str>, chain: Option<&str>, horizon: usize) -> CmdResult {
    let l = lambda_rule(lambda, horizon + 1)?;
    let evidence = match (pseq, chain) {
        (Some(p), None) => {
            let p: PSeq = p.parse()?;
            if p.0.is_empty() {
                return Err(UsageError("empty P-sequence".into()));
            }
            Evidence::PSeq(PSeq(p.0.iter().cycle().take(horizon.max(p.0.len())).copied().collect()))
        }
        (None, Some(c)) => {
            let c: XChain = c.parse().map_err(UsageError)?;
            let mut pts = c.points.clone();
            pts.resize(pts.len().max(horizon + 1), *c.points.last().unwrap());
            Evidence::Chain(XChain::new(pts))
        }
        _ => return Err(UsageError("pass exactly one of --pseq, --chain".into())),
    };
    let (case, error, ok) = match classify(&l, &evidence, horizon) {
        Ok(t) => (Some(t), None, true),
        Err(e @ CoverError::InconsistentInput(_)) => (None, Some(e.to_string()), false),
        Err(e) => return Err(e.into()),
    };
    println!("{}", json(&ClassifyOut { lambda: l.prefix(horizon + 1).to_string(), horizon, case, error }));
    Ok(ok)
}

fn load_patch(p: &Path) -> Result<CoveringPatch, UsageError> {
    let s = fs::read_to_string(p).map_err(|e| UsageError(format!("{}: {e}", p.display())))?;
    Ok(CoveringPatch::from_json(&s)?)
}

#[derive(Serialize)]
struct LisoOut {
    witness: Option<EPoint>,
    scanned: usize,
    search_radius: i64,
}

fn cmd_liso(n: u32, x: &str, y: &str, patch: &Path, patch_b: Option<&Path>) -> CmdResult {
    let a = load_patch(patch)?;
    let b = match patch_b {
        Some(p) => load_patch(p)?,
        None => a.clone(),
    };
    let r = liso_search(&a, parse_point(x)?, &b, parse_point(y)?, n)?;
    println!("{}", json(&LisoOut { witness: r.witness, scanned: r.scanned, search_radius: r.search_radius }));
    Ok(r.witness.is_some())
}

fn cmd_render(patch: Option<&Path>, lambda: Option<&str>, svg: &Path, star_curves: bool, style: SvgStyle) -> CmdResult {
    let curves: Vec<SvgCurve> = match (patch, lambda) {
        (Some(p), None) => {
            let p = load_patch(p)?;
            match (star_curves, p.star) {
                (true, Some((x, _))) => curves_through(&p, x)
                    .into_iter()
                    .enumerate()
                    .map(|(i, id)| SvgCurve { id: i, points: p.curve_polyline(id) })
                    .collect(),
                (true, None) => return Err(UsageError("patch has no star point".into())),
                _ => p.svg_curves(),
            }
        }
        (None, Some(l)) => {
            let l: Lambda = l.parse()?;
            let c: TCurve = realize(&gen_t(&l), EPoint::ZERO, Dir6::new(0));
            vec![SvgCurve::from_curve(&c, 0)]
        }
        _ => return Err(UsageError("pass exactly one of --patch, --lambda".into())),
    };
    fs::write(svg, render_svg(&curves, &style))?;
    Ok(true)
}

pub fn dispatch(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Gen { lambda, json, out } => cmd_gen(&lambda, json, out.as_deref()),
        Command::Delta { input, h } => cmd_delta(input, h),
        Command::Extract { input, k_max, json } => cmd_extract(input, k_max, json),
        Command::Verify(a) => cmd_verify(&a),
        Command::Cover(a) => cmd_cover(&a),
        Command::Frontier { lambda, check, out } => cmd_frontier(&lambda, check, out.as_deref()),
        Command::Classify { lambda, pseq, chain, horizon } => cmd_classify(&lambda, pseq.as_deref(), chain.as_deref(), horizon),
        Command::Liso { n, x, y, patch, patch_b } => cmd_liso(n, &x, &y, &patch, patch_b.as_deref()),
        Command::Render { patch, lambda, svg, star_curves, lattice, scale } => {
            let style = SvgStyle { lattice, scale, ..SvgStyle::default() };
            cmd_render(patch.as_deref(), lambda.as_deref(), &svg, star_curves, style)
        }
    }
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
