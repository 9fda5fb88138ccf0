//! Property suites behind `verify` and the acceptance tests. Reports hold
//! no timings so that equal inputs give byte-identical JSON.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{liso_report, sample_pairs, LisoReport};
use crate::covering::{
    build_patch, chain_from_pseq, classify, curves_through, find_half_turn, half_turn_check, level_lattices,
    star_connect, symmetry_check, validate, CaseTag, CoveringPatch, Evidence, StarMode, XChain,
};
use crate::foldseq::{bar, extract_lambda, gen_t, FoldSeq, Lambda, PSeq, Piece};
use crate::frontier::{inside_outside_ok, lemma26_report, Check};
use crate::tcurve::{check_self_avoiding, delta_curve, diameter, max_covered_triangle, realize, rho, TCurve};
use crate::trilattice::{Dir6, EPoint, Field, HexWindow};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: Option<u64>,
    pub params: String,
    pub pass: bool,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    fn new(suite: &str, seed: Option<u64>, params: String, checks: Vec<Check>) -> Self {
        SuiteReport { suite: suite.into(), seed, params, pass: checks.iter().all(|c| c.pass), checks }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_lambda(n: usize, rng: &mut impl Rng) -> Lambda {
    Lambda::new((0..n).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect())
}

/// `x_0` near the origin and `x_{k+1} = x_k + θ^k·(small offset)`.
pub fn random_chain(n: usize, rng: &mut impl Rng) -> XChain {
    let mut pts = vec![EPoint::new(rng.gen_range(-2..=2), rng.gen_range(-2..=2))];
    for k in 0..n {
        let off = EPoint::new(rng.gen_range(-1..=1), rng.gen_range(-1..=1));
        pts.push(pts[k] + off.mul_theta_pow(k as u32));
    }
    XChain::new(pts)
}

fn curve(l: &Lambda) -> TCurve {
    realize(&gen_t(l), EPoint::ZERO, Dir6::new(0))
}

fn all_up_to(n_max: usize) -> impl Iterator<Item = Lambda> {
    (1..=n_max).flat_map(Lambda::all)
}

/// First failure, or a count of passes.
fn tally(name: &str, fails: Vec<String>, total: usize) -> Check {
    match fails.first() {
        None => Check::new(name, true, format!("{total} cases")),
        Some(f) => Check::new(name, false, format!("{} of {total} failed, first: {f}", fails.len())),
    }
}

/// Length, prefix, bar-invariance, sign balance and position law of
/// `T_{Λ_n}` for every `Λ` with `1 ≤ n ≤ n_max`.
pub fn suite_sequence(n_max: usize) -> SuiteReport {
    let ls: Vec<Lambda> = all_up_to(n_max).collect();
    let mut fails: [Vec<String>; 5] = Default::default();
    for l in &ls {
        let n = l.len();
        let s = gen_t(l);
        if s.len() != 3usize.pow(n as u32) - 1 {
            fails[0].push(l.to_string());
        }
        let p = gen_t(&l.prefix(n - 1));
        if s.signs[..p.len()] != p.signs[..] {
            fails[1].push(l.to_string());
        }
        if bar(&s) != s {
            fails[2].push(l.to_string());
        }
        if s.signs.iter().map(|&x| x as i64).sum::<i64>() != 0 {
            fails[3].push(l.to_string());
        }
        let law = (0..n).all(|k| {
            let a = 3i64.pow(k as u32);
            (0..).map(|i| a + 3 * a * i).take_while(|&p| p <= s.len() as i64).all(|p| s.at(p) == Some(l.get(k + 1)))
                && (0..).map(|i| 2 * a + 3 * a * i).take_while(|&p| p <= s.len() as i64).all(|p| s.at(p) == Some(-l.get(k + 1)))
        });
        if !law {
            fails[4].push(l.to_string());
        }
    }
    let names = ["length 3^n - 1", "prefix", "bar invariance", "equal sign counts", "position law"];
    let checks = names.iter().zip(fails).map(|(n, f)| tally(n, f, ls.len())).collect();
    SuiteReport::new("sequence", None, format!("n<={n_max}"), checks)
}

/// Bar-invariance alone, plus bar being an involution on windows.
pub fn suite_palindrome(n_max: usize) -> SuiteReport {
    let ls: Vec<Lambda> = all_up_to(n_max).collect();
    let mut fails = vec![];
    let mut inv = vec![];
    for l in &ls {
        let s = gen_t(l);
        if bar(&s) != s {
            fails.push(l.to_string());
        }
        let w = FoldSeq::new(s.signs[..s.len() / 2].to_vec());
        if bar(&bar(&w)) != w {
            inv.push(l.to_string());
        }
    }
    SuiteReport::new(
        "palindrome",
        None,
        format!("n<={n_max}"),
        vec![tally("bar(T) = T", fails, ls.len()), tally("bar involution", inv, ls.len())],
    )
}

/// `Λ` recovered from full sequences, and only prefixes of `Λ` recovered
/// from random windows.
pub fn suite_residue(n_max: usize, samples: usize, seed: u64) -> SuiteReport {
    let ls: Vec<Lambda> = all_up_to(n_max).filter(|l| l.len() >= 2).collect();
    let mut full = vec![];
    for l in &ls {
        let s = gen_t(l);
        match extract_lambda(&s, l.len() as u32 - 2) {
            Ok(x) if x.lambda() == l.prefix(l.len() - 1) => {}
            other => full.push(format!("{l}: {other:?}")),
        }
    }
    let mut r = rng(seed);
    let mut win = vec![];
    for _ in 0..samples {
        let l = random_lambda(n_max, &mut r);
        let s = gen_t(&l);
        let len = r.gen_range(8..=s.len());
        let start = r.gen_range(0..=s.len() - len);
        let w = FoldSeq::with_origin(s.signs[start..start + len].to_vec(), start as i64 + 1);
        if let Ok(x) = extract_lambda(&w, crate::foldseq::default_k_max(len)) {
            if !l.to_string().starts_with(&x.lambda) {
                win.push(format!("{l} window {start}+{len}: {}", x.lambda));
            }
        }
    }
    SuiteReport::new(
        "residue",
        Some(seed),
        format!("n<={n_max} samples={samples}"),
        vec![tally("full sequences", full, ls.len()), tally("windows give prefixes", win, samples)],
    )
}

fn self_avoid_fail(l: &Lambda) -> Option<String> {
    check_self_avoiding(&curve(l)).err().map(|c| format!("{l}: segment {} reuses {:?}", c.index, c.edge))
}

/// Exhaustive up to `n_max`, then `samples` random curves of length
/// `3^random_n`.
pub fn suite_self_avoid(n_max: usize, random_n: usize, samples: usize, seed: u64) -> SuiteReport {
    let ls: Vec<Lambda> = all_up_to(n_max).collect();
    let ex: Vec<String> = ls.par_iter().filter_map(self_avoid_fail).collect();
    let mut r = rng(seed);
    let rs: Vec<Lambda> = (0..samples).map(|_| random_lambda(random_n, &mut r)).collect();
    let rand: Vec<String> = rs.par_iter().filter_map(self_avoid_fail).collect();
    SuiteReport::new(
        "self-avoid",
        Some(seed),
        format!("exhaustive n<={n_max}; random n={random_n} x{samples}"),
        vec![tally("exhaustive", ex, ls.len()), tally("random", rand, samples)],
    )
}

/// Derived curve = every third vertex, carries `T` of the shifted `Λ`, and
/// its unit sides have norm 3.
pub fn suite_derivation(n_max: usize) -> SuiteReport {
    let ls: Vec<Lambda> = all_up_to(n_max).collect();
    let fails: Vec<String> = ls
        .par_iter()
        .filter_map(|l| {
            let c = curve(l);
            let d = match delta_curve(&c) {
                Ok(d) => d,
                Err(e) => return Some(format!("{l}: {e}")),
            };
            let thirds: Vec<EPoint> = c.vertices().into_iter().step_by(3).collect();
            let ok = d.vertices() == thirds
                && d.turns == gen_t(&l.tail())
                && (d.vertices()[1] - d.origin).norm() == 3 * (c.vertices()[1] - c.origin).norm()
                && d.endpoint() == c.endpoint();
            (!ok).then(|| l.to_string())
        })
        .collect();
    SuiteReport::new("derivation", None, format!("n<={n_max}"), vec![tally("delta commutes with realize", fails, ls.len())])
}

fn diameter_fail(l: &Lambda) -> Option<String> {
    let d = diameter(&curve(l));
    let r2 = rho(l.len() as u32).square();
    (!r2.ge_int(d as i128)).then(|| format!("{l}: diameter^2 {d} > rho^2 {}+{}sqrt3", r2.p, r2.q))
}

pub fn suite_diameter(n_max: usize, random_n: usize, samples: usize, seed: u64) -> SuiteReport {
    let ls: Vec<Lambda> = all_up_to(n_max).collect();
    let ex: Vec<String> = ls.par_iter().filter_map(diameter_fail).collect();
    let mut r = rng(seed);
    let rs: Vec<Lambda> = (0..samples).map(|_| random_lambda(random_n, &mut r)).collect();
    let rand: Vec<String> = rs.par_iter().filter_map(diameter_fail).collect();
    let eq = Lambda::all(1).all(|l| diameter(&curve(&l)) == 3);
    SuiteReport::new(
        "diameter",
        Some(seed),
        format!("exhaustive n<={n_max}; random n={random_n} x{samples}"),
        vec![
            tally("exhaustive", ex, ls.len()),
            tally("random", rand, samples),
            Check::new("equality at n=1", eq, "diameter^2 = 3 = rho_1^2"),
        ],
    )
}

/// Smallest `k` over all `2n`-folding curves of the largest covered
/// `k`-triangle, per `n`.
pub fn coverage_minima(n_max: usize) -> Vec<(usize, i64)> {
    (1..=n_max)
        .map(|n| {
            let ls: Vec<Lambda> = Lambda::all(2 * n).collect();
            let min = ls
                .par_iter()
                .map(|l| {
                    let edges: HashSet<_> = curve(l).edges().into_iter().collect();
                    max_covered_triangle(&edges).map_or(0, |t| t.size)
                })
                .min()
                .unwrap_or(0);
            (n, min)
        })
        .collect()
}

pub fn suite_coverage(n_max: usize) -> SuiteReport {
    let mut checks = vec![];
    for (n, min) in coverage_minima(n_max) {
        let bound = 1i64 << (n - 1);
        checks.push(Check::new(format!("n={n} min k >= {bound}"), min >= bound, format!("min k = {min}")));
        if n == 1 {
            checks.push(Check::new("k_1 = 1", min == 1, format!("min k = {min}")));
        }
        if n == 2 {
            checks.push(Check::new("k_2 >= 3", min >= 3, format!("min k = {min}")));
        }
    }
    SuiteReport::new("coverage", None, format!("n<={n_max}"), checks)
}

fn frontier_fail(l: &Lambda) -> Option<String> {
    let c = curve(l);
    let rep = lemma26_report(&c, l);
    if !rep.pass {
        let bad: Vec<&str> = rep.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
        return Some(format!("{l}: {}", bad.join(", ")));
    }
    match inside_outside_ok(&c) {
        Ok(true) => None,
        other => Some(format!("{l}: inside/outside {other:?}")),
    }
}

pub fn suite_frontier(n_max: usize, random_max: usize, samples: usize, seed: u64) -> SuiteReport {
    let ls: Vec<Lambda> = all_up_to(n_max).collect();
    let ex: Vec<String> = ls.par_iter().filter_map(frontier_fail).collect();
    let mut r = rng(seed);
    let rs: Vec<Lambda> = (0..samples).map(|_| random_lambda(r.gen_range(n_max + 1..=random_max.max(n_max + 1)), &mut r)).collect();
    let rand: Vec<String> = rs.par_iter().filter_map(frontier_fail).collect();
    SuiteReport::new(
        "frontier",
        Some(seed),
        format!("exhaustive n<={n_max}; random n<={random_max} x{samples}"),
        vec![tally("exhaustive", ex, ls.len()), tally("random", rand, samples)],
    )
}

/// Per random `(Λ, chain, orientation)`: covering, (P), local rule,
/// re-extracted `Λ`, and agreement of `V_1, V_2` across curves.
pub fn suite_covering(level: usize, radius: i64, samples: usize, seed: u64) -> SuiteReport {
    let mut r = rng(seed);
    let jobs: Vec<(Lambda, XChain, Field)> = (0..samples)
        .map(|_| {
            let l = random_lambda(level, &mut r);
            let c = random_chain(level, &mut r);
            let f = if r.gen::<bool>() { Field::E1 } else { Field::E2 };
            (l, c, f)
        })
        .collect();
    let results: Vec<[Option<String>; 5]> = jobs
        .par_iter()
        .map(|(l, c, f)| {
            let tag = format!("{l} chain {c} {f:?}");
            let p = match build_patch(l, c, *f, HexWindow::new(EPoint::ZERO, radius)) {
                Ok(p) => p,
                Err(e) => return std::array::from_fn(|_| Some(format!("{tag}: {e}"))),
            };
            let v = validate(&p);
            let lat = level_lattices(&p, level as u32);
            let fail = |ok: bool, what: String| (!ok).then(|| format!("{tag}: {what}"));
            [
                fail(v.covering_ok, format!("{} of {} sides, {} bad links", v.covered_edges, v.interior_edges, v.link_errors)),
                fail(v.property_p && v.parity == Some(*f), format!("parity {:?}", v.parity)),
                fail(p.local_rule_disagreements().is_empty(), "local rule disagrees".into()),
                fail(!lat.curves.is_empty() && lat.lambda_agree, format!("{} curves, lambda_agree {}", lat.curves.len(), lat.lambda_agree)),
                fail(
                    lat.agree.len() >= (level - 1).min(2) && lat.agree.iter().chain(&lat.chain_agree).all(|&x| x),
                    format!("agree {:?} chain {:?}", lat.agree, lat.chain_agree),
                ),
            ]
        })
        .collect();
    let names = ["every interior side once", "property (P)", "local rule", "re-extracted lambda", "V_k agreement"];
    let checks = names
        .iter()
        .enumerate()
        .map(|(i, n)| tally(n, results.iter().filter_map(|x| x[i].clone()).collect(), samples))
        .collect();
    SuiteReport::new("covering", Some(seed), format!("N={level} radius={radius} samples={samples}"), checks)
}

/// A patch at level 2 with every junction resolved from the full `Λ`.
pub fn limit_patch(lambda: &Lambda, chain: &XChain, field: Field, radius: i64) -> CoveringPatch {
    let mut p = build_patch(&lambda.prefix(2), chain, field, HexWindow::new(EPoint::ZERO, radius)).expect("window fits");
    p.extend_limit(lambda, chain).expect("chain extends");
    p
}

/// Star point of a constant chain and the half-turn of the separated case.
pub fn suite_cases(seed: u64) -> SuiteReport {
    let mut r = rng(seed);
    let mut checks = vec![];
    let l = random_lambda(20, &mut r);
    let x = EPoint::new(r.gen_range(-3..=3), r.gen_range(-3..=3));
    let chain = XChain::constant(x, 21);
    let star = limit_patch(&l, &chain, Field::E1, 30);
    for mode in [StarMode::Plus, StarMode::Minus] {
        let p = star_connect(&star, mode).expect("star point inside");
        let through = curves_through(&p, x).len();
        checks.push(Check::new(format!("{mode:?}: 3 curves through x"), through == 3, format!("{through} curves at {x}")));
        let sym = symmetry_check(&p, 12);
        checks.push(Check::new(
            format!("{mode:?}: 2pi/3 rotation"),
            sym.invariant,
            format!("{} vertices checked", sym.checked_vertices),
        ));
    }
    checks.push(Check::new(
        "constant chain classifies ThreeStar",
        classify(&l, &Evidence::Chain(XChain::constant(x, 20)), 16) == Ok(CaseTag::ThreeStar),
        "",
    ));
    let alt = Lambda::alternating(-1, 24);
    let all_m = PSeq(vec![Piece::M; 24]);
    let tag = classify(&alt, &Evidence::PSeq(all_m.clone()), 20);
    checks.push(Check::new("P = M, alternating: ThreeSeparated", tag == Ok(CaseTag::ThreeSeparated), format!("{tag:?}")));
    let (chain, tr) = chain_from_pseq(&alt, &all_m, EPoint::ZERO, Dir6::new(0)).expect("lambda long enough");
    let tag = classify(&alt, &Evidence::Chain(chain.clone()), 20);
    checks.push(Check::new("its chain: ThreeSeparated", tag == Ok(CaseTag::ThreeSeparated), format!("{tag:?}")));
    let sep = limit_patch(&alt, &chain, Field::E1, 30);
    let c2 = tr.starts[0] + tr.ends[0];
    let m = half_turn_check(&sep, c2, 20);
    checks.push(Check::new("half-turn about the common midpoint", m.ok(), format!("{} vertices, {} mismatches", m.checked, m.mismatches)));
    let found = find_half_turn(&sep, EPoint::ZERO, 4, 12);
    checks.push(Check::new("half-turn search finds it", found == Some(c2), format!("{found:?} vs {c2}")));
    SuiteReport::new("cases", Some(seed), "lambda length 20, radius 30".into(), checks)
}

fn liso_check(name: &str, rep: &LisoReport, want_all: bool) -> Check {
    let pass = if want_all { rep.all_found() } else { rep.found < rep.samples };
    let worst = rep.results.iter().map(|r| r.scanned).max().unwrap_or(0);
    Check::new(name, pass, format!("{} of {} found, max scanned {worst}", rep.found, rep.samples))
}

/// Local isomorphism at `n = 1` (`radius1` patches) and a smoke test at
/// `n = 2` (`radius2`), with the two negative controls.
pub fn suite_liso(radius1: i64, samples1: usize, radius2: i64, samples2: usize, seed: u64) -> SuiteReport {
    let mut r = rng(seed);
    let l = random_lambda(24, &mut r);
    let origin = XChain::constant(EPoint::ZERO, 25);
    let pseq = PSeq((0..24).map(|_| [Piece::I, Piece::M, Piece::S][r.gen_range(0..3)]).collect());
    let (other, _) = chain_from_pseq(&l, &pseq, EPoint::new(1, 2), Dir6::new(0)).expect("lambda long enough");
    let base = limit_patch(&l, &origin, Field::E1, radius1);
    let plus = star_connect(&base, StarMode::Plus).expect("star point");
    let minus = star_connect(&base, StarMode::Minus).expect("star point");
    let b = limit_patch(&l, &other, Field::E1, radius1);
    let e2 = limit_patch(&l, &origin, Field::E2, radius1);
    let mut checks = vec![];
    let mut run = |name: &str, a: &CoveringPatch, b: &CoveringPatch, n: u32, samples: usize, want_all: bool, r: &mut ChaCha8Rng| {
        let pairs = sample_pairs(a, b, n, samples, r);
        match liso_report(a, b, n, &pairs) {
            Ok(rep) => checks.push(liso_check(name, &rep, want_all)),
            Err(e) => checks.push(Check::new(name, false, e.to_string())),
        }
    };
    run("n=1 same patch", &plus, &plus, 1, samples1, true, &mut r);
    run("n=1 different chain", &plus, &b, 1, samples1, true, &mut r);
    run("n=1 C+ vs C-", &plus, &minus, 1, samples1, true, &mut r);
    run("n=1 E1 vs E2 (none)", &plus, &e2, 1, samples1.min(10), false, &mut r);
    let flip = |first: i8| {
        let mut v = l.0.clone();
        v[0] = first;
        v[1] = 1;
        Lambda::new(v)
    };
    let pp = limit_patch(&flip(1), &origin, Field::E1, 80);
    let mp = limit_patch(&flip(-1), &origin, Field::E1, 80);
    run("n=2 (+,+,..) vs (-,+,..) (misses)", &pp, &mp, 2, 5, false, &mut r);
    if samples2 > 0 {
        let big = limit_patch(&l, &origin, Field::E1, radius2);
        let big_b = limit_patch(&l, &other, Field::E1, radius2);
        run("n=2 same patch", &big, &big, 2, samples2, true, &mut r);
        run("n=2 different chain", &big, &big_b, 2, samples2, true, &mut r);
    }
    SuiteReport::new(
        "liso",
        Some(seed),
        format!("n=1 radius {radius1} x{samples1}; n=2 radius {radius2} x{samples2}"),
        checks,
    )
}

pub const SUITES: [&str; 11] = [
    "sequence",
    "palindrome",
    "residue",
    "self-avoid",
    "derivation",
    "diameter",
    "coverage",
    "frontier",
    "covering",
    "cases",
    "liso",
];
