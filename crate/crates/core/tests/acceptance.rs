//! The ten acceptance criteria at full scale. Each prints one PASS/FAIL
//! line with its wall time; the test fails if any criterion fails or runs
//! past its limit.

use std::time::{Duration, Instant};

use terdragon::covering::{star_connect, StarMode, XChain};
use terdragon::render::{render_svg, SvgCurve, SvgStyle};
use terdragon::trilattice::{EPoint, Field};
use terdragon::verify::*;

struct Outcome {
    id: u32,
    name: &'static str,
    pass: bool,
    elapsed: Duration,
    limit: Duration,
    detail: String,
}

fn run(id: u32, name: &'static str, limit_s: u64, f: impl FnOnce() -> Vec<SuiteReport>) -> Outcome {
    let t = Instant::now();
    let reports = f();
    let elapsed = t.elapsed();
    let mut detail = vec![];
    for r in &reports {
        for c in r.checks.iter().filter(|c| !c.pass) {
            detail.push(format!("{}/{}: {}", r.suite, c.name, c.detail));
        }
    }
    Outcome {
        id,
        name,
        pass: reports.iter().all(|r| r.pass),
        elapsed,
        limit: Duration::from_secs(limit_s),
        detail: detail.join("; "),
    }
}

fn figure_one_svg() -> String {
    let l = terdragon::foldseq::Lambda::alternating(-1, 20);
    let base = limit_patch(&l, &XChain::constant(EPoint::ZERO, 21), Field::E1, 24);
    let star = star_connect(&base, StarMode::Plus).expect("star point");
    let ids = terdragon::covering::curves_through(&star, EPoint::ZERO);
    let curves: Vec<SvgCurve> = ids
        .iter()
        .enumerate()
        .map(|(i, &id)| SvgCurve { id: i, points: star.curve_polyline(id) })
        .collect();
    render_svg(&curves, &SvgStyle::default())
}

fn liso_json() -> String {
    use rand::SeedableRng;
    let l = terdragon::foldseq::Lambda::alternating(1, 20);
    let p = limit_patch(&l, &XChain::constant(EPoint::new(1, 1), 21), Field::E1, 40);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    serde_json::to_string(&terdragon::analysis::lisop_self(&p, 1, 10, &mut rng).unwrap()).unwrap()
}

fn determinism() -> Vec<SuiteReport> {
    let twice = |f: &dyn Fn() -> String| f() == f();
    let checks = vec![
        terdragon::frontier::Check::new("covering report", twice(&|| suite_covering(3, 24, 4, 11).to_json()), ""),
        terdragon::frontier::Check::new("self-avoid report", twice(&|| suite_self_avoid(4, 9, 6, 11).to_json()), ""),
        terdragon::frontier::Check::new("liso report", twice(&liso_json), ""),
        terdragon::frontier::Check::new("cases report", twice(&|| suite_cases(11).to_json()), ""),
        terdragon::frontier::Check::new("figure svg", twice(&figure_one_svg), ""),
    ];
    let pass = checks.iter().all(|c| c.pass);
    vec![SuiteReport { suite: "determinism".into(), seed: Some(11), params: String::new(), pass, checks }]
}

#[test]
fn acceptance() {
    let seed = 2024;
    let outcomes = vec![
        run(1, "sequence laws, n <= 8", 5, || vec![suite_sequence(8)]),
        run(2, "self-avoidance, n <= 8 and 200 x n = 12", 60, || vec![suite_self_avoid(8, 12, 200, seed)]),
        run(3, "derivation coherence, n <= 8", 10, || vec![suite_derivation(8)]),
        run(4, "diameter bound, n <= 8 and n = 10", 60, || vec![suite_diameter(8, 10, 200, seed)]),
        run(5, "coverage of triangles, n = 1, 2, 3", 120, || vec![suite_coverage(3)]),
        run(6, "frontier laws, n <= 7 and n <= 9", 60, || vec![suite_frontier(7, 9, 40, seed)]),
        run(7, "covering validity and (P), N = 4 radius 40", 120, || vec![suite_covering(4, 40, 10, seed)]),
        run(8, "star and separated cases", 60, || vec![suite_cases(seed)]),
        run(9, "local isomorphism, n = 1 and n = 2", 600, || vec![suite_liso(60, 50, 200, 5, seed)]),
        run(10, "determinism", 30, determinism),
    ];
    let mut ok = true;
    for o in &outcomes {
        let in_time = o.elapsed <= o.limit;
        let pass = o.pass && in_time;
        ok &= pass;
        println!(
            "[{}] {:>2}. {} ({:.1}s / {}s){}{}",
            if pass { "PASS" } else { "FAIL" },
            o.id,
            o.name,
            o.elapsed.as_secs_f64(),
            o.limit.as_secs(),
            if in_time { "" } else { " over time limit" },
            if o.detail.is_empty() { String::new() } else { format!(" {}", o.detail) },
        );
    }
    assert!(ok, "acceptance criteria failed");
}
