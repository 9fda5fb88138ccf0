use std::collections::{BTreeSet, HashSet};

use proptest::prelude::*;
use terdragon::covering::*;
use terdragon::foldseq::*;
use terdragon::frontier::decompose;
use terdragon::tcurve::{max_covered_triangle, TCurve};
use terdragon::trilattice::*;

fn curve_at(p: &CoveringPatch, id: usize) -> TCurve {
    TCurve::from_polyline(&p.curve_polyline(id)).expect("patch curve is a t-curve")
}

fn parts(c: &TCurve, n: u32) -> [BTreeSet<EPoint>; 4] {
    let (l, r) = decompose(c, n).unwrap();
    let s = |v: &[EPoint]| v.iter().copied().collect::<BTreeSet<_>>();
    [s(l.initial_part()), s(l.terminal_part()), s(r.initial_part()), s(r.terminal_part())]
}

const LI: usize = 0;
const LS: usize = 1;
const RI: usize = 2;
const RS: usize = 3;

#[test]
fn six_curves_share_frontiers() {
    for (l, field) in [("+--", Field::E1), ("-+-", Field::E1), ("++-", Field::E2)] {
        let l: Lambda = l.parse().unwrap();
        let chain = XChain::new(vec![EPoint::ZERO, EPoint::new(1, 0), EPoint::new(1, 3), EPoint::new(1, 3)]);
        let p = build_patch(&l, &chain, field, HexWindow::new(EPoint::ZERO, 40)).unwrap();
        let frame = chain.frame(3);
        let centers: Vec<EPoint> =
            p.guaranteed.points().filter(|&v| frame.contains(v) && (v - p.guaranteed.center).hex_norm() <= 10).collect();
        assert!(!centers.is_empty());
        for x in centers {
            // clockwise by ray, starting from a curve ending at x
            let mut at: Vec<(u8, bool, usize)> = vec![];
            for c in p.curves.iter().filter(|c| c.complete && (c.start == x || c.end == x)) {
                let pts = p.curve_polyline(c.id);
                let (ray, incoming) = if c.start == x {
                    (Dir6::from_unit(pts[1] - pts[0]).unwrap().index(), false)
                } else {
                    (Dir6::from_unit(pts[pts.len() - 2] - x).unwrap().index(), true)
                };
                at.push((ray, incoming, c.id));
            }
            assert_eq!(at.len(), 6, "at {x}");
            at.sort_by_key(|&(r, _, _)| std::cmp::Reverse(r));
            let k = at.iter().position(|a| a.1).unwrap();
            at.rotate_left(k);
            assert!(at.iter().enumerate().all(|(i, a)| a.1 == (i % 2 == 0)), "ends alternate at {x}");
            let fs: Vec<[BTreeSet<EPoint>; 4]> = at.iter().map(|a| parts(&curve_at(&p, a.2), 3)).collect();
            for i in 0..6 {
                let j = (i + 1) % 6;
                let all = |f: &[BTreeSet<EPoint>; 4]| f.iter().flatten().copied().collect::<BTreeSet<_>>();
                let shared: BTreeSet<EPoint> = all(&fs[i]).intersection(&all(&fs[j])).copied().collect();
                // paper numbering is 1-based: i = 1, 3, 5 are the even indices here
                if i % 2 == 0 {
                    assert_eq!(shared, fs[i][LS], "at {x}, pair {i}");
                    assert_eq!(shared, fs[j][LI], "at {x}, pair {i}");
                } else {
                    assert_eq!(shared, fs[i][RI], "at {x}, pair {i}");
                    assert_eq!(shared, fs[j][RS], "at {x}, pair {i}");
                }
            }
        }
    }
}

#[test]
fn three_curves_around_a_level_two_triangle_cover_a_3_triangle() {
    for l in Lambda::all(2) {
        let chain = XChain::new(vec![EPoint::ZERO, EPoint::new(0, 1), EPoint::new(0, 1)]);
        let p = build_patch(&l, &chain, Field::E1, HexWindow::new(EPoint::ZERO, 24)).unwrap();
        let step = level_disp(&l, 2);
        let frame = chain.frame(2);
        let mut checked = 0;
        for a in p.guaranteed.points().filter(|&v| frame.contains(v) && (v - p.guaranteed.center).hex_norm() <= 8) {
            for d in [0, 1] {
                let b = a + step * Dir6::new(d).unit();
                let c = a + step * Dir6::new(d + 1).unit();
                let corners = [a, b, c];
                let sides: Vec<&CurveInfo> = p
                    .curves
                    .iter()
                    .filter(|k| k.complete && corners.contains(&k.start) && corners.contains(&k.end))
                    .collect();
                assert_eq!(sides.len(), 3);
                let edges: HashSet<EdgeKey> = sides.iter().flat_map(|k| curve_at(&p, k.id).edges()).collect();
                let t = max_covered_triangle(&edges).unwrap();
                assert!(t.size >= 3, "{l} at {a}: {t:?}");
                checked += 1;
            }
        }
        assert!(checked > 5);
    }
}

#[test]
fn star_modes_isometric_not_translated() {
    let l: Lambda = "+-++-+--+-+--++-+-++".parse().unwrap();
    let chain = XChain::constant(EPoint::ZERO, 21);
    let mut base = build_patch(&l.prefix(2), &chain, Field::E1, HexWindow::new(EPoint::ZERO, 30)).unwrap();
    base.extend_limit(&l, &chain).unwrap();
    let plus = star_connect(&base, StarMode::Plus).unwrap();
    let minus = star_connect(&base, StarMode::Minus).unwrap();
    let isos = matching_isometries(&plus, EPoint::ZERO, &minus, EPoint::ZERO, 20);
    assert!(!isos.is_empty());
    assert!(!isos.contains(&PointIsometry { rotation: 0, reflect: false }));
    // any translation carries the unique star point to the star point
    let id = Isometry { linear: PointIsometry { rotation: 0, reflect: false }, shift: EPoint::ZERO };
    let near = HexWindow::new(EPoint::ZERO, 5);
    assert!(!structure_matches(&plus, &minus, id, near.points(), false).ok());
}

#[test]
fn pseq_classification_consistent_with_patch() {
    // a chain read off a built patch gives back the same P-sequence
    let l = Lambda::alternating(-1, 10);
    let p: PSeq = "MIMSMIISMM".parse().unwrap();
    let (chain, tr) = chain_from_pseq(&l, &p, EPoint::ZERO, Dir6::new(0)).unwrap();
    let patch = build_patch(&l.prefix(3), &chain, Field::E1, HexWindow::new(EPoint::ZERO, 30)).unwrap();
    // the curve through the seed contains C_3
    let id = patch.seg(EdgeKey::from_oriented(EPoint::ZERO, Dir6::new(0))).unwrap().curve;
    let c = patch.curves[id];
    assert!(c.complete);
    assert_eq!((c.start, c.end), (tr.starts[3], tr.ends[3]));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn built_patches_are_coverings(
        signs in proptest::collection::vec(prop::bool::ANY, 1..=3),
        off in (-3i64..=3, -3i64..=3),
        e2 in prop::bool::ANY,
    ) {
        let l = Lambda::new(signs.iter().map(|&b| if b { 1 } else { -1 }).collect());
        let n = l.len();
        let x0 = EPoint::new(off.0, off.1);
        let mut pts = vec![x0];
        for k in 1..=n {
            pts.push(pts[k - 1] + EPoint::new(1, 0).mul_theta_pow(k as u32 - 1) * EPoint::new((k % 2) as i64, 0));
        }
        let chain = XChain::new(pts);
        let field = if e2 { Field::E2 } else { Field::E1 };
        let p = build_patch(&l, &chain, field, HexWindow::new(EPoint::ZERO, 20)).unwrap();
        let r = validate(&p);
        prop_assert!(r.covering_ok && r.property_p);
        prop_assert_eq!(r.parity, Some(field));
        prop_assert!(p.local_rule_disagreements().is_empty());
        let want = gen_t(&l);
        for c in p.curves.iter().filter(|c| c.complete) {
            let t = TCurve::from_polyline(&p.curve_polyline(c.id)).unwrap();
            prop_assert_eq!(&t.turns, &want);
        }
    }

    #[test]
    fn pseq_roundtrip(ps in proptest::collection::vec(0u8..3, 1..14), first in prop::bool::ANY) {
        let p = PSeq(ps.iter().map(|&i| [Piece::I, Piece::M, Piece::S][i as usize]).collect());
        let l = Lambda::alternating(if first { 1 } else { -1 }, p.0.len());
        let (chain, _) = chain_from_pseq(&l, &p, EPoint::new(2, -1), Dir6::new(4)).unwrap();
        prop_assert!(chain.validate().is_ok());
        let (back, _) = pseq_from_chain(&l, &chain, EPoint::new(2, -1), Dir6::new(4)).unwrap();
        prop_assert_eq!(back, p);
    }
}
