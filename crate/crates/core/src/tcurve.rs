//! Lattice realization of turn sequences and the checks run on single
//! curves: self-avoidance, derivation, diameter and triangle coverage.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::foldseq::{delta_seq, FoldError, FoldSeq};
use crate::trilattice::{Dir6, EPoint, EdgeKey};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CurveError {
    #[error("curve of {turns} turns cannot be split into groups of 3 segments")]
    BadLength { turns: usize },
    #[error(transparent)]
    Fold(#[from] FoldError),
    #[error("turn {0} is not +1 or -1")]
    BadTurn(i8),
}

/// A t-curve: starts at `origin`, first segment along `θ^scale_exp · u_dir0`,
/// and turns by `±2` direction steps (`+1` = left) at each interior vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TCurve {
    pub origin: EPoint,
    pub dir0: Dir6,
    pub turns: FoldSeq,
    pub scale_exp: u32,
}

/// JSON descriptor of a curve.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveRecord {
    pub origin: EPoint,
    pub dir: u8,
    pub turns: String,
    pub scale_exp: u32,
}

impl From<&TCurve> for CurveRecord {
    fn from(c: &TCurve) -> Self {
        CurveRecord {
            origin: c.origin,
            dir: c.dir0.index(),
            turns: c.turns.to_sign_string(),
            scale_exp: c.scale_exp,
        }
    }
}

impl TryFrom<&CurveRecord> for TCurve {
    type Error = FoldError;
    fn try_from(r: &CurveRecord) -> Result<Self, FoldError> {
        Ok(TCurve {
            origin: r.origin,
            dir0: Dir6::new(r.dir as i64),
            turns: r.turns.parse()?,
            scale_exp: r.scale_exp,
        })
    }
}

pub fn realize(turns: &FoldSeq, origin: EPoint, dir0: Dir6) -> TCurve {
    TCurve { origin, dir0, turns: turns.clone(), scale_exp: 0 }
}

impl TCurve {
    /// The unit-scale curve through `points`, if every step is a unit side
    /// and every turn is `±120°`.
    pub fn from_polyline(points: &[EPoint]) -> Option<TCurve> {
        let dirs: Vec<Dir6> = points.windows(2).map(|w| Dir6::from_unit(w[1] - w[0])).collect::<Option<_>>()?;
        let turns: Vec<i8> = dirs
            .windows(2)
            .map(|d| match d[0].turn_to(d[1]) {
                2 => Some(1),
                -2 => Some(-1),
                _ => None,
            })
            .collect::<Option<_>>()?;
        Some(realize(&FoldSeq::new(turns), points[0], *dirs.first()?))
    }

    pub fn segment_count(&self) -> usize {
        self.turns.len() + 1
    }

    /// Direction index of every segment.
    pub fn dirs(&self) -> Vec<Dir6> {
        let mut out = Vec::with_capacity(self.segment_count());
        let mut d = self.dir0;
        out.push(d);
        for &t in &self.turns.signs {
            d = d.rotate(2 * t as i64);
            out.push(d);
        }
        out
    }

    fn unit_scale(&self) -> EPoint {
        EPoint::new(1, 0).mul_theta_pow(self.scale_exp)
    }

    pub fn vertices(&self) -> Vec<EPoint> {
        let s = self.unit_scale();
        let mut out = Vec::with_capacity(self.segment_count() + 1);
        let mut z = self.origin;
        out.push(z);
        for d in self.dirs() {
            z += d.unit() * s;
            out.push(z);
        }
        out
    }

    pub fn endpoint(&self) -> EPoint {
        *self.vertices().last().expect("at least one vertex")
    }

    pub fn last_dir(&self) -> Dir6 {
        *self.dirs().last().expect("at least one segment")
    }

    /// Unit sides used by the curve, in order. Only meaningful at scale 0.
    pub fn edges(&self) -> Vec<EdgeKey> {
        debug_assert_eq!(self.scale_exp, 0);
        let vs = self.vertices();
        self.dirs().iter().zip(&vs).map(|(&d, &z)| EdgeKey::from_oriented(z, d)).collect()
    }

    /// The curve traversed backwards.
    pub fn reversed(&self) -> TCurve {
        let end = self.endpoint();
        TCurve {
            origin: end,
            dir0: self.last_dir().reverse(),
            turns: crate::foldseq::bar(&self.turns),
            scale_exp: self.scale_exp,
        }
    }
}

/// First reuse of a side: segment `index` (0-based, `A_index`) runs along
/// `edge`, already used by an earlier segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Collision {
    pub index: usize,
    pub edge: EdgeKey,
}

/// Self-avoidance: no nonoriented side supports two segments.
///
/// Works in the curve's own frame (scale factor stripped), with a dense
/// bitset over the bounding box of the walk.
pub fn check_self_avoiding(c: &TCurve) -> Result<(), Collision> {
    let dirs = c.dirs();
    let mut z = EPoint::ZERO;
    let (mut amin, mut amax, mut bmin, mut bmax) = (0, 0, 0, 0);
    for d in &dirs {
        z += d.unit();
        amin = amin.min(z.a);
        amax = amax.max(z.a);
        bmin = bmin.min(z.b);
        bmax = bmax.max(z.b);
    }
    let width = (amax - amin + 1) as usize;
    let height = (bmax - bmin + 1) as usize;
    let mut bits = vec![0u64; (width * height * 3).div_ceil(64)];
    let mut z = EPoint::ZERO;
    for (i, &d) in dirs.iter().enumerate() {
        let e = EdgeKey::from_oriented(z, d);
        let slot = (((e.base.b - bmin) as usize) * width + (e.base.a - amin) as usize) * 3 + e.axis as usize;
        let (w, m) = (slot / 64, 1u64 << (slot % 64));
        if bits[w] & m != 0 {
            let s = EPoint::new(1, 0).mul_theta_pow(c.scale_exp);
            let base = c.origin + EPoint::new(e.base.a, e.base.b) * s;
            let edge = if c.scale_exp == 0 { EdgeKey { base, axis: e.axis } } else { e };
            return Err(Collision { index: i, edge });
        }
        bits[w] |= m;
        z += d.unit();
    }
    Ok(())
}

/// Derivation Δ: merge each group of three segments into one.
///
/// A group with turns `(ε, −ε)` starting along `u_d` spans `u_d·θ` when
/// `ε = +1` and `u_d·θ̄ = u_{d−1}·θ` when `ε = −1`, so the derived curve
/// lives on the next frame with first direction `d` or `d − 1`.
pub fn delta_curve(c: &TCurve) -> Result<TCurve, CurveError> {
    let n = c.turns.len();
    if n % 3 != 2 {
        return Err(CurveError::BadLength { turns: n });
    }
    let first = c.turns.signs.first().copied().unwrap_or(1);
    let turns = if n == 2 && c.turns.signs[0] == -c.turns.signs[1] {
        FoldSeq::with_origin(vec![], c.turns.origin_index)
    } else {
        delta_seq(&c.turns, c.turns.origin_index - 1)?
    };
    let dir0 = if first > 0 { c.dir0 } else { c.dir0.rotate(-1) };
    Ok(TCurve { origin: c.origin, dir0, turns, scale_exp: c.scale_exp + 1 })
}

/// `p + q√3` with integer coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZSqrt3 {
    pub p: i128,
    pub q: i128,
}

impl ZSqrt3 {
    pub fn square(self) -> ZSqrt3 {
        ZSqrt3 { p: self.p * self.p + 3 * self.q * self.q, q: 2 * self.p * self.q }
    }

    /// `v ≤ self` for a nonnegative `self` with `p, q ≥ 0`.
    pub fn ge_int(self, v: i128) -> bool {
        debug_assert!(self.p >= 0 && self.q >= 0);
        let rest = v - self.p;
        rest <= 0 || rest * rest <= 3 * self.q * self.q
    }

    pub fn to_f64(self) -> f64 {
        self.p as f64 + self.q as f64 * 3f64.sqrt()
    }
}

/// Diameter bound `ρ_n` for `n`-folding curves: `ρ_1 = √3`,
/// `ρ_{n+1} = √3·ρ_n + 1`. `ρ_0 = 1` (a single segment).
pub fn rho(n: u32) -> ZSqrt3 {
    if n == 0 {
        return ZSqrt3 { p: 1, q: 0 };
    }
    let mut r = ZSqrt3 { p: 0, q: 1 };
    for _ in 1..n {
        r = ZSqrt3 { p: 3 * r.q + 1, q: r.p };
    }
    r
}

fn cross(o: (i64, i64), a: (i64, i64), b: (i64, i64)) -> i128 {
    (a.0 - o.0) as i128 * (b.1 - o.1) as i128 - (a.1 - o.1) as i128 * (b.0 - o.0) as i128
}

/// Convex hull, counterclockwise, no collinear points.
pub fn convex_hull(points: &[EPoint]) -> Vec<EPoint> {
    let mut pts: Vec<EPoint> = points.to_vec();
    pts.sort_by_key(|p| p.affine());
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let mut hull: Vec<EPoint> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &EPoint>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while hull.len() >= start + 2
                && cross(hull[hull.len() - 2].affine(), hull[hull.len() - 1].affine(), p.affine()) <= 0
            {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// Exact squared diameter of a point set (hull + antipodal pairs).
pub fn squared_diameter(points: &[EPoint]) -> i64 {
    let h = convex_hull(points);
    let m = h.len();
    match m {
        0 | 1 => return 0,
        2 => return (h[1] - h[0]).norm(),
        _ => {}
    }
    let area = |i: usize, j: usize, k: usize| cross(h[i % m].affine(), h[j % m].affine(), h[k % m].affine()).abs();
    let mut best = 0;
    let mut j = 1;
    for i in 0..m {
        let i2 = i + 1;
        while area(i, i2, j + 1) > area(i, i2, j) {
            j += 1;
        }
        // all antipodal partners of edge (i, i+1)
        let mut k = j;
        loop {
            best = best.max((h[i % m] - h[k % m]).norm()).max((h[i2 % m] - h[k % m]).norm());
            if area(i, i2, k + 1) == area(i, i2, k) && k < j + m {
                k += 1;
            } else {
                break;
            }
        }
    }
    best
}

pub fn diameter(c: &TCurve) -> i64 {
    squared_diameter(&c.vertices())
}

/// A fully covered `size`-triangle: up triangles have vertices
/// `anchor + (i, j)` with `i, j ≥ 0, i + j ≤ size`; down triangles
/// `anchor − (i, j)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoveredTriangle {
    pub size: i64,
    pub anchor: EPoint,
    pub up: bool,
}

fn up_unit_sides(p: EPoint) -> [EdgeKey; 3] {
    [
        EdgeKey { base: p, axis: 0 },
        EdgeKey { base: p, axis: 1 },
        EdgeKey { base: p + EPoint::new(1, 0), axis: 2 },
    ]
}

fn down_unit_sides(q: EPoint) -> [EdgeKey; 3] {
    [
        EdgeKey { base: q - EPoint::new(1, 0), axis: 0 },
        EdgeKey { base: q - EPoint::new(0, 1), axis: 1 },
        EdgeKey { base: q - EPoint::new(0, 1), axis: 2 },
    ]
}

/// Largest `k` such that every unit side inside some `k`-triangle lies in
/// `edges`.
///
/// The sides of an up `k`-triangle are exactly the sides of its unit up
/// triangles, and it splits as the unit triangle at its anchor plus two up
/// `(k−1)`-triangles, which gives a one-pass recurrence (mirrored for down
/// triangles).
pub fn max_covered_triangle(edges: &HashSet<EdgeKey>) -> Option<CoveredTriangle> {
    let mut best: Option<CoveredTriangle> = None;
    for up in [true, false] {
        let mut anchors: Vec<EPoint> = edges
            .iter()
            .flat_map(|e| {
                let (x, y) = e.endpoints();
                [x, y]
            })
            .collect::<HashSet<_>>()
            .into_iter()
            .filter(|&p| {
                let sides = if up { up_unit_sides(p) } else { down_unit_sides(p) };
                sides.iter().all(|s| edges.contains(s))
            })
            .collect();
        // children of an up anchor have larger a+b; of a down anchor smaller
        anchors.sort_by_key(|p| if up { (-(p.a + p.b), p.a, p.b) } else { (p.a + p.b, -p.a, -p.b) });
        let mut size: HashMap<EPoint, i64> = HashMap::with_capacity(anchors.len());
        let (c1, c2) = if up {
            (EPoint::new(1, 0), EPoint::new(0, 1))
        } else {
            (EPoint::new(-1, 0), EPoint::new(0, -1))
        };
        for p in anchors {
            let s = 1 + size.get(&(p + c1)).copied().unwrap_or(0).min(size.get(&(p + c2)).copied().unwrap_or(0));
            size.insert(p, s);
            let better = match best {
                None => true,
                Some(b) => s > b.size || (s == b.size && (up, p) < (b.up, b.anchor)),
            };
            if better {
                best = Some(CoveredTriangle { size: s, anchor: p, up });
            }
        }
    }
    best
}

/// Sides inside a `k`-triangle, used by tests and callers that want to
/// inspect a reported triangle.
pub fn triangle_sides(t: &CoveredTriangle) -> Vec<EdgeKey> {
    let mut out = vec![];
    for i in 0..t.size {
        for j in 0..t.size - i {
            let off = EPoint::new(i, j);
            if t.up {
                out.extend(up_unit_sides(t.anchor + off));
            } else {
                out.extend(down_unit_sides(t.anchor - off));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::foldseq::{gen_t, Lambda};

    fn lam(s: &str) -> Lambda {
        s.parse().unwrap()
    }

    fn curve(s: &str) -> TCurve {
        realize(&gen_t(&lam(s)), EPoint::ZERO, Dir6::new(0))
    }

    #[test]
    fn realize_examples() {
        let c = curve("+");
        assert_eq!(
            c.vertices(),
            vec![EPoint::ZERO, EPoint::new(1, 0), EPoint::new(0, 1), EPoint::new(1, 1)]
        );
        assert_eq!(c.dirs(), vec![Dir6::new(0), Dir6::new(2), Dir6::new(0)]);
        let single = realize(&FoldSeq::new(vec![]), EPoint::ZERO, Dir6::new(0));
        assert_eq!(single.vertices(), vec![EPoint::ZERO, EPoint::new(1, 0)]);
        for n in 0..=8 {
            for l in Lambda::all(n) {
                let c = curve(&l.to_string());
                assert_eq!(c.endpoint().norm(), 3i64.pow(n as u32));
                assert_eq!(c.vertices().len(), c.turns.len() + 2);
                assert_eq!(c.last_dir(), c.dir0);
            }
        }
    }

    #[test]
    fn self_avoid_examples() {
        for l in Lambda::all(8) {
            assert_eq!(check_self_avoiding(&curve(&l.to_string())), Ok(()));
        }
        let bad = realize(&"++++".parse().unwrap(), EPoint::ZERO, Dir6::new(0));
        assert_eq!(
            check_self_avoiding(&bad),
            Err(Collision { index: 3, edge: EdgeKey::between(EPoint::ZERO, EPoint::new(1, 0)).unwrap() })
        );
        let empty = realize(&FoldSeq::new(vec![]), EPoint::ZERO, Dir6::new(0));
        assert_eq!(check_self_avoiding(&empty), Ok(()));
    }

    #[test]
    fn self_avoid_matches_hashset_oracle() {
        let mut rng = 0x9E3779B97F4A7C15u64;
        for _ in 0..200 {
            let len = 2 + (rng % 30) as usize;
            let mut t = vec![];
            for _ in 0..len {
                rng ^= rng << 13;
                rng ^= rng >> 7;
                rng ^= rng << 17;
                t.push(if rng & 1 == 0 { 1 } else { -1 });
            }
            let c = realize(&FoldSeq::new(t), EPoint::new(5, -3), Dir6::new((rng % 6) as i64));
            let mut seen = HashSet::new();
            let oracle = c.edges().iter().position(|e| !seen.insert(*e));
            assert_eq!(check_self_avoiding(&c).err().map(|x| x.index), oracle);
        }
    }

    #[test]
    fn delta_examples() {
        let d = delta_curve(&curve("+")).unwrap();
        assert_eq!(d.vertices(), vec![EPoint::ZERO, EPoint::new(1, 1)]);
        let c = curve("+-");
        let d = delta_curve(&c).unwrap();
        assert_eq!(d.turns, gen_t(&lam("-")));
        assert_eq!(d.scale_exp, 1);
        let dd = delta_curve(&d).unwrap();
        assert_eq!(dd.segment_count(), 1);
        assert_eq!((dd.endpoint() - dd.origin).norm(), 9);
        assert_eq!(
            delta_curve(&realize(&"+-+".parse().unwrap(), EPoint::ZERO, Dir6::new(0))),
            Err(CurveError::BadLength { turns: 3 })
        );
    }

    #[test]
    fn delta_commutes_with_realize() {
        for n in 1..=8 {
            for l in Lambda::all(n) {
                for d0 in [0, 3] {
                    let c = realize(&gen_t(&l), EPoint::new(2, 7), Dir6::new(d0));
                    let d = delta_curve(&c).unwrap();
                    let every_third: Vec<_> = c.vertices().into_iter().step_by(3).collect();
                    assert_eq!(d.vertices(), every_third);
                    assert_eq!(d.turns, gen_t(&l.tail()));
                    let n0 = (c.endpoint() - c.origin).norm();
                    let n1 = (d.endpoint() - d.origin).norm();
                    assert_eq!(n0, n1);
                    if n >= 2 {
                        let dd = delta_curve(&d).unwrap();
                        assert_eq!((dd.vertices()[1] - dd.origin).norm(), 9);
                    }
                }
            }
        }
    }

    fn brute_diameter(p: &[EPoint]) -> i64 {
        let mut best = 0;
        for (i, a) in p.iter().enumerate() {
            for b in &p[i + 1..] {
                best = best.max((*a - *b).norm());
            }
        }
        best
    }

    #[test]
    fn diameter_examples() {
        assert_eq!(diameter(&curve("+")), 3);
        assert_eq!(diameter(&curve("")), 1);
        assert_eq!(rho(1), ZSqrt3 { p: 0, q: 1 });
        assert_eq!(rho(1).square(), ZSqrt3 { p: 3, q: 0 });
        for n in 1..=6 {
            for l in Lambda::all(n) {
                let c = curve(&l.to_string());
                let d = diameter(&c);
                assert_eq!(d, brute_diameter(&c.vertices()), "{l}");
                assert!(rho(n as u32).square().ge_int(d as i128));
            }
        }
    }

    #[test]
    fn rho_closed_form() {
        let s = 3f64.sqrt();
        for n in 1..=10u32 {
            let closed = (s.powi(n as i32 - 1) * (4.0 - s) - 1.0) / (s - 1.0);
            assert!((rho(n).to_f64() - closed).abs() < 1e-9 * closed);
        }
    }

    #[test]
    fn hull_random_points() {
        let mut rng = 12345u64;
        for _ in 0..300 {
            let mut pts = vec![];
            for _ in 0..(3 + rng % 40) {
                rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                pts.push(EPoint::new(((rng >> 33) % 21) as i64 - 10, ((rng >> 45) % 21) as i64 - 10));
            }
            assert_eq!(squared_diameter(&pts), brute_diameter(&pts));
        }
    }

    fn brute_max_triangle(edges: &HashSet<EdgeKey>) -> i64 {
        let pts: HashSet<EPoint> = edges.iter().flat_map(|e| [e.endpoints().0, e.endpoints().1]).collect();
        let mut best = 0;
        for k in 1..20 {
            for &p in &pts {
                for up in [true, false] {
                    let t = CoveredTriangle { size: k, anchor: p, up };
                    if triangle_sides(&t).iter().all(|s| edges.contains(s)) {
                        best = best.max(k);
                    }
                }
            }
        }
        best
    }

    #[test]
    fn coverage_examples() {
        for l in Lambda::all(2) {
            let e: HashSet<_> = curve(&l.to_string()).edges().into_iter().collect();
            assert_eq!(max_covered_triangle(&e).unwrap().size, 1);
        }
        for l in Lambda::all(4) {
            let e: HashSet<_> = curve(&l.to_string()).edges().into_iter().collect();
            let t = max_covered_triangle(&e).unwrap();
            assert!(t.size >= 3);
            assert_eq!(t.size, brute_max_triangle(&e));
            assert!(triangle_sides(&t).iter().all(|s| e.contains(s)));
        }
        let single: HashSet<_> = curve("").edges().into_iter().collect();
        assert_eq!(max_covered_triangle(&single), None);
    }

    #[test]
    fn reversal_is_same_sequence() {
        for l in Lambda::all(4) {
            let c = curve(&l.to_string());
            let r = c.reversed();
            assert_eq!(r.turns.signs, c.turns.signs);
            let mut v = c.vertices();
            v.reverse();
            assert_eq!(r.vertices(), v);
        }
    }
}
