//! Left and right frontiers of a folding curve, their I/S halves, and the
//! sign and sublattice laws they satisfy.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::foldseq::Lambda;
use crate::tcurve::TCurve;
use crate::trilattice::{apexes, divisible_by_theta_pow, w_contains, Dir6, EPoint, EdgeKey};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FrontierError {
    #[error("curve has {segments} segments, at least 3 needed")]
    TooShort { segments: usize },
    #[error("region boundary and apex rule disagree ({missing} sides missing, {extra} extra)")]
    MismatchWithApexRule { missing: usize, extra: usize },
    #[error("region boundary is not a simple cycle through both endpoints")]
    NotSimple,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    L,
    R,
}

/// A frontier walk from the initial to the terminal point of the curve.
/// `angles[i - 1]` is the sign at `vertices[i]`: `+1` when the walk turns
/// 60° counterclockwise there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrontierPath {
    pub side: Side,
    pub vertices: Vec<EPoint>,
    pub angles: Vec<i8>,
    pub split_index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrontierRecord {
    pub side: Side,
    pub vertices: Vec<EPoint>,
    pub angles: String,
    pub split_index: Option<usize>,
}

impl FrontierPath {
    pub fn edge_count(&self) -> usize {
        self.vertices.len().saturating_sub(1)
    }

    /// Sign at vertex `i` (1-based, interior vertices only).
    pub fn angle(&self, i: usize) -> i8 {
        self.angles[i - 1]
    }

    pub fn record(&self) -> FrontierRecord {
        FrontierRecord {
            side: self.side,
            vertices: self.vertices.clone(),
            angles: self.angles.iter().map(|&a| if a > 0 { '+' } else { '-' }).collect(),
            split_index: self.split_index,
        }
    }

    /// Vertices up to and including the split point.
    pub fn initial_part(&self) -> &[EPoint] {
        &self.vertices[..=self.split_index.expect("path not decomposed")]
    }

    /// Vertices from the split point on.
    pub fn terminal_part(&self) -> &[EPoint] {
        &self.vertices[self.split_index.expect("path not decomposed")..]
    }
}

fn angles_of(vertices: &[EPoint]) -> Vec<i8> {
    let dirs: Vec<Dir6> = vertices
        .windows(2)
        .map(|w| Dir6::from_unit(w[1] - w[0]).expect("frontier steps are unit sides"))
        .collect();
    dirs.windows(2).map(|d| d[0].turn_to(d[1]).signum() as i8).collect()
}

fn vertex_set(c: &TCurve) -> Result<HashSet<EPoint>, FrontierError> {
    debug_assert_eq!(c.scale_exp, 0);
    if c.segment_count() < 3 {
        return Err(FrontierError::TooShort { segments: c.segment_count() });
    }
    Ok(c.vertices().into_iter().collect())
}

/// Sides with both endpoints on the curve and exactly one apex on it.
pub fn frontier_edges(c: &TCurve) -> Result<HashSet<EdgeKey>, FrontierError> {
    let vs = vertex_set(c)?;
    Ok(apex_rule(&vs))
}

fn apex_rule(vs: &HashSet<EPoint>) -> HashSet<EdgeKey> {
    let mut out = HashSet::new();
    for &x in vs {
        for d in 0..3 {
            let d = Dir6::new(d);
            if !vs.contains(&(x + d.unit())) {
                continue;
            }
            let (l, r) = apexes(x, d);
            if vs.contains(&l) != vs.contains(&r) {
                out.insert(EdgeKey::from_oriented(x, d));
            }
        }
    }
    out
}

/// A unit triangle: `up` has vertices `p, p+1, p+ω`; the other one
/// `p+1, p+1+ω, p+ω`. Both listed counterclockwise by [`Triangle::corners`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Triangle {
    pub anchor: EPoint,
    pub up: bool,
}

impl Triangle {
    pub fn corners(&self) -> [EPoint; 3] {
        let p = self.anchor;
        if self.up {
            [p, p + EPoint::new(1, 0), p + EPoint::new(0, 1)]
        } else {
            [p + EPoint::new(1, 0), p + EPoint::new(1, 1), p + EPoint::new(0, 1)]
        }
    }

    pub fn sides(&self) -> [EdgeKey; 3] {
        let c = self.corners();
        [0, 1, 2].map(|i| EdgeKey::between(c[i], c[(i + 1) % 3]).expect("unit side"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    pub triangles: Vec<Triangle>,
    /// Counterclockwise closed walk (first vertex not repeated), starting
    /// at the curve's initial point.
    pub boundary: Vec<EPoint>,
}

fn triangles_of(vs: &HashSet<EPoint>) -> Vec<Triangle> {
    let mut out: Vec<Triangle> = vs
        .iter()
        .flat_map(|&p| [Triangle { anchor: p, up: true }, Triangle { anchor: p - EPoint::new(1, 0), up: false }])
        .filter(|t| t.corners().iter().all(|q| vs.contains(q)))
        .collect();
    out.sort();
    out
}

/// Triangles with all three corners on the curve, and the boundary of
/// their union, checked against the apex rule.
pub fn region(c: &TCurve) -> Result<Region, FrontierError> {
    let vs = vertex_set(c)?;
    let triangles = triangles_of(&vs);
    let mut count: HashMap<EdgeKey, u8> = HashMap::new();
    for t in &triangles {
        for s in t.sides() {
            *count.entry(s).or_default() += 1;
        }
    }
    let boundary_sides: HashSet<EdgeKey> = count.iter().filter(|(_, &n)| n == 1).map(|(&e, _)| e).collect();
    let apex = apex_rule(&vs);
    if boundary_sides != apex {
        return Err(FrontierError::MismatchWithApexRule {
            missing: apex.difference(&boundary_sides).count(),
            extra: boundary_sides.difference(&apex).count(),
        });
    }
    let mut next: HashMap<EPoint, EPoint> = HashMap::new();
    for t in &triangles {
        let c = t.corners();
        for i in 0..3 {
            let (a, b) = (c[i], c[(i + 1) % 3]);
            if boundary_sides.contains(&EdgeKey::between(a, b).unwrap()) && next.insert(a, b).is_some() {
                return Err(FrontierError::NotSimple);
            }
        }
    }
    let w = c.origin;
    let mut boundary = vec![w];
    let mut z = *next.get(&w).ok_or(FrontierError::NotSimple)?;
    while z != w {
        if boundary.len() > next.len() {
            return Err(FrontierError::NotSimple);
        }
        boundary.push(z);
        z = *next.get(&z).ok_or(FrontierError::NotSimple)?;
    }
    if boundary.len() != next.len() {
        return Err(FrontierError::NotSimple);
    }
    Ok(Region { triangles, boundary })
}

/// `(F_L, F_R)`: the counterclockwise boundary arc from the initial point
/// to the terminal point is `F_R`; the rest, reversed, is `F_L`.
pub fn split_lr(c: &TCurve) -> Result<(FrontierPath, FrontierPath), FrontierError> {
    let reg = region(c)?;
    let z = c.endpoint();
    let zi = reg.boundary.iter().position(|&p| p == z).ok_or(FrontierError::NotSimple)?;
    let right: Vec<EPoint> = reg.boundary[..=zi].to_vec();
    let mut left: Vec<EPoint> = reg.boundary[zi..].to_vec();
    left.push(reg.boundary[0]);
    left.reverse();
    let mk = |side, vertices: Vec<EPoint>| FrontierPath { side, angles: angles_of(&vertices), vertices, split_index: None };
    Ok((mk(Side::L, left), mk(Side::R, right)))
}

/// Frontiers with their I/S split at index `2^{n−1}`.
pub fn decompose(c: &TCurve, n: u32) -> Result<(FrontierPath, FrontierPath), FrontierError> {
    let (mut l, mut r) = split_lr(c)?;
    if n >= 1 {
        let s = 1usize << (n - 1);
        if s < l.vertices.len() && s < r.vertices.len() {
            l.split_index = Some(s);
            r.split_index = Some(s);
        }
    }
    Ok((l, r))
}

/// The `j`-th third (`j = 0, 1, 2` for `C^I, C^M, C^S`) of an `n`-folding
/// curve.
pub fn third(c: &TCurve, n: u32, j: usize) -> TCurve {
    let m = 3usize.pow(n - 1);
    let vs = c.vertices();
    let dirs = c.dirs();
    let signs = c.turns.signs[j * m..j * m + m - 1].to_vec();
    TCurve {
        origin: vs[j * m],
        dir0: dirs[j * m],
        turns: crate::foldseq::FoldSeq::new(signs),
        scale_exp: c.scale_exp,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), pass, detail: detail.into() }
    }
}

fn join(a: &[EPoint], b: &[EPoint]) -> Vec<EPoint> {
    let mut v = a.to_vec();
    if v.last() == b.first() {
        v.extend_from_slice(&b[1..]);
    } else {
        v.extend_from_slice(b);
    }
    v
}

/// The four concatenation laws relating the frontier halves of an
/// `n`-folding curve (`n ≥ 2`) to those of its thirds.
pub fn concatenation_laws(c: &TCurve, lambda: &Lambda) -> Result<Vec<Check>, FrontierError> {
    let n = lambda.len() as u32;
    let (l, r) = decompose(c, n)?;
    let parts: Vec<(FrontierPath, FrontierPath)> =
        (0..3).map(|j| decompose(&third(c, n, j), n - 1)).collect::<Result<_, _>>()?;
    let (li, ri) = (&parts[0].0, &parts[0].1);
    let (lm, rm) = (&parts[1].0, &parts[1].1);
    let (ls, rs) = (&parts[2].0, &parts[2].1);
    let laws = if lambda.get(n as usize) > 0 {
        [
            ("F_LI = F_LI(I).F_LS(M)", l.initial_part().to_vec(), join(li.initial_part(), lm.terminal_part())),
            ("F_LS = F_L(S)", l.terminal_part().to_vec(), ls.vertices.clone()),
            ("F_RI = F_R(I)", r.initial_part().to_vec(), ri.vertices.clone()),
            ("F_RS = F_RI(M).F_RS(S)", r.terminal_part().to_vec(), join(rm.initial_part(), rs.terminal_part())),
        ]
    } else {
        [
            ("F_LI = F_L(I)", l.initial_part().to_vec(), li.vertices.clone()),
            ("F_LS = F_LI(M).F_LS(S)", l.terminal_part().to_vec(), join(lm.initial_part(), ls.terminal_part())),
            ("F_RI = F_RI(I).F_RS(M)", r.initial_part().to_vec(), join(ri.initial_part(), rm.terminal_part())),
            ("F_RS = F_R(S)", r.terminal_part().to_vec(), rs.vertices.clone()),
        ]
    };
    Ok(laws
        .into_iter()
        .map(|(name, lhs, rhs)| {
            let pass = lhs == rhs;
            Check::new(name, pass, if pass { String::new() } else { format!("{} vs {} vertices", lhs.len(), rhs.len()) })
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lemma26Report {
    pub lambda: String,
    pub checks: Vec<Check>,
    pub pass: bool,
}

/// Edge counts, midpoint signs, the alternating sign law, sublattice
/// membership of frontier vertices, the position of the split points, and
/// (for `n ≥ 2`) the concatenation laws.
pub fn lemma26_report(c: &TCurve, lambda: &Lambda) -> Lemma26Report {
    let n = lambda.len() as u32;
    let mut checks = vec![];
    let finish = |checks: Vec<Check>| Lemma26Report {
        lambda: lambda.to_string(),
        pass: checks.iter().all(|c| c.pass),
        checks,
    };
    let (l, r) = match decompose(c, n) {
        Ok(x) => x,
        Err(e) => return finish(vec![Check::new("frontier", false, e.to_string())]),
    };
    let edges = 1usize << n;
    checks.push(Check::new(
        "edge count",
        l.edge_count() == edges && r.edge_count() == edges,
        format!("L {} R {} expected {}", l.edge_count(), r.edge_count(), edges),
    ));
    if l.edge_count() != edges || r.edge_count() != edges {
        return finish(checks);
    }
    let lset: HashSet<EPoint> = l.vertices.iter().copied().collect();
    let common: Vec<EPoint> = r.vertices.iter().copied().filter(|p| lset.contains(p)).collect();
    checks.push(Check::new(
        "F_L and F_R meet only at endpoints",
        common.len() == 2,
        format!("{} common vertices", common.len()),
    ));
    let mid = edges / 2;
    if n >= 1 {
        checks.push(Check::new(
            "midpoint signs",
            l.angle(mid) == -1 && r.angle(mid) == 1,
            format!("alpha {} beta {}", l.angle(mid), r.angle(mid)),
        ));
    }
    let mut bad = vec![];
    for k in 0..n.saturating_sub(1) {
        let lam = lambda.get(k as usize + 2);
        let mut i = 0usize;
        loop {
            let pos = (1usize << k) + (1usize << (k + 1)) * i;
            if pos >= edges {
                break;
            }
            let want = if i.is_multiple_of(2) { lam } else { -lam };
            if l.angle(pos) != want || r.angle(pos) != want {
                bad.push(pos);
            }
            i += 1;
        }
    }
    checks.push(Check::new("alternating sign law", bad.is_empty(), format!("{bad:?}")));
    let w = c.origin;
    let mut bad = vec![];
    for k in 1..=n {
        for (side, path) in [("L", &l), ("R", &r)] {
            for (i, &p) in path.vertices.iter().enumerate() {
                if divisible_by_theta_pow(p - w, k) != (i % (1 << k) == 0) {
                    bad.push(format!("{side}{i}@{k}"));
                }
            }
        }
    }
    checks.push(Check::new("V_k membership iff 2^k | i", bad.is_empty(), bad.join(" ")));
    if n >= 1 {
        let m = 3usize.pow(n - 1);
        let vs = c.vertices();
        let (x, y) = (vs[m], vs[2 * m]);
        let (lm, rm) = if lambda.get(n as usize) > 0 { (y, x) } else { (x, y) };
        checks.push(Check::new(
            "split points are the ends of C^M",
            l.vertices[mid] == lm && r.vertices[mid] == rm,
            String::new(),
        ));
    }
    if n >= 2 {
        match concatenation_laws(c, lambda) {
            Ok(v) => checks.extend(v),
            Err(e) => checks.push(Check::new("concatenation laws", false, e.to_string())),
        }
    }
    finish(checks)
}

/// Sides shared by two region triangles all carry a segment; sides with
/// both endpoints on the curve that touch no region triangle carry none.
pub fn inside_outside_ok(c: &TCurve) -> Result<bool, FrontierError> {
    let reg = region(c)?;
    let used: HashSet<EdgeKey> = c.edges().into_iter().collect();
    let mut count: HashMap<EdgeKey, u8> = HashMap::new();
    for t in &reg.triangles {
        for s in t.sides() {
            *count.entry(s).or_default() += 1;
        }
    }
    if count.iter().any(|(e, &k)| k == 2 && !used.contains(e)) {
        return Ok(false);
    }
    let vs: HashSet<EPoint> = c.vertices().into_iter().collect();
    for &x in &vs {
        for d in 0..3 {
            let e = EdgeKey::from_oriented(x, Dir6::new(d));
            if vs.contains(&e.endpoints().1) && !count.contains_key(&e) && used.contains(&e) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cor27Level {
    pub k: u32,
    /// Every residue `r mod 2^k` passing both tests within the path.
    pub residues: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cor27Report {
    pub levels: Vec<Cor27Level>,
    pub pass: bool,
}

/// For each `1 ≤ k ≤ k_max`, the residues `r mod 2^k` such that the path
/// vertices at `r + 2^k i` all lie in `W_k` (frame based at `base`) and
/// their signs alternate in `i`. Level 0 applies the sign test alone.
pub fn cor27_scan(path: &FrontierPath, base: EPoint, k_min: u32, k_max: u32) -> Cor27Report {
    let len = path.edge_count();
    let mut levels = vec![];
    for k in k_min..=k_max {
        let step = 1usize << k;
        let residues = (0..step)
            .filter(|&r| {
                let idx: Vec<usize> = (r..=len).step_by(step).collect();
                let in_w = k == 0 || idx.iter().all(|&i| w_contains(base, k, path.vertices[i]));
                let interior: Vec<usize> = idx.iter().copied().filter(|&i| i >= 1 && i < len).collect();
                let signs_ok = match interior.first() {
                    None => false,
                    Some(&first) => interior
                        .iter()
                        .all(|&i| path.angle(i) == if ((i - first) / step).is_multiple_of(2) { path.angle(first) } else { -path.angle(first) }),
                };
                in_w && signs_ok
            })
            .collect::<Vec<_>>();
        levels.push(Cor27Level { k, residues });
    }
    let pass = levels.iter().all(|l| !l.residues.is_empty());
    Cor27Report { levels, pass }
}
